"""Run settings: shell sampler, direction sample, tolerances, extra corpus entries.

Settings come from an INI file with sections [shells], [sphere], [tolerances],
[corpus] (``id = expression``) and [suite] (``functions = id, id, ...``).
Every key is optional.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .classify import Tolerances
from .errors import ConfigError, ExpressionError
from .funcspace import DEFAULT_CORPUS, Corpus
from .limits import ShellConfig


@dataclass(frozen=True)
class Settings:
    shells: ShellConfig = field(default_factory=ShellConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    sphere_count: int | None = None
    consistency_tol: float = 1e-3
    corpus_expressions: tuple = ()
    suite_functions: tuple | None = None

    @property
    def corpus(self) -> Corpus:
        if not self.corpus_expressions:
            return DEFAULT_CORPUS
        return DEFAULT_CORPUS.with_expressions(dict(self.corpus_expressions))

    def with_seed(self, seed: int | None) -> "Settings":
        if seed is None:
            return self
        return dataclasses.replace(self, shells=self.shells.replace(seed=int(seed)))

    def canonical(self) -> dict:
        return {
            "shells": dataclasses.asdict(self.shells),
            "tolerances": dataclasses.asdict(self.tolerances),
            "sphere": {"count": self.sphere_count},
            "consistency_tol": self.consistency_tol,
            "corpus": dict(self.corpus_expressions),
            "suite": None if self.suite_functions is None else list(self.suite_functions),
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _coerce(cls, section: str, items: dict):
    """Build dataclass ``cls`` from string values, typed by its field defaults."""
    kinds = {f.name: type(f.default) for f in dataclasses.fields(cls)}
    out = {}
    for key, raw in items.items():
        if key not in kinds:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        try:
            out[key] = kinds[key](raw) if kinds[key] is not int else int(raw, 0)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    try:
        return cls(**out)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_settings(text: str, source: str = "<string>") -> Settings:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    allowed = {"shells", "sphere", "tolerances", "corpus", "suite"}
    extra = set(cp.sections()) - allowed
    if extra:
        raise ConfigError(f"{source}: unknown sections {sorted(extra)}")
    shells = _coerce(ShellConfig, "shells", dict(cp["shells"])) if cp.has_section("shells") else ShellConfig()
    tol_items = dict(cp["tolerances"]) if cp.has_section("tolerances") else {}
    consistency = float(tol_items.pop("consistency", 1e-3))
    tolerances = _coerce(Tolerances, "tolerances", tol_items)
    sphere_count = None
    if cp.has_section("sphere"):
        items = dict(cp["sphere"])
        unknown = set(items) - {"count"}
        if unknown:
            raise ConfigError(f"[sphere] unknown keys {sorted(unknown)}")
        if "count" in items:
            sphere_count = int(items["count"])
            if sphere_count < 1:
                raise ConfigError("[sphere] count must be positive")
    corpus = tuple(sorted(dict(cp["corpus"]).items())) if cp.has_section("corpus") else ()
    settings_corpus_check(corpus)
    suite = None
    if cp.has_section("suite"):
        items = dict(cp["suite"])
        unknown = set(items) - {"functions"}
        if unknown:
            raise ConfigError(f"[suite] unknown keys {sorted(unknown)}")
        if "functions" in items:
            suite = tuple(s.strip() for s in items["functions"].replace("\n", ",").split(",") if s.strip())
    return Settings(shells, tolerances, sphere_count, consistency, corpus, suite)


def settings_corpus_check(corpus: tuple) -> None:
    try:
        DEFAULT_CORPUS.with_expressions(dict(corpus))
    except ExpressionError as exc:
        raise ConfigError(f"[corpus] {exc}") from exc


def load_settings(path=None) -> Settings:
    if path is None:
        return Settings()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_settings(text, str(path))
