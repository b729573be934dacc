import csv
import json

import numpy as np
import pytest

from hadamardopt.config import Settings, load_settings, parse_settings
from hadamardopt.errors import ConfigError
from hadamardopt.extreal import NEG_INF, ExtReal
from hadamardopt.report import dumps, record, to_jsonable, write_csv


def test_defaults():
    s = load_settings(None)
    assert s == Settings()
    assert s.shells.shells == 14 and s.tolerances.membership == 1e-6 and s.consistency_tol == 1e-3


def test_parse_all_sections():
    s = parse_settings("""
[shells]
ratio = 0.25
shells = 8
seed = 0x10
[sphere]
count = 24
[tolerances]
vanish = 1e-4
consistency = 5e-3
[corpus]
bump = x1^2 + 3*x2^2
[suite]
functions = quad_2d,
    bump
""")
    assert s.shells.ratio == 0.25 and s.shells.shells == 8 and s.shells.seed == 16
    assert s.sphere_count == 24 and s.tolerances.vanish == 1e-4 and s.consistency_tol == 5e-3
    assert s.suite_functions == ("quad_2d", "bump")
    f = s.corpus.get("bump")
    assert f.dim == 2 and f([1.0, 1.0]) == 4.0


@pytest.mark.parametrize("text", [
    "[nope]\na = 1",
    "[shells]\nflavour = 3",
    "[shells]\nshells = many",
    "[shells]\nratio = 1.5",
    "[sphere]\ncount = 0",
    "[sphere]\nangles = 3",
    "[corpus]\nbad = x1 +* 2",
    "[suite]\nwhich = all",
    "not an ini file",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_settings(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "absent.ini")


def test_digest_tracks_content():
    a, b = Settings(), parse_settings("[shells]\nseed = 7")
    assert a.digest() == Settings().digest() and a.digest() != b.digest()
    assert Settings().with_seed(7).digest() == b.digest()
    assert Settings().with_seed(None) is not None


def test_jsonable_values():
    doc = to_jsonable({"a": ExtReal.from_float(np.inf), "b": NEG_INF, "c": np.float64(np.nan),
                       "d": np.arange(2), "e": (np.bool_(True), 1.5)})
    assert doc == {"a": "+inf", "b": "-inf", "c": None, "d": [0, 1], "e": [True, 1.5]}
    assert json.loads(dumps({"x": -np.inf})) == {"x": "-inf"}


def test_record_schema():
    rec = record("derive", "quad_2d", [0.0, 1.0], 2, Settings(), True, value=ExtReal.from_float(2.0))
    assert {"command", "fn", "point", "order", "stabilized", "seed", "config_digest", "value"} <= set(rec)
    assert rec["point"] == [0.0, 1.0] and rec["value"] == 2.0


def test_csv(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, [{"a": 1, "b": [1, 2]}, {"a": -np.inf, "c": {"k": 1}}])
    rows = list(csv.DictReader(open(path, encoding="utf-8")))
    assert rows[0]["b"] == "[1, 2]" and rows[1]["a"] == "-inf" and rows[1]["c"] == '{"k": 1}'
