"""Deterministic direction sets on the unit sphere."""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm, qmc

DEFAULT_COUNTS = {1: 2, 2: 64, 3: 256}


def default_count(dim: int) -> int:
    return DEFAULT_COUNTS.get(dim, 256)


def sphere_sample(dim: int, count: int | None = None, seed: int = 0) -> np.ndarray:
    """Roughly uniform unit directions, shape ``(count, dim)``.

    d = 1 gives {+1, -1}; d = 2 gives equally spaced angles starting at 0 (so
    the axes and diagonals are included whenever ``count`` is a multiple of 8);
    d = 3 uses the Fibonacci spiral; d >= 4 normalizes a scrambled Sobol
    sequence pushed through the normal quantile function.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    count = default_count(dim) if count is None else int(count)
    if count < 1:
        raise ValueError("need at least one direction")
    if dim == 2:
        theta = 2.0 * math.pi * np.arange(count) / count
        U = np.column_stack([np.cos(theta), np.sin(theta)])
        U[np.abs(U) < 1e-15] = 0.0
        return U
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        r = np.sqrt(1.0 - z * z)
        phi = math.pi * (3.0 - math.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    sob = qmc.Sobol(dim, scramble=True, seed=seed)
    m = int(math.ceil(math.log2(max(count, 2))))
    P = sob.random_base2(m)[:count]
    G = norm.ppf(np.clip(P, 1e-12, 1 - 1e-12))
    return G / np.linalg.norm(G, axis=1, keepdims=True)
