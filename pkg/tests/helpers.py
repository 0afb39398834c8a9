"""Shared test oracles, kept independent of the code paths they check."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from framescale import Frame, scaling_potential


def cofactor_det(M: np.ndarray) -> float:
    """Determinant by recursive cofactor expansion along the first row."""
    m = np.asarray(M, dtype=float)
    k = m.shape[0]
    if k == 1:
        return float(m[0, 0])
    total = 0.0
    for j in range(k):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += ((-1.0) ** j) * m[0, j] * cofactor_det(minor)
    return total


def _psd_by_minors(M: np.ndarray, tol: float = 1e-12) -> bool:
    """PSD test via nonnegativity of all principal minors (d <= 3)."""
    d = M.shape[0]
    scale = max(1.0, float(np.abs(M).max()))
    for size in range(1, d + 1):
        for idx in combinations(range(d), size):
            sub = M[np.ix_(idx, idx)]
            if cofactor_det(sub) < -tol * scale**size:
                return False
    return True


def eps_op_bruteforce(S: np.ndarray, lo: float = 0.0, hi: float = 64.0) -> float:
    """Smallest eps with (1-eps) I <= S <= (1+eps) I, by bisection on a
    minor-based semidefinite test. Independent of any eigendecomposition."""
    d = S.shape[0]
    eye = np.eye(d)

    def sandwiched(eps: float) -> bool:
        return _psd_by_minors((1.0 + eps) * eye - S) and _psd_by_minors(S - (1.0 - eps) * eye)

    assert sandwiched(hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if sandwiched(mid):
            hi = mid
        else:
            lo = mid
    return hi


def fd_gradient(frame: Frame, c, t, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of the scaling potential."""
    t = np.asarray(t, dtype=float)
    grad = np.zeros_like(t)
    for i in range(t.size):
        up = t.copy()
        down = t.copy()
        up[i] += step
        down[i] -= step
        grad[i] = (scaling_potential(frame, c, up) - scaling_potential(frame, c, down)) / (2 * step)
    return grad


def random_majorizing_pair(rng: np.random.Generator, d: int) -> tuple[np.ndarray, np.ndarray]:
    """A pair (x, y) with x majorizing y, built from rightward mass moves.

    Moving mass from an earlier to a later index lowers the intermediate
    prefix sums of y below those of x while keeping totals equal, so x
    majorizes y by construction.
    """
    x = rng.standard_normal(d) * rng.uniform(0.1, 10.0)
    y = x.copy()
    for _ in range(int(rng.integers(1, 6))):
        i, j = sorted(rng.choice(d, size=2, replace=False))
        mass = rng.uniform(0.0, 2.0)
        y[i] -= mass
        y[j] += mass
    return x, y


def random_generic_frame(rng: np.random.Generator, d: int, n: int) -> Frame:
    """Gaussian vectors: every d-subset is independent almost surely."""
    return Frame(rng.standard_normal((n, d)))


def mercedes_frame() -> Frame:
    """Three unit-spaced directions in the plane, scaled to an exact ENPF."""
    k = np.arange(3)
    ang = 2.0 * np.pi * k / 3.0
    return Frame(np.sqrt(2.0 / 3.0) * np.stack([np.cos(ang), np.sin(ang)]).T)
