"""Prefix-sum majorization and the transport distance between real sequences.

For equal-length sequences x and y (entries may be negative), x majorizes y
when every prefix sum of x dominates the corresponding prefix sum of y and
the totals agree. The transport distance

    T(x, y) = sum_j j * (y_j - x_j) = sum_j (prefix_x(j) - prefix_y(j))

is the signed cost of moving the coordinate-wise discrepancy along the index
line; when x majorizes y it equals the prefix-sum Wasserstein distance
W(x, y) = sum_j |prefix_x(j) - prefix_y(j)|, and it bounds the l1 gap via
||x - y||_1 <= 2 T(x, y) (one unit of mass moved one index fixes two
coordinate differences, so the factor 2 is tight, e.g. x=(1,0), y=(0,1)).
"""

from __future__ import annotations

import numpy as np

# Tolerance for the equal-totals check, scaled by the l1 mass of x because
# entrywise squares of frame vectors span several orders of magnitude.
MAJORIZATION_TOL = 1e-10


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float).ravel()
    ya = np.asarray(y, dtype=float).ravel()
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.size} vs {ya.size}")
    if xa.size < 1:
        raise ValueError("sequences must have length >= 1")
    return xa, ya


def majorizes(x, y, tol: float = MAJORIZATION_TOL) -> bool:
    """True iff x majorizes y: prefix sums dominate and totals agree.

    Both checks use the slack ``tol * (1 + ||x||_1)``.
    """
    xa, ya = _pair(x, y)
    slack = tol * (1.0 + float(np.abs(xa).sum()))
    px = np.cumsum(xa)
    py = np.cumsum(ya)
    if abs(px[-1] - py[-1]) > slack:
        return False
    return bool(np.all(px >= py - slack))


def transport_distance(x, y) -> float:
    """T(x, y) = sum_j j (y_j - x_j), evaluated on any pair.

    The formula is total; callers relying on its transport interpretation
    must ensure x majorizes y themselves.
    """
    xa, ya = _pair(x, y)
    j = np.arange(1, xa.size + 1, dtype=float)
    return float((j * (ya - xa)).sum())


def wasserstein_prefix(x, y) -> float:
    """Sum of absolute prefix-sum gaps, sum_j |prefix_x(j) - prefix_y(j)|."""
    xa, ya = _pair(x, y)
    return float(np.abs(np.cumsum(xa) - np.cumsum(ya)).sum())
