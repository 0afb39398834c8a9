"""Frames of vectors in R^d and their equal-norm-Parseval diagnostics.

A frame is an ordered sequence of n vectors in R^d. It is an equal norm
Parseval frame (ENPF) when the frame operator sum_i v_i v_i^T equals the
identity and every squared norm equals d/n. The diagnostics here measure
the worst relative violation of the two conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import spawn_rng

# Frames measuring below this are treated as exact ENPFs: double precision
# leaves several orders of headroom below every certified tolerance.
ENPF_TOL = 1e-12

# perturb_frame rescales its noise until the measured eps lands in
# [eps_target / BAND_RATIO, eps_target].
BAND_RATIO = 4.0

_MAX_BAND_ITERS = 80


@dataclass(frozen=True, eq=False)
class Frame:
    """Ordered sequence of n vectors in R^d, stored as rows of ``vectors``.

    Vector order is significant: distances between frames are computed
    index-wise. Instances are immutable and safe to share across threads.
    """

    vectors: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.vectors, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"vectors must be 2-d (n, d), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("need n >= 1 vectors of dimension d >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("frame vectors must have finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def squared_norms(self) -> np.ndarray:
        return (self.vectors**2).sum(axis=1)


@dataclass(frozen=True)
class FrameMetrics:
    """Nearness of a frame to an equal norm Parseval frame.

    ``eps_op`` is the smallest eps with (1-eps) I <= S <= (1+eps) I for the
    frame operator S; ``eps_norm`` the smallest eps with every squared norm
    within (1 +- eps) d/n; ``eps`` is their maximum.
    """

    eps_op: float
    eps_norm: float
    eps: float


def frame_operator(frame: Frame) -> np.ndarray:
    """Return S = sum_i v_i v_i^T, a symmetric PSD d x d matrix."""
    vecs = frame.vectors
    S = vecs.T @ vecs
    return 0.5 * (S + S.T)


def frame_metrics(frame: Frame) -> FrameMetrics:
    """Measure how far ``frame`` is from an equal norm Parseval frame.

    A degenerate frame operator (zero eigenvalue) simply reports
    eps_op >= 1; it is not an error.
    """
    S = frame_operator(frame)
    eigs = np.linalg.eigvalsh(S)
    eps_op = max(1.0 - eigs[0], eigs[-1] - 1.0, 0.0)
    target = frame.d / frame.n
    eps_norm = float(np.max(np.abs(frame.squared_norms() / target - 1.0)))
    return FrameMetrics(eps_op=float(eps_op), eps_norm=eps_norm, eps=float(max(eps_op, eps_norm)))


def dist_sq(first: Frame, second: Frame) -> float:
    """Index-wise squared distance sum_i ||v_i - w_i||^2."""
    if first.d != second.d or first.n != second.n:
        raise ValueError(
            f"frame shape mismatch: ({first.n}, {first.d}) vs ({second.n}, {second.d})"
        )
    diff = first.vectors - second.vectors
    return float((diff * diff).sum())


def _harmonic_vectors(d: int, n: int) -> np.ndarray:
    """Rows of an orthogonalized trigonometric system, scaled to an ENPF.

    The k-th vector stacks cos/sin of the first d//2 frequencies at angle
    2 pi k / n (plus a constant coordinate when d is odd), scaled by
    sqrt(2/n). Rows of the underlying matrix are orthonormal for n > d,
    and every column has squared norm exactly d/n.
    """
    if n == d:
        return np.eye(d)
    k = np.arange(n)
    rows = []
    if d % 2 == 1:
        rows.append(np.full(n, 1.0 / np.sqrt(2.0)))
    for j in range(1, d // 2 + 1):
        ang = 2.0 * np.pi * j * k / n
        rows.append(np.cos(ang))
        rows.append(np.sin(ang))
    mat = np.sqrt(2.0 / n) * np.stack(rows)
    return mat.T.copy()


def generate_enpf(d: int, n: int, seed: int) -> Frame:
    """Generate an equal norm Parseval frame with n vectors in R^d.

    Uses the real harmonic construction rotated by a seed-determined
    orthogonal matrix, then re-verifies the result with frame_metrics
    rather than trusting the construction.
    """
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive")
    if n < d:
        raise ValueError(f"no Parseval frame with full-rank frame operator for n={n} < d={d}")
    vecs = _harmonic_vectors(d, n)
    rng = spawn_rng(seed, 0)
    gauss = rng.standard_normal((d, d))
    q, r = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(r))
    frame = Frame(vecs @ q.T)
    measured = frame_metrics(frame).eps
    if measured > ENPF_TOL:
        raise RuntimeError(f"generator self-check failed: eps={measured:.3e} for d={d}, n={n}")
    return frame


def perturb_frame(frame: Frame, eps_target: float, seed: int) -> Frame:
    """Perturb an exact ENPF until its measured eps lies in the target band.

    The returned frame satisfies eps_target / 4 <= eps <= eps_target, so
    eps is a meaningful input scale for downstream consumers. The noise
    direction is fixed by the seed; only its amplitude is rescaled.
    """
    if eps_target <= 0:
        raise ValueError("eps_target must be positive")
    base = frame_metrics(frame).eps
    if base > ENPF_TOL:
        raise ValueError(f"input is not an ENPF up to tolerance: eps={base:.3e}")
    rng = spawn_rng(seed, 1)
    noise = rng.standard_normal(frame.vectors.shape)
    lower = eps_target / BAND_RATIO
    scale = eps_target / max(float(np.abs(noise).max()), 1.0)
    for _ in range(_MAX_BAND_ITERS):
        candidate = Frame(frame.vectors + scale * noise)
        measured = frame_metrics(candidate).eps
        if lower <= measured <= eps_target:
            return candidate
        # eps is locally ~linear in the amplitude; aim at mid-band
        scale *= 0.5 * eps_target / measured
    raise RuntimeError(f"could not land in eps band [{lower:g}, {eps_target:g}]")


def renormalize(frame: Frame, target_sq_norm: float) -> Frame:
    """Scale each vector to squared norm ``target_sq_norm``, keeping directions."""
    if target_sq_norm <= 0:
        raise ValueError("target_sq_norm must be positive")
    norms2 = frame.squared_norms()
    zero = np.flatnonzero(norms2 == 0.0)
    if zero.size:
        raise ValueError(f"cannot renormalize zero vector at index {zero[0]}")
    return Frame(frame.vectors * np.sqrt(target_sq_norm / norms2)[:, None])
