"""Radial isotropic scaling of a frame with respect to a coefficient vector.

A frame U = u_1..u_n is in radial isotropic position with respect to c when
sum_i c_i (u_i/||u_i||)(u_i/||u_i||)^T = I. The linear map A achieving this
for a given frame is found by minimizing the convex potential

    f(t) = log det M(t) - c . t,   M(t) = sum_i c_i e^{t_i} u_i u_i^T,

whose stationary points satisfy e^{t_i} u_i^T M(t)^{-1} u_i = 1 for all i;
A = M(t*)^{-1/2} then places the frame in radial isotropic position. The
potential is invariant under t -> t + s 1 (when sum c_i = d), so iterates
are gauge-fixed to sum t_i = 0. The minimum exists exactly when c lies in
the basis polytope of U; outside it the iterates escape to infinity along
a blocking subset, which the solver diagnoses.

The solver is damped Newton with an Armijo backtracking line search and a
gradient-descent fallback; convergence is declared only after the residual
J = sum_i c_i w_i w_i^T - I of the renormalized scaled frame has been
recomputed and its largest entry checked against the requested delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Frame
from .polytope import MAX_POLYTOPE_N, basis_polytope_membership, validate_coefficients

DEFAULT_MAX_ITER = 200

# Armijo sufficient-decrease constant, plus an absolute floor so steps are
# still accepted once objective decrements fall below float64 resolution.
_ARMIJO_C = 1e-4
_ARMIJO_NOISE = 4e-16
_MAX_HALVINGS = 60

# Under gauge fixing, a finite minimizer exists iff c is in the basis
# polytope; a gauge-fixed iterate beyond this magnitude means escape.
_DIVERGENCE_OFFSET = 50.0
_DIVERGENCE_SLOPE = 10.0

# Converged solutions must also satisfy the stationarity identity
# e^{t_i} ||A u_i||^2 = 1 within this multiple of delta.
STATIONARITY_FACTOR = 10.0


@dataclass(frozen=True)
class ScalingSolution:
    """Transformation placing a frame in radial isotropic position.

    ``residual`` is J = sum_i c_i w_i w_i^T - I for the renormalized
    vectors w_i = A u_i / ||A u_i||, recomputed at the returned iterate;
    ``residual_inf`` is its largest entry in absolute value.
    """

    t: np.ndarray
    A: np.ndarray
    residual: np.ndarray
    residual_inf: float
    iterations: int
    converged: bool
    stationarity_gap: float


@dataclass(frozen=True)
class DiagonalScaling:
    """A sorted nonnegative diagonal map plus the rotation that diagonalizes it."""

    lambdas: np.ndarray
    rotation: np.ndarray


class ScalingConvergenceError(RuntimeError):
    """Raised when the scaling solver cannot reach the requested residual.

    Carries the last iterate and, when brute force is feasible, the subset
    of indices blocking membership of c in the basis polytope.
    """

    def __init__(
        self,
        message: str,
        *,
        t: np.ndarray,
        residual_inf: float,
        iterations: int,
        blocking_subset: tuple[int, ...] | None,
    ) -> None:
        super().__init__(message)
        self.t = t
        self.residual_inf = residual_inf
        self.iterations = iterations
        self.blocking_subset = blocking_subset


def _weighted_sum(vecs: np.ndarray, c: np.ndarray, t: np.ndarray) -> np.ndarray:
    w = c * np.exp(t)
    return (vecs.T * w) @ vecs


def _as_t(frame: Frame, t) -> np.ndarray:
    ta = np.asarray(t, dtype=float).ravel()
    if ta.size != frame.n:
        raise ValueError(f"t has length {ta.size}, expected {frame.n}")
    return ta


def scaling_potential(frame: Frame, c, t) -> float:
    """Convex potential f(t) = log det M(t) - c . t.

    Returns +inf when the weighted sum M(t) is singular (or numerically
    indefinite), which happens only off the feasible region.
    """
    ca = validate_coefficients(c, frame.d, frame.n)
    ta = _as_t(frame, t)
    with np.errstate(over="ignore", invalid="ignore"):
        M = _weighted_sum(frame.vectors, ca, ta)
        if not np.all(np.isfinite(M)):
            return float("inf")
        sign, logdet = np.linalg.slogdet(M)
    if sign <= 0 or not np.isfinite(logdet):
        return float("inf")
    return float(logdet - ca @ ta)


def _gram(vecs: np.ndarray, c: np.ndarray, t: np.ndarray) -> np.ndarray:
    """G with G_ij = sqrt(c_i c_j) e^{(t_i+t_j)/2} u_i^T M^{-1} u_j.

    G is the orthogonal projector onto the row space of the weighted
    vectors: diag(G) - c is the potential gradient and diag(diag G) - G*G
    its Hessian.
    """
    M = _weighted_sum(vecs, c, t)
    Z = vecs * np.sqrt(c * np.exp(t))[:, None]
    X = np.linalg.solve(M, Z.T)
    return Z @ X


def scaling_gradient(frame: Frame, c, t) -> np.ndarray:
    """Gradient g_i = c_i (e^{t_i} u_i^T M(t)^{-1} u_i - 1); sums to zero."""
    ca = validate_coefficients(c, frame.d, frame.n)
    ta = _as_t(frame, t)
    try:
        G = _gram(frame.vectors, ca, ta)
    except np.linalg.LinAlgError as exc:
        raise ValueError("weighted sum M(t) is singular") from exc
    return np.diag(G) - ca


def scaling_hessian(frame: Frame, c, t) -> np.ndarray:
    """Closed-form Hessian of the potential; PSD with null vector 1."""
    ca = validate_coefficients(c, frame.d, frame.n)
    ta = _as_t(frame, t)
    try:
        G = _gram(frame.vectors, ca, ta)
    except np.linalg.LinAlgError as exc:
        raise ValueError("weighted sum M(t) is singular") from exc
    return np.diag(np.diag(G)) - G * G


def _inverse_sqrt(M: np.ndarray) -> np.ndarray:
    eigs, Q = np.linalg.eigh(M)
    if eigs[0] <= 0 or not np.all(np.isfinite(eigs)):
        raise np.linalg.LinAlgError("matrix not positive definite")
    return (Q / np.sqrt(eigs)) @ Q.T


def isotropy_residual(frame: Frame, c, A) -> tuple[np.ndarray, float]:
    """Residual J = sum_i c_i w_i w_i^T - I for w_i = A u_i / ||A u_i||.

    Returns (J, max |J_ij|). Raises if some A u_i vanishes (A singular on
    a frame vector), since renormalization is then undefined.
    """
    ca = validate_coefficients(c, frame.d, frame.n)
    Aa = np.asarray(A, dtype=float)
    if Aa.shape != (frame.d, frame.d):
        raise ValueError(f"A must be {frame.d} x {frame.d}, got {Aa.shape}")
    images = frame.vectors @ Aa.T
    norms2 = (images**2).sum(axis=1)
    dead = np.flatnonzero(norms2 == 0.0)
    if dead.size:
        raise ValueError(f"A u_i = 0 at index {dead[0]}; A is singular on the frame")
    unit = images / np.sqrt(norms2)[:, None]
    J = (unit.T * ca) @ unit - np.eye(frame.d)
    return J, float(np.abs(J).max())


def verify_radial_isotropic(frame: Frame, c, A, delta: float) -> tuple[np.ndarray, bool]:
    """Recompute the isotropy residual of A and test ||J||_inf <= delta."""
    J, resid = isotropy_residual(frame, c, A)
    return J, resid <= delta


def _diagnose_blocking(frame: Frame, c) -> tuple[int, ...] | None:
    if frame.n > MAX_POLYTOPE_N:
        return None
    try:
        result = basis_polytope_membership(frame, c)
    except ValueError:
        return None
    return result.violating_subset


def solve_radial_isotropic(
    frame: Frame,
    c,
    delta: float,
    max_iter: int = DEFAULT_MAX_ITER,
    t0=None,
) -> ScalingSolution:
    """Find A with sum_i c_i (A u_i/||A u_i||)(A u_i/||A u_i||)^T = I + J,
    ||J||_inf <= delta.

    Requires c in the basis polytope of the frame (callers certify via the
    polytope module at enumerable sizes, or via general position plus
    n > d for uniform c). On failure raises ScalingConvergenceError with a
    divergence diagnosis.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    ca = validate_coefficients(c, frame.d, frame.n)
    vecs = frame.vectors
    n = frame.n
    if t0 is None:
        t = np.zeros(n)
    else:
        t = _as_t(frame, t0).copy()
        t -= t.mean()
    escape = _DIVERGENCE_OFFSET + _DIVERGENCE_SLOPE * np.log(n * frame.d)
    ones = np.ones((n, n)) / n

    def fail(reason: str, resid: float, iterations: int) -> ScalingConvergenceError:
        blocking = _diagnose_blocking(frame, ca)
        hint = (
            f" blocking subset {list(blocking)}"
            if blocking is not None
            else " (no blocking subset found at this size)"
        )
        extreme = int(np.argmax(np.abs(t)))
        return ScalingConvergenceError(
            f"{reason}; likely c outside the basis polytope:{hint}; "
            f"t diverges at index {extreme} (t_i = {t[extreme]:.3g})",
            t=t.copy(),
            residual_inf=resid,
            iterations=iterations,
            blocking_subset=blocking,
        )

    iterations = 0
    while True:
        with np.errstate(over="ignore", invalid="ignore"):
            M = _weighted_sum(vecs, ca, t)
        if not np.all(np.isfinite(M)):
            raise fail("weighted sum overflowed", float("inf"), iterations)
        try:
            A = _inverse_sqrt(M)
        except np.linalg.LinAlgError:
            raise fail("weighted sum M(t) became singular", float("inf"), iterations)
        images = vecs @ A
        norms2 = (images**2).sum(axis=1)
        unit = images / np.sqrt(norms2)[:, None]
        J = (unit.T * ca) @ unit - np.eye(frame.d)
        resid = float(np.abs(J).max())
        stationarity = float(np.abs(np.exp(t) * norms2 - 1.0).max())
        if resid <= delta and stationarity <= STATIONARITY_FACTOR * delta:
            return ScalingSolution(
                t=t.copy(),
                A=A,
                residual=J,
                residual_inf=resid,
                iterations=iterations,
                converged=True,
                stationarity_gap=stationarity,
            )
        if float(np.abs(t).max()) > escape:
            raise fail("iterates escaped to infinity", resid, iterations)
        if iterations >= max_iter:
            raise fail(f"no convergence within {max_iter} iterations", resid, iterations)

        # Newton direction on the gauge-fixed subspace; the rank-one term
        # pins the null direction 1 without disturbing g (g . 1 = 0).
        Z = vecs * np.sqrt(ca * np.exp(t))[:, None]
        G = Z @ np.linalg.solve(M, Z.T)
        g = np.diag(G) - ca
        H = np.diag(np.diag(G)) - G * G
        reg = H + max(float(np.trace(H)) / n, 1e-14) * ones + 1e-14 * np.eye(n)
        try:
            p = -np.linalg.solve(reg, g)
        except np.linalg.LinAlgError:
            p = -g
        if g @ p >= 0:
            p = -g
        p -= p.mean()

        f0 = float(np.linalg.slogdet(M)[1] - ca @ t)
        noise = _ARMIJO_NOISE * (1.0 + abs(f0))
        slope = float(g @ p)
        step = 1.0
        for _ in range(_MAX_HALVINGS):
            trial = scaling_potential(frame, ca, t + step * p)
            if trial <= f0 + _ARMIJO_C * step * slope + noise:
                break
            step *= 0.5
        t = t + step * p
        t -= t.mean()
        iterations += 1


def diagonalize_transform(A, frame: Frame) -> tuple[DiagonalScaling, Frame]:
    """Split A into a sorted diagonal map plus a basis rotation.

    Writing A = C S D^T (singular value decomposition), D S D^T places the
    frame in radial isotropic position whenever A does, because the
    renormalized outer-product sum is invariant under the orthogonal map
    C D^T. Returns the sorted singular values together with the frame
    expressed in the D basis, where the scaling acts as diag(lambdas).
    Distances between frames are preserved by the basis change.
    """
    Aa = np.asarray(A, dtype=float)
    if Aa.shape != (frame.d, frame.d):
        raise ValueError(f"A must be {frame.d} x {frame.d}, got {Aa.shape}")
    _, sigma, vt = np.linalg.svd(Aa)
    if sigma[-1] <= 0:
        raise ValueError("A is singular")
    rotation = vt.T
    rotated = Frame(frame.vectors @ rotation)
    return DiagonalScaling(lambdas=sigma, rotation=rotation), rotated
