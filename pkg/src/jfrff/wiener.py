"""Optimal diagonal filtering in the joint fractional domain.

Given full second-order statistics of a linear observation
``Y = G_graph X G_time + N``, the best order-(alpha, beta) diagonal filter
minimizes ``E || inv_transform(diag(h) forward_transform(y)) - x ||^2``.
With ``A`` the inverse-transform matrix, ``B`` the forward one, and
``R_yy``, ``R_xy`` the observation second moments, the minimizer solves the
normal equations ``M h = c`` where

    M[k, l] = (A^H A)[k, l] * (B R_yy B^H)[l, k]
    c[k]    = (A^H R_xy B^H)[k, k]

and the attained objective is ``tr(R_xx) - Re(c^H h)``. ``M`` is the Schur
product of two positive semidefinite matrices, hence itself PSD; when it is
numerically singular the solver refuses rather than regularizing silently,
and an explicit ridge term is available instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError
from .jfrft import JointOperator, forward, inverse
from .validation import as_complex_matrix, check_fraction_order, check_square

_COND_LIMIT = 1e12
_HERM_TOL = 1e-10
_PSD_TOL = 1e-8

DEFAULT_ORDER_GRID = tuple(np.round(np.arange(0.0, 2.0 + 1e-9, 0.1), 10))


@dataclass(frozen=True)
class SecondOrderStats:
    """Second moments of the clean signal and noise plus the channel pair.

    ``r_xx``, ``r_nn``, ``r_xn``, ``r_nx`` are moments of the column-major
    vectorized signal/noise (shape ND x ND); ``g_graph`` (N x N) and
    ``g_time`` (D x D) are the known left/right channel matrices.
    """

    r_xx: np.ndarray
    r_nn: np.ndarray
    r_xn: np.ndarray
    r_nx: np.ndarray
    g_graph: np.ndarray
    g_time: np.ndarray

    def __post_init__(self):
        for name in ("r_xx", "r_nn", "r_xn", "r_nx", "g_graph", "g_time"):
            a = check_square(as_complex_matrix(getattr(self, name), name), name)
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        nd = self.r_xx.shape[0]
        for name in ("r_nn", "r_xn", "r_nx"):
            if getattr(self, name).shape[0] != nd:
                raise ValueError(f"{name} must match r_xx shape {self.r_xx.shape}")
        if self.g_graph.shape[0] * self.g_time.shape[0] != nd:
            raise ValueError(
                f"g_graph {self.g_graph.shape} and g_time {self.g_time.shape} "
                f"do not factor the moment size {nd}"
            )
        for name in ("r_xx", "r_nn"):
            r = getattr(self, name)
            scale = max(1.0, float(np.max(np.abs(r))))
            if float(np.max(np.abs(r - r.conj().T))) > _HERM_TOL * scale:
                raise ValueError(f"{name} must be Hermitian")
            if float(np.min(np.linalg.eigvalsh(r))) < -_PSD_TOL * scale:
                raise ValueError(f"{name} must be positive semidefinite")
        scale = max(1.0, float(np.max(np.abs(self.r_xn))))
        if float(np.max(np.abs(self.r_nx - self.r_xn.conj().T))) > _HERM_TOL * scale:
            raise ValueError("r_nx must equal the conjugate transpose of r_xn")

    @property
    def nd(self) -> int:
        return self.r_xx.shape[0]


@dataclass(frozen=True)
class DiagonalFilter:
    """Diagonal filter coefficients tied to the order pair they were solved at."""

    coefficients: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128).copy()
        if c.ndim != 1:
            raise ValueError(f"coefficients must be a vector, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "alpha", check_fraction_order(self.alpha, "alpha"))
        object.__setattr__(self, "beta", check_fraction_order(self.beta, "beta"))


def observe(x: np.ndarray, n: np.ndarray, stats: SecondOrderStats) -> np.ndarray:
    """Push a clean frame through the channel and add noise:
    ``G_graph @ X @ G_time + N``."""
    x = np.asarray(x, dtype=np.complex128)
    n = np.asarray(n, dtype=np.complex128)
    if x.shape != n.shape:
        raise ValueError(f"x and n must share a shape, got {x.shape} and {n.shape}")
    ng, dt = stats.g_graph.shape[0], stats.g_time.shape[0]
    if x.shape[-2:] != (ng, dt):
        raise ValueError(f"x must have trailing shape ({ng}, {dt}), got {x.shape}")
    return stats.g_graph @ x @ stats.g_time + n


def _vec(samples: np.ndarray) -> np.ndarray:
    """Column-major vectorization of each (N, D) frame in a (M, N, D) stack,
    returned as (M, N*D)."""
    m = samples.shape[0]
    return samples.transpose(0, 2, 1).reshape(m, -1)


def empirical_stats(
    clean,
    noisy,
    g_graph: np.ndarray | None = None,
    g_time: np.ndarray | None = None,
) -> SecondOrderStats:
    """Estimate second-order statistics from paired clean/noisy samples.

    Noise realizations are inferred per sample as
    ``n = y - G_graph x G_time``. Moments are raw (uncentered) sample
    averages of the vectorized frames, Hermitian-symmetrized where symmetry
    is structural.
    """
    clean = np.asarray(clean, dtype=np.complex128)
    noisy = np.asarray(noisy, dtype=np.complex128)
    if clean.ndim == 2:
        clean = clean[np.newaxis]
    if noisy.ndim == 2:
        noisy = noisy[np.newaxis]
    if clean.size == 0 or clean.shape[0] == 0:
        raise ValueError("empirical_stats requires at least one sample")
    if clean.shape != noisy.shape:
        raise ValueError(
            f"clean and noisy stacks must share a shape, got {clean.shape} and {noisy.shape}"
        )
    m, n, d = clean.shape
    g_graph = np.eye(n, dtype=np.complex128) if g_graph is None else as_complex_matrix(g_graph, "g_graph")
    g_time = np.eye(d, dtype=np.complex128) if g_time is None else as_complex_matrix(g_time, "g_time")

    noise = noisy - g_graph @ clean @ g_time
    vx = _vec(clean)
    vn = _vec(noise)

    def _moment(a, b):
        return (a.T @ np.conj(b)) / m

    r_xx = _moment(vx, vx)
    r_nn = _moment(vn, vn)
    r_xn = _moment(vx, vn)
    r_xx = 0.5 * (r_xx + r_xx.conj().T)
    r_nn = 0.5 * (r_nn + r_nn.conj().T)
    return SecondOrderStats(
        r_xx=r_xx,
        r_nn=r_nn,
        r_xn=r_xn,
        r_nx=r_xn.conj().T,
        g_graph=g_graph,
        g_time=g_time,
    )


def _observation_moments(stats: SecondOrderStats) -> tuple[np.ndarray, np.ndarray]:
    """Expand (R_yy, R_xy) of the vectorized observation from the stats."""
    g = np.kron(stats.g_time.T, stats.g_graph)
    gh = g.conj().T
    r_yy = (
        g @ stats.r_xx @ gh
        + g @ stats.r_xn
        + stats.r_nx @ gh
        + stats.r_nn
    )
    r_xy = stats.r_xx @ gh + stats.r_xn
    return r_yy, r_xy


def _normal_equations(
    jop: JointOperator, r_yy: np.ndarray, r_xy: np.ndarray, alpha: float, beta: float
) -> tuple[np.ndarray, np.ndarray]:
    b = np.kron(jop.time_op.matrix(beta), jop.graph_op.matrix(alpha))
    a = np.kron(jop.time_op.matrix(-beta), jop.graph_op.matrix(-alpha))
    aha = a.conj().T @ a
    byb = b @ r_yy @ b.conj().T
    m = aha * byb.T
    c = np.diagonal(a.conj().T @ r_xy @ b.conj().T).copy()
    return m, c


def _solve_normal_equations(
    m: np.ndarray, c: np.ndarray, regularization: float
) -> np.ndarray:
    if regularization < 0:
        raise ValueError(f"regularization must be non-negative, got {regularization}")
    if regularization > 0:
        m = m + regularization * np.eye(m.shape[0])
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond >= _COND_LIMIT:
        raise RankDeficiencyError(
            f"normal equations are numerically rank-deficient (condition {cond:.3e}); "
            "pass a positive regularization to proceed"
        )
    diag = np.diagonal(m)
    if np.array_equal(m, np.diag(diag)):
        # exactly diagonal system (true whenever AHA is exactly the identity,
        # e.g. at order 0): elementwise division is the exact solution, while
        # LU multiplies by a reciprocal and loses the last ulp
        if not np.any(diag.imag) and not np.any(c.imag):
            # the vectorized complex-division kernel scales by a reciprocal
            # and misses the last ulp even for equal operands; real IEEE
            # division rounds once
            return (c.real / diag.real).astype(np.complex128)
        return c / diag
    return np.linalg.solve(m, c)


def optimal_diagonal_filter(
    stats: SecondOrderStats,
    jop: JointOperator,
    alpha: float,
    beta: float,
    regularization: float = 0.0,
) -> DiagonalFilter:
    """Globally optimal diagonal filter at a fixed order pair.

    Raises
    ------
    RankDeficiencyError
        If the normal-equation matrix is numerically singular and no
        regularization was requested.
    """
    alpha = check_fraction_order(alpha, "alpha")
    beta = check_fraction_order(beta, "beta")
    if stats.nd != jop.n * jop.d:
        raise ValueError(
            f"stats are sized {stats.nd}, operator expects {jop.n * jop.d}"
        )
    r_yy, r_xy = _observation_moments(stats)
    m, c = _normal_equations(jop, r_yy, r_xy, alpha, beta)
    h = _solve_normal_equations(m, c, float(regularization))
    return DiagonalFilter(coefficients=h, alpha=alpha, beta=beta)


def filter_objective(
    stats: SecondOrderStats, jop: JointOperator, filt: DiagonalFilter
) -> float:
    """Mean-squared-error objective attained by an arbitrary diagonal filter."""
    r_yy, r_xy = _observation_moments(stats)
    m, c = _normal_equations(jop, r_yy, r_xy, filt.alpha, filt.beta)
    h = filt.coefficients
    value = (
        float(np.real(np.trace(stats.r_xx)))
        + float(np.real(h.conj() @ m @ h))
        - 2.0 * float(np.real(h.conj() @ c))
    )
    return value


def apply_filter(f: DiagonalFilter, jop: JointOperator, y: np.ndarray) -> np.ndarray:
    """Filter an observation: transform, scale each joint-domain coefficient,
    transform back."""
    coeffs = f.coefficients.reshape((jop.n, jop.d), order="F")
    z = forward(jop, y, f.alpha, f.beta)
    return inverse(jop, coeffs * z, f.alpha, f.beta)


def grid_search(
    stats: SecondOrderStats,
    jop: JointOperator,
    alphas=DEFAULT_ORDER_GRID,
    betas=DEFAULT_ORDER_GRID,
    regularization: float = 0.0,
) -> DiagonalFilter:
    """Exhaustive search for the order pair with the smallest objective.

    Ties (within a 1e-12 relative margin) keep the smallest (alpha, beta) in
    ascending scan order. Rank-deficient cells are skipped; if every cell
    fails the aggregate error is raised.
    """
    alphas = sorted(check_fraction_order(a, "alpha") for a in np.atleast_1d(alphas))
    betas = sorted(check_fraction_order(b, "beta") for b in np.atleast_1d(betas))
    if not alphas or not betas:
        raise ValueError("grid_search needs non-empty alpha and beta grids")

    r_yy, r_xy = _observation_moments(stats)
    trace_xx = float(np.real(np.trace(stats.r_xx)))
    best = None
    failures = []
    for alpha in alphas:
        for beta in betas:
            m, c = _normal_equations(jop, r_yy, r_xy, alpha, beta)
            try:
                h = _solve_normal_equations(m, c, float(regularization))
            except RankDeficiencyError as exc:
                failures.append((alpha, beta, str(exc)))
                continue
            objective = trace_xx - float(np.real(np.conj(c) @ h))
            if best is None or objective < best[0] - 1e-12 * max(1.0, abs(best[0])):
                best = (objective, alpha, beta, h)
    if best is None:
        raise RankDeficiencyError(
            f"all {len(failures)} grid cells were rank-deficient; "
            "regularize or change the grid"
        )
    _, alpha, beta, h = best
    return DiagonalFilter(coefficients=h, alpha=alpha, beta=beta)
