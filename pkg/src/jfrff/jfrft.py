"""Joint time-vertex fractional transform.

The joint transform of a vertex-by-time frame ``X`` (shape N x D) is the
Kronecker operator ``F_time^beta (x) F_graph^alpha`` acting on the
column-major vectorization of ``X``. All applications here use the
equivalent two-sided form ``F_graph^alpha @ X @ (F_time^beta).T`` so a
single application costs O(N^2 D + N D^2) multiply-adds instead of the
O(N^2 D^2) a materialized Kronecker matrix would need; the dense matrix is
available behind a size guard for small problems and tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dfrft import DfrftOperator
from .errors import CapacityError
from .gfrft import GfrftOperator
from .validation import check_fraction_order

EXPLICIT_MATRIX_LIMIT = 4096


class OperationCounter:
    """Running count of multiply-add operations spent in two-sided
    transform applications. Used to assert cost scaling without relying on
    wall-clock timing."""

    __slots__ = ("total",)

    def __init__(self):
        self.total = 0

    def reset(self) -> None:
        self.total = 0


operation_counter = OperationCounter()


def two_sided_apply(left: np.ndarray, x: np.ndarray, right_t: np.ndarray) -> np.ndarray:
    """Compute ``left @ x @ right_t`` over trailing (N, D) axes of ``x``,
    broadcasting over any leading batch axes, and account its cost."""
    n, d = x.shape[-2], x.shape[-1]
    batch = int(np.prod(x.shape[:-2], dtype=np.int64)) if x.ndim > 2 else 1
    operation_counter.total += batch * (n * n * d + n * d * d)
    return left @ x @ right_t


@dataclass(frozen=True)
class JointOperator:
    """Pair of graph and temporal fractional operators applied jointly."""

    graph_op: GfrftOperator
    time_op: DfrftOperator

    @property
    def n(self) -> int:
        return self.graph_op.n

    @property
    def d(self) -> int:
        return self.time_op.dimension

    def _check_shape(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.ndim < 2 or x.shape[-2] != self.n or x.shape[-1] != self.d:
            raise ValueError(
                f"signal must have trailing shape ({self.n}, {self.d}), got {x.shape}"
            )
        return x


def forward(jop: JointOperator, x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """Joint transform of orders (alpha, beta): ``F_g^a @ X @ (F_t^b).T``."""
    x = jop._check_shape(x)
    alpha = check_fraction_order(alpha, "alpha")
    beta = check_fraction_order(beta, "beta")
    return two_sided_apply(jop.graph_op.matrix(alpha), x, jop.time_op.matrix(beta).T)


def inverse(jop: JointOperator, x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """Inverse joint transform: the forward transform of orders (-a, -b)."""
    return forward(jop, x, -float(alpha), -float(beta))


def derivative_action(
    jop: JointOperator, x: np.ndarray, alpha: float, beta: float, which: str
) -> np.ndarray:
    """Apply the order-derivative of the joint transform.

    ``which="alpha"`` differentiates the graph factor,
    ``which="beta"`` the temporal factor.
    """
    x = jop._check_shape(x)
    alpha = check_fraction_order(alpha, "alpha")
    beta = check_fraction_order(beta, "beta")
    if which == "alpha":
        return two_sided_apply(jop.graph_op.derivative(alpha), x, jop.time_op.matrix(beta).T)
    if which == "beta":
        return two_sided_apply(jop.graph_op.matrix(alpha), x, jop.time_op.derivative(beta).T)
    raise ValueError(f"which must be 'alpha' or 'beta', got {which!r}")


def explicit_matrix(jop: JointOperator, alpha: float, beta: float) -> np.ndarray:
    """Dense ``F_t^b (x) F_g^a`` acting on column-major vectorizations.

    Guarded: refuses problems with N*D above ``EXPLICIT_MATRIX_LIMIT``.
    """
    size = jop.n * jop.d
    if size > EXPLICIT_MATRIX_LIMIT:
        raise CapacityError(
            f"explicit joint matrix would be {size}x{size}; "
            f"limit is {EXPLICIT_MATRIX_LIMIT} rows"
        )
    alpha = check_fraction_order(alpha, "alpha")
    beta = check_fraction_order(beta, "beta")
    return np.kron(jop.time_op.matrix(beta), jop.graph_op.matrix(alpha))
