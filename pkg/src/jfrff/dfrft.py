"""Discrete fractional Fourier transform for the temporal dimension.

The order-``beta`` transform is ``V diag(exp(-j pi n_k beta / 2)) V^T`` where
the columns of ``V`` are discrete Hermite-Gaussian vectors: eigenvectors of
the DFT-commuting tridiagonal-plus-diagonal matrix

    S[n, n]         = 2 cos(2 pi n / D) - 4
    S[n, (n +- 1)%D] = 1

and ``n_k`` is the Hermite index of each eigenvector. ``S`` commutes with the
unitary DFT, so its eigenvectors split into even/odd reflection-symmetric
families; diagonalizing inside each parity block keeps every sub-problem
simple-spectrum and pins the index assignment: descending eigenvalues of the
even block carry indices 0, 2, 4, ... and of the odd block 1, 3, 5, ...
That yields the index set {0, ..., D-2} plus D-1 (odd D) or D (even D), and
makes the order-1 transform equal the standard unitary DFT with entries
``exp(-j 2 pi m n / D) / sqrt(D)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .caching import MatrixCache
from .spectral import _orient_columns
from .validation import check_fraction_order, check_positive_int


@dataclass
class DfrftOperator:
    """Fractional DFT of a fixed dimension.

    Attributes
    ----------
    dimension : int
    hermite_basis : real orthonormal (D, D)
        Discrete Hermite-Gaussian vectors, column k paired with index
        ``hermite_indices[k]``.
    hermite_indices : int (D,)
    generator_eigenvalues : complex (D,)
        ``-j (pi/2) n_k``; the transform generator is
        ``V diag(generator_eigenvalues) V^T``.
    """

    dimension: int
    hermite_basis: np.ndarray
    hermite_indices: np.ndarray
    generator_eigenvalues: np.ndarray
    _matrices: MatrixCache = field(default_factory=MatrixCache, repr=False)
    _derivatives: MatrixCache = field(default_factory=MatrixCache, repr=False)

    def __post_init__(self):
        for name in ("hermite_basis", "hermite_indices", "generator_eigenvalues"):
            a = np.asarray(getattr(self, name)).copy()
            a.setflags(write=False)
            setattr(self, name, a)

    def matrix(self, beta: float) -> np.ndarray:
        """Transform matrix of order ``beta`` (exact-match cached).

        Order 0 is the exact identity, keeping zero-order applications
        bit-exact no-ops."""
        beta = check_fraction_order(beta, "beta")
        cached = self._matrices.get(beta)
        if cached is None:
            if beta == 0.0:
                cached = np.eye(self.dimension, dtype=np.complex128)
            else:
                phases = np.exp(beta * self.generator_eigenvalues)
                cached = (self.hermite_basis * phases) @ self.hermite_basis.T
            cached.setflags(write=False)
            self._matrices.put(beta, cached)
        return cached

    def derivative(self, beta: float) -> np.ndarray:
        """Order-derivative of the transform matrix, ``T exp(beta T)``."""
        beta = check_fraction_order(beta, "beta")
        cached = self._derivatives.get(beta)
        if cached is None:
            lam = self.generator_eigenvalues
            cached = (self.hermite_basis * (lam * np.exp(beta * lam))) @ self.hermite_basis.T
            cached.setflags(write=False)
            self._derivatives.put(beta, cached)
        return cached

    def generator(self) -> np.ndarray:
        """Dense skew-Hermitian generator matrix."""
        return (self.hermite_basis * self.generator_eigenvalues) @ self.hermite_basis.T


def _commuting_matrix(d: int) -> np.ndarray:
    s = np.zeros((d, d))
    n = np.arange(d)
    s[n, n] = 2.0 * np.cos(2.0 * np.pi * n / d) - 4.0
    s[n, (n + 1) % d] += 1.0
    s[n, (n - 1) % d] += 1.0
    return s


def _parity_bases(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the even and odd reflection-symmetric subspaces
    (reflection n -> (-n) mod D)."""
    half = 1.0 / np.sqrt(2.0)
    even = [np.eye(d)[:, 0]]
    odd = []
    for m in range(1, (d - 1) // 2 + 1):
        plus = np.zeros(d)
        plus[m] = half
        plus[d - m] = half
        even.append(plus)
        minus = np.zeros(d)
        minus[m] = half
        minus[d - m] = -half
        odd.append(minus)
    if d % 2 == 0:
        mid = np.zeros(d)
        mid[d // 2] = 1.0
        even.append(mid)
    even_basis = np.column_stack(even)
    odd_basis = np.column_stack(odd) if odd else np.zeros((d, 0))
    return even_basis, odd_basis


def build_dfrft_operator(d: int) -> DfrftOperator:
    """Construct the fractional DFT operator for dimension ``d``."""
    d = check_positive_int(d, "d")
    s = _commuting_matrix(d)

    columns = []
    indices = []
    for parity, basis in enumerate(_parity_bases(d)):
        if basis.shape[1] == 0:
            continue
        block = basis.T @ s @ basis
        w, u = np.linalg.eigh(block)
        order = np.argsort(-w, kind="stable")
        vectors = basis @ u[:, order]
        columns.append(vectors)
        indices.append(2 * np.arange(vectors.shape[1]) + parity)

    v = _orient_columns(np.hstack(columns))
    idx = np.concatenate(indices)
    order = np.argsort(idx, kind="stable")
    v, idx = v[:, order], idx[order]

    return DfrftOperator(
        dimension=d,
        hermite_basis=v,
        hermite_indices=idx,
        generator_eigenvalues=-0.5j * np.pi * idx.astype(np.complex128),
    )
