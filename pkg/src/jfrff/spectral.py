"""Eigendecomposition of shift operators and matrix-function utilities.

The fractional transforms downstream all reduce to evaluating functions of a
diagonalizable matrix in its eigenbasis, so this module owns the one
eigendecomposition policy (sorting, orientation, conditioning guard), the
principal matrix logarithm, and the shared exponential-by-similarity
evaluator.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BranchCutError, IllConditionedBasisError, SingularMatrixError
from .validation import as_complex_matrix, check_square

DEFAULT_KAPPA_MAX = 1e8

_HERMITIAN_TOL = 1e-12
_UNITARY_TOL = 1e-10
_BRANCH_TOL = 1e-9


@dataclass(frozen=True)
class SpectralBasis:
    """Diagonalizing basis ``z = V diag(eigenvalues) V^-1`` of a matrix.

    Attributes
    ----------
    eigenvectors : complex (N, N)
        Columns are eigenvectors, sorted by ascending real part of the
        eigenvalue (ties by ascending imaginary part) and deterministically
        oriented.
    eigenvector_inverse : complex (N, N)
        Exact inverse used for synthesis/analysis; the conjugate transpose
        when the source matrix was Hermitian or unitary.
    eigenvalues : complex (N,)
    condition_estimate : float
        2-norm condition number of the eigenvector matrix.
    symmetric_source : bool
        True when the decomposed matrix was real symmetric, in which case
        the eigenvectors are real orthonormal.
    """

    eigenvectors: np.ndarray
    eigenvector_inverse: np.ndarray
    eigenvalues: np.ndarray
    condition_estimate: float
    symmetric_source: bool
    n: int = field(init=False)

    def __post_init__(self):
        for name in ("eigenvectors", "eigenvector_inverse", "eigenvalues"):
            a = np.asarray(getattr(self, name), dtype=np.complex128).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "n", self.eigenvectors.shape[0])


def _orient_columns(v: np.ndarray) -> np.ndarray:
    """Fix the per-column scale freedom: rotate each eigenvector so its
    first significant entry is real positive. Thresholding at a fraction of
    the column max keeps rounding noise from picking the pivot."""
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        mags = np.abs(col)
        pivots = np.flatnonzero(mags > 1e-8 * mags.max())
        pivot = col[pivots[0]]
        if np.isrealobj(v):
            if pivot < 0:
                v[:, j] = -col
        else:
            v[:, j] = col * (pivot.conjugate() / abs(pivot))
    return v


def _sort_order(eigenvalues: np.ndarray) -> np.ndarray:
    return np.lexsort((eigenvalues.imag, eigenvalues.real))


def eigendecompose(z: np.ndarray, kappa_max: float = DEFAULT_KAPPA_MAX) -> SpectralBasis:
    """Diagonalize ``z`` with a deterministic eigen-order and orientation.

    Three paths are used: ``eigh`` for (numerically) Hermitian input, a
    complex Schur form for unitary input, and a general eigensolver
    otherwise. Real symmetric input additionally has its basis orientation
    flipped to determinant +1, which keeps the spectrum of the resulting
    transform off the negative real axis for the fractional-power machinery
    built on top.

    Raises
    ------
    IllConditionedBasisError
        If the eigenvector condition number exceeds ``kappa_max`` (defective
        or nearly defective input). The error carries the estimate so the
        caller can retry with a different shift operator.
    """
    z = check_square(as_complex_matrix(z, "z"), "z")
    kappa_max = float(kappa_max)
    if kappa_max <= 0:
        raise ValueError(f"kappa_max must be positive, got {kappa_max}")
    n = z.shape[0]
    scale = max(1.0, float(np.max(np.abs(z))))

    is_real = bool(np.all(z.imag == 0.0))
    hermitian = float(np.max(np.abs(z - z.conj().T))) <= _HERMITIAN_TOL * scale

    if hermitian:
        w, v = np.linalg.eigh(z.real if is_real else z)
        order = _sort_order(w.astype(np.complex128))
        w, v = w[order], v[:, order]
        v = _orient_columns(v)
        if is_real and np.linalg.det(v) < 0:
            v[:, -1] = -v[:, -1]
        basis = SpectralBasis(
            eigenvectors=v,
            eigenvector_inverse=np.conj(v).T,
            eigenvalues=w,
            condition_estimate=float(np.linalg.cond(v)),
            symmetric_source=is_real,
        )
    else:
        basis = _decompose_general(z, scale)

    if not np.isfinite(basis.condition_estimate) or basis.condition_estimate > kappa_max:
        raise IllConditionedBasisError(
            f"eigenvector condition number {basis.condition_estimate:.3e} exceeds "
            f"kappa_max {kappa_max:.3e}; the matrix is too close to defective",
            condition_estimate=basis.condition_estimate,
        )
    return basis


def _decompose_general(z: np.ndarray, scale: float) -> SpectralBasis:
    unitary = float(np.max(np.abs(z.conj().T @ z - np.eye(z.shape[0])))) <= _UNITARY_TOL * scale
    if unitary:
        t, q = scipy.linalg.schur(z, output="complex")
        # for a normal matrix the Schur form is diagonal and q's columns are
        # orthonormal eigenvectors; fall through to the general solver if not
        if float(np.max(np.abs(t - np.diag(np.diagonal(t))))) <= _UNITARY_TOL * scale:
            w = np.diagonal(t).copy()
            order = _sort_order(w)
            w, v = w[order], _orient_columns(q[:, order])
            return SpectralBasis(
                eigenvectors=v,
                eigenvector_inverse=np.conj(v).T,
                eigenvalues=w,
                condition_estimate=float(np.linalg.cond(v)),
                symmetric_source=False,
            )
    w, v = np.linalg.eig(z)
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    order = _sort_order(w)
    w, v = w[order], _orient_columns(v[:, order])
    cond = float(np.linalg.cond(v))
    if np.isfinite(cond):
        vinv = np.linalg.inv(v)
    else:
        vinv = np.full_like(v, np.nan)
    return SpectralBasis(
        eigenvectors=v,
        eigenvector_inverse=vinv,
        eigenvalues=w,
        condition_estimate=cond,
        symmetric_source=False,
    )


def gft_matrix(basis: SpectralBasis) -> np.ndarray:
    """Analysis transform of the basis: the eigenvector inverse."""
    return basis.eigenvector_inverse


def principal_log(m: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """Principal matrix logarithm of ``m`` evaluated in its supplied basis.

    Raises
    ------
    SingularMatrixError
        If any eigenvalue is (numerically) zero.
    BranchCutError
        If any eigenvalue lies within angular tolerance of the negative real
        axis, where the principal branch is ambiguous. Rejecting instead of
        perturbing keeps repeated runs reproducible.
    """
    m = as_complex_matrix(m, "m")
    lam = basis.eigenvalues
    mags = np.abs(lam)
    floor = 1e-14 * max(1.0, float(mags.max(initial=0.0)))
    if np.any(mags <= floor):
        raise SingularMatrixError(
            "matrix has a zero eigenvalue; logarithm undefined"
        )
    gap = np.pi - np.abs(np.angle(lam))
    if np.any(gap <= _BRANCH_TOL):
        worst = lam[np.argmin(gap)]
        raise BranchCutError(
            f"eigenvalue {worst:.6g} lies within {_BRANCH_TOL:g} of the negative "
            "real axis; principal logarithm is ambiguous"
        )
    return basis.eigenvectors @ np.diag(np.log(lam)) @ basis.eigenvector_inverse


def exp_in_basis(
    generator_eigenvalues: np.ndarray, basis: SpectralBasis, scale: float
) -> np.ndarray:
    """Evaluate ``V diag(exp(scale * lambda_k)) V^-1``.

    Scale 0 returns the exact identity rather than ``V V^-1``, so zero-order
    transforms are bit-exact no-ops.
    """
    if scale == 0.0:
        return np.eye(basis.n, dtype=np.complex128)
    lam = np.asarray(generator_eigenvalues, dtype=np.complex128)
    phases = np.exp(float(scale) * lam)
    return (basis.eigenvectors * phases) @ basis.eigenvector_inverse


def basis_fingerprint(basis: SpectralBasis) -> str:
    """Stable hex digest of the sorted eigenvalues, used to detect checkpoint
    reuse against a different graph."""
    rounded = np.stack(
        [np.round(basis.eigenvalues.real, 8), np.round(basis.eigenvalues.imag, 8)]
    )
    # normalize signed zeros so -0.0 and 0.0 hash identically
    rounded = rounded + 0.0
    return hashlib.sha256(rounded.tobytes()).hexdigest()
