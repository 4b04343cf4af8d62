"""Graph construction and graph shift operators.

A :class:`Graph` is a dense weighted adjacency matrix with no self-loops.
Three builders cover the common ways such graphs arise from data (nearest
neighbours in feature space, thresholded correlation between series, and a
Gaussian kernel on pairwise distance), and :func:`shift_operator` turns a
graph into one of five shift matrices:

======  ==========================================
kind    shift operator
======  ==========================================
adj     adjacency A
lap     combinatorial Laplacian D - A
rna     row-normalized adjacency D^-1 A
sna     symmetric-normalized adjacency D^-1/2 A D^-1/2
nlap    normalized Laplacian I - D^-1/2 A D^-1/2
======  ==========================================

D is the diagonal degree matrix of row sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .validation import as_float_matrix, check_positive_int, check_square

SHIFT_KINDS = ("adj", "lap", "rna", "sna", "nlap")

# kinds whose formulas presuppose a symmetric degree normalization
_SYMMETRIC_ONLY_KINDS = ("lap", "sna", "nlap")

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Weighted graph on ``n_vertices`` nodes with dense adjacency."""

    adjacency: np.ndarray
    n_vertices: int = field(init=False)

    def __post_init__(self):
        a = as_float_matrix(self.adjacency, "adjacency")
        check_square(a, "adjacency")
        if a.shape[0] == 0:
            raise ValueError("adjacency must have at least one vertex")
        if np.any(np.diagonal(a) != 0.0):
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "n_vertices", a.shape[0])

    @property
    def is_symmetric(self) -> bool:
        a = self.adjacency
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        return float(np.max(np.abs(a - a.T))) <= _SYMMETRY_TOL * scale

    def degrees(self) -> np.ndarray:
        """Row-sum degree vector."""
        return np.asarray(self.adjacency.sum(axis=1))


def build_knn_adjacency(features: np.ndarray, k: int) -> Graph:
    """Binary k-nearest-neighbour graph over vertex feature vectors.

    Parameters
    ----------
    features : real array (N, F)
        One feature vector per vertex; neighbours are selected by Euclidean
        distance. Distance ties are broken by the lower vertex index.
    k : int
        Number of neighbours per vertex, ``0 < k < N``.

    Returns
    -------
    Graph
        Adjacency with weight 1 on selected edges, symmetrized by
        ``A = max(A, A.T)``.
    """
    x = as_float_matrix(features, "features")
    n = x.shape[0]
    k = check_positive_int(k, "k")
    if k >= n:
        raise ValueError(f"k must be smaller than the vertex count, got k={k}, N={n}")

    diff = x[:, np.newaxis, :] - x[np.newaxis, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, np.inf)

    a = np.zeros((n, n))
    for i in range(n):
        neighbours = np.argsort(dist[i], kind="stable")[:k]
        a[i, neighbours] = 1.0
    a = np.maximum(a, a.T)
    return Graph(a)


def build_correlation_adjacency(series: np.ndarray, threshold: float = 0.5) -> Graph:
    """Graph of absolute Pearson correlation between series, thresholded.

    Parameters
    ----------
    series : real array (N, T)
        One time series per vertex, T >= 2.
    threshold : float
        Minimum ``|pearson|`` for an edge to appear; weights keep the
        correlation magnitude.
    """
    x = as_float_matrix(series, "series")
    n, t = x.shape
    if t < 2:
        raise ValueError(f"series must have at least 2 columns, got {t}")

    centered = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.sum(centered * centered, axis=1))
    for vertex, norm in enumerate(norms):
        if norm == 0.0:
            raise DegenerateInputError(
                f"series row for vertex {vertex} is constant; "
                "Pearson correlation is undefined"
            )
    corr = (centered @ centered.T) / np.outer(norms, norms)
    a = np.abs(corr)
    a[a < float(threshold)] = 0.0
    np.fill_diagonal(a, 0.0)
    # enforce exact symmetry against rounding in the Gram product
    a = 0.5 * (a + a.T)
    return Graph(a)


def build_distance_adjacency(coords: np.ndarray, sigma: float, cutoff: float) -> Graph:
    """Gaussian-kernel graph on 2-D coordinates with a hard distance cutoff.

    Edge weight is ``exp(-d^2 / (2 sigma^2))`` for pairs with ``d <= cutoff``
    and zero otherwise.
    """
    x = as_float_matrix(coords, "coords")
    sigma = float(sigma)
    cutoff = float(cutoff)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")

    diff = x[:, np.newaxis, :] - x[np.newaxis, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    a = np.exp(-d2 / (2.0 * sigma * sigma))
    a[np.sqrt(d2) > cutoff] = 0.0
    np.fill_diagonal(a, 0.0)
    a = 0.5 * (a + a.T)
    return Graph(a)


def shift_operator(g: Graph, kind: str) -> np.ndarray:
    """Shift matrix of the requested kind for graph ``g``.

    Normalized kinds (and the Laplacian) require every vertex to have
    positive degree; sna/nlap/lap additionally require a symmetric
    adjacency.
    """
    if kind not in SHIFT_KINDS:
        raise ValueError(f"unknown shift kind {kind!r}; expected one of {SHIFT_KINDS}")
    a = g.adjacency
    if kind == "adj":
        return a.copy()

    if kind in _SYMMETRIC_ONLY_KINDS and not g.is_symmetric:
        raise ValueError(
            f"shift kind {kind!r} requires a symmetric adjacency; "
            "use 'adj' or 'rna' for directed graphs"
        )
    deg = g.degrees()
    bad = np.where(deg <= 0)[0]
    if bad.size:
        raise DegenerateInputError(
            f"vertex {int(bad[0])} has non-positive degree {deg[bad[0]]:g}; "
            f"shift kind {kind!r} needs every degree positive"
        )

    if kind == "lap":
        return np.diag(deg) - a
    if kind == "rna":
        return a / deg[:, np.newaxis]
    sna = a / np.sqrt(np.outer(deg, deg))
    if kind == "sna":
        return sna
    return np.eye(g.n_vertices) - sna
