"""Scikit-learn style denoising estimators.

These wrap the functional core in the familiar fit/transform/predict surface
so the denoisers compose with sklearn tooling (cloning, parameter search).
Samples are stacks of vertex-by-time frames with shape (M, N, D): noisy
stacks are ``X``, clean targets are ``y``. ``score`` returns the aggregate
output SNR in dB, so higher is better.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .datasets import PairedSamples, snr_db
from .dfrft import build_dfrft_operator
from .graphs import SHIFT_KINDS, Graph, shift_operator
from .gfrft import build_gfrft_operator
from .jfrft import JointOperator
from .network import (
    TrainConfig,
    denoise,
    init_gfrff_network,
    init_network,
    train,
)
from .spectral import DEFAULT_KAPPA_MAX, eigendecompose
from .validation import as_sample_batch
from .wiener import (
    DEFAULT_ORDER_GRID,
    apply_filter,
    empirical_stats,
    grid_search,
)


def _paired_batches(X, y, adjacency):
    noisy = as_sample_batch(X, "X")
    clean = as_sample_batch(y, "y")
    if noisy.shape != clean.shape:
        raise ValueError(
            f"X and y must share shape (M, N, D), got {noisy.shape} and {clean.shape}"
        )
    if isinstance(adjacency, Graph):
        n = adjacency.n_vertices
    else:
        n = np.asarray(adjacency).shape[0]
    if noisy.shape[1] != n:
        raise ValueError(
            f"samples have {noisy.shape[1]} vertices but the adjacency has {n}"
        )
    return noisy, clean


def _build_graph_operator(adjacency, shift_kind, kappa_max):
    if shift_kind not in SHIFT_KINDS:
        raise ValueError(
            f"unknown shift_kind {shift_kind!r}; expected one of {SHIFT_KINDS}"
        )
    graph = adjacency if isinstance(adjacency, Graph) else Graph(adjacency=adjacency)
    basis = eigendecompose(shift_operator(graph, shift_kind), kappa_max=kappa_max)
    return build_gfrft_operator(basis, kappa_max=kappa_max)


class _NetworkDenoiser(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing for the two trained denoisers."""

    def __init__(
        self,
        adjacency=None,
        *,
        shift_kind="lap",
        n_layers=3,
        learning_rate=1e-3,
        weight_decay=1e-3,
        max_epochs=500,
        patience=50,
        batch_size=None,
        validation_fraction=0.15,
        kappa_max=DEFAULT_KAPPA_MAX,
        seed=0,
    ):
        self.adjacency = adjacency
        self.shift_kind = shift_kind
        self.n_layers = n_layers
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.max_epochs = max_epochs
        self.patience = patience
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.kappa_max = kappa_max
        self.seed = seed

    def _init_network(self, graph_op, d):
        raise NotImplementedError

    def fit(self, X, y):
        """Train on aligned noisy (``X``) and clean (``y``) sample stacks.

        The chronological tail of the training data (fraction
        ``validation_fraction``, at least one sample) is held out to drive
        early stopping and best-parameter selection.
        """
        if self.adjacency is None:
            raise ValueError("adjacency must be provided to fit")
        noisy, clean = _paired_batches(X, y, self.adjacency)
        m = noisy.shape[0]
        if m < 2:
            raise ValueError("need at least 2 samples to hold out validation data")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must lie in (0, 1), got {self.validation_fraction}"
            )
        n_val = max(1, int(math.floor(self.validation_fraction * m)))
        if n_val >= m:
            n_val = m - 1
        train_pairs = PairedSamples(clean=clean[: m - n_val], noisy=noisy[: m - n_val])
        val_pairs = PairedSamples(clean=clean[m - n_val :], noisy=noisy[m - n_val :])

        graph_op = _build_graph_operator(self.adjacency, self.shift_kind, self.kappa_max)
        net = self._init_network(graph_op, noisy.shape[2])
        config = TrainConfig(
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            max_epochs=self.max_epochs,
            patience=self.patience,
            batch_size=self.batch_size,
            seed=self.seed,
        )
        result = train(net, train_pairs, val_pairs, config)
        self.network_ = result.network
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.val_snr_db_ = result.best_val_snr_db
        self.n_vertices_ = noisy.shape[1]
        self.window_length_ = noisy.shape[2]
        return self

    def transform(self, X):
        """Denoise a stack of samples with the trained network."""
        check_is_fitted(self, "network_")
        noisy = as_sample_batch(X, "X")
        if noisy.shape[1] != self.n_vertices_:
            raise ValueError(
                f"samples have {noisy.shape[1]} vertices, fitted for {self.n_vertices_}"
            )
        return denoise(self.network_, noisy)

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y):
        """Aggregate output SNR in dB of the denoised ``X`` against ``y``."""
        clean = as_sample_batch(y, "y")
        return snr_db(clean, self.transform(X))


class JFRFFNetDenoiser(_NetworkDenoiser):
    """Trainable denoiser filtering in the joint (graph x time) fractional
    domain, one learnable (alpha, beta, H) per layer."""

    def _init_network(self, graph_op, d):
        time_op = build_dfrft_operator(d)
        return init_network(graph_op, time_op, num_layers=self.n_layers)

    def transform(self, X):
        # joint layers are tied to the training window length
        check_is_fitted(self, "network_")
        noisy = as_sample_batch(X, "X")
        if noisy.shape[2] != self.window_length_:
            raise ValueError(
                f"samples have window length {noisy.shape[2]}, "
                f"fitted for {self.window_length_}"
            )
        return super().transform(X)


class GFRFFNetDenoiser(_NetworkDenoiser):
    """Ablation denoiser: graph-fractional filtering only, no temporal
    transform; filters are shared across the window dimension."""

    def _init_network(self, graph_op, d):
        return init_gfrff_network(graph_op, num_layers=self.n_layers)


class JFRFTWienerDenoiser(TransformerMixin, BaseEstimator):
    """Model-driven baseline: estimates second-order statistics from the
    training pairs, grid-searches the order pair, and applies the optimal
    diagonal filter."""

    def __init__(
        self,
        adjacency=None,
        *,
        shift_kind="lap",
        alphas=None,
        betas=None,
        regularization=0.0,
        kappa_max=DEFAULT_KAPPA_MAX,
    ):
        self.adjacency = adjacency
        self.shift_kind = shift_kind
        self.alphas = alphas
        self.betas = betas
        self.regularization = regularization
        self.kappa_max = kappa_max

    def fit(self, X, y):
        """Estimate statistics from aligned noisy/clean stacks and pick the
        best order pair on the default or supplied grids."""
        if self.adjacency is None:
            raise ValueError("adjacency must be provided to fit")
        noisy, clean = _paired_batches(X, y, self.adjacency)
        graph_op = _build_graph_operator(self.adjacency, self.shift_kind, self.kappa_max)
        time_op = build_dfrft_operator(noisy.shape[2])
        self.joint_op_ = JointOperator(graph_op=graph_op, time_op=time_op)
        stats = empirical_stats(clean, noisy)
        alphas = DEFAULT_ORDER_GRID if self.alphas is None else self.alphas
        betas = DEFAULT_ORDER_GRID if self.betas is None else self.betas
        self.filter_ = grid_search(
            stats, self.joint_op_, alphas, betas, regularization=self.regularization
        )
        self.alpha_ = self.filter_.alpha
        self.beta_ = self.filter_.beta
        self.n_vertices_ = noisy.shape[1]
        self.window_length_ = noisy.shape[2]
        return self

    def transform(self, X):
        """Apply the fitted diagonal filter to a stack of samples."""
        check_is_fitted(self, "filter_")
        noisy = as_sample_batch(X, "X")
        if noisy.shape[1:] != (self.n_vertices_, self.window_length_):
            raise ValueError(
                f"samples have shape {noisy.shape[1:]}, fitted for "
                f"({self.n_vertices_}, {self.window_length_})"
            )
        return np.real(apply_filter(self.filter_, self.joint_op_, noisy))

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y):
        """Aggregate output SNR in dB of the filtered ``X`` against ``y``."""
        clean = as_sample_batch(y, "y")
        return snr_db(clean, self.transform(X))
