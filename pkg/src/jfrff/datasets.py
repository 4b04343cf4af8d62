"""Dataset handling: windowing, splits, noise injection, SNR, synthesis, CSV.

A long vertex-by-time signal is cut into non-overlapping windows of length
D; each window is one training sample. Splits are chronological to avoid
time-series leakage. Noise is scaled by one global factor so the aggregate
SNR over all samples hits the requested target, which makes "input SNR" a
property of the dataset rather than of any single window.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CsvParseError, DegenerateInputError
from .graphs import SHIFT_KINDS, Graph, shift_operator
from .spectral import eigendecompose
from .streams import substream
from .validation import as_float_matrix, check_positive_int

NOISE_KINDS = ("white_gaussian", "colored_ar1")

DEFAULT_SPLIT_RATIOS = (0.70, 0.15, 0.15)

SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class TimeVaryingSignal:
    """Real signal on N vertices observed over T consecutive time steps."""

    values: np.ndarray

    def __post_init__(self):
        v = as_float_matrix(self.values, "values").copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def vertex_count(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


class PairedSamples(NamedTuple):
    """Aligned clean/noisy sample stacks of shape (M, N, D)."""

    clean: np.ndarray
    noisy: np.ndarray


@dataclass(frozen=True)
class SampleSet:
    """Windowed clean/noisy samples with a chronological split label each."""

    clean: np.ndarray
    noisy: np.ndarray
    split: tuple

    def __post_init__(self):
        clean = np.asarray(self.clean, dtype=np.float64)
        noisy = np.asarray(self.noisy, dtype=np.float64)
        if clean.shape != noisy.shape or clean.ndim != 3:
            raise ValueError(
                f"clean and noisy stacks must share shape (M, N, D), "
                f"got {clean.shape} and {noisy.shape}"
            )
        labels = tuple(self.split)
        if len(labels) != clean.shape[0]:
            raise ValueError("one split label per sample required")
        for label in labels:
            if label not in SPLIT_NAMES:
                raise ValueError(f"unknown split label {label!r}")
        clean, noisy = clean.copy(), noisy.copy()
        clean.setflags(write=False)
        noisy.setflags(write=False)
        object.__setattr__(self, "clean", clean)
        object.__setattr__(self, "noisy", noisy)
        object.__setattr__(self, "split", labels)

    def subset(self, name: str) -> PairedSamples:
        if name not in SPLIT_NAMES:
            raise ValueError(f"unknown split label {name!r}")
        mask = np.array([label == name for label in self.split])
        return PairedSamples(clean=self.clean[mask], noisy=self.noisy[mask])

    def counts(self) -> dict:
        return {name: sum(label == name for label in self.split) for name in SPLIT_NAMES}


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model: kind, aggregate SNR target in dB, AR(1) pole, seed."""

    kind: str
    target_snr_db: float
    ar_coefficient: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected {NOISE_KINDS}")
        if not math.isfinite(self.target_snr_db):
            raise ValueError("target_snr_db must be finite")
        if self.kind == "colored_ar1" and not -1.0 < self.ar_coefficient < 1.0:
            raise ValueError(
                f"ar_coefficient must lie in (-1, 1), got {self.ar_coefficient}"
            )


def window(signal: TimeVaryingSignal, d: int) -> np.ndarray:
    """Cut the signal into floor(T/d) consecutive windows, shape (M, N, d).

    The trailing remainder shorter than ``d`` is discarded.
    """
    d = check_positive_int(d, "d")
    n, t = signal.values.shape
    m = t // d
    if m == 0:
        raise ValueError(
            f"signal length {t} is shorter than the window length {d}; no samples"
        )
    trimmed = signal.values[:, : m * d]
    return np.ascontiguousarray(trimmed.reshape(n, m, d).transpose(1, 0, 2))


def split(clean: np.ndarray, noisy: np.ndarray, ratios=DEFAULT_SPLIT_RATIOS) -> SampleSet:
    """Assign chronological train/val/test labels to aligned sample stacks.

    Counts are floor(r_train * M) and floor(r_val * M); the remainder goes
    to test. Every split must end up non-empty.
    """
    clean = np.asarray(clean, dtype=np.float64)
    noisy = np.asarray(noisy, dtype=np.float64)
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError(f"ratios must have three entries, got {len(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")
    m = clean.shape[0]
    n_train = int(math.floor(ratios[0] * m))
    n_val = int(math.floor(ratios[1] * m))
    n_test = m - n_train - n_val
    if min(n_train, n_val, n_test) <= 0:
        raise ValueError(
            f"split of {m} samples gives counts ({n_train}, {n_val}, {n_test}); "
            "every split must be non-empty"
        )
    labels = ("train",) * n_train + ("val",) * n_val + ("test",) * n_test
    return SampleSet(clean=clean, noisy=noisy, split=labels)


def add_noise(clean: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Add noise scaled to hit the aggregate target SNR over all samples.

    White noise is i.i.d. Gaussian; colored noise applies an AR(1)
    recursion along the time axis of each sample (unit marginal variance)
    before the global scaling. Deterministic for a fixed spec seed.
    """
    clean = np.asarray(clean, dtype=np.float64)
    if clean.ndim == 2:
        clean = clean[np.newaxis]
    if clean.ndim != 3 or clean.shape[0] == 0:
        raise ValueError(f"clean must be a non-empty (M, N, D) stack, got {clean.shape}")
    signal_energy = float(np.sum(clean * clean))
    if signal_energy == 0.0:
        raise DegenerateInputError(
            "clean signal has zero energy; cannot scale noise to a target SNR"
        )
    rng = substream(spec.seed, "noise")
    draws = rng.standard_normal(clean.shape)
    if spec.kind == "colored_ar1":
        rho = spec.ar_coefficient
        noise = np.empty_like(draws)
        noise[:, :, 0] = draws[:, :, 0]
        for t in range(1, clean.shape[2]):
            noise[:, :, t] = rho * noise[:, :, t - 1] + math.sqrt(1.0 - rho * rho) * draws[:, :, t]
    else:
        noise = draws
    noise_energy = float(np.sum(noise * noise))
    target = signal_energy / (10.0 ** (spec.target_snr_db / 10.0))
    noise *= math.sqrt(target / noise_energy)
    return clean + noise


def snr_db(reference, estimate) -> float:
    """Aggregate SNR in dB: ``10 log10(sum |ref|^2 / sum |ref - est|^2)``
    over all entries of all samples. Returns ``inf`` when the error energy
    is exactly zero."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise ValueError(
            f"reference and estimate must share a shape, "
            f"got {reference.shape} and {estimate.shape}"
        )
    ref_energy = float(np.sum(reference * reference))
    if ref_energy == 0.0:
        raise DegenerateInputError("reference signal has zero energy; SNR undefined")
    err = reference - estimate
    err_energy = float(np.sum(err * err))
    if err_energy == 0.0:
        return math.inf
    return 10.0 * math.log10(ref_energy / err_energy)


def mean_sample_snr_db(reference, estimate) -> float:
    """Mean of per-sample SNRs over the leading axis; a secondary metric
    next to the canonical aggregate :func:`snr_db`."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    values = [snr_db(r, e) for r, e in zip(reference, estimate)]
    return float(np.mean(values))


def synth_signal(
    graph: Graph,
    shift_kind: str,
    t_total: int,
    spectral_bandwidth: int,
    temporal_smoothness: float,
    seed: int = 0,
) -> TimeVaryingSignal:
    """Synthesize a band-limited, temporally correlated signal on a graph.

    The signal is a random combination of the ``spectral_bandwidth``
    lowest-sorted eigenvectors of the chosen shift operator, with
    coefficients following a stationary AR(1) with pole
    ``temporal_smoothness`` (0 = white in time, 1 = frozen in time).
    """
    if shift_kind not in SHIFT_KINDS:
        raise ValueError(f"unknown shift kind {shift_kind!r}; expected one of {SHIFT_KINDS}")
    t_total = check_positive_int(t_total, "t_total")
    bandwidth = check_positive_int(spectral_bandwidth, "spectral_bandwidth")
    if bandwidth > graph.n_vertices:
        raise ValueError(
            f"spectral_bandwidth {bandwidth} exceeds vertex count {graph.n_vertices}"
        )
    rho = float(temporal_smoothness)
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"temporal_smoothness must lie in [-1, 1], got {rho}")

    basis = eigendecompose(shift_operator(graph, shift_kind))
    modes = basis.eigenvectors[:, :bandwidth]

    rng = substream(seed, "signal")
    draws = rng.standard_normal((bandwidth, t_total))
    coeffs = np.empty_like(draws)
    coeffs[:, 0] = draws[:, 0]
    innovation = math.sqrt(max(0.0, 1.0 - rho * rho))
    for t in range(1, t_total):
        coeffs[:, t] = rho * coeffs[:, t - 1] + innovation * draws[:, t]
    values = np.real(modes @ coeffs)
    return TimeVaryingSignal(values=values)


def build_sample_set(
    signal: TimeVaryingSignal,
    d: int,
    noise: NoiseSpec | None,
    ratios=DEFAULT_SPLIT_RATIOS,
) -> SampleSet:
    """Window a signal, add noise (or copy it through when ``noise`` is
    None), and split chronologically."""
    clean = window(signal, d)
    noisy = add_noise(clean, noise) if noise is not None else clean.copy()
    return split(clean, noisy, ratios)


def _parse_matrix_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise CsvParseError(f"{path}: no data rows", row=1)

    def parse_row(cells):
        return [float(cell) for cell in cells]

    start = 0
    try:
        parse_row(rows[0])
    except ValueError:
        start = 1  # header row; drop it
        if len(rows) == 1:
            raise CsvParseError(f"{path}: header but no data rows", row=1) from None

    width = len(rows[start])
    data = []
    for i, cells in enumerate(rows[start:], start=start + 1):
        if len(cells) != width:
            raise CsvParseError(
                f"{path}: row {i} has {len(cells)} cells, expected {width}", row=i
            )
        try:
            data.append(parse_row(cells))
        except ValueError:
            bad = next(
                j for j, cell in enumerate(cells, start=1)
                if not _is_number(cell)
            )
            raise CsvParseError(
                f"{path}: non-numeric cell at row {i}, column {bad}",
                row=i,
                column=bad,
            ) from None
    return np.asarray(data, dtype=np.float64)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _write_matrix_csv(a: np.ndarray, path) -> None:
    np.savetxt(path, np.atleast_2d(a), delimiter=",", fmt="%.17g")


def load_signal_csv(path) -> TimeVaryingSignal:
    """Read a signal CSV (rows = vertices, columns = time steps)."""
    return TimeVaryingSignal(values=_parse_matrix_csv(path))


def save_signal_csv(signal: TimeVaryingSignal, path) -> None:
    _write_matrix_csv(signal.values, path)


def load_adjacency_csv(path) -> Graph:
    """Read an adjacency CSV (square, zero diagonal)."""
    return Graph(adjacency=_parse_matrix_csv(path))


def save_adjacency_csv(graph: Graph, path) -> None:
    _write_matrix_csv(graph.adjacency, path)
