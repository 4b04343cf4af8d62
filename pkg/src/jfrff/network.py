"""Learnable joint-fractional filtering networks.

Each layer transforms its input into the joint fractional domain at its own
learnable order pair, scales every coefficient by a learnable complex
filter, transforms back, takes the real part, and applies an activation:

    X1 = F_g^a @ X @ (F_t^b)^T
    X2 = H * X1
    X3 = F_g^(-a) @ X2 @ (F_t^(-b))^T
    out = phi(Re(X3))

The ablation variant drops the temporal transform and shares one complex
coefficient per vertex across time. Gradients for the orders come from the
closed-form derivative of the transform matrices; gradients for ``H`` treat
real and imaginary parts as independent real parameters, carried here in
packed complex form (d/dRe + j d/dIm). All of it is plain numpy; the
optimizer is a from-scratch Adam with the coupled weight-decay convention
applied to filters only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .datasets import PairedSamples, snr_db
from .dfrft import DfrftOperator
from .errors import FingerprintMismatchError, StaleTapeError
from .gfrft import GfrftOperator
from .jfrft import operation_counter, two_sided_apply
from .spectral import basis_fingerprint
from .streams import substream
from .validation import check_fraction_order, check_positive_int

ACTIVATIONS = ("tanh", "identity")

CHECKPOINT_FORMAT = "jfrff-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class JfrffLayer:
    """One joint-domain filtering layer with its own (alpha, beta, H)."""

    alpha: float
    beta: float
    filter: np.ndarray  # complex (N, D)
    activation: str

    def __post_init__(self):
        self.alpha = check_fraction_order(self.alpha, "alpha")
        self.beta = check_fraction_order(self.beta, "beta")
        f = np.asarray(self.filter, dtype=np.complex128)
        if f.ndim != 2:
            raise ValueError(f"filter must be (N, D), got shape {f.shape}")
        self.filter = f
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class GfrffLayer:
    """Ablation layer: graph transform only, one coefficient per vertex."""

    alpha: float
    filter: np.ndarray  # complex (N,)
    activation: str

    def __post_init__(self):
        self.alpha = check_fraction_order(self.alpha, "alpha")
        f = np.asarray(self.filter, dtype=np.complex128)
        if f.ndim != 1:
            raise ValueError(f"filter must be a vector, got shape {f.shape}")
        self.filter = f
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class JfrffNetwork:
    """Stack of filtering layers over fixed transform operators.

    ``time_op`` is None for the graph-only ablation, in which case the
    layers are :class:`GfrffLayer`.
    """

    graph_op: GfrftOperator
    time_op: DfrftOperator | None
    layers: list

    @property
    def model(self) -> str:
        return "gfrffnet" if self.time_op is None else "jfrffnet"

    @property
    def n(self) -> int:
        return self.graph_op.n

    @property
    def d(self) -> int | None:
        return None if self.time_op is None else self.time_op.dimension


@dataclass(frozen=True)
class TrainConfig:
    """Optimization schedule and Adam constants."""

    learning_rate: float = 1e-3
    weight_decay: float = 1e-3
    max_epochs: int = 500
    patience: int = 50
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    batch_size: int | None = None  # None = full batch

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {self.max_epochs}")
        if not 0 <= self.patience <= self.max_epochs:
            raise ValueError(
                f"patience must lie in [0, max_epochs], got {self.patience}"
            )
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")


def init_network(
    graph_op: GfrftOperator, time_op: DfrftOperator, num_layers: int = 3
) -> JfrffNetwork:
    """Fresh joint network: every layer starts at orders (0.5, 0.5) with an
    all-ones filter; hidden activations tanh, final identity."""
    num_layers = check_positive_int(num_layers, "num_layers")
    n, d = graph_op.n, time_op.dimension
    layers = [
        JfrffLayer(
            alpha=0.5,
            beta=0.5,
            filter=np.ones((n, d), dtype=np.complex128),
            activation="tanh" if i < num_layers - 1 else "identity",
        )
        for i in range(num_layers)
    ]
    return JfrffNetwork(graph_op=graph_op, time_op=time_op, layers=layers)


def init_gfrff_network(graph_op: GfrftOperator, num_layers: int = 3) -> JfrffNetwork:
    """Fresh graph-only ablation network, same initialization policy."""
    num_layers = check_positive_int(num_layers, "num_layers")
    layers = [
        GfrffLayer(
            alpha=0.5,
            filter=np.ones(graph_op.n, dtype=np.complex128),
            activation="tanh" if i < num_layers - 1 else "identity",
        )
        for i in range(num_layers)
    ]
    return JfrffNetwork(graph_op=graph_op, time_op=None, layers=layers)


@dataclass
class LayerTape:
    """Intermediates cached by a layer forward pass for the backward pass."""

    x: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    output: np.ndarray
    alpha: float
    beta: float | None
    filter_ref: np.ndarray


def _activate(r: np.ndarray, activation: str) -> np.ndarray:
    return np.tanh(r) if activation == "tanh" else r


def layer_forward(layer, graph_op: GfrftOperator, time_op, x: np.ndarray):
    """Run one layer; returns (output, tape). ``x`` is real with trailing
    shape (N, D); leading batch axes are allowed."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(layer, JfrffLayer):
        fa = graph_op.matrix(layer.alpha)
        fb = time_op.matrix(layer.beta)
        x1 = two_sided_apply(fa, x, fb.T)
        x2 = layer.filter * x1
        x3 = two_sided_apply(graph_op.matrix(-layer.alpha), x2, time_op.matrix(-layer.beta).T)
        beta = layer.beta
    else:
        n, d = x.shape[-2], x.shape[-1]
        batch = int(np.prod(x.shape[:-2], dtype=np.int64)) if x.ndim > 2 else 1
        operation_counter.total += 2 * batch * n * n * d
        x1 = graph_op.matrix(layer.alpha) @ x
        x2 = layer.filter[:, np.newaxis] * x1
        x3 = graph_op.matrix(-layer.alpha) @ x2
        beta = None
    output = _activate(np.real(x3), layer.activation)
    tape = LayerTape(
        x=x, x1=x1, x2=x2, x3=x3, output=output,
        alpha=layer.alpha, beta=beta, filter_ref=layer.filter,
    )
    return output, tape


def network_forward(net: JfrffNetwork, x: np.ndarray):
    """Run all layers; returns (output, list of tapes)."""
    tapes = []
    out = np.asarray(x, dtype=np.float64)
    for layer in net.layers:
        out, tape = layer_forward(layer, net.graph_op, net.time_op, out)
        tapes.append(tape)
    return out, tapes


def mse_loss(pred: np.ndarray, clean: np.ndarray) -> float:
    """Mean squared error over every entry (batch included)."""
    pred = np.asarray(pred, dtype=np.float64)
    clean = np.asarray(clean, dtype=np.float64)
    if pred.shape != clean.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {clean.shape}")
    diff = pred - clean
    return float(np.mean(diff * diff))


def mse_loss_grad(pred: np.ndarray, clean: np.ndarray) -> np.ndarray:
    """Gradient of :func:`mse_loss` with respect to ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    clean = np.asarray(clean, dtype=np.float64)
    return 2.0 * (pred - clean) / pred.size


def _real_inner(grad: np.ndarray, direction: np.ndarray) -> float:
    """Derivative contribution of a packed complex gradient along a complex
    perturbation direction: Re(sum conj(grad) * direction)."""
    return float(np.real(np.sum(np.conj(grad) * direction)))


def _batch_sum(a: np.ndarray) -> np.ndarray:
    """Sum away leading batch axes, keeping the trailing (N, D) or (N,)."""
    if a.ndim <= 2:
        return a
    return np.sum(a, axis=tuple(range(a.ndim - 2)))


def _check_tape(layer, tape: LayerTape) -> None:
    same_orders = tape.alpha == layer.alpha and (
        tape.beta == (layer.beta if isinstance(layer, JfrffLayer) else None)
    )
    if not same_orders or tape.filter_ref is not layer.filter:
        raise StaleTapeError(
            "tape was recorded under different layer parameters; "
            "rerun the forward pass before backward"
        )


def layer_backward(layer, graph_op: GfrftOperator, time_op, tape: LayerTape, grad_out: np.ndarray):
    """Backward through one layer.

    Returns (grad_input, grads) where grads holds 'alpha', 'filter', and for
    joint layers 'beta'. grad_out and grad_input are real; the filter
    gradient is packed complex (d/dRe + j d/dIm).
    """
    _check_tape(layer, tape)
    if layer.activation == "tanh":
        grad_out = grad_out * (1.0 - tape.output * tape.output)
    # the real-part projection injects the upstream gradient into Re only
    gx3 = grad_out.astype(np.complex128)

    if isinstance(layer, JfrffLayer):
        fa = graph_op.matrix(layer.alpha)
        fb = time_op.matrix(layer.beta)
        fai = graph_op.matrix(-layer.alpha)
        fbi = time_op.matrix(-layer.beta)
        dfa = graph_op.derivative(layer.alpha)
        dfb = time_op.derivative(layer.beta)
        dfai = -graph_op.derivative(-layer.alpha)
        dfbi = -time_op.derivative(-layer.beta)

        gx2 = fai.conj().T @ gx3 @ np.conj(fbi)
        g_filter = _batch_sum(np.conj(tape.x1) * gx2)
        gx1 = np.conj(layer.filter) * gx2
        grad_in = np.real(fa.conj().T @ gx1 @ np.conj(fb))

        d_alpha = _real_inner(gx1, dfa @ tape.x @ fb.T) + _real_inner(
            gx3, dfai @ tape.x2 @ fbi.T
        )
        d_beta = _real_inner(gx1, fa @ tape.x @ dfb.T) + _real_inner(
            gx3, fai @ tape.x2 @ dfbi.T
        )
        grads = {"alpha": d_alpha, "beta": d_beta, "filter": g_filter}
    else:
        fa = graph_op.matrix(layer.alpha)
        fai = graph_op.matrix(-layer.alpha)
        dfa = graph_op.derivative(layer.alpha)
        dfai = -graph_op.derivative(-layer.alpha)

        gx2 = fai.conj().T @ gx3
        g_filter = _batch_sum(np.conj(tape.x1) * gx2).sum(axis=-1)
        gx1 = np.conj(layer.filter)[:, np.newaxis] * gx2
        grad_in = np.real(fa.conj().T @ gx1)

        d_alpha = _real_inner(gx1, dfa @ tape.x) + _real_inner(gx3, dfai @ tape.x2)
        grads = {"alpha": d_alpha, "filter": g_filter}
    return grad_in, grads


def network_backward(net: JfrffNetwork, tapes: list, loss_grad: np.ndarray) -> list:
    """Backward through the whole stack; returns one grads dict per layer
    (aligned with net.layers)."""
    if len(tapes) != len(net.layers):
        raise StaleTapeError(
            f"{len(tapes)} tapes for {len(net.layers)} layers; "
            "rerun the forward pass"
        )
    grad = np.asarray(loss_grad, dtype=np.float64)
    grads: list = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        grad, grads[i] = layer_backward(
            net.layers[i], net.graph_op, net.time_op, tapes[i], grad
        )
    return grads


# ---------------------------------------------------------------------------
# Adam over a flat list of real parameter arrays

@dataclass
class AdamState:
    step: int
    m: list
    v: list


def init_adam_state(params: list) -> AdamState:
    return AdamState(
        step=0,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(
    params: list, grads: list, state: AdamState, config: TrainConfig, decay_mask: list
):
    """One bias-corrected Adam update. ``decay_mask[i]`` selects which
    parameter arrays receive the coupled weight decay (filters; never the
    orders). Returns (new_params, new_state); inputs are not mutated."""
    if not (len(params) == len(grads) == len(state.m) == len(decay_mask)):
        raise ValueError("params, grads, state, and decay_mask must align")
    t = state.step + 1
    lr = config.learning_rate
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_eps
    new_params, new_m, new_v = [], [], []
    for p, g, m, v, decay in zip(params, grads, state.m, state.v, decay_mask):
        if decay and config.weight_decay > 0:
            g = g + config.weight_decay * p
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        new_params.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(step=t, m=new_m, v=new_v)


def _filter_real_view(layer) -> np.ndarray:
    """Filter entries as interleaved (re, im) float64 pairs."""
    return np.ascontiguousarray(layer.filter).view(np.float64).copy()


def _flatten_params(net: JfrffNetwork):
    """Network parameters as a flat list of real arrays plus the weight-decay
    mask; order per layer: alpha, [beta,] filter."""
    params, mask = [], []
    for layer in net.layers:
        params.append(np.array([layer.alpha]))
        mask.append(False)
        if isinstance(layer, JfrffLayer):
            params.append(np.array([layer.beta]))
            mask.append(False)
        params.append(_filter_real_view(layer))
        mask.append(True)
    return params, mask


def _flatten_grads(net: JfrffNetwork, grads: list) -> list:
    flat = []
    for layer, g in zip(net.layers, grads):
        flat.append(np.array([g["alpha"]]))
        if isinstance(layer, JfrffLayer):
            flat.append(np.array([g["beta"]]))
        flat.append(np.ascontiguousarray(g["filter"]).view(np.float64).copy())
    return flat


def _unflatten_params(net: JfrffNetwork, params: list) -> None:
    """Write a flat parameter list back into the layers (new arrays, so any
    outstanding tape is detectably stale)."""
    i = 0
    for k, layer in enumerate(net.layers):
        alpha = float(params[i][0])
        i += 1
        if isinstance(layer, JfrffLayer):
            beta = float(params[i][0])
            i += 1
            filt = np.ascontiguousarray(params[i]).view(np.complex128)
            i += 1
            net.layers[k] = replace(layer, alpha=alpha, beta=beta, filter=filt)
        else:
            filt = np.ascontiguousarray(params[i]).view(np.complex128)
            i += 1
            net.layers[k] = replace(layer, alpha=alpha, filter=filt)


def parameter_counts(net: JfrffNetwork) -> dict:
    """Trainable parameter counts, both conventions.

    ``total`` counts each complex filter entry once (coefficient counting:
    N*D + 2 per joint layer, N + 1 per ablation layer); ``total_real``
    counts real and imaginary parts separately.
    """
    per_layer, per_layer_real = [], []
    for layer in net.layers:
        size = layer.filter.size
        orders = 2 if isinstance(layer, JfrffLayer) else 1
        per_layer.append(size + orders)
        per_layer_real.append(2 * size + orders)
    return {
        "per_layer": per_layer,
        "total": int(sum(per_layer)),
        "per_layer_real": per_layer_real,
        "total_real": int(sum(per_layer_real)),
    }


@dataclass
class TrainResult:
    network: JfrffNetwork
    history: list
    best_epoch: int
    best_val_snr_db: float
    epochs_run: int


def _snapshot_layers(net: JfrffNetwork) -> list:
    return [replace(layer, filter=layer.filter.copy()) for layer in net.layers]


def _history_row(net: JfrffNetwork, epoch: int, train_loss: float, val_snr: float) -> dict:
    row = {"epoch": epoch, "train_loss": train_loss, "val_snr_db": val_snr}
    for i, layer in enumerate(net.layers, start=1):
        row[f"alpha_{i}"] = layer.alpha
        if isinstance(layer, JfrffLayer):
            row[f"beta_{i}"] = layer.beta
    return row


def train(
    net: JfrffNetwork,
    train_set: PairedSamples,
    val_set: PairedSamples,
    config: TrainConfig,
) -> TrainResult:
    """Train in place with Adam; restores the best-on-validation parameters.

    Per epoch: one full-batch step, or shuffled mini-batches when
    ``config.batch_size`` is set. Validation SNR (aggregate, in dB) drives
    the best-parameter snapshot and early stopping: training stops once
    ``patience`` epochs pass without improvement. Deterministic for fixed
    seed, config, and data.
    """
    train_clean = np.asarray(train_set.clean, dtype=np.float64)
    train_noisy = np.asarray(train_set.noisy, dtype=np.float64)
    val_clean = np.asarray(val_set.clean, dtype=np.float64)
    val_noisy = np.asarray(val_set.noisy, dtype=np.float64)
    if train_clean.shape[0] == 0 or val_clean.shape[0] == 0:
        raise ValueError("train and validation sets must be non-empty")

    m = train_clean.shape[0]
    rng = substream(config.seed, "batching")
    params, decay_mask = _flatten_params(net)
    state = init_adam_state(params)

    history: list = []
    best_snr = -math.inf
    best_epoch = 0
    best_layers = _snapshot_layers(net)

    for epoch in range(1, config.max_epochs + 1):
        if config.batch_size is None:
            batches = [np.arange(m)]
        else:
            order = rng.permutation(m)
            batches = [
                order[i : i + config.batch_size]
                for i in range(0, m, config.batch_size)
            ]
        loss_sum = 0.0
        for idx in batches:
            noisy, clean = train_noisy[idx], train_clean[idx]
            pred, tapes = network_forward(net, noisy)
            loss_sum += mse_loss(pred, clean) * len(idx)
            grads = network_backward(net, tapes, mse_loss_grad(pred, clean))
            params, state = adam_step(
                params, _flatten_grads(net, grads), state, config, decay_mask
            )
            _unflatten_params(net, params)
        train_loss = loss_sum / m

        val_pred, _ = network_forward(net, val_noisy)
        val_snr = snr_db(val_clean, val_pred)
        history.append(_history_row(net, epoch, train_loss, val_snr))

        if val_snr > best_snr:
            best_snr = val_snr
            best_epoch = epoch
            best_layers = _snapshot_layers(net)
        if epoch - best_epoch >= config.patience:
            break

    net.layers = best_layers
    return TrainResult(
        network=net,
        history=history,
        best_epoch=best_epoch,
        best_val_snr_db=best_snr,
        epochs_run=len(history),
    )


# ---------------------------------------------------------------------------
# Checkpointing

def checkpoint_payload(
    net: JfrffNetwork,
    shift_kind: str,
    config: TrainConfig | None = None,
    window: int | None = None,
) -> dict:
    """Self-describing checkpoint dict; floats survive JSON round-trips
    bit-exactly (shortest-repr serialization). ``window`` records the sample
    length the network was trained on (needed to rebuild the dataset for a
    graph-only model, whose layers are window-agnostic)."""
    layers = []
    for layer in net.layers:
        entry = {
            "alpha": layer.alpha,
            "activation": layer.activation,
            "filter_real": np.real(layer.filter).tolist(),
            "filter_imag": np.imag(layer.filter).tolist(),
        }
        if isinstance(layer, JfrffLayer):
            entry["beta"] = layer.beta
        layers.append(entry)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "schema_version": CHECKPOINT_VERSION,
        "model": net.model,
        "n": net.n,
        "d": net.d,
        "window": window if window is not None else net.d,
        "shift_kind": shift_kind,
        "basis_fingerprint": basis_fingerprint(net.graph_op.shift_basis),
        "parameter_counts": parameter_counts(net),
        "layers": layers,
    }
    if config is not None:
        payload["train_config"] = {
            "learning_rate": config.learning_rate,
            "weight_decay": config.weight_decay,
            "max_epochs": config.max_epochs,
            "patience": config.patience,
            "adam_beta1": config.adam_beta1,
            "adam_beta2": config.adam_beta2,
            "adam_eps": config.adam_eps,
            "seed": config.seed,
            "batch_size": config.batch_size,
        }
    return payload


def save_checkpoint(
    net: JfrffNetwork,
    path,
    shift_kind: str,
    config: TrainConfig | None = None,
    window: int | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(checkpoint_payload(net, shift_kind, config, window), handle, indent=1)
        handle.write("\n")


def load_checkpoint(path) -> dict:
    """Read and structurally validate a checkpoint file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValueError(f"checkpoint {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"checkpoint {path} is not a {CHECKPOINT_FORMAT} file")
    if data.get("schema_version") != CHECKPOINT_VERSION:
        raise ValueError(
            f"checkpoint {path} has schema_version {data.get('schema_version')!r}; "
            f"this build reads version {CHECKPOINT_VERSION}"
        )
    required = ("model", "n", "shift_kind", "basis_fingerprint", "layers")
    missing = [key for key in required if key not in data]
    if missing:
        raise ValueError(f"checkpoint {path} is missing fields: {missing}")
    return data


def restore_network(
    data: dict, graph_op: GfrftOperator, time_op: DfrftOperator | None
) -> JfrffNetwork:
    """Rebuild a network from checkpoint data over freshly built operators.

    Raises
    ------
    FingerprintMismatchError
        If the supplied graph decomposition does not hash to the fingerprint
        stored at save time.
    """
    found = basis_fingerprint(graph_op.shift_basis)
    if found != data["basis_fingerprint"]:
        raise FingerprintMismatchError(
            "checkpoint was trained on a different graph spectrum "
            f"(stored {data['basis_fingerprint'][:12]}..., computed {found[:12]}...)"
        )
    model = data["model"]
    if model == "jfrffnet" and time_op is None:
        raise ValueError("checkpoint holds a joint model; a temporal operator is required")
    layers = []
    for entry in data["layers"]:
        filt = np.asarray(entry["filter_real"], dtype=np.float64) + 1j * np.asarray(
            entry["filter_imag"], dtype=np.float64
        )
        if model == "jfrffnet":
            layers.append(
                JfrffLayer(
                    alpha=entry["alpha"],
                    beta=entry["beta"],
                    filter=filt,
                    activation=entry["activation"],
                )
            )
        else:
            layers.append(
                GfrffLayer(
                    alpha=entry["alpha"],
                    filter=filt,
                    activation=entry["activation"],
                )
            )
    return JfrffNetwork(
        graph_op=graph_op,
        time_op=time_op if model == "jfrffnet" else None,
        layers=layers,
    )


def denoise(net: JfrffNetwork, noisy: np.ndarray) -> np.ndarray:
    """Forward pass without tapes, for inference."""
    out, _ = network_forward(net, noisy)
    return out
