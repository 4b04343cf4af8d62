"""Command-line interface.

Subcommands
-----------
synth         synthesize a graph plus a smooth time-varying signal
train         train a denoising network, write checkpoint/history/metrics
wiener        model-driven baseline: grid-searched diagonal filtering
eval          re-evaluate a checkpoint on (re-generated) test data
sweep-shifts  train across all five shift kinds and both models

Every command requires ``--out-dir`` and writes a ``manifest.json`` there
recording resolved flags, the seed, input digests, and output digests.
Outputs other than the manifest contain no timestamps, so two runs with the
same seed and inputs produce byte-identical metric files. Exit codes:
0 success, 1 runtime failure, 2 flag/usage error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .datasets import (
    NOISE_KINDS,
    NoiseSpec,
    build_sample_set,
    load_adjacency_csv,
    load_signal_csv,
    mean_sample_snr_db,
    save_adjacency_csv,
    save_signal_csv,
    snr_db,
    synth_signal,
)
from .dfrft import build_dfrft_operator
from .errors import (
    BranchCutError,
    IllConditionedBasisError,
    JfrffError,
    SingularMatrixError,
)
from .graphs import SHIFT_KINDS, build_distance_adjacency, build_knn_adjacency, shift_operator
from .gfrft import build_gfrft_operator
from .jfrft import JointOperator
from .network import (
    TrainConfig,
    denoise,
    init_gfrff_network,
    init_network,
    load_checkpoint,
    parameter_counts,
    restore_network,
    save_checkpoint,
    train,
)
from .spectral import DEFAULT_KAPPA_MAX, eigendecompose
from .streams import substream
from .wiener import (
    apply_filter,
    empirical_stats,
    filter_objective,
    grid_search,
    optimal_diagonal_filter,
)

log = logging.getLogger("jfrff")

METRICS_SCHEMA_VERSION = 1

MODELS = ("jfrffnet", "gfrffnet")


# ---------------------------------------------------------------------------
# small helpers

def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_manifest(out_dir, command, args, input_paths, output_names, started) -> None:
    flags = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "command")
    }
    manifest = {
        "command": command,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "input_digests": {str(p): _sha256(p) for p in input_paths},
        "output_digests": {
            name: _sha256(os.path.join(out_dir, name)) for name in output_names
        },
        "started_at": started,
        "finished_at": _utc_now(),
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _write_history_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _noise_spec(args) -> NoiseSpec | None:
    if args.noise_kind == "none":
        return None
    return NoiseSpec(
        kind=args.noise_kind,
        target_snr_db=args.snr_db,
        ar_coefficient=args.ar_coefficient,
        seed=args.seed,
    )


def _build_graph_operator(graph, kind, kappa_max):
    """Decompose the requested shift; on an ill-conditioned basis, re-raise
    with the shift kind named and the remaining kinds as a remediation hint."""
    try:
        basis = eigendecompose(shift_operator(graph, kind), kappa_max=kappa_max)
        return build_gfrft_operator(basis, kappa_max=kappa_max)
    except IllConditionedBasisError as exc:
        others = ", ".join(k for k in SHIFT_KINDS if k != kind)
        raise IllConditionedBasisError(
            f"shift kind {kind!r} gives an ill-conditioned eigenbasis "
            f"(condition {exc.condition_estimate:.3e} > {kappa_max:.3e}); "
            f"try another shift kind: {others}",
            condition_estimate=exc.condition_estimate,
        ) from exc


def _snr_block(clean, noisy, denoised) -> dict:
    input_snr = snr_db(clean, noisy)
    output_snr = snr_db(clean, denoised)
    gain = output_snr - input_snr if math.isfinite(input_snr) else None
    return {
        "input_snr_db": input_snr,
        "output_snr_db": output_snr,
        "snr_gain_db": gain,
        "input_snr_db_mean_per_sample": mean_sample_snr_db(clean, noisy),
        "output_snr_db_mean_per_sample": mean_sample_snr_db(clean, denoised),
    }


def _parse_grid(text: str):
    """Order grid: either comma-separated values or start:stop:step
    (inclusive stop up to rounding)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(max(count, 0))]
    return [float(p) for p in text.split(",") if p.strip()]


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    started = _utc_now()
    rng = substream(args.seed, "graph")
    coords = rng.uniform(size=(args.nodes, 2))
    if args.graph_kind == "knn":
        graph = build_knn_adjacency(coords, args.knn_k)
    else:
        graph = build_distance_adjacency(coords, args.sigma, args.cutoff)
    signal = synth_signal(
        graph,
        args.shift,
        args.time,
        args.bandwidth,
        args.smoothness,
        seed=args.seed,
    )
    signal_path = os.path.join(args.out_dir, "signal.csv")
    adjacency_path = os.path.join(args.out_dir, "adjacency.csv")
    save_signal_csv(signal, signal_path)
    save_adjacency_csv(graph, adjacency_path)
    windows = signal.length // args.window
    print(
        f"synthesized N={graph.n_vertices} T={signal.length} "
        f"-> M={windows} windows of length {args.window}"
    )
    _write_manifest(
        args.out_dir, "synth", args, [], ["signal.csv", "adjacency.csv"], started
    )
    return 0


def _load_dataset(args, window_length):
    signal = load_signal_csv(args.signal)
    graph = load_adjacency_csv(args.adjacency)
    samples = build_sample_set(signal, window_length, _noise_spec(args))
    return graph, samples


def _train_one(graph_op, samples, model, window_length, args):
    """Train one network on a prepared sample set; returns (net, result,
    config, test-metrics block)."""
    if model == "jfrffnet":
        net = init_network(graph_op, build_dfrft_operator(window_length), args.layers)
    else:
        net = init_gfrff_network(graph_op, args.layers)
    config = TrainConfig(
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        max_epochs=args.epochs,
        patience=args.patience,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    result = train(net, samples.subset("train"), samples.subset("val"), config)
    test = samples.subset("test")
    test_block = _snr_block(test.clean, test.noisy, denoise(net, test.noisy))
    return net, result, config, test_block


def cmd_train(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    started = _utc_now()
    graph, samples = _load_dataset(args, args.window)
    graph_op = _build_graph_operator(graph, args.shift, args.kappa_max)
    net, result, config, test_block = _train_one(
        graph_op, samples, args.model, args.window, args
    )
    val = samples.subset("val")
    val_block = _snr_block(val.clean, val.noisy, denoise(net, val.noisy))

    per_layer = []
    for layer in net.layers:
        orders = {"alpha": layer.alpha}
        if net.model == "jfrffnet":
            orders["beta"] = layer.beta
        per_layer.append(orders)

    metrics = {
        "schema_version": METRICS_SCHEMA_VERSION,
        "command": "train",
        "model": net.model,
        "shift_kind": args.shift,
        "n": net.n,
        "window": args.window,
        "samples": samples.counts(),
        "noise_kind": args.noise_kind,
        "target_snr_db": args.snr_db if args.noise_kind != "none" else None,
        "val": val_block,
        "test": test_block,
        "per_layer_orders": per_layer,
        "parameter_counts": parameter_counts(net),
        "best_epoch": result.best_epoch,
        "epochs_run": result.epochs_run,
    }
    save_checkpoint(
        net, os.path.join(args.out_dir, "checkpoint.json"),
        shift_kind=args.shift, config=config, window=args.window,
    )
    _write_history_csv(os.path.join(args.out_dir, "history.csv"), result.history)
    _write_json(os.path.join(args.out_dir, "metrics.json"), metrics)
    print(
        f"{net.model} on shift={args.shift}: test SNR "
        f"{test_block['input_snr_db']:.2f} -> {test_block['output_snr_db']:.2f} dB "
        f"(best epoch {result.best_epoch}/{result.epochs_run})"
    )
    _write_manifest(
        args.out_dir, "train", args, [args.signal, args.adjacency],
        ["checkpoint.json", "history.csv", "metrics.json"], started,
    )
    return 0


def cmd_wiener(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    started = _utc_now()
    graph, samples = _load_dataset(args, args.window)
    graph_op = _build_graph_operator(graph, args.shift, args.kappa_max)
    jop = JointOperator(graph_op=graph_op, time_op=build_dfrft_operator(args.window))

    train_pairs = samples.subset("train")
    stats = empirical_stats(train_pairs.clean, train_pairs.noisy)
    alphas = _parse_grid(args.alphas)
    betas = _parse_grid(args.betas)
    filt = grid_search(stats, jop, alphas, betas, regularization=args.regularization)
    objective = filter_objective(stats, jop, filt)

    verified = None
    if args.verbose:
        # exhaustive re-check that the returned cell is minimal
        verified = True
        for alpha in alphas:
            for beta in betas:
                try:
                    other = optimal_diagonal_filter(
                        stats, jop, alpha, beta, regularization=args.regularization
                    )
                except JfrffError:
                    continue
                value = filter_objective(stats, jop, other)
                if value < objective - 1e-9 * max(1.0, abs(objective)):
                    verified = False
                    log.warning(
                        "grid cell (%.3f, %.3f) beats the reported optimum: %g < %g",
                        alpha, beta, value, objective,
                    )
        if not verified:
            raise JfrffError("grid search optimum failed the exhaustive re-check")

    test = samples.subset("test")
    denoised = np.real(apply_filter(filt, jop, test.noisy))
    test_block = _snr_block(test.clean, test.noisy, denoised)

    metrics = {
        "schema_version": METRICS_SCHEMA_VERSION,
        "command": "wiener",
        "shift_kind": args.shift,
        "n": jop.n,
        "window": args.window,
        "samples": samples.counts(),
        "noise_kind": args.noise_kind,
        "target_snr_db": args.snr_db if args.noise_kind != "none" else None,
        "alpha": filt.alpha,
        "beta": filt.beta,
        "objective": objective,
        "grid": {"alphas": len(alphas), "betas": len(betas)},
        "verified_minimal": verified,
        "test": test_block,
    }
    _write_json(os.path.join(args.out_dir, "metrics.json"), metrics)
    _write_json(
        os.path.join(args.out_dir, "filter.json"),
        {
            "schema_version": METRICS_SCHEMA_VERSION,
            "alpha": filt.alpha,
            "beta": filt.beta,
            "coefficients_real": np.real(filt.coefficients).tolist(),
            "coefficients_imag": np.imag(filt.coefficients).tolist(),
        },
    )
    print(
        f"wiener on shift={args.shift}: best orders "
        f"({filt.alpha:g}, {filt.beta:g}), objective {objective:.6g}, test SNR "
        f"{test_block['input_snr_db']:.2f} -> {test_block['output_snr_db']:.2f} dB"
    )
    _write_manifest(
        args.out_dir, "wiener", args, [args.signal, args.adjacency],
        ["metrics.json", "filter.json"], started,
    )
    return 0


def cmd_eval(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    started = _utc_now()
    data = load_checkpoint(args.checkpoint)
    window_length = data.get("window") or args.window
    graph, samples = _load_dataset(args, window_length)
    graph_op = _build_graph_operator(graph, data["shift_kind"], args.kappa_max)
    time_op = build_dfrft_operator(data["d"]) if data.get("d") else None
    net = restore_network(data, graph_op, time_op)

    test = samples.subset("test")
    test_block = _snr_block(test.clean, test.noisy, denoise(net, test.noisy))
    metrics = {
        "schema_version": METRICS_SCHEMA_VERSION,
        "command": "eval",
        "model": net.model,
        "shift_kind": data["shift_kind"],
        "n": net.n,
        "window": window_length,
        "samples": samples.counts(),
        "noise_kind": args.noise_kind,
        "target_snr_db": args.snr_db if args.noise_kind != "none" else None,
        "test": test_block,
    }
    _write_json(os.path.join(args.out_dir, "metrics.json"), metrics)
    print(
        f"eval {net.model} on shift={data['shift_kind']}: test SNR "
        f"{test_block['input_snr_db']:.2f} -> {test_block['output_snr_db']:.2f} dB"
    )
    _write_manifest(
        args.out_dir, "eval", args,
        [args.checkpoint, args.signal, args.adjacency], ["metrics.json"], started,
    )
    return 0


def cmd_sweep_shifts(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    started = _utc_now()
    graph, samples = _load_dataset(args, args.window)
    models = MODELS if args.models == "both" else (args.models,)

    rows = []
    succeeded = 0
    for kind in SHIFT_KINDS:
        # construction failures are per-kind records, not sweep aborts
        try:
            graph_op = _build_graph_operator(graph, kind, args.kappa_max)
        except IllConditionedBasisError as exc:
            reason = f"skipped: ill-conditioned ({exc.condition_estimate:.3e})"
            graph_op = None
        except (BranchCutError, SingularMatrixError) as exc:
            reason = f"skipped: {exc}"
            graph_op = None
        if graph_op is None:
            for model in models:
                rows.append(
                    {
                        "shift_kind": kind,
                        "model": model,
                        "status": reason,
                        "input_snr_db": "",
                        "output_snr_db": "",
                        "snr_gain_db": "",
                    }
                )
            log.warning("sweep %s %s", kind, reason)
            continue
        for model in models:
            _, _, _, test_block = _train_one(
                graph_op, samples, model, args.window, args
            )
            rows.append(
                {
                    "shift_kind": kind,
                    "model": model,
                    "status": "ok",
                    "input_snr_db": test_block["input_snr_db"],
                    "output_snr_db": test_block["output_snr_db"],
                    "snr_gain_db": test_block["snr_gain_db"],
                }
            )
            succeeded += 1
            log.info(
                "sweep %s/%s: %.2f -> %.2f dB", kind, model,
                test_block["input_snr_db"], test_block["output_snr_db"],
            )

    sweep_path = os.path.join(args.out_dir, "sweep.csv")
    with open(sweep_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(
            handle,
            fieldnames=[
                "shift_kind", "model", "status",
                "input_snr_db", "output_snr_db", "snr_gain_db",
            ],
        )
        writer.writeheader()
        writer.writerows(rows)
    _write_manifest(
        args.out_dir, "sweep-shifts", args,
        [args.signal, args.adjacency], ["sweep.csv"], started,
    )
    print(f"sweep complete: {succeeded} trained cells, {len(rows) - succeeded} skipped")
    if succeeded == 0:
        raise JfrffError("every shift kind failed; see sweep.csv for reasons")
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_noise_flags(parser) -> None:
    parser.add_argument(
        "--noise-kind",
        choices=NOISE_KINDS + ("none",),
        default="white_gaussian",
        help="noise model applied to the windowed samples (default white_gaussian)",
    )
    parser.add_argument(
        "--snr-db", type=float, default=5.0,
        help="aggregate input SNR target in dB (default 5)",
    )
    parser.add_argument(
        "--ar-coefficient", type=float, default=0.5,
        help="AR(1) pole for colored noise (default 0.5)",
    )


def _add_data_flags(parser) -> None:
    parser.add_argument("--signal", required=True, help="signal CSV (vertices x time)")
    parser.add_argument("--adjacency", required=True, help="adjacency CSV (square)")
    parser.add_argument(
        "--window", type=int, default=6,
        help="window length D; each window is one sample (default 6)",
    )


def _add_train_flags(parser) -> None:
    parser.add_argument("--layers", type=int, default=3, help="layer count (default 3)")
    parser.add_argument(
        "--learning-rate", type=float, default=1e-3, help="Adam learning rate (default 1e-3)"
    )
    parser.add_argument(
        "--weight-decay", type=float, default=1e-3,
        help="coupled weight decay on filters (default 1e-3)",
    )
    parser.add_argument("--epochs", type=int, default=500, help="epoch budget (default 500)")
    parser.add_argument(
        "--patience", type=int, default=50,
        help="early-stop patience in epochs without val improvement (default 50)",
    )
    parser.add_argument(
        "--batch-size", type=int, default=None,
        help="mini-batch size; omit for full-batch (default)",
    )


def _add_common_flags(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    parser.add_argument(
        "--kappa-max", type=float, default=DEFAULT_KAPPA_MAX,
        help="eigenbasis condition bound (default 1e8)",
    )
    parser.add_argument("--out-dir", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jfrff",
        description="Denoising of time-varying graph signals by fractional "
        "joint time-vertex filtering.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a graph and a smooth signal")
    p.add_argument("--nodes", type=int, required=True, help="vertex count N")
    p.add_argument("--time", type=int, required=True, help="signal length T")
    p.add_argument(
        "--graph-kind", choices=("knn", "distance"), default="knn",
        help="random geometric graph builder (default knn)",
    )
    p.add_argument("--knn-k", type=int, default=5, help="neighbours per vertex (default 5)")
    p.add_argument("--sigma", type=float, default=0.25, help="distance kernel width")
    p.add_argument("--cutoff", type=float, default=0.5, help="distance kernel cutoff")
    p.add_argument(
        "--shift", choices=SHIFT_KINDS, default="lap",
        help="shift operator whose low modes carry the signal (default lap)",
    )
    p.add_argument("--bandwidth", type=int, default=5, help="number of low modes (default 5)")
    p.add_argument(
        "--smoothness", type=float, default=0.9,
        help="AR(1) pole of the mode coefficients (default 0.9)",
    )
    p.add_argument(
        "--window", type=int, default=6,
        help="window length used for the sample-count summary (default 6)",
    )
    _add_common_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a denoising network")
    _add_data_flags(p)
    p.add_argument("--shift", choices=SHIFT_KINDS, default="lap", help="shift operator kind")
    p.add_argument("--model", choices=MODELS, default="jfrffnet", help="model variant")
    _add_noise_flags(p)
    _add_train_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("wiener", help="grid-searched optimal diagonal filter")
    _add_data_flags(p)
    p.add_argument("--shift", choices=SHIFT_KINDS, default="lap", help="shift operator kind")
    _add_noise_flags(p)
    p.add_argument(
        "--alphas", default="0:2:0.1",
        help="vertex-order grid, comma list or start:stop:step (default 0:2:0.1)",
    )
    p.add_argument(
        "--betas", default="0:2:0.1",
        help="time-order grid, comma list or start:stop:step (default 0:2:0.1)",
    )
    p.add_argument(
        "--regularization", type=float, default=0.0,
        help="ridge added to the normal equations (default 0 = none)",
    )
    p.add_argument(
        "--verbose", action="store_true",
        help="re-check the optimum against every grid cell",
    )
    _add_common_flags(p)
    p.set_defaults(func=cmd_wiener)

    p = sub.add_parser("eval", help="evaluate a checkpoint on test data")
    p.add_argument("--checkpoint", required=True, help="checkpoint JSON from train")
    _add_data_flags(p)
    _add_noise_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "sweep-shifts", help="train across all shift kinds and model variants"
    )
    _add_data_flags(p)
    p.add_argument(
        "--models", choices=MODELS + ("both",), default="both",
        help="which model variants to sweep (default both)",
    )
    _add_noise_flags(p)
    _add_train_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_sweep_shifts)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("JFRFF_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except JfrffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
