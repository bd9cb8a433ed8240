"""Command-line surface: datasets, training, attacks, lock tooling.

Every command reads an optional config file plus flag overrides, writes
its outputs atomically, embeds (seed, config hash, package version) in
each JSON artifact, and keeps wall-clock timing in a separate sidecar so
repeated runs with the same config produce byte-identical artifacts.

Exit codes: 0 ok, 2 config error, 3 data error, 4 ambiguity error,
5 budget exceeded, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from decimal import Decimal

import numpy as np

from . import __version__
from .attack import EncodeOracle, lock_validation_attack, run_reasoning_attack
from .config import RunConfig, apply_overrides, config_hash, load_config
from .data import Dataset, generate_synthetic, load_csv, load_idx, save_dataset
from .encoder import build_encoder
from .errors import (
    AmbiguityError,
    BudgetExceededError,
    ConfigError,
    DataError,
    FormatError,
    WorkbenchError,
)
from .fileio import atomic_write_bytes, atomic_write_json
from .item_memory import quantize_array
from .keylock import (
    attack_complexity,
    baseline_complexity,
    generate_key,
    load_key,
    per_feature_complexity,
    save_key,
    sig3_round,
    sig3_trunc,
)
from .model import evaluate, load_model, model_from_file, predict, save_model, train
from .rng import Rng

SCHEMA_VERSION = 1


def _provenance(cfg: RunConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "seed": cfg.seed,
        "config_sha256": config_hash(cfg),
    }


def _write_timing(path: str, started: float, wall_start: float) -> None:
    atomic_write_json(
        path,
        {"elapsed_s": time.perf_counter() - started, "started_unix": wall_start},
    )


def _build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {
        key: getattr(args, key)
        for key in vars(args)
        if key in RunConfig.__dataclass_fields__
    }
    return apply_overrides(cfg, overrides)


def _load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.data_source == "synthetic":
        return generate_synthetic(
            cfg.n_features,
            cfg.n_classes,
            cfg.samples_per_class,
            cfg.noise,
            Rng(cfg.seed, "data"),
            levels=cfg.grid_levels,
        )
    if cfg.data_source == "csv":
        if not cfg.data_path:
            raise ConfigError("data.data_path is required for the csv source")
        return load_csv(cfg.data_path, cfg.label_column, cfg.has_header)
    if not cfg.data_path or not cfg.labels_path:
        raise ConfigError("idx source needs data.data_path and data.labels_path")
    return load_idx(cfg.data_path, cfg.labels_path)


def split_dataset(ds: Dataset, train_fraction: float = 0.75):
    """Per-class leading split; deterministic for a fixed dataset order."""
    train_idx, eval_idx = [], []
    for c in range(ds.n_classes):
        rows = np.nonzero(ds.labels == c)[0]
        cut = max(1, int(np.ceil(len(rows) * train_fraction)))
        train_idx.extend(rows[:cut])
        eval_idx.extend(rows[cut:])
    train_idx = np.asarray(sorted(train_idx), dtype=np.int64)
    eval_idx = np.asarray(sorted(eval_idx), dtype=np.int64)
    if len(eval_idx) == 0:
        eval_idx = train_idx
    return train_idx, eval_idx


def _quantized(ds: Dataset, m: int) -> np.ndarray:
    return quantize_array(ds.samples, ds.v_min, ds.v_max, m)


def _encoder_for(cfg: RunConfig, n_features: int, key=None):
    if cfg.locked:
        return build_encoder(
            cfg.mode,
            n_features,
            cfg.levels,
            cfg.dim,
            cfg.seed,
            pool_size=cfg.effective_pool_size if cfg.pool_size == 0 else cfg.pool_size,
            layers=cfg.layers,
            key=key,
        )
    return build_encoder(cfg.mode, n_features, cfg.levels, cfg.dim, cfg.seed)


def cmd_gen_data(args) -> int:
    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    ds = _load_dataset(cfg)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "dataset.csv")
    save_dataset(ds, csv_path, None)
    sidecar = {
        "provenance": _provenance(cfg),
        "name": ds.name,
        "n_features": ds.n_features,
        "n_classes": ds.n_classes,
        "n_samples": len(ds.labels),
        "v_min": ds.v_min,
        "v_max": ds.v_max,
        "prototypes": None
        if ds.prototypes is None
        else ds.prototypes.astype(int).tolist(),
    }
    atomic_write_json(os.path.join(args.out, "dataset.json"), sidecar)
    _write_timing(os.path.join(args.out, "dataset.timing.json"), started, wall)
    print(f"wrote {csv_path} ({len(ds.labels)} samples, {ds.n_features} features)")
    return 0


def cmd_train(args) -> int:
    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    ds = _load_dataset(cfg)
    levels = _quantized(ds, cfg.levels)
    train_idx, _ = split_dataset(ds, args.train_fraction)
    key = None
    if cfg.locked and args.key:
        key, pool_size, key_dim = load_key(args.key)
        if key_dim != cfg.dim:
            raise ConfigError(
                f"key dimension {key_dim} does not match run dimension {cfg.dim}"
            )
        cfg.pool_size = pool_size
    encoder = _encoder_for(cfg, ds.n_features, key)
    model = train(
        levels[train_idx],
        ds.labels[train_idx],
        encoder,
        Rng(cfg.seed, "train"),
        threads=cfg.effective_threads,
    )
    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "model.hdlm")
    save_model(model, model_path)
    train_acc = evaluate(
        levels[train_idx], ds.labels[train_idx], model, threads=cfg.effective_threads
    )
    meta = {
        "provenance": _provenance(cfg),
        "mode": cfg.mode,
        "locked": cfg.locked,
        "dim": cfg.dim,
        "levels": cfg.levels,
        "n_features": ds.n_features,
        "n_classes": ds.n_classes,
        "train_samples": int(len(train_idx)),
        "train_fraction": args.train_fraction,
        "v_min": ds.v_min,
        "v_max": ds.v_max,
        "train_accuracy": train_acc,
    }
    atomic_write_json(os.path.join(args.out, "model.meta.json"), meta)
    _write_timing(os.path.join(args.out, "model.timing.json"), started, wall)
    print(f"wrote {model_path} (train accuracy {train_acc:.4f})")
    return 0


def cmd_infer(args) -> int:
    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    mf = load_model(args.model)
    key = None
    if mf.locked:
        if not args.key:
            raise ConfigError("locked model requires --key")
        key, _, _ = load_key(args.key)
    model = model_from_file(mf, key)
    meta_path = args.meta or (os.path.splitext(args.model)[0] + ".meta.json")
    if args.v_min is not None and args.v_max is not None:
        v_min, v_max = args.v_min, args.v_max
    else:
        try:
            with open(meta_path) as fh:
                meta = json.load(fh)
            v_min, v_max = meta["v_min"], meta["v_max"]
        except (OSError, KeyError, ValueError):
            raise ConfigError(
                "quantization range unavailable: pass --v-min/--v-max or --meta"
            ) from None
    queries = load_csv(args.queries, args.label_column, cfg.has_header) \
        if args.label_column is not None else _load_feature_csv(args.queries, cfg)
    levels = quantize_array(queries.samples, v_min, v_max, mf.n_levels)
    preds = predict(levels, model, threads=cfg.effective_threads)
    out = {
        "provenance": _provenance(cfg),
        "model": os.path.basename(args.model),
        "predictions": [int(p) for p in preds],
    }
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "predictions.json")
    atomic_write_json(path, out)
    _write_timing(os.path.join(args.out, "predictions.timing.json"), started, wall)
    print(f"wrote {path} ({len(preds)} predictions)")
    return 0


def _load_feature_csv(path: str, cfg: RunConfig) -> Dataset:
    """Queries without a label column: parse, attach dummy labels."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if cfg.has_header and lineno == 1:
                continue
            try:
                rows.append([float(c) for c in line.split(",")])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    samples = np.asarray(rows, dtype=np.float64)
    return Dataset(path, samples, np.zeros(len(samples), dtype=np.int64), 0.0, 1.0)


def cmd_attack(args) -> int:
    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    mf = load_model(args.model)
    if mf.locked:
        raise ConfigError("attack expects an unlocked victim; see lock-validate")
    model = model_from_file(mf)
    train_data = eval_data = None
    if cfg.data_source:
        ds = _load_dataset(cfg)
        if ds.n_features != mf.n_features:
            raise DataError(
                f"dataset has {ds.n_features} features, model expects {mf.n_features}"
            )
        levels = _quantized(ds, mf.n_levels)
        train_idx, eval_idx = split_dataset(ds, args.train_fraction)
        train_data = (levels[train_idx], ds.labels[train_idx])
        eval_data = (levels[eval_idx], ds.labels[eval_idx])
    report = run_reasoning_attack(
        model,
        shuffle_seed=cfg.shuffle_seed,
        attacker_seed=cfg.attacker_seed,
        reconstruction_mode=cfg.reconstruction,
        train_data=train_data,
        eval_data=eval_data,
        budget=cfg.budget or None,
        trace_positions=cfg.trace_positions,
        threads=cfg.effective_threads,
    )
    os.makedirs(args.out, exist_ok=True)
    payload = {"provenance": _provenance(cfg)}
    payload.update(report.to_dict())
    path = os.path.join(args.out, "attack_report.json")
    atomic_write_json(path, payload)
    _write_timing(os.path.join(args.out, "attack_report.timing.json"), started, wall)
    print(
        f"wrote {path} (value_ok={report.value_mapping_correct} "
        f"feature_ok={report.feature_mapping_correct} "
        f"guesses={report.guesses_used} calls={report.oracle_calls})"
    )
    return 0


def cmd_lock_keygen(args) -> int:
    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    if not cfg.locked:
        cfg.locked = True
    cfg.validate()
    n = args.key_features or cfg.n_features
    pool = cfg.effective_pool_size
    key = generate_key(n, cfg.layers, pool, cfg.dim, Rng(cfg.seed).child("key"))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "key.hdlk")
    save_key(key, pool, cfg.dim, path)
    meta = {
        "provenance": _provenance(cfg),
        "n_features": n,
        "layers": cfg.layers,
        "pool_size": pool,
        "dim": cfg.dim,
        "per_feature_guesses": str(per_feature_complexity(cfg.dim, pool, cfg.layers)),
        "total_guesses": str(attack_complexity(n, cfg.dim, pool, cfg.layers)),
    }
    atomic_write_json(os.path.join(args.out, "key.meta.json"), meta)
    _write_timing(os.path.join(args.out, "key.timing.json"), started, wall)
    print(f"wrote {path} (N={n} L={cfg.layers} P={pool} D={cfg.dim})")
    return 0


def cmd_lock_validate(args) -> int:
    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    mf = load_model(args.model)
    if not mf.locked:
        raise ConfigError("lock-validate expects a locked model file")
    key, pool_size, key_dim = load_key(args.key)
    if (pool_size, key_dim) != (mf.pool_size, mf.dim):
        raise ConfigError(
            f"key header (P={pool_size}, D={key_dim}) does not match "
            f"model (P={mf.pool_size}, D={mf.dim})"
        )
    model = model_from_file(mf, key)
    pool = model.encoder.pool
    os.makedirs(args.out, exist_ok=True)
    sweeps = []
    csv_lines = ["parameter,candidate,score,is_correct"]
    summary = {"provenance": _provenance(cfg), "sweeps": []}
    for layer in range(key.layers):
        for kind in ("rotation", "base"):
            oracle = EncodeOracle.from_model(model)
            trace = lock_validation_attack(
                oracle, pool, model.encoder.item_memory.val, key,
                (kind, layer), feature=args.feature,
            )
            sweeps.append(trace)
            stem = f"lock_trace_{kind}_layer{layer}"
            payload = {"provenance": _provenance(cfg)}
            payload.update(trace.to_dict())
            atomic_write_json(os.path.join(args.out, stem + ".json"), payload)
            for cand, score in zip(trace.candidates, trace.scores):
                correct = int(cand) == int(trace.candidates[trace.correct_position])
                csv_lines.append(f"{trace.swept_parameter},{cand},{score!r},{int(correct)}")
            summary["sweeps"].append(
                {
                    "parameter": trace.swept_parameter,
                    "metric": trace.metric,
                    "correct_is_strict_optimum": trace.correct_is_strict_optimum(),
                    "correct_score": float(trace.scores[trace.correct_position]),
                    "oracle_calls": oracle.calls,
                }
            )
    atomic_write_bytes(
        os.path.join(args.out, "lock_validation.csv"),
        ("\n".join(csv_lines) + "\n").encode("ascii"),
    )
    atomic_write_json(os.path.join(args.out, "lock_validation.json"), summary)
    _write_timing(os.path.join(args.out, "lock_validation.timing.json"), started, wall)
    ok = all(s["correct_is_strict_optimum"] for s in summary["sweeps"])
    print(f"lock validation sweeps: {len(sweeps)}, strict optimum everywhere: {ok}")
    return 0


def _sci(d: Decimal) -> str:
    return f"{d:.2E}".lower()


def cmd_complexity(args) -> int:
    cfg = _build_config(args)
    n, dim, p, layers = args.n, args.dim_arg, args.pool, args.layers_arg
    base = baseline_complexity(n)
    per_feature = per_feature_complexity(dim, p, layers)
    total = attack_complexity(n, dim, p, layers)
    # displayed improvement follows the reported convention: the ratio of
    # the two displayed 3-significant-figure values
    disp_total = sig3_trunc(total)
    disp_base = sig3_round(base)
    improvement_display = sig3_round(disp_total / disp_base)
    exact_improvement = Decimal(total) / Decimal(base)
    table = {
        "provenance": _provenance(cfg),
        "n": n,
        "dim": dim,
        "pool": p,
        "layers": layers,
        "baseline_guesses": str(base),
        "per_feature_guesses": str(per_feature),
        "total_guesses": str(total),
        "display": {
            "baseline": _sci(sig3_round(base)),
            "per_feature": _sci(sig3_round(per_feature)),
            "total_rounded": _sci(sig3_round(total)),
            "total_truncated": _sci(sig3_trunc(total)),
            "improvement": _sci(improvement_display),
            "improvement_exact": _sci(sig3_round(exact_improvement)),
        },
    }
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "complexity.json")
    atomic_write_json(path, table)
    print(f"baseline N^2          = {base} ({table['display']['baseline']})")
    print(f"locked   N*(D*P)^L    = {total} ({table['display']['total_rounded']})")
    print(f"per-feature (D*P)^L   = {per_feature} ({table['display']['per_feature']})")
    print(f"improvement (displayed) = {table['display']['improvement']}")
    return 0


def cmd_bench_encode(args) -> int:
    from .bench import measure_encoding_ratios  # defers the JIT dependency

    started = time.perf_counter()
    wall = time.time()
    cfg = _build_config(args)
    layers_list = [int(x) for x in args.layer_sweep.split(",")]
    rows = measure_encoding_ratios(
        args.bench_features or cfg.n_features,
        cfg.dim,
        layers_list,
        samples=args.samples,
        repeats=args.repeats,
        seed=cfg.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    payload = {
        "provenance": _provenance(cfg),
        "rows": [r.to_dict() for r in rows],
    }
    atomic_write_json(os.path.join(args.out, "bench_encode.json"), payload)
    csv_lines = ["layers,modeled,measured_ratio,measured_seconds_per_sample"]
    for r in rows:
        csv_lines.append(
            f"{r.layers},{r.modeled!r},{r.measured_ratio!r},{r.measured_seconds!r}"
        )
    atomic_write_bytes(
        os.path.join(args.out, "bench_encode.csv"),
        ("\n".join(csv_lines) + "\n").encode("ascii"),
    )
    _write_timing(os.path.join(args.out, "bench_encode.timing.json"), started, wall)
    for r in rows:
        print(
            f"L={r.layers}: modeled {r.modeled:.2f}, "
            f"measured ratio {r.measured_ratio:.3f}"
        )
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file with sections")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dim", type=int, default=None, dest="dim")
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--mode", choices=["binary", "non-binary"], default=None)
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdcsec",
        description="HDC security workbench: pipeline, reasoning attack, encoder lock",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    _add_common(p)
    for name, kind in (
        ("n-features", int), ("n-classes", int), ("samples-per-class", int),
        ("noise", float), ("grid-levels", int),
    ):
        p.add_argument(f"--{name}", type=kind, default=None,
                       dest=name.replace("-", "_"))
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model and write the model file")
    _add_common(p)
    p.add_argument("--data-source", choices=["synthetic", "csv", "idx"], default=None)
    p.add_argument("--data-path", default=None)
    p.add_argument("--labels-path", default=None)
    p.add_argument("--label-column", type=int, default=None)
    p.add_argument("--n-features", type=int, default=None, dest="n_features")
    p.add_argument("--n-classes", type=int, default=None, dest="n_classes")
    p.add_argument("--samples-per-class", type=int, default=None,
                   dest="samples_per_class")
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--locked", action="store_true", default=None)
    p.add_argument("--pool-size", type=int, default=None, dest="pool_size")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--key", help="lock key file (otherwise derived from the seed)")
    p.add_argument("--train-fraction", type=float, default=0.75)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="classify queries with a trained model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--key", help="lock key file for locked models")
    p.add_argument("--queries", required=True, help="CSV of query feature rows")
    p.add_argument("--label-column", type=int, default=None,
                   help="drop this column from the query CSV")
    p.add_argument("--meta", help="model meta JSON (for the quantization range)")
    p.add_argument("--v-min", type=float, default=None)
    p.add_argument("--v-max", type=float, default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("attack", help="reasoning attack on an unlocked model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data-source", choices=["synthetic", "csv", "idx"], default=None)
    p.add_argument("--data-path", default=None)
    p.add_argument("--labels-path", default=None)
    p.add_argument("--shuffle-seed", type=int, default=None, dest="shuffle_seed")
    p.add_argument("--attacker-seed", type=int, default=None, dest="attacker_seed")
    p.add_argument("--reconstruction", choices=["rebind", "retrain"], default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--trace-positions", type=int, default=None, dest="trace_positions")
    p.add_argument("--train-fraction", type=float, default=0.75)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("lock-keygen", help="generate an encoder lock key")
    _add_common(p)
    p.add_argument("--key-features", type=int, default=None,
                   help="number of sub-keys (defaults to data.n_features)")
    p.add_argument("--pool-size", type=int, default=None, dest="pool_size")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--locked", action="store_true", default=True,
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_lock_keygen)

    p = sub.add_parser("lock-validate",
                       help="single-parameter guess sweeps against a locked model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--feature", type=int, default=0)
    p.set_defaults(func=cmd_lock_validate)

    p = sub.add_parser("complexity", help="attack-complexity table")
    _add_common(p)
    p.add_argument("n", type=int)
    p.add_argument("dim_arg", type=int, metavar="dim")
    p.add_argument("pool", type=int)
    p.add_argument("layers_arg", type=int, metavar="layers")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("bench-encode", help="modeled vs measured encoding cost")
    _add_common(p)
    p.add_argument("--layer-sweep", default="1,2,3,4")
    p.add_argument("--bench-features", type=int, default=None)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_bench_encode)

    return parser


_EXIT_CODES = [
    (ConfigError, 2),
    (DataError, 3),
    (FormatError, 3),
    (AmbiguityError, 4),
    (BudgetExceededError, 5),
    (WorkbenchError, 1),
]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WorkbenchError as exc:
        code = next(c for cls, c in _EXIT_CODES if isinstance(exc, cls))
        payload = {"error": {"kind": type(exc).__name__, "message": str(exc),
                             "exit_code": code}}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
