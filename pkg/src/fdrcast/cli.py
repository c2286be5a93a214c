"""Batch command-line front end: simulate, prepare, train, tune, evaluate, bench.

Commands read files, write files under the output directory, and exit;
there is no interactive mode. Exit status: 0 success, 1 runtime failure,
2 usage error. When -o is omitted the FDRCAST_OUT environment variable
names the output root, falling back to ./out.
"""

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from . import channel, data, evaluation, figures, manifest, models, training, tuning
from .errors import FdrcastError

# Training presets. The "paper-*" ids pin the full-scale reference
# configurations (the ids themselves are part of the CLI contract); the
# toy ones make smoke runs and the acceptance suite fast.
TRAIN_PRESETS = {
    "paper-cnn": dict(kind="cnn", batch_size=64, width=128, input_length=3600,
                      epochs=30),
    "paper-lstm": dict(kind="lstm", batch_size=32, width=25, input_length=1200,
                       epochs=15),
    "toy-cnn": dict(kind="cnn", batch_size=32, width=8, input_length=64,
                    epochs=8),
    "toy-lstm": dict(kind="lstm", batch_size=32, width=8, input_length=64,
                     epochs=8),
}

DEFAULT_EPOCHS = {"cnn": 30, "lstm": 15}
DEFAULT_HORIZON = 3600


def _default_out():
    return os.environ.get("FDRCAST_OUT", "out")


def _seed_pair(seed, tag):
    digest = hashlib.sha256(f"{seed}|{tag}".encode("ascii")).digest()
    a = int.from_bytes(digest[:8], "big") & (2 ** 63 - 1)
    b = int.from_bytes(digest[8:16], "big") & (2 ** 63 - 1)
    return a, b


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(values)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fdrcast",
        description="Forecast Wi-Fi frame delivery ratio from binary outcome traces.",
    )
    parser.add_argument("--version", action="version", version=f"fdrcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic bursty outcome trace")
    p.add_argument("-n", "--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", default="paper-like", choices=sorted(channel.PRESETS))
    p.add_argument("--p-good-to-bad", type=float, default=None)
    p.add_argument("--p-bad-to-good", type=float, default=None)
    p.add_argument("--success-prob-good", type=float, default=None)
    p.add_argument("--success-prob-bad", type=float, default=None)
    p.add_argument("--format", default="bitline", choices=("bitline", "csv"))
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("prepare", help="split a trace chronologically and record dataset parameters")
    p.add_argument("--trace", required=True)
    p.add_argument("--format", default="bitline", choices=("bitline", "csv"))
    p.add_argument("-l", "--input-length", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--preset", default=None, choices=sorted(TRAIN_PRESETS))
    p.add_argument("--train-frac", type=float, default=0.5)
    p.add_argument("--val-frac", type=float, default=0.1667)
    p.add_argument("--test-frac", type=float, default=0.3333)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train one forecaster on a prepared dataset")
    p.add_argument("kind", choices=models.KINDS)
    p.add_argument("--data", required=True, help="directory written by prepare")
    p.add_argument("--preset", default=None, choices=sorted(TRAIN_PRESETS))
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("-l", "--input-length", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--initial-lr", type=float, default=0.01)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--train-stride", type=int, default=10)
    p.add_argument("--val-stride", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="exhaustive hyperparameter grid search")
    p.add_argument("kind", choices=models.KINDS)
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch-sizes", type=_int_list, default=(32, 64, 128))
    p.add_argument("--widths", type=_int_list, default=(64, 128, 256))
    p.add_argument("--input-lengths", type=_int_list, default=(1200, 1800, 3600))
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--initial-lr", type=float, default=0.01)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--train-stride", type=int, default=10)
    p.add_argument("--val-stride", type=int, default=1)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("evaluate", help="error statistics and report files on the test split")
    p.add_argument("--model", action="append", required=True, dest="model_paths")
    p.add_argument("--data", required=True)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--clamp", action="store_true",
                   help="clamp predictions into [0,1] before scoring")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="single-inference latency and memory benchmark")
    p.add_argument("--model", action="append", required=True, dest="model_paths")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--warmup", type=int, default=10)
    p.add_argument("--data", default=None,
                   help="optional prepared dataset; without it patterns are synthetic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def _resolve_out(args):
    out = args.out if args.out is not None else _default_out()
    os.makedirs(out, exist_ok=True)
    return out


def _start_manifest(out, args, seeds=None, digests=None, skip=("func", "out")):
    params = {k: v for k, v in vars(args).items() if k not in skip}
    params["out"] = out
    m = manifest.start_manifest(
        command=args.command,
        parameters=params,
        seeds=seeds or {},
        input_digests=digests or {},
        tool_version=__version__,
    )
    manifest.write_manifest(m, os.path.join(out, "manifest.json"))
    return m


def _finish_manifest(m, out, outputs=None):
    m.outputs = outputs or {}
    manifest.finalize_manifest(m, os.path.join(out, "manifest.json"))


def cmd_simulate(args):
    params = channel.preset_params(args.preset, seed=args.seed)
    overrides = {
        "p_good_to_bad": args.p_good_to_bad,
        "p_bad_to_good": args.p_bad_to_good,
        "success_prob_good": args.success_prob_good,
        "success_prob_bad": args.success_prob_bad,
    }
    fields = {k: v for k, v in overrides.items() if v is not None}
    if fields:
        from dataclasses import replace
        params = replace(params, **fields)
    out = _resolve_out(args)
    m = _start_manifest(out, args, seeds={"simulate": args.seed})
    series = channel.simulate(params, args.samples, seed=args.seed)
    ext = "txt" if args.format == "bitline" else "csv"
    trace_path = os.path.join(out, f"trace.{ext}")
    data.save_outcomes(series, trace_path, format=args.format)
    mean = float(np.mean(series.outcomes))
    _finish_manifest(m, out, outputs={
        "trace": trace_path,
        "trace_sha256": manifest.file_digest(trace_path),
        "empirical_mean": mean,
        "stationary_mean": channel.stationary_fdr(params),
    })
    print(f"wrote {trace_path}: {args.samples} outcomes, mean {mean:.4f} "
          f"(long-run {channel.stationary_fdr(params):.4f})")
    return 0


def _apply_preset(args, kind=None):
    """Fill unset hyperparameter flags from the named preset, if any."""
    if args.preset is None:
        return
    preset = TRAIN_PRESETS[args.preset]
    if kind is not None and preset["kind"] != kind:
        raise FdrcastError(
            f"preset {args.preset!r} is for kind {preset['kind']!r}, not {kind!r}"
        )
    if getattr(args, "batch_size", None) is None and "batch_size" in preset:
        args.batch_size = preset["batch_size"]
    if getattr(args, "width", None) is None and "width" in preset:
        args.width = preset["width"]
    if getattr(args, "input_length", None) is None:
        args.input_length = preset["input_length"]
    if getattr(args, "epochs", None) is None and "epochs" in preset:
        args.epochs = preset["epochs"]


def cmd_prepare(args):
    if args.preset is not None:
        preset = TRAIN_PRESETS[args.preset]
        if args.input_length is None:
            args.input_length = preset["input_length"]
        if args.horizon is None and args.preset.startswith("toy"):
            args.horizon = 64
    l = args.input_length if args.input_length is not None else 3600
    horizon = args.horizon if args.horizon is not None else DEFAULT_HORIZON
    out = _resolve_out(args)
    digest = manifest.file_digest(args.trace)
    m = _start_manifest(out, args, digests={"trace": digest})
    series = data.load_outcomes(args.trace, format=args.format)
    split = data.SplitSpec(args.train_frac, args.val_frac, args.test_frac)
    parts = data.chronological_split(series, split)
    names = ("train", "validation", "test")
    fractions = (args.train_frac, args.val_frac, args.test_frac)
    counts = {}
    for name, frac, part in zip(names, fractions, parts):
        if frac > 0 and len(part) < l + horizon:
            raise FdrcastError(
                f"{name} split has {len(part)} outcomes; needs at least "
                f"l + horizon = {l + horizon} for one window"
            )
        if len(part) == 0:
            print(f"warning: {name} split is empty", file=sys.stderr)
            counts[name] = 0
            continue
        data.save_outcomes(part, os.path.join(out, f"{name}.txt"))
        counts[name] = len(part)
    success, failure = data.class_balance(series)
    dataset_info = {
        "input_length": l,
        "horizon": horizon,
        "stride": args.stride,
        "fractions": {
            "train": args.train_frac,
            "validation": args.val_frac,
            "test": args.test_frac,
        },
        "counts": counts,
        "class_balance": {"success": success, "failure": failure},
        "sample_period_s": series.sample_period_s,
        "source_trace_sha256": digest,
    }
    info_path = os.path.join(out, "dataset.json")
    with open(info_path, "w", encoding="utf-8") as fh:
        json.dump(dataset_info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _finish_manifest(m, out, outputs={"dataset": info_path, "counts": counts})
    print(f"prepared {out}: counts {counts}, delivered fraction {success:.4f}")
    return 0


def _load_dataset_info(data_dir):
    path = os.path.join(data_dir, "dataset.json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FdrcastError(f"{data_dir}: not a prepared dataset ({exc})") from exc


def _load_split(data_dir, name, info):
    return data.load_outcomes(
        os.path.join(data_dir, f"{name}.txt"),
        sample_period_s=info.get("sample_period_s", data.DEFAULT_SAMPLE_PERIOD_S),
    )


def cmd_train(args):
    _apply_preset(args, kind=args.kind)
    info = _load_dataset_info(args.data)
    if args.input_length is None:
        args.input_length = info["input_length"]
    if args.input_length != info["input_length"]:
        raise FdrcastError(
            f"requested input length {args.input_length} but the dataset was "
            f"prepared with {info['input_length']}"
        )
    if args.batch_size is None or args.width is None:
        raise FdrcastError("need --preset or both --batch-size and --width")
    if args.epochs is None:
        args.epochs = DEFAULT_EPOCHS[args.kind]
    horizon = info["horizon"]
    out = _resolve_out(args)
    digests = {
        "train": manifest.file_digest(os.path.join(args.data, "train.txt")),
        "validation": manifest.file_digest(os.path.join(args.data, "validation.txt")),
    }
    init_seed, shuffle_seed = _seed_pair(args.seed, f"train|{args.kind}")
    m = _start_manifest(
        out, args,
        seeds={"master": args.seed, "init": init_seed, "shuffle": shuffle_seed},
        digests=digests,
    )
    train_series = _load_split(args.data, "train", info)
    val_series = _load_split(args.data, "validation", info)
    hp = models.Hyperparams(
        batch_size=args.batch_size, width=args.width, input_length=args.input_length
    )
    config = training.TrainConfig(
        epoch_budget=args.epochs,
        initial_lr=args.initial_lr,
        batch_size=hp.batch_size,
        early_stop_patience=args.patience,
        shuffle_seed=shuffle_seed,
        train_stride=args.train_stride,
    )
    train_set = data.make_windows(train_series, hp.input_length, horizon,
                                  stride=args.train_stride)
    val_set = data.make_windows(val_series, hp.input_length, horizon,
                                stride=args.val_stride)
    model = models.build_model(args.kind, hp, init_seed)
    training.train(model, train_set, val_set, config)

    model_path = os.path.join(out, "model.fdrc")
    models.save_model(model, model_path, meta={
        "seed": args.seed,
        "horizon": horizon,
        "train_stride": args.train_stride,
        "val_stride": args.val_stride,
        "train_trace_sha256": digests["train"],
        "validation_trace_sha256": digests["validation"],
    })
    log_path = os.path.join(out, "training_log.csv")
    with open(log_path, "w", newline="", encoding="utf-8") as fh:
        fh.write("epoch,lr,train_mse,val_mse,seconds\n")
        for row in model.training_log:
            fh.write(f"{row.epoch},{row.lr!r},{row.train_mse!r},"
                     f"{row.val_mse!r},{row.seconds:.3f}\n")
    outputs = {
        "model": model_path,
        "model_sha256": manifest.file_digest(model_path),
        "training_log": log_path,
        "best_epoch": model.best_epoch,
        "best_val_mse": min(model.val_loss_trace),
        "epochs_run": len(model.val_loss_trace),
    }
    if not args.no_figures:
        fig_path = os.path.join(out, "training_curve.png")
        figures.training_curve_figure(fig_path, {args.kind: model.val_loss_trace})
        outputs["training_curve"] = fig_path
    _finish_manifest(m, out, outputs=outputs)
    print(f"trained {args.kind}: best epoch {model.best_epoch} "
          f"(val MSE {min(model.val_loss_trace):.6f}), wrote {model_path}")
    return 0


def cmd_tune(args):
    info = _load_dataset_info(args.data)
    horizon = args.horizon if args.horizon is not None else info["horizon"]
    epochs = args.epochs if args.epochs is not None else DEFAULT_EPOCHS[args.kind]
    out = _resolve_out(args)
    digests = {
        "train": manifest.file_digest(os.path.join(args.data, "train.txt")),
        "validation": manifest.file_digest(os.path.join(args.data, "validation.txt")),
    }
    m = _start_manifest(out, args, seeds={"master": args.master_seed}, digests=digests)
    train_series = _load_split(args.data, "train", info)
    val_series = _load_split(args.data, "validation", info)
    space = tuning.SearchSpace(
        batch_sizes=args.batch_sizes,
        widths=args.widths,
        input_lengths=args.input_lengths,
    )
    config = training.TrainConfig(
        epoch_budget=epochs,
        initial_lr=args.initial_lr,
        early_stop_patience=args.patience,
        train_stride=args.train_stride,
    )

    def progress(rec):
        hp = rec.hyperparams
        stable = "n/a" if rec.stable_avg is None else f"{rec.stable_avg:.6f}"
        print(f"  trial l={hp.input_length} n={hp.width} b={hp.batch_size}: "
              f"{rec.status}, stable loss {stable} ({rec.seconds:.1f}s)")

    best, records = tuning.run_search(
        kind=args.kind,
        train_series=train_series,
        val_series=val_series,
        horizon=horizon,
        config=config,
        out_dir=out,
        space=space,
        master_seed=args.master_seed,
        workers=args.workers,
        val_stride=args.val_stride,
        progress=progress,
    )
    _finish_manifest(m, out, outputs={
        "best": {"batch_size": best.batch_size, "width": best.width,
                 "input_length": best.input_length},
        "trials": len(records),
    })
    print(f"best hyperparameters: l={best.input_length} n={best.width} "
          f"b={best.batch_size}")
    return 0


def _report_section(out, section):
    """Prior report.json content for the other section, if present."""
    path = os.path.join(out, "report.json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, ValueError):
        return {}
    result = {}
    for name, fields in payload.get(section, {}).items():
        try:
            if section == "accuracy":
                result[name] = evaluation.ErrorStats(**fields)
            else:
                result[name] = evaluation.ComplexityReport(**fields)
        except TypeError:
            continue
    return result


def _unique_name(kind, used):
    if kind not in used:
        return kind
    i = 2
    while f"{kind}-{i}" in used:
        i += 1
    return f"{kind}-{i}"


def cmd_evaluate(args):
    info = _load_dataset_info(args.data)
    stride = args.stride if args.stride is not None else info["stride"]
    out = _resolve_out(args)
    digests = {"test": manifest.file_digest(os.path.join(args.data, "test.txt"))}
    for path in args.model_paths:
        digests[os.path.basename(path)] = manifest.file_digest(path)
    m = _start_manifest(out, args, digests=digests)
    test_series = _load_split(args.data, "test", info)
    horizon = info["horizon"]
    stats_by_model = {}
    for path in args.model_paths:
        model = models.load_model(path)
        name = _unique_name(model.kind, stats_by_model)
        test_set = data.make_windows(
            test_series, model.hyperparams.input_length, horizon, stride=stride
        )
        preds = model.predict(test_set.patterns)
        if args.clamp:
            preds = np.clip(preds, 0.0, 1.0)
        stats_by_model[name] = evaluation.compute_error_stats(preds, test_set.targets)
        if not args.no_figures:
            figures.forecast_figure(
                os.path.join(out, f"forecast_{name}.png"),
                test_set.targets, preds,
                sample_period_s=test_series.sample_period_s,
                anchors=test_set.anchors, label=name,
            )
            figures.error_histogram_figure(
                os.path.join(out, f"errors_{name}.png"),
                100.0 * (preds - test_set.targets), label=name,
            )
    complexity = _report_section(out, "complexity")
    evaluation.report(stats_by_model, complexity, out)
    _finish_manifest(m, out, outputs={
        "report": os.path.join(out, "report.json"),
        "models": sorted(stats_by_model),
    })
    for name in sorted(stats_by_model):
        s = stats_by_model[name]
        print(f"{name}: mean squared error {s.mu_e2:.6f}, "
              f"mean absolute error {s.mu_abs_e_pct:.2f}%")
    return 0


def cmd_bench(args):
    if args.reps < 100:
        raise FdrcastError(f"--reps must be >= 100, got {args.reps}")
    out = _resolve_out(args)
    digests = {os.path.basename(p): manifest.file_digest(p) for p in args.model_paths}
    m = _start_manifest(out, args, seeds={"patterns": args.seed}, digests=digests)
    test_series = None
    if args.data is not None:
        info = _load_dataset_info(args.data)
        test_series = _load_split(args.data, "test", info)
    complexity = {}
    for path in args.model_paths:
        model = models.load_model(path)
        name = _unique_name(model.kind, complexity)
        l = model.hyperparams.input_length
        if test_series is not None and len(test_series) >= l:
            windows = np.lib.stride_tricks.sliding_window_view(
                test_series.outcomes, l
            )
            patterns = windows[:: max(1, windows.shape[0] // 32)][:32]
        else:
            rng = np.random.Generator(np.random.PCG64(args.seed))
            patterns = (rng.random((32, l)) < 0.9).astype(np.uint8)
        complexity[name] = evaluation.bench_inference(
            model, patterns, repetitions=args.reps, warmup=args.warmup
        )
    accuracy = _report_section(out, "accuracy")
    evaluation.report(accuracy, complexity, out)
    _finish_manifest(m, out, outputs={"report": os.path.join(out, "report.json"),
                                      "models": sorted(complexity)})
    for name in sorted(complexity):
        c = complexity[name]
        print(f"{name}: {c.mean_response_time_ms:.2f} ms per inference, "
              f"footprint {c.memory_footprint_mb:.2f} MB, "
              f"peak {c.memory_peak_mb:.2f} MB")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FdrcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
