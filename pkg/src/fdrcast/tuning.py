"""Exhaustive hyperparameter search over (batch size, width, input length).

Every grid point trains one model; the selection objective is the stable
average validation loss, the mean over epochs 6 to the end of the trace.
Early epochs swing too much to compare configurations, so traces shorter
than 6 epochs are non-comparable and excluded. One JSON record per trial
makes an interrupted search resumable, and per-trial seeds are derived from
the master seed and the grid point alone, so results do not depend on
worker count or completion order.
"""

import csv
import hashlib
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import make_windows
from .errors import DivergenceError, InsufficientEpochsError, SearchError
from .models import Hyperparams, build_model
from .training import TrainConfig, train

STABLE_FROM_EPOCH = 6


@dataclass(frozen=True)
class SearchSpace:
    batch_sizes: tuple = (32, 64, 128)
    widths: tuple = (64, 128, 256)
    input_lengths: tuple = (1200, 1800, 3600)

    def __post_init__(self):
        for name in ("batch_sizes", "widths", "input_lengths"):
            vals = getattr(self, name)
            if len(vals) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(int(v) < 1 for v in vals):
                raise ValueError(f"{name} entries must be positive, got {vals}")

    def points(self):
        """Grid points in fixed order: l outermost, then width, then batch."""
        for l, n, b in itertools.product(
            self.input_lengths, self.widths, self.batch_sizes
        ):
            yield Hyperparams(batch_size=int(b), width=int(n), input_length=int(l))

    def size(self):
        return len(self.batch_sizes) * len(self.widths) * len(self.input_lengths)


@dataclass
class TrialRecord:
    hyperparams: Hyperparams
    val_loss_trace: list
    stable_avg: float
    best_epoch: int
    seconds: float
    status: str
    seed: int

    @property
    def comparable(self):
        return self.stable_avg is not None


def stable_avg_loss(trace, n_tau=None):
    """Mean validation loss from epoch 6 through the end of the trace.

    A trace cut short by early stopping is averaged to its actual end; one
    shorter than 6 epochs has no stable region and raises.
    """
    if n_tau is not None and len(trace) > n_tau:
        raise ValueError(
            f"trace has {len(trace)} epochs but the budget is {n_tau}"
        )
    if len(trace) < STABLE_FROM_EPOCH:
        raise InsufficientEpochsError(
            f"need >= {STABLE_FROM_EPOCH} epochs for a stable average, "
            f"got {len(trace)}"
        )
    return float(np.mean(np.asarray(trace, dtype=np.float64)[STABLE_FROM_EPOCH - 1:]))


def select_best(trials):
    """Hyperparams of the minimal stable average among comparable trials.

    Exact ties fall to the smaller input length, then width, then batch.
    """
    comparable = [t for t in trials if t.comparable]
    if not comparable:
        statuses = ", ".join(
            f"(l={t.hyperparams.input_length},n={t.hyperparams.width},"
            f"b={t.hyperparams.batch_size}):{t.status}" for t in trials
        ) or "no trials"
        raise SearchError(f"no comparable trials to select from: {statuses}")
    best = min(comparable, key=lambda t: (
        t.stable_avg,
        t.hyperparams.input_length,
        t.hyperparams.width,
        t.hyperparams.batch_size,
    ))
    return best.hyperparams


def trial_seeds(master_seed, kind, hp):
    """(init seed, shuffle seed) for one grid point, stable across runs.

    Derived by hashing the master seed with the grid point, so any subset
    of trials can run in any order or process and still reproduce exactly.
    """
    key = f"{master_seed}|{kind}|{hp.batch_size}|{hp.width}|{hp.input_length}"
    digest = hashlib.sha256(key.encode("ascii")).digest()
    init_seed = int.from_bytes(digest[:8], "big") & (2 ** 63 - 1)
    shuffle_seed = int.from_bytes(digest[8:16], "big") & (2 ** 63 - 1)
    return init_seed, shuffle_seed


def _trial_path(out_dir, hp):
    return os.path.join(
        out_dir,
        f"trial_l{hp.input_length}_n{hp.width}_b{hp.batch_size}.json",
    )


def _record_to_dict(rec):
    hp = rec.hyperparams
    return {
        "batch_size": hp.batch_size,
        "width": hp.width,
        "input_length": hp.input_length,
        "val_loss_trace": [float(v) for v in rec.val_loss_trace],
        "stable_avg_loss": rec.stable_avg,
        "best_epoch": rec.best_epoch,
        "seconds": rec.seconds,
        "status": rec.status,
        "seed": rec.seed,
    }


def _record_from_dict(d):
    hp = Hyperparams(
        batch_size=int(d["batch_size"]),
        width=int(d["width"]),
        input_length=int(d["input_length"]),
    )
    stable = d["stable_avg_loss"]
    return TrialRecord(
        hyperparams=hp,
        val_loss_trace=[float(v) for v in d["val_loss_trace"]],
        stable_avg=None if stable is None else float(stable),
        best_epoch=int(d["best_epoch"]),
        seconds=float(d["seconds"]),
        status=str(d["status"]),
        seed=int(d["seed"]),
    )


def _load_trial(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return _record_from_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError):
        return None


def _write_json(path, payload):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def run_trial(kind, hp, master_seed, train_series, val_series, horizon,
              config, val_stride=1):
    """Train one grid point from scratch and summarize it as a TrialRecord."""
    init_seed, shuffle_seed = trial_seeds(master_seed, kind, hp)
    started = time.perf_counter()
    trial_config = TrainConfig(
        epoch_budget=config.epoch_budget,
        initial_lr=config.initial_lr,
        batch_size=hp.batch_size,
        early_stop_patience=config.early_stop_patience,
        shuffle_seed=shuffle_seed,
        train_stride=config.train_stride,
    )
    train_set = make_windows(
        train_series, hp.input_length, horizon, stride=config.train_stride
    )
    val_set = make_windows(val_series, hp.input_length, horizon, stride=val_stride)
    model = build_model(kind, hp, init_seed)
    status = "completed"
    try:
        train(model, train_set, val_set, trial_config)
        trace = list(model.val_loss_trace)
        if len(trace) < config.epoch_budget:
            status = "stopped-early"
        best_epoch = model.best_epoch
    except DivergenceError:
        status = "diverged"
        trace = list(model.val_loss_trace)
        best_epoch = 0
    stable = None
    if status != "diverged":
        try:
            stable = stable_avg_loss(trace)
        except InsufficientEpochsError:
            stable = None
    return TrialRecord(
        hyperparams=hp,
        val_loss_trace=trace,
        stable_avg=stable,
        best_epoch=best_epoch,
        seconds=time.perf_counter() - started,
        status=status,
        seed=init_seed,
    )


def _trial_task(args):
    return run_trial(*args)


def write_summary(out_dir, records):
    """summary.csv: one row per grid point in enumeration order."""
    path = os.path.join(out_dir, "summary.csv")
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["batch_size", "width", "input_length", "stable_avg_loss",
             "status", "seconds"]
        )
        for rec in records:
            hp = rec.hyperparams
            writer.writerow([
                hp.batch_size, hp.width, hp.input_length,
                "" if rec.stable_avg is None else repr(rec.stable_avg),
                rec.status, f"{rec.seconds:.3f}",
            ])
    os.replace(tmp, path)


def run_search(kind, train_series, val_series, horizon, config, out_dir,
               space=None, master_seed=0, workers=1, val_stride=1,
               trial_runner=None, progress=None):
    """Run (or resume) the full grid and return (best hyperparams, records).

    Completed trials found on disk are reused; only missing grid points run.
    ``trial_runner`` replaces the real per-trial training (test hook); it
    forces inline execution. Results are independent of ``workers``.
    """
    space = space or SearchSpace()
    os.makedirs(out_dir, exist_ok=True)
    points = list(space.points())
    records = {}
    pending = []
    for hp in points:
        rec = _load_trial(_trial_path(out_dir, hp))
        if rec is not None and rec.hyperparams == hp:
            records[hp] = rec
        else:
            pending.append(hp)

    def finish(hp, rec):
        records[hp] = rec
        _write_json(_trial_path(out_dir, hp), _record_to_dict(rec))
        if progress is not None:
            progress(rec)

    if trial_runner is not None:
        for hp in pending:
            finish(hp, trial_runner(kind, hp, master_seed))
    elif workers <= 1:
        for hp in pending:
            finish(hp, run_trial(kind, hp, master_seed, train_series,
                                 val_series, horizon, config, val_stride))
    else:
        args = [(kind, hp, master_seed, train_series, val_series, horizon,
                 config, val_stride) for hp in pending]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for hp, rec in zip(pending, pool.map(_trial_task, args)):
                finish(hp, rec)

    ordered = [records[hp] for hp in points]
    write_summary(out_dir, ordered)
    best = select_best(ordered)
    best_rec = next(r for r in ordered if r.hyperparams == best)
    _write_json(os.path.join(out_dir, "best.json"), {
        "kind": kind,
        "batch_size": best.batch_size,
        "width": best.width,
        "input_length": best.input_length,
        "stable_avg_loss": best_rec.stable_avg,
        "seed": best_rec.seed,
    })
    return best, ordered
