"""Mini-batch training with Adam, halving learning rate, early stopping.

The learning rate starts at 0.01 and halves on every subsequent epoch.
After each epoch the full-validation MSE is appended to the model's
val_loss_trace; when it fails to strictly improve for a configured number
of consecutive epochs, training stops and the best-validation parameters
are restored.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InsufficientDataError, NumericError
from .nn import adam_step_all, mse_loss


@dataclass
class TrainConfig:
    epoch_budget: int
    initial_lr: float = 0.01
    batch_size: int = 32
    early_stop_patience: int = 3
    shuffle_seed: int = 0
    # Training windows are usually cut at this stride; adjacent stride-1
    # windows are near-duplicates and multiply epoch cost. Validation and
    # test stay at stride 1 unless the caller says otherwise.
    train_stride: int = 10

    def __post_init__(self):
        if self.epoch_budget < 1:
            raise ValueError(f"epoch_budget must be >= 1, got {self.epoch_budget}")
        if not self.initial_lr > 0:
            raise ValueError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.early_stop_patience < 1:
            raise ValueError(
                f"early_stop_patience must be >= 1, got {self.early_stop_patience}"
            )
        if self.batch_size < 1 or self.train_stride < 1:
            raise ValueError("batch_size and train_stride must be >= 1")


@dataclass
class EpochLog:
    epoch: int
    lr: float
    train_mse: float
    val_mse: float
    seconds: float


def lr_schedule(epoch, initial_lr=0.01):
    """initial_lr * 2^-(epoch-1); epochs are 1-based."""
    if epoch < 1:
        raise ValueError(f"epoch must be >= 1, got {epoch}")
    return initial_lr * 2.0 ** (-(epoch - 1))


def validation_loss(model, val_set):
    """Mean squared error of the model over a whole windowed dataset."""
    if len(val_set) == 0:
        raise InsufficientDataError("validation_loss of an empty dataset")
    preds = model.predict(val_set.patterns)
    loss, _ = mse_loss(preds, val_set.targets)
    return loss


def train(model, train_set, val_set, config):
    """Train in place; returns the model with best-epoch parameters restored.

    Each epoch shuffles the training pairs with the seeded run generator and
    iterates mini-batches of config.batch_size (the final partial batch is
    kept). Per-epoch rows (epoch, lr, train MSE, validation MSE, seconds)
    accumulate in model.training_log.
    """
    n = len(train_set)
    if n == 0 or len(val_set) == 0:
        raise InsufficientDataError("train and validation sets must be nonempty")
    if config.batch_size > n:
        raise InsufficientDataError(
            f"batch_size {config.batch_size} exceeds training-set size {n}"
        )
    rng = np.random.Generator(np.random.PCG64(config.shuffle_seed))
    params = model.network.parameters()
    model.val_loss_trace = []
    model.training_log = []
    best_loss = np.inf
    best_epoch = 0
    best_values = None
    bad_streak = 0
    for epoch in range(1, config.epoch_budget + 1):
        t0 = time.perf_counter()
        lr = lr_schedule(epoch, config.initial_lr)
        order = rng.permutation(n)
        sq_sum = 0.0
        for batch_idx, start in enumerate(range(0, n, config.batch_size)):
            take = order[start:start + config.batch_size]
            try:
                preds = model.forward_batch(train_set.patterns[take])
                loss, grad = mse_loss(preds, train_set.targets[take])
                model.network.backward(grad[:, None])
                adam_step_all(params, lr)
            except NumericError as exc:
                raise DivergenceError(
                    f"training diverged at epoch {epoch}, batch {batch_idx}: {exc}",
                    epoch=epoch,
                    batch=batch_idx,
                ) from exc
            sq_sum += loss * take.size
        try:
            val_mse = validation_loss(model, val_set)
        except NumericError as exc:
            raise DivergenceError(
                f"validation diverged at epoch {epoch}: {exc}", epoch=epoch
            ) from exc
        model.val_loss_trace.append(val_mse)
        model.training_log.append(EpochLog(
            epoch=epoch,
            lr=lr,
            train_mse=sq_sum / n,
            val_mse=val_mse,
            seconds=time.perf_counter() - t0,
        ))
        if val_mse < best_loss:
            best_loss = val_mse
            best_epoch = epoch
            best_values = [p.value.copy() for p in params]
            bad_streak = 0
        else:
            bad_streak += 1
            if bad_streak >= config.early_stop_patience:
                break
    for p, v in zip(params, best_values):
        p.value[...] = v
    model.best_epoch = best_epoch
    return model
