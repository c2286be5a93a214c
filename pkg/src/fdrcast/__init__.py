"""Wi-Fi link-quality forecasting toolkit.

Predicts the frame delivery ratio a link will sustain over the coming
minutes from the binary outcome history of individual transmissions, with
from-scratch convolutional and recurrent regressors, a bursty-channel
simulator, deterministic training, grid hyperparameter search, and report
generation.
"""

__version__ = "0.1.0"

from .channel import GilbertElliottParams, PRESETS, preset_params, simulate, stationary_fdr
from .data import (
    OutcomeSeries,
    SplitSpec,
    WindowedDataset,
    chronological_split,
    class_balance,
    compute_target,
    load_outcomes,
    make_windows,
    save_outcomes,
    window_count,
)
from .errors import (
    CheckpointError,
    DivergenceError,
    FdrcastError,
    InsufficientDataError,
    InsufficientEpochsError,
    NumericError,
    ParseError,
    SearchError,
    ShapeError,
)
from .evaluation import (
    ComplexityReport,
    ErrorStats,
    bench_inference,
    compute_error_stats,
    percentile,
    report,
)
from .models import (
    Hyperparams,
    TrainedModel,
    build_cnn,
    build_lstm,
    build_model,
    load_model,
    parameter_count,
    save_model,
)
from .training import TrainConfig, lr_schedule, train, validation_loss
from .tuning import (
    SearchSpace,
    TrialRecord,
    run_search,
    select_best,
    stable_avg_loss,
    trial_seeds,
)
