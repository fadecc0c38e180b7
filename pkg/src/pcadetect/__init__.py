"""Pilot-contamination attack detection for multiuser massive-MIMO uplinks."""

__version__ = "0.1.0"

from .signal_model import (  # noqa: E402,F401
    PilotSetError,
    UplinkConfig,
    generate_pilots,
    sample_channel,
    simulate_uplink,
    synthesize_estimate,
)
from .estimation import energy_feature, ls_estimate  # noqa: F401
from .lrt import (  # noqa: F401
    LrtDetector,
    hypothesis_variances,
    lrt_detect,
    lrt_threshold,
    lrt_threshold_unsimplified,
)
from .dataset import (  # noqa: F401
    Dataset,
    DatasetFormatError,
    GridSpec,
    Sample,
    default_test_grid,
    default_train_grid,
    generate_dataset,
    load_csv,
    save_csv,
    stratified_kfold,
)
from .dtree import (  # noqa: F401
    Metrics,
    TreeModel,
    best_split,
    evaluate,
    fit,
    gini,
    grid_search_cv,
    load_model,
    predict,
    save_model,
)
from .experiments import (  # noqa: F401
    ModelRequiredError,
    SweepResult,
    detection_probability,
    export_energy_histograms,
    sweep_antennas,
    sweep_pe,
    sweep_snr,
    sweep_users,
    train_default_model,
)
