"""System time-to-failure estimation by fusing censored lifetime data
collected at component, subsystem, and system level through discrete
beta-Stacy processes."""

from .bsp import (
    BetaShape,
    BetaStacyProcess,
    CountingSummary,
    DiscreteCdf,
    LifetimeSample,
    beta_match,
    counting_summary,
    credible_interval,
    dp_prior,
    mean,
    posterior_update,
    second_moment,
)
from .dataio import (
    CurveExport,
    Dataset,
    export_curves,
    load_lifetimes,
    load_prior_spec,
    save_lifetimes,
)
from .errors import (
    BindingError,
    DataFormatError,
    NotEstimableError,
    PrecisionRecoveryWarning,
    RbdError,
    RbdSyntaxError,
    RelfuseError,
)
from .fusion import (
    DEFAULT_PRECISION_CAP,
    MomentCurve,
    align_grids,
    combine_parallel,
    combine_series,
    fuse_to_prior,
    merge_priors,
    moments_of,
    recover_precision,
    reduce_rbd,
)
from .oracle import (
    PathStats,
    StructuralLifetime,
    WeibullLifetime,
    exact_three_beta_product_pdf,
    kaplan_meier,
    simulate_bsp_paths,
    simulate_lifetimes,
)
from .pipeline import FitResult, curve_export, fit_system, fit_system_only
from .rbd import (
    Diagnostic,
    RbdNode,
    SystemSpec,
    format_rbd,
    load_system_source,
    parse_rbd,
    rbd_from_json,
    validate_bindings,
)

__version__ = "0.1.0"

__all__ = [
    "BetaShape",
    "BetaStacyProcess",
    "BindingError",
    "CountingSummary",
    "CurveExport",
    "DEFAULT_PRECISION_CAP",
    "DataFormatError",
    "Dataset",
    "Diagnostic",
    "DiscreteCdf",
    "FitResult",
    "LifetimeSample",
    "MomentCurve",
    "NotEstimableError",
    "PathStats",
    "PrecisionRecoveryWarning",
    "RbdError",
    "RbdNode",
    "RbdSyntaxError",
    "RelfuseError",
    "StructuralLifetime",
    "SystemSpec",
    "WeibullLifetime",
    "align_grids",
    "beta_match",
    "combine_parallel",
    "combine_series",
    "counting_summary",
    "credible_interval",
    "curve_export",
    "dp_prior",
    "exact_three_beta_product_pdf",
    "export_curves",
    "fit_system",
    "fit_system_only",
    "format_rbd",
    "fuse_to_prior",
    "kaplan_meier",
    "load_lifetimes",
    "load_prior_spec",
    "load_system_source",
    "mean",
    "merge_priors",
    "moments_of",
    "parse_rbd",
    "posterior_update",
    "rbd_from_json",
    "recover_precision",
    "reduce_rbd",
    "save_lifetimes",
    "second_moment",
    "simulate_bsp_paths",
    "simulate_lifetimes",
    "validate_bindings",
    "__version__",
]
