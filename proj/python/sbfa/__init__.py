"""Sequential Bayesian factor analysis: IBIS and IBIS-LVM engines."""

try:
    from ._sbfa import *  # noqa: F401,F403  (installed layout)
    from ._sbfa import __version__  # noqa: F401
except ImportError:  # in-tree build: extension on PYTHONPATH next to the package
    from _sbfa import *  # noqa: F401,F403
    from _sbfa import __version__  # noqa: F401

__all__ = [
    "ConfigError",
    "ContractViolation",
    "DataError",
    "DegeneratePopulation",
    "ModelSpec",
    "TuningFailure",
    "__version__",
    "ess",
    "fisher_information",
    "inv_gamma_logpdf",
    "laplace_proposal",
    "lkj_logpdf",
    "log_sum_exp",
    "mvn_logpdf",
    "preset_spec",
    "run_ibis",
    "simulate",
]
