"""State-space variational inference experiments.

Thin wrapper around the compiled extension module.
"""

try:
    from _ssmvb import (  # noqa: F401
        __version__,
        simulate,
        mcmc_fit,
        vb_fit,
        fit_predict,
        score,
        optimal_lambda,
        limit_criterion,
        find_theta_star,
        tridiag_det,
        jensen_case1_limit,
        jensen_case2_limit,
    )
except ImportError as exc:  # pragma: no cover
    raise ImportError(
        "the compiled _ssmvb extension is not on the path; build the project "
        "(cmake) or install the package (pip install .)"
    ) from exc

__all__ = [
    "__version__",
    "simulate",
    "mcmc_fit",
    "vb_fit",
    "fit_predict",
    "score",
    "optimal_lambda",
    "limit_criterion",
    "find_theta_star",
    "tridiag_det",
    "jensen_case1_limit",
    "jensen_case2_limit",
]
