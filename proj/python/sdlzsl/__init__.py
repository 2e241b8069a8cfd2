"""Zero-shot multi-label tag ranking: scoring, losses and metrics.

The heavy lifting lives in the compiled `_core` module; this package
re-exports its surface.
"""

from ._core import (
    NumericError,
    ValidationError,
    average_precision,
    final_loss,
    gradcheck,
    lambda_tilde,
    one_cycle_lr,
    rank_loss,
    reg_loss,
    score,
    sdw,
    sigmoid,
    softplus,
)

__all__ = [
    "NumericError",
    "ValidationError",
    "average_precision",
    "final_loss",
    "gradcheck",
    "lambda_tilde",
    "one_cycle_lr",
    "rank_loss",
    "reg_loss",
    "score",
    "sdw",
    "sigmoid",
    "softplus",
]
