"""Random restricted integer partitions: exact counts, exact samplers,
asymptotic constants and limit-law verification."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .counting import (
    CountCache,
    Partition,
    count_at_most,
    count_bounded,
    count_with_largest,
    erdos_lehner_log_estimate,
    hr_log_upper_bound,
)

BUILD_ID = f"partition-lab {__version__} ({BACKEND})"
