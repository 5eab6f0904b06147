import math
from typing import List

from ..core.errors import ForensicsError
from ..models.dataset import CalibrationScale, CategoryCounts, Dataset
from ..models.results import DuplicateSummary
from .dataset_loader import require_valid


def tail_factor(c: CategoryCounts, s: CalibrationScale) -> float:
    """Weighted damage score: sum(count * factor) / cells scored."""
    return math.fsum(n * w for n, w in zip(c.counts, s.weights)) / c.total


def duplicate_summary(label: str, tf_a: float, tf_b: float) -> DuplicateSummary:
    """
    Summarize two replicate tail factors.

    With two values the n-1 sample SD reduces to |a - b| / sqrt(2).
    """
    if tf_a <= 0 or tf_b <= 0:
        raise ForensicsError(
            f"tail factors must be positive, got {tf_a} and {tf_b}", module="tail-factor"
        )
    mean = (tf_a + tf_b) / 2
    sd = abs(tf_a - tf_b) / math.sqrt(2)
    return DuplicateSummary(label=label, tf_a=tf_a, tf_b=tf_b, mean=mean, sd=sd, cv=sd / mean)


def dataset_tail_factors(d: Dataset) -> List[DuplicateSummary]:
    require_valid(d)
    return [
        duplicate_summary(
            point.label,
            tail_factor(point.slide_a, d.scale),
            tail_factor(point.slide_b, d.scale),
        )
        for point in d.points
    ]


def grand_mean(summaries: List[DuplicateSummary]) -> float:
    return math.fsum(s.mean for s in summaries) / len(summaries)
