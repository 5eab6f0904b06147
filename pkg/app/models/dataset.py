from enum import Enum
from typing import Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

CATEGORIES: Tuple[str, ...] = ("A", "B", "C", "D", "E")


class CalibrationScale(BaseModel):
    """Damage factor per category A-E (Number * Factor in the tail factor sum)."""

    model_config = ConfigDict(frozen=True)

    weights: Tuple[float, float, float, float, float] = (2.5, 12.5, 30.0, 67.5, 97.5)

    @field_validator("weights")
    @classmethod
    def _increasing_and_positive(cls, weights):
        if any(w <= 0 for w in weights):
            raise ValueError("calibration weights must be positive")
        if any(b <= a for a, b in zip(weights, weights[1:])):
            raise ValueError("calibration weights must be strictly increasing")
        return weights

    @classmethod
    def parse(cls, text: str) -> "CalibrationScale":
        """Build a scale from '2.5,12.5,30,67.5,97.5'."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) != len(CATEGORIES):
            raise ValueError(f"scale needs {len(CATEGORIES)} weights, got {len(parts)}")
        return cls(weights=tuple(float(p) for p in parts))


class CategoryCounts(BaseModel):
    """Cell counts of one slide. Invariants are checked by validate_dataset."""

    model_config = ConfigDict(frozen=True)

    counts: Tuple[int, int, int, int, int]
    total: int

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "CategoryCounts":
        counts = tuple(int(c) for c in counts)
        return cls(counts=counts, total=sum(counts))

    def count(self, category: str) -> int:
        return self.counts[CATEGORIES.index(category)]


class DuplicatePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    slide_a: CategoryCounts
    slide_b: CategoryCounts

    @property
    def slides(self) -> Tuple[CategoryCounts, CategoryCounts]:
        return (self.slide_a, self.slide_b)


class Dataset(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: Tuple[DuplicatePoint, ...]
    scale: CalibrationScale = CalibrationScale()

    def slides(self) -> Tuple[CategoryCounts, ...]:
        """All slides in file order (a then b for every point)."""
        return tuple(slide for point in self.points for slide in point.slides)

    def column(self, category: str) -> Tuple[int, ...]:
        return tuple(slide.count(category) for slide in self.slides())

    @property
    def slide_total(self) -> int:
        return self.points[0].slide_a.total


class IssueKind(str, Enum):
    SUM_MISMATCH = "sum-mismatch"
    NEGATIVE_COUNT = "negative-count"
    TOTAL_MISMATCH = "total-mismatch"
    EMPTY = "empty"


class ValidationIssue(BaseModel):
    model_config = ConfigDict(frozen=True)

    point_index: int
    kind: IssueKind
    message: str
