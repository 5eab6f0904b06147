import logging
import math
from collections import Counter
from enum import Enum
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from ..core.errors import SampleTooSmallError
from ..models.results import TestOutcome
from .distributions import chi_square_sf, kolmogorov_sf

logger = logging.getLogger(__name__)

MODULE = "digit-forensics"
N_DIGITS = 10


class DigitPosition(str, Enum):
    LAST = "last"
    SECOND_TO_LAST = "second-to-last"


class DigitSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    digits: Tuple[int, ...]
    source_position: DigitPosition

    @field_validator("digits")
    @classmethod
    def _decimal_digits(cls, digits):
        if not digits:
            raise ValueError("digit sample is empty")
        if any(not 0 <= d <= 9 for d in digits):
            raise ValueError("digits must lie in 0..9")
        return tuple(digits)

    @property
    def size(self) -> int:
        return len(self.digits)


def extract_digits(values: Sequence[int], position: DigitPosition = DigitPosition.LAST) -> DigitSample:
    """Pick the last or second-to-last decimal digit of each count."""
    position = DigitPosition(position)
    if not values:
        raise SampleTooSmallError("no values to extract digits from", module=MODULE)
    digits = []
    for value in values:
        if value < 0:
            raise SampleTooSmallError(f"value {value} is negative", module=MODULE)
        if position is DigitPosition.LAST:
            digits.append(value % 10)
        else:
            if value < 10:
                raise SampleTooSmallError(
                    f"value {value} has no second-to-last digit", module=MODULE
                )
            digits.append((value // 10) % 10)
    return DigitSample(digits=tuple(digits), source_position=position)


def digit_histogram(s: DigitSample) -> List[int]:
    tally = Counter(s.digits)
    return [tally.get(k, 0) for k in range(N_DIGITS)]


def chi_square_uniform(counts: Sequence[int]) -> TestOutcome:
    """Pearson goodness-of-fit against equal digit frequencies (df = 9, no Yates)."""
    if len(counts) != N_DIGITS:
        raise SampleTooSmallError(f"expected {N_DIGITS} digit counts, got {len(counts)}", module=MODULE)
    n = sum(counts)
    if n < N_DIGITS:
        raise SampleTooSmallError(
            f"chi-square needs at least {N_DIGITS} digits (expected count >= 1), got {n}",
            module=MODULE,
        )
    expected = n / N_DIGITS
    statistic = math.fsum((o - expected) ** 2 for o in counts) / expected
    df = N_DIGITS - 1
    return TestOutcome(
        test_name="chi-square uniform digits",
        statistic=statistic,
        df=df,
        p_value=chi_square_sf(statistic, df),
    )


def ks_uniform_digits(s: DigitSample) -> TestOutcome:
    """
    One-sample KS of the digit ECDF against the discrete uniform CDF (k+1)/10.

    The continuous-case asymptotic p-value is conservative for discrete data.
    """
    n = s.size
    if n < 5:
        raise SampleTooSmallError(f"KS needs at least 5 digits, got {n}", module=MODULE)
    counts = digit_histogram(s)
    cumulative = 0
    d_max = 0.0
    for k, c in enumerate(counts):
        cumulative += c
        d_max = max(d_max, abs(cumulative / n - (k + 1) / N_DIGITS))
    return TestOutcome(
        test_name="kolmogorov-smirnov uniform digits",
        statistic=d_max,
        p_value=kolmogorov_sf(math.sqrt(n) * d_max),
    )


def digit_battery(values: Sequence[int], position: DigitPosition = DigitPosition.LAST) -> List[TestOutcome]:
    """Run both uniformity tests on the digits of `values`."""
    sample = extract_digits(values, position)
    counts = digit_histogram(sample)
    logger.info("Digit histogram (%s position, n=%d): %s", sample.source_position.value, sample.size, counts)
    return [chi_square_uniform(counts), ks_uniform_digits(sample)]
