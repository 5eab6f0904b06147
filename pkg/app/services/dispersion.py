import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from ..core.errors import DegenerateSampleError, InvalidProbabilityError, SampleTooSmallError
from ..models.dataset import CalibrationScale
from ..models.results import DispersionSummary, DuplicateSummary, MomentBasis, MomentEstimate, TestOutcome
from .distributions import f_cdf, f_sf, t_two_sided_p

logger = logging.getLogger(__name__)

MODULE = "dispersion-forensics"


def intra_assay_cv(summaries: Sequence[DuplicateSummary]) -> float:
    """Mean of the per-pair coefficients of variation."""
    if not summaries:
        raise SampleTooSmallError("intra-assay CV needs at least one pair", module=MODULE)
    return math.fsum(s.cv for s in summaries) / len(summaries)


def inter_assay_cv(summaries: Sequence[DuplicateSummary]) -> float:
    """CV of the pair means: sample SD of means over their grand mean."""
    if len(summaries) < 2:
        raise SampleTooSmallError("inter-assay CV needs at least two pairs", module=MODULE)
    means = np.array([s.mean for s in summaries], dtype=float)
    return float(np.std(means, ddof=1) / np.mean(means))


def dispersion_summary(summaries: Sequence[DuplicateSummary]) -> DispersionSummary:
    inter = inter_assay_cv(summaries) if len(summaries) >= 2 else None
    return DispersionSummary(intra_cv=intra_assay_cv(summaries), inter_cv=inter, n_pairs=len(summaries))


def multinomial_tf_moments(
    probs: Sequence[float],
    scale: CalibrationScale,
    n: int,
    basis: MomentBasis = MomentBasis.MULTINOMIAL,
    population_size: Optional[int] = None,
) -> MomentEstimate:
    """
    Mean and SD of the tail factor of an n-cell slide with category probabilities `probs`.

    Var(TF) = (E[w^2] - E[w]^2) / n; the hypergeometric basis applies the
    finite-population factor (N - n) / (N - 1).
    """
    basis = MomentBasis(basis)
    p = np.asarray(probs, dtype=float)
    if p.shape != (len(scale.weights),):
        raise InvalidProbabilityError(f"expected {len(scale.weights)} probabilities, got {p.size}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidProbabilityError(f"probabilities must be non-negative and sum to 1, got {p.tolist()}")
    if n < 1:
        raise InvalidProbabilityError(f"cells per slide must be at least 1, got {n}")

    w = np.asarray(scale.weights, dtype=float)
    mean = float(np.dot(w, p))
    variance = max(0.0, float(np.dot(w * w, p)) - mean * mean) / n

    if basis is MomentBasis.HYPERGEOMETRIC:
        if population_size is None or population_size < n or population_size < 2:
            raise InvalidProbabilityError(
                f"hypergeometric basis needs population_size >= n ({n}), got {population_size}"
            )
        variance *= (population_size - n) / (population_size - 1)

    return MomentEstimate(mean=mean, sd=math.sqrt(variance), basis=basis)


def _checked_variances(sample_x: Sequence[float], sample_y: Sequence[float]):
    x = np.asarray(sample_x, dtype=float)
    y = np.asarray(sample_y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise SampleTooSmallError("variance comparison needs at least two values per sample", module=MODULE)
    return x, y, float(np.var(x, ddof=1)), float(np.var(y, ddof=1))


def variance_ratio_test(sample_x: Sequence[float], sample_y: Sequence[float]) -> TestOutcome:
    """Two-sided F-test, larger sample variance over smaller."""
    x, y, var_x, var_y = _checked_variances(sample_x, sample_y)
    if var_x == 0 and var_y == 0:
        raise DegenerateSampleError("both samples have zero variance", module=MODULE)

    if var_x >= var_y:
        big, small, d1, d2 = var_x, var_y, x.size - 1, y.size - 1
    else:
        big, small, d1, d2 = var_y, var_x, y.size - 1, x.size - 1

    statistic = math.inf if small == 0 else big / small
    upper = f_sf(statistic, d1, d2)
    lower = f_cdf(statistic, d1, d2)
    p_value = min(1.0, max(0.0, 2.0 * min(upper, lower)))
    return TestOutcome(
        test_name="f-test variance ratio",
        statistic=statistic,
        df=d1,
        df_denominator=d2,
        p_value=p_value,
    )


def permutation_variance_test(
    sample_x: Sequence[float],
    sample_y: Sequence[float],
    rng: np.random.Generator,
    rounds: int = 2000,
) -> TestOutcome:
    """
    Two-sided permutation test on |log(var_x / var_y)|.

    Samples are centred on their own means first so a location difference
    does not masquerade as a variance difference.
    """
    x, y, var_x, var_y = _checked_variances(sample_x, sample_y)
    if var_x == 0 and var_y == 0:
        raise DegenerateSampleError("both samples have zero variance", module=MODULE)

    def log_ratio(a: np.ndarray, b: np.ndarray) -> float:
        va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
        if va == 0 or vb == 0:
            return math.inf if va != vb else 0.0
        return abs(math.log(va / vb))

    pooled = np.concatenate([x - x.mean(), y - y.mean()])
    observed = log_ratio(pooled[: x.size], pooled[x.size:])
    hits = 0
    for _ in range(rounds):
        shuffled = rng.permutation(pooled)
        if log_ratio(shuffled[: x.size], shuffled[x.size:]) >= observed:
            hits += 1
    statistic = max(var_x, var_y) / min(var_x, var_y) if min(var_x, var_y) > 0 else math.inf
    return TestOutcome(
        test_name="permutation variance ratio",
        statistic=statistic,
        p_value=(hits + 1) / (rounds + 1),
    )


def welch_t_test(sample_x: Sequence[float], sample_y: Sequence[float]) -> TestOutcome:
    """Unequal-variance t-test with Welch-Satterthwaite degrees of freedom."""
    x, y, var_x, var_y = _checked_variances(sample_x, sample_y)
    se_x, se_y = var_x / x.size, var_y / y.size
    diff = float(x.mean() - y.mean())
    se = se_x + se_y
    if se == 0:
        if diff == 0:
            raise DegenerateSampleError("both samples are constant and equal", module=MODULE)
        return TestOutcome(
            test_name="welch t-test",
            statistic=math.copysign(math.inf, diff),
            df=float(x.size + y.size - 2),
            p_value=0.0,
        )
    statistic = diff / math.sqrt(se)
    df = se * se / (se_x * se_x / (x.size - 1) + se_y * se_y / (y.size - 1))
    return TestOutcome(
        test_name="welch t-test",
        statistic=statistic,
        df=df,
        p_value=t_two_sided_p(statistic, df),
    )


def sd_ratio(theoretical: MomentEstimate, summaries: Sequence[DuplicateSummary]) -> Optional[float]:
    """Theoretical slide SD over the mean observed duplicate SD (None if the data show no spread)."""
    observed = math.fsum(s.sd for s in summaries) / len(summaries)
    if observed == 0:
        return None
    return theoretical.sd / observed


def category_probabilities(columns: List[Sequence[int]]) -> List[float]:
    totals = [sum(col) for col in columns]
    grand = sum(totals)
    return [t / grand for t in totals]
