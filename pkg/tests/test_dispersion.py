import itertools
import math

import numpy as np
import pytest
from scipy import stats

from app.core.errors import DegenerateSampleError, InvalidProbabilityError, SampleTooSmallError
from app.models.dataset import CATEGORIES, CalibrationScale
from app.models.results import MomentBasis
from app.services.dispersion import (
    category_probabilities,
    dispersion_summary,
    inter_assay_cv,
    intra_assay_cv,
    multinomial_tf_moments,
    permutation_variance_test,
    sd_ratio,
    variance_ratio_test,
    welch_t_test,
)
from app.services.tail_factor import dataset_tail_factors, duplicate_summary

SCALE = CalibrationScale()
SHAM_PROBS = (0.8992, 0.0776, 0.0202, 0.0018, 0.0012)
WEIGHTS = np.array(SCALE.weights)


def test_intra_cv_of_two_pairs():
    pairs = [duplicate_summary("a", 4.92, 5.12), duplicate_summary("b", 4.0, 4.0)]
    assert intra_assay_cv(pairs) == pytest.approx(0.01409, abs=1e-5)


def test_intra_cv_zero_spread():
    assert intra_assay_cv([duplicate_summary(str(i), 4.0, 4.0) for i in range(3)]) == 0


def test_intra_cv_empty():
    with pytest.raises(SampleTooSmallError):
        intra_assay_cv([])


def test_inter_cv_of_two_pairs():
    pairs = [duplicate_summary("a", 4.92, 5.12), duplicate_summary("b", 4.0, 4.0)]
    assert inter_assay_cv(pairs) == pytest.approx(0.1599, abs=1e-4)


def test_inter_cv_constant_means():
    pairs = [duplicate_summary("a", 4.0, 4.2), duplicate_summary("b", 4.2, 4.0)]
    assert inter_assay_cv(pairs) == pytest.approx(0.0, abs=1e-15)


def test_inter_cv_needs_two_pairs():
    with pytest.raises(SampleTooSmallError):
        inter_assay_cv([duplicate_summary("a", 4.0, 4.2)])


def test_sham_fixture_cvs(sham_dataset):
    summary = dispersion_summary(dataset_tail_factors(sham_dataset))
    assert summary.n_pairs == 12
    assert summary.intra_cv == pytest.approx(0.021, abs=1e-3)
    assert summary.inter_cv == pytest.approx(0.013, abs=1e-3)
    assert summary.inter_cv < summary.intra_cv


def test_single_pair_summary_has_no_inter_cv():
    summary = dispersion_summary([duplicate_summary("a", 4.0, 4.2)])
    assert summary.inter_cv is None


def test_multinomial_moments_sham_probabilities():
    m = multinomial_tf_moments(SHAM_PROBS, SCALE, 500)
    assert m.mean == pytest.approx(4.0625, abs=1e-12)
    assert m.sd == pytest.approx(0.2794, abs=1e-4)
    assert m.basis is MomentBasis.MULTINOMIAL


def test_multinomial_sd_against_monte_carlo():
    rng = np.random.default_rng(7)
    draws = rng.multinomial(500, SHAM_PROBS, size=1_000_000)
    tf = draws @ WEIGHTS / 500
    m = multinomial_tf_moments(SHAM_PROBS, SCALE, 500)
    centred_sq = (tf - tf.mean()) ** 2
    se_sd = centred_sq.std() / math.sqrt(tf.size) / (2 * tf.std())
    assert abs(tf.std(ddof=1) - m.sd) <= 3 * se_sd
    assert abs(tf.mean() - m.mean) <= 3 * tf.std() / math.sqrt(tf.size)


def test_degenerate_distribution():
    m = multinomial_tf_moments((1, 0, 0, 0, 0), SCALE, 500)
    assert m.mean == 2.5
    assert m.sd == 0


def test_hypergeometric_correction():
    multinomial = multinomial_tf_moments(SHAM_PROBS, SCALE, 500)
    hyper = multinomial_tf_moments(SHAM_PROBS, SCALE, 500, basis="hypergeometric", population_size=10_000)
    assert hyper.sd == pytest.approx(0.2723, abs=1e-4)
    assert hyper.sd / multinomial.sd == pytest.approx(math.sqrt(9500 / 9999), rel=1e-12)
    assert hyper.sd < multinomial.sd


def test_hypergeometric_against_monte_carlo():
    rng = np.random.default_rng(11)
    draws = rng.multivariate_hypergeometric([8992, 776, 202, 18, 12], 500, size=100_000)
    tf = draws @ WEIGHTS / 500
    hyper = multinomial_tf_moments(SHAM_PROBS, SCALE, 500, basis="hypergeometric", population_size=10_000)
    se_sd = ((tf - tf.mean()) ** 2).std() / math.sqrt(tf.size) / (2 * tf.std())
    assert abs(tf.std(ddof=1) - hyper.sd) <= 3 * se_sd


@pytest.mark.parametrize("probs", [(0.5, 0.5, 0.1, 0, 0), (1.2, -0.2, 0, 0, 0), (0.5, 0.5)])
def test_invalid_probabilities(probs):
    with pytest.raises(InvalidProbabilityError):
        multinomial_tf_moments(probs, SCALE, 500)


def test_hypergeometric_needs_population():
    with pytest.raises(InvalidProbabilityError):
        multinomial_tf_moments(SHAM_PROBS, SCALE, 500, basis="hypergeometric")
    with pytest.raises(InvalidProbabilityError):
        multinomial_tf_moments(SHAM_PROBS, SCALE, 500, basis="hypergeometric", population_size=400)


def test_variance_ratio_identical_samples():
    sample = [449, 452, 447, 450, 451, 446]
    outcome = variance_ratio_test(sample, sample)
    assert outcome.statistic == pytest.approx(1.0)
    assert outcome.p_value == pytest.approx(1.0)


def test_variance_ratio_four_to_one():
    y = np.array([-1.5, -1.2, -0.9, -0.5, -0.2, 0.0, 0.1, 0.3, 0.6, 0.8, 1.1, 1.4])
    y = (y - y.mean()) / y.std(ddof=1)
    x = 2 * y
    outcome = variance_ratio_test(x, y)
    assert outcome.statistic == pytest.approx(4.0, rel=1e-12)
    assert (outcome.df, outcome.df_denominator) == (11, 11)
    assert outcome.p_value == pytest.approx(2 * stats.f.sf(4.0, 11, 11), abs=1e-9)


def test_variance_ratio_is_symmetric():
    x = [449, 452, 447, 450, 451, 446, 448]
    y = [440, 460, 452, 431, 470, 445, 455, 449]
    forward = variance_ratio_test(x, y)
    backward = variance_ratio_test(y, x)
    assert forward.p_value == backward.p_value
    assert forward.df == backward.df == 7
    assert forward.df_denominator == 6


def test_variance_ratio_against_zero_variance():
    outcome = variance_ratio_test([5, 5, 5, 5], [4, 6, 5, 7])
    assert math.isinf(outcome.statistic)
    assert outcome.p_value == 0.0


def test_variance_ratio_degenerate():
    with pytest.raises(DegenerateSampleError):
        variance_ratio_test([1, 1, 1], [2, 2, 2])
    with pytest.raises(SampleTooSmallError):
        variance_ratio_test([1], [2, 3])


def test_sham_category_a_variance_far_below_simulated(sham_dataset, sham_population):
    rng = np.random.default_rng(3)
    simulated = rng.multivariate_hypergeometric(list(sham_population.counts), 500, size=24)[:, 0]
    outcome = variance_ratio_test(sham_dataset.column("A"), simulated)
    assert outcome.p_value < 0.001


def test_permutation_variance_test():
    rng = np.random.default_rng(5)
    base = np.arange(24, dtype=float)
    wide = permutation_variance_test(10 * base, base, rng, rounds=500)
    assert wide.p_value == pytest.approx(1 / 501)
    same = permutation_variance_test(base, base[::-1] + 5, rng, rounds=500)
    assert same.p_value == 1.0


def test_welch_identical_samples():
    outcome = welch_t_test([1, 2, 3, 4], [1, 2, 3, 4])
    assert outcome.statistic == 0
    assert outcome.p_value == pytest.approx(1.0)


def test_welch_matches_scipy():
    x, y = [1, 2, 3], [1, 2, 3, 4, 5, 6]
    outcome = welch_t_test(x, y)
    oracle = stats.ttest_ind(x, y, equal_var=False)
    assert outcome.statistic == pytest.approx(oracle.statistic, rel=1e-12)
    assert outcome.p_value == pytest.approx(oracle.pvalue, abs=1e-10)
    assert outcome.df == pytest.approx(6.798, abs=1e-3)


def test_welch_agrees_with_exhaustive_permutation():
    x, y = [1, 2, 3], [1, 2, 3, 4, 5, 6]
    pooled = x + y
    observed = abs(welch_t_test(x, y).statistic)
    extreme = total = 0
    for chosen in itertools.combinations(range(len(pooled)), len(x)):
        rest = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        picked = [pooled[i] for i in chosen]
        try:
            t = abs(welch_t_test(picked, rest).statistic)
        except DegenerateSampleError:
            t = 0.0
        total += 1
        extreme += t >= observed - 1e-12
    permutation_p = extreme / total
    assert total == 84
    assert permutation_p > 0.05
    assert welch_t_test(x, y).p_value > 0.05


def test_welch_constant_samples():
    with pytest.raises(DegenerateSampleError):
        welch_t_test([3, 3, 3], [3, 3])
    outcome = welch_t_test([3, 3, 3], [4, 4])
    assert outcome.statistic == -math.inf
    assert outcome.p_value == 0.0


def test_sd_ratio(sham_dataset):
    summaries = dataset_tail_factors(sham_dataset)
    probs = category_probabilities([sham_dataset.column(c) for c in CATEGORIES])
    moments = multinomial_tf_moments(probs, sham_dataset.scale, 500)
    assert sd_ratio(moments, summaries) == pytest.approx(3.3, abs=0.05)
    assert sd_ratio(moments, [duplicate_summary("x", 4.0, 4.0)]) is None


def test_category_probabilities(sham_dataset):
    probs = category_probabilities([sham_dataset.column(c) for c in CATEGORIES])
    assert sum(probs) == pytest.approx(1.0)
    assert probs[0] == pytest.approx(10790 / 12000)
