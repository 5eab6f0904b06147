"""Random-sort sampling null model.

A pooled population of categorized cells is rebuilt from the reported data,
then slides are drawn from it exactly as "randomly sort the population and
score the first n cells". Each slide gets its own generator, derived from
(seed, replicate, point index, slide index), so serial and threaded runs
produce the same numbers.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..core.errors import DegenerateSampleError, InvalidConfigError
from ..models.dataset import CATEGORIES, CalibrationScale, CategoryCounts, Dataset, DuplicatePoint
from ..models.results import (
    CategoryPoint,
    CategoryVariance,
    Fig1Row,
    PopulationSpec,
    SamplingMode,
    SimulationComparison,
    SimulationConfig,
    TestOutcome,
)
from .dataset_loader import require_valid
from .dispersion import inter_assay_cv, intra_assay_cv, permutation_variance_test, variance_ratio_test, welch_t_test
from .tail_factor import dataset_tail_factors, grand_mean

logger = logging.getLogger(__name__)

MIN_POPULATION = 1000
VARIANCE_TESTS = ("f-test", "permutation")
# Stream key used for permutation tests; point indices never reach it.
PERMUTATION_STREAM = 2**32 - 1


def slide_stream(seed: int, replicate: int, point_index: int, slide_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([seed, replicate, point_index, slide_index])
    ))


def largest_remainder(counts: Sequence[int], target: int) -> List[int]:
    """Scale integer counts to sum to `target`, ties going to the earlier category."""
    total = sum(counts)
    quotients = [c * target // total for c in counts]
    remainders = [c * target % total for c in counts]
    shortfall = target - sum(quotients)
    order = sorted(range(len(counts)), key=lambda i: (-remainders[i], i))
    for i in order[:shortfall]:
        quotients[i] += 1
    return quotients


def build_population(d: Dataset, target_size: int = 10_000) -> PopulationSpec:
    if not d.points:
        raise InvalidConfigError("cannot build a population from an empty dataset")
    require_valid(d)
    if target_size < MIN_POPULATION:
        raise InvalidConfigError(f"population size must be at least {MIN_POPULATION}, got {target_size}")
    pooled = [sum(column) for column in (d.column(c) for c in CATEGORIES)]
    counts = largest_remainder(pooled, target_size)
    logger.info("Pooled counts %s rescaled to population %s (N=%d)", pooled, counts, target_size)
    return PopulationSpec(counts=tuple(counts), size=target_size)


def draw_slide(
    pop: PopulationSpec,
    n: int,
    rng: np.random.Generator,
    sampling: SamplingMode = SamplingMode.WITHOUT_REPLACEMENT,
) -> CategoryCounts:
    """Score n cells of a randomly sorted population (or n independent cells with replacement)."""
    if SamplingMode(sampling) is SamplingMode.WITHOUT_REPLACEMENT:
        if n > pop.size:
            raise InvalidConfigError(f"cannot draw {n} cells from a population of {pop.size}")
        drawn = rng.multivariate_hypergeometric(list(pop.counts), n)
    else:
        probs = np.asarray(pop.counts, dtype=float) / pop.size
        drawn = rng.multinomial(n, probs)
    return CategoryCounts.from_counts(int(c) for c in drawn)


def _check_config(pop: PopulationSpec, cfg: SimulationConfig) -> None:
    if cfg.sampling is SamplingMode.WITHOUT_REPLACEMENT and cfg.cells_per_slide > pop.size:
        raise InvalidConfigError(
            f"cells_per_slide {cfg.cells_per_slide} exceeds population size {pop.size}"
        )


def simulate_dataset(
    pop: PopulationSpec,
    cfg: SimulationConfig,
    replicate: int = 0,
    scale: Optional[CalibrationScale] = None,
) -> Dataset:
    _check_config(pop, cfg)
    points = []
    for i in range(cfg.n_points):
        slides = [
            draw_slide(pop, cfg.cells_per_slide, slide_stream(cfg.seed, replicate, i, s), cfg.sampling)
            for s in range(2)
        ]
        points.append(DuplicatePoint(label=f"simulated {i + 1}", slide_a=slides[0], slide_b=slides[1]))
    return Dataset(points=tuple(points), scale=scale or CalibrationScale())


@dataclass
class _ReplicateResult:
    dataset: Dataset
    intra_cv: float
    inter_cv: Optional[float]
    tf_mean: float
    variance_tests: List[TestOutcome]
    mean_tests: List[TestOutcome]
    variances: List[float]
    means: List[float]


def _guarded(test: Callable[[], TestOutcome], name: str) -> TestOutcome:
    try:
        return test()
    except DegenerateSampleError:
        return TestOutcome(test_name=f"{name} (degenerate)", statistic=1.0, p_value=1.0)


def _median_outcome(outcomes: Sequence[TestOutcome]) -> TestOutcome:
    def median(values):
        values = [v for v in values if v is not None]
        return float(np.median(values)) if values else None

    return TestOutcome(
        test_name=outcomes[0].test_name,
        statistic=median([o.statistic for o in outcomes]),
        df=median([o.df for o in outcomes]),
        df_denominator=median([o.df_denominator for o in outcomes]),
        p_value=median([o.p_value for o in outcomes]),
    )


def simulation_battery(
    real: Dataset,
    cfg: SimulationConfig,
    population: Optional[PopulationSpec] = None,
    variance_test: str = "f-test",
    permutation_rounds: int = 2000,
    max_workers: int = 1,
) -> SimulationComparison:
    """
    Compare reported data with `cfg.replicates` simulated datasets.

    Scalar results and per-category tests are aggregated by their median over
    replicates; plot series use the first replicate.
    """
    if variance_test not in VARIANCE_TESTS:
        raise InvalidConfigError(f"variance test must be one of {', '.join(VARIANCE_TESTS)}, got {variance_test!r}")
    require_valid(real)
    if real.slide_total != cfg.cells_per_slide:
        raise InvalidConfigError(
            f"reported slides have {real.slide_total} cells, simulation uses {cfg.cells_per_slide}"
        )
    if len(real.points) != cfg.n_points:
        raise InvalidConfigError(
            f"reported data has {len(real.points)} points, simulation uses {cfg.n_points}"
        )
    pop = population or build_population(real, cfg.population_size)
    _check_config(pop, cfg)

    real_summaries = dataset_tail_factors(real)
    real_columns = [np.asarray(real.column(c), dtype=float) for c in CATEGORIES]

    def run_replicate(r: int) -> _ReplicateResult:
        sim = simulate_dataset(pop, cfg, replicate=r, scale=real.scale)
        summaries = dataset_tail_factors(sim)
        variance_tests, mean_tests, variances, means = [], [], [], []
        for k, category in enumerate(CATEGORIES):
            sim_column = np.asarray(sim.column(category), dtype=float)
            real_column = real_columns[k]
            if variance_test == "permutation":
                stream = slide_stream(cfg.seed, r, PERMUTATION_STREAM, k)
                variance_tests.append(_guarded(
                    lambda: permutation_variance_test(real_column, sim_column, stream, permutation_rounds),
                    "permutation variance ratio",
                ))
            else:
                variance_tests.append(_guarded(
                    lambda: variance_ratio_test(real_column, sim_column), "f-test variance ratio"
                ))
            mean_tests.append(_guarded(lambda: welch_t_test(real_column, sim_column), "welch t-test"))
            variances.append(float(np.var(sim_column, ddof=1)))
            means.append(float(sim_column.mean()))
        logger.debug("Replicate %d: variances %s", r, variances)
        return _ReplicateResult(
            dataset=sim,
            intra_cv=intra_assay_cv(summaries),
            inter_cv=inter_assay_cv(summaries) if len(summaries) >= 2 else None,
            tf_mean=grand_mean(summaries),
            variance_tests=variance_tests,
            mean_tests=mean_tests,
            variances=variances,
            means=means,
        )

    logger.info(
        "Simulating %d replicates of %d points x 2 slides x %d cells (seed %d, %s)",
        cfg.replicates, cfg.n_points, cfg.cells_per_slide, cfg.seed, cfg.sampling.value,
    )
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_replicate, range(cfg.replicates)))
    else:
        results = [run_replicate(r) for r in range(cfg.replicates)]

    first = results[0]
    first_summaries = dataset_tail_factors(first.dataset)
    fig1 = [
        Fig1Row(
            point_index=i,
            reported_tf_a=rep.tf_a,
            reported_tf_b=rep.tf_b,
            simulated_tf_a=sim.tf_a,
            simulated_tf_b=sim.tf_b,
            reported_mean=rep.mean,
            simulated_mean=sim.mean,
        )
        for i, (rep, sim) in enumerate(zip(real_summaries, first_summaries))
    ]

    reported_variances = [float(np.var(col, ddof=1)) for col in real_columns]
    simulated_variances = [float(np.median([res.variances[k] for res in results])) for k in range(len(CATEGORIES))]
    simulated_means = [float(np.median([res.means[k] for res in results])) for k in range(len(CATEGORIES))]

    fig2 = []
    fig2_points = []
    for k, category in enumerate(CATEGORIES):
        fig2.append(CategoryVariance(
            category=category, source="reported",
            variance=reported_variances[k], mean=float(real_columns[k].mean()),
        ))
        fig2.append(CategoryVariance(
            category=category, source="simulated",
            variance=simulated_variances[k], mean=simulated_means[k],
        ))
        for source, counts in (("reported", real.column(category)), ("simulated", first.dataset.column(category))):
            fig2_points.extend(
                CategoryPoint(category=category, source=source, slide_index=j, count=c)
                for j, c in enumerate(counts)
            )

    inter_values = [res.inter_cv for res in results if res.inter_cv is not None]
    return SimulationComparison(
        sim_intra_cv=float(np.median([res.intra_cv for res in results])),
        sim_inter_cv=float(np.median(inter_values)) if inter_values else None,
        sim_tf_mean=float(np.median([res.tf_mean for res in results])),
        per_category_variance_tests=[
            _median_outcome([res.variance_tests[k] for res in results]) for k in range(len(CATEGORIES))
        ],
        per_category_mean_tests=[
            _median_outcome([res.mean_tests[k] for res in results]) for k in range(len(CATEGORIES))
        ],
        reported_variances=reported_variances,
        simulated_variances=simulated_variances,
        fig1_data=fig1,
        fig2_data=fig2,
        fig2_points=fig2_points,
        population=pop,
    )
