import logging
import math
from typing import List, Optional

from ..core.config import Settings, settings
from ..core.errors import InvalidConfigError, SampleTooSmallError
from ..models.dataset import CATEGORIES, Dataset
from ..models.results import (
    DispersionSummary,
    FlagId,
    ForensicReport,
    MomentBasis,
    Severity,
    SimulationComparison,
    SimulationConfig,
    TestOutcome,
    Verdict,
)
from .dataset_loader import require_valid
from .digit_forensics import DigitPosition, digit_battery
from .dispersion import category_probabilities, dispersion_summary, multinomial_tf_moments, sd_ratio
from .null_simulator import simulation_battery
from .tail_factor import dataset_tail_factors, grand_mean

logger = logging.getLogger(__name__)

MODULE = "report-cli"


def _digit_verdicts(tests: List[TestOutcome], alpha: float, severe_alpha: float) -> List[Verdict]:
    verdicts = []
    for index, (flag, test) in enumerate(zip((FlagId.DIGIT_CHISQ, FlagId.DIGIT_KS), tests)):
        if test.p_value <= alpha:
            verdicts.append(Verdict(
                flag_id=flag,
                severity=Severity.SEVERE if test.p_value <= severe_alpha else Severity.SUSPICIOUS,
                evidence_pointer=f"/digit_tests/{index}/p_value",
                detail=f"{test.test_name}: p = {test.p_value:.4g}",
            ))
    return verdicts


def _dispersion_verdict(dispersion: DispersionSummary, conf: Settings) -> Optional[Verdict]:
    if dispersion.inter_cv is None or dispersion.inter_cv >= dispersion.intra_cv:
        return None
    ratio = dispersion.inter_cv / dispersion.intra_cv if dispersion.intra_cv else 0.0
    return Verdict(
        flag_id=FlagId.INTER_BELOW_INTRA,
        severity=Severity.SUSPICIOUS if ratio < conf.INTER_INTRA_SUSPICIOUS_RATIO else Severity.NOTE,
        evidence_pointer="/dispersion",
        detail=f"inter-assay CV {dispersion.inter_cv:.4f} < intra-assay CV {dispersion.intra_cv:.4f}",
    )


def _theoretical_verdict(theoretical_cv: float, intra_cv: float, conf: Settings) -> Optional[Verdict]:
    if theoretical_cv <= 0:
        return None
    ratio = math.inf if intra_cv == 0 else theoretical_cv / intra_cv
    if ratio < conf.CV_RATIO_SUSPICIOUS:
        return None
    return Verdict(
        flag_id=FlagId.CV_BELOW_THEORETICAL,
        severity=Severity.SEVERE if ratio >= conf.CV_RATIO_SEVERE else Severity.SUSPICIOUS,
        evidence_pointer="/theoretical_cv",
        detail=f"theoretical CV {theoretical_cv:.4f} is {ratio:.2f}x the intra-assay CV {intra_cv:.4f}",
    )


def _variance_verdict(
    sim: SimulationComparison, alpha: float, severe_alpha: float, conf: Settings
) -> Optional[Verdict]:
    smaller = [
        (CATEGORIES[k], test.p_value)
        for k, test in enumerate(sim.per_category_variance_tests)
        if sim.reported_variances[k] < sim.simulated_variances[k]
    ]
    rejected = [c for c, p in smaller if p <= alpha]
    if len(rejected) < conf.VARIANCE_FLAG_MIN_CATEGORIES:
        return None
    strongly = [c for c, p in smaller if p <= severe_alpha]
    severe = len(strongly) >= conf.VARIANCE_FLAG_MIN_CATEGORIES
    return Verdict(
        flag_id=FlagId.VARIANCE_BELOW_SIMULATED,
        severity=Severity.SEVERE if severe else Severity.SUSPICIOUS,
        evidence_pointer="/simulation/per_category_variance_tests",
        detail=f"reported variance below simulated honest variance for {''.join(rejected)}",
    )


def simulation_config_for(
    d: Dataset,
    seed: Optional[int] = None,
    replicates: Optional[int] = None,
    population_size: Optional[int] = None,
    cells_per_slide: Optional[int] = None,
    sampling: Optional[str] = None,
    config: Optional[Settings] = None,
) -> SimulationConfig:
    """Simulation config for `d`, unset values falling back to settings."""
    conf = config or settings
    return SimulationConfig(
        n_points=len(d.points),
        cells_per_slide=cells_per_slide if cells_per_slide is not None else conf.CELLS_PER_SLIDE,
        seed=seed if seed is not None else conf.DEFAULT_SEED,
        replicates=replicates if replicates is not None else conf.REPLICATES,
        sampling=sampling or conf.SAMPLING,
        population_size=population_size if population_size is not None else conf.POPULATION_SIZE,
    )


def run_battery(
    d: Dataset,
    cfg: SimulationConfig,
    alpha: float,
    digit_column: Optional[str] = None,
    digit_position: Optional[DigitPosition] = None,
    config: Optional[Settings] = None,
) -> ForensicReport:
    """
    Run the full forensic battery and derive red flags.

    Stages: tail factors, terminal-digit tests, CV analysis, theoretical
    moments, null simulation. Stages whose preconditions fail on a small
    dataset are skipped and recorded in `notes`.
    """
    conf = config or settings
    if not 0 < alpha < 1:
        raise InvalidConfigError(f"alpha must lie strictly between 0 and 1, got {alpha}", module=MODULE)
    digit_column = (digit_column or conf.DIGIT_COLUMN).upper()
    if digit_column not in CATEGORIES:
        raise InvalidConfigError(f"unknown digit column {digit_column!r}", module=MODULE)
    digit_position = DigitPosition(digit_position or conf.DIGIT_POSITION)
    severe_alpha = min(conf.SEVERE_ALPHA, alpha)
    notes: List[str] = []

    require_valid(d)
    logger.info("Running battery on %d points (%d cells per slide)", len(d.points), d.slide_total)

    summaries = dataset_tail_factors(d)

    try:
        digit_tests = digit_battery(d.column(digit_column), digit_position)
    except SampleTooSmallError as exc:
        logger.warning("Skipping digit tests: %s", exc)
        notes.append(f"digit tests skipped: {exc.args[0]}")
        digit_tests = []

    dispersion = dispersion_summary(summaries)
    if dispersion.inter_cv is None:
        logger.warning("Skipping inter-assay CV: fewer than two points")
        notes.append("inter-assay CV skipped: fewer than two points")
    logger.info("Intra-assay CV %.4f, inter-assay CV %s", dispersion.intra_cv, dispersion.inter_cv)

    probs = category_probabilities([d.column(c) for c in CATEGORIES])
    basis = MomentBasis(conf.MOMENT_BASIS)
    moments = multinomial_tf_moments(
        probs,
        d.scale,
        d.slide_total,
        basis=basis,
        population_size=cfg.population_size if basis is MomentBasis.HYPERGEOMETRIC else None,
    )
    logger.info("Theoretical slide TF %.4f +/- %.4f (%s)", moments.mean, moments.sd, basis.value)

    if conf.REFERENCE_ASSAY_CV <= 0:
        raise InvalidConfigError(
            f"reference assay CV must be positive, got {conf.REFERENCE_ASSAY_CV}", module=MODULE
        )
    reference_cv_ratio = dispersion.intra_cv / conf.REFERENCE_ASSAY_CV
    logger.info(
        "Intra-assay CV is %.3f of the reference assay CV %.3f", reference_cv_ratio, conf.REFERENCE_ASSAY_CV
    )

    simulation = simulation_battery(
        d,
        cfg,
        variance_test=conf.VARIANCE_TEST,
        permutation_rounds=conf.PERMUTATION_ROUNDS,
        max_workers=conf.MAX_WORKERS,
    )

    verdicts = _digit_verdicts(digit_tests, alpha, severe_alpha)
    for verdict in (
        _dispersion_verdict(dispersion, conf),
        _theoretical_verdict(moments.cv, dispersion.intra_cv, conf),
        _variance_verdict(simulation, alpha, severe_alpha, conf),
    ):
        if verdict is not None:
            verdicts.append(verdict)
    for verdict in verdicts:
        logger.info("Flag %s (%s): %s", verdict.flag_id.value, verdict.severity.value, verdict.detail)

    return ForensicReport(
        alpha=alpha,
        dataset_summary=summaries,
        grand_tf_mean=grand_mean(summaries),
        digit_column=digit_column,
        digit_position=digit_position.value,
        digit_tests=digit_tests,
        dispersion=dispersion,
        theoretical_moments=moments,
        theoretical_cv=moments.cv,
        theoretical_sd_ratio=sd_ratio(moments, summaries),
        reference_assay_cv=conf.REFERENCE_ASSAY_CV,
        reference_cv_ratio=reference_cv_ratio,
        simulation=simulation,
        flags=[v.flag_id for v in verdicts],
        verdicts=verdicts,
        notes=notes,
        config_echo=cfg,
    )
