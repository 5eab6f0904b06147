import csv
import json
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional

from ..core.config import settings
from ..core.errors import PlotOutputError
from ..models.dataset import CATEGORIES
from ..models.results import ForensicReport, TestOutcome

logger = logging.getLogger(__name__)

FIG1_HEADER = (
    "point_index", "reported_tf_a", "reported_tf_b",
    "simulated_tf_a", "simulated_tf_b", "reported_mean", "simulated_mean",
)
FIG2_HEADER = ("category", "source", "variance", "mean")
FIG2_POINTS_HEADER = ("category", "source", "slide_index", "count")


class ReportFormat(str, Enum):
    TEXT = "text"
    STRUCTURED = "structured"


def _percent(fraction: Optional[float]) -> str:
    return "n/a" if fraction is None else f"{fraction * 100:.1f}%"


def _p(p: float) -> str:
    return "< 0.0001" if p < 1e-4 else f"{p:.4f}"


def _outcome_line(t: TestOutcome) -> str:
    df = ""
    if t.df is not None:
        df = f", df {t.df:g}" if t.df_denominator is None else f", df ({t.df:g}, {t.df_denominator:g})"
    return f"{t.test_name}: statistic {t.statistic:.3f}{df}, p = {_p(t.p_value)}"


def _text_report(r: ForensicReport) -> str:
    lines = [
        f"Comet assay forensic report (schema {r.schema_version})",
        f"points: {len(r.dataset_summary)}, cells per slide: {r.config_echo.cells_per_slide}, alpha: {r.alpha:g}",
        "",
        "Duplicate tail factors",
    ]
    for s in r.dataset_summary:
        lines.append(
            f"  {s.label}: TF {s.tf_a:.2f} / {s.tf_b:.2f}, mean {s.mean:.2f}, SD {s.sd:.2f}, CV {_percent(s.cv)}"
        )
    lines.append(f"grand TF mean: {r.grand_tf_mean:.2f}")

    lines += ["", f"Terminal digits (column {r.digit_column}, {r.digit_position} digit)"]
    if r.digit_tests:
        lines += [f"  {_outcome_line(t)}" for t in r.digit_tests]
    else:
        lines.append("  not run")

    lines += [
        "",
        "Dispersion",
        f"  intra-assay CV: {_percent(r.dispersion.intra_cv)}",
        f"  inter-assay CV: {_percent(r.dispersion.inter_cv)}",
        f"  reference assay CV: {_percent(r.reference_assay_cv)}, intra-assay / reference: {r.reference_cv_ratio:.3f}",
        "",
        f"Theoretical slide moments ({r.theoretical_moments.basis.value})",
        f"  TF mean {r.theoretical_moments.mean:.2f}, SD {r.theoretical_moments.sd:.2f}, "
        f"CV {_percent(r.theoretical_cv)}",
    ]
    if r.theoretical_sd_ratio is not None:
        lines.append(f"  theoretical SD / observed duplicate SD: {r.theoretical_sd_ratio:.1f}")

    sim = r.simulation
    if sim is not None:
        counts = ", ".join(f"{c}: {n}" for c, n in zip(CATEGORIES, sim.population.counts))
        lines += [
            "",
            f"Null simulation ({r.config_echo.replicates} replicates, seed {r.config_echo.seed}, "
            f"{r.config_echo.sampling.value})",
            f"  population ({sim.population.size} cells): {counts}",
            f"  simulated intra-assay CV: {_percent(sim.sim_intra_cv)}",
            f"  simulated inter-assay CV: {_percent(sim.sim_inter_cv)}",
            f"  simulated TF mean: {sim.sim_tf_mean:.2f}",
        ]
        for k, category in enumerate(CATEGORIES):
            lines.append(
                f"  {category}: variance {sim.reported_variances[k]:.2f} reported vs "
                f"{sim.simulated_variances[k]:.2f} simulated, "
                f"variance p = {_p(sim.per_category_variance_tests[k].p_value)}, "
                f"mean p = {_p(sim.per_category_mean_tests[k].p_value)}"
            )

    lines += ["", "Red flags"]
    if r.verdicts:
        for v in r.verdicts:
            lines.append(f"  [{v.severity.value}] {v.flag_id.value}: {v.detail} ({v.evidence_pointer})")
    else:
        lines.append("  no red flags raised")

    if r.notes:
        lines += ["", "Notes"] + [f"  {note}" for note in r.notes]
    return "\n".join(lines) + "\n"


def emit_report(r: ForensicReport, format: ReportFormat = ReportFormat.TEXT) -> bytes:
    """
    Render a report.

    Args:
        r: finished battery report
        format: "text" for people, "structured" for the versioned JSON schema

    Returns:
        UTF-8 encoded report
    """
    if ReportFormat(format) is ReportFormat.STRUCTURED:
        # Python-mode dump keeps non-finite floats so json writes them as Infinity.
        payload = json.dumps(r.model_dump(), sort_keys=True, indent=2, allow_nan=True)
        return (payload + "\n").encode("utf-8")
    return _text_report(r).encode("utf-8")


def parse_report(data: bytes) -> ForensicReport:
    return ForensicReport.model_validate(json.loads(data.decode("utf-8")))


def _write_csv(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise PlotOutputError(f"cannot write {path}: {exc.strerror}")
    return path


def emit_plot_data(r: ForensicReport, out_dir: Path, categories: Optional[str] = None) -> List[Path]:
    """Write fig1.csv, fig2.csv and fig2_points.csv into an existing directory."""
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise PlotOutputError(f"plot directory {out_dir} does not exist")
    if r.simulation is None:
        raise PlotOutputError("report has no simulation results to plot")
    wanted = set((categories or settings.PLOT_CATEGORIES).upper())

    sim = r.simulation
    written = [
        _write_csv(out_dir / "fig1.csv", FIG1_HEADER, (
            (row.point_index, row.reported_tf_a, row.reported_tf_b, row.simulated_tf_a,
             row.simulated_tf_b, row.reported_mean, row.simulated_mean)
            for row in sim.fig1_data
        )),
        _write_csv(out_dir / "fig2.csv", FIG2_HEADER, (
            (v.category, v.source, v.variance, v.mean)
            for v in sim.fig2_data if v.category in wanted
        )),
        _write_csv(out_dir / "fig2_points.csv", FIG2_POINTS_HEADER, (
            (p.category, p.source, p.slide_index, p.count)
            for p in sim.fig2_points if p.category in wanted
        )),
    ]
    logger.info("Wrote plot data to %s", out_dir)
    return written
