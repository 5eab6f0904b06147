import csv
import io
import logging
import re
from itertools import groupby
from pathlib import Path
from typing import List, Optional, Tuple

from ..core.errors import DatasetFormatError, DatasetValidationError
from ..models.dataset import (
    CATEGORIES,
    CalibrationScale,
    CategoryCounts,
    Dataset,
    DuplicatePoint,
    IssueKind,
    ValidationIssue,
)

logger = logging.getLogger(__name__)

HEADER = ("label",) + CATEGORIES
# ASCII digits with an optional sign; no underscores or other numerals
COUNT_PATTERN = re.compile(r"-?[0-9]+")


def _data_rows(text: str) -> List[Tuple[int, List[str]]]:
    """Split CSV text into (line number, fields), dropping blanks and '#' comments."""
    rows = []
    reader = csv.reader(io.StringIO(text.replace("\r\n", "\n")))
    for line_no, fields in enumerate(reader, 1):
        if not fields or not "".join(fields).strip():
            continue
        if fields[0].lstrip().startswith("#"):
            continue
        rows.append((line_no, [f.strip() for f in fields]))
    return rows


def _parse_counts(line_no: int, fields: List[str]) -> CategoryCounts:
    counts = []
    for category, raw in zip(CATEGORIES, fields[1:]):
        if not COUNT_PATTERN.fullmatch(raw):
            raise DatasetFormatError(
                "non-integer", f"count for {category} is not an integer: {raw!r}", line_no
            )
        value = int(raw)
        if value < 0:
            raise DatasetFormatError(
                "negative-count", f"count for {category} is negative: {value}", line_no
            )
        counts.append(value)
    slide = CategoryCounts.from_counts(counts)
    if slide.total == 0:
        raise DatasetFormatError("empty", "slide has no scored cells", line_no)
    return slide


def parse_dataset(text: str, scale: Optional[CalibrationScale] = None) -> Dataset:
    """
    Parse `label,A,B,C,D,E` CSV into a Dataset.

    Consecutive rows sharing a label form duplicate pairs in file order, so a
    run of four rows labelled "sham 4h" yields two points.
    """
    scale = scale or CalibrationScale()
    text = text.lstrip("\ufeff") if text else text
    if not text or not text.strip():
        raise DatasetFormatError("empty", "input is empty")

    rows = _data_rows(text)
    if not rows:
        raise DatasetFormatError("empty", "input has no header or rows")

    header_line, header = rows[0]
    if tuple(h.lower() for h in header) != tuple(h.lower() for h in HEADER):
        raise DatasetFormatError(
            "missing-header", f"expected header {','.join(HEADER)}", header_line
        )

    slides = []
    for line_no, fields in rows[1:]:
        if len(fields) != len(HEADER):
            raise DatasetFormatError(
                "malformed-row",
                f"expected {len(HEADER)} columns, got {len(fields)}",
                line_no,
            )
        slides.append((fields[0], line_no, _parse_counts(line_no, fields)))

    if not slides:
        raise DatasetFormatError("empty", "no slide rows after the header")

    points = []
    for label, run in groupby(slides, key=lambda s: s[0]):
        run = list(run)
        if len(run) % 2:
            raise DatasetFormatError(
                "odd-slides",
                f"label {label!r} has an odd number of slides ({len(run)})",
                run[-1][1],
            )
        for (_, _, first), (_, _, second) in zip(run[::2], run[1::2]):
            points.append(DuplicatePoint(label=label, slide_a=first, slide_b=second))

    dataset = Dataset(points=tuple(points), scale=scale)
    issues = validate_dataset(dataset)
    if issues:
        raise DatasetFormatError("total-mismatch", issues[0].message)

    logger.debug("Parsed %d duplicate points (%d slides)", len(points), 2 * len(points))
    return dataset


def load_dataset(path: Path, scale: Optional[CalibrationScale] = None) -> Dataset:
    try:
        with open(path, "r", encoding="utf-8-sig") as f:
            text = f.read()
    except UnicodeDecodeError as exc:
        raise DatasetFormatError("encoding", f"{path} is not UTF-8 text (byte offset {exc.start})")
    return parse_dataset(text, scale)


def validate_dataset(d: Dataset) -> List[ValidationIssue]:
    """Collect every invariant violation instead of stopping at the first."""
    issues: List[ValidationIssue] = []
    if not d.points:
        return [ValidationIssue(point_index=-1, kind=IssueKind.EMPTY, message="dataset has no points")]

    common_total = d.points[0].slide_a.total
    for index, point in enumerate(d.points):
        for name, slide in (("a", point.slide_a), ("b", point.slide_b)):
            if any(c < 0 for c in slide.counts):
                issues.append(ValidationIssue(
                    point_index=index,
                    kind=IssueKind.NEGATIVE_COUNT,
                    message=f"{point.label} slide {name} has a negative count",
                ))
            if sum(slide.counts) != slide.total:
                issues.append(ValidationIssue(
                    point_index=index,
                    kind=IssueKind.SUM_MISMATCH,
                    message=f"{point.label} slide {name} counts sum to "
                            f"{sum(slide.counts)}, total is {slide.total}",
                ))
            if slide.total <= 0:
                issues.append(ValidationIssue(
                    point_index=index,
                    kind=IssueKind.EMPTY,
                    message=f"{point.label} slide {name} has no cells",
                ))

        if point.slide_a.total != point.slide_b.total:
            issues.append(ValidationIssue(
                point_index=index,
                kind=IssueKind.TOTAL_MISMATCH,
                message=f"{point.label} slides have totals "
                        f"{point.slide_a.total} and {point.slide_b.total}",
            ))
        elif point.slide_a.total != common_total:
            issues.append(ValidationIssue(
                point_index=index,
                kind=IssueKind.TOTAL_MISMATCH,
                message=f"{point.label} slide total {point.slide_a.total} differs "
                        f"from dataset total {common_total}",
            ))
    return issues


def require_valid(d: Dataset) -> None:
    issues = validate_dataset(d)
    if issues:
        raise DatasetValidationError(issues)


def serialize_dataset(d: Dataset) -> str:
    """Canonical CSV: header, one row per slide, LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for point in d.points:
        for slide in point.slides:
            writer.writerow([point.label, *slide.counts])
    return buffer.getvalue()


def filter_points(d: Dataset, label_prefix: str) -> Dataset:
    points = tuple(p for p in d.points if p.label.startswith(label_prefix))
    if not points:
        raise DatasetFormatError("empty", f"no points with label prefix {label_prefix!r}")
    return Dataset(points=points, scale=d.scale)
