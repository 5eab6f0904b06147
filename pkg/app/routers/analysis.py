from typing import Optional

from fastapi import APIRouter, File, HTTPException, Response, UploadFile
from fastapi.concurrency import run_in_threadpool
from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import DatasetFormatError, DatasetValidationError, ForensicsError, InvalidConfigError
from ..models.dataset import CalibrationScale
from ..services.battery import run_battery, simulation_config_for
from ..services.dataset_loader import filter_points, parse_dataset
from ..services.report_writer import ReportFormat, emit_report

router = APIRouter()


@router.post("/analyze")
async def analyze_dataset(
    file: UploadFile = File(...),
    seed: Optional[int] = None,
    replicates: Optional[int] = None,
    alpha: Optional[float] = None,
    population_size: Optional[int] = None,
    cells_per_slide: Optional[int] = None,
    scale: Optional[str] = None,
    digit_column: Optional[str] = None,
    digit_position: Optional[str] = None,
    label_filter: Optional[str] = None,
):
    """
    Run the forensic battery on an uploaded label,A,B,C,D,E CSV.

    Returns:
        The structured (JSON) report
    """
    try:
        text = (await file.read()).decode("utf-8-sig")
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail="Dataset must be UTF-8 encoded CSV")

    try:
        calibration = CalibrationScale.parse(scale) if scale else CalibrationScale(weights=settings.DEFAULT_SCALE)
        dataset = parse_dataset(text, calibration)
        if label_filter:
            dataset = filter_points(dataset, label_filter)
        cfg = simulation_config_for(
            dataset,
            seed=seed,
            replicates=replicates,
            population_size=population_size,
            cells_per_slide=cells_per_slide,
        )
        report = await run_in_threadpool(
            run_battery,
            dataset,
            cfg,
            alpha if alpha is not None else settings.ALPHA,
            digit_column,
            digit_position,
        )
    except (DatasetFormatError, DatasetValidationError, InvalidConfigError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except (ForensicsError, ValidationError, ValueError) as e:
        raise HTTPException(status_code=422, detail=str(e))

    # Starlette's JSONResponse rejects Infinity, so send the rendered bytes.
    return Response(content=emit_report(report, ReportFormat.STRUCTURED), media_type="application/json")


@router.get("/defaults")
async def get_defaults():
    """Effective battery defaults after environment and .env overrides."""
    return {
        "scale": list(settings.DEFAULT_SCALE),
        "seed": settings.DEFAULT_SEED,
        "population_size": settings.POPULATION_SIZE,
        "cells_per_slide": settings.CELLS_PER_SLIDE,
        "replicates": settings.REPLICATES,
        "sampling": settings.SAMPLING,
        "alpha": settings.ALPHA,
        "severe_alpha": settings.SEVERE_ALPHA,
        "moment_basis": settings.MOMENT_BASIS,
        "variance_test": settings.VARIANCE_TEST,
        "digit_column": settings.DIGIT_COLUMN,
        "digit_position": settings.DIGIT_POSITION,
        "reference_assay_cv": settings.REFERENCE_ASSAY_CV,
    }
