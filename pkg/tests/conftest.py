"""Shared fixtures: shipped reconstructed data and small hand-built datasets."""
from pathlib import Path

import pytest

from app.models.dataset import CategoryCounts, Dataset, DuplicatePoint
from app.models.results import PopulationSpec, SimulationConfig
from app.services.dataset_loader import load_dataset

ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = ROOT / "data"
SHAM_CSV = DATA_DIR / "sham_reconstructed.csv"
DIGITS_TXT = DATA_DIR / "terminal_digits_reconstructed.txt"

SHAM_POPULATION = (8992, 776, 202, 18, 12)


def make_point(label, slide_a, slide_b):
    return DuplicatePoint(
        label=label,
        slide_a=CategoryCounts.from_counts(slide_a),
        slide_b=CategoryCounts.from_counts(slide_b),
    )


@pytest.fixture
def sham_dataset():
    return load_dataset(SHAM_CSV)


@pytest.fixture
def sham_csv_text():
    return SHAM_CSV.read_text(encoding="utf-8")


@pytest.fixture
def reconstructed_digits():
    lines = DIGITS_TXT.read_text(encoding="utf-8").splitlines()
    return [int(line) for line in lines if line.strip() and not line.startswith("#")]


@pytest.fixture
def sham_population():
    return PopulationSpec(counts=SHAM_POPULATION, size=sum(SHAM_POPULATION))


@pytest.fixture
def table_row_dataset():
    return Dataset(points=(make_point("exp4h", [442, 40, 12, 3, 3], [430, 48, 14, 4, 4]),))


@pytest.fixture
def small_config():
    return SimulationConfig(n_points=12, cells_per_slide=500, seed=42, replicates=5)


@pytest.fixture
def point_factory():
    return make_point


@pytest.fixture(scope="module")
def sham_report():
    from app.services.battery import run_battery

    d = load_dataset(SHAM_CSV)
    cfg = SimulationConfig(n_points=12, cells_per_slide=500, seed=42, replicates=20)
    return run_battery(d, cfg, alpha=0.05)
