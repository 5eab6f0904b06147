import math

import pytest

from app.core.errors import DatasetValidationError, ForensicsError
from app.models.dataset import CalibrationScale, CategoryCounts, Dataset
from app.services.tail_factor import dataset_tail_factors, duplicate_summary, grand_mean, tail_factor

SCALE = CalibrationScale()


@pytest.mark.parametrize("counts, expected", [
    ([442, 40, 12, 3, 3], 4.92),
    ([500, 0, 0, 0, 0], 2.5),
    ([0, 0, 0, 0, 500], 97.5),
    ([100, 100, 100, 100, 100], 42.0),
])
def test_tail_factor(counts, expected):
    assert tail_factor(CategoryCounts.from_counts(counts), SCALE) == pytest.approx(expected, abs=1e-12)


def test_scale_equivariance():
    counts = CategoryCounts.from_counts([442, 40, 12, 3, 3])
    tripled = CalibrationScale(weights=tuple(3 * w for w in SCALE.weights))
    assert tail_factor(counts, tripled) == pytest.approx(3 * tail_factor(counts, SCALE), rel=1e-12)


@pytest.mark.parametrize("i, j", [(0, 1), (0, 4), (2, 3)])
def test_moving_a_cell_up_raises_tf(i, j):
    before = [442, 40, 12, 3, 3]
    after = list(before)
    after[i] -= 1
    after[j] += 1
    delta = tail_factor(CategoryCounts.from_counts(after), SCALE) - tail_factor(CategoryCounts.from_counts(before), SCALE)
    assert delta == pytest.approx((SCALE.weights[j] - SCALE.weights[i]) / 500, abs=1e-12)


def test_duplicate_summary_published_pair():
    s = duplicate_summary("exp4h", 4.92, 5.12)
    assert s.mean == pytest.approx(5.02, abs=1e-12)
    assert s.sd == pytest.approx(0.1414, abs=5e-4)
    assert f"{s.sd:.2f}" == "0.14"


def test_duplicate_summary_identical():
    s = duplicate_summary("x", 4.0, 4.0)
    assert s.sd == 0
    assert s.cv == 0


def test_duplicate_summary_small_difference():
    s = duplicate_summary("x", 4.0, 4.2)
    assert s.mean == pytest.approx(4.1)
    assert s.sd == pytest.approx(0.2 / math.sqrt(2), abs=1e-12)
    assert s.cv == pytest.approx(0.0345, abs=1e-4)


@pytest.mark.parametrize("a, b", [(0.0, 4.0), (4.0, -1.0)])
def test_duplicate_summary_rejects_non_positive(a, b):
    with pytest.raises(ForensicsError) as exc:
        duplicate_summary("x", a, b)
    assert exc.value.module == "tail-factor"


def test_dataset_tail_factors_single_row(table_row_dataset):
    summaries = dataset_tail_factors(table_row_dataset)
    assert len(summaries) == 1
    assert summaries[0].tf_a == pytest.approx(4.92)


def test_sham_fixture_grand_mean(sham_dataset):
    summaries = dataset_tail_factors(sham_dataset)
    assert len(summaries) == 12
    assert grand_mean(summaries) == pytest.approx(4.06, abs=0.01)
    assert summaries[0].tf_a == pytest.approx(4.13)
    assert summaries[0].tf_b == pytest.approx(3.96)


def test_constant_dataset(point_factory):
    d = Dataset(points=tuple(point_factory(f"p{i}", [450, 30, 12, 5, 3], [450, 30, 12, 5, 3]) for i in range(4)))
    summaries = dataset_tail_factors(d)
    assert len({s.mean for s in summaries}) == 1
    assert all(s.sd == 0 for s in summaries)


def test_permuting_points_permutes_summaries(sham_dataset):
    reversed_d = Dataset(points=tuple(reversed(sham_dataset.points)))
    forward = dataset_tail_factors(sham_dataset)
    backward = dataset_tail_factors(reversed_d)
    assert backward == list(reversed(forward))


def test_invalid_dataset_propagates():
    with pytest.raises(DatasetValidationError):
        dataset_tail_factors(Dataset(points=()))
