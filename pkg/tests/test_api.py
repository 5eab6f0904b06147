import json

import pytest
from fastapi.testclient import TestClient

from app.main import app
from conftest import SHAM_CSV


@pytest.fixture
def client():
    return TestClient(app)


def _upload(content):
    return {"file": ("data.csv", content, "text/csv")}


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "running" in response.json()["message"]


def test_defaults(client):
    body = client.get("/api/v1/defaults").json()
    assert body["scale"] == [2.5, 12.5, 30.0, 67.5, 97.5]
    assert body["population_size"] == 10_000
    assert body["sampling"] == "without-replacement"
    assert body["reference_assay_cv"] == 0.25


def test_analyze_fixture(client):
    response = client.post(
        "/api/v1/analyze",
        files=_upload(SHAM_CSV.read_bytes()),
        params={"replicates": 5, "seed": 42},
    )
    assert response.status_code == 200
    report = json.loads(response.content)
    assert report["schema_version"] == "1.0"
    assert "variance-below-simulated" in report["flags"]
    assert report["config_echo"]["replicates"] == 5


def test_analyze_accepts_byte_order_mark(client):
    response = client.post(
        "/api/v1/analyze",
        files=_upload(b"\xef\xbb\xbf" + SHAM_CSV.read_bytes()),
        params={"replicates": 3},
    )
    assert response.status_code == 200
    assert json.loads(response.content)["reference_cv_ratio"] == pytest.approx(0.0834, abs=1e-3)


def test_analyze_malformed_csv(client):
    response = client.post("/api/v1/analyze", files=_upload(b"label,A,B,C,D,E\nx,1,2,3\n"))
    assert response.status_code == 400
    assert "line 2" in response.json()["detail"]


def test_analyze_bad_alpha(client):
    response = client.post(
        "/api/v1/analyze", files=_upload(SHAM_CSV.read_bytes()), params={"alpha": 2.0, "replicates": 2}
    )
    assert response.status_code == 400


def test_analyze_bad_scale(client):
    response = client.post(
        "/api/v1/analyze", files=_upload(SHAM_CSV.read_bytes()), params={"scale": "5,4,3,2,1"}
    )
    assert response.status_code == 422


def test_analyze_non_utf8(client):
    response = client.post("/api/v1/analyze", files=_upload(b"\xff\xfe\x00"))
    assert response.status_code == 400
