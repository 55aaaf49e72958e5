"""
Tests for the HTTP endpoints.
"""
import pytest
from fastapi.testclient import TestClient

from app.main import app

HEAT = {"name": "heat", "A": [[1.0]], "B": [[0.0]], "S": [[0.0, 0.0], [0.0, 0.0]]}
PAIR = {"name": "pair", "A": [[1.0, 0.0], [0.0, [1.5, 0.5]]], "B": [[3.0, 0.0], [0.0, 5.0]], "S": [[0.0, 0.0], [0.0, 0.0]]}


@pytest.fixture
def client():
    return TestClient(app)


def test_health(client):
    assert client.get("/health").json()["status"] == "healthy"
    status = client.get("/status").json()
    assert "riccati" in status["suites"]
    assert "scalar_heat" in status["systems"]
    assert client.get("/ready").json()["ready"] is True


def test_validate_system(client):
    response = client.post("/api/v1/systems/validate", json=PAIR)
    assert response.status_code == 200
    body = response.json()
    assert body["valid"] is True
    assert len(body["system"]["Y"]) == 2


def test_invalid_system_is_unprocessable(client):
    response = client.post("/api/v1/systems/validate", json={**HEAT, "A": [[-1.0]]})
    assert response.status_code == 422
    assert "NonEllipticA" in response.json()["detail"]


def test_spectral_quantities(client):
    response = client.post("/api/v1/systems/spectral", params={"eta": 0.3, "p": 2.0}, json=PAIR)
    assert response.status_code == 200
    body = response.json()
    assert body["a0"] == pytest.approx(1.0)
    assert body["b0"] == pytest.approx(3.0)
    assert body["nu"] == pytest.approx(0.9)
    assert body["lambdaA"][1] == pytest.approx([1.5, 0.5])


def test_kernel(client):
    response = client.post("/api/v1/kernel", json={"system": HEAT, "t": 0.25, "x": [0.0, 0.0], "xi": [0.0, 0.0]})
    assert response.status_code == 200
    # (4 pi t)^(-1) at x = xi
    assert response.json()["matrix"][0][0] == pytest.approx([1.0 / 3.141592653589793, 0.0])

    wrong = client.post("/api/v1/kernel", json={"system": HEAT, "t": 0.25, "x": [0.0], "xi": [0.0, 0.0]})
    assert wrong.status_code == 422


def test_bounds(client):
    response = client.post("/api/v1/bounds", json={"system": HEAT, "t": [1.0, 4.0]})
    assert response.status_code == 200
    body = response.json()
    assert body["columns"][0] == "t"
    assert body["rows"][0][:2] == pytest.approx([1.0, 1.0])
    assert body["rows"][1][3] == pytest.approx(0.25)
    assert body["C7"] > 0.0


def test_omega(client):
    response = client.post("/api/v1/omega", json={"system": PAIR, "mode": "cb_unweighted"})
    assert response.json() == pytest.approx({"omega": -3.0, "M": 2.5, "C_star": 1.0})
    assert client.post("/api/v1/omega", json={"system": PAIR, "mode": "sup"}).status_code == 422


def test_run_single_suite(client):
    response = client.post(
        "/api/v1/verification/suite", json={"name": "riccati", "systems": ["scalar_heat"], "config": {}}
    )
    assert response.status_code == 200
    records = response.json()["records"]
    assert records and all(record["pass"] for record in records)

    assert client.post("/api/v1/verification/suite", json={"name": "fourier"}).status_code == 404
    invalid = client.post("/api/v1/verification/suite", json={"name": "riccati", "config": {"tolerance": -1}})
    assert invalid.status_code == 422


def test_run_verification_locally(client):
    response = client.post("/api/v1/verification/run", json={"config": {"suites": ["riccati"]}})
    assert response.status_code == 200
    body = response.json()
    assert body["exit_code"] == 0
    assert [summary["suite"] for summary in body["summaries"]] == ["riccati"]

    missing = client.post("/api/v1/verification/run", json={"plan": "no_such_plan"})
    assert missing.status_code == 404
