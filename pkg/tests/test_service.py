"""FastAPI endpoints: payload shapes, determinism, error mapping."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from starsep.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_star_endpoint_flat_example(client):
    payload = {"potential": "flat", "n": 1, "f": "zbar1", "g": "z1", "nu_order": 2}
    response = client.post("/v1/star", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["text"] == {"0": "z1*zbar1", "1": "1", "2": "0"}
    assert body["series"]["0"] == {"z1*zbar1": "1"}
    assert body["series"]["1"] == {"1": "1"}
    assert body["series"]["2"] == {}
    assert body["meta"]["phi_order"] == 2 + 2 * 2 + 4


def test_star_endpoint_is_deterministic(client):
    payload = {
        "potential": "fubini-study",
        "n": 1,
        "f": "zbar1^2 + i*z1",
        "g": "z1 + 1/2",
        "nu_order": 3,
        "jet_order": 3,
    }
    first = client.post("/v1/star", json=payload)
    second = client.post("/v1/star", json=payload)
    assert first.status_code == 200
    assert first.content == second.content


def test_lsymbol_endpoint(client):
    payload = {"potential": "flat", "n": 1, "f": "zbar1^2", "nu_order": 2, "jet_order": 4}
    body = client.post("/v1/lsymbol", json=payload).json()
    assert body["text"]["0"] == "zbar1^2"
    assert body["text"]["1"] == "2*zbar1*etabar1"
    assert body["text"]["2"] == "etabar1^2"


def test_tensor_t_endpoint_at_origin(client):
    payload = {"potential": "flat", "n": 1, "nu_order": 2, "at_origin": True}
    body = client.post("/v1/tensor-t", json=payload).json()
    assert body["text"] == {"0": "1", "1": "eta1*etabar1", "2": "1/2*eta1^2*etabar1^2"}
    assert body["series"]["2"] == {"eta1^2*etabar1^2": "1/2"}


def test_tensor_t_full_jets(client):
    payload = {"potential": "fubini-study", "n": 1, "nu_order": 1, "jet_order": 2}
    body = client.post("/v1/tensor-t", json=payload).json()
    # component 1 is gamma = g_{1 1bar} eta1 etabar1 = (1 - 2 z zbar + ...) eta etabar
    assert body["series"]["1"]["eta1*etabar1"] == "1"
    assert body["series"]["1"]["z1*zbar1*eta1*etabar1"] == "-2"


def test_geom_endpoint(client):
    payload = {"potential": "hyperbolic", "n": 1, "jet_order": 2}
    body = client.post("/v1/geom", json=payload).json()
    assert body["tensors"]["g_up"]["1,1"] == {"1": "1", "z1*zbar1": "-2"}
    assert body["tensors"]["curvature_low"]["1,1,1,1"]["1"] == "-2"
    assert body["tensors"]["gamma"]["eta1*etabar1"] == "1"


def test_verify_endpoint(client):
    payload = {"potential": "fubini-study", "n": 1, "nu_order": 2, "seed": 7}
    body = client.post("/v1/verify", json=payload).json()
    assert body["passed"] is True
    names = {c["name"] for c in body["checks"]}
    assert {"canonical_relations", "associativity", "tensor_closed_form"} <= names
    assert all(c["status"] == "pass" for c in body["checks"])


def test_expression_error_becomes_400(client):
    payload = {"potential": "flat", "n": 1, "f": "z3", "g": "z1"}
    response = client.post("/v1/star", json=payload)
    assert response.status_code == 400
    assert "exceeds dimension" in response.json()["detail"]


def test_degenerate_potential_becomes_400(client):
    payload = {"potential": "z1^2*zbar1^2", "n": 1, "f": "z1", "g": "z1"}
    response = client.post("/v1/star", json=payload)
    assert response.status_code == 400
    assert "degenerate" in response.json()["detail"]


def test_invalid_config_becomes_422(client):
    response = client.post("/v1/star", json={"n": 0, "f": "z1", "g": "z1"})
    assert response.status_code == 422
    response = client.post("/v1/star", json={"n": 1, "f": "z1", "g": "z1", "jet_order": 1})
    assert response.status_code == 422


def test_complex_coefficients_serialize_as_pairs(client):
    payload = {"potential": "flat", "n": 1, "f": "i*zbar1", "g": "z1", "nu_order": 1}
    body = client.post("/v1/star", json=payload).json()
    assert body["series"]["1"]["1"] == ["0", "1"]
    assert body["text"]["1"] == "(0+1i)"
