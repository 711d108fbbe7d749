import numpy as np
import pytest

from app import app
from channels import identity_channel
from codec import channel_to_dict, matrix_to_dict


@pytest.fixture
def client():
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


def test_health(client):
    res = client.get("/api/health")
    assert res.status_code == 200
    assert res.get_json()["status"] == "ok"


def test_theorems_flag_the_conjecture(client):
    theorems = {t["id"]: t["theorem_backed"] for t in client.get("/api/theorems").get_json()["theorems"]}
    assert theorems["thm1"] is True
    assert theorems["conjecture"] is False


def test_classify(client):
    res = client.post("/api/classify", json={"lambda": [1, 0.5, 0, 0.5]})
    body = res.get_json()
    assert res.status_code == 200
    assert body["phase_damping"] is True
    assert body["pi"] == pytest.approx([0.5, 0.25, 0, 0.25], abs=1e-12)

    body = client.post("/api/classify", json=[1, 2]).get_json()
    assert body["phase_damping"] is False


def test_classify_rejects_non_json(client):
    res = client.post("/api/classify", data="[1, 2", content_type="application/json")
    assert res.status_code == 400
    assert res.get_json()["success"] is False


def test_build_channel(client):
    res = client.post("/api/build-channel", json={"weights": [0.5, 0.5]})
    assert res.status_code == 200
    assert res.get_json()["channel"]["dim_in"] == 2
    assert res.get_json()["distribution"] == {"weights": [0.5, 0.5]}

    res = client.post("/api/build-channel", json={"weights": [0.5, 0.7]})
    assert res.status_code == 400


def test_build_truncated_channel(client):
    res = client.post("/api/build-channel", json={"atoms": [[0.5, 0.0], [0.5, 0.25]], "dim": 5})
    assert res.status_code == 200
    body = res.get_json()
    assert body["channel"]["dim_in"] == 5
    assert body["measure"] == {"atoms": [[0.5, 0.0], [0.5, 0.25]]}

    res = client.post("/api/build-channel", json={"atoms": [[1.0, 0.0]]})
    assert res.status_code == 400


def test_verify_serves_repeat_configs_from_cache(client):
    payload = {"theorem": "thm1", "trials": 2, "dim_h": 2, "dim_k": 2, "master_seed": 314}
    first = client.post("/api/verify", json=payload).get_json()
    second = client.post("/api/verify", json=payload).get_json()
    assert first["success"] and first["cached"] is False
    assert second["cached"] is True
    assert first["report"]["trials"] == second["report"]["trials"]
    assert first["report"]["summary"]["fail"] == 0


def test_verify_reports_config_field(client):
    res = client.post("/api/verify", json={"theorem": "thm1", "trials": 0})
    assert res.status_code == 400
    assert res.get_json()["field"] == "trials"

    res = client.post("/api/verify", json={"theorem": "thm1", "output": "/tmp/x.json"})
    assert res.status_code == 400


def test_roof(client):
    payload = {
        "state": matrix_to_dict(np.diag([0.5, 0.5])),
        "channel": channel_to_dict(identity_channel(2)),
        "restarts": 1,
    }
    res = client.post("/api/roof", json=payload)
    assert res.status_code == 200
    assert res.get_json()["roof"]["value"] <= 1e-6
    assert res.get_json()["state"]["rows"] == 2

    witness = res.get_json()["roof"]
    res = client.post("/api/roof", json={**payload, "witnesses": [witness]})
    assert res.status_code == 200

    res = client.post("/api/roof", json={**payload, "witnesses": {"weights": [1]}})
    assert res.status_code == 400

    res = client.post("/api/roof", json={"state": payload["state"]})
    assert res.status_code == 400
