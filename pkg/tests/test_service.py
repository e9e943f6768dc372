import threading

import pytest
from fastapi.testclient import TestClient

from promptlens.service import ApiConfig, create_app


@pytest.fixture()
def client(tmp_path, lexicon, mock_clients):
    app = create_app(ApiConfig(data_dir=str(tmp_path / "data")), lexicon, mock_clients)
    with TestClient(app) as test_client:
        yield test_client


SMALL = {
    "pp": 2, "vp": 2, "conjunction": 2, "anaphora": 1, "ellipsis": 1,
    "fairness": 2, "complex": 1, "combination": 1, "misc": 1,
}


def _benchmark(client, seed=3):
    response = client.post("/benchmarks", json={"seed": seed, "config": SMALL})
    assert response.status_code == 201
    return response.json()["benchmark_id"]


def _open_session(client, benchmark_id, record=None, **overrides):
    if record is None:
        record = client.get(f"/benchmarks/{benchmark_id}/records").json()["records"][0]
    body = {
        "benchmark_id": benchmark_id,
        "record_id": record["id"],
        "intention_index": 0,
        "mode": "multi_setup",
        "clarifier": "oracle",
    }
    body.update(overrides)
    response = client.post("/sessions", json=body)
    assert response.status_code == 201, response.text
    return response.json()


class TestBenchmarks:
    def test_create_and_list_records(self, client):
        benchmark_id = _benchmark(client)
        listing = client.get(f"/benchmarks/{benchmark_id}/records").json()
        assert listing["total"] == sum(SMALL.values())
        assert all("visual_setups" in r for r in listing["records"])

    def test_pagination(self, client):
        benchmark_id = _benchmark(client)
        page = client.get(
            f"/benchmarks/{benchmark_id}/records", params={"offset": 2, "limit": 3}
        ).json()
        assert len(page["records"]) == 3 and page["offset"] == 2

    def test_bad_config_rejected(self, client):
        response = client.post("/benchmarks", json={"config": {"pp": -1}})
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "bad_config"

    def test_unknown_benchmark_404(self, client):
        assert client.get("/benchmarks/nope/records").status_code == 404


class TestSessions:
    def test_open_returns_pending_with_items(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(client, benchmark_id)
        assert session["resolution"]["kind"] == "pending"
        assert len(session["clarification"]["items"]) >= 2

    def test_model_clarifier_through_completion_endpoint(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(
            client, benchmark_id, mode="one_question", clarifier="model"
        )
        assert session["clarification"]["source"] == "model"
        assert session["clarification"]["items"][0].endswith("?")

    def test_unknown_record_404(self, client):
        benchmark_id = _benchmark(client)
        response = client.post("/sessions", json={
            "benchmark_id": benchmark_id, "record_id": "nope",
            "intention_index": 0, "mode": "multi_setup", "clarifier": "oracle",
        })
        assert response.status_code == 404

    def test_bad_intention_422(self, client):
        benchmark_id = _benchmark(client)
        record = client.get(f"/benchmarks/{benchmark_id}/records").json()["records"][0]
        response = client.post("/sessions", json={
            "benchmark_id": benchmark_id, "record_id": record["id"],
            "intention_index": 99, "mode": "multi_setup", "clarifier": "oracle",
        })
        assert response.status_code == 422

    def test_resolve_select_concatenates(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(client, benchmark_id)
        resolved = client.post(
            f"/sessions/{session['session_id']}/resolve",
            json={"action": "select", "index": 0},
        ).json()
        assert resolved["resolution"]["kind"] == "selected"
        assert resolved["disambiguated_prompt"].startswith(session["record"]["example"])
        assert resolved["disambiguated_prompt"].endswith(".")

    def test_out_of_range_select_422(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(client, benchmark_id)
        response = client.post(
            f"/sessions/{session['session_id']}/resolve",
            json={"action": "select", "index": 42},
        )
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "bad_resolution"

    def test_double_resolve_409(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(client, benchmark_id)
        url = f"/sessions/{session['session_id']}/resolve"
        assert client.post(url, json={"action": "skip"}).status_code == 200
        response = client.post(url, json={"action": "select", "index": 0})
        assert response.status_code == 409
        assert response.json()["detail"]["code"] == "already_resolved"

    def test_concurrent_resolve_single_winner(self, tmp_path, lexicon, mock_clients):
        app = create_app(ApiConfig(data_dir=str(tmp_path / "c")), lexicon, mock_clients)
        with TestClient(app) as client:
            benchmark_id = _benchmark(client)
            session = _open_session(client, benchmark_id)
            url = f"/sessions/{session['session_id']}/resolve"
            statuses = []
            barrier = threading.Barrier(6)

            def hit():
                barrier.wait()
                statuses.append(
                    client.post(url, json={"action": "select", "index": 0}).status_code
                )

            threads = [threading.Thread(target=hit) for _ in range(6)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert statuses.count(200) == 1
            assert statuses.count(409) == 5

    def test_paraphrase_after_resolution(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(client, benchmark_id)
        session_id = session["session_id"]
        client.post(f"/sessions/{session_id}/resolve", json={"action": "select", "index": 0})
        updated = client.post(f"/sessions/{session_id}/paraphrase").json()
        assert updated["paraphrased_prompt"]

    def test_paraphrase_before_resolution_409(self, client):
        benchmark_id = _benchmark(client)
        session = _open_session(client, benchmark_id)
        response = client.post(f"/sessions/{session['session_id']}/paraphrase")
        assert response.status_code == 409


class TestExperiments:
    def _resolved_sessions(self, client, benchmark_id, n=3):
        records = client.get(f"/benchmarks/{benchmark_id}/records").json()["records"][:n]
        ids = []
        for record in records:
            session = _open_session(client, benchmark_id, record=record)
            client.post(
                f"/sessions/{session['session_id']}/resolve",
                json={"action": "select", "index": 0},
            )
            ids.append(session["session_id"])
        return ids

    def test_lifecycle_and_report(self, client):
        benchmark_id = _benchmark(client)
        ids = self._resolved_sessions(client, benchmark_id)
        accepted = client.post("/experiments", json={
            "session_ids": ids, "conditions": ["ambiguous", "disambiguated"],
            "n_images": 2,
        })
        assert accepted.status_code == 202
        experiment_id = accepted.json()["experiment_id"]
        url = f"/experiments/{experiment_id}/report"
        for _ in range(200):
            response = client.get(url)
            if response.status_code == 200:
                break
            assert response.status_code == 409
            detail = response.json()["detail"]
            assert "completed" in detail["message"]
        report = response.json()
        assert report["per_condition"]["disambiguated"]["mean_per_prompt"] == 1.0
        assert report["per_condition"]["ambiguous"]["mean_per_prompt"] == 0.0

    def test_images_route_serves_png(self, client):
        benchmark_id = _benchmark(client)
        ids = self._resolved_sessions(client, benchmark_id, n=1)
        accepted = client.post("/experiments", json={
            "session_ids": ids, "conditions": ["disambiguated"], "n_images": 1,
        })
        url = f"/experiments/{accepted.json()['experiment_id']}/report"
        for _ in range(200):
            response = client.get(url)
            if response.status_code == 200:
                break
        content_hash = response.json()["rows"][0]["image_hashes"][0]
        image = client.get(f"/images/{content_hash}")
        assert image.status_code == 200
        assert image.headers["content-type"] == "image/png"
        assert image.content.startswith(b"\x89PNG")

    def test_bad_condition_422(self, client):
        benchmark_id = _benchmark(client)
        ids = self._resolved_sessions(client, benchmark_id, n=1)
        response = client.post("/experiments", json={
            "session_ids": ids, "conditions": ["sideways"],
        })
        assert response.status_code == 422

    def test_unknown_experiment_404(self, client):
        assert client.get("/experiments/nope/report").status_code == 404


class TestObservability:
    def test_health(self, client):
        assert client.get("/health").json() == {"status": "ok"}

    def test_request_log_records_each_call(self, client):
        client.get("/health")
        benchmark_id = _benchmark(client)
        log = client.get("/debug/requests").json()
        paths = [entry["path"] for entry in log]
        assert "/health" in paths and "/benchmarks" in paths
        assert all(set(entry) == {"method", "path", "status"} for entry in log)
        before = len(log)
        client.get(f"/benchmarks/{benchmark_id}/records")
        after = client.get("/debug/requests").json()
        assert len(after) == before + 1 + 1  # records call + the debug read itself
