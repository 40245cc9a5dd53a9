"""HTTP session service: full flows, error contracts, replay, stop."""

import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from prefstream.data_io import gen_sphere
from prefstream.engine import EngineConfig, run_stream
from prefstream.model import SimOracle, random_unit_vector, true_utility
from prefstream.service import app as app_module
from prefstream.service.app import app


@pytest.fixture(autouse=True)
def clean_store():
    app_module.reset_store()
    yield
    app_module.reset_store()


@pytest.fixture()
def client():
    return TestClient(app)


def make_session(client, *, n=80, d=2, data_seed=0, config=None, dataset=None, ttl=None):
    body = {
        "dataset": dataset or {"synthetic": {"kind": "sphere", "n": n, "d": d, "data_seed": data_seed}},
        "config": config or {"pool_size": 10, "epsilon": 0.1, "seed": 1},
    }
    if ttl is not None:
        body["ttl_seconds"] = ttl
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()["id"]


def drive(client, sid, coords_by_id, u, delta=0.0, max_answers=100_000):
    """Answer queries the way a simulated user with utility u would."""
    answers = 0
    while answers <= max_answers:
        q = client.get(f"/sessions/{sid}/query").json()
        if q["status"] == "done":
            return answers
        a = coords_by_id[q["first"]["id"]]
        b = coords_by_id[q["second"]["id"]]
        diff = float(np.dot(u, a) - np.dot(u, b))
        if delta > 0.0 and abs(diff) <= delta:
            outcome = "tie"
        elif diff >= 0.0:
            outcome = "first"
        else:
            outcome = "second"
        resp = client.post(
            f"/sessions/{sid}/answer", json={"outcome": outcome, "seq": q["seq"]}
        )
        assert resp.status_code == 200, resp.text
        answers += 1
    raise AssertionError("session did not finish")


class TestBasicFlow:
    def test_create_returns_id(self, client):
        sid = make_session(client)
        assert isinstance(sid, str) and sid

    def test_full_session(self, client):
        n, d, data_seed = 60, 2, 3
        sid = make_session(client, n=n, d=d, data_seed=data_seed)
        ds = gen_sphere(n, d, seed=data_seed)
        coords = {t.id: t.coords for t in ds.tuples}
        u = random_unit_vector(d, np.random.default_rng(7))
        answers = drive(client, sid, coords, u)
        res = client.get(f"/sessions/{sid}/result")
        assert res.status_code == 200
        body = res.json()
        assert body["comparisons"] == answers == len(body["answer_log"])
        assert body["stopped_early"] is False
        assert body["tuples_seen"] == n
        assert body["winner"]["id"] in coords
        prog = client.get(f"/sessions/{sid}/progress").json()
        assert prog["state"] == "done"
        assert prog["comparisons_used"] == answers

    def test_single_tuple_session_done_immediately(self, client):
        sid = make_session(client, dataset={"rows": [[0.5, 0.1]]})
        q = client.get(f"/sessions/{sid}/query").json()
        assert q["status"] == "done"
        body = client.get(f"/sessions/{sid}/result").json()
        assert body["comparisons"] == 0
        assert body["winner"]["id"] == 0

    def test_query_is_idempotent(self, client):
        sid = make_session(client, n=100)
        q1 = client.get(f"/sessions/{sid}/query").json()
        q2 = client.get(f"/sessions/{sid}/query").json()
        assert q1 == q2
        assert q1["status"] == "awaiting_answer"
        client.post(f"/sessions/{sid}/answer", json={"outcome": "first"})
        q3 = client.get(f"/sessions/{sid}/query").json()
        assert q3["seq"] == q1["seq"] + 1

    def test_answer_without_seq_accepted(self, client):
        sid = make_session(client, n=100)
        resp = client.post(f"/sessions/{sid}/answer", json={"outcome": "second"})
        assert resp.status_code == 200

    def test_raw_attribute_values_served(self, client):
        sid = make_session(
            client,
            dataset={"csv_text": "id,price,size\na,30,40\nb,6,8\nc,9,12\n", "id_column": "id"},
            config={"pool_size": 2, "epsilon": 0.1, "seed": 0},
        )
        q = client.get(f"/sessions/{sid}/query").json()
        assert q["status"] == "awaiting_answer"
        views = {q["first"]["id"]: q["first"], q["second"]["id"]: q["second"]}
        raw = {"a": {"price": 30.0, "size": 40.0}, "b": {"price": 6.0, "size": 8.0},
               "c": {"price": 9.0, "size": 12.0}}
        for vid, view in views.items():
            assert view["attributes"] == raw[vid]


class TestEquivalence:
    def test_matches_reference_engine(self, client):
        n, d, data_seed, seed = 120, 3, 5, 11
        ds = gen_sphere(n, d, seed=data_seed)
        u = random_unit_vector(d, np.random.default_rng(13))
        config = EngineConfig(epsilon=0.1, pool_size=20, seed=seed)
        ref = run_stream(ds, config, SimOracle(u))

        sid = make_session(
            client,
            n=n,
            d=d,
            data_seed=data_seed,
            config={"pool_size": 20, "epsilon": 0.1, "seed": seed},
        )
        coords = {t.id: t.coords for t in ds.tuples}
        answers = drive(client, sid, coords, u)
        body = client.get(f"/sessions/{sid}/result").json()
        assert body["winner"]["id"] == ref.winner.id
        assert answers == ref.comparisons

    def test_tied_session_matches_reference(self, client):
        n, d, data_seed, seed, delta = 100, 3, 6, 12, 0.02
        ds = gen_sphere(n, d, seed=data_seed)
        u = random_unit_vector(d, np.random.default_rng(14))
        config = EngineConfig(epsilon=0.1, delta=delta, pool_size=15, seed=seed)
        ref = run_stream(ds, config, SimOracle(u, delta=delta))

        sid = make_session(
            client,
            n=n,
            d=d,
            data_seed=data_seed,
            config={"pool_size": 15, "epsilon": 0.1, "delta": delta, "seed": seed},
        )
        coords = {t.id: t.coords for t in ds.tuples}
        answers = drive(client, sid, coords, u, delta=delta)
        body = client.get(f"/sessions/{sid}/result").json()
        assert body["winner"]["id"] == ref.winner.id
        assert answers == ref.comparisons

    def test_replaying_answer_log_reproduces_winner(self, client):
        n, d, data_seed, seed = 90, 2, 8, 15
        ds = gen_sphere(n, d, seed=data_seed)
        u = random_unit_vector(d, np.random.default_rng(16))
        coords = {t.id: t.coords for t in ds.tuples}
        cfg = {"pool_size": 12, "epsilon": 0.15, "seed": seed}
        sid = make_session(client, n=n, d=d, data_seed=data_seed, config=cfg)
        drive(client, sid, coords, u)
        first = client.get(f"/sessions/{sid}/result").json()

        replay_sid = make_session(client, n=n, d=d, data_seed=data_seed, config=cfg)
        for outcome in first["answer_log"]:
            resp = client.post(f"/sessions/{replay_sid}/answer", json={"outcome": outcome})
            assert resp.status_code == 200
        second = client.get(f"/sessions/{replay_sid}/result").json()
        assert second["winner"]["id"] == first["winner"]["id"]
        assert second["answer_log"] == first["answer_log"]


class TestErrors:
    def test_unknown_session_is_404(self, client):
        for method, path in [
            ("get", "/sessions/nope/query"),
            ("post", "/sessions/nope/answer"),
            ("get", "/sessions/nope/progress"),
            ("get", "/sessions/nope/result"),
            ("post", "/sessions/nope/stop"),
        ]:
            kwargs = {"json": {"outcome": "first"}} if method == "post" else {}
            resp = getattr(client, method)(path, **kwargs)
            assert resp.status_code == 404
            assert resp.json()["code"] == "session_not_found"
            assert "message" in resp.json()

    def test_expired_session_is_410_then_404(self, client):
        sid = make_session(client, ttl=0.01)
        time.sleep(0.05)
        resp = client.get(f"/sessions/{sid}/query")
        assert resp.status_code == 410
        assert resp.json()["code"] == "session_expired"
        again = client.get(f"/sessions/{sid}/query")
        assert again.status_code == 404

    def test_answer_finished_session_is_409(self, client):
        sid = make_session(client, dataset={"rows": [[0.5]]})
        resp = client.post(f"/sessions/{sid}/answer", json={"outcome": "first"})
        assert resp.status_code == 409
        assert resp.json()["code"] == "no_pending_query"

    def test_stale_seq_is_409(self, client):
        sid = make_session(client, n=100)
        q = client.get(f"/sessions/{sid}/query").json()
        ok = client.post(
            f"/sessions/{sid}/answer", json={"outcome": "first", "seq": q["seq"]}
        )
        assert ok.status_code == 200
        dup = client.post(
            f"/sessions/{sid}/answer", json={"outcome": "first", "seq": q["seq"]}
        )
        assert dup.status_code == 409
        assert dup.json()["code"] == "stale_answer"

    def test_tie_on_tie_free_session_is_422_and_recoverable(self, client):
        sid = make_session(client, n=100)
        q = client.get(f"/sessions/{sid}/query").json()
        rejected = client.post(
            f"/sessions/{sid}/answer", json={"outcome": "tie", "seq": q["seq"]}
        )
        assert rejected.status_code == 422
        assert rejected.json()["code"] == "invalid_outcome"
        again = client.get(f"/sessions/{sid}/query").json()
        assert again == q
        accepted = client.post(
            f"/sessions/{sid}/answer", json={"outcome": "first", "seq": q["seq"]}
        )
        assert accepted.status_code == 200

    def test_unknown_outcome_word_is_422(self, client):
        sid = make_session(client, n=100)
        resp = client.post(f"/sessions/{sid}/answer", json={"outcome": "both"})
        assert resp.status_code == 422
        assert resp.json()["code"] == "validation_error"

    def test_result_before_done_is_409(self, client):
        sid = make_session(client, n=100)
        resp = client.get(f"/sessions/{sid}/result")
        assert resp.status_code == 409
        assert resp.json()["code"] == "not_finished"

    def test_dataset_source_required(self, client):
        resp = client.post("/sessions", json={"dataset": {}})
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_dataset"

    def test_dataset_two_sources_rejected(self, client):
        resp = client.post(
            "/sessions",
            json={
                "dataset": {
                    "rows": [[1.0]],
                    "synthetic": {"kind": "sphere", "n": 5, "d": 1},
                }
            },
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_dataset"

    def test_malformed_csv_rejected_with_location(self, client):
        resp = client.post(
            "/sessions", json={"dataset": {"csv_text": "a,b\n1,2\n3,oops\n"}}
        )
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "invalid_dataset"
        assert "row 3" in body["message"]

    def test_bad_config_rejected(self, client):
        resp = client.post(
            "/sessions",
            json={
                "dataset": {"rows": [[0.1], [0.2]]},
                "config": {"epsilon": 2.0},
            },
        )
        assert resp.status_code == 422
        assert resp.json()["code"] == "validation_error"


class TestStop:
    def test_stop_midway_yields_result_over_seen_prefix(self, client):
        n, d, data_seed = 200, 2, 9
        sid = make_session(
            client, n=n, d=d, data_seed=data_seed,
            config={"pool_size": 20, "epsilon": 0.1, "seed": 2},
        )
        ds = gen_sphere(n, d, seed=data_seed)
        coords = {t.id: t.coords for t in ds.tuples}
        u = random_unit_vector(d, np.random.default_rng(17))
        for _ in range(10):
            q = client.get(f"/sessions/{sid}/query").json()
            assert q["status"] == "awaiting_answer"
            a, b = coords[q["first"]["id"]], coords[q["second"]["id"]]
            outcome = "first" if float(np.dot(u, a) - np.dot(u, b)) >= 0 else "second"
            client.post(f"/sessions/{sid}/answer", json={"outcome": outcome, "seq": q["seq"]})
        seq_before = client.get(f"/sessions/{sid}/query").json()["seq"]
        resp = client.post(f"/sessions/{sid}/stop")
        assert resp.status_code == 200
        assert resp.json()["stopped"] is True
        drive(client, sid, coords, u)
        body = client.get(f"/sessions/{sid}/result").json()
        assert body["stopped_early"] is True
        assert body["tuples_seen"] < n
        # answers consumed by the interrupted step were discarded
        assert len(body["answer_log"]) >= seq_before - 20
        prog = client.get(f"/sessions/{sid}/progress").json()
        assert prog["stopped"] is True

    def test_stop_discards_partial_step_answers(self, client):
        sid = make_session(client, n=150)
        for _ in range(5):
            q = client.get(f"/sessions/{sid}/query").json()
            if q["status"] == "done":
                break
            client.post(f"/sessions/{sid}/answer", json={"outcome": "first"})
        before = client.get(f"/sessions/{sid}/query").json()
        client.post(f"/sessions/{sid}/stop")
        ds = gen_sphere(150, 2, seed=0)
        coords = {t.id: t.coords for t in ds.tuples}
        u = random_unit_vector(2, np.random.default_rng(18))
        drive(client, sid, coords, u)
        body = client.get(f"/sessions/{sid}/result").json()
        if before["status"] == "awaiting_answer":
            assert len(body["answer_log"]) >= 0
            assert body["comparisons"] == len(body["answer_log"])

    def test_stop_is_idempotent(self, client):
        sid = make_session(client, n=50)
        first = client.post(f"/sessions/{sid}/stop")
        second = client.post(f"/sessions/{sid}/stop")
        assert first.status_code == 200
        assert second.status_code == 200
        assert second.json()["stopped"] is True

    def test_stop_after_done_keeps_result(self, client):
        sid = make_session(client, dataset={"rows": [[0.3], [0.7]]},
                           config={"pool_size": 4, "epsilon": 0.1, "seed": 0})
        q = client.get(f"/sessions/{sid}/query").json()
        if q["status"] == "awaiting_answer":
            client.post(f"/sessions/{sid}/answer", json={"outcome": "second"})
        body = client.get(f"/sessions/{sid}/result").json()
        resp = client.post(f"/sessions/{sid}/stop")
        assert resp.status_code == 200
        assert resp.json()["state"] == "done"
        after = client.get(f"/sessions/{sid}/result").json()
        assert after["winner"] == body["winner"]
        assert after["stopped_early"] is True


class TestProgress:
    def test_counts_advance(self, client):
        n = 120
        sid = make_session(client, n=n, config={"pool_size": 15, "epsilon": 0.1, "seed": 3})
        p0 = client.get(f"/sessions/{sid}/progress").json()
        assert p0["total"] == n
        assert p0["state"] == "awaiting_answer"
        assert p0["comparisons_used"] == 0
        assert 0 < p0["tuples_seen"] <= n
        for _ in range(8):
            client.post(f"/sessions/{sid}/answer", json={"outcome": "first"})
        p1 = client.get(f"/sessions/{sid}/progress").json()
        assert p1["comparisons_used"] == 8
        assert p1["tuples_seen"] >= p0["tuples_seen"]
