"""HTTP API behaviour via the in-process test client."""
import pytest
from fastapi.testclient import TestClient

from trailset.ingest import build_citation_fixture, demo_dataset
from trailset.service import create_app


@pytest.fixture()
def client():
    app = create_app({"demo": demo_dataset()}, serve_ui=False)
    return TestClient(app)


def new_session(client, dataset="demo"):
    resp = client.post("/v1/sessions", json={"datasetId": dataset})
    assert resp.status_code == 200
    return resp.json()["sessionId"]


class TestSessions:
    def test_create_and_eval(self, client):
        sid = new_session(client)
        resp = client.post(
            f"/v1/sessions/{sid}/eval",
            json={"script": 's1 = d.refine(equals(:Author, a1))'},
        )
        body = resp.json()
        assert resp.status_code == 200
        assert body["errors"] == []
        assert body["stateIds"] == [f"{sid}.d", f"{sid}.s1"]

    def test_unknown_dataset_404(self, client):
        resp = client.post("/v1/sessions", json={"datasetId": "nope"})
        assert resp.status_code == 404

    def test_parse_error_400_with_span(self, client):
        sid = new_session(client)
        resp = client.post(f"/v1/sessions/{sid}/eval", json={"script": "s1 = ..x"})
        assert resp.status_code == 400
        assert "1:" in resp.json()["detail"]

    def test_eval_errors_reported_in_band(self, client):
        sid = new_session(client)
        resp = client.post(
            f"/v1/sessions/{sid}/eval",
            json={"script": "s1 = d.refine(true())\ns2 = ghost.pivot(:Author)"},
        )
        body = resp.json()
        assert resp.status_code == 200
        assert len(body["errors"]) == 1
        assert "ghost" in body["errors"][0]["message"]
        assert any(x.endswith(".s1") for x in body["stateIds"])

    def test_identical_payloads_identical_extensions(self, client):
        script = "s1 = d.refine(equals(:Author, a2)).group(:Author)"
        ids = []
        for _ in range(2):
            sid = new_session(client)
            client.post(f"/v1/sessions/{sid}/eval", json={"script": script})
            resp = client.get(f"/v1/states/{sid}.s1/items")
            ids.append(resp.json()["children"])
        assert ids[0] == ids[1]


class TestStateItems:
    def test_nested_tree_rendering(self, client):
        sid = new_session(client)
        client.post(
            f"/v1/sessions/{sid}/eval",
            json={"script": "g = d.refine(equals(:Author, a1)).group(:Author)"},
        )
        resp = client.get(f"/v1/states/{sid}.g/items")
        body = resp.json()
        # {p1, p2} grouped by author: a1 holds both, a2 holds p2
        assert body["total"] == 2
        assert body["root"]["id"] == "rs"
        top = {c["item"]["id"]: c for c in body["children"]}
        assert {cc["item"]["id"] for cc in top["a1"]["children"]} == {"p1", "p2"}
        assert {cc["item"]["id"] for cc in top["a2"]["children"]} == {"p2"}

    def test_paging_is_consistent_with_full_list(self, client):
        sid = new_session(client)
        client.post(f"/v1/sessions/{sid}/eval", json={"script": "x = d.refine(true())"})
        full = client.get(f"/v1/states/{sid}.x/items", params={"limit": 100}).json()
        paged = []
        offset = 0
        while True:
            page = client.get(
                f"/v1/states/{sid}.x/items", params={"offset": offset, "limit": 3}
            ).json()
            if not page["children"]:
                break
            paged.extend(page["children"])
            offset += 3
        assert paged == full["children"]

    def test_unknown_state_404(self, client):
        sid = new_session(client)
        assert client.get(f"/v1/states/{sid}.zz/items").status_code == 404


class TestTrail:
    def test_fresh_session_trail_empty(self, client):
        sid = new_session(client)
        body = client.get(f"/v1/sessions/{sid}/trail").json()
        assert body == {"nodes": [], "edges": []}

    def test_trail_carries_intentions_and_edges(self, client):
        sid = new_session(client)
        client.post(
            f"/v1/sessions/{sid}/eval",
            json={"script": "a = d.refine(true())\nb = a.pivot(:Author)\nc = a.intersect(a)"},
        )
        body = client.get(f"/v1/sessions/{sid}/trail").json()
        ids = [n["id"] for n in body["nodes"]]
        assert ids == ["d", "a", "b", "c"]
        assert ["a", "b"] in body["edges"]
        texts = {n["id"]: n["intentionText"] for n in body["nodes"]}
        assert "pivot" in texts["b"]


class TestSchemaAndGrammar:
    def test_schema_endpoint(self, client):
        body = client.get("/v1/datasets/demo/schema").json()
        by_id = {r["id"]: r for r in body["relations"]}
        assert by_id[":Author"]["pairs"] == 6

    def test_grammar_check_preset(self, client):
        resp = client.post(
            "/v1/grammar/check",
            json={"grammar": "v1", "expr": "refine(refine(s0))"},
        )
        body = resp.json()
        assert body["accepted"] is True
        assert body["derivation"]

    def test_grammar_check_inline_text(self, client):
        resp = client.post(
            "/v1/grammar/check",
            json={"grammar": "S -> pivot(S | s0)", "expr": "pivot(pivot(s0))"},
        )
        assert resp.json()["accepted"] is True

    def test_grammar_check_bad_expr_400(self, client):
        resp = client.post(
            "/v1/grammar/check", json={"grammar": "v1", "expr": "refine(("}
        )
        assert resp.status_code == 400

    def test_operator_manifest(self, client):
        body = client.get("/v1/manifest/operators").json()
        names = {op["name"] for op in body["operators"]}
        assert {"pivot", "refine", "group", "rank", "correlate", "branch"} <= names
        assert "equals" in body["predicates"]


class TestReplay:
    def test_replay_endpoint(self, client):
        app = create_app(
            {"cites": build_citation_fixture(seed=1, scale=50).dataset},
            serve_ui=False,
        )
        c = TestClient(app)
        sid = new_session(c, "cites")
        c.post(
            f"/v1/sessions/{sid}/eval",
            json={"script": "s1 = p.pivot(:cite)\ns2 = s1.pivot(:year)"},
        )
        resp = c.post(
            f"/v1/sessions/{sid}/replay",
            json={"stateIds": ["s1", "s2"], "substitutions": {}},
        )
        assert resp.status_code == 200
        assert len(resp.json()["stateIds"]) == 2


class TestConcurrencyModes:
    def test_reject_mode_409(self, demo=None):
        app = create_app({"demo": demo_dataset()}, queue_writes=False, serve_ui=False)
        client = TestClient(app)
        sid = new_session(client)
        entry = app.state.registry.sessions[sid]
        entry.lock.acquire()
        try:
            resp = client.post(
                f"/v1/sessions/{sid}/eval", json={"script": "x = d.refine(true())"}
            )
            assert resp.status_code == 409
        finally:
            entry.lock.release()

    def test_queued_mode_serialises(self):
        app = create_app({"demo": demo_dataset()}, queue_writes=True, serve_ui=False)
        client = TestClient(app)
        sid = new_session(client)
        import threading

        results = []

        def run(n):
            resp = client.post(
                f"/v1/sessions/{sid}/eval",
                json={"script": f"x{n} = d.refine(true())"},
            )
            results.append(resp.status_code)

        threads = [threading.Thread(target=run, args=(n,)) for n in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert results == [200, 200, 200, 200]
