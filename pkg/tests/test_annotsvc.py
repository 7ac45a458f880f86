import json
import random
import threading

import pytest

from clauserank import bws
from clauserank.annotsvc import AnnotationService, create_app
from clauserank.btrank import fit_bradley_terry
from clauserank.errors import InvalidPick, LeaseExpired, NoSuchAssignment, NoWorkRemaining


def _tuples(n_sentences=16, seed=0):
    return bws.generate_tuples(list(range(n_sentences)), seed=seed, contract_id="c1", party="Tenant")


def _texts(n=16):
    return {"c1": {i: f"Tenant clause {i}." for i in range(n)}}


@pytest.fixture
def service(tmp_path):
    return AnnotationService(_tuples(), tmp_path / "log.jsonl", sentence_texts=_texts())


# --- assignment and submission ----------------------------------------------


def test_fresh_service_assigns_pending(service):
    assignment, payload = service.next_assignment("ann1")
    assert assignment.state == "pending"
    assert len(payload["members"]) == 4
    assert len(payload["sentences"]) == 4
    assert payload["sentences"][0].startswith("Tenant clause")


def test_same_annotator_reissued_same_lease(service):
    a1, _ = service.next_assignment("ann1")
    a2, _ = service.next_assignment("ann1")
    assert a1.tuple_id == a2.tuple_id


def test_submit_appends_one_line(service, tmp_path):
    assignment, payload = service.next_assignment("ann1")
    service.submit("ann1", assignment.tuple_id, payload["members"][0], payload["members"][3])
    lines = (tmp_path / "log.jsonl").read_text().strip().splitlines()
    assert len(lines) == 1
    rec = json.loads(lines[0])
    assert rec["tuple_id"] == assignment.tuple_id


def test_submit_best_equals_worst_rejected(service, tmp_path):
    assignment, payload = service.next_assignment("ann1")
    with pytest.raises(InvalidPick):
        service.submit("ann1", assignment.tuple_id, payload["members"][0], payload["members"][0])
    assert (tmp_path / "log.jsonl").read_text() == ""


def test_submit_idempotent_duplicate(service, tmp_path):
    assignment, payload = service.next_assignment("ann1")
    best, worst = payload["members"][0], payload["members"][1]
    r1 = service.submit("ann1", assignment.tuple_id, best, worst)
    r2 = service.submit("ann1", assignment.tuple_id, best, worst)
    assert not r1["duplicate"] and r2["duplicate"]
    assert len((tmp_path / "log.jsonl").read_text().strip().splitlines()) == 1


def test_submit_conflicting_resubmission_rejected(service):
    assignment, payload = service.next_assignment("ann1")
    m = payload["members"]
    service.submit("ann1", assignment.tuple_id, m[0], m[1])
    with pytest.raises(NoSuchAssignment):
        service.submit("ann1", assignment.tuple_id, m[2], m[3])


def test_submit_without_assignment(service):
    tid = _tuples()[0].tuple_id
    with pytest.raises(NoSuchAssignment):
        service.submit("ghost", tid, 0, 1)


def test_no_work_remaining_after_all_seen(tmp_path):
    tuples = _tuples()
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    done = 0
    while True:
        try:
            assignment, payload = service.next_assignment("solo")
        except NoWorkRemaining:
            break
        service.submit("solo", assignment.tuple_id, payload["members"][0], payload["members"][1])
        done += 1
    assert done == len(tuples)


def test_lease_expiry(tmp_path):
    now = [1000.0]
    service = AnnotationService(
        _tuples(), tmp_path / "log.jsonl", lease_seconds=60, clock=lambda: now[0]
    )
    assignment, payload = service.next_assignment("ann1")
    now[0] += 120.0
    with pytest.raises(LeaseExpired):
        service.submit("ann1", assignment.tuple_id, payload["members"][0], payload["members"][1])
    # expired lease frees the slot for others
    a2, _ = service.next_assignment("ann2")
    assert a2 is not None


def test_lease_prevents_third_slot(tmp_path):
    # 2 slots per tuple: with only one tuple assignable, a third annotator waits
    tuples = _tuples()[:1]
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    service.next_assignment("a1")
    service.next_assignment("a2")
    with pytest.raises(NoWorkRemaining):
        service.next_assignment("a3")


def test_fewest_completed_first(tmp_path):
    tuples = _tuples()[:3]
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    a, p = service.next_assignment("a1")
    service.submit("a1", a.tuple_id, p["members"][0], p["members"][1])
    # a2 should be steered to a tuple with 0 submissions, not the one with 1
    b, _ = service.next_assignment("a2")
    assert b.tuple_id != a.tuple_id


# --- progress ----------------------------------------------------------------


def test_progress_counters(tmp_path):
    tuples = _tuples()[:4]
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    assert service.progress() == {
        "tuples_total": 4,
        "fully_annotated": 0,
        "partially_annotated": 0,
        "per_annotator": {},
    }
    a, p = service.next_assignment("a1")
    service.submit("a1", a.tuple_id, p["members"][0], p["members"][1])
    prog = service.progress()
    assert prog["partially_annotated"] == 1 and prog["fully_annotated"] == 0
    b, q = service.next_assignment("a2")
    if b.tuple_id != a.tuple_id:
        # steer a2 onto the same tuple by finishing its current lease first
        service.submit("a2", b.tuple_id, q["members"][0], q["members"][1])
        while True:
            b, q = service.next_assignment("a2")
            if b.tuple_id == a.tuple_id:
                break
            service.submit("a2", b.tuple_id, q["members"][0], q["members"][1])
    service.submit("a2", b.tuple_id, q["members"][0], q["members"][1])
    prog = service.progress()
    assert prog["fully_annotated"] >= 1
    assert prog["per_annotator"]["a1"] == 1


# --- concurrency ---------------------------------------------------------------


def test_concurrent_annotators_never_exceed_slots(tmp_path):
    tuples = bws.generate_tuples(list(range(50)), seed=7, contract_id="c1", party="Tenant")[:50]
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    errors = []

    def worker(name, seed):
        rng = random.Random(seed)
        try:
            while True:
                try:
                    assignment, payload = service.next_assignment(name)
                except NoWorkRemaining:
                    return
                best, worst = rng.sample(payload["members"], 2)
                service.submit(name, assignment.tuple_id, best, worst)
        except Exception as e:  # noqa: BLE001
            errors.append(e)

    threads = [threading.Thread(target=worker, args=(f"ann{i}", i)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    counts = {}
    for ann in bws.read_annotations(tmp_path / "log.jsonl"):
        counts[ann.tuple_id] = counts.get(ann.tuple_id, 0) + 1
    assert counts, "some annotations should have been submitted"
    assert max(counts.values()) <= 2


# --- crash-restart -------------------------------------------------------------


def test_log_replay_reconstructs_progress(tmp_path):
    tuples = _tuples()
    log = tmp_path / "log.jsonl"
    service = AnnotationService(tuples, log)
    rng = random.Random(5)
    for name in ("a1", "a2"):
        for _ in range(6):
            assignment, payload = service.next_assignment(name)
            best, worst = rng.sample(payload["members"], 2)
            service.submit(name, assignment.tuple_id, best, worst)
    before = service.progress()
    reborn = AnnotationService(tuples, log)
    assert reborn.progress() == before


def test_export_round_trips_through_bws(tmp_path):
    tuples = _tuples()
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    rng = random.Random(11)
    for name in ("a1", "a2"):
        while True:
            try:
                assignment, payload = service.next_assignment(name)
            except NoWorkRemaining:
                break
            best, worst = rng.sample(payload["members"], 2)
            service.submit(name, assignment.tuple_id, best, worst)
    path = service.export_log()
    annotations = bws.read_annotations(path)
    assert len(annotations) == 2 * len(tuples)
    pairs = bws.tuples_to_pairs(annotations, tuples)
    assert len(pairs) == 5 * len(annotations)
    table = fit_bradley_terry(pairs)
    assert sum(table.scores.values()) == pytest.approx(1.0)


def test_export_empty_service(tmp_path):
    service = AnnotationService(_tuples(), tmp_path / "log.jsonl")
    assert service.export_log().read_text() == ""


# --- HTTP layer ----------------------------------------------------------------


@pytest.fixture
def client(tmp_path):
    from fastapi.testclient import TestClient

    service = AnnotationService(_tuples(), tmp_path / "log.jsonl", sentence_texts=_texts())
    return TestClient(create_app(service))


def test_http_next_and_submit(client):
    r = client.get("/api/tasks/next", params={"annotator": "a1"})
    assert r.status_code == 200
    payload = r.json()
    body = {
        "tuple_id": payload["tuple_id"],
        "annotator_id": "a1",
        "best": payload["members"][0],
        "worst": payload["members"][2],
    }
    r2 = client.post("/api/annotations", json=body)
    assert r2.status_code == 200
    assert r2.json()["status"] == "ok"


def test_http_invalid_pick(client):
    payload = client.get("/api/tasks/next", params={"annotator": "a1"}).json()
    body = {
        "tuple_id": payload["tuple_id"],
        "annotator_id": "a1",
        "best": payload["members"][0],
        "worst": payload["members"][0],
    }
    r = client.post("/api/annotations", json=body)
    assert r.status_code == 400
    assert r.json()["error"] == "invalid_pick"


def test_http_progress_and_export(client):
    r = client.get("/api/progress")
    assert r.status_code == 200
    assert r.json()["tuples_total"] == 24
    r2 = client.get("/api/export")
    assert r2.status_code == 200


def test_http_no_work(tmp_path):
    from fastapi.testclient import TestClient

    tuples = _tuples()[:1]
    service = AnnotationService(tuples, tmp_path / "log.jsonl")
    client = TestClient(create_app(service))
    client.get("/api/tasks/next", params={"annotator": "a1"})
    client.get("/api/tasks/next", params={"annotator": "a2"})
    r = client.get("/api/tasks/next", params={"annotator": "a3"})
    assert r.status_code == 404
    assert r.json()["error"] == "no_work_remaining"
