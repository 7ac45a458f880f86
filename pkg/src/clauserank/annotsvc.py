"""Annotation assignment service: leases 4-tuples to annotators, validates and
persists best/worst picks, reports progress, exports the log.

Persistence is a single append-only JSON Lines log; all other state is an
in-memory index rebuilt from the log on startup, so a crash loses only leases
in flight. All mutations are serialized through one lock.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from pydantic import BaseModel

from . import bws
from .bws import BWSAnnotation, Tuple4
from .errors import LeaseExpired, NoSuchAssignment, NoWorkRemaining


class SubmitBody(BaseModel):
    tuple_id: str
    annotator_id: str
    best: int
    worst: int

log = logging.getLogger(__name__)

STATE_PENDING = "pending"
STATE_SUBMITTED = "submitted"
STATE_EXPIRED = "expired"

DEFAULT_ANNOTATIONS_PER_TUPLE = 2
DEFAULT_LEASE_SECONDS = 1800


@dataclass
class Assignment:
    tuple_id: str
    annotator_id: str
    state: str
    issued_at: float
    lease_seconds: int


class AnnotationService:
    def __init__(
        self,
        tuples: list[Tuple4],
        log_path,
        sentence_texts: dict[str, dict[int, str]] | None = None,
        annotations_per_tuple: int = DEFAULT_ANNOTATIONS_PER_TUPLE,
        lease_seconds: int = DEFAULT_LEASE_SECONDS,
        clock=time.time,
    ):
        self._lock = threading.Lock()
        self._clock = clock
        self._lease_seconds = lease_seconds
        self._per_tuple = annotations_per_tuple
        self._log_path = Path(log_path)
        self._tuples: dict[str, Tuple4] = {}
        self._order: list[str] = []
        for t in tuples:
            if t.tuple_id in self._tuples:
                raise ValueError(f"duplicate tuple id {t.tuple_id}")
            self._tuples[t.tuple_id] = t
            self._order.append(t.tuple_id)
        self._texts = sentence_texts or {}
        self._submitted: dict[str, dict[str, BWSAnnotation]] = {tid: {} for tid in self._order}
        self._leases: dict[str, dict[str, float]] = {tid: {} for tid in self._order}
        self._replay_log()

    def _replay_log(self):
        if not self._log_path.exists():
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_path.touch()
            return
        for ann in bws.read_annotations(self._log_path):
            tup = self._tuples.get(ann.tuple_id)
            if tup is None:
                log.warning("log entry for unknown tuple %s ignored", ann.tuple_id)
                continue
            bws.validate_annotation(tup, ann.best, ann.worst)
            self._submitted[ann.tuple_id].setdefault(ann.annotator_id, ann)

    def _expire_leases(self, now: float):
        for tid, leases in self._leases.items():
            for annotator, issued in list(leases.items()):
                if now - issued > self._lease_seconds:
                    del leases[annotator]

    def _payload(self, tup: Tuple4) -> dict:
        texts = self._texts.get(tup.contract_id, {})
        return {
            "tuple_id": tup.tuple_id,
            "contract_id": tup.contract_id,
            "party": tup.party,
            "members": list(tup.members),
            "sentences": [texts.get(m, "") for m in tup.members],
            "context": f"Contract {tup.contract_id}, judged for party {tup.party}",
        }

    def next_assignment(self, annotator_id: str) -> tuple[Assignment, dict]:
        """Lease the least-annotated tuple this annotator has not seen.

        An annotator holding an unexpired lease gets the same assignment back;
        NoWorkRemaining when every tuple is either done, held, or already
        annotated by this annotator."""
        with self._lock:
            now = self._clock()
            self._expire_leases(now)
            for tid in self._order:
                if annotator_id in self._leases[tid]:
                    issued = self._leases[tid][annotator_id]
                    return (
                        Assignment(tid, annotator_id, STATE_PENDING, issued, self._lease_seconds),
                        self._payload(self._tuples[tid]),
                    )
            candidates = [
                tid
                for tid in self._order
                if annotator_id not in self._submitted[tid]
                and len(self._submitted[tid]) + len(self._leases[tid]) < self._per_tuple
            ]
            if not candidates:
                raise NoWorkRemaining(f"no assignable tuple for {annotator_id!r}")
            tid = min(candidates, key=lambda t: (len(self._submitted[t]), self._order.index(t)))
            self._leases[tid][annotator_id] = now
            return (
                Assignment(tid, annotator_id, STATE_PENDING, now, self._lease_seconds),
                self._payload(self._tuples[tid]),
            )

    def submit(self, annotator_id: str, tuple_id: str, best, worst) -> dict:
        """Validate and persist a pick; idempotent for an exact duplicate."""
        with self._lock:
            tup = self._tuples.get(tuple_id)
            if tup is None:
                raise NoSuchAssignment(f"unknown tuple {tuple_id!r}")
            prior = self._submitted[tuple_id].get(annotator_id)
            if prior is not None:
                if prior.best == best and prior.worst == worst:
                    return {"status": "ok", "duplicate": True}
                raise NoSuchAssignment(f"{annotator_id!r} already submitted {tuple_id}")
            now = self._clock()
            lease = self._leases[tuple_id].get(annotator_id)
            if lease is None:
                raise NoSuchAssignment(f"no pending assignment of {tuple_id} for {annotator_id!r}")
            if now - lease > self._lease_seconds:
                del self._leases[tuple_id][annotator_id]
                raise LeaseExpired(f"lease on {tuple_id} expired for {annotator_id!r}")
            ann = bws.validate_annotation(
                tup, best, worst, annotator_id=annotator_id, timestamp=datetime.now(timezone.utc)
            )
            with open(self._log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(ann.to_record()) + "\n")
                fh.flush()
            self._submitted[tuple_id][annotator_id] = ann
            del self._leases[tuple_id][annotator_id]
            return {"status": "ok", "duplicate": False}

    def progress(self) -> dict:
        with self._lock:
            per_annotator: dict[str, int] = {}
            fully = partially = 0
            for tid in self._order:
                done = len(self._submitted[tid])
                if done >= self._per_tuple:
                    fully += 1
                elif done > 0:
                    partially += 1
                for annotator in self._submitted[tid]:
                    per_annotator[annotator] = per_annotator.get(annotator, 0) + 1
            return {
                "tuples_total": len(self._order),
                "fully_annotated": fully,
                "partially_annotated": partially,
                "per_annotator": dict(sorted(per_annotator.items())),
            }

    def export_log(self) -> Path:
        with self._lock:
            return self._log_path


def create_app(service: AnnotationService, static_dir=None):
    """FastAPI wrapper over the service; optionally serves the web UI bundle."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="clauserank annotation service")

    @app.get("/api/tasks/next")
    def next_task(annotator: str):
        try:
            assignment, payload = service.next_assignment(annotator)
        except NoWorkRemaining:
            return JSONResponse({"error": "no_work_remaining"}, status_code=404)
        payload["lease_seconds"] = assignment.lease_seconds
        payload["state"] = assignment.state
        return payload

    @app.post("/api/annotations")
    def submit(body: SubmitBody):
        from .errors import InvalidPick

        try:
            return service.submit(body.annotator_id, body.tuple_id, body.best, body.worst)
        except InvalidPick as e:
            return JSONResponse({"error": "invalid_pick", "detail": str(e)}, status_code=400)
        except LeaseExpired as e:
            return JSONResponse({"error": "lease_expired", "detail": str(e)}, status_code=410)
        except NoSuchAssignment as e:
            return JSONResponse({"error": "no_such_assignment", "detail": str(e)}, status_code=404)

    @app.get("/api/progress")
    def progress():
        return service.progress()

    @app.get("/api/export")
    def export():
        path = service.export_log()
        return PlainTextResponse(path.read_text(encoding="utf-8"), media_type="application/x-ndjson")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
