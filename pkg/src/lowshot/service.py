"""HTTP labeling service: the estimation loop with a human answering queries.

Each session owns a pool (without ground truth — that's what the humans
are for), a config, and a live estimation loop. The service hands out the
current batch, accepts labels in any-size chunks, advances the loop when a
batch completes, and reports the combined estimate. Sessions persist as one
canonical-JSON file each (atomic write-rename), so a restart resumes every
session exactly where it stopped, including the sampler's generator state.

The service adds no numerics of its own: an oracle-driven client hitting
this API reproduces the in-process runner's records bit for bit.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .acis import AcisConfig, AcisSession
from .errors import (
    AlreadyLabeledError,
    InvalidLabelError,
    LowshotError,
    NoEstimateYetError,
    NotFoundError,
    SchemaMismatchError,
    SessionCompleteError,
    SessionExistsError,
    StorageError,
    UnknownItemError,
    ValidationError,
)
from .pool import ScoredPool, pool_from_items

SCHEMA_VERSION = "lowshot-session-v1"

_STATUS_BY_ERROR = {
    NotFoundError: 404,
    AlreadyLabeledError: 409,
    SessionCompleteError: 409,
    NoEstimateYetError: 409,
    SessionExistsError: 409,
    ValidationError: 400,
    UnknownItemError: 400,
    InvalidLabelError: 400,
    SchemaMismatchError: 400,
    StorageError: 500,
}

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def canonical_json(doc: dict) -> bytes:
    """Stable byte encoding: sorted keys, no whitespace."""
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


@dataclass
class ServiceSession:
    """One persisted labeling session."""

    session_id: str
    created_at: str
    updated_at: str
    pool: ScoredPool
    acis: AcisSession

    @property
    def state(self) -> str:
        return "complete" if self.acis.complete else "awaiting_labels"

    def to_doc(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "session_id": self.session_id,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "pool": {"items": self.pool.to_items()},
            "session": self.acis.to_state(),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ServiceSession":
        if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_VERSION:
            raise SchemaMismatchError(
                f"expected schema {SCHEMA_VERSION!r}, got {doc.get('schema')!r}")
        session_id = doc.get("session_id", "")
        if not _SESSION_ID_RE.match(str(session_id)):
            raise ValidationError("session_id must be 1-64 characters of [A-Za-z0-9_-]")
        try:
            pool = pool_from_items(doc["pool"]["items"]).without_labels()
            acis = AcisSession.from_state(pool, doc["session"])
            return cls(session_id=str(session_id), created_at=str(doc["created_at"]),
                       updated_at=str(doc["updated_at"]), pool=pool, acis=acis)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed session document: {exc}") from exc

    # -- API payloads --------------------------------------------------------

    def progress(self) -> dict:
        labeled = len(self.acis.labels)
        if self.acis.pending is not None:
            labeled += len(self.acis.pending.new_labels)
        g = var = None
        if self.acis.records:
            g, var = self.acis.estimate()
        return {
            "labels_used": labeled,
            "budget": self.acis.config.budget,
            "iteration": self.acis.iteration,
            "state": self.state,
            "g": g,
            "var": var,
        }

    def batch_items(self) -> list[dict]:
        pending = self.acis.pending
        if pending is None:
            return []
        items = []
        for idx in pending.fresh:
            item = {
                "id": self.pool.item_ids[idx],
                "score": float(self.pool.scores[idx]),
                "predicted": int(self.pool.predicted[idx]),
                "labeled": idx in pending.new_labels,
            }
            if self.pool.extras is not None:
                for key, value in self.pool.extras[idx].items():
                    item.setdefault(key, value)
            items.append(item)
        return items


class SessionStore:
    """One canonical-JSON file per session, written atomically."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, ServiceSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.json"

    def exists(self, session_id: str) -> bool:
        return session_id in self._sessions or self._path(session_id).exists()

    def save(self, session: ServiceSession, payload: bytes | None = None) -> None:
        """Persist atomically; ``payload`` overrides the serialized bytes.

        Imports pass the received document verbatim so a later export is
        byte-identical to the original one.
        """
        if payload is None:
            payload = canonical_json(session.to_doc())
        path = self._path(session.session_id)
        try:
            fd, tmp = tempfile.mkstemp(dir=self.data_dir, prefix=".tmp-", suffix=".json")
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageError(f"could not persist session: {exc}") from exc
        self._sessions[session.session_id] = session

    def get(self, session_id: str) -> ServiceSession:
        if session_id in self._sessions:
            return self._sessions[session_id]
        if not _SESSION_ID_RE.match(session_id):
            raise NotFoundError(f"no session {session_id!r}")
        path = self._path(session_id)
        if not path.exists():
            raise NotFoundError(f"no session {session_id!r}")
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"could not read session {session_id!r}: {exc}") from exc
        session = ServiceSession.from_doc(doc)
        self._sessions[session_id] = session
        return session

    def raw_bytes(self, session_id: str) -> bytes:
        self.get(session_id)  # ensure it exists and parses
        try:
            return self._path(session_id).read_bytes()
        except OSError as exc:
            raise StorageError(f"could not read session {session_id!r}: {exc}") from exc


def create_app(data_dir=None) -> FastAPI:
    """Build the service around a session directory."""
    store = SessionStore(Path(data_dir) if data_dir is not None
                         else Path(os.environ.get("LOWSHOT_DATA_DIR", "lowshot-sessions")))
    app = FastAPI(title="lowshot labeling service", version="0.1.0")
    app.state.store = store

    @app.exception_handler(LowshotError)
    def _lowshot_error(request: Request, exc: LowshotError):
        status = 500
        for klass, code in _STATUS_BY_ERROR.items():
            if isinstance(exc, klass):
                status = code
                break
        return JSONResponse(status_code=status,
                            content={"error": exc.code, "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        if "pool" not in payload or "config" not in payload:
            raise ValidationError("payload must contain 'pool' and 'config'")
        pool_spec = payload["pool"]
        if not isinstance(pool_spec, dict) or "items" not in pool_spec:
            raise ValidationError("pool must be an object with an 'items' list")
        pool = pool_from_items(pool_spec["items"]).without_labels()
        try:
            config = AcisConfig(**payload["config"])
        except TypeError as exc:
            raise ValidationError(f"bad config: {exc}") from exc
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        try:
            acis = AcisSession(pool, config)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        now = _now()
        session = ServiceSession(session_id=uuid.uuid4().hex, created_at=now,
                                 updated_at=now, pool=pool, acis=acis)
        with store.lock(session.session_id):
            store.save(session)
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/batch")
    def get_batch(session_id: str):
        with store.lock(session_id):
            session = store.get(session_id)
            if session.acis.complete:
                raise SessionCompleteError("the labeling budget is spent")
            return {"items": session.batch_items(), "progress": session.progress()}

    @app.post("/sessions/{session_id}/labels")
    def submit_labels(session_id: str, payload: dict = Body(...)):
        labels = payload.get("labels")
        if not isinstance(labels, list) or not labels:
            raise ValidationError("payload must contain a nonempty 'labels' list")
        with store.lock(session_id):
            session = store.get(session_id)
            if session.acis.complete:
                raise SessionCompleteError("the labeling budget is spent")
            id_to_index = {item_id: i for i, item_id in enumerate(session.pool.item_ids)}
            by_index: dict[int, int] = {}
            for entry in labels:
                if not isinstance(entry, dict) or "id" not in entry or "label" not in entry:
                    raise ValidationError("each label entry needs 'id' and 'label'")
                item_id = entry["id"]
                if item_id not in id_to_index:
                    raise UnknownItemError(f"unknown item id {item_id!r}")
                idx = id_to_index[item_id]
                if idx in by_index:
                    raise AlreadyLabeledError(f"item {item_id!r} appears twice in this request")
                label = entry["label"]
                if label not in (0, 1):
                    raise InvalidLabelError(f"label for {item_id!r} must be 0 or 1")
                by_index[idx] = int(label)
            session.acis.submit_labels(by_index)
            session.updated_at = _now()
            store.save(session)
            return {"progress": session.progress()}

    @app.get("/sessions/{session_id}/estimate")
    def get_estimate(session_id: str):
        with store.lock(session_id):
            session = store.get(session_id)
            if not session.acis.records:
                raise NoEstimateYetError("no completed batch yet")
            g, var = session.acis.estimate()
            return {
                "g_combined": g,
                "var_combined": var,
                "per_iteration": [
                    {"i": r.iteration, "g": r.g_hat, "var": r.estimate_var,
                     "batch_size": r.batch_size}
                    for r in session.acis.records
                ],
            }

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str):
        with store.lock(session_id):
            return Response(content=store.raw_bytes(session_id),
                            media_type="application/json")

    @app.post("/sessions/import", status_code=201)
    def import_session(payload: dict = Body(...)):
        session = ServiceSession.from_doc(payload)
        with store.lock(session.session_id):
            if store.exists(session.session_id):
                raise SessionExistsError(f"session {session.session_id!r} already exists")
            store.save(session, payload=canonical_json(payload))
        return {"session_id": session.session_id}

    return app


def serve(port: int = 8000, data_dir=None, host: str = "127.0.0.1") -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="info")
