"""HTTP annotation service.

Serves blinded holdout examples to annotators, records votes, and exposes
the agreement report. Votes are durably appended to a JSONL log and
fsynced *before* the request is acknowledged; on restart the log is
replayed (first write wins), so a crash between write and ack leaves the
vote either absent or present exactly once.

Annotator blinding is enforced here: served example payloads are built
from :meth:`SessionExample.public_dict`, which has no label field.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .agreement import (
    AnnotationSession,
    DuplicateVoteError,
    IncompleteSessionError,
    SessionExample,
    agreement_report,
)
from .corpus import Label, NliExample


class VoteLog:
    """Append-only JSONL event log with replay."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, event: dict) -> None:
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, ensure_ascii=False) + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def replay(self) -> list[dict]:
        if not self.path.exists():
            return []
        events = []
        with open(self.path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    events.append(json.loads(line))
        return events


class AnnotationHub:
    """Session registry over one served corpus, with optional persistence."""

    def __init__(self, corpus: Sequence[NliExample], log: VoteLog | None = None):
        self.examples = {ex.id: SessionExample.from_example(ex) for ex in corpus}
        self.order = [ex.id for ex in corpus]
        self.sessions: dict[str, AnnotationSession] = {}
        self.log = log
        self._lock = threading.Lock()
        if log is not None:
            self._replay(log.replay())

    def _replay(self, events: list[dict]) -> None:
        for event in events:
            if event["event"] == "session":
                examples = [self.examples[i] for i in event["example_ids"]]
                self.sessions[event["session_id"]] = AnnotationSession(
                    event["session_id"], examples, event["annotators"]
                )
            elif event["event"] == "vote":
                session = self.sessions.get(event["session_id"])
                if session is None:
                    continue
                try:
                    session.vote(
                        event["example_id"], event["annotator"], Label.parse(event["label"])
                    )
                except DuplicateVoteError:
                    pass  # first write wins; a crash may have logged twice

    def create_session(
        self,
        annotators: Sequence[str],
        example_ids: Sequence[str] | None = None,
        session_id: str | None = None,
    ) -> AnnotationSession:
        with self._lock:
            sid = session_id or uuid.uuid4().hex[:12]
            if sid in self.sessions:
                raise ValueError(f"session {sid!r} already exists")
            ids = list(example_ids) if example_ids is not None else list(self.order)
            unknown = [i for i in ids if i not in self.examples]
            if unknown:
                raise KeyError(f"unknown example ids: {unknown[:5]}")
            session = AnnotationSession(sid, [self.examples[i] for i in ids], annotators)
            if self.log is not None:
                self.log.append(
                    {
                        "event": "session",
                        "session_id": sid,
                        "annotators": list(annotators),
                        "example_ids": ids,
                    }
                )
            self.sessions[sid] = session
            return session

    def vote(self, session_id: str, example_id: str, annotator: str, label: Label) -> None:
        with self._lock:
            session = self._session(session_id)
            # Validate before persisting so the log never contains rejected votes.
            if annotator not in session.annotators:
                raise KeyError(f"unknown annotator {annotator!r}")
            if example_id not in {ex.id for ex in session.examples}:
                raise KeyError(f"unknown example {example_id!r}")
            if (example_id, annotator) in session.votes:
                raise DuplicateVoteError(
                    f"{annotator!r} already voted on {example_id!r}"
                )
            if self.log is not None:
                self.log.append(
                    {
                        "event": "vote",
                        "session_id": session_id,
                        "example_id": example_id,
                        "annotator": annotator,
                        "label": label.value,
                    }
                )
            session.vote(example_id, annotator, label)

    def _session(self, session_id: str) -> AnnotationSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        return session


class CreateSessionBody(BaseModel):
    annotators: list[str]
    example_ids: list[str] | None = None
    session_id: str | None = None


class VoteBody(BaseModel):
    example_id: str
    annotator: str
    label: str


def create_app(corpus: Sequence[NliExample], log_path: str | Path | None = None) -> FastAPI:
    """Build the annotation service over one corpus file's examples."""
    hub = AnnotationHub(corpus, VoteLog(log_path) if log_path else None)
    app = FastAPI(title="nliforge annotation hub")
    app.state.hub = hub

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        try:
            session = hub.create_session(body.annotators, body.example_ids, body.session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "session_id": session.id,
            "n_examples": len(session.examples),
            "annotators": list(session.annotators),
        }

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str) -> dict:
        try:
            session = hub._session(session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "session_id": session.id,
            "total": len(session.examples),
            "annotators": list(session.annotators),
            "per_annotator_done": {a: session.progress(a) for a in session.annotators},
            "complete": session.complete,
        }

    @app.get("/sessions/{session_id}/next")
    def next_unlabeled(session_id: str, annotator: str) -> dict:
        try:
            session = hub._session(session_id)
            example = session.next_unlabeled(annotator)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "example": example.public_dict() if example else None,
            "done": session.progress(annotator),
            "total": len(session.examples),
        }

    @app.post("/sessions/{session_id}/votes", status_code=201)
    def submit_vote(session_id: str, body: VoteBody) -> dict:
        try:
            label = Label.parse(body.label)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            hub.vote(session_id, body.example_id, body.annotator, label)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except DuplicateVoteError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        session = hub._session(session_id)
        return {
            "recorded": True,
            "done": session.progress(body.annotator),
            "total": len(session.examples),
        }

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str) -> dict:
        try:
            session = hub._session(session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        try:
            return agreement_report(session).to_dict()
        except IncompleteSessionError as exc:
            raise HTTPException(
                status_code=409,
                detail={
                    "error": "session incomplete",
                    "missing": [list(pair) for pair in exc.missing],
                },
            )

    return app


def serve(
    corpus: Sequence[NliExample],
    host: str = "127.0.0.1",
    port: int = 8400,
    log_path: str | Path | None = None,
) -> None:
    import uvicorn

    uvicorn.run(create_app(corpus, log_path), host=host, port=port, log_level="warning")
