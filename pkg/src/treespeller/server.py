"""HTTP session service for interactive clients (the Web Speller).

Endpoints:
    POST /models              register a language model (corpus text or path)
    POST /channels            register a channel from confusion counts
    POST /sessions            create a session, returns the first query
    POST /sessions/{id}/input submit a symbol index or pointer angle
    GET  /sessions/{id}       full session snapshot

Sessions are strictly serialized per id; registered models and channels are
immutable and shared.  Input requests carry a client token so a flaky
pointer device can retry without double-applying evidence.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .alphabet import CorpusError, normalize_corpus
from .channel import CalibrationError, ConfusionMatrix, estimate_from_counts
from .engine import MODES, Session, SessionConfig
from .lm import WittenBellNgram
from .tree import leaf_records


class ModelRequest(BaseModel):
    corpus_text: str | None = None
    corpus_path: str | None = None
    order: int = 3


class ChannelRequest(BaseModel):
    counts: list[list[int]]
    smooth: bool = False
    angles: list[float] | None = None


class SessionRequest(BaseModel):
    lm_id: str
    channel_id: str
    n_leafs: int = 10
    alpha: float = 0.95
    mode: str = "multi"


class InputRequest(BaseModel):
    symbol_index: int | None = None
    angle_radians: float | None = None
    request_token: str = Field(default_factory=lambda: str(uuid.uuid4()))


@dataclass
class SessionEntry:
    session: Session
    created_at: float
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_payload: dict | None = None
    prev_tree: object | None = None
    seen_tokens: dict[str, dict] = field(default_factory=dict)


def nearest_symbol(angle: float, angles: np.ndarray) -> int:
    """Nearest registered symbol angle, circular; ties go to the lower index."""
    two_pi = 2.0 * np.pi
    diffs = np.abs((angles - angle + np.pi) % two_pi - np.pi)
    return int(np.argmin(diffs))


def create_app(
    session_ttl: float | None = None,
    default_alpha: float = 0.95,
    default_n_leafs: int = 10,
    default_mode: str = "multi",
) -> FastAPI:
    app = FastAPI(title="treespeller")
    models: dict[str, WittenBellNgram] = {}
    channels: dict[str, ConfusionMatrix] = {}
    sessions: dict[str, SessionEntry] = {}
    registry_lock = threading.Lock()
    data_dir = os.environ.get("TREESPELLER_DATA_DIR", ".")

    def get_entry(session_id: str) -> SessionEntry:
        entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        if session_ttl is not None and time.time() - entry.created_at > session_ttl:
            sessions.pop(session_id, None)
            raise HTTPException(status_code=409, detail="session expired")
        return entry

    def query_payload(session_id: str, entry: SessionEntry) -> dict:
        session = entry.session
        if session.decided:
            payload = {
                "session_id": session_id,
                "trial_index": len(session.history),
                "root_prefix": session.decided_text,
                "decided_text": session.decided_text,
                "leafs": [],
                "capacity_bits": session.capacity.capacity_bits,
                "expected_information_bits": 0.0,
            }
        else:
            query = session.outstanding if session.outstanding is not None else session.build_query()
            payload = {
                "session_id": session_id,
                "trial_index": query.trial_index,
                "root_prefix": query.root_prefix,
                "decided_text": session.decided_text,
                "leafs": leaf_records(
                    query.tree,
                    query.coding.assignment,
                    session.channel.symbol_angles,
                    entry.prev_tree,
                ),
                "capacity_bits": session.capacity.capacity_bits,
                "expected_information_bits": query.expected_information_bits,
            }
        entry.last_payload = payload
        return payload

    @app.post("/models")
    def register_model(req: ModelRequest) -> dict:
        if (req.corpus_text is None) == (req.corpus_path is None):
            raise HTTPException(status_code=422, detail="give exactly one of corpus_text, corpus_path")
        if req.order < 1:
            raise HTTPException(status_code=422, detail="order must be >= 1")
        if req.corpus_path is not None:
            path = os.path.join(data_dir, req.corpus_path)
            if not os.path.exists(path):
                raise HTTPException(status_code=404, detail=f"no corpus at {path}")
            raw = open(path, encoding="utf-8", errors="replace").read()
        else:
            raw = req.corpus_text
        try:
            text = normalize_corpus(raw)
        except CorpusError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        model = WittenBellNgram(order=req.order).fit(text)
        lm_id = str(uuid.uuid4())
        with registry_lock:
            models[lm_id] = model
        return {"lm_id": lm_id, "order": req.order}

    @app.post("/channels")
    def register_channel(req: ChannelRequest) -> dict:
        counts = np.asarray(req.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise HTTPException(status_code=422, detail="counts must be a square matrix")
        try:
            matrix = estimate_from_counts(counts, smooth=req.smooth)
        except (CalibrationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        matrix = matrix.with_angles(np.asarray(req.angles) if req.angles is not None else None)
        channel_id = str(uuid.uuid4())
        with registry_lock:
            channels[channel_id] = matrix
        return {"channel_id": channel_id, "n_symbols": matrix.n_symbols}

    @app.post("/sessions")
    def create_session(req: SessionRequest) -> dict:
        model = models.get(req.lm_id)
        if model is None:
            raise HTTPException(status_code=404, detail=f"unknown lm {req.lm_id}")
        channel = channels.get(req.channel_id)
        if channel is None:
            raise HTTPException(status_code=404, detail=f"unknown channel {req.channel_id}")
        if req.mode not in MODES:
            raise HTTPException(status_code=422, detail=f"mode must be one of {MODES}")
        try:
            config = SessionConfig(n_leafs=req.n_leafs, alpha=req.alpha, mode=req.mode)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        session = Session(model, channel, config)
        session_id = str(uuid.uuid4())
        entry = SessionEntry(session=session, created_at=time.time())
        with registry_lock:
            sessions[session_id] = entry
        with entry.lock:
            payload = query_payload(session_id, entry)
        return {"session": session_handle(session_id, entry), "query": payload}

    def session_handle(session_id: str, entry: SessionEntry) -> dict:
        session = entry.session
        return {
            "session_id": session_id,
            "created_at": entry.created_at,
            "config": {
                "n_leafs": session.config.n_leafs,
                "alpha": session.config.alpha,
                "mode": session.config.mode,
            },
            "state": "decided" if session.decided else "awaiting_input",
        }

    @app.post("/sessions/{session_id}/input")
    def submit_input(session_id: str, req: InputRequest) -> dict:
        entry = get_entry(session_id)
        with entry.lock:
            if req.request_token in entry.seen_tokens:
                return entry.seen_tokens[req.request_token]
            session = entry.session
            if session.decided:
                raise HTTPException(status_code=409, detail="session already decided")
            if (req.symbol_index is None) == (req.angle_radians is None):
                raise HTTPException(
                    status_code=422, detail="give exactly one of symbol_index, angle_radians"
                )
            if req.symbol_index is not None:
                x_hat = req.symbol_index
                if not 0 <= x_hat < session.channel.n_symbols:
                    raise HTTPException(status_code=422, detail="symbol index out of range")
            else:
                if session.channel.symbol_angles is None:
                    raise HTTPException(status_code=422, detail="channel has no symbol angles")
                x_hat = nearest_symbol(req.angle_radians, session.channel.symbol_angles)
            if session.outstanding is None:
                session.build_query()
            entry.prev_tree = session.outstanding.tree
            session.update(x_hat)
            payload = query_payload(session_id, entry)
            entry.seen_tokens[req.request_token] = payload
            return payload

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        entry = get_entry(session_id)
        with entry.lock:
            session = entry.session
            return {
                "session": session_handle(session_id, entry),
                "decided_text": session.decided_text,
                "history_length": len(session.history),
                "history": session.event_records(),
                "top_beliefs": session.top_beliefs(),
                "last_payload": entry.last_payload,
            }

    return app


def main_app() -> FastAPI:
    """Module-level factory for `uvicorn treespeller.server:main_app`."""
    return create_app()
