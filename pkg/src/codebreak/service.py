"""HTTP session service: humans and remote agents play over the same endpoints.

Versioned under /v1: create a session, fetch the byte-exact prompt for the
current step, post raw response text, read the transcript, list setups and
runs, start benchmark runs, health. Per-session actions are strictly ordered
(a busy session rejects concurrent actions) and every event is fsynced to the
session log before the response goes out, so a restarted server resumes every
session exactly where it was. No response exposes the secret code, active
criteria, or the permutation before the game ends.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Optional, Union

from fastapi import Depends, FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .catalog import Catalog, default_catalog
from .protocol import Strategy, TemplatePack, load_template_pack
from .session import ProtocolSession, rebuild_session
from .setups import GameSetup
from .store import DataStore, StorageError
from .transcripts import Transcript


class CreateSessionRequest(BaseModel):
    setup_id: str
    participant: str = Field(default="human", pattern=r"^(human|agent:[\w.:-]+)$")
    strategy: str = Field(default="cot", pattern=r"^(oa|cot)$")


class ActionRequest(BaseModel):
    text: str
    reasoning_note: Optional[str] = None  # human UI free-text reasoning


class StartRunRequest(BaseModel):
    batch_id: str
    agent: str
    strategy: str = Field(default="cot", pattern=r"^(oa|cot)$")
    parallelism: int = 1
    seed: int = 0


class _LiveSession:
    def __init__(self, session_id: str, session: ProtocolSession):
        self.session_id = session_id
        self.session = session
        self.lock = threading.Lock()
        self.persisted = 0  # transcript events already on disk


def _public_payload(live: _LiveSession) -> dict:
    session = live.session
    state = session.state
    return {
        "session_id": live.session_id,
        "setup_id": session.setup.setup_id,
        "mode": session.setup.mode.value,
        "difficulty": session.setup.difficulty.value,
        "strategy": session.strategy.value,
        "phase": state.phase.value,
        "round_number": state.round_number,
        "queries_this_round": state.queries_this_round,
        "queries_remaining": max(0, 3 - state.queries_this_round),
        "slot_count": state.slot_count,
        "feedback": [
            {"round": f.round_number, "slot": f.queried_slot, "result": f.result}
            for f in state.history
        ],
        "finished": session.finished,
        "outcome": session.outcome(),
    }


def create_app(
    data_dir: Union[str, Path],
    catalog: Optional[Catalog] = None,
    pack: Optional[TemplatePack] = None,
    token: Optional[str] = None,
    ui_dir: Optional[Union[str, Path]] = None,
) -> FastAPI:
    store = DataStore(data_dir)
    catalog = catalog or default_catalog()
    pack = pack or load_template_pack()
    sessions: dict[str, _LiveSession] = {}
    sessions_guard = threading.Lock()
    app = FastAPI(title="codebreak session service", version="1")

    def check_token(request: Request) -> None:
        if token is None:
            return
        supplied = request.headers.get("authorization", "")
        if supplied != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="bad or missing token")

    def persist_new_events(live: _LiveSession) -> None:
        events = live.session.transcript.events
        fresh = events[live.persisted:]
        if fresh:
            store.append_session_events(live.session_id, fresh)
            live.persisted = len(events)

    def get_live(session_id: str) -> _LiveSession:
        with sessions_guard:
            live = sessions.get(session_id)
            if live is not None:
                return live
        # Not in memory: rebuild from the persisted log (e.g. after a restart).
        try:
            records = store.load_session_events(session_id)
        except StorageError:
            raise HTTPException(status_code=404, detail=f"no session {session_id}") from None
        meta, events = records[0], records[1:]
        setup = store.find_setup(meta["setup_id"], catalog)
        transcript = Transcript(
            setup_id=setup.setup_id,
            mode=setup.mode.value,
            strategy=meta["strategy"],
            agent=meta["participant"],
            seed=setup.seed,
            difficulty=setup.difficulty.value,
            catalog_version=setup.catalog_version,
            template_checksum=pack.checksum,
            events=events,
        )
        transcript._seq = max((e.get("seq", 0) for e in events), default=0)
        session = rebuild_session(
            setup, Strategy(meta["strategy"]), pack, transcript, participant=meta["participant"]
        )
        live = _LiveSession(session_id, session)
        live.persisted = len(events)
        with sessions_guard:
            return sessions.setdefault(session_id, live)

    @app.get("/v1/health")
    def health() -> dict:
        return {
            "status": "ok",
            "catalog_version": catalog.version,
            "template_checksum": pack.checksum,
        }

    @app.get("/v1/setups", dependencies=[Depends(check_token)])
    def list_setups() -> dict:
        batches = {}
        for batch_id in store.list_batches():
            batches[batch_id] = [
                {
                    "setup_id": s.setup_id,
                    "mode": s.mode.value,
                    "difficulty": s.difficulty.value,
                    "verifiers": len(s.cards),
                }
                for s in store.load_batch(batch_id, catalog)
            ]
        return {"batches": batches}

    @app.post("/v1/sessions", status_code=201, dependencies=[Depends(check_token)])
    def create_session(body: CreateSessionRequest) -> dict:
        try:
            setup: GameSetup = store.find_setup(body.setup_id, catalog)
        except StorageError:
            raise HTTPException(status_code=404, detail=f"no setup {body.setup_id}") from None
        session_id = uuid.uuid4().hex[:12]
        session = ProtocolSession(
            setup, Strategy(body.strategy), pack, participant=body.participant
        )
        live = _LiveSession(session_id, session)
        store.append_session_events(
            session_id,
            [
                {
                    "setup_id": body.setup_id,
                    "participant": body.participant,
                    "strategy": body.strategy,
                }
            ],
        )
        persist_new_events(live)
        with sessions_guard:
            sessions[session_id] = live
        return {**_public_payload(live), "prompt": session.current_prompt()}

    @app.get("/v1/sessions/{session_id}/prompt", dependencies=[Depends(check_token)])
    def get_prompt(session_id: str) -> dict:
        live = get_live(session_id)
        return {**_public_payload(live), "prompt": live.session.current_prompt()}

    @app.post("/v1/sessions/{session_id}/actions", dependencies=[Depends(check_token)])
    def post_action(session_id: str, body: ActionRequest) -> dict:
        live = get_live(session_id)
        if not live.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="session is processing another action")
        try:
            if live.session.finished:
                raise HTTPException(status_code=409, detail="session already finished")
            text = body.text
            if body.reasoning_note:
                live.session.transcript.append("note", text=body.reasoning_note)
            result = live.session.submit_text(text)
            persist_new_events(live)  # durable before the client sees the ack
            payload = _public_payload(live)
            payload.update(
                {
                    "kind": result.kind,
                    "prompt": result.prompt,
                    "last_feedback": (
                        {
                            "round": result.feedback.round_number,
                            "slot": result.feedback.queried_slot,
                            "result": result.feedback.result,
                        }
                        if result.feedback
                        else None
                    ),
                }
            )
            return payload
        finally:
            live.lock.release()

    @app.get("/v1/sessions/{session_id}/transcript", dependencies=[Depends(check_token)])
    def get_transcript(session_id: str) -> dict:
        live = get_live(session_id)
        return {
            "session_id": session_id,
            "header": live.session.transcript.header(),
            "events": live.session.transcript.events,
        }

    @app.get("/v1/runs", dependencies=[Depends(check_token)])
    def list_runs() -> dict:
        return {"runs": store.list_runs()}

    @app.post("/v1/runs", status_code=202, dependencies=[Depends(check_token)])
    def start_run(body: StartRunRequest) -> dict:
        from .bench import run_benchmark

        if body.batch_id not in store.list_batches():
            raise HTTPException(status_code=404, detail=f"no batch {body.batch_id}")
        run_id = f"run-{uuid.uuid4().hex[:10]}"
        store.create_run(
            run_id,
            {
                "batch_id": body.batch_id,
                "agent": body.agent,
                "strategy": body.strategy,
                "seed": body.seed,
                "parallelism": body.parallelism,
                "catalog_version": catalog.version,
                "template_checksum": pack.checksum,
            },
        )

        def work() -> None:
            try:
                run_benchmark(
                    store,
                    body.batch_id,
                    body.agent,
                    Strategy(body.strategy),
                    catalog,
                    pack,
                    seed=body.seed,
                    parallelism=body.parallelism,
                    run_id=run_id,
                )
            except Exception:
                store.finish_run(run_id, status="failed")

        threading.Thread(target=work, daemon=True).start()
        return {"run_id": run_id, "status": "running"}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so /v1 routes take precedence; html=True serves index.html
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    app.state.store = store
    app.state.sessions = sessions
    return app
