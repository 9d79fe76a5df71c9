"""Transcript event logs and replay verification.

A transcript is the full record of one game: every prompt issued, every raw
response, the parsed actions, verifier feedback, retries, and the outcome.
Events carry a monotonic logical sequence number (wall-clock annotations are
ignored by equality) and serialize one JSON object per line with a per-line
CRC so truncation and tampering are detected on load.
"""

from __future__ import annotations

import json
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .dsl import Code
from .engine import (
    Action,
    GameState,
    Proposal,
    Skip,
    Submit,
    VerifierChoice,
    apply_action,
    new_session,
)
from .setups import GameSetup


class TranscriptError(ValueError):
    pass


def action_to_record(action: Action) -> dict:
    if isinstance(action, Proposal):
        return {"kind": "proposal", "code": list(action.code)}
    if isinstance(action, VerifierChoice):
        return {"kind": "choice", "slot": action.slot}
    if isinstance(action, Submit):
        return {"kind": "submit", "code": list(action.code)}
    if isinstance(action, Skip):
        return {"kind": "skip"}
    raise TypeError(f"unknown action {action!r}")


def record_to_action(record: dict) -> Action:
    kind = record.get("kind")
    if kind == "proposal":
        return Proposal(Code(*record["code"]))
    if kind == "choice":
        return VerifierChoice(record["slot"])
    if kind == "submit":
        return Submit(Code(*record["code"]))
    if kind == "skip":
        return Skip()
    raise TranscriptError(f"unknown action kind {kind!r}")


@dataclass
class Transcript:
    """Event list plus the header identifying the run it belongs to."""

    setup_id: str
    mode: str
    strategy: str
    agent: str
    seed: Optional[int] = None
    difficulty: Optional[str] = None
    catalog_version: Optional[str] = None
    template_checksum: Optional[str] = None
    events: list[dict] = field(default_factory=list)
    _seq: int = 0

    def append(self, event: str, **fields: object) -> dict:
        self._seq += 1
        record = {"event": event, "seq": self._seq, "at": time.time(), **fields}
        self.events.append(record)
        return record

    # -- typed accessors --------------------------------------------------

    def actions(self) -> list[tuple[dict, Action]]:
        return [
            (e, record_to_action(e["action"]))
            for e in self.events
            if e["event"] == "action"
        ]

    def feedbacks(self) -> list[dict]:
        return [e for e in self.events if e["event"] == "feedback"]

    def retries(self) -> list[dict]:
        return [e for e in self.events if e["event"] == "retry"]

    def outcome(self) -> Optional[dict]:
        for event in reversed(self.events):
            if event["event"] == "outcome":
                return event
        return None

    def reasoning_blocks(self) -> list[dict]:
        """Reasoning text captured with each parsed action (CoT runs only)."""
        return [
            e
            for e in self.events
            if e["event"] == "action" and e.get("reasoning") is not None
        ]

    def header(self) -> dict:
        return {
            "event": "header",
            "setup_id": self.setup_id,
            "mode": self.mode,
            "strategy": self.strategy,
            "agent": self.agent,
            "seed": self.seed,
            "difficulty": self.difficulty,
            "catalog_version": self.catalog_version,
            "template_checksum": self.template_checksum,
        }


def _crc(payload: str) -> int:
    return zlib.crc32(payload.encode())


def transcript_to_lines(transcript: Transcript) -> list[str]:
    lines = []
    for record in [transcript.header()] + transcript.events:
        payload = json.dumps(record, sort_keys=True)
        lines.append(json.dumps({"crc": _crc(payload), "r": record}, sort_keys=True))
    return lines


def save_transcript(transcript: Transcript, path: Union[str, Path]) -> None:
    Path(path).write_text("\n".join(transcript_to_lines(transcript)) + "\n")


def transcript_from_lines(lines: Iterable[str]) -> Transcript:
    records = []
    for i, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        try:
            wrapper = json.loads(line)
            record = wrapper["r"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TranscriptError(f"corrupt transcript line {i + 1}: {exc}") from exc
        if _crc(json.dumps(record, sort_keys=True)) != wrapper.get("crc"):
            raise TranscriptError(f"checksum mismatch on transcript line {i + 1}")
        records.append(record)
    if not records or records[0].get("event") != "header":
        raise TranscriptError("transcript missing header record")
    header = records[0]
    transcript = Transcript(
        setup_id=header["setup_id"],
        mode=header["mode"],
        strategy=header["strategy"],
        agent=header["agent"],
        seed=header.get("seed"),
        difficulty=header.get("difficulty"),
        catalog_version=header.get("catalog_version"),
        template_checksum=header.get("template_checksum"),
        events=records[1:],
    )
    seqs = [e.get("seq") for e in transcript.events]
    if seqs != list(range(1, len(seqs) + 1)):
        raise TranscriptError("transcript event sequence has gaps")
    transcript._seq = len(seqs)
    return transcript


def load_transcript(path: Union[str, Path]) -> Transcript:
    return transcript_from_lines(Path(path).read_text().splitlines())


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    divergence: Optional[str] = None
    events_checked: int = 0


def replay(transcript: Transcript, setup: GameSetup) -> ReplayReport:
    """Re-simulate the parsed actions; verify every feedback and the outcome."""
    if transcript.setup_id != setup.setup_id:
        return ReplayReport(False, "transcript and setup ids differ")
    if (
        transcript.catalog_version is not None
        and transcript.catalog_version != setup.catalog_version
    ):
        return ReplayReport(
            False,
            f"catalog version mismatch: transcript {transcript.catalog_version!r}, "
            f"setup {setup.catalog_version!r}",
        )
    state: GameState = new_session(setup)
    checked = 0
    pending = [e for e in transcript.events if e["event"] in ("action", "feedback", "outcome")]
    i = 0
    while i < len(pending):
        event = pending[i]
        if event["event"] == "action":
            action = record_to_action(event["action"])
            try:
                state, feedback = apply_action(state, action)
            except Exception as exc:
                return ReplayReport(False, f"seq {event['seq']}: illegal action ({exc})", checked)
            checked += 1
            if feedback is not None:
                i += 1
                if i >= len(pending) or pending[i]["event"] != "feedback":
                    return ReplayReport(
                        False, f"seq {event['seq']}: query produced no feedback event", checked
                    )
                recorded = pending[i]
                if (
                    recorded["slot"] != feedback.queried_slot
                    or recorded["round"] != feedback.round_number
                    or recorded["result"] != feedback.result
                ):
                    return ReplayReport(
                        False,
                        f"seq {recorded['seq']}: feedback mismatch, recorded "
                        f"{recorded['result']} slot {recorded['slot']}, "
                        f"replay says {feedback.result} slot {feedback.queried_slot}",
                        checked,
                    )
                checked += 1
        elif event["event"] == "feedback":
            return ReplayReport(False, f"seq {event['seq']}: feedback without an action", checked)
        else:  # outcome
            recorded = event
            if recorded["outcome"] == "forfeit":
                if state.finished:
                    return ReplayReport(
                        False, f"seq {recorded['seq']}: forfeit recorded on a finished game", checked
                    )
            else:
                if not state.finished:
                    return ReplayReport(
                        False, f"seq {recorded['seq']}: outcome recorded before game end", checked
                    )
                if state.status.value != recorded["outcome"]:
                    return ReplayReport(
                        False,
                        f"seq {recorded['seq']}: outcome mismatch, recorded "
                        f"{recorded['outcome']}, replay says {state.status.value}",
                        checked,
                    )
                submitted = recorded.get("submitted")
                replayed = list(state.submitted) if state.submitted else None
                if submitted != replayed:
                    return ReplayReport(
                        False, f"seq {recorded['seq']}: submitted code mismatch", checked
                    )
            checked += 1
        i += 1
    return ReplayReport(True, None, checked)
