"""Durable storage: setup batches, session event logs, run artifacts.

Everything is plain files under one data directory, diffable and append-only:

    setups/<batch_id>.jsonl         content-addressed setup batches
    sessions/<session_id>.jsonl     one event per line, fsynced per append
    runs/<run_id>/run.json          run config and status
    runs/<run_id>/transcripts/      one transcript file per game
    runs/<run_id>/metrics.(json|csv)
    runs/<run_id>/judgments.jsonl

An action is acknowledged only after its events are flushed and fsynced, so
every acknowledged event survives a crash, and rebuild-from-log never
re-applies anything (the log itself is the source of truth).
"""

from __future__ import annotations

import hashlib
import json
import os
import zlib
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .catalog import Catalog
from .setups import GameSetup, batch_to_lines, load_batch
from .transcripts import Transcript, TranscriptError, transcript_from_lines, transcript_to_lines


class StorageError(RuntimeError):
    pass


def _fsync_write_lines(path: Path, lines: Sequence[str], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as handle:
        for line in lines:
            handle.write(line + "\n")
        handle.flush()
        os.fsync(handle.fileno())


class DataStore:
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        for sub in ("setups", "sessions", "runs"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # -- setup batches -----------------------------------------------------

    def save_batch(self, setups: Sequence[GameSetup], seed: Optional[int] = None) -> str:
        """Content-addressed: the batch id is a digest of the records."""
        lines = batch_to_lines(setups, seed=seed)
        batch_id = hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]
        path = self.root / "setups" / f"{batch_id}.jsonl"
        if not path.exists():
            _fsync_write_lines(path, lines)
        return batch_id

    def import_batch_file(self, source: Union[str, Path], catalog: Catalog) -> str:
        setups = load_batch(source, catalog)  # validates checksum and versions
        header = json.loads(Path(source).read_text().splitlines()[0])
        return self.save_batch(setups, seed=header.get("seed"))

    def load_batch(self, batch_id: str, catalog: Catalog) -> list[GameSetup]:
        path = self.root / "setups" / f"{batch_id}.jsonl"
        if not path.exists():
            raise StorageError(f"no batch {batch_id!r}")
        return load_batch(path, catalog)

    def list_batches(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "setups").glob("*.jsonl"))

    def find_setup(self, setup_id: str, catalog: Catalog) -> GameSetup:
        for batch_id in self.list_batches():
            for setup in self.load_batch(batch_id, catalog):
                if setup.setup_id == setup_id:
                    return setup
        raise StorageError(f"no setup {setup_id!r} in any stored batch")

    # -- session event logs ---------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.jsonl"

    def session_exists(self, session_id: str) -> bool:
        return self._session_path(session_id).exists()

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "sessions").glob("*.jsonl"))

    def append_session_events(self, session_id: str, records: Sequence[dict]) -> None:
        """Durable append; callers acknowledge only after this returns."""
        lines = []
        for record in records:
            payload = json.dumps(record, sort_keys=True)
            lines.append(json.dumps({"crc": zlib.crc32(payload.encode()), "r": record}, sort_keys=True))
        _fsync_write_lines(self._session_path(session_id), lines, append=True)

    def load_session_events(self, session_id: str) -> list[dict]:
        path = self._session_path(session_id)
        if not path.exists():
            raise StorageError(f"no session {session_id!r}")
        records = []
        for i, line in enumerate(path.read_text().splitlines()):
            if not line.strip():
                continue
            try:
                wrapper = json.loads(line)
                record = wrapper["r"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise StorageError(f"session {session_id} line {i + 1} corrupt: {exc}") from exc
            if zlib.crc32(json.dumps(record, sort_keys=True).encode()) != wrapper.get("crc"):
                raise StorageError(f"session {session_id} line {i + 1} checksum mismatch")
            records.append(record)
        return records

    # -- runs --------------------------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def create_run(self, run_id: str, config: dict) -> Path:
        path = self.run_dir(run_id)
        (path / "transcripts").mkdir(parents=True, exist_ok=True)
        record = dict(config, run_id=run_id, status="running")
        (path / "run.json").write_text(json.dumps(record, indent=2, sort_keys=True))
        return path

    def finish_run(self, run_id: str, status: str = "done") -> None:
        path = self.run_dir(run_id) / "run.json"
        record = json.loads(path.read_text())
        record["status"] = status
        path.write_text(json.dumps(record, indent=2, sort_keys=True))

    def list_runs(self) -> list[dict]:
        out = []
        for run_json in sorted((self.root / "runs").glob("*/run.json")):
            try:
                out.append(json.loads(run_json.read_text()))
            except json.JSONDecodeError:
                out.append({"run_id": run_json.parent.name, "status": "corrupt"})
        return out

    def save_transcript(self, run_id: str, transcript: Transcript) -> Path:
        path = self.run_dir(run_id) / "transcripts" / f"{transcript.setup_id}.jsonl"
        _fsync_write_lines(path, transcript_to_lines(transcript))
        return path

    def load_transcripts(self, run_id: str) -> list[Transcript]:
        out = []
        for path in sorted((self.run_dir(run_id) / "transcripts").glob("*.jsonl")):
            try:
                out.append(transcript_from_lines(path.read_text().splitlines()))
            except TranscriptError as exc:
                raise StorageError(f"{path.name}: {exc}") from exc
        return out

    def completed_setup_ids(self, run_id: str) -> set[str]:
        """Setups whose transcript is complete (outcome present); used for resume."""
        done = set()
        directory = self.run_dir(run_id) / "transcripts"
        if not directory.exists():
            return done
        for path in directory.glob("*.jsonl"):
            try:
                transcript = transcript_from_lines(path.read_text().splitlines())
            except TranscriptError:
                continue  # partial write from a crash; the game will be replayed
            if transcript.outcome() is not None:
                done.add(transcript.setup_id)
        return done
