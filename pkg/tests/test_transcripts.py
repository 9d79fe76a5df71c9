"""Transcript serialization, corruption detection, and replay verdicts."""

import json

import pytest

from codebreak.protocol import Strategy
from codebreak.session import ProtocolSession
from codebreak.transcripts import (
    Transcript,
    TranscriptError,
    load_transcript,
    replay,
    save_transcript,
    transcript_from_lines,
    transcript_to_lines,
)
from conftest import FIXTURE_SECRET, make_fixture_setup


def finished_transcript(pack, win=True):
    setup = make_fixture_setup()
    session = ProtocolSession(setup, Strategy.OA, pack)
    session.submit_text("<CHOICE>: BLUE=2, YELLOW=4, PURPLE=3")
    session.submit_text("<CHOICE>: 2")
    session.submit_text("<CHOICE>: SKIP")
    code = FIXTURE_SECRET.text() if win else "BLUE=1, YELLOW=1, PURPLE=1"
    session.submit_text(f"<CHOICE>: {code}")
    return setup, session.transcript


class TestSerialization:
    def test_round_trip(self, pack, tmp_path):
        _, transcript = finished_transcript(pack)
        path = tmp_path / "game.jsonl"
        save_transcript(transcript, path)
        loaded = load_transcript(path)
        assert loaded.setup_id == transcript.setup_id
        assert loaded.events == transcript.events

    def test_truncated_line_detected(self, pack, tmp_path):
        _, transcript = finished_transcript(pack)
        path = tmp_path / "game.jsonl"
        save_transcript(transcript, path)
        content = path.read_text()
        path.write_text(content[: len(content) - 30])  # cut mid-line
        with pytest.raises(TranscriptError, match="corrupt"):
            load_transcript(path)

    def test_tampered_record_detected(self, pack):
        _, transcript = finished_transcript(pack)
        lines = transcript_to_lines(transcript)
        wrapper = json.loads(lines[3])
        wrapper["r"]["text"] = "forged"
        lines[3] = json.dumps(wrapper, sort_keys=True)
        with pytest.raises(TranscriptError, match="checksum"):
            transcript_from_lines(lines)

    def test_missing_events_detected(self, pack):
        _, transcript = finished_transcript(pack)
        lines = transcript_to_lines(transcript)
        del lines[2]  # drop an interior event entirely
        with pytest.raises(TranscriptError, match="sequence"):
            transcript_from_lines(lines)

    def test_header_required(self):
        with pytest.raises(TranscriptError, match="header"):
            transcript_from_lines([])


class TestReplay:
    def test_untampered_transcript_ok(self, pack):
        setup, transcript = finished_transcript(pack)
        report = replay(transcript, setup)
        assert report.ok
        assert report.events_checked > 0

    def test_flipped_feedback_detected(self, pack):
        setup, transcript = finished_transcript(pack)
        for event in transcript.events:
            if event["event"] == "feedback":
                event["result"] = "PASS" if event["result"] == "FAIL" else "FAIL"
                break
        report = replay(transcript, setup)
        assert not report.ok
        assert "feedback mismatch" in report.divergence

    def test_flipped_outcome_detected(self, pack):
        setup, transcript = finished_transcript(pack, win=False)
        outcome = transcript.outcome()
        outcome["outcome"] = "won"
        report = replay(transcript, setup)
        assert not report.ok
        assert "outcome mismatch" in report.divergence

    def test_catalog_version_mismatch(self, pack):
        setup, transcript = finished_transcript(pack)
        transcript.catalog_version = "other-deck"
        report = replay(transcript, setup)
        assert not report.ok
        assert "catalog version" in report.divergence

    def test_forfeit_transcript_replays(self, pack):
        setup = make_fixture_setup()
        session = ProtocolSession(setup, Strategy.OA, pack)
        for _ in range(4):
            session.submit_text("garbage")
        assert session.outcome()["outcome"] == "forfeit"
        report = replay(session.transcript, setup)
        assert report.ok, report.divergence


class TestAccessors:
    def test_reasoning_blocks_only_with_reasoning(self, pack):
        setup = make_fixture_setup()
        session = ProtocolSession(setup, Strategy.COT, pack)
        session.submit_text("<REASONING>: start wide\n<CHOICE>: BLUE=1, YELLOW=1, PURPLE=1")
        session.submit_text("<REASONING>: check slot 2\n<CHOICE>: 2")
        blocks = session.transcript.reasoning_blocks()
        assert [b["reasoning"] for b in blocks] == ["start wide", "check slot 2"]

    def test_header_fields(self, pack):
        _, transcript = finished_transcript(pack)
        header = transcript.header()
        assert header["setup_id"] == "fixture-easy"
        assert header["mode"] == "classic"
        assert header["template_checksum"]
