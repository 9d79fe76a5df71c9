#!/usr/bin/env python3
"""Kill-restart integrity drive against a real session-service process.

Generates a tiny batch into a scratch data dir, starts `codebreak serve`,
plays a proposal plus two queries over HTTP, SIGKILLs the server, restarts
on the same data dir, and asserts nothing was lost or duplicated before
finishing the game. Scans every pre-completion response for secret fields.

Usage: python tools/kill_restart_drive.py [base_port]
"""

import json
import os
import signal
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codebreak.catalog import default_catalog  # noqa: E402
from codebreak.setups import Mode, generate_batch  # noqa: E402
from codebreak.store import DataStore  # noqa: E402


def start_server(data_dir: Path, port: int) -> tuple[subprocess.Popen, str]:
    log = open(data_dir / f"server-{port}.log", "w")
    proc = subprocess.Popen(
        [sys.executable, "-m", "codebreak.cli", "serve",
         "--data-dir", str(data_dir), "--port", str(port)],
        stdout=log,
        stderr=subprocess.STDOUT,
    )
    base = f"http://127.0.0.1:{port}"
    for _ in range(120):
        try:
            if httpx.get(f"{base}/v1/health", timeout=1).status_code == 200:
                return proc, base
        except httpx.TransportError:
            time.sleep(0.25)
    raise RuntimeError(f"server on port {port} did not come up")


def scan(text: str, secret_text: str) -> None:
    for marker in (secret_text, '"secret', "active_ind", '"permutation"'):
        assert marker not in text, f"secret leaked pre-completion: {marker!r}"


def main() -> None:
    base_port = int(sys.argv[1]) if len(sys.argv) > 1 else 8771
    data_dir = Path(tempfile.mkdtemp(prefix="codebreak-killdrive-"))
    catalog = default_catalog()
    batch = generate_batch(Mode.CLASSIC, 1, 11, catalog)
    DataStore(data_dir).save_batch(batch, seed=11)
    setup = batch[0]
    secret_text = setup.secret.text()

    proc, base = start_server(data_dir, base_port)
    created = httpx.post(
        f"{base}/v1/sessions",
        json={"setup_id": setup.setup_id, "participant": "human"},
    )
    sid = created.json()["session_id"]
    scan(created.text, secret_text)

    moves = [
        {"text": "<CHOICE>: BLUE=1, YELLOW=1, PURPLE=1", "reasoning_note": "opening probe"},
        {"text": "<CHOICE>: 2"},
        {"text": "<CHOICE>: 3"},
    ]
    for body in moves:
        response = httpx.post(f"{base}/v1/sessions/{sid}/actions", json=body)
        assert response.status_code == 200, response.text
        scan(response.text, secret_text)
    events_before = httpx.get(f"{base}/v1/sessions/{sid}/transcript").json()["events"]
    prompt_before = httpx.get(f"{base}/v1/sessions/{sid}/prompt").json()["prompt"]

    os.kill(proc.pid, signal.SIGKILL)
    proc.wait()
    print(f"killed server pid {proc.pid} with SIGKILL after {len(moves)} acknowledged actions")

    proc2, base2 = start_server(data_dir, base_port + 1)
    try:
        resumed = httpx.get(f"{base2}/v1/sessions/{sid}/prompt").json()
        assert resumed["prompt"] == prompt_before, "prompt changed across restart"
        assert resumed["queries_this_round"] == 2
        events_after = httpx.get(f"{base2}/v1/sessions/{sid}/transcript").json()["events"]
        assert events_after == events_before, "events lost or duplicated across restart"
        print(f"restart: {len(events_after)} events intact, prompt byte-identical")

        # end questioning; skip round; re-propose; skip questioning; submit
        final = None
        for text in ["<CHOICE>: SKIP", "<CHOICE>: SKIP", f"<CHOICE>: {secret_text}",
                     "<CHOICE>: SKIP", f"<CHOICE>: {secret_text}"]:
            response = httpx.post(f"{base2}/v1/sessions/{sid}/actions", json={"text": text})
            assert response.status_code == 200, response.text
            final = response.json()
        assert final["finished"] and final["outcome"]["outcome"] == "won", final
        events = httpx.get(f"{base2}/v1/sessions/{sid}/transcript").json()["events"]
        seqs = [e["seq"] for e in events]
        assert seqs == list(range(1, len(seqs) + 1)), "sequence gap"
        print(f"finished across restart: won, contiguous seq 1..{len(seqs)}")
        print("kill-restart drive: OK")
    finally:
        os.kill(proc2.pid, signal.SIGKILL)
        proc2.wait()


if __name__ == "__main__":
    main()
