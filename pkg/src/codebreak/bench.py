"""Benchmark orchestration: drive a whole setup batch and persist everything.

Runs are resumable: a game counts as done once its transcript (with outcome)
is on disk, so a killed run restarted with the same run id picks up exactly
the unfinished games and never duplicates a session. Agent infrastructure
failures forfeit the affected game; the run keeps going.
"""

from __future__ import annotations

import json
import time
import uuid
from typing import Optional

from .analytics import compute_metrics, export
from .protocol import Strategy, TemplatePack
from .runner import make_agent_factory, run_batch, summarize
from .store import DataStore


def run_benchmark(
    store: DataStore,
    batch_id: str,
    agent_spec: str,
    strategy: Strategy,
    catalog,
    pack: TemplatePack,
    seed: int = 0,
    parallelism: int = 1,
    run_id: Optional[str] = None,
) -> str:
    """Play every setup in the batch; returns the run id."""
    strategy = Strategy(strategy)
    setups = store.load_batch(batch_id, catalog)
    if run_id is None:
        run_id = f"run-{time.strftime('%Y%m%dT%H%M%S')}-{uuid.uuid4().hex[:6]}"
    run_dir = store.run_dir(run_id)
    if not (run_dir / "run.json").exists():
        store.create_run(
            run_id,
            {
                "batch_id": batch_id,
                "agent": agent_spec,
                "strategy": strategy.value,
                "seed": seed,
                "parallelism": parallelism,
                "catalog_version": catalog.version,
                "template_checksum": pack.checksum,
            },
        )

    done = store.completed_setup_ids(run_id)
    pending = [s for s in setups if s.setup_id not in done]
    factory = make_agent_factory(agent_spec)
    run_batch(
        pending,
        factory,
        strategy,
        pack,
        seed=seed,
        parallelism=parallelism,
        on_finish=lambda transcript: store.save_transcript(run_id, transcript),
    )

    transcripts = store.load_transcripts(run_id)
    summaries = [summarize(t) for t in transcripts if t.outcome() is not None]
    metrics = compute_metrics(summaries)
    (run_dir / "metrics.json").write_text(export(metrics, "json"))
    (run_dir / "metrics.csv").write_text(export(metrics, "csv") + "\n")
    (run_dir / "summaries.json").write_text(
        json.dumps([s.__dict__ for s in summaries], indent=2, sort_keys=True)
    )
    store.finish_run(run_id)
    return run_id
