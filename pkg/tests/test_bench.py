"""Benchmark orchestration: persistence, metrics, and crash resume."""

import json

import pytest

from codebreak.bench import run_benchmark
from codebreak.protocol import Strategy
from codebreak.setups import Mode, generate_batch
from codebreak.store import DataStore


@pytest.fixture
def store_with_batch(tmp_path, catalog):
    store = DataStore(tmp_path / "data")
    batch = generate_batch(Mode.CLASSIC, 2, 71, catalog)
    batch_id = store.save_batch(batch, seed=71)
    return store, batch_id, batch


class TestRunBenchmark:
    def test_oracle_run_writes_everything(self, store_with_batch, catalog, pack):
        store, batch_id, batch = store_with_batch
        run_id = run_benchmark(
            store, batch_id, "oracle", Strategy.COT, catalog, pack, seed=1
        )
        run_dir = store.run_dir(run_id)
        assert (run_dir / "metrics.json").exists()
        assert (run_dir / "metrics.csv").exists()
        summaries = json.loads((run_dir / "summaries.json").read_text())
        assert len(summaries) == len(batch)
        assert all(s["outcome"] == "won" for s in summaries)
        assert store.list_runs()[0]["status"] == "done"

    def test_parallel_run_same_game_count(self, store_with_batch, catalog, pack):
        store, batch_id, batch = store_with_batch
        run_id = run_benchmark(
            store, batch_id, "random", Strategy.OA, catalog, pack, seed=2, parallelism=4
        )
        assert len(store.load_transcripts(run_id)) == len(batch)

    def test_resume_completes_without_duplicates(self, store_with_batch, catalog, pack):
        """Kill-and-restart mid-run: identical final game count, no duplicated sessions."""
        from codebreak.runner import make_agent_factory, play_game
        from codebreak.setups import derive_seed

        store, batch_id, batch = store_with_batch
        run_id = "run-resume-test"
        store.create_run(run_id, {"batch_id": batch_id, "agent": "random"})

        # simulate a crashed run: two finished games, one partial file
        factory = make_agent_factory("random")
        for setup in batch[:2]:
            agent = factory(setup, Strategy.OA, derive_seed(5, setup.setup_id))
            store.save_transcript(run_id, play_game(setup, agent, Strategy.OA, pack))
        partial = store.run_dir(run_id) / "transcripts" / f"{batch[2].setup_id}.jsonl"
        done_file = store.run_dir(run_id) / "transcripts" / f"{batch[0].setup_id}.jsonl"
        partial.write_text(done_file.read_text()[:120])

        before = {p.name: p.read_bytes() for p in (store.run_dir(run_id) / "transcripts").glob("*.jsonl")
                  if p.name != partial.name}

        resumed = run_benchmark(
            store, batch_id, "random", Strategy.OA, catalog, pack, seed=5, run_id=run_id
        )
        assert resumed == run_id
        transcripts = store.load_transcripts(run_id)
        assert len(transcripts) == len(batch)  # identical final game count
        assert len({t.setup_id for t in transcripts}) == len(batch)  # no duplicates
        for name, body in before.items():
            path = store.run_dir(run_id) / "transcripts" / name
            assert path.read_bytes() == body  # finished games untouched
        summaries = json.loads((store.run_dir(run_id) / "summaries.json").read_text())
        assert len(summaries) == len(batch)
