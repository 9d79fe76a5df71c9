"""Operator command line: generate, run, eval, report, replay, serve.

Every command prints its effective configuration (flags, seeds, versions)
first, so any artifact can be reproduced from its log line. Exit codes:
0 success, 2 validation problem, 3 IO problem, 4 infrastructure problem.
`run` exits 0 even when games are lost; CI should assert on metrics files.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .analytics import compute_metrics, error_path_rates, export, fic_paths, persistence_curve
from .catalog import CatalogError, default_catalog, load_catalog
from .judging import Category, extract_pattern, judge_deterministic, judge_external
from .protocol import Strategy, load_template_pack
from .runner import summarize
from .setups import (
    GenerationExhausted,
    Mode,
    generate_batch,
    load_batch,
    save_batch,
    validate_batch,
)
from .store import DataStore
from .transcripts import load_transcript, replay as replay_transcript

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_INFRA = 4


def _echo_config(command: str, **values: object) -> None:
    click.echo(f"config: {json.dumps({'command': command, **values}, sort_keys=True)}")


def _load_catalog(path: str | None):
    try:
        return load_catalog(path) if path else default_catalog()
    except CatalogError as exc:
        click.echo(f"catalog error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _apply_config(ctx: click.Context, _param: click.Parameter, path: str | None) -> str | None:
    """Config-file alternative to flags: {"<command>": {"<flag>": value}}."""
    if not path:
        return path
    try:
        document = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file: {exc}")
    if not isinstance(document, dict):
        raise click.UsageError("config file must be a JSON object keyed by command")
    ctx.default_map = document
    return path


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    callback=_apply_config,
    is_eager=True,
    expose_value=False,
    help="JSON file supplying flag defaults, keyed by command; explicit flags win",
)
def main() -> None:
    """Verifier-game benchmark toolkit."""


@main.command()
@click.option("--mode", type=click.Choice(["classic", "nightmare"]), required=True)
@click.option("--per-difficulty", type=int, default=90, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
def generate(mode: str, per_difficulty: int, seed: int, out: str, catalog_path: str | None) -> None:
    """Generate a setup batch and write it with a validation summary."""
    catalog = _load_catalog(catalog_path)
    _echo_config(
        "generate",
        mode=mode,
        per_difficulty=per_difficulty,
        seed=seed,
        out=out,
        catalog_version=catalog.version,
    )
    started = time.time()
    try:
        setups = generate_batch(Mode(mode), per_difficulty, seed, catalog)
    except GenerationExhausted as exc:
        click.echo(f"generation exhausted: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    summary = validate_batch(setups)
    try:
        save_batch(setups, out, seed=seed)
        public = Path(out).with_suffix(".public.jsonl")
        save_batch(setups, public, seed=seed, include_secrets=False)
    except OSError as exc:
        click.echo(f"cannot write batch: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(
        f"wrote {summary['total']} setups in {time.time() - started:.1f}s "
        f"(uniqueness {summary['uniqueness_ok']}/{summary['total']}, "
        f"necessity {summary['necessity_ok']}/{summary['total']}) -> {out}"
    )
    click.echo(f"public view (no secrets) -> {public}")
    if summary["uniqueness_ok"] != summary["total"] or summary["necessity_ok"] != summary["total"]:
        click.echo("validation failed for some setups", err=True)
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.option("--batch", "batch_path", type=click.Path(exists=True), required=True)
@click.option("--agent", "agent_spec", required=True,
              help="random | oracle | llm:<model>@<endpoint>")
@click.option("--strategy", type=click.Choice(["oa", "cot"]), default="cot", show_default=True)
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
def run(batch_path: str, agent_spec: str, strategy: str, parallelism: int, seed: int,
        out_dir: str, catalog_path: str | None) -> None:
    """Play every setup in a batch; write transcripts and metrics to a run dir."""
    from .bench import run_benchmark

    catalog = _load_catalog(catalog_path)
    pack = load_template_pack()
    _echo_config(
        "run",
        batch=batch_path,
        agent=agent_spec,
        strategy=strategy,
        parallelism=parallelism,
        seed=seed,
        out=out_dir,
        catalog_version=catalog.version,
        template_checksum=pack.checksum,
    )
    try:
        load_batch(batch_path, catalog)
    except Exception as exc:
        click.echo(f"bad batch: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    store = DataStore(out_dir)
    batch_id = store.import_batch_file(batch_path, catalog)
    try:
        run_id = run_benchmark(
            store,
            batch_id,
            agent_spec,
            Strategy(strategy),
            catalog,
            pack,
            seed=seed,
            parallelism=parallelism,
        )
    except ValueError as exc:
        click.echo(f"bad agent spec: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    run_dir = store.run_dir(run_id)
    click.echo((run_dir / "metrics.csv").read_text().rstrip())
    click.echo(f"run {run_id} -> {run_dir}")


@main.command("eval")
@click.option("--run", "run_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--judge", "judge_kind", type=click.Choice(["deterministic", "external"]),
              default="deterministic", show_default=True)
@click.option("--endpoint", default=None, help="completion endpoint for the external judge")
@click.option("--model", default=None)
@click.option("--batch", "batch_path", type=click.Path(exists=True), required=True,
              help="the batch the run was played from (carries the ground truth)")
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
def eval_run(run_dir: str, judge_kind: str, endpoint: str | None, model: str | None,
             batch_path: str, catalog_path: str | None) -> None:
    """Extract conclusions from a run's reasoning and judge them against truth."""
    catalog = _load_catalog(catalog_path)
    _echo_config("eval", run=run_dir, judge=judge_kind, batch=batch_path)
    setups = {s.setup_id: s for s in load_batch(batch_path, catalog)}
    run_path = Path(run_dir)
    store = DataStore(run_path)
    run_ids = [r["run_id"] for r in store.list_runs()]
    if not run_ids:
        click.echo("no runs under this directory", err=True)
        sys.exit(EXIT_VALIDATION)

    if judge_kind == "external" and not (endpoint and model):
        click.echo("external judge needs --endpoint and --model", err=True)
        sys.exit(EXIT_VALIDATION)

    config = None
    if judge_kind == "external":
        from .agents.llm import CompletionClientConfig, ConfigError

        try:
            config = CompletionClientConfig(
                endpoint=endpoint, model=model, api_key_env="CODEBREAK_API_KEY"
            )
            config.api_key()
        except ConfigError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)

    total = judged = unresolved = 0
    for run_id in run_ids:
        rows = []
        for transcript in store.load_transcripts(run_id):
            setup = setups.get(transcript.setup_id)
            if setup is None:
                click.echo(f"setup {transcript.setup_id} not in batch", err=True)
                sys.exit(EXIT_VALIDATION)
            conclusions = extract_pattern(transcript)
            total += len(conclusions)
            for conclusion in conclusions:
                truth = setup.active_criterion(conclusion.slot - 1)
                if judge_kind == "deterministic":
                    if not conclusion.structured:
                        unresolved += 1
                        continue
                    judgment = judge_deterministic(conclusion, truth)
                else:
                    try:
                        judgment = judge_external(conclusion, truth.description, config)
                    except Exception as exc:
                        click.echo(f"judge endpoint failure: {exc}", err=True)
                        sys.exit(EXIT_INFRA)
                    if judgment.category is Category.UNRESOLVED:
                        unresolved += 1
                judged += 1
                rows.append(
                    {
                        "transcript_id": judgment.transcript_id,
                        "round": judgment.round_number,
                        "slot": judgment.slot,
                        "claim": list(judgment.claim),
                        "category": judgment.category.value,
                        "rationale": judgment.rationale,
                        "judge": judgment.judge,
                    }
                )
        out = store.run_dir(run_id) / "judgments.jsonl"
        out.write_text("\n".join(json.dumps(r, sort_keys=True) for r in rows) + ("\n" if rows else ""))
        click.echo(f"{run_id}: {len(rows)} judgments -> {out}")
    if total == 0:
        click.echo("warning: no conclusions found (answer-only run?)")
    click.echo(f"extracted {total}, judged {judged}, unresolved {unresolved}")


@main.command()
@click.option("--run", "run_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def report(run_dir: str, out_dir: str | None) -> None:
    """Emit metric tables plus flow and persistence plot data."""
    _echo_config("report", run=run_dir, out=out_dir)
    store = DataStore(run_dir)
    run_ids = [r["run_id"] for r in store.list_runs()]
    if not run_ids:
        click.echo("no runs under this directory", err=True)
        sys.exit(EXIT_VALIDATION)
    destination = Path(out_dir) if out_dir else Path(run_dir) / "reports"
    destination.mkdir(parents=True, exist_ok=True)

    for run_id in run_ids:
        transcripts = store.load_transcripts(run_id)
        summaries = [summarize(t) for t in transcripts if t.outcome() is not None]
        metrics = compute_metrics(summaries)
        (destination / f"{run_id}-metrics.csv").write_text(export(metrics, "csv") + "\n")

        judgments_path = store.run_dir(run_id) / "judgments.jsonl"
        if not judgments_path.exists():
            click.echo(f"{run_id}: no judgments file; error-path sections omitted")
            continue
        from .judging import Judgment

        judgments = []
        for line in judgments_path.read_text().splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            judgments.append(
                Judgment(
                    transcript_id=row["transcript_id"],
                    round_number=row["round"],
                    slot=row["slot"],
                    category=Category(row["category"]),
                    rationale=row["rationale"],
                    judge=row["judge"],
                    claim=tuple(row["claim"]),
                )
            )
        flow = fic_paths(judgments, summaries)
        rates = error_path_rates(judgments, summaries)
        curve = persistence_curve(judgments)
        (destination / f"{run_id}-flow.csv").write_text(export(flow, "csv") + "\n")
        (destination / f"{run_id}-error-rates.csv").write_text(export(rates, "csv") + "\n")
        (destination / f"{run_id}-persistence.csv").write_text(export(curve, "csv") + "\n")
        click.echo(f"{run_id}: metrics, flow, error-rates, persistence -> {destination}")


@main.command()
@click.argument("transcript_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--batch", "batch_path", type=click.Path(exists=True), required=True)
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
def replay(transcript_path: str, batch_path: str, catalog_path: str | None) -> None:
    """Re-simulate a transcript and verify feedback and outcome match."""
    catalog = _load_catalog(catalog_path)
    _echo_config("replay", transcript=transcript_path, batch=batch_path)
    try:
        transcript = load_transcript(transcript_path)
    except Exception as exc:
        click.echo(f"cannot read transcript: {exc}", err=True)
        sys.exit(EXIT_IO)
    setups = {s.setup_id: s for s in load_batch(batch_path, catalog)}
    setup = setups.get(transcript.setup_id)
    if setup is None:
        click.echo(f"setup {transcript.setup_id} not found in batch", err=True)
        sys.exit(EXIT_VALIDATION)
    result = replay_transcript(transcript, setup)
    if result.ok:
        click.echo(f"OK ({result.events_checked} events verified)")
    else:
        click.echo(f"DIVERGENCE: {result.divergence}", err=True)
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.option("--data-dir", type=click.Path(file_okay=False), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8750, show_default=True)
@click.option("--token", default=None, help="static bearer token; anonymous if unset")
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="serve a built web UI (e.g. frontend/dist) at / on the same origin")
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
def serve(data_dir: str, host: str, port: int, token: str | None, ui_dir: str | None,
          catalog_path: str | None) -> None:
    """Start the HTTP session service."""
    import uvicorn

    from .service import create_app

    catalog = _load_catalog(catalog_path)
    _echo_config("serve", data_dir=data_dir, host=host, port=port,
                 token_set=token is not None, ui=ui_dir, catalog_version=catalog.version)
    app = create_app(data_dir, catalog=catalog, token=token, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
