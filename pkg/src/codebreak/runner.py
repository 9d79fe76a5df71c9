"""Drives agents through games: one session per setup, optionally in parallel.

The runner speaks to agents exactly the way remote players are spoken to:
rendered prompt out, raw text in, retries included. Infra failures from the
agent side forfeit the affected game and the run continues.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .agents.base import Agent, AgentError
from .protocol import Strategy, TemplatePack
from .session import ProtocolSession, TurnResult
from .setups import GameSetup, derive_seed, public_view
from .transcripts import Transcript

# Hard stop on protocol exchanges per game; the engine's round cap plus the
# retry bound keeps real games far below this.
MAX_EXCHANGES = 2000

AgentFactory = Callable[[GameSetup, Strategy, int], Agent]


@dataclass(frozen=True)
class GameSummary:
    setup_id: str
    mode: str
    strategy: str
    difficulty: str
    agent: str
    outcome: str  # "won" | "lost" | "forfeit"
    reason: Optional[str]
    rounds: int
    queries: int
    format_errors: int
    illegal_actions: int

    @property
    def won(self) -> bool:
        return self.outcome == "won"


def summarize(transcript: Transcript) -> GameSummary:
    outcome = transcript.outcome()
    if outcome is None:
        raise ValueError(f"transcript {transcript.setup_id} has no outcome event")
    return GameSummary(
        setup_id=transcript.setup_id,
        mode=transcript.mode,
        strategy=transcript.strategy,
        difficulty=transcript.difficulty or "unknown",
        agent=transcript.agent,
        outcome=outcome["outcome"],
        reason=outcome.get("reason"),
        rounds=outcome["rounds"],
        queries=outcome["queries"],
        format_errors=outcome.get("format_errors", 0),
        illegal_actions=outcome.get("illegal_actions", 0),
    )


def play_game(
    setup: GameSetup,
    agent: Agent,
    strategy: Strategy,
    pack: TemplatePack,
    infra_retries: int = 2,
) -> Transcript:
    """One full game; returns the finished transcript (won, lost, or forfeit)."""
    agent.reset()
    session = ProtocolSession(
        setup, strategy, pack, participant=f"agent:{agent.name}"
    )
    prompt = session.current_prompt()
    failures = 0
    for _ in range(MAX_EXCHANGES):
        if session.finished:
            break
        try:
            response = agent.receive(prompt)
        except AgentError:
            failures += 1
            if failures > infra_retries:
                session.forfeit("infra")
                break
            session.transcript.append("infra_retry", count=failures)
            continue
        call = getattr(agent, "last_stats", None)
        stats = None
        if call is not None:
            stats = {
                "prompt_tokens": call.prompt_tokens,
                "completion_tokens": call.completion_tokens,
                "transport_retries": call.transport_retries,
            }
        result: TurnResult = session.submit_text(
            response, latency_ms=call.latency_ms if call else None, stats=stats
        )
        prompt = result.prompt
    else:
        if not session.finished:
            session.forfeit("infra")
    return session.transcript


def run_batch(
    setups: Sequence[GameSetup],
    agent_factory: AgentFactory,
    strategy: Strategy,
    pack: TemplatePack,
    seed: int = 0,
    parallelism: int = 1,
    on_finish: Optional[Callable[[Transcript], None]] = None,
) -> list[Transcript]:
    """Play every setup; per-game agent seeds derive from the run seed."""
    strategy = Strategy(strategy)

    def one(setup: GameSetup) -> Transcript:
        agent = agent_factory(setup, strategy, derive_seed(seed, setup.setup_id))
        transcript = play_game(setup, agent, strategy, pack)
        if on_finish is not None:
            on_finish(transcript)
        return transcript

    if parallelism <= 1:
        return [one(setup) for setup in setups]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, setups))


def make_agent_factory(spec: str, use_meta_rules: bool = True) -> AgentFactory:
    """Build agents from a spec string: random | oracle | llm:<model>@<endpoint>."""
    from .agents.llm import ChatCompletionAgent, CompletionClientConfig
    from .agents.oracle import OracleSolverAgent
    from .agents.random_agent import RandomAgent

    if spec == "random":
        return lambda setup, strategy, seed: RandomAgent(seed, strategy)
    if spec == "oracle":
        return lambda setup, strategy, seed: OracleSolverAgent(
            public_view(setup), strategy, use_meta_rules
        )
    if spec.startswith("llm:"):
        import os

        rest = spec[len("llm:"):]
        if "@" not in rest:
            raise ValueError("llm agent spec must look like llm:<model>@<endpoint>")
        model, endpoint = rest.split("@", 1)
        key_env = "CODEBREAK_API_KEY" if os.environ.get("CODEBREAK_API_KEY") else None
        config = CompletionClientConfig(endpoint=endpoint, model=model, api_key_env=key_env)
        return lambda setup, strategy, seed: ChatCompletionAgent(config)
    raise ValueError(f"unknown agent spec {spec!r}")
