"""Run metrics and error-path analytics over transcripts and judgments.

Everything here is a pure function of its input multiset: accuracy per
difficulty, win-averaged turns and verifier uses, forfeit rates, the
error-recovery flow (first incorrect conclusion through to game outcome),
the persistence curve, and the associated scalar rates. Outputs are plain
data plus tabular/series exports; no chart rendering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .judging import Category, Judgment
from .runner import GameSummary

# Flow stage node labels
FIC_NODE = "FIC"
NO_SUBSEQUENT = "NoSubsequent"


@dataclass(frozen=True)
class StratumMetrics:
    games: int
    wins: int
    accuracy: float
    win_avg_turns: Optional[float]
    win_avg_verifiers: Optional[float]


@dataclass(frozen=True)
class GroupMetrics:
    """One (mode, strategy) group; per-difficulty strata absent when empty."""

    mode: str
    strategy: str
    total: StratumMetrics
    by_difficulty: dict[str, StratumMetrics]
    forfeits: int
    forfeit_rate: float
    format_errors: int
    illegal_actions: int


@dataclass(frozen=True)
class RunMetrics:
    groups: dict[tuple[str, str], GroupMetrics]

    def group(self, mode: str, strategy: str) -> GroupMetrics:
        return self.groups[(mode, strategy)]


def _stratum(summaries: Sequence[GameSummary]) -> StratumMetrics:
    games = len(summaries)
    wins = [s for s in summaries if s.won]
    return StratumMetrics(
        games=games,
        wins=len(wins),
        accuracy=len(wins) / games,
        win_avg_turns=sum(s.rounds for s in wins) / len(wins) if wins else None,
        win_avg_verifiers=sum(s.queries for s in wins) / len(wins) if wins else None,
    )


def compute_metrics(summaries: Iterable[GameSummary]) -> RunMetrics:
    """Accuracy and win averages per (mode, strategy) and difficulty stratum.

    Forfeits count as losses for accuracy and are also reported on their own.
    """
    by_group: dict[tuple[str, str], list[GameSummary]] = {}
    for summary in summaries:
        by_group.setdefault((summary.mode, summary.strategy), []).append(summary)

    groups = {}
    for (mode, strategy), members in sorted(by_group.items()):
        by_difficulty = {}
        for difficulty in ("easy", "medium", "hard"):
            stratum = [s for s in members if s.difficulty == difficulty]
            if stratum:
                by_difficulty[difficulty] = _stratum(stratum)
        forfeits = sum(1 for s in members if s.outcome == "forfeit")
        groups[(mode, strategy)] = GroupMetrics(
            mode=mode,
            strategy=strategy,
            total=_stratum(members),
            by_difficulty=by_difficulty,
            forfeits=forfeits,
            forfeit_rate=forfeits / len(members),
            format_errors=sum(s.format_errors for s in members),
            illegal_actions=sum(s.illegal_actions for s in members),
        )
    return RunMetrics(groups=groups)


# --- error-path analytics ---------------------------------------------------------


@dataclass(frozen=True)
class FicPath:
    """One first-incorrect-conclusion instance walked to the game outcome."""

    transcript_id: str
    slot: int
    fic_round: int
    ncs: str  # Correct | Incorrect | Include | NoSubsequent
    csbs: str  # Correct | Incorrect | Include
    game_status: str  # Won | Lost

    @property
    def persistent(self) -> bool:
        return self.csbs != Category.CORRECT.value


@dataclass
class FlowTable:
    edges: list[tuple[str, str, int]] = field(default_factory=list)
    paths: list[FicPath] = field(default_factory=list)

    def stage_totals(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for source, _, count in self.edges:
            totals[source] = totals.get(source, 0) + count
        return totals


def _slot_sequences(
    judgments: Iterable[Judgment],
) -> dict[tuple[str, int], list[tuple[int, str]]]:
    """Per (transcript, slot): round-ordered categories, last one per round."""
    last_per_round: dict[tuple[str, int], dict[int, str]] = {}
    for judgment in judgments:
        if judgment.category is Category.UNRESOLVED:
            continue
        key = (judgment.transcript_id, judgment.slot)
        last_per_round.setdefault(key, {})[judgment.round_number] = judgment.category.value
    return {
        key: sorted(rounds.items()) for key, rounds in last_per_round.items()
    }


def fic_paths(judgments: Iterable[Judgment], summaries: Iterable[GameSummary]) -> FlowTable:
    """Walk each slot's first Incorrect judgment through NCS, CSBS, and outcome.

    Forfeited games carry no submission and are excluded here.
    """
    outcome_by_id = {s.setup_id: s for s in summaries}
    table = FlowTable()
    edge_counts: dict[tuple[str, str], int] = {}

    for (transcript_id, slot), sequence in sorted(_slot_sequences(judgments).items()):
        summary = outcome_by_id.get(transcript_id)
        if summary is None or summary.outcome == "forfeit":
            continue
        fic_index = next(
            (i for i, (_, cat) in enumerate(sequence) if cat == Category.INCORRECT.value),
            None,
        )
        if fic_index is None:
            continue
        ncs = sequence[fic_index + 1][1] if fic_index + 1 < len(sequence) else NO_SUBSEQUENT
        csbs = sequence[-1][1]
        status = "Won" if summary.won else "Lost"
        path = FicPath(
            transcript_id=transcript_id,
            slot=slot,
            fic_round=sequence[fic_index][0],
            ncs=ncs,
            csbs=csbs,
            game_status=status,
        )
        table.paths.append(path)
        for edge in (
            (FIC_NODE, f"NCS:{ncs}"),
            (f"NCS:{ncs}", f"CSBS:{csbs}"),
            (f"CSBS:{csbs}", f"GS:{status}"),
        ):
            edge_counts[edge] = edge_counts.get(edge, 0) + 1

    table.edges = [(a, b, n) for (a, b), n in sorted(edge_counts.items())]
    return table


@dataclass(frozen=True)
class PersistencePoint:
    k: int  # rounds after the first incorrect conclusion
    probability: float
    denominator: int


def persistence_curve(judgments: Iterable[Judgment]) -> list[PersistencePoint]:
    """P(still incorrect at relative round k | incorrect at k-1, judged at k).

    Relative round k is the k-th judgment a slot receives after its first
    incorrect one (k=0). Slots without a k-th judgment leave the denominator;
    denominators are published and never grow with k.
    """
    numerators: dict[int, int] = {}
    denominators: dict[int, int] = {}
    for sequence in _slot_sequences(judgments).values():
        categories = [cat for _, cat in sequence]
        try:
            start = categories.index(Category.INCORRECT.value)
        except ValueError:
            continue
        chain = categories[start:]
        for k in range(1, len(chain)):
            if chain[k - 1] != Category.INCORRECT.value:
                break  # escaped the error state; later pairs are unconditioned
            denominators[k] = denominators.get(k, 0) + 1
            if chain[k] == Category.INCORRECT.value:
                numerators[k] = numerators.get(k, 0) + 1
    return [
        PersistencePoint(k, numerators.get(k, 0) / denominators[k], denominators[k])
        for k in sorted(denominators)
    ]


@dataclass(frozen=True)
class ErrorPathRates:
    initial_verifier_errors: int
    persistence_rate: Optional[float]
    no_final_conclusion_rate: Optional[float]
    next_turn_still_incorrect_rate: Optional[float]
    success_despite_persistent_errors: Optional[float]
    success_when_no_or_fixed_errors: Optional[float]
    excluded_forfeits: int


def error_path_rates(
    judgments: Iterable[Judgment], summaries: Iterable[GameSummary]
) -> ErrorPathRates:
    """The scalar error-handling rates derived from the FIC walk."""
    summaries = list(summaries)
    judgments = list(judgments)
    flow = fic_paths(judgments, summaries)
    fics = flow.paths
    n = len(fics)

    def rate(count: int, denom: int) -> Optional[float]:
        return count / denom if denom else None

    persistent_games = {p.transcript_id for p in fics if p.persistent}
    eligible = [s for s in summaries if s.outcome != "forfeit"]
    clean_games = [s for s in eligible if s.setup_id not in persistent_games]
    despite = [s for s in eligible if s.setup_id in persistent_games]

    return ErrorPathRates(
        initial_verifier_errors=n,
        persistence_rate=rate(sum(1 for p in fics if p.persistent), n),
        no_final_conclusion_rate=rate(
            sum(1 for p in fics if p.ncs == NO_SUBSEQUENT), n
        ),
        next_turn_still_incorrect_rate=rate(
            sum(1 for p in fics if p.ncs == Category.INCORRECT.value), n
        ),
        success_despite_persistent_errors=rate(
            sum(1 for s in despite if s.won), len(despite)
        ),
        success_when_no_or_fixed_errors=rate(
            sum(1 for s in clean_games if s.won), len(clean_games)
        ),
        excluded_forfeits=sum(1 for s in summaries if s.outcome == "forfeit"),
    )


# --- exports -----------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _metrics_rows(metrics: RunMetrics) -> list[dict]:
    rows = []
    for (mode, strategy), group in sorted(metrics.groups.items()):
        strata = [("total", group.total)] + sorted(group.by_difficulty.items())
        for name, stratum in strata:
            rows.append(
                {
                    "mode": mode,
                    "strategy": strategy,
                    "stratum": name,
                    "games": stratum.games,
                    "wins": stratum.wins,
                    "accuracy": stratum.accuracy,
                    "win_avg_turns": stratum.win_avg_turns,
                    "win_avg_verifiers": stratum.win_avg_verifiers,
                    "forfeit_rate": group.forfeit_rate if name == "total" else None,
                }
            )
    return rows


def _rates_rows(rates: ErrorPathRates) -> list[dict]:
    return [
        {"metric": name, "value": getattr(rates, name)}
        for name in (
            "initial_verifier_errors",
            "persistence_rate",
            "no_final_conclusion_rate",
            "next_turn_still_incorrect_rate",
            "success_despite_persistent_errors",
            "success_when_no_or_fixed_errors",
            "excluded_forfeits",
        )
    ]


def _rows_for(obj) -> list[dict]:
    if isinstance(obj, RunMetrics):
        return _metrics_rows(obj)
    if isinstance(obj, FlowTable):
        return [
            {"stage_from": a, "stage_to": b, "count": n} for a, b, n in obj.edges
        ]
    if isinstance(obj, ErrorPathRates):
        return _rates_rows(obj)
    if isinstance(obj, list) and all(isinstance(p, PersistencePoint) for p in obj):
        return [
            {"k": p.k, "probability": p.probability, "denominator": p.denominator}
            for p in obj
        ]
    raise ValueError(f"cannot export {type(obj).__name__}")


def export(obj, format: str = "csv") -> str:
    """Tabular text (csv) or structured (json) document for any computed stats."""
    rows = _rows_for(obj)
    if format == "json":
        return json.dumps(rows, indent=2)
    if format == "csv":
        if not rows:
            return ""
        header = list(rows[0].keys())
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(row.get(column)) for column in header))
        return "\n".join(lines)
    raise ValueError(f"unknown export format {format!r}")
