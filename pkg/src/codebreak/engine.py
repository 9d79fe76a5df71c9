"""Deterministic game state machine: rounds, phases, queries, verdicts.

One round is Proposal -> Question (0-3 verifier queries) -> Deduce. States are
immutable; every transition is a pure function returning a fresh state, so a
recorded action sequence always replays to the identical feedback and outcome.
Nightmare remapping happens here: the queried slot is translated through the
setup's hidden permutation before the active criterion is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from .dsl import Code, evaluate
from .setups import CheckResult, GameSetup, check_setup

ROUND_CAP = 60
MAX_QUERIES_PER_ROUND = 3


class Phase(str, Enum):
    PROPOSAL = "proposal"
    QUESTION = "question"
    DEDUCE = "deduce"
    FINISHED = "finished"


class Status(str, Enum):
    IN_PROGRESS = "in_progress"
    WON = "won"
    LOST = "lost"


class GameError(Exception):
    pass


class InvalidSetupError(GameError):
    pass


class WrongPhaseError(GameError):
    pass


class DigitRangeError(GameError):
    pass


class InvalidSlotError(GameError):
    """Retryable: nonexistent verifier slot; consumes no query budget."""


class QueryBudgetError(GameError):
    pass


@dataclass(frozen=True)
class Feedback:
    round_number: int
    queried_slot: int  # 1-based, as the player asked
    passed: bool

    @property
    def result(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class Proposal:
    code: Code


@dataclass(frozen=True)
class VerifierChoice:
    slot: int  # 1-based


@dataclass(frozen=True)
class Submit:
    code: Code


@dataclass(frozen=True)
class Skip:
    pass


Action = Union[Proposal, VerifierChoice, Submit, Skip]


@dataclass(frozen=True)
class GameState:
    setup: GameSetup
    round_number: int = 1
    phase: Phase = Phase.PROPOSAL
    proposal: Optional[Code] = None
    queries_this_round: int = 0
    history: tuple[Feedback, ...] = ()
    status: Status = Status.IN_PROGRESS
    loss_reason: Optional[str] = None  # "wrong_code" | "cap"
    submitted: Optional[Code] = None

    @property
    def finished(self) -> bool:
        return self.phase is Phase.FINISHED

    @property
    def slot_count(self) -> int:
        return len(self.setup.cards)


def _check_code(code: Code) -> Code:
    if not all(isinstance(d, int) and 1 <= d <= 5 for d in code):
        raise DigitRangeError(f"digits must be 1-5, got {tuple(code)}")
    return Code(*code)


def new_session(setup: GameSetup) -> GameState:
    """Round 1, Proposal phase, empty history. Validates the setup first."""
    n = len(setup.cards)
    if n != setup.difficulty.card_count:
        raise InvalidSetupError(
            f"{setup.difficulty.value} setups carry {setup.difficulty.card_count} cards, got {n}"
        )
    if len(setup.active_indices) != n or len(setup.permutation) != n:
        raise InvalidSetupError("card, active-index, and permutation lengths disagree")
    if sorted(setup.permutation) != list(range(n)):
        raise InvalidSetupError("permutation is not a bijection over slots")
    if setup.mode.value == "classic" and setup.permutation != tuple(range(n)):
        raise InvalidSetupError("classic setups must carry the identity permutation")
    for slot, (card, index) in enumerate(zip(setup.cards, setup.active_indices)):
        if not 0 <= index < len(card.criteria):
            raise InvalidSetupError(f"active index {index} out of range on slot {slot + 1}")
    result: CheckResult = check_setup(setup.active_indices, setup.cards)
    if not result.valid:
        raise InvalidSetupError(f"setup violates {result.violation}")
    _check_code(setup.secret)
    return GameState(setup=setup)


def submit_proposal(state: GameState, code: Code) -> GameState:
    if state.phase is not Phase.PROPOSAL:
        raise WrongPhaseError(f"cannot propose during {state.phase.value}")
    code = _check_code(code)
    return replace(state, proposal=code, phase=Phase.QUESTION, queries_this_round=0)


def query_verifier(state: GameState, slot: int) -> tuple[GameState, Feedback]:
    """Evaluate the permuted slot's active criterion against this round's proposal."""
    if state.phase is not Phase.QUESTION:
        raise WrongPhaseError(f"cannot query during {state.phase.value}")
    if state.queries_this_round >= MAX_QUERIES_PER_ROUND:
        raise QueryBudgetError("query budget for this round exhausted")
    if not isinstance(slot, int) or not 1 <= slot <= state.slot_count:
        raise InvalidSlotError(f"no verifier {slot}; valid slots are 1-{state.slot_count}")
    actual = state.setup.permutation[slot - 1]
    criterion = state.setup.active_criterion(actual)
    assert state.proposal is not None
    feedback = Feedback(
        round_number=state.round_number,
        queried_slot=slot,
        passed=evaluate(criterion.expr, state.proposal),
    )
    queries = state.queries_this_round + 1
    phase = Phase.DEDUCE if queries >= MAX_QUERIES_PER_ROUND else Phase.QUESTION
    next_state = replace(
        state,
        queries_this_round=queries,
        history=state.history + (feedback,),
        phase=phase,
    )
    return next_state, feedback


def end_question_phase(state: GameState) -> GameState:
    if state.phase is not Phase.QUESTION:
        raise WrongPhaseError(f"cannot end questioning during {state.phase.value}")
    return replace(state, phase=Phase.DEDUCE)


def deduce(state: GameState, action: Union[Submit, Skip]) -> GameState:
    if state.phase is not Phase.DEDUCE:
        raise WrongPhaseError(f"cannot deduce during {state.phase.value}")
    if isinstance(action, Submit):
        code = _check_code(action.code)
        won = code == state.setup.secret
        return replace(
            state,
            phase=Phase.FINISHED,
            status=Status.WON if won else Status.LOST,
            loss_reason=None if won else "wrong_code",
            submitted=code,
        )
    if isinstance(action, Skip):
        if state.round_number >= ROUND_CAP:
            return replace(
                state, phase=Phase.FINISHED, status=Status.LOST, loss_reason="cap"
            )
        return replace(
            state,
            round_number=state.round_number + 1,
            phase=Phase.PROPOSAL,
            proposal=None,
            queries_this_round=0,
        )
    raise GameError(f"deduce accepts Submit or Skip, got {action!r}")


def apply_action(state: GameState, action: Action) -> tuple[GameState, Optional[Feedback]]:
    """Route one action to the right transition. Used by transcript replay."""
    if isinstance(action, Proposal):
        return submit_proposal(state, action.code), None
    if isinstance(action, VerifierChoice):
        return query_verifier(state, action.slot)
    if isinstance(action, Skip):
        if state.phase is Phase.QUESTION:
            return end_question_phase(state), None
        return deduce(state, action), None
    if isinstance(action, Submit):
        return deduce(state, action), None
    raise GameError(f"unknown action {action!r}")


@dataclass(frozen=True)
class PublicState:
    """What an observer may see before the game ends."""

    setup_id: str
    mode: str
    difficulty: str
    round_number: int
    phase: str
    queries_this_round: int
    history: tuple[Feedback, ...]
    status: str
    slot_count: int
    proposal: Optional[Code] = None


def public_state(state: GameState) -> PublicState:
    return PublicState(
        setup_id=state.setup.setup_id,
        mode=state.setup.mode.value,
        difficulty=state.setup.difficulty.value,
        round_number=state.round_number,
        phase=state.phase.value,
        queries_this_round=state.queries_this_round,
        history=state.history,
        status=state.status.value,
        slot_count=state.slot_count,
        proposal=state.proposal,
    )
