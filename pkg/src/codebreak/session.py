"""One game spoken over the text protocol.

ProtocolSession glues the pieces together: it renders the prompt for the
current step, parses raw response text, applies legal actions to the engine,
answers bad responses with the matching retry prompt, and appends everything
to the transcript. The session exposes exactly what a remote player sees --
prompt text out, raw text in -- so in-process agents, HTTP clients, and the
web UI all traverse the identical protocol path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import engine
from .engine import Feedback, GameState, Proposal, Skip, Submit, VerifierChoice
from .protocol import (
    RETRY_BOUND,
    FormatError,
    MissingReasoning,
    ParsedAction,
    RetryKind,
    RetryLedger,
    Step,
    StepKind,
    Strategy,
    TemplatePack,
    describe_setup,
    describe_verifiers,
    parse_response,
    retry,
)
from .setups import GameSetup, public_view
from .transcripts import Transcript, action_to_record, record_to_action

_PHASE_TO_STEP_KIND = {
    engine.Phase.PROPOSAL: StepKind.PROPOSAL,
    engine.Phase.QUESTION: StepKind.QUESTION,
    engine.Phase.DEDUCE: StepKind.DEDUCE,
}


@dataclass(frozen=True)
class TurnResult:
    kind: str  # "ok" | "retry" | "final"
    prompt: str
    feedback: Optional[Feedback] = None
    outcome: Optional[dict] = None


class SessionFinished(RuntimeError):
    pass


class ProtocolSession:
    def __init__(
        self,
        setup: GameSetup,
        strategy: Strategy,
        pack: TemplatePack,
        participant: str = "agent:unknown",
        retry_bound: int = RETRY_BOUND,
    ):
        self.setup = setup
        self.strategy = Strategy(strategy)
        self.pack = pack
        self.participant = participant
        # humans may leave the reasoning note empty; CoT agents may not
        self.require_reasoning = not participant.startswith("human")
        self.retry_bound = retry_bound
        self.state: GameState = engine.new_session(setup)
        self.ledger = RetryLedger()
        self.forfeit_reason: Optional[str] = None
        self._outcome: Optional[dict] = None
        self.transcript = Transcript(
            setup_id=setup.setup_id,
            mode=setup.mode.value,
            strategy=self.strategy.value,
            agent=participant,
            seed=setup.seed,
            difficulty=setup.difficulty.value,
            catalog_version=setup.catalog_version,
            template_checksum=pack.checksum,
        )
        self._record_prompt(self._opening_prompt(), Step.PROPOSAL)

    # -- prompt construction ------------------------------------------------

    def _render(self, step: Step, **context: object) -> str:
        return self.pack.render(self.setup.mode, self.strategy, step, **context)

    def _opening_prompt(self) -> str:
        view = public_view(self.setup)
        system = self._render(Step.SYSTEM, game_setup=describe_setup(view))
        return system + "\n\n" + self._render(Step.PROPOSAL)

    def _last_feedback(self) -> Feedback:
        assert self.state.history, "no feedback recorded this round"
        return self.state.history[-1]

    def _next_prompt(self) -> str:
        state = self.state
        if state.phase is engine.Phase.PROPOSAL:
            return self._render(Step.PROPOSAL)
        if state.phase is engine.Phase.QUESTION:
            if state.queries_this_round == 0:
                view = public_view(self.setup)
                return self._render(
                    Step.QUESTION_FIRST, verifier_descriptions=describe_verifiers(view)
                )
            feedback = self._last_feedback()
            return self._render(
                Step.QUESTION_FOLLOWING,
                verifier_num=feedback.queried_slot,
                verifier_result=feedback.result,
            )
        if state.phase is engine.Phase.DEDUCE:
            if state.queries_this_round >= engine.MAX_QUERIES_PER_ROUND:
                feedback = self._last_feedback()
                last = self._render(
                    Step.QUESTION_LAST,
                    verifier_num=feedback.queried_slot,
                    verifier_result=feedback.result,
                )
                return last + "\n\n" + self._render(Step.DEDUCE)
            return self._render(Step.DEDUCE)
        raise SessionFinished("game already finished")

    def _result_prompt(self) -> str:
        state = self.state
        if state.submitted is None:
            # No submission exists (round cap or forfeit); there is no result
            # template for that, the outcome metadata carries the story.
            return ""
        return self._render(
            Step.DEDUCE_RESULT,
            submitted_code=state.submitted.text(),
            answer=self.setup.secret.text(),
            is_correct="CORRECT" if state.status is engine.Status.WON else "INCORRECT",
        )

    def _record_prompt(self, text: str, step: Step) -> None:
        self.transcript.append("prompt", step=step.value, text=text)
        self._current_prompt = text

    # -- public surface -------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.state.finished or self.forfeit_reason is not None

    @property
    def step_kind(self) -> StepKind:
        if self.finished:
            raise SessionFinished("game already finished")
        return _PHASE_TO_STEP_KIND[self.state.phase]

    def current_prompt(self) -> str:
        """The byte-exact prompt for the current step; idempotent."""
        return self._current_prompt

    def outcome(self) -> Optional[dict]:
        return self._outcome

    def _finalize(self) -> dict:
        state = self.state
        if self.forfeit_reason is not None:
            outcome, reason = "forfeit", self.forfeit_reason
        else:
            outcome = state.status.value
            reason = state.loss_reason
        record = {
            "outcome": outcome,
            "reason": reason,
            "submitted": list(state.submitted) if state.submitted else None,
            "rounds": state.round_number,
            "queries": len(state.history),
            "format_errors": self.ledger.total_format_errors,
            "illegal_actions": self.ledger.total_illegal_actions,
        }
        self.transcript.append("outcome", **record)
        self._outcome = record
        return record

    def forfeit(self, reason: str) -> TurnResult:
        """End the game without a submission (retry exhaustion, infra failure)."""
        if self.finished:
            raise SessionFinished("game already finished")
        self.forfeit_reason = reason
        outcome = self._finalize()
        self._record_prompt("", Step.DEDUCE_RESULT)
        return TurnResult(kind="final", prompt="", outcome=outcome)

    def _handle_error(self, kind: RetryKind, verifier_num: Optional[object] = None) -> TurnResult:
        step = self.step_kind
        text, _, give_up = retry(
            self.ledger,
            kind,
            step,
            self.setup.mode,
            self.strategy,
            self.pack,
            verifier_num=verifier_num,
        )
        self.transcript.append(
            "retry", step=step.value, kind=kind.value, count=self.ledger.consecutive
        )
        if give_up or self.ledger.consecutive > self.retry_bound:
            return self.forfeit("retries")
        self._record_prompt(text, Step(_retry_step_name(step, kind)))
        return TurnResult(kind="retry", prompt=text)

    def submit_text(
        self,
        raw_text: str,
        latency_ms: Optional[float] = None,
        stats: Optional[dict] = None,
    ) -> TurnResult:
        """Parse one raw response, apply it, and advance the prompt."""
        if self.finished:
            raise SessionFinished("game already finished")
        step = self.step_kind
        self.transcript.append("response", text=raw_text, latency_ms=latency_ms, **(stats or {}))
        try:
            parsed: ParsedAction = parse_response(
                raw_text, step, self.strategy, require_reasoning=self.require_reasoning
            )
        except MissingReasoning:
            return self._handle_error(RetryKind.MISSING_REASONING)
        except FormatError:
            return self._handle_error(RetryKind.FORMAT)

        action = parsed.action
        feedback: Optional[Feedback] = None
        try:
            if isinstance(action, Proposal):
                self.state = engine.submit_proposal(self.state, action.code)
            elif isinstance(action, VerifierChoice):
                self.state, feedback = engine.query_verifier(self.state, action.slot)
            elif isinstance(action, Skip) and step is StepKind.QUESTION:
                self.state = engine.end_question_phase(self.state)
            else:
                self.state = engine.deduce(self.state, action)
        except engine.InvalidSlotError:
            return self._handle_error(
                RetryKind.INVALID_VERIFIER,
                verifier_num=action.slot if isinstance(action, VerifierChoice) else None,
            )
        except engine.GameError:
            return self._handle_error(RetryKind.FORMAT)

        self.ledger.record_success()
        self.transcript.append(
            "action",
            round=self.state.round_number,
            action=action_to_record(action),
            reasoning=parsed.reasoning,
        )
        if feedback is not None:
            self.transcript.append(
                "feedback",
                round=feedback.round_number,
                slot=feedback.queried_slot,
                result=feedback.result,
            )
        if self.state.finished:
            outcome = self._finalize()
            text = self._result_prompt()
            self._record_prompt(text, Step.DEDUCE_RESULT)
            return TurnResult(kind="final", prompt=text, feedback=feedback, outcome=outcome)
        prompt = self._next_prompt()
        self._record_prompt(prompt, _step_for_phase(self.state))
        return TurnResult(kind="ok", prompt=prompt, feedback=feedback)


def _step_for_phase(state: GameState) -> Step:
    if state.phase is engine.Phase.PROPOSAL:
        return Step.PROPOSAL
    if state.phase is engine.Phase.QUESTION:
        return Step.QUESTION_FIRST if state.queries_this_round == 0 else Step.QUESTION_FOLLOWING
    if state.phase is engine.Phase.DEDUCE:
        return (
            Step.QUESTION_LAST
            if state.queries_this_round >= engine.MAX_QUERIES_PER_ROUND
            else Step.DEDUCE
        )
    return Step.DEDUCE_RESULT


def _retry_step_name(step: StepKind, kind: RetryKind) -> str:
    if kind is RetryKind.INVALID_VERIFIER:
        return Step.RETRY_INVALID_VERIFIER.value
    return {
        StepKind.PROPOSAL: Step.RETRY_FORMAT_PROPOSAL,
        StepKind.QUESTION: Step.RETRY_FORMAT_QUESTION,
        StepKind.DEDUCE: Step.RETRY_FORMAT_DEDUCE,
    }[step].value


def rebuild_session(
    setup: GameSetup,
    strategy: Strategy,
    pack: TemplatePack,
    transcript: Transcript,
    participant: str = "agent:unknown",
    retry_bound: int = RETRY_BOUND,
) -> ProtocolSession:
    """Reconstruct a live session from its persisted event log.

    Actions are re-applied through a fresh engine (so the rebuilt state is
    exactly the recorded one), counters are restored from retry events, and
    the current prompt is the last prompt recorded -- nothing is re-issued.
    """
    session = ProtocolSession.__new__(ProtocolSession)
    session.setup = setup
    session.strategy = Strategy(strategy)
    session.pack = pack
    session.participant = participant
    session.require_reasoning = not participant.startswith("human")
    session.retry_bound = retry_bound
    session.state = engine.new_session(setup)
    session.ledger = RetryLedger()
    session.forfeit_reason = None
    session._outcome = None
    session.transcript = transcript
    session._current_prompt = ""

    for event in transcript.events:
        kind = event["event"]
        if kind == "action":
            action = record_to_action(event["action"])
            session.state, _ = engine.apply_action(session.state, action)
            session.ledger.record_success()
        elif kind == "retry":
            session.ledger._bump(StepKind(event["step"]), RetryKind(event["kind"]))
        elif kind == "outcome":
            session._outcome = {k: v for k, v in event.items() if k not in ("event", "seq", "at")}
            if event["outcome"] == "forfeit":
                session.forfeit_reason = event.get("reason") or "retries"
        elif kind == "prompt":
            session._current_prompt = event["text"]
    return session
