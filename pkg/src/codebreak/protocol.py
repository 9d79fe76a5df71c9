"""The text protocol: prompt templates, response parsing, retry policy.

Templates are shipped as plain-text assets keyed by (mode, strategy, step) and
rendered by literal placeholder substitution, so equal inputs always produce
byte-identical prompts. Responses are parsed from the last `<CHOICE>:` line;
Chain-of-Thought runs additionally require a `<REASONING>:` block. Errors are
classified, counted, and answered with the matching retry prompt until the
per-step bound is exhausted.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Optional, Union

from .dsl import Code
from .engine import Action, Proposal, Skip, Submit, VerifierChoice
from .setups import Mode, PublicSetup

RETRY_BOUND = 3  # errors tolerated per step; one more forfeits the game


class Strategy(str, Enum):
    OA = "oa"  # answer only
    COT = "cot"  # chain of thought


class Step(str, Enum):
    SYSTEM = "system"
    PROPOSAL = "proposal"
    QUESTION_FIRST = "question_first"
    QUESTION_FOLLOWING = "question_following"
    QUESTION_LAST = "question_last"
    DEDUCE = "deduce"
    DEDUCE_RESULT = "deduce_result"
    RETRY_FORMAT_PROPOSAL = "proposal_retry_format"
    RETRY_FORMAT_QUESTION = "question_retry_format"
    RETRY_FORMAT_DEDUCE = "deduce_retry_format"
    RETRY_INVALID_VERIFIER = "question_retry_verifier"


# Steps whose template text does not vary with the prompting strategy.
_STRATEGY_FREE = {Step.SYSTEM, Step.DEDUCE_RESULT}

PLACEHOLDERS = (
    "game_setup",
    "verifier_descriptions",
    "verifier_num",
    "verifier_result",
    "submitted_code",
    "answer",
    "is_correct",
)

_PLACEHOLDER_RE = re.compile(r"\{(" + "|".join(PLACEHOLDERS) + r")\}")


class TemplateError(KeyError):
    pass


class RenderError(ValueError):
    pass


class TemplatePack:
    """All prompt templates for both modes and strategies, checksummed."""

    def __init__(self, bodies: dict[tuple[Mode, Strategy, Step], str]):
        self._bodies = bodies
        digest = hashlib.sha256()
        for key in sorted(bodies, key=lambda k: (k[0].value, k[1].value, k[2].value)):
            digest.update("/".join(part.value for part in key).encode())
            digest.update(b"\0")
            digest.update(bodies[key].encode())
        self.checksum = digest.hexdigest()

    def body(self, mode: Mode, strategy: Strategy, step: Step) -> str:
        try:
            key = (Mode(mode), Strategy(strategy), Step(step))
            return self._bodies[key]
        except (KeyError, ValueError):
            raise TemplateError(f"no template for {mode}/{strategy}/{step}") from None

    def render(self, mode: Mode, strategy: Strategy, step: Step, **context: object) -> str:
        """Substitute placeholders; unresolved ones are an error."""
        body = self.body(mode, strategy, step)

        def substitute(match: re.Match) -> str:
            name = match.group(1)
            if name not in context or context[name] is None:
                raise RenderError(f"missing placeholder value {name!r} for {step.value}")
            return str(context[name])

        return _PLACEHOLDER_RE.sub(substitute, body)


def load_template_pack() -> TemplatePack:
    """Load the packaged template assets."""
    root = resources.files("codebreak.templates")
    bodies: dict[tuple[Mode, Strategy, Step], str] = {}
    for mode in Mode:
        mode_dir = root.joinpath(mode.value)
        for strategy in Strategy:
            for step in Step:
                if step in _STRATEGY_FREE:
                    path = mode_dir.joinpath(f"{step.value}.txt")
                else:
                    path = mode_dir.joinpath(strategy.value).joinpath(f"{step.value}.txt")
                bodies[(mode, strategy, step)] = path.read_text()
    return TemplatePack(bodies)


def describe_verifiers(setup: PublicSetup) -> str:
    """The {verifier_descriptions} payload: every card with its candidate rules."""
    lines = []
    for slot, card in enumerate(setup.cards, start=1):
        lines.append(f"Verifier {slot}: {card.name}")
        for i, criterion in enumerate(card.criteria, start=1):
            lines.append(f"  Criterion {i}: {criterion.description}")
    return "\n".join(lines)


def describe_setup(setup: PublicSetup) -> str:
    """The {game_setup} payload: mode, difficulty, and the verifier roster."""
    return (
        f"Mode: {setup.mode.value.capitalize()}\n"
        f"Difficulty: {setup.difficulty.value.capitalize()}\n"
        f"Verifiers: {len(setup.cards)}\n\n" + describe_verifiers(setup)
    )


# --- response parsing ----------------------------------------------------------


class ResponseError(ValueError):
    """Base for retryable response problems."""


class FormatError(ResponseError):
    pass


class MissingReasoning(ResponseError):
    pass


@dataclass(frozen=True)
class ParsedAction:
    action: Action
    reasoning: Optional[str] = None


class StepKind(str, Enum):
    """Which action kinds a response may carry, by protocol position."""

    PROPOSAL = "proposal"
    QUESTION = "question"
    DEDUCE = "deduce"


_CHOICE_RE = re.compile(r"<\s*CHOICE\s*>\s*:(?P<value>[^\n]*)", re.IGNORECASE)
_REASONING_RE = re.compile(
    r"<\s*REASONING\s*>\s*:\s*(?P<body>.*?)(?=<\s*CHOICE\s*>|\Z)",
    re.IGNORECASE | re.DOTALL,
)
_CODE_RE = re.compile(
    r"^BLUE\s*=\s*(\d)\s*,\s*YELLOW\s*=\s*(\d)\s*,\s*PURPLE\s*=\s*(\d)$",
    re.IGNORECASE,
)
_NUMBER_RE = re.compile(r"^\d+$")


def _parse_code(value: str) -> Optional[Code]:
    match = _CODE_RE.match(value)
    if match is None:
        return None
    digits = tuple(int(g) for g in match.groups())
    if not all(1 <= d <= 5 for d in digits):
        return None
    return Code(*digits)


def parse_response(
    text: str,
    step_kind: StepKind,
    strategy: Strategy,
    require_reasoning: Optional[bool] = None,
) -> ParsedAction:
    """Extract the last <CHOICE> line (and, in CoT, the <REASONING> block).

    Tolerates surrounding prose; strict on tag syntax; color names are
    case-insensitive and whitespace around separators is ignored. Raises
    FormatError / MissingReasoning, both of which are retryable.

    require_reasoning defaults to the strategy's rule (mandatory in CoT);
    pass False for human play, where reasoning notes are optional.
    """
    step_kind = StepKind(step_kind)
    if require_reasoning is None:
        require_reasoning = strategy is Strategy.COT
    choices = list(_CHOICE_RE.finditer(text))
    if not choices:
        raise FormatError("no <CHOICE> tag found")
    value = choices[-1].group("value").strip()

    reasoning: Optional[str] = None
    if strategy is Strategy.COT:
        blocks = list(_REASONING_RE.finditer(text))
        if not blocks and require_reasoning:
            raise MissingReasoning("no <REASONING> block found")
        if blocks:
            reasoning = blocks[-1].group("body").strip()

    is_skip = value.upper() == "SKIP"
    if step_kind is StepKind.PROPOSAL:
        code = _parse_code(value)
        if code is None:
            raise FormatError(f"expected a code of the form BLUE=X, YELLOW=Y, PURPLE=Z, got {value!r}")
        return ParsedAction(Proposal(code), reasoning)
    if step_kind is StepKind.QUESTION:
        if is_skip:
            return ParsedAction(Skip(), reasoning)
        if _NUMBER_RE.match(value):
            return ParsedAction(VerifierChoice(int(value)), reasoning)
        raise FormatError(f"expected a verifier number or SKIP, got {value!r}")
    if is_skip:
        return ParsedAction(Skip(), reasoning)
    code = _parse_code(value)
    if code is None:
        raise FormatError(f"expected SKIP or a final code, got {value!r}")
    return ParsedAction(Submit(code), reasoning)


def format_action(action: Action, reasoning: Optional[str] = None) -> str:
    """Canonical wire text for an action; parse_response inverts it."""
    if isinstance(action, (Proposal, Submit)):
        value = action.code.text()
    elif isinstance(action, VerifierChoice):
        value = str(action.slot)
    elif isinstance(action, Skip):
        value = "SKIP"
    else:
        raise TypeError(f"unknown action {action!r}")
    if reasoning is not None:
        return f"<REASONING>: {reasoning}\n<CHOICE>: {value}"
    return f"<CHOICE>: {value}"


# --- retry policy ---------------------------------------------------------------


class RetryKind(str, Enum):
    FORMAT = "format"
    MISSING_REASONING = "missing_reasoning"
    INVALID_VERIFIER = "invalid_verifier"


@dataclass
class RetryLedger:
    """Per-game error accounting; counters only ever grow."""

    format_errors: dict[str, int] = field(default_factory=dict)
    illegal_actions: dict[str, int] = field(default_factory=dict)
    consecutive: int = 0
    consecutive_step: Optional[str] = None

    @property
    def total_format_errors(self) -> int:
        return sum(self.format_errors.values())

    @property
    def total_illegal_actions(self) -> int:
        return sum(self.illegal_actions.values())

    def record_success(self) -> None:
        self.consecutive = 0
        self.consecutive_step = None

    def _bump(self, step: StepKind, kind: RetryKind) -> None:
        bucket = (
            self.illegal_actions if kind is RetryKind.INVALID_VERIFIER else self.format_errors
        )
        bucket[step.value] = bucket.get(step.value, 0) + 1
        if self.consecutive_step != step.value:
            self.consecutive = 0
            self.consecutive_step = step.value
        self.consecutive += 1


_RETRY_STEP = {
    StepKind.PROPOSAL: Step.RETRY_FORMAT_PROPOSAL,
    StepKind.QUESTION: Step.RETRY_FORMAT_QUESTION,
    StepKind.DEDUCE: Step.RETRY_FORMAT_DEDUCE,
}


def retry(
    ledger: RetryLedger,
    error_kind: RetryKind,
    step: StepKind,
    mode: Mode,
    strategy: Strategy,
    pack: TemplatePack,
    verifier_num: Optional[object] = None,
) -> tuple[str, RetryLedger, bool]:
    """Render the matching retry prompt and update the error counters.

    give_up turns true once the same step accumulates more than RETRY_BOUND
    consecutive errors; the game is then recorded as a forfeit.
    """
    error_kind = RetryKind(error_kind)
    step = StepKind(step)
    ledger._bump(step, error_kind)
    give_up = ledger.consecutive > RETRY_BOUND
    if error_kind is RetryKind.INVALID_VERIFIER:
        text = pack.render(
            mode, strategy, Step.RETRY_INVALID_VERIFIER, verifier_num=verifier_num
        )
    else:
        text = pack.render(mode, strategy, _RETRY_STEP[step])
    return text, ledger, give_up
