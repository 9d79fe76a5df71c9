"""Reasoning-trace evaluation: extract per-verifier conclusions and judge them.

Extraction pulls explicit claims about a verifier's hidden rule out of the
reasoning blocks of a transcript, either with deterministic patterns (the
solver's structured claim lines plus a small phrase grammar for plain
wording) or through an external completion endpoint. Judging compares a claim
against the true active criterion extensionally over the 125-code space:

  Correct   -- the claim pins down exactly the truth's extension;
  Include   -- the truth is among several admitted, non-equivalent rules;
  Incorrect -- anything else.

Unresolvable external judgments are counted separately, never folded into
accuracy.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import httpx

from .catalog import Criterion
from .dsl import ParseError, extension_mask, parse_rule
from .transcripts import Transcript

CLAIM_LINE_RE = re.compile(r"^\s*\[claim\]\s*verifier\s+(\d+)\s*:\s*(.+?)\s*$", re.MULTILINE)

_NL_CLAIM_RE = re.compile(
    r"verifier\s+#?(\d+)\b[^.;\n]*?"
    r"\b(?:is|must be|seems to be|appears to be|could be|probably|likely|"
    r"checks?|checking|verifying|verifies|testing|tests|enforces|enforcing|requires)\b(.*)",
    re.IGNORECASE,
)

_COLOR_WORD = r"(blue|yellow|purple)"
_OPERAND = r"(blue|yellow|purple|\d+)"

_NL_RULES = [
    (re.compile(rf"{_COLOR_WORD}\s+(?:is\s+)?(?:equal to|equals|=)\s+{_OPERAND}", re.I), "="),
    (re.compile(rf"{_COLOR_WORD}\s+(?:is\s+)?(?:less than|smaller than|below|<)\s+{_OPERAND}", re.I), "<"),
    (re.compile(rf"{_COLOR_WORD}\s+(?:is\s+)?(?:greater than|larger than|bigger than|more than|above|>)\s+{_OPERAND}", re.I), ">"),
]
_NL_SUM_RE = re.compile(
    r"(?:the\s+)?sum\s+(?:of\s+(?:all\s+)?(?:the\s+)?digits\s+)?(?:is\s+)?"
    r"(equal to|equals|=|less than|smaller than|below|<|greater than|larger than|more than|above|>)\s+(\d+)",
    re.I,
)
_NL_PARITY_RE = re.compile(rf"(?:the\s+sum|sum|{_COLOR_WORD})\s+is\s+(even|odd)", re.I)

_SUM_OPS = {
    "equal to": "=", "equals": "=", "=": "=",
    "less than": "<", "smaller than": "<", "below": "<", "<": "<",
    "greater than": ">", "larger than": ">", "more than": ">", "above": ">", ">": ">",
}


def _phrase_rules(text: str) -> list[str]:
    """Translate simple natural phrasings into DSL rule strings."""
    rules = []
    for pattern, op in _NL_RULES:
        for match in pattern.finditer(text):
            left = match.group(1).upper()
            right = match.group(2).upper()
            rules.append(f"{left} {op} {right}")
    for match in _NL_SUM_RE.finditer(text):
        rules.append(f"SUM {_SUM_OPS[match.group(1).lower()]} {match.group(2)}")
    for match in _NL_PARITY_RE.finditer(text):
        target = match.group(1)
        parity = match.group(2).upper()
        if target is None:
            rules.append(f"PARITY(SUM) = {parity}")
        else:
            rules.append(f"PARITY({target.upper()}) = {parity}")
    seen: set[str] = set()
    unique = []
    for rule in rules:
        if rule not in seen:
            seen.add(rule)
            unique.append(rule)
    return unique


@dataclass(frozen=True)
class ExtractedConclusion:
    transcript_id: str
    round_number: int
    slot: int  # 1-based verifier slot
    rules: tuple[str, ...] = ()  # DSL rule strings the claim admits
    raw_text: Optional[str] = None  # free text pending an external judge

    @property
    def structured(self) -> bool:
        return bool(self.rules)


def extract_from_reasoning(
    transcript_id: str, round_number: int, text: str
) -> list[ExtractedConclusion]:
    """Deterministic extraction from one reasoning block.

    Structured claim lines win; the phrase grammar covers plain wording about
    slots that carry no structured claim. Untranslatable claims come back as
    raw text for the external judge.
    """
    conclusions = []
    claimed_slots = set()
    for match in CLAIM_LINE_RE.finditer(text):
        slot = int(match.group(1))
        rules = tuple(r.strip() for r in match.group(2).split("|") if r.strip())
        claimed_slots.add(slot)
        conclusions.append(ExtractedConclusion(transcript_id, round_number, slot, rules))
    for match in _NL_CLAIM_RE.finditer(text):
        slot = int(match.group(1))
        if slot in claimed_slots:
            continue
        rules = tuple(_phrase_rules(match.group(2)))
        if rules:
            conclusions.append(ExtractedConclusion(transcript_id, round_number, slot, rules))
        else:
            conclusions.append(
                ExtractedConclusion(
                    transcript_id, round_number, slot, raw_text=match.group(0).strip()
                )
            )
    return conclusions


def extract_pattern(transcript: Transcript) -> list[ExtractedConclusion]:
    """Deterministic extractor over the transcript's reasoning blocks.

    Returns one conclusion per claim found; transcripts without reasoning
    (answer-only runs) yield an empty list.
    """
    conclusions = []
    for event in transcript.reasoning_blocks():
        conclusions.extend(
            extract_from_reasoning(transcript.setup_id, event["round"], event["reasoning"])
        )
    return conclusions


_EXTERNAL_LINE_RE = re.compile(r"^\s*SLOT\s+(\d+)\s*:\s*(.+?)\s*$", re.MULTILINE)

EXTRACTOR_INSTRUCTIONS = (
    "Read the reasoning below. For every verifier whose hidden rule the author "
    "explicitly claims to have identified or narrowed down, reply with one line "
    "per verifier in the exact form 'SLOT <n>: <rule>[ | <rule>...]' using the "
    "rule notation from the verifier list. Reply 'NONE' if no claims are made.\n"
)


def extract_external(
    transcript: Transcript,
    verifier_descriptions: str,
    config,
    transport: Optional[httpx.BaseTransport] = None,
) -> list[ExtractedConclusion]:
    """Send each reasoning block to a completion endpoint; parse its reply."""
    from .agents.llm import ChatCompletionAgent

    agent = ChatCompletionAgent(config, transport=transport)
    conclusions = []
    try:
        for event in transcript.reasoning_blocks():
            agent.reset()
            prompt = (
                EXTRACTOR_INSTRUCTIONS
                + "\nVerifiers:\n" + verifier_descriptions
                + "\n\nReasoning:\n" + event["reasoning"]
            )
            reply = agent.receive(prompt)
            for match in _EXTERNAL_LINE_RE.finditer(reply):
                slot = int(match.group(1))
                rules = tuple(r.strip() for r in match.group(2).split("|") if r.strip())
                conclusions.append(
                    ExtractedConclusion(transcript.setup_id, event["round"], slot, rules)
                )
    finally:
        agent.close()
    return conclusions


# --- judging -------------------------------------------------------------------


class Category(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    INCLUDE = "include"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class Judgment:
    transcript_id: str
    round_number: int
    slot: int
    category: Category
    rationale: str
    judge: str
    claim: tuple[str, ...] = ()


class UnjudgeableClaim(ValueError):
    """Claim could not be normalized to rules; route it to the external judge."""


def judge_deterministic(conclusion: ExtractedConclusion, truth: Criterion) -> Judgment:
    """Extensional comparison of a normalized claim against the active rule."""
    if not conclusion.rules:
        raise UnjudgeableClaim(f"no normalized rules in {conclusion!r}")
    truth_mask = extension_mask(truth.expr)
    masks = []
    for rule in conclusion.rules:
        try:
            masks.append(extension_mask(parse_rule(rule)))
        except ParseError as exc:
            raise UnjudgeableClaim(f"unparseable rule {rule!r}: {exc}") from exc
    distinct = sorted(set(masks))
    if len(distinct) == 1 and distinct[0] == truth_mask:
        category = Category.CORRECT
        why = "claim is extensionally identical to the active rule"
    elif truth_mask in distinct:
        category = Category.INCLUDE
        why = f"active rule is one of {len(distinct)} admitted alternatives"
    else:
        category = Category.INCORRECT
        why = "no admitted alternative matches the active rule's extension"
    return Judgment(
        transcript_id=conclusion.transcript_id,
        round_number=conclusion.round_number,
        slot=conclusion.slot,
        category=category,
        rationale=why,
        judge="deterministic",
        claim=conclusion.rules,
    )


JUDGE_INSTRUCTIONS = (
    "You grade a claim about a hidden verifier rule against the true rule.\n"
    "Reply with exactly one word: Correct if the claim is semantically "
    "equivalent to the true rule, Include if the claim admits several "
    "possibilities and the true rule is among them, Incorrect otherwise.\n"
)

_JUDGE_REPLY_RE = re.compile(r"\b(Correct|Incorrect|Include)\b")


def judge_external(
    conclusion: ExtractedConclusion,
    truth_description: str,
    config,
    transport: Optional[httpx.BaseTransport] = None,
    attempts: int = 3,
) -> Judgment:
    """Ask a completion endpoint to grade a claim; Unresolved after retries."""
    from .agents.llm import ChatCompletionAgent

    claim_text = conclusion.raw_text or " | ".join(conclusion.rules)
    prompt = (
        JUDGE_INSTRUCTIONS
        + f"\nTrue rule: {truth_description}"
        + f"\nClaim: {claim_text}\n"
    )
    agent = ChatCompletionAgent(config, transport=transport)
    try:
        for _ in range(attempts):
            agent.reset()
            reply = agent.receive(prompt)
            match = _JUDGE_REPLY_RE.search(reply)
            if match is not None:
                return Judgment(
                    transcript_id=conclusion.transcript_id,
                    round_number=conclusion.round_number,
                    slot=conclusion.slot,
                    category=Category(match.group(1).lower()),
                    rationale=reply.strip()[:500],
                    judge=f"external:{config.model}",
                    claim=conclusion.rules,
                )
    finally:
        agent.close()
    return Judgment(
        transcript_id=conclusion.transcript_id,
        round_number=conclusion.round_number,
        slot=conclusion.slot,
        category=Category.UNRESOLVED,
        rationale="judge reply carried no category after retries",
        judge=f"external:{config.model}",
        claim=conclusion.rules,
    )


def flag_disagreements(
    deterministic: Sequence[Judgment], external: Sequence[Judgment]
) -> list[tuple[str, int, int]]:
    """(transcript, round, slot) keys where the two judges disagree.

    Only conclusions judged by both sides are compared; flagged keys feed the
    manual-audit queue. Unresolved external judgments always flag.
    """
    by_key = {
        (j.transcript_id, j.round_number, j.slot): j.category for j in deterministic
    }
    flagged = []
    for judgment in external:
        key = (judgment.transcript_id, judgment.round_number, judgment.slot)
        baseline = by_key.get(key)
        if baseline is None:
            continue
        if judgment.category is Category.UNRESOLVED or judgment.category is not baseline:
            flagged.append(key)
    return sorted(set(flagged))


# --- audit sampling --------------------------------------------------------------

LOSS_WEIGHT = 2.0  # losing games are over-represented in manual audits


@dataclass(frozen=True)
class AuditSample:
    selected: tuple[str, ...]  # transcript refs
    strata: dict[str, str] = field(default_factory=dict)  # ref -> stratum label
    seed: int = 0
    fraction: float = 0.0


def sample_audit(summaries: Sequence, fraction: float, seed: int) -> AuditSample:
    """Stratified by (mode, difficulty, outcome); losses weighted up; seeded."""
    if not summaries:
        raise ValueError("empty corpus")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    target = max(1, round(fraction * len(summaries)))

    strata: dict[tuple[str, str, str], list] = {}
    for summary in summaries:
        key = (summary.mode, summary.difficulty, summary.outcome)
        strata.setdefault(key, []).append(summary)
    for members in strata.values():
        members.sort(key=lambda s: s.setup_id)

    def weight(key: tuple[str, str, str]) -> float:
        factor = 1.0 if key[2] == "won" else LOSS_WEIGHT
        return factor * len(strata[key])

    keys = sorted(strata)
    alloc = {key: 0 for key in keys}
    remaining = target
    open_keys = set(keys)
    while remaining > 0 and open_keys:
        total_weight = sum(weight(k) for k in open_keys)
        shares = {k: remaining * weight(k) / total_weight for k in open_keys}
        placed = 0
        for k in sorted(open_keys, key=lambda k: (-(shares[k] % 1), k)):
            room = len(strata[k]) - alloc[k]
            take = min(int(shares[k]), room)
            alloc[k] += take
            placed += take
        if placed == 0:  # all integral shares were zero; hand out by remainder
            for k in sorted(open_keys, key=lambda k: (-(shares[k] % 1), k)):
                if alloc[k] < len(strata[k]):
                    alloc[k] += 1
                    placed += 1
                    if placed >= remaining:
                        break
        remaining = target - sum(alloc.values())
        open_keys = {k for k in open_keys if alloc[k] < len(strata[k])}

    rng = random.Random(seed)
    selected = []
    labels = {}
    for key in keys:
        label = "/".join(key)
        chosen = rng.sample(strata[key], alloc[key]) if alloc[key] else []
        for summary in chosen:
            selected.append(summary.setup_id)
            labels[summary.setup_id] = label
    return AuditSample(selected=tuple(selected), strata=labels, seed=seed, fraction=fraction)
