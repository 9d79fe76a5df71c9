"""Agent contract: raw prompt text in, raw response text out.

Agents never see game secrets; their whole world is the rendered prompt
stream and whatever they said before. reset() clears per-game state so one
instance can play several games in sequence.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable


@runtime_checkable
class Agent(Protocol):
    name: str

    def receive(self, prompt: str) -> str:
        ...

    def reset(self) -> None:
        ...


class AgentError(RuntimeError):
    """Unrecoverable agent-side failure; the driver records a forfeit."""


# Stage markers inside the rendered prompt text. Checked most-specific first:
# the combined third-feedback prompt also contains question text, and the
# opening prompt contains the system text above the proposal stage.
DEDUCE_MARKER = "**Deduce Stage**"
PROPOSAL_MARKER = "**Proposal Stage**"
QUESTION_MARKER = "Verifier Questioning Stage"
RESULT_MARKER = "The final guess is"


def detect_stage(prompt: str) -> str:
    """Which response the prompt is asking for: proposal, question, or deduce."""
    if DEDUCE_MARKER in prompt:
        return "deduce"
    if PROPOSAL_MARKER in prompt or "Reply the code you want to use" in prompt:
        return "proposal"
    if RESULT_MARKER in prompt:
        return "result"
    return "question"
