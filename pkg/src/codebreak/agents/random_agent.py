"""Blind baseline: propose one uniform random code and submit it immediately.

Queries no verifiers, so its win probability is exactly 1/125 per game.
"""

from __future__ import annotations

import random

from ..dsl import DIGITS, Code
from ..protocol import Strategy
from .base import detect_stage


class RandomAgent:
    def __init__(self, seed: int, strategy: Strategy = Strategy.OA):
        self.name = "random"
        self.strategy = Strategy(strategy)
        self._rng = random.Random(seed)
        self._code: Code | None = None

    def reset(self) -> None:
        self._code = None

    def _respond(self, value: str, why: str) -> str:
        if self.strategy is Strategy.COT:
            return f"<REASONING>: {why}\n<CHOICE>: {value}"
        return f"<CHOICE>: {value}"

    def receive(self, prompt: str) -> str:
        stage = detect_stage(prompt)
        if stage == "proposal":
            self._code = Code(*(self._rng.choice(DIGITS) for _ in range(3)))
            return self._respond(self._code.text(), "Guessing a code uniformly at random.")
        if stage == "question":
            return self._respond("SKIP", "Not testing any verifiers.")
        if stage == "deduce":
            assert self._code is not None, "deduce before any proposal"
            return self._respond(self._code.text(), "Submitting the random guess.")
        return ""
