"""Exact candidate-set solver for Classic and Nightmare games.

The solver materializes every hypothesis consistent with the public setup and
the game's meta-rules: all criterion assignments that leave exactly one
satisfying code with no redundant verifier and, in Nightmare, the cross
product with every slot permutation. Engine feedback removes exactly the
hypotheses that predicted the opposite result, so the truth always survives.

Probes are chosen greedily: the (proposal, slot) pair maximizing the minimum
number of hypotheses eliminated across the PASS and FAIL outcomes, ties
broken by lowest slot then lexicographic code. The solver submits only when
no probe can split the surviving set, at which point every survivor implies
the same code and, in Classic, every verifier's rule is pinned down.

Assignments are indexed into bitmask sets (one mask per permutation block) so
pruning is AND/ANDNOT and wholesale permutation refutation is a zero test.
"""

from __future__ import annotations

import itertools
import re
from typing import Optional

from ..dsl import ALL_CODES, FULL_MASK, Code, code_index, extension_mask
from ..protocol import Strategy
from ..setups import Mode, PublicSetup
from .base import detect_stage

FEEDBACK_RE = re.compile(r"You chose Verifier <(\d+)> and the result is <(PASS|FAIL)>")

CLAIM_PREFIX = "[claim]"


class SolverState:
    """Surviving (assignment, permutation) hypotheses plus probe machinery."""

    def __init__(self, view: PublicSetup, use_meta_rules: bool = True):
        self.cards = view.cards
        self.n = len(view.cards)
        self.use_meta_rules = use_meta_rules
        self.ext = [
            [extension_mask(c.expr) for c in card.criteria] for card in view.cards
        ]
        self.ext_codes = [
            [[ci for ci in range(len(ALL_CODES)) if mask >> ci & 1] for mask in row]
            for row in self.ext
        ]
        self.assignments: list[tuple[int, ...]] = []
        self.joint_masks: list[int] = []
        self._enumerate()
        self.v = len(self.assignments)
        self.full_v = (1 << self.v) - 1

        # group_masks[p][k]: assignments whose slot p runs criterion k
        self.group_masks = [[0] * len(card.criteria) for card in view.cards]
        for i, assignment in enumerate(self.assignments):
            for p, k in enumerate(assignment):
                self.group_masks[p][k] |= 1 << i

        if view.mode is Mode.NIGHTMARE:
            perms = list(itertools.permutations(range(self.n)))
        else:
            perms = [tuple(range(self.n))]
        self.survivors: dict[tuple[int, ...], int] = {perm: self.full_v for perm in perms}
        self._pass_masks: dict[tuple[int, int], int] = {}

    def _enumerate(self) -> None:
        n = self.n
        chosen = [0] * n

        def necessary(joint_unused: int) -> bool:
            for i in range(n):
                rest = FULL_MASK
                for j in range(n):
                    if j != i:
                        rest &= self.ext[j][chosen[j]]
                if rest.bit_count() < 2:
                    return False
            return True

        def descend(depth: int, joint: int) -> None:
            if depth == n:
                if self.use_meta_rules:
                    if joint.bit_count() == 1 and necessary(joint):
                        self.assignments.append(tuple(chosen))
                        self.joint_masks.append(joint)
                else:
                    self.assignments.append(tuple(chosen))
                    self.joint_masks.append(joint)
                return
            for k in range(len(self.ext[depth])):
                narrowed = joint & self.ext[depth][k]
                if narrowed:
                    chosen[depth] = k
                    descend(depth + 1, narrowed)

        descend(0, FULL_MASK)

    # -- candidate bookkeeping ------------------------------------------------

    def candidate_count(self) -> int:
        return sum(surv.bit_count() for surv in self.survivors.values())

    def alive_permutations(self) -> list[tuple[int, ...]]:
        return list(self.survivors)

    def has_hypothesis(self, assignment: tuple[int, ...], permutation: tuple[int, ...]) -> bool:
        surv = self.survivors.get(tuple(permutation))
        if surv is None:
            return False
        try:
            index = self.assignments.index(tuple(assignment))
        except ValueError:
            return False
        return bool(surv >> index & 1)

    def _union_assignments(self) -> int:
        union = 0
        for surv in self.survivors.values():
            union |= surv
        return union

    def _pass_mask(self, p: int, ci: int) -> int:
        """Assignments whose slot-p criterion accepts code index ci."""
        key = (p, ci)
        cached = self._pass_masks.get(key)
        if cached is None:
            cached = 0
            for k, ext in enumerate(self.ext[p]):
                if ext >> ci & 1:
                    cached |= self.group_masks[p][k]
            self._pass_masks[key] = cached
        return cached

    def prune(self, proposal: Code, queried_slot: int, passed: bool) -> None:
        """Drop every hypothesis predicting the opposite result."""
        ci = code_index(proposal)
        q = queried_slot - 1
        dead = []
        for perm, surv in self.survivors.items():
            mask = self._pass_mask(perm[q], ci)
            surv = surv & mask if passed else surv & ~mask & self.full_v
            if surv:
                self.survivors[perm] = surv
            else:
                dead.append(perm)
        for perm in dead:
            del self.survivors[perm]

    # -- probe selection --------------------------------------------------------

    def _slot_pass_counts(self, surv: int, p: int, cache: dict) -> list[int]:
        key = (surv, p)
        arr = cache.get(key)
        if arr is None:
            arr = [0] * len(ALL_CODES)
            for k, gm in enumerate(self.group_masks[p]):
                weight = (surv & gm).bit_count()
                if weight:
                    for ci in self.ext_codes[p][k]:
                        arr[ci] += weight
            cache[key] = arr
        return arr

    def probe_table(self) -> tuple[int, list[list[int]]]:
        """total candidate count and pass-prediction counts per (slot, code)."""
        weights: dict[tuple[int, int], dict[int, int]] = {}
        total = 0
        for perm, surv in self.survivors.items():
            total += surv.bit_count()
            for q in range(self.n):
                bucket = weights.setdefault((q, perm[q]), {})
                bucket[surv] = bucket.get(surv, 0) + 1
        cache: dict = {}
        combined = [[0] * len(ALL_CODES) for _ in range(self.n)]
        for (q, p), bucket in weights.items():
            row = combined[q]
            for surv, w in bucket.items():
                arr = self._slot_pass_counts(surv, p, cache)
                if w == 1:
                    for ci in range(len(ALL_CODES)):
                        row[ci] += arr[ci]
                else:
                    for ci in range(len(ALL_CODES)):
                        row[ci] += w * arr[ci]
        return total, combined

    def best_probe(self) -> tuple[int, int, Code]:
        """(guaranteed eliminations, 1-based slot, code) of the best probe."""
        total, combined = self.probe_table()
        best_score, best_q, best_ci = -1, 0, 0
        for q in range(self.n):
            row = combined[q]
            for ci in range(len(ALL_CODES)):
                score = min(row[ci], total - row[ci])
                if score > best_score:
                    best_score, best_q, best_ci = score, q, ci
        return best_score, best_q + 1, ALL_CODES[best_ci]

    def best_slot_for(self, code: Code) -> tuple[int, int]:
        """(guaranteed eliminations, 1-based slot) with the proposal locked."""
        total, combined = self.probe_table()
        ci = code_index(code)
        best_score, best_q = -1, 0
        for q in range(self.n):
            score = min(combined[q][ci], total - combined[q][ci])
            if score > best_score:
                best_score, best_q = score, q
        return best_score, best_q + 1

    def resolved_code(self) -> Optional[Code]:
        """The single code all survivors imply, if they agree."""
        union_codes = 0
        union = self._union_assignments()
        index = 0
        while union:
            if union & 1:
                union_codes |= self.joint_masks[index]
            union >>= 1
            index += 1
        if union_codes.bit_count() == 1:
            return ALL_CODES[union_codes.bit_length() - 1]
        return None

    def fallback_code(self) -> Code:
        """Lexicographically first code among survivors (only reachable when
        meta-rules are disabled and the survivors stay ambiguous)."""
        union_codes = 0
        union = self._union_assignments()
        index = 0
        while union:
            if union & 1:
                union_codes |= self.joint_masks[index]
            union >>= 1
            index += 1
        lowest = (union_codes & -union_codes).bit_length() - 1
        return ALL_CODES[lowest]

    def possible_rules(self, slot: int) -> list[int]:
        """Criterion indices still possible for a 0-based actual slot."""
        union = self._union_assignments()
        return [
            k for k, gm in enumerate(self.group_masks[slot]) if union & gm
        ]


def init_candidates(view: PublicSetup, use_meta_rules: bool = True) -> SolverState:
    """All hypotheses consistent with the public setup and the meta-rules."""
    return SolverState(view, use_meta_rules=use_meta_rules)


class OracleSolverAgent:
    """Speaks the text protocol; inner SolverState does the deduction."""

    def __init__(self, view: PublicSetup, strategy: Strategy = Strategy.COT,
                 use_meta_rules: bool = True):
        self.name = "oracle"
        self.view = view
        self.strategy = Strategy(strategy)
        self.use_meta_rules = use_meta_rules
        self.state = SolverState(view, use_meta_rules)
        self._proposal: Optional[Code] = None

    def reset(self) -> None:
        self.state = SolverState(self.view, self.use_meta_rules)
        self._proposal = None

    # -- reasoning text ---------------------------------------------------------

    def _claims(self) -> list[str]:
        lines = []
        for p in range(self.state.n):
            rules = [
                self.view.cards[p].criteria[k].rule_text
                for k in self.state.possible_rules(p)
            ]
            if rules:
                lines.append(f"{CLAIM_PREFIX} verifier {p + 1}: {' | '.join(rules)}")
        return lines

    def _respond(self, value: str, note: str) -> str:
        if self.strategy is Strategy.COT:
            body = "\n".join(
                [f"Surviving hypotheses: {self.state.candidate_count()}."]
                + self._claims()
                + [note]
            )
            return f"<REASONING>: {body}\n<CHOICE>: {value}"
        return f"<CHOICE>: {value}"

    # -- protocol ----------------------------------------------------------------

    def receive(self, prompt: str) -> str:
        fb = FEEDBACK_RE.search(prompt)
        if fb is not None:
            assert self._proposal is not None, "feedback before any proposal"
            self.state.prune(self._proposal, int(fb.group(1)), fb.group(2) == "PASS")

        stage = detect_stage(prompt)
        if stage == "proposal":
            score, slot, code = self.state.best_probe()
            if score <= 0:
                code = self.state.resolved_code() or self.state.fallback_code()
                self._proposal = code
                return self._respond(
                    code.text(), "No probe can split the hypotheses; closing out."
                )
            self._proposal = code
            return self._respond(
                code.text(),
                f"Probing {code.text()} (next: verifier {slot}) guarantees "
                f"eliminating {score} hypotheses.",
            )
        if stage == "question":
            assert self._proposal is not None
            score, slot = self.state.best_slot_for(self._proposal)
            if score <= 0:
                return self._respond("SKIP", "No verifier splits the hypotheses on this code.")
            return self._respond(
                str(slot),
                f"Verifier {slot} guarantees eliminating {score} hypotheses.",
            )
        if stage == "deduce":
            score, _, _ = self.state.best_probe()
            if score <= 0:
                code = self.state.resolved_code()
                if code is None:
                    code = self.state.fallback_code()
                    return self._respond(
                        code.text(), "Hypotheses exhausted without full resolution; guessing."
                    )
                return self._respond(code.text(), "Every surviving hypothesis agrees; submitting.")
            return self._respond("SKIP", "More information is still obtainable; continuing.")
        return ""
