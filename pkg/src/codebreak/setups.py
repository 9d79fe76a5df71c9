"""Game setup generation: hidden-criterion selection with provable uniqueness.

A setup fixes a card subset, one active criterion per card, and the secret
code. Two properties are enforced by brute force over the 125-code space:

  uniqueness -- exactly one code satisfies every active criterion;
  necessity  -- dropping any single card's criterion leaves at least two
                satisfying codes (no verifier is redundant).

Generation is deterministic per (mode, difficulty, seed, catalog version).
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .catalog import Catalog, VerifierCard
from .dsl import ALL_CODES, FULL_MASK, Code, PredicateExpr, extension_mask, mask_to_codes

SETUP_FORMAT = 1

# Verifier count per difficulty; more cards means a larger joint search space.
DIFFICULTY_CARDS = {"easy": 4, "medium": 5, "hard": 6}

MAX_SUBSET_RESTARTS = 1000
MAX_DEAD_ENDS_PER_SUBSET = 50_000


class Mode(str, Enum):
    CLASSIC = "classic"
    NIGHTMARE = "nightmare"


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"

    @property
    def card_count(self) -> int:
        return DIFFICULTY_CARDS[self.value]


class GenerationExhausted(RuntimeError):
    """No valid assignment found within the restart budget."""


@dataclass(frozen=True)
class GameSetup:
    setup_id: str
    mode: Mode
    difficulty: Difficulty
    cards: tuple[VerifierCard, ...]
    active_indices: tuple[int, ...]  # 0-based index into each card's criteria
    secret: Code
    permutation: tuple[int, ...]  # queried slot i (0-based) -> actual slot
    seed: int
    catalog_version: str

    @property
    def card_ids(self) -> tuple[str, ...]:
        return tuple(card.card_id for card in self.cards)

    def active_criterion(self, slot: int):
        """Active criterion of a 0-based actual slot."""
        return self.cards[slot].criteria[self.active_indices[slot]]


@dataclass(frozen=True)
class PublicSetup:
    """Everything a player may see: cards and mode, no secrets."""

    setup_id: str
    mode: Mode
    difficulty: Difficulty
    cards: tuple[VerifierCard, ...]


def public_view(setup: GameSetup) -> PublicSetup:
    return PublicSetup(
        setup_id=setup.setup_id,
        mode=setup.mode,
        difficulty=setup.difficulty,
        cards=setup.cards,
    )


def solve(criteria: Sequence[PredicateExpr]) -> set[Code]:
    """Brute-force intersection of the criteria's extensions over all 125 codes.

    This is the ground-truth oracle behind every uniqueness/necessity claim.
    """
    if not criteria:
        raise ValueError("need at least one criterion")
    mask = FULL_MASK
    for expr in criteria:
        mask &= extension_mask(expr)
    return set(mask_to_codes(mask))


@dataclass(frozen=True)
class CheckResult:
    valid: bool
    violation: Optional[str] = None  # "uniqueness" | "necessity"
    witness_codes: tuple[Code, ...] = ()
    witness_card: Optional[int] = None


def check_setup(active_indices: Sequence[int], cards: Sequence[VerifierCard]) -> CheckResult:
    """Validate uniqueness and necessity for one assignment."""
    masks = [
        extension_mask(card.criteria[index].expr)
        for card, index in zip(cards, active_indices)
    ]
    joint = FULL_MASK
    for mask in masks:
        joint &= mask
    if joint.bit_count() != 1:
        return CheckResult(
            valid=False,
            violation="uniqueness",
            witness_codes=tuple(mask_to_codes(joint)[:4]),
        )
    for i in range(len(masks)):
        rest = FULL_MASK
        for j, mask in enumerate(masks):
            if j != i:
                rest &= mask
        if rest.bit_count() < 2:
            return CheckResult(valid=False, violation="necessity", witness_card=i)
    return CheckResult(valid=True)


def _search_assignment(cards: Sequence[VerifierCard], rng: random.Random) -> Optional[tuple[int, ...]]:
    """Depth-first over criterion indices with incremental intersection pruning."""
    n = len(cards)
    card_masks = [[extension_mask(c.expr) for c in card.criteria] for card in cards]
    orders = [list(range(len(card.criteria))) for card in cards]
    for order in orders:
        rng.shuffle(order)

    chosen = [0] * n
    dead_ends = 0

    def descend(depth: int, joint: int) -> Optional[tuple[int, ...]]:
        nonlocal dead_ends
        if dead_ends > MAX_DEAD_ENDS_PER_SUBSET:
            return None
        if depth == n:
            if joint.bit_count() == 1 and check_setup(chosen, cards).valid:
                return tuple(chosen)
            dead_ends += 1
            return None
        for index in orders[depth]:
            narrowed = joint & card_masks[depth][index]
            if not narrowed:
                dead_ends += 1
                continue
            chosen[depth] = index
            found = descend(depth + 1, narrowed)
            if found is not None:
                return found
        return None

    return descend(0, FULL_MASK)


def _sample_permutation(n: int, rng: random.Random) -> tuple[int, ...]:
    slots = list(range(n))
    rng.shuffle(slots)
    return tuple(slots)


def sample_permutation(n: int, seed: int) -> tuple[int, ...]:
    """Uniform over all n! slot permutations; reproducible from the seed."""
    if not 4 <= n <= 6:
        raise ValueError(f"slot count {n} outside 4-6")
    return _sample_permutation(n, random.Random(seed))


def derive_seed(*parts: object) -> int:
    """Stable 64-bit child seed from a label path (independent of PYTHONHASHSEED)."""
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def generate_setup(
    mode: Mode,
    difficulty: Difficulty,
    seed: int,
    catalog: Catalog,
    setup_id: Optional[str] = None,
) -> GameSetup:
    """Draw cards and activate one criterion each so the secret is forced.

    Deterministic for fixed (mode, difficulty, seed, catalog version). Raises
    GenerationExhausted after MAX_SUBSET_RESTARTS card subsets fail.
    """
    mode = Mode(mode)
    difficulty = Difficulty(difficulty)
    n = difficulty.card_count
    if len(catalog.cards) < n:
        raise ValueError(f"catalog has {len(catalog.cards)} cards, need {n}")
    rng = random.Random(seed)

    for _ in range(MAX_SUBSET_RESTARTS):
        cards = tuple(rng.sample(list(catalog.cards), n))
        assignment = _search_assignment(cards, rng)
        if assignment is None:
            continue
        joint = FULL_MASK
        for card, index in zip(cards, assignment):
            joint &= extension_mask(card.criteria[index].expr)
        secret = mask_to_codes(joint)[0]
        if mode is Mode.NIGHTMARE:
            permutation = _sample_permutation(n, rng)
        else:
            permutation = tuple(range(n))
        return GameSetup(
            setup_id=setup_id or f"{mode.value}-{difficulty.value}-s{seed}",
            mode=mode,
            difficulty=difficulty,
            cards=cards,
            active_indices=assignment,
            secret=secret,
            permutation=permutation,
            seed=seed,
            catalog_version=catalog.version,
        )
    raise GenerationExhausted(
        f"no valid assignment after {MAX_SUBSET_RESTARTS} card subsets "
        f"({mode.value}/{difficulty.value}, seed {seed})"
    )


def generate_batch(
    mode: Mode,
    per_difficulty_count: int,
    seed: int,
    catalog: Catalog,
) -> list[GameSetup]:
    """per_difficulty_count setups for each of the three difficulties."""
    if per_difficulty_count < 1:
        raise ValueError("count must be >= 1")
    mode = Mode(mode)
    setups = []
    for difficulty in Difficulty:
        for i in range(per_difficulty_count):
            child = derive_seed(seed, mode.value, difficulty.value, i)
            setup_id = f"{mode.value}-{difficulty.value}-s{seed}-{i:04d}"
            setups.append(generate_setup(mode, difficulty, child, catalog, setup_id=setup_id))
    return setups


# --- batch file serialization -------------------------------------------------
#
# JSON lines: a header record, one record per setup with public and secret
# fields segregated, and a footer carrying a checksum of everything above it.


def _setup_record(setup: GameSetup, include_secrets: bool = True) -> dict:
    record = {
        "kind": "setup",
        "setup_id": setup.setup_id,
        "mode": setup.mode.value,
        "difficulty": setup.difficulty.value,
        "seed": setup.seed,
        "catalog_version": setup.catalog_version,
        "public": {"card_ids": list(setup.card_ids)},
    }
    if include_secrets:
        record["secret"] = {
            "active_indices": list(setup.active_indices),
            "secret_code": list(setup.secret),
            "permutation": list(setup.permutation),
        }
    return record


def batch_to_lines(
    setups: Sequence[GameSetup],
    seed: Optional[int] = None,
    include_secrets: bool = True,
) -> list[str]:
    header = {
        "kind": "header",
        "format": SETUP_FORMAT,
        "count": len(setups),
        "seed": seed,
        "catalog_version": setups[0].catalog_version if setups else None,
        "public_view": not include_secrets,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(_setup_record(s, include_secrets), sort_keys=True) for s in setups]
    digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    lines.append(json.dumps({"kind": "footer", "sha256": digest}, sort_keys=True))
    return lines


def save_batch(
    setups: Sequence[GameSetup],
    path: Union[str, Path],
    seed: Optional[int] = None,
    include_secrets: bool = True,
) -> None:
    Path(path).write_text("\n".join(batch_to_lines(setups, seed, include_secrets)) + "\n")


class BatchFormatError(ValueError):
    pass


def load_batch(path: Union[str, Path], catalog: Catalog) -> list[GameSetup]:
    """Read a batch file, verify its checksum, and resolve cards against the catalog."""
    lines = [line for line in Path(path).read_text().splitlines() if line]
    if len(lines) < 3:
        raise BatchFormatError("batch file too short")
    try:
        records = [json.loads(line) for line in lines]
    except json.JSONDecodeError as exc:
        raise BatchFormatError(f"corrupt batch file: {exc}") from exc
    header, body, footer = records[0], records[1:-1], records[-1]
    if header.get("kind") != "header" or footer.get("kind") != "footer":
        raise BatchFormatError("missing header or footer record")
    digest = hashlib.sha256("\n".join(lines[:-1]).encode()).hexdigest()
    if digest != footer.get("sha256"):
        raise BatchFormatError("batch checksum mismatch")
    if header.get("public_view"):
        raise BatchFormatError("public-view batch carries no secrets; cannot run games from it")

    setups = []
    for record in body:
        if record.get("kind") != "setup":
            raise BatchFormatError(f"unexpected record kind {record.get('kind')!r}")
        if record["catalog_version"] != catalog.version:
            raise BatchFormatError(
                f"setup {record['setup_id']} built against catalog "
                f"{record['catalog_version']!r}, loaded catalog is {catalog.version!r}"
            )
        cards = tuple(catalog.card(cid) for cid in record["public"]["card_ids"])
        secret = record["secret"]
        setups.append(
            GameSetup(
                setup_id=record["setup_id"],
                mode=Mode(record["mode"]),
                difficulty=Difficulty(record["difficulty"]),
                cards=cards,
                active_indices=tuple(secret["active_indices"]),
                secret=Code(*secret["secret_code"]),
                permutation=tuple(secret["permutation"]),
                seed=record["seed"],
                catalog_version=record["catalog_version"],
            )
        )
    return setups


def validate_batch(setups: Iterable[GameSetup]) -> dict:
    """Re-check every setup against the brute-force oracle; returns pass counts."""
    total = 0
    unique_ok = 0
    necessary_ok = 0
    for setup in setups:
        total += 1
        exprs = [setup.active_criterion(i).expr for i in range(len(setup.cards))]
        solutions = solve(exprs)
        if solutions == {setup.secret}:
            unique_ok += 1
        if all(
            len(solve([e for j, e in enumerate(exprs) if j != i])) >= 2
            for i in range(len(exprs))
        ):
            necessary_ok += 1
    return {"total": total, "uniqueness_ok": unique_ok, "necessity_ok": necessary_ok}
