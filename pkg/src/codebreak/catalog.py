"""Verifier cards: bundles of candidate rules, exactly one secretly active per game.

A catalog is the deck the generator draws from. Card invariants are enforced
on load: 2-9 criteria per card, unique ids, and no two criteria on one card
may accept the same set of codes (they would be indistinguishable).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Union

from .dsl import ParseError, PredicateExpr, extension_mask, parse_rule

MIN_CRITERIA = 2
MAX_CRITERIA = 9


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class Criterion:
    criterion_id: str
    card_id: str
    expr: PredicateExpr
    description: str
    rule_text: str


@dataclass(frozen=True)
class VerifierCard:
    card_id: str
    name: str
    criteria: tuple[Criterion, ...]


@dataclass(frozen=True)
class Catalog:
    version: str
    cards: tuple[VerifierCard, ...]

    def card(self, card_id: str) -> VerifierCard:
        for card in self.cards:
            if card.card_id == card_id:
                return card
        raise KeyError(card_id)

    def __len__(self) -> int:
        return len(self.cards)


def _build_card(raw: dict) -> VerifierCard:
    card_id = raw.get("id")
    if not card_id or not isinstance(card_id, str):
        raise CatalogError(f"card missing id: {raw!r}")
    rows = raw.get("criteria")
    if not isinstance(rows, list):
        raise CatalogError(f"card {card_id}: criteria must be a list")
    if not MIN_CRITERIA <= len(rows) <= MAX_CRITERIA:
        raise CatalogError(
            f"card {card_id}: {len(rows)} criteria, need {MIN_CRITERIA}-{MAX_CRITERIA}"
        )

    criteria = []
    for i, row in enumerate(rows):
        rule_text = row.get("rule", "")
        try:
            expr = parse_rule(rule_text)
        except ParseError as exc:
            raise CatalogError(f"card {card_id} criterion {i + 1}: {exc}") from exc
        criteria.append(
            Criterion(
                criterion_id=row.get("id") or f"{card_id}.{i + 1}",
                card_id=card_id,
                expr=expr,
                description=row.get("description", rule_text),
                rule_text=rule_text,
            )
        )

    masks = [extension_mask(c.expr) for c in criteria]
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if masks[i] == masks[j]:
                raise CatalogError(
                    f"card {card_id}: criteria {criteria[i].criterion_id!r} and "
                    f"{criteria[j].criterion_id!r} have identical extensions"
                )
    return VerifierCard(card_id=card_id, name=raw.get("name", card_id), criteria=tuple(criteria))


def load_catalog(source: Union[dict, str, Path]) -> Catalog:
    """Build a validated Catalog from a parsed document, JSON text, or file path."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if path.exists():
            document = json.loads(path.read_text())
        else:
            document = json.loads(str(source))
    else:
        document = source
    if not isinstance(document, dict) or "cards" not in document:
        raise CatalogError("catalog document must be an object with a 'cards' list")

    cards = []
    seen: set[str] = set()
    for raw in document["cards"]:
        card = _build_card(raw)
        if card.card_id in seen:
            raise CatalogError(f"duplicate card id {card.card_id!r}")
        seen.add(card.card_id)
        cards.append(card)
    return Catalog(version=str(document.get("version", "0")), cards=tuple(cards))


_default: Catalog | None = None


def default_catalog() -> Catalog:
    """The packaged 48-card deck (cached)."""
    global _default
    if _default is None:
        text = resources.files("codebreak.data").joinpath("default_catalog.json").read_text()
        _default = load_catalog(json.loads(text))
    return _default
