#!/usr/bin/env python3
"""Regenerate src/codebreak/data/default_catalog.json.

The default deck is 48 verifier cards spanning the classic rule families
(color vs constant, color vs color, sums, parities, value counts, extrema,
repeats, digit order) with criterion counts from 2 up to 9. Run from the
repo root after editing the card table below.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codebreak.catalog import load_catalog  # noqa: E402

COLOR_WORDS = {"BLUE": "blue", "YELLOW": "yellow", "PURPLE": "purple"}
OP_WORDS = {
    "<": "less than",
    "=": "equal to",
    ">": "greater than",
    "<=": "at most",
    ">=": "at least",
    "!=": "different from",
}


def cmp_const(color: str, value: int, ops: str = "<=>") -> list[tuple[str, str]]:
    out = []
    for op_char in ops:
        out.append((f"{color} {op_char} {value}", f"{COLOR_WORDS[color]} is {OP_WORDS[op_char]} {value}"))
    return out


def cmp_colors(a: str, b: str) -> list[tuple[str, str]]:
    return [
        (f"{a} {op} {b}", f"{COLOR_WORDS[a]} is {OP_WORDS[op]} {COLOR_WORDS[b]}")
        for op in ("<", "=", ">")
    ]


def parity(color: str) -> list[tuple[str, str]]:
    return [
        (f"PARITY({color}) = EVEN", f"{COLOR_WORDS[color]} is even"),
        (f"PARITY({color}) = ODD", f"{COLOR_WORDS[color]} is odd"),
    ]


def count_value(value: int) -> list[tuple[str, str]]:
    words = {0: "no", 1: "exactly one", 2: "exactly two", 3: "exactly three"}
    return [
        (f"COUNT({value}) = {k}", f"the code contains {words[k]} {value}{'s' if k != 1 else ''}")
        for k in range(4)
    ]


def sum_cmp(value: int) -> list[tuple[str, str]]:
    return [
        (f"SUM {op} {value}", f"the sum of all digits is {OP_WORDS[op]} {value}")
        for op in ("<", "=", ">")
    ]


def where_is(value: int) -> list[tuple[str, str]]:
    out = [
        (f"{c} = {value}", f"{COLOR_WORDS[c]} is {value}") for c in COLOR_WORDS
    ]
    out.append((f"COUNT({value}) = 0", f"no digit is {value}"))
    return out


CARDS: list[tuple[str, str, list[tuple[str, str]]]] = [
    ("blue-vs-1", "Blue compared to 1", cmp_const("BLUE", 1, "=>")),
    ("blue-vs-3", "Blue compared to 3", cmp_const("BLUE", 3)),
    ("blue-vs-4", "Blue compared to 4", cmp_const("BLUE", 4)),
    ("yellow-vs-3", "Yellow compared to 3", cmp_const("YELLOW", 3)),
    ("yellow-vs-4", "Yellow compared to 4", cmp_const("YELLOW", 4)),
    ("purple-vs-3", "Purple compared to 3", cmp_const("PURPLE", 3)),
    ("purple-vs-4", "Purple compared to 4", cmp_const("PURPLE", 4)),
    ("blue-vs-5", "Blue compared to 5", cmp_const("BLUE", 5, "<=")),
    ("yellow-vs-1", "Yellow compared to 1", cmp_const("YELLOW", 1, "=>")),
    ("purple-vs-1", "Purple compared to 1", cmp_const("PURPLE", 1, "=>")),
    ("blue-parity", "Parity of blue", parity("BLUE")),
    ("yellow-parity", "Parity of yellow", parity("YELLOW")),
    ("purple-parity", "Parity of purple", parity("PURPLE")),
    ("sum-parity", "Parity of the sum", [
        ("PARITY(SUM) = EVEN", "the sum of all digits is even"),
        ("PARITY(SUM) = ODD", "the sum of all digits is odd"),
    ]),
    ("ones-count", "How many 1s", count_value(1)),
    ("twos-count", "How many 2s", count_value(2)),
    ("threes-count", "How many 3s", count_value(3)),
    ("fours-count", "How many 4s", count_value(4)),
    ("fives-count", "How many 5s", count_value(5)),
    ("even-count", "How many even digits", [
        (f"COUNT_EVEN = {k}", f"the code contains exactly {k} even digit{'s' if k != 1 else ''}")
        for k in range(4)
    ]),
    ("even-majority", "Even or odd majority", [
        ("COUNT_EVEN >= 2", "even digits outnumber odd digits"),
        ("COUNT_EVEN <= 1", "odd digits outnumber even digits"),
    ]),
    ("blue-vs-yellow", "Blue compared to yellow", cmp_colors("BLUE", "YELLOW")),
    ("blue-vs-purple", "Blue compared to purple", cmp_colors("BLUE", "PURPLE")),
    ("yellow-vs-purple", "Yellow compared to purple", cmp_colors("YELLOW", "PURPLE")),
    ("strict-smallest", "Which color is strictly smallest", [
        (f"MIN = {c} STRICT", f"{COLOR_WORDS[c]} is strictly smaller than the other two digits")
        for c in COLOR_WORDS
    ]),
    ("strict-largest", "Which color is strictly largest", [
        (f"MAX = {c} STRICT", f"{COLOR_WORDS[c]} is strictly larger than the other two digits")
        for c in COLOR_WORDS
    ]),
    ("blue-extreme", "Blue at an extreme", [
        ("MAX = BLUE", "no digit is larger than blue"),
        ("MIN = BLUE", "no digit is smaller than blue"),
    ]),
    ("yellow-extreme", "Yellow at an extreme", [
        ("MAX = YELLOW", "no digit is larger than yellow"),
        ("MIN = YELLOW", "no digit is smaller than yellow"),
    ]),
    ("purple-extreme", "Purple at an extreme", [
        ("MAX = PURPLE", "no digit is larger than purple"),
        ("MIN = PURPLE", "no digit is smaller than purple"),
    ]),
    ("repeat-count", "How much repetition", [
        ("REPEATS = 0", "all three digits are different"),
        ("REPEATS = 1", "exactly one pair of digits matches"),
        ("REPEATS = 2", "all three digits are the same"),
    ]),
    ("has-repeat", "Any repetition", [
        ("REPEATS = 0", "no digit repeats"),
        ("REPEATS > 0", "at least two digits match"),
    ]),
    ("digit-order", "Order of the digits", [
        ("ORDER = ASC", "the digits are in strictly ascending order"),
        ("ORDER = DESC", "the digits are in strictly descending order"),
        ("ORDER = NONE", "the digits are in neither ascending nor descending order"),
    ]),
    ("sum-vs-6", "Sum compared to 6", sum_cmp(6)),
    ("sum-vs-8", "Sum compared to 8", sum_cmp(8)),
    ("sum-vs-9", "Sum compared to 9", sum_cmp(9)),
    ("sum-vs-12", "Sum compared to 12", sum_cmp(12)),
    ("blue-value", "Exact value of blue", [
        (f"BLUE = {v}", f"blue is {v}") for v in range(1, 6)
    ]),
    ("yellow-value", "Exact value of yellow", [
        (f"YELLOW = {v}", f"yellow is {v}") for v in range(1, 6)
    ]),
    ("purple-value", "Exact value of purple", [
        (f"PURPLE = {v}", f"purple is {v}") for v in range(1, 6)
    ]),
    ("pairwise-order", "How the color pairs compare", (
        cmp_colors("BLUE", "YELLOW") + cmp_colors("BLUE", "PURPLE") + cmp_colors("YELLOW", "PURPLE")
    )),
    ("ones-location", "Where the 1s are", where_is(1)),
    ("threes-location", "Where the 3s are", where_is(3)),
    ("fours-location", "Where the 4s are", where_is(4)),
    ("sum-band-6-9", "Sum band around 6-9", [
        ("SUM < 6", "the sum of all digits is less than 6"),
        ("SUM = 6", "the sum of all digits is exactly 6"),
        ("SUM = 7", "the sum of all digits is exactly 7"),
        ("SUM = 8", "the sum of all digits is exactly 8"),
        ("SUM = 9", "the sum of all digits is exactly 9"),
        ("SUM > 9", "the sum of all digits is greater than 9"),
    ]),
    ("sum-vs-10-11", "Sum compared to 10 and 11", [
        ("SUM < 10", "the sum of all digits is less than 10"),
        ("SUM = 10", "the sum of all digits is exactly 10"),
        ("SUM = 11", "the sum of all digits is exactly 11"),
        ("SUM > 11", "the sum of all digits is greater than 11"),
    ]),
    ("blue-pair-order", "Blue against each other color", (
        cmp_colors("BLUE", "YELLOW") + cmp_colors("BLUE", "PURPLE")
    )),
    ("sum-band-7-11", "Sum band around 7-11", [
        ("SUM < 7", "the sum of all digits is less than 7"),
        ("SUM = 7", "the sum of all digits is exactly 7"),
        ("SUM = 8", "the sum of all digits is exactly 8"),
        ("SUM = 9", "the sum of all digits is exactly 9"),
        ("SUM = 10", "the sum of all digits is exactly 10"),
        ("SUM = 11", "the sum of all digits is exactly 11"),
        ("SUM > 11", "the sum of all digits is greater than 11"),
    ]),
    ("twos-fours-location", "Where the 2s and 4s are", where_is(2) + where_is(4)),
]


def main() -> None:
    cards = []
    for card_id, name, rows in CARDS:
        criteria = [
            {"id": f"{card_id}.{i + 1}", "rule": rule, "description": description}
            for i, (rule, description) in enumerate(rows)
        ]
        cards.append({"id": card_id, "name": name, "criteria": criteria})
    document = {"version": "1.0", "cards": cards}

    catalog = load_catalog(document)  # fails loudly on any invariant breach
    counts = sorted(len(c.criteria) for c in catalog.cards)
    print(f"{len(catalog.cards)} cards, criterion counts {counts[0]}..{counts[-1]}")

    out = Path(__file__).resolve().parents[1] / "src" / "codebreak" / "data" / "default_catalog.json"
    out.write_text(json.dumps(document, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
