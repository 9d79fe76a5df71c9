#!/usr/bin/env python3
"""Regenerate tests/golden/templates/: one rendered file per template key.

The golden context is fixed; tests compare fresh renders byte-for-byte
against these files to pin the protocol text.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codebreak.protocol import Step, Strategy, load_template_pack  # noqa: E402
from codebreak.setups import Mode  # noqa: E402

GOLDEN_CONTEXT = {
    "game_setup": "<<GAME SETUP BLOCK>>",
    "verifier_descriptions": "<<VERIFIER LIST BLOCK>>",
    "verifier_num": 2,
    "verifier_result": "FAIL",
    "submitted_code": "BLUE=1, YELLOW=2, PURPLE=3",
    "answer": "BLUE=1, YELLOW=2, PURPLE=2",
    "is_correct": "INCORRECT",
}


def main() -> None:
    pack = load_template_pack()
    out_dir = Path(__file__).resolve().parents[1] / "tests" / "golden" / "templates"
    out_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for mode in Mode:
        for strategy in Strategy:
            for step in Step:
                text = pack.render(mode, strategy, step, **GOLDEN_CONTEXT)
                name = f"{mode.value}__{strategy.value}__{step.value}.txt"
                (out_dir / name).write_text(text)
                count += 1
    print(f"wrote {count} golden renders to {out_dir}")
    print(f"template pack checksum: {pack.checksum}")


if __name__ == "__main__":
    main()
