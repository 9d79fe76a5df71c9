from contextlib import contextmanager

import pytest

from codebreak.catalog import Criterion, VerifierCard, default_catalog
from codebreak.dsl import Code, parse_rule
from codebreak.protocol import load_template_pack
from codebreak.setups import Difficulty, GameSetup, Mode

# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@contextmanager
def acceptance_criterion(name: str, detail_holder: dict | None = None):
    try:
        yield
    except BaseException:
        ACCEPTANCE_LINES.append(f"FAIL  {name}")
        raise
    detail = f" ({detail_holder['detail']})" if detail_holder and detail_holder.get("detail") else ""
    ACCEPTANCE_LINES.append(f"PASS  {name}{detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def pack():
    return load_template_pack()


def make_card(card_id: str, *rules: str) -> VerifierCard:
    criteria = tuple(
        Criterion(
            criterion_id=f"{card_id}.{i + 1}",
            card_id=card_id,
            expr=parse_rule(rule),
            description=rule.lower(),
            rule_text=rule,
        )
        for i, rule in enumerate(rules)
    )
    return VerifierCard(card_id=card_id, name=card_id, criteria=criteria)


# Hand-built valid Easy setup: active rules pin (2,5,5) and every card is
# necessary (dropping any one leaves at least two candidate codes).
FIXTURE_ACTIVE_RULES = ("BLUE = 2", "YELLOW = PURPLE", "SUM > 9", "PARITY(YELLOW) = ODD")
FIXTURE_ALT_RULES = ("BLUE = 1", "YELLOW < PURPLE", "SUM < 9", "PARITY(YELLOW) = EVEN")
FIXTURE_SECRET = Code(2, 5, 5)


def make_fixture_setup(
    mode: Mode = Mode.CLASSIC,
    permutation: tuple[int, ...] = (0, 1, 2, 3),
    setup_id: str = "fixture-easy",
) -> GameSetup:
    cards = tuple(
        make_card(f"card{i + 1}", active, alt)
        for i, (active, alt) in enumerate(zip(FIXTURE_ACTIVE_RULES, FIXTURE_ALT_RULES))
    )
    return GameSetup(
        setup_id=setup_id,
        mode=mode,
        difficulty=Difficulty.EASY,
        cards=cards,
        active_indices=(0, 0, 0, 0),
        secret=FIXTURE_SECRET,
        permutation=permutation,
        seed=0,
        catalog_version="test",
    )


@pytest.fixture
def fixture_setup():
    return make_fixture_setup()
