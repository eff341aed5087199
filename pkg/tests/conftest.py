import itertools
import random

import pytest

from ebcrn.crn import Configuration, Crn, Reaction

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_crn(rng: random.Random, max_species=4, max_reactions=4, max_coeff=2) -> Crn:
    """Random CRN with stoichiometric entries in {0..max_coeff}; no-op reactions redrawn."""
    ns = rng.randint(1, max_species)
    nr = rng.randint(1, max_reactions)
    names = [f"S{i}" for i in range(ns)]
    rxns = []
    while len(rxns) < nr:
        r = Configuration({s: rng.randint(0, max_coeff) for s in names})
        p = Configuration({s: rng.randint(0, max_coeff) for s in names})
        if r != p:
            rxns.append(Reaction(r, p))
    return Crn(tuple(names), tuple(rxns))


def small_configs(crn: Crn, bound: int):
    for v in itertools.product(range(bound + 1), repeat=len(crn.species)):
        yield crn.config(v)


@pytest.fixture
def rng():
    return random.Random(20240607)
