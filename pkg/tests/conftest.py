from pathlib import Path

import numpy as np
import pytest

from utils.bnet_format import BnetDocument, BnetFormat

NETS_DIR = Path(__file__).resolve().parent.parent / "scripts" / "nets"

# observed likelihood slice of the two-hypothesis, two-leaf example
PAIR_SLICE = np.array([[0.52, 0.18], [0.08, 0.22]])

CHAIN_BNET = """
node h 2
node E 2
arc h E
cpt h
row - : 0.5 0.5
cpt E
row 0 : 0.9 0.1
row 1 : 0.2 0.8
"""

DIAMOND_BNET = """
node a 2
node b 2
node c 2
node d 2
arc a b
arc a c
arc b d
arc c d
cpt a
row - : 0.6 0.4
cpt b
row 0 : 0.7 0.3
row 1 : 0.2 0.8
cpt c
row 0 : 0.1 0.9
row 1 : 0.5 0.5
cpt d
row 0 0 : 0.9 0.1
row 0 1 : 0.4 0.6
row 1 0 : 0.3 0.7
row 1 1 : 0.05 0.95
"""


@pytest.fixture(autouse=True)
def quiet_console(monkeypatch):
    monkeypatch.setenv("RECOGNET_QUIET", "true")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def nets_dir() -> Path:
    return NETS_DIR


@pytest.fixture
def pair_doc() -> BnetDocument:
    return BnetFormat.parse_file(str(NETS_DIR / "two_hypotheses.bnet"))


@pytest.fixture
def chain_doc() -> BnetDocument:
    return BnetFormat.parse(CHAIN_BNET)


@pytest.fixture
def diamond_doc() -> BnetDocument:
    return BnetFormat.parse(DIAMOND_BNET)


def parse(text: str) -> BnetDocument:
    return BnetFormat.parse(text)
