import json
from pathlib import Path

import pytest

from gameui.generator import load_exemplar
from gameui.spec import parse_spec

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = Path(__file__).parent / "goldens.json"


@pytest.fixture(scope="session")
def exemplar():
    return load_exemplar()


@pytest.fixture(scope="session")
def skill_panel():
    return parse_spec((FIXTURES / "skill_panel.json").read_text())


@pytest.fixture(scope="session")
def goldens():
    """Frozen pixel hashes; regenerate with scripts/make_goldens.py."""
    return json.loads(GOLDENS.read_text())
