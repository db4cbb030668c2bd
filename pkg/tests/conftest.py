from __future__ import annotations

from pathlib import Path

import pytest

from gspmc import model, modelfile

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "gspmc" / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def load_fixture(name: str) -> model.Protocol:
    return model.validate(modelfile.parse_model(FIXTURES / name).raw)


def config(protocol: model.Protocol, **counts) -> tuple[int, ...]:
    """Counter vector from state names, e.g. config(p, Env=2, Ask=1)."""
    q = [0] * protocol.n_states
    for name, c in counts.items():
        q[protocol.state_index(name)] = c
    return tuple(q)


@pytest.fixture(scope="session")
def smoke() -> model.Protocol:
    return load_fixture("smoke_detector.json")


@pytest.fixture(scope="session")
def smoke_2sender() -> model.Protocol:
    return load_fixture("smoke_detector_2sender.json")


@pytest.fixture(scope="session")
def smoke_mutant() -> model.Protocol:
    return load_fixture("smoke_detector_mutant.json")


@pytest.fixture(scope="session")
def witness() -> model.Protocol:
    return load_fixture("cutoff_witness.json")
