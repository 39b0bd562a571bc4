"""Shared fixtures for the test suite."""
import pytest
from typer.testing import CliRunner

from cli.commands.preset import FIGURE1_SEED
from qja.engines import run_qa, run_qja
from qja.model import CostDiagonal, build_random_potential, make_linear_schedule


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def two_level() -> CostDiagonal:
    return CostDiagonal(energies=[0.0, -1.0], label="two-level")


@pytest.fixture(scope="session")
def figure1_cost() -> CostDiagonal:
    return build_random_potential(64, seed=FIGURE1_SEED)


@pytest.fixture(scope="session")
def figure1_schedule():
    return make_linear_schedule(1000, 0.1, 100.0)


@pytest.fixture(scope="session")
def figure1_qja(figure1_cost, figure1_schedule):
    return run_qja(figure1_cost, figure1_schedule)


@pytest.fixture(scope="session")
def figure1_qa(figure1_cost, figure1_schedule):
    return run_qa(figure1_cost, figure1_schedule)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep QJA_* variables from the developer's shell out of the tests."""
    for name in ("QJA_OUTPUT_ROOT", "QJA_THREADS", "QJA_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("QJA_OUTPUT_ROOT", str(tmp_path / "runs"))
