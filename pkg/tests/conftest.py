import numpy as np
import pytest

from secbeam.analog_opt import BeamformerState, project
from secbeam.channel import ChannelSet
from secbeam.metrics import PowerConfig

# (criterion, status, detail) lines recorded by the acceptance suite.
ACCEPTANCE_LINES: list[tuple[str, str, str]] = []


def record_acceptance(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((criterion, "PASS" if passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{status}  criterion {criterion}: {detail}")


def complex_gaussian(rng: np.random.Generator, *shape) -> np.ndarray:
    parts = rng.standard_normal((*shape, 2))
    return (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2.0)


def unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def random_su_instance(
    rng: np.random.Generator,
    n_r: int = 2,
    n_t: int = 4,
    n_e: int = 2,
    n_j: int = 2,
    users: int = 1,
    eves: int = 1,
    p_b_db: float = 3.0,
    p_j_db: float = -3.0,
):
    """Small random (channels, state, power) triple with projected beamformers."""
    channels = ChannelSet(
        bs_to_user=[complex_gaussian(rng, n_r, n_t) for _ in range(users)],
        bs_to_eve=[complex_gaussian(rng, n_e, n_t) for _ in range(eves)],
        jammer_to_user=[complex_gaussian(rng, n_r, n_j) for _ in range(users)],
    )
    state = BeamformerState(
        user_combiners=[project(complex_gaussian(rng, n_r)) for _ in range(users)],
        analog_precoders=[project(complex_gaussian(rng, n_t)) for _ in range(users)],
        eve_combiners=[unit(complex_gaussian(rng, n_e)) for _ in range(eves)],
        jammer_precoder=unit(complex_gaussian(rng, n_j)),
    )
    return channels, state, PowerConfig(p_b_db=p_b_db, p_j_db=p_j_db)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
