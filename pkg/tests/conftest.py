import numpy as np
import pytest
from scipy.spatial.transform import Rotation

ACCEPTANCE_LINES: list[str] = []


def random_rotation(rng) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def random_scale(rng) -> np.ndarray:
    """Well-conditioned random element of GL(2)."""
    while True:
        a = rng.normal(size=(2, 2)) + np.eye(2)
        if abs(np.linalg.det(a)) > 0.2 and np.linalg.cond(a) < 50:
            return a


@pytest.fixture
def rng():
    return np.random.default_rng(20231014)


@pytest.fixture
def acceptance_log():
    def record(criterion: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
