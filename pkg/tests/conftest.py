import pytest

from ontosymm.numerics import Direction, HALF, HALF_SQRT3, ONE, ZERO
from ontosymm.quantum import (
    QubitMeasurement,
    QubitPreparation,
    build_bb_model,
    build_classical_control,
    build_maudlin,
)

_acceptance_lines: list[str] = []


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}"
        if detail:
            line += f" -- {detail}"
        _acceptance_lines.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def maudlin():
    return build_maudlin()


@pytest.fixture(scope="session")
def classical2():
    return build_classical_control(2)


Z = Direction(ZERO, ZERO, ONE)
X = Direction(ONE, ZERO, ZERO)
TILT = Direction(HALF, ZERO, HALF_SQRT3)


@pytest.fixture(scope="session")
def bb_two():
    """Model over two non-collinear directions, used for both inputs."""
    dirs = (Z, TILT)
    return build_bb_model(QubitPreparation(dirs, ("z", "t")), QubitMeasurement(dirs, ("z", "t")))
