import numpy as np
import pytest

from sglab.qubit import Direction, PureState, density_from_bloch

_ACCEPTANCE = []


def random_direction(rng) -> Direction:
    v = rng.normal(size=3)
    return Direction.from_cartesian(v)


def random_state(rng) -> PureState:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return PureState.from_vector(v, normalize=True)


def random_density(rng, pure_fraction=0.2) -> np.ndarray:
    """Bloch-ball density matrix; a fraction of draws land on the surface."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    radius = 1.0 if rng.random() < pure_fraction else rng.random() ** (1 / 3)
    return density_from_bloch(radius * v)


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors, shape (n, 3)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(1.0 - z * z)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    return np.column_stack([r * np.cos(golden * k), r * np.sin(golden * k), z])


@pytest.fixture
def rng():
    return np.random.default_rng(20221018)


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    code, title = marker.args
    passed = call.excinfo is None
    _ACCEPTANCE.append((code, title, passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for code, title, passed in sorted(_ACCEPTANCE, key=lambda r: int(r[0].lstrip("AC"))):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {code:<5} {title}")
