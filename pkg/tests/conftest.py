import numpy as np
import pytest

from polarsr.pmf import BinaryInputChannel, JointPmf


def h2(p):
    if p <= 0 or p >= 1:
        return 0.0
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def random_joint(rng, sizes, names=None):
    names = names or [chr(ord("A") + k) for k in range(len(sizes))]
    table = rng.random(sizes) ** 2
    return JointPmf(tuple(zip(names, sizes)), table / table.sum())


def random_channel(rng, outputs):
    rows = rng.random((2, outputs)) + 1e-3
    return BinaryInputChannel(rows / rows.sum(axis=1, keepdims=True))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed in the terminal summary
_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(k: int, ok: bool, detail: str) -> bool:
        _CRITERIA[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[k])
