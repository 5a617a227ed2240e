import hypothesis
import numpy as np
import pytest

from gaselect.dataset import ExpressionDataset, scale_features
from gaselect.synthetic import make_separable

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


@pytest.fixture(scope="session")
def separable():
    """62 samples (40/22), 10 genes, gene 0 splits the classes."""
    return make_separable(n_genes=10, seed=3)


@pytest.fixture(scope="session")
def separable_scaled(separable):
    return scale_features(separable)[0]


@pytest.fixture
def tiny():
    X = np.array([[2.0, 5.0, 0.0], [4.0, 5.0, 10.0], [6.0, 5.0, 5.0]])
    return ExpressionDataset(X, [0, 1, 0])


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(id, title, passed, detail)``."""

    def _record(cid, title, passed, detail=""):
        status = "NOT RUN" if passed is None else "PASS" if passed else "FAIL"
        _CRITERIA.append((cid, title, status, detail))
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title, status, detail in sorted(_CRITERIA):
        terminalreporter.write_line(f"[{status}] C{cid} {title}: {detail}")
