import numpy as np
import pytest

from shellbar.benchmarks import get_case
from shellbar.model import ControlNet, Material, ShellModel, refine
from shellbar.splines import KnotVector

ACCEPTANCE_LINES: list[str] = []


def flat_patch(n=4, degree=2, kind="shell", h=0.01, jitter=0.0, seed=0, size=(2.0, 1.0)) -> ShellModel:
    """Flat rectangular patch refined to ``n x n`` elements, optional interior jitter."""
    kv = KnotVector(1, [0, 0, 1, 1])
    pts = np.zeros((2, 2, 3))
    for i in range(2):
        for j in range(2):
            pts[i, j] = (i * size[0], j * size[1], 0.0)
    base = ShellModel(kv, kv, ControlNet(pts, np.ones((2, 2))), h, Material(1.0e6, 0.3), kind)
    model = refine(base, degree, n)
    if jitter:
        rng = np.random.default_rng(seed)
        p = np.array(model.net.points)
        dx = size[0] / (n + degree)
        p[1:-1, 1:-1, :2] += jitter * dx * rng.uniform(-1, 1, p[1:-1, 1:-1, :2].shape)
        model = model.with_net(ControlNet(p, model.net.weights))
    return model


@pytest.fixture
def roof4():
    return refine(get_case("scordelis").model, 2, 4)


@pytest.fixture
def hemi2():
    return refine(get_case("hemisphere").model, 2, 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
