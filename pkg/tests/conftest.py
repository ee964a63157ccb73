import itertools

import numpy as np
import pytest

from cyclecrf import EdgeGraph
from cyclecrf._backend import get_kernels


def random_graph(rng, n, density=0.5, probs=None):
    pairs = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < density]
    if probs is None:
        probs = rng.random(len(pairs))
    return EdgeGraph.from_edge_list(n, pairs, probs)


def complete_graph(n, probs=None):
    pairs = list(itertools.combinations(range(n), 2))
    return EdgeGraph.from_edge_list(n, pairs, probs)


def graph_with_costs(n, pairs, costs):
    # inverse of the logit cost map, so costs come back (nearly) exact
    p = 1.0 / (1.0 + np.exp(np.asarray(costs, dtype=float)))
    return EdgeGraph(n, np.array(pairs, dtype=np.int64).reshape(-1, 2), p, np.asarray(costs, dtype=float))


# filled by the acceptance module, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _available_backends():
    names = ["python"]
    try:
        get_kernels("compiled")
        names.append("compiled")
    except ImportError:
        pass
    return names


@pytest.fixture(params=_available_backends())
def kernels(request):
    return get_kernels(request.param)
