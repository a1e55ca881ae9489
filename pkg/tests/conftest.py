import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kosr.engines import QueryContext
from kosr.fixtures import fixture_fig1
from kosr.inverted import build_all_inverted
from kosr.labels import build_labels


@pytest.fixture(scope="session")
def fig1():
    g, cm = fixture_fig1()
    return g, cm


@pytest.fixture(scope="session")
def fig1_labels(fig1):
    g, _cm = fig1
    return build_labels(g)


@pytest.fixture(scope="session")
def fig1_ctx(fig1, fig1_labels):
    g, cm = fig1
    return QueryContext(g, cm, labels=fig1_labels, postings=build_all_inverted(fig1_labels, cm))
