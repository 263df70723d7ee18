import sys

import numpy as np
import pytest

from jstrack.corpus import TRACKING
from jstrack.features import FeatureModelSpec
from jstrack.pipeline import featurize
from jstrack.synth import make_dataset


@pytest.fixture(scope="session")
def small_corpus():
    return make_dataset(96, seed=1)


@pytest.fixture(scope="session")
def small_features(small_corpus):
    """seq4 matrix of the small corpus and its +1/-1 labels."""
    fm = featurize(small_corpus.records, FeatureModelSpec.from_name("seq4"))
    label = {r.id: r.label for r in small_corpus.records}
    y = np.array([1 if label[i] == TRACKING else -1 for i in fm.ids])
    return fm, y


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
