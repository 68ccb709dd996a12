import numpy as np
import pytest

from entailsum import BackendId, Granularity, PairMatrix

# Entailment grid behind the packaged demo pair: four document sentences
# scored against three summary sentences. The third summary sentence is
# unsupported by the document, which is what makes the demo interesting.
DEMO_E = np.array([
    [0.02, 0.02, 0.04],
    [0.98, 0.00, 0.00],
    [0.43, 0.99, 0.00],
    [0.00, 0.00, 0.01],
])


def matrix_from_e(e_grid, backend=BackendId("grid", "1")):
    """PairMatrix with the given entailment channel.

    The remaining probability mass is split 1:9 between contradiction and
    neutral, mirroring the mock backend's formula.
    """
    e = np.asarray(e_grid, dtype=float)
    cells = np.empty(e.shape + (3,))
    cells[..., 0] = e
    cells[..., 1] = 0.1 * (1.0 - e)
    cells[..., 2] = 0.9 * (1.0 - e)
    return PairMatrix(
        cells=cells,
        doc_granularity=Granularity.SENTENCE,
        sum_granularity=Granularity.SENTENCE,
        backend=backend,
    )


@pytest.fixture
def demo_matrix():
    return matrix_from_e(DEMO_E)
