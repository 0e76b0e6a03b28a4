from hypothesis import strategies as st
import numpy as np
import pytest


def _normalized(weights):
    weights = np.asarray(weights, dtype=float)
    return weights / weights.sum()


weights = st.floats(min_value=0.05, max_value=1.0)


@st.composite
def distributions(draw, min_size=2, max_size=6, size=None):
    """Strictly positive distributions."""
    from ctda.stats import DiscreteDistribution

    if size is None:
        size = draw(st.integers(min_value=min_size, max_value=max_size))
    return DiscreteDistribution(
        _normalized(draw(st.lists(weights, min_size=size, max_size=size))))


@st.composite
def channels(draw, min_size=2, max_size=6, inputs=None, outputs=None):
    """Channels with strictly positive entries."""
    from ctda.stats import Channel

    if inputs is None:
        inputs = draw(st.integers(min_value=min_size, max_value=max_size))
    if outputs is None:
        outputs = draw(st.integers(min_value=min_size, max_value=max_size))
    columns = [_normalized(draw(st.lists(weights, min_size=outputs,
                                         max_size=outputs)))
               for _ in range(inputs)]
    return Channel(np.column_stack(columns))


def random_channel(rng, outputs, inputs):
    from ctda.stats import Channel

    matrix = rng.random((outputs, inputs)) + 0.01
    return Channel(matrix / matrix.sum(axis=0))


def random_distribution(rng, size):
    from ctda.stats import DiscreteDistribution

    probs = rng.random(size) + 0.01
    return DiscreteDistribution(probs / probs.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(2014)


@pytest.fixture
def fir_csvs(tmpdir):
    """Small two-input FIR data set written as CSV files."""
    from ctda.series import gen_fir_series, save_csv

    inputs, target = gen_fir_series(7, 600, [[0.5, -0.25], [1.0, 0.5, 0.25]],
                                    'iid_gaussian', 0.1)
    paths = []
    for series in inputs + [target]:
        path = str(tmpdir.join(series.name + '.csv'))
        save_csv(series, path)
        paths.append(path)
    return paths
