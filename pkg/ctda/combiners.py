import numpy as np

from ctda import watchers
from ctda.abstract import Combiner
from ctda.equalizer import solve_normal_equations


def mrc_weights_inverse_mse(mses):
    """
    Weights inversely proportional to the channel MSEs.

    Channels with an MSE of exactly zero share the whole weight.
    """
    mses = np.asarray(mses, dtype=float)
    if mses.size == 0:
        raise ValueError("Empty MSE list")
    if np.any(mses < 0) or not np.all(np.isfinite(mses)):
        raise ValueError("MSE values must be finite and >= 0")

    perfect = mses == 0
    if np.any(perfect):
        return perfect / perfect.sum()
    inverse = 1.0 / mses
    return inverse / inverse.sum()


def mrc_weights_lmmse(predictions, target):
    """
    Unconstrained minimum MSE combining weights.

    Solves ``E[y_hat y_hat^T] alpha = E[y_hat y]`` over the window; a
    singular Gram matrix is ridge regularized and reported.
    Returns ``(alphas, degenerate)``.
    """
    predictions = np.atleast_2d(np.asarray(predictions, dtype=float))
    target = np.asarray(target, dtype=float)
    channels, samples = predictions.shape
    if target.shape != (samples, ):
        raise ValueError("Predictions and target are not aligned")
    if samples < channels:
        raise ValueError("At least %d samples are needed" % channels)
    if not (np.all(np.isfinite(predictions))
            and np.all(np.isfinite(target))):
        raise ValueError("Predictions and target must be finite")

    gram = predictions @ predictions.T / samples
    moment = predictions @ target / samples
    alphas, degenerate = solve_normal_equations(gram, moment)
    if degenerate:
        watchers.FUSION.warning("Singular Gram matrix, ridge regularized")
    return alphas, degenerate


class InverseMSECombiner(Combiner):
    """Maximal ratio combining with weights ``1 / training MSE``."""

    name = 'mrc_inverse_mse'
    convex = True

    def _weights(self, models, predictions, target):
        return mrc_weights_inverse_mse([m.training_mse for m in models]), \
            False


class LMMSECombiner(Combiner):
    """Maximal ratio combining with the exact minimum MSE weights."""

    name = 'mrc_lmmse'

    def _weights(self, models, predictions, target):
        if predictions is None or target is None:
            raise ValueError("mrc_lmmse needs channel estimates and target")
        return mrc_weights_lmmse(predictions, target)


class EqualGainCombiner(Combiner):
    name = 'equal_gain'
    convex = True

    def _weights(self, models, predictions, target):
        return np.full(len(models), 1.0 / len(models)), False


class SelectiveCombiner(Combiner):
    """Keep only the channel with the smallest training MSE."""

    name = 'selective'
    convex = True

    def _weights(self, models, predictions, target):
        alphas = np.zeros(len(models))
        alphas[int(np.argmin([m.training_mse for m in models]))] = 1.0
        return alphas, False


COMBINERS = {cls.name: cls for cls in (InverseMSECombiner,
                                       LMMSECombiner,
                                       EqualGainCombiner,
                                       SelectiveCombiner)}

#: Short names accepted by the command line.
ALIASES = {'mrc': 'mrc_inverse_mse',
           'lmmse': 'mrc_lmmse',
           'egc': 'equal_gain',
           'sel': 'selective'}


def get_combiner(mode):
    mode = ALIASES.get(mode, mode)
    try:
        return COMBINERS[mode]()
    except KeyError:
        raise ValueError("Unknown fusion mode %r" % mode)
