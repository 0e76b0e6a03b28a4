"""
Information fusion of several equalized channels.

Each input series is equalized independently against the target; the
equalized estimates are then combined linearly::

    y_hat[n] = sum_m alpha_m * y_hat_m[n]

"""
from collections import namedtuple
from dataclasses import dataclass, replace

import numpy as np

from ctda import watchers
from ctda.combiners import get_combiner, COMBINERS
from ctda.combiners import mrc_weights_inverse_mse, mrc_weights_lmmse
from ctda.equalizer import estimate, estimate_series
from ctda.utils import freeze

__all__ = ['FusionModel', 'Selection', 'build_fusion', 'fuse',
           'fuse_series', 'channel_estimates', 'select_channels',
           'online_alpha_update', 'mrc_weights_inverse_mse',
           'mrc_weights_lmmse']

WEIGHT_TOLERANCE = 1e-9

Selection = namedtuple('Selection', ['channels', 'forced_best'])


@dataclass(frozen=True, eq=False)
class FusionModel:
    """
    Named equalizers and their combining weights.

    `flags` collects the conditions met while building or updating the
    model (``degenerate``, ``window_truncated``).
    """
    channels: tuple
    alphas: np.ndarray
    mode: str = 'mrc_inverse_mse'
    flags: frozenset = frozenset()

    def __post_init__(self):
        channels = tuple((str(name), model) for name, model in self.channels)
        alphas = np.asarray(self.alphas, dtype=float)
        if not channels or alphas.shape != (len(channels), ):
            raise ValueError("One weight per channel (at least one) is "
                             "required")
        if not np.all(np.isfinite(alphas)):
            raise ValueError("Fusion weights must be finite")
        if self.mode not in COMBINERS:
            raise ValueError("Unknown fusion mode %r" % self.mode)
        if COMBINERS[self.mode].convex and (
                np.any(alphas < 0)
                or abs(alphas.sum() - 1) > WEIGHT_TOLERANCE):
            raise ValueError("%s weights must be >= 0 and sum to 1"
                             % self.mode)
        if self.mode == 'selective' and (
                np.count_nonzero(alphas == 1.0) != 1
                or np.count_nonzero(alphas) != 1):
            raise ValueError("selective weights must select one channel")
        object.__setattr__(self, 'channels', channels)
        object.__setattr__(self, 'alphas', freeze(alphas))
        object.__setattr__(self, 'flags', frozenset(self.flags))

    @property
    def names(self):
        return tuple(name for name, _ in self.channels)

    @property
    def models(self):
        return tuple(model for _, model in self.channels)


def channel_estimates(models, inputs):
    """Per-channel estimates, one row per channel (``nan`` w/o history)."""
    return np.vstack([estimate_series(model, x)
                      for model, x in zip(models, inputs)])


def build_fusion(channels, mode='mrc_inverse_mse', inputs=None, target=None,
                 window=None):
    """
    Combine fitted ``(name, EqualizerModel)`` channels.

    ``mrc_lmmse`` needs the training `inputs` and `target`; its weights
    are fitted over the rows where every channel has history (restricted
    to the ``(start, stop)`` row `window` when given).
    """
    channels = list(channels)
    combiner = get_combiner(mode)
    models = [model for _, model in channels]

    predictions = None
    if inputs is not None and target is not None:
        estimates = channel_estimates(models, inputs)
        target = np.asarray(target, dtype=float)
        if window is not None:
            estimates = estimates[:, slice(*window)]
            target = target[slice(*window)]
        complete = np.all(np.isfinite(estimates), axis=0)
        predictions, target = estimates[:, complete], target[complete]

    alphas, degenerate = combiner.weights(models, predictions, target)
    return FusionModel(channels, alphas, combiner.name,
                       flags={'degenerate'} if degenerate else set())


def fuse(fusion_model, inputs, n):
    """Fused estimate of the target at row `n`."""
    return float(sum(alpha * estimate(model, x, n)
                     for alpha, model, x in zip(fusion_model.alphas,
                                                fusion_model.models,
                                                inputs)))


def online_alpha_update(fusion_model, squared_errors, window):
    """
    Recompute inverse-MSE weights from trailing squared errors.

    `squared_errors` holds one row per channel, most recent sample last;
    ``nan`` marks samples not yet completed. A window longer than the
    available history uses all of it and flags ``window_truncated``.
    """
    if fusion_model.mode != 'mrc_inverse_mse':
        raise ValueError("Online updates need mrc_inverse_mse weights")
    if window < 1:
        raise ValueError("window must be >= 1")

    errors = np.atleast_2d(np.asarray(squared_errors, dtype=float))
    if errors.shape[0] != len(fusion_model.channels):
        raise ValueError("One row of errors per channel is required")
    errors = errors[:, np.all(np.isfinite(errors), axis=0)]
    if errors.shape[1] == 0:
        return fusion_model

    flags = set(fusion_model.flags) - {'window_truncated'}
    if window > errors.shape[1]:
        flags.add('window_truncated')
    trailing = errors[:, -window:].mean(axis=1)
    return replace(fusion_model,
                   alphas=mrc_weights_inverse_mse(trailing),
                   flags=flags)


def fuse_series(fusion_model, inputs, target=None, start=0,
                online_window=None, estimates=None):
    """
    Fused estimates for every row from `start` on.

    With an `online_window`, the weights are updated after each row from
    the trailing squared errors of the channels (needs the `target`).
    Per-channel `estimates` (e.g. tracked online) replace the static
    equalizer outputs when given.
    Returns the estimates (``nan`` where unavailable) and the final model.
    """
    if estimates is None:
        estimates = channel_estimates(fusion_model.models, inputs)
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    fused = np.full(estimates.shape[1], np.nan)

    if online_window is None:
        rows = slice(start, None)
        fused[rows] = fusion_model.alphas @ estimates[:, rows]
        return fused, fusion_model

    if target is None:
        raise ValueError("Online updates need the target series")
    target = np.asarray(target, dtype=float)
    squared = (estimates - target) ** 2
    first = None
    for row in range(start, estimates.shape[1]):
        fused[row] = fusion_model.alphas @ estimates[:, row]
        if not np.isfinite(fused[row]):
            continue
        first = row if first is None else first
        fusion_model = online_alpha_update(
            fusion_model, squared[:, first:row + 1], online_window)

    watchers.FUSION.info("Online weights after %d rows: %s",
                         estimates.shape[1] - start,
                         ", ".join("%.6g" % a for a in fusion_model.alphas))
    return fused, fusion_model


def _selection_mse(model):
    if model.validation_mse is not None:
        return model.validation_mse
    else:
        return model.training_mse


def select_channels(channels, top_k=None, threshold=None):
    """
    Keep the most informative channels.

    ``top_k`` keeps the `top_k` smallest validation MSEs (ties broken by
    name); ``threshold`` keeps the channels whose validation MSE is
    ``<= threshold`` and falls back to the single best one, flagged as
    ``forced_best``. Kept channels retain their original order.
    """
    channels = list(channels)
    if not channels:
        raise ValueError("At least one channel is needed")
    if (top_k is None) == (threshold is None):
        raise ValueError("Give exactly one of top_k or threshold")

    ranking = sorted(range(len(channels)),
                     key=lambda i: (_selection_mse(channels[i][1]),
                                    channels[i][0]))
    forced_best = False
    if top_k is not None:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        if top_k > len(channels):
            watchers.FUSION.warning(
                "N_c=%d exceeds the %d channels available, keeping all",
                top_k, len(channels))
        kept = set(ranking[:top_k])
    else:
        kept = {i for i in ranking
                if _selection_mse(channels[i][1]) <= threshold}
        if not kept:
            kept = {ranking[0]}
            forced_best = True
            watchers.FUSION.warning(
                "No channel under MSE threshold %r, forcing %r",
                threshold, channels[ranking[0]][0])

    return Selection([c for i, c in enumerate(channels) if i in kept],
                     forced_best)
