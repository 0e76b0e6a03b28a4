"""
Tap-delay-line equalizers identifying one causal link ``X -> Y``.

An equalizer of length ``L`` has ``L + 1`` taps and estimates the target
from the current and the ``L`` previous input samples::

    y_hat[n] = mean_y + sum_l w[l] * (x[n - l] - mean_x)

In ``predict`` mode the same tap window ending at ``x[n]`` estimates
``y[n + 1]``.

"""
from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from ctda import watchers
from ctda.exceptions import InsufficientData, LMSDiverged
from ctda.utils import freeze

MODES = ('infer', 'predict')
CRITERIA = ('validation', 'aic')

#: Ridge added to singular normal equations, relative to their trace.
RIDGE_JITTER = 1e-10

#: Share of the training block used for fitting during validation.
FIT_SHARE = 0.8

#: AIC values within this band of the best one are ties.
AIC_TIE_BAND = 2.0


@dataclass(frozen=True, eq=False)
class EqualizerModel:
    length: int
    weights: np.ndarray
    mean_x: float = 0.0
    mean_y: float = 0.0
    training_mse: float = 0.0
    validation_mse: float = None
    mode: str = 'infer'
    degenerate: bool = False

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if self.length < 0 or weights.shape != (self.length + 1, ):
            raise ValueError("An equalizer of length %d needs %d weights"
                             % (self.length, self.length + 1))
        if not np.all(np.isfinite(weights)):
            raise ValueError("Equalizer weights must be finite")
        if self.training_mse < 0 or (self.validation_mse is not None
                                     and self.validation_mse < 0):
            raise ValueError("MSE values must be >= 0")
        if self.mode not in MODES:
            raise ValueError("Unknown equalizer mode %r" % self.mode)
        object.__setattr__(self, 'weights', freeze(weights))

    @property
    def shift(self):
        """Steps between the last tap and the estimated target sample."""
        return 1 if self.mode == 'predict' else 0


def lag_matrix(x, length):
    """
    Rows ``[x[n], x[n-1], ..., x[n-length]]`` for ``n = length .. N-1``.

    """
    return sliding_window_view(np.asarray(x, dtype=float),
                               length + 1)[:, ::-1]


def solve_normal_equations(gram, moment):
    """
    Solve ``gram . w = moment``, regularizing a singular `gram`.

    Returns the solution and whether regularization was needed.
    """
    size = gram.shape[0]
    if np.linalg.matrix_rank(gram) == size:
        return linalg.solve(gram, moment, assume_a='sym'), False
    jitter = RIDGE_JITTER * np.trace(gram) or RIDGE_JITTER
    solution = linalg.solve(gram + jitter * np.eye(size), moment,
                            assume_a='sym')
    return solution, True


def _pairs(x, y, length, mode, start=None):
    """Tap windows and their targets, the first window ending at `start`."""
    shift = 1 if mode == 'predict' else 0
    windows = lag_matrix(x[:x.size - shift], length)
    targets = y[length + shift:]
    if start is not None:
        skip = start - length
        windows, targets = windows[skip:], targets[skip:]
    return windows, targets


def fit_weights(x, y, length, mode='infer', start=None):
    """
    Minimum MSE taps of an equalizer of the given `length`.

    Input and target are centered on their training means `mean_x` and
    `mean_y`; the taps solve the normal equations of the centered
    series.
    The squared error is summed over the tap windows ending at
    ``n >= length`` (or ``n >= start`` when given, to compare several
    lengths on the same rows).

    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be aligned 1-D series")
    if mode not in MODES:
        raise ValueError("Unknown equalizer mode %r" % mode)
    shift = 1 if mode == 'predict' else 0
    first = length if start is None else start
    if length < 0 or first < length:
        raise ValueError("Invalid length %r / start %r" % (length, start))
    if x.size - shift <= max(length + 1, first):
        raise InsufficientData("insufficient data: %d samples for length %d"
                               % (x.size, length))

    mean_x, mean_y = x.mean(), y.mean()
    windows, targets = _pairs(x - mean_x, y - mean_y, length, mode, start)

    weights, degenerate = solve_normal_equations(windows.T @ windows,
                                                 windows.T @ targets)
    residuals = targets - windows @ weights
    if degenerate:
        watchers.EQUALIZER.warning(
            "Singular normal equations at L=%d, ridge regularized", length)

    return EqualizerModel(length=length,
                          weights=weights,
                          mean_x=float(mean_x),
                          mean_y=float(mean_y),
                          training_mse=float(np.mean(residuals ** 2)),
                          mode=mode,
                          degenerate=degenerate)


def _check_history(model, x, n):
    if n < model.length:
        raise InsufficientData("insufficient history: n=%d < L=%d"
                               % (n, model.length))
    if n >= len(x):
        raise InsufficientData("n=%d beyond the %d available samples"
                               % (n, len(x)))


def _taps(model, x, n):
    window = np.asarray(x[n - model.length:n + 1], dtype=float)[::-1]
    return window - model.mean_x


def infer(model, x, n):
    """Estimate ``y[n]`` from ``x[n-L] .. x[n]``."""
    _check_history(model, x, n)
    return float(model.mean_y + model.weights @ _taps(model, x, n))


def predict_next(model, x, n):
    """Estimate ``y[n+1]`` from ``x[n-L] .. x[n]`` with a predict model."""
    if model.mode != 'predict':
        raise ValueError("predict_next needs a 'predict' mode equalizer, "
                         "got %r" % model.mode)
    return infer(model, x, n)


def estimate(model, x, n):
    """
    Estimate of the target at row `n` according to the model mode.

    """
    if model.mode == 'predict':
        return predict_next(model, x, n - 1)
    else:
        return infer(model, x, n)


def estimate_series(model, x):
    """
    Vectorised `estimate` over a whole series.

    Rows without enough history are ``nan``.
    """
    x = np.asarray(x, dtype=float)
    out = np.full(x.size, np.nan)
    first = model.length + model.shift
    if x.size - model.shift > model.length:
        windows = lag_matrix(x[:x.size - model.shift], model.length)
        out[first:] = model.mean_y + (windows - model.mean_x) @ model.weights
    return out


def select_length(x, y, max_length, criterion='validation', mode='infer',
                  parsimony=False):
    """
    Search the best equalizer length in ``0 .. max_length``.

    ``validation`` fits every length on the first 80% of the block and
    scores it on the last 20%; ``aic`` scores
    ``n log(training_mse) + 2 (L + 1)`` over common rows. The lowest
    score wins and exact ties go to the smallest length. With
    ``parsimony=True`` every candidate within a tie band of the best
    score (one standard error of the best validation MSE, or
    `AIC_TIE_BAND`) is a tie as well.

    The winner is refitted on the whole block.

    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if max_length < 0:
        raise ValueError("max_length must be >= 0")
    if criterion not in CRITERIA:
        raise ValueError("Unknown criterion %r" % criterion)

    lengths = range(max_length + 1)
    validation_mse = None
    if criterion == 'validation':
        n_fit = int(FIT_SHARE * x.size)
        held_out = x.size - n_fit
        if held_out < max_length + 2:
            raise InsufficientData(
                "validation block of %d rows is shorter than L_max + 2 = %d"
                % (held_out, max_length + 2))
        scores, bands = [], []
        for length in lengths:
            model = fit_weights(x[:n_fit], y[:n_fit], length, mode=mode)
            errors = (y - estimate_series(model, x))[n_fit:] ** 2
            scores.append(errors.mean())
            bands.append(errors.std(ddof=1) / np.sqrt(errors.size))
        scores = np.array(scores)
        best = int(np.argmin(scores))
        band = bands[best] if parsimony else 0.0
    else:
        scores = []
        for length in lengths:
            model = fit_weights(x, y, length, mode=mode, start=max_length)
            rows = x.size - max_length - model.shift
            mse = max(model.training_mse, np.finfo(float).tiny)
            scores.append(rows * np.log(mse) + 2 * (length + 1))
        scores = np.array(scores)
        best = int(np.argmin(scores))
        band = AIC_TIE_BAND if parsimony else 0.0

    chosen = int(np.flatnonzero(scores <= scores[best] + band)[0])
    if criterion == 'validation':
        validation_mse = float(scores[chosen])

    if watchers.worth('EQUALIZER', 'DEBUG'):  # pragma: no cover
        for length, score in zip(lengths, scores):
            watchers.EQUALIZER.debug("L=%d %s=%.6g", length, criterion, score)
    watchers.EQUALIZER.info("Selected L=%d by %s (argmin L=%d)",
                            chosen, criterion, best)

    model = fit_weights(x, y, chosen, mode=mode)
    return replace(model, validation_mse=validation_mse)


def default_step(x):
    """Default LMS step, ``0.01 / var(x)``."""
    variance = float(np.var(x))
    return 0.01 / variance if variance > 0 else 0.01


def lms_update(model, x, y, n, step_mu):
    """
    One LMS step on the sample pair ending at row `n` of `x`.

    In ``predict`` mode the error is measured against ``y[n + 1]``.
    """
    if step_mu <= 0:
        raise ValueError("step_mu must be > 0")
    _check_history(model, x, n)
    taps = _taps(model, x, n)
    error = y[n + model.shift] - (model.mean_y + model.weights @ taps)
    with np.errstate(all='ignore'):
        weights = model.weights + step_mu * error * taps
    if not np.all(np.isfinite(weights)):
        raise LMSDiverged("LMS diverged at n=%d (step %r)" % (n, step_mu))
    return replace(model, weights=weights)


def track(model, x, y, start, step_mu=None):
    """
    Online inference from target row `start` on.

    Every row is first estimated with the current weights, which are then
    updated with the LMS rule (no update when `step_mu` is ``None``).
    Returns the estimates (``nan`` before `start`) and the final model.

    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.full(y.size, np.nan)
    for row in range(max(start, model.length + model.shift), y.size):
        out[row] = estimate(model, x, row)
        if step_mu is not None:
            model = lms_update(model, x, y, row - model.shift, step_mu)
    return out, model
