"""
Multivariate regression baselines.

Both estimators regress ``y[n]`` on every input over one common lag
window ``x_m[n - l], l = 0 .. common_lag``. Coefficients are ordered
channel first: coefficient ``m * (common_lag + 1) + l`` multiplies
``x_m[n - l]``.

"""
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from ctda import watchers
from ctda.equalizer import solve_normal_equations
from ctda.exceptions import InsufficientData
from ctda.utils import freeze

KINDS = ('ols', 'bayes')


@dataclass(frozen=True, eq=False)
class LinearModel:
    coefficients: np.ndarray
    intercept: float
    common_lag: int
    residual_mse: float
    kind: str = 'ols'
    degenerate: bool = False

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        if (self.common_lag < 0 or coefficients.ndim != 1
                or coefficients.size % (self.common_lag + 1)
                or coefficients.size == 0):
            raise ValueError("Coefficient count must be M * (common_lag + 1)")
        if not (np.all(np.isfinite(coefficients))
                and np.isfinite(self.intercept)
                and np.isfinite(self.residual_mse)):
            raise ValueError("Linear model values must be finite")
        if self.kind not in KINDS:
            raise ValueError("Unknown linear model kind %r" % self.kind)
        object.__setattr__(self, 'coefficients', freeze(coefficients))

    @property
    def channels(self):
        return self.coefficients.size // (self.common_lag + 1)


def design_matrix(inputs, common_lag):
    """Regressor rows for the targets ``n = common_lag .. N-1``."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    return np.hstack([sliding_window_view(x, common_lag + 1)[:, ::-1]
                      for x in inputs])


def _centered_problem(inputs, y, common_lag):
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(y, dtype=float)
    if inputs.shape[1] != y.size:
        raise ValueError("Inputs and target are not aligned")
    regressors = inputs.shape[0] * (common_lag + 1)
    if y.size <= regressors + 1 + common_lag:
        raise InsufficientData(
            "insufficient data: %d samples for %d regressors"
            % (y.size, regressors))
    design = design_matrix(inputs, common_lag)
    targets = y[common_lag:]
    design_mean, target_mean = design.mean(axis=0), targets.mean()
    return (design, targets, design - design_mean, targets - target_mean,
            design_mean, target_mean)


def _model(design, targets, beta, design_mean, target_mean, common_lag,
           kind, degenerate):
    intercept = float(target_mean - design_mean @ beta)
    residuals = targets - intercept - design @ beta
    return LinearModel(coefficients=beta,
                       intercept=intercept,
                       common_lag=common_lag,
                       residual_mse=float(np.mean(residuals ** 2)),
                       kind=kind,
                       degenerate=degenerate)


def fit_ols(inputs, y, common_lag=0):
    """Least squares with intercept over the common lag window."""
    design, targets, xc, yc, design_mean, target_mean = \
        _centered_problem(inputs, y, common_lag)
    beta, degenerate = solve_normal_equations(xc.T @ xc, xc.T @ yc)
    if degenerate:
        watchers.BASELINES.warning("Rank deficient OLS design, ridge "
                                   "regularized")
    return _model(design, targets, beta, design_mean, target_mean,
                  common_lag, 'ols', degenerate)


def fit_bayes(inputs, y, common_lag=0, prior_variance=1.0,
              noise_variance=None):
    """
    Posterior mean under independent ``N(0, prior_variance)`` priors on
    the coefficients and ``N(0, noise_variance)`` observation noise.

    `noise_variance` defaults to the OLS residual variance.
    """
    if noise_variance is None:
        noise_variance = max(fit_ols(inputs, y, common_lag).residual_mse,
                             np.finfo(float).tiny)
    if prior_variance <= 0 or noise_variance <= 0:
        raise ValueError("Prior and noise variances must be > 0")

    design, targets, xc, yc, design_mean, target_mean = \
        _centered_problem(inputs, y, common_lag)
    ratio = noise_variance / prior_variance
    beta = linalg.solve(xc.T @ xc + ratio * np.eye(xc.shape[1]), xc.T @ yc,
                        assume_a='pos')
    watchers.BASELINES.debug("Bayesian regression with ratio %.6g", ratio)
    return _model(design, targets, beta, design_mean, target_mean,
                  common_lag, 'bayes', False)


def predict(model, inputs, n):
    """Estimate ``y[n]`` from the lag window ending at row `n`."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    if inputs.shape[0] != model.channels:
        raise ValueError("Model expects %d inputs, got %d"
                         % (model.channels, inputs.shape[0]))
    if n < model.common_lag or n >= inputs.shape[1]:
        raise InsufficientData("insufficient history at n=%d" % n)
    window = inputs[:, n - model.common_lag:n + 1][:, ::-1].ravel()
    return float(model.intercept + model.coefficients @ window)


def predict_series(model, inputs):
    """`predict` for every row (``nan`` without enough history)."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    out = np.full(inputs.shape[1], np.nan)
    if inputs.shape[1] > model.common_lag:
        out[model.common_lag:] = (model.intercept
                                  + design_matrix(inputs, model.common_lag)
                                  @ model.coefficients)
    return out
