"""
Discrete distributions, memoryless channels and exact information
measures.

Every quantity is expressed in nats. Channels are column-stochastic:
entry ``(y, x)`` of the matrix is ``W(y|x)``.

"""
from dataclasses import dataclass

import numpy as np
from scipy import special

from ctda.exceptions import NoiseLevelError
from ctda.utils import freeze

#: Normalization tolerance of distributions and channel columns.
PROBABILITY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability mass over the symbols ``0 .. K-1`` (``K >= 2``)."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 2:
            raise ValueError(
                "A distribution needs at least 2 symbols, got shape %r"
                % (probs.shape, ))
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("Negative or non-finite probability in %r"
                             % (probs, ))
        if abs(probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError("Probabilities sum to %r, not 1"
                             % (probs.sum(), ))
        object.__setattr__(self, 'probs', freeze(probs))

    def __len__(self):
        return self.probs.size

    @property
    def support(self):
        """Symbols with non-zero probability."""
        return np.flatnonzero(self.probs > 0)

    @classmethod
    def normalized(cls, weights):
        """Build a distribution proportional to non-negative `weights`."""
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if not total > 0:
            raise ValueError("Weights %r cannot be normalized" % (weights, ))
        return cls(weights / total)

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))


@dataclass(frozen=True, eq=False)
class Channel:
    """Discrete memoryless channel as a ``|Y| x |X|`` matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or 0 in matrix.shape:
            raise ValueError("A channel matrix must be 2-D and non empty, "
                             "got shape %r" % (matrix.shape, ))
        if (not np.all(np.isfinite(matrix))
                or np.any(matrix < 0) or np.any(matrix > 1)):
            raise ValueError("Channel entries must lie in [0, 1]")
        sums = matrix.sum(axis=0)
        worst = np.max(np.abs(sums - 1.0))
        if worst > PROBABILITY_TOLERANCE:
            raise ValueError(
                "Channel columns must sum to 1 (worst deviation %r)"
                % (worst, ))
        object.__setattr__(self, 'matrix', freeze(matrix))

    @property
    def outputs(self):
        return self.matrix.shape[0]

    @property
    def inputs(self):
        return self.matrix.shape[1]

    def column(self, symbol):
        """Output distribution ``W(.|symbol)``."""
        return DiscreteDistribution(self.matrix[:, symbol])


def identity_channel(size):
    return Channel(np.eye(size))


def binary_symmetric_channel(crossover):
    if not 0 <= crossover <= 1:
        raise NoiseLevelError("noise level out of range: %r" % crossover)
    return Channel(np.array([[1 - crossover, crossover],
                             [crossover, 1 - crossover]]))


def parametric_channel(e):
    """
    Four symbol noisy channel driven by the noise level `e`.

    Every entry is affine in `e` and every column sums to one, so that
    ``e = 0`` is the noiseless channel. Valid for ``0 <= e <= 0.25``.

    """
    if not 0 <= e <= 0.25:
        raise NoiseLevelError("noise level out of range: %r" % (e, ))
    return Channel(np.array([
        [1 - 2 * e, 2 * e, e, e / 2],
        [e, 1 - 3 * e, 2 * e, e / 4],
        [e, 0.0, 1 - 4 * e, e / 4],
        [0.0, e, e, 1 - e],
    ]))


def empirical_distribution(samples, alphabet_size):
    """Relative frequencies of the symbols in `samples`."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("no data")
    if not np.issubdtype(samples.dtype, np.integer):
        raise ValueError("Symbols must be integers, got %s" % samples.dtype)
    out_of_range = (samples < 0) | (samples >= alphabet_size)
    if np.any(out_of_range):
        index = int(np.flatnonzero(out_of_range.ravel())[0])
        raise ValueError(
            "Symbol %r at index %d outside alphabet [0, %d)"
            % (samples.ravel()[index].item(), index, alphabet_size))
    counts = np.bincount(samples.ravel(), minlength=alphabet_size)
    return DiscreteDistribution(counts / samples.size)


def channel_output(channel, source):
    """Output distribution ``P_Y = W . P_X``."""
    if channel.inputs != len(source):
        raise ValueError(
            "Channel has %d inputs but the source has %d symbols"
            % (channel.inputs, len(source)))
    output = channel.matrix @ source.probs
    # Column sums are exact to the validation tolerance, not bitwise.
    return DiscreteDistribution(output / output.sum())


def kl_divergence(p, q):
    """``D(p || q)`` in nats, with ``0 log 0 = 0``."""
    if len(p) != len(q):
        raise ValueError("Distributions of different sizes")
    # kl_div terms are non-negative, which keeps tiny divergences exact.
    return float(np.sum(special.kl_div(p.probs, q.probs)))


def exact_mutual_information(p_u, conditionals):
    """
    ``I(U;X)`` in nats from ``P_U`` and the conditionals ``P_{X|U=u}``.

    """
    conditionals = list(conditionals)
    if len(p_u) != len(conditionals):
        raise ValueError("P_U has %d symbols but %d conditionals given"
                         % (len(p_u), len(conditionals)))
    if len({len(c) for c in conditionals}) != 1:
        raise ValueError("Conditionals of different sizes")

    stacked = np.vstack([c.probs for c in conditionals])
    marginal = DiscreteDistribution.normalized(p_u.probs @ stacked)
    return float(sum(weight * kl_divergence(conditional, marginal)
                     for weight, conditional in zip(p_u.probs, conditionals)
                     if weight > 0))


def to_bits(nats):
    return nats / np.log(2)
