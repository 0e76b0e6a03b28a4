"""
Linear information coupling.

For a channel ``W`` and an input distribution ``P_X`` with output
``P_Y = W P_X``, the divergence transition matrix (DTM)::

    B = diag(sqrt(P_Y))^-1  W  diag(sqrt(P_X))

maps input perturbation vectors to output perturbation vectors. Its
largest singular value is 1, attained at ``sqrt(P_X)``, which is not a
valid perturbation; the most informative valid perturbation is the top
right singular vector in the orthogonal complement of ``sqrt(P_X)``.

Mutual information is measured in nats. In nats the second order
expansion of ``sum_u P_U(u) D(P_{X|U=u} || P_X)`` is
``(delta / 2) sum_u P_U(u) ||psi_u||^2``; the factor ``1/2`` does not
move the optimal perturbation.

"""
from dataclasses import dataclass

from frozendict import frozendict
import numpy as np
from scipy import linalg

from ctda import watchers
from ctda.exceptions import InfeasiblePerturbation
from ctda.stats import DiscreteDistribution, channel_output
from ctda.utils import freeze

#: Singular values closer than this are considered equal.
MULTIPLICITY_TOLERANCE = 1e-9

#: Entries below this magnitude are skipped by the sign convention.
SIGN_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Dtm:
    """
    Divergence transition matrix restricted to the symbols with mass.

    `inputs` and `outputs` map its columns and rows back to the channel
    alphabets, whose sizes are `input_size` and `output_size`.
    """
    matrix: np.ndarray
    p_x: np.ndarray
    p_y: np.ndarray
    inputs: tuple
    outputs: tuple
    input_size: int
    output_size: int

    def __post_init__(self):
        for name in ('matrix', 'p_x', 'p_y'):
            object.__setattr__(self, name,
                               freeze(np.asarray(getattr(self, name),
                                                 dtype=float)))
        if self.matrix.shape != (self.p_y.size, self.p_x.size):
            raise ValueError("DTM shape does not match its marginals")
        object.__setattr__(self, 'inputs', tuple(int(i) for i in self.inputs))
        object.__setattr__(self, 'outputs',
                           tuple(int(i) for i in self.outputs))

    @property
    def sqrt_px(self):
        return np.sqrt(self.p_x)

    @property
    def sqrt_py(self):
        return np.sqrt(self.p_y)

    @property
    def dropped_inputs(self):
        return tuple(sorted(set(range(self.input_size)) - set(self.inputs)))

    @property
    def dropped_outputs(self):
        return tuple(sorted(set(range(self.output_size))
                            - set(self.outputs)))

    def embed_input(self, vector):
        """Scatter a restricted input vector to the full input alphabet."""
        full = np.zeros(self.input_size)
        full[list(self.inputs)] = vector
        return full


@dataclass(frozen=True, eq=False)
class CouplingSolution:
    """
    Singular system of a DTM.

    `psi_x` and `psi_y` are restricted to the DTM symbols. When the top
    valid singular value is repeated, `subspace` holds an orthonormal
    basis (columns) of all its right singular vectors.
    """
    singular_values: np.ndarray
    psi_x: np.ndarray
    psi_y: np.ndarray
    second_singular_value: float
    degenerate_subspace: bool = False
    subspace: np.ndarray = None

    def __post_init__(self):
        for name in ('singular_values', 'psi_x', 'psi_y', 'subspace'):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name,
                                   freeze(np.asarray(value, dtype=float)))


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """
    Score ``f(y) = psi_y(y) / sqrt(P_Y(y))`` of every output symbol.

    Symbols dropped for having no mass score 0 and are listed in
    `dropped`.
    """
    scores: frozendict
    dropped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'scores',
                           frozendict((int(k), float(v))
                                      for k, v in self.scores.items()))
        object.__setattr__(self, 'dropped', tuple(self.dropped))

    def as_array(self):
        """Scores indexed by symbol, for symbols ``0 .. max``."""
        table = np.zeros(max(self.scores) + 1)
        for symbol, score in self.scores.items():
            table[symbol] = score
        return table

    def __getitem__(self, symbol):
        return self.scores[symbol]

    def __len__(self):
        return len(self.scores)


def build_dtm(channel, p_x):
    """
    DTM of `channel` driven by `p_x`.

    Input symbols without mass and output symbols never produced are
    dropped, and recorded, before building the matrix.
    """
    p_y = channel_output(channel, p_x)
    inputs = p_x.support
    outputs = p_y.support
    if inputs.size < p_x.probs.size or outputs.size < p_y.probs.size:
        watchers.COUPLING.info("Dropping zero mass inputs %s / outputs %s",
                               sorted(set(range(len(p_x))) - set(inputs)),
                               sorted(set(range(len(p_y))) - set(outputs)))

    px, py = p_x.probs[inputs], p_y.probs[outputs]
    restricted = channel.matrix[np.ix_(outputs, inputs)]
    matrix = restricted * np.sqrt(px)[np.newaxis] / np.sqrt(py)[:, np.newaxis]
    return Dtm(matrix, px, py, inputs, outputs,
               input_size=channel.inputs, output_size=channel.outputs)


def sign_convention(vector):
    """Flip `vector` so its first significant entry is positive."""
    significant = np.flatnonzero(np.abs(vector) > SIGN_TOLERANCE)
    if significant.size and vector[significant[0]] < 0:
        return -vector
    return vector


def solve_coupling(dtm):
    """
    Most informative valid perturbation of a DTM.

    The SVD is taken on the restriction of ``B`` to the orthogonal
    complement of ``sqrt(P_X)``. The top singular value there is the
    second singular value of ``B``; it is flagged as degenerate when it
    is repeated, or equal to the trivial value 1, within
    `MULTIPLICITY_TOLERANCE`.
    """
    if dtm.p_x.size < 2:
        raise ValueError("A valid perturbation needs at least two input "
                         "symbols with mass")

    singular_values = linalg.svdvals(dtm.matrix)
    basis = linalg.null_space(dtm.sqrt_px[np.newaxis])
    left, values, right_t = linalg.svd(dtm.matrix @ basis)
    sigma_2 = float(values[0]) if values.size else 0.0

    # Directions beyond the rank of B @ basis have singular value 0.
    complete = np.zeros(basis.shape[1])
    complete[:values.size] = values
    top = np.flatnonzero(complete >= sigma_2 - MULTIPLICITY_TOLERANCE)
    degenerate = (top.size > 1
                  or 1.0 - sigma_2 <= MULTIPLICITY_TOLERANCE)

    psi_x = sign_convention(basis @ right_t[0])
    psi_y = dtm.matrix @ psi_x
    subspace = basis @ right_t[top].T if degenerate else None

    if degenerate:
        watchers.COUPLING.warning(
            "Degenerate singular subspace (sigma_2=%.12g, dimension %d)",
            sigma_2, top.size)
    watchers.COUPLING.info("sigma = %s",
                           ", ".join("%.6g" % s for s in singular_values))

    return CouplingSolution(singular_values=singular_values,
                            psi_x=psi_x,
                            psi_y=psi_y,
                            second_singular_value=sigma_2,
                            degenerate_subspace=degenerate,
                            subspace=subspace)


def perturb_distribution(p_x, psi_x, delta, sign=1):
    """
    ``Q(x) = P_X(x) + sign * sqrt(delta * P_X(x)) * psi_x(x)``.

    `psi_x` covers the whole alphabet of `p_x`.
    """
    psi_x = np.asarray(psi_x, dtype=float)
    if psi_x.shape != p_x.probs.shape:
        raise ValueError("Perturbation and distribution sizes differ")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if delta < 0:
        raise ValueError("delta must be >= 0")

    direction = sign * psi_x
    perturbed = p_x.probs + np.sqrt(delta * p_x.probs) * direction
    if np.any(perturbed < 0):
        shrinking = direction < 0
        max_delta = float(np.min(p_x.probs[shrinking]
                                 / direction[shrinking] ** 2))
        raise InfeasiblePerturbation(
            "delta too large: %r > max feasible %r" % (delta, max_delta),
            max_delta)
    return DiscreteDistribution(perturbed / perturbed.sum())


def local_mi_approx(p_u, psis, delta):
    """
    Second order approximation of ``I(U;X)`` in nats::

        (delta / 2) * sum_u P_U(u) ||psi_u||^2

    """
    psis = [np.asarray(psi, dtype=float) for psi in psis]
    if len(psis) != len(p_u):
        raise ValueError("One perturbation vector per value of U needed")
    if len({psi.shape for psi in psis}) > 1:
        raise ValueError("Perturbation vectors of different sizes")
    norms = np.array([psi @ psi for psi in psis])
    return float(delta / 2.0 * (p_u.probs @ norms))


def score_table(solution, dtm):
    """Score function of the output symbols."""
    scores = dict.fromkeys(range(dtm.output_size), 0.0)
    for symbol, psi, p in zip(dtm.outputs, solution.psi_y, dtm.p_y):
        scores[symbol] = psi / np.sqrt(p)
    return ScoreTable(scores, dropped=dtm.dropped_outputs)


def sequence_score(table, sequence):
    """Sum of the scores of the symbols of `sequence` (0 when empty)."""
    sequence = np.asarray(sequence, dtype=np.int64).ravel()
    if sequence.size == 0:
        return 0.0
    unknown = [s for s in np.unique(sequence).tolist()
               if s not in table.scores]
    if unknown:
        raise ValueError("unknown symbol(s) %r" % unknown)
    return float(table.as_array()[sequence].sum())


def tensor_dtm(a, b):
    """DTM of the product of two independent uses of the channels."""
    inputs = [i * b.input_size + j for i in a.inputs for j in b.inputs]
    outputs = [i * b.output_size + j for i in a.outputs for j in b.outputs]
    return Dtm(np.kron(a.matrix, b.matrix),
               np.kron(a.p_x, b.p_x),
               np.kron(a.p_y, b.p_y),
               inputs, outputs,
               input_size=a.input_size * b.input_size,
               output_size=a.output_size * b.output_size)
