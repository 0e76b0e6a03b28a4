"""
Unsupervised separation of noisy discrete-valued images.

Every noisy image is treated as a sequence of letters observed through a
known memoryless channel. The source distribution is learned from the
pooled pixels of the corpus, the channel is inverted to recover the
clean-pixel distribution, and the score function of the resulting DTM
ranks the images. Labels are never read while building the scorer.

"""
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from ctda import watchers
from ctda.coupling import build_dtm, score_table, sign_convention
from ctda.coupling import solve_coupling
from ctda.exceptions import InconsistentChannel
from ctda.images import gen_two_class_images, apply_channel_to_dataset
from ctda.stats import DiscreteDistribution, empirical_distribution
from ctda.stats import parametric_channel
from ctda.utils import derive_seed, thread_count

#: Negative recovered probabilities down to this value are clipped.
CLIP_TOLERANCE = 1e-6

MODES = ('pooled', 'per_pixel')

CurvePoint = namedtuple('CurvePoint', ['e', 'error_probability', 'n_images',
                                       'seed', 'oracle_error'])


@dataclass(frozen=True)
class ScoredItem:
    index: int
    score: float
    label: int = None
    mode: str = 'pooled'

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError("Score of item %d is not finite" % self.index)


def smooth(counts):
    """Add-constant estimate, ``1/(n K)`` added to each frequency."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    return DiscreteDistribution.normalized(counts / total
                                           + 1.0 / (total * counts.size))


def learn_pooled_source(noisy_dataset):
    """Empirical distribution of all the pixels of all the images."""
    return empirical_distribution(noisy_dataset.pixels,
                                  noisy_dataset.alphabet_size)


def recover_source_input(p_y, channel, clip_tolerance=CLIP_TOLERANCE):
    """
    Input distribution explaining `p_y` through `channel`.

    Small negative entries (down to ``-clip_tolerance``) are clipped and
    the result renormalized.
    """
    matrix = channel.matrix
    if matrix.shape[0] != matrix.shape[1]:
        raise InconsistentChannel("channel must be square to be inverted")
    if len(p_y) != matrix.shape[0]:
        raise ValueError("Distribution and channel sizes differ")
    if np.linalg.cond(matrix) * np.finfo(float).eps >= 1:
        raise InconsistentChannel("channel not invertible")

    p_x = linalg.solve(matrix, p_y.probs)
    if p_x.min() < -clip_tolerance:
        raise InconsistentChannel(
            "inconsistent channel/source: recovered probability %r"
            % float(p_x.min()))
    return DiscreteDistribution.normalized(np.clip(p_x, 0, None))


def symbol_histograms(pixels, alphabet_size):
    """Symbol counts of every image, one row per image."""
    pixels = np.atleast_2d(pixels)
    rows = np.repeat(np.arange(pixels.shape[0]), pixels.shape[1])
    histograms = np.zeros((pixels.shape[0], alphabet_size))
    np.add.at(histograms, (rows, pixels.ravel()), 1)
    return histograms


def resolve_degenerate_direction(solution, dtm, histograms):
    """
    Pick, inside a degenerate singular subspace, the direction whose
    image scores vary the most across the corpus.

    Returns the restricted ``psi_x``.
    """
    subspace = solution.subspace
    outputs = list(dtm.outputs)
    scores = np.zeros((dtm.output_size, subspace.shape[1]))
    scores[outputs] = ((dtm.matrix @ subspace)
                       / dtm.sqrt_py[:, np.newaxis])
    image_scores = histograms @ scores
    if image_scores.shape[0] < 2:
        return solution.psi_x
    covariance = np.atleast_2d(np.cov(image_scores, rowvar=False))
    values, vectors = linalg.eigh(covariance)
    if values[-1] <= 0:
        return solution.psi_x
    return sign_convention(subspace @ vectors[:, -1])


def _fit_table(channel, p_x, histograms):
    dtm = build_dtm(channel, p_x)
    solution = solve_coupling(dtm)
    if solution.degenerate_subspace:
        psi_x = resolve_degenerate_direction(solution, dtm, histograms)
        solution = replace(solution, psi_x=psi_x, psi_y=dtm.matrix @ psi_x)
    return score_table(solution, dtm), solution


def build_image_scorer(noisy_dataset, channel, source=None, smoothing=False):
    """
    Score table of a noisy corpus observed through `channel`.

    The clean-pixel distribution is recovered by inverting the channel
    unless a `source` distribution (e.g. estimated from clean images) is
    given. Labels are dropped before anything else.
    """
    dataset = noisy_dataset.without_labels()
    if smoothing:
        p_y = smooth(np.bincount(dataset.pixels.ravel(),
                                 minlength=dataset.alphabet_size))
    else:
        p_y = learn_pooled_source(dataset)
    p_x = source if source is not None else recover_source_input(p_y,
                                                                 channel)
    table, solution = _fit_table(
        channel, p_x, symbol_histograms(dataset.pixels, channel.outputs))
    watchers.SCORING.info("Pooled scorer: sigma_2=%.6g, scores %s",
                          solution.second_singular_value,
                          dict(table.scores))
    return table


def score_dataset(dataset, table):
    """Image scores, in image order."""
    lookup = table.as_array()
    if dataset.pixels.size and dataset.pixels.max() >= lookup.size:
        raise ValueError("unknown symbol %d" % dataset.pixels.max())
    scores = lookup[dataset.pixels].sum(axis=1)
    return _items(scores, dataset.labels)


def _items(scores, labels, mode='pooled'):
    labels = [None] * len(scores) if labels is None else labels.tolist()
    return [ScoredItem(index, float(score), label, mode)
            for index, (score, label) in enumerate(zip(scores, labels))]


def score_dataset_per_pixel(noisy_dataset, channel, smoothing=True):
    """
    Score every pixel position with its own source distribution.

    With `smoothing` the per-pixel output marginals and recovered inputs
    get the add-constant ``1/(n K)`` estimate, which keeps every symbol
    in the DTM. The image score is the sum of the pixel scores.
    """
    dataset = noisy_dataset.without_labels()
    alphabet = dataset.alphabet_size
    scores = np.zeros(len(dataset))
    for pixel in range(dataset.pixel_count):
        column = dataset.pixels[:, pixel]
        counts = np.bincount(column, minlength=alphabet)
        if smoothing:
            p_x = recover_source_input(smooth(counts), channel,
                                       clip_tolerance=np.inf)
            p_x = smooth(p_x.probs * len(dataset))
        else:
            p_x = recover_source_input(
                DiscreteDistribution(counts / counts.sum()), channel)
        table, _ = _fit_table(channel, p_x,
                              symbol_histograms(column[:, np.newaxis],
                                                channel.outputs))
        scores += table.as_array()[column]

    watchers.SCORING.info("Per-pixel scores for %d images of %d pixels",
                          len(dataset), dataset.pixel_count)
    return _items(scores, noisy_dataset.labels, mode='per_pixel')


def separation_error(scored):
    """
    Fraction of misplaced items when a balanced two-class corpus is split
    at the median score, minimized over both orientations.

    """
    labels = np.array([item.label for item in scored], dtype=object)
    if any(label is None for label in labels):
        raise ValueError("Every item needs a label")
    classes = sorted(set(labels.tolist()))
    if len(classes) != 2:
        raise ValueError("exactly 2 classes are needed, got %d"
                         % len(classes))
    counts = [int(np.sum(labels == c)) for c in classes]
    if counts[0] != counts[1]:
        raise ValueError("unbalanced classes: %r" % dict(zip(classes,
                                                             counts)))

    half = counts[0]
    scores = np.array([item.score for item in scored])
    indices = np.array([item.index for item in scored])
    order = np.lexsort((indices, scores))
    bottom = labels[order[:half]]
    # Every misplaced item at the bottom swaps with one at the top.
    first = 2 * int(np.sum(bottom != classes[0]))
    second = 2 * int(np.sum(bottom != classes[1]))
    return min(first, second) / (2 * half)


def oracle_scores(noisy_dataset, channel, class_dists):
    """
    Exact noisy-pixel log-likelihood ratio of the first class against
    the second, the reference a supervised observer could reach.

    """
    logs = []
    for dist in class_dists:
        noisy = channel.matrix @ dist.probs
        logs.append(np.log(np.maximum(noisy, np.finfo(float).tiny)))
    ratio = logs[0] - logs[1]
    return _items(ratio[noisy_dataset.pixels].sum(axis=1),
                  noisy_dataset.labels, mode='oracle')


def _curve_point(index, e, class_dists, width, height, n_per_class, seed,
                 mode, oracle):
    point_seed = derive_seed(seed, index)
    clean = gen_two_class_images(point_seed, n_per_class, width, height,
                                 class_dists)
    channel = parametric_channel(e)
    noisy = apply_channel_to_dataset(clean, channel,
                                     derive_seed(point_seed, 1 << 32))
    if mode == 'pooled':
        scored = score_dataset(noisy, build_image_scorer(noisy, channel))
    else:
        scored = score_dataset_per_pixel(noisy, channel)
    error = separation_error(scored)
    oracle_error = (separation_error(oracle_scores(noisy, channel,
                                                   class_dists))
                    if oracle else None)
    watchers.SCORING.info("e=%g error=%g oracle=%s", e, error, oracle_error)
    return CurvePoint(float(e), error, len(noisy), point_seed, oracle_error)


def error_vs_noise_curve(class_dists, width, height, n_per_class, e_grid,
                         seed, mode='pooled', oracle=False):
    """
    Separation error probability for every noise level of `e_grid`.

    Grid points are independent (seeded with ``seed XOR index``) and run
    on up to `thread_count()` threads.
    """
    e_grid = [float(e) for e in e_grid]
    if not e_grid:
        raise ValueError("Empty noise grid")
    if any(not 0 <= e <= 0.25 for e in e_grid):
        raise ValueError("noise level out of range in %r" % e_grid)
    if mode not in MODES:
        raise ValueError("Unknown scoring mode %r" % mode)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        futures = [pool.submit(_curve_point, index, e, class_dists, width,
                               height, n_per_class, seed, mode, oracle)
                   for index, e in enumerate(e_grid)]
        return [future.result() for future in futures]
