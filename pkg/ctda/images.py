"""
Discrete-valued image corpora: synthetic two-class generation, pixelwise
memoryless corruption and CSV ingestion.

"""
from dataclasses import dataclass, replace
import math

import numpy as np
import pandas as pd

from ctda import watchers
from ctda.exceptions import DataFormatError
from ctda.utils import freeze


@dataclass(frozen=True, eq=False)
class ImageDataset:
    """
    Flattened images of ``width * height`` symbols in ``[0, K)``.

    `labels` is ``None`` for unlabelled corpora.
    """
    width: int
    height: int
    alphabet_size: int
    pixels: np.ndarray
    labels: np.ndarray = None

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[1] != self.width * self.height:
            raise ValueError(
                "Every image must have %d x %d pixels, got shape %r"
                % (self.width, self.height, pixels.shape))
        if not np.issubdtype(pixels.dtype, np.integer):
            raise ValueError("Pixels must be integer symbols")
        if pixels.size and (pixels.min() < 0
                            or pixels.max() >= self.alphabet_size):
            raise ValueError("Pixel symbol outside [0, %d)"
                             % self.alphabet_size)
        object.__setattr__(self, 'pixels', freeze(pixels.astype(np.int64)))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (pixels.shape[0], ):
                raise ValueError("One label per image is required")
            object.__setattr__(self, 'labels', freeze(labels))

    def __len__(self):
        return self.pixels.shape[0]

    @property
    def pixel_count(self):
        return self.width * self.height

    def without_labels(self):
        return replace(self, labels=None)


def gen_two_class_images(seed, n_per_class, width, height, class_pixel_dists):
    """
    ``n_per_class`` images of each class, pixels i.i.d. from the class
    distribution. Class ``0`` images come first.

    """
    first, second = class_pixel_dists
    if len(first) != len(second):
        raise ValueError("Class distributions differ in alphabet size")

    rng = np.random.default_rng(seed)
    size = width * height
    pixels = np.vstack([
        rng.choice(len(dist), size=(n_per_class, size), p=dist.probs)
        for dist in (first, second)])
    labels = np.repeat([0, 1], n_per_class)
    return ImageDataset(width, height, len(first), pixels, labels)


def apply_channel_to_dataset(dataset, channel, seed):
    """Resample every pixel independently from ``W(.|pixel)``."""
    if channel.inputs != dataset.alphabet_size:
        raise ValueError("Channel has %d inputs but the images use %d "
                         "symbols" % (channel.inputs, dataset.alphabet_size))

    rng = np.random.default_rng(seed)
    cdf = np.cumsum(channel.matrix, axis=0)
    uniform = rng.random(dataset.pixels.shape)
    # Inverse CDF sampling: count the cumulative levels below the draw.
    noisy = (uniform[np.newaxis] >= cdf[:, dataset.pixels]).sum(axis=0)
    noisy = np.minimum(noisy, channel.outputs - 1)

    watchers.DATA.debug("Corrupted %d images through a %dx%d channel",
                        len(dataset), channel.outputs, channel.inputs)
    return replace(dataset, alphabet_size=channel.outputs, pixels=noisy)


def guess_dimensions(pixel_count):
    side = math.isqrt(pixel_count)
    if side * side == pixel_count:
        return side, side
    else:
        return pixel_count, 1


def load_images_csv(path, alphabet_size, dims=None):
    """
    Load a ``label,p0,p1,...`` CSV file. Empty labels mean unlabelled.

    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False,
                            encoding='utf-8')
    except pd.errors.ParserError as exc:
        raise DataFormatError("%s: %s" % (path, exc)) from exc
    except pd.errors.EmptyDataError as exc:
        raise DataFormatError("%s: empty file" % path) from exc

    if not len(frame.columns) or frame.columns[0] != 'label':
        raise DataFormatError("%s: first column must be 'label'" % path)
    pixel_columns = list(frame.columns[1:])
    expected = ["p%d" % i for i in range(len(pixel_columns))]
    if not pixel_columns or pixel_columns != expected:
        raise DataFormatError("%s: pixel columns must be p0..p%d"
                              % (path, len(pixel_columns) - 1))

    width, height = dims or guess_dimensions(len(pixel_columns))
    if width * height != len(pixel_columns):
        raise DataFormatError("%s: %d pixels do not fit %dx%d images"
                              % (path, len(pixel_columns), width, height))

    pixels = np.empty((len(frame), len(pixel_columns)), dtype=np.int64)
    labels = []
    for offset, row in enumerate(frame.itertuples(index=False)):
        line = offset + 2
        try:
            pixels[offset] = [int(v) for v in row[1:]]
        except ValueError as exc:
            raise DataFormatError("%s:%d: %s" % (path, line, exc)) from exc
        bad = (pixels[offset] < 0) | (pixels[offset] >= alphabet_size)
        if np.any(bad):
            raise DataFormatError(
                "%s:%d: pixel %d outside [0, %d)"
                % (path, line, int(np.flatnonzero(bad)[0]), alphabet_size))
        label = row[0].strip()
        try:
            labels.append(int(label) if label else None)
        except ValueError as exc:
            raise DataFormatError("%s:%d: invalid label %r"
                                  % (path, line, label)) from exc

    if not len(frame):
        raise DataFormatError("%s: no images" % path)
    if all(label is None for label in labels):
        labels = None
    elif any(label is None for label in labels):
        raise DataFormatError("%s: labels must be all present or all "
                              "empty" % path)

    watchers.DATA.info("Loaded %d images of %dx%d from %s",
                       len(frame), width, height, path)
    return ImageDataset(width, height, alphabet_size, pixels, labels)


def save_images_csv(dataset, path):
    frame = pd.DataFrame(dataset.pixels,
                         columns=["p%d" % i
                                  for i in range(dataset.pixel_count)])
    labels = ([""] * len(dataset) if dataset.labels is None
              else [str(label) for label in dataset.labels])
    frame.insert(0, 'label', labels)
    frame.to_csv(path, index=False, lineterminator='\n')
