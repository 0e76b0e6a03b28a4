"""
Seeded synthetic experiments shipped with the package.

``two_channel_scenario``
    Two independent Gaussian inputs driving one target through FIR
    responses of memories 4 and 12, plus white noise. The short channel
    carries little energy, the long one most of it, so each equalizer
    alone leaves a large residual while their fusion does not.

``two_class_image_scenario``
    Two classes of 19x19 four-level images, each class with i.i.d.
    pixels concentrated on a different symbol, observed through the
    parametric noisy channel at several noise levels.

"""
from collections import namedtuple

from ctda.series import align, gen_fir_series, split
from ctda.stats import DiscreteDistribution

SHIPPED_SEED = 2014

#: FIR responses of the two-channel scenario, memories 4 and 12.
FIR_COEFFICIENTS = ((0.3, -0.3, 0.3, -0.3, 0.8),
                    (0.5, ) * 12 + (0.8, ))
NOISE_SIGMA = 0.1
TRAIN_ROWS = 10000
TEST_ROWS = 2000
MAX_LENGTH = 16

CLASS_PIXEL_PROBS = ((0.7, 0.1, 0.1, 0.1),
                     (0.1, 0.1, 0.1, 0.7))
IMAGE_DIMS = (19, 19)
IMAGES_PER_CLASS = 100
NOISE_GRID = (0.0, 0.05, 0.1, 0.2)

FirScenario = namedtuple('FirScenario', ['inputs', 'target', 'train', 'test',
                                         'coefficients', 'max_length'])

ImageScenario = namedtuple('ImageScenario', ['class_dists', 'width',
                                             'height', 'n_per_class',
                                             'e_grid', 'seed'])


def two_channel_scenario(seed=SHIPPED_SEED, train_rows=TRAIN_ROWS,
                         test_rows=TEST_ROWS):
    """
    Generate the FIR scenario and split it into training and test blocks.

    The test block carries `MAX_LENGTH` rows of training history.
    """
    inputs, target = gen_fir_series(seed, train_rows + test_rows,
                                    FIR_COEFFICIENTS, 'iid_gaussian',
                                    NOISE_SIGMA)
    aligned = align(inputs + [target], policy='inner')
    train, test = split(aligned, (None, train_rows), (train_rows, None),
                        history=MAX_LENGTH)
    return FirScenario(inputs, target, train, test, FIR_COEFFICIENTS,
                       MAX_LENGTH)


def two_class_image_scenario(seed=SHIPPED_SEED):
    width, height = IMAGE_DIMS
    return ImageScenario(
        tuple(DiscreteDistribution(p) for p in CLASS_PIXEL_PROBS),
        width, height, IMAGES_PER_CLASS, NOISE_GRID, seed)
