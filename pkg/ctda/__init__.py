from .stats import DiscreteDistribution, Channel, parametric_channel
from .series import TimeSeries, load_csv, align, split
from .equalizer import EqualizerModel, fit_weights, select_length
from .fusion import FusionModel, build_fusion, fuse
from .baselines import LinearModel, fit_ols, fit_bayes
from .coupling import build_dtm, solve_coupling, score_table
from .scoring import build_image_scorer, score_dataset, separation_error
from .watchers import watch, unwatch

__version__ = '0.1.0'
