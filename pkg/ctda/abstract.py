import abc

import numpy as np

from ctda import watchers


class Combiner(metaclass=abc.ABCMeta):
    """
    Information combining rule of several equalized channels.

    Subclasses compute the combining weights ``alpha_m`` from the fitted
    channels and, when they need them, from the channel estimates and
    the target over a training window.
    """

    #: Mode name stored in fusion documents.
    name = None

    #: Whether the weights are a convex combination.
    convex = False

    @abc.abstractmethod
    def _weights(self, models, predictions, target):  # pragma: no cover
        """Return ``(alphas, degenerate)``."""
        pass

    def weights(self, models, predictions=None, target=None):
        models = list(models)
        if not models:
            raise ValueError("At least one channel is needed")

        alphas, degenerate = self._weights(models, predictions, target)
        alphas = np.asarray(alphas, dtype=float)

        if watchers.worth('FUSION', 'INFO'):  # pragma: no cover
            watchers.FUSION.info(
                "%s weights: %s%s", self.name,
                ", ".join("%.6g" % a for a in alphas),
                " [DEGENERATE]" if degenerate else "")

        return alphas, degenerate
