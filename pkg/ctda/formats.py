"""
JSON documents of the domain values.

`to_document` turns a domain value into its `Document`; every document
class turns itself back into a value with `to_value()`.

"""
from functools import singledispatch

from schema import And, Or

from ctda.baselines import KINDS, LinearModel
from ctda.combiners import COMBINERS
from ctda.coupling import CouplingSolution
from ctda.document import Document, Field
from ctda.equalizer import MODES, EqualizerModel
from ctda.fusion import FusionModel
from ctda.stats import Channel, DiscreteDistribution

Number = Or(int, float)
Count = And(int, lambda n: n >= 0)
NonNegative = And(Number, lambda v: v >= 0)


class DistributionDocument(Document):
    probs = Field([Number], mandatory=True)

    def to_value(self):
        self.validate()
        return DiscreteDistribution(self['probs'])


class ChannelDocument(Document):
    outputs = Field(Count, mandatory=True)
    inputs = Field(Count, mandatory=True)
    matrix = Field([[Number]], mandatory=True)

    def to_value(self):
        self.validate()
        channel = Channel(self['matrix'])
        if (channel.outputs, channel.inputs) != (self['outputs'],
                                                 self['inputs']):
            raise ValueError("Channel matrix is %dx%d, declared %dx%d"
                             % (channel.outputs, channel.inputs,
                                self['outputs'], self['inputs']))
        return channel


class EqualizerDocument(Document):
    length = Field(Count, mandatory=True)
    weights = Field([Number], mandatory=True)
    mean_x = Field(Number, default=0.0)
    mean_y = Field(Number, default=0.0)
    training_mse = Field(NonNegative, mandatory=True)
    validation_mse = Field(Or(None, NonNegative), default=None)
    mode = Field(Or(*MODES), default='infer')
    degenerate = Field(bool, default=False)

    def to_value(self):
        self.validate()
        return EqualizerModel(length=self['length'],
                              weights=self['weights'],
                              mean_x=self['mean_x'],
                              mean_y=self['mean_y'],
                              training_mse=self['training_mse'],
                              validation_mse=self['validation_mse'],
                              mode=self['mode'],
                              degenerate=self['degenerate'])


NamedModel = {'name': str, 'model': dict}


def _channels(items):
    return tuple((item['name'], EqualizerDocument(item['model']).to_value())
                 for item in items)


class ModelsDocument(Document):
    """Equalizers fitted by ``ctda fit``, one per input channel."""
    channels = Field([NamedModel], mandatory=True)
    target = Field(str, default='y')
    align = Field(str, default='inner')

    def to_value(self):
        self.validate()
        return _channels(self['channels'])


class FusionDocument(Document):
    mode = Field(Or(*COMBINERS), mandatory=True)
    alphas = Field([Number], mandatory=True)
    channels = Field([NamedModel], mandatory=True)
    flags = Field([str], default=list)

    def to_value(self):
        self.validate()
        return FusionModel(_channels(self['channels']), self['alphas'],
                           self['mode'], flags=self['flags'])


class LinearModelDocument(Document):
    type = Field(Or(*KINDS), mandatory=True)
    coefficients = Field([Number], mandatory=True)
    intercept = Field(Number, mandatory=True)
    common_lag = Field(Count, default=0)
    residual_mse = Field(NonNegative, mandatory=True)
    degenerate = Field(bool, default=False)
    inputs = Field([str], default=list)

    def to_value(self):
        self.validate()
        return LinearModel(coefficients=self['coefficients'],
                           intercept=self['intercept'],
                           common_lag=self['common_lag'],
                           residual_mse=self['residual_mse'],
                           kind=self['type'],
                           degenerate=self['degenerate'])


class CouplingDocument(Document):
    sigma = Field([Number], mandatory=True)
    second_singular_value = Field(Number)
    psi_x = Field([Number], mandatory=True)
    psi_y = Field([Number], mandatory=True)
    score = Field({str: Number}, mandatory=True)
    dropped_inputs = Field([Count], default=list)
    dropped_outputs = Field([Count], default=list)
    degenerate_subspace = Field(bool, default=False)

    # Present when a perturbation size was requested.
    delta = Field(NonNegative)
    conditionals = Field([[Number]])
    local_mi = Field(Number)
    exact_mi = Field(Number)
    local_mi_bits = Field(Number)
    exact_mi_bits = Field(Number)

    def to_value(self):
        """The singular system (restricted to the symbols with mass)."""
        self.validate()
        sigma = self['sigma']
        return CouplingSolution(
            singular_values=sigma,
            psi_x=[self['psi_x'][i] for i in range(len(self['psi_x']))
                   if i not in self['dropped_inputs']],
            psi_y=[self['psi_y'][i] for i in range(len(self['psi_y']))
                   if i not in self['dropped_outputs']],
            second_singular_value=self.get('second_singular_value', 0.0),
            degenerate_subspace=self['degenerate_subspace'])


@singledispatch
def to_document(value, **extra):
    raise TypeError("No document for %s" % type(value).__name__)


@to_document.register(DiscreteDistribution)
def _(value, **extra):
    return DistributionDocument(probs=value.probs.tolist(), **extra)


@to_document.register(Channel)
def _(value, **extra):
    return ChannelDocument(outputs=value.outputs, inputs=value.inputs,
                           matrix=value.matrix.tolist(), **extra)


@to_document.register(EqualizerModel)
def _(value, **extra):
    return EqualizerDocument(length=value.length,
                             weights=value.weights.tolist(),
                             mean_x=value.mean_x,
                             mean_y=value.mean_y,
                             training_mse=value.training_mse,
                             validation_mse=value.validation_mse,
                             mode=value.mode,
                             degenerate=value.degenerate,
                             **extra)


def _named(channels):
    return [{'name': name, 'model': dict(to_document(model))}
            for name, model in channels]


@to_document.register(FusionModel)
def _(value, **extra):
    return FusionDocument(mode=value.mode,
                          alphas=value.alphas.tolist(),
                          channels=_named(value.channels),
                          flags=sorted(value.flags),
                          **extra)


@to_document.register(LinearModel)
def _(value, **extra):
    return LinearModelDocument(type=value.kind,
                               coefficients=value.coefficients.tolist(),
                               intercept=value.intercept,
                               common_lag=value.common_lag,
                               residual_mse=value.residual_mse,
                               degenerate=value.degenerate,
                               **extra)


def models_document(channels, target='y', align='inner', **extra):
    return ModelsDocument(channels=_named(channels), target=target,
                          align=align, **extra)


def coupling_document(solution, dtm, table, **extra):
    """Document of a solution, vectors scattered to the full alphabets."""
    psi_y = [0.0] * dtm.output_size
    for symbol, value in zip(dtm.outputs, solution.psi_y.tolist()):
        psi_y[symbol] = value
    return CouplingDocument(
        sigma=solution.singular_values.tolist(),
        second_singular_value=solution.second_singular_value,
        psi_x=dtm.embed_input(solution.psi_x).tolist(),
        psi_y=psi_y,
        score={str(k): v for k, v in sorted(table.scores.items())},
        dropped_inputs=list(dtm.dropped_inputs),
        dropped_outputs=list(dtm.dropped_outputs),
        degenerate_subspace=solution.degenerate_subspace,
        **extra)
