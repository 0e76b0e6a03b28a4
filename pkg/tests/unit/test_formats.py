import json

import numpy as np
import pytest
from schema import SchemaError


def _reloaded(document):
    return type(document).loads(document.dumps())


def test_distribution_document():
    from ctda.formats import DistributionDocument, to_document
    from ctda.stats import DiscreteDistribution

    p = DiscreteDistribution([0.1, 0.2, 0.7])
    document = _reloaded(to_document(p))
    assert isinstance(document, DistributionDocument)
    assert document.to_value().probs.tolist() == p.probs.tolist()


def test_distribution_document_rejects_invalid_probabilities():
    from ctda.formats import DistributionDocument

    with pytest.raises(ValueError):
        DistributionDocument(probs=[0.5, 0.6]).to_value()
    with pytest.raises(SchemaError):
        DistributionDocument(probs="0.5,0.5").to_value()


def test_channel_document():
    from ctda.formats import to_document
    from ctda.stats import parametric_channel

    channel = parametric_channel(0.1)
    document = _reloaded(to_document(channel))
    assert (document['outputs'], document['inputs']) == (4, 4)
    assert np.array_equal(document.to_value().matrix, channel.matrix)


def test_channel_document_shape_must_match():
    from ctda.formats import ChannelDocument

    document = ChannelDocument(outputs=3, inputs=2,
                               matrix=[[0.9, 0.1], [0.1, 0.9]])
    with pytest.raises(ValueError):
        document.to_value()


def test_equalizer_document():
    from ctda.equalizer import EqualizerModel
    from ctda.formats import to_document

    model = EqualizerModel(1, [0.5, -0.25], mean_x=0.1, mean_y=2.0,
                           training_mse=0.01, mode='predict')
    restored = _reloaded(to_document(model)).to_value()

    assert restored.weights.tolist() == [0.5, -0.25]
    assert (restored.mean_x, restored.mean_y) == (0.1, 2.0)
    assert restored.validation_mse is None
    assert restored.mode == 'predict'


def test_equalizer_document_defaults():
    from ctda.formats import EqualizerDocument

    model = EqualizerDocument(length=0, weights=[1],
                              training_mse=0).to_value()
    assert model.mode == 'infer'
    assert not model.degenerate


@pytest.mark.parametrize('data', [
    {'length': -1, 'weights': [1.0], 'training_mse': 0.0},
    {'length': 0, 'weights': [1.0], 'training_mse': -1.0},
    {'length': 0, 'weights': [1.0], 'training_mse': 0.0, 'mode': 'x'},
    {'length': 0, 'weights': ['a'], 'training_mse': 0.0},
    {'weights': [1.0], 'training_mse': 0.0},
])
def test_equalizer_document_rejects_invalid_data(data):
    from ctda.formats import EqualizerDocument

    with pytest.raises(SchemaError):
        EqualizerDocument(data).validate()


def test_models_document():
    from ctda.equalizer import EqualizerModel
    from ctda.formats import ModelsDocument, models_document

    channels = [('x1', EqualizerModel(0, [1.0], training_mse=0.2)),
                ('x2', EqualizerModel(2, [0.1, 0.2, 0.3]))]
    document = models_document(channels, target='rate', seed=7,
                               version='0.1.0', config={'command': 'fit'})
    restored = ModelsDocument.loads(document.dumps())

    assert restored['target'] == 'rate'
    assert restored['seed'] == 7
    names = [name for name, _ in restored.to_value()]
    assert names == ['x1', 'x2']
    assert restored.to_value()[1][1].length == 2


def test_fusion_document():
    from ctda.equalizer import EqualizerModel
    from ctda.formats import to_document
    from ctda.fusion import FusionModel

    fusion = FusionModel([('a', EqualizerModel(0, [1.0])),
                          ('b', EqualizerModel(0, [2.0]))],
                         [0.75, 0.25], flags={'window_truncated'})
    restored = _reloaded(to_document(fusion)).to_value()

    assert restored.names == ('a', 'b')
    assert restored.alphas.tolist() == [0.75, 0.25]
    assert restored.flags == frozenset(['window_truncated'])


def test_linear_model_document():
    from ctda.baselines import LinearModel
    from ctda.formats import to_document

    model = LinearModel([2.0, 3.0], 1.0, 0, 0.5, kind='bayes')
    document = _reloaded(to_document(model, inputs=['x1', 'x2']))

    assert document['type'] == 'bayes'
    assert document['inputs'] == ['x1', 'x2']
    restored = document.to_value()
    assert restored.coefficients.tolist() == [2.0, 3.0]
    assert restored.kind == 'bayes'


def test_coupling_document_scatters_to_full_alphabets():
    from ctda.coupling import build_dtm, score_table, solve_coupling
    from ctda.formats import CouplingDocument, coupling_document
    from ctda.stats import DiscreteDistribution, identity_channel

    dtm = build_dtm(identity_channel(3), DiscreteDistribution([.5, .5, 0]))
    solution = solve_coupling(dtm)
    document = coupling_document(solution, dtm, score_table(solution, dtm))
    data = json.loads(document.dumps())

    assert len(data['psi_x']) == len(data['psi_y']) == 3
    assert data['psi_x'][2] == 0.0
    assert sorted(data['score']) == ['0', '1', '2']
    assert data['dropped_inputs'] == data['dropped_outputs'] == [2]
    assert data['degenerate_subspace'] is True

    restored = CouplingDocument.loads(document.dumps()).to_value()
    assert np.allclose(restored.psi_x, solution.psi_x)
    assert restored.second_singular_value == pytest.approx(1.0)


def test_to_document_unknown_type():
    from ctda.formats import to_document

    with pytest.raises(TypeError):
        to_document(object())
