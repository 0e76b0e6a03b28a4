"""
Command line tests, driving `main()` with temporary files.
"""
import json
import logging

import numpy as np
import pytest


@pytest.fixture(autouse=True)
def quiet_watchers():
    from ctda import watchers

    yield
    for name in watchers.ALL:
        getattr(watchers, name).setLevel(logging.NOTSET)


def _report(capsys):
    out = capsys.readouterr().out
    return json.loads(out[:out.rindex('}') + 1])


def test_cli_parse_grid():
    from ctda.cli import parse_grid, UsageError

    grid = parse_grid('0:0.25:0.025')
    assert len(grid) == 11
    assert grid[0] == 0.0
    assert grid[-1] == 0.25
    assert parse_grid('0.1,0.2') == [0.1, 0.2]
    with pytest.raises(UsageError):
        parse_grid('0:1:0')
    with pytest.raises(UsageError):
        parse_grid('a:b:c')


def test_cli_parse_range():
    from ctda.cli import parse_range, UsageError

    assert parse_range(None) == (None, None)
    assert parse_range(':400') == (None, 400)
    assert parse_range('10:') == (10, None)
    assert parse_range('1970-01-02:1970-01-05') == (1, 4)
    with pytest.raises(UsageError):
        parse_range('400')


def test_cli_parse_dims():
    from ctda.cli import parse_dims, UsageError

    assert parse_dims('19x19') == (19, 19)
    assert parse_dims('4X6') == (4, 6)
    with pytest.raises(UsageError):
        parse_dims('19')


def test_cli_no_command_is_usage_error(capsys):
    from ctda.cli import main

    assert main([]) == 2


def test_cli_unknown_flag_is_usage_error(capsys):
    from ctda.cli import main

    assert main(['couple', '--channel-e', '0.1', '--out', 'x.json',
                 '--bogus']) == 2


def test_cli_fit_and_infer(tmpdir, capsys, fir_csvs):
    from ctda.cli import main
    from ctda.formats import ModelsDocument
    import pandas as pd

    x1, x2, y = fir_csvs
    models = str(tmpdir.join('models.json'))
    assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                 '--max-length', '4', '--train-range', ':400',
                 '--out', models]) == 0
    report = _report(capsys)
    assert [c['name'] for c in report['channels']] == ['x1', 'x2']
    assert report['config']['command'] == 'fit'
    assert report['seed'] == 2014

    document = ModelsDocument.load(models)
    assert document['config']['flags']['max_length'] == 4
    channels = document.to_value()
    assert [name for name, _ in channels] == ['x1', 'x2']
    assert all(model.length <= 4 for _, model in channels)

    preds = str(tmpdir.join('preds.csv'))
    assert main(['infer', '--models', models, '--inputs', x1 + ',' + x2,
                 '--target', y, '--test-range', '400:',
                 '--out', preds]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1].startswith('test MSE: ')
    report = json.loads(out[:out.rindex('}') + 1])
    assert report['mode'] == 'mrc_inverse_mse'
    assert np.isclose(sum(report['alphas']), 1.0)

    frame = pd.read_csv(preds)
    assert list(frame.columns) == ['date', 'y_true', 'y_hat', 'abs_err']
    assert frame['date'].tolist() == list(range(400, 600))
    assert np.allclose(frame['abs_err'], abs(frame['y_true']
                                             - frame['y_hat']))
    mse = float(np.mean(frame['abs_err'] ** 2))
    assert np.isclose(report['test_mse'], mse)
    assert mse < float(np.var(frame['y_true']))


def test_cli_max_length_zero(tmpdir, capsys, fir_csvs):
    from ctda.cli import main

    x1, x2, y = fir_csvs
    assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                 '--max-length', '0', '--train-range', ':400',
                 '--out', str(tmpdir.join('m.json'))]) == 0
    report = _report(capsys)
    assert [c['length'] for c in report['channels']] == [0, 0]


def test_cli_single_channel_fusion_is_the_equalizer(tmpdir, capsys,
                                                    fir_csvs):
    from ctda.cli import main
    from ctda.equalizer import estimate_series
    from ctda.formats import ModelsDocument
    from ctda.series import load_csv
    import pandas as pd

    x1, _, y = fir_csvs
    models = str(tmpdir.join('models.json'))
    assert main(['fit', '--input', x1, '--target', y, '--max-length', '3',
                 '--train-range', ':400', '--out', models]) == 0
    preds = str(tmpdir.join('preds.csv'))
    assert main(['infer', '--models', models, '--inputs', x1,
                 '--target', y, '--test-range', '400:',
                 '--out', preds]) == 0
    report = _report(capsys)
    assert report['alphas'] == [1.0]

    [(_, model)] = ModelsDocument.load(models).to_value()
    expected = estimate_series(model, load_csv(x1).values)[400:]
    assert np.allclose(pd.read_csv(preds)['y_hat'], expected)


def test_cli_select_top_larger_than_channels(tmpdir, capsys, caplog,
                                             fir_csvs):
    from ctda.cli import main

    x1, x2, y = fir_csvs
    models = str(tmpdir.join('models.json'))
    assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                 '--max-length', '4', '--train-range', ':400',
                 '--out', models]) == 0
    capsys.readouterr()
    with caplog.at_level(logging.WARNING):
        assert main(['infer', '--models', models, '--inputs', x1,
                     '--inputs', x2, '--target', y, '--test-range', '400:',
                     '--select-top', '5', '--fusion', 'egc',
                     '--out', str(tmpdir.join('p.csv'))]) == 0
    report = _report(capsys)
    assert report['channels'] == ['x1', 'x2']
    assert report['alphas'] == [0.5, 0.5]
    assert any(r.levelno == logging.WARNING for r in caplog.records)


def test_cli_infer_input_count_mismatch(tmpdir, capsys, fir_csvs):
    from ctda.cli import main

    x1, x2, y = fir_csvs
    models = str(tmpdir.join('models.json'))
    assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                 '--max-length', '2', '--train-range', ':400',
                 '--out', models]) == 0
    assert main(['infer', '--models', models, '--inputs', x1,
                 '--target', y, '--test-range', '400:',
                 '--out', str(tmpdir.join('p.csv'))]) == 2


def test_cli_missing_file_names_the_path(tmpdir, capsys, fir_csvs):
    from ctda.cli import main

    missing = str(tmpdir.join('nothere.csv'))
    assert main(['fit', '--input', missing, '--target', fir_csvs[2],
                 '--out', str(tmpdir.join('m.json'))]) == 2
    assert missing in capsys.readouterr().err


def _run_twice(capsys, argv, *paths):
    """Output files and stdout of two runs of the same command."""
    from ctda.cli import main

    runs = []
    for _ in range(2):
        assert main(argv) == 0
        contents = []
        for path in paths:
            with open(path, 'rb') as handle:
                contents.append(handle.read())
        runs.append((contents, capsys.readouterr().out))
    return runs


def _fit(tmpdir, capsys, fir_csvs):
    from ctda.cli import main

    x1, x2, y = fir_csvs
    models = str(tmpdir.join('models.json'))
    assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                 '--max-length', '4', '--train-range', ':400',
                 '--out', models]) == 0
    capsys.readouterr()
    return models


def test_cli_fit_is_byte_deterministic(tmpdir, capsys, fir_csvs):
    x1, x2, y = fir_csvs
    out = str(tmpdir.join('models.json'))
    argv = ['fit', '--input', x1, '--input', x2, '--target', y,
            '--max-length', '4', '--train-range', ':400', '--out', out]

    first, second = _run_twice(capsys, argv, out)
    assert first == second


def test_cli_fit_parsimony(tmpdir, capsys, fir_csvs):
    from ctda.cli import main

    x1, x2, y = fir_csvs
    lengths = []
    for flags in ([], ['--parsimony']):
        assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                     '--max-length', '6', '--train-range', ':400',
                     '--out', str(tmpdir.join('m.json'))] + flags) == 0
        lengths.append([c['length'] for c in _report(capsys)['channels']])
    assert all(tied <= best for tied, best in zip(lengths[1], lengths[0]))


@pytest.mark.parametrize('flags', [
    [],
    ['--online-window', '50'],
    ['--lms-step', '0'],
    ['--fusion', 'lmmse', '--select-top', '1'],
])
def test_cli_infer_is_byte_deterministic(tmpdir, capsys, fir_csvs, flags):
    x1, x2, y = fir_csvs
    models = _fit(tmpdir, capsys, fir_csvs)
    preds = str(tmpdir.join('preds.csv'))
    fusion = str(tmpdir.join('fusion.json'))
    argv = ['infer', '--models', models, '--inputs', x1 + ',' + x2,
            '--target', y, '--test-range', '400:', '--out', preds,
            '--fusion-out', fusion] + flags

    first, second = _run_twice(capsys, argv, preds, fusion)
    assert first == second


def test_cli_infer_writes_the_fusion_model(tmpdir, capsys, fir_csvs):
    from ctda.cli import main
    from ctda.formats import FusionDocument

    x1, x2, y = fir_csvs
    models = _fit(tmpdir, capsys, fir_csvs)
    fusion = str(tmpdir.join('fusion.json'))
    assert main(['infer', '--models', models, '--inputs', x1 + ',' + x2,
                 '--target', y, '--test-range', '400:', '--online-window',
                 '50', '--out', str(tmpdir.join('p.csv')),
                 '--fusion-out', fusion]) == 0
    report = _report(capsys)

    document = FusionDocument.load(fusion)
    assert document['config']['command'] == 'infer'
    assert document['seed'] == 2014
    model = document.to_value()
    assert model.mode == report['mode']
    assert [name for name, _ in model.channels] == report['channels']
    assert np.allclose(model.alphas, report['alphas'])


@pytest.mark.parametrize('method', ['ols', 'bayes'])
def test_cli_baseline_is_byte_deterministic(tmpdir, capsys, fir_csvs,
                                            method):
    x1, x2, y = fir_csvs
    preds = str(tmpdir.join('p.csv'))
    model = str(tmpdir.join('model.json'))
    argv = ['baseline', '--method', method, '--lag', '1',
            '--inputs', x1, '--inputs', x2, '--target', y,
            '--train-range', ':400', '--test-range', '400:',
            '--model-out', model, '--out', preds]

    first, second = _run_twice(capsys, argv, preds, model)
    assert first == second


def test_cli_verbose_enables_watchers(tmpdir, capsys, fir_csvs):
    from ctda import watchers
    from ctda.cli import main

    x1, x2, y = fir_csvs
    assert main(['fit', '-v', '--input', x1, '--input', x2, '--target', y,
                 '--max-length', '1', '--train-range', ':400',
                 '--out', str(tmpdir.join('m.json'))]) == 0
    assert watchers.worth('EQUALIZER', 'DEBUG')


@pytest.mark.parametrize('method', ['ols', 'bayes'])
def test_cli_baseline(tmpdir, capsys, fir_csvs, method):
    from ctda.cli import main
    from ctda.formats import LinearModelDocument

    x1, x2, y = fir_csvs
    model_out = str(tmpdir.join('model.json'))
    assert main(['baseline', '--method', method, '--lag', '2',
                 '--inputs', x1, '--inputs', x2, '--target', y,
                 '--train-range', ':400', '--test-range', '400:',
                 '--model-out', model_out,
                 '--out', str(tmpdir.join('p.csv'))]) == 0
    report = _report(capsys)
    assert report['method'] == method
    assert len(report['coefficients']) == 6

    model = LinearModelDocument.load(model_out).to_value()
    assert model.kind == method
    assert model.common_lag == 2
    if method == 'ols':
        # y = 0.5 x1[n] - 0.25 x1[n-1] + x2[n] + 0.5 x2[n-1] + 0.25 x2[n-2]
        assert np.allclose(model.coefficients,
                           [0.5, -0.25, 0, 1.0, 0.5, 0.25], atol=0.05)


def test_cli_couple_binary_symmetric(tmpdir, capsys):
    from ctda.cli import main
    from ctda.formats import CouplingDocument
    from ctda.stats import binary_symmetric_channel

    channel = str(tmpdir.join('channel.json'))
    from ctda.formats import to_document
    to_document(binary_symmetric_channel(0.1)).dump(channel)

    out = str(tmpdir.join('coupling.json'))
    assert main(['couple', '--channel', channel, '--delta', '1e-4',
                 '--out', out]) == 0
    report = _report(capsys)
    assert np.isclose(report['sigma_2'], 0.8)
    assert not report['degenerate_subspace']
    assert np.isclose(report['score']['0'], -report['score']['1'])
    assert report['score']['0'] != 0
    assert np.isclose(report['local_mi'], 5e-5, rtol=1e-3)
    assert np.isclose(report['exact_mi'], report['local_mi'], rtol=1e-3)
    for conditional in report['conditionals']:
        assert np.isclose(sum(conditional), 1.0)

    document = CouplingDocument.load(out)
    assert document['config']['command'] == 'couple'
    assert np.isclose(document['second_singular_value'], 0.8)


def test_cli_couple_is_byte_deterministic(tmpdir, capsys):
    out = str(tmpdir.join('coupling.json'))
    argv = ['couple', '--channel-e', '0.1', '--delta', '1e-3', '--out', out]

    first, second = _run_twice(capsys, argv, out)
    assert first == second


def test_cli_couple_identity_is_degenerate(tmpdir, capsys):
    from ctda.cli import main

    assert main(['couple', '--channel-e', '0', '--out',
                 str(tmpdir.join('c.json'))]) == 0
    report = _report(capsys)
    assert np.isclose(report['sigma_2'], 1.0)
    assert report['degenerate_subspace']


@pytest.mark.parametrize('flags', [[], ['--channel', 'c.json',
                                        '--channel-e', '0.1']])
def test_cli_couple_needs_one_channel(tmpdir, capsys, flags):
    from ctda.cli import main

    assert main(['couple'] + flags
                + ['--out', str(tmpdir.join('c.json'))]) == 2


def test_cli_noise_level_out_of_range_is_computation_error(tmpdir, capsys):
    from ctda.cli import main

    assert main(['sweep', '--e-grid', '0.3', '--n', '4', '--dims', '3x3',
                 '--out', str(tmpdir.join('s.csv'))]) == 1
    assert capsys.readouterr().err.startswith('ctda sweep: ')


def test_cli_gen_images_and_score(tmpdir, capsys):
    from ctda.cli import main
    import pandas as pd

    images = str(tmpdir.join('images.csv'))
    assert main(['gen-images', '--n', '20', '--dims', '5x5',
                 '--channel-e', '0.05', '--out', images]) == 0
    assert _report(capsys)['n_images'] == 40

    scores = str(tmpdir.join('scores.csv'))
    assert main(['score', '--images', images, '--channel-e', '0.05',
                 '--out', scores]) == 0
    report = _report(capsys)
    assert report['mode'] == 'pooled'
    assert report['n_images'] == 40
    assert report['separation_error'] <= 0.05

    frame = pd.read_csv(scores)
    assert list(frame.columns) == ['index', 'label', 'score']
    assert frame['index'].tolist() == list(range(40))


def test_cli_score_per_pixel(tmpdir, capsys):
    from ctda.cli import main

    images = str(tmpdir.join('images.csv'))
    assert main(['gen-images', '--n', '20', '--dims', '3x3',
                 '--out', images]) == 0
    capsys.readouterr()
    assert main(['score', '--images', images, '--channel-e', '0',
                 '--mode', 'per-pixel', '--smooth',
                 '--out', str(tmpdir.join('s.csv'))]) == 0
    report = _report(capsys)
    assert report['mode'] == 'per-pixel'
    assert report['n_images'] == 40

    assert main(['score', '--images', images, '--channel-e', '0',
                 '--mode', 'per-pixel', '--clean-images', images,
                 '--out', str(tmpdir.join('s.csv'))]) == 2


@pytest.mark.parametrize('flags', [
    [],
    ['--mode', 'per-pixel', '--smooth'],
])
def test_cli_score_is_byte_deterministic(tmpdir, capsys, flags):
    images = str(tmpdir.join('images.csv'))
    first, second = _run_twice(
        capsys, ['gen-images', '--n', '10', '--dims', '3x3',
                 '--channel-e', '0.05', '--out', images], images)
    assert first == second

    scores = str(tmpdir.join('scores.csv'))
    first, second = _run_twice(
        capsys, ['score', '--images', images, '--channel-e', '0.05',
                 '--out', scores] + flags, scores)
    assert first == second


def test_cli_score_unlabelled(tmpdir, capsys):
    from ctda.cli import main

    images = str(tmpdir.join('images.csv'))
    assert main(['gen-images', '--n', '10', '--dims', '4x4', '--unlabelled',
                 '--out', images]) == 0
    capsys.readouterr()
    assert main(['score', '--images', images, '--channel-e', '0',
                 '--out', str(tmpdir.join('s.csv'))]) == 0
    assert _report(capsys)['separation_error'] is None


def test_cli_sweep(tmpdir, capsys):
    from ctda.cli import main
    import pandas as pd

    out = str(tmpdir.join('sweep.csv'))
    argv = ['sweep', '--e-grid', '0,0.05', '--n', '20', '--dims', '6x6',
            '--with-oracle', '--out', out]

    runs = []
    for _ in range(2):
        assert main(argv) == 0
        with open(out, 'rb') as handle:
            runs.append((handle.read(), capsys.readouterr().out))
    assert runs[0] == runs[1]

    frame = pd.read_csv(out)
    assert list(frame.columns) == ['e', 'error_probability', 'n_images',
                                   'seed', 'oracle_error']
    assert frame['e'].tolist() == [0.0, 0.05]
    assert frame['n_images'].tolist() == [40, 40]
    assert frame['seed'].tolist() == [2014, 2014 ^ 1]


def test_cli_gen_fir(tmpdir, capsys):
    from ctda.cli import main
    from ctda.series import load_csv

    out = str(tmpdir.join('fir'))
    assert main(['gen-fir', '--n', '50', '--coefficients', '1.0',
                 '--coefficients', '0.5,0.5', '--out', out]) == 0
    files = _report(capsys)['files']
    assert [f.rsplit('/', 1)[-1] for f in files] == ['x1.csv', 'x2.csv',
                                                     'y.csv']

    x1, x2, y = (load_csv(f) for f in files)
    expected = x1.values + 0.5 * x2.values
    expected[1:] += 0.5 * x2.values[:-1]
    assert np.allclose(y.values, expected)


def test_cli_gen_fir_is_byte_deterministic(tmpdir, capsys):
    out = tmpdir.join('fir')
    argv = ['gen-fir', '--n', '40', '--coefficients', '0.5,-0.25',
            '--noise-sigma', '0.1', '--out', str(out)]

    first, second = _run_twice(capsys, argv,
                               str(out.join('x1.csv')), str(out.join('y.csv')))
    assert first == second


def test_cli_two_channel_scenario(tmpdir, capsys):
    from ctda.cli import main
    from ctda.scenarios import FIR_COEFFICIENTS, NOISE_SIGMA
    from ctda.scenarios import TEST_ROWS, TRAIN_ROWS, two_channel_scenario
    from ctda.series import load_csv

    out = tmpdir.join('scenario')
    argv = ['gen-fir', '--n', str(TRAIN_ROWS + TEST_ROWS),
            '--noise-sigma', repr(NOISE_SIGMA), '--out', str(out)]
    for coefficients in FIR_COEFFICIENTS:
        argv += ['--coefficients', ','.join(map(repr, coefficients))]
    assert main(argv) == 0
    x1, x2, y = _report(capsys)['files']
    assert np.array_equal(load_csv(y).values[:TRAIN_ROWS],
                          two_channel_scenario().train.column('y'))

    models = str(out.join('models.json'))
    assert main(['fit', '--input', x1, '--input', x2, '--target', y,
                 '--train-range', ':%d' % TRAIN_ROWS, '--out', models]) == 0
    capsys.readouterr()
    assert main(['infer', '--models', models, '--inputs', x1 + ',' + x2,
                 '--target', y, '--test-range', '%d:' % TRAIN_ROWS,
                 '--out', str(out.join('preds.csv'))]) == 0
    report = _report(capsys)

    assert report['channels'] == ['x1', 'x2']
    assert report['test_mse'] < max(report['channel_test_mse'].values())
    assert report['test_mse'] < min(report['channel_test_mse'].values())
