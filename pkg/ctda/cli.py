"""
Command line front-end.

Every command resolves a `RunConfig` from its flags and echoes it, with
the package version and the seed, into the JSON files it writes and the
JSON report it prints. Same flags and seed, same bytes.

Exit codes: 0 on success, 1 on computation errors and 2 on usage, file
or format errors.

"""
import argparse
import json
import os
import sys

import numpy as np
import pandas as pd
from schema import And, Or, SchemaError

import ctda
from ctda import watchers
from ctda.baselines import fit_bayes, fit_ols, predict_series
from ctda.combiners import ALIASES, COMBINERS
from ctda.coupling import build_dtm, local_mi_approx, perturb_distribution
from ctda.coupling import score_table, solve_coupling
from ctda.document import Document, Field
from ctda.equalizer import CRITERIA, MODES, default_step, select_length
from ctda.equalizer import track
from ctda.exceptions import DataFormatError
from ctda.formats import ChannelDocument, DistributionDocument
from ctda.formats import ModelsDocument, coupling_document, models_document
from ctda.formats import to_document
from ctda.fusion import build_fusion, channel_estimates, fuse_series
from ctda.fusion import select_channels
from ctda.images import apply_channel_to_dataset, gen_two_class_images
from ctda.images import load_images_csv, save_images_csv
from ctda.scenarios import CLASS_PIXEL_PROBS, IMAGES_PER_CLASS, IMAGE_DIMS
from ctda.scenarios import SHIPPED_SEED
from ctda.scoring import build_image_scorer, error_vs_noise_curve
from ctda.scoring import learn_pooled_source, score_dataset
from ctda.scoring import score_dataset_per_pixel, separation_error
from ctda.series import format_timestamp, gen_fir_series, load_csv
from ctda.series import parse_timestamp, align, save_csv, split
from ctda.stats import DiscreteDistribution, exact_mutual_information
from ctda.stats import parametric_channel, to_bits

USAGE_ERRORS = (OSError, DataFormatError, SchemaError)
COMPUTATION_ERRORS = (ValueError, ArithmeticError, np.linalg.LinAlgError)


class UsageError(Exception):
    """Inconsistent command line flags."""


class RunConfig(Document):
    """Resolved invocation of a command."""
    command = Field(str, mandatory=True)
    seed = Field(And(int, lambda s: 0 <= s < 2 ** 64), mandatory=True)
    flags = Field({str: object}, default=dict)
    out = Field(Or(None, str), default=None)

    @classmethod
    def from_args(cls, args):
        flags = {key: value for key, value in sorted(vars(args).items())
                 if key not in ('command', 'func', 'seed', 'out',
                                'verbose')}
        return cls(command=args.command, seed=args.seed, flags=flags,
                   out=getattr(args, 'out', None))

    def envelope(self):
        self.validate()
        return {'config': self.as_dict(),
                'version': ctda.__version__,
                'seed': self['seed']}


def _report(config, **data):
    document = Document(config.envelope())
    document.update(data)
    sys.stdout.write(json.dumps(document.as_dict(), indent=2,
                                sort_keys=True) + "\n")


def _write_frame(frame, path):
    frame.to_csv(path, index=False, float_format='%.17g',
                 lineterminator='\n')


def parse_range(text):
    """``START:STOP`` half-open timestamp bounds, either side optional."""
    if text is None:
        return (None, None)
    start, sep, stop = text.partition(':')
    if not sep:
        raise UsageError("Range %r is not START:STOP" % text)
    try:
        return tuple(parse_timestamp(bound)[0] if bound.strip() else None
                     for bound in (start, stop))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_floats(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as exc:
        raise UsageError("Invalid number list %r" % text) from exc


def parse_grid(text):
    """``START:STOP:STEP`` (both ends included) or a comma list."""
    if ':' not in text:
        return parse_floats(text)
    try:
        start, stop, step = (float(v) for v in text.split(':'))
    except ValueError as exc:
        raise UsageError("Invalid grid %r" % text) from exc
    if step <= 0:
        raise UsageError("Grid step must be > 0")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_dims(text):
    try:
        width, height = (int(v) for v in text.lower().split('x'))
    except ValueError as exc:
        raise UsageError("Dimensions must be WxH, got %r" % text) from exc
    return width, height


def _paths(values):
    return [path for value in values for path in value.split(',') if path]


def _load_series(args, paths, names=None):
    names = names or [None] * len(paths)
    return [load_csv(path, args.time_column, args.value_column, name=name)
            for path, name in zip(paths, names)]


def _aligned(args, inputs, target):
    names = [s.name for s in inputs]
    if target.name in names:
        target = target.__class__('__target__', target.timestamps,
                                  target.values, target.dated)
    aligned = align(inputs + [target], policy=args.align)
    return aligned, names, target.name


def _ranges(args):
    """Training and test bounds; training defaults to every earlier row."""
    test = parse_range(args.test_range)
    if args.train_range is None:
        if test[0] is None:
            raise UsageError("--train-range is needed when the test range "
                             "has no start")
        return (None, test[0]), test
    return parse_range(args.train_range), test


def _columns(block, names):
    return np.vstack([block.column(name) for name in names])


def cmd_fit(args, config):
    inputs = _load_series(args, _paths(args.input))
    target = _load_series(args, [args.target])[0]
    aligned, names, target_name = _aligned(args, inputs, target)

    start, stop = parse_range(args.train_range)
    stamps = aligned.timestamps
    rows = np.flatnonzero((start is None or stamps >= start)
                          & (stop is None or stamps < stop))
    if rows.size == 0:
        raise ValueError("Training range %r selects no rows"
                         % args.train_range)
    train = aligned.rows(rows[0], rows[-1] + 1)

    y = train.column(target_name)
    channels = []
    for name in names:
        model = select_length(train.column(name), y, args.max_length,
                              criterion=args.select, mode=args.mode,
                              parsimony=args.parsimony)
        channels.append((name, model))

    models_document(channels, target=target.name, align=args.align,
                    **config.envelope()).dump(args.out)
    _report(config, channels=[
        {'name': name, 'length': model.length,
         'training_mse': model.training_mse,
         'validation_mse': model.validation_mse,
         'degenerate': model.degenerate}
        for name, model in channels])


def _test_rows(test):
    return np.arange(test.warmup, len(test))


def _write_predictions(test, rows, y_true, y_hat, path):
    valid = np.isfinite(y_hat[rows])
    if not np.all(valid):
        watchers.CLI.warning("%d test rows lack history and are skipped",
                             np.count_nonzero(~valid))
    rows = rows[valid]
    if rows.size == 0:
        raise ValueError("No test row can be estimated")
    _write_frame(pd.DataFrame({
        'date': [format_timestamp(t, test.dated)
                 for t in test.timestamps[rows]],
        'y_true': y_true[rows],
        'y_hat': y_hat[rows],
        'abs_err': np.abs(y_true[rows] - y_hat[rows])}), path)
    return float(np.mean((y_true[rows] - y_hat[rows]) ** 2))


def cmd_infer(args, config):
    channels = list(ModelsDocument.load(args.models).to_value())
    paths = _paths(args.inputs)
    if len(paths) != len(channels):
        raise UsageError("%d input files for %d fitted channels"
                         % (len(paths), len(channels)))
    inputs = _load_series(args, paths, [name for name, _ in channels])
    target = _load_series(args, [args.target])[0]
    aligned, names, target_name = _aligned(args, inputs, target)

    history = max(model.length + model.shift for _, model in channels)
    train, test = split(aligned, *_ranges(args), history=history)

    selection = None
    if args.select_top is not None or args.select_threshold is not None:
        selection = select_channels(channels, top_k=args.select_top,
                                    threshold=args.select_threshold)
        channels = selection.channels
    names = [name for name, _ in channels]

    fusion = build_fusion(channels, ALIASES.get(args.fusion, args.fusion),
                          inputs=_columns(train, names),
                          target=train.column(target_name))

    x_test = _columns(test, names)
    y_test = test.column(target_name)
    estimates = None
    if args.lms_step is not None:
        estimates = []
        for (name, model), x in zip(channels, x_test):
            step = args.lms_step or default_step(train.column(name))
            tracked, _ = track(model, x, y_test, test.warmup, step)
            estimates.append(tracked)
    fused, fusion = fuse_series(fusion, x_test, y_test, start=test.warmup,
                                online_window=args.online_window,
                                estimates=estimates)

    test_mse = _write_predictions(test, _test_rows(test), y_test, fused,
                                  args.out)
    if args.fusion_out:
        to_document(fusion, **config.envelope()).dump(args.fusion_out)
    single = channel_estimates(fusion.models, x_test)[:, test.warmup:]
    _report(config,
            channels=names,
            alphas=fusion.alphas.tolist(),
            mode=fusion.mode,
            flags=sorted(fusion.flags),
            forced_best=bool(selection and selection.forced_best),
            channel_test_mse={
                name: float(np.nanmean((row - y_test[test.warmup:]) ** 2))
                for name, row in zip(names, single)},
            test_mse=test_mse)
    sys.stdout.write("test MSE: %.17g\n" % test_mse)


def cmd_baseline(args, config):
    inputs = _load_series(args, _paths(args.inputs))
    target = _load_series(args, [args.target])[0]
    aligned, names, target_name = _aligned(args, inputs, target)
    train, test = split(aligned, parse_range(args.train_range),
                        parse_range(args.test_range), history=args.lag)

    x_train = _columns(train, names)
    y_train = train.column(target_name)
    if args.method == 'ols':
        model = fit_ols(x_train, y_train, args.lag)
    else:
        model = fit_bayes(x_train, y_train, args.lag,
                          prior_variance=args.prior_var,
                          noise_variance=args.noise_var)

    y_test = test.column(target_name)
    y_hat = predict_series(model, _columns(test, names))
    test_mse = _write_predictions(test, _test_rows(test), y_test, y_hat,
                                  args.out)
    if args.model_out:
        to_document(model, inputs=names,
                    **config.envelope()).dump(args.model_out)
    _report(config, method=model.kind, coefficients=model.coefficients,
            intercept=model.intercept, residual_mse=model.residual_mse,
            degenerate=model.degenerate, test_mse=test_mse)
    sys.stdout.write("test MSE: %.17g\n" % test_mse)


def _channel(args):
    if args.channel is not None and args.channel_e is not None:
        raise UsageError("Give only one of --channel and --channel-e")
    if args.channel is not None:
        return ChannelDocument.load(args.channel).to_value()
    if args.channel_e is not None:
        return parametric_channel(args.channel_e)
    raise UsageError("One of --channel and --channel-e is required")


def cmd_couple(args, config):
    channel = _channel(args)
    if args.source is not None:
        p_x = DistributionDocument.load(args.source).to_value()
    else:
        p_x = DiscreteDistribution.uniform(channel.inputs)

    dtm = build_dtm(channel, p_x)
    solution = solve_coupling(dtm)
    table = score_table(solution, dtm)

    extra = {}
    if args.delta is not None:
        psi_x = dtm.embed_input(solution.psi_x)
        conditionals = [perturb_distribution(p_x, psi_x, args.delta, sign)
                        for sign in (1, -1)]
        p_u = DiscreteDistribution.uniform(2)
        local = local_mi_approx(p_u, [psi_x, -psi_x], args.delta)
        exact = exact_mutual_information(p_u, conditionals)
        extra = dict(delta=args.delta,
                     conditionals=[c.probs.tolist() for c in conditionals],
                     local_mi=local, exact_mi=exact,
                     local_mi_bits=float(to_bits(local)),
                     exact_mi_bits=float(to_bits(exact)))

    document = coupling_document(solution, dtm, table,
                                 **extra, **config.envelope())
    document.dump(args.out)
    _report(config, sigma_2=solution.second_singular_value,
            degenerate_subspace=solution.degenerate_subspace,
            score=document['score'], **extra)


def cmd_score(args, config):
    dims = parse_dims(args.dims) if args.dims else None
    dataset = load_images_csv(args.images, args.alphabet, dims)
    channel = _channel(args)

    if args.mode == 'per-pixel':
        if args.clean_images:
            raise UsageError("--clean-images needs --mode pooled")
        scored = score_dataset_per_pixel(dataset, channel,
                                         smoothing=args.smooth)
    else:
        source = None
        if args.clean_images:
            clean = load_images_csv(args.clean_images, args.alphabet, dims)
            source = learn_pooled_source(clean)
        table = build_image_scorer(dataset, channel, source=source,
                                   smoothing=args.smooth)
        scored = score_dataset(dataset, table)

    _write_frame(pd.DataFrame({
        'index': [item.index for item in scored],
        'label': ['' if item.label is None else item.label
                  for item in scored],
        'score': [item.score for item in scored]}), args.out)

    error = None
    if dataset.labels is not None:
        try:
            error = separation_error(scored)
        except ValueError as exc:
            watchers.CLI.warning("No separation error: %s", exc)
    _report(config, mode=args.mode, n_images=len(scored),
            separation_error=error)


def _class_dists(args):
    return tuple(DiscreteDistribution(parse_floats(text))
                 for text in (args.pA, args.pB))


def cmd_sweep(args, config):
    width, height = parse_dims(args.dims)
    points = error_vs_noise_curve(_class_dists(args), width, height, args.n,
                                  parse_grid(args.e_grid), args.seed,
                                  mode=args.mode.replace('-', '_'),
                                  oracle=args.with_oracle)
    frame = pd.DataFrame({
        'e': [p.e for p in points],
        'error_probability': [p.error_probability for p in points],
        'n_images': [p.n_images for p in points],
        'seed': [p.seed for p in points]})
    if args.with_oracle:
        frame['oracle_error'] = [p.oracle_error for p in points]
    _write_frame(frame, args.out)
    _report(config, points=frame.to_dict(orient='records'))


def cmd_gen_fir(args, config):
    coefficients = [parse_floats(text) for text in args.coefficients]
    inputs, target = gen_fir_series(args.seed, args.n, coefficients,
                                    args.process, args.noise_sigma)
    os.makedirs(args.out, exist_ok=True)
    written = []
    for series in inputs + [target]:
        path = os.path.join(args.out, series.name + '.csv')
        save_csv(series, path)
        written.append(path)
    _report(config, files=written)


def cmd_gen_images(args, config):
    width, height = parse_dims(args.dims)
    dataset = gen_two_class_images(args.seed, args.n, width, height,
                                   _class_dists(args))
    if args.channel_e is not None:
        dataset = apply_channel_to_dataset(
            dataset, parametric_channel(args.channel_e),
            args.seed ^ 1)
    if args.unlabelled:
        dataset = dataset.without_labels()
    save_images_csv(dataset, args.out)
    _report(config, n_images=len(dataset), width=width, height=height)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=SHIPPED_SEED,
                        help="run seed (default: %(default)s)")
    common.add_argument('-v', '--verbose', action='store_true',
                        help="enable every watcher")

    series = argparse.ArgumentParser(add_help=False)
    series.add_argument('--time-column', default='date')
    series.add_argument('--value-column', default='value')
    series.add_argument('--align', default='inner',
                        choices=['inner', 'ffill', 'forward_fill'])
    series.add_argument('--train-range', metavar='START:STOP',
                        help="training timestamps (half-open)")

    split_flags = argparse.ArgumentParser(add_help=False)
    split_flags.add_argument('--test-range', metavar='START:STOP',
                             required=True,
                             help="test timestamps (half-open)")

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument('--channel', help="channel JSON file")
    channel.add_argument('--channel-e', type=float,
                         help="noise level of the parametric channel")

    classes = argparse.ArgumentParser(add_help=False)
    classes.add_argument('--pA', default=','.join(
        map(str, CLASS_PIXEL_PROBS[0])), help="class A pixel distribution")
    classes.add_argument('--pB', default=','.join(
        map(str, CLASS_PIXEL_PROBS[1])), help="class B pixel distribution")
    classes.add_argument('--n', type=int, default=IMAGES_PER_CLASS,
                         help="images per class")
    classes.add_argument('--dims', default='%dx%d' % IMAGE_DIMS)

    parser = argparse.ArgumentParser(
        prog='ctda', description="Communication-theoretic data analytics")
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + ctda.__version__)
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    fit = commands.add_parser('fit', parents=[common, series],
                              help="fit one equalizer per input channel")
    fit.add_argument('--input', action='append', required=True,
                     help="input CSV file(s), comma separated")
    fit.add_argument('--target', required=True)
    fit.add_argument('--max-length', type=int, default=16)
    fit.add_argument('--select', choices=CRITERIA, default='validation')
    fit.add_argument('--mode', choices=MODES, default='infer')
    fit.add_argument('--parsimony', action='store_true',
                     help="treat lengths within one standard error (2 AIC "
                          "units) of the best score as ties")
    fit.add_argument('--out', required=True)
    fit.set_defaults(func=cmd_fit)

    infer = commands.add_parser('infer',
                                parents=[common, series, split_flags],
                                help="fuse the equalized channels")
    infer.add_argument('--models', required=True)
    infer.add_argument('--inputs', action='append', required=True)
    infer.add_argument('--target', required=True)
    infer.add_argument('--fusion', default='mrc',
                       choices=sorted(ALIASES) + sorted(COMBINERS))
    infer.add_argument('--select-top', type=int)
    infer.add_argument('--select-threshold', type=float)
    infer.add_argument('--online-window', type=int)
    infer.add_argument('--lms-step', type=float,
                       help="track the test block with LMS updates "
                            "(0 for the default step)")
    infer.add_argument('--out', required=True)
    infer.add_argument('--fusion-out',
                       help="write the final fusion model as JSON")
    infer.set_defaults(func=cmd_infer)

    baseline = commands.add_parser('baseline',
                                   parents=[common, series, split_flags],
                                   help="multivariate regression baselines")
    baseline.add_argument('--method', choices=['ols', 'bayes'],
                          default='ols')
    baseline.add_argument('--lag', type=int, default=0)
    baseline.add_argument('--prior-var', type=float, default=1.0)
    baseline.add_argument('--noise-var', type=float)
    baseline.add_argument('--inputs', action='append', required=True)
    baseline.add_argument('--target', required=True)
    baseline.add_argument('--model-out')
    baseline.add_argument('--out', required=True)
    baseline.set_defaults(func=cmd_baseline)

    couple = commands.add_parser('couple', parents=[common, channel],
                                 help="solve the information coupling")
    couple.add_argument('--source', help="input distribution JSON file")
    couple.add_argument('--delta', type=float)
    couple.add_argument('--out', required=True)
    couple.set_defaults(func=cmd_couple)

    score = commands.add_parser('score', parents=[common, channel],
                                help="score a noisy image corpus")
    score.add_argument('--images', required=True)
    score.add_argument('--alphabet', type=int, default=4)
    score.add_argument('--dims')
    score.add_argument('--mode', choices=['pooled', 'per-pixel'],
                       default='pooled')
    score.add_argument('--smooth', action='store_true')
    score.add_argument('--clean-images',
                       help="estimate the source from clean images")
    score.add_argument('--out', required=True)
    score.set_defaults(func=cmd_score)

    sweep = commands.add_parser('sweep', parents=[common, classes],
                                help="separation error against noise")
    sweep.add_argument('--e-grid', default='0:0.25:0.025')
    sweep.add_argument('--gen', choices=['two-class'], default='two-class')
    sweep.add_argument('--mode', choices=['pooled', 'per-pixel'],
                       default='pooled')
    sweep.add_argument('--with-oracle', action='store_true')
    sweep.add_argument('--out', required=True)
    sweep.set_defaults(func=cmd_sweep)

    gen_fir = commands.add_parser('gen-fir', parents=[common],
                                  help="write synthetic FIR series")
    gen_fir.add_argument('--n', type=int, required=True)
    gen_fir.add_argument('--coefficients', action='append', required=True,
                         help="taps of one channel, comma separated")
    gen_fir.add_argument('--process', default='iid_gaussian',
                         choices=['iid_gaussian', 'iid_binary'])
    gen_fir.add_argument('--noise-sigma', type=float, default=0.0)
    gen_fir.add_argument('--out', required=True, help="output directory")
    gen_fir.set_defaults(func=cmd_gen_fir)

    gen_images = commands.add_parser('gen-images',
                                     parents=[common, classes],
                                     help="write synthetic images")
    gen_images.add_argument('--channel-e', type=float)
    gen_images.add_argument('--unlabelled', action='store_true')
    gen_images.add_argument('--out', required=True)
    gen_images.set_defaults(func=cmd_gen_images)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code

    if args.verbose:
        watchers.watch()

    try:
        config = RunConfig.from_args(args)
        args.func(args, config)
    except (UsageError, ) + USAGE_ERRORS as exc:
        sys.stderr.write("ctda %s: %s\n" % (args.command, exc))
        return 2
    except COMPUTATION_ERRORS as exc:
        sys.stderr.write("ctda %s: %s\n" % (args.command, exc))
        return 1
    return 0
