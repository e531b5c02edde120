import functools
import json
import logging
import os
import click
from kitchensinks import exceptions as x
from kitchensinks.cli.colors import yellow, red, green, setup_logging
from kitchensinks.default_kernels import default_kernels, kernel_spec
from kitchensinks.config import TrainConfig, ModelConfig, parse_bottleneck
from kitchensinks import bank as rff
from kitchensinks import data
from kitchensinks.model import init_model, load_model
from kitchensinks.trainer import train as train_model, evaluate_checkpoint
from kitchensinks.trace import CheckpointStore
from kitchensinks.selection import select_checkpoint, selection_result
from kitchensinks.selection import export_trace, load_trace
from kitchensinks.oracle import kernel_approximation_report, DEFAULT_CAP

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

TRACE_FILE = 'trace.csv'
BANK_FILE = 'bank.rffb'
RESOLVED_CONFIG = 'config.resolved'


# -----------------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------------


class SigmaType(click.ParamType):
    """ Bandwidth: 'auto' or a positive number """
    name = 'auto|sigma'

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        if str(value).strip().lower() == 'auto':
            return 'auto'
        try:
            sigma = float(value)
        except ValueError:
            self.fail('{} is neither auto nor a number'.format(value))
        if not sigma > 0:
            self.fail('sigma must be positive, got {}'.format(value))
        return sigma


class IntListType(click.ParamType):
    """ Comma-separated positive integers """
    name = 'D1,D2,...'

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        try:
            values = [int(v) for v in str(value).split(',') if v.strip()]
        except ValueError:
            self.fail('{} is not a list of integers'.format(value))
        if not values or min(values) < 1:
            self.fail('{} must list positive integers'.format(value))
        return values


def read_config_file(path):
    """
    Read config file
    key=value lines; blank lines and # comments are skipped, dashes in keys
    map to underscores as in click parameter names.

    :param path: str
    :return: dict
    """
    values = dict()
    with open(path) as file:
        for number, line in enumerate(file, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            key, sep, value = line.partition('=')
            if not sep or not key.strip():
                msg = '{} line {}: expected key=value'
                raise click.BadParameter(msg.format(path, number))
            values[key.strip().replace('-', '_')] = value.strip()
    return values


def write_resolved_config(directory, params):
    """
    Write resolved config
    Records the settings of a run as a key=value file that --config accepts
    back. Unset options are left out.
    """
    path = os.path.join(directory, RESOLVED_CONFIG)
    with open(path, 'w') as file:
        for key in sorted(params):
            value = params[key]
            if value is None:
                continue
            if isinstance(value, (list, tuple)):
                value = ','.join(str(v) for v in value)
            file.write('{}={}\n'.format(key, value))
    return path


def exits(command):
    """
    Exits
    Maps toolkit exceptions to exit codes: invalid settings are usage
    errors, data and file problems exit with 3, numerical failures with 4.
    """
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except x.ConfigurationException as err:
            raise click.UsageError(str(err), ctx=ctx)
        except (x.DataError, x.OracleCapExceeded, x.DimensionMismatch,
                OSError) as err:
            click.echo(red('Data error: {}'.format(err)), err=True)
            ctx.exit(EXIT_DATA)
        except x.NumericalError as err:
            click.echo(red('Numerical failure: {}'.format(err)), err=True)
            ctx.exit(EXIT_NUMERICAL)
    return wrapper


def threads_option(command):
    return click.option(
        '--threads',
        type=click.IntRange(min=1),
        default=1,
        envvar='RKS_THREADS',
        show_envvar=True,
        help='Worker threads; results do not depend on it'
    )(command)


def resolve_sigma(sigma, dataset, multiplier, seed):
    """ Numeric sigma, running the median heuristic for 'auto' """
    if sigma == 'auto':
        sigma = data.recommend_bandwidth(dataset, multiplier, seed=seed)
    logger.info('sigma=%r', sigma)
    return sigma


def build_bank(kernels, sigma, input_dim, num_features, seed):
    """
    Bank for one or more comma-separated kernel families; members of a
    combined bank get consecutive seeds.
    """
    families = [k.strip() for k in kernels.split(',') if k.strip()]
    if not families:
        raise x.ConfigurationException('At least one kernel is required')
    banks = [
        rff.sample_projection_bank(
            kernel_spec(family, sigma),
            input_dim,
            num_features,
            seed + i
        )
        for i, family in enumerate(families)
    ]
    return banks[0] if len(banks) == 1 else rff.combine_banks(banks)


# -----------------------------------------------------------------------------
# Group setup
# -----------------------------------------------------------------------------


@click.group(help=yellow('Random kitchen sinks acoustic model toolkit'))
@click.option('--config', 'config_file', type=click.Path(dir_okay=False),
              help='key=value file supplying flag values')
@click.option('--verbose', is_flag=True, help='Log debug messages')
@click.pass_context
def cli(ctx, config_file, verbose):
    setup_logging(verbose)
    if config_file:
        if not os.path.isfile(config_file):
            raise click.BadParameter('config file not found',
                                     param_hint='--config')
        values = read_config_file(config_file)
        ctx.default_map = {name: values for name in cli.commands}


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


@cli.command(name='train')
@click.option('--data', 'data_path', required=True, help='Training frames')
@click.option('--heldout', 'heldout_path', default=None,
              help='Held-out frames, split from --data when omitted')
@click.option('--heldout-fraction', type=float, default=0.1,
              show_default=True)
@click.option('--classes', type=int, default=None,
              help='Number of classes for CSV input')
@click.option('--kernel', default='rbf', show_default=True,
              help='Kernel family, or comma-separated families to combine: '
                   + ', '.join(sorted(default_kernels)))
@click.option('--sigma', type=SigmaType(), default='auto', show_default=True)
@click.option('--sigma-mult', type=float, default=1.0, show_default=True,
              help='Multiplier of the median distance for --sigma auto')
@click.option('--features', type=click.IntRange(min=1), default=25000,
              show_default=True, help='Random features per kernel')
@click.option('--bottleneck', default='none', show_default=True,
              help='none, linear:W or sigmoid:W')
@click.option('--epochs', type=click.IntRange(min=0), default=20,
              show_default=True)
@click.option('--minibatch', type=click.IntRange(min=1), default=250,
              show_default=True)
@click.option('--lr', type=float, default=1.0, show_default=True)
@click.option('--momentum', type=float, default=0.9, show_default=True)
@click.option('--anneal', type=float, default=0.5, show_default=True)
@click.option('--l2', type=float, default=0.0, show_default=True)
@click.option('--eval-every', type=click.IntRange(min=1), default=1,
              show_default=True)
@click.option('--cache-features', is_flag=True, default=False)
@click.option('--seed', type=click.IntRange(min=0), default=0,
              show_default=True)
@click.option('--out', required=True, help='Run directory')
@threads_option
@exits
def train(**params):
    """ Train a kernel acoustic model """
    dataset = data.load_dataset(params['data_path'], params['classes'])
    sigma = resolve_sigma(params['sigma'], dataset, params['sigma_mult'],
                          params['seed'])

    if params['heldout_path']:
        train_set = dataset
        heldout = data.load_dataset(params['heldout_path'],
                                    dataset.num_classes)
    else:
        train_set, heldout = data.split_heldout(
            dataset,
            params['heldout_fraction'],
            params['seed']
        )

    kind, width = parse_bottleneck(params['bottleneck'])
    bank = build_bank(params['kernel'], sigma, dataset.dim,
                      params['features'], params['seed'])

    model_config = ModelConfig(
        num_classes=dataset.num_classes,
        feature_dim=bank.num_features,
        bottleneck=kind,
        width=width
    )
    model = init_model(model_config, params['seed'], bank)
    train_config = TrainConfig(
        minibatch_size=params['minibatch'],
        learning_rate=params['lr'],
        momentum=params['momentum'],
        anneal_factor=params['anneal'],
        max_epochs=params['epochs'],
        l2=params['l2'],
        seed=params['seed'],
        eval_every=params['eval_every'],
        workers=params['threads'],
        cache_features=params['cache_features'],
    ).validate()

    out = params['out']
    os.makedirs(out, exist_ok=True)
    resolved = dict(params, sigma=sigma)
    write_resolved_config(out, resolved)
    rff.save_bank(bank, os.path.join(out, BANK_FILE))

    store = CheckpointStore(out)
    trace_path = os.path.join(out, TRACE_FILE)
    try:
        trace = train_model(bank, model, train_set, heldout, train_config,
                            store)
    except x.DivergenceError as err:
        if err.trace is not None:
            export_trace(err.trace, trace_path)
        raise

    export_trace(trace, trace_path)
    click.echo(green('Trained {} epochs, trace in {}'.format(
        params['epochs'],
        trace_path
    )), err=True)


@cli.command(name='select')
@click.option('--run', 'run_dir', required=True, help='Run directory')
@click.option('--criterion', type=click.Choice(['ppx', 'erp']),
              default='erp', show_default=True)
@exits
def select(run_dir, criterion):
    """ Select a checkpoint by perplexity or regularized perplexity """
    trace = load_trace(os.path.join(run_dir, TRACE_FILE))
    entry = select_checkpoint(trace, criterion)
    click.echo(json.dumps(selection_result(entry), sort_keys=True))


@cli.command(name='approx-check')
@click.option('--data', 'data_path', required=True, help='Frames to use')
@click.option('--classes', type=int, default=None)
@click.option('--kernel', type=click.Choice(sorted(default_kernels)),
              default='rbf', show_default=True)
@click.option('--sigma', type=SigmaType(), default='auto', show_default=True)
@click.option('--sigma-mult', type=float, default=1.0, show_default=True)
@click.option('--features', type=IntListType(), default='1000,4000,16000',
              show_default=True)
@click.option('--pairs', type=click.IntRange(min=1), default=1000,
              show_default=True)
@click.option('--seed', type=click.IntRange(min=0), default=0,
              show_default=True)
@click.option('--cap', type=click.IntRange(min=2), default=DEFAULT_CAP,
              show_default=True, help='Maximum frames for the exact oracle')
@click.option('--out', default=None, help='Report file, stdout if omitted')
@exits
def approx_check(data_path, classes, kernel, sigma, sigma_mult, features,
                 pairs, seed, cap, out):
    """ Compare random feature kernels with the exact kernel """
    dataset = data.load_dataset(data_path, classes)
    sigma = resolve_sigma(sigma, dataset, sigma_mult, seed)
    report = kernel_approximation_report(
        kernel_spec(kernel, sigma),
        dataset.features,
        features,
        pairs,
        seed,
        cap
    )

    lines = ['D,rms_error,max_error']
    lines += ['{},{!r},{!r}'.format(*row) for row in report]
    text = '\n'.join(lines) + '\n'
    if out:
        with open(out, 'w') as file:
            file.write(text)
    else:
        click.echo(text, nl=False)


@cli.command(name='eval')
@click.option('--checkpoint', required=True, help='Model checkpoint')
@click.option('--data', 'data_path', required=True, help='Frames to score')
@click.option('--classes', type=int, default=None)
@threads_option
@exits
def evaluate(checkpoint, data_path, classes, threads):
    """ Evaluate a checkpoint on a dataset """
    if not os.path.isfile(checkpoint):
        raise x.DataError('Checkpoint not found: {}'.format(checkpoint))
    model = load_model(checkpoint)
    if model.bank_ref is None:
        raise x.DataError('Checkpoint has no projection bank reference')

    blocks, input_dim = model.bank_ref
    bank = rff.rebuild_bank(blocks, input_dim)
    dataset = data.load_dataset(data_path, classes or model.num_classes)
    record = evaluate_checkpoint(bank, model, dataset, workers=threads)
    click.echo(json.dumps(record.to_dict(), sort_keys=True))


@cli.command(name='synth')
@click.option('--kind', type=click.Choice([k.value for k in data.SynthKind]),
              default='circles', show_default=True)
@click.option('--samples', type=click.IntRange(min=1), default=1000,
              show_default=True)
@click.option('--classes', type=click.IntRange(min=2), default=10,
              show_default=True, help='Mixture classes')
@click.option('--dim', type=click.IntRange(min=1), default=2,
              show_default=True, help='Mixture dimension')
@click.option('--separation', type=float, default=3.0, show_default=True)
@click.option('--std', type=float, default=1.0, show_default=True)
@click.option('--noise', type=float, default=0.1, show_default=True,
              help='Radial noise of circles')
@click.option('--flip', type=float, default=0.3, show_default=True,
              help='Fraction of resampled labels for noisy')
@click.option('--seed', type=click.IntRange(min=0), default=0,
              show_default=True)
@click.option('--out', required=True, help='.frds or .csv file')
@exits
def synth(kind, samples, classes, dim, separation, std, noise, flip, seed,
          out):
    """ Write a synthetic frame dataset """
    params = dict(num_samples=samples)
    if kind == data.SynthKind.CIRCLES.value:
        params.update(noise=noise)
    else:
        params.update(num_classes=classes, dim=dim, separation=separation,
                      std=std)
    if kind == data.SynthKind.NOISY.value:
        params.update(flip=flip)

    dataset = data.synth_dataset(kind, params, seed)
    if out.lower().endswith('.csv'):
        data.save_csv(dataset, out)
    else:
        data.save_dataset(dataset, out)
    click.echo(green('Wrote {} to {}'.format(dataset, out)), err=True)


@cli.command(name='test', context_settings=dict(ignore_unknown_options=True))
@click.argument('nose_arguments', nargs=-1, type=click.UNPROCESSED)
def test(nose_arguments):
    """ Run application tests """
    from nose import run
    params = ['__main__', '-c', 'nose.ini']
    params.extend(nose_arguments)
    run(argv=params)
