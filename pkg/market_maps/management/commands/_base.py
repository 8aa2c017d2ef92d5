"""Shared plumbing for the pipeline commands.

Every command accepts ``--config``, ``--seed`` and ``--out``. Options are merged as
command line > config file > ``settings.MARKET_MAPS`` and validated by
``RunConfigSerializer`` before any work starts. Module errors surface as a single
module-qualified ``CommandError`` line (exit status 1).
"""

import logging
from pathlib import Path

from decouple import RepositoryEnv
from django.core.management.base import BaseCommand, CommandError

from market_maps.exceptions import ConfigInvalid, MarketMapsError
from market_maps.ingest import align, read_price_csv, synth_market
from market_maps.serializers import RunConfigSerializer, run_defaults

logger = logging.getLogger(__name__)

# config-file spellings of flags whose option name differs
CONFIG_ALIASES = {
    'cash': 'initial_cash',
    'lambda': 'lam',
}


def read_config_file(path, aliases=CONFIG_ALIASES):
    try:
        repository = RepositoryEnv(path)
    except OSError as err:
        raise ConfigInvalid(f'cannot read config file {path}: {err.strerror}')
    values = {}
    for key, value in repository.data.items():
        name = key.strip().lower().replace('-', '_')
        values[aliases.get(name, name)] = value
    unknown = sorted(set(values) - set(RunConfigSerializer().fields))
    if unknown:
        raise ConfigInvalid(f"unknown config key(s) in {path}: {', '.join(unknown)}")
    return values


def _describe(errors):
    parts = []
    for field, messages in errors.items():
        if isinstance(messages, dict):
            messages = [f'{key}: {value}' for key, value in messages.items()]
        parts.append(f"{field}: {' '.join(str(message) for message in messages)}")
    return '; '.join(parts)


def load_run_config(options, aliases=CONFIG_ALIASES):
    data = run_defaults()
    if options.get('config'):
        data.update(read_config_file(options['config'], aliases))
    fields = RunConfigSerializer().fields
    data.update({
        key: value for key, value in options.items()
        if key in fields and value is not None
    })
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigInvalid(_describe(serializer.errors))
    return serializer.validated_data


class AtlasCommand(BaseCommand):
    out_help = 'Output directory (created if missing; default: current directory)'
    config_aliases = CONFIG_ALIASES

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Flat key=value file that may supply any flag')
        parser.add_argument('--seed', type=int, help='Seed for every random draw')
        parser.add_argument('--out', help=self.out_help)
        self.add_pipeline_arguments(parser)

    def add_pipeline_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            config = load_run_config(options, self.config_aliases)
            self.run(config)
        except MarketMapsError as err:
            raise CommandError(str(err))

    def run(self, config):
        raise NotImplementedError

    # ============ HELPERS ============

    def output_dir(self, config):
        path = Path(config.get('out') or '.')
        path.mkdir(parents=True, exist_ok=True)
        return path

    def write_file(self, path, writer, *args):
        with open(path, 'w', newline='') as handle:
            writer(*args, handle)
        self.stdout.write(f'  wrote {path}')

    def read_input(self, path, reader):
        try:
            with open(path, newline='') as handle:
                return reader(handle)
        except OSError as err:
            raise ConfigInvalid(f'cannot read {path}: {err.strerror}')

    def load_panel(self, config):
        """Aligned panel from --csv files, or a synthetic market from --synth."""
        if config.get('csv'):
            return align([read_price_csv(path) for path in config['csv']])
        if 'synth' in config:
            params = {**config, **config['synth']}
            return synth_market(
                params['symbols'],
                params['days'],
                regime_start=params['regime_start'],
                seed=params['seed'],
                vol=params['vol'],
                regime_common_weight=params['common_weight'],
            )
        raise ConfigInvalid('no price data: give --csv paths or --synth')

    def require(self, config, *names):
        missing = [name for name in names if not config.get(name)]
        if missing:
            raise ConfigInvalid(f"missing required option(s): {', '.join('--' + n for n in missing)}")
