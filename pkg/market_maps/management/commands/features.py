from market_maps.ingest import align, read_price_csv
from market_maps.preprocess import (
    Representation, build_features, write_feature_csv, write_feature_tsv,
)

from ._base import CONFIG_ALIASES, AtlasCommand


class Command(AtlasCommand):
    help = 'Build a windowed log-return feature matrix from price CSVs'
    config_aliases = {**CONFIG_ALIASES, 'rep': 'representation'}

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--csv', nargs='+', help='Price CSV files sharing one calendar')
        parser.add_argument('--rep', dest='representation', choices=Representation.values,
                            help='Feature representation')
        parser.add_argument('--scale', type=int, help='Window length in returns')
        parser.add_argument('--segments', type=int, help='Windows per symbol')
        parser.add_argument('--shifted', action='store_true', default=None,
                            help='Drop the first day so every window starts one return later')
        parser.add_argument('--tsv', action='store_true', default=None,
                            help='Also write the labelled tab-separated variant')

    def run(self, config):
        self.require(config, 'csv')
        out = self.output_dir(config)
        panel = align([read_price_csv(path) for path in config['csv']])
        features = build_features(
            panel,
            config['representation'],
            scale=config['scale'],
            segments=config['segments'],
            shifted=bool(config.get('shifted')),
            epsilon=config['epsilon'],
        )
        stem = f"features_{config['representation']}{'_shifted' if config.get('shifted') else ''}"
        self.write_file(out / f'{stem}.csv', write_feature_csv, features)
        if config.get('tsv'):
            self.write_file(out / f'{stem}.tsv', write_feature_tsv, features)
        self.stdout.write(
            self.style.SUCCESS(f'{len(features)} rows x {features.width} features')
        )
