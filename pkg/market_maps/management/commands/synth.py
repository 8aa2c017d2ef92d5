from market_maps.ingest import panel_series, serialize_csv, synth_market

from ._base import AtlasCommand


class Command(AtlasCommand):
    help = 'Generate a seeded synthetic market, one price CSV per symbol'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--symbols', type=int, help='Number of symbols')
        parser.add_argument('--days', type=int, help='Number of trading days')
        parser.add_argument('--regime-start', type=int, help='Day index where the common factor begins')
        parser.add_argument('--vol', type=float, help='Daily log-return volatility')
        parser.add_argument('--common-weight', type=float, help='Weight of the common factor in the regime')

    def run(self, config):
        out = self.output_dir(config)
        panel = synth_market(
            config['symbols'],
            config['days'],
            regime_start=config['regime_start'],
            seed=config['seed'],
            vol=config['vol'],
            regime_common_weight=config['common_weight'],
        )
        for series in panel_series(panel):
            path = out / f'{series.symbol}.csv'
            with open(path, 'w', newline='') as handle:
                handle.write(serialize_csv(series))
            self.stdout.write(f'  wrote {path}')
        self.stdout.write(
            self.style.SUCCESS(f'Synthesized {panel.n_symbols} symbols x {panel.n_days} days')
        )
