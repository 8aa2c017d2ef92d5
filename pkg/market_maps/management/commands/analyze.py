from market_maps.analysis import DEFAULT_REPRESENTATIONS, compare_representations, write_comparison
from market_maps.preprocess import Representation

from ._base import AtlasCommand


class Command(AtlasCommand):
    help = 'Compare feature representations by jump gap and period clustering'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--csv', nargs='+', help='Price CSV files sharing one calendar')
        parser.add_argument('--synth', nargs='?', const='',
                            help='Synthetic market, e.g. symbols=10,days=502,regime_start=300')
        parser.add_argument('--rep', action='append', choices=Representation.values,
                            help='Representation to compare (repeatable)')
        parser.add_argument('--scale', type=int, help='Window length in returns')
        parser.add_argument('--segments', type=int, help='Windows per symbol')
        parser.add_argument('--rows', type=int, help='Grid rows')
        parser.add_argument('--cols', type=int, help='Grid columns')
        parser.add_argument('--lambda', dest='lam', type=float, help='Stretching coefficient')
        parser.add_argument('--mu', type=float, help='Bending coefficient')
        parser.add_argument('--multipliers', help='Softening phase multipliers, e.g. 16,4,1')
        parser.add_argument('--max-iter', type=int, help='Iteration cap per phase')
        parser.add_argument('--tol', type=float, help='Relative energy change that ends a phase')

    def run(self, config):
        out = self.output_dir(config)
        panel = self.load_panel(config)
        representations = config.get('rep') or DEFAULT_REPRESENTATIONS
        rows = compare_representations(panel, config, representations)
        self.write_file(out / 'comparison.csv', write_comparison, rows)

        self.stdout.write(f"{'representation':<16}{'mean gap':>12}{'median gap':>12}{'max gap':>12}{'cluster':>10}")
        for row in rows:
            self.stdout.write(
                f'{row.representation:<16}{row.mean_gap:>12.4f}{row.median_gap:>12.4f}'
                f'{row.max_gap:>12.4f}{row.cluster_score:>10.4f}'
            )
        self.stdout.write(self.style.SUCCESS(f'Compared {len(rows)} representations'))
