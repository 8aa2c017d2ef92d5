import csv

from market_maps.analysis import internal_coordinates
from market_maps.elasticmap import (
    default_schedule, fit, init_grid, write_fit_report, write_map_csv,
)
from market_maps.preprocess import read_feature_csv

from ._base import AtlasCommand


class Command(AtlasCommand):
    help = 'Fit an elastic map to a feature CSV and project every row onto it'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--input', help='Feature CSV written by the features command')
        parser.add_argument('--rows', type=int, help='Grid rows')
        parser.add_argument('--cols', type=int, help='Grid columns')
        parser.add_argument('--lambda', dest='lam', type=float, help='Stretching coefficient')
        parser.add_argument('--mu', type=float, help='Bending coefficient')
        parser.add_argument('--multipliers', help='Softening phase multipliers, e.g. 16,4,1')
        parser.add_argument('--max-iter', type=int, help='Iteration cap per phase')
        parser.add_argument('--tol', type=float, help='Relative energy change that ends a phase')
        parser.add_argument('--margin', type=float, help='Grid extent beyond the data, per side')

    def run(self, config):
        self.require(config, 'input')
        out = self.output_dir(config)
        features = self.read_input(config['input'], read_feature_csv)

        graph = init_grid(
            features.matrix, config['rows'], config['cols'],
            margin=config['margin'], lam=config['lam'], mu=config['mu'],
        )
        schedule = default_schedule(config['lam'], config['mu'], config['multipliers'])
        fitted, report = fit(graph, features.matrix, schedule, config['max_iter'], config['tol'])
        coords = internal_coordinates(fitted, features)

        self.write_file(out / 'map.csv', write_map_csv, fitted)
        self.write_file(out / 'map_fit.csv', write_fit_report, report)
        self.write_file(out / 'map_coords.csv', self.write_coords, features, coords)

        final = report.energy_trace[-1]
        message = (
            f'{fitted.rows}x{fitted.cols} map after {report.iterations} iterations: '
            f'U={final.total:.6g} (approximation {final.approximation:.6g})'
        )
        style = self.style.SUCCESS if report.converged else self.style.WARNING
        self.stdout.write(style(message if report.converged else f'{message}; did not converge'))

    def write_coords(self, features, coords, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['stock_index', 'period_index', 'c', 'r'])
        for (stock, period), (r, c) in zip(features.keys, coords):
            writer.writerow([stock, period, format(float(c), '.17g'), format(float(r), '.17g')])
