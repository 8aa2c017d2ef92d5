import csv

from market_maps.backtest import portfolio_summary, run_strategy, write_trade_log
from market_maps.ingest import read_price_csv

from ._base import AtlasCommand

SUMMARY_COLUMNS = ['symbol', 'final_value', 'profit_pct', 'trade_count', 'buy_hold_pct']


class Command(AtlasCommand):
    help = 'Replay a trading strategy on price CSVs and write trade logs plus a summary table'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--strategy', type=int, choices=[1, 2, 3], help='Strategy number')
        parser.add_argument('--csv', nargs='+', help='Price CSV files, one symbol each')
        parser.add_argument('--cash', dest='initial_cash', type=float, help='Initial cash per symbol')
        parser.add_argument('--threshold', type=float, help='Strategy 1 move threshold')
        parser.add_argument('--counter-gap', type=int, help='Strategy 2 counter gap')

    def run(self, config):
        self.require(config, 'strategy', 'csv')
        number = config['strategy']
        out = self.output_dir(config)

        results = []
        for path in config['csv']:
            series = read_price_csv(path)
            result = run_strategy(
                number,
                series,
                initial_cash=config['initial_cash'],
                threshold=config['threshold'],
                counter_gap=config['counter_gap'],
            )
            results.append(result)
            self.write_file(out / f'{series.symbol}_strategy{number}_trades.csv', write_trade_log, [result])

        summary = portfolio_summary(results)
        self.write_file(out / f'strategy{number}_summary.csv', self.write_summary, results, summary)

        self.stdout.write(f"{'symbol':<12}{'profit %':>10}{'trades':>8}{'buy&hold %':>12}")
        for result in results:
            self.stdout.write(
                f'{result.symbol:<12}{result.profit_pct:>10.2f}{len(result.trades):>8d}'
                f'{result.buy_hold_pct:>12.2f}'
            )
        self.stdout.write(
            self.style.SUCCESS(
                f"{'PORTFOLIO':<12}{summary.profit_pct:>10.2f}{summary.trade_count:>8d}"
                f'{summary.buy_hold_pct:>12.2f}'
            )
        )

    def write_summary(self, results, summary, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(SUMMARY_COLUMNS)
        for result in results:
            writer.writerow([
                result.symbol,
                format(result.final_value, '.17g'),
                format(result.profit_pct, '.17g'),
                len(result.trades),
                format(result.buy_hold_pct, '.17g'),
            ])
        writer.writerow([
            'PORTFOLIO',
            format(sum(result.final_value for result in results), '.17g'),
            format(summary.profit_pct, '.17g'),
            summary.trade_count,
            format(summary.buy_hold_pct, '.17g'),
        ])
