import csv

import numpy as np

from market_maps.pca import (
    explained_variance_ratio, pca_fit, pca_project, reconstruction_error, write_model_csv,
)
from market_maps.preprocess import read_feature_csv

from ._base import AtlasCommand

RECOVERY_KS = (3, 5, 10)


def _fmt(value):
    return format(float(value), '.17g')


class Command(AtlasCommand):
    help = 'Linear PCA of a feature CSV: spectrum, scores and rank-k recovery errors'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--input', help='Feature CSV written by the features command')
        parser.add_argument('--k', type=int, help='Number of components to score')

    def run(self, config):
        self.require(config, 'input')
        out = self.output_dir(config)
        features = self.read_input(config['input'], read_feature_csv)
        data = features.matrix
        model = pca_fit(data)
        k = config['k']
        scores = pca_project(model, data, k)

        self.write_file(out / 'pca_model.csv', write_model_csv, model)
        self.write_file(out / 'pca_spectrum.csv', self.write_spectrum, model)
        self.write_file(out / 'pca_scores.csv', self.write_scores, features, scores)
        ks = sorted({*RECOVERY_KS, model.dim, k} & set(range(1, model.dim + 1)))
        self.write_file(out / 'pca_recovery.csv', self.write_recovery, model, data, ks)

        ratios = explained_variance_ratio(model)
        self.stdout.write(
            self.style.SUCCESS(
                f'PCA on {data.shape[0]}x{data.shape[1]}: first {k} components explain '
                f'{100.0 * ratios[:k].sum():.2f}% of the variance'
            )
        )

    def write_spectrum(self, model, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['component', 'eigenvalue', 'ratio', 'cumulative_ratio'])
        ratios = explained_variance_ratio(model)
        for index, (value, ratio, cumulative) in enumerate(
                zip(model.eigenvalues, ratios, np.cumsum(ratios)), start=1):
            writer.writerow([index, _fmt(value), _fmt(ratio), _fmt(cumulative)])

    def write_scores(self, features, scores, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['stock_index', 'period_index'] + [f'pc{j + 1}' for j in range(scores.shape[1])])
        for (stock, period), row in zip(features.keys, scores):
            writer.writerow([stock, period] + [_fmt(value) for value in row])

    def write_recovery(self, model, data, ks, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['k', 'frobenius_error', 'relative_error'])
        total = float(np.linalg.norm(data - model.mean))
        for k in ks:
            error = reconstruction_error(model, data, k)
            writer.writerow([k, _fmt(error), _fmt(error / total if total > 0 else 0.0)])
