"""Jump gaps under a one-day shift and cluster tightness by period, per representation."""

import csv
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.spatial.distance import pdist

from .elasticmap import default_schedule, fit, init_grid, project_internal_many
from .exceptions import DegenerateLabels, DimensionMismatch, InsufficientData, RowSetMismatch
from .preprocess import Representation, build_features

logger = logging.getLogger(__name__)

DEFAULT_REPRESENTATIONS = (
    Representation.RAW_WINDOW,
    Representation.DFT_AMPLITUDE,
    Representation.CORRELATION,
)

# compare_representations option -> settings.MARKET_MAPS key
CONFIG_KEYS = {
    'scale': 'SCALE',
    'segments': 'SEGMENTS',
    'epsilon': 'EPSILON',
    'rows': 'ROWS',
    'cols': 'COLS',
    'lam': 'LAMBDA',
    'mu': 'MU',
    'multipliers': 'MULTIPLIERS',
    'max_iter': 'MAX_ITER',
    'tol': 'TOL',
    'margin': 'MARGIN',
}

COMPARISON_COLUMNS = ['representation', 'mean_gap', 'median_gap', 'max_gap', 'cluster_score']


@dataclass(frozen=True, eq=False)
class JumpGapReport:
    per_row: tuple
    mean: float
    median: float
    max: float
    per_period_mean: np.ndarray


@dataclass(frozen=True)
class ClusterReport:
    score: float
    per_period: dict


@dataclass(frozen=True)
class ComparisonRow:
    representation: str
    mean_gap: float
    median_gap: float
    max_gap: float
    cluster_score: float


def internal_coordinates(graph, features):
    if features.width != graph.dim:
        raise DimensionMismatch(
            f'{features.width} features per row, map has dimension {graph.dim}', module='analysis',
        )
    return project_internal_many(graph, features.matrix)


def jump_gap(graph, original, shifted):
    """Distance between the internal coordinates of each (stock, period) row in
    the original and shifted features, both projected through ``graph``."""
    keys = original.keys
    position = {key: i for i, key in enumerate(shifted.keys)}
    if len(keys) != len(position) or len(shifted) != len(original) or set(keys) != set(position):
        raise RowSetMismatch('original and shifted features cover different (stock, period) rows')
    order = np.array([position[key] for key in keys], dtype=int)

    before = internal_coordinates(graph, original)
    after = internal_coordinates(graph, shifted)[order]
    gaps = np.linalg.norm(before - after, axis=1)

    periods = original.period_index
    per_period_mean = np.array([gaps[periods == p].mean() for p in np.unique(periods)])
    return JumpGapReport(
        per_row=tuple((stock, period, float(gap)) for (stock, period), gap in zip(keys, gaps)),
        mean=float(gaps.mean()),
        median=float(np.median(gaps)),
        max=float(gaps.max()),
        per_period_mean=per_period_mean,
    )


def cluster_separation(points, labels):
    """Pooled mean distance between points sharing a label, over the mean distance
    between all points. Lower means tighter label clusters."""
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    groups, counts = np.unique(labels, return_counts=True)
    if len(groups) < 2:
        raise DegenerateLabels(f'need at least 2 distinct labels, got {len(groups)}')
    if np.any(counts < 2):
        raise DegenerateLabels(f'label {groups[np.argmin(counts)]!r} has fewer than 2 members')

    overall = float(pdist(points).mean())
    if overall == 0.0:
        raise DegenerateLabels('all points coincide; overall mean distance is 0')

    per_period = {}
    total, pairs = 0.0, 0
    for group in groups:
        distances = pdist(points[labels == group])
        per_period[group.item()] = float(distances.mean())
        total += float(distances.sum())
        pairs += len(distances)
    return ClusterReport(score=(total / pairs) / overall, per_period=per_period)


def _merged_config(config):
    merged = {key: settings.MARKET_MAPS[name] for key, name in CONFIG_KEYS.items()}
    merged.update({key: value for key, value in (config or {}).items() if key in CONFIG_KEYS})
    return merged


def compare_representations(panel, config=None, representations=DEFAULT_REPRESENTATIONS):
    """Fit one map per representation on the original features and score it by
    mean jump gap against the one-day-shifted features and by period clustering."""
    options = _merged_config(config)
    scale, segments = options['scale'], options['segments']
    required = scale * segments + 2
    if panel.n_days < required:
        raise InsufficientData(
            f'comparison needs {required} days ({scale} x {segments} returns plus a shift day), '
            f'panel has {panel.n_days}',
            required=required,
            available=panel.n_days,
            module='analysis',
        )

    schedule = default_schedule(options['lam'], options['mu'], options['multipliers'])
    rows = []
    for representation in representations:
        representation = Representation(representation)
        original = build_features(panel, representation, scale, segments, epsilon=options['epsilon'])
        shifted = build_features(
            panel, representation, scale, segments, shifted=True, epsilon=options['epsilon'],
        )
        graph = init_grid(
            original.matrix, options['rows'], options['cols'],
            margin=options['margin'], lam=options['lam'], mu=options['mu'],
        )
        fitted, _ = fit(graph, original.matrix, schedule, options['max_iter'], options['tol'])

        gaps = jump_gap(fitted, original, shifted)
        clusters = cluster_separation(internal_coordinates(fitted, original), original.period_index)
        row = ComparisonRow(
            representation=representation.label,
            mean_gap=gaps.mean,
            median_gap=gaps.median,
            max_gap=gaps.max,
            cluster_score=clusters.score,
        )
        logger.info(
            f'{row.representation}: mean gap {row.mean_gap:.4f}, '
            f'cluster score {row.cluster_score:.4f}'
        )
        rows.append(row)
    return rows


def write_comparison(rows, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(COMPARISON_COLUMNS)
    for row in rows:
        writer.writerow([
            row.representation,
            format(row.mean_gap, '.17g'),
            format(row.median_gap, '.17g'),
            format(row.max_gap, '.17g'),
            format(row.cluster_score, '.17g'),
        ])
