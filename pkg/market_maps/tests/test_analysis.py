import io
import logging

import numpy as np
from django.test import SimpleTestCase

from market_maps.analysis import (
    cluster_separation, compare_representations, internal_coordinates, jump_gap,
    write_comparison,
)
from market_maps.elasticmap import ElasticGraph
from market_maps.exceptions import (
    DegenerateLabels, DimensionMismatch, InsufficientData, RowSetMismatch,
)
from market_maps.ingest import Panel, synth_market
from market_maps.preprocess import FeatureMatrix

SMALL_CONFIG = {'scale': 5, 'segments': 6, 'rows': 3, 'cols': 3}


def rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def unit_grid(rows=3, cols=3):
    r, c = np.divmod(np.arange(rows * cols), cols)
    return ElasticGraph(rows=rows, cols=cols, nodes=np.column_stack([c, r]).astype(float))


def features(points, stocks, periods):
    return FeatureMatrix(
        representation='raw',
        stock_index=np.array(stocks),
        period_index=np.array(periods),
        features=np.array(points, dtype=float),
    )


class InternalCoordinatesTest(SimpleTestCase):
    """Test feature rows projected onto the grid"""

    def test_rows_at_nodes(self):
        """Test rows sitting on nodes map to those nodes' (r, c)"""
        rows = features([[1, 2], [0, 0]], [1, 2], [1, 1])
        np.testing.assert_allclose(internal_coordinates(unit_grid(), rows), [[2.0, 1.0], [0.0, 0.0]])


class JumpGapTest(SimpleTestCase):
    """Test displacement of internal coordinates under a shift"""

    def setUp(self):
        self.graph = unit_grid()
        self.original = features([[0, 0], [1, 1], [2, 2]], [1, 1, 2], [1, 2, 1])

    def test_identical_features_have_no_gap(self):
        """Test unchanged rows do not move"""
        report = jump_gap(self.graph, self.original, self.original)
        self.assertEqual(report.mean, 0.0)
        self.assertEqual(report.max, 0.0)

    def test_single_displaced_row(self):
        """Test one row moved by one lattice step, with shifted rows reordered"""
        shifted = features([[2, 2], [1, 0], [1, 1]], [2, 1, 1], [1, 1, 2])
        report = jump_gap(self.graph, self.original, shifted)
        self.assertEqual([gap for _, _, gap in report.per_row], [1.0, 0.0, 0.0])
        self.assertAlmostEqual(report.mean, 1 / 3)
        self.assertEqual(report.median, 0.0)
        self.assertEqual(report.max, 1.0)
        np.testing.assert_allclose(report.per_period_mean, [0.5, 0.0])

    def test_gap_is_symmetric(self):
        """Test swapping original and shifted leaves every gap unchanged"""
        generator = rng(51)
        keys = ([1, 1, 2, 2, 3, 3], [1, 2, 1, 2, 1, 2])
        first = features(generator.uniform(0, 2, (6, 2)), *keys)
        second = features(generator.uniform(0, 2, (6, 2)), *keys)
        forward = jump_gap(self.graph, first, second)
        backward = jump_gap(self.graph, second, first)
        self.assertEqual(forward.per_row, backward.per_row)

    def test_row_set_mismatch(self):
        """Test differing (stock, period) keys are rejected"""
        other = features([[0, 0], [1, 1], [2, 2]], [1, 1, 3], [1, 2, 1])
        with self.assertRaises(RowSetMismatch):
            jump_gap(self.graph, self.original, other)

    def test_width_mismatch(self):
        """Test features must match the map dimension"""
        wide = features([[0, 0, 0], [1, 1, 1], [2, 2, 2]], [1, 1, 2], [1, 2, 1])
        with self.assertRaises(DimensionMismatch) as caught:
            jump_gap(self.graph, wide, wide)
        self.assertTrue(str(caught.exception).startswith('analysis: '))


class ClusterSeparationTest(SimpleTestCase):
    """Test the within-label over overall distance ratio"""

    def test_separated_clusters_score_low(self):
        """Test tight, distant clusters score near 0"""
        generator = rng(52)
        centres = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
        labels = np.repeat([1, 2, 3], 20)
        points = centres[labels - 1] + 0.1 * generator.standard_normal((60, 2))
        report = cluster_separation(points, labels)
        self.assertLess(report.score, 0.01)
        self.assertEqual(sorted(report.per_period), [1, 2, 3])

    def test_random_labels_score_near_one(self):
        """Test labels unrelated to position give a ratio close to 1"""
        generator = rng(53)
        report = cluster_separation(generator.standard_normal((300, 2)), generator.integers(1, 6, 300))
        self.assertGreater(report.score, 0.8)
        self.assertLess(report.score, 1.2)

    def test_invariant_under_isometry(self):
        """Test rotation plus translation leaves the score unchanged"""
        generator = rng(54)
        points = generator.standard_normal((40, 2))
        labels = np.tile([1, 2, 3, 4], 10)
        angle = 0.7
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = points @ rotation.T + np.array([3.0, -8.0])
        self.assertAlmostEqual(
            cluster_separation(points, labels).score, cluster_separation(moved, labels).score,
            places=12,
        )

    def test_degenerate_labels(self):
        """Test one label, singleton labels and coincident points"""
        with self.assertRaises(DegenerateLabels):
            cluster_separation(np.zeros((4, 2)) + np.arange(4)[:, None], [1, 1, 1, 1])
        with self.assertRaises(DegenerateLabels):
            cluster_separation(np.arange(8.0).reshape(4, 2), [1, 1, 1, 2])
        with self.assertRaises(DegenerateLabels):
            cluster_separation(np.zeros((4, 2)), [1, 1, 2, 2])


class CompareRepresentationsTest(SimpleTestCase):
    """Test the representation comparison on a seeded market with a regime change"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        logging.disable(logging.WARNING)
        try:
            panel = synth_market(10, 502, regime_start=300, seed=42)
            cls.rows = {row.representation: row for row in compare_representations(panel)}
        finally:
            logging.disable(logging.NOTSET)

    def test_row_per_representation(self):
        """Test the default representations in order"""
        self.assertEqual(list(self.rows), ['RawWindow', 'DftAmplitude', 'Correlation'])

    def test_shift_robust_representations_jump_less(self):
        """Test correlation and DFT features move less than raw windows under a shift"""
        raw = self.rows['RawWindow'].mean_gap
        self.assertLess(self.rows['Correlation'].mean_gap, raw)
        self.assertLess(self.rows['DftAmplitude'].mean_gap, raw)

    def test_correlation_clusters_periods_tighter_than_dft(self):
        """Test periods group more tightly under correlation features"""
        self.assertLess(self.rows['Correlation'].cluster_score, self.rows['DftAmplitude'].cluster_score)


class SymbolOrderTest(SimpleTestCase):
    """Test the comparison does not depend on the order symbols are listed in"""

    def test_permuted_symbols(self):
        """Test reordered panel columns give the same gaps and cluster scores"""
        logging.disable(logging.WARNING)
        self.addCleanup(logging.disable, logging.NOTSET)
        panel = synth_market(6, 120, regime_start=60, seed=42)
        order = [3, 0, 5, 1, 4, 2]
        permuted = Panel(
            symbols=tuple(panel.symbols[j] for j in order),
            dates=panel.dates,
            closes=panel.closes[:, order],
            volumes=panel.volumes[:, order],
        )
        config = {'scale': 10, 'segments': 10, 'rows': 4, 'cols': 4}
        original = compare_representations(panel, config)
        reordered = compare_representations(permuted, config)
        self.assertEqual([row.representation for row in reordered], [row.representation for row in original])
        for first, second in zip(original, reordered):
            self.assertAlmostEqual(first.mean_gap, second.mean_gap, places=9)
            self.assertAlmostEqual(first.median_gap, second.median_gap, places=9)
            self.assertAlmostEqual(first.max_gap, second.max_gap, places=9)
            self.assertAlmostEqual(first.cluster_score, second.cluster_score, places=9)


class ComparisonOutputTest(SimpleTestCase):
    """Test small comparisons and their CSV form"""

    def setUp(self):
        logging.disable(logging.WARNING)
        self.panel = synth_market(4, 60, regime_start=30, seed=3)

    def tearDown(self):
        logging.disable(logging.NOTSET)

    def test_deterministic(self):
        """Test two runs on the same panel give identical rows"""
        first = compare_representations(self.panel, SMALL_CONFIG)
        second = compare_representations(self.panel, SMALL_CONFIG)
        self.assertEqual(first, second)

    def test_csv_layout(self):
        """Test the header and one row per representation"""
        buffer = io.StringIO()
        write_comparison(compare_representations(self.panel, SMALL_CONFIG), buffer)
        lines = buffer.getvalue().splitlines()
        self.assertEqual(lines[0], 'representation,mean_gap,median_gap,max_gap,cluster_score')
        self.assertEqual([line.split(',')[0] for line in lines[1:]], ['RawWindow', 'DftAmplitude', 'Correlation'])

    def test_insufficient_days(self):
        """Test a panel too short for the shifted windows"""
        with self.assertRaises(InsufficientData) as caught:
            compare_representations(synth_market(4, 31, seed=3), SMALL_CONFIG)
        self.assertEqual(caught.exception.required, 32)
        self.assertTrue(str(caught.exception).startswith('analysis: '))
