import io
from datetime import date

import numpy as np
from django.test import SimpleTestCase

from market_maps.exceptions import DegenerateWindow, InsufficientData, NonPositivePrice
from market_maps.ingest import Panel, synth_market, weekdays
from market_maps.preprocess import (
    LogReturnMatrix, Representation, build_features, correlation_features, dft_amplitudes,
    dft_features, log_returns, projection_features, raw_features, read_feature_csv, segment,
    shift_one_day, write_feature_csv, write_feature_tsv,
)


def brute_force_dft(window):
    n = len(window)
    k = np.arange(n)
    return np.array([abs(np.sum(window * np.exp(-2j * np.pi * f * k / n))) for f in range(n)])


def frames_dataset(rng, n_frames, n_symbols, scale=20):
    values = rng.standard_normal((scale * n_frames, n_symbols))
    return segment(LogReturnMatrix(values=values, dates=()), scale=scale, segments=n_frames)


class LogReturnTest(SimpleTestCase):
    """Test log-returns and the one-day shift"""

    def test_log_returns(self):
        """Test ln(P_t / P_{t-1}) per symbol"""
        panel = Panel(symbols=('A',), dates=weekdays(date(2014, 1, 6), 3),
                      closes=[[100.0], [110.0], [99.0]], volumes=[[1], [1], [1]])
        np.testing.assert_allclose(log_returns(panel).values[:, 0], np.log([1.1, 0.9]), rtol=1e-12)

    def test_too_few_days(self):
        """Test a one-day panel has no returns"""
        panel = synth_market(2, 2, seed=1)
        single = Panel(symbols=panel.symbols, dates=panel.dates[:1],
                       closes=panel.closes[:1], volumes=panel.volumes[:1])
        with self.assertRaises(InsufficientData):
            log_returns(single)

    def test_non_positive_close_is_reported_by_preprocess(self):
        """Test a zero close surfaces as a preprocess error"""
        panel = synth_market(2, 5, seed=1)
        closes = panel.closes.copy()
        closes[3, 1] = 0.0
        broken = Panel(symbols=panel.symbols, dates=panel.dates, closes=closes, volumes=panel.volumes)
        with self.assertRaises(NonPositivePrice) as caught:
            log_returns(broken)
        self.assertTrue(str(caught.exception).startswith('preprocess: '))

    def test_shift_drops_first_day(self):
        """Test the shifted panel starts one day later"""
        panel = synth_market(3, 10, seed=3)
        shifted = shift_one_day(panel)
        self.assertEqual(shifted.dates, panel.dates[1:])
        np.testing.assert_array_equal(shifted.closes, panel.closes[1:])


class SegmentTest(SimpleTestCase):
    """Test windowing into the stock-major dataset"""

    def setUp(self):
        self.panel = synth_market(10, 501, seed=42)
        self.returns = log_returns(self.panel)

    def test_shape_and_row_order(self):
        """Test 10 symbols x 25 periods gives 250 rows of 20 returns"""
        dataset = segment(self.returns)
        self.assertEqual(dataset.windows.shape, (250, 20))
        self.assertEqual(dataset.stock_index[:3].tolist(), [1, 1, 1])
        self.assertEqual(dataset.period_index[:3].tolist(), [1, 2, 3])
        self.assertEqual(dataset.stock_index[25], 2)

    def test_windows_are_contiguous_blocks(self):
        """Test row (a, i) holds returns (i-1)*20 .. i*20-1 of stock a"""
        dataset = segment(self.returns)
        row = 3 * 25 + 6  # stock 4, period 7
        np.testing.assert_array_equal(dataset.windows[row], self.returns.values[120:140, 3])

    def test_surplus_returns_are_dropped(self):
        """Test trailing returns beyond scale x segments are ignored"""
        dataset = segment(self.returns, scale=20, segments=24)
        self.assertEqual(len(dataset), 240)

    def test_insufficient_data_reports_counts(self):
        """Test required and available counts on the error"""
        with self.assertRaises(InsufficientData) as caught:
            segment(self.returns, scale=20, segments=26)
        self.assertEqual(caught.exception.required, 520)
        self.assertEqual(caught.exception.available, 500)

    def test_shifted_windows_overlap_in_all_but_one_return(self):
        """Test shifted raw rows share scale-1 entries with the originals"""
        panel = synth_market(4, 502, seed=5)
        original = build_features(panel, Representation.RAW_WINDOW)
        shifted = build_features(panel, Representation.RAW_WINDOW, shifted=True)
        np.testing.assert_array_equal(shifted.matrix[:, :-1], original.matrix[:, 1:])

    def test_raw_features_copy_windows(self):
        """Test the identity representation"""
        dataset = segment(self.returns)
        features = raw_features(dataset)
        np.testing.assert_array_equal(features.matrix, dataset.windows)
        self.assertEqual(len(features), len(dataset))


class DftTest(SimpleTestCase):
    """Test DFT amplitude features"""

    def test_zero_and_constant_windows(self):
        """Test zero maps to zero and a constant to N|c| at k=0"""
        np.testing.assert_array_equal(dft_amplitudes(np.zeros(20)), np.zeros(20))
        amplitudes = dft_amplitudes(np.full(20, -0.5))
        self.assertAlmostEqual(amplitudes[0], 10.0, places=12)
        self.assertLess(np.max(np.abs(amplitudes[1:])), 1e-12)

    def test_matches_direct_evaluation(self):
        """Test against the O(N^2) definition"""
        window = np.random.Generator(np.random.PCG64(11)).standard_normal(20)
        np.testing.assert_allclose(dft_amplitudes(window), brute_force_dft(window), atol=1e-12)

    def test_circular_shift_invariance_and_parseval(self):
        """Test 1000 random windows: shift invariance and Parseval's identity"""
        rng = np.random.Generator(np.random.PCG64(12))
        for _ in range(1000):
            window = rng.standard_normal(20)
            amplitudes = dft_amplitudes(window)
            rotated = dft_amplitudes(np.roll(window, 1))
            self.assertLessEqual(np.max(np.abs(amplitudes - rotated)), 1e-9)
            energy = 20 * np.sum(window ** 2)
            self.assertLessEqual(abs(np.sum(amplitudes ** 2) - energy) / energy, 1e-9)

    def test_dft_features_row_wise(self):
        """Test every feature row is the amplitude vector of its window"""
        dataset = frames_dataset(np.random.Generator(np.random.PCG64(13)), 5, 3)
        features = dft_features(dataset)
        self.assertEqual(features.representation, 'dft')
        np.testing.assert_allclose(features.matrix[7], dft_amplitudes(dataset.windows[7]), atol=1e-12)


class ProjectionTest(SimpleTestCase):
    """Test per-frame scalar projections"""

    def dataset(self, windows):
        values = np.array(windows, dtype=float).T
        return segment(LogReturnMatrix(values=values, dates=()), scale=values.shape[0], segments=1)

    def test_self_projection_is_norm(self):
        """Test projecting a window on itself gives its length"""
        features = projection_features(self.dataset([[3, 4, 0], [1, 0, 0]]))
        self.assertAlmostEqual(features.matrix[0, 0], 5.0, places=12)

    def test_orthogonal_windows(self):
        """Test orthogonal windows project to 0"""
        features = projection_features(self.dataset([[1, 0, 0], [0, 2, 0]]))
        self.assertEqual(features.matrix[0, 1], 0.0)

    def test_zero_target_is_degenerate(self):
        """Test the zero-division guard"""
        with self.assertRaises(DegenerateWindow):
            projection_features(self.dataset([[1, 2, 3], [0, 0, 0]]))


class CorrelationTest(SimpleTestCase):
    """Test moving-frame Pearson correlation features"""

    def test_random_frames(self):
        """Test 1000 frames: unit diagonal, symmetry, range and affine invariance"""
        rng = np.random.Generator(np.random.PCG64(21))
        dataset = frames_dataset(rng, 1000, 5)
        features = correlation_features(dataset)

        scaled = dataset.windows.copy()
        rows = dataset.stock_index == 3
        scaled[rows] = 2.5 * scaled[rows] + 0.75
        rescaled = correlation_features(type(dataset)(
            scale=dataset.scale, segments=dataset.segments, stock_index=dataset.stock_index,
            period_index=dataset.period_index, windows=scaled,
        ))

        for period in range(1, 1001):
            frame = features.matrix[features.period_index == period]
            self.assertLessEqual(np.max(np.abs(np.diag(frame) - 1.0)), 1e-12)
            self.assertLessEqual(np.max(np.abs(frame - frame.T)), 1e-12)
            self.assertTrue(np.all((frame >= -1.0) & (frame <= 1.0)))
        self.assertLessEqual(np.max(np.abs(features.matrix - rescaled.matrix)), 1e-12)

    def test_negated_window(self):
        """Test corr(X, -X) = -1"""
        window = np.random.Generator(np.random.PCG64(22)).standard_normal(20)
        values = np.column_stack([window, -window])
        features = correlation_features(segment(LogReturnMatrix(values, ()), scale=20, segments=1))
        self.assertAlmostEqual(features.matrix[0, 1], -1.0, places=12)

    def test_constant_window_is_degenerate(self):
        """Test a flat window has no correlation"""
        values = np.column_stack([np.linspace(0, 1, 20), np.full(20, 0.01)])
        with self.assertRaises(DegenerateWindow):
            correlation_features(segment(LogReturnMatrix(values, ()), scale=20, segments=1))


class FeatureExportTest(SimpleTestCase):
    """Test feature CSV/TSV export"""

    def setUp(self):
        self.features = build_features(synth_market(10, 501, seed=42), Representation.CORRELATION)

    def test_correlation_width_is_symbol_count(self):
        """Test 250 rows with one feature per stock"""
        self.assertEqual(self.features.matrix.shape, (250, 10))

    def test_csv_round_trip(self):
        """Test the CSV reader restores keys and values exactly"""
        buffer = io.StringIO()
        write_feature_csv(self.features, buffer)
        header = buffer.getvalue().splitlines()[0]
        self.assertEqual(header, 'stock_index,period_index,' + ','.join(f'f{j}' for j in range(1, 11)))
        buffer.seek(0)
        restored = read_feature_csv(buffer, Representation.CORRELATION)
        self.assertEqual(restored.keys, self.features.keys)
        np.testing.assert_array_equal(restored.matrix, self.features.matrix)

    def test_tsv_labels(self):
        """Test the labelled variant uses STOCKj_Pi"""
        buffer = io.StringIO()
        write_feature_tsv(self.features, buffer)
        lines = buffer.getvalue().splitlines()
        self.assertTrue(lines[1].startswith('STOCK1_P1\t'))
        self.assertTrue(lines[-1].startswith('STOCK10_P25\t'))
