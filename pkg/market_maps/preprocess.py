"""From aligned closes to windowed log-return datasets and their feature forms.

Rows are ordered stock-major: all periods of stock 1, then stock 2, and so on.
Stock and period indices are 1-based throughout, as in the exported files.
"""

import csv
import logging
from dataclasses import dataclass

import numpy as np
from django.db import models

from .exceptions import DegenerateWindow, InsufficientData, NonPositivePrice, PreprocessError
from .ingest import Panel

logger = logging.getLogger(__name__)

EPSILON = 1e-10


class Representation(models.TextChoices):
    RAW_WINDOW = 'raw', 'RawWindow'
    DFT_AMPLITUDE = 'dft', 'DftAmplitude'
    PROJECTION = 'proj', 'Projection'
    CORRELATION = 'corr', 'Correlation'


# ============ DOMAIN TYPES ============

@dataclass(frozen=True, eq=False)
class LogReturnMatrix:
    values: np.ndarray
    dates: tuple
    symbols: tuple = ()


@dataclass(frozen=True, eq=False)
class SegmentedDataset:
    scale: int
    segments: int
    stock_index: np.ndarray
    period_index: np.ndarray
    windows: np.ndarray
    symbols: tuple = ()

    @property
    def n_symbols(self):
        return len(self.stock_index) // self.segments

    def frame(self, period):
        """Windows of every stock for one 1-based period, in stock order."""
        return self.windows[self.period_index == period]

    def __len__(self):
        return len(self.stock_index)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    representation: str
    stock_index: np.ndarray
    period_index: np.ndarray
    features: np.ndarray

    @property
    def matrix(self):
        return self.features

    @property
    def keys(self):
        return list(zip(self.stock_index.tolist(), self.period_index.tolist()))

    @property
    def labels(self):
        return [f'STOCK{stock}_P{period}' for stock, period in self.keys]

    @property
    def width(self):
        return self.features.shape[1]

    def __len__(self):
        return len(self.stock_index)


# ============ RETURNS AND WINDOWS ============

def log_returns(panel):
    closes = panel.closes
    if panel.n_days < 2:
        raise InsufficientData('log-returns need at least 2 days', required=2, available=panel.n_days)
    if np.any(closes <= 0):
        day, column = np.argwhere(closes <= 0)[0]
        raise NonPositivePrice(
            f'{panel.symbols[column]} close on {panel.dates[day]} is {closes[day, column]}',
            module='preprocess',
        )
    return LogReturnMatrix(
        values=np.log(closes[1:] / closes[:-1]),
        dates=tuple(panel.dates[1:]),
        symbols=tuple(panel.symbols),
    )


def segment(returns, scale=20, segments=25):
    """Cut each symbol's returns into ``segments`` contiguous windows of ``scale``
    days from the start; surplus returns at the end are dropped."""
    if scale < 1 or segments < 1:
        raise PreprocessError(f'scale and segments must be positive, got {scale} and {segments}')
    values = returns.values
    required = scale * segments
    available = values.shape[0]
    if available < required:
        raise InsufficientData(
            f'{scale} x {segments} windows need {required} returns, {available} available',
            required=required,
            available=available,
        )

    n_symbols = values.shape[1]
    # (segments, scale, symbols) -> (symbols, segments, scale)
    blocks = values[:required].reshape(segments, scale, n_symbols).transpose(2, 0, 1)
    dataset = SegmentedDataset(
        scale=scale,
        segments=segments,
        stock_index=np.repeat(np.arange(1, n_symbols + 1), segments),
        period_index=np.tile(np.arange(1, segments + 1), n_symbols),
        windows=blocks.reshape(n_symbols * segments, scale).copy(),
        symbols=tuple(returns.symbols),
    )
    logger.info(f'Segmented {n_symbols} symbols into {len(dataset)} windows of {scale} returns')
    return dataset


def shift_one_day(panel):
    """Drop the first day so every window starts one return later."""
    if panel.n_days < 3:
        raise InsufficientData('shifting needs at least 3 days', required=3, available=panel.n_days)
    return Panel(
        symbols=panel.symbols,
        dates=panel.dates[1:],
        closes=panel.closes[1:],
        volumes=panel.volumes[1:],
    )


# ============ REPRESENTATIONS ============

def raw_features(dataset):
    return FeatureMatrix(
        representation=Representation.RAW_WINDOW.value,
        stock_index=dataset.stock_index.copy(),
        period_index=dataset.period_index.copy(),
        features=dataset.windows.copy(),
    )


def dft_amplitudes(window):
    """|F_k| for F_k = sum_n x_n exp(-2 pi i k n / N), no 1/N factor."""
    return np.abs(np.fft.fft(np.asarray(window, dtype=float)))


def dft_features(dataset):
    return FeatureMatrix(
        representation=Representation.DFT_AMPLITUDE.value,
        stock_index=dataset.stock_index.copy(),
        period_index=dataset.period_index.copy(),
        features=np.abs(np.fft.fft(dataset.windows, axis=1)),
    )


def _frames(dataset):
    """Yield (period, row positions in stock order, frame windows)."""
    for period in range(1, dataset.segments + 1):
        rows = np.flatnonzero(dataset.period_index == period)
        yield period, rows, dataset.windows[rows]


def _guard(norms, dataset, rows, period, epsilon, what):
    small = np.flatnonzero(norms < epsilon)
    if small.size:
        stock = dataset.stock_index[rows[small[0]]]
        raise DegenerateWindow(
            f'{what} of stock {stock} in period {period} is {norms[small[0]]:.3g} (< {epsilon:g})'
        )


def projection_features(dataset, epsilon=EPSILON):
    """V(a, b) = <X^a, X^b> / |X^b| within each frame; row (a, i) holds V against
    every stock b in stock order."""
    if len(dataset) == 0:
        raise PreprocessError('dataset is empty')
    features = np.empty((len(dataset), dataset.n_symbols))
    for period, rows, frame in _frames(dataset):
        gram = frame @ frame.T
        norms = np.sqrt(np.diag(gram))
        _guard(norms, dataset, rows, period, epsilon, 'window norm')
        features[rows] = gram / norms[None, :]
    return FeatureMatrix(
        representation=Representation.PROJECTION.value,
        stock_index=dataset.stock_index.copy(),
        period_index=dataset.period_index.copy(),
        features=features,
    )


def correlation_features(dataset, epsilon=EPSILON):
    """Pearson correlation of every pair of stock windows inside each frame."""
    if len(dataset) == 0:
        raise PreprocessError('dataset is empty')
    if dataset.scale < 2:
        raise PreprocessError(f'correlation needs scale >= 2, got {dataset.scale}')
    features = np.empty((len(dataset), dataset.n_symbols))
    for period, rows, frame in _frames(dataset):
        centered = frame - frame.mean(axis=1, keepdims=True)
        norms = np.sqrt(np.einsum('ij,ij->i', centered, centered))
        _guard(norms, dataset, rows, period, epsilon, 'centered window norm')
        corr = np.clip(np.corrcoef(frame), -1.0, 1.0)
        corr = 0.5 * (corr + corr.T)
        np.fill_diagonal(corr, 1.0)
        features[rows] = corr
    return FeatureMatrix(
        representation=Representation.CORRELATION.value,
        stock_index=dataset.stock_index.copy(),
        period_index=dataset.period_index.copy(),
        features=features,
    )


BUILDERS = {
    Representation.RAW_WINDOW: raw_features,
    Representation.DFT_AMPLITUDE: dft_features,
    Representation.PROJECTION: projection_features,
    Representation.CORRELATION: correlation_features,
}


def build_features(panel, representation, scale=20, segments=25, shifted=False, epsilon=EPSILON):
    """Closes -> log-returns -> windows -> chosen representation."""
    representation = Representation(representation)
    if shifted:
        panel = shift_one_day(panel)
    dataset = segment(log_returns(panel), scale=scale, segments=segments)
    builder = BUILDERS[representation]
    if representation in (Representation.PROJECTION, Representation.CORRELATION):
        features = builder(dataset, epsilon=epsilon)
    else:
        features = builder(dataset)
    logger.info(
        f'Built {representation.label} features: {len(features)} rows x {features.width}'
        f"{' (shifted one day)' if shifted else ''}"
    )
    return features


# ============ EXPORT ============

def write_feature_csv(features, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['stock_index', 'period_index'] + [f'f{j + 1}' for j in range(features.width)])
    for (stock, period), row in zip(features.keys, features.features):
        writer.writerow([stock, period] + [repr(float(value)) for value in row])


def write_feature_tsv(features, stream):
    """Tab-separated variant with a STOCKj_Pi label column for external viewers."""
    writer = csv.writer(stream, delimiter='\t', lineterminator='\n')
    writer.writerow(['label'] + [f'f{j + 1}' for j in range(features.width)])
    for label, row in zip(features.labels, features.features):
        writer.writerow([label] + [repr(float(value)) for value in row])


def read_feature_csv(stream, representation=Representation.RAW_WINDOW):
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or [cell.strip() for cell in header[:2]] != ['stock_index', 'period_index']:
        raise PreprocessError('feature file must start with stock_index,period_index')
    stocks, periods, rows = [], [], []
    for line_no, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(header):
            raise PreprocessError(f'feature row {line_no} has {len(fields)} fields, expected {len(header)}')
        try:
            stocks.append(int(fields[0]))
            periods.append(int(fields[1]))
            rows.append([float(value) for value in fields[2:]])
        except ValueError:
            raise PreprocessError(f'feature row {line_no} is not numeric')
    if not rows:
        raise PreprocessError('feature file has no rows')
    return FeatureMatrix(
        representation=Representation(representation).value,
        stock_index=np.array(stocks),
        period_index=np.array(periods),
        features=np.array(rows, dtype=float),
    )
