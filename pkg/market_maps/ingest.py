"""Daily price ingest: CSV parsing, calendar alignment and a seeded synthetic market.

CSV files follow the Yahoo historical export layout
(``Date,Open,High,Low,Close,Volume,Adj Close``). Open, high, low and close are
rescaled by ``adj_close / close`` so that every field is dividend and split
adjusted; rows may arrive newest-first and are returned oldest-first.

The synthetic generator uses numpy's PCG64 bit generator seeded with the given
64-bit integer (PCG64 state: 128-bit LCG multiplier
0x2360ED051FC65DA44385DF649FCCF645, XSL-RR output). Draw order is fixed:
idiosyncratic normals (returns x symbols), common normals (returns), then
volumes (days x symbols, uniform integers in [100000, 5000000)).
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .exceptions import (
    BadConfig, DateMismatch, EmptyInput, EmptyList, IngestError, MalformedRow, NonPositivePrice,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('Date', 'Open', 'High', 'Low', 'Close', 'Volume', 'Adj Close')

SYNTH_START_DATE = date(2007, 1, 3)
SYNTH_START_PRICE = 100.0
SYNTH_VOLUME_RANGE = (100_000, 5_000_000)

_RATIO_TOL = 1e-9


# ============ DOMAIN TYPES ============

@dataclass(frozen=True)
class PriceBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: int


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    bars: tuple

    @property
    def dates(self):
        return [bar.date for bar in self.bars]

    @property
    def closes(self):
        return np.array([bar.close for bar in self.bars], dtype=float)

    @property
    def volumes(self):
        return np.array([bar.volume for bar in self.bars], dtype=float)

    def __len__(self):
        return len(self.bars)


@dataclass(frozen=True, eq=False)
class Panel:
    """Date-aligned closes and volumes, one column per symbol."""

    symbols: tuple
    dates: tuple
    closes: np.ndarray
    volumes: np.ndarray

    def __post_init__(self):
        for name in ('closes', 'volumes'):
            values = np.array(getattr(self, name), dtype=float)
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        expected = (len(self.dates), len(self.symbols))
        if self.closes.shape != expected or self.volumes.shape != expected:
            raise ValueError(f'panel arrays must be {expected}, got {self.closes.shape}')

    @property
    def n_days(self):
        return len(self.dates)

    @property
    def n_symbols(self):
        return len(self.symbols)

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            self.symbols == other.symbols
            and self.dates == other.dates
            and np.array_equal(self.closes, other.closes)
            and np.array_equal(self.volumes, other.volumes)
        )


# ============ CSV ============

def _parse_number(raw, field, line_no):
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRow(f'row {line_no}: {field} {raw!r} is not a number')
    if not math.isfinite(value):
        raise MalformedRow(f'row {line_no}: {field} {raw!r} is not finite')
    return value


def _parse_row(fields, positions, line_no):
    try:
        day = date.fromisoformat(fields[positions['date']].strip())
    except ValueError:
        raise MalformedRow(f'row {line_no}: bad date {fields[positions["date"]]!r}')

    raw = {
        name: _parse_number(fields[positions[name]].strip(), name, line_no)
        for name in ('open', 'high', 'low', 'close', 'adj close')
    }
    for name, value in raw.items():
        if value <= 0:
            raise NonPositivePrice(f'row {line_no}: {name} is {value}')

    volume = _parse_number(fields[positions['volume']].strip(), 'volume', line_no)
    if volume < 0 or volume != int(volume):
        raise MalformedRow(f'row {line_no}: volume {volume} is not a non-negative integer')

    ratio = raw['adj close'] / raw['close']
    bar = PriceBar(
        date=day,
        open=raw['open'] * ratio,
        high=raw['high'] * ratio,
        low=raw['low'] * ratio,
        close=raw['adj close'],
        volume=int(volume),
    )
    top = max(bar.open, bar.close)
    bottom = min(bar.open, bar.close)
    if bar.high < top * (1 - _RATIO_TOL) or bar.low > bottom * (1 + _RATIO_TOL):
        raise MalformedRow(f'row {line_no}: high/low do not bracket open and close')
    return bar


def parse_csv(text, symbol=''):
    """Parse a Yahoo-style OHLCV export into an adjusted, chronological PriceSeries.

    ``text`` is a string or any text stream. Header names are matched
    case-insensitively and may come in any order.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    rows = [row for row in csv.reader(stream) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyInput('no header row')

    header = [cell.strip().lower() for cell in rows[0]]
    positions = {}
    for name in CSV_COLUMNS:
        key = name.lower()
        if key not in header:
            raise MalformedRow(f'header is missing column {name!r}')
        positions[key] = header.index(key)

    if len(rows) < 2:
        raise EmptyInput('no data rows')

    bars = []
    for line_no, fields in enumerate(rows[1:], start=2):
        if len(fields) != len(header):
            raise MalformedRow(f'row {line_no} has {len(fields)} fields, expected {len(header)}')
        bars.append(_parse_row(fields, positions, line_no))

    # Yahoo exports newest first; the first two rows decide.
    if len(bars) >= 2 and bars[0].date > bars[1].date:
        bars.reverse()

    for previous, current in zip(bars, bars[1:]):
        if current.date <= previous.date:
            raise MalformedRow(f'dates not strictly ordered at {current.date.isoformat()}')

    logger.info(f"Parsed {len(bars)} bars for {symbol or 'unnamed series'}")
    return PriceSeries(symbol=symbol, bars=tuple(bars))


def serialize_csv(series):
    """Write a PriceSeries back in the export layout; Adj Close equals Close."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for bar in series.bars:
        writer.writerow([
            bar.date.isoformat(),
            repr(bar.open),
            repr(bar.high),
            repr(bar.low),
            repr(bar.close),
            bar.volume,
            repr(bar.close),
        ])
    return buffer.getvalue()


def read_price_csv(path):
    path = Path(path)
    try:
        with open(path, newline='') as handle:
            return parse_csv(handle, symbol=path.stem)
    except OSError as err:
        raise IngestError(f'cannot read {path}: {err.strerror}')


# ============ ALIGNMENT ============

def _first_difference(reference, dates):
    for ours, theirs in zip(reference, dates):
        if ours != theirs:
            return min(ours, theirs)
    longer = reference if len(reference) > len(dates) else dates
    return longer[min(len(reference), len(dates))]


def align(series):
    """Stack series sharing one calendar into a Panel; never imputes."""
    if not series:
        raise EmptyList('no series to align')
    for item in series:
        if len(item) == 0:
            raise EmptyList(f'series {item.symbol!r} has no bars')

    reference = series[0].dates
    for item in series[1:]:
        dates = item.dates
        if dates != reference:
            missing = _first_difference(reference, dates)
            raise DateMismatch(
                f'date not fit: {item.symbol!r} differs from {series[0].symbol!r} '
                f'at {missing.isoformat()}'
            )

    panel = Panel(
        symbols=tuple(item.symbol for item in series),
        dates=tuple(reference),
        closes=np.column_stack([item.closes for item in series]),
        volumes=np.column_stack([item.volumes for item in series]),
    )
    logger.info(f'Aligned {panel.n_symbols} symbols over {panel.n_days} days')
    return panel


def panel_series(panel):
    """Rebuild per-symbol OHLCV series from a Panel (open = previous close)."""
    result = []
    for j, symbol in enumerate(panel.symbols):
        closes = panel.closes[:, j]
        opens = np.concatenate([closes[:1], closes[:-1]])
        bars = tuple(
            PriceBar(
                date=day,
                open=float(opens[t]),
                high=float(max(opens[t], closes[t])),
                low=float(min(opens[t], closes[t])),
                close=float(closes[t]),
                volume=int(panel.volumes[t, j]),
            )
            for t, day in enumerate(panel.dates)
        )
        result.append(PriceSeries(symbol=symbol, bars=bars))
    return result


# ============ SYNTHETIC MARKET ============

def weekdays(start, count):
    days = []
    current = start
    while len(days) < count:
        if current.weekday() < 5:
            days.append(current)
        current += timedelta(days=1)
    return tuple(days)


def synth_market(n_symbols, n_days, regime_start=None, seed=42, vol=0.02,
                 regime_common_weight=0.5):
    """Seeded geometric random walk starting at 100.0 for every symbol.

    From ``regime_start`` (a day index) onward each daily log-return mixes a
    factor shared by all symbols, drawn with twice the volatility, with the
    symbol's own draw: ``w * 2 * vol * common + (1 - w) * vol * own``.
    """
    if n_symbols < 1:
        raise BadConfig(f'n_symbols must be at least 1, got {n_symbols}')
    if n_days < 2:
        raise BadConfig(f'n_days must be at least 2, got {n_days}')
    if vol < 0:
        raise BadConfig(f'vol must be non-negative, got {vol}')
    if not 0.0 <= regime_common_weight <= 1.0:
        raise BadConfig(f'regime_common_weight must lie in [0, 1], got {regime_common_weight}')
    if regime_start is not None and not 0 <= regime_start < n_days:
        raise BadConfig(f'regime_start {regime_start} must lie in [0, {n_days})')

    rng = np.random.Generator(np.random.PCG64(seed))
    n_returns = n_days - 1
    own = rng.standard_normal((n_returns, n_symbols))
    common = rng.standard_normal(n_returns)
    volumes = rng.integers(*SYNTH_VOLUME_RANGE, size=(n_days, n_symbols))

    returns = vol * own
    if regime_start is not None:
        # return t moves the close from day t to day t + 1
        first = max(regime_start - 1, 0)
        weight = regime_common_weight
        returns[first:] = (
            weight * (2.0 * vol) * common[first:, None]
            + (1.0 - weight) * vol * own[first:]
        )

    log_paths = np.vstack([np.zeros((1, n_symbols)), np.cumsum(returns, axis=0)])
    closes = SYNTH_START_PRICE * np.exp(log_paths)

    panel = Panel(
        symbols=tuple(f'SYN{j + 1:02d}' for j in range(n_symbols)),
        dates=weekdays(SYNTH_START_DATE, n_days),
        closes=closes,
        volumes=volumes.astype(float),
    )
    logger.info(
        f'Synthesized {n_symbols} symbols x {n_days} days '
        f'(seed={seed}, regime_start={regime_start})'
    )
    return panel
