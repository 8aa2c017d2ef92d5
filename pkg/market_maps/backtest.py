"""Replays of the three technical-analysis strategies with zero fees.

Fills happen at the same day's close. Whatever is still held on the last day is
valued at the last close, so ``final_value = cash + holdings * last_close``.
"""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.db import models
from scipy.signal import lfilter

from .exceptions import BacktestError, BadWindow, LengthMismatch

logger = logging.getLogger(__name__)

# Two-year NASDAQ window 2012-06-20 .. 2014-06-20, GOOGL/AAPL/AMZN with 2000 each.
# Depends on an archived feed; kept for reference, never asserted.
NASDAQ_2012_REFERENCE = {
    'googl_strategy1_final_value': 2888.14,
    'strategy1_profit_pct': 16.12,
    'strategy2_profit_pct': 42.86,
    'strategy3_profit_pct': 27.53,
    'buy_and_hold_pct': 51.0,
}


class Action(models.TextChoices):
    BUY = 'Buy', 'Buy'
    SELL = 'Sell', 'Sell'


# ============ DOMAIN TYPES ============

@dataclass(frozen=True)
class TradeRecord:
    date: object
    price: float
    action: str
    quantity: int
    symbol: str


@dataclass(frozen=True)
class BacktestResult:
    symbol: str
    initial_cash: float
    final_value: float
    profit: float
    trades: tuple
    buy_hold_value: float
    cash: float
    holdings: int

    @property
    def profit_pct(self):
        return 100.0 * self.profit / self.initial_cash

    @property
    def buy_hold_pct(self):
        return 100.0 * (self.buy_hold_value - self.initial_cash) / self.initial_cash


@dataclass(frozen=True)
class PortfolioSummary:
    profit_pct: float
    buy_hold_pct: float
    trade_count: int
    symbols: int


class _Account:
    """Cash and share ledger; refuses any fill that would go negative."""

    def __init__(self, series, initial_cash):
        self.series = series
        self.cash = float(initial_cash)
        self.holdings = 0
        self.trades = []

    def buy(self, index, price, quantity):
        cost = quantity * price
        if quantity < 1 or cost > self.cash:
            raise BacktestError(f'buy of {quantity} @ {price} exceeds cash {self.cash}')
        self.cash -= cost
        self.holdings += quantity
        self._record(index, price, Action.BUY, quantity)

    def sell(self, index, price, quantity):
        if quantity < 1 or quantity > self.holdings:
            raise BacktestError(f'sell of {quantity} exceeds holdings {self.holdings}')
        self.cash += quantity * price
        self.holdings -= quantity
        self._record(index, price, Action.SELL, quantity)

    def buy_all_in(self, index, price):
        quantity = math.floor(self.cash / price)
        if quantity * price > self.cash:
            quantity -= 1
        if quantity >= 1:
            self.buy(index, price, quantity)

    def sell_all(self, index, price):
        if self.holdings > 0:
            self.sell(index, price, self.holdings)

    def _record(self, index, price, action, quantity):
        trade = TradeRecord(
            date=self.series.bars[index].date,
            price=float(price),
            action=action.value,
            quantity=int(quantity),
            symbol=self.series.symbol,
        )
        logger.debug(f'{trade.symbol} {trade.date} {trade.action} {trade.quantity} @ {trade.price}')
        self.trades.append(trade)

    def close_out(self, closes, initial_cash):
        last = float(closes[-1])
        final_value = self.cash + self.holdings * last
        result = BacktestResult(
            symbol=self.series.symbol,
            initial_cash=float(initial_cash),
            final_value=final_value,
            profit=final_value - float(initial_cash),
            trades=tuple(self.trades),
            buy_hold_value=buy_and_hold(self.series, initial_cash),
            cash=self.cash,
            holdings=self.holdings,
        )
        logger.info(
            f'{result.symbol}: {len(result.trades)} trades, final value '
            f'{result.final_value:.2f} ({result.profit_pct:+.2f}%)'
        )
        return result


def _check_inputs(series, initial_cash, min_bars):
    if len(series) < min_bars:
        raise BacktestError(f'{series.symbol!r} has {len(series)} bars, need at least {min_bars}')
    if initial_cash <= 0:
        raise BacktestError(f'initial cash must be positive, got {initial_cash}')


# ============ MOVING AVERAGES ============

def sma(values, n):
    """Trailing n-day mean; indices before the first full window hold 0."""
    if n < 1:
        raise BadWindow(f'window must be at least 1, got {n}')
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    if len(values) >= n:
        windows = np.lib.stride_tricks.sliding_window_view(values, n)
        out[n - 1:] = windows.sum(axis=1) / n
    return out


def ema(values, n):
    """Exponential smoothing with factor 2/(n+1), seeded with the first value."""
    if n < 1:
        raise BadWindow(f'window must be at least 1, got {n}')
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return values.copy()
    alpha = 2.0 / (n + 1)
    smoothed, _ = lfilter([alpha], [1.0, alpha - 1.0], values, zi=[(1.0 - alpha) * values[0]])
    return smoothed


# ============ STRATEGIES ============

def strategy1(series, initial_cash=2000.0, threshold=0.07):
    """Buy one share after a rise above ``threshold`` from the base day, sell one
    after a fall below it; the base moves to any day that crosses either way."""
    _check_inputs(series, initial_cash, 2)
    closes = series.closes
    account = _Account(series, initial_cash)
    base = 0
    for i in range(1, len(closes)):
        change = closes[i] / closes[base] - 1.0
        if change > threshold:
            if account.cash >= closes[i]:
                account.buy(i, closes[i], 1)
            base = i
        elif change < -threshold:
            if account.holdings > 0:
                account.sell(i, closes[i], 1)
            base = i
    return account.close_out(closes, initial_cash)


def strategy2(series, initial_cash=2000.0, counter_gap=7):
    """Counter race between new highs and new lows: all in once the lows counter
    leads by more than ``counter_gap``, all out once the highs counter does."""
    _check_inputs(series, initial_cash, 2)
    closes = series.closes
    account = _Account(series, initial_cash)
    higher = lower = closes[0]
    hcount = lcount = 1
    for i in range(1, len(closes)):
        price = closes[i]
        if price > higher:
            higher = price
            hcount = 1
            lcount += 1
        elif price < lower:
            lower = price
            lcount = 1
            hcount += 1
        else:
            hcount += 1
            lcount += 1

        if lcount - hcount > counter_gap:
            higher = lower = price
            hcount = lcount = 1
            if account.holdings == 0:
                account.buy_all_in(i, price)
        elif hcount - lcount > counter_gap:
            higher = lower = price
            hcount = lcount = 1
            account.sell_all(i, price)
    return account.close_out(closes, initial_cash)


def volume_trigger(volumes, i):
    """Last four volumes sum to more than six times the running mean volume."""
    return volumes[i - 3:i + 1].sum() > 6.0 * volumes[:i + 1].mean()


def strategy3(series, volumes=None, initial_cash=2000.0):
    """MA5/MA15 trend counter confirmed by a volume spike."""
    _check_inputs(series, initial_cash, 16)
    volumes = series.volumes if volumes is None else np.asarray(volumes, dtype=float)
    if len(volumes) != len(series):
        raise LengthMismatch(f'{len(volumes)} volumes for {len(series)} bars')

    closes = series.closes
    ma5 = sma(closes, 5)
    ma15 = sma(closes, 15)
    account = _Account(series, initial_cash)
    count_ma = 1
    for i in range(15, len(closes)):
        if ma5[i] > ma15[i] and closes[i] > ma15[i]:
            count_ma += 1
        else:
            count_ma -= 1

        if count_ma > 1 and volume_trigger(volumes, i):
            count_ma = 1
            if account.holdings == 0:
                account.buy_all_in(i, closes[i])
        elif count_ma < 1 and volume_trigger(volumes, i):
            count_ma = 1
            account.sell_all(i, closes[i])
    return account.close_out(closes, initial_cash)


def buy_and_hold(series, initial_cash):
    if len(series) < 1:
        raise BacktestError(f'{series.symbol!r} has no bars')
    closes = series.closes
    return float(initial_cash * (closes[-1] / closes[0]))


def run_strategy(number, series, initial_cash=2000.0, threshold=0.07, counter_gap=7):
    if number == 1:
        return strategy1(series, initial_cash=initial_cash, threshold=threshold)
    if number == 2:
        return strategy2(series, initial_cash=initial_cash, counter_gap=counter_gap)
    if number == 3:
        return strategy3(series, initial_cash=initial_cash)
    raise BacktestError(f'unknown strategy {number!r}; choose one of {[1, 2, 3]}')


# ============ REPORTING ============

def portfolio_summary(results):
    if not results:
        raise BacktestError('no results to summarise')
    invested = sum(result.initial_cash for result in results)
    profit = sum(result.profit for result in results)
    held = sum(result.buy_hold_value - result.initial_cash for result in results)
    return PortfolioSummary(
        profit_pct=100.0 * profit / invested,
        buy_hold_pct=100.0 * held / invested,
        trade_count=sum(len(result.trades) for result in results),
        symbols=len(results),
    )


def signal_table(result, dates):
    """Per-day markers: 0 nothing, 1 buy, 2 sell."""
    index = {day: i for i, day in enumerate(dates)}
    table = np.zeros(len(dates), dtype=int)
    for trade in result.trades:
        table[index[trade.date]] = 1 if trade.action == Action.BUY else 2
    return table


TRADE_LOG_COLUMNS = ['date', 'symbol', 'action', 'price', 'quantity']


def write_trade_log(results, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(TRADE_LOG_COLUMNS)
    for result in results:
        for trade in result.trades:
            writer.writerow([
                trade.date.isoformat(), trade.symbol, trade.action, repr(trade.price), trade.quantity,
            ])
