"""Daily OHLCV series: CSV I/O, validation, date alignment and synthetic panels.

Everything downstream reads prices through :class:`AlignedPanel`, a
date-aligned close matrix with its simple-return matrix attached.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError

CSV_HEADER = ("date", "open", "high", "low", "close", "volume")
SCENARIOS = ("bull", "crash", "sideways", "regime_switch")

CRASH_DAYS = 15
CRASH_RETURN = -0.03
REGIME_BLOCK = 60
SYNTH_START = dt.date(2023, 1, 1)


@dataclass(frozen=True)
class Bar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def problem(self) -> str | None:
        """Return a description of the first violated invariant, if any."""
        prices = (self.open, self.high, self.low, self.close)
        if any(not np.isfinite(p) or p <= 0 for p in prices):
            return "non-positive price"
        if self.high < max(self.open, self.close):
            return "high below open/close"
        if self.low > min(self.open, self.close):
            return "low above open/close"
        if not np.isfinite(self.volume) or self.volume < 0:
            return "negative volume"
        return None


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    bars: tuple[Bar, ...]

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> list[dt.date]:
        return [b.date for b in self.bars]

    @property
    def closes(self) -> np.ndarray:
        return np.array([b.close for b in self.bars], dtype=float)


@dataclass(frozen=True)
class AlignedPanel:
    """Close prices of several symbols over a shared, strictly increasing date axis.

    ``closes`` has shape ``(n_symbols, n_dates)``; ``returns`` is derived
    and has shape ``(n_symbols, n_dates - 1)``.
    """

    dates: tuple[dt.date, ...]
    symbols: tuple[str, ...]
    closes: np.ndarray
    returns: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        closes = np.array(self.closes, dtype=float, copy=True)
        if closes.ndim != 2 or closes.shape != (len(self.symbols), len(self.dates)):
            raise DataError(
                f"closes shape {closes.shape} does not match "
                f"{len(self.symbols)} symbols x {len(self.dates)} dates",
                "bad_panel",
            )
        if len(self.dates) < 2:
            raise DataError("panel needs at least 2 dates", "too_few_dates")
        if np.any(~np.isfinite(closes)) or np.any(closes <= 0):
            raise DataError("panel closes must be positive", "bad_price")
        closes.flags.writeable = False
        rets = closes[:, 1:] / closes[:, :-1] - 1.0
        rets.flags.writeable = False
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "returns", rets)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    def index_of(self, date: dt.date) -> int:
        try:
            return self.dates.index(date)
        except ValueError:
            raise DataError(f"date {date} not in panel", "unknown_date") from None

    def column(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise DataError(f"unknown symbol {symbol!r}", "unknown_symbol") from None

    def select(self, symbols: Sequence[str]) -> "AlignedPanel":
        idx = [self.column(s) for s in symbols]
        return AlignedPanel(self.dates, tuple(symbols), self.closes[idx])

    def with_closes(self, closes: np.ndarray) -> "AlignedPanel":
        return AlignedPanel(self.dates, self.symbols, closes)


# ---------------------------------------------------------------- CSV I/O


def _parse_row(row: list[str], rownum: int) -> Bar:
    if len(row) != len(CSV_HEADER):
        raise DataError(f"malformed row {rownum}: expected 6 fields, got {len(row)}", "malformed_row")
    try:
        date = dt.date.fromisoformat(row[0].strip())
        o, h, l, c, v = (float(x) for x in row[1:])
    except ValueError as exc:
        raise DataError(f"malformed row {rownum}: {exc}", "malformed_row") from None
    bar = Bar(date, o, h, l, c, v)
    problem = bar.problem()
    if problem is not None:
        code = "bad_price" if "price" in problem or "high" in problem or "low" in problem else "bad_volume"
        raise DataError(f"{problem} at row {rownum}", code)
    return bar


def validate_bars(bars: Iterable[Bar], first_row: int = 2) -> tuple[Bar, ...]:
    """Check bar invariants and date ordering; row numbers count the header as row 1."""
    out: list[Bar] = []
    for i, bar in enumerate(bars):
        rownum = first_row + i
        problem = bar.problem()
        if problem is not None:
            raise DataError(f"{problem} at row {rownum}", "bad_price")
        if out:
            prev = out[-1].date
            if bar.date == prev:
                raise DataError(f"duplicate date {bar.date} at row {rownum}", "duplicate_date")
            if bar.date < prev:
                raise DataError(f"unsorted dates at row {rownum}", "unsorted_dates")
        out.append(bar)
    if not out:
        raise DataError("no bars", "no_bars")
    return tuple(out)


def load_series(path: str | os.PathLike, symbol: str | None = None) -> PriceSeries:
    """Read one ``date,open,high,low,close,volume`` CSV into a validated series.

    ``symbol`` defaults to the file stem (``BTC.csv`` -> ``BTC``).
    """
    path = os.fspath(path)
    if symbol is None:
        symbol = os.path.splitext(os.path.basename(path))[0]
    if not os.path.isfile(path):
        raise DataError(f"missing data file {path}", "missing_file")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"{path}: expected header {','.join(CSV_HEADER)}", "bad_header")
        bars = [_parse_row(row, reader.line_num) for row in reader if row]
    try:
        return PriceSeries(symbol, validate_bars(bars))
    except DataError as exc:
        raise DataError(f"{path}: {exc}", exc.code) from None


def _fmt(x: float) -> str:
    return repr(float(x))


def series_to_csv(series: PriceSeries) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for b in series.bars:
        buf.write(
            f"{b.date.isoformat()},{_fmt(b.open)},{_fmt(b.high)},{_fmt(b.low)},"
            f"{_fmt(b.close)},{_fmt(b.volume)}\n"
        )
    return buf.getvalue()


def write_csv(series: PriceSeries, path: str | os.PathLike) -> str:
    """Write the canonical CSV form; returns the path written."""
    path = os.fspath(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(series_to_csv(series))
    return path


# ---------------------------------------------------------------- alignment


def align(series_list: Sequence[PriceSeries]) -> AlignedPanel:
    """Inner-join series on date. Symbols keep input order; no forward filling."""
    if not series_list:
        raise DataError("align needs at least one series", "no_series")
    symbols = [s.symbol for s in series_list]
    if len(set(symbols)) != len(symbols):
        raise DataError(f"duplicate symbols in {symbols}", "duplicate_symbol")
    shared = set(series_list[0].dates)
    for s in series_list[1:]:
        shared &= set(s.dates)
    if not shared:
        raise DataError("empty intersection of dates", "empty_intersection")
    if len(shared) < 2:
        raise DataError("fewer than 2 shared dates", "too_few_dates")
    dates = sorted(shared)
    closes = np.empty((len(series_list), len(dates)))
    for i, s in enumerate(series_list):
        by_date = {b.date: b.close for b in s.bars}
        closes[i] = [by_date[d] for d in dates]
    return AlignedPanel(tuple(dates), tuple(symbols), closes)


def simple_returns(closes) -> np.ndarray:
    closes = np.asarray(closes, dtype=float)
    if closes.ndim != 1 or closes.size < 2:
        raise DataError("need at least 2 closes for returns", "too_few_bars")
    if np.any(closes <= 0):
        raise DataError("closes must be positive", "bad_price")
    return closes[1:] / closes[:-1] - 1.0


# ---------------------------------------------------------------- synthetic data


def gbm_returns(rng: np.random.Generator, n: int, drift: float, vol: float) -> np.ndarray:
    """Daily simple returns of a geometric Brownian motion with annual drift/vol."""
    dt_year = 1.0 / 365.0
    log_r = rng.normal((drift - 0.5 * vol**2) * dt_year, vol * np.sqrt(dt_year), size=n)
    return np.expm1(log_r)


def _scenario_returns(scenario: str, rng: np.random.Generator, n_ret: int, scale: float) -> np.ndarray:
    if scenario == "bull":
        return gbm_returns(rng, n_ret, 0.6, 0.45 * scale)
    if scenario == "sideways":
        return gbm_returns(rng, n_ret, 0.0, 0.15 * scale)
    if scenario == "crash":
        r = gbm_returns(rng, n_ret, 0.2, 0.35 * scale)
        start = (n_ret + 1) // 2
        r[start : start + CRASH_DAYS] = CRASH_RETURN
        return r
    if scenario == "regime_switch":
        bull = gbm_returns(rng, n_ret, 0.8, 0.4 * scale)
        bear = gbm_returns(rng, n_ret, -0.8, 0.5 * scale)
        block = (np.arange(n_ret) // REGIME_BLOCK) % 2
        return np.where(block == 0, bull, bear)
    raise ConfigError(f"invalid scenario {scenario!r}; choose from {', '.join(SCENARIOS)}", "invalid_scenario")


def bars_from_closes(closes: np.ndarray, dates: Sequence[dt.date], rng: np.random.Generator) -> tuple[Bar, ...]:
    """Dress a close path up as OHLCV bars (open = previous close, random wicks)."""
    n = len(closes)
    opens = np.concatenate([[closes[0]], closes[:-1]])
    up = 1.0 + 0.01 * rng.random(n)
    down = 1.0 - 0.01 * rng.random(n)
    vols = rng.lognormal(mean=17.0, sigma=0.5, size=n)
    return tuple(
        Bar(
            dates[t],
            float(opens[t]),
            float(max(opens[t], closes[t]) * up[t]),
            float(min(opens[t], closes[t]) * down[t]),
            float(closes[t]),
            float(vols[t]),
        )
        for t in range(n)
    )


def synth_series(scenario: str, n_assets: int, n_days: int, seed: int) -> list[PriceSeries]:
    """Seeded synthetic daily series named ``SYN0``, ``SYN1``, ...

    ``crash`` sets the same 15 consecutive daily returns to exactly -3% for
    every asset, starting at the middle of the sample; ``regime_switch``
    alternates 60-day bull and bear blocks.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"invalid scenario {scenario!r}; choose from {', '.join(SCENARIOS)}", "invalid_scenario")
    if n_days < 10:
        raise ConfigError(f"n_days must be >= 10, got {n_days}", "too_few_days")
    if n_assets < 1:
        raise ConfigError(f"n_assets must be >= 1, got {n_assets}", "too_few_assets")
    n_ret = n_days - 1
    if scenario == "crash" and (n_ret + 1) // 2 + CRASH_DAYS > n_ret:
        raise ConfigError(f"crash scenario needs at least {2 * CRASH_DAYS + 1} days", "too_few_days")
    rng = np.random.default_rng(seed)
    dates = [SYNTH_START + dt.timedelta(days=t) for t in range(n_days)]
    out = []
    for i in range(n_assets):
        r = _scenario_returns(scenario, rng, n_ret, scale=1.0 + 0.25 * i)
        closes = 100.0 * (i + 1) * np.concatenate([[1.0], np.cumprod(1.0 + r)])
        out.append(PriceSeries(f"SYN{i}", bars_from_closes(closes, dates, rng)))
    return out


def synth_generate(scenario: str, n_assets: int, n_days: int, seed: int) -> AlignedPanel:
    return align(synth_series(scenario, n_assets, n_days, seed))


def series_from_closes(symbol: str, closes, start: dt.date = SYNTH_START, seed: int = 0) -> PriceSeries:
    """Wrap an explicit close path as a daily series (handy for fixtures)."""
    closes = np.asarray(closes, dtype=float)
    dates = [start + dt.timedelta(days=t) for t in range(len(closes))]
    return PriceSeries(symbol, bars_from_closes(closes, dates, np.random.default_rng(seed)))
