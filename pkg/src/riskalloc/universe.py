"""Universe screening: liquidity ranks, trend classification and peg filtering."""

from __future__ import annotations

import csv
import enum
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .market_data import AlignedPanel, PriceSeries

META_HEADER = ("symbol", "market_cap_usd", "volume_24h_usd")


@dataclass(frozen=True)
class AssetMeta:
    symbol: str
    market_cap_usd: float
    volume_24h_usd: float


class TrendClass(str, enum.Enum):
    UPWARD = "Upward"
    VOLATILE = "Volatile"
    SIDEWAYS = "Sideways"
    DECLINING = "Declining"


@dataclass(frozen=True)
class TrendThresholds:
    up: float = 0.20
    down: float = 0.20
    side: float = 0.10
    r2_min: float = 0.30
    vol_low: float = 0.40


@dataclass(frozen=True)
class TrendFit:
    growth: float  # annualized log growth
    r2: float
    vol: float  # annualized volatility of daily simple returns


@dataclass(frozen=True)
class ScreenConfig:
    top_n: int = 10
    include_list: tuple[str, ...] = ()
    window: int = 90
    thresholds: TrendThresholds = field(default_factory=TrendThresholds)
    peg_vol: float = 0.02


@dataclass(frozen=True)
class UniverseEntry:
    symbol: str
    cap_rank: int | None
    vol_rank: int | None
    trend: TrendClass
    pegged: bool
    admitted: bool
    reason: str = ""


@dataclass(frozen=True)
class UniverseReport:
    entries: tuple[UniverseEntry, ...]

    @property
    def admitted(self) -> list[str]:
        return [e.symbol for e in self.entries if e.admitted]

    def __getitem__(self, symbol: str) -> UniverseEntry:
        for e in self.entries:
            if e.symbol == symbol:
                return e
        raise KeyError(symbol)

    def to_dict(self) -> dict:
        rows = []
        for e in self.entries:
            d = asdict(e)
            d["trend"] = e.trend.value
            rows.append(d)
        return {"admitted": self.admitted, "symbols": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def load_metas(path: str | os.PathLike) -> list[AssetMeta]:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataError(f"missing meta file {path}", "missing_file")
    metas = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != META_HEADER:
            raise DataError(f"{path}: expected header {','.join(META_HEADER)}", "bad_header")
        for row in reader:
            if not row:
                continue
            try:
                sym, cap, vol = row[0].strip(), float(row[1]), float(row[2])
            except (IndexError, ValueError):
                raise DataError(f"{path}: malformed row {reader.line_num}", "malformed_row") from None
            if cap < 0 or vol < 0:
                raise DataError(f"{path}: negative value at row {reader.line_num}", "malformed_row")
            metas.append(AssetMeta(sym, cap, vol))
    if not metas:
        raise DataError(f"{path}: no assets", "empty_meta")
    if len({m.symbol for m in metas}) != len(metas):
        raise DataError(f"{path}: duplicate symbols", "duplicate_symbol")
    return metas


def _ranks(metas: Sequence[AssetMeta], key) -> dict[str, int]:
    ordered = sorted(metas, key=lambda m: (-key(m), m.symbol))
    return {m.symbol: i + 1 for i, m in enumerate(ordered)}


def cap_ranks(metas):
    return _ranks(metas, lambda m: m.market_cap_usd)


def volume_ranks(metas):
    return _ranks(metas, lambda m: m.volume_24h_usd)


def rank_screen(metas: Sequence[AssetMeta], top_n: int) -> set[str]:
    """Symbols inside the top ``top_n`` by market cap *and* by 24h volume."""
    if not metas:
        raise DataError("empty meta list", "empty_meta")
    if top_n < 1:
        raise ConfigError("top_n must be >= 1", "bad_top_n")
    caps, vols = cap_ranks(metas), volume_ranks(metas)
    return {m.symbol for m in metas if caps[m.symbol] <= top_n and vols[m.symbol] <= top_n}


def _closes(series) -> np.ndarray:
    if isinstance(series, PriceSeries):
        return series.closes
    return np.asarray(series, dtype=float)


def trend_fit(series, window: int) -> TrendFit:
    closes = _closes(series)
    if window > len(closes):
        raise DataError(f"window {window} longer than series ({len(closes)} bars)", "window_too_long")
    y = np.log(closes[-window:])
    x = np.arange(window, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    ss_tot = float(yc @ yc)
    resid = yc - slope * xc
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 0.0
    rets = closes[-window:][1:] / closes[-window:][:-1] - 1.0
    vol = float(rets.std(ddof=1) * math.sqrt(365))
    return TrendFit(slope * 365, r2, vol)


def classify_fit(fit: TrendFit, th: TrendThresholds = TrendThresholds()) -> TrendClass:
    if fit.growth >= th.up and fit.r2 >= th.r2_min:
        return TrendClass.UPWARD
    if fit.growth <= -th.down and fit.r2 >= th.r2_min:
        return TrendClass.DECLINING
    if abs(fit.growth) < th.side and fit.vol < th.vol_low:
        return TrendClass.SIDEWAYS
    return TrendClass.VOLATILE


def classify_trend(series, window: int = 90, thresholds: TrendThresholds = TrendThresholds()) -> TrendClass:
    """Four-way trend label from an OLS fit of log close on day index over the trailing window."""
    if window < 30:
        raise ConfigError("trend window must be >= 30", "bad_window")
    return classify_fit(trend_fit(series, window), thresholds)


def filter_pegged(series, max_vol: float = 0.02, lookback: int = 90) -> bool:
    """True when annualized return volatility over the last ``lookback`` days is below ``max_vol``."""
    closes = _closes(series)
    if len(closes) < 31:
        raise DataError(f"peg filter needs >= 31 bars, got {len(closes)}", "too_few_bars")
    tail = closes[-(lookback + 1) :]
    rets = tail[1:] / tail[:-1] - 1.0
    return bool(rets.std(ddof=1) * math.sqrt(365) < max_vol)


def select_universe(
    metas: Sequence[AssetMeta],
    panel: AlignedPanel,
    config: ScreenConfig = ScreenConfig(),
) -> UniverseReport:
    """Verdict per panel symbol.

    Admission needs (screen pass or include_list) and not pegged and a trend
    of Upward or Volatile. The first failed rule, in that order, is the
    rejection reason.
    """
    by_symbol = {m.symbol: m for m in metas}
    for sym in config.include_list:
        if sym not in panel.symbols:
            raise DataError(f"include_list symbol {sym} has no price data", "unknown_symbol")
    for sym in panel.symbols:
        if sym not in by_symbol and sym not in config.include_list:
            raise DataError(f"symbol {sym} has no meta entry and is not on include_list", "missing_meta")
    passed = rank_screen(metas, config.top_n) if metas else set()
    caps = cap_ranks(metas) if metas else {}
    vols = volume_ranks(metas) if metas else {}
    entries = []
    for i, sym in enumerate(panel.symbols):
        closes = panel.closes[i]
        trend = classify_trend(closes, config.window, config.thresholds)
        pegged = filter_pegged(closes, config.peg_vol)
        if sym not in passed and sym not in config.include_list:
            reason = f"rank: outside top {config.top_n} by market cap and volume"
        elif pegged:
            reason = "pegged"
        elif trend not in (TrendClass.UPWARD, TrendClass.VOLATILE):
            reason = f"trend: {trend.value}"
        else:
            reason = ""
        entries.append(
            UniverseEntry(sym, caps.get(sym), vols.get(sym), trend, pegged, admitted=not reason, reason=reason)
        )
    return UniverseReport(tuple(entries))


def listing_snapshot_metas() -> list[AssetMeta]:
    """Top-10 listing snapshot (market cap and 24h volume in USD) used as a fixture."""
    rows = [
        ("BTC", 2.3e12, 23.21e9),
        ("ETH", 540e9, 18.29e9),
        ("XRP", 179e9, 3.19e9),
        ("USDT", 171e9, 80.47e9),
        ("BNB", 149e9, 4.56e9),
        ("SOL", 131e9, 3.4e9),
        ("USDC", 74e9, 8.92e9),
        ("DOGE", 40e9, 1.69e9),
        ("TRX", 33e9, 691e6),
        ("ADA", 32e9, 756e6),
    ]
    return [AssetMeta(*r) for r in rows]
