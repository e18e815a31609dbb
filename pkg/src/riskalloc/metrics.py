"""Performance measures for equity curves and return streams.

Conventions: simple returns, sample (n-1) standard deviation, crypto
calendar annualization (365 periods per year), risk-free rate 0 unless
given. Fractions stay fractions; percent formatting is a rendering concern.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .errors import DataError, NumericError

PERIODS_PER_YEAR = 365
ANNUALIZATION = math.sqrt(PERIODS_PER_YEAR)


@dataclass(frozen=True)
class EquityCurve:
    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if len(values) != len(self.dates):
            raise DataError("equity dates and values differ in length", "bad_curve")
        if len(values) and values[0] != 1.0:
            raise DataError("equity curve must start at 1.0", "bad_curve")
        if np.any(values <= 0):
            raise DataError("equity values must be positive", "bad_curve")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def returns(self) -> np.ndarray:
        return self.values[1:] / self.values[:-1] - 1.0


@dataclass(frozen=True)
class TradeRecord:
    symbol: str
    entry_date: dt.date
    exit_date: dt.date
    realized_pnl: float

    @property
    def win(self) -> bool:
        return self.realized_pnl > 0


@dataclass(frozen=True)
class MetricsReport:
    roi: float
    sharpe: float | None
    sortino: float | None
    mdd: float
    ret_dd: float | None
    alpha: float | None
    beta: float | None
    vol: float
    turnover: float
    win_rate: float
    win_positions: int
    total_positions: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        names = [f.name for f in fields(cls)]
        missing = set(names) - set(d)
        if missing:
            raise DataError(f"metrics missing keys {sorted(missing)}", "bad_report")
        return cls(**{k: d[k] for k in names})


def _values(curve) -> np.ndarray:
    return np.asarray(getattr(curve, "values", curve), dtype=float)


def roi(curve) -> float:
    v = _values(curve)
    if v.size < 2:
        raise DataError("roi needs at least 2 equity values", "too_short")
    return float((v[-1] - v[0]) / v[0])


def degenerate_std(x: np.ndarray, rel: float = 1e-10) -> bool:
    """Zero sample std up to rounding noise (constant paths rebuilt from prices are not exactly constant)."""
    sd = float(np.std(x, ddof=1))
    return sd <= rel * float(np.abs(x).max()) or sd == 0.0


def sharpe(returns, rf: float = 0.0, annualization: float = ANNUALIZATION) -> float:
    x = np.asarray(returns, dtype=float) - rf
    if x.size < 2:
        raise DataError("sharpe needs at least 2 returns", "too_short")
    if degenerate_std(x):
        raise NumericError("degenerate volatility", "degenerate_volatility")
    return float(x.mean() / x.std(ddof=1) * annualization)


def downside_deviation(returns, rf: float = 0.0) -> float:
    x = np.minimum(np.asarray(returns, dtype=float) - rf, 0.0)
    return float(np.sqrt(np.mean(x**2)))


def sortino(returns, rf: float = 0.0, annualization: float = ANNUALIZATION) -> float:
    """Mean excess return over downside deviation.

    The downside deviation averages ``min(r - rf, 0)**2`` over *all*
    periods, not only the losing ones.
    """
    x = np.asarray(returns, dtype=float) - rf
    if x.size < 2:
        raise DataError("sortino needs at least 2 returns", "too_short")
    if not np.any(x < 0):
        raise NumericError("no downside", "no_downside")
    return float(x.mean() / downside_deviation(x) * annualization)


def mdd(curve) -> float:
    """Largest peak-to-trough decline as a fraction of the peak (one pass)."""
    worst = 0.0
    peak = -math.inf
    for v in _values(curve):
        if v > peak:
            peak = v
        else:
            dd = (peak - v) / peak
            if dd > worst:
                worst = dd
    return float(worst)


def drawdown_series(curve) -> np.ndarray:
    v = _values(curve)
    peak = np.maximum.accumulate(v)
    return (peak - v) / peak


def ret_dd(roi_value: float, mdd_value: float) -> float | None:
    if mdd_value < 0:
        raise DataError("mdd must be non-negative", "bad_mdd")
    if mdd_value == 0:
        return None
    return roi_value / mdd_value


def alpha_beta(strategy_returns, benchmark_returns, rf: float = 0.0) -> tuple[float, float]:
    """OLS of strategy excess returns on benchmark excess returns.

    Returns ``(alpha, beta)`` with the daily intercept annualized by 365.
    """
    y = np.asarray(strategy_returns, dtype=float) - rf
    x = np.asarray(benchmark_returns, dtype=float) - rf
    if x.shape != y.shape:
        raise DataError("strategy and benchmark returns differ in length", "length_mismatch")
    if x.size < 3:
        raise DataError("alpha/beta need at least 3 observations", "too_short")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-28 * max(1.0, float(x @ x)):
        raise NumericError("zero benchmark variance", "degenerate_benchmark")
    beta = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - beta * x.mean())
    return intercept * PERIODS_PER_YEAR, beta


def annualized_vol(returns, annualization: float = ANNUALIZATION) -> float:
    x = np.asarray(returns, dtype=float)
    if x.size < 2:
        return 0.0
    return float(x.std(ddof=1) * annualization)


def step_turnover(before, after) -> np.ndarray:
    """Half the L1 distance between paired weight rows."""
    before = np.atleast_2d(np.asarray(before, dtype=float))
    after = np.atleast_2d(np.asarray(after, dtype=float))
    return 0.5 * np.abs(after - before).sum(axis=1)


def turnover(weight_history: Sequence) -> float:
    """Mean one-way turnover between consecutive weight snapshots."""
    w = np.asarray([getattr(x, "weights", x) for x in weight_history], dtype=float)
    if len(w) < 2:
        raise DataError("turnover needs at least 2 weight snapshots", "too_short")
    return float(step_turnover(w[:-1], w[1:]).mean())


def trade_stats(trades: Sequence[TradeRecord]) -> tuple[float, int, int]:
    total = len(trades)
    wins = sum(1 for t in trades if t.win)
    return (wins / total if total else 0.0), wins, total


def _or_none(fn, *args):
    try:
        return fn(*args)
    except (NumericError, DataError):
        return None


def summarize(
    curve,
    benchmark_returns=None,
    turnover_value: float = 0.0,
    trades: Sequence[TradeRecord] = (),
    rf: float = 0.0,
    annualization: float = ANNUALIZATION,
) -> MetricsReport:
    """Build a MetricsReport; ratios that are undefined on this curve become ``None``."""
    v = _values(curve)
    r = v[1:] / v[:-1] - 1.0
    total_roi = roi(v)
    max_dd = mdd(v)
    alpha = beta = None
    if benchmark_returns is not None:
        ab = _or_none(alpha_beta, r, benchmark_returns, rf)
        if ab is not None:
            alpha, beta = ab
    win_rate, wins, total = trade_stats(trades)
    return MetricsReport(
        roi=total_roi,
        sharpe=_or_none(sharpe, r, rf, annualization),
        sortino=_or_none(sortino, r, rf, annualization),
        mdd=max_dd,
        ret_dd=ret_dd(total_roi, max_dd),
        alpha=alpha,
        beta=beta,
        vol=annualized_vol(r, annualization),
        turnover=float(turnover_value),
        win_rate=win_rate,
        win_positions=wins,
        total_positions=total,
    )
