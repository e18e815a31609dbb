"""Daily-rebalancing backtest loop, baseline strategies and strategy comparison.

Timeline for one step ``d`` (a date index of the panel):

1. mark the book at close ``d``: equity ``E_d``, drifted weights;
2. the risk controller sees ``E_d`` and returns the exposure multiplier;
3. target weights are built from returns strictly before the one about to
   be earned (``panel.returns[:, d]``, close ``d`` -> ``d + 1``);
4. the book trades to ``multiplier * target`` at close ``d`` and pays
   ``fee_bps`` on the traded notional; anything not invested is cash at 0%;
5. holdings earn ``panel.returns[:, d]`` and ``E_{d+1}`` is recorded.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import metrics as M
from .allocation import AllocConfig, estimate_stats, hybrid_weights
from .errors import ConfigError, DataError
from .market_data import AlignedPanel
from .risk import RiskConfig, initial_state, step

BASELINE_KINDS = ("buy_and_hold", "equal_weight_daily", "single_asset")
TABLE_COLUMNS = ("Methods", "Sharpe", "Sortino", "ROI", "MDD", "Ret/DD", "Alpha", "Beta", "Turnover")


@dataclass(frozen=True)
class BacktestConfig:
    symbols: tuple[str, ...] | None = None
    start: dt.date | None = None
    end: dt.date | None = None
    fee_bps: float = 4.0
    alloc: AllocConfig = field(default_factory=AllocConfig)
    risk: RiskConfig | None = field(default_factory=RiskConfig)
    benchmark: str = "equal_weight"
    initial_capital: float = 1.0

    def __post_init__(self):
        if self.fee_bps < 0:
            raise ConfigError("fee_bps must be >= 0", "bad_fee")
        if self.start is not None and self.end is not None and not self.start < self.end:
            raise ConfigError("start must be before end", "bad_range")
        if self.initial_capital <= 0:
            raise ConfigError("initial_capital must be positive", "bad_capital")
        if self.symbols is not None:
            object.__setattr__(self, "symbols", tuple(self.symbols))

    def resolved_symbols(self, panel: AlignedPanel) -> tuple[str, ...]:
        return self.symbols if self.symbols is not None else panel.symbols

    def to_dict(self) -> dict:
        return {
            "symbols": list(self.symbols) if self.symbols is not None else None,
            "start": self.start.isoformat() if self.start else None,
            "end": self.end.isoformat() if self.end else None,
            "fee_bps": self.fee_bps,
            "alloc": {
                "vol_window": self.alloc.vol_window,
                "sharpe_window": self.alloc.sharpe_window,
                "sharpe_floor": self.alloc.sharpe_floor,
            },
            "risk": {
                "enabled": self.risk is not None,
                "bands": self.risk.to_pairs() if self.risk is not None else [],
                "cooldown_days": self.risk.cooldown_days if self.risk is not None else 0,
            },
            "benchmark": self.benchmark,
            "initial_capital": self.initial_capital,
        }


@dataclass
class BacktestReport:
    name: str
    symbols: tuple[str, ...]
    equity: M.EquityCurve
    rebalance_dates: tuple[dt.date, ...]
    drifted: np.ndarray  # pre-trade weights per rebalance, column 0 is cash
    weights: np.ndarray  # post-trade weights per rebalance, column 0 is cash
    multipliers: np.ndarray
    fees: np.ndarray
    trades: list[M.TradeRecord]
    metrics: M.MetricsReport
    config_echo: dict


# ------------------------------------------------------------ target rules

TargetRule = Callable[[AlignedPanel, int, np.ndarray, int], "np.ndarray | None"]


def hybrid_rule(alloc: AllocConfig) -> TargetRule:
    def rule(panel, as_of, drifted, k):
        return hybrid_weights(estimate_stats(panel, as_of, alloc), alloc.sharpe_floor).weights

    return rule


def buy_and_hold_rule(panel, as_of, drifted, k):
    n = len(panel.symbols)
    return np.full(n, 1.0 / n) if k == 0 else None


def equal_weight_rule(panel, as_of, drifted, k):
    n = len(panel.symbols)
    return np.full(n, 1.0 / n)


def single_asset_rule(panel, as_of, drifted, k):
    w = np.zeros(len(panel.symbols))
    w[0] = 1.0
    return w


# ------------------------------------------------------------ core loop


def _date_range(panel: AlignedPanel, config: BacktestConfig, min_start: int) -> tuple[int, int]:
    s = panel.index_of(config.start) if config.start is not None else min_start
    e = panel.index_of(config.end) if config.end is not None else panel.n_dates - 1
    if s < min_start:
        raise DataError(
            f"insufficient lookback history: start index {s} < required {min_start}",
            "insufficient_history",
        )
    if e <= s:
        raise DataError("backtest range must contain at least 2 dates", "bad_range")
    return s, e


def _trade_to(target: np.ndarray, holdings: np.ndarray, equity: float, fee_rate: float) -> tuple[float, np.ndarray]:
    """Post-fee equity and per-asset traded notional when rebalancing to ``target``.

    Solves ``E' = E - fee_rate * sum|target * E' - holdings|`` by fixed point;
    the map is a contraction with factor ``fee_rate * sum(target)``.
    """
    e_post = equity
    for _ in range(100):
        traded = np.abs(target * e_post - holdings)
        nxt = equity - fee_rate * traded.sum()
        if abs(nxt - e_post) <= 1e-16 * max(1.0, equity):
            e_post = nxt
            break
        e_post = nxt
    traded = np.abs(target * e_post - holdings)
    return e_post, traded


def benchmark_returns(panel: AlignedPanel, symbols: Sequence[str], benchmark: str, s: int, e: int) -> np.ndarray:
    if benchmark == "equal_weight":
        idx = [panel.column(x) for x in symbols]
        rel = panel.closes[idx, s : e + 1] / panel.closes[idx, s : s + 1]
        value = rel.mean(axis=0)
        return value[1:] / value[:-1] - 1.0
    return panel.returns[panel.column(benchmark), s:e]


def simulate(
    panel: AlignedPanel,
    config: BacktestConfig,
    rule: TargetRule,
    name: str,
    symbols: Sequence[str],
    min_start: int,
) -> BacktestReport:
    bench_syms = config.resolved_symbols(panel)
    for sym in list(symbols) + list(bench_syms):
        panel.column(sym)
    if config.benchmark != "equal_weight":
        panel.column(config.benchmark)
    sub = panel.select(symbols)
    s, e = _date_range(panel, config, min_start)
    n = len(symbols)
    fee_rate = config.fee_bps / 1e4
    cap = config.initial_capital

    holdings = np.zeros(n)
    cash = cap
    state = initial_state(1.0)
    steps = e - s
    equity = np.empty(steps + 1)
    equity[0] = 1.0
    drifted_hist = np.empty((steps, n + 1))
    weight_hist = np.empty((steps, n + 1))
    mult_hist = np.empty(steps)
    fee_hist = np.empty(steps)

    open_since: list[int | None] = [None] * n
    pnl = np.zeros(n)
    trades: list[M.TradeRecord] = []

    for k, d in enumerate(range(s, e)):
        total = cash + holdings.sum()
        drifted = holdings / total
        drifted_hist[k] = np.concatenate([[cash / total], drifted])

        if config.risk is not None:
            state, m = step(state, total / cap, config.risk)
        else:
            m = 1.0
        target = rule(sub, d, drifted, k)
        if target is None:
            eff = drifted
            post, traded = total, np.zeros(n)
        else:
            eff = m * np.asarray(target, dtype=float)
            post, traded = _trade_to(eff, holdings, total, fee_rate)
        new_holdings = eff * post
        cash = post - new_holdings.sum()
        weight_hist[k] = np.concatenate([[cash / post], eff])
        mult_hist[k] = m
        fee_hist[k] = total - post

        for i in range(n):
            was_open = open_since[i] is not None
            is_open = new_holdings[i] > 0
            if is_open and not was_open:
                open_since[i] = d
                pnl[i] = 0.0
            if was_open or is_open:
                pnl[i] -= fee_rate * traded[i] / cap
            if was_open and not is_open:
                trades.append(M.TradeRecord(symbols[i], panel.dates[open_since[i]], panel.dates[d], float(pnl[i])))
                open_since[i] = None

        gains = new_holdings * sub.returns[:, d]
        pnl += np.where([o is not None for o in open_since], gains / cap, 0.0)
        holdings = new_holdings + gains
        equity[k + 1] = (cash + holdings.sum()) / cap

    for i in range(n):
        if open_since[i] is not None:
            trades.append(M.TradeRecord(symbols[i], panel.dates[open_since[i]], panel.dates[e], float(pnl[i])))
    trades.sort(key=lambda t: (t.entry_date, t.symbol))

    curve = M.EquityCurve(panel.dates[s : e + 1], equity)
    bench = benchmark_returns(panel, bench_syms, config.benchmark, s, e)
    turnover = float(M.step_turnover(drifted_hist, weight_hist).mean())
    report_metrics = M.summarize(curve, bench, turnover, trades)
    echo = config.to_dict()
    echo["strategy"] = name
    echo["strategy_symbols"] = list(symbols)
    echo["start"] = panel.dates[s].isoformat()
    echo["end"] = panel.dates[e].isoformat()
    return BacktestReport(
        name=name,
        symbols=tuple(symbols),
        equity=curve,
        rebalance_dates=panel.dates[s:e],
        drifted=drifted_hist,
        weights=weight_hist,
        multipliers=mult_hist,
        fees=fee_hist,
        trades=trades,
        metrics=report_metrics,
        config_echo=echo,
    )


def run_backtest(panel: AlignedPanel, config: BacktestConfig = BacktestConfig(), name: str = "hybrid") -> BacktestReport:
    """Hybrid-weighted, risk-managed daily backtest over ``config.symbols``."""
    symbols = config.resolved_symbols(panel)
    return simulate(panel, config, hybrid_rule(config.alloc), name, symbols, config.alloc.lookback)


def parse_baseline(kind) -> tuple[str, str | None]:
    """Accept ``"buy_and_hold"``, ``"equal_weight_daily"``, ``"single_asset:BTC"`` or ``("single_asset", "BTC")``."""
    if isinstance(kind, (tuple, list)):
        base, arg = kind[0], (kind[1] if len(kind) > 1 else None)
    else:
        base, _, arg = str(kind).partition(":")
        arg = arg or None
    if base not in BASELINE_KINDS:
        raise ConfigError(f"unknown baseline {kind!r}; choose from {', '.join(BASELINE_KINDS)}", "bad_baseline")
    if (base == "single_asset") != (arg is not None):
        raise ConfigError(f"baseline {kind!r}: single_asset takes exactly one symbol", "bad_baseline")
    return base, arg


def run_baseline(panel: AlignedPanel, kind, config: BacktestConfig = BacktestConfig()) -> BacktestReport:
    """Unmanaged reference strategies over the same date range as ``run_backtest``.

    The default start still skips the allocation warm-up so baseline and
    strategy rows of a comparison cover identical days.
    """
    base, arg = parse_baseline(kind)
    cfg = BacktestConfig(
        symbols=config.symbols,
        start=config.start,
        end=config.end,
        fee_bps=config.fee_bps,
        alloc=config.alloc,
        risk=None,
        benchmark=config.benchmark,
        initial_capital=config.initial_capital,
    )
    min_start = 0 if config.start is not None else config.alloc.lookback
    if base == "single_asset":
        return simulate(panel, cfg, single_asset_rule, f"single_asset:{arg}", (arg,), min_start)
    rule = buy_and_hold_rule if base == "buy_and_hold" else equal_weight_rule
    return simulate(panel, cfg, rule, base, cfg.resolved_symbols(panel), min_start)


def display_name(name: str) -> str:
    base, _, arg = name.partition(":")
    return {
        "hybrid": "Hybrid (risk-managed)",
        "buy_and_hold": "Buy and Hold",
        "equal_weight_daily": "Equal weight (daily)",
        "single_asset": f"{arg} only",
    }.get(base, name)


def compare(reports: Sequence[tuple[str, BacktestReport]] | Sequence[BacktestReport]) -> list[dict]:
    """One row per strategy, in the given order, keyed by ``TABLE_COLUMNS``."""
    rows = []
    for item in reports:
        label, rep = item if isinstance(item, tuple) else (display_name(item.name), item)
        m = rep.metrics
        rows.append(
            {
                "Methods": label,
                "Sharpe": m.sharpe,
                "Sortino": m.sortino,
                "ROI": m.roi,
                "MDD": m.mdd,
                "Ret/DD": m.ret_dd,
                "Alpha": m.alpha,
                "Beta": m.beta,
                "Turnover": m.turnover,
            }
        )
    return rows
