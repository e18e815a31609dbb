"""Risk-managed crypto portfolio allocation backtesting.

Pipeline: screen a universe, measure candidates, weight them with a 50:50
inverse-volatility / Sharpe blend, and scale exposure down in drawdown
bands with liquidation and a re-entry cooldown.
"""

from .allocation import AllocConfig, AssetStats, WeightVector, equal_weights, estimate_stats, hybrid_weights
from .engine import BacktestConfig, BacktestReport, compare, run_backtest, run_baseline
from .errors import ConfigError, DataError, NumericError, RiskAllocError
from .market_data import AlignedPanel, Bar, PriceSeries, align, load_series, simple_returns, synth_generate, write_csv
from .metrics import EquityCurve, MetricsReport, TradeRecord, alpha_beta, mdd, ret_dd, roi, sharpe, sortino, trade_stats, turnover
from .risk import RiskConfig, RiskState, band_multiplier, drawdown, step
from .tuner import GridSpec, TuneResult, grid_search, random_search
from .universe import AssetMeta, ScreenConfig, TrendClass, classify_trend, filter_pegged, rank_screen, select_universe

__version__ = "0.1.0"
