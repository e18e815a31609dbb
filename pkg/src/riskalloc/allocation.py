"""Rolling volatility/Sharpe estimates and the 50:50 inverse-vol / Sharpe weight blend."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, NumericError
from .market_data import AlignedPanel
from .metrics import degenerate_std


@dataclass(frozen=True)
class AssetStats:
    symbol: str
    sigma: float
    sharpe: float


@dataclass(frozen=True)
class WeightVector:
    symbols: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.symbols),):
            raise DataError("weights and symbols differ in length", "bad_weights")
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "weights", w)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.symbols, self.weights.tolist()))


@dataclass(frozen=True)
class AllocConfig:
    vol_window: int = 30
    sharpe_window: int = 30
    sharpe_floor: float = 0.0

    def __post_init__(self):
        if self.vol_window < 2 or self.sharpe_window < 2:
            raise ConfigError("allocation windows must be >= 2", "bad_window")

    @property
    def lookback(self) -> int:
        return max(self.vol_window, self.sharpe_window)


def estimate_stats(panel: AlignedPanel, as_of: int, config: AllocConfig = AllocConfig()) -> list[AssetStats]:
    """Per-asset sigma and Sharpe from returns strictly before return index ``as_of``.

    ``panel.returns[:, as_of]`` is the return about to be earned; it and
    everything after it are never read.
    """
    if as_of < config.lookback or as_of > panel.returns.shape[1]:
        raise DataError(
            f"insufficient history: return index {as_of} needs {config.lookback} prior returns",
            "insufficient_history",
        )
    vol_block = panel.returns[:, as_of - config.vol_window : as_of]
    sr_block = panel.returns[:, as_of - config.sharpe_window : as_of]
    sigma = vol_block.std(axis=1, ddof=1)
    sr_sd = sr_block.std(axis=1, ddof=1)
    stats = []
    for i, sym in enumerate(panel.symbols):
        if degenerate_std(vol_block[i]) or degenerate_std(sr_block[i]):
            raise NumericError(f"degenerate volatility for {sym}", "degenerate_volatility")
        stats.append(AssetStats(sym, float(sigma[i]), float(sr_block[i].mean() / sr_sd[i])))
    return stats


def inverse_vol_weights(sigma) -> np.ndarray:
    inv = 1.0 / np.asarray(sigma, dtype=float)
    return inv / inv.sum()


def sharpe_weights(sharpes, floor: float = 0.0) -> np.ndarray | None:
    """Sharpe-proportional weights after flooring; ``None`` when nothing is above the floor."""
    s = np.maximum(np.asarray(sharpes, dtype=float), floor)
    total = s.sum()
    if total <= 0:
        return None
    return s / total


def hybrid_weights(stats: Sequence[AssetStats], sharpe_floor: float = 0.0) -> WeightVector:
    """Blend normalized inverse-vol and floored Sharpe weights 50:50.

    If no asset has a Sharpe above the floor the Sharpe half falls back to
    the inverse-vol half, so the result is pure inverse-vol.
    """
    if not stats:
        raise DataError("hybrid_weights needs at least one asset", "empty_stats")
    sigma = np.array([s.sigma for s in stats])
    if np.any(~(sigma > 0)):
        raise NumericError("all sigma must be positive", "degenerate_volatility")
    w_iv = inverse_vol_weights(sigma)
    w_s = sharpe_weights([s.sharpe for s in stats], sharpe_floor)
    if w_s is None:
        w_s = w_iv
    w = 0.5 * w_iv + 0.5 * w_s
    return WeightVector(tuple(s.symbol for s in stats), w / w.sum())


def equal_weights(n: int, symbols: Sequence[str] | None = None) -> WeightVector:
    if n < 1:
        raise ConfigError("equal_weights needs n >= 1", "bad_count")
    symbols = tuple(symbols) if symbols is not None else tuple(f"A{i}" for i in range(n))
    return WeightVector(symbols, np.full(n, 1.0 / n))
