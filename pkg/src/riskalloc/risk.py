"""Drawdown-banded exposure control with liquidation and a re-entry cooldown.

The controller is a small state machine advanced once per day with the
day's closing equity. Its output is the exposure multiplier to apply at the
next rebalance:

* drawdown below the first threshold: full exposure (1.0);
* inside a band: that band's multiplier (defaults 0.8 from 2%, 0.6 from 4%);
* at or beyond a zero-multiplier band (default 6%): liquidate, stay flat for
  ``cooldown_days`` further days, then re-enter at 1.0 with the high-water
  mark reset to the equity at re-entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ConfigError

DEFAULT_BANDS = ((0.02, 0.8), (0.04, 0.6), (0.06, 0.0))


@dataclass(frozen=True)
class RiskConfig:
    bands: tuple[tuple[float, float], ...] = DEFAULT_BANDS
    cooldown_days: int = 1

    def __post_init__(self):
        bands = tuple((float(t), float(m)) for t, m in self.bands)
        if not bands:
            raise ConfigError("risk config needs at least one band", "bad_bands")
        thresholds = [t for t, _ in bands]
        multipliers = [m for _, m in bands]
        if any(t <= 0 for t in thresholds):
            raise ConfigError("band thresholds must be positive", "bad_bands")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ConfigError(f"band thresholds must be strictly increasing: {thresholds}", "bad_bands")
        if any(b >= a for a, b in zip(multipliers, multipliers[1:])):
            raise ConfigError(f"band multipliers must be strictly decreasing: {multipliers}", "bad_bands")
        if any(not 0.0 <= m <= 1.0 for m in multipliers):
            raise ConfigError("band multipliers must lie in [0, 1]", "bad_bands")
        if self.cooldown_days < 0:
            raise ConfigError("cooldown_days must be >= 0", "bad_cooldown")
        object.__setattr__(self, "bands", bands)

    @classmethod
    def disabled(cls) -> "RiskConfig":
        return cls(bands=((math.inf, 1.0),), cooldown_days=0)

    @classmethod
    def from_pairs(cls, pairs: Sequence[dict], cooldown_days: int = 1) -> "RiskConfig":
        try:
            bands = tuple((p["threshold"], p["multiplier"]) for p in pairs)
        except (KeyError, TypeError):
            raise ConfigError("bands must be a list of {threshold, multiplier} objects", "bad_bands") from None
        return cls(bands=bands, cooldown_days=cooldown_days)

    def to_pairs(self) -> list[dict]:
        return [{"threshold": t, "multiplier": m} for t, m in self.bands]


@dataclass(frozen=True)
class RiskState:
    high_water_mark: float
    multiplier: float = 1.0
    cooldown_remaining: int = 0
    liquidated: bool = False


def drawdown(equity: float, hwm: float) -> float:
    if hwm <= 0:
        raise ConfigError("high-water mark must be positive", "bad_hwm")
    return max(0.0, (hwm - equity) / hwm)


def band_multiplier(dd: float, config: RiskConfig = RiskConfig()) -> float:
    """Exposure for drawdown ``dd``; bands are lower-inclusive (``dd >= threshold``)."""
    m = 1.0
    for threshold, mult in config.bands:
        if dd >= threshold:
            m = mult
        else:
            break
    return m


def initial_state(equity: float = 1.0) -> RiskState:
    return RiskState(high_water_mark=equity)


def step(state: RiskState, equity: float, config: RiskConfig = RiskConfig()) -> tuple[RiskState, float]:
    if state.liquidated:
        if state.cooldown_remaining > 0:
            new = replace(
                state,
                high_water_mark=max(state.high_water_mark, equity),
                multiplier=0.0,
                cooldown_remaining=state.cooldown_remaining - 1,
            )
            return new, 0.0
        return RiskState(high_water_mark=equity), 1.0

    hwm = max(state.high_water_mark, equity)
    target = band_multiplier(drawdown(equity, hwm), config)
    if target == 0.0:
        return RiskState(hwm, 0.0, config.cooldown_days, True), 0.0
    return RiskState(hwm, target), target


def run_path(equity_path: Sequence[float], config: RiskConfig = RiskConfig()) -> list[float]:
    """Multipliers emitted by stepping through a whole equity path."""
    state = initial_state(equity_path[0])
    out = []
    for e in equity_path:
        state, m = step(state, e, config)
        out.append(m)
    return out
