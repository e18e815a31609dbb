"""Grid and seeded random search over drawdown band thresholds and multipliers."""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .engine import BacktestConfig, run_backtest
from .errors import ConfigError
from .market_data import AlignedPanel
from .metrics import MetricsReport
from .risk import RiskConfig

PARAMS = ("threshold1", "threshold2", "threshold3", "multiplier1", "multiplier2", "multiplier3")
OBJECTIVES = ("sharpe", "mdd_min", "ret_dd", "roi")


@dataclass(frozen=True)
class GridSpec:
    candidates: dict[str, tuple[float, ...]]
    objective: str = "ret_dd"

    def __post_init__(self):
        unknown = set(self.candidates) - set(PARAMS)
        if unknown:
            raise ConfigError(f"unknown grid parameters {sorted(unknown)}", "bad_grid")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}; choose from {', '.join(OBJECTIVES)}", "bad_grid")
        cands = {}
        for k, v in self.candidates.items():
            vals = tuple(float(x) for x in v)
            if not vals:
                raise ConfigError(f"grid parameter {k} has no candidates", "bad_grid")
            cands[k] = vals
        object.__setattr__(self, "candidates", cands)

    @classmethod
    def from_dict(cls, doc: dict) -> "GridSpec":
        if not isinstance(doc, dict):
            raise ConfigError("grid document must be a JSON object", "bad_grid")
        doc = dict(doc)
        objective = doc.pop("objective", "ret_dd")
        return cls({k: tuple(v) for k, v in doc.items()}, objective)

    def to_dict(self) -> dict:
        return {**{k: list(v) for k, v in self.candidates.items()}, "objective": self.objective}


@dataclass(frozen=True)
class Trial:
    params: tuple[float, ...]  # threshold1..3, multiplier1..3
    objective: float | None
    metrics: MetricsReport

    def config_dict(self) -> dict:
        return dict(zip(PARAMS, self.params))


@dataclass(frozen=True)
class TuneResult:
    objective: str
    ranked: tuple[Trial, ...]

    @property
    def best(self) -> Trial:
        return self.ranked[0]

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "ranked": [
                {"config": t.config_dict(), "objective": t.objective, "metrics": t.metrics.to_dict()}
                for t in self.ranked
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _base_params(base: BacktestConfig) -> tuple[float, ...]:
    risk = base.risk or RiskConfig()
    if len(risk.bands) != 3:
        raise ConfigError("tuning expects a three-band base risk config", "bad_bands")
    return tuple(t for t, _ in risk.bands) + tuple(m for _, m in risk.bands)


def risk_from_params(params: Sequence[float], cooldown_days: int = 1) -> RiskConfig:
    t1, t2, t3, m1, m2, m3 = params
    return RiskConfig(bands=((t1, m1), (t2, m2), (t3, m3)), cooldown_days=cooldown_days)


def admissible(params: Sequence[float]) -> bool:
    t1, t2, t3, m1, m2, m3 = params
    return 0 < t1 < t2 < t3 and 1.0 >= m1 > m2 > m3 >= 0.0


def grid_points(grid: GridSpec, base: BacktestConfig) -> list[tuple[float, ...]]:
    """Admissible parameter tuples in canonical (lexicographic) order."""
    defaults = _base_params(base)
    axes = [grid.candidates.get(p, (defaults[i],)) for i, p in enumerate(PARAMS)]
    points = sorted(set(itertools.product(*axes)))
    return [p for p in points if admissible(p)]


def objective_value(metrics: MetricsReport, objective: str) -> float | None:
    if objective == "mdd_min":
        return metrics.mdd
    return getattr(metrics, objective)


def _rank_key(trial: Trial, objective: str):
    v = trial.objective
    if v is None or (isinstance(v, float) and math.isnan(v)):
        # undefined objectives sort after every defined one
        return (1, 0.0, trial.params)
    return (0, v if objective == "mdd_min" else -v, trial.params)


def evaluate(panel: AlignedPanel, base: BacktestConfig, params: tuple[float, ...], objective: str) -> Trial:
    cooldown = base.risk.cooldown_days if base.risk is not None else 1
    cfg = replace(base, risk=risk_from_params(params, cooldown))
    m = run_backtest(panel, cfg).metrics
    return Trial(tuple(params), objective_value(m, objective), m)


def _evaluate_packed(args):
    return evaluate(*args)


def evaluate_all(
    panel: AlignedPanel, base: BacktestConfig, points: Sequence[tuple[float, ...]], objective: str, n_jobs: int = 1
) -> list[Trial]:
    jobs = [(panel, base, p, objective) for p in points]
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_evaluate_packed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_evaluate_packed, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))


def rank(trials: Sequence[Trial], objective: str) -> TuneResult:
    ordered = sorted(trials, key=lambda t: _rank_key(t, objective))
    return TuneResult(objective, tuple(ordered))


def grid_search(panel: AlignedPanel, base_config: BacktestConfig, grid: GridSpec, n_jobs: int = 1) -> TuneResult:
    """Backtest every admissible grid point and rank by the grid's objective.

    Ties on the objective go to the lexicographically smaller parameter
    tuple, so the ranking does not depend on ``n_jobs``.
    """
    points = grid_points(grid, base_config)
    if not points:
        raise ConfigError("grid admits no valid config (thresholds must increase, multipliers decrease)", "empty_grid")
    return rank(evaluate_all(panel, base_config, points, grid.objective, n_jobs), grid.objective)


@dataclass(frozen=True)
class SearchBounds:
    bounds: dict[str, tuple[float, float]] = field(
        default_factory=lambda: {
            "threshold1": (0.005, 0.05),
            "threshold2": (0.01, 0.08),
            "threshold3": (0.02, 0.15),
        }
    )

    def __post_init__(self):
        for k, (lo, hi) in self.bounds.items():
            if k not in PARAMS:
                raise ConfigError(f"unknown search parameter {k}", "bad_bounds")
            if lo > hi:
                raise ConfigError(f"bounds for {k} are reversed", "bad_bounds")


def sample_points(
    bounds: SearchBounds, base: BacktestConfig, n_trials: int, seed: int, max_draws: int = 100_000
) -> list[tuple[float, ...]]:
    """``n_trials`` uniform draws from ``bounds``, rejecting orderings the risk config forbids."""
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1", "bad_trials")
    defaults = _base_params(base)
    rng = np.random.default_rng(seed)
    out: list[tuple[float, ...]] = []
    for _ in range(max_draws):
        p = tuple(
            float(rng.uniform(*bounds.bounds[name])) if name in bounds.bounds else defaults[i]
            for i, name in enumerate(PARAMS)
        )
        if admissible(p):
            out.append(p)
            if len(out) == n_trials:
                return out
    raise ConfigError("bounds admit no valid config", "empty_bounds")


def random_search(
    panel: AlignedPanel,
    base_config: BacktestConfig,
    bounds: SearchBounds = SearchBounds(),
    n_trials: int = 20,
    seed: int = 0,
    objective: str = "ret_dd",
    n_jobs: int = 1,
) -> TuneResult:
    if objective not in OBJECTIVES:
        raise ConfigError(f"unknown objective {objective!r}", "bad_objective")
    points = sample_points(bounds, base_config, n_trials, seed)
    return rank(evaluate_all(panel, base_config, points, objective, n_jobs), objective)
