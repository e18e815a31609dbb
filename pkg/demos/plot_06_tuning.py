"""
Tuning the drawdown bands
=========================

Grid-search the three band thresholds on a regime-switching panel and rank
schedules by Ret/DD. A seeded random search covers the same ground with a
fixed budget.
"""

from riskalloc.engine import BacktestConfig
from riskalloc.market_data import synth_generate
from riskalloc.report import render_tune_table
from riskalloc.tuner import GridSpec, SearchBounds, grid_search, random_search

panel = synth_generate("regime_switch", 3, 240, seed=9)
grid = GridSpec(
    {
        "threshold1": [0.01, 0.015, 0.02],
        "threshold2": [0.03, 0.04, 0.05],
        "threshold3": [0.06, 0.08, 0.10],
    }
)
result = grid_search(panel, BacktestConfig(), grid, n_jobs=2)
print(render_tune_table(result.to_dict()))

# where does the default 2/4/6% schedule land?
for i, t in enumerate(result.ranked):
    if t.params[:3] == (0.02, 0.04, 0.06):
        print(f"default schedule ranks {i + 1} of {len(result.ranked)}")

sampled = random_search(panel, BacktestConfig(), SearchBounds(), n_trials=10, seed=0)
print("random search best:", {k: round(v, 4) for k, v in sampled.best.config_dict().items()})
