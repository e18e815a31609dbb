"""
Hybrid inverse-volatility / Sharpe weights
==========================================

Each asset's weight is half its normalized inverse volatility plus half its
normalized (floored) Sharpe ratio. Calm assets and strong assets both get
more capital; negative Sharpe assets only keep their volatility share.
"""

import numpy as np

from riskalloc.allocation import AllocConfig, AssetStats, estimate_stats, hybrid_weights
from riskalloc.market_data import synth_generate

# two hand cases: lower vol and higher Sharpe both favor the first asset
print(hybrid_weights([AssetStats("A", 0.1, 2.0), AssetStats("B", 0.2, 1.0)]).as_dict())
print(hybrid_weights([AssetStats("A", 0.1, 3.0), AssetStats("B", 0.1, 1.0)]).as_dict())

# a losing asset is floored at zero Sharpe
print(hybrid_weights([AssetStats("A", 0.1, 1.0), AssetStats("B", 0.1, -2.0)]).as_dict())

# on real-looking data the estimates use a trailing 30-day window only
panel = synth_generate("regime_switch", 4, 200, seed=3)
cfg = AllocConfig()
for day in (30, 90, 150):
    stats = estimate_stats(panel, day, cfg)
    w = hybrid_weights(stats)
    print(panel.dates[day], np.round(w.weights, 3))
