"""
Drawdown bands and the cooldown
===============================

Exposure is cut in steps as equity falls from its high-water mark: 80% past
a 2% drawdown, 60% past 4%, flat at 6%. After a liquidation the book stays
flat for the cooldown, then re-enters fully with the high-water mark reset.
"""

from riskalloc.risk import RiskConfig, band_multiplier, initial_state, step

for dd in (0.0, 0.019, 0.02, 0.039, 0.04, 0.059, 0.06, 0.2):
    print(f"drawdown {dd:5.3f} -> multiplier {band_multiplier(dd)}")

# trace one liquidation by hand
path = [100.0, 99.0, 97.0, 95.5, 93.5, 93.0, 94.0, 96.0]
state = initial_state(path[0])
for e in path:
    state, m = step(state, e)
    print(f"equity {e:6.1f}  multiplier {m:.1f}  hwm {state.high_water_mark:6.1f}  cooldown {state.cooldown_remaining}")

# a longer cooldown keeps the book flat for more days
cfg = RiskConfig(cooldown_days=3)
state = initial_state(100.0)
ms = []
for e in [100, 93, 92, 92, 92, 92]:
    state, m = step(state, e, cfg)
    ms.append(m)
print("three-day cooldown:", ms)
