"""
Performance metrics on an equity curve
======================================

Build a small equity curve by hand and read off ROI, Sharpe, Sortino,
maximum drawdown and Ret/DD. All ratios use daily simple returns and a
365-day year.
"""

import numpy as np

from riskalloc import metrics as M

# a curve that rises, gives back part of the gain, then recovers
values = np.array([1.00, 1.04, 1.08, 1.02, 0.99, 1.03, 1.10, 1.12])
r = values[1:] / values[:-1] - 1

print("ROI      ", round(M.roi(values), 4))
print("Sharpe   ", round(M.sharpe(r), 3))
print("Sortino  ", round(M.sortino(r), 3))
print("MDD      ", round(M.mdd(values), 4))
print("Ret/DD   ", round(M.ret_dd(M.roi(values), M.mdd(values)), 3))

# the drawdown series shows where the worst trough sits
print("drawdowns", np.round(M.drawdown_series(values), 4))

# a curve that never falls has no drawdown, so Ret/DD is undefined
rising = np.cumprod(np.full(10, 1.01)) / 1.01
print("Ret/DD on a rising curve:", M.ret_dd(M.roi(rising), M.mdd(rising)))

# alpha and beta against a benchmark that moves half as much
bench = r / 2
alpha, beta = M.alpha_beta(r, bench)
print(f"beta vs half-size benchmark = {beta:.3f}, alpha = {alpha:.2e}")
