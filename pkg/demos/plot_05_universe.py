"""
Screening a universe
====================

Keep assets inside the top N by both market cap and 24h volume, drop
stablecoins by their near-zero volatility, and keep only upward or volatile
trends. Symbols outside the listing snapshot can be added by include_list,
but they still face the peg and trend checks.
"""

import datetime as dt

import numpy as np

from riskalloc.market_data import AlignedPanel, gbm_returns
from riskalloc.universe import ScreenConfig, classify_trend, rank_screen, select_universe, listing_snapshot_metas, trend_fit

metas = listing_snapshot_metas()
print("top 5 by both:", sorted(rank_screen(metas, 5)))
print("top 10 by both:", sorted(rank_screen(metas, 10)))


def path(drift, vol, seed, n=120):
    r = gbm_returns(np.random.default_rng(seed), n - 1, drift, vol)
    return 100 * np.concatenate([[1.0], np.cumprod(1 + r)])


plan = {
    "BTC": (1.0, 0.3, 0), "ETH": (1.0, 0.3, 0), "TRX": (1.0, 0.3, 0), "PAXG": (1.0, 0.3, 0),
    "SOL": (0.0, 0.8, 2), "XRP": (0.0, 0.8, 2), "BNB": (0.0, 0.8, 2),
    "DOGE": (-1.0, 0.3, 1), "ADA": (0.0, 0.03, 0),
}
closes = {s: (i + 1) * path(*p) for i, (s, p) in enumerate(plan.items())}
rng = np.random.default_rng(1)
closes["USDT"] = 1 + 0.0005 * rng.choice([-1.0, 1.0], 120)
closes["USDC"] = 1 + 0.0005 * rng.choice([-1.0, 1.0], 120)

for sym in ("BTC", "SOL", "DOGE", "ADA"):
    fit = trend_fit(closes[sym], 90)
    print(f"{sym:5s} growth {fit.growth:+.2f}  r2 {fit.r2:.2f}  vol {fit.vol:.2f}  -> {classify_trend(closes[sym]).value}")

syms = list(closes)
dates = tuple(dt.date(2023, 1, 1) + dt.timedelta(days=i) for i in range(120))
panel = AlignedPanel(dates, tuple(syms), np.array([closes[s] for s in syms]))
report = select_universe(metas, panel, ScreenConfig(include_list=("PAXG",)))
print("admitted:", report.admitted)
for e in report.entries:
    if not e.admitted:
        print(f"  {e.symbol:5s} rejected: {e.reason}")
