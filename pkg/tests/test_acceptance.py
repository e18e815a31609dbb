"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python3 tests/test_acceptance.py`` or as part of pytest; the
per-criterion lines are also echoed in the pytest terminal summary.
"""

import datetime as dt
import json
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from riskalloc import metrics as M
from riskalloc.allocation import AllocConfig, AssetStats, hybrid_weights
from riskalloc.cli import main as cli_main
from riskalloc.engine import BacktestConfig, TABLE_COLUMNS, run_backtest
from riskalloc.errors import NumericError
from riskalloc.market_data import synth_generate
from riskalloc.risk import RiskConfig, band_multiplier, initial_state, step
from riskalloc.tuner import GridSpec, grid_search
from riskalloc.universe import (
    AssetMeta,
    classify_trend,
    rank_screen,
    select_universe,
    listing_snapshot_metas,
)

from conftest import ARCHETYPES, GRID27, archetype_closes, panel_from

RESULTS: list[str] = []


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# ------------------------------------------------------------------ 1


def brute_mdd(v):
    # max over i <= j of (v_i - v_j) / v_i
    dd = (v[:, None] - v[None, :]) / v[:, None]
    return float(np.max(np.triu(dd), initial=0.0))


def test_c1_mdd_oracle():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(10, 501))
        v = np.concatenate([[1.0], np.cumprod(1 + rng.normal(0, 0.03, n - 1))])
        worst = max(worst, abs(M.mdd(v) - brute_mdd(v)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    assert verdict(1, ok, f"1000 curves, max |streaming - brute| = {worst:.1e}, {elapsed:.2f}s")


# ------------------------------------------------------------------ 2


def test_c2_sharpe_properties():
    rng = np.random.default_rng(202)
    worst_scale = worst_zero = 0.0
    raised = 0
    for _ in range(500):
        n = int(rng.integers(5, 300))
        x = rng.normal(rng.uniform(-0.01, 0.01), rng.uniform(0.001, 0.1), n)
        c = float(np.exp(rng.uniform(-6, 6)))
        worst_scale = max(worst_scale, abs(M.sharpe(c * x) - M.sharpe(x)))
        worst_zero = max(worst_zero, abs(M.sharpe(x - x.mean())))
        try:
            M.sharpe(np.full(n, rng.uniform(-0.05, 0.05)))
        except NumericError:
            raised += 1
    ok = worst_scale <= 1e-9 and worst_zero <= 1e-9 and raised == 500
    assert verdict(
        2, ok, f"500 trials, scale err {worst_scale:.1e}, zero-mean |S| {worst_zero:.1e}, degenerate errors {raised}/500"
    )


# ------------------------------------------------------------------ 3


def test_c3_weight_law():
    rng = np.random.default_rng(303)
    sum_err = 0.0
    negative = perm_fail = 0
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        sig = rng.uniform(1e-3, 2.0, n)
        srs = rng.uniform(-5, 5, n)
        stats = [AssetStats(f"A{i}", sig[i], srs[i]) for i in range(n)]
        w = hybrid_weights(stats).weights
        sum_err = max(sum_err, abs(w.sum() - 1.0))
        negative += int(np.any(w < 0))
        p = rng.permutation(n)
        wp = hybrid_weights([stats[i] for i in p]).weights
        perm_fail += int(not np.allclose(wp, w[p], rtol=0, atol=1e-12))
    a = hybrid_weights([AssetStats("a", 0.1, 2.0), AssetStats("b", 0.2, 1.0)]).weights.tolist()
    b = hybrid_weights([AssetStats("a", 0.1, 3.0), AssetStats("b", 0.1, 1.0)]).weights.tolist()
    hand = a == [2 / 3, 1 / 3] and b == [0.625, 0.375]
    ok = sum_err <= 1e-9 and negative == 0 and perm_fail == 0 and hand
    assert verdict(3, ok, f"1000 trials, sum err {sum_err:.1e}, negatives {negative}, perm failures {perm_fail}, hand cases {a}, {b}")


# ------------------------------------------------------------------ 4


def test_c4_band_table():
    probes = [0, 0.019, 0.02, 0.039, 0.04, 0.059, 0.06, 0.2]
    want = [1.0, 1.0, 0.8, 0.8, 0.6, 0.6, 0.0, 0.0]
    got = [band_multiplier(d) for d in probes]
    assert verdict(4, got == want, f"probes {probes} -> {got}")


# ------------------------------------------------------------------ 5


def cooldown_violations(path, config):
    state = initial_state(path[0])
    ms, hwms = [], []
    for e in path:
        state, m = step(state, e, config)
        ms.append(m)
        hwms.append(state.high_water_mark)
    bad = 0
    triggers = 0
    t = 0
    while t < len(path):
        liquidating = ms[t] == 0.0 and (t == 0 or ms[t - 1] > 0.0)
        if liquidating:
            triggers += 1
            c = config.cooldown_days
            flat = ms[t + 1 : t + 1 + c]
            if any(m != 0.0 for m in flat):
                bad += 1
            r = t + 1 + c
            if r < len(path) and (ms[r] != 1.0 or hwms[r] != path[r]):
                bad += 1
            t = r
        t += 1
    return triggers, bad


def test_c5_cooldown():
    rng = np.random.default_rng(505)
    triggered = violations = 0
    for _ in range(10_000):
        n = int(rng.integers(5, 60))
        path = 100 * np.cumprod(1 + rng.normal(0, rng.uniform(0.005, 0.05), n))
        cfg = RiskConfig(cooldown_days=int(rng.integers(0, 4)))
        tr, bad = cooldown_violations(path.tolist(), cfg)
        triggered += tr > 0
        violations += bad
    hand = [100.0, 99.0, 93.5, 93.5, 93.5, 94.0]
    state = initial_state(hand[0])
    trace = []
    for e in hand:
        state, m = step(state, e)
        trace.append(m)
    hand_ok = trace == [1.0, 1.0, 0.0, 0.0, 1.0, 1.0] and state.high_water_mark == 94.0
    ok = violations == 0 and triggered > 1000 and hand_ok
    assert verdict(5, ok, f"10000 paths ({triggered} liquidating), violations {violations}, hand trace {trace}")


# ------------------------------------------------------------------ 6


def crash_oracle(closes, fee_bps=4.0, window=30, bands=((0.02, 0.8), (0.04, 0.6), (0.06, 0.0)), cooldown=1):
    """Single-asset hand trace: exposure is just the band multiplier (one asset gets full weight).

    Re-derives the controller and the fee equation in closed form rather than
    calling the engine or the risk module.
    """
    f = fee_bps / 1e4
    equity, held = 1.0, 0.0
    peak, flat_left = 1.0, None
    curve = [1.0]
    for d in range(window, len(closes) - 1):
        if d > window:
            held *= closes[d] / closes[d - 1]
            equity = (equity - held_before) + held  # cash unchanged by price moves
            curve.append(equity)
        if flat_left is not None:
            if flat_left > 0:
                flat_left -= 1
                peak = max(peak, equity)
                m = 0.0
            else:
                flat_left, peak, m = None, equity, 1.0
        else:
            peak = max(peak, equity)
            dd = (peak - equity) / peak
            m = 1.0
            for th, mult in bands:
                if dd >= th:
                    m = mult
            if m == 0.0:
                flat_left = cooldown
        # E' = E - f |m E' - held|
        if m * (equity + f * held) / (1 + f * m) >= held:
            new_eq = (equity + f * held) / (1 + f * m)
        else:
            new_eq = (equity - f * held) / (1 - f * m)
        equity = new_eq
        held = m * equity
        held_before = held
    held_end = held * closes[-1] / closes[-2]
    curve.append(equity - held_before + held_end)
    return np.array(curve)


def test_c6_crash_protection():
    panel = synth_generate("crash", 1, 120, seed=1)
    managed = run_backtest(panel, BacktestConfig())
    unmanaged = run_backtest(panel, BacktestConfig(risk=None))
    oracle = crash_oracle(panel.closes[0], window=AllocConfig().lookback)
    oracle_err = float(np.max(np.abs(oracle - managed.equity.values)))
    oracle_mdd = M.mdd(oracle)
    below_unmanaged = managed.metrics.mdd < unmanaged.metrics.mdd
    below_bound = managed.metrics.mdd < 0.09
    ok = below_unmanaged and below_bound and oracle_err <= 1e-12
    assert verdict(
        6,
        ok,
        f"managed MDD {managed.metrics.mdd:.4f} vs unmanaged {unmanaged.metrics.mdd:.4f} "
        f"(strictly below: {below_unmanaged}); below 0.09: {below_bound}; "
        f"hand-trace oracle MDD {oracle_mdd:.4f}, max curve diff {oracle_err:.1e}",
    )


# ------------------------------------------------------------------ 7


def test_c7_no_lookahead():
    rng = np.random.default_rng(707)
    lookback = AllocConfig().lookback
    failures = 0
    for k in range(100):
        scenario = ["bull", "sideways", "crash", "regime_switch"][k % 4]
        panel = synth_generate(scenario, int(rng.integers(1, 5)), int(rng.integers(60, 160)), seed=int(rng.integers(0, 10_000)))
        t = int(rng.integers(lookback + 1, panel.n_dates))
        closes = panel.closes.copy()
        closes[:, t:] *= rng.uniform(0.3, 3.0, size=(closes.shape[0], 1))
        base = run_backtest(panel, BacktestConfig())
        pert = run_backtest(panel.with_closes(closes), BacktestConfig())
        # row j is decided at close lookback + j and held over the return ending at close lookback + j + 1
        applied = t - lookback
        if not np.array_equal(base.weights[:applied], pert.weights[:applied]):
            failures += 1
    assert verdict(7, failures == 0, f"100 probes, {failures} changed a weight applied on or before the perturbed day")


# ------------------------------------------------------------------ 8


def test_c8_engine_oracle():
    panel = synth_generate("regime_switch", 1, 200, seed=3)
    rep = run_backtest(panel, BacktestConfig(risk=None, fee_bps=0.0))
    s = AllocConfig().lookback
    ratio = panel.closes[0, -1] / panel.closes[0, s]
    err = abs(rep.equity.values[-1] - ratio)
    # controller off so every fee level trades the same weight path
    fixed = synth_generate("crash", 3, 150, seed=2)
    finals = [run_backtest(fixed, BacktestConfig(fee_bps=f, risk=None)).equity.values[-1] for f in (0, 4, 10, 50)]
    mono = all(b <= a for a, b in zip(finals, finals[1:]))
    ok = err <= 1e-9 and mono
    assert verdict(8, ok, f"price-ratio err {err:.1e}; finals at 0/4/10/50 bps {[round(float(x), 6) for x in finals]}")


# ------------------------------------------------------------------ 9


def exhaustive(panel):
    results = []
    for t1 in GRID27["threshold1"]:
        for t2 in GRID27["threshold2"]:
            for t3 in GRID27["threshold3"]:
                cfg = BacktestConfig(risk=RiskConfig(bands=((t1, 0.8), (t2, 0.6), (t3, 0.0))))
                results.append(((t1, t2, t3), run_backtest(panel, cfg).metrics.ret_dd))
    defined = [r for r in results if r[1] is not None]
    best_v = max(v for _, v in defined)
    return min(p for p, v in defined if v == best_v), best_v


def test_c9_tuner_equivalence():
    panel = synth_generate("regime_switch", 3, 240, seed=9)
    grid = GridSpec(GRID27)
    runs = {j: grid_search(panel, BacktestConfig(), grid, n_jobs=j) for j in (1, 2, 4)}
    blobs = {j: r.to_json() for j, r in runs.items()}
    identical = len(set(blobs.values())) == 1
    params, value = exhaustive(panel)
    best = runs[1].best
    match = best.params[:3] == params and best.objective == value
    ok = identical and match and len(runs[1].ranked) == 27
    assert verdict(9, ok, f"best {best.params[:3]} ret_dd {best.objective:.4f} vs oracle {params} {value:.4f}; JSON identical at 1/2/4 jobs: {identical}")


# ------------------------------------------------------------------ 10


def test_c10_universe_fixtures():
    top5 = rank_screen(listing_snapshot_metas(), 5)
    closes = {"BTC": archetype_closes("Upward"), "USDT": np.ones(120)}
    rep = select_universe([AssetMeta("BTC", 2, 1), AssetMeta("USDT", 1, 2)], panel_from(closes))
    labels = {k: classify_trend(archetype_closes(k)).value for k in ARCHETYPES}
    again = {k: classify_trend(archetype_closes(k)).value for k in ARCHETYPES}
    ok = top5 == {"BTC", "ETH", "USDT", "BNB"} and rep["USDT"].reason == "pegged" and labels == again and all(
        k == v for k, v in labels.items()
    )
    assert verdict(10, ok, f"top5 {sorted(top5)}; USDT reason {rep['USDT'].reason!r}; archetypes {labels}")


# ------------------------------------------------------------------ 11


def test_c11_report_shape(tmp_path, capsys):
    data, out = tmp_path / "data", tmp_path / "run"
    assert cli_main(["synth", "--scenario", "bull", "--assets", "3", "--days", "150", "--seed", "11", "--out", str(data)]) == 0
    capsys.readouterr()
    code = cli_main(["backtest", "--data-dir", str(data), "--out", str(out)])
    table = capsys.readouterr().out
    header = tuple(c.strip() for c in table.splitlines()[0].split("|"))
    rows = table.splitlines()[2:]
    doc = json.loads((out / "report.json").read_text())
    cli_main(["report", str(out)])
    again = capsys.readouterr().out
    ok = code == 0 and header == TABLE_COLUMNS and len(rows) == 4 and again == table and len(doc["strategies"]) == 4
    assert verdict(11, ok, f"header {' | '.join(header)}; {len(rows)} rows; re-render identical: {again == table}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
