import numpy as np
import pytest

from riskalloc.errors import ConfigError, DataError
from riskalloc.market_data import gbm_returns
from riskalloc.universe import (
    AssetMeta,
    ScreenConfig,
    TrendClass,
    classify_trend,
    filter_pegged,
    load_metas,
    rank_screen,
    select_universe,
    listing_snapshot_metas,
    trend_fit,
)

from conftest import ARCHETYPES, archetype_closes, panel_from, peg_closes, universe_closes

LISTED = {"BTC", "ETH", "XRP", "USDT", "BNB", "SOL", "USDC", "DOGE", "TRX", "ADA"}


def test_rank_screen_listing_snapshot():
    metas = listing_snapshot_metas()
    assert rank_screen(metas, 10) == LISTED
    assert rank_screen(metas, 5) == {"BTC", "ETH", "USDT", "BNB"}
    assert rank_screen([AssetMeta("X", 1.0, 1.0)], 1) == {"X"}


def test_rank_screen_properties():
    rng = np.random.default_rng(0)
    for _ in range(50):
        metas = [AssetMeta(f"S{i}", float(rng.integers(1, 5)), float(rng.integers(1, 5))) for i in range(12)]
        n = int(rng.integers(1, 12))
        got = rank_screen(metas, n)
        assert len(got) <= n
        by_cap = sorted(metas, key=lambda m: (-m.market_cap_usd, m.symbol))[:n]
        by_vol = sorted(metas, key=lambda m: (-m.volume_24h_usd, m.symbol))[:n]
        assert got == {m.symbol for m in by_cap} & {m.symbol for m in by_vol}


def test_rank_screen_errors():
    with pytest.raises(DataError):
        rank_screen([], 3)
    with pytest.raises(ConfigError):
        rank_screen(listing_snapshot_metas(), 0)


def test_exponential_growth_is_upward():
    closes = 100 * np.exp(0.002 * np.arange(120))
    fit = trend_fit(closes, 90)
    assert fit.growth == pytest.approx(0.73, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)
    assert classify_trend(closes, 90) is TrendClass.UPWARD


def test_constant_is_sideways():
    assert classify_trend(np.full(100, 5.0), 90) is TrendClass.SIDEWAYS


@pytest.mark.parametrize("kind", list(ARCHETYPES))
def test_archetypes(kind):
    assert classify_trend(archetype_closes(kind), 90).value == kind


def test_volatile_noise_fit():
    fit = trend_fit(archetype_closes("Volatile"), 90)
    assert fit.r2 < 0.30 and fit.vol > 0.40


@pytest.mark.parametrize("c", [1e-4, 0.37, 12.0, 5e5])
def test_scale_invariance(c):
    for kind in ARCHETYPES:
        closes = archetype_closes(kind)
        assert classify_trend(c * closes) is classify_trend(closes)


def test_classify_errors():
    with pytest.raises(DataError, match="longer than series"):
        classify_trend(np.ones(50), 90)
    with pytest.raises(ConfigError):
        classify_trend(np.ones(50), 20)


def test_filter_pegged():
    assert filter_pegged(np.ones(100))
    assert filter_pegged(peg_closes(120))
    r = gbm_returns(np.random.default_rng(11), 119, 0.0, 0.60)
    assert not filter_pegged(100 * np.concatenate([[1.0], np.cumprod(1 + r)]))
    assert filter_pegged(np.ones(31))
    with pytest.raises(DataError, match="31"):
        filter_pegged(np.ones(30))


def test_select_universe_seven_assets():
    panel = panel_from(universe_closes())
    report = select_universe(listing_snapshot_metas(), panel, ScreenConfig(include_list=("PAXG",)))
    assert set(report.admitted) == {"BTC", "ETH", "PAXG", "TRX", "SOL", "XRP", "BNB"}
    assert report["USDT"].reason == "pegged" and report["USDC"].reason == "pegged"
    assert report["DOGE"].reason == "trend: Declining"
    assert report["ADA"].reason == "trend: Sideways"
    assert report["PAXG"].cap_rank is None
    for e in report.entries:
        assert e.admitted == (e.reason == "")
    assert len(report.entries) == len(panel.symbols)


def test_include_list_still_filtered():
    closes = {"BTC": archetype_closes("Upward"), "FOO": archetype_closes("Declining")}
    report = select_universe([AssetMeta("BTC", 1, 1)], panel_from(closes), ScreenConfig(include_list=("FOO",)))
    assert report.admitted == ["BTC"]
    assert report["FOO"].reason == "trend: Declining"


def test_rank_rejection_reason():
    closes = {s: archetype_closes("Upward") for s in ("A", "B")}
    metas = [AssetMeta("A", 2, 2), AssetMeta("B", 1, 1)]
    report = select_universe(metas, panel_from(closes), ScreenConfig(top_n=1))
    assert report.admitted == ["A"]
    assert report["B"].reason.startswith("rank:")


def test_all_declining_admits_nothing():
    closes = {f"D{i}": (i + 1) * archetype_closes("Declining") for i in range(4)}
    metas = [AssetMeta(s, 1.0 + i, 1.0 + i) for i, s in enumerate(closes)]
    assert select_universe(metas, panel_from(closes)).admitted == []


def test_stablecoin_rejected_as_pegged():
    closes = {"BTC": archetype_closes("Upward"), "USDT": np.ones(120)}
    metas = [AssetMeta("BTC", 2, 1), AssetMeta("USDT", 1, 2)]
    report = select_universe(metas, panel_from(closes))
    assert report["USDT"].reason == "pegged"
    assert report.admitted == ["BTC"]


def test_select_universe_errors():
    panel = panel_from({"BTC": archetype_closes("Upward")})
    with pytest.raises(DataError, match="ZZZ"):
        select_universe([AssetMeta("BTC", 1, 1)], panel, ScreenConfig(include_list=("ZZZ",)))
    with pytest.raises(DataError, match="BTC"):
        select_universe([AssetMeta("ETH", 1, 1)], panel)


def test_report_json_roundtrip():
    import json

    report = select_universe(listing_snapshot_metas(), panel_from(universe_closes()), ScreenConfig(include_list=("PAXG",)))
    doc = json.loads(report.to_json())
    assert doc["admitted"] == report.admitted
    assert {r["trend"] for r in doc["symbols"]} <= {c.value for c in TrendClass}


def test_load_metas(tmp_path):
    p = tmp_path / "meta.csv"
    p.write_text("symbol,market_cap_usd,volume_24h_usd\nBTC,2.3e12,2.3e10\nETH,5.4e11,1.8e10\n")
    assert [m.symbol for m in load_metas(p)] == ["BTC", "ETH"]
    p.write_text("symbol,market_cap_usd,volume_24h_usd\n")
    with pytest.raises(DataError, match="no assets"):
        load_metas(p)
    p.write_text("sym,cap\nBTC,1\n")
    with pytest.raises(DataError, match="header"):
        load_metas(p)
