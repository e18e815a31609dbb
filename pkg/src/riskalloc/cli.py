"""Command-line entry point: ``synth``, ``fetch``, ``universe``, ``backtest``, ``tune``, ``report``.

Exit status is 0 on success, 1 for usage/config errors, 2 for data errors
and 3 for numeric (degenerate) errors. Failures print a single
``<kind>/<code>: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

from . import engine, market_data, report, tuner, universe
from .allocation import AllocConfig
from .errors import ConfigError, DataError, RiskAllocError
from .exchange_client import FetchRequest, fetch_klines, fixture_transport
from .risk import RiskConfig


def _read_json(path: str, what: str):
    if not os.path.isfile(path):
        raise DataError(f"missing {what} file {path}", "missing_file")
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", "parse_error") from None


def _check_keys(section: str, doc: dict, allowed: Sequence[str]) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{section} must be a JSON object", "bad_config")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {', '.join(unknown)}", "unknown_key")


def _date(value) -> dt.date | None:
    if value is None:
        return None
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"bad date {value!r}, expected YYYY-MM-DD", "bad_date") from None


@dataclass
class RunConfig:
    data_dir: str = "data"
    meta_file: str | None = None
    universe: str | list = "all"
    include_list: list = field(default_factory=list)
    start: str | None = None
    end: str | None = None
    alloc: dict = field(default_factory=lambda: {"vol_window": 30, "sharpe_window": 30, "sharpe_floor": 0.0})
    risk: dict = field(
        default_factory=lambda: {"enabled": True, "bands": RiskConfig().to_pairs(), "cooldown_days": 1}
    )
    fee_bps: float = 4.0
    benchmark: str = "equal_weight"
    baselines: list = field(default_factory=lambda: ["buy_and_hold", "equal_weight_daily", "single_asset:auto"])
    screen: dict = field(
        default_factory=lambda: {
            "top_n": 10,
            "window": 90,
            "peg_vol": 0.02,
            "thresholds": {"up": 0.2, "down": 0.2, "side": 0.1, "r2_min": 0.3, "vol_low": 0.4},
        }
    )
    out_dir: str = "run"
    n_jobs: int = 1

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str = ".") -> "RunConfig":
        _check_keys("config", doc, [f.name for f in fields(cls)])
        cfg = cls()
        for k, v in doc.items():
            if k in ("alloc", "risk", "screen"):
                default = getattr(cfg, k)
                _check_keys(k, v, list(default))
                merged = {**default, **v}
                if k == "screen" and "thresholds" in v:
                    _check_keys("screen.thresholds", v["thresholds"], list(default["thresholds"]))
                    merged["thresholds"] = {**default["thresholds"], **v["thresholds"]}
                setattr(cfg, k, merged)
            else:
                setattr(cfg, k, v)
        for k in ("data_dir", "meta_file", "out_dir"):
            p = getattr(cfg, k)
            if p is not None and not os.path.isabs(p):
                setattr(cfg, k, os.path.normpath(os.path.join(base_dir, p)))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        return cls.from_dict(_read_json(path, "config"), os.path.dirname(os.path.abspath(path)))

    def validate(self) -> None:
        if not os.path.isdir(self.data_dir):
            raise DataError(f"missing data directory {self.data_dir}", "missing_file")
        if self.meta_file is not None and not os.path.isfile(self.meta_file):
            raise DataError(f"missing meta file {self.meta_file}", "missing_file")
        if not (self.universe in ("all", "auto") or isinstance(self.universe, list)):
            raise ConfigError("universe must be 'all', 'auto' or a list of symbols", "bad_universe")
        if self.universe == "auto" and self.meta_file is None:
            raise ConfigError("universe 'auto' needs meta_file", "bad_universe")
        for b in self.baselines:
            if b != "single_asset:auto":
                engine.parse_baseline(b)
        self.backtest_config()
        self.screen_config()

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def risk_config(self) -> RiskConfig | None:
        if not self.risk.get("enabled", True):
            return None
        return RiskConfig.from_pairs(self.risk["bands"], int(self.risk["cooldown_days"]))

    def backtest_config(self, symbols: Sequence[str] | None = None) -> engine.BacktestConfig:
        try:
            alloc = AllocConfig(int(self.alloc["vol_window"]), int(self.alloc["sharpe_window"]), float(self.alloc["sharpe_floor"]))
        except (TypeError, ValueError):
            raise ConfigError("alloc windows must be integers", "bad_config") from None
        return engine.BacktestConfig(
            symbols=tuple(symbols) if symbols is not None else None,
            start=_date(self.start),
            end=_date(self.end),
            fee_bps=float(self.fee_bps),
            alloc=alloc,
            risk=self.risk_config(),
            benchmark=self.benchmark,
        )

    def screen_config(self) -> universe.ScreenConfig:
        s = self.screen
        return universe.ScreenConfig(
            top_n=int(s["top_n"]),
            include_list=tuple(self.include_list),
            window=int(s["window"]),
            thresholds=universe.TrendThresholds(**s["thresholds"]),
            peg_vol=float(s["peg_vol"]),
        )


# ------------------------------------------------------------ helpers


def _series_path(data_dir: str, symbol: str) -> str:
    return os.path.join(data_dir, f"{symbol}.csv")


def _symbols_in_dir(data_dir: str) -> list[str]:
    return sorted(os.path.splitext(f)[0] for f in os.listdir(data_dir) if f.endswith(".csv"))


def load_panel(data_dir: str, symbols: Sequence[str]) -> market_data.AlignedPanel:
    series = []
    for sym in symbols:
        path = _series_path(data_dir, sym)
        if not os.path.isfile(path):
            raise DataError(f"missing data file {path} for symbol {sym}", "missing_file")
        series.append(market_data.load_series(path, sym))
    return market_data.align(series)


def run_universe(cfg: RunConfig) -> universe.UniverseReport:
    if cfg.meta_file is None:
        raise ConfigError("universe selection needs meta_file", "bad_universe")
    metas = universe.load_metas(cfg.meta_file)
    candidates = [m.symbol for m in metas] + [s for s in cfg.include_list if s not in {m.symbol for m in metas}]
    for sym in candidates:
        if not os.path.isfile(_series_path(cfg.data_dir, sym)):
            raise DataError(f"no price data for symbol {sym} ({_series_path(cfg.data_dir, sym)})", "missing_file")
    panel = load_panel(cfg.data_dir, candidates)
    return universe.select_universe(metas, panel, cfg.screen_config())


def resolve_symbols(cfg: RunConfig) -> list[str]:
    if cfg.universe == "auto":
        admitted = run_universe(cfg).admitted
        if not admitted:
            raise DataError("universe selection admitted no symbols", "empty_universe")
        return admitted
    if cfg.universe == "all":
        syms = _symbols_in_dir(cfg.data_dir)
        if not syms:
            raise DataError(f"no CSV files in {cfg.data_dir}", "missing_file")
        return syms
    return list(cfg.universe)


def _baseline_kinds(cfg: RunConfig, symbols: Sequence[str]) -> list[str]:
    out = []
    for b in cfg.baselines:
        out.append(f"single_asset:{symbols[0]}" if b == "single_asset:auto" else b)
    return out


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# ------------------------------------------------------------ commands


def cmd_synth(args) -> int:
    series = market_data.synth_series(args.scenario, args.assets, args.days, args.seed if args.seed is not None else 0)
    out = args.out or "."
    try:
        os.makedirs(out, exist_ok=True)
        for s in series:
            market_data.write_csv(s, os.path.join(out, f"{s.symbol}.csv"))
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc.strerror}", "unwritable") from None
    print(f"wrote {len(series)} series to {out}")
    return 0


def cmd_fetch(args) -> int:
    out = args.out or "."
    start, end = _date(args.start), _date(args.end)
    if start is None or end is None:
        raise ConfigError("fetch needs --start and --end", "bad_range")
    for sym in args.symbols.split(","):
        sym = sym.strip()
        req = FetchRequest(sym, start, end, out)
        transport = fixture_transport(args.fixtures, sym) if (args.offline or args.fixtures) else None
        s = fetch_klines(req, transport=transport)
        print(f"{sym}: {len(s)} bars -> {os.path.join(out, sym + '.csv')}")
    return 0


def _run_config(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.load(args.config)
    else:
        overrides = {}
        if getattr(args, "data_dir", None):
            overrides["data_dir"] = args.data_dir
        if getattr(args, "meta", None):
            overrides["meta_file"] = args.meta
        cfg = RunConfig.from_dict(overrides, os.getcwd())
    if args.out:
        cfg.out_dir = args.out
    return cfg


def cmd_universe(args) -> int:
    cfg = _run_config(args)
    rep = run_universe(cfg)
    text = rep.to_json()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_text(os.path.join(args.out, "universe.json"), text + "\n")
    print(text)
    return 0


def cmd_backtest(args) -> int:
    cfg = _run_config(args)
    if args.risk == "off":
        cfg.risk = {**cfg.risk, "enabled": False}
    if args.no_baselines:
        cfg.baselines = []
    symbols = resolve_symbols(cfg)
    bt = cfg.backtest_config(symbols)
    kinds = _baseline_kinds(cfg, symbols)
    needed = list(symbols) + [engine.parse_baseline(k)[1] for k in kinds if k.startswith("single_asset:")]
    if bt.benchmark != "equal_weight":
        needed.append(bt.benchmark)
    panel = load_panel(cfg.data_dir, list(dict.fromkeys(needed)))
    reports = [engine.run_backtest(panel, bt)]
    reports += [engine.run_baseline(panel, k, bt) for k in kinds]
    effective = cfg.to_dict()
    effective["universe_resolved"] = list(symbols)
    report.write_run(cfg.out_dir, effective, reports)
    sys.stdout.write(report.render_table(engine.compare(reports)))
    return 0


def cmd_report(args) -> int:
    run_dir = args.run_dir or args.out
    if not run_dir:
        raise ConfigError("report needs a run directory", "missing_argument")
    sys.stdout.write(report.render_doc(report.load_report(run_dir)))
    return 0


def cmd_tune(args) -> int:
    cfg = _run_config(args)
    grid = tuner.GridSpec.from_dict(_read_json(args.grid, "grid"))
    symbols = resolve_symbols(cfg)
    bt = cfg.backtest_config(symbols)
    if bt.risk is None:
        bt = replace(bt, risk=RiskConfig())
    panel = load_panel(cfg.data_dir, symbols)
    result = tuner.grid_search(panel, bt, grid, n_jobs=args.jobs or cfg.n_jobs)
    doc = result.to_dict()
    doc["grid"] = grid.to_dict()
    doc["config"] = {**cfg.to_dict(), "universe_resolved": list(symbols)}
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_text(os.path.join(cfg.out_dir, "tune.json"), json.dumps(doc, indent=2) + "\n")
    sys.stdout.write(report.render_tune_table(doc))
    return 0


# ------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, "usage")


def build_parser() -> argparse.ArgumentParser:
    def add_globals(p, suppress):
        d = argparse.SUPPRESS if suppress else None
        p.add_argument("--config", default=d, help="run config JSON")
        p.add_argument("--out", default=d, help="output directory")
        p.add_argument("--seed", type=int, default=d)
        p.add_argument("--offline", action="store_true", default=d if suppress else False)

    parser = _Parser(prog="riskalloc", description=__doc__.splitlines()[0])
    add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="write seeded synthetic CSVs")
    add_globals(p, True)
    p.add_argument("--scenario", required=True, choices=market_data.SCENARIOS)
    p.add_argument("--assets", type=int, default=1)
    p.add_argument("--days", type=int, default=365)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fetch", help="download daily klines into CSVs")
    add_globals(p, True)
    p.add_argument("--symbols", required=True, help="comma-separated exchange pairs, e.g. BTCUSDT,ETHUSDT")
    p.add_argument("--start", required=True)
    p.add_argument("--end", required=True, help="exclusive end date")
    p.add_argument("--fixtures", help="directory of recorded <SYMBOL>.json responses")
    p.set_defaults(func=cmd_fetch)

    for name, func, help_ in (
        ("universe", cmd_universe, "screen and classify candidate assets"),
        ("backtest", cmd_backtest, "run the managed strategy and baselines"),
        ("tune", cmd_tune, "grid-search the drawdown bands"),
    ):
        p = sub.add_parser(name, help=help_)
        add_globals(p, True)
        p.add_argument("--data-dir")
        p.add_argument("--meta")
        if name == "backtest":
            p.add_argument("--risk", choices=("on", "off"), default="on")
            p.add_argument("--no-baselines", action="store_true")
        if name == "tune":
            p.add_argument("--grid", required=True)
            p.add_argument("--jobs", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="re-render a run directory's comparison table")
    add_globals(p, True)
    p.add_argument("run_dir", nargs="?")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "command", None):
            raise ConfigError("missing subcommand (synth, fetch, universe, backtest, tune, report)", "usage")
        return args.func(args)
    except RiskAllocError as exc:
        print(exc.one_line(), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
