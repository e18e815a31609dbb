"""Run-directory output (JSON + CSV) and plain-text comparison tables."""

from __future__ import annotations

import csv
import json
import os
from typing import Iterable, Sequence

from .engine import TABLE_COLUMNS, BacktestReport, compare, display_name
from .errors import DataError

PERCENT_COLUMNS = {"ROI", "MDD", "Turnover"}


def fmt_cell(column: str, value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, str):
        return value
    if column in PERCENT_COLUMNS:
        return f"{value * 100:.1f}%"
    return f"{value:.2f}"


def render_table(rows: Sequence[dict], columns: Sequence[str] = TABLE_COLUMNS) -> str:
    cells = [[fmt_cell(c, row.get(c)) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[j]) for r in cells]) for j, c in enumerate(columns)]

    def line(values):
        parts = [v.ljust(w) if j == 0 else v.rjust(w) for j, (v, w) in enumerate(zip(values, widths))]
        return " | ".join(parts).rstrip()

    out = [line(columns), "-+-".join("-" * w for w in widths)]
    out.extend(line(r) for r in cells)
    return "\n".join(out) + "\n"


def strategy_entry(rep: BacktestReport) -> dict:
    return {
        "name": rep.name,
        "label": display_name(rep.name),
        "metrics": rep.metrics.to_dict(),
        "config_echo": rep.config_echo,
    }


def build_report_doc(run_config: dict, reports: Sequence[BacktestReport]) -> dict:
    return {"config": run_config, "strategies": [strategy_entry(r) for r in reports]}


def rows_from_doc(doc: dict) -> list[dict]:
    try:
        strategies = doc["strategies"]
        rows = []
        for s in strategies:
            m = s["metrics"]
            rows.append(
                {
                    "Methods": s["label"],
                    "Sharpe": m["sharpe"],
                    "Sortino": m["sortino"],
                    "ROI": m["roi"],
                    "MDD": m["mdd"],
                    "Ret/DD": m["ret_dd"],
                    "Alpha": m["alpha"],
                    "Beta": m["beta"],
                    "Turnover": m["turnover"],
                }
            )
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed report.json: missing {exc}", "bad_report") from None
    return rows


def render_doc(doc: dict) -> str:
    return render_table(rows_from_doc(doc))


def _write_rows(path: str, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        w.writerows(rows)


def write_run(out_dir: str, run_config: dict, reports: Sequence[BacktestReport]) -> dict:
    """Write report.json, table.txt and the primary strategy's CSVs; returns the report document."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out_dir}: {exc.strerror}", "unwritable") from None
    primary = reports[0]
    doc = build_report_doc(run_config, reports)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "table.txt"), "w", encoding="utf-8") as fh:
        fh.write(render_table(compare(reports)))
    _write_rows(
        os.path.join(out_dir, "equity.csv"),
        ["date", "value"],
        ((d.isoformat(), repr(float(v))) for d, v in zip(primary.equity.dates, primary.equity.values)),
    )
    _write_rows(
        os.path.join(out_dir, "weights.csv"),
        ["date", "cash", *primary.symbols],
        ([d.isoformat(), *(repr(float(x)) for x in row)] for d, row in zip(primary.rebalance_dates, primary.weights)),
    )
    _write_rows(
        os.path.join(out_dir, "trades.csv"),
        ["symbol", "entry_date", "exit_date", "realized_pnl", "win"],
        (
            [t.symbol, t.entry_date.isoformat(), t.exit_date.isoformat(), repr(t.realized_pnl), str(t.win).lower()]
            for t in primary.trades
        ),
    )
    return doc


def load_report(run_dir: str) -> dict:
    path = os.path.join(run_dir, "report.json")
    if not os.path.isfile(path):
        raise DataError(f"no report.json in {run_dir}", "missing_file")
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", "parse_error") from None


TUNE_COLUMNS = ("Rank", "t1", "t2", "t3", "m1", "m2", "m3", "Objective", "Sharpe", "ROI", "MDD", "Ret/DD")


def render_tune_table(result_doc: dict, top: int = 5) -> str:
    rows = []
    for i, entry in enumerate(result_doc["ranked"][:top]):
        c, m = entry["config"], entry["metrics"]
        rows.append(
            {
                "Rank": str(i + 1),
                "t1": f"{c['threshold1']:.3f}",
                "t2": f"{c['threshold2']:.3f}",
                "t3": f"{c['threshold3']:.3f}",
                "m1": f"{c['multiplier1']:.2f}",
                "m2": f"{c['multiplier2']:.2f}",
                "m3": f"{c['multiplier3']:.2f}",
                "Objective": entry["objective"],
                "Sharpe": m["sharpe"],
                "ROI": m["roi"],
                "MDD": m["mdd"],
                "Ret/DD": m["ret_dd"],
            }
        )
    return render_table(rows, TUNE_COLUMNS)
