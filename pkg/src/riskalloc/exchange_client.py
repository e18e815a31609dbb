"""Download daily klines from a public exchange REST endpoint into canonical CSVs.

Only the unauthenticated klines endpoint is touched. The HTTP layer is a
small ``transport`` callable so tests (and ``--offline`` runs) replay
recorded responses instead of going to the network.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .errors import ConfigError, DataError
from .market_data import Bar, PriceSeries, load_series, validate_bars, write_csv

log = logging.getLogger(__name__)

KLINES_URL = "https://fapi.binance.com/fapi/v1/klines"
PAGE_LIMIT = 1000
DAY_MS = 86_400_000
RETRY_STATUSES = (418, 429, 500, 502, 503, 504)


class Response(NamedTuple):
    status: int
    body: object
    headers: dict


Transport = Callable[[str, dict], Response]


class FetchError(DataError):
    pass


@dataclass(frozen=True)
class FetchRequest:
    symbol: str
    start: dt.date
    end: dt.date  # exclusive: the bar dated ``end`` is not fetched
    out_dir: str
    interval: str = "1d"

    def __post_init__(self):
        if not self.start < self.end:
            raise ConfigError("fetch start must be before end", "bad_range")
        if self.interval != "1d":
            raise ConfigError("only the 1d interval is supported", "bad_interval")


def date_to_ms(d: dt.date) -> int:
    return int(dt.datetime(d.year, d.month, d.day, tzinfo=dt.timezone.utc).timestamp() * 1000)


def ms_to_date(ms: int) -> dt.date:
    return dt.datetime.fromtimestamp(ms / 1000, tz=dt.timezone.utc).date()


def requests_transport(timeout: float = 10.0) -> Transport:
    import requests

    session = requests.Session()

    def get(url: str, params: dict) -> Response:
        r = session.get(url, params=params, timeout=timeout)
        try:
            body = r.json()
        except ValueError:
            body = r.text
        return Response(r.status_code, body, dict(r.headers))

    return get


class ReplayTransport:
    """Serves recorded responses.

    A recording is a JSON list of ``{"params": {...}, "status": int, "body": ...}``.
    A request is answered by the first unused entry whose recorded params
    are a subset of the request's params, so a rate-limit response followed
    by a success for the same page replays in order.
    """

    def __init__(self, exchanges: list[dict]):
        self._pending = list(exchanges)
        self.calls: list[dict] = []

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ReplayTransport":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def __call__(self, url: str, params: dict) -> Response:
        self.calls.append(dict(params))
        for i, ex in enumerate(self._pending):
            want = ex.get("params", {})
            if all(params.get(k) == v for k, v in want.items()):
                self._pending.pop(i)
                return Response(ex.get("status", 200), ex.get("body"), ex.get("headers", {}))
        raise FetchError(f"no recorded response for {params}", "no_fixture")


def fixture_transport(fixture_dir: str | os.PathLike | None, symbol: str) -> ReplayTransport:
    if fixture_dir is None:
        raise FetchError(f"offline mode, no fixture for {symbol}", "offline_no_fixture")
    path = os.path.join(os.fspath(fixture_dir), f"{symbol}.json")
    if not os.path.isfile(path):
        raise FetchError(f"offline mode, no fixture for {symbol} ({path})", "offline_no_fixture")
    return ReplayTransport.from_file(path)


def kline_to_bar(k: list) -> Bar:
    # [open_time, open, high, low, close, base_volume, close_time, quote_volume, ...]
    return Bar(ms_to_date(int(k[0])), float(k[1]), float(k[2]), float(k[3]), float(k[4]), float(k[7]))


def _get_with_retry(
    transport: Transport, params: dict, max_retries: int, backoff: float, sleep: Callable[[float], None]
) -> list:
    for attempt in range(max_retries + 1):
        resp = transport(KLINES_URL, params)
        if resp.status == 200:
            if not isinstance(resp.body, list):
                raise FetchError(f"unexpected klines payload for {params['symbol']}", "bad_payload")
            return resp.body
        body = resp.body if isinstance(resp.body, dict) else {}
        if resp.status == 400 and body.get("code") == -1121:
            raise FetchError(f"unknown symbol {params['symbol']}", "unknown_symbol")
        if resp.status not in RETRY_STATUSES:
            raise FetchError(f"HTTP {resp.status} for {params['symbol']}: {resp.body}", "http_error")
        if attempt == max_retries:
            break
        wait = backoff * 2**attempt
        retry_after = resp.headers.get("Retry-After") if resp.headers else None
        if retry_after is not None:
            wait = max(wait, float(retry_after))
        log.warning("HTTP %s for %s, retrying in %.1fs", resp.status, params["symbol"], wait)
        sleep(wait)
    raise FetchError(f"HTTP failure after {max_retries} retries for {params['symbol']}", "retries_exhausted")


def fetch_klines(
    req: FetchRequest,
    transport: Transport | None = None,
    max_retries: int = 5,
    backoff: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
) -> PriceSeries:
    """Fetch daily bars in ``[start, end)`` page by page and persist ``<out_dir>/<symbol>.csv``.

    The written file is read back through ``load_series`` so the returned
    series is exactly what downstream code will see.
    """
    transport = transport or requests_transport()
    start_ms, end_ms = date_to_ms(req.start), date_to_ms(req.end)
    cursor = start_ms
    by_date: dict[dt.date, Bar] = {}
    while cursor < end_ms:
        params = {
            "symbol": req.symbol,
            "interval": req.interval,
            "startTime": cursor,
            "endTime": end_ms - 1,
            "limit": PAGE_LIMIT,
        }
        page = _get_with_retry(transport, params, max_retries, backoff, sleep)
        if not page:
            break
        for k in page:
            if start_ms <= int(k[0]) < end_ms:
                bar = kline_to_bar(k)
                by_date[bar.date] = bar
        last_open = int(page[-1][0])
        if len(page) < PAGE_LIMIT or last_open + DAY_MS <= cursor:
            break
        cursor = last_open + DAY_MS
    if not by_date:
        raise FetchError(f"empty response for {req.symbol} in [{req.start}, {req.end})", "empty_range")
    series = PriceSeries(req.symbol, validate_bars(sorted(by_date.values(), key=lambda b: b.date)))
    os.makedirs(req.out_dir, exist_ok=True)
    path = write_csv(series, os.path.join(req.out_dir, f"{req.symbol}.csv"))
    return load_series(path, req.symbol)
