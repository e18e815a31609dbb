"""
Fetching daily klines from a recording
======================================

The downloader pages through the exchange's klines endpoint 1000 bars at a
time and retries rate limits with exponential backoff. Any callable that
returns a response can stand in for HTTP, so recorded fixtures replay
offline.
"""

import datetime as dt
import os
import tempfile

from riskalloc.exchange_client import FetchRequest, ReplayTransport, fetch_klines, fixture_transport

here = os.path.dirname(os.path.abspath(__file__))
fixtures = os.path.join(here, "..", "tests", "fixtures", "klines")
out = tempfile.mkdtemp()

# three pages stitched into one series; the end date is exclusive
transport = fixture_transport(fixtures, "BTCUSDT")
series = fetch_klines(FetchRequest("BTCUSDT", dt.date(2018, 1, 1), dt.date(2024, 11, 5), out), transport)
print(f"{len(series)} bars in {len(transport.calls)} requests, {series.dates[0]} .. {series.dates[-1]}")

# two rate-limit responses before success; sleeping is recorded, not real
waits = []
transport = fixture_transport(fixtures, "SOLUSDT")
series = fetch_klines(FetchRequest("SOLUSDT", dt.date(2024, 3, 1), dt.date(2024, 3, 11), out), transport, sleep=waits.append)
print(f"{len(series)} bars after backoff waits {waits}")

# a hand-written exchange: one empty page ends the range
empty = ReplayTransport([{"status": 200, "body": []}])
try:
    fetch_klines(FetchRequest("NONE", dt.date(2024, 1, 1), dt.date(2024, 1, 3), out), empty)
except Exception as exc:
    print("error:", exc.one_line())
