"""Trade/quote stream parsing, session filtering, merging and time binning."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
import io

import numpy as np
import pandas as pd

from .config import ConfigError, load_kv, parse_kv, parse_time_of_day, parse_windows, require

NS_PER_SEC = 1_000_000_000
NS_PER_DAY = 86_400 * NS_PER_SEC
RETURN_GRID_SEC = 10

TRADE_COLUMNS = ["timestamp_ns", "price", "size"]
QUOTE_COLUMNS = ["timestamp_ns", "bid", "ask", "bid_size", "ask_size"]
BIN_COLUMNS = [
    "day", "bin_index", "start", "N", "V", "Q", "P",
    "open", "high", "low", "close", "returns_10s",
    "S_mean", "SQ_mean", "Vbid_mean", "Vask_mean",
]


class DataError(ValueError):
    """Hard input-data error (unrecoverable ordering or format violation)."""


# ---------------------------------------------------------------------------
# Records and specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TradeRecord:
    timestamp: int          # ns since Unix epoch, UTC
    price: float            # dollars
    size: int               # shares / contracts, >= 1


@dataclass(frozen=True)
class QuoteRecord:
    timestamp: int
    bid: float
    ask: float
    bid_size: int
    ask_size: int


@dataclass(frozen=True)
class SessionSpec:
    """Daily keep-windows in seconds since UTC midnight.

    Records inside [open, close) are kept, except those falling in an
    exclusion window. Exclusions encode auction halts and open/close
    buffers for equities; a 24h future uses open=0, close=86400, none.
    """
    open_s: int = 0
    close_s: int = 86400
    exclusions: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not (0 <= self.open_s < self.close_s <= 86400):
            raise ConfigError("session open/close must satisfy 0 <= open < close <= 24h")
        spans = sorted(self.exclusions)
        for (a, b), (c, d) in zip(spans, spans[1:]):
            if c < b:
                raise ConfigError("session exclusion windows overlap")

    def keep_windows(self) -> list[tuple[int, int]]:
        windows = []
        cursor = self.open_s
        for a, b in sorted(self.exclusions):
            a, b = max(a, self.open_s), min(b, self.close_s)
            if b <= a:
                continue
            if a > cursor:
                windows.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < self.close_s:
            windows.append((cursor, self.close_s))
        return windows


@dataclass(frozen=True)
class ContractSpec:
    symbol: str
    tick_size: float
    asset_class: str = "future"          # "future" | "stock"
    session: SessionSpec = field(default_factory=SessionSpec)

    def __post_init__(self):
        if self.tick_size <= 0:
            raise ConfigError("tick_size must be positive")
        if self.asset_class not in ("future", "stock"):
            raise ConfigError(f"unknown asset_class {self.asset_class!r}")

    @classmethod
    def from_kv(cls, kv: dict[str, str]) -> "ContractSpec":
        session = SessionSpec(
            open_s=parse_time_of_day(kv.get("session.open", "00:00")),
            close_s=parse_time_of_day(kv.get("session.close", "24:00")),
            exclusions=parse_windows(kv.get("session.exclusions", "")),
        )
        return cls(
            symbol=require(kv, "symbol"),
            tick_size=float(require(kv, "tick_size")),
            asset_class=kv.get("asset_class", "future"),
            session=session,
        )

    @classmethod
    def from_file(cls, path) -> "ContractSpec":
        return cls.from_kv(load_kv(path))

    def to_kv_text(self) -> str:
        lines = [
            f"symbol = {self.symbol}",
            f"tick_size = {self.tick_size!r}",
            f"asset_class = {self.asset_class}",
            f"session.open = {_fmt_tod(self.session.open_s)}",
            f"session.close = {_fmt_tod(self.session.close_s)}",
            "session.exclusions = " + ", ".join(
                f"{_fmt_tod(a)}-{_fmt_tod(b)}" for a, b in self.session.exclusions),
        ]
        return "\n".join(lines) + "\n"


def _fmt_tod(sec: int) -> str:
    return f"{sec // 3600:02d}:{(sec % 3600) // 60:02d}"


# ---------------------------------------------------------------------------
# Columnar event containers
# ---------------------------------------------------------------------------

@dataclass
class Trades:
    ts: np.ndarray       # int64 ns
    price: np.ndarray    # float64 dollars
    size: np.ndarray     # int64

    def __len__(self) -> int:
        return len(self.ts)

    def __getitem__(self, i: int) -> TradeRecord:
        return TradeRecord(int(self.ts[i]), float(self.price[i]), int(self.size[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def empty(cls) -> "Trades":
        return cls(np.empty(0, np.int64), np.empty(0, float), np.empty(0, np.int64))

    @classmethod
    def from_records(cls, records) -> "Trades":
        recs = list(records)
        return cls(
            np.array([r.timestamp for r in recs], np.int64),
            np.array([r.price for r in recs], float),
            np.array([r.size for r in recs], np.int64),
        )


@dataclass
class Quotes:
    ts: np.ndarray
    bid: np.ndarray
    ask: np.ndarray
    bid_size: np.ndarray
    ask_size: np.ndarray

    def __len__(self) -> int:
        return len(self.ts)

    def __getitem__(self, i: int) -> QuoteRecord:
        return QuoteRecord(int(self.ts[i]), float(self.bid[i]), float(self.ask[i]),
                           int(self.bid_size[i]), int(self.ask_size[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def empty(cls) -> "Quotes":
        z = np.empty(0, float)
        return cls(np.empty(0, np.int64), z, z.copy(), np.empty(0, np.int64), np.empty(0, np.int64))


@dataclass
class ParseReport:
    n_rows: int = 0
    rejects: list[tuple[int, str]] = field(default_factory=list)     # (line_no, reason)
    warnings: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.rejects)


# ---------------------------------------------------------------------------
# CSV parsing
# ---------------------------------------------------------------------------

def _read_csv_frame(source, columns: list[str]) -> pd.DataFrame:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    df = pd.read_csv(source, dtype=str, keep_default_na=False, skip_blank_lines=False)
    got = list(df.columns)
    if got != columns:
        raise DataError(f"bad header: expected columns {columns}, got {got}")
    return df


def _coerce(df: pd.DataFrame, col: str, kind: str) -> tuple[np.ndarray, np.ndarray]:
    if kind == "int":
        # int64 must not round-trip through float64: ns timestamps exceed 2**53
        try:
            num = pd.to_numeric(df[col], errors="raise")
            if num.dtype.kind in "iu":
                return num.to_numpy(np.int64), np.zeros(len(df), bool)
        except (ValueError, TypeError):
            pass
        vals = np.zeros(len(df), np.int64)
        bad = np.zeros(len(df), bool)
        for i, s in enumerate(df[col].to_numpy()):
            try:
                vals[i] = int(s)
            except (ValueError, TypeError, OverflowError):
                bad[i] = True
        return vals, bad
    num = pd.to_numeric(df[col], errors="coerce")
    return num.to_numpy(dtype=float), num.isna().to_numpy()


def _off_grid(price: np.ndarray, tick: float) -> np.ndarray:
    ratio = price / tick
    return np.abs(ratio - np.round(ratio)) > 1e-9 * np.maximum(np.abs(ratio), 1.0)


def parse_trades(source, spec: ContractSpec) -> tuple[Trades, ParseReport]:
    """Parse a trades CSV (header ``timestamp_ns,price,size``).

    Rows violating record invariants are rejected and reported with their
    line number; off-tick-grid prices are kept but flagged as warnings.
    Decreasing timestamps are a hard error.
    """
    df = _read_csv_frame(source, TRADE_COLUMNS)
    report = ParseReport(n_rows=len(df))
    if not len(df):
        return Trades.empty(), report

    ts, bad_ts = _coerce(df, "timestamp_ns", "int")
    price, bad_p = _coerce(df, "price", "float")
    size, bad_s = _coerce(df, "size", "int")

    lines = np.arange(2, len(df) + 2)            # line 1 is the header
    bad = bad_ts | bad_p | bad_s
    for i in np.flatnonzero(bad):
        report.rejects.append((int(lines[i]), "malformed row"))

    ok = ~bad
    viol = ok & (size < 1)
    for i in np.flatnonzero(viol):
        report.rejects.append((int(lines[i]), f"size must be >= 1, got {int(size[i])}"))
    ok &= ~viol
    viol = ok & ~(price > 0)
    for i in np.flatnonzero(viol):
        report.rejects.append((int(lines[i]), f"price must be positive, got {price[i]!r}"))
    ok &= ~viol

    kept = np.flatnonzero(ok)
    if len(kept) and np.any(np.diff(ts[kept]) < 0):
        j = kept[1 + int(np.argmax(np.diff(ts[kept]) < 0))]
        raise DataError(f"non-monotone timestamps at line {int(lines[j])}")

    off = _off_grid(price[kept], spec.tick_size)
    for i in np.flatnonzero(off):
        report.warnings.append((int(lines[kept[i]]), "price off tick grid"))

    report.rejects.sort()
    return Trades(ts[kept], price[kept], size[kept]), report


def parse_quotes(source, spec: ContractSpec) -> tuple[Quotes, ParseReport]:
    """Parse a quotes CSV (header ``timestamp_ns,bid,ask,bid_size,ask_size``)."""
    df = _read_csv_frame(source, QUOTE_COLUMNS)
    report = ParseReport(n_rows=len(df))
    if not len(df):
        return Quotes.empty(), report

    ts, bad_ts = _coerce(df, "timestamp_ns", "int")
    bid, bad_b = _coerce(df, "bid", "float")
    ask, bad_a = _coerce(df, "ask", "float")
    bsz, bad_bs = _coerce(df, "bid_size", "int")
    asz, bad_as = _coerce(df, "ask_size", "int")

    lines = np.arange(2, len(df) + 2)
    bad = bad_ts | bad_b | bad_a | bad_bs | bad_as
    for i in np.flatnonzero(bad):
        report.rejects.append((int(lines[i]), "malformed row"))

    ok = ~bad
    viol = ok & ~((ask >= bid) & (bid > 0) & (bsz >= 0) & (asz >= 0))
    for i in np.flatnonzero(viol):
        report.rejects.append((int(lines[i]), "quote invariant violated (need ask >= bid > 0, sizes >= 0)"))
    ok &= ~viol

    kept = np.flatnonzero(ok)
    if len(kept) and np.any(np.diff(ts[kept]) < 0):
        j = kept[1 + int(np.argmax(np.diff(ts[kept]) < 0))]
        raise DataError(f"non-monotone timestamps at line {int(lines[j])}")

    report.rejects.sort()
    return Quotes(ts[kept], bid[kept], ask[kept], bsz[kept], asz[kept]), report


def write_trades_csv(trades: Trades, path) -> None:
    pd.DataFrame({
        "timestamp_ns": trades.ts, "price": trades.price, "size": trades.size,
    }).to_csv(path, index=False)


def write_quotes_csv(quotes: Quotes, path) -> None:
    pd.DataFrame({
        "timestamp_ns": quotes.ts, "bid": quotes.bid, "ask": quotes.ask,
        "bid_size": quotes.bid_size, "ask_size": quotes.ask_size,
    }).to_csv(path, index=False)


# ---------------------------------------------------------------------------
# Merging and session filtering
# ---------------------------------------------------------------------------

def group_simultaneous(trades: Trades) -> Trades:
    """Collapse runs of identical timestamps into single trades.

    Merged size is the sum; merged price is the size-weighted mean, which
    preserves traded notional exactly. Idempotent.
    """
    if len(trades) == 0:
        return trades
    ts = trades.ts
    if np.any(np.diff(ts) < 0):
        raise DataError("group_simultaneous requires timestamp-sorted input")
    starts = np.flatnonzero(np.r_[True, np.diff(ts) != 0])
    if len(starts) == len(ts):
        return trades
    gid = np.cumsum(np.r_[0, np.diff(ts) != 0])
    size = np.bincount(gid, weights=trades.size).astype(np.int64)
    notional = np.bincount(gid, weights=trades.size * trades.price)
    return Trades(ts[starts], notional / size, size)


def _seconds_of_day(ts: np.ndarray) -> np.ndarray:
    return (ts % NS_PER_DAY) // NS_PER_SEC


def filter_session(events, spec: ContractSpec):
    """Keep only events whose time of day falls in a session keep-window."""
    if len(events) == 0:
        return events
    sec = _seconds_of_day(events.ts)
    keep = np.zeros(len(events), bool)
    for a, b in spec.session.keep_windows():
        keep |= (sec >= a) & (sec < b)
    if isinstance(events, Trades):
        return Trades(events.ts[keep], events.price[keep], events.size[keep])
    return Quotes(events.ts[keep], events.bid[keep], events.ask[keep],
                  events.bid_size[keep], events.ask_size[keep])


# ---------------------------------------------------------------------------
# Binning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bin:
    day: date
    bin_index: int
    start: int                 # ns since epoch
    N: int
    V: float
    Q: float
    P: float
    open: float
    high: float
    low: float
    close: float
    returns_10s: np.ndarray
    S_mean: float
    SQ_mean: float
    Vbid_mean: float
    Vask_mean: float


@dataclass
class BinTable:
    """Columnar per-bin aggregates for one contract at one bin width."""
    tau_s: int
    day: np.ndarray            # int64, days since epoch
    bin_index: np.ndarray      # int64, intraday position
    start: np.ndarray          # int64 ns
    n: np.ndarray              # int64 merged-trade count
    v: np.ndarray              # float64 summed size
    q: np.ndarray              # float64 V/N (NaN when N == 0)
    p: np.ndarray              # float64 within-bin log-mean trade price
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    s_mean: np.ndarray         # log-mean spread over quote updates, dollars
    sq_mean: np.ndarray        # log-mean per-trade spread*size, dollars
    vbid_mean: np.ndarray
    vask_mean: np.ndarray
    r10: np.ndarray            # flat 10s log-returns
    r10_offsets: np.ndarray    # int64, len == n_bins + 1

    def __len__(self) -> int:
        return len(self.start)

    def returns(self, i: int) -> np.ndarray:
        return self.r10[self.r10_offsets[i]:self.r10_offsets[i + 1]]

    def __getitem__(self, i: int) -> Bin:
        return Bin(
            day=date(1970, 1, 1) + timedelta(days=int(self.day[i])),
            bin_index=int(self.bin_index[i]),
            start=int(self.start[i]),
            N=int(self.n[i]), V=float(self.v[i]), Q=float(self.q[i]), P=float(self.p[i]),
            open=float(self.open[i]), high=float(self.high[i]),
            low=float(self.low[i]), close=float(self.close[i]),
            returns_10s=self.returns(i),
            S_mean=float(self.s_mean[i]), SQ_mean=float(self.sq_mean[i]),
            Vbid_mean=float(self.vbid_mean[i]), Vask_mean=float(self.vask_mean[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def _bin_layout(spec: ContractSpec, tau_s: int) -> tuple[np.ndarray, np.ndarray]:
    """Intraday bin (start_s, width_s) arrays tiling the keep-windows.

    A window whose length is not a multiple of tau ends with one short bin,
    keeping the tiling partition-exact.
    """
    starts, widths = [], []
    for a, b in spec.session.keep_windows():
        t = a
        while t < b:
            w = min(tau_s, b - t)
            starts.append(t)
            widths.append(w)
            t += w
    return np.array(starts, np.int64), np.array(widths, np.int64)


def _segment_stats(values: np.ndarray, seg_starts: np.ndarray, counts: np.ndarray, how):
    """Per-segment reduce over a sorted-by-segment flat array; NaN for empty."""
    out = np.full(len(counts), np.nan)
    nonempty = counts > 0
    if values.size:
        safe = np.minimum(seg_starts, len(values) - 1)
        red = how.reduceat(values, safe)
        out[nonempty] = red[nonempty]
    return out


def bin_series(trades: Trades, quotes: Quotes | None, tau_s: int, spec: ContractSpec) -> BinTable:
    """Aggregate merged, session-filtered events into tau-second bins.

    Bins tile every day present in the data; empty bins are emitted with
    N=0. Ten-second log-returns sample the last trade price at or before
    each grid point, scoped to the trading day. Per the toolkit's
    log-average convention, within-bin means of price, spread, per-trade
    spread cost and depths are geometric.
    """
    if tau_s <= 0:
        raise ValueError("tau must be positive")
    lay_start, lay_width = _bin_layout(spec, tau_s)
    B = len(lay_start)
    if B == 0:
        raise ConfigError("session has no keep-windows")

    have_quotes = quotes is not None and len(quotes) > 0
    day_candidates = [trades.ts // NS_PER_DAY]
    if have_quotes:
        day_candidates.append(quotes.ts // NS_PER_DAY)
    days = np.unique(np.concatenate(day_candidates)) if len(trades) or have_quotes \
        else np.empty(0, np.int64)
    D = len(days)

    nb = D * B
    start_ns = (days[:, None] * NS_PER_DAY
                + lay_start[None, :] * NS_PER_SEC).ravel() if nb else np.empty(0, np.int64)

    def bin_ids(ts: np.ndarray) -> np.ndarray:
        day_idx = np.searchsorted(days, ts // NS_PER_DAY)
        sec = _seconds_of_day(ts)
        w = np.searchsorted(lay_start, sec, side="right") - 1
        return day_idx * B + w

    # --- trade aggregates ------------------------------------------------
    if len(trades):
        tb = bin_ids(trades.ts)
        n = np.bincount(tb, minlength=nb).astype(np.int64)
        v = np.bincount(tb, weights=trades.size, minlength=nb)
        sum_logp = np.bincount(tb, weights=np.log(trades.price), minlength=nb)
        seg_starts = np.searchsorted(tb, np.arange(nb))
        h = _segment_stats(trades.price, seg_starts, n, np.maximum)
        lo = _segment_stats(trades.price, seg_starts, n, np.minimum)
        safe_start = np.minimum(seg_starts, len(trades) - 1)
        o = np.where(n > 0, trades.price[safe_start], np.nan)
        c = np.where(n > 0, trades.price[np.minimum(safe_start + n - 1, len(trades) - 1)], np.nan)
    else:
        n = np.zeros(nb, np.int64)
        v = np.zeros(nb)
        sum_logp = np.zeros(nb)
        o = h = lo = c = np.full(nb, np.nan)

    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(n > 0, v / np.maximum(n, 1), np.nan)
        p = np.where(n > 0, np.exp(sum_logp / np.maximum(n, 1)), np.nan)

    # --- quote aggregates -------------------------------------------------
    s_mean = np.full(nb, np.nan)
    sq_mean = np.full(nb, np.nan)
    vbid_mean = np.full(nb, np.nan)
    vask_mean = np.full(nb, np.nan)
    if have_quotes:
        qb = bin_ids(quotes.ts)
        spread = quotes.ask - quotes.bid

        def log_mean_by_bin(values, ids, out):
            pos = values > 0
            cnt = np.bincount(ids[pos], minlength=nb)
            tot = np.bincount(ids[pos], weights=np.log(values[pos]), minlength=nb)
            has = cnt > 0
            out[has] = np.exp(tot[has] / cnt[has])

        log_mean_by_bin(spread, qb, s_mean)
        log_mean_by_bin(quotes.bid_size.astype(float), qb, vbid_mean)
        log_mean_by_bin(quotes.ask_size.astype(float), qb, vask_mean)

        if len(trades):
            # prevailing quote at the trade timestamp, scoped to the same day
            qi = np.searchsorted(quotes.ts, trades.ts, side="right") - 1
            valid = qi >= 0
            same_day = np.zeros(len(trades), bool)
            same_day[valid] = (quotes.ts[qi[valid]] // NS_PER_DAY) == (trades.ts[valid] // NS_PER_DAY)
            valid &= same_day
            sq = np.where(valid, spread[np.maximum(qi, 0)] * trades.size, np.nan)
            log_mean_by_bin(np.where(np.isnan(sq), -1.0, sq), tb, sq_mean)

    # --- 10-second return grid --------------------------------------------
    g_per_bin = np.ceil(lay_width / RETURN_GRID_SEC).astype(np.int64)
    lay_grid_bin = np.repeat(np.arange(B), g_per_bin)
    lay_grid_sec = lay_start[lay_grid_bin] + (
        np.arange(len(lay_grid_bin)) - np.repeat(np.cumsum(g_per_bin) - g_per_bin, g_per_bin)
    ) * RETURN_GRID_SEC
    G = len(lay_grid_sec)

    if len(trades) and nb:
        grid_ns = (days[:, None] * NS_PER_DAY + lay_grid_sec[None, :] * NS_PER_SEC).ravel()
        idx = np.searchsorted(trades.ts, grid_ns, side="right") - 1
        day_first = np.searchsorted(trades.ts, days * NS_PER_DAY)
        gvalid = idx >= np.repeat(day_first, G)
        gprice = trades.price[np.maximum(idx, 0)]

        same_bin = np.tile(np.r_[False, np.diff(lay_grid_bin) == 0], D)
        pair_ok = same_bin & gvalid & np.r_[False, gvalid[:-1]]
        with np.errstate(invalid="ignore", divide="ignore"):
            rets = np.where(pair_ok, np.log(gprice / np.r_[1.0, gprice[:-1]]), np.nan)
        r10 = rets[pair_ok]
        pair_bin = (np.repeat(np.arange(D), G) * B + np.tile(lay_grid_bin, D))[pair_ok]
        counts = np.bincount(pair_bin, minlength=nb)
        r10_offsets = np.zeros(nb + 1, np.int64)
        np.cumsum(counts, out=r10_offsets[1:])
    else:
        r10 = np.empty(0)
        r10_offsets = np.zeros(nb + 1, np.int64)

    return BinTable(
        tau_s=tau_s,
        day=np.repeat(days, B),
        bin_index=np.tile(np.arange(B, dtype=np.int64), D),
        start=start_ns,
        n=n, v=v, q=q, p=p,
        open=o, high=h, low=lo, close=c,
        s_mean=s_mean, sq_mean=sq_mean,
        vbid_mean=vbid_mean, vask_mean=vask_mean,
        r10=r10, r10_offsets=r10_offsets,
    )


# ---------------------------------------------------------------------------
# Bin CSV round-trip
# ---------------------------------------------------------------------------

def write_bins_csv(bins: BinTable, path, meta: dict | None = None) -> None:
    """One row per bin, columns exactly the Bin fields; returns ';'-joined.

    Optional metadata (symbol, tick, ...) is carried in leading '# key=value'
    comment lines so downstream commands stay self-describing.
    """
    meta = dict(meta or {})
    meta.setdefault("tau_s", bins.tau_s)
    day_str = (np.datetime64("1970-01-01") + bins.day.astype("timedelta64[D]")).astype(str)
    rets = [";".join(repr(float(x)) for x in bins.returns(i)) for i in range(len(bins))]
    frame = pd.DataFrame({
        "day": day_str,
        "bin_index": bins.bin_index,
        "start": bins.start,
        "N": bins.n,
        "V": bins.v,
        "Q": bins.q,
        "P": bins.p,
        "open": bins.open,
        "high": bins.high,
        "low": bins.low,
        "close": bins.close,
        "returns_10s": rets,
        "S_mean": bins.s_mean,
        "SQ_mean": bins.sq_mean,
        "Vbid_mean": bins.vbid_mean,
        "Vask_mean": bins.vask_mean,
    })
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        frame.to_csv(fh, index=False)


def read_bins_csv(path) -> tuple[BinTable, dict[str, str]]:
    meta: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines(keepends=True)
    body_at = 0
    for line in lines:
        if not line.startswith("#"):
            break
        body_at += 1
        entry = line[1:].strip()
        if "=" in entry:
            k, val = entry.split("=", 1)
            meta[k.strip()] = val.strip()
    try:
        frame = pd.read_csv(io.StringIO("".join(lines[body_at:])), keep_default_na=True)
    except Exception as exc:
        raise DataError(f"unreadable bins CSV: {exc}") from exc
    for col in BIN_COLUMNS:
        if col not in frame.columns:
            raise DataError(f"bins CSV missing column {col!r}")

    if "tau_s" not in meta:
        raise DataError("bins CSV missing '# tau_s=...' metadata")
    tau_s = int(meta["tau_s"])

    ret_col = frame["returns_10s"].fillna("")
    ret_arrays = [np.array([float(x) for x in s.split(";")] if s else [], float)
                  for s in ret_col]
    counts = np.array([len(r) for r in ret_arrays], np.int64)
    offsets = np.zeros(len(frame) + 1, np.int64)
    np.cumsum(counts, out=offsets[1:])

    day = (pd.to_datetime(frame["day"]).to_numpy().astype("datetime64[D]")
           .astype(np.int64))

    def fcol(name):
        return pd.to_numeric(frame[name], errors="raise").to_numpy(dtype=float)

    return BinTable(
        tau_s=tau_s,
        day=day,
        bin_index=frame["bin_index"].to_numpy(np.int64),
        start=frame["start"].to_numpy(np.int64),
        n=frame["N"].to_numpy(np.int64),
        v=fcol("V"), q=fcol("Q"), p=fcol("P"),
        open=fcol("open"), high=fcol("high"), low=fcol("low"), close=fcol("close"),
        s_mean=fcol("S_mean"), sq_mean=fcol("SQ_mean"),
        vbid_mean=fcol("Vbid_mean"), vask_mean=fcol("Vask_mean"),
        r10=np.concatenate(ret_arrays) if ret_arrays else np.empty(0),
        r10_offsets=offsets,
    ), meta
