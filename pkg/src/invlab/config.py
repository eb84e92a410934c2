"""Flat key=value config files shared by contract and simulator specs."""
from __future__ import annotations

import os


class ConfigError(ValueError):
    """Config file is missing required keys or has a malformed entry."""


def parse_kv(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def load_kv(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv(fh.read())


def require(kv: dict[str, str], key: str) -> str:
    if key not in kv or kv[key] == "":
        raise ConfigError(f"missing required key {key!r}")
    return kv[key]


def parse_time_of_day(s: str) -> int:
    """'HH:MM' (or 'HH:MM:SS') to seconds since midnight; '24:00' allowed."""
    parts = s.strip().split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"bad time of day {s!r}")
    try:
        h, m = int(parts[0]), int(parts[1])
        sec = int(parts[2]) if len(parts) == 3 else 0
    except ValueError as exc:
        raise ConfigError(f"bad time of day {s!r}") from exc
    total = h * 3600 + m * 60 + sec
    if not (0 <= total <= 86400):
        raise ConfigError(f"time of day out of range: {s!r}")
    return total


def parse_windows(s: str) -> tuple[tuple[int, int], ...]:
    """Comma-separated 'HH:MM-HH:MM' windows to (start, end) seconds pairs."""
    s = s.strip()
    if not s:
        return ()
    out = []
    for item in s.split(","):
        item = item.strip()
        if "-" not in item:
            raise ConfigError(f"bad window {item!r}, expected 'HH:MM-HH:MM'")
        a, b = item.split("-", 1)
        lo, hi = parse_time_of_day(a), parse_time_of_day(b)
        if hi <= lo:
            raise ConfigError(f"window {item!r} must have end after start")
        out.append((lo, hi))
    return tuple(out)


def worker_count() -> int:
    """Parallel worker cap; INVLAB_THREADS overrides the default."""
    env = os.environ.get("INVLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"INVLAB_THREADS must be an integer, got {env!r}") from exc
        return max(1, n)
    return min(4, os.cpu_count() or 1)
