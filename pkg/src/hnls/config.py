"""Flat key = value run configuration with a stable 64-bit hash.

Grammar: one `key = value` pair per line; blank lines and `#` comments
ignored; keys are case-sensitive; values are uninterpreted strings until a
typed accessor is called.  The canonical serialization (sorted keys, one
pair per line) feeds an FNV-1a hash that is stamped into every output file.
"""

from __future__ import annotations

from hnls.hermite import HermiteError


class ConfigError(HermiteError):
    """Raised for malformed config text or missing/invalid keys."""


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a of a byte string."""
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def parse_config(text: str) -> dict:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in cfg:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        cfg[key] = value.strip()
    return cfg


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def canonical_serialization(cfg: dict) -> str:
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def config_hash(cfg: dict) -> int:
    return fnv1a64(canonical_serialization(cfg).encode("utf-8"))


# -- typed accessors ---------------------------------------------------------


def get_int(cfg: dict, key: str, default=None) -> int:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected integer, got {cfg[key]!r}") from exc


def get_float(cfg: dict, key: str, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected number, got {cfg[key]!r}") from exc


def get_str(cfg: dict, key: str, default=None) -> str:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    return cfg[key]


def get_bool(cfg: dict, key: str, default=None) -> bool:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    val = cfg[key].lower()
    if val in ("true", "1", "yes", "on"):
        return True
    if val in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected boolean, got {cfg[key]!r}")


def get_int_list(cfg: dict, key: str, default=None) -> list:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return [int(p) for p in cfg[key].replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected integer list, got {cfg[key]!r}") from exc
