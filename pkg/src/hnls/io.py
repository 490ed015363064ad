"""Run persistence: binary checkpoints and observable CSV files.

Checkpoint layout (bit-exact):
  magic  b"HNLS1\\n"
  u32-LE length of the UTF-8 JSON header
  header {version, n_max, sign, t, dt, config_hash}
  payload: little-endian float64 (re, im) pairs, lexicographic (k1, k2)
  u64-LE FNV-1a checksum of the payload bytes
"""

from __future__ import annotations

import json
import struct

import numpy as np

from hnls.config import fnv1a64
from hnls.hermite import HermiteError, SpectralField, triangle_size

MAGIC = b"HNLS1\n"
VERSION = 1

CSV_COLUMNS = [
    "t",
    "mass",
    "hamiltonian",
    "h1",
    "h2",
    "h4",
    "d2k_norm",
    "moment2k",
    "E_mod",
    "S_term",
    "R_term",
    "residual",
]


class CheckpointError(HermiteError):
    """Base class for checkpoint read failures."""


class CheckpointFormatError(CheckpointError):
    """Bad magic or unsupported version."""


class CheckpointTruncatedError(CheckpointError):
    """File ends before the declared payload/checksum."""


class CheckpointChecksumError(CheckpointError):
    """Payload bytes do not match the stored checksum."""


def checkpoint_save(path, u: SpectralField, t: float, dt: float, sign: int, config_hash: int):
    header = {
        "version": VERSION,
        "n_max": u.n_max,
        "sign": sign,
        "t": t,
        "dt": dt,
        "config_hash": f"{config_hash:016x}",
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    pairs = np.empty(2 * len(u.coeffs), dtype="<f8")
    pairs[0::2] = np.real(u.coeffs)
    pairs[1::2] = np.imag(u.coeffs)
    payload = pairs.tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        fh.write(payload)
        fh.write(struct.pack("<Q", fnv1a64(payload)))


def checkpoint_load(path):
    """Returns (field, header dict); raises a distinct error per failure mode."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 4:
        raise CheckpointTruncatedError(f"{path}: file shorter than the fixed prelude")
    if blob[: len(MAGIC)] != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {blob[:6]!r}")
    off = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", blob, off)
    off += 4
    if len(blob) < off + hlen:
        raise CheckpointTruncatedError(f"{path}: header truncated")
    try:
        header = json.loads(blob[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: unreadable header") from exc
    off += hlen
    if header.get("version") != VERSION:
        raise CheckpointFormatError(
            f"{path}: unsupported version {header.get('version')!r}"
        )
    n_max = header["n_max"]
    n_bytes = 16 * triangle_size(n_max)
    if len(blob) < off + n_bytes + 8:
        raise CheckpointTruncatedError(f"{path}: payload truncated")
    payload = blob[off : off + n_bytes]
    (stored,) = struct.unpack_from("<Q", blob, off + n_bytes)
    if fnv1a64(payload) != stored:
        raise CheckpointChecksumError(f"{path}: payload checksum mismatch")
    pairs = np.frombuffer(payload, dtype="<f8")
    coeffs = pairs[0::2] + 1j * pairs[1::2]
    return SpectralField(n_max, coeffs.astype(complex)), header


# ---------------------------------------------------------------------------
# CSV output


def _fmt(value) -> str:
    """Deterministic shortest round-trip float formatting; None -> empty."""
    if value is None:
        return ""
    return repr(float(value))


def write_observables_csv(path, rows: list, config_hash: int):
    """rows: list of dicts keyed by CSV_COLUMNS entries; missing -> empty."""
    lines = [f"# config_hash = {config_hash:016x}", ",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_table_csv(path, columns: list, rows: list, config_hash: int):
    """Generic table writer (ratio tables, sweeps); same hash stamping."""
    lines = [f"# config_hash = {config_hash:016x}", ",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            val = row.get(col)
            if val is None:
                cells.append("")
            elif isinstance(val, (int, np.integer)):
                cells.append(str(int(val)))
            elif isinstance(val, str):
                cells.append(val)
            else:
                cells.append(repr(float(val)))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
