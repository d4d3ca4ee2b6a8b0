"""Persistence: the binary data container, JSON run configs and CSV exports.

Every file write goes through :func:`atomic_write`, which writes a temporary
sibling and renames it over the target.
"""
from __future__ import annotations

import copy
import json
import os
import struct
import tempfile
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError, FormatError
from .forward import DataSet

MAGIC = b"DTBD"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")  # magic, version, m, two_n, tau
HEADER_BYTES = _HEADER.size  # 24: 4-byte magic, three u32, one f64
SCHEMA_VERSION = 1
CSV_FORMAT = "%.17g"


# --------------------------------------------------------------------------
# atomic writes


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write(path, payload: bytes | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = payload.encode() if isinstance(payload, str) else payload
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# --------------------------------------------------------------------------
# data container


def encode_container(data: DataSet) -> bytes:
    frames = np.ascontiguousarray(data.frames, dtype="<f8")
    return _HEADER.pack(MAGIC, VERSION, data.m, data.two_n, float(data.tau)) + frames.tobytes(order="C")


def decode_container(blob: bytes, symmetry_tol: float = 1e-10) -> DataSet:
    if len(blob) < HEADER_BYTES:
        raise FormatError(f"container truncated: {len(blob)} bytes")
    magic, version, m, two_n, tau = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}; expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    if m < 1 or two_n < 1:
        raise FormatError(f"empty container (m={m}, two_n={two_n})")
    expected = HEADER_BYTES + 8 * two_n * m * m
    if len(blob) != expected:
        raise FormatError(f"container has {len(blob)} bytes, header implies {expected}")
    if not (np.isfinite(tau) and tau > 0):
        raise FormatError(f"invalid sampling interval {tau}")
    frames = np.frombuffer(blob, dtype="<f8", offset=HEADER_BYTES).reshape(two_n, m, m).astype(float)
    data = DataSet(frames, tau)
    data.check_symmetric(symmetry_tol)
    return data


def write_container(path, data: DataSet) -> Path:
    return atomic_write(path, encode_container(data))


def read_container(path, symmetry_tol: float = 1e-10) -> DataSet:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read container {path}: {exc}") from exc
    return decode_container(blob, symmetry_tol)


# --------------------------------------------------------------------------
# CSV


def csv_text(header: list[str], rows) -> str:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [",".join(header)]
    lines += [",".join(CSV_FORMAT % v for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, header: list[str], rows) -> Path:
    return atomic_write(path, csv_text(header, rows))


def read_csv(path):
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    rows = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    return header, rows


def traces_csv(data: DataSet) -> tuple[list[str], np.ndarray]:
    """One row per frame: time, then every ``(source, receiver)`` entry with ``source <= receiver``."""
    iu = np.triu_indices(data.m)
    header = ["t"] + [f"s{i}_r{j}" for i, j in zip(*iu)]
    rows = np.column_stack([np.arange(data.two_n) * data.tau, data.frames[:, iu[0], iu[1]]])
    return header, rows


# --------------------------------------------------------------------------
# configuration


def load_schema() -> dict:
    return json.loads(resources.files("dtb.configs").joinpath("schema.json").read_text())


def _error_path(err) -> str:
    parts = ["config"] + [f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path]
    return parts[0] + "".join(parts[1:])


def validate_config(config: dict) -> dict:
    """Validate against the bundled schema; all violations are reported with their JSON path."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError("; ".join(f"{_error_path(e)}: {e.message}" for e in errors))
    med = config["medium"]
    if med["dimension"] == 1:
        prof = med.get("profile", {})
        if prof.get("kind") == "layered" and len(prof["interfaces"]) != len(prof["values"]):
            raise ConfigError("config.medium.profile: interfaces and values differ in length")
    return config


def with_defaults(config: dict) -> dict:
    out = copy.deepcopy(config)
    out.setdefault("solver", "spectral")
    out.setdefault("substeps", None)
    out.setdefault("seed", 0)
    out.setdefault("noise", 0.0)
    out.setdefault("normalize", "none")
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return with_defaults(validate_config(config))


def bundled_config_names() -> list[str]:
    root = resources.files("dtb.configs")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json") and p.name != "schema.json")


def bundled_config_path(name: str) -> Path:
    path = resources.files("dtb.configs").joinpath(f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"no bundled config named {name!r}; available: {bundled_config_names()}")
    return Path(str(path))


def resolve_config(ref: str) -> Path:
    """A filesystem path, or the name of a bundled config."""
    p = Path(ref)
    if p.exists():
        return p
    return bundled_config_path(ref)
