"""Bit-exact file formats: trace CSV, runs CSV, JSON reports.

Traces are CSV with `#` metadata comments, a `time_s,value` header
(plus an optional `sigma` column), LF endings, UTF-8, and floats
printed with %.17g so write/read round-trips are lossless. All writes
go through a temp file in the target directory followed by an atomic
rename.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile

import numpy as np

from .dynamics import DataTrace
from .errors import TraceFormatError
from .estimation import SigmaPRun
from .units import intensity_to_si

TRACE_HEADER = "time_s,value"
RUNS_HEADER = "rb_intensity_mw_cm2,ionizing_intensity_mw_cm2,gamma_tot_per_s"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def atomic_write_text(path: str, text: str):
    """Write text to path via temp-file-then-rename in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def write_trace(path: str, trace: DataTrace, metadata: dict | None = None):
    """Serialize a DataTrace; metadata lands in sorted `# key=value` comments."""
    meta = {"kind": trace.value_kind}
    if metadata:
        meta.update(metadata)
    lines = [f"# {key}={meta[key]}" for key in sorted(meta)]
    if trace.sigma is None:
        lines.append(TRACE_HEADER)
        lines.extend(f"{_fmt(t)},{_fmt(v)}" for t, v in zip(trace.times, trace.values))
    else:
        lines.append(TRACE_HEADER + ",sigma")
        lines.extend(f"{_fmt(t)},{_fmt(v)},{_fmt(s)}"
                     for t, v, s in zip(trace.times, trace.values, trace.sigma))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trace(path: str) -> tuple[DataTrace, dict]:
    """Parse a trace CSV back into (DataTrace, metadata)."""
    metadata: dict = {}
    times, values, sigmas = [], [], []
    expect_sigma = None
    saw_header = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if not saw_header:
                if line == TRACE_HEADER:
                    expect_sigma = False
                elif line == TRACE_HEADER + ",sigma":
                    expect_sigma = True
                else:
                    raise TraceFormatError(
                        f"{path}:{lineno}: expected header {TRACE_HEADER!r}, got {line!r}")
                saw_header = True
                continue
            fields = line.split(",")
            want = 3 if expect_sigma else 2
            if len(fields) != want:
                raise TraceFormatError(
                    f"{path}:{lineno}: expected {want} fields, got {len(fields)}")
            try:
                parsed = [float(field) for field in fields]
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
            times.append(parsed[0])
            values.append(parsed[1])
            if expect_sigma:
                sigmas.append(parsed[2])
    if not saw_header:
        raise TraceFormatError(f"{path}: empty file (no header line)")
    if not times:
        raise TraceFormatError(f"{path}: no data rows")
    kind = metadata.get("kind", "atom_number")
    try:
        trace = DataTrace(times=np.array(times), values=np.array(values), value_kind=kind,
                          sigma=np.array(sigmas) if sigmas else None)
    except ValueError as exc:
        raise TraceFormatError(f"{path}: {exc}") from None
    return trace, metadata


def write_runs(path: str, runs: list, metadata: dict | None = None):
    """Serialize SigmaPRun rows; intensities are written in mW/cm^2."""
    lines = [f"# {key}={metadata[key]}" for key in sorted(metadata)] if metadata else []
    lines.append(RUNS_HEADER)
    for run in runs:
        lines.append(f"{_fmt(run.rb_intensity / 10.0)},{_fmt(run.ionizing_intensity / 10.0)},"
                     f"{_fmt(run.gamma_tot)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_runs(path: str) -> list:
    """Parse a runs CSV into SigmaPRun objects (intensities to SI)."""
    runs = []
    saw_header = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if not saw_header:
                if line != RUNS_HEADER:
                    raise TraceFormatError(
                        f"{path}:{lineno}: expected header {RUNS_HEADER!r}, got {line!r}")
                saw_header = True
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise TraceFormatError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
            try:
                rb_i, ion_i, gamma_tot = (float(field) for field in fields)
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
            try:
                runs.append(SigmaPRun(rb_intensity=intensity_to_si(rb_i),
                                      ionizing_intensity=intensity_to_si(ion_i),
                                      gamma_tot=gamma_tot))
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
    if not saw_header:
        raise TraceFormatError(f"{path}: empty file (no header line)")
    if not runs:
        raise TraceFormatError(f"{path}: no data rows")
    return runs


def jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(key): jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(item) for item in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def write_report(path: str, payload: dict):
    """Write a JSON report with stable key ordering."""
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2, allow_nan=False)
    atomic_write_text(path, text + "\n")


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
