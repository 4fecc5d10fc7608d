"""CSV and JSON writers.  Every file carries the hash of the resolved config."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _fmt(v) -> str:
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], chash: str) -> Path:
    """CSV with a leading ``# config_sha256=...`` comment line, then the header row."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# config_sha256={chash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, payload: dict, resolved: dict, chash: str) -> Path:
    doc = {"config_sha256": chash, "config": resolved, **payload}
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
