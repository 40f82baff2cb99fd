"""CSV and manifest files.

CSVs carry a header row and 17 significant digits, so a value read back is
bit-identical to the double that was written.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .grid import RadialGrid, RadialProfile

__all__ = [
    "write_csv",
    "read_csv",
    "sha256_file",
    "write_manifest",
    "read_manifest",
    "profile_from_csv",
]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, columns: dict) -> Path:
    """Write equal-length columns; order of the dict is the column order."""
    path = Path(path)
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {dict(zip(names, map(len, cols)))}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
    return path


def write_rows(path, rows: list[dict]) -> Path:
    if not rows:
        raise ValueError("no rows to write")
    names = list(rows[0])
    return write_csv(path, {k: [r[k] for r in rows] for k in names})


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        data = [[float(x) for x in row] for row in reader if row]
    arr = np.array(data, dtype=float).reshape(-1, len(names))
    return {k: arr[:, i] for i, k in enumerate(names)}


def profile_from_csv(path, n: int) -> RadialProfile:
    """Rebuild a RadialProfile from a profile CSV (uniform r column from 0)."""
    cols = read_csv(path)
    r = cols["r"]
    M = len(r) - 1
    grid = RadialGrid(n, float(r[-1]), M)
    if not np.allclose(r, grid.r, rtol=0, atol=1e-12 * max(1.0, r[-1])):
        raise ValueError(f"{path}: r column is not a uniform grid from 0")
    return RadialProfile(grid, cols["u"])


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Path):
        return str(x)
    return x


def write_manifest(outdir, manifest: dict, files: list) -> Path:
    """manifest.json listing every data file with its sha256."""
    outdir = Path(outdir)
    entries = []
    for f in files:
        f = Path(f)
        entries.append({"path": str(f.relative_to(outdir)), "sha256": sha256_file(f)})
    body = dict(manifest)
    body["files"] = entries
    path = outdir / "manifest.json"
    path.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=False) + "\n")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
