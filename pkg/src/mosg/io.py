"""CSV and JSON artifacts.

Floats are written with ``repr`` so files round-trip exactly and identical
runs give identical bytes.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RESULT_COLUMNS = ["n", "t", "seed", "config", "hv", "igdplus", "runtime_ms", "timeout"]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass(eq=False)
class FrontTable:
    fitness: np.ndarray
    codes: np.ndarray | None
    coverage: np.ndarray | None


def front_header(n_attackers: int, n_targets: int, with_codes: bool = True) -> list[str]:
    cols = [f"f{i + 1}" for i in range(n_attackers)]
    if with_codes:
        cols += [f"i{i + 1}" for i in range(n_attackers)]
    return cols + [f"c{t + 1}" for t in range(n_targets)]


def write_front_csv(path, fitness, codes, coverage) -> None:
    """One row per solution: fitness ``f*``, I-code ``i*`` (omitted when None), coverage ``c*``."""
    fitness = np.atleast_2d(np.asarray(fitness, dtype=float))
    coverage = np.atleast_2d(np.asarray(coverage, dtype=float))
    n, t = fitness.shape[1], coverage.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(front_header(n, t, codes is not None))
        for k in range(len(fitness)):
            row = list(fitness[k])
            if codes is not None:
                row += [int(g) for g in codes[k]]
            row += list(coverage[k])
            w.writerow([_fmt(x) for x in row])


def read_front_csv(path) -> FrontTable:
    """Read a front file; files with only ``f*`` columns (or no recognized prefix) give fitness only."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric value ({exc})") from None

    def cols(prefix):
        idx = [k for k, h in enumerate(header) if h.startswith(prefix) and h[len(prefix):].isdigit()]
        return data[:, idx] if idx else None

    f = cols("f")
    if f is None:
        # a bare matrix of objective values
        return FrontTable(data, None, None)
    codes = cols("i")
    return FrontTable(f, None if codes is None else codes.astype(np.int64), cols("c"))


def write_results_csv(path, rows, columns=None) -> None:
    dicts = [r.to_dict() if hasattr(r, "to_dict") else dict(r) for r in rows]
    columns = columns or (list(dicts[0]) if dicts else RESULT_COLUMNS)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for d in dicts:
            w.writerow([_fmt(d[c]) for c in columns])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
