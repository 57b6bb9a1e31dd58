"""CSV and metadata writers. Files are written to a temp file and renamed."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .bench import LearningCurve

CURVE_HEADER = "iteration,test_mse,network_size,lambda_mean"


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _fmt(x) -> str:
    return repr(float(x))


def curve_csv(curve: LearningCurve) -> str:
    rows = [CURVE_HEADER]
    for it, mse, size, lam in zip(curve.iterations, curve.test_mse, curve.network_size, curve.lambda_mean):
        rows.append(f"{int(it)},{_fmt(mse)},{_fmt(size)},{_fmt(lam)}")
    return "\n".join(rows) + "\n"


def table_csv(header: str, rows) -> str:
    lines = [header]
    lines += [",".join(str(v) if isinstance(v, (int, str)) else _fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_curve(path, curve: LearningCurve) -> None:
    atomic_write(path, curve_csv(curve))


def write_metadata(path, meta: dict) -> None:
    atomic_write(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
