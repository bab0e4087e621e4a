"""Atomic file output and the shared CSV number format."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path


def fmt(x) -> str:
    """17 significant digits, '.' decimal separator."""
    return f"{float(x):.17g}"


def atomic_write_text(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    """Rows of numbers (formatted with :func:`fmt`) or preformatted strings."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    atomic_write_text(path, buf.getvalue())


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
