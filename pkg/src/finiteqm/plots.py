"""Vector-graphics plots of persisted experiment results.

Each kind knows which columns it needs and fails loudly when the input
lacks them; nothing is written until the figure is fully rendered.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigError, DomainError  # noqa: E402

KINDS = ("convergence", "scan", "residuals")


def _read_csv(path: Path) -> list:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ConfigError("result file %s is empty" % path)
        rows = list(reader)
    if not rows:
        raise ConfigError("result file %s has a header but no data rows" % path)
    return rows


def _read_json(path: Path, kind: str) -> list:
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError("result file %s is not valid JSON: %s" % (path, exc))
    if isinstance(doc, list):
        rows = doc
    elif kind == "scan" and isinstance(doc, dict) and "norm_scan" in doc:
        rows = doc["norm_scan"]
    elif kind == "residuals" and isinstance(doc, dict) and "diagonal_residuals" in doc:
        rows = doc["diagonal_residuals"]
    else:
        raise ConfigError("result file %s has no rows for kind %r" % (path, kind))
    if not rows:
        raise ConfigError("result file %s has no data rows" % path)
    return rows


def _column(rows, *names):
    for name in names:
        if name in rows[0]:
            try:
                return np.array([float(r[name]) for r in rows])
            except (TypeError, ValueError) as exc:
                raise ConfigError("column %r is not numeric: %s" % (name, exc))
    raise ConfigError("result rows lack required column (one of %s); found %s"
                      % (names, sorted(rows[0].keys())))


def plot(result_file, kind: str) -> Path:
    """Render one result file to SVG next to the input; returns the SVG path."""
    if kind not in KINDS:
        raise DomainError("unknown plot kind %r; expected one of %s" % (kind, KINDS))
    path = Path(result_file)
    if not path.exists():
        raise ConfigError("result file %s does not exist" % path)
    if path.suffix == ".json":
        rows = _read_json(path, kind)
    else:
        rows = _read_csv(path)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    try:
        if kind == "convergence":
            k = _column(rows, "K", "k")
            err = _column(rows, "error", "err")
            positive = err > 0
            if not np.any(positive):
                raise ConfigError("convergence plot needs positive errors; all entries are 0")
            ax.loglog(k[positive], err[positive], marker="o")
            ax.set_xlabel("slices K")
            ax.set_ylabel("relative error")
            ax.set_title("sliced-amplitude convergence")
        elif kind == "scan":
            n = _column(rows, "N", "n")
            # log f is plotted on a linear axis: it already is the log,
            # and exp(log_f) overflows for large N off the critical point
            log_f = _column(rows, "log_f", "logf")
            ax.plot(n, log_f, marker="o")
            ax.set_xlabel("N")
            ax.set_ylabel("log f")
            ax.set_title("Gaussian norm scan")
        else:
            n = _column(rows, "n", "N")
            res = _column(rows, "residual_re", "re")
            ax.plot(n, res, marker="o", linestyle="none")
            ax.axhline(1.0, color="gray", linewidth=0.8)
            ax.set_xlabel("basis index n")
            ax.set_ylabel("commutator diagonal / (i hbar)")
            ax.set_title("CCR diagonal residuals")
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        out = path.with_name(path.stem + "_" + kind + ".svg")
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=out.name + ".", suffix=".tmp")
        os.close(fd)
        try:
            fig.savefig(tmp, format="svg")
            os.replace(tmp, out)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
    finally:
        plt.close(fig)
    return out
