"""CSV ingestion, model persistence and atomic file output."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile

import numpy as np

from .core import CgmlrParams, Dataset, NpcgmrParams, SpcgmrParams
from .kernel import KernelSpec, LocalGrid

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Malformed user input (bad CSV, bad model file, bad flag value)."""


def atomic_write(path, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_xy_csv(path) -> Dataset:
    """Read a CSV with a header containing ``x`` and ``y``; other columns are ignored."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if "x" not in header or "y" not in header:
        raise InputError(f"{path}:1: header must contain columns 'x' and 'y'")
    extra = [h for h in header if h not in ("x", "y")]
    if extra:
        log.warning("ignoring extra columns: %s", ", ".join(extra))
    ix, iy = header.index("x"), header.index("y")
    xs, ys = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            xv, yv = float(row[ix]), float(row[iy])
        except (IndexError, ValueError):
            raise InputError(f"{path}:{lineno}: expected numeric x,y, got {row!r}") from None
        if not (math.isfinite(xv) and math.isfinite(yv)):
            raise InputError(f"{path}:{lineno}: non-finite value")
        xs.append(xv)
        ys.append(yv)
    if not xs:
        raise InputError(f"{path}: no data rows")
    return Dataset(np.array(xs), np.array(ys))


def xy_to_csv(data: Dataset, labels: bool = False) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "y", "true_label"] if labels else ["x", "y"])
    for i in range(data.n):
        row = [repr(float(data.x[i])), repr(float(data.y[i]))]
        if labels:
            row.append(int(data.true_labels[i]))
        wr.writerow(row)
    return buf.getvalue()


def _floats(a):
    return [float(v) for v in np.ravel(a)] if np.ndim(a) == 1 else [[float(v) for v in r] for r in a]


def model_to_dict(kind: str, result, data: Dataset) -> dict:
    params, rep = result.params, result.report
    out = {
        "schema_version": SCHEMA_VERSION,
        "model": kind,
        "K": int(params.K),
        "n": int(data.n),
        "x_span": [float(np.min(data.x)), float(np.max(data.x))],
        "kernel": None if rep.kernel is None else {"kind": rep.kernel.kind, "h": float(rep.kernel.h)},
        "alpha": _floats(params.alpha),
        "eta": _floats(params.eta),
        "loglik": float(rep.loglik),
        "complete_loglik": float(rep.complete_loglik),
        "df": float(rep.df),
        "aic": float(rep.aic),
        "bic": float(rep.bic),
        "icl": float(rep.icl),
        "n_iter": int(rep.n_iter),
        "converged": bool(rep.converged),
    }
    if isinstance(params, NpcgmrParams):
        out.update(grid=_floats(params.grid.points), pi_curves=_floats(params.pi_curves),
                   m_curves=_floats(params.m_curves), var_curves=_floats(params.var_curves))
    elif isinstance(params, SpcgmrParams):
        out.update(grid=_floats(params.grid.points), pi=_floats(params.pi),
                   var=_floats(params.var), m_curves=_floats(params.m_curves))
    elif isinstance(params, CgmlrParams):
        out.update(pi=_floats(params.pi), beta=_floats(params.beta), var=_floats(params.var))
    else:
        raise TypeError(f"cannot serialise {type(params).__name__}")
    return out


def dump_model(kind: str, result, data: Dataset) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps(model_to_dict(kind, result, data), indent=1) + "\n"


def params_from_dict(d: dict):
    if d.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported model schema version {d.get('schema_version')!r}")
    try:
        if "pi_curves" in d:
            return NpcgmrParams(LocalGrid(d["grid"]), d["pi_curves"], d["m_curves"],
                                d["var_curves"], d["alpha"], d["eta"])
        if "m_curves" in d:
            return SpcgmrParams(d["pi"], d["var"], LocalGrid(d["grid"]), d["m_curves"],
                                d["alpha"], d["eta"])
        return CgmlrParams(d["pi"], d["beta"], d["var"], d["alpha"], d["eta"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model file: {exc}") from exc


def load_model(path):
    """Return ``(params, model_dict)`` from a model JSON file."""
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load model {path}: {exc}") from exc
    return params_from_dict(d), d


def kernel_from_dict(d):
    k = d.get("kernel")
    return None if k is None else KernelSpec(k["kind"], k["h"])
