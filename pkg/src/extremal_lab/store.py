"""Profile files, plot series, and the on-disk candidate cache."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .minima import CandidateSet, MinimaProfile


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


# ---------------------------------------------------------------------------
# profiles


def profile_text(prof: MinimaProfile) -> str:
    """One JSON header line (prefixed by '#'), then the CSV block."""
    header = {"zeta": prof.zeta_spec, "n": prof.n, "side": prof.side,
              "backend": prof.backend, "precision_bits": prof.bits}
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    m = prof.n + 1
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q"] + [f"L_{j}" for j in range(1, m + 1)] + [f"id_{j}" for j in range(1, m + 1)])
    for i, q in enumerate(prof.grid):
        w.writerow([fmt(q)] + [fmt(v) for v in prof.values[i]] + [int(k) for k in prof.witnesses[i]])
    return buf.getvalue()


def write_profile(prof: MinimaProfile, path: str | os.PathLike) -> None:
    atomic_write_text(path, profile_text(prof))


def read_profile(path: str | os.PathLike) -> MinimaProfile:
    """Load a profile file; the result carries no candidate set."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("missing profile header")
    header = json.loads(lines[0][2:])
    rows = list(csv.reader(lines[2:]))
    m = header["n"] + 1
    arr = np.array([[float(x) for x in r[:1 + m]] for r in rows])
    ids = np.array([[int(x) for x in r[1 + m:]] for r in rows], dtype=np.int64)
    return MinimaProfile(header["side"], header["n"], arr[:, 0], arr[:, 1:], ids, None,
                         header["zeta"], header["backend"], header["precision_bits"])


def write_plot_data(prof: MinimaProfile, directory: str | os.PathLike, stem: str) -> list[Path]:
    """One (q, L) series file per level."""
    out = []
    for j in range(1, prof.n + 2):
        p = Path(directory) / f"{stem}_L{j}.csv"
        body = "q,L\n" + "".join(f"{fmt(q)},{fmt(v)}\n" for q, v in zip(prof.grid, prof.L(j)))
        atomic_write_text(p, body)
        out.append(p)
    return out


def rows_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# candidate cache


class CandidateCache:
    """Candidate sets stored as JSON under a config-hash key."""

    def __init__(self, root: str | os.PathLike | None):
        self.root = Path(root) if root else None

    def _path(self, key: str) -> Path:
        return self.root / f"cands_{key}.json"

    def get(self, key: str) -> CandidateSet | None:
        if self.root is None:
            return None
        p = self._path(key)
        if not p.exists():
            return None
        d = json.loads(p.read_text())
        cert = tuple(d["certified"]) if d["certified"] is not None else None
        return CandidateSet(d["side"], d["n"], [tuple(v) for v in d["vectors"]],
                            np.array(d["log_height"], dtype=float),
                            np.array(d["log_error"], dtype=float), d["backend"], cert)

    def put(self, key: str, cs: CandidateSet) -> None:
        if self.root is None:
            return
        d = {"side": cs.side, "n": cs.n, "backend": cs.backend,
             "certified": list(cs.certified) if cs.certified is not None else None,
             "vectors": [list(v) for v in cs.vectors],
             "log_height": [float(x) for x in cs.log_height],
             "log_error": [float(x) for x in cs.log_error]}
        atomic_write_text(self._path(key), json.dumps(d))

    def get_or_build(self, key: str, build) -> CandidateSet:
        cs = self.get(key)
        if cs is None:
            cs = build()
            self.put(key, cs)
        return cs
