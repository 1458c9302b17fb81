"""File formats: distribution and ensemble JSON, graph edge lists, CSV reports.

All file formats number elements and vertices from 1.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .concentration import MatrixEnsemble
from .distributions import DEFAULT_MAX_N, Distribution, build_distribution
from .errors import LinfError, ParseError
from .graphs import WeightedGraph

SIG_DIGITS = 12


def _load_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def _exact_keys(obj, keys: set[str], where: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    extra = set(obj) - keys
    missing = keys - set(obj)
    if extra:
        raise ParseError(f"{where}: unknown keys {sorted(extra)}")
    if missing:
        raise ParseError(f"{where}: missing keys {sorted(missing)}")


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    return x


def _num(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ParseError(f"{where}: expected a finite number, got {x!r}")
    return float(x)


# --- distributions ----------------------------------------------------------------


def distribution_from_dict(obj, max_n: int = DEFAULT_MAX_N) -> Distribution:
    _exact_keys(obj, {"n", "support"}, "distribution")
    n = _int(obj["n"], "n")
    if not isinstance(obj["support"], list):
        raise ParseError("support: expected a list")
    entries = []
    for pos, item in enumerate(obj["support"]):
        where = f"support[{pos}]"
        _exact_keys(item, {"set", "p"}, where)
        if not isinstance(item["set"], list):
            raise ParseError(f"{where}.set: expected a list")
        idx = [_int(i, f"{where}.set") for i in item["set"]]
        if any(i < 1 or i > n for i in idx):
            raise ParseError(f"{where}.set: indices must lie in 1..{n}")
        if len(set(idx)) != len(idx):
            raise ParseError(f"{where}.set: repeated index")
        entries.append(([i - 1 for i in idx], _num(item["p"], f"{where}.p")))
    try:
        return build_distribution(n, entries, max_n=max_n)
    except LinfError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def distribution_to_dict(mu: Distribution) -> dict:
    return {
        "n": mu.n,
        "support": [{"set": [i + 1 for i in s], "p": p} for s, p in mu.support()],
    }


def read_distribution(path, max_n: int = DEFAULT_MAX_N) -> Distribution:
    return distribution_from_dict(_load_json(path), max_n)


def write_distribution(mu: Distribution, path):
    with open(path, "w") as fh:
        json.dump(distribution_to_dict(mu), fh, indent=1)
        fh.write("\n")


# --- ensembles --------------------------------------------------------------------


def ensemble_from_dict(obj) -> MatrixEnsemble:
    _exact_keys(obj, {"d", "R", "mats"}, "ensemble")
    d = _int(obj["d"], "d")
    R = _num(obj["R"], "R")
    if d < 1:
        raise ParseError("d must be positive")
    if not isinstance(obj["mats"], list):
        raise ParseError("mats: expected a list")
    mats = []
    for pos, m in enumerate(obj["mats"]):
        if not isinstance(m, list) or len(m) != d * d:
            raise ParseError(f"mats[{pos}]: expected {d * d} numbers")
        mats.append(np.array([_num(x, f"mats[{pos}]") for x in m]).reshape(d, d))
    stack = np.array(mats) if mats else np.zeros((0, d, d))
    try:
        return MatrixEnsemble(stack, R)
    except ValueError as exc:
        raise ParseError(f"ensemble: {exc}") from exc


def ensemble_to_dict(ens: MatrixEnsemble) -> dict:
    return {"d": ens.d, "R": ens.r_cap, "mats": [m.ravel().tolist() for m in ens.mats]}


def read_ensemble(path) -> MatrixEnsemble:
    return ensemble_from_dict(_load_json(path))


def write_ensemble(ens: MatrixEnsemble, path):
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(ens), fh)
        fh.write("\n")


# --- graphs -----------------------------------------------------------------------


def parse_graph(text: str) -> WeightedGraph:
    """Header ``n m`` then ``m`` lines ``u v w``; blank lines and ``#`` comments skipped."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("graph: empty input")
    head = lines[0].split()
    try:
        n, m = int(head[0]), int(head[1])
        if len(head) != 2:
            raise ValueError
    except (ValueError, IndexError):
        raise ParseError(f"graph: bad header {lines[0]!r}, expected 'n m'") from None
    if len(lines) - 1 != m:
        raise ParseError(f"graph: header announces {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        try:
            if len(parts) != 3:
                raise ValueError
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"graph: bad edge line {ln!r}, expected 'u v w'") from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"graph: edge {ln!r} outside vertices 1..{n}")
        edges.append((u - 1, v - 1, w))
    try:
        return WeightedGraph(n, edges)
    except LinfError:
        raise
    except ValueError as exc:
        raise ParseError(f"graph: {exc}") from exc


def read_graph(path) -> WeightedGraph:
    return parse_graph(Path(path).read_text())


def format_graph(g: WeightedGraph) -> str:
    rows = [f"{g.n} {g.m}"] + [f"{u + 1} {v + 1} {fmt(w)}" for u, v, w in g.edges]
    return "\n".join(rows) + "\n"


# --- CSV --------------------------------------------------------------------------


def fmt(x) -> str:
    """Numbers with 12 significant digits; everything else via ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0:
            return "0"
        return f"{x:.{SIG_DIGITS}g}"
    return "" if x is None else str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def write_matrix_csv(path, M: np.ndarray):
    header = [f"c{j + 1}" for j in range(M.shape[1])]
    write_csv(path, header, M.tolist())
