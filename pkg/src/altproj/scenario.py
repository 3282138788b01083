"""
Declarative scenarios: parsing, validation and execution.

The text format is flat ``key = value`` lines with dotted sections::

    dim = 2
    setA.kind = sawtooth-graph
    setA.depth = 40
    setB.kind = diagonal-line
    xbar = 0, 0
    method.scheme = tau-sigma
    method.tau = 0.9

Vectors are comma separated and lists of scalars or vectors use ``;``.
``#`` starts a comment. A JSON object with the same nested layout is accepted
as well. Children of a ``finite-union`` are ``setA.children.0.kind = ...``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import sets as S
from .analysis import compare_all, estimate_rate
from .errors import DomainError, NoRateError, NumericalFailure, ScenarioError
from .iterate import InexactnessPolicy, alternating, run_sigma_monotone, run_tau_sigma
from .regularity import RadiusLadder, SamplingConfig, estimate_all

DEFAULT_RADII = (0.5, 0.1, 0.02)


# ---------------------------------------------------------------------------
# parsing


def _scalar(tok: str):
    t = tok.strip()
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def _value(raw: str):
    raw = raw.strip()
    if ";" in raw:
        return [_value(p) for p in raw.split(";") if p.strip()]
    if "," in raw:
        return [_scalar(p) for p in raw.split(",")]
    return _scalar(raw)


def _insert(tree: dict, key: str, value, line: int | None):
    parts = key.split(".")
    node = tree
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ScenarioError(f"key {key!r} conflicts with an earlier scalar", line)
        node = nxt
    if parts[-1] in node:
        raise ScenarioError(f"duplicate key {key!r}", line)
    node[parts[-1]] = value


def parse_text(text: str) -> dict:
    """Nested dict from scenario text (key-value or JSON)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    tree: dict = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {raw.strip()!r}", n)
        key, val = line.split("=", 1)
        key = key.strip()
        if not key or any(not p for p in key.split(".")):
            raise ScenarioError(f"malformed key {key!r}", n)
        if not val.strip():
            raise ScenarioError(f"missing value for {key!r}", n)
        _insert(tree, key, _value(val), n)
    return tree


# ---------------------------------------------------------------------------
# set construction


def _vec(v, name: str, dim: int | None = None) -> np.ndarray:
    if isinstance(v, (int, float)):
        v = [v]
    try:
        a = np.asarray(v, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ScenarioError(f"{name} must be numeric, got {v!r}") from None
    if dim is not None and a.size != dim:
        raise ScenarioError(f"{name} has {a.size} coordinates, expected {dim}")
    if not np.all(np.isfinite(a)):
        raise ScenarioError(f"{name} must be finite")
    return a


def _vecs(v, name: str, dim: int) -> np.ndarray:
    if isinstance(v, list) and v and isinstance(v[0], list):
        return np.array([_vec(r, name, dim) for r in v])
    return _vec(v, name, dim)[None, :]


def _need(node: dict, key: str, where: str):
    if key not in node:
        raise ScenarioError(f"{where}: missing '{key}'")
    return node[key]


def build_set(node: dict, dim: int, where: str = "set") -> S.SetOracle:
    """Set oracle from one ``setA``/``setB`` section."""
    if not isinstance(node, dict):
        raise ScenarioError(f"{where} must be a section")
    kind = _need(node, "kind", where)
    try:
        if kind == "affine-subspace":
            dirs = node.get("directions")
            D = _vecs(dirs, f"{where}.directions", dim) if dirs is not None else np.zeros((0, dim))
            return S.AffineSubspace(_vec(_need(node, "point", where), f"{where}.point", dim), D)
        if kind == "line":
            return S.line(_vec(_need(node, "point", where), f"{where}.point", dim), _vec(_need(node, "direction", where), f"{where}.direction", dim))
        if kind == "halfspace":
            return S.Halfspace(_vec(_need(node, "normal", where), f"{where}.normal", dim), float(_need(node, "offset", where)))
        if kind == "ball":
            return S.Ball(_vec(_need(node, "center", where), f"{where}.center", dim), float(_need(node, "radius", where)))
        if kind == "convex-polygon":
            if dim != 2:
                raise ScenarioError(f"{where}: convex-polygon needs dim = 2")
            return S.ConvexPolygon(_vecs(_need(node, "vertices", where), f"{where}.vertices", 2))
        if kind == "segment":
            return S.segment(_vec(_need(node, "p", where), f"{where}.p", dim), _vec(_need(node, "q", where), f"{where}.q", dim))
        if kind == "ray":
            return S.ray(_vec(_need(node, "origin", where), f"{where}.origin", dim), _vec(_need(node, "direction", where), f"{where}.direction", dim))
        if kind == "segment-union":
            segs = _vecs(_need(node, "segments", where), f"{where}.segments", 2 * dim)
            return S.segment_union(segs.reshape(-1, 2, dim))
        if kind == "ray-union":
            return S.ray_union(_vec(_need(node, "origin", where), f"{where}.origin", dim), _vecs(_need(node, "directions", where), f"{where}.directions", dim))
        if kind == "sawtooth-graph":
            if dim != 2:
                raise ScenarioError(f"{where}: sawtooth-graph needs dim = 2")
            depth = int(node.get("depth", 40))
            if not 1 <= depth <= 60:
                raise ScenarioError(f"{where}.depth must lie in [1, 60]")
            return S.sawtooth_graph(depth)
        if kind == "diagonal-line":
            if dim != 2:
                raise ScenarioError(f"{where}: diagonal-line needs dim = 2")
            return S.diagonal_line(float(node.get("t0", 0.0)), float(node.get("t1", 1.0)))
        if kind == "finite-union":
            ch = _need(node, "children", where)
            if not isinstance(ch, dict) or not ch:
                raise ScenarioError(f"{where}.children must hold numbered sections")
            keys = sorted(ch, key=lambda k: int(k) if str(k).isdigit() else str(k))
            return S.Union([build_set(ch[k], dim, f"{where}.children.{k}") for k in keys])
    except DomainError as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    raise ScenarioError(f"{where}: unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# scenario object


@dataclass
class Scenario:
    name: str
    dim: int
    A: S.SetOracle
    B: S.SetOracle
    xbar: np.ndarray
    ladder: RadiusLadder
    policy: InexactnessPolicy
    sampling: SamplingConfig
    x0: list[np.ndarray] = field(default_factory=list)
    radii: tuple[float, ...] = DEFAULT_RADII
    seeds: tuple[int, ...] = (0,)
    tol: float = 1e-12
    max_iter: int = 100_000
    provenance: str = ""
    raw: dict = field(default_factory=dict, repr=False)


def _as_list(v) -> list:
    if v is None:
        return []
    return v if isinstance(v, list) else [v]


def from_tree(tree: dict, name: str = "scenario") -> Scenario:
    """Build and validate a scenario. Raises ScenarioError naming the failed check."""
    if not isinstance(tree, dict):
        raise ScenarioError("scenario must be a mapping")
    dim = _need(tree, "dim", "scenario")
    if not isinstance(dim, int) or dim < 1:
        raise ScenarioError("dim must be a positive integer")
    A = build_set(_need(tree, "setA", "scenario"), dim, "setA")
    B = build_set(_need(tree, "setB", "scenario"), dim, "setB")
    xbar = _vec(_need(tree, "xbar", "scenario"), "xbar", dim)
    for label, s in (("setA", A), ("setB", B)):
        d = s.distance(xbar)
        if d > 1e-9:
            raise ScenarioError(f"validation failed: xbar is not in {label} (distance {d:.3g} > 1e-9)")
    lad = tree.get("ladder", {})
    try:
        ladder = RadiusLadder(float(lad.get("rho0", 0.25)), float(lad.get("factor", 0.5)), int(lad.get("levels", 6)))
    except DomainError as exc:
        raise ScenarioError(f"validation failed: ladder: {exc}") from None
    m = tree.get("method", {})
    scheme = m.get("scheme", "exact")
    tau = float(m.get("tau", 1.0))
    sigma = float(m.get("sigma", 0.0))
    if scheme == "sigma-monotone":
        tau = 1.0
    try:
        policy = InexactnessPolicy(scheme, tau, sigma, m.get("mode", "nearest"), int(m.get("seed", 0)))
    except DomainError as exc:
        raise ScenarioError(f"validation failed: method: {exc}") from None
    smp = tree.get("sampling", {})
    sampling = SamplingConfig(int(smp.get("n_grid", 200)), int(smp.get("n_random", 200)), int(smp.get("seed", 0)))
    if sampling.n_grid < 2 or sampling.n_random < 0:
        raise ScenarioError("validation failed: sampling counts out of range")
    run = tree.get("run", {})
    x0 = run.get("x0")
    pts = []
    if x0 is not None:
        rows = x0 if isinstance(x0, list) and x0 and isinstance(x0[0], list) else [x0]
        pts = [_vec(r, "run.x0", dim) for r in rows]
    radii = tuple(float(r) for r in _as_list(run.get("radii"))) or DEFAULT_RADII
    if any(not r > 0 for r in radii):
        raise ScenarioError("validation failed: run.radii must be positive")
    seeds = tuple(int(s) for s in _as_list(run.get("seeds"))) or (0,)
    tol = float(run.get("tol", 1e-12))
    if not tol > 0:
        raise ScenarioError("validation failed: run.tol must be positive")
    max_iter = int(run.get("max_iter", 100_000))
    return Scenario(
        str(tree.get("name", name)), dim, A, B, xbar, ladder, policy, sampling, pts, radii, seeds, tol, max_iter,
        str(tree.get("provenance", "")), tree,
    )


def load(source: str) -> Scenario:
    """Scenario from a file path or a built-in name."""
    from .builtins import BUILTINS

    if source in BUILTINS:
        text, prov = BUILTINS[source]
        sc = from_tree(parse_text(text), source)
        sc.provenance = sc.provenance or prov
        return sc
    p = Path(source)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {source!r}: {exc.strerror}") from None
    return from_tree(parse_text(text), p.stem)


# ---------------------------------------------------------------------------
# execution


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_json_safe(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return v


def dumps(report: dict) -> str:
    """Deterministic JSON; non-finite floats become the strings ``inf``, ``-inf``, ``nan``."""
    return json.dumps(_json_safe(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def initial_points(sc: Scenario) -> list[tuple[str, float | None, int, np.ndarray]]:
    """``(label, radius, seed, x0)`` for every run; explicit points first, else the radius sweep."""
    runs = []
    if sc.x0:
        for i, p in enumerate(sc.x0):
            for s in sc.seeds:
                runs.append((f"x{i}_s{s}", None, s, p))
        return runs
    for r in sc.radii:
        for s in sc.seeds:
            rng = np.random.default_rng([np.uint64(s), 11])
            g = rng.standard_normal(sc.dim)
            x0 = sc.xbar + (r * sc.ladder.rho0) * g / np.linalg.norm(g)
            if sc.policy.scheme == "sigma-monotone":
                # monotonicity compares against the first step, so start on A
                x0 = sc.A.project(x0).points[0]
            runs.append((f"r{r:g}_s{s}", r, s, x0))
    return runs


def _one_run(sc: Scenario, x0: np.ndarray, seed: int):
    pol = sc.policy
    if pol.scheme == "exact":
        return alternating(sc.A, sc.B, x0, sc.tol, sc.max_iter, seed=seed)
    if pol.scheme == "tau-sigma":
        return run_tau_sigma(sc.A, sc.B, x0, pol.tau, pol.sigma, pol.mode, sc.tol, sc.max_iter, seed)
    return run_sigma_monotone(sc.A, sc.B, x0, None, pol.sigma, pol.mode, sc.tol, sc.max_iter, seed)


def _job(args):
    sc, label, radius, seed, x0 = args
    try:
        return label, _one_run(sc, x0, seed), None
    except NumericalFailure as exc:
        return label, exc.trace, str(exc)


def run(sc: Scenario, out_dir: str | os.PathLike | None = None, jobs: int = 1) -> dict:
    """
    Estimate constants, run every initial point, write CSV traces and a JSON
    report under ``out_dir/<name>``. Returns the report.

    Raises NumericalFailure after writing partial outputs if any run diverged
    to non-finite values.
    """
    report = {"scenario": sc.name, "provenance": sc.provenance, "method": sc.policy.__dict__.copy()}
    constants = estimate_all(sc.A, sc.B, sc.xbar, sc.ladder, sc.sampling)
    report["regularity"] = constants.as_dict()
    tasks = [(sc, lab, r, s, x0) for lab, r, s, x0 in initial_points(sc)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    dest = None
    if out_dir is not None:
        dest = Path(out_dir) / sc.name
        dest.mkdir(parents=True, exist_ok=True)
    runs, failure = [], None
    for (_, lab, radius, seed, x0), (_, trace, err) in zip(tasks, results):
        entry = {
            "label": lab,
            "initial_radius": radius,
            "seed": seed,
            "x0": x0,
            "converged": bool(trace.converged) if trace is not None else False,
            "iterations": len(trace) - 1 if trace is not None else 0,
            "monotonicity_failure": bool(trace.monotonicity_failure) if trace is not None else False,
        }
        if err is not None:
            entry["error"] = err
            failure = failure or err
        if trace is not None and dest is not None:
            fn = f"trace_{lab}.csv"
            (dest / fn).write_text(trace.csv_text())
            entry["trace_csv"] = fn
        if trace is not None and trace.converged:
            rate = estimate_rate(trace)
            entry["rate"] = rate.as_dict()
            entry["verdicts"] = [r.as_dict() for r in compare_all(trace, constants, sc.policy)]
        runs.append(entry)
    report["runs"] = runs
    if dest is not None:
        (dest / "report.json").write_text(dumps(report))
    if failure is not None:
        raise NumericalFailure(failure)
    return report
