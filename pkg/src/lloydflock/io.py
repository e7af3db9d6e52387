"""Scenario files (JSON), trace CSV and report JSON.

A scenario file is a JSON object with ``"format_version": 1``. Unknown keys are
rejected everywhere so a typo never silently falls back to a default. Every
error is a :class:`ScenarioFileError` naming the offending field.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .agent import AgentConfig
from .cells import CellParams
from .simulator import (AgentSpec, NoiseModel, Obstacle, Scenario, ScenarioError, TraceReport,
                        Violation)
from .weighting import AdaptationParams

FORMAT_VERSION = 1
TRACE_COLUMNS = ("t", "agent_id", "x", "y", "vx", "vy", "beta", "clearance")

_TOP_REQUIRED = ("format_version", "agents", "adjacency", "gamma_matrix")
_TOP_OPTIONAL = ("name", "seed", "obstacles", "noise", "duration_max", "goal_tolerance",
                 "base_tick", "obstacle_mode", "closest_point_radius", "disturbance",
                 "agent_defaults")
_AGENT_SCALARS = ("delta", "k_p", "v_max", "control_period", "d_u_track", "k_sigma",
                  "lambda_gate", "d_u_fixed", "a_max")
_CELL_KEYS = ("epsilon_p", "epsilon_o", "sensing_radius_rs", "disc_sides")
_ADAPT_KEYS = tuple(f.name for f in fields(AdaptationParams))
_NOISE_KEYS = ("model", "bound", "lambda_mode", "obstacle_bound")


class ScenarioFileError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _check_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ScenarioFileError(where or "<root>", "expected an object")
    for k in obj:
        if k not in allowed and k not in required:
            raise ScenarioFileError(f"{where}.{k}" if where else k, "unknown key")
    for k in required:
        if k not in obj:
            raise ScenarioFileError(f"{where}.{k}" if where else k, "missing required field")


def _num(v, where, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioFileError(where, f"expected a finite number, got {v!r}")
    return float(v)


def _point(v, where):
    if not isinstance(v, list) or len(v) != 2:
        raise ScenarioFileError(where, "expected [x, y]")
    return [_num(v[0], f"{where}[0]"), _num(v[1], f"{where}[1]")]


def _matrix(v, n, where):
    if not isinstance(v, list) or len(v) != n or any(not isinstance(r, list) or len(r) != n
                                                     for r in v):
        raise ScenarioFileError(where, f"expected a {n}x{n} matrix")
    return np.array([[_num(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(v)])


def _agent_config(d, where, goal):
    kw = {}
    for k in _AGENT_SCALARS:
        if k in d:
            kw[k] = _num(d[k], f"{where}.{k}", allow_none=k in ("d_u_fixed", "a_max"))
    cell = d.get("cell", {})
    _check_keys(cell, _CELL_KEYS, f"{where}.cell")
    ckw = {k: _num(v, f"{where}.cell.{k}") for k, v in cell.items()}
    if "disc_sides" in ckw:
        ckw["disc_sides"] = int(ckw["disc_sides"])
    adapt = d.get("adapt", {})
    _check_keys(adapt, _ADAPT_KEYS, f"{where}.adapt")
    akw = {k: (v if k == "turn_sign" else _num(v, f"{where}.adapt.{k}")) for k, v in adapt.items()}
    try:
        cp = CellParams(delta_self=kw.get("delta", 0.2), **ckw)
        ap = AdaptationParams(**akw)
        return AgentConfig(goal=goal, cell_params=cp, adapt_params=ap, **kw)
    except (ValueError, TypeError) as exc:
        raise ScenarioFileError(where, str(exc)) from None


def scenario_from_dict(doc: dict) -> Scenario:
    _check_keys(doc, _TOP_OPTIONAL, "", _TOP_REQUIRED)
    if doc["format_version"] != FORMAT_VERSION:
        raise ScenarioFileError("format_version", f"unsupported version {doc['format_version']!r}")
    agent_keys = ("start", "goal", "cell", "adapt") + _AGENT_SCALARS
    defaults = doc.get("agent_defaults", {})
    _check_keys(defaults, agent_keys[2:], "agent_defaults")
    raw_agents = doc["agents"]
    if not isinstance(raw_agents, list) or not raw_agents:
        raise ScenarioFileError("agents", "expected a non-empty list")
    agents = []
    for i, a in enumerate(raw_agents):
        where = f"agents[{i}]"
        _check_keys(a, agent_keys, where, ("start", "goal"))
        merged = {**defaults, **a}
        for sub in ("cell", "adapt"):
            if sub in defaults or sub in a:
                merged[sub] = {**defaults.get(sub, {}), **a.get(sub, {})}
        cfg = _agent_config(merged, where, _point(a["goal"], f"{where}.goal"))
        agents.append(AgentSpec(_point(a["start"], f"{where}.start"), cfg))
    n = len(agents)
    adj = _matrix(doc["adjacency"], n, "adjacency") != 0
    gam = _matrix(doc["gamma_matrix"], n, "gamma_matrix")
    obstacles = []
    for k, o in enumerate(doc.get("obstacles", [])):
        where = f"obstacles[{k}]"
        _check_keys(o, (), where, ("center", "radius"))
        try:
            obstacles.append(Obstacle(_point(o["center"], f"{where}.center"),
                                      _num(o["radius"], f"{where}.radius")))
        except ScenarioError as exc:
            raise ScenarioFileError(where, str(exc)) from None
    noise_doc = doc.get("noise", {})
    _check_keys(noise_doc, _NOISE_KEYS, "noise")
    if noise_doc.get("model", "bounded-radial") != "bounded-radial":
        raise ScenarioFileError("noise.model", "only 'bounded-radial' is supported")
    kw = {}
    for k in ("duration_max", "goal_tolerance", "base_tick", "closest_point_radius"):
        if k in doc:
            kw[k] = _num(doc[k], k)
    for k, typ in (("seed", int), ("disturbance", bool), ("obstacle_mode", str), ("name", str)):
        if k in doc:
            if not isinstance(doc[k], typ) or (typ is int and isinstance(doc[k], bool)):
                raise ScenarioFileError(k, f"expected {typ.__name__}")
            kw[k] = doc[k]
    try:
        noise = NoiseModel(_num(noise_doc.get("bound", 0.0), "noise.bound"),
                           noise_doc.get("lambda_mode", "saturated"),
                           _num(noise_doc.get("obstacle_bound", 0.0), "noise.obstacle_bound"))
        sc = Scenario(tuple(agents), tuple(obstacles), adj, gam, noise, **kw)
        sc.validate()
    except ScenarioError as exc:
        raise ScenarioFileError("scenario", str(exc)) from None
    return sc


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"line {exc.lineno}", exc.msg) from None
    return scenario_from_dict(doc)


def _agent_dict(spec: AgentSpec) -> dict:
    c = spec.config
    d = {"start": spec.start.tolist(), "goal": c.goal.tolist()}
    for k in _AGENT_SCALARS:
        d[k] = getattr(c, k)
    cp = c.cell_params
    d["cell"] = {k: getattr(cp, k) for k in _CELL_KEYS}
    d["adapt"] = asdict(c.adapt_params)
    return d


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": sc.name,
        "seed": int(sc.seed),
        "duration_max": sc.duration_max,
        "goal_tolerance": sc.goal_tolerance,
        "base_tick": sc.base_tick,
        "obstacle_mode": sc.obstacle_mode,
        "closest_point_radius": sc.closest_point_radius,
        "disturbance": sc.disturbance,
        "noise": {"model": "bounded-radial", "bound": sc.noise.bound,
                  "lambda_mode": sc.noise.lambda_mode, "obstacle_bound": sc.noise.obstacle_bound},
        "agents": [_agent_dict(a) for a in sc.agents],
        "obstacles": [{"center": o.center.tolist(), "radius": o.radius} for o in sc.obstacles],
        "adjacency": sc.adjacency.astype(int).tolist(),
        "gamma_matrix": sc.gamma_matrix.tolist(),
    }


def save_scenario(sc: Scenario, path):
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=1) + "\n")


def _f6(x) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.6f}"


def write_trace_csv(trace: TraceReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for k, t in enumerate(trace.times):
            for i in range(trace.n_agents):
                p, v = trace.positions[k, i], trace.velocity_cmd[k, i]
                w.writerow([_f6(t), i, _f6(p[0]), _f6(p[1]), _f6(v[0]), _f6(v[1]),
                            _f6(trace.beta[k, i]), _f6(trace.clearance[k, i])])


class TraceFileError(ValueError):
    pass


def read_trace_csv(path, n_agents: int | None = None) -> TraceReport:
    """Rebuild a trace (without goal times or events) from its CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise TraceFileError(f"header must be {','.join(TRACE_COLUMNS)}")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise TraceFileError(f"bad value: {exc}") from None
    if data.size == 0 or data.shape[1] != len(TRACE_COLUMNS):
        raise TraceFileError("trace has no rows or a ragged row")
    ids = data[:, 1].astype(int)
    n = int(ids.max()) + 1
    if n_agents is not None and n != n_agents:
        raise TraceFileError(f"trace has {n} agents, scenario has {n_agents}")
    if len(data) % n or not np.array_equal(ids, np.tile(np.arange(n), len(data) // n)):
        raise TraceFileError("rows must list every agent at every time step in order")
    d = data.reshape(-1, n, len(TRACE_COLUMNS))
    times = d[:, 0, 0]
    if np.any(np.diff(times) <= 0):
        raise TraceFileError("timestamps must increase")
    return TraceReport(times, d[:, :, 2:4].copy(), d[:, :, 4:6].copy(), d[:, :, 6].copy(),
                       d[:, :, 7].copy(), [None] * n, [], [], seed=-1)


def violations_to_list(vs) -> list:
    return [asdict(v) for v in vs]


def violations_from_list(items) -> list:
    return [Violation(**d) for d in items]


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
