"""Scenario files: a strict, versioned YAML schema describing topology,
controller configuration, schedules, integration settings and monitors.

Unknown fields are errors.  Time-like fields carry their unit in the
field name (`dt_hours`, `t_seconds`, ...) selected by the top-level
`time_unit`; there is no implicit unit conversion.  Validation failures
are collected and reported together, each naming the violated modeling
assumption:

    A1  the physical network is connected
    A2  at least one node has a controllable external input
    A3  the communication graph is balanced and strongly connected
    A4  every setpoint lies in the open range of the output map
    A5  the steady state is attainable inside the constraint ranges
    A7  controller output maps are C1, strictly increasing, range-exact
    A9  (potential variant) the actuated set is a zero forcing set
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
import yaml

from .controllers import ControllerConfig, ControllerState, Cost, default_controller_state
from .graphs import CommGraph, NetworkTopology, is_connected
from .model import CompartmentalParams, PlantParams, Schedule, SetpointRamp, VARIANTS
from .saturation import Saturation

__all__ = [
    "Scenario",
    "ScenarioParseError",
    "ScenarioValidationError",
    "load_scenario",
    "loads_scenario",
    "save_scenario",
    "preset_names",
    "load_preset",
    "preset_text",
]

SCHEMA_VERSION = 1
TIME_UNITS = ("hours", "seconds", "dimensionless")


class ScenarioParseError(ValueError):
    pass


class ScenarioValidationError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("scenario validation failed:\n  - " + "\n  - ".join(self.violations))


def _suffix(unit: str) -> str:
    return {"hours": "_hours", "seconds": "_seconds", "dimensionless": ""}[unit]


@dataclass(frozen=True)
class IntegrationSettings:
    dt: float
    horizon: float
    log_every: int
    time_unit: str


@dataclass(frozen=True)
class InitialConditions:
    x: np.ndarray
    mode: str = "midrange"  # midrange | equilibrium | explicit
    mu: np.ndarray | None = None
    xi: np.ndarray | None = None
    theta: np.ndarray | None = None
    phi: np.ndarray | None = None

    def controller_state(self, variant: str, cfg: ControllerConfig, ref0) -> ControllerState:
        if self.mode == "midrange":
            return default_controller_state(cfg, variant)
        if self.mode == "equilibrium":
            if ref0 is None or not ref0.complete:
                raise ScenarioValidationError(
                    ["A5 (steady state attainable): equilibrium initialization requested "
                     "but the initial segment has no strictly attainable reference"]
                )
            return ControllerState(
                mu=ref0.mu.copy(),
                theta=ref0.theta.copy(),
                xi=None if ref0.xi is None or variant not in ("basic", "compartmental") else ref0.xi.copy(),
                phi=None if variant == "reduced" else ref0.phi.copy(),
            )
        return ControllerState(
            mu=self.mu.copy(),
            theta=self.theta.copy(),
            xi=None if self.xi is None else self.xi.copy(),
            phi=None if self.phi is None else self.phi.copy(),
        )


@dataclass(frozen=True)
class MonitorSettings:
    constraints: bool = True
    lyapunov: bool = True
    convergence_y_band: float | None = None
    convergence_u_band: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    variant: str
    topology: NetworkTopology
    comm_undirected: bool
    plant: PlantParams
    controller: ControllerConfig
    schedule: Schedule
    integration: IntegrationSettings
    initial: InitialConditions
    monitors: MonitorSettings
    compartmental: CompartmentalParams | None = None
    description: str = ""
    incremental: bool = False

    def prepared(self) -> "Scenario":
        """Resolve a setpoint ramp into the incremental-coordinate scenario.

        The state becomes xtil = x - ybar(t) with setpoint 0 and the ramp
        slope folded into the disturbance during the ramp window; valid
        for identity output maps only (enforced at load time).
        """
        ramp = self.schedule.setpoint_ramp
        if ramp is None:
            return self
        times = sorted({t for t, _ in self.schedule.disturbance}
                       | {t for t in (ramp.t1, ramp.t2) if t > 0.0} | {0.0})
        events = []
        for ts in times:
            dval = self.schedule.d_at(ts)
            if ramp.t1 <= ts < ramp.t2:
                dval = dval + ramp.slope
            events.append((ts, dval))
        zero = np.zeros(self.topology.n)
        sched = Schedule(tuple(events), ((0.0, zero),), None)
        x0 = np.asarray(self.initial.x, dtype=float) - self.schedule.ybar_at(0.0)
        init = replace(self.initial, x=x0)
        return replace(self, schedule=sched, initial=init, incremental=True)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Ctx:
    def __init__(self):
        self.violations: list[str] = []

    def err(self, msg: str):
        self.violations.append(msg)

    def raise_if_any(self):
        if self.violations:
            raise ScenarioValidationError(self.violations)


def _check_keys(ctx: _Ctx, mapping: dict, path: str, allowed: set[str], required: set[str]):
    if not isinstance(mapping, dict):
        ctx.err(f"{path}: expected a mapping")
        return False
    unknown = set(mapping) - allowed
    for k in sorted(unknown):
        ctx.err(f"{path}.{k}: unknown field (strict schema)")
    missing = required - set(mapping)
    for k in sorted(missing):
        ctx.err(f"{path}.{k}: required field missing")
    return not unknown and not missing


def _floats(ctx: _Ctx, value, path: str, length: int | None = None) -> np.ndarray | None:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        ctx.err(f"{path}: expected a list of numbers")
        return None
    if arr.ndim != 1 or (length is not None and arr.shape[0] != length):
        ctx.err(f"{path}: expected {length if length is not None else 'a'} number(s), got shape {arr.shape}")
        return None
    return arr


def _maps(ctx: _Ctx, value, path: str, length: int) -> tuple[Saturation, ...] | None:
    specs = value if isinstance(value, list) else [value] * length
    if len(specs) != length:
        ctx.err(f"{path}: expected {length} map(s), got {len(specs)}")
        return None
    out = []
    for i, spec in enumerate(specs):
        try:
            out.append(Saturation.from_dict(spec))
        except (ValueError, KeyError, TypeError) as exc:
            ctx.err(f"{path}[{i}]: A7 (admissible output map): {exc}")
            return None
    return tuple(out)


def loads_scenario(text: str) -> Scenario:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioParseError("scenario file must contain a YAML mapping")
    return _build(raw)


def load_scenario(path) -> Scenario:
    with open(path, "r") as fh:
        text = fh.read()
    return loads_scenario(text)


def _build(raw: dict) -> Scenario:
    ctx = _Ctx()
    top_allowed = {"schema_version", "name", "description", "variant", "time_unit",
                   "topology", "comm", "plant", "controller", "schedule",
                   "integration", "initial", "monitors"}
    top_required = top_allowed - {"description", "monitors"}
    _check_keys(ctx, raw, "scenario", top_allowed, top_required)
    ctx.raise_if_any()

    if raw["schema_version"] != SCHEMA_VERSION:
        ctx.err(f"schema_version: expected {SCHEMA_VERSION}, got {raw['schema_version']}")
    variant = raw["variant"]
    if variant not in VARIANTS:
        ctx.err(f"variant: expected one of {VARIANTS}, got {variant!r}")
    unit = raw["time_unit"]
    if unit not in TIME_UNITS:
        ctx.err(f"time_unit: expected one of {TIME_UNITS}, got {unit!r}")
    ctx.raise_if_any()
    sfx = _suffix(unit)

    # --- topology ---------------------------------------------------------
    tp = raw["topology"]
    _check_keys(ctx, tp, "topology",
                {"nodes", "edges", "actuated", "compartmental_edges", "state_dependent_io"},
                {"nodes", "edges", "actuated"})
    ctx.raise_if_any()
    try:
        topo = NetworkTopology(
            n=int(tp["nodes"]),
            edges=tuple(tuple(e) for e in tp["edges"]),
            actuated=tuple(tp["actuated"]),
            compartmental_edges=tuple(tuple(e) for e in tp.get("compartmental_edges", ())),
            state_dependent_io=tuple(tp.get("state_dependent_io", ())),
        )
    except (ValueError, TypeError) as exc:
        if "controllable external input" in str(exc):
            ctx.err(f"topology: A2 (at least one controllable input): {exc}")
        else:
            ctx.err(f"topology: {exc}")
        ctx.raise_if_any()
    if not is_connected(topo):
        ctx.err("topology: A1 (connected network): the physical graph is not connected")
    n, m, p = topo.n, topo.m, topo.p

    # --- communication graph ----------------------------------------------
    cm = raw["comm"]
    _check_keys(ctx, cm, "comm", {"undirected", "edges"}, {"edges"})
    ctx.raise_if_any()
    undirected = bool(cm.get("undirected", True))
    local = {node: j for j, node in enumerate(topo.actuated)}
    arcs = []
    for i, entry in enumerate(cm["edges"]):
        if len(entry) != 3:
            ctx.err(f"comm.edges[{i}]: expected [from_node, to_node, weight]")
            continue
        a, b, w = int(entry[0]), int(entry[1]), float(entry[2])
        if a not in local or b not in local:
            ctx.err(f"comm.edges[{i}]: A3 (communication graph on actuated nodes): "
                    f"({a},{b}) links a non-actuated node")
            continue
        arcs.append((local[a], local[b], w))
    ctx.raise_if_any()
    try:
        comm = CommGraph.undirected(p, arcs) if undirected else CommGraph(p, tuple(arcs))
        comm.validate()
    except ValueError as exc:
        ctx.err(f"comm: A3 (balanced, strongly connected communication graph): {exc}")
        ctx.raise_if_any()

    # --- plant --------------------------------------------------------------
    pl = raw["plant"]
    _check_keys(ctx, pl, "plant",
                {"t_x", "capacitance_farads", "output_maps", "gamma_maps", "eta_maps"}, set())
    if ("t_x" in pl) == ("capacitance_farads" in pl):
        ctx.err("plant: give exactly one of t_x / capacitance_farads")
    ctx.raise_if_any()
    t_x = _floats(ctx, pl.get("t_x", pl.get("capacitance_farads")), "plant.t_x", n)
    out_maps = _maps(ctx, pl.get("output_maps", {"kind": "identity"}), "plant.output_maps", n)
    ctx.raise_if_any()
    try:
        plant = PlantParams(t_x, out_maps)
    except ValueError as exc:
        ctx.err(f"plant: {exc}")
        ctx.raise_if_any()

    comp = None
    if variant == "compartmental":
        lc = topo.n_compartmental_edges
        pc = len(topo.state_dependent_io)
        if lc == 0 and pc == 0:
            ctx.err("topology: compartmental variant needs compartmental_edges and/or state_dependent_io")
        gmaps = _maps(ctx, pl.get("gamma_maps", {"kind": "identity"}), "plant.gamma_maps", lc)
        emaps = _maps(ctx, pl.get("eta_maps", {"kind": "identity"}), "plant.eta_maps", pc)
        ctx.raise_if_any()
        comp = CompartmentalParams(gmaps, emaps)
    elif "gamma_maps" in pl or "eta_maps" in pl:
        ctx.err("plant: gamma_maps/eta_maps only apply to the compartmental variant")
    ctx.raise_if_any()

    # --- controller -----------------------------------------------------------
    cl = raw["controller"]
    allowed = {"t_mu", "inductance_henries", "t_xi", "t_theta", "t_phi",
               "flow_maps", "input_maps", "cost"}
    _check_keys(ctx, cl, "controller", allowed, {"t_theta", "flow_maps", "input_maps", "cost"})
    if ("t_mu" in cl) == ("inductance_henries" in cl):
        ctx.err("controller: give exactly one of t_mu / inductance_henries")
    needs_xi = variant in ("basic", "compartmental")
    if needs_xi and "t_xi" not in cl:
        ctx.err(f"controller.t_xi: required for the {variant} variant")
    if not needs_xi and "t_xi" in cl:
        ctx.err(f"controller.t_xi: the {variant} variant has no xi state")
    if variant == "reduced" and "t_phi" in cl:
        ctx.err("controller.t_phi: the reduced variant has no phi state")
    if variant != "reduced" and "t_phi" not in cl:
        ctx.err(f"controller.t_phi: required for the {variant} variant")
    ctx.raise_if_any()

    t_mu = _floats(ctx, cl.get("t_mu", cl.get("inductance_henries")), "controller.t_mu", m)
    t_theta = _floats(ctx, cl["t_theta"], "controller.t_theta", p)
    t_xi = _floats(ctx, cl["t_xi"], "controller.t_xi", m) if "t_xi" in cl else None
    t_phi = _floats(ctx, cl["t_phi"], "controller.t_phi", p) if "t_phi" in cl else None
    flow_maps = _maps(ctx, cl["flow_maps"], "controller.flow_maps", m)
    input_maps = _maps(ctx, cl["input_maps"], "controller.input_maps", p)
    cost_raw = cl["cost"]
    _check_keys(ctx, cost_raw, "controller.cost", {"q", "r", "s"}, {"q"})
    ctx.raise_if_any()
    q = _floats(ctx, cost_raw["q"], "controller.cost.q", p)
    r = _floats(ctx, cost_raw.get("r", [0.0] * p), "controller.cost.r", p)
    s = _floats(ctx, cost_raw.get("s", [0.0] * p), "controller.cost.s", p)
    ctx.raise_if_any()
    try:
        cfg = ControllerConfig(
            t_mu=t_mu, t_theta=t_theta, t_xi=t_xi, t_phi=t_phi,
            flow_maps=flow_maps, input_maps=input_maps,
            cost=Cost(q, r, s), comm=comm,
        )
    except ValueError as exc:
        ctx.err(f"controller: {exc}")
        ctx.raise_if_any()

    # --- schedule -----------------------------------------------------------
    sc = raw["schedule"]
    _check_keys(ctx, sc, "schedule", {"disturbance", "setpoint", "setpoint_ramp"}, {"disturbance"})
    ctx.raise_if_any()
    tkey = "t" + sfx
    dist = []
    for i, ev in enumerate(sc["disturbance"]):
        if _check_keys(ctx, ev, f"schedule.disturbance[{i}]", {tkey, "d"}, {tkey, "d"}):
            vec = _floats(ctx, ev["d"], f"schedule.disturbance[{i}].d", n)
            if vec is not None:
                dist.append((float(ev[tkey]), vec))
    setp = []
    ramp = None
    if "setpoint" in sc and "setpoint_ramp" in sc:
        ctx.err("schedule: give either setpoint events or setpoint_ramp, not both")
    if "setpoint" in sc:
        for i, ev in enumerate(sc["setpoint"]):
            if _check_keys(ctx, ev, f"schedule.setpoint[{i}]", {tkey, "y"}, {tkey, "y"}):
                vec = _floats(ctx, ev["y"], f"schedule.setpoint[{i}].y", n)
                if vec is not None:
                    setp.append((float(ev[tkey]), vec))
    elif "setpoint_ramp" in sc:
        rr = sc["setpoint_ramp"]
        keys = {"t1" + sfx, "t2" + sfx, "y1", "y2"}
        if _check_keys(ctx, rr, "schedule.setpoint_ramp", keys, keys):
            y1 = _floats(ctx, rr["y1"], "schedule.setpoint_ramp.y1", n)
            y2 = _floats(ctx, rr["y2"], "schedule.setpoint_ramp.y2", n)
            if y1 is not None and y2 is not None:
                ramp = SetpointRamp(float(rr["t1" + sfx]), float(rr["t2" + sfx]), y1, y2)
            for hmap in plant.output_maps:
                if hmap.kind != "identity":
                    ctx.err("schedule.setpoint_ramp: ramp tracking requires identity output maps")
    else:
        ctx.err("schedule: needs setpoint events or a setpoint_ramp")
    ctx.raise_if_any()
    try:
        schedule = Schedule(tuple(dist), tuple(setp), ramp)
    except ValueError as exc:
        ctx.err(f"schedule: {exc}")
        ctx.raise_if_any()

    # A4: every scheduled setpoint value strictly inside the output range
    check_points = [v for _, v in schedule.setpoint]
    if ramp is not None:
        check_points += [ramp.y1, ramp.y2]
    for vec in check_points:
        for i, (hmap, yi) in enumerate(zip(plant.output_maps, vec)):
            if not (hmap.lower < yi < hmap.upper):
                ctx.err(f"schedule: A4 (setpoint within output range): node {i} setpoint {yi} "
                        f"outside ({hmap.lower}, {hmap.upper})")

    # --- integration ----------------------------------------------------------
    it = raw["integration"]
    dtk, hk = "dt" + sfx, "horizon" + sfx
    _check_keys(ctx, it, "integration", {dtk, hk, "log_every"}, {dtk, hk})
    ctx.raise_if_any()
    integration = IntegrationSettings(
        dt=float(it[dtk]), horizon=float(it[hk]),
        log_every=int(it.get("log_every", 1)), time_unit=unit,
    )
    if integration.dt <= 0 or integration.horizon <= 0 or integration.log_every < 1:
        ctx.err("integration: need dt > 0, horizon > 0, log_every >= 1")

    # --- initial ------------------------------------------------------------
    init_raw = raw["initial"]
    _check_keys(ctx, init_raw, "initial", {"x", "controllers"}, {"x"})
    ctx.raise_if_any()
    x0 = _floats(ctx, init_raw["x"], "initial.x", n)
    ctrl_raw = init_raw.get("controllers", "midrange")
    mu0 = xi0 = th0 = ph0 = None
    if isinstance(ctrl_raw, str):
        if ctrl_raw not in ("midrange", "equilibrium"):
            ctx.err("initial.controllers: expected 'midrange', 'equilibrium' or a mapping")
        mode = ctrl_raw
    else:
        mode = "explicit"
        fields = {"mu", "theta"} | ({"xi"} if needs_xi else set()) | ({"phi"} if variant != "reduced" else set())
        if _check_keys(ctx, ctrl_raw, "initial.controllers", fields, fields):
            mu0 = _floats(ctx, ctrl_raw["mu"], "initial.controllers.mu", m)
            th0 = _floats(ctx, ctrl_raw["theta"], "initial.controllers.theta", p)
            if needs_xi:
                xi0 = _floats(ctx, ctrl_raw["xi"], "initial.controllers.xi", m)
            if variant != "reduced":
                ph0 = _floats(ctx, ctrl_raw["phi"], "initial.controllers.phi", p)
    ctx.raise_if_any()
    initial = InitialConditions(x=x0, mode=mode, mu=mu0, xi=xi0, theta=th0, phi=ph0)

    # --- monitors -------------------------------------------------------------
    mon_raw = raw.get("monitors", {})
    _check_keys(ctx, mon_raw, "monitors", {"constraints", "lyapunov", "convergence"}, set())
    ctx.raise_if_any()
    y_band = u_band = None
    conv = mon_raw.get("convergence", False)
    if conv not in (False, None):
        if _check_keys(ctx, conv, "monitors.convergence", {"y_band", "u_band"}, {"y_band"}):
            y_band = float(conv["y_band"])
            u_band = None if conv.get("u_band") is None else float(conv["u_band"])
    ctx.raise_if_any()
    monitors = MonitorSettings(
        constraints=bool(mon_raw.get("constraints", True)),
        lyapunov=bool(mon_raw.get("lyapunov", True)),
        convergence_y_band=y_band,
        convergence_u_band=u_band,
    )

    ctx.raise_if_any()
    return Scenario(
        name=str(raw["name"]),
        variant=variant,
        topology=topo,
        comm_undirected=undirected,
        plant=plant,
        controller=cfg,
        schedule=schedule,
        integration=integration,
        initial=initial,
        monitors=monitors,
        compartmental=comp,
        description=str(raw.get("description", "")),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _num(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 1e15 else float(x)


def _veclist(arr) -> list:
    return [_num(v) for v in np.asarray(arr, dtype=float)]


def scenario_to_dict(scn: Scenario) -> dict:
    sfx = _suffix(scn.integration.time_unit)
    topo = scn.topology
    out: dict = {
        "schema_version": SCHEMA_VERSION,
        "name": scn.name,
        "variant": scn.variant,
        "time_unit": scn.integration.time_unit,
    }
    if scn.description:
        out["description"] = scn.description
    t = {"nodes": topo.n, "edges": [list(e) for e in topo.edges], "actuated": list(topo.actuated)}
    if topo.compartmental_edges:
        t["compartmental_edges"] = [list(e) for e in topo.compartmental_edges]
    if topo.state_dependent_io:
        t["state_dependent_io"] = list(topo.state_dependent_io)
    out["topology"] = t

    rev = {j: node for j, node in enumerate(topo.actuated)}
    arcs = scn.controller.comm.arcs
    if scn.comm_undirected:
        seen = set()
        edges = []
        for a, b, w in arcs:
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen.add(key)
                edges.append([rev[key[0]], rev[key[1]], _num(w)])
    else:
        edges = [[rev[a], rev[b], _num(w)] for a, b, w in arcs]
    out["comm"] = {"undirected": scn.comm_undirected, "edges": edges}

    plant: dict = {"t_x": _veclist(scn.plant.t_x),
                   "output_maps": [hm.to_dict() for hm in scn.plant.output_maps]}
    if scn.compartmental is not None:
        if scn.compartmental.gamma:
            plant["gamma_maps"] = [g.to_dict() for g in scn.compartmental.gamma]
        if scn.compartmental.eta:
            plant["eta_maps"] = [e.to_dict() for e in scn.compartmental.eta]
    out["plant"] = plant

    cfg = scn.controller
    ctrl: dict = {"t_mu": _veclist(cfg.t_mu)}
    if cfg.t_xi is not None:
        ctrl["t_xi"] = _veclist(cfg.t_xi)
    ctrl["t_theta"] = _veclist(cfg.t_theta)
    if cfg.t_phi is not None:
        ctrl["t_phi"] = _veclist(cfg.t_phi)
    ctrl["flow_maps"] = [f.to_dict() for f in cfg.flow_maps]
    ctrl["input_maps"] = [g.to_dict() for g in cfg.input_maps]
    ctrl["cost"] = {"q": _veclist(cfg.cost.q), "r": _veclist(cfg.cost.r), "s": _veclist(cfg.cost.s)}
    out["controller"] = ctrl

    sched: dict = {"disturbance": [{"t" + sfx: _num(t_), "d": _veclist(v)}
                                   for t_, v in scn.schedule.disturbance]}
    if scn.schedule.setpoint_ramp is not None:
        rr = scn.schedule.setpoint_ramp
        sched["setpoint_ramp"] = {"t1" + sfx: _num(rr.t1), "t2" + sfx: _num(rr.t2),
                                  "y1": _veclist(rr.y1), "y2": _veclist(rr.y2)}
    else:
        sched["setpoint"] = [{"t" + sfx: _num(t_), "y": _veclist(v)}
                             for t_, v in scn.schedule.setpoint]
    out["schedule"] = sched

    out["integration"] = {"dt" + sfx: float(scn.integration.dt),
                          "horizon" + sfx: _num(scn.integration.horizon),
                          "log_every": scn.integration.log_every}
    init: dict = {"x": _veclist(scn.initial.x)}
    if scn.initial.mode == "explicit":
        ctrl0 = {"mu": _veclist(scn.initial.mu), "theta": _veclist(scn.initial.theta)}
        if scn.initial.xi is not None:
            ctrl0["xi"] = _veclist(scn.initial.xi)
        if scn.initial.phi is not None:
            ctrl0["phi"] = _veclist(scn.initial.phi)
        init["controllers"] = ctrl0
    else:
        init["controllers"] = scn.initial.mode
    out["initial"] = init

    mon: dict = {"constraints": scn.monitors.constraints, "lyapunov": scn.monitors.lyapunov}
    if scn.monitors.convergence_y_band is not None:
        mon["convergence"] = {"y_band": float(scn.monitors.convergence_y_band)}
        if scn.monitors.convergence_u_band is not None:
            mon["convergence"]["u_band"] = float(scn.monitors.convergence_u_band)
    out["monitors"] = mon
    return out


def save_scenario(scn: Scenario, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scenario_to_dict(scn), fh, sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def preset_names() -> list[str]:
    root = resources.files("flowreg").joinpath("presets")
    return sorted(f.name[:-4] for f in root.iterdir() if f.name.endswith(".scn"))


def preset_text(name: str) -> str:
    path = resources.files("flowreg").joinpath("presets", f"{name}.scn")
    if not path.is_file():
        raise FileNotFoundError(f"no preset named {name!r}; available: {preset_names()}")
    return path.read_text()


def load_preset(name: str) -> Scenario:
    return loads_scenario(preset_text(name))
