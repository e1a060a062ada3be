"""Plant dynamics of the flow network and the disturbance/setpoint
schedules driving a run.

Three model variants share the storage dynamics
``T_x xdot = -B lam + E u - d`` with output ``y = h(x)``:

* ``basic``          - flows are states of the dynamic flow controller
* ``compartmental``  - adds the state-dependent exchange/outflow term Psi(x)
* ``potential``      - flow rates driven by output (potential) differences

Disturbances are piecewise constant; the integrator restarts at switch
times so each segment sees a constant d.  Setpoints are piecewise
constant, or one linear ramp that is handled by a change of coordinates
(see `ramp_transform`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import NetworkTopology, incidence_matrix, input_indicator
from .saturation import Saturation, identity

__all__ = [
    "VARIANTS",
    "PlantParams",
    "CompartmentalParams",
    "SetpointRamp",
    "Schedule",
    "plant_rhs",
    "compartmental_term",
    "aggregate_balance",
    "ramp_transform",
]

VARIANTS = ("basic", "compartmental", "potential", "reduced")


def _as_vector(v, length: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class PlantParams:
    """Storage gains T_x (diagonal, positive) and per-node output maps h_i."""

    t_x: np.ndarray
    output_maps: tuple[Saturation, ...]

    def __post_init__(self):
        object.__setattr__(self, "t_x", np.asarray(self.t_x, dtype=float))
        object.__setattr__(self, "output_maps", tuple(self.output_maps))
        if np.any(self.t_x <= 0) or not np.all(np.isfinite(self.t_x)):
            raise ValueError("t_x entries must be finite and > 0")
        for h in self.output_maps:
            if not h.is_strictly_increasing:
                raise ValueError("output maps must be strictly increasing")
        if len(self.output_maps) != self.t_x.shape[0]:
            raise ValueError("need one output map per node")

    @property
    def n(self) -> int:
        return self.t_x.shape[0]

    @classmethod
    def with_identity_output(cls, t_x) -> "PlantParams":
        t_x = np.asarray(t_x, dtype=float)
        return cls(t_x, tuple(identity() for _ in range(t_x.shape[0])))

    def h(self, x: np.ndarray) -> np.ndarray:
        return np.array([hm(xi) for hm, xi in zip(self.output_maps, x)])

    def h_inverse(self, y: np.ndarray) -> np.ndarray:
        return np.array([hm.inverse(yi) for hm, yi in zip(self.output_maps, y)])


@dataclass(frozen=True)
class CompartmentalParams:
    """Nondecreasing C1 maps for the compartmental exchange term: one gamma
    per compartmental edge, one eta per state-dependent in/outflow node."""

    gamma: tuple[Saturation, ...]
    eta: tuple[Saturation, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(self.gamma))
        object.__setattr__(self, "eta", tuple(self.eta))
        # nondecreasing is enough here; strict monotonicity is not required

    def gamma_eval(self, a: np.ndarray) -> np.ndarray:
        return np.array([g(ai) for g, ai in zip(self.gamma, a)])

    def eta_eval(self, b: np.ndarray) -> np.ndarray:
        return np.array([e(bi) for e, bi in zip(self.eta, b)])


@dataclass(frozen=True)
class SetpointRamp:
    """Linear setpoint transition from y1 at t1 to y2 at t2 (t2 > t1)."""

    t1: float
    t2: float
    y1: np.ndarray
    y2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y1", np.asarray(self.y1, dtype=float))
        object.__setattr__(self, "y2", np.asarray(self.y2, dtype=float))
        if not self.t2 > self.t1:
            raise ValueError("ramp needs t2 > t1")
        if self.y1.shape != self.y2.shape:
            raise ValueError("ramp endpoints must have the same shape")

    @property
    def slope(self) -> np.ndarray:
        return (self.y2 - self.y1) / (self.t2 - self.t1)


@dataclass(frozen=True)
class Schedule:
    """Event lists (switch time, value).  First event of each list must sit
    at t = 0 so the value is defined from the start of the run."""

    disturbance: tuple[tuple[float, np.ndarray], ...]
    setpoint: tuple[tuple[float, np.ndarray], ...] = ()
    setpoint_ramp: SetpointRamp | None = None

    def __post_init__(self):
        dist = tuple((float(t), np.asarray(v, dtype=float)) for t, v in self.disturbance)
        setp = tuple((float(t), np.asarray(v, dtype=float)) for t, v in self.setpoint)
        object.__setattr__(self, "disturbance", dist)
        object.__setattr__(self, "setpoint", setp)
        if not dist:
            raise ValueError("schedule needs at least one disturbance event")
        for events, what in ((dist, "disturbance"), (setp, "setpoint")):
            if events and events[0][0] != 0.0:
                raise ValueError(f"first {what} event must be at t=0")
            times = [t for t, _ in events]
            if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
                raise ValueError(f"{what} switch times must be strictly increasing")
        if self.setpoint_ramp is not None and len(setp) > 0:
            raise ValueError("give either setpoint events or a ramp, not both")
        if self.setpoint_ramp is None and not setp:
            raise ValueError("schedule needs a setpoint (events or ramp)")

    def d_at(self, t: float) -> np.ndarray:
        value = self.disturbance[0][1]
        for ts, v in self.disturbance:
            if ts <= t:
                value = v
        return value

    def ybar_at(self, t: float) -> np.ndarray:
        if self.setpoint_ramp is not None:
            r = self.setpoint_ramp
            if t <= r.t1:
                return r.y1
            if t >= r.t2:
                return r.y2
            return r.y1 + (t - r.t1) * r.slope
        value = self.setpoint[0][1]
        for ts, v in self.setpoint:
            if ts <= t:
                value = v
        return value

    def switch_times(self) -> list[float]:
        times = {t for t, _ in self.disturbance if t > 0.0}
        times.update(t for t, _ in self.setpoint if t > 0.0)
        if self.setpoint_ramp is not None:
            if self.setpoint_ramp.t1 > 0.0:
                times.add(self.setpoint_ramp.t1)
            times.add(self.setpoint_ramp.t2)
        return sorted(times)


def compartmental_term(
    topo: NetworkTopology, plant: PlantParams, comp: CompartmentalParams, x: np.ndarray
) -> np.ndarray:
    """State-dependent exchange term
    Psi(x) = -B_c gamma(B_c^T h(x)) - E_c eta(E_c^T h(x))."""
    y = plant.h(x)
    psi = np.zeros(topo.n)
    if topo.n_compartmental_edges:
        Bc = incidence_matrix(topo, compartmental=True)
        psi -= Bc @ comp.gamma_eval(Bc.T @ y)
    if topo.state_dependent_io:
        Ec = input_indicator(topo, state_dependent=True)
        psi -= Ec @ comp.eta_eval(Ec.T @ y)
    return psi


def plant_rhs(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    x: np.ndarray,
    lam: np.ndarray,
    u: np.ndarray,
    d: np.ndarray,
    comp: CompartmentalParams | None = None,
) -> np.ndarray:
    """Storage-level derivative T_x^{-1} (Psi(x) - B lam + E u - d), with the
    Psi term only in the compartmental variant."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    x = _as_vector(x, topo.n, "x")
    lam = _as_vector(lam, topo.m, "lam")
    u = _as_vector(u, topo.p, "u")
    d = _as_vector(d, topo.n, "d")
    B = incidence_matrix(topo)
    E = input_indicator(topo)
    acc = -B @ lam + E @ u - d
    if variant == "compartmental":
        if comp is None:
            raise ValueError("compartmental variant needs CompartmentalParams")
        acc = acc + compartmental_term(topo, plant, comp, x)
    return acc / plant.t_x


def aggregate_balance(topo: NetworkTopology, u: np.ndarray, d: np.ndarray) -> float:
    """Net external supply 1^T (E u - d); zero at any equilibrium."""
    u = _as_vector(u, topo.p, "u")
    d = _as_vector(d, topo.n, "d")
    return float(np.sum(u) - np.sum(d))


def ramp_transform(schedule: Schedule, d: np.ndarray, plant: PlantParams) -> np.ndarray:
    """Constant disturbance of the incremental system tracking the ramp.

    In coordinates xtil = x - ybar(t) (valid only for identity output
    maps) the plant during the ramp window sees
    dtil = d + (y2 - y1) / (t2 - t1).
    """
    if schedule.setpoint_ramp is None:
        return np.asarray(d, dtype=float)
    for h in plant.output_maps:
        if h.kind != "identity":
            raise ValueError("ramp tracking requires identity output maps")
    return np.asarray(d, dtype=float) + schedule.setpoint_ramp.slope
