"""Closed-loop assembly, fixed-step RK4 integration with scheduled events,
storage-function evaluation and online monitors.

The integrator is classic fixed-step RK4.  Disturbance and setpoint
switches are snapped onto the step grid and the run is integrated
segment by segment; each segment re-anchors the equilibrium reference
used by the storage-function monitor.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .controllers import ControllerConfig, ControllerState
from .graphs import NetworkTopology, incidence_matrix, input_indicator, is_zero_forcing
from .model import CompartmentalParams, PlantParams, compartmental_term
from .optimum import optimal_input, optimal_input_compartmental, steady_state_flows
from .saturation import RangeError

__all__ = [
    "IntegrationError",
    "SimState",
    "EquilibriumRef",
    "RunLog",
    "state_layout",
    "pack_state",
    "unpack_state",
    "closed_loop_rhs",
    "equilibrium_reference",
    "rk4_integrate",
    "integrate",
    "storage_V",
    "storage_Vdot",
    "vdot_fd_probe",
    "convergence_metrics",
    "MonitorResult",
    "constraint_monitor",
    "lyapunov_monitor",
    "convergence_monitor",
]

VDOT_TOL = 1e-12
V_STEP_RTOL = 1e-8


class IntegrationError(RuntimeError):
    """State became non-finite during integration."""


@dataclass
class SimState:
    t: float
    x: np.ndarray
    mu: np.ndarray
    theta: np.ndarray
    xi: np.ndarray | None = None
    phi: np.ndarray | None = None


def state_layout(variant: str, n: int, m: int, p: int) -> dict:
    """Slice map of the packed state vector for a model variant."""
    sl = {"x": slice(0, n), "mu": slice(n, n + m)}
    if variant in ("basic", "compartmental"):
        sl["xi"] = slice(n + m, n + 2 * m)
        off = n + 2 * m
    else:
        sl["xi"] = None
        off = n + m
    sl["theta"] = slice(off, off + p)
    if variant == "reduced":
        sl["phi"] = None
        sl["dim"] = off + p
    else:
        sl["phi"] = slice(off + p, off + 2 * p)
        sl["dim"] = off + 2 * p
    return sl


def pack_state(variant: str, x: np.ndarray, ctrl: ControllerState) -> np.ndarray:
    n, m, p = len(x), len(ctrl.mu), len(ctrl.theta)
    lay = state_layout(variant, n, m, p)
    w = np.empty(lay["dim"])
    w[lay["x"]] = x
    w[lay["mu"]] = ctrl.mu
    if lay["xi"] is not None:
        if ctrl.xi is None:
            raise ValueError(f"variant {variant!r} needs a xi state")
        w[lay["xi"]] = ctrl.xi
    w[lay["theta"]] = ctrl.theta
    if lay["phi"] is not None:
        if ctrl.phi is None:
            raise ValueError(f"variant {variant!r} needs a phi state")
        w[lay["phi"]] = ctrl.phi
    return w


def unpack_state(variant: str, w: np.ndarray, n: int, m: int, p: int, t: float = 0.0) -> SimState:
    lay = state_layout(variant, n, m, p)
    return SimState(
        t=t,
        x=w[lay["x"]].copy(),
        mu=w[lay["mu"]].copy(),
        xi=w[lay["xi"]].copy() if lay["xi"] is not None else None,
        theta=w[lay["theta"]].copy(),
        phi=w[lay["phi"]].copy() if lay["phi"] is not None else None,
    )


# ---------------------------------------------------------------------------
# closed loop (numpy reference; the numba kernel mirrors this exactly)
# ---------------------------------------------------------------------------

def closed_loop_rhs(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    w: np.ndarray,
    d: np.ndarray,
    ybar: np.ndarray,
    comp: CompartmentalParams | None = None,
) -> np.ndarray:
    """Derivative of the packed closed-loop state."""
    n, m, p = topo.n, topo.m, topo.p
    lay = state_layout(variant, n, m, p)
    if w.shape != (lay["dim"],):
        raise ValueError(f"state must have shape ({lay['dim']},) for variant {variant!r}")
    x = w[lay["x"]]
    mu = w[lay["mu"]]
    theta = w[lay["theta"]]
    y = plant.h(x)
    B = incidence_matrix(topo)
    E = input_indicator(topo)
    lam = cfg.f(mu)
    u = cfg.g(theta)
    err = y - ybar

    out = np.empty_like(w)
    acc = -B @ lam + E @ u - d
    if variant == "compartmental":
        acc = acc + compartmental_term(topo, plant, comp, x)
    out[lay["x"]] = acc / plant.t_x

    if variant in ("basic", "compartmental"):
        xi = w[lay["xi"]]
        out[lay["mu"]] = (B.T @ err - (lam - xi)) / cfg.t_mu
        out[lay["xi"]] = (lam - xi) / cfg.t_xi
    else:
        out[lay["mu"]] = (B.T @ err) / cfg.t_mu

    q, r = cfg.cost.q, cfg.cost.r
    L = cfg.laplacian()
    if variant == "reduced":
        out[lay["theta"]] = (-q * (L @ (q * u + r)) - E.T @ err) / cfg.t_theta
    else:
        phi = w[lay["phi"]]
        out[lay["theta"]] = (-E.T @ err - (u - phi)) / cfg.t_theta
        out[lay["phi"]] = (u - phi - q * (L @ (q * phi + r))) / cfg.t_phi
    return out


# ---------------------------------------------------------------------------
# equilibrium reference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumRef:
    """Reference equilibrium anchoring the storage function of a segment."""

    x: np.ndarray
    mu: np.ndarray | None
    theta: np.ndarray | None
    xi: np.ndarray | None
    phi: np.ndarray | None
    u: np.ndarray
    lam: np.ndarray
    kappa: np.ndarray
    flows_feasible: bool
    inputs_in_range: bool

    @property
    def complete(self) -> bool:
        return self.inputs_in_range and self.flows_feasible


def equilibrium_reference(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    d: np.ndarray,
    ybar: np.ndarray,
    comp: CompartmentalParams | None = None,
) -> EquilibriumRef:
    """Construct the reference (x, mu, xi, theta, phi) for given (d, ybar).

    Follows the standard recipe: x from the setpoint, u from the optimal
    allocation, flows from a strictly feasible steady flow, then the
    controller states from the map preimages.  Missing feasibility is
    reported through the flags rather than raised.
    """
    x_bar = plant.h_inverse(np.asarray(ybar, dtype=float))
    q, r = cfg.cost.q, cfg.cost.r
    if variant == "compartmental":
        alloc = optimal_input_compartmental(q, r, topo, d, comp, plant, x_bar, s=cfg.cost.s)
    else:
        alloc = optimal_input(q, r, topo, d, s=cfg.cost.s)
    u_bar = alloc.u_bar
    inputs_ok = all(gi.lower < ui < gi.upper for gi, ui in zip(cfg.input_maps, u_bar))

    extra = None
    if variant == "compartmental":
        extra = compartmental_term(topo, plant, comp, x_bar)
    bounds = [(fk.lower, fk.upper) for fk in cfg.flow_maps]
    lam_bar, flows_ok = steady_state_flows(topo, u_bar, d, bounds=bounds, extra_injection=extra)

    mu_bar = cfg.f_inverse(lam_bar) if flows_ok else None
    theta_bar = cfg.g_inverse(u_bar) if inputs_ok else None
    xi_bar = lam_bar.copy() if (flows_ok and variant in ("basic", "compartmental")) else None
    phi_bar = u_bar.copy() if (inputs_ok and variant != "reduced") else None
    return EquilibriumRef(
        x=x_bar,
        mu=mu_bar,
        theta=theta_bar,
        xi=xi_bar,
        phi=phi_bar,
        u=u_bar,
        lam=lam_bar,
        kappa=alloc.kappa,
        flows_feasible=bool(flows_ok),
        inputs_in_range=bool(inputs_ok),
    )


def reference_state(variant: str, ref: EquilibriumRef) -> np.ndarray:
    """Packed state vector of a complete equilibrium reference."""
    if not ref.complete:
        raise ValueError("equilibrium reference is not fully constructible")
    ctrl = ControllerState(mu=ref.mu, theta=ref.theta, xi=ref.xi, phi=ref.phi)
    return pack_state(variant, ref.x, ctrl)


# ---------------------------------------------------------------------------
# storage function and its derivative
# ---------------------------------------------------------------------------

def _as_block(states: np.ndarray) -> tuple[np.ndarray, bool]:
    states = np.asarray(states)
    if not np.issubdtype(states.dtype, np.floating):
        states = states.astype(float)
    if states.ndim == 1:
        return states[None, :], True
    return states, False


def storage_V(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    states: np.ndarray,
    ref: EquilibriumRef,
) -> np.ndarray | float:
    """Incremental storage function relative to `ref`.

    Sum of the per-node and per-edge integrals of the increasing maps
    plus the quadratic xi/phi terms; nonnegative, and zero exactly at
    the reference (up to the flow cycle-space ambiguity on cyclic
    graphs).  Not defined for the reduced controllers.
    """
    if variant == "reduced":
        raise ValueError("the reduced controllers have no storage function")
    if not ref.complete:
        raise ValueError("equilibrium reference is not fully constructible")
    block, single = _as_block(states)
    n, m, p = topo.n, topo.m, topo.p
    lay = state_layout(variant, n, m, p)
    v = np.zeros(block.shape[0], dtype=block.dtype)
    for i in range(n):
        v += plant.t_x[i] * plant.output_maps[i].bregman(block[:, i], ref.x[i])
    for k in range(m):
        v += cfg.t_mu[k] * cfg.flow_maps[k].bregman(block[:, n + k], ref.mu[k])
    if lay["xi"] is not None:
        xi = block[:, lay["xi"]]
        v += 0.5 * np.sum(cfg.t_xi * (xi - ref.xi) ** 2, axis=1)
    th = block[:, lay["theta"]]
    for j in range(p):
        v += cfg.t_theta[j] * cfg.input_maps[j].bregman(th[:, j], ref.theta[j])
    phi = block[:, lay["phi"]]
    v += 0.5 * np.sum(cfg.t_phi * (phi - ref.phi) ** 2, axis=1)
    return v[0] if single else v


def storage_Vdot(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    states: np.ndarray,
    ref: EquilibriumRef,
    comp: CompartmentalParams | None = None,
) -> np.ndarray | float:
    """Closed-form derivative of the storage function along the closed loop.

    Every addend is accumulated as an explicitly sign-definite term
    (squares, or products of same-signed increments), so the result is
    nonpositive in floating point as well as in exact arithmetic.
    """
    if variant == "reduced":
        raise ValueError("the reduced controllers have no storage function")
    if not ref.complete:
        raise ValueError("equilibrium reference is not fully constructible")
    block, single = _as_block(states)
    n, m, p = topo.n, topo.m, topo.p
    lay = state_layout(variant, n, m, p)
    nrow = block.shape[0]

    th = block[:, lay["theta"]]
    u = np.column_stack([cfg.input_maps[j](th[:, j]) for j in range(p)])
    phi = block[:, lay["phi"]]
    total = np.zeros(nrow, dtype=block.dtype)

    # marginal-cost gossip term, edgewise so each addend is a square
    vq = cfg.cost.q * (phi - ref.phi)
    for tail, head, w in cfg.comm.arcs:
        total += 0.5 * w * (vq[:, tail] - vq[:, head]) ** 2
    total += np.sum((u - phi) ** 2, axis=1)

    if lay["xi"] is not None and m:
        mu = block[:, lay["mu"]]
        lam = np.column_stack([cfg.flow_maps[k](mu[:, k]) for k in range(m)])
        xi = block[:, lay["xi"]]
        total += np.sum((lam - xi) ** 2, axis=1)

    if variant == "compartmental":
        x = block[:, lay["x"]]
        y = np.column_stack([plant.output_maps[i](x[:, i]) for i in range(n)])
        y_bar = plant.h(ref.x)
        if topo.n_compartmental_edges:
            for k, (tail, head) in enumerate(topo.compartmental_edges):
                a = y[:, tail] - y[:, head]
                a_bar = y_bar[tail] - y_bar[head]
                total += (a - a_bar) * (comp.gamma[k](a) - comp.gamma[k](a_bar))
        for j, node in enumerate(topo.state_dependent_io):
            b = y[:, node]
            b_bar = y_bar[node]
            total += (b - b_bar) * (comp.eta[j](b) - comp.eta[j](b_bar))

    out = -total
    return float(out[0]) if single else out


def rk4_integrate(f, y0: np.ndarray, dt: float, nsteps: int) -> np.ndarray:
    """Generic fixed-step RK4 helper (pure numpy, dtype-preserving);
    returns the final state."""
    y = np.array(y0, copy=True)
    for _ in range(nsteps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
    return y


def vdot_fd_probe(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    state: np.ndarray,
    d: np.ndarray,
    ybar: np.ndarray,
    ref: EquilibriumRef,
    delta: float,
    dt_fine: float,
    comp: CompartmentalParams | None = None,
) -> tuple[float, float]:
    """(closed-form Vdot, finite-difference dV/dt) one probe step after
    `state` along the flow.

    The flow is advanced only forward (the fast modes make backward
    integration useless) with fine RK4 substeps in extended precision:
    when the storage level dwarfs its rate of change, double precision
    alone cannot resolve the finite difference.  The closed form is
    evaluated at the window midpoint so the stencil is centered.
    """
    nst = max(1, int(round(delta / dt_fine)))
    dt_sub = delta / nst
    f = lambda w: closed_loop_rhs(variant, topo, plant, cfg, w, d, ybar, comp=comp)
    w0 = np.asarray(state, dtype=np.longdouble)
    w1 = rk4_integrate(f, w0, dt_sub, nst)
    w2 = rk4_integrate(f, w1, dt_sub, nst)
    v0 = storage_V(variant, topo, plant, cfg, w0, ref)
    v2 = storage_V(variant, topo, plant, cfg, w2, ref)
    fd = float((v2 - v0) / (2.0 * np.longdouble(delta)))
    closed = storage_Vdot(variant, topo, plant, cfg, w1, ref, comp=comp)
    return float(closed), fd


# ---------------------------------------------------------------------------
# run log
# ---------------------------------------------------------------------------

@dataclass
class SegmentInfo:
    k_start: int
    k_end: int
    d: np.ndarray
    ybar: np.ndarray
    ref: EquilibriumRef | None


@dataclass
class RunLog:
    """Sampled trajectory of one run plus per-segment metadata."""

    variant: str
    dt: float
    log_every: int
    t: np.ndarray
    steps: np.ndarray
    states: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    V: np.ndarray
    Vdot: np.ndarray
    margin_flow: np.ndarray
    margin_input: np.ndarray
    segment_id: np.ndarray
    segments: list[SegmentInfo]
    min_margin_flow: float
    min_margin_input: float
    warnings: list[str] = field(default_factory=list)
    incremental: bool = False

    def to_csv(self, path_or_file) -> None:
        """Deterministic CSV: full double precision, fixed column set."""
        n = self.x.shape[1]
        m = self.lam.shape[1]
        p = self.u.shape[1]
        cols = (
            ["t"]
            + [f"x_{i+1}" for i in range(n)]
            + [f"y_{i+1}" for i in range(n)]
            + [f"lambda_{k+1}" for k in range(m)]
            + [f"u_{j+1}" for j in range(p)]
            + ["V", "Vdot", "margin_flow_min", "margin_input_min"]
        )
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            fh.write(",".join(cols) + "\n")
            for i in range(self.t.shape[0]):
                row = [self.t[i], *self.x[i], *self.y[i], *self.lam[i], *self.u[i],
                       self.V[i], self.Vdot[i], self.margin_flow[i], self.margin_input[i]]
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")
        finally:
            if own:
                fh.close()

    def csv_bytes(self) -> bytes:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue().encode()

    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()


# ---------------------------------------------------------------------------
# integration driver
# ---------------------------------------------------------------------------

def _jacobian_spectral_radius(f, w0: np.ndarray) -> float:
    h = 1e-6
    f0 = f(w0)
    J = np.empty((w0.size, w0.size))
    for i in range(w0.size):
        wp = w0.copy()
        step = h * max(1.0, abs(w0[i]))
        wp[i] += step
        J[:, i] = (f(wp) - f0) / step
    return float(np.max(np.abs(np.linalg.eigvals(J)))) if w0.size else 0.0


def _margins(lam_row, u_row, cfg) -> tuple[np.ndarray, np.ndarray]:
    flo = np.array([s.lower for s in cfg.flow_maps])
    fhi = np.array([s.upper for s in cfg.flow_maps])
    glo = np.array([s.lower for s in cfg.input_maps])
    ghi = np.array([s.upper for s in cfg.input_maps])
    def side(vals, lo, hi):
        out = np.full(vals.shape[0], np.inf)
        for k in range(vals.shape[1]):
            if np.isfinite(lo[k]):
                out = np.minimum(out, vals[:, k] - lo[k])
            if np.isfinite(hi[k]):
                out = np.minimum(out, hi[k] - vals[:, k])
        return out
    return side(lam_row, flo, fhi), side(u_row, glo, ghi)


def integrate(scenario) -> RunLog:
    """Run a scenario to completion and return its RunLog.

    Switch times are snapped onto the step grid; the state is continuous
    across switches while the storage reference re-anchors.  Raises
    IntegrationError if the state leaves the finite range.
    """
    scn = scenario.prepared() if hasattr(scenario, "prepared") else scenario
    topo, plant, cfg, comp = scn.topology, scn.plant, scn.controller, scn.compartmental
    variant = scn.variant
    n, m, p = topo.n, topo.m, topo.p
    lay = state_layout(variant, n, m, p)
    dt = float(scn.integration.dt)
    horizon = float(scn.integration.horizon)
    log_every = int(scn.integration.log_every)
    if dt <= 0 or horizon <= 0 or log_every < 1:
        raise ValueError("need dt > 0, horizon > 0, log_every >= 1")
    n_total = int(round(horizon / dt))
    if n_total < 1:
        raise ValueError("horizon shorter than one step")

    run_warnings: list[str] = []

    if variant == "potential" and not is_zero_forcing(topo, topo.actuated):
        msg = ("Assumption 9 violated: the actuated set is not a zero forcing set; "
               "convergence of the potential-flow variant is not certified (integrating anyway)")
        warnings.warn(msg)
        run_warnings.append(msg)

    # segment boundaries on the step grid
    sched = scn.schedule
    switch_steps = []
    for ts in sched.switch_times():
        k = int(round(ts / dt))
        if 0 < k < n_total:
            switch_steps.append(k)
        else:
            run_warnings.append(f"switch at t={ts} outside the run; ignored")
    switch_steps = sorted(set(switch_steps))
    boundaries = [0] + switch_steps + [n_total]

    segments: list[SegmentInfo] = []
    for k0, k1 in zip(boundaries[:-1], boundaries[1:]):
        t_mid = (k0 + 0.5) * dt
        d_seg = sched.d_at(t_mid)
        y_seg = sched.ybar_at(t_mid)
        try:
            ref = equilibrium_reference(variant, topo, plant, cfg, d_seg, y_seg, comp=comp)
        except (RangeError, ValueError):
            ref = None
        if ref is not None and not ref.complete:
            run_warnings.append(
                f"segment starting at step {k0}: reference equilibrium not strictly attainable "
                f"(inputs_in_range={ref.inputs_in_range}, flows_feasible={ref.flows_feasible})"
            )
        segments.append(SegmentInfo(k0, k1, d_seg, y_seg, ref))

    # initial state
    x0 = np.asarray(scn.initial.x, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"initial x must have shape ({n},)")
    ctrl0 = scn.initial.controller_state(variant, cfg, segments[0].ref)
    w = pack_state(variant, x0, ctrl0)

    # step-size advisory from the local linearization
    f0 = lambda ww: closed_loop_rhs(variant, topo, plant, cfg, ww, segments[0].d, segments[0].ybar, comp=comp)
    rho = _jacobian_spectral_radius(f0, w)
    if rho > 0 and dt > 0.1 / rho:
        msg = (f"dt={dt:g} exceeds one tenth of the smallest time constant "
               f"(1/{rho:.3g}); fast modes are at the edge of what RK4 resolves")
        warnings.warn(msg)
        run_warnings.append(msg)

    # kernel argument tables
    tails = np.array([e[0] for e in topo.edges], dtype=np.int64)
    heads = np.array([e[1] for e in topo.edges], dtype=np.int64)
    act = np.array(topo.actuated, dtype=np.int64)
    fkind, flo, fhi, fgain = _kernels.encode_saturations(cfg.flow_maps)
    gkind, glo, ghi, ggain = _kernels.encode_saturations(cfg.input_maps)
    hkind, hlo, hhi, hgain = _kernels.encode_saturations(plant.output_maps)
    if variant == "compartmental" and comp is not None:
        ctails = np.array([e[0] for e in topo.compartmental_edges], dtype=np.int64)
        cheads = np.array([e[1] for e in topo.compartmental_edges], dtype=np.int64)
        ckind, cklo, ckhi, cgain = _kernels.encode_saturations(comp.gamma)
        vc = np.array(topo.state_dependent_io, dtype=np.int64)
        ekind, eklo, ekhi, egain = _kernels.encode_saturations(comp.eta)
    else:
        ctails = np.zeros(0, dtype=np.int64)
        cheads = np.zeros(0, dtype=np.int64)
        ckind, cklo, ckhi, cgain = _kernels.encode_saturations(())
        vc = np.zeros(0, dtype=np.int64)
        ekind, eklo, ekhi, egain = _kernels.encode_saturations(())
    t_xi = cfg.t_xi if cfg.t_xi is not None else np.ones(m)
    t_phi = cfg.t_phi if cfg.t_phi is not None else np.ones(p)
    lcom = cfg.laplacian()
    vcode = _kernels.VARIANT_CODE[variant]

    n_rows = 1 + n_total // log_every + (1 if n_total % log_every else 0)
    log_buf = np.empty((n_rows, lay["dim"]))
    log_buf[0] = w
    count = 1
    margins = np.array([np.inf, np.inf])

    for seg in segments:
        count, status, bad = _kernels.run_segment(
            vcode, w, dt, seg.k_end - seg.k_start, seg.k_start, log_every, log_buf, count,
            n, m, p, tails, heads, act,
            plant.t_x, cfg.t_mu, t_xi, cfg.t_theta, t_phi,
            fkind, flo, fhi, fgain, gkind, glo, ghi, ggain, hkind, hlo, hhi, hgain,
            cfg.cost.q, cfg.cost.r, lcom,
            ctails, cheads, ckind, cklo, ckhi, cgain,
            vc, ekind, eklo, ekhi, egain,
            seg.d, seg.ybar, margins)
        if status != 0:
            raise IntegrationError(
                f"state became non-finite near t={bad * dt:g} (step {bad}); "
                f"typically the step size is too large for the fastest mode"
            )
    if n_total % log_every:
        log_buf[count] = w
        count += 1
    assert count == n_rows

    steps = np.array(
        [0] + [k for k in range(log_every, n_total + 1, log_every)]
        + ([n_total] if n_total % log_every else []),
        dtype=np.int64,
    )
    t_arr = steps * dt

    # attribute each row to the segment that ends at (or after) its step
    ends = np.array([s.k_end for s in segments])
    seg_id = np.searchsorted(ends, steps, side="left")

    x_rows = log_buf[:, lay["x"]]
    y_rows = np.column_stack([plant.output_maps[i](x_rows[:, i]) for i in range(n)]) if n else x_rows
    mu_rows = log_buf[:, lay["mu"]]
    lam_rows = (np.column_stack([cfg.flow_maps[k](mu_rows[:, k]) for k in range(m)])
                if m else np.zeros((n_rows, 0)))
    th_rows = log_buf[:, lay["theta"]]
    u_rows = np.column_stack([cfg.input_maps[j](th_rows[:, j]) for j in range(p)])

    mf, mi = _margins(lam_rows, u_rows, cfg)
    # fold the final state into the global margin trackers
    min_mf = float(min(margins[0], mf[-1]))
    min_mi = float(min(margins[1], mi[-1]))

    V = np.full(n_rows, np.nan)
    Vd = np.full(n_rows, np.nan)
    if variant != "reduced":
        for j, seg in enumerate(segments):
            rows = np.flatnonzero(seg_id == j)
            if rows.size == 0 or seg.ref is None or not seg.ref.complete:
                continue
            V[rows] = storage_V(variant, topo, plant, cfg, log_buf[rows], seg.ref)
            Vd[rows] = storage_Vdot(variant, topo, plant, cfg, log_buf[rows], seg.ref, comp=comp)

    return RunLog(
        variant=variant, dt=dt, log_every=log_every,
        t=t_arr, steps=steps, states=log_buf,
        x=x_rows, y=y_rows, lam=lam_rows, u=u_rows,
        V=V, Vdot=Vd, margin_flow=mf, margin_input=mi,
        segment_id=seg_id, segments=segments,
        min_margin_flow=min_mf, min_margin_input=min_mi,
        warnings=run_warnings,
        incremental=getattr(scn, "incremental", False),
    )


# ---------------------------------------------------------------------------
# monitors and metrics
# ---------------------------------------------------------------------------

@dataclass
class MonitorResult:
    name: str
    passed: bool
    details: str


def constraint_monitor(log: RunLog) -> MonitorResult:
    """Strict interiority of flows and inputs at every integrator step."""
    ok = log.min_margin_flow > 0 and log.min_margin_input > 0
    return MonitorResult(
        "constraints", bool(ok),
        f"min flow margin {log.min_margin_flow:.6g}, min input margin {log.min_margin_input:.6g}",
    )


def lyapunov_monitor(log: RunLog) -> MonitorResult:
    """Per-segment monotone decrease of V and nonpositive closed-form Vdot."""
    if log.variant == "reduced":
        return MonitorResult("lyapunov", True, "not applicable to the reduced controllers")
    worst_step = -np.inf
    worst_vdot = -np.inf
    checked = 0
    for j in range(len(log.segments)):
        rows = np.flatnonzero(log.segment_id == j)
        vals = log.V[rows]
        if rows.size < 2 or np.any(np.isnan(vals)):
            continue
        checked += 1
        tol = V_STEP_RTOL * (1.0 + vals[0])
        worst_step = max(worst_step, float(np.max(np.diff(vals))))
        if np.any(np.diff(vals) > tol):
            return MonitorResult(
                "lyapunov", False,
                f"V increased by {np.max(np.diff(vals)):.3e} (> {tol:.3e}) within segment {j}",
            )
        worst_vdot = max(worst_vdot, float(np.nanmax(log.Vdot[rows])))
        if np.nanmax(log.Vdot[rows]) > VDOT_TOL:
            return MonitorResult(
                "lyapunov", False, f"closed-form Vdot reached {np.nanmax(log.Vdot[rows]):.3e} > {VDOT_TOL:g}"
            )
    if checked == 0:
        return MonitorResult("lyapunov", True, "no segment had a complete reference; nothing checked")
    return MonitorResult(
        "lyapunov", True,
        f"max per-step V increase {worst_step:.3e}, max Vdot {worst_vdot:.3e} over {checked} segment(s)",
    )


@dataclass
class SegmentMetrics:
    t_end: float
    terminal_y_err: float
    terminal_u_err: float | None
    settle_time_y: float | None


@dataclass
class ConvergenceReport:
    segments: list[SegmentMetrics]
    min_margin_flow: float
    min_margin_input: float
    sustained_oscillation: bool


def convergence_metrics(log: RunLog, y_band: float = 1e-3) -> ConvergenceReport:
    """Terminal errors, settle times and constraint margins per segment."""
    out = []
    for j, seg in enumerate(log.segments):
        rows = np.flatnonzero(log.segment_id == j)
        if rows.size == 0:
            continue
        y_err = np.max(np.abs(log.y[rows] - seg.ybar), axis=1)
        term_y = float(y_err[-1])
        term_u = None
        if seg.ref is not None:
            term_u = float(np.max(np.abs(log.u[rows[-1]] - seg.ref.u)))
        inside = y_err <= y_band
        settle = None
        for i in range(rows.size):
            if inside[i:].all():
                settle = float(log.t[rows[i]])
                break
        out.append(SegmentMetrics(float(log.t[rows[-1]]), term_y, term_u, settle))

    # sustained oscillation: the error envelope in the last quarter of the
    # final segment has not collapsed relative to the segment's peak
    rows = np.flatnonzero(log.segment_id == len(log.segments) - 1)
    seg = log.segments[-1]
    y_err = np.max(np.abs(log.y[rows] - seg.ybar), axis=1)
    tail = y_err[3 * rows.size // 4:]
    sustained = bool(tail.size and np.max(tail) > max(0.25 * np.max(y_err), 10 * y_band))
    return ConvergenceReport(out, log.min_margin_flow, log.min_margin_input, sustained)


def convergence_monitor(log: RunLog, y_band: float, u_band: float | None = None) -> MonitorResult:
    """Terminal output (and optionally input) error of the final segment."""
    rep = convergence_metrics(log, y_band=y_band)
    last = rep.segments[-1]
    if last.terminal_y_err > y_band:
        return MonitorResult(
            "convergence", False,
            f"terminal output error {last.terminal_y_err:.6g} exceeds band {y_band:g}"
            + (" (sustained oscillation)" if rep.sustained_oscillation else ""),
        )
    if u_band is not None and last.terminal_u_err is not None and last.terminal_u_err > u_band:
        return MonitorResult(
            "convergence", False,
            f"terminal input error {last.terminal_u_err:.6g} exceeds band {u_band:g}",
        )
    return MonitorResult(
        "convergence", True,
        f"terminal output error {last.terminal_y_err:.6g} within band {y_band:g}",
    )
