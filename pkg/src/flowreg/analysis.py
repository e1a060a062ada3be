"""Offline verification utilities: equilibrium residuals, passivity
identity spot checks, an observability rank test for the linear
potential-flow case, and a structural audit of controller sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controllers import ControllerConfig
from .graphs import RANK_RTOL, NetworkTopology, incidence_matrix, input_indicator, numerical_rank
from .model import CompartmentalParams, PlantParams, compartmental_term
from .sim import EquilibriumRef, closed_loop_rhs, state_layout

__all__ = [
    "EquilibriumResidual",
    "equilibrium_residual",
    "PassivityReport",
    "passivity_check",
    "observability_rank",
    "sparsity_audit",
]


@dataclass(frozen=True)
class EquilibriumResidual:
    """Norms of the five steady-state conditions of the closed loop:
    storage balance, flow-controller stationarity, xi consistency,
    input-controller stationarity, phi/consensus stationarity."""

    r1: float
    r2: float
    r3: float
    r4: float
    r5: float

    @property
    def max_residual(self) -> float:
        return max(self.r1, self.r2, self.r3, self.r4, self.r5)


def equilibrium_residual(
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    x, mu, xi, theta, phi,
    d, ybar,
    comp: CompartmentalParams | None = None,
) -> EquilibriumResidual:
    """Evaluate the five stationarity conditions at a candidate state."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    xi = np.asarray(xi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    B = incidence_matrix(topo)
    E = input_indicator(topo)
    lam = cfg.f(mu)
    u = cfg.g(theta)
    y = plant.h(x)
    err = y - np.asarray(ybar, dtype=float)
    q, r = cfg.cost.q, cfg.cost.r
    L = cfg.laplacian()
    acc = -B @ lam + E @ u - np.asarray(d, dtype=float)
    if comp is not None:
        acc = acc + compartmental_term(topo, plant, comp, x)
    return EquilibriumResidual(
        r1=float(np.linalg.norm(acc)),
        r2=float(np.linalg.norm(B.T @ err - (lam - xi))),
        r3=float(np.linalg.norm(lam - xi)),
        r4=float(np.linalg.norm(-E.T @ err - (u - phi))),
        r5=float(np.linalg.norm((u - phi) - q * (L @ (q * phi + r)))),
    )


@dataclass
class PassivityReport:
    trials: int
    max_rel_flow_side: float
    max_rel_input_side: float
    compartmental_sign_ok: bool

    @property
    def max_rel_mismatch(self) -> float:
        return max(self.max_rel_flow_side, self.max_rel_input_side)


def passivity_check(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    ref: EquilibriumRef,
    d, ybar,
    trials: int = 1000,
    spread: float = 1.0,
    rng: np.random.Generator | None = None,
    comp: CompartmentalParams | None = None,
) -> PassivityReport:
    """Cross-check the two storage-rate identities at random states.

    Flow side:  d/dt V1 = (h(x)-h(xbar))^T E (g(theta)-g(thetabar))
                          - |f(mu)-xi|^2   (+ exchange term, compartmental)
    Input side: d/dt V2 = -|g(theta)-phi|^2 - (phi-phibar)^T QLQ (phi-phibar)
                          - (g(theta)-g(thetabar))^T E^T (h(x)-h(xbar))

    Each left side is evaluated through the chain rule (analytic storage
    gradients times the closed-loop right-hand side), each right side
    from its closed form; they must agree to rounding for any state.
    """
    if variant == "reduced":
        raise ValueError("passivity identities target the full controllers")
    if not ref.complete:
        raise ValueError("needs a fully constructible reference")
    rng = rng if rng is not None else np.random.default_rng(0)
    n, m, p = topo.n, topo.m, topo.p
    lay = state_layout(variant, n, m, p)
    has_xi = lay["xi"] is not None
    E = input_indicator(topo)
    L = cfg.laplacian()
    q = cfg.cost.q
    y_bar_ref = plant.h(ref.x)
    g_bar = cfg.g(ref.theta)
    worst_flow = 0.0
    worst_input = 0.0
    sign_ok = True

    for _ in range(trials):
        w = np.empty(lay["dim"])
        w[lay["x"]] = ref.x + spread * rng.standard_normal(n)
        w[lay["mu"]] = ref.mu + spread * rng.standard_normal(m)
        if has_xi:
            w[lay["xi"]] = ref.xi + spread * rng.standard_normal(m)
        w[lay["theta"]] = ref.theta + spread * rng.standard_normal(p)
        w[lay["phi"]] = ref.phi + spread * rng.standard_normal(p)
        dw = closed_loop_rhs(variant, topo, plant, cfg, w, d, ybar, comp=comp)

        x = w[lay["x"]]
        mu = w[lay["mu"]]
        theta = w[lay["theta"]]
        phi = w[lay["phi"]]
        y = plant.h(x)
        lam = cfg.f(mu)
        u = cfg.g(theta)

        # flow-side storage rate via the chain rule; T factors cancel
        chain1 = (y - y_bar_ref) @ (plant.t_x * dw[lay["x"]])
        chain1 += (lam - cfg.f(ref.mu)) @ (cfg.t_mu * dw[lay["mu"]])
        if has_xi:
            xi = w[lay["xi"]]
            chain1 += (xi - ref.xi) @ (cfg.t_xi * dw[lay["xi"]])
        closed1 = (y - y_bar_ref) @ (E @ (u - g_bar))
        if has_xi:
            closed1 -= (lam - w[lay["xi"]]) @ (lam - w[lay["xi"]])
        if variant == "compartmental":
            dpsi = compartmental_term(topo, plant, comp, x) - compartmental_term(topo, plant, comp, ref.x)
            extra = (y - y_bar_ref) @ dpsi
            closed1 += extra
            if extra > 1e-12 * max(1.0, abs(extra)):
                sign_ok = False
        scale = max(abs(closed1), abs(chain1), 1e-9)
        worst_flow = max(worst_flow, abs(closed1 - chain1) / scale)

        chain2 = (u - g_bar) @ (cfg.t_theta * dw[lay["theta"]])
        chain2 += (phi - ref.phi) @ (cfg.t_phi * dw[lay["phi"]])
        vq = q * (phi - ref.phi)
        closed2 = -(u - phi) @ (u - phi) - vq @ (L @ vq) - (u - g_bar) @ (E.T @ (y - y_bar_ref))
        scale = max(abs(closed2), abs(chain2), 1e-9)
        worst_input = max(worst_input, abs(closed2 - chain2) / scale)

    return PassivityReport(trials, worst_flow, worst_input, sign_ok)


def observability_rank(topo: NetworkTopology, t_x, t_mu) -> tuple[int, bool]:
    """Numerical rank of the stacked observability blocks of (E^T, Y) with
    Y = T_x^{-1} B T_mu^{-1} B^T; meaningful for identity flow/output maps.

    Blocks are rescaled before stacking so large powers of Y cannot
    overflow or swamp the small ones.
    """
    t_x = np.asarray(t_x, dtype=float)
    t_mu = np.asarray(t_mu, dtype=float)
    B = incidence_matrix(topo)
    E = input_indicator(topo)
    Y = (B / t_x[:, None]) @ (B.T / t_mu[:, None])
    blocks = []
    Mk = E.T.copy()
    sign = -1.0
    for _ in range(topo.n):
        scale = np.max(np.abs(Mk))
        blocks.append(sign * Mk / (scale if scale > 0 else 1.0))
        Mk = Mk @ Y
        sign = -sign
    O = np.vstack(blocks)
    rank = numerical_rank(O, rtol=RANK_RTOL)
    return rank, rank == topo.n


def sparsity_audit(
    variant: str,
    topo: NetworkTopology,
    plant: PlantParams,
    cfg: ControllerConfig,
    d, ybar,
    rhs_fn=None,
    rng: np.random.Generator | None = None,
    comp: CompartmentalParams | None = None,
) -> bool:
    """Check that the controller rows of the closed-loop Jacobian only read
    locally available information.

    Allowed dependencies: a flow state on edge k may read the storage
    states of its two endpoints and its own (mu_k, xi_k); theta_i may
    read the local storage state, theta_i and phi_i; phi_i may read
    theta_i and the phi_j of communication neighbors.  `rhs_fn` lets the
    test inject a faulty controller.
    """
    rng = rng if rng is not None else np.random.default_rng(1)
    n, m, p = topo.n, topo.m, topo.p
    lay = state_layout(variant, n, m, p)
    if rhs_fn is None:
        rhs_fn = lambda w: closed_loop_rhs(variant, topo, plant, cfg, w, d, ybar, comp=comp)

    allowed = np.zeros((lay["dim"], lay["dim"]), dtype=bool)
    allowed[lay["x"], :] = True  # plant row is physics, not audited
    comm_nb = [set() for _ in range(p)]
    for tail, head, _ in cfg.comm.arcs:
        comm_nb[tail].add(head)
        comm_nb[head].add(tail)
    for k, (tail, head) in enumerate(topo.edges):
        row = lay["mu"].start + k
        allowed[row, tail] = allowed[row, head] = True
        allowed[row, lay["mu"].start + k] = True
        if lay["xi"] is not None:
            allowed[row, lay["xi"].start + k] = True
            xrow = lay["xi"].start + k
            allowed[xrow, lay["mu"].start + k] = True
            allowed[xrow, lay["xi"].start + k] = True
    for j, node in enumerate(topo.actuated):
        trow = lay["theta"].start + j
        allowed[trow, node] = True
        allowed[trow, lay["theta"].start + j] = True
        if lay["phi"] is not None:
            allowed[trow, lay["phi"].start + j] = True
            prow = lay["phi"].start + j
            allowed[prow, lay["theta"].start + j] = True
            allowed[prow, lay["phi"].start + j] = True
            for nb in comm_nb[j]:
                allowed[prow, lay["phi"].start + nb] = True
        if variant == "reduced":
            # the reduced input law also gossips marginal costs of neighbors
            for nb in comm_nb[j]:
                allowed[trow, lay["theta"].start + nb] = True

    w0 = rng.standard_normal(lay["dim"])
    f0 = rhs_fn(w0)
    h = 1e-6
    for col in range(lay["dim"]):
        wp = w0.copy()
        wp[col] += h
        jac_col = (rhs_fn(wp) - f0) / h
        hits = np.abs(jac_col) > 1e-8
        if np.any(hits & ~allowed[:, col]):
            return False
    return True
