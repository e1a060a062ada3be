"""Distributed flow and input controllers.

The flow controller on edge k reads only the outputs of its two endpoint
nodes; the input controller at node i reads only its local output error
and the marginal costs of communication neighbors.  The auxiliary states
xi (flow side) and phi (input side) are washout-style extensions that
provide the dissipation needed for convergence to a point; dropping them
gives the reduced controllers used by the oscillation demonstration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import CommGraph, NetworkTopology, comm_laplacian, incidence_matrix, input_indicator
from .saturation import Saturation

__all__ = [
    "Cost",
    "ControllerConfig",
    "ControllerState",
    "flow_ctrl_rhs",
    "input_ctrl_rhs",
    "potential_flow_rhs",
    "reduced_ctrl_rhs",
    "default_controller_state",
]


def _positive_diag(v, length, name) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {arr.shape}")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} entries must be finite and > 0")
    return arr


@dataclass(frozen=True)
class Cost:
    """Per-producer quadratic cost 0.5*q_i*u_i^2 + r_i*u_i + s_i with q_i > 0."""

    q: np.ndarray
    r: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float))
        if np.any(q <= 0) or not np.all(np.isfinite(q)):
            raise ValueError("q entries must be finite and > 0")
        if self.r.shape != q.shape or self.s.shape != q.shape:
            raise ValueError("q, r, s must have identical shapes")

    @property
    def p(self) -> int:
        return self.q.shape[0]

    def total(self, u: np.ndarray) -> float:
        return float(0.5 * u @ (self.q * u) + self.r @ u + np.sum(self.s))

    def marginal(self, u: np.ndarray) -> np.ndarray:
        return self.q * u + self.r


@dataclass(frozen=True)
class ControllerConfig:
    """Gains, output maps, cost and communication graph of both controllers.

    t_xi may be None for the potential variant (no xi state); t_xi and
    t_phi may be None for the reduced variant.
    """

    t_mu: np.ndarray
    t_theta: np.ndarray
    flow_maps: tuple[Saturation, ...]
    input_maps: tuple[Saturation, ...]
    cost: Cost
    comm: CommGraph
    t_xi: np.ndarray | None = None
    t_phi: np.ndarray | None = None

    def __post_init__(self):
        m = len(self.flow_maps)
        p = len(self.input_maps)
        object.__setattr__(self, "t_mu", _positive_diag(self.t_mu, m, "t_mu"))
        object.__setattr__(self, "t_theta", _positive_diag(self.t_theta, p, "t_theta"))
        object.__setattr__(self, "flow_maps", tuple(self.flow_maps))
        object.__setattr__(self, "input_maps", tuple(self.input_maps))
        if self.t_xi is not None:
            object.__setattr__(self, "t_xi", _positive_diag(self.t_xi, m, "t_xi"))
        if self.t_phi is not None:
            object.__setattr__(self, "t_phi", _positive_diag(self.t_phi, p, "t_phi"))
        for sat in self.flow_maps + self.input_maps:
            if not sat.is_strictly_increasing:
                raise ValueError("controller output maps must be strictly increasing")
        if self.cost.p != p:
            raise ValueError("cost dimension must match the number of actuated nodes")
        if self.comm.p != p:
            raise ValueError("communication graph must live on the actuated nodes")

    @property
    def m(self) -> int:
        return len(self.flow_maps)

    @property
    def p(self) -> int:
        return len(self.input_maps)

    def f(self, mu: np.ndarray) -> np.ndarray:
        return np.array([fk(v) for fk, v in zip(self.flow_maps, mu)])

    def f_inverse(self, lam: np.ndarray) -> np.ndarray:
        return np.array([fk.inverse(v) for fk, v in zip(self.flow_maps, lam)])

    def g(self, theta: np.ndarray) -> np.ndarray:
        return np.array([gi(v) for gi, v in zip(self.input_maps, theta)])

    def g_inverse(self, u: np.ndarray) -> np.ndarray:
        return np.array([gi.inverse(v) for gi, v in zip(self.input_maps, u)])

    def laplacian(self) -> np.ndarray:
        return comm_laplacian(self.comm)


@dataclass
class ControllerState:
    mu: np.ndarray
    theta: np.ndarray
    xi: np.ndarray | None = None
    phi: np.ndarray | None = None


def flow_ctrl_rhs(cfg: ControllerConfig, topo: NetworkTopology, y, ybar, mu, xi):
    """Dynamic flow controller.

    mu integrates the output-error difference across the edge, xi is the
    washout state, and the realized flow lam = f(mu) stays strictly
    inside the flow box for all time by construction.
    Returns (mu_dot, xi_dot, lam).
    """
    B = incidence_matrix(topo)
    lam = cfg.f(np.asarray(mu, dtype=float))
    err = np.asarray(y, dtype=float) - np.asarray(ybar, dtype=float)
    mu_dot = (B.T @ err - (lam - xi)) / cfg.t_mu
    xi_dot = (lam - xi) / cfg.t_xi
    return mu_dot, xi_dot, lam


def input_ctrl_rhs(cfg: ControllerConfig, topo: NetworkTopology, y, ybar, theta, phi):
    """Input controller with marginal-cost consensus.

    phi filters u = g(theta) and gossips marginal costs q*phi + r over the
    communication Laplacian; u stays strictly inside the input box.
    Returns (theta_dot, phi_dot, u).
    """
    E = input_indicator(topo)
    u = cfg.g(np.asarray(theta, dtype=float))
    err = np.asarray(y, dtype=float) - np.asarray(ybar, dtype=float)
    L = cfg.laplacian()
    q, r = cfg.cost.q, cfg.cost.r
    theta_dot = (-E.T @ err - (u - phi)) / cfg.t_theta
    phi_dot = (u - phi - q * (L @ (q * phi + r))) / cfg.t_phi
    return theta_dot, phi_dot, u


def potential_flow_rhs(cfg: ControllerConfig, topo: NetworkTopology, y, ybar, mu):
    """Potential-induced flow dynamics: the flow rate-of-change follows the
    output difference across the edge (e.g. an inductive line).
    Returns (mu_dot, lam)."""
    B = incidence_matrix(topo)
    err = np.asarray(y, dtype=float) - np.asarray(ybar, dtype=float)
    mu_dot = (B.T @ err) / cfg.t_mu
    return mu_dot, cfg.f(np.asarray(mu, dtype=float))


def reduced_ctrl_rhs(cfg: ControllerConfig, topo: NetworkTopology, y, ybar, mu, theta):
    """Controllers without the xi/phi washout states.  They admit the same
    steady states but can settle into sustained oscillation; used by the
    oscillation demonstration scenario.
    Returns (mu_dot, theta_dot)."""
    B = incidence_matrix(topo)
    E = input_indicator(topo)
    err = np.asarray(y, dtype=float) - np.asarray(ybar, dtype=float)
    L = cfg.laplacian()
    q, r = cfg.cost.q, cfg.cost.r
    u = cfg.g(np.asarray(theta, dtype=float))
    mu_dot = (B.T @ err) / cfg.t_mu
    theta_dot = (-q * (L @ (q * u + r)) - E.T @ err) / cfg.t_theta
    return mu_dot, theta_dot


def default_controller_state(cfg: ControllerConfig, variant: str) -> ControllerState:
    """Mid-range initialization: mu and theta start at the preimages of the
    mid-range outputs (0 for unbounded maps); xi and phi start on their
    washout targets so the dissipation terms start at zero."""
    mu0 = np.array([fk.inverse(fk.midpoint) if fk.bounded else 0.0 for fk in cfg.flow_maps])
    theta0 = np.array([gi.inverse(gi.midpoint) if gi.bounded else 0.0 for gi in cfg.input_maps])
    xi0 = cfg.f(mu0) if variant in ("basic", "compartmental") else None
    phi0 = cfg.g(theta0) if variant != "reduced" else None
    return ControllerState(mu=mu0, theta=theta0, xi=xi0, phi=phi0)
