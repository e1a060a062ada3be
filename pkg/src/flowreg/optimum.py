"""Optimal steady-state input allocation and steady-state flow computation.

The allocation minimizes the total quadratic cost subject to supply/demand
balance.  Its closed form equalizes marginal costs across producers:

    kappa = (sum(d) + sum(r_i/q_i)) / sum(1/q_i),   u_i = (kappa - r_i)/q_i

A projected-gradient oracle (`brute_force_optimum`) provides an
independent route to the same optimum for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import NetworkTopology, incidence_matrix, input_indicator
from .model import CompartmentalParams, PlantParams

__all__ = [
    "OptimalAllocation",
    "optimal_input",
    "optimal_input_compartmental",
    "steady_state_flows",
    "brute_force_optimum",
]

BALANCE_RTOL = 1e-10
FLOW_RESIDUAL_RTOL = 1e-8
BOX_MARGIN = 1e-6


@dataclass(frozen=True)
class OptimalAllocation:
    """Optimal inputs, the common marginal cost, and attainability flags."""

    u_bar: np.ndarray
    kappa: np.ndarray
    total_cost: float
    lambda_bar: np.ndarray | None = None
    flows_feasible: bool | None = None
    inputs_in_range: bool | None = None


def optimal_input(q, r, topo: NetworkTopology, d, s=None) -> OptimalAllocation:
    """Cost-minimizing inputs balancing the total disturbance.

    q, r are the diagonal quadratic and linear cost coefficients over the
    actuated nodes; d is the nodal disturbance vector.
    """
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    d = np.asarray(d, dtype=float)
    if q.shape != (topo.p,) or r.shape != (topo.p,):
        raise ValueError("q and r must have one entry per actuated node")
    if d.shape != (topo.n,):
        raise ValueError("d must have one entry per node")
    if np.any(q <= 0):
        raise ValueError("q entries must be > 0")
    kappa_val = (np.sum(d) + np.sum(r / q)) / np.sum(1.0 / q)
    u_bar = (kappa_val - r) / q
    s_total = 0.0 if s is None else float(np.sum(s))
    total = float(0.5 * u_bar @ (q * u_bar) + r @ u_bar + s_total)
    return OptimalAllocation(u_bar=u_bar, kappa=np.full(topo.p, kappa_val), total_cost=total)


def optimal_input_compartmental(
    q,
    r,
    topo: NetworkTopology,
    d,
    comp: CompartmentalParams,
    plant: PlantParams,
    x_bar,
    s=None,
) -> OptimalAllocation:
    """Allocation with the state-dependent in/outflows folded into an
    effective disturbance d + E_c eta(E_c^T h(x_bar))."""
    d = np.asarray(d, dtype=float).copy()
    if topo.state_dependent_io:
        Ec = input_indicator(topo, state_dependent=True)
        y_bar = plant.h(np.asarray(x_bar, dtype=float))
        d = d + Ec @ comp.eta_eval(Ec.T @ y_bar)
    return optimal_input(q, r, topo, d, s=s)


def _min_norm_flows(B: np.ndarray, v: np.ndarray) -> np.ndarray:
    # minimum-norm least-squares solution of B lam = v via orthogonal
    # factorization; the pseudoinverse is never formed explicitly
    lam, *_ = np.linalg.lstsq(B, v, rcond=None)
    return lam


def steady_state_flows(
    topo: NetworkTopology,
    u_bar,
    d,
    bounds: list[tuple[float, float]] | None = None,
    extra_injection=None,
    max_iter: int = 10_000,
) -> tuple[np.ndarray, bool]:
    """A steady flow vector solving B lam = E u_bar - d (+ extra_injection).

    Without bounds, returns the minimum-norm solution with feasible=True.
    With per-edge open boxes, searches the affine solution set by
    alternating projections (affine set <-> box shrunk by a small margin)
    and reports feasible=True only for a strictly interior fixed point
    that still satisfies the flow balance.  On failure the minimum-norm
    solution is returned with feasible=False.
    """
    u_bar = np.asarray(u_bar, dtype=float)
    d = np.asarray(d, dtype=float)
    B = incidence_matrix(topo)
    E = input_indicator(topo)
    v = E @ u_bar - d
    if extra_injection is not None:
        v = v + np.asarray(extra_injection, dtype=float)
    scale = max(1.0, float(np.linalg.norm(d, 1)))
    if abs(np.sum(v)) > BALANCE_RTOL * scale:
        raise ValueError(
            f"net injection {np.sum(v):.3e} not balanced; no steady flow exists"
        )
    lam0 = _min_norm_flows(B, v)
    if topo.m == 0:
        return lam0, True
    if bounds is None:
        return lam0, True

    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    lo_m = np.where(np.isfinite(lo), lo + BOX_MARGIN, lo)
    hi_m = np.where(np.isfinite(hi), hi - BOX_MARGIN, hi)
    if np.any(lo_m > hi_m):
        return lam0, False

    lam = lam0.copy()
    for _ in range(max_iter):
        clipped = np.clip(lam, lo_m, hi_m)
        projected = clipped - _min_norm_flows(B, B @ clipped - v)
        if np.max(np.abs(projected - lam)) < 1e-14:
            lam = projected
            break
        lam = projected

    residual = np.linalg.norm(B @ lam - v)
    tol = FLOW_RESIDUAL_RTOL * max(np.linalg.norm(v), 1e-300)
    interior = bool(np.all(lam > lo) and np.all(lam < hi))
    if residual <= max(tol, 1e-12) and interior:
        return lam, True
    return lam0, False


def brute_force_optimum(q, r, topo: NetworkTopology, d, grad_tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Projected gradient descent on the balance hyperplane sum(u) = sum(d).

    Independent numerical route to the closed-form allocation; intended
    as a validation oracle (p <= 6 keeps it cheap).
    """
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    d = np.asarray(d, dtype=float)
    p = topo.p
    if p > 6:
        raise ValueError("oracle restricted to p <= 6")
    u = np.full(p, np.sum(d) / p)
    step = 1.0 / np.max(q)
    for _ in range(max_iter):
        grad = q * u + r
        grad_proj = grad - np.mean(grad)
        if np.linalg.norm(grad_proj) <= grad_tol:
            return u
        u = u - step * grad_proj
    raise RuntimeError(f"projected gradient did not reach tolerance {grad_tol}")
