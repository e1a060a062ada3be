"""Acceptance suite: every release criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL
line per criterion.  Two checks fail by physics, not by defect, and are
kept at their stated tolerances deliberately:

* C1b - with the bundled district-heating gains (t_phi = 0.005) the
  total-volume/production mode rings for tens of hours after the t=24 h
  setpoint step, so the terminal inputs sit ~10% from the optimum at
  t=40 h rather than within 1%.
* C2a - the HVDC lines are modelled lossless, so the ~1.6-2.3 krad/s
  line resonances excited by the load step are essentially undamped and
  the voltages still ring ~1.2% of setpoint at the 0.04 s mark; 0.1%
  is unreachable on that horizon for any gain choice of this controller
  family.
"""

import itertools
import warnings
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

from flowreg.controllers import ControllerConfig, Cost
from flowreg.graphs import (
    CommGraph,
    NetworkTopology,
    is_zero_forcing,
    zf_closure,
    zf_closure_rescan,
)
from flowreg.model import CompartmentalParams, PlantParams, Schedule
from flowreg.optimum import brute_force_optimum, optimal_input, optimal_input_compartmental
from flowreg.saturation import Saturation, arctan_box, identity, linear, tanh_box
from flowreg.scenario import (
    InitialConditions,
    IntegrationSettings,
    MonitorSettings,
    Scenario,
    load_preset,
)
from flowreg.sim import (
    closed_loop_rhs,
    equilibrium_reference,
    integrate,
    state_layout,
    storage_Vdot,
    vdot_fd_probe,
)

V_STEP_RTOL = 1e-8
VDOT_TOL = 1e-12


@contextmanager
def criterion(label):
    try:
        yield
    except BaseException:
        print(f"\n[ACCEPTANCE] {label}: FAIL")
        raise
    print(f"\n[ACCEPTANCE] {label}: PASS")


def row_at(log, t):
    i = int(np.searchsorted(log.t, t - 1e-12))
    assert log.t[i] == pytest.approx(t, abs=1e-9)
    return i


# =========================================================================
# C1: district heating study, 40 h horizon
# =========================================================================

def test_c01a_district_heating_volume_bands(district_log):
    with criterion("C1a district heating volume bands (1 m3)"):
        log = district_log
        for t, target in ((12.0, 200.0), (24.0, 200.0), (40.0, 210.0)):
            x = log.x[row_at(log, t)]
            assert np.max(np.abs(x - target)) <= 1.0, f"volume band violated at t={t}"


def test_c01b_district_heating_terminal_inputs_optimal(district_log):
    with criterion("C1b district heating terminal inputs within 1% of optimum"):
        log = district_log
        topo = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=(0, 1, 2, 3))
        q = np.array([10.0, 9.0, 7.0, 6.0])
        r = np.zeros(4)
        d = np.full(4, 35.0)
        # oracle first: the marginal-cost level from projected gradient
        u_oracle = brute_force_optimum(q, r, topo, d)
        kappa_oracle = q * u_oracle + r
        assert np.ptp(kappa_oracle) <= 1e-8
        u_bar = optimal_input(q, r, topo, d).u_bar
        assert np.max(np.abs(u_bar - u_oracle)) <= 1e-6
        u_end = log.u[row_at(log, 40.0)]
        rel = np.abs(u_end - u_bar) / u_bar
        assert np.max(rel) <= 0.01, (
            f"terminal inputs {u_end} are {100 * rel.max():.1f}% from the optimum {u_bar}; "
            "the weakly damped total-production mode (t_phi = 0.005) still rings at t = 40 h"
        )


def test_c01c_district_heating_transient_constraints(district_log):
    with criterion("C1c district heating transient constraint boxes"):
        log = district_log
        assert np.all(log.lam > 0.0) and np.all(log.lam < 14.0)
        assert np.all(log.u > 0.0) and np.all(log.u < 52.0)
        # margins were also tracked at every integrator step, not just samples
        assert log.min_margin_flow > 0.0
        assert log.min_margin_input > 0.0


# =========================================================================
# C2: HVDC study, 0.04 s horizon
# =========================================================================

def test_c02a_hvdc_terminal_voltage_band(hvdc_log):
    with criterion("C2a HVDC terminal voltages within 0.1% of 165 kV"):
        log = hvdc_log
        v_end = log.y[row_at(log, 0.04)]
        dev = np.max(np.abs(v_end - 165e3))
        assert dev <= 165.0, (
            f"voltage deviation {dev:.0f} V at t=0.04 s exceeds 165 V; the lossless-line "
            "resonances excited by the load step are essentially undamped on this horizon"
        )


def test_c02b_hvdc_input_constraints(hvdc_log):
    with criterion("C2b HVDC injections inside (130, 145) A at every sample"):
        log = hvdc_log
        assert np.all(log.u > 130.0) and np.all(log.u < 145.0)
        assert log.min_margin_input > 0.0


def test_c02c_hvdc_current_sharing(hvdc_log):
    with criterion("C2c HVDC terminal current sharing within 0.5 A"):
        log = hvdc_log
        u_end = log.u[row_at(log, 0.04)]
        assert np.ptp(u_end) <= 0.5


# =========================================================================
# C3: allocation oracle equivalence
# =========================================================================

def test_c03_allocation_oracle_equivalence():
    with criterion("C3 closed-form allocation vs projected-gradient oracle"):
        rng = np.random.default_rng(314)
        from conftest import make_random_connected

        for _ in range(100):
            n = int(rng.integers(2, 9))
            p = int(rng.integers(1, min(n, 6) + 1))
            topo = make_random_connected(rng, n, extra_edges=int(rng.integers(0, 3)),
                                         p_actuated=p)
            q = rng.uniform(0.2, 5.0, size=topo.p)
            r = rng.uniform(-2.0, 2.0, size=topo.p)
            d = rng.uniform(-3.0, 3.0, size=n)
            alloc = optimal_input(q, r, topo, d)
            u_oracle = brute_force_optimum(q, r, topo, d)
            assert np.max(np.abs(alloc.u_bar - u_oracle)) <= 1e-6
            marg = q * alloc.u_bar + r
            assert np.ptp(marg) <= 1e-10 * max(1.0, abs(alloc.kappa[0]))


# =========================================================================
# C4: storage-function monotonicity and rate identity
# =========================================================================

def _check_lyapunov(log, fd_anchors=(), fd_delta=None, fd_dt=None, pieces=None):
    for j, seg in enumerate(log.segments):
        rows = np.flatnonzero(log.segment_id == j)
        vals = log.V[rows]
        assert not np.any(np.isnan(vals))
        tol = V_STEP_RTOL * (1.0 + vals[0])
        assert np.max(np.diff(vals), initial=-np.inf) <= tol
        assert np.nanmax(log.Vdot[rows]) <= VDOT_TOL
    if pieces is None:
        return
    variant, topo, plant, cfg, comp = pieces
    for i in fd_anchors:
        j = int(log.segment_id[i])
        seg = log.segments[j]
        closed, fd = vdot_fd_probe(variant, topo, plant, cfg, log.states[i],
                                   seg.d, seg.ybar, seg.ref, fd_delta, fd_dt, comp=comp)
        assert abs(closed - fd) <= 1e-6 * max(abs(closed), 1e-12)


def test_c04a_lyapunov_district_preset(district_log):
    with criterion("C4a storage function on the district preset"):
        scn = load_preset("district_heating")
        # dominant time constant ~1 h; stencil 1e-4 of it, fine RK4 substeps
        anchors = [row_at(district_log, t) for t in (1.0, 6.0, 13.0, 30.0)]
        _check_lyapunov(
            district_log, fd_anchors=anchors, fd_delta=1e-4, fd_dt=2e-6,
            pieces=("basic", scn.topology, scn.plant, scn.controller, None),
        )


def test_c04b_lyapunov_hvdc_preset(hvdc_log):
    with criterion("C4b storage function on the HVDC preset"):
        scn = load_preset("hvdc")
        # dominant time constant ~10 ms
        anchors = [row_at(hvdc_log, t) for t in (0.024, 0.03, 0.036)]
        _check_lyapunov(
            hvdc_log, fd_anchors=anchors, fd_delta=1e-6, fd_dt=1e-7,
            pieces=("potential", scn.topology, scn.plant, scn.controller, None),
        )


def _random_feasible_scenario(rng, variant):
    from conftest import make_random_connected

    n = int(rng.integers(3, 6))
    topo = make_random_connected(rng, n, extra_edges=int(rng.integers(0, 3)),
                                 p_actuated=int(rng.integers(1, n + 1)))
    if variant == "potential":
        # keep the certification assumption satisfied: grow a zero forcing set
        for size in range(1, n + 1):
            found = None
            for combo in itertools.combinations(range(n), size):
                if is_zero_forcing(topo, combo):
                    found = combo
                    break
            if found:
                break
        topo = NetworkTopology(n=n, edges=topo.edges, actuated=found)
    if variant == "compartmental":
        extra = ((int(rng.integers(0, n)), int(rng.integers(0, n))),)
        if extra[0][0] == extra[0][1]:
            extra = ((extra[0][0], (extra[0][1] + 1) % n),)
        topo = NetworkTopology(n=n, edges=topo.edges, actuated=topo.actuated,
                               compartmental_edges=extra,
                               state_dependent_io=(int(rng.integers(0, n)),))
    m, p = topo.m, topo.p
    plant = PlantParams.with_identity_output(rng.uniform(0.5, 2.0, n))
    comp = None
    if variant == "compartmental":
        comp = CompartmentalParams(
            gamma=(linear(float(rng.uniform(0.2, 0.8))),),
            eta=(linear(float(rng.uniform(0.2, 0.8))),),
        )
    comm = (CommGraph(1, ()) if p == 1 else
            CommGraph.undirected(p, [(i, i + 1, float(rng.uniform(0.5, 2.0)))
                                     for i in range(p - 1)]))
    q = rng.uniform(0.5, 2.0, p)
    d = rng.uniform(-1.0, 1.0, n)
    ybar = rng.uniform(-1.0, 1.0, n)

    # choose output boxes around the attainable steady state (with slack) so
    # the run is feasible by construction
    probe_cfg_maps = tuple(identity() for _ in range(m))
    x_bar = ybar
    if variant == "compartmental":
        alloc = optimal_input_compartmental(q, np.zeros(p), topo, d, comp, plant, x_bar)
    else:
        alloc = optimal_input(q, np.zeros(p), topo, d)
    from flowreg.optimum import steady_state_flows

    extra_inj = None
    if variant == "compartmental":
        from flowreg.model import compartmental_term

        extra_inj = compartmental_term(topo, plant, comp, x_bar)
    lam_bar, _ = steady_state_flows(topo, alloc.u_bar, d, extra_injection=extra_inj)
    flow_maps = tuple(tanh_box(float(l - rng.uniform(1.5, 3.0)), float(l + rng.uniform(1.5, 3.0)))
                      for l in lam_bar)
    input_maps = tuple(tanh_box(float(u - rng.uniform(1.5, 3.0)), float(u + rng.uniform(1.5, 3.0)))
                       for u in alloc.u_bar)
    cfg = ControllerConfig(
        t_mu=rng.uniform(0.5, 2.0, m),
        t_xi=rng.uniform(0.5, 2.0, m) if variant in ("basic", "compartmental") else None,
        t_theta=rng.uniform(0.5, 2.0, p),
        t_phi=rng.uniform(0.4, 1.5, p),
        flow_maps=flow_maps, input_maps=input_maps,
        cost=Cost(q, np.zeros(p), np.zeros(p)), comm=comm,
    )
    lay = state_layout(variant, n, m, p)

    # step size from the local stiffness estimate
    from flowreg.controllers import default_controller_state
    from flowreg.sim import pack_state

    w0 = pack_state(variant, ybar + rng.uniform(-0.5, 0.5, n),
                    default_controller_state(cfg, variant))
    f = lambda w: closed_loop_rhs(variant, topo, plant, cfg, w, d, ybar, comp=comp)
    f0 = f(w0)
    J = np.empty((w0.size, w0.size))
    for i in range(w0.size):
        wp = w0.copy()
        wp[i] += 1e-6
        J[:, i] = (f(wp) - f0) / 1e-6
    rho = np.max(np.abs(np.linalg.eigvals(J)))
    dt = min(0.3 / rho, 0.02)
    steps = int(round(30.0 / dt))
    return Scenario(
        name=f"random_{variant}",
        variant=variant,
        topology=topo,
        comm_undirected=True,
        plant=plant,
        controller=cfg,
        schedule=Schedule(((0.0, d),), ((0.0, ybar),)),
        integration=IntegrationSettings(dt=dt, horizon=30.0,
                                        log_every=max(1, steps // 1500),
                                        time_unit="dimensionless"),
        initial=InitialConditions(x=w0[lay["x"]].copy(), mode="midrange"),
        monitors=MonitorSettings(),
        compartmental=comp,
    )


def test_c04c_lyapunov_randomized_scenarios():
    with criterion("C4c storage function on 20 randomized feasible scenarios"):
        rng = np.random.default_rng(2024)
        variants = ["basic"] * 12 + ["compartmental"] * 4 + ["potential"] * 4
        for k, variant in enumerate(variants):
            scn = _random_feasible_scenario(rng, variant)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                log = integrate(scn)
            anchors = [log.t.shape[0] // 3, 2 * log.t.shape[0] // 3]
            _check_lyapunov(
                log, fd_anchors=anchors, fd_delta=1e-4,
                fd_dt=min(scn.integration.dt, 1e-5),
                pieces=(variant, scn.topology, scn.plant, scn.controller, scn.compartmental),
            )


# =========================================================================
# C5: oscillation counterexample and the washout fix
# =========================================================================

def test_c05a_reduced_controllers_oscillate_on_analytic_orbit(oscillation_log):
    with criterion("C5a reduced controllers follow the sin/cos orbit (<= 1e-6)"):
        log = oscillation_log
        lay = state_layout("reduced", 4, 4, 4)
        assert np.abs(log.x - np.sin(log.t)[:, None]).max() <= 1e-6
        assert np.abs(log.states[:, lay["theta"]] - np.cos(log.t)[:, None]).max() <= 1e-6
        assert np.abs(log.states[:, lay["mu"]]).max() <= 1e-6


def test_c05b_rk4_order_check():
    with criterion("C5b halving dt cuts the orbit error ~16x"):
        scn = load_preset("oscillation_demo")
        errs = []
        for dt in (0.2, 0.1, 0.05):
            s = replace(scn, integration=IntegrationSettings(dt, 20.0, 1, "dimensionless"))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                log = integrate(s)
            errs.append(np.abs(log.x - np.sin(log.t)[:, None]).max())
        for a, b in zip(errs, errs[1:]):
            assert 11.0 <= a / b <= 21.0


def test_c05c_full_controllers_converge_on_identical_plant():
    with criterion("C5c washout states restore convergence (terminal <= 1e-4)"):
        red = load_preset("oscillation_demo")
        cfg = red.controller
        full_cfg = ControllerConfig(
            t_mu=cfg.t_mu, t_xi=np.ones(4), t_theta=cfg.t_theta, t_phi=np.ones(4),
            flow_maps=cfg.flow_maps, input_maps=cfg.input_maps,
            cost=cfg.cost, comm=cfg.comm,
        )
        scn = replace(
            red, variant="basic", controller=full_cfg,
            integration=IntegrationSettings(1e-3, 120.0, 100, "dimensionless"),
            initial=InitialConditions(
                x=np.zeros(4), mode="explicit",
                mu=np.zeros(4), xi=np.zeros(4), theta=np.ones(4), phi=np.ones(4),
            ),
        )
        log = integrate(scn)
        assert np.max(np.abs(log.y[-1])) <= 1e-4
        # same plant, same initial condition: only the washout states differ
        assert np.max(np.diff(log.V)) <= V_STEP_RTOL * (1.0 + log.V[0])


# =========================================================================
# C6: zero forcing closure vs definition-level recheck
# =========================================================================

def test_c06_zero_forcing_exhaustive_small_graphs():
    with criterion("C6 zero-forcing closure agrees with the definition-level scan"):
        networkx = pytest.importorskip("networkx")
        from networkx.generators.atlas import graph_atlas_g

        rng = np.random.default_rng(99)
        compared = 0
        # exhaustive over isomorphism classes: every connected graph on
        # up to 6 nodes, every candidate subset
        for G in graph_atlas_g():
            n = G.number_of_nodes()
            if n < 1 or n > 6 or (n > 1 and not networkx.is_connected(G)):
                continue
            edges = tuple((int(a), int(b)) for a, b in G.edges())
            topo = NetworkTopology(n=n, edges=edges, actuated=(0,))
            for bits in range(2 ** n):
                cand = {v for v in range(n) if bits >> v & 1}
                fast = zf_closure(topo, cand)
                slow = zf_closure_rescan(topo, cand, rng=rng)
                assert fast == slow
                compared += 1
        assert compared >= 7500
        # plus random labeled graphs to push the comparison count past 1e4
        from conftest import make_random_connected

        for _ in range(3000):
            n = int(rng.integers(2, 7))
            topo = make_random_connected(rng, n, extra_edges=int(rng.integers(0, 4)))
            cand = {int(v) for v in rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False)}
            assert zf_closure(topo, cand) == zf_closure_rescan(topo, cand, rng=rng)
            compared += 1
        assert compared >= 10_000
        cycle = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=(0,))
        assert is_zero_forcing(cycle, {1, 2, 3})
        assert not is_zero_forcing(cycle, {0})


# =========================================================================
# C7: potential-flow variant under the zero-forcing assumption
# =========================================================================

def _potential_scenario(actuated):
    topo = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=actuated)
    p = topo.p
    plant = PlantParams.with_identity_output(np.ones(4))
    comm = (CommGraph(1, ()) if p == 1 else
            CommGraph.undirected(p, [(i, i + 1, 3.0) for i in range(p - 1)]))
    cfg = ControllerConfig(
        t_mu=np.full(4, 2.0), t_theta=np.full(p, 0.2), t_phi=np.full(p, 2.0),
        flow_maps=tuple(identity() for _ in range(4)),
        input_maps=tuple(identity() for _ in range(p)),
        cost=Cost(np.ones(p), np.zeros(p), np.zeros(p)), comm=comm,
    )
    return Scenario(
        name="potential_check",
        variant="potential",
        topology=topo,
        comm_undirected=True,
        plant=plant,
        controller=cfg,
        schedule=Schedule(((0.0, np.array([1.0, 2.0, 1.5, 0.5])),),
                          ((0.0, np.array([3.0, 3.2, 2.8, 3.0])),)),
        integration=IntegrationSettings(dt=0.02, horizon=80.0, log_every=20,
                                        time_unit="dimensionless"),
        initial=InitialConditions(x=np.zeros(4), mode="midrange"),
        monitors=MonitorSettings(),
    )


def test_c07a_potential_converges_with_zero_forcing_actuation():
    with criterion("C7a potential variant converges when actuation is zero forcing"):
        scn = _potential_scenario((1, 2, 3))
        assert is_zero_forcing(scn.topology, scn.topology.actuated)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            log = integrate(scn)
        assert not any("zero forcing" in w for w in log.warnings)  # gate stays silent
        err = np.max(np.abs(log.y[-1] - scn.schedule.ybar_at(0.0)))
        assert err <= 1e-4


def test_c07b_potential_warns_without_zero_forcing_actuation():
    with criterion("C7b potential variant warns when actuation is not zero forcing"):
        scn = _potential_scenario((0,))
        assert not is_zero_forcing(scn.topology, scn.topology.actuated)
        with pytest.warns(UserWarning, match="zero forcing"):
            log = integrate(scn)
        # run completes; convergence is asserted neither way
        assert log.t[-1] == pytest.approx(80.0)


# =========================================================================
# C8: compartmental variant
# =========================================================================

def test_c08_compartmental_regulation_and_allocation():
    with criterion("C8 compartmental variant: regulation, allocation, dissipation sign"):
        topo = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=(0, 2),
                               compartmental_edges=((0, 1), (2, 3)), state_dependent_io=(1, 3))
        gamma_slope, eta_slope = 0.8, 0.5
        comp = CompartmentalParams(gamma=(linear(gamma_slope), linear(gamma_slope)),
                                   eta=(linear(eta_slope), linear(eta_slope)))
        plant = PlantParams.with_identity_output(np.ones(4))
        comm = CommGraph.undirected(2, [(0, 1, 1.0)])
        q = np.array([1.0, 2.0])
        cfg = ControllerConfig(
            t_mu=np.ones(4), t_xi=np.ones(4), t_theta=np.ones(2), t_phi=np.ones(2),
            flow_maps=tuple(identity() for _ in range(4)),
            input_maps=tuple(identity() for _ in range(2)),
            cost=Cost(q, np.zeros(2), np.zeros(2)), comm=comm,
        )
        d = np.array([0.8, 0.3, 0.5, 0.4])
        ybar = np.array([2.0, 1.5, 1.8, 1.6])
        scn = Scenario(
            name="compartmental_check", variant="compartmental", topology=topo,
            comm_undirected=True, plant=plant, controller=cfg, compartmental=comp,
            schedule=Schedule(((0.0, d),), ((0.0, ybar),)),
            integration=IntegrationSettings(dt=5e-3, horizon=80.0, log_every=40,
                                            time_unit="dimensionless"),
            initial=InitialConditions(x=np.zeros(4), mode="midrange"),
            monitors=MonitorSettings(),
        )
        log = integrate(scn)
        assert np.max(np.abs(log.y[-1] - ybar)) <= 1e-4

        # independent effective-demand computation: dhat = d + Ec eta(Ec' ybar)
        dhat = d + np.array([0.0, eta_slope * ybar[1], 0.0, eta_slope * ybar[3]])
        kappa = np.sum(dhat) / np.sum(1.0 / q)
        u_hat_manual = kappa / q
        alloc = optimal_input_compartmental(q, np.zeros(2), topo, d, comp, plant, x_bar=ybar)
        assert np.allclose(alloc.u_bar, u_hat_manual, atol=1e-12)
        assert np.max(np.abs(log.u[-1] - u_hat_manual)) <= 1e-4

        # dissipation sign of the exchange term on 1e4 random pairs
        from flowreg.model import compartmental_term

        rng = np.random.default_rng(5)
        for _ in range(10_000):
            xa = rng.uniform(-4, 4, 4)
            xb = rng.uniform(-4, 4, 4)
            dpsi = compartmental_term(topo, plant, comp, xa) - compartmental_term(topo, plant, comp, xb)
            assert (plant.h(xa) - plant.h(xb)) @ dpsi <= 1e-12


# =========================================================================
# C9: ramp tracking through the incremental coordinates
# =========================================================================

def test_c09_ramp_tracking_error_settles():
    with criterion("C9 ramp tracking: incremental state settles to zero"):
        scn = load_preset("ramp_tracking")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            log = integrate(scn)
        assert log.incremental
        assert np.max(np.abs(log.x[-1])) <= 1e-3
        assert log.min_margin_flow > 0.0 and log.min_margin_input > 0.0


# =========================================================================
# C10: determinism and constraint structure
# =========================================================================

def test_c10a_csv_byte_identical_across_runs():
    with criterion("C10a byte-identical trajectories on repeated runs"):
        for name in ("hvdc", "oscillation_demo"):
            scn = load_preset(name)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                b1 = integrate(scn).csv_bytes()
                b2 = integrate(scn).csv_bytes()
            assert b1 == b2, f"{name} produced differing CSV bytes"


def test_c10b_saturation_range_confinement_bulk():
    with criterion("C10b 1e6 random evaluations per map, zero range violations"):
        rng = np.random.default_rng(77)
        maps = [
            tanh_box(0.0, 14.0),
            tanh_box(0.0, 52.0),
            tanh_box(130.0, 145.0),
            arctan_box(-3.0, 5.0, gain=0.7),
            Saturation("affine_tanh", -1.0, 1.0, gain=2.0),
        ]
        for sat in maps:
            z = rng.uniform(-1e8, 1e8, size=1_000_000)
            out = sat(z)
            assert np.all(out > sat.lower)
            assert np.all(out < sat.upper)
