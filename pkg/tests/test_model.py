import numpy as np
import pytest

from flowreg.graphs import NetworkTopology
from flowreg.model import (
    CompartmentalParams,
    PlantParams,
    Schedule,
    SetpointRamp,
    aggregate_balance,
    compartmental_term,
    plant_rhs,
    ramp_transform,
)
from flowreg.optimum import optimal_input
from flowreg.saturation import identity, linear, tanh_box

CYCLE4 = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=(0, 1, 2, 3))
PLANT4 = PlantParams.with_identity_output(np.ones(4))


def test_plant_rhs_balanced_steady_state_is_zero():
    # B lam = E u - d  =>  xdot = 0
    u = np.array([2.0, 1.0, 1.0, 0.0])
    d = np.ones(4)
    lam = np.array([1.0, 1.0, 1.0, 0.0])  # node balance for this cycle orientation
    rhs = plant_rhs("basic", CYCLE4, PLANT4, x=np.zeros(4), lam=lam, u=u, d=d)
    assert np.allclose(rhs, 0.0, atol=1e-14)


def test_plant_rhs_single_node():
    topo = NetworkTopology(n=1, edges=(), actuated=(0,))
    plant = PlantParams.with_identity_output(np.ones(1))
    rhs = plant_rhs("basic", topo, plant, x=np.zeros(1), lam=np.zeros(0),
                    u=np.array([3.0]), d=np.array([1.0]))
    assert rhs == pytest.approx([2.0])


def test_plant_rhs_compartmental_two_nodes_hand_value():
    topo = NetworkTopology(n=2, edges=(), actuated=(0,), compartmental_edges=((0, 1),))
    plant = PlantParams.with_identity_output(np.ones(2))
    comp = CompartmentalParams(gamma=(linear(1.0),), eta=())
    rhs = plant_rhs("compartmental", topo, plant, x=np.array([1.0, 0.0]),
                    lam=np.zeros(0), u=np.zeros(1), d=np.zeros(2), comp=comp)
    assert rhs == pytest.approx([-1.0, 1.0])


def test_plant_rhs_dimension_mismatch():
    with pytest.raises(ValueError):
        plant_rhs("basic", CYCLE4, PLANT4, x=np.zeros(3), lam=np.zeros(4),
                  u=np.zeros(4), d=np.zeros(4))


def test_plant_rhs_affine_superposition(rng):
    # for fixed x the map (lam, u, d) -> xdot is affine
    x = rng.standard_normal(4)
    args = [(rng.standard_normal(4), rng.standard_normal(4), rng.standard_normal(4))
            for _ in range(2)]
    f = lambda lam, u, d: plant_rhs("basic", CYCLE4, PLANT4, x, lam, u, d)
    (l1, u1, d1), (l2, u2, d2) = args
    lhs = f(l1 + l2, u1 + u2, d1 + d2) + f(np.zeros(4), np.zeros(4), np.zeros(4))
    rhs = f(l1, u1, d1) + f(l2, u2, d2)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_aggregate_balance_values():
    d = np.full(4, 35.0)
    assert aggregate_balance(CYCLE4, np.full(4, 35.0), d) == pytest.approx(0.0, abs=1e-12)
    assert aggregate_balance(CYCLE4, np.zeros(4), np.full(4, 30.0)) == pytest.approx(-120.0)
    alloc = optimal_input(np.array([10.0, 9, 7, 6]), np.zeros(4), CYCLE4, d)
    assert abs(aggregate_balance(CYCLE4, alloc.u_bar, d)) <= 1e-10 * np.abs(d).sum()


def test_compartmental_dissipation_sign(rng):
    topo = NetworkTopology(
        n=4, edges=CYCLE4.edges, actuated=(0, 2),
        compartmental_edges=((0, 1), (2, 3), (1, 3)),
        state_dependent_io=(1, 3),
    )
    plant = PlantParams.with_identity_output(np.ones(4))
    comp = CompartmentalParams(
        gamma=(linear(0.8), tanh_box(-1.0, 1.0), linear(0.0)),
        eta=(linear(0.5), tanh_box(0.0, 2.0, gain=0.5)),
    )
    worst = -np.inf
    for _ in range(10_000):
        x = rng.uniform(-5, 5, size=4)
        x_ref = rng.uniform(-5, 5, size=4)
        dy = plant.h(x) - plant.h(x_ref)
        dpsi = compartmental_term(topo, plant, comp, x) - compartmental_term(topo, plant, comp, x_ref)
        worst = max(worst, float(dy @ dpsi))
    assert worst <= 1e-12


# --- schedules and the ramp transform --------------------------------------------

def test_schedule_lookup_and_switch_times():
    sched = Schedule(
        disturbance=((0.0, np.zeros(2)), (2.0, np.ones(2))),
        setpoint=((0.0, np.full(2, 5.0)),),
    )
    assert np.allclose(sched.d_at(1.9), 0.0)
    assert np.allclose(sched.d_at(2.0), 1.0)
    assert sched.switch_times() == [2.0]


def test_schedule_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        Schedule(disturbance=((0.0, np.zeros(1)), (0.0, np.ones(1))),
                 setpoint=((0.0, np.zeros(1)),))
    with pytest.raises(ValueError, match="first disturbance event"):
        Schedule(disturbance=((1.0, np.zeros(1)),), setpoint=((0.0, np.zeros(1)),))
    with pytest.raises(ValueError, match="needs a setpoint"):
        Schedule(disturbance=((0.0, np.zeros(1)),))


def test_ramp_transform_constant_setpoint_is_identity():
    sched = Schedule(disturbance=((0.0, np.ones(3)),), setpoint=((0.0, np.zeros(3)),))
    plant = PlantParams.with_identity_output(np.ones(3))
    assert np.allclose(ramp_transform(sched, np.ones(3), plant), 1.0)


def test_ramp_transform_unit_slope():
    ramp = SetpointRamp(0.0, 10.0, np.zeros(2), np.full(2, 10.0))
    sched = Schedule(disturbance=((0.0, np.zeros(2)),), setpoint=(), setpoint_ramp=ramp)
    plant = PlantParams.with_identity_output(np.ones(2))
    assert np.allclose(ramp_transform(sched, np.zeros(2), plant), 1.0)


def test_ramp_transform_heat_study_style():
    # 200 -> 210 over 5 h with d = 35 gives an effective demand of 37
    ramp = SetpointRamp(0.0, 5.0, np.full(4, 200.0), np.full(4, 210.0))
    sched = Schedule(disturbance=((0.0, np.full(4, 35.0)),), setpoint=(), setpoint_ramp=ramp)
    assert np.allclose(ramp_transform(sched, np.full(4, 35.0), PLANT4), 37.0)


def test_ramp_transform_rejects_nonidentity_output():
    ramp = SetpointRamp(0.0, 5.0, np.zeros(1), np.ones(1))
    sched = Schedule(disturbance=((0.0, np.zeros(1)),), setpoint=(), setpoint_ramp=ramp)
    plant = PlantParams(np.ones(1), (tanh_box(-5.0, 5.0),))
    with pytest.raises(ValueError, match="identity"):
        ramp_transform(sched, np.zeros(1), plant)


def test_ramp_requires_t2_after_t1():
    with pytest.raises(ValueError, match="t2 > t1"):
        SetpointRamp(5.0, 5.0, np.zeros(1), np.ones(1))
