"""flowreg: distributed optimal output regulation of flow networks with
transient input and flow constraints.

Storage networks (district heating loops, multi-terminal DC grids,
compartmental systems) are driven to output setpoints by distributed
flow and input controllers while every flow and input stays strictly
inside its capacity box for all time; the injected inputs converge to
the cost-optimal allocation negotiated over a communication graph.
"""

from .controllers import ControllerConfig, ControllerState, Cost
from .graphs import (
    CommGraph,
    NetworkTopology,
    comm_laplacian,
    incidence_matrix,
    input_indicator,
    is_connected,
    is_zero_forcing,
    minimal_zero_forcing_sets,
    zf_closure,
)
from .model import CompartmentalParams, PlantParams, Schedule, SetpointRamp
from .optimum import OptimalAllocation, brute_force_optimum, optimal_input, steady_state_flows
from .saturation import Saturation, arctan_box, identity, linear, tanh_box
from .scenario import Scenario, load_preset, load_scenario, preset_names, save_scenario
from .sim import (
    EquilibriumRef,
    IntegrationError,
    RunLog,
    closed_loop_rhs,
    convergence_metrics,
    equilibrium_reference,
    integrate,
    storage_V,
    storage_Vdot,
)

__version__ = "0.1.0"

__all__ = [
    "CommGraph",
    "CompartmentalParams",
    "ControllerConfig",
    "ControllerState",
    "Cost",
    "EquilibriumRef",
    "IntegrationError",
    "NetworkTopology",
    "OptimalAllocation",
    "PlantParams",
    "RunLog",
    "Saturation",
    "Scenario",
    "Schedule",
    "SetpointRamp",
    "arctan_box",
    "brute_force_optimum",
    "closed_loop_rhs",
    "comm_laplacian",
    "convergence_metrics",
    "equilibrium_reference",
    "identity",
    "incidence_matrix",
    "input_indicator",
    "integrate",
    "is_connected",
    "is_zero_forcing",
    "linear",
    "load_preset",
    "load_scenario",
    "minimal_zero_forcing_sets",
    "optimal_input",
    "preset_names",
    "save_scenario",
    "steady_state_flows",
    "storage_V",
    "storage_Vdot",
    "tanh_box",
    "zf_closure",
]
