"""Stern-Gerlach prepare-and-measure lab."""

from sglab.qubit import (
    E1,
    E2,
    E3,
    PAULI,
    Direction,
    Measurement,
    Port,
    PureState,
    antipode,
    bloch_vector,
    born_probability,
    density_from_direction,
    inner_product,
    measurement_from_direction,
    state_from_direction,
)
from sglab.simulator import (
    CountRecord,
    EstimateWithCI,
    ExperimentPlan,
    SGStage,
    analytic_probability,
    estimate_probability,
    simulate_chain,
    sweep_angle,
)
from sglab.witness import (
    ProbabilityTable,
    WitnessReport,
    average_state_purity,
    fidelity,
    fuchs_van_de_graaf_check,
    helstrom_measurement,
    infer_min_dimension,
    solve_dimension_tight,
    trace_distance,
    u_bound,
    u_witness,
    w_bound,
    w_from_angles,
    w_witness,
)

__version__ = "0.1.0"

__all__ = [
    "E1",
    "E2",
    "E3",
    "PAULI",
    "Direction",
    "Measurement",
    "Port",
    "PureState",
    "antipode",
    "bloch_vector",
    "born_probability",
    "density_from_direction",
    "inner_product",
    "measurement_from_direction",
    "state_from_direction",
    "CountRecord",
    "EstimateWithCI",
    "ExperimentPlan",
    "SGStage",
    "analytic_probability",
    "estimate_probability",
    "simulate_chain",
    "sweep_angle",
    "ProbabilityTable",
    "WitnessReport",
    "average_state_purity",
    "fidelity",
    "fuchs_van_de_graaf_check",
    "helstrom_measurement",
    "infer_min_dimension",
    "solve_dimension_tight",
    "trace_distance",
    "u_bound",
    "u_witness",
    "w_bound",
    "w_from_angles",
    "w_witness",
]
