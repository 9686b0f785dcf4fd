//! Stabiliser feasibility, period-dominating sprays and the Newton correction.

mod feasibility;
mod newton;
mod spray;

pub use feasibility::{feasibility_check, FeasibilityReport, FixedPointVerdict};
pub use newton::{
    interpolate_values, newton_correct, period_jacobian, JacobianReport, NewtonConfig, NewtonOutcome, NewtonTrace,
    DEFAULT_VALIDITY_RADIUS,
};
pub use spray::{
    automatic_relations, build_period_spray, build_period_spray_for, candidate_slots, is_flat, period_column,
    real_jacobian, required_rank, slot_columns, EquationLayout, SprayCheck, SprayFamily, DOMINATION_GATE,
};
