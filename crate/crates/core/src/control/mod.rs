//! Optimal-control problems posed as square root-finding systems over
//! algebra unknowns, and the Newton solver that drives them.

pub mod algebra_ocp;
pub mod newton;
pub mod rigid;
pub mod rod;
pub mod rod_direct;

pub use algebra_ocp::{discrete_cost, terminal_constraint, AlgebraControlProblem, AlgebraSolution, MIN_STEPS};
pub use newton::{fd_jacobian_parallel, newton_solve, NewtonConfig, SolveReport};
pub use rigid::{
    assemble_rigid_residual, recover_controls, rigid_controls, rigid_dynamics, rigid_lagrangian,
    solve_rigid_body, solve_rigid_body_from, RigidBodyProblem, RigidDiscreteLagrangian, RigidSolution,
};
pub use rod::{
    assemble_rod_residual, recover_rod_controls, rod_controls, rod_internal_forces, rod_lagrangian,
    solve_rod, solve_rod_from, CosseratRodProblem, RodDiscreteLagrangian, RodModel, RodScheme, RodSolution,
};
pub use rod_direct::{assemble_rod_direct_residual, reconstruct_truncated, truncated_strain, DirectRodProblem};
