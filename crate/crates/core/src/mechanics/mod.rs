//! Discrete Lagrangian mechanics on vector spaces and matrix Lie groups.

pub mod example;
pub mod first_order;
pub mod lagrangian;
pub mod second_order;
pub mod trajectory;

pub use example::{integrate_newton, NewtonLagrangian, PolynomialPotential, Potential, SpringChain};
pub use first_order::{
    action_sum, del_residual, dep1_residual, discrete_legendre_minus, discrete_legendre_plus,
    discrete_momentum_map, DiagonalTranslation, GroupAction, LeftInvariantLift, LeftMultiplication,
};
pub use lagrangian::{
    right_gradient, to_right_form, DiscreteLagrangian, FnLagrangian, FnReducedLagrangian,
    ReducedDiscreteLagrangian,
};
pub use second_order::{
    del2_group_residual, dep2_algebra_from_sums, dep2_algebra_residual, dep2_group_residual,
    depk_residual,
};
pub use trajectory::Trajectory;
