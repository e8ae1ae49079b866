//! Numerical toolkit for the quadratically damped oscillator
//! `z'' + omega^2 z + g(t) z^2 = 0` with `g = alpha2^(-5/2)`, where `alpha2`
//! solves the rescaled third-order equation
//! `y''' + 4 y' = (c1 cos tau + c2 sin tau) / omega^3 * y^(-5/2)`.

pub mod ermakov;
pub mod error;
pub mod integrate;
pub mod invariant;
pub mod model;
pub mod perturb;
pub mod resonance;
pub mod series;

pub use error::{Error, Result};
pub use integrate::{
    convergence_order, integrate_coupled, integrate_y, integrate_z, integrate_z_partial, rk4_step, Coefficient,
    ConvergenceOrder, ConvergenceSystem, IntegrationConfig, Rhs,
};
pub use model::{validate_params, CoupledState, RawParams, SystemParams, Trajectory, YState, ZState};
pub use perturb::{
    alpha2_derivatives, g_of_t, rho1, rho2, rho3, series_eval, validity, y_composite, PerturbativeAlpha2, SeriesEval,
    ValidityWindow,
};
pub use series::TrigSeries;
pub use invariant::{
    drift_experiment, exact_drift, invariant_coeffs, invariant_exact, tube_surface_samples, DriftReport,
    InvariantCoeffs, InvariantSample, PerturbativeInvariant, TubeFilament, TubePoint,
};
pub use resonance::{
    periodicity_defect, project_harmonics, secular_slope, series_trajectory, third_harmonic_check, HarmonicWindow,
    PeriodicityDefect, SecularFit, ThirdHarmonic,
};
pub use ermakov::{
    build_driver, integrate_ermakov, lewis_drift, lewis_invariant, logistic_sequence, CubicSpline, ErmakovState,
    LogisticDriver,
};
