//! Driving-parameter sweeps, numerical derivatives, transition
//! classification and exponent fits.

pub mod classify;
pub mod differentiate;
pub mod fit;
pub mod sweep;

pub use classify::{
    classify_transition, equipartition_check, vanishing_occupations, ClassifyOptions, Singularity, Status,
    TransitionReport,
};
pub use differentiate::{derivative, derivative_richardson};
pub use fit::{fit_exponent, fit_sweep_exponent, ExponentFit, FitWindow, Side};
pub use sweep::{
    sweep, Column, Driver, EdProbe, Family, GrProbe, Grid, PointFlags, Probe, Record, Signal, Source, SweepResult,
    SyntheticProbe, MIN_GRID_POINTS,
};
