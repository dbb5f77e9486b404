//! Numerical toolkit for parameterized circle diffeomorphisms and skew-product
//! torus maps: rotation numbers, mode-locking windows, Diophantine sets,
//! restricted maps on periodic circles, and Monte Carlo measure experiments.
//!
//! Sweeps over parameters run on rayon when the `parallel` feature is on
//! (default) and sequentially otherwise; results are identical either way.

pub mod circle_map;
pub mod diophantine;
pub mod error;
pub mod experiments;
pub mod par;
pub mod rational;
pub mod rng;
pub mod rotation;
pub mod skew;
pub mod tables;
pub mod trig;
pub mod windows;

pub use circle_map::{
    family_norm, iterate_lift, CircleFamily, CircleLift, ComposedCircleMap, FamilyHarmonic,
    FamilyNorm, ParamFamily, Renormalized, Stage,
};
pub use error::{Error, Result};
pub use rational::Frac;
pub use rotation::{
    classify, equidistribution_test, is_locked, rho_estimate, Classification, ClassifyOptions,
    LockStatus, RotationResult,
};
pub use trig::{c3_norm, Harmonic, TPoly, TrigPoly};
pub use diophantine::{dio_measure, dio_member, DioMeasure, DioMembership, DioParams};
pub use experiments::{
    eta_curve, intersection_measure, renormalization_check, EtaCurve, ExperimentReport,
    HypothesisPolicy, IntersectionMeasure, RenormOutcome,
};
pub use skew::{
    a3_check, periodic_circles, quasi_search, restricted_family, skew_apply, PeriodicCircle,
    QuasiSearch, RestrictedFamily, SkewHarmonic, SkewMap,
};
pub use windows::{enumerate_windows, locked_measure, tongue_diagram, LockedMeasure, Window};
