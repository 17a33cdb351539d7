//! Eigenvalue counting for magnetic Laplacians on the ends of geometrically
//! finite hyperbolic surfaces.
//!
//! * [`model`]: funnel and cusp ends, radial field profiles, gauges.
//! * [`landau`]: the Landau counting function and the level sets `S(β)`.
//! * [`sturm1d`]: finite-difference 1-D operators and Sturm-sequence counts.
//! * [`modes`]: Fourier-mode reduction and per-end Dirichlet counts.
//! * [`weyl`]: the semiclassical Landau-level integral and its bracket.
//! * [`essential`]: essential spectra for constant fields.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod essential;
pub mod landau;
pub mod model;
pub mod modes;
pub mod sturm1d;
pub mod weyl;

pub use error::{Error, Result};
pub use essential::{
    essential_spectrum, funnel_mode_limit_check, holonomy, in_j1a, morse_check, LimitOptions, LimitReport, LimitRow,
    MorseOptions, MorseReport, SpectrumSet,
};
pub use landau::{ess_bottom, landau_count, landau_level_set, LandauLevelSet};
pub use model::{
    check_growth_hypotheses, cusp_area, CuspEnd, End, FieldKind, FunnelEnd, GrowthReport, RadialField, SurfaceEnds,
};
pub use modes::{count_end, mode_range, ModeOptions, ModePotential, ModeRange};
pub use sturm1d::{count_stable, discretize, CountResult, StableOptions, TridiagonalOperator};
pub use weyl::{
    check_hyp_w, fit_exponent, omega, theorem1_bracket, weyl_integral, weyl_integral_end, ExponentFit, HypWReport,
    WeylOptions,
};
