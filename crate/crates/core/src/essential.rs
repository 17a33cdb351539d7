//! Essential spectra for constant fields, and numerical checks of the
//! discrete levels that constant-field funnels contribute.
//!
//! With constant intensities `β_k` on the funnels and `b_j` on the cusps,
//! the essential spectrum is a half-line `[1/4 + m², ∞)` together with the
//! points of `S(β_k)` lying below it, where `m²` ranges over the `β_k²` and
//! over the `b_j²` of the cusps whose holonomy lies in `2πℤ`. Without
//! funnels and without such cusps the spectrum is purely discrete.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::landau::{ess_bottom, landau_level_set};
use crate::model::{CuspEnd, End, SurfaceEnds};
use crate::modes::{funnel_limit_potential, scaled_funnel_potential};
use crate::sturm1d::{discretize, TridiagonalOperator};

/// Holonomy `2π lim a(t)` of a cusp carrying a constant field.
pub fn holonomy(end: &CuspEnd) -> Result<f64> {
    if end.field.constant_value().is_none() {
        return Err(Error::HolonomyUndefined);
    }
    let limit = End::Cusp(end.clone())
        .gauge_limit()
        .expect("constant cusp fields have a gauge limit");
    Ok(2.0 * PI * limit)
}

/// Whether the holonomy lies in `2πℤ`, up to a relative `1e-9`.
pub fn in_j1a(holonomy: f64) -> bool {
    let x = holonomy / (2.0 * PI);
    (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0)
}

/// A half-line `[bottom, ∞)` plus isolated points below it, or nothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSet {
    pub bottom: Option<f64>,
    /// Sorted, deduplicated, all strictly below `bottom`.
    pub points: Vec<f64>,
    pub empty: bool,
}

impl SpectrumSet {
    pub fn empty_set() -> Self {
        Self {
            bottom: None,
            points: Vec::new(),
            empty: true,
        }
    }

    fn assemble(bottom: f64, candidates: impl IntoIterator<Item = f64>) -> Self {
        let mut points: Vec<f64> = candidates.into_iter().filter(|&p| p < bottom).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self {
            bottom: Some(bottom),
            points,
            empty: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.bottom.is_some_and(|b| x >= b) || self.points.contains(&x)
    }
}

/// Essential spectrum of a surface whose ends all carry constant fields.
pub fn essential_spectrum(surface: &SurfaceEnds) -> Result<SpectrumSet> {
    let mut funnel_betas = Vec::new();
    let mut cusp_fields = Vec::new();
    for (index, end) in surface.ends().iter().enumerate() {
        let value = end.field().constant_value().ok_or(Error::NonConstantField { index })?;
        match end {
            End::Funnel(_) => funnel_betas.push(value),
            End::Cusp(c) => {
                if in_j1a(holonomy(c)?) {
                    cusp_fields.push(value);
                }
            }
        }
    }
    let squares = funnel_betas.iter().chain(&cusp_fields).map(|v| v * v);
    let Some(min_sq) = squares.min_by(f64::total_cmp) else {
        return Ok(SpectrumSet::empty_set());
    };
    let bottom = 0.25 + min_sq;
    let points = funnel_betas.iter().flat_map(|&beta| landau_level_set(beta).levels);
    Ok(SpectrumSet::assemble(bottom, points))
}

/// Settings for [`morse_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorseOptions {
    pub s_lo: f64,
    /// Right end of the window; `None` picks one well past the turning
    /// points of every level below the continuum.
    pub s_hi: Option<f64>,
    /// Interior grid nodes.
    pub n: usize,
    /// Only eigenvalues below `1/4 + β² - margin` are reported.
    pub margin: f64,
    /// Allowed shift of the lowest eigenvalue when the window doubles.
    pub tol: f64,
}

impl Default for MorseOptions {
    fn default() -> Self {
        Self {
            s_lo: -20.0,
            s_hi: None,
            n: 8000,
            margin: 0.05,
            tol: 1e-6,
        }
    }
}

impl MorseOptions {
    fn window(&self, beta: f64) -> (f64, f64) {
        let s_hi = self
            .s_hi
            .unwrap_or_else(|| (2.0 * beta.abs() + 1.0).ln().max(2.0) + 2.0);
        (self.s_lo, s_hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseReport {
    pub beta: f64,
    pub predicted: Vec<f64>,
    pub computed: Vec<f64>,
    /// Largest `|computed_j - predicted_j|`; infinite when the lists differ
    /// in length.
    pub max_abs_err: f64,
    /// Same number of eigenvalues as predicted levels.
    pub matched: bool,
    pub converged: bool,
}

fn eigenvalues_below(op: &TridiagonalOperator, threshold: f64) -> Result<Vec<f64>> {
    let k = op.count_below(threshold);
    if k == 0 {
        return Ok(Vec::new());
    }
    op.lowest_eigenvalues(k, 1e-11 * threshold.abs().max(1.0))
}

/// Discretise `1/4 + (|β| - e^s)²` and compare its eigenvalues below the
/// continuum with `S(β)`.
pub fn morse_check(beta: f64, opts: &MorseOptions) -> Result<MorseReport> {
    if !beta.is_finite() {
        return Err(Error::invalid("beta", "must be finite"));
    }
    if !(opts.margin >= 0.0) {
        return Err(Error::invalid("margin", "must be >= 0"));
    }
    let a = beta.abs();
    let (s_lo, s_hi) = opts.window(a);
    let potential = funnel_limit_potential(a);
    let threshold = ess_bottom(a) - opts.margin;
    let op = discretize(|s| potential.eval(s), s_lo, s_hi, opts.n)?;
    let computed = eigenvalues_below(&op, threshold)?;
    let predicted = landau_level_set(a).levels;

    // Same step on a window extended to the left by its own length.
    let wide = discretize(|s| potential.eval(s), 2.0 * s_lo - s_hi, s_hi, 2 * opts.n + 1)?;
    let wide_low = eigenvalues_below(&wide, threshold)?;
    let converged = match (computed.first(), wide_low.first()) {
        (Some(x), Some(y)) => (x - y).abs() <= opts.tol,
        (None, None) => true,
        _ => false,
    };

    let matched = computed.len() == predicted.len();
    let max_abs_err = if matched {
        computed
            .iter()
            .zip(&predicted)
            .map(|(c, p)| (c - p).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(MorseReport {
        beta,
        predicted,
        computed,
        max_abs_err,
        matched,
        converged,
    })
}

/// Settings for [`funnel_mode_limit_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitOptions {
    /// Left end in the log coordinate (deep into the end).
    pub s_lo: f64,
    /// Coarse grid step; a second solve uses `h/2`.
    pub h: f64,
    /// Largest accepted change between the two steps.
    pub tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            s_lo: -40.0,
            h: 0.004,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub rho: f64,
    /// Richardson-extrapolated lowest Dirichlet eigenvalue.
    pub eigenvalue: f64,
    pub distance: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub beta: f64,
    /// `min(S(β) ∪ {1/4 + β²})`.
    pub limit: f64,
    pub rows: Vec<LimitRow>,
}

/// Lowest eigenvalue of the constant-field funnel mode with scaled frequency
/// `ρ`, for each `ρ`, against the `ρ → ∞` limit.
///
/// The mode lives on `t > 0`; in `s = ln(2ρ) - t` the wall is at `ln(2ρ)`.
pub fn funnel_mode_limit_check(beta: f64, rhos: &[f64], opts: &LimitOptions) -> Result<LimitReport> {
    if !beta.is_finite() {
        return Err(Error::invalid("beta", "must be finite"));
    }
    if rhos.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(opts.h > 0.0) {
        return Err(Error::invalid("h", "must be positive"));
    }
    let a = beta.abs();
    let limit = landau_level_set(a).levels.first().copied().unwrap_or(ess_bottom(a));
    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
        }
        let s_hi = (2.0 * rho).ln();
        if s_hi <= opts.s_lo {
            return Err(Error::invalid("rho", format!("wall at s = {s_hi} lies left of s_lo")));
        }
        let potential = scaled_funnel_potential(a, rho);
        let cells = ((s_hi - opts.s_lo) / opts.h).ceil() as usize;
        let lowest = |cells: usize| -> Result<f64> {
            let op = discretize(|s| potential.eval(s), opts.s_lo, s_hi, cells - 1)?;
            Ok(op.lowest_eigenvalues(1, 1e-12)?[0])
        };
        let coarse = lowest(cells)?;
        let fine = lowest(2 * cells)?;
        let eigenvalue = fine + (fine - coarse) / 3.0;
        rows.push(LimitRow {
            rho,
            eigenvalue,
            distance: (eigenvalue - limit).abs(),
            converged: (fine - coarse).abs() <= opts.tol,
        });
    }
    Ok(LimitReport { beta, limit, rows })
}
