//! Closed-form Landau-level quantities.

use serde::Serialize;

use crate::error::{Error, Result};

/// Landau counting function `𝒩(μ, b)`.
///
/// For `b > 0` this is `b` times the number of levels `(2k+1) b` lying
/// strictly below `μ`; for `b = 0` it is `μ/2`. Nonpositive `μ` gives 0.
pub fn landau_count(mu: f64, b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::invalid("b", format!("intensity must be >= 0, got {b}")));
    }
    if !(mu > 0.0) {
        return Ok(0.0);
    }
    if b == 0.0 {
        return Ok(mu / 2.0);
    }
    Ok(b * landau_levels_below(mu, b) as f64)
}

/// `#{k ≥ 0 : (2k+1) b < μ}` for `b > 0`.
pub(crate) fn landau_levels_below(mu: f64, b: f64) -> u64 {
    if mu <= b {
        return 0;
    }
    let below = |k: u64| (2.0 * k as f64 + 1.0) * b < mu;
    let mut k = (((mu / b - 1.0) / 2.0).floor().max(0.0) as u64).saturating_add(1);
    while k > 0 && !below(k - 1) {
        k -= 1;
    }
    while below(k) {
        k += 1;
    }
    k
}

/// The finite set `S(β) = {(2j+1)|β| - j(j+1) : j < |β| - 1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauLevelSet {
    pub beta: f64,
    /// Sorted ascending.
    pub levels: Vec<f64>,
}

impl LandauLevelSet {
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }
}

pub fn landau_level_set(beta: f64) -> LandauLevelSet {
    let a = beta.abs();
    let levels = (0u64..)
        .take_while(|&j| (j as f64) < a - 0.5)
        .map(|j| {
            let j = j as f64;
            (2.0 * j + 1.0) * a - j * (j + 1.0)
        })
        .collect();
    // (2j+1)a - j(j+1) increases in j while j < a - 1/2, so the list is sorted.
    LandauLevelSet { beta, levels }
}

/// Bottom `1/4 + β²` of the essential spectrum carried by a constant field.
pub fn ess_bottom(beta: f64) -> f64 {
    0.25 + beta * beta
}
