//! Surface ends, radial magnetic fields and their gauges.
//!
//! Both end types are described in a radial coordinate `t` on `(t0, ∞)`:
//!
//! ```text
//! funnel:  τ² cosh²(t) dθ² + dt²      area density τ cosh t
//! cusp:    L² e^{-2t} dθ² + dt²       area density L e^{-t}   (t = ln y)
//! ```
//!
//! A field profile is a polynomial in the canonical radial variable
//! `x = cosh t` (funnel) or `x = y = e^t` (cusp). The gauge is the radial
//! one-form `A = a(t) dθ` normalised by `a(t0) = ξ`, with
//!
//! ```text
//! funnel:  b̃ = -a'(t) / (τ cosh t)
//! cusp:    b̃ = -a'(t) e^t / L
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which radial variable a field polynomial is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    /// `b̃(t) = Σ c_i cosh^i t`
    FunnelCoshPoly,
    /// `b̃(y) = Σ c_i y^i`, `y = e^t`
    CuspYPoly,
}

/// Signed radial field profile `b̃`; the intensity is `|b̃|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    kind: FieldKind,
    coeffs: Vec<f64>,
}

impl RadialField {
    pub fn new(kind: FieldKind, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "at least one coefficient is required"));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid("coeffs", format!("coefficient {i} is not finite")));
        }
        Ok(Self { kind, coeffs })
    }

    pub fn funnel(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(FieldKind::FunnelCoshPoly, coeffs)
    }

    pub fn cusp(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(FieldKind::CuspYPoly, coeffs)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last nonzero coefficient (0 for the zero field).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    /// The intensity tends to infinity at the end.
    pub fn is_unbounded(&self) -> bool {
        self.degree() >= 1
    }

    /// Value of a degree-0 field, `None` otherwise.
    pub fn constant_value(&self) -> Option<f64> {
        (self.degree() == 0).then(|| self.coeffs[0])
    }

    /// `cosh t` or `e^t`.
    pub fn radial_variable(&self, t: f64) -> f64 {
        match self.kind {
            FieldKind::FunnelCoshPoly => t.cosh(),
            FieldKind::CuspYPoly => t.exp(),
        }
    }

    fn coordinate_of(&self, x: f64) -> f64 {
        match self.kind {
            FieldKind::FunnelCoshPoly => x.max(1.0).acosh(),
            FieldKind::CuspYPoly => x.ln(),
        }
    }

    pub(crate) fn poly(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Signed field `b̃(t)`.
    pub fn signed_value(&self, t: f64) -> f64 {
        self.poly(self.radial_variable(t))
    }

    /// Intensity `b(t) = |b̃(t)|`.
    pub fn intensity(&self, t: f64) -> f64 {
        self.signed_value(t).abs()
    }

    /// `d b̃ / dt`; for cusps this is `y ∂_y b̃`.
    pub fn t_derivative(&self, t: f64) -> f64 {
        let x = self.radial_variable(t);
        let dpdx = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c);
        match self.kind {
            FieldKind::FunnelCoshPoly => dpdx * t.sinh(),
            FieldKind::CuspYPoly => dpdx * x,
        }
    }

    /// A coordinate beyond which the intensity is monotone and at least `level`.
    ///
    /// Uses Cauchy root bounds for `p ∓ level` and `p'` in the radial
    /// variable, so the result is an upper bound, never tight. `None` for
    /// bounded fields.
    pub fn tail_bound(&self, level: f64, t0: f64) -> Option<f64> {
        let d = self.degree();
        if d == 0 {
            return None;
        }
        let lead = self.coeffs[d].abs();
        let mut rest = self.coeffs[..d].iter().map(|c| c.abs()).fold(0.0, f64::max);
        rest = rest.max(self.coeffs[0].abs() + level.abs());
        let deriv_rest = (1..d).map(|i| i as f64 * self.coeffs[i].abs()).fold(0.0, f64::max) / (d as f64);
        let x = 1.0 + (rest / lead).max(deriv_rest / lead);
        Some(self.coordinate_of(x).max(t0))
    }
}

/// `∫_0^t cosh^n(s) ds` for `n = 0..=max_n`.
fn cosh_power_integrals(t: f64, max_n: usize) -> Vec<f64> {
    let (s, c) = (t.sinh(), t.cosh());
    let mut out = Vec::with_capacity(max_n + 1);
    out.push(t);
    if max_n >= 1 {
        out.push(s);
    }
    let mut cpow = 1.0; // cosh^{n-1}
    for n in 2..=max_n {
        cpow *= c;
        let nf = n as f64;
        out.push(cpow * s / nf + (nf - 1.0) / nf * out[n - 2]);
    }
    out
}

/// A funnel end `S¹ × (t0, ∞)` with metric `τ² cosh²(t) dθ² + dt²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunnelEnd {
    pub tau: f64,
    pub t0: f64,
    pub field: RadialField,
    /// Gauge offset `a(t0)`.
    pub xi: f64,
}

impl FunnelEnd {
    pub fn new(tau: f64, t0: f64, field: RadialField, xi: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("must be positive and finite, got {tau}")));
        }
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(Error::invalid("t0", format!("funnel t0 must be >= 0, got {t0}")));
        }
        if field.kind() != FieldKind::FunnelCoshPoly {
            return Err(Error::invalid("field", "funnel ends take a cosh-polynomial field"));
        }
        if !xi.is_finite() {
            return Err(Error::invalid("xi", "must be finite"));
        }
        Ok(Self { tau, t0, field, xi })
    }

    /// `a(t) = ξ - τ ∫_{t0}^t b̃(s) cosh s ds`, no domain check.
    pub(crate) fn gauge_at(&self, t: f64) -> f64 {
        let d = self.field.degree();
        let at = cosh_power_integrals(t, d + 1);
        let at0 = cosh_power_integrals(self.t0, d + 1);
        let flux: f64 = self.field.coeffs()[..=d]
            .iter()
            .enumerate()
            .map(|(i, c)| c * (at[i + 1] - at0[i + 1]))
            .sum();
        self.xi - self.tau * flux
    }

    /// Coefficient of `(ℓ - a(t))²` in the mode potential.
    pub(crate) fn mode_weight(&self, t: f64) -> f64 {
        let c = self.tau * t.cosh();
        1.0 / (c * c)
    }

    /// ℓ-independent part of the mode potential.
    pub(crate) fn mode_offset(&self, t: f64) -> f64 {
        let s = 1.0 / t.cosh();
        0.25 * (1.0 + s * s)
    }
}

/// A cusp end `S¹ × (t0, ∞)` with metric `L² e^{-2t} dθ² + dt²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspEnd {
    pub l: f64,
    pub t0: f64,
    pub field: RadialField,
    pub xi: f64,
}

impl CuspEnd {
    pub fn new(l: f64, t0: f64, field: RadialField, xi: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid("L", format!("must be positive and finite, got {l}")));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if field.kind() != FieldKind::CuspYPoly {
            return Err(Error::invalid("field", "cusp ends take a y-polynomial field"));
        }
        if !xi.is_finite() {
            return Err(Error::invalid("xi", "must be finite"));
        }
        Ok(Self { l, t0, field, xi })
    }

    /// `a(t) = ξ - L ∫_{t0}^t b̃(s) e^{-s} ds`, no domain check.
    pub(crate) fn gauge_at(&self, t: f64) -> f64 {
        let d = self.field.degree();
        let flux: f64 = self.field.coeffs()[..=d]
            .iter()
            .enumerate()
            .map(|(i, &coef)| {
                let k = i as f64 - 1.0;
                let piece = if i == 1 {
                    t - self.t0
                } else {
                    (k * self.t0).exp() * (k * (t - self.t0)).exp_m1() / k
                };
                coef * piece
            })
            .sum();
        self.xi - self.l * flux
    }

    pub(crate) fn mode_weight(&self, t: f64) -> f64 {
        let e = t.exp() / self.l;
        e * e
    }

    pub(crate) fn mode_offset(&self, _t: f64) -> f64 {
        0.25
    }
}

/// Area `2π L e^{-t0}` of a cusp end.
pub fn cusp_area(end: &CuspEnd) -> f64 {
    2.0 * std::f64::consts::PI * end.l * (-end.t0).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum End {
    Funnel(FunnelEnd),
    Cusp(CuspEnd),
}

impl From<FunnelEnd> for End {
    fn from(e: FunnelEnd) -> Self {
        End::Funnel(e)
    }
}

impl From<CuspEnd> for End {
    fn from(e: CuspEnd) -> Self {
        End::Cusp(e)
    }
}

impl End {
    pub fn t0(&self) -> f64 {
        match self {
            End::Funnel(f) => f.t0,
            End::Cusp(c) => c.t0,
        }
    }

    pub fn xi(&self) -> f64 {
        match self {
            End::Funnel(f) => f.xi,
            End::Cusp(c) => c.xi,
        }
    }

    pub fn field(&self) -> &RadialField {
        match self {
            End::Funnel(f) => &f.field,
            End::Cusp(c) => &c.field,
        }
    }

    /// Copy of this end with a different gauge offset.
    pub fn with_xi(&self, xi: f64) -> End {
        let mut out = self.clone();
        match &mut out {
            End::Funnel(f) => f.xi = xi,
            End::Cusp(c) => c.xi = xi,
        }
        out
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        // NaN also fails here.
        if t >= self.t0() {
            Ok(())
        } else {
            Err(Error::Domain { t, t0: self.t0() })
        }
    }

    /// Signed field `b̃` at `t`.
    pub fn eval_field(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.field().signed_value(t))
    }

    /// θ-component `a(t)` of the radial gauge, with `a(t0) = ξ`.
    pub fn gauge_function(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.gauge_unchecked(t))
    }

    pub(crate) fn gauge_unchecked(&self, t: f64) -> f64 {
        match self {
            End::Funnel(f) => f.gauge_at(t),
            End::Cusp(c) => c.gauge_at(t),
        }
    }

    /// `lim_{t→∞} a(t)` for a constant field on a cusp.
    pub fn gauge_limit(&self) -> Option<f64> {
        match self {
            End::Cusp(c) => c.field.constant_value().map(|b| c.xi - c.l * b * (-c.t0).exp()),
            End::Funnel(_) => None,
        }
    }

    /// Area density with respect to `dθ dt`.
    pub fn area_density(&self, t: f64) -> f64 {
        match self {
            End::Funnel(f) => f.tau * t.cosh(),
            End::Cusp(c) => c.l * (-t).exp(),
        }
    }

    /// `∫_lo^hi` of the area density.
    pub fn density_integral(&self, lo: f64, hi: f64) -> f64 {
        match self {
            End::Funnel(f) => f.tau * (hi.sinh() - lo.sinh()),
            End::Cusp(c) => c.l * ((-lo).exp() - (-hi).exp()),
        }
    }

    pub(crate) fn mode_weight(&self, t: f64) -> f64 {
        match self {
            End::Funnel(f) => f.mode_weight(t),
            End::Cusp(c) => c.mode_weight(t),
        }
    }

    pub(crate) fn mode_offset(&self, t: f64) -> f64 {
        match self {
            End::Funnel(f) => f.mode_offset(t),
            End::Cusp(c) => c.mode_offset(t),
        }
    }
}

/// The ends of a surface, kept in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceEnds {
    ends: Vec<End>,
}

impl SurfaceEnds {
    pub fn new(ends: Vec<End>) -> Result<Self> {
        if ends.is_empty() {
            return Err(Error::invalid("ends", "at least one end is required"));
        }
        Ok(Self { ends })
    }

    pub fn ends(&self) -> &[End] {
        &self.ends
    }

    pub fn funnels(&self) -> impl Iterator<Item = &FunnelEnd> {
        self.ends.iter().filter_map(|e| match e {
            End::Funnel(f) => Some(f),
            End::Cusp(_) => None,
        })
    }

    pub fn cusps(&self) -> impl Iterator<Item = &CuspEnd> {
        self.ends.iter().filter_map(|e| match e {
            End::Cusp(c) => Some(c),
            End::Funnel(_) => None,
        })
    }
}

/// Outcome of the discrete growth-hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// Intensity tends to infinity.
    pub h0: bool,
    /// Gradient bound holds with a finite constant on the grid.
    pub h1_or_h2: bool,
    /// Smallest constant satisfying the gradient bound on the grid.
    pub witness: f64,
}

/// Checks the growth hypotheses of an end on a coordinate grid.
///
/// Funnels use `|∂_t b̃| ≤ C (b + 1)`; cusps use `|∂_t b̃| ≤ C (b + 1) e^t`,
/// where `∂_t b̃ = y ∂_y b̃` and `e^t` stands for the exponential of the
/// distance to the core.
pub fn check_growth_hypotheses(end: &End, grid: &[f64]) -> Result<GrowthReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    end.check_domain(grid[0])?;
    let field = end.field();
    let witness = grid
        .iter()
        .map(|&t| {
            let weight = field.intensity(t) + 1.0;
            let weight = match end {
                End::Funnel(_) => weight,
                End::Cusp(_) => weight * t.exp(),
            };
            field.t_derivative(t).abs() / weight
        })
        .fold(0.0, f64::max);
    Ok(GrowthReport {
        h0: field.is_unbounded(),
        h1_or_h2: witness.is_finite(),
        witness,
    })
}
