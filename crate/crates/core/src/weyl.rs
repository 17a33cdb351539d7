//! The semiclassical side: Landau-level integrals over the ends, the
//! sublevel-area function `ω`, its doubling-type growth condition, the
//! two-sided bracket around the integral, and power-law fits of counts.
//!
//! For an end with area density `ρ(t)` and intensity `b(t)` the central
//! quantity is
//!
//! ```text
//! W(λ) = ∫_{t0}^∞ 𝒩(λ - 1/4, b(t)) ρ(t) dt
//! ```
//!
//! which is finite exactly when `b` is unbounded, since `𝒩(μ, b) = 0` once
//! `b ≥ μ`. The integrand jumps wherever `b(t) = μ/(2k+1)`; those points are
//! located explicitly and each smooth piece goes to adaptive Simpson.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::landau::landau_levels_below;
use crate::model::{End, SurfaceEnds};

/// Settings for the bracket and the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylOptions {
    /// Remainder exponent; must lie strictly inside `(1/3, 2/5)`.
    pub delta: f64,
    /// Bracket constant `C ≥ 0`. No value is known to be sufficient.
    pub bracket_c: f64,
    /// Relative quadrature tolerance.
    pub quad_tol: f64,
}

impl Default for WeylOptions {
    fn default() -> Self {
        Self {
            delta: 0.35,
            bracket_c: 1.0,
            quad_tol: 1e-8,
        }
    }
}

impl WeylOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 1.0 / 3.0 && self.delta < 0.4) {
            return Err(Error::invalid(
                "delta",
                format!("must lie strictly between 1/3 and 2/5, got {}", self.delta),
            ));
        }
        if !(self.bracket_c >= 0.0 && self.bracket_c.is_finite()) {
            return Err(Error::invalid(
                "bracket_C",
                format!("must be finite and >= 0, got {}", self.bracket_c),
            ));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(Error::invalid(
                "quad_tol",
                format!("must be positive, got {}", self.quad_tol),
            ));
        }
        Ok(())
    }
}

const SCAN_SAMPLES: usize = 4096;
/// Thresholds `μ/(2k+1)` tracked explicitly per monotone stretch. Only a
/// field vanishing inside the domain can need more; the remaining jumps
/// there are smaller than `μ/(2·MAX_LEVEL_BREAKS)`.
const MAX_LEVEL_BREAKS: u64 = 200_000;
const MAX_SIMPSON_DEPTH: u32 = 48;

fn require_unbounded(end: &End, what: &'static str) -> Result<()> {
    if end.field().is_unbounded() {
        Ok(())
    } else {
        Err(Error::InfiniteIntegral { what })
    }
}

/// Right end of the region where `b < level` can hold.
fn support_end(end: &End, level: f64) -> f64 {
    let t0 = end.t0();
    end.field().tail_bound(level.max(0.0), t0).map_or(t0, |t| t.max(t0))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Split `[t0, t_hi]` into stretches on which `b = |b̃|` is monotone, by
/// locating sign changes of `b̃` and of its derivative.
fn monotone_stretches(end: &End, t_hi: f64) -> Vec<f64> {
    let t0 = end.t0();
    let mut cuts = vec![t0];
    if t_hi <= t0 {
        return cuts;
    }
    let field = end.field();
    let step = (t_hi - t0) / SCAN_SAMPLES as f64;
    let mut prev = t0;
    for i in 1..=SCAN_SAMPLES {
        let t = if i == SCAN_SAMPLES { t_hi } else { t0 + step * i as f64 };
        let mut found: Vec<f64> = Vec::new();
        for f in [
            &(|s: f64| field.signed_value(s)) as &dyn Fn(f64) -> f64,
            &(|s: f64| field.t_derivative(s)),
        ] {
            let (a, b) = (f(prev), f(t));
            if a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0) {
                found.push(bisect(prev, t, f));
            } else if b == 0.0 && i < SCAN_SAMPLES {
                found.push(t);
            }
        }
        found.sort_by(f64::total_cmp);
        for c in found {
            if c > *cuts.last().expect("nonempty") {
                cuts.push(c);
            }
        }
        prev = t;
    }
    if t_hi > *cuts.last().expect("nonempty") {
        cuts.push(t_hi);
    }
    cuts
}

/// Breakpoints of `t ↦ 𝒩(μ, b(t))` in `[t0, t_hi]`, including both ends.
fn landau_breakpoints(end: &End, mu: f64, t_hi: f64) -> Vec<f64> {
    let field = end.field();
    let stretches = monotone_stretches(end, t_hi);
    let mut points = vec![stretches[0]];
    for w in stretches.windows(2) {
        let (a, c) = (w[0], w[1]);
        let (ba, bc) = (field.intensity(a), field.intensity(c));
        let (b_min, b_max) = (ba.min(bc), ba.max(bc));
        // Levels whose threshold μ/(2k+1) lies strictly inside (b_min, b_max).
        if b_max <= 0.0 {
            points.push(c);
            continue;
        }
        let k_first = landau_levels_below(mu, b_max);
        let k_cap = k_first + MAX_LEVEL_BREAKS;
        let k_end = if b_min * (2.0 * k_cap as f64 + 1.0) < mu {
            k_cap
        } else {
            landau_levels_below(mu, b_min)
        };
        let mut inner: Vec<f64> = (k_first..k_end)
            .map(|k| {
                let theta = mu / (2.0 * k as f64 + 1.0);
                bisect(a, c, |t| field.intensity(t) - theta)
            })
            .collect();
        inner.sort_by(f64::total_cmp);
        for p in inner.into_iter().chain(std::iter::once(c)) {
            if p > *points.last().expect("nonempty") {
                points.push(p);
            }
        }
    }
    points
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson with a tolerance relative to a first estimate of the
/// integral.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs() + f64::MIN_POSITIVE;
    simpson_rec(f, a, fa, m, fm, b, fb, whole, tol, MAX_SIMPSON_DEPTH)
}

/// `∫ w(b(t)) 𝒩(μ, b(t)) ρ(t) dt` over one end.
fn landau_integral(end: &End, mu: f64, quad_tol: f64, weight: &dyn Fn(f64) -> f64) -> f64 {
    if !(mu > 0.0) {
        return 0.0;
    }
    let field = end.field();
    let t_hi = support_end(end, mu);
    let points = landau_breakpoints(end, mu, t_hi);
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, c) = (w[0], w[1]);
        let b_mid = field.intensity(0.5 * (a + c));
        if b_mid == 0.0 {
            let f = |t: f64| weight(field.intensity(t)) * 0.5 * mu * end.area_density(t);
            total += adaptive_simpson(&f, a, c, quad_tol);
            continue;
        }
        let k = landau_levels_below(mu, b_mid);
        if k == 0 {
            continue;
        }
        let kf = k as f64;
        let f = |t: f64| {
            let b = field.intensity(t);
            weight(b) * kf * b * end.area_density(t)
        };
        total += adaptive_simpson(&f, a, c, quad_tol);
    }
    total
}

fn weighted_sum(ends: &SurfaceEnds, mu: f64, quad_tol: f64, weight: &dyn Fn(f64) -> f64) -> Result<f64> {
    for end in ends.ends() {
        require_unbounded(end, "Landau-level integral")?;
    }
    // Fixed summation order keeps results reproducible.
    Ok(ends
        .ends()
        .iter()
        .map(|end| landau_integral(end, mu, quad_tol, weight))
        .sum())
}

/// `Σ_ends ∫ 𝒩(λ - 1/4, b(t)) ρ(t) dt`; zero for `λ ≤ 1/4`.
pub fn weyl_integral(ends: &SurfaceEnds, lambda: f64, opts: &WeylOptions) -> Result<f64> {
    opts.validate()?;
    if lambda.is_nan() {
        return Err(Error::invalid("lambda", "must not be NaN"));
    }
    weighted_sum(ends, lambda - 0.25, opts.quad_tol, &|_| 1.0)
}

/// Weyl integral of a single end.
pub fn weyl_integral_end(end: &End, lambda: f64, opts: &WeylOptions) -> Result<f64> {
    opts.validate()?;
    require_unbounded(end, "Landau-level integral")?;
    Ok(landau_integral(end, lambda - 0.25, opts.quad_tol, &|_| 1.0))
}

/// Lower and upper semiclassical bounds around [`weyl_integral`].
///
/// With `C = bracket_c` and `δ = delta`, the bounds integrate
/// `(1 ∓ C (b+1)^{-(2-5δ)/2}) 𝒩(λ(1 ∓ C λ^{1-3δ}) - 1/4, b)`. The lower
/// weight is clamped at zero.
pub fn theorem1_bracket(ends: &SurfaceEnds, lambda: f64, opts: &WeylOptions) -> Result<(f64, f64)> {
    opts.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
    }
    let c = opts.bracket_c;
    let shift = c * lambda.powf(1.0 - 3.0 * opts.delta);
    let power = -(2.0 - 5.0 * opts.delta) / 2.0;
    let lower_weight = |b: f64| (1.0 - c * (b + 1.0).powf(power)).max(0.0);
    let upper_weight = |b: f64| 1.0 + c * (b + 1.0).powf(power);
    let lower = weighted_sum(ends, lambda * (1.0 - shift) - 0.25, opts.quad_tol, &lower_weight)?;
    let upper = weighted_sum(ends, lambda * (1.0 + shift) - 0.25, opts.quad_tol, &upper_weight)?;
    if c == 0.0 {
        return Ok((lower, upper));
    }
    // The exact bounds straddle the central value; only quadrature noise
    // could reorder them.
    let central = weighted_sum(ends, lambda - 0.25, opts.quad_tol, &|_| 1.0)?;
    Ok((lower.min(central), upper.max(central)))
}

/// Area of `{b < μ}` on one end, angular factor `2π` included.
fn omega_end(end: &End, mu: f64) -> f64 {
    if !(mu > 0.0) {
        return 0.0;
    }
    let field = end.field();
    let t_hi = support_end(end, mu);
    let stretches = monotone_stretches(end, t_hi);
    let mut area = 0.0;
    for w in stretches.windows(2) {
        let (a, c) = (w[0], w[1]);
        let (ba, bc) = (field.intensity(a), field.intensity(c));
        match (ba < mu, bc < mu) {
            (true, true) => area += end.density_integral(a, c),
            (false, false) => {}
            (below_left, _) => {
                let r = bisect(a, c, |t| field.intensity(t) - mu);
                area += if below_left {
                    end.density_integral(a, r)
                } else {
                    end.density_integral(r, c)
                };
            }
        }
    }
    2.0 * PI * area
}

/// `ω(μ)`: total area of the sublevel set `{b < μ}` over the modelled ends.
pub fn omega(ends: &SurfaceEnds, mu: f64) -> Result<f64> {
    for end in ends.ends() {
        require_unbounded(end, "sublevel area")?;
    }
    Ok(ends.ends().iter().map(|end| omega_end(end, mu)).sum())
}

/// Outcome of the growth check on `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypWReport {
    pub holds: bool,
    /// Largest observed `(ω((1+τ)μ) - ω(μ)) / (τ ω(μ))`.
    pub c1_witness: f64,
    /// `(μ, τ, ratio)` for each evaluated pair.
    pub ratios: Vec<(f64, f64, f64)>,
    /// Pairs skipped because `ω(μ) = 0`.
    pub notes: Vec<String>,
}

/// Evaluate `(ω((1+τ)μ) - ω(μ)) / (τ ω(μ))` over the grid. On a finite grid
/// "bounded" means every ratio is finite; the maximum is the witness.
pub fn check_hyp_w(ends: &SurfaceEnds, mu_grid: &[f64], tau_grid: &[f64]) -> Result<HypWReport> {
    if mu_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&tau) = tau_grid.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::invalid(
            "tau_grid",
            format!("values must lie in (0, 1), got {tau}"),
        ));
    }
    let mut ratios = Vec::new();
    let mut notes = Vec::new();
    for &mu in mu_grid {
        let base = omega(ends, mu)?;
        for &tau in tau_grid {
            if base == 0.0 {
                notes.push(format!("skipped mu = {mu}, tau = {tau}: omega(mu) = 0"));
                continue;
            }
            let grown = omega(ends, (1.0 + tau) * mu)?;
            ratios.push((mu, tau, (grown - base) / (tau * base)));
        }
    }
    let holds = !ratios.is_empty() && ratios.iter().all(|r| r.2.is_finite());
    let c1_witness = ratios.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(HypWReport {
        holds,
        c1_witness,
        ratios,
        notes,
    })
}

/// Least-squares fit of `count ≈ α λ^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub alpha: f64,
    pub slope: f64,
}

pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(Error::invalid(
            "samples",
            format!("need at least 3, got {}", samples.len()),
        ));
    }
    if let Some(&(l, c)) = samples.iter().find(|(l, c)| !(*l > 0.0 && *c > 0.0)) {
        return Err(Error::invalid(
            "samples",
            format!("lambda and count must be positive, got ({l}, {c})"),
        ));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("samples", "lambda values must be strictly increasing"));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(ExponentFit {
        alpha: (my - slope * mx).exp(),
        slope,
    })
}
