//! Fourier-mode reduction of the magnetic Laplacian on a single end.
//!
//! With a radial gauge `A = a(t) dθ` and the half-density conjugation that
//! turns the area measure into `dθ dt`, the end operator splits over the
//! circle frequencies `ℓ ∈ ℤ` into
//!
//! ```text
//! funnel:  P_ℓ = D_t² + (ℓ - a(t))² / (τ² cosh² t) + (1 + cosh⁻² t) / 4
//! cusp:    P_ℓ = D_t² + e^{2t} (ℓ - a(t))² / L² + 1/4
//! ```
//!
//! each with a Dirichlet condition at `t0`. The Dirichlet counting function
//! of the end is the sum of the per-mode counts.
//!
//! The funnel mode limit is studied in the log coordinate `s = ln y` with
//! `y = 2ρ e^{-t}`; there the weighted operator `D_y (y² D_y) + W` becomes
//! `D_s² + 1/4 + W(e^s)`, so every operator here is a plain 1-D Schrödinger
//! operator handled by [`crate::sturm1d`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CuspEnd, End, FunnelEnd};
use crate::sturm1d::{count_stable_sampled, grid_step, CountResult, SampledPotential, StableOptions};

#[derive(Debug, Clone, Copy)]
enum ModeKind<'a> {
    Funnel { end: &'a FunnelEnd, ell: i64 },
    Cusp { end: &'a CuspEnd, ell: i64 },
    MorseLimit { beta: f64 },
    ScaledFunnel { beta: f64, rho: f64 },
}

/// One reduced 1-D potential.
#[derive(Debug, Clone, Copy)]
pub struct ModePotential<'a> {
    kind: ModeKind<'a>,
}

impl ModePotential<'_> {
    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            ModeKind::Funnel { end, ell } => {
                let m = ell as f64 - end.gauge_at(t);
                m * m * end.mode_weight(t) + end.mode_offset(t)
            }
            ModeKind::Cusp { end, ell } => {
                let m = ell as f64 - end.gauge_at(t);
                m * m * end.mode_weight(t) + 0.25
            }
            ModeKind::MorseLimit { beta } => {
                let w = beta - t.exp();
                0.25 + w * w
            }
            ModeKind::ScaledFunnel { beta, rho } => 0.25 + scaled_funnel_w(beta, rho, t.exp()),
        }
    }

    /// Proven lower bound for the potential.
    pub fn analytic_floor(&self) -> f64 {
        0.25
    }

    /// Circle frequency, for potentials attached to an end.
    pub fn ell(&self) -> Option<i64> {
        match self.kind {
            ModeKind::Funnel { ell, .. } | ModeKind::Cusp { ell, .. } => Some(ell),
            _ => None,
        }
    }
}

impl SampledPotential for ModePotential<'_> {
    fn sample(&self, t_lo: f64, t_hi: f64, n: usize, out: &mut Vec<f64>) -> Result<()> {
        crate::sturm1d::Pointwise(|t| self.eval(t)).sample(t_lo, t_hi, n, out)
    }
}

/// `W_ρ(y)`, which tends to `(β - y)²` as `ρ → ∞`.
fn scaled_funnel_w(beta: f64, rho: f64, y: f64) -> f64 {
    let q = y * y / (4.0 * rho * rho);
    let first = (beta * (1.0 - q) - y) / (1.0 + q);
    let second = (y / (2.0 * rho)) / (1.0 + q);
    first * first + second * second
}

pub fn funnel_mode_potential(end: &FunnelEnd, ell: i64) -> ModePotential<'_> {
    ModePotential {
        kind: ModeKind::Funnel { end, ell },
    }
}

pub fn cusp_mode_potential(end: &CuspEnd, ell: i64) -> ModePotential<'_> {
    ModePotential {
        kind: ModeKind::Cusp { end, ell },
    }
}

pub fn mode_potential(end: &End, ell: i64) -> ModePotential<'_> {
    match end {
        End::Funnel(f) => funnel_mode_potential(f, ell),
        End::Cusp(c) => cusp_mode_potential(c, ell),
    }
}

/// Morse-type potential `1/4 + (β - e^s)²` of the `ρ → ∞` limit operator,
/// on the whole line in `s = ln y`.
pub fn funnel_limit_potential(beta: f64) -> ModePotential<'static> {
    ModePotential {
        kind: ModeKind::MorseLimit { beta },
    }
}

/// `1/4 + W_ρ(e^s)`: a constant-field funnel mode with `ρ = |ℓ - ξ|/τ`,
/// written in `s = ln(2ρ) - t`. The Dirichlet end sits at `s = ln(2ρ) - t0`.
pub fn scaled_funnel_potential(beta: f64, rho: f64) -> ModePotential<'static> {
    ModePotential {
        kind: ModeKind::ScaledFunnel { beta, rho },
    }
}

/// Closed integer interval of circle frequencies; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeRange {
    pub lo: i64,
    pub hi: i64,
}

impl ModeRange {
    pub fn empty() -> Self {
        Self { lo: 1, hi: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }

    pub fn contains(&self, ell: i64) -> bool {
        self.lo <= ell && ell <= self.hi
    }
}

/// Numerical controls for per-end counting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeOptions {
    /// Minimum number of interior nodes on the initial grid.
    pub grid_n: usize,
    /// Hard limit for the truncation point.
    pub t_max: f64,
    pub max_refinements: usize,
    /// Consecutive empty modes that end the outward scan.
    pub miss_run: usize,
    /// Give up (flagging non-convergence) after this many modes.
    pub max_modes: u64,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self {
            grid_n: 64,
            t_max: 60.0,
            max_refinements: 8,
            miss_run: 3,
            max_modes: 50_000_000,
        }
    }
}

/// Gauge, weight and offset sampled once per grid and shared by every mode.
struct GridArrays {
    gauge: Vec<f64>,
    weight: Vec<f64>,
    offset: Vec<f64>,
}

struct GridCache<'a> {
    end: &'a End,
    grids: RefCell<HashMap<(u64, u64, usize), Rc<GridArrays>>>,
}

impl<'a> GridCache<'a> {
    fn new(end: &'a End) -> Self {
        Self {
            end,
            grids: RefCell::new(HashMap::new()),
        }
    }

    fn arrays(&self, t_lo: f64, t_hi: f64, n: usize) -> Rc<GridArrays> {
        let key = (t_lo.to_bits(), t_hi.to_bits(), n);
        if let Some(a) = self.grids.borrow().get(&key) {
            return Rc::clone(a);
        }
        let h = grid_step(t_lo, t_hi, n);
        let mut arrays = GridArrays {
            gauge: Vec::with_capacity(n),
            weight: Vec::with_capacity(n),
            offset: Vec::with_capacity(n),
        };
        for i in 0..n {
            let t = t_lo + (i as f64 + 1.0) * h;
            arrays.gauge.push(self.end.gauge_unchecked(t));
            arrays.weight.push(self.end.mode_weight(t));
            arrays.offset.push(self.end.mode_offset(t));
        }
        let arrays = Rc::new(arrays);
        self.grids.borrow_mut().insert(key, Rc::clone(&arrays));
        arrays
    }
}

struct CachedMode<'c, 'a> {
    cache: &'c GridCache<'a>,
    ell: i64,
}

impl SampledPotential for CachedMode<'_, '_> {
    fn sample(&self, t_lo: f64, t_hi: f64, n: usize, out: &mut Vec<f64>) -> Result<()> {
        let g = self.cache.arrays(t_lo, t_hi, n);
        let ell = self.ell as f64;
        out.clear();
        out.extend(
            g.gauge
                .iter()
                .zip(&g.weight)
                .zip(&g.offset)
                .map(|((&a, &w), &c)| (ell - a) * (ell - a) * w + c),
        );
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            let t = t_lo + (i as f64 + 1.0) * grid_step(t_lo, t_hi, n);
            return Err(Error::NonFinitePotential { index: i, t });
        }
        Ok(())
    }
}

struct ModeScan {
    range: ModeRange,
    counts: Vec<(i64, CountResult)>,
    complete: bool,
}

fn stable_options(end: &End, lambda: f64, opts: &ModeOptions) -> StableOptions {
    let t0 = end.t0();
    let level = 2.0 * lambda.max(0.0) + 1.0;
    let tail = end.field().tail_bound(level, t0).unwrap_or(t0);
    let t_hi0 = (tail + 1.0).min(opts.t_max).max(t0 + 1.0);
    // Resolve the local wavelength at energy λ and the magnetic length 1/√b.
    let h0 = 0.5 / lambda.max(4.0).sqrt();
    let n0 = (((t_hi0 - t0) / h0).ceil() as usize).max(opts.grid_n).max(2);
    StableOptions {
        n0,
        t_hi0,
        t_max: opts.t_max.max(t_hi0),
        max_refinements: opts.max_refinements,
        max_extensions: 12,
        tol: StableOptions::default().tol,
    }
}

/// Mode whose gauge zero sits where the intensity is smallest.
fn starting_mode(end: &End, t_hi: f64) -> i64 {
    let t0 = end.t0();
    let samples = 512;
    let field = end.field();
    let (t_star, _) = (0..=samples)
        .map(|i| t0 + (t_hi - t0) * i as f64 / samples as f64)
        .map(|t| (t, field.intensity(t)))
        .fold((t0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    end.gauge_unchecked(t_star).round() as i64
}

fn scan_modes(end: &End, lambda: f64, opts: &ModeOptions) -> Result<ModeScan> {
    if !end.field().is_unbounded() {
        return Err(Error::BoundedField { lambda });
    }
    if opts.miss_run == 0 {
        return Err(Error::invalid("miss_run", "must be at least 1"));
    }
    let mut scan = ModeScan {
        range: ModeRange::empty(),
        counts: Vec::new(),
        complete: true,
    };
    // Every mode potential is at least 1/4.
    if lambda <= 0.25 {
        return Ok(scan);
    }
    let stable = stable_options(end, lambda, opts);
    let cache = GridCache::new(end);
    let start = starting_mode(end, stable.t_hi0);
    let mut visited: u64 = 0;
    for dir in [1i64, -1] {
        let mut ell = if dir > 0 { start + 1 } else { start };
        let mut misses = 0;
        while misses < opts.miss_run {
            if visited >= opts.max_modes {
                scan.complete = false;
                break;
            }
            let r = count_stable_sampled(&CachedMode { cache: &cache, ell }, end.t0(), lambda, &stable)?;
            visited += 1;
            if r.count == 0 && r.converged {
                misses += 1;
            } else {
                misses = 0;
            }
            if r.count > 0 {
                scan.range.lo = if scan.range.is_empty() {
                    ell
                } else {
                    scan.range.lo.min(ell)
                };
                scan.range.hi = if scan.range.is_empty() {
                    ell
                } else {
                    scan.range.hi.max(ell)
                };
            }
            scan.counts.push((ell, r));
            ell += dir;
        }
    }
    scan.counts.sort_by_key(|(ell, _)| *ell);
    Ok(scan)
}

/// Circle frequencies whose Dirichlet mode operator has spectrum below `lambda`.
///
/// The scan walks outward from the mode centred where the intensity is
/// smallest and stops after `miss_run` consecutive modes with an empty
/// stabilised count. Modes whose gauge zero lies inside the end have
/// `min V = 1/4`, so exclusion is certified by the discrete count itself
/// (which is zero whenever `λ ≤ min V` on the grid).
pub fn mode_range(end: &End, lambda: f64, opts: &ModeOptions) -> Result<ModeRange> {
    Ok(scan_modes(end, lambda, opts)?.range)
}

/// Dirichlet eigenvalue count `N(λ)` of a single end, summed over modes.
pub fn count_end(end: &End, lambda: f64, opts: &ModeOptions) -> Result<CountResult> {
    let scan = scan_modes(end, lambda, opts)?;
    let mut out = CountResult {
        count: 0,
        lambda,
        n: 0,
        t_hi: end.t0(),
        mode_range: Some(scan.range),
        converged: scan.complete,
    };
    for (_, r) in &scan.counts {
        out.count += r.count;
        out.n = out.n.max(r.n);
        out.t_hi = out.t_hi.max(r.t_hi);
        out.converged &= r.converged;
    }
    Ok(out)
}

/// Per-mode counts inside the mode range, in increasing `ℓ`.
pub fn count_end_by_mode(end: &End, lambda: f64, opts: &ModeOptions) -> Result<Vec<(i64, CountResult)>> {
    let scan = scan_modes(end, lambda, opts)?;
    Ok(scan
        .counts
        .into_iter()
        .filter(|(ell, _)| scan.range.contains(*ell))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RadialField;
    use crate::sturm1d::discretize;
    use approx::assert_relative_eq;

    fn funnel(coeffs: Vec<f64>, tau: f64, t0: f64, xi: f64) -> FunnelEnd {
        FunnelEnd::new(tau, t0, RadialField::funnel(coeffs).unwrap(), xi).unwrap()
    }

    fn cusp(coeffs: Vec<f64>, l: f64, t0: f64, xi: f64) -> CuspEnd {
        CuspEnd::new(l, t0, RadialField::cusp(coeffs).unwrap(), xi).unwrap()
    }

    /// Composite Simpson on [a, b] with 2m panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        let h = (b - a) / (2 * m) as f64;
        let mut s = f(a) + f(b);
        for i in 1..2 * m {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn constant_funnel_mode_values() {
        let beta = 1.5;
        let e = funnel(vec![beta], 1.0, 0.0, 2.0);
        let v = funnel_mode_potential(&e, 2);
        assert_relative_eq!(v.eval(0.0), 0.5, epsilon = 1e-15);
        for ell in [-3, 0, 2, 7] {
            let v = funnel_mode_potential(&e, ell);
            assert_relative_eq!(v.eval(30.0), beta * beta + 0.25, max_relative = 1e-9);
        }
        // Matches ((ℓ-ξ)/(τ cosh t) + β tanh t)² + (1 + sech² t)/4.
        let e = funnel(vec![beta], 0.7, 0.0, 0.3);
        for ell in [-4i64, 1] {
            let v = funnel_mode_potential(&e, ell);
            for i in 0..30 {
                let t = 0.2 * i as f64;
                let m = (ell as f64 - 0.3) / (0.7 * t.cosh()) + beta * t.tanh();
                let expected = m * m + 0.25 * (1.0 + 1.0 / t.cosh().powi(2));
                assert_relative_eq!(v.eval(t), expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn growing_funnel_mode_matches_quadrature() {
        let e = funnel(vec![0.0, 1.0], 1.0, 0.0, 0.0);
        let v = funnel_mode_potential(&e, 0);
        for t in [0.3, 1.0, 2.2, 3.5] {
            let a = -simpson(|s| s.cosh() * s.cosh(), 0.0, t, 2000);
            let expected = a * a / t.cosh().powi(2) + 0.25 * (1.0 + 1.0 / t.cosh().powi(2));
            assert_relative_eq!(v.eval(t), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn cusp_mode_values() {
        // Constant field: the mode at ℓ = lim a(t) has constant potential 1/4 + b².
        let (b, l, t0): (f64, f64, f64) = (2.0, 1.3, 0.4);
        let e = cusp(vec![b], l, t0, l * b * (-t0).exp());
        let v = cusp_mode_potential(&e, 0);
        for t in [0.4, 1.0, 5.0, 12.0] {
            assert_relative_eq!(v.eval(t), 4.25, max_relative = 1e-9);
        }
        let e = cusp(vec![0.0, 1.0], 1.0, 0.0, 0.0);
        let v = cusp_mode_potential(&e, 0);
        for t in [0.0, 0.5, 2.0, 4.0] {
            assert_relative_eq!(v.eval(t), (2.0 * t).exp() * t * t + 0.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn morse_limit_minimum() {
        let v = funnel_limit_potential(2.5);
        assert_relative_eq!(v.eval(2.5f64.ln()), 0.25, epsilon = 1e-14);
        assert!(v.eval(0.0) > 0.25);
    }

    #[test]
    fn scaled_funnel_matches_t_form() {
        // y = 2ρ e^{-t}: the two forms of the same mode agree pointwise.
        let beta = 1.0;
        let e = funnel(vec![beta], 1.0, 0.0, 0.0);
        for rho in [3i64, 10, 40] {
            let tv = funnel_mode_potential(&e, -rho);
            let sv = scaled_funnel_potential(beta, rho as f64);
            for i in 0..40 {
                let t = 0.25 * i as f64;
                let s = (2.0 * rho as f64).ln() - t;
                assert_relative_eq!(tv.eval(t), sv.eval(s), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn scaled_funnel_converges_to_morse() {
        let (beta, y) = (1.3, 2.0f64);
        let lim = funnel_limit_potential(beta).eval(y.ln());
        let d1 = (scaled_funnel_potential(beta, 10.0).eval(y.ln()) - lim).abs();
        let d2 = (scaled_funnel_potential(beta, 1000.0).eval(y.ln()) - lim).abs();
        assert!(d2 < d1 && d2 < 1e-5);
    }

    #[test]
    fn below_quarter_everything_is_empty() {
        let e: End = cusp(vec![0.0, 1.0], 1.0, 0.0, 0.0).into();
        assert!(mode_range(&e, 0.2, &ModeOptions::default()).unwrap().is_empty());
        let r = count_end(&e, 0.0, &ModeOptions::default()).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.converged);
    }

    #[test]
    fn bounded_field_is_rejected() {
        let e: End = funnel(vec![2.0], 1.0, 0.0, 0.0).into();
        assert!(matches!(
            mode_range(&e, 10.0, &ModeOptions::default()),
            Err(Error::BoundedField { .. })
        ));
        assert!(count_end(&e, 10.0, &ModeOptions::default()).is_err());
    }

    #[test]
    fn cusp_mode_range_is_finite_and_contains_zero() {
        let e: End = cusp(vec![0.0, 1.0], 1.0, 0.0, 0.0).into();
        let r = mode_range(&e, 100.0, &ModeOptions::default()).unwrap();
        assert!(r.contains(0));
        assert!(r.len() < 40);
        // Oracle: modes just outside have no eigenvalue below λ on a fine grid.
        for ell in [r.lo - 1, r.hi + 1] {
            let v = cusp_mode_potential(
                match &e {
                    End::Cusp(c) => c,
                    _ => unreachable!(),
                },
                ell,
            );
            let t = discretize(|x| v.eval(x), 0.0, 8.0, 8000).unwrap();
            assert_eq!(t.count_below(100.0), 0, "ell = {ell}");
        }
    }

    #[test]
    fn per_mode_counts_match_direct_discretisation() {
        let e: End = cusp(vec![0.0, 1.0], 1.0, 0.0, 0.0).into();
        let lambda = 60.0;
        let per_mode = count_end_by_mode(&e, lambda, &ModeOptions::default()).unwrap();
        let c = match &e {
            End::Cusp(c) => c,
            _ => unreachable!(),
        };
        for (ell, r) in per_mode {
            let v = cusp_mode_potential(c, ell);
            let t = discretize(|x| v.eval(x), 0.0, 9.0, 20000).unwrap();
            assert_eq!(r.count as usize, t.count_below(lambda), "ell = {ell}");
        }
    }

    #[test]
    fn gauge_shift_is_exact() {
        let e: End = funnel(vec![0.0, 1.0], 1.0, 0.0, 0.3).into();
        let shifted = e.with_xi(1.3);
        let opts = ModeOptions::default();
        for lambda in [10.0, 25.0] {
            assert_eq!(
                count_end(&e, lambda, &opts).unwrap().count,
                count_end(&shifted, lambda, &opts).unwrap().count
            );
        }
    }

    #[test]
    fn count_end_is_monotone_and_deterministic() {
        let e: End = cusp(vec![0.0, 1.0], 1.0, 0.0, 0.0).into();
        let opts = ModeOptions::default();
        let mut last = 0;
        for lambda in [5.0, 20.0, 50.0, 120.0] {
            let r = count_end(&e, lambda, &opts).unwrap();
            assert!(r.converged);
            assert!(r.count >= last);
            assert_eq!(r, count_end(&e, lambda, &opts).unwrap());
            last = r.count;
        }
        // Enlarging the end (smaller t0) never loses eigenvalues.
        let big: End = cusp(vec![0.0, 1.0], 1.0, -0.5, 0.5).into();
        assert!(count_end(&big, 50.0, &opts).unwrap().count >= count_end(&e, 50.0, &opts).unwrap().count);
    }
}
