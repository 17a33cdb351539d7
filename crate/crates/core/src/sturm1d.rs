//! Finite-difference Dirichlet realisations of `D_t² + V(t)` and
//! eigenvalue counting by Sturm-sequence inertia.
//!
//! The interval `[t_lo, t_hi]` is split into `n + 1` cells of width `h`; the
//! `n` interior nodes carry the unknowns and both ends are Dirichlet walls.
//! The resulting matrix is symmetric tridiagonal with diagonal
//! `2/h² + V(t_i)` and constant off-diagonal `-1/h²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::ModeRange;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub h: f64,
}

/// Grid step for `n` interior nodes.
pub fn grid_step(t_lo: f64, t_hi: f64, n: usize) -> f64 {
    (t_hi - t_lo) / (n as f64 + 1.0)
}

fn check_grid(t_lo: f64, t_hi: f64, n: usize) -> Result<()> {
    if !(t_lo < t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(Error::invalid(
            "interval",
            format!("need finite t_lo < t_hi, got [{t_lo}, {t_hi}]"),
        ));
    }
    if n < 2 {
        return Err(Error::invalid("n", format!("need at least 2 interior nodes, got {n}")));
    }
    Ok(())
}

/// Three-point discretisation of `D_t² + V` with Dirichlet ends.
pub fn discretize(v: impl Fn(f64) -> f64, t_lo: f64, t_hi: f64, n: usize) -> Result<TridiagonalOperator> {
    check_grid(t_lo, t_hi, n)?;
    let mut diag = Vec::with_capacity(n);
    Pointwise(v).sample(t_lo, t_hi, n, &mut diag)?;
    let h = grid_step(t_lo, t_hi, n);
    let kinetic = 2.0 / (h * h);
    diag.iter_mut().for_each(|d| *d += kinetic);
    Ok(TridiagonalOperator {
        diag,
        off: vec![-1.0 / (h * h); n - 1],
        t_lo,
        t_hi,
        h,
    })
}

/// Number of eigenvalues strictly below `lambda`, counted as negative pivots
/// of the `LDLᵀ` factorisation of `T - λI`.
///
/// A pivot that vanishes exactly is replaced by `+ε·(|a_i - λ| + c² + 1)`.
/// Perturbing upward is equivalent to nudging `a_i` up, which can only push
/// an eigenvalue sitting exactly on `λ` above it, so such eigenvalues are never
/// counted as strictly below.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    debug_assert!(diag.is_empty() || off.len() + 1 == diag.len());
    let mut count = 0;
    let mut prev = 1.0;
    let mut prev_off_sq = 0.0;
    for (i, &a) in diag.iter().enumerate() {
        let shifted = a - lambda;
        let mut d = shifted - prev_off_sq / prev;
        if d == 0.0 {
            d = f64::EPSILON * (shifted.abs() + prev_off_sq + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
        prev = d;
        prev_off_sq = off.get(i).map_or(0.0, |c| c * c);
    }
    count
}

/// Inertia count for the uniform-grid case where every off-diagonal squared
/// equals `off_sq` and the diagonal is `kinetic + potential[i]`.
pub(crate) fn sturm_count_uniform(potential: &[f64], kinetic: f64, off_sq: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut prev = 1.0;
    let mut coupling = 0.0;
    let base = kinetic - lambda;
    for &v in potential {
        let shifted = base + v;
        let mut d = shifted - coupling / prev;
        if d == 0.0 {
            d = f64::EPSILON * (shifted.abs() + coupling + 1.0);
        }
        count += (d < 0.0) as usize;
        prev = d;
        coupling = off_sq;
    }
    count
}

impl TridiagonalOperator {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn count_below(&self, lambda: f64) -> usize {
        sturm_count(&self.diag, &self.off, lambda)
    }

    /// The `k` smallest eigenvalues, each bracketed by bisection to width `tol`.
    pub fn lowest_eigenvalues(&self, k: usize, tol: f64) -> Result<Vec<f64>> {
        if k == 0 {
            return Err(Error::invalid("k", "must be at least 1"));
        }
        if !(tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
        }
        if k > self.n() {
            return Err(Error::TooManyEigenvalues { k, n: self.n() });
        }
        let (glo, ghi) = self.gershgorin();
        let pad = 1e-12 * (glo.abs().max(ghi.abs()) + 1.0);
        let (glo, ghi) = (glo - pad, ghi + pad);
        let mut out = Vec::with_capacity(k);
        let mut lo = glo;
        for j in 0..k {
            // Invariant: count(lo) <= j < count(hi).
            let mut hi = ghi;
            lo = lo.max(glo);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }
}

/// Something that can fill the potential values on a uniform interior grid.
pub trait SampledPotential {
    /// Overwrites `out` with `V(t_i)`, `t_i = t_lo + (i+1) h`, `i < n`.
    fn sample(&self, t_lo: f64, t_hi: f64, n: usize, out: &mut Vec<f64>) -> Result<()>;
}

/// Adapts a pointwise closure to [`SampledPotential`].
pub struct Pointwise<F>(pub F);

impl<F: Fn(f64) -> f64> SampledPotential for Pointwise<F> {
    fn sample(&self, t_lo: f64, t_hi: f64, n: usize, out: &mut Vec<f64>) -> Result<()> {
        let h = grid_step(t_lo, t_hi, n);
        out.clear();
        out.reserve(n);
        for i in 0..n {
            let t = t_lo + (i as f64 + 1.0) * h;
            let v = (self.0)(t);
            if !v.is_finite() {
                return Err(Error::NonFinitePotential { index: i, t });
            }
            out.push(v);
        }
        Ok(())
    }
}

/// Integer eigenvalue count together with the discretisation that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub count: u64,
    pub lambda: f64,
    /// Finest grid size used.
    pub n: usize,
    /// Truncation point of the half-line.
    pub t_hi: f64,
    pub mode_range: Option<ModeRange>,
    pub converged: bool,
}

/// Refinement and truncation controls for [`count_stable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableOptions {
    /// Interior nodes on the initial interval.
    pub n0: usize,
    /// Initial truncation point.
    pub t_hi0: f64,
    /// Hard limit for the truncation point.
    pub t_max: f64,
    /// Grid halvings allowed before giving up.
    pub max_refinements: usize,
    /// Interval doublings allowed while searching for the forbidden tail.
    pub max_extensions: usize,
    /// Extrapolated eigenvalues within `tol` of λ count as sitting on λ.
    pub tol: f64,
}

impl Default for StableOptions {
    fn default() -> Self {
        Self {
            n0: 200,
            t_hi0: 10.0,
            t_max: 60.0,
            max_refinements: 8,
            max_extensions: 12,
            tol: 1e-7,
        }
    }
}

/// Fraction of the interval treated as the tail for the truncation test.
const TAIL_FRACTION: f64 = 0.1;

fn tail_is_forbidden(samples: &[f64], lambda: f64) -> bool {
    let k = ((samples.len() as f64 * TAIL_FRACTION).ceil() as usize)
        .max(2)
        .min(samples.len());
    samples[samples.len() - k..].iter().all(|&v| v >= 2.0 * lambda)
}

/// Stabilised count of eigenvalues below `lambda` of `D_t² + V` on the
/// half-line `(t_lo, ∞)` with a Dirichlet condition at `t_lo`.
pub fn count_stable(v: impl Fn(f64) -> f64, t_lo: f64, lambda: f64, opts: &StableOptions) -> Result<CountResult> {
    count_stable_sampled(&Pointwise(v), t_lo, lambda, opts)
}

/// [`count_stable`] for a potential that fills whole grids at once.
///
/// The truncation point is pushed out (keeping the step fixed) until
/// `V ≥ 2λ` on the last tenth of the interval, then the step is halved until
/// the count is unchanged over two successive refinements.
pub fn count_stable_sampled<P: SampledPotential + ?Sized>(
    v: &P,
    t_lo: f64,
    lambda: f64,
    opts: &StableOptions,
) -> Result<CountResult> {
    let mut t_hi = opts.t_hi0.min(opts.t_max);
    check_grid(t_lo, t_hi, opts.n0)?;
    let h0 = grid_step(t_lo, t_hi, opts.n0);
    let mut n = opts.n0;
    let mut samples = Vec::with_capacity(n);
    let mut tail_ok = false;
    for ext in 0..=opts.max_extensions {
        v.sample(t_lo, t_hi, n, &mut samples)?;
        if tail_is_forbidden(&samples, lambda) {
            tail_ok = true;
            break;
        }
        if ext == opts.max_extensions || t_hi >= opts.t_max {
            break;
        }
        t_hi = (t_lo + 2.0 * (t_hi - t_lo)).min(opts.t_max);
        n = (((t_hi - t_lo) / h0).round() as usize).saturating_sub(1).max(2);
    }

    let mut history: Vec<usize> = Vec::with_capacity(opts.max_refinements + 1);
    let mut previous: Vec<f64> = Vec::new();
    let mut converged = false;
    for level in 0..=opts.max_refinements {
        if level > 0 {
            n = 2 * n + 1;
            std::mem::swap(&mut previous, &mut samples);
            v.sample(t_lo, t_hi, n, &mut samples)?;
        }
        let c = UniformGrid::new(&samples, grid_step(t_lo, t_hi, n)).count_below(lambda);
        history.push(c);
        // The discrete spectrum lies above min V, so there is nothing to refine.
        let floor = samples.iter().copied().fold(f64::INFINITY, f64::min);
        if c == 0 && lambda <= floor && level == 0 {
            converged = true;
            break;
        }
        if history.len() >= 3 && history[history.len() - 3..].iter().all(|&x| x == c) {
            converged = true;
            break;
        }
    }
    let mut count = *history.last().expect("at least one level");
    if history.len() >= 2 {
        let h = grid_step(t_lo, t_hi, n);
        let fine = UniformGrid::new(&samples, h);
        let coarse = UniformGrid::new(&previous, 2.0 * h);
        count = resolve_near_lambda(&fine, &coarse, lambda, opts.tol);
    }
    Ok(CountResult {
        count: count as u64,
        lambda,
        n,
        t_hi,
        mode_range: None,
        converged: converged && tail_ok,
    })
}

/// Potential samples on a uniform interior grid of step `h`.
struct UniformGrid<'a> {
    potential: &'a [f64],
    h: f64,
}

impl<'a> UniformGrid<'a> {
    fn new(potential: &'a [f64], h: f64) -> Self {
        Self { potential, h }
    }

    fn count_below(&self, lambda: f64) -> usize {
        let h2 = self.h * self.h;
        sturm_count_uniform(self.potential, 2.0 / h2, 1.0 / (h2 * h2), lambda)
    }

    fn min_potential(&self) -> f64 {
        self.potential.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue with zero-based index `j` by bisection.
    fn eigenvalue(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        let mut width = (hi - lo).abs().max(1.0);
        while self.count_below(lo) > j {
            lo -= width;
            width *= 2.0;
        }
        width = (hi - lo).abs().max(1.0);
        while self.count_below(hi) <= j {
            hi += width;
            width *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Recount eigenvalues whose discrete value falls in the `O(h²)` band just
/// below `lambda`.
///
/// The three-point Laplacian lowers an eigenvalue at wavenumber `k` by about
/// `k⁴h²/12`, and `k² ≤ λ - min V`. Eigenvalues in that band are paired by
/// index with the grid of step `2h` and Richardson-extrapolated; an
/// extrapolated value within `tol` of `lambda` is treated as equal to it and
/// so not strictly below.
fn resolve_near_lambda(fine: &UniformGrid, coarse: &UniformGrid, lambda: f64, tol: f64) -> usize {
    let kinetic = (lambda - fine.min_potential()).max(0.0);
    let band = kinetic * kinetic * fine.h * fine.h / 6.0 + tol;
    let sure = fine.count_below(lambda - band);
    let upto = fine.count_below(lambda);
    let mut count = sure;
    for j in sure..upto {
        let e_fine = fine.eigenvalue(j, lambda - band, lambda);
        let e_coarse = coarse.eigenvalue(j, lambda - 4.0 * band, lambda);
        let extrapolated = e_fine + (e_fine - e_coarse) / 3.0;
        if extrapolated < lambda - tol {
            count += 1;
        }
    }
    count
}
