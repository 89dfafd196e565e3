//! Ω^(ν)(λ), its sampled curves, the (e, e_ph) region boundary and the
//! entropy support function Ω_h^(ν)(γ).

use rayon::prelude::*;

use crate::entropy::h_capped;
use crate::error::{Error, Result};
use crate::linalg::{
    max_eigenpair_tridiag, max_eigenvalue_tridiag, upper_concave_envelope, PiecewiseLinear,
    TridiagonalSymmetric,
};
use crate::operators::{build_pi, build_pi_ph, patterns_of_weight, Branch, Pattern};
use crate::optimize::{bisect, linspace, logspace};
use crate::DEFAULT_TOL;

/// Photon numbers whose dominant patterns have been checked.
pub const MAX_VALIDATED_NU: usize = 3;

/// Allowed excess over the chord before a sampled curve counts as non-convex.
pub const CONVEXITY_TOL: f64 = 1e-9;

const GRID_STEP: f64 = 0.005;
const GRID_MAX: f64 = 12.0;
const TAIL_MAX: f64 = 1e4;
const TAIL_POINTS: usize = 600;
const CROSSOVER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaOptions {
    /// Absolute eigenvalue tolerance.
    pub tol: f64,
    /// Allow ν > 3 by enumerating every weight ν−1 pattern.
    pub best_effort: bool,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            best_effort: false,
        }
    }
}

/// Best candidate inside one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchMax {
    pub value: f64,
    pub pattern: Pattern,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaValue {
    pub value: f64,
    pub branch: Branch,
    pub pattern: Pattern,
    pub offset: usize,
    /// `None` for ν = 0, where there are no weight ν−1 patterns.
    pub minus: Option<BranchMax>,
    pub plus: BranchMax,
}

fn check_nu(nu: usize, opts: &OmegaOptions) -> Result<()> {
    if nu > MAX_VALIDATED_NU && !opts.best_effort {
        return Err(Error::UnvalidatedPhotonNumber(nu));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Keeps the first candidate unless a later one is larger by more than `tie`.
fn consider(best: &mut Option<BranchMax>, cand: BranchMax, tie: f64) {
    match best {
        Some(b) if cand.value <= b.value + tie => {}
        _ => *best = Some(cand),
    }
}

fn minus_matrix(
    pi: &TridiagonalSymmetric,
    pattern: &Pattern,
    lambda: f64,
) -> Result<TridiagonalSymmetric> {
    let ph = build_pi_ph(pattern)?;
    let diag =
        ph.0.iter()
            .zip(pi.diag())
            .map(|(p, d)| p - lambda * d)
            .collect();
    let offdiag = pi.offdiag().iter().map(|o| -lambda * o).collect();
    TridiagonalSymmetric::new(diag, offdiag)
}

fn plus_matrix(
    pi: &TridiagonalSymmetric,
    n: usize,
    start: usize,
    len: usize,
    lambda: f64,
) -> Result<(Pattern, TridiagonalSymmetric)> {
    let p = Pattern::run(n, start, start + len - 1)?;
    let full = minus_matrix(pi, &p, lambda)?;
    Ok((p, full.sub_block(start, len)?))
}

/// Ω^(ν)(λ) for block length n, with the achieving pattern.
pub fn omega(n: usize, nu: usize, lambda: f64) -> Result<OmegaValue> {
    omega_with(n, nu, lambda, &OmegaOptions::default())
}

pub fn omega_with(n: usize, nu: usize, lambda: f64, opts: &OmegaOptions) -> Result<OmegaValue> {
    let pi = build_pi(n)?;
    omega_with_pi(&pi, nu, lambda, opts)
}

/// Same as [`omega_with`] but with the bit-error operator supplied by the
/// caller. Used by the verification harness to inject faults.
pub fn omega_with_pi(
    pi: &TridiagonalSymmetric,
    nu: usize,
    lambda: f64,
    opts: &OmegaOptions,
) -> Result<OmegaValue> {
    check_nu(nu, opts)?;
    check_lambda(lambda)?;
    let n = pi.dim();
    if n < 3 {
        return Err(Error::BlockTooShort(n));
    }
    let tie = opts.tol;

    let mut minus = None;
    if nu >= 1 {
        for p in patterns_of_weight(n, nu - 1) {
            let m = minus_matrix(pi, &p, lambda)?;
            let value = max_eigenvalue_tridiag(&m, opts.tol)?;
            consider(
                &mut minus,
                BranchMax {
                    value,
                    pattern: p,
                    offset: 0,
                },
                tie,
            );
        }
    }

    let mut plus = None;
    for start in 0..n {
        for len in 1..=nu + 1 {
            if start + len > n {
                break;
            }
            let (p, m) = plus_matrix(pi, n, start, len, lambda)?;
            let value = max_eigenvalue_tridiag(&m, opts.tol)?;
            consider(
                &mut plus,
                BranchMax {
                    value,
                    pattern: p,
                    offset: start,
                },
                tie,
            );
        }
    }
    let plus = plus.expect("at least one run for n >= 1");

    let (branch, best) = match minus {
        Some(m) if m.value + tie >= plus.value => (Branch::Minus, m),
        _ => (Branch::Plus, plus),
    };
    Ok(OmegaValue {
        value: best.value,
        branch,
        pattern: best.pattern,
        offset: best.offset,
        minus,
        plus,
    })
}

/// Top eigenvector of the winning candidate, embedded into the n slots of
/// Bob's register (zero outside a run block).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalState {
    pub omega: OmegaValue,
    pub lambda: f64,
    pub amplitudes: Vec<f64>,
}

pub fn optimal_state(
    n: usize,
    nu: usize,
    lambda: f64,
    opts: &OmegaOptions,
) -> Result<OptimalState> {
    let w = omega_with(n, nu, lambda, opts)?;
    optimal_state_for(n, lambda, w.branch, &w, opts)
}

/// Eigenvector for a chosen branch (the branch maximum, not the overall one).
pub fn optimal_state_for(
    n: usize,
    lambda: f64,
    branch: Branch,
    w: &OmegaValue,
    opts: &OmegaOptions,
) -> Result<OptimalState> {
    optimal_state_with_pi(&build_pi(n)?, lambda, branch, w, opts)
}

/// As [`optimal_state_for`] with a caller-supplied bit-error operator.
pub fn optimal_state_with_pi(
    pi: &TridiagonalSymmetric,
    lambda: f64,
    branch: Branch,
    w: &OmegaValue,
    opts: &OmegaOptions,
) -> Result<OptimalState> {
    let n = pi.dim();
    let (pattern, offset, m) = match branch {
        Branch::Minus => {
            let b = w
                .minus
                .ok_or_else(|| Error::invalid("no minus branch for nu = 0"))?;
            (b.pattern, 0, minus_matrix(pi, &b.pattern, lambda)?)
        }
        Branch::Plus => {
            let b = w.plus;
            let len = b.pattern.weight();
            let (_, m) = plus_matrix(pi, n, b.offset, len, lambda)?;
            (b.pattern, b.offset, m)
        }
    };
    let (value, v) = max_eigenpair_tridiag(&m, opts.tol)?;
    let mut amplitudes = vec![0.0; n];
    amplitudes[offset..offset + v.len()].copy_from_slice(&v);
    let mut omega = *w;
    omega.branch = branch;
    omega.pattern = pattern;
    omega.offset = offset;
    omega.value = value;
    Ok(OptimalState {
        omega,
        lambda,
        amplitudes,
    })
}

/// Default λ grid: [0, 12] in steps of 0.005 followed by a geometric tail
/// up to 1e4.
pub fn default_lambda_grid() -> Vec<f64> {
    let steps = (GRID_MAX / GRID_STEP).round() as usize;
    let mut grid = linspace(0.0, GRID_MAX, steps + 1);
    grid.extend(
        logspace(GRID_MAX, TAIL_MAX, TAIL_POINTS + 1)
            .into_iter()
            .skip(1),
    );
    grid
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    for &l in grid {
        check_lambda(l)?;
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(format!(
            "lambda grid not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Ω^(ν) sampled on a λ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaCurve {
    n: usize,
    nu: usize,
    lambdas: Vec<f64>,
    values: Vec<OmegaValue>,
}

pub fn omega_curve(n: usize, nu: usize, grid: &[f64]) -> Result<OmegaCurve> {
    omega_curve_with(n, nu, grid, &OmegaOptions::default())
}

pub fn omega_curve_with(
    n: usize,
    nu: usize,
    grid: &[f64],
    opts: &OmegaOptions,
) -> Result<OmegaCurve> {
    check_grid(grid)?;
    check_nu(nu, opts)?;
    let pi = build_pi(n)?;
    let values = grid
        .par_iter()
        .map(|&l| omega_with_pi(&pi, nu, l, opts))
        .collect::<Result<Vec<_>>>()?;
    let curve = OmegaCurve {
        n,
        nu,
        lambdas: grid.to_vec(),
        values,
    };
    curve.check_convex()?;
    Ok(curve)
}

/// Default grid plus the Ω₋/Ω₊ crossovers for every listed photon number,
/// so that curves for different ν can share one grid.
pub fn refined_grid(n: usize, nus: &[usize], opts: &OmegaOptions) -> Result<Vec<f64>> {
    let base = default_lambda_grid();
    let mut extra = Vec::new();
    for &nu in nus {
        let coarse = omega_curve_with(n, nu, &base, opts)?;
        extra.extend(coarse.crossovers(opts)?);
    }
    Ok(insert_points(base, &extra))
}

fn insert_points(mut grid: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    for &x in extra {
        let k = grid.partition_point(|&g| g < x);
        let near = |i: usize| grid.get(i).map_or(false, |&g| (g - x).abs() < 1e-6);
        if !near(k) && !(k > 0 && near(k - 1)) {
            grid.insert(k, x);
        }
    }
    grid
}

/// Curve on the default grid refined at its own crossovers.
pub fn omega_curve_default(n: usize, nu: usize, opts: &OmegaOptions) -> Result<OmegaCurve> {
    let grid = refined_grid(n, &[nu], opts)?;
    omega_curve_with(n, nu, &grid, opts)
}

impl OmegaCurve {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[OmegaValue] {
        &self.values
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.value).collect()
    }

    fn secant(&self, i: usize) -> f64 {
        let (l0, l1) = (self.lambdas[i], self.lambdas[i + 1]);
        (self.values[i + 1].value - self.values[i].value) / (l1 - l0)
    }

    /// Left and right secant slopes at sample `i` (one-sided at the ends;
    /// a single-sample curve reports `(NaN, NaN)`).
    pub fn subgradient(&self, i: usize) -> (f64, f64) {
        let m = self.len();
        if m < 2 {
            return (f64::NAN, f64::NAN);
        }
        let left = if i == 0 {
            self.secant(0)
        } else {
            self.secant(i - 1)
        };
        let right = if i + 1 == m {
            self.secant(m - 2)
        } else {
            self.secant(i)
        };
        (left, right)
    }

    /// Bit-error range `[ẽ₊, ẽ₋]` supported by the line at sample `i`.
    pub fn e_range(&self, i: usize) -> (f64, f64) {
        let (left, right) = self.subgradient(i);
        (-right, -left)
    }

    fn check_convex(&self) -> Result<()> {
        for i in 1..self.len().saturating_sub(1) {
            let (l0, l1, l2) = (self.lambdas[i - 1], self.lambdas[i], self.lambdas[i + 1]);
            let (o0, o1, o2) = (
                self.values[i - 1].value,
                self.values[i].value,
                self.values[i + 1].value,
            );
            let chord = o0 + (o2 - o0) * (l1 - l0) / (l2 - l0);
            if o1 > chord + CONVEXITY_TOL {
                return Err(Error::NonConvex {
                    lambda: l1,
                    excess: o1 - chord,
                });
            }
        }
        Ok(())
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.values
            .windows(2)
            .all(|w| w[1].value <= w[0].value + tol)
    }

    /// λ values where the minus and plus branch maxima cross, located by
    /// bisection to 1e-8. Near-ties (|Ω₊ − Ω₋| ≤ 1e-10) are skipped when
    /// looking for sign changes.
    pub fn crossovers(&self, opts: &OmegaOptions) -> Result<Vec<f64>> {
        if self.nu == 0 {
            return Ok(Vec::new());
        }
        let diff = |v: &OmegaValue| v.plus.value - v.minus.map_or(f64::NEG_INFINITY, |m| m.value);
        let signed: Vec<(f64, f64)> = self
            .lambdas
            .iter()
            .zip(&self.values)
            .map(|(&l, v)| (l, diff(v)))
            .filter(|(_, d)| d.abs() > 1e-10)
            .collect();
        let pi = build_pi(self.n)?;
        let mut out = Vec::new();
        for w in signed.windows(2) {
            if (w[0].1 > 0.0) != (w[1].1 > 0.0) {
                let f = |l: f64| {
                    omega_with_pi(&pi, self.nu, l, opts)
                        .map(|v| diff(&v))
                        .unwrap_or(f64::NAN)
                };
                out.push(bisect(f, w[0].0, w[1].0, CROSSOVER_TOL)?);
            }
        }
        Ok(out)
    }
}

/// One supporting line `e_ph = λe + Ω` and the bit-error range where it is
/// the active part of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lambda: f64,
    pub omega: f64,
    pub e_lo: f64,
    pub e_hi: f64,
}

impl Segment {
    pub fn phase_at(&self, e: f64) -> f64 {
        self.lambda * e + self.omega
    }
}

/// Lower envelope of the supporting lines over e ∈ [0, 1/2].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBoundary {
    /// Lines ordered by increasing e (decreasing λ).
    segments: Vec<Segment>,
    points: Vec<(f64, f64)>,
    all_achievable: bool,
    lines: PiecewiseLinear,
}

pub fn region_boundary(curve: &OmegaCurve) -> Result<RegionBoundary> {
    RegionBoundary::from_samples(curve.lambdas(), &curve.omegas())
}

impl RegionBoundary {
    /// Builds the boundary from raw `(λ, Ω)` samples of a convex function.
    pub fn from_samples(lambdas: &[f64], omegas: &[f64]) -> Result<Self> {
        if lambdas.len() != omegas.len() {
            return Err(Error::DimensionMismatch {
                expected: lambdas.len(),
                got: omegas.len(),
            });
        }
        check_grid(lambdas)?;
        let all_achievable = omegas.iter().all(|&o| o >= 1.0 - CONVEXITY_TOL);
        // E(e) = min_k (λ_k e + Ω_k) = −(support of {(λ_k, −Ω_k)} at slope e)
        let pts: Vec<(f64, f64)> = lambdas.iter().zip(omegas).map(|(&l, &o)| (l, -o)).collect();
        let lines = upper_concave_envelope(&pts)?;
        let bp = lines.breakpoints();
        let slopes = lines.slopes();

        let mut segments = Vec::new();
        if bp.len() <= 2 {
            // affine Ω: the region collapses to the single point e = −slope
            let (l0, neg_o0) = bp[0];
            let e = slopes.first().copied().unwrap_or(0.0).clamp(0.0, 0.5);
            segments.push(Segment {
                lambda: l0,
                omega: -neg_o0,
                e_lo: e,
                e_hi: e,
            });
        } else {
            for j in (0..bp.len()).rev() {
                let (lambda, neg_o) = bp[j];
                let omega = -neg_o;
                let mut e_lo = if j + 1 == bp.len() { 0.0 } else { slopes[j] };
                let e_hi = if j == 0 { 0.5 } else { slopes[j - 1].min(0.5) };
                e_lo = e_lo.max(0.0);
                if lambda > 0.0 && omega < 0.0 {
                    e_lo = e_lo.max(-omega / lambda);
                }
                if e_lo <= e_hi && omega + lambda * e_lo >= -1e-15 {
                    segments.push(Segment {
                        lambda,
                        omega,
                        e_lo,
                        e_hi,
                    });
                }
            }
        }

        let mut points: Vec<(f64, f64)> = Vec::new();
        for s in &segments {
            for e in [s.e_lo, s.e_hi] {
                let p = (e, s.phase_at(e).clamp(0.0, 1.0));
                if points.last().map_or(true, |q| q.0 != p.0) {
                    points.push(p);
                }
            }
        }
        Ok(Self {
            segments,
            points,
            all_achievable,
            lines,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Boundary vertices `(e, e_ph)` with e non-decreasing, e_ph in [0, 1].
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// True when Ω ≡ 1, so every (e, e_ph) pair is allowed.
    pub fn all_achievable(&self) -> bool {
        self.all_achievable
    }

    /// Smallest e with a non-negative phase bound.
    pub fn e_min(&self) -> f64 {
        self.segments.first().map_or(0.5, |s| s.e_lo)
    }

    /// Upper bound `E(e) = min_λ [λe + Ω(λ)]` on the phase error rate.
    pub fn phase_bound(&self, e: f64) -> f64 {
        -self.lines.support(e)
    }
}

/// Ω_h(γ) = sup_e [H(e) − γe] with H(e) = h(E(e)), capped at 1 once
/// E(e) > 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFunction {
    hull: PiecewiseLinear,
}

pub fn support_function_h(curve: &OmegaCurve) -> Result<SupportFunction> {
    SupportFunction::from_boundary(&region_boundary(curve)?)
}

impl SupportFunction {
    pub fn from_boundary(boundary: &RegionBoundary) -> Result<Self> {
        let lo = boundary.e_min();
        let mut es: Vec<f64> = Vec::new();
        if lo < 0.5 {
            es.push(lo);
            let mut x = lo.max(1e-12);
            while x < 0.5 {
                es.push(x);
                x *= 1.002;
            }
            let steps = ((0.5 - lo) / 2e-5).ceil() as usize;
            es.extend(linspace(lo, 0.5, steps + 1));
        }
        es.push(0.5);
        es.extend(boundary.points().iter().map(|p| p.0));
        es.retain(|&e| e >= lo && e <= 0.5);
        es.sort_by(f64::total_cmp);
        es.dedup();
        let samples: Vec<(f64, f64)> = es
            .iter()
            .map(|&e| (e, h_capped(boundary.phase_bound(e).max(0.0))))
            .collect();
        Ok(Self {
            hull: upper_concave_envelope(&samples)?,
        })
    }

    /// Ω_h(γ).
    pub fn value(&self, gamma: f64) -> f64 {
        self.hull.support(gamma)
    }

    /// The bit-error rate at which the supporting line of slope γ touches.
    pub fn argmax_e(&self, gamma: f64) -> f64 {
        self.hull.breakpoints()[self.hull.support_argmax(gamma)].0
    }

    /// Concave hull of H evaluated at e (`None` outside the sampled domain).
    pub fn entropy_bound(&self, e: f64) -> Option<f64> {
        self.hull.eval(e)
    }

    pub fn hull(&self) -> &PiecewiseLinear {
        &self.hull
    }
}

/// Closed-form Ω_h^(1)(γ): the support of h(6e) (capped at 1).
pub fn omega_h_single(gamma: f64) -> f64 {
    if gamma < 0.0 {
        return 1.0 - gamma / 2.0;
    }
    let x = 1.0 / (1.0 + (gamma / 6.0).exp2());
    crate::entropy::h(x) - gamma * x / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{h, h_prime};

    fn omega_one(l: f64) -> f64 {
        if l >= 6.0 {
            0.0
        } else {
            (7.0 - 4.0 * l + (1.0 + 8.0 * l * l).sqrt()) / 8.0
        }
    }

    #[test]
    fn zero_photon_line() {
        for l in [0.0, 0.3, 1.0, 7.5, 12.0] {
            let w = omega(6, 0, l).unwrap();
            assert!((w.value - (1.0 - l) / 2.0).abs() < 1e-12);
            assert!(w.minus.is_none());
        }
    }

    #[test]
    fn single_photon_closed_form() {
        for l in [0.0, 0.5, 2.0, 5.9, 6.0, 6.1, 11.0] {
            for n in [3, 5, 9] {
                let w = omega(n, 1, l).unwrap();
                assert!(
                    (w.value - omega_one(l)).abs() < 1e-11,
                    "n={n} l={l}: {}",
                    w.value
                );
            }
        }
    }

    #[test]
    fn rejects_unvalidated_nu() {
        assert_eq!(
            omega(5, 4, 1.0).unwrap_err(),
            Error::UnvalidatedPhotonNumber(4)
        );
        let opts = OmegaOptions {
            best_effort: true,
            ..Default::default()
        };
        let w = omega_with(5, 4, 1.0, &opts).unwrap();
        assert!(w.value <= 1.0 + 1e-12);
    }

    #[test]
    fn two_photon_dominant_patterns_n9() {
        let opts = OmegaOptions::default();
        for l in [0.5, 2.0, 6.0, 11.0, 12.0] {
            let w = omega_with(9, 2, l, &opts).unwrap();
            assert_eq!(w.minus.unwrap().pattern.to_string(), "010000000");
            assert_eq!(w.plus.pattern.to_string(), "111000000");
        }
    }

    #[test]
    fn optimal_state_is_normalized_and_run_supported() {
        let s = optimal_state(9, 2, 3.0, &OmegaOptions::default()).unwrap();
        assert_eq!(s.omega.branch, Branch::Plus);
        let norm: f64 = s.amplitudes.iter().map(|c| c * c).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(s.amplitudes[3..].iter().all(|&c| c * c < 1e-10));
    }

    #[test]
    fn curve_checks_grid() {
        assert!(omega_curve(5, 1, &[]).is_err());
        assert!(omega_curve(5, 1, &[1.0, 0.5]).is_err());
        assert!(omega_curve(5, 1, &[-1.0, 0.5]).is_err());
    }

    #[test]
    fn single_photon_curve_monotone() {
        let grid = linspace(0.0, 6.0, 121);
        let c = omega_curve(7, 1, &grid).unwrap();
        assert!((c.values()[0].value - 1.0).abs() < 1e-12);
        assert!(c.values().last().unwrap().value.abs() < 1e-12);
        assert!(c.is_non_increasing(1e-12));
    }

    #[test]
    fn zero_photon_subgradient_is_half() {
        let c = omega_curve(5, 0, &linspace(0.0, 4.0, 9)).unwrap();
        for i in 0..c.len() {
            let (a, b) = c.subgradient(i);
            assert!((a + 0.5).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_photon_region_is_a_point() {
        let c = omega_curve(5, 0, &default_lambda_grid()).unwrap();
        let r = region_boundary(&c).unwrap();
        assert_eq!(r.points().len(), 1);
        let (e, eph) = r.points()[0];
        assert!((e - 0.5).abs() < 1e-12 && (eph - 0.5).abs() < 1e-12);
        let s = SupportFunction::from_boundary(&r).unwrap();
        for g in [0.0, 1.0, 10.0] {
            assert!((s.value(g) - (1.0 - g / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_photon_region_has_slope_six() {
        let c = omega_curve(9, 1, &default_lambda_grid()).unwrap();
        let r = region_boundary(&c).unwrap();
        let first = r.segments()[0];
        assert!((first.lambda - 6.0).abs() < 1e-12);
        assert!(first.e_lo.abs() < 1e-12);
        // the sampled vertex sits a secant's width past the true one at 5/34
        assert!(first.e_hi >= 5.0 / 34.0 && first.e_hi - 5.0 / 34.0 < 1e-5);
        for e in [0.0, 0.01, 0.1, 5.0 / 34.0] {
            assert!((r.phase_bound(e) - 6.0 * e).abs() < 1e-8);
        }
    }

    #[test]
    fn single_photon_support_matches_closed_form() {
        let c = omega_curve(9, 1, &default_lambda_grid()).unwrap();
        let s = support_function_h(&c).unwrap();
        for et in [0.01, 0.05, 1.0 / 12.0] {
            let g = 6.0 * h_prime(6.0 * et);
            let want = h(6.0 * et) - g * et;
            assert!(
                (s.value(g) - want).abs() < 1e-6,
                "e {et}: {} vs {want}",
                s.value(g)
            );
            assert!((omega_h_single(g) - want).abs() < 1e-12);
        }
        assert!(s.value(1e4).abs() < 1e-9);
    }

    #[test]
    fn all_achievable_flag() {
        let c = omega_curve(4, 3, &linspace(0.0, 12.0, 25)).unwrap();
        assert!(region_boundary(&c).unwrap().all_achievable());
        let c = omega_curve(7, 3, &linspace(0.0, 12.0, 25)).unwrap();
        assert!(!region_boundary(&c).unwrap().all_achievable());
    }

    #[test]
    fn two_photon_crossovers_match_goldens() {
        let opts = OmegaOptions::default();
        for (n, want) in [(4, 9.15410339023), (7, 11.0168810384), (9, 11.3507974586)] {
            let c = omega_curve_with(n, 2, &default_lambda_grid(), &opts).unwrap();
            let x = c.crossovers(&opts).unwrap();
            assert_eq!(x.len(), 1, "n = {n}: {x:?}");
            assert!((x[0] - want).abs() < 1e-7, "n = {n}: {}", x[0]);
        }
    }
}
