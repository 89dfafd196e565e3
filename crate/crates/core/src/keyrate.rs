//! Photon-number allocation, channel model and key rates.

use rayon::prelude::*;

use crate::entropy::{h, h_prime};
use crate::error::{Error, Result};
use crate::omega::{
    omega_curve_with, omega_h_single, refined_grid, OmegaCurve, OmegaOptions, RegionBoundary,
    SupportFunction,
};
use crate::optimize::{golden_max, grid_then_golden_max, linspace, logspace};

/// Truncations with a bound implemented here.
pub const MAX_NU_BAR: usize = 3;

/// Upper limit on the block mean nα² searched by [`optimize_mean_photon`].
pub const BLOCK_MEAN_CAP: f64 = 1.0;

/// Detection probability per block: exactly one photon reaches Bob's n
/// register slots and the two outer slots stay empty.
pub fn detection_rate(n: usize, eta: f64, alpha2: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::BlockTooShort(n));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!(
            "transmission {eta} not in [0, 1]"
        )));
    }
    if !(alpha2 >= 0.0) || !alpha2.is_finite() {
        return Err(Error::OutOfRange(format!(
            "mean photon number {alpha2} must be >= 0"
        )));
    }
    let x = eta * alpha2;
    Ok((n - 1) as f64 * x * (-((n + 1) as f64) * x).exp())
}

/// Poisson probability of k photons at the given mean.
pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut p = (-mean).exp();
    for j in 1..=k {
        p *= mean / j as f64;
    }
    p
}

/// `P(N > k)` summed term by term, so it stays accurate for tiny means.
pub fn poisson_tail_above(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = poisson_pmf(mean, k + 1);
    let mut sum = 0.0;
    let mut j = k + 1;
    while term > 0.0 {
        sum += term;
        j += 1;
        term *= mean / j as f64;
        if term < sum * 1e-18 || j > k + 2000 {
            break;
        }
    }
    sum
}

/// Eve's worst-case split of detected events over photon numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonAllocation {
    pub n: usize,
    /// Photons per block, nα².
    pub mean: f64,
    pub detection_rate: f64,
    pub nu_min: usize,
    /// q^(ν)* for ν = 0..=ν̄.
    pub q: Vec<f64>,
    /// Σ_{ν>ν̄} q^(ν)*.
    pub tail: f64,
}

impl PhotonAllocation {
    pub fn nu_bar(&self) -> usize {
        self.q.len() - 1
    }

    /// Σ q + tail; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.q.iter().sum::<f64>() + self.tail
    }

    /// The same allocation viewed with a lower truncation `k ≤ ν̄`.
    /// Bit-identical to allocating with `k` directly.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.nu_bar());
        if k == self.nu_bar() {
            return self.clone();
        }
        Self {
            q: self.q[..=k].to_vec(),
            tail: tail_mass(self.mean, self.detection_rate, self.nu_min, k),
            ..self.clone()
        }
    }
}

fn tail_mass(mean: f64, q_det: f64, nu_min: usize, nu_bar: usize) -> f64 {
    if nu_bar >= nu_min {
        poisson_tail_above(mean, nu_bar) / q_det
    } else {
        1.0
    }
}

pub fn allocate(n: usize, alpha2: f64, q_det: f64, nu_bar: usize) -> Result<PhotonAllocation> {
    if !(q_det > 0.0 && q_det <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "detection rate {q_det} not in (0, 1]"
        )));
    }
    if !(alpha2 >= 0.0) || !alpha2.is_finite() {
        return Err(Error::OutOfRange(format!(
            "mean photon number {alpha2} must be >= 0"
        )));
    }
    let mean = n as f64 * alpha2;
    let mut nu_min = 0;
    while poisson_tail_above(mean, nu_min) >= q_det {
        nu_min += 1;
    }
    let q = (0..=nu_bar)
        .map(|nu| {
            if nu < nu_min {
                0.0
            } else if nu == nu_min {
                1.0 - poisson_tail_above(mean, nu_min) / q_det
            } else {
                poisson_pmf(mean, nu) / q_det
            }
        })
        .collect();
    let tail = tail_mass(mean, q_det, nu_min, nu_bar);
    Ok(PhotonAllocation {
        n,
        mean,
        detection_rate: q_det,
        nu_min,
        q,
        tail,
    })
}

/// Precomputed multi-photon curves for one block length. All curves share
/// one λ grid so they can be mixed.
#[derive(Debug, Clone)]
pub struct PhaseBounds {
    n: usize,
    lambdas: Vec<f64>,
    /// Indexed by ν; ν = 0, 1 are handled in closed form.
    curves: Vec<Option<OmegaCurve>>,
    two_photon: Option<RegionBoundary>,
}

impl PhaseBounds {
    /// Curves for ν = 2..=ν̄ on the default grid refined at their crossovers.
    pub fn new(n: usize, nu_bar: usize) -> Result<Self> {
        if nu_bar > MAX_NU_BAR {
            return Err(Error::UnvalidatedPhotonNumber(nu_bar));
        }
        let opts = OmegaOptions::default();
        let nus: Vec<usize> = (2..=nu_bar).collect();
        if nus.is_empty() {
            return Self::from_curves(n, Vec::new());
        }
        let grid = refined_grid(n, &nus, &opts)?;
        let curves = nus
            .par_iter()
            .map(|&nu| omega_curve_with(n, nu, &grid, &opts))
            .collect::<Result<Vec<_>>>()?;
        Self::from_curves(n, curves)
    }

    pub fn from_curves(n: usize, curves: Vec<OmegaCurve>) -> Result<Self> {
        let mut slots: Vec<Option<OmegaCurve>> = vec![None; MAX_NU_BAR + 1];
        let mut lambdas: Option<Vec<f64>> = None;
        for c in curves {
            if c.n() != n {
                return Err(Error::invalid(format!(
                    "curve for n = {} given for n = {n}",
                    c.n()
                )));
            }
            if c.nu() > MAX_NU_BAR {
                return Err(Error::UnvalidatedPhotonNumber(c.nu()));
            }
            if c.nu() >= 2 {
                match &lambdas {
                    Some(l) if l.as_slice() != c.lambdas() => {
                        return Err(Error::invalid(
                            "multi-photon curves must share one lambda grid",
                        ))
                    }
                    Some(_) => {}
                    None => lambdas = Some(c.lambdas().to_vec()),
                }
            }
            let nu = c.nu();
            slots[nu] = Some(c);
        }
        let two_photon = match &slots[2] {
            Some(c) => Some(RegionBoundary::from_samples(c.lambdas(), &c.omegas())?),
            None => None,
        };
        Ok(Self {
            n,
            lambdas: lambdas.unwrap_or_default(),
            curves: slots,
            two_photon,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn curve(&self, nu: usize) -> Option<&OmegaCurve> {
        self.curves.get(nu).and_then(|c| c.as_ref())
    }

    fn require(&self, nu: usize) -> Result<&OmegaCurve> {
        self.curve(nu).ok_or(Error::MissingCurve(nu))
    }

    /// Boundary of the mixed curve r₂Ω^(2) + r₃Ω^(3).
    fn mixed_boundary(&self, r3: f64) -> Result<RegionBoundary> {
        let c2 = self.require(2)?;
        if r3 == 0.0 {
            return Ok(self.two_photon.clone().expect("set with curve 2"));
        }
        let c3 = self.require(3)?;
        let mixed: Vec<f64> = c2
            .omegas()
            .iter()
            .zip(c3.omegas())
            .map(|(a, b)| (1.0 - r3) * a + r3 * b)
            .collect();
        RegionBoundary::from_samples(&self.lambdas, &mixed)
    }
}

fn check_e(e: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&e) {
        return Err(Error::OutOfRange(format!(
            "bit error rate {e} not in [0, 1/2]"
        )));
    }
    Ok(())
}

/// q^(1)*·h(6e/q^(1)*) when 12e ≤ q^(1)*, otherwise q^(1)* (entropy capped).
fn single_photon_term(e: f64, q1: f64) -> f64 {
    if 12.0 * e <= q1 {
        if q1 > 0.0 {
            q1 * h(6.0 * e / q1)
        } else {
            0.0
        }
    } else {
        q1
    }
}

const FAMILY_SAMPLES: usize = 32;
const WIDE_SEGMENT: f64 = 1e-4;

/// Minimum of the two-parameter family f(λ, ẽ) over the boundary of the
/// (possibly mixed) multi-photon curve; `q_multi` is its weight.
fn family_bound(e: f64, q1: f64, q_multi: f64, boundary: &RegionBoundary) -> f64 {
    let f = |lambda: f64, omega: f64, et: f64| -> f64 {
        let big_e = omega + lambda * et;
        let gamma = lambda * h_prime(big_e);
        gamma * e + q1 * omega_h_single(gamma) + q_multi * (h(big_e) - gamma * et)
    };
    let mut best = f64::INFINITY;
    let mut best_seg: Option<(usize, f64, f64)> = None;
    for (k, s) in boundary.segments().iter().enumerate() {
        // keep 0 < λẽ + Ω ≤ 1/2
        let mut lo = s.e_lo;
        let mut hi = s.e_hi;
        if s.lambda > 0.0 {
            hi = hi.min((0.5 - s.omega) / s.lambda);
            lo = lo.max(-s.omega / s.lambda);
        } else if !(s.omega > 0.0 && s.omega <= 0.5) {
            continue;
        }
        if lo > hi {
            continue;
        }
        let mut consider = |et: f64| {
            if s.phase_at(et) > 0.0 {
                let v = f(s.lambda, s.omega, et);
                if v < best {
                    best = v;
                    best_seg = Some((k, lo, hi));
                }
            }
        };
        consider(lo);
        consider(hi);
        if hi - lo > WIDE_SEGMENT {
            for et in linspace(lo, hi, FAMILY_SAMPLES + 2)
                .into_iter()
                .skip(1)
                .take(FAMILY_SAMPLES)
            {
                consider(et);
            }
        }
    }
    if let Some((k, lo, hi)) = best_seg {
        if hi > lo {
            let s = boundary.segments()[k];
            let (_, v) = golden_max(
                |et| {
                    if s.phase_at(et) > 0.0 {
                        -f(s.lambda, s.omega, et)
                    } else {
                        f64::NEG_INFINITY
                    }
                },
                lo,
                hi,
                1e-12,
            );
            best = best.min(-v);
        }
    }
    best
}

/// Upper bound on h^(ph) with contributions kept up to ν̄ photons.
///
/// For ν̄ ≥ 2 the result is also capped by the ν̄−1 bound, which is always
/// valid for the same allocation.
pub fn h_ph_bound(
    e: f64,
    alloc: &PhotonAllocation,
    nu_bar: usize,
    bounds: &PhaseBounds,
) -> Result<f64> {
    check_e(e)?;
    if nu_bar > alloc.nu_bar() {
        return Err(Error::invalid(format!(
            "allocation covers nu <= {}, bound needs {nu_bar}",
            alloc.nu_bar()
        )));
    }
    let a = alloc.truncated(nu_bar);
    let base = a.q[0] + a.tail;
    let q1 = a.q.get(1).copied().unwrap_or(0.0);
    match nu_bar {
        0 => Ok(base),
        1 => Ok(base + single_photon_term(e, q1)),
        2 => {
            let b = bounds.two_photon.as_ref().ok_or(Error::MissingCurve(2))?;
            let own = base + family_bound(e, q1, a.q[2], b);
            Ok(own.min(h_ph_bound(e, alloc, 1, bounds)?))
        }
        3 => {
            bounds.require(2)?;
            bounds.require(3)?;
            let q23 = a.q[2] + a.q[3];
            let r3 = if q23 > 0.0 { a.q[3] / q23 } else { 0.0 };
            let b = bounds.mixed_boundary(r3)?;
            let own = base + family_bound(e, q1, q23, &b);
            Ok(own.min(h_ph_bound(e, alloc, 2, bounds)?))
        }
        _ => Err(Error::UnvalidatedPhotonNumber(nu_bar)),
    }
}

/// The same truncated bound computed as min over γ of
/// γe + q₁Ω_h^(1)(γ) + q_multi·Ω_h^(multi)(γ). Used as a cross-check.
pub fn h_ph_gamma_route(
    e: f64,
    alloc: &PhotonAllocation,
    nu_bar: usize,
    bounds: &PhaseBounds,
) -> Result<f64> {
    check_e(e)?;
    let a = alloc.truncated(nu_bar);
    let base = a.q[0] + a.tail;
    let q1 = a.q.get(1).copied().unwrap_or(0.0);
    let (q_multi, support) = match nu_bar {
        0 | 1 => (0.0, None),
        2 => (
            a.q[2],
            Some(SupportFunction::from_boundary(
                bounds.two_photon.as_ref().ok_or(Error::MissingCurve(2))?,
            )?),
        ),
        3 => {
            let q23 = a.q[2] + a.q[3];
            let r3 = if q23 > 0.0 { a.q[3] / q23 } else { 0.0 };
            (
                q23,
                Some(SupportFunction::from_boundary(&bounds.mixed_boundary(r3)?)?),
            )
        }
        _ => return Err(Error::UnvalidatedPhotonNumber(nu_bar)),
    };
    let objective = |g: f64| {
        let multi = support.as_ref().map_or(0.0, |s| q_multi * s.value(g));
        -(g * e + q1 * omega_h_single(g) + multi)
    };
    let mut grid = linspace(0.0, 30.0, 3001);
    grid.extend(logspace(30.0, 1e5, 1500).into_iter().skip(1));
    let (_, v) = grid_then_golden_max(objective, &grid, 1e-10);
    Ok(base - v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub n: usize,
    pub e: f64,
    pub eta: f64,
    /// Per-pulse mean photon number α².
    pub alpha2: f64,
    pub nu_bar: usize,
    pub q_det: f64,
    pub h_ph: f64,
    pub g: f64,
}

/// Key rate per block, G = max(0, Q[1 − h(e) − h_ph]). With Q = 0 nothing is
/// detected and the point reports h_ph = 1, G = 0.
pub fn key_rate(
    n: usize,
    e: f64,
    eta: f64,
    alpha2: f64,
    nu_bar: usize,
    bounds: &PhaseBounds,
) -> Result<KeyRatePoint> {
    check_e(e)?;
    if bounds.n() != n {
        return Err(Error::invalid(format!(
            "bounds built for n = {}, asked n = {n}",
            bounds.n()
        )));
    }
    let q_det = detection_rate(n, eta, alpha2)?;
    let mut point = KeyRatePoint {
        n,
        e,
        eta,
        alpha2,
        nu_bar,
        q_det,
        h_ph: 1.0,
        g: 0.0,
    };
    if q_det == 0.0 {
        return Ok(point);
    }
    let alloc = allocate(n, alpha2, q_det, nu_bar)?;
    point.h_ph = h_ph_bound(e, &alloc, nu_bar, bounds)?;
    point.g = (q_det * (1.0 - h(e) - point.h_ph)).max(0.0);
    Ok(point)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedRate {
    pub alpha2: f64,
    pub point: KeyRatePoint,
    /// True when G = 0 everywhere in the search range.
    pub all_zero: bool,
}

/// Maximizes G over α² ∈ (0, 1/n] (block mean up to [`BLOCK_MEAN_CAP`]):
/// a log-spaced scan of the block mean followed by golden section.
pub fn optimize_mean_photon(
    n: usize,
    e: f64,
    eta: f64,
    nu_bar: usize,
    bounds: &PhaseBounds,
) -> Result<OptimizedRate> {
    let eval = |log_mean: f64| -> Result<KeyRatePoint> {
        key_rate(n, e, eta, log_mean.exp() / n as f64, nu_bar, bounds)
    };
    let grid = linspace((1e-8f64).ln(), BLOCK_MEAN_CAP.ln(), 201);
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(eval(x)?.g);
    }
    let mut k = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[k] {
            k = i;
        }
    }
    if values[k] <= 0.0 {
        let point = eval(grid[k])?;
        return Ok(OptimizedRate {
            alpha2: point.alpha2,
            point,
            all_zero: true,
        });
    }
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (x, v) = golden_max(
        |x| eval(x).map(|p| p.g).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        1e-10,
    );
    let best_x = if v > values[k] { x } else { grid[k] };
    let point = eval(best_x)?;
    Ok(OptimizedRate {
        alpha2: point.alpha2,
        point,
        all_zero: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_rate_examples() {
        assert_eq!(detection_rate(9, 0.0, 0.3).unwrap(), 0.0);
        let q = detection_rate(3, 1.0, 0.1).unwrap();
        assert!((q - 2.0 * 0.1 * (-0.4f64).exp()).abs() < 1e-16);
        assert!(detection_rate(2, 0.5, 0.1).is_err());
        assert!(detection_rate(5, 1.5, 0.1).is_err());
    }

    #[test]
    fn detection_rate_peaks_at_inverse_block() {
        let (n, eta) = (9, 0.2);
        let a_star = 1.0 / ((n + 1) as f64 * eta);
        let d = 1e-6;
        let slope = (detection_rate(n, eta, a_star + d).unwrap()
            - detection_rate(n, eta, a_star - d).unwrap())
            / (2.0 * d);
        assert!(slope.abs() < 1e-8);
    }

    #[test]
    fn tail_matches_complement() {
        for mean in [1e-3, 0.1, 0.9, 3.0] {
            for k in 0..5 {
                let direct: f64 = 1.0 - (0..=k).map(|j| poisson_pmf(mean, j)).sum::<f64>();
                assert!((poisson_tail_above(mean, k) - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn allocation_boundary_cases() {
        let (n, a2) = (5, 0.04);
        let mean = n as f64 * a2;
        // Q equal to P(N > 0): the single-photon slot takes the boundary value
        let q = poisson_tail_above(mean, 0);
        let al = allocate(n, a2, q, 3).unwrap();
        assert_eq!(al.nu_min, 1);
        assert_eq!(al.q[0], 0.0);
        assert!((al.q[1] - poisson_pmf(mean, 1) / q).abs() < 1e-12);
        // Q above that: vacuum events must be counted
        let al = allocate(n, a2, (q + 1.0) / 2.0, 3).unwrap();
        assert_eq!(al.nu_min, 0);
        assert!(al.q[0] > 0.0);
        assert!((al.total_mass() - 1.0).abs() < 1e-14);
        assert!(allocate(n, a2, 1.2, 2).is_err());
        assert!(allocate(n, a2, 0.0, 2).is_err());
    }

    #[test]
    fn allocation_mass_typical() {
        let n = 9;
        let a2 = 0.02 / n as f64;
        let q = detection_rate(n, 0.1, a2).unwrap();
        let al = allocate(n, a2, q, 3).unwrap();
        assert!((al.total_mass() - 1.0).abs() < 1e-14);
        assert_eq!(al.nu_min, 1);
        let t = al.truncated(1);
        assert_eq!(t.q.len(), 2);
        assert!((t.total_mass() - 1.0).abs() < 1e-14);
    }

    fn fake_alloc(q: Vec<f64>, tail: f64) -> PhotonAllocation {
        PhotonAllocation {
            n: 9,
            mean: 0.0,
            detection_rate: 1.0,
            nu_min: 1,
            q,
            tail,
        }
    }

    #[test]
    fn single_photon_bound_edge() {
        let b = PhaseBounds::from_curves(9, Vec::new()).unwrap();
        let al = fake_alloc(vec![0.0, 1.0], 0.0);
        assert_eq!(h_ph_bound(1.0 / 12.0, &al, 1, &b).unwrap(), 1.0);
        assert_eq!(
            h_ph_bound(0.0, &fake_alloc(vec![0.0, 0.7], 0.3), 1, &b).unwrap(),
            0.3
        );
        // clamp once 12e > q1
        let v = h_ph_bound(0.05, &fake_alloc(vec![0.0, 0.5], 0.5), 1, &b).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn missing_curve_reported() {
        let b = PhaseBounds::from_curves(9, Vec::new()).unwrap();
        let al = fake_alloc(vec![0.0, 0.7, 0.2], 0.1);
        assert_eq!(
            h_ph_bound(0.01, &al, 2, &b).unwrap_err(),
            Error::MissingCurve(2)
        );
    }

    #[test]
    fn half_error_gives_zero_rate() {
        let b = PhaseBounds::from_curves(4, Vec::new()).unwrap();
        let p = key_rate(4, 0.5, 0.1, 0.01, 1, &b).unwrap();
        assert_eq!(p.g, 0.0);
    }
}
