//! Self-checks tying the fast Ω evaluation to the brute-force oracle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::TridiagonalSymmetric;
use crate::omega::{omega_with_pi, optimal_state_with_pi, OmegaOptions, MAX_VALIDATED_NU};
use crate::operators::build_pi;
use crate::oracle::{
    attack_state_errors, brute_force_omega_with, build_error_operators, conjugation_check_against,
    AttackState, MAX_DENSE_N, MAX_FULL_N,
};

/// Margins below this count as chain violations.
pub const CHAIN_TOL: f64 = 1e-10;
pub const EQUIVALENCE_TOL: f64 = 1e-9;
pub const CONJUGATION_TOL: f64 = 1e-12;
pub const SATURATION_TOL: f64 = 1e-9;

/// λ values used by the oracle comparison unless overridden.
pub const ORACLE_LAMBDAS: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 6.0, 12.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainViolation {
    pub lambda: f64,
    /// The violated link is Ω^(ν) ≤ Ω^(ν+1), or Ω^(ν) ≤ 1 when ν = ν_max.
    pub nu: usize,
    pub margin: f64,
}

/// Per-λ margins of Ω^(0) ≤ Ω^(1) ≤ … ≤ Ω^(ν_max) ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub n: usize,
    pub nu_max: usize,
    pub lambdas: Vec<f64>,
    /// `margins[k][ν]` is Ω^(ν+1) − Ω^(ν) at `lambdas[k]`; the last entry
    /// of each row is 1 − Ω^(ν_max).
    pub margins: Vec<Vec<f64>>,
    pub violations: Vec<ChainViolation>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn min_margin(&self) -> f64 {
        self.margins
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn verify_chain(n: usize, nu_max: usize, lambdas: &[f64]) -> Result<ChainReport> {
    verify_chain_with_pi(&build_pi(n)?, nu_max, lambdas)
}

pub fn verify_chain_with_pi(
    pi: &TridiagonalSymmetric,
    nu_max: usize,
    lambdas: &[f64],
) -> Result<ChainReport> {
    if nu_max > MAX_VALIDATED_NU {
        return Err(Error::UnvalidatedPhotonNumber(nu_max));
    }
    if lambdas.is_empty() {
        return Err(Error::EmptyInput);
    }
    let opts = OmegaOptions::default();
    let margins = lambdas
        .par_iter()
        .map(|&l| {
            let vals = (0..=nu_max)
                .map(|nu| omega_with_pi(pi, nu, l, &opts).map(|w| w.value))
                .collect::<Result<Vec<_>>>()?;
            let mut m: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
            m.push(1.0 - vals[nu_max]);
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for (k, row) in margins.iter().enumerate() {
        for (nu, &margin) in row.iter().enumerate() {
            if margin < -CHAIN_TOL {
                violations.push(ChainViolation {
                    lambda: lambdas[k],
                    nu,
                    margin,
                });
            }
        }
    }
    Ok(ChainReport {
        n: pi.dim(),
        nu_max,
        lambdas: lambdas.to_vec(),
        margins,
        violations,
    })
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation (or most negative margin) seen.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub nus: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// Added to every diagonal entry of the bit-error operator handed to the
    /// fast path; a working harness must then report failures.
    pub mutation: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            nus: (0..=MAX_VALIDATED_NU).collect(),
            lambdas: ORACLE_LAMBDAS.to_vec(),
            mutation: None,
        }
    }
}

fn mutated_pi(n: usize, shift: Option<f64>) -> Result<TridiagonalSymmetric> {
    let pi = build_pi(n)?;
    match shift {
        None => Ok(pi),
        Some(d) => {
            let diag: Vec<f64> = pi.diag().iter().map(|x| x + d).collect();
            TridiagonalSymmetric::new(diag, pi.offdiag().to_vec())
        }
    }
}

/// Fast Ω against the dense oracle over every (ν, λ).
pub fn oracle_equivalence(
    pi: &TridiagonalSymmetric,
    nus: &[usize],
    lambdas: &[f64],
) -> Result<CheckResult> {
    let n = pi.dim();
    let (e, ph) = build_error_operators(n)?;
    let opts = OmegaOptions::default();
    let cases: Vec<(usize, f64)> = nus
        .iter()
        .flat_map(|&nu| lambdas.iter().map(move |&l| (nu, l)))
        .collect();
    let diffs = cases
        .par_iter()
        .map(|&(nu, l)| {
            let fast = omega_with_pi(pi, nu, l, &opts)?.value;
            let slow = brute_force_omega_with(&e, &ph, nu, l)?;
            Ok((fast - slow).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (k, worst) =
        diffs.iter().enumerate().fold(
            (0, 0.0f64),
            |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
        );
    let detail = match cases.get(k) {
        Some(&(nu, l)) => format!("{} cases, worst at nu={nu} lambda={l}", cases.len()),
        None => "no cases".to_string(),
    };
    Ok(CheckResult {
        name: "oracle-equivalence",
        passed: worst <= EQUIVALENCE_TOL,
        worst,
        tolerance: EQUIVALENCE_TOL,
        detail,
    })
}

/// Eigenvector states evaluated with the oracle operators lie on their
/// supporting lines.
pub fn saturation(
    pi: &TridiagonalSymmetric,
    nus: &[usize],
    lambdas: &[f64],
) -> Result<CheckResult> {
    let n = pi.dim();
    let (e, ph) = build_error_operators(n)?;
    let opts = OmegaOptions::default();
    let mut worst = 0.0f64;
    let mut at = String::new();
    let mut count = 0;
    for &nu in nus.iter().filter(|&&nu| nu >= 1) {
        for &l in lambdas {
            let w = omega_with_pi(pi, nu, l, &opts)?;
            let st = optimal_state_with_pi(pi, l, w.branch, &w, &opts)?;
            let (be, pe) = attack_state_errors(&AttackState::from_optimal(&st)?, &e, &ph)?;
            let dev = (pe - (l * be + w.value)).abs();
            count += 1;
            if dev > worst || at.is_empty() {
                worst = worst.max(dev);
                at = format!("nu={nu} lambda={l}");
            }
        }
    }
    Ok(CheckResult {
        name: "saturation",
        passed: worst <= SATURATION_TOL,
        worst,
        tolerance: SATURATION_TOL,
        detail: format!("{count} states, worst at {at}"),
    })
}

/// Runs every check for one block length.
pub fn run_verification(n: usize, opts: &VerifyOptions) -> Result<VerifyReport> {
    if n > MAX_DENSE_N {
        return Err(Error::BlockTooLong {
            n,
            max: MAX_DENSE_N,
        });
    }
    let pi = mutated_pi(n, opts.mutation)?;
    let mut checks = vec![oracle_equivalence(&pi, &opts.nus, &opts.lambdas)?];

    if n <= MAX_FULL_N {
        let c = conjugation_check_against(&pi)?;
        let worst = c.max_deviation();
        checks.push(CheckResult {
            name: "conjugation",
            passed: worst <= CONJUGATION_TOL,
            worst,
            tolerance: CONJUGATION_TOL,
            detail: format!(
                "bit {:.3e}, phase {:.3e}, projections {:.3e}, orthogonality {:.3e}",
                c.bit,
                c.phase,
                c.projections.iter().map(|p| p.1).fold(0.0, f64::max),
                c.orthogonality
            ),
        });
    }

    let nu_max = opts.nus.iter().copied().max().unwrap_or(0);
    let chain = verify_chain_with_pi(&pi, nu_max, &opts.lambdas)?;
    let detail = match chain.violations.first() {
        Some(v) => format!(
            "{} violations, first at lambda={} nu={}",
            chain.violations.len(),
            v.lambda,
            v.nu
        ),
        None => format!("{} lambdas, nu <= {nu_max}", chain.lambdas.len()),
    };
    checks.push(CheckResult {
        name: "chain",
        passed: chain.passed(),
        worst: chain.min_margin(),
        tolerance: -CHAIN_TOL,
        detail,
    });

    checks.push(saturation(&pi, &opts.nus, &opts.lambdas)?);
    Ok(VerifyReport { n, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_single_photon_reduces_to_closed_form() {
        let lambdas: Vec<f64> = (0..=24).map(|k| k as f64 * 0.5).collect();
        let r = verify_chain(6, 1, &lambdas).unwrap();
        assert!(r.passed());
        for (k, &l) in lambdas.iter().enumerate() {
            let w1 = if l >= 6.0 {
                0.0
            } else {
                (7.0 - 4.0 * l + (1.0 + 8.0 * l * l).sqrt()) / 8.0
            };
            assert!((r.margins[k][0] - (w1 - (1.0 - l) / 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn chain_at_zero() {
        let r = verify_chain(7, 2, &[0.0]).unwrap();
        assert!(r.margins[0][1].abs() < 1e-12);
        assert!(r.margins[0][2].abs() < 1e-12);
    }

    #[test]
    fn clean_run_passes() {
        let r = run_verification(4, &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.checks.len(), 4);
    }

    #[test]
    fn mutation_detected() {
        let opts = VerifyOptions {
            mutation: Some(1e-3),
            ..VerifyOptions::default()
        };
        let r = run_verification(4, &opts).unwrap();
        assert!(!r.passed());
        let failed: Vec<_> = r
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert!(failed.contains(&"oracle-equivalence"));
    }

    #[test]
    fn rejects_large_blocks() {
        assert!(run_verification(9, &VerifyOptions::default()).is_err());
        assert!(verify_chain(5, 4, &[0.0]).is_err());
    }
}
