//! One function per subcommand. Each returns the full output text so the
//! caller decides where it goes.

use rayon::prelude::*;

use dpsqkd_core::asymptotics::{
    d2_single, d2_two, d32_two, e_max_single, e_max_two, e_min_two, TwoPhotonSupport,
};
use dpsqkd_core::keyrate::{key_rate, optimize_mean_photon, PhaseBounds};
use dpsqkd_core::omega::{omega_curve_default, omega_curve_with, region_boundary, OmegaOptions};
use dpsqkd_core::verify::{run_verification, VerifyOptions};

use crate::config::{ConfigError, PhotonPolicy, Settings};
use crate::format::g17;

/// Failures split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: a verification check did not pass; carries the report.
    Check(String),
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Solver(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<dpsqkd_core::Error> for Failure {
    fn from(e: dpsqkd_core::Error) -> Self {
        use dpsqkd_core::Error::*;
        match e {
            Bracketing(_) | NoConvergence { .. } | NonConvex { .. } | NonSymmetric { .. } => {
                Failure::Solver(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub type Outcome = Result<String, Failure>;

pub const OMEGA_KEYS: &[&str] = &["config", "out", "workers", "n", "nu", "lambda", "tol"];
pub const REGION_KEYS: &[&str] = &["config", "out", "workers", "n", "nu", "tol"];
pub const KEYRATE_KEYS: &[&str] = &[
    "config", "out", "workers", "n", "e", "eta", "nu_bar", "photon",
];
pub const ASYMPTOTIC_KEYS: &[&str] = &["config", "out", "workers", "n", "e"];
pub const VERIFY_KEYS: &[&str] = &["config", "out", "workers", "n", "nu", "lambda", "mutate"];

fn header(command: &str, s: &Settings) -> String {
    let mut out = format!("# dpsqkd {command}\n");
    for (k, v) in s.entries() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

fn omega_options(s: &Settings) -> Result<OmegaOptions, Failure> {
    let tol = s.f64("tol")?;
    if !(tol > 0.0) {
        return Err(Failure::Config(format!("tol must be > 0, got {tol}")));
    }
    Ok(OmegaOptions {
        tol,
        ..OmegaOptions::default()
    })
}

fn block_length(s: &Settings) -> Result<usize, Failure> {
    let n = s.usize("n")?;
    if n < 3 {
        return Err(Failure::Config(format!("n must be >= 3, got {n}")));
    }
    Ok(n)
}

fn error_rate(e: f64) -> Result<f64, Failure> {
    if (0.0..0.5).contains(&e) {
        Ok(e)
    } else {
        Err(Failure::Config(format!(
            "bit error rate {e} not in [0, 0.5)"
        )))
    }
}

pub fn omega(mut s: Settings) -> Outcome {
    s.set_default("lambda", "0:12:2401");
    s.set_default("tol", "1e-12");
    let n = block_length(&s)?;
    let nu = s.usize("nu")?;
    let grid = s.grid("lambda")?;
    if grid[0] < 0.0 {
        return Err(Failure::Config("lambda must be >= 0".into()));
    }
    let curve = omega_curve_with(n, nu, &grid, &omega_options(&s)?)?;
    let mut out = header("omega", &s);
    out.push_str(&format!(
        "# convex = true, non_increasing = {}\n",
        curve.is_non_increasing(1e-12)
    ));
    out.push_str("lambda,omega,pattern,branch\n");
    for (l, v) in curve.lambdas().iter().zip(curve.values()) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            g17(*l),
            g17(v.value),
            v.pattern,
            v.branch
        ));
    }
    Ok(out)
}

pub fn region(mut s: Settings) -> Outcome {
    s.set_default("nu", "0,1,2,3");
    s.set_default("tol", "1e-12");
    let n = block_length(&s)?;
    let nus = s.usize_list("nu")?;
    let opts = omega_options(&s)?;
    let mut out = header("region", &s);
    out.push_str("nu,e,e_ph,status\n");
    for nu in nus {
        let region = region_boundary(&omega_curve_default(n, nu, &opts)?)?;
        if region.all_achievable() {
            out.push_str(&format!("{nu},,,all_achievable\n"));
            continue;
        }
        for &(e, e_ph) in region.points() {
            out.push_str(&format!("{nu},{},{},boundary\n", g17(e), g17(e_ph)));
        }
    }
    Ok(out)
}

pub fn keyrate(mut s: Settings) -> Outcome {
    s.set_default("eta", "log:1e-5:1e-1:41");
    s.set_default("nu_bar", "1,2,3");
    s.set_default("photon", "optimize");
    let n = block_length(&s)?;
    let e = error_rate(s.f64("e")?)?;
    let etas = s.grid("eta")?;
    if etas[0] <= 0.0 || etas[etas.len() - 1] > 1.0 {
        return Err(Failure::Config("eta must lie in (0, 1]".into()));
    }
    let nu_bars = s.usize_list("nu_bar")?;
    let policy = s.policy("photon")?;
    let top = nu_bars.iter().copied().max().unwrap_or(0);
    let bounds = PhaseBounds::new(n, top)?;

    let rows = etas
        .par_iter()
        .map(|&eta| {
            nu_bars
                .iter()
                .map(|&nb| {
                    let p = match policy.alpha2(n, eta) {
                        Some(a2) => key_rate(n, e, eta, a2, nb, &bounds)?,
                        None => optimize_mean_photon(n, e, eta, nb, &bounds)?.point,
                    };
                    Ok(format!(
                        "{},{nb},{},{},{},{}\n",
                        g17(eta),
                        g17(p.alpha2),
                        g17(p.q_det),
                        g17(p.h_ph),
                        g17(p.g)
                    ))
                })
                .collect::<dpsqkd_core::Result<String>>()
        })
        .collect::<dpsqkd_core::Result<Vec<String>>>()?;

    let mut out = header("keyrate", &s);
    if policy == PhotonPolicy::Optimize {
        out.push_str("# alpha2 maximizes G at each (eta, nu_bar)\n");
    }
    out.push_str("eta,nu_bar,alpha2,q,h_ph,g\n");
    out.extend(rows);
    Ok(out)
}

pub fn asymptotic(mut s: Settings) -> Outcome {
    s.set_default("e", "0:0.04:81");
    let n = block_length(&s)?;
    let es = s.grid("e")?;
    for &e in &es {
        error_rate(e)?;
    }
    let two = TwoPhotonSupport::new(&omega_curve_default(n, 2, &OmegaOptions::default())?)?;
    let rows = es
        .par_iter()
        .map(|&e| {
            let one = d2_single(n, e)?;
            let d2 = d2_two(e, &two)?;
            let d32 = d32_two(e, &two)?;
            let ratio = if one.value > 0.0 {
                g17(d2.value / one.value)
            } else {
                String::new()
            };
            Ok(format!(
                "{},{},{},{},{ratio},{},{}\n",
                g17(e),
                g17(one.value),
                g17(d2.value),
                g17(d32.value),
                g17(d2.amplitude_coefficient()),
                g17(d32.amplitude_coefficient())
            ))
        })
        .collect::<dpsqkd_core::Result<Vec<String>>>()?;

    let single = e_max_single();
    let double = e_max_two(&two);
    let switch = e_min_two(&two);
    let mut out = header("asymptotic", &s);
    out.push_str(&format!("# threshold e_max_single = {}\n", g17(single)));
    if double.found {
        out.push_str(&format!("# threshold e_max_two = {}\n", g17(double.e)));
    } else {
        out.push_str("# threshold e_max_two = not found\n");
    }
    out.push_str(&format!("# threshold e_min_two = {}\n", g17(switch.e)));
    out.push_str("e,d2_single,d2_two,d32_two,d2_ratio,alpha2_per_eta,alpha2_per_sqrt_eta\n");
    out.extend(rows);
    Ok(out)
}

pub fn verify(mut s: Settings) -> Outcome {
    s.set_default("n", "5");
    s.set_default("nu", "0,1,2,3");
    s.set_default("lambda", "0,0.5,1,2,6,12");
    let n = block_length(&s)?;
    if n > dpsqkd_core::oracle::MAX_DENSE_N {
        return Err(Failure::Config(format!(
            "verify needs n <= {}, got {n}",
            dpsqkd_core::oracle::MAX_DENSE_N
        )));
    }
    let opts = VerifyOptions {
        nus: s.usize_list("nu")?,
        lambdas: s.grid("lambda")?,
        mutation: s.opt_f64("mutate")?,
    };
    let report = run_verification(n, &opts)?;

    let mut out = header("verify", &s);
    out.push_str("check,status,worst,tolerance,detail\n");
    for c in &report.checks {
        out.push_str(&format!(
            "{},{},{},{},\"{}\"\n",
            c.name,
            if c.passed { "pass" } else { "fail" },
            g17(c.worst),
            g17(c.tolerance),
            c.detail.replace('"', "'")
        ));
    }
    if report.passed() {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}
