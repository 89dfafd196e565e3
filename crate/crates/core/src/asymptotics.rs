//! Low-transmission (η → 0) key-rate coefficients and threshold error rates.
//!
//! With α² = Cη the rate behaves as D₂η²; with α² = C√η and only two-photon
//! detections trusted it behaves as D₃/₂η^{3/2}.

use crate::entropy::h;
use crate::error::{Error, Result};
use crate::omega::{omega_h_single, support_function_h, OmegaCurve, SupportFunction};
use crate::optimize::{bisect, grid_then_golden_max, linspace, logspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    /// η² coefficient from single photons only.
    D2Single,
    /// η² coefficient with the two-photon contribution.
    D2Two,
    /// η^{3/2} coefficient from two-photon events.
    D32Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCoefficient {
    pub kind: CoefficientKind,
    pub n: usize,
    pub e: f64,
    pub value: f64,
    /// Share of detections in the lowest trusted sector at the optimum:
    /// single-photon share for the η² kinds, two-photon share for η^{3/2}.
    pub share: f64,
    /// Optimal slope of the entropy bound; `None` for [`CoefficientKind::D2Single`].
    pub gamma: Option<f64>,
}

impl AsymptoticCoefficient {
    /// C in α² = Cη (η² kinds) or α² = C√η (η^{3/2}) reaching this value.
    pub fn amplitude_coefficient(&self) -> f64 {
        let n = self.n as f64;
        let rest = 1.0 - self.share;
        match self.kind {
            CoefficientKind::D2Single | CoefficientKind::D2Two => 2.0 * (n - 1.0) * rest / (n * n),
            CoefficientKind::D32Two => (6.0 * (n - 1.0) * rest / (n * n * n)).sqrt(),
        }
    }

    /// Exponent p of the regime G ∝ η^p.
    pub fn exponent(&self) -> f64 {
        match self.kind {
            CoefficientKind::D32Two => 1.5,
            _ => 2.0,
        }
    }
}

fn check_n_e(n: usize, e: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::BlockTooShort(n));
    }
    if !(0.0..0.5).contains(&e) {
        return Err(Error::OutOfRange(format!(
            "bit error rate {e} not in [0, 1/2)"
        )));
    }
    Ok(())
}

fn quadratic_prefactor(n: usize) -> f64 {
    let n = n as f64;
    2.0 * (n - 1.0) * (n - 1.0) / (n * n)
}

fn three_halves_prefactor(n: usize) -> f64 {
    let r = (n as f64 - 1.0) / n as f64;
    6f64.sqrt() * r.powf(1.5)
}

/// Single-photon entropy h(6e/y), taken as 1 past 1/2.
fn single_entropy(e: f64, y: f64) -> f64 {
    let x = 6.0 * e / y;
    if x <= 0.5 {
        h(x)
    } else {
        1.0
    }
}

/// η² coefficient trusting single photons only, maximized directly over the
/// single-photon share y.
pub fn d2_single(n: usize, e: f64) -> Result<AsymptoticCoefficient> {
    check_n_e(n, e)?;
    let he = h(e);
    let obj = |y: f64| {
        if y <= 0.0 {
            return -he;
        }
        (1.0 - y) * (y - y * single_entropy(e, y) - he)
    };
    let (y, v) = grid_then_golden_max(obj, &linspace(0.0, 1.0, 2001), 1e-12);
    let value = (quadratic_prefactor(n) * v).max(0.0);
    let share = if value > 0.0 { y } else { 1.0 };
    Ok(AsymptoticCoefficient {
        kind: CoefficientKind::D2Single,
        n,
        e,
        value,
        share,
        gamma: None,
    })
}

/// Entropy support data of the two-photon sector for one block length.
#[derive(Debug, Clone)]
pub struct TwoPhotonSupport {
    n: usize,
    support: SupportFunction,
}

impl TwoPhotonSupport {
    pub fn new(curve2: &OmegaCurve) -> Result<Self> {
        if curve2.nu() != 2 {
            return Err(Error::invalid(format!(
                "expected the two-photon curve, got nu = {}",
                curve2.nu()
            )));
        }
        Ok(Self {
            n: curve2.n(),
            support: support_function_h(curve2)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &SupportFunction {
        &self.support
    }
}

fn gamma_grid() -> Vec<f64> {
    let mut g = linspace(0.0, 20.0, 4001);
    g.extend(logspace(20.0, 1e4, 2000).into_iter().skip(1));
    g
}

/// Maximizes `obj` over γ ≥ 0 on the shared grid, refining near the best
/// grid point.
fn maximize_gamma(obj: impl Fn(f64) -> f64) -> (f64, f64) {
    let grid = gamma_grid();
    let (g, v) = grid_then_golden_max(&obj, &grid, 1e-10);
    (g, v)
}

/// Optimal tail share t ∈ [0, 1] for t(A − tB), and the value.
fn best_share(a: f64, b: f64) -> (f64, f64) {
    if a <= 0.0 {
        return (0.0, 0.0);
    }
    let t = if b > 0.0 {
        (a / (2.0 * b)).min(1.0)
    } else {
        1.0
    };
    (t, t * (a - t * b))
}

/// η² coefficient including two-photon events.
///
/// The two-photon share is clipped to [0, 1]. When no γ gives a positive
/// bracket the single-photon coefficient is returned.
pub fn d2_two(e: f64, two: &TwoPhotonSupport) -> Result<AsymptoticCoefficient> {
    let n = two.n;
    check_n_e(n, e)?;
    let he = h(e);
    let bracket = |g: f64| {
        let o1 = omega_h_single(g);
        (1.0 - he - g * e - o1, two.support.value(g) - o1)
    };
    let obj = |g: f64| {
        let (a, b) = bracket(g);
        best_share(a, b).1
    };
    let (g, v) = maximize_gamma(obj);
    if v <= 0.0 {
        let single = d2_single(n, e)?;
        return Ok(AsymptoticCoefficient {
            kind: CoefficientKind::D2Two,
            ..single
        });
    }
    let (a, b) = bracket(g);
    let (t, _) = best_share(a, b);
    Ok(AsymptoticCoefficient {
        kind: CoefficientKind::D2Two,
        n,
        e,
        value: quadratic_prefactor(n) * v,
        share: 1.0 - t,
        gamma: Some(g),
    })
}

/// Optimal tail w ∈ [0, 1] for √w(A − wB), and the value.
fn best_tail_three_halves(a: f64, b: f64) -> (f64, f64) {
    if a <= 0.0 {
        return (0.0, 0.0);
    }
    let w = if b > 0.0 {
        (a / (3.0 * b)).min(1.0)
    } else {
        1.0
    };
    (w, w.sqrt() * (a - w * b))
}

/// η^{3/2} coefficient from two-photon events alone.
pub fn d32_two(e: f64, two: &TwoPhotonSupport) -> Result<AsymptoticCoefficient> {
    let n = two.n;
    check_n_e(n, e)?;
    let he = h(e);
    let bracket = |g: f64| {
        let o2 = two.support.value(g);
        (1.0 - he - g * e - o2, 1.0 - o2)
    };
    let (g, v) = maximize_gamma(|g| {
        let (a, b) = bracket(g);
        best_tail_three_halves(a, b).1
    });
    let (a, b) = bracket(g);
    let (w, _) = best_tail_three_halves(a, b);
    let value = (three_halves_prefactor(n) * v).max(0.0);
    Ok(AsymptoticCoefficient {
        kind: CoefficientKind::D32Two,
        n,
        e,
        value,
        share: if value > 0.0 { 1.0 - w } else { 1.0 },
        gamma: if value > 0.0 { Some(g) } else { None },
    })
}

/// Largest error rate with a positive single-photon η² coefficient:
/// the root of 1 − h(6e) − h(e) on [0, 1/12].
pub fn e_max_single() -> f64 {
    bisect(|e| 1.0 - h(6.0 * e) - h(e), 0.0, 1.0 / 12.0, 1e-13).expect("sign change on [0, 1/12]")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub e: f64,
    /// False when the defining equation has no root in the searched range
    /// and `e` is the fallback 0.
    pub found: bool,
}

/// Largest error rate with a positive η^{3/2} coefficient: where the line
/// 1 − h(e) touches the graph of γe + Ω_h^(2)(γ), i.e. 1 − h(e) equals the
/// concave hull of the two-photon entropy bound.
pub fn e_max_two(two: &TwoPhotonSupport) -> Threshold {
    let hull = two.support.hull();
    let (lo, hi) = hull.domain();
    let hi = hi.min(0.5);
    let g = |e: f64| 1.0 - h(e) - hull.eval(e).unwrap_or(1.0);
    if !(g(lo) > 0.0) || g(hi) > 0.0 {
        return Threshold {
            e: 0.0,
            found: false,
        };
    }
    match bisect(g, lo, hi, 1e-13) {
        Ok(e) => Threshold { e, found: true },
        Err(_) => Threshold {
            e: 0.0,
            found: false,
        },
    }
}

/// Solution of the switch-over point where the optimal single-photon share
/// in the η² coefficient reaches 0, with the residuals of its two defining
/// equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPoint {
    /// 0 when there is no positive solution.
    pub e: f64,
    pub gamma: f64,
    /// |1 − h(e) − γe + Ω_h^(1)(γ) − 2Ω_h^(2)(γ)|.
    pub share_residual: f64,
    /// Distance of −e from the subgradient of Ω_h^(2) at γ.
    pub tangency_residual: f64,
}

/// Smallest error rate at which single photons start to carry part of the
/// optimal η² allocation. Below it all trusted weight sits on two-photon
/// events. Returns e = 0 when the share is positive already at e = 0.
///
/// The tangency condition is followed as a path over the concave hull of
/// the two-photon entropy bound: at a hull vertex e is fixed while γ sweeps
/// the adjacent slopes, on a hull edge γ is fixed while e moves.
pub fn e_min_two(two: &TwoPhotonSupport) -> SwitchPoint {
    const GAMMA_TOP: f64 = 1e4;
    let hull = two.support.hull();
    let bp = hull.breakpoints();
    let slopes = hull.slopes();
    let e_cap = e_max_single();
    // F > 0 ⇔ optimal single-photon share is negative (clipped to 0)
    let f = |e: f64, g: f64, hv: f64| 1.0 - h(e) + g * e + omega_h_single(g) - 2.0 * hv;
    let point = |e: f64, g: f64| {
        let o2 = two.support.value(g);
        let share_residual = (1.0 - h(e) - g * e + omega_h_single(g) - 2.0 * o2).abs();
        // maximizers of H(x) − γx form the interval [x_lo, x_hi]
        let k = hull.support_argmax(g);
        let x_lo = bp[k].0;
        let x_hi = if k < slopes.len() && (slopes[k] - g).abs() <= 1e-12 * g.abs().max(1.0) {
            bp[k + 1].0
        } else {
            x_lo
        };
        let tangency_residual = (x_lo - e).max(e - x_hi).max(0.0);
        SwitchPoint {
            e,
            gamma: g,
            share_residual,
            tangency_residual,
        }
    };
    let none = SwitchPoint {
        e: 0.0,
        gamma: GAMMA_TOP,
        share_residual: 0.0,
        tangency_residual: 0.0,
    };

    let (x0, y0) = bp[0];
    if f(x0, GAMMA_TOP, y0) <= 0.0 {
        return none;
    }
    let mut upper = GAMMA_TOP;
    for k in 0..bp.len() {
        let (xk, yk) = bp[k];
        if xk >= e_cap {
            break;
        }
        // vertex: e = xk, γ from `upper` down to the right slope
        let lower = slopes.get(k).copied().unwrap_or(0.0).max(0.0);
        if lower < upper && f(xk, lower, yk) <= 0.0 {
            let g = bisect(|g| f(xk, g, yk), lower, upper, 1e-13).unwrap_or(lower);
            return if xk > 0.0 { point(xk, g) } else { none };
        }
        let Some(&s) = slopes.get(k) else { break };
        if s < 0.0 {
            break;
        }
        // edge: γ = s, e from xk to the next vertex
        let x1 = bp[k + 1].0.min(e_cap);
        let on_edge = |e: f64| f(e, s, yk + s * (e - xk));
        if on_edge(x1) <= 0.0 {
            let e = bisect(on_edge, xk, x1, 1e-14).unwrap_or(x1);
            return point(e, s);
        }
        upper = s;
    }
    none
}

/// D₂ with two photons versus single photons only, over an e-grid.
pub fn d2_ratio(e: f64, two: &TwoPhotonSupport) -> Result<f64> {
    let a = d2_two(e, two)?.value;
    let b = d2_single(two.n, e)?.value;
    Ok(if b > 0.0 { a / b } else { f64::NAN })
}
