use std::sync::OnceLock;

use proptest::prelude::*;

use dpsqkd_core::asymptotics::{
    d2_single, d2_two, d32_two, e_max_single, e_max_two, TwoPhotonSupport,
};
use dpsqkd_core::entropy::h;
use dpsqkd_core::keyrate::{detection_rate, key_rate, PhaseBounds};
use dpsqkd_core::linalg::{
    max_eigenpair_tridiag, max_eigenvalue_dense, max_eigenvalue_tridiag, upper_concave_envelope,
    TridiagonalSymmetric,
};
use dpsqkd_core::DEFAULT_TOL;

fn tridiag() -> impl Strategy<Value = TridiagonalSymmetric> {
    (1usize..=20).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n - 1),
        )
            .prop_map(|(d, o)| TridiagonalSymmetric::new(d, o).unwrap())
    })
}

fn bounds(n: usize) -> &'static PhaseBounds {
    static B4: OnceLock<PhaseBounds> = OnceLock::new();
    static B9: OnceLock<PhaseBounds> = OnceLock::new();
    let cell = if n == 4 { &B4 } else { &B9 };
    cell.get_or_init(|| PhaseBounds::new(n, 2).unwrap())
}

fn support(n: usize) -> &'static TwoPhotonSupport {
    static S4: OnceLock<TwoPhotonSupport> = OnceLock::new();
    static S9: OnceLock<TwoPhotonSupport> = OnceLock::new();
    let cell = if n == 4 { &S4 } else { &S9 };
    cell.get_or_init(|| TwoPhotonSupport::new(bounds(n).curve(2).unwrap()).unwrap())
}

proptest! {
    #[test]
    fn tridiagonal_matches_dense(m in tridiag()) {
        let a = max_eigenvalue_tridiag(&m, DEFAULT_TOL).unwrap();
        let b = max_eigenvalue_dense(&m.to_dense(), DEFAULT_TOL).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn gershgorin_contains_top_eigenvalue(m in tridiag()) {
        let (lo, hi) = m.gershgorin_bounds();
        let top = max_eigenvalue_tridiag(&m, DEFAULT_TOL).unwrap();
        prop_assert!(top <= hi + DEFAULT_TOL && top >= lo - DEFAULT_TOL);
    }

    #[test]
    fn eigenpair_residual(m in tridiag()) {
        let (value, v) = max_eigenpair_tridiag(&m, DEFAULT_TOL).unwrap();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        let mv = m.mul_vec(&v);
        let res: f64 = mv.iter().zip(&v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(res <= 10.0 * DEFAULT_TOL * m.norm_inf().max(1.0), "residual {}", res);
    }

    #[test]
    fn envelope_idempotent_and_above_points(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40)) {
        let env = upper_concave_envelope(&pts).unwrap();
        let again = upper_concave_envelope(env.breakpoints()).unwrap();
        prop_assert_eq!(env.breakpoints(), again.breakpoints());
        for &(x, y) in &pts {
            prop_assert!(env.eval(x).unwrap() >= y - 1e-12);
        }
        let slopes = env.slopes();
        prop_assert!(slopes.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn entropy_symmetric_and_bounded(x in 0.0f64..=1.0) {
        let v = h(x);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - h(1.0 - x)).abs() <= 1e-14);
    }

    #[test]
    fn detection_rate_depends_on_product(n in 3usize..30, log_eta in -5.0f64..-1.0, log_a2 in -5.0f64..0.0, log_c in -1.0f64..1.0) {
        let (eta, a2, c) = (10f64.powf(log_eta), 10f64.powf(log_a2), 10f64.powf(log_c));
        let a = detection_rate(n, eta, a2).unwrap();
        let b = detection_rate(n, eta * c, a2 / c).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a, "{} vs {}", a, b);
    }

    #[test]
    fn rate_below_detection_rate(pick in 0usize..2, e in 0.0f64..0.2, log_eta in -5.0f64..-0.5, log_mean in -4.0f64..0.0, nu_bar in 0usize..=2) {
        let n = [4, 9][pick];
        let (eta, a2) = (10f64.powf(log_eta), 10f64.powf(log_mean) / n as f64);
        let p = key_rate(n, e, eta, a2, nu_bar, bounds(n)).unwrap();
        prop_assert!(p.g >= 0.0 && p.g <= p.q_det);
        if 1.0 - h(e) - p.h_ph <= 0.0 {
            prop_assert_eq!(p.g, 0.0);
        }
    }

    #[test]
    fn two_photon_coefficient_dominates_single(pick in 0usize..2, t in 0.0f64..1.0) {
        let n = [4, 9][pick];
        let e = t * e_max_single();
        let one = d2_single(n, e).unwrap().value;
        let two = d2_two(e, support(n)).unwrap().value;
        prop_assert!(two >= one - 1e-12, "n={} e={}: {} < {}", n, e, two, one);
    }
}

#[test]
fn coefficients_non_increasing_in_error() {
    for n in [4, 9] {
        let s = support(n);
        let top = e_max_two(s).e.max(e_max_single());
        let grid: Vec<f64> = (0..=200).map(|k| top * k as f64 / 200.0).collect();
        for coeff in [
            &(|e| d2_single(n, e).unwrap().value) as &dyn Fn(f64) -> f64,
            &|e| d2_two(e, s).unwrap().value,
            &|e| d32_two(e, s).unwrap().value,
        ] {
            let vals: Vec<f64> = grid.iter().map(|&e| coeff(e)).collect();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "n={n}: {} then {}", w[0], w[1]);
            }
        }
    }
}
