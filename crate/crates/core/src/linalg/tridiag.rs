use crate::error::{Error, Result};
use crate::linalg::DenseSymmetric;

/// Real symmetric tri-diagonal matrix stored as its diagonal and first
/// super-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSymmetric {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalSymmetric {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyInput);
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                got: offdiag.len(),
            });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        match row.abs_diff(col) {
            0 => self.diag[row],
            1 => self.offdiag[row.min(col)],
            _ => 0.0,
        }
    }

    /// Principal sub-block on rows/columns `start..start + len`.
    pub fn sub_block(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.dim() {
            return Err(Error::invalid(format!(
                "sub-block {start}..{} out of range for order {}",
                start + len,
                self.dim()
            )));
        }
        Self::new(
            self.diag[start..start + len].to_vec(),
            self.offdiag[start..start + len - 1].to_vec(),
        )
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.offdiag[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> DenseSymmetric {
        let n = self.dim();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = self.diag[i];
            if i + 1 < n {
                data[i * n + i + 1] = self.offdiag[i];
                data[(i + 1) * n + i] = self.offdiag[i];
            }
        }
        DenseSymmetric::from_row_major(n, data).expect("tri-diagonal copy is symmetric")
    }

    fn check_finite(&self) -> Result<()> {
        if self.diag.iter().chain(&self.offdiag).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Bracketing("matrix has non-finite entries".into()))
        }
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the LDLᵀ
    /// pivots of `T - xI`).
    fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.offdiag[i - 1] * self.offdiag[i - 1] / q
            };
            q = self.diag[i] - x - coupling;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn pivmin(&self) -> f64 {
        let max_e2 = self.offdiag.iter().map(|e| e * e).fold(1.0, f64::max);
        f64::MIN_POSITIVE * max_e2
    }
}

/// Largest eigenvalue by Sturm-sequence bisection inside the Gershgorin
/// bracket. The result is within `tol` of the true value.
pub fn max_eigenvalue_tridiag(m: &TridiagonalSymmetric, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    m.check_finite()?;
    let n = m.dim();
    if n == 1 {
        return Ok(m.diag[0]);
    }
    let (glo, ghi) = m.gershgorin_bounds();
    let scale = glo.abs().max(ghi.abs()).max(1.0);
    let margin = tol + 4.0 * f64::EPSILON * scale;
    let mut lo = glo - margin;
    let mut hi = ghi + margin;
    let pivmin = m.pivmin();

    let c_hi = m.count_below(hi, pivmin);
    let c_lo = m.count_below(lo, pivmin);
    if c_hi != n || c_lo >= n {
        return Err(Error::Bracketing(format!(
            "Gershgorin bracket [{lo}, {hi}] holds count {c_lo}..{c_hi}, expected <{n}..{n}"
        )));
    }

    for _ in 0..256 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.count_below(mid, pivmin) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest eigenvalue with a unit eigenvector.
///
/// The eigenvalue is bracketed by bisection, the vector comes from inverse
/// iteration, and the returned eigenvalue is the Rayleigh quotient of that
/// vector. The sign is fixed so the largest-magnitude component is positive.
pub fn max_eigenpair_tridiag(m: &TridiagonalSymmetric, tol: f64) -> Result<(f64, Vec<f64>)> {
    let n = m.dim();
    // tighter than tol: the shift only has to land near the top eigenvalue
    let lambda = max_eigenvalue_tridiag(m, tol.min(1e-14))?;
    if n == 1 {
        return Ok((m.diag[0], vec![1.0]));
    }
    let norm = m.norm_inf();
    let shift = lambda + 16.0 * f64::EPSILON * norm.max(f64::MIN_POSITIVE);

    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.01 * (i as f64 + 1.0).sqrt())
        .collect();
    normalize(&mut v);
    let bound = 10.0 * tol * norm;
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..8 {
        v = solve_shifted(m, shift, &v);
        if !v.iter().all(|x| x.is_finite()) || normalize(&mut v) == 0.0 {
            return Err(Error::Bracketing(format!(
                "inverse iteration broke down at shift {shift}"
            )));
        }
        let mv = m.mul_vec(&v);
        let rq: f64 = mv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let resid = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rq * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if best.as_ref().map_or(true, |(r, _, _)| resid < *r) {
            best = Some((resid, rq, v.clone()));
        }
        if resid <= bound {
            break;
        }
    }
    let (resid, rq, mut v) = best.expect("at least one iteration");
    if resid > bound.max(64.0 * f64::EPSILON * norm) {
        return Err(Error::Bracketing(format!(
            "eigenvector residual {resid:e} exceeds bound {bound:e} (eigenvalue {lambda})"
        )));
    }
    fix_sign(&mut v);
    Ok((rq, v))
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Solve `(T - shift I) x = b` by Gaussian elimination with partial
/// pivoting; zero pivots are nudged to a tiny value, which is the standard
/// inverse-iteration treatment.
fn solve_shifted(m: &TridiagonalSymmetric, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = m.dim();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            a[i * n + j] = m.get(i, j);
        }
        a[i * n + i] -= shift;
    }
    let mut x = b.to_vec();
    let tiny = f64::EPSILON * m.norm_inf().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .expect("non-empty range");
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        if a[col * n + col].abs() < tiny {
            a[col * n + col] = tiny;
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for j in col + 1..n {
            acc -= a[col * n + j] * x[j];
        }
        x[col] = acc / a[col * n + col];
    }
    x
}
