use crate::error::{Error, Result};

/// Sweep limit for the cyclic Jacobi solver; exceeding it is an error.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense real symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    size: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    /// Builds from a full row-major array. Entries must agree with their
    /// transposes to within 1e-12 (relative to magnitude); the stored matrix
    /// is the exact average so symmetry holds bit-for-bit afterwards.
    pub fn from_row_major(size: usize, mut data: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                got: data.len(),
            });
        }
        for r in 0..size {
            for c in r + 1..size {
                let (a, b) = (data[r * size + c], data[c * size + r]);
                let diff = (a - b).abs();
                if !(diff <= 1e-12 * a.abs().max(b.abs()).max(1.0)) {
                    return Err(Error::NonSymmetric {
                        row: r,
                        col: c,
                        diff,
                    });
                }
                let avg = 0.5 * (a + b);
                data[r * size + c] = avg;
                data[c * size + r] = avg;
            }
        }
        Ok(Self { size, data })
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..size * size).map(|k| f(k / size, k % size)).collect();
        Self::from_row_major(size, data)
    }

    pub fn identity(size: usize) -> Self {
        Self::from_fn(size, |r, c| if r == c { 1.0 } else { 0.0 }).expect("identity")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Largest eigenvalue by cyclic Jacobi rotations, iterated until the
/// off-diagonal Frobenius norm drops below `tol · max(1, ‖A‖_F)`.
pub fn max_eigenvalue_dense(m: &DenseSymmetric, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !m.data.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.size;
    let mut a = m.data.clone();
    let target = tol * m.frobenius().max(1.0);

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                s += a[r * n + c] * a[r * n + c];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off >= target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        // Skip rotations that cannot matter at this stage of convergence.
        let skip = if sweeps < 4 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= skip || apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
            }
        }
        off = off_norm(&a);
    }
    Ok((0..n)
        .map(|i| a[i * n + i])
        .fold(f64::NEG_INFINITY, f64::max))
}
