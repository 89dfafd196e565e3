//! Brute-force error operators on the untransformed joint register space.
//!
//! Register A holds n qubits in the Z basis, register B a single photon in one
//! of n slots. A basis state `(ā, i)` has index `bits(ā)·n + i` (slot `i`
//! 0-based), so states are ordered by pattern integer, then slot.
//!
//! The bit- and phase-error operators are built from Bob's POVM, filter and
//! Alice's measurement operators as sums of terms that touch only qubits
//! j, j+1 and slots j, j+1. Nothing here uses the tri-diagonal reduction.

use crate::error::{Error, Result};
use crate::linalg::{max_eigenvalue_dense, DenseSymmetric, TridiagonalSymmetric};
use crate::omega::OptimalState;
use crate::operators::{build_pi, build_pi_ph, kappa, Pattern};

/// Largest block for which restricted dense matrices are built.
pub const MAX_DENSE_N: usize = 8;
/// Largest block for which the full 2ⁿ·n space is materialized.
pub const MAX_FULL_N: usize = 5;
/// Largest block for operator expectation values.
pub const MAX_SPARSE_N: usize = 16;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

type Mat2 = [[f64; 2]; 2];
type Mat4 = [[f64; 4]; 4];
type Mat8 = [[f64; 8]; 8];

const HADAMARD: Mat2 = [
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
];

/// H|s⟩.
fn hadamard_ket(s: usize) -> [f64; 2] {
    [HADAMARD[0][s], HADAMARD[1][s]]
}

fn proj2(v: [f64; 2]) -> Mat2 {
    [[v[0] * v[0], v[0] * v[1]], [v[1] * v[0], v[1] * v[1]]]
}

fn kron22(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    out
}

fn kron42(a: &Mat4, b: &Mat2) -> Mat8 {
    let mut out = [[0.0; 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            out[r][c] = a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    out
}

fn add8(acc: &mut Mat8, m: &Mat8) {
    for r in 0..8 {
        for c in 0..8 {
            acc[r][c] += m[r][c];
        }
    }
}

/// `Kᵀ P(v) K` for a 2×d measurement operator K.
fn sandwich<const D: usize>(k: &[[f64; D]; 2], v: [f64; 2]) -> [[f64; D]; D] {
    // row vector vᵀK
    let mut w = [0.0; D];
    for c in 0..D {
        w[c] = v[0] * k[0][c] + v[1] * k[1][c];
    }
    let mut out = [[0.0; D]; D];
    for r in 0..D {
        for c in 0..D {
            out[r][c] = w[r] * w[c];
        }
    }
    out
}

/// Bob's filter for slot pair (j, j+1): √κ_j H|1⟩⟨j| + √κ_{j+1} H|0⟩⟨j+1|,
/// as a map from the two slots to the output qubit.
fn filter(kappa: &[f64], j: usize) -> [[f64; 2]; 2] {
    let (kj, kj1) = (kappa[j].sqrt(), kappa[j + 1].sqrt());
    let h1 = hadamard_ket(1);
    let h0 = hadamard_ket(0);
    [[kj * h1[0], kj1 * h0[0]], [kj * h1[1], kj1 * h0[1]]]
}

/// Alice's three measurement operators taking qubits (j, j+1) to one qubit.
/// Columns are |00⟩, |01⟩, |10⟩, |11⟩.
fn alice_measurements() -> [[[f64; 4]; 2]; 3] {
    let h0 = hadamard_ket(0);
    let h1 = hadamard_ket(1);
    let r = FRAC_1_SQRT_2;
    [
        // H|0⟩⟨01| + H|1⟩⟨10|
        [[0.0, h0[0], h1[0], 0.0], [0.0, h0[1], h1[1], 0.0]],
        // |0⟩(⟨00| + ⟨11|)/√2
        [[r, 0.0, 0.0, r], [0.0; 4]],
        // |1⟩(⟨00| − ⟨11|)/√2
        [[0.0; 4], [r, 0.0, 0.0, -r]],
    ]
}

/// An operator acting on qubits (j, j+1) of A and slots (j, j+1) of B, and
/// as the identity on the other qubits. It vanishes on the other slots.
/// Local index is `2·(2a_j + a_{j+1}) + (slot − j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub pair: usize,
    pub matrix: [[f64; 8]; 8],
}

/// Sum of local terms on the 2ⁿ·n joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOperator {
    n: usize,
    terms: Vec<LocalTerm>,
}

impl JointOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        (1usize << self.n) * self.n
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// ⟨(ā, i)| O |(ā′, i′)⟩.
    pub fn element(&self, bits: u64, slot: usize, bits2: u64, slot2: usize) -> f64 {
        let mut v = 0.0;
        for t in &self.terms {
            let j = t.pair;
            if slot < j || slot > j + 1 || slot2 < j || slot2 > j + 1 {
                continue;
            }
            let mask = 0b11u64 << j;
            if (bits ^ bits2) & !mask != 0 {
                continue;
            }
            let q = |b: u64| (2 * ((b >> j) & 1) + ((b >> (j + 1)) & 1)) as usize;
            v += t.matrix[2 * q(bits) + slot - j][2 * q(bits2) + slot2 - j];
        }
        v
    }

    /// Element by basis index.
    pub fn element_at(&self, row: usize, col: usize) -> f64 {
        let n = self.n;
        self.element((row / n) as u64, row % n, (col / n) as u64, col % n)
    }

    /// Dense matrix on the full space (n ≤ [`MAX_FULL_N`]).
    pub fn to_dense(&self) -> Result<DenseSymmetric> {
        if self.n > MAX_FULL_N {
            return Err(Error::BlockTooLong {
                n: self.n,
                max: MAX_FULL_N,
            });
        }
        let d = self.dim();
        DenseSymmetric::from_fn(d, |r, c| self.element_at(r, c))
    }

    /// ⟨ψ|O|ψ⟩ for a state with few nonzero basis components.
    pub fn expectation_sparse(&self, components: &[(u64, usize, f64)]) -> f64 {
        let mut v = 0.0;
        for &(b1, s1, c1) in components {
            for &(b2, s2, c2) in components {
                v += c1 * c2 * self.element(b1, s1, b2, s2);
            }
        }
        v
    }
}

fn check_n(n: usize, max: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::BlockTooShort(n));
    }
    if n > max {
        return Err(Error::BlockTooLong { n, max });
    }
    Ok(())
}

/// Bit-error and phase-error operators from their defining sums.
pub fn build_error_operators(n: usize) -> Result<(JointOperator, JointOperator)> {
    check_n(n, MAX_SPARSE_N)?;
    let kap = kappa(n)?;
    let meas = alice_measurements();
    let mut bit = Vec::with_capacity(n - 1);
    let mut phase = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let f = filter(&kap, j);
        // POVM for Bob's bit b at this pair: Fᵀ P(|b⟩) F
        let bob = |b: usize| sandwich(&f, [(b == 0) as u8 as f64, (b == 1) as u8 as f64]);

        let mut e = [[0.0; 8]; 8];
        for s in 0..2 {
            for t in 0..2 {
                let a = kron22(&proj2(hadamard_ket(s)), &proj2(hadamard_ket(t)));
                add8(&mut e, &kron42(&a, &bob(s ^ t ^ 1)));
            }
        }
        bit.push(LocalTerm { pair: j, matrix: e });

        let mut ph = [[0.0; 8]; 8];
        for s in 0..2 {
            let mut a = [[0.0; 4]; 4];
            for m in &meas {
                let part = sandwich(m, hadamard_ket(s));
                for r in 0..4 {
                    for c in 0..4 {
                        a[r][c] += part[r][c];
                    }
                }
            }
            let b = sandwich(&f, hadamard_ket(1 - s));
            add8(&mut ph, &kron42(&a, &b));
        }
        phase.push(LocalTerm {
            pair: j,
            matrix: ph,
        });
    }
    Ok((
        JointOperator { n, terms: bit },
        JointOperator { n, terms: phase },
    ))
}

/// Row-major square matrix, used for the orthogonal change of frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        Self {
            dim: d,
            data: (0..d * d).map(|k| self.data[(k % d) * d + k / d]).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == 0.0 {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        Self { dim: d, data }
    }

    pub fn from_symmetric(m: &DenseSymmetric) -> Self {
        Self {
            dim: m.size(),
            data: m.as_slice().to_vec(),
        }
    }

    /// Largest |A_rc − B_rc|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }
}

/// The frame change U as a dense matrix, built from its definition in the
/// X basis: (H^⊗n ⊗ 1)·diag((−1)^{s_i})·(H^⊗n ⊗ 1).
pub fn build_u(n: usize) -> Result<DenseMatrix> {
    check_n(n, MAX_FULL_N)?;
    let p = 1usize << n;
    let d = p * n;
    // H^⊗n entries: 2^{-n/2}(−1)^{popcount(x & y)}
    let norm = (p as f64).sqrt().recip();
    let hn = |x: usize, y: usize| {
        if (x & y).count_ones() % 2 == 0 {
            norm
        } else {
            -norm
        }
    };
    let mut data = vec![0.0; d * d];
    for a in 0..p {
        for i in 0..n {
            for b in 0..p {
                // Σ_s H(a,s)·(−1)^{s_i}·H(s,b)
                let mut v = 0.0;
                for s in 0..p {
                    let sign = if (s >> i) & 1 == 1 { -1.0 } else { 1.0 };
                    v += hn(a, s) * sign * hn(s, b);
                }
                data[(a * n + i) * d + b * n + i] = v;
            }
        }
    }
    Ok(DenseMatrix { dim: d, data })
}

/// U applied to a basis state: |ā⟩|i⟩ ↦ |ā ⊕ e_i⟩|i⟩.
pub fn apply_u(bits: u64, slot: usize) -> (u64, usize) {
    (bits ^ (1 << slot), slot)
}

/// Basis of the range of the ν-photon support projection in the
/// untransformed frame: patterns of weight ν, ν−2, … with every slot.
pub fn projection_basis(n: usize, nu: usize) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    for bits in 0..(1u64 << n) {
        let w = bits.count_ones() as usize;
        if w <= nu && (nu - w) % 2 == 0 {
            for i in 0..n {
                out.push((bits, i));
            }
        }
    }
    out
}

/// Largest eigenvalue of P(ê^(ph) − λê)P on the projected subspace, by
/// dense Jacobi.
pub fn brute_force_omega(n: usize, nu: usize, lambda: f64) -> Result<f64> {
    check_n(n, MAX_DENSE_N)?;
    let (e, ph) = build_error_operators(n)?;
    brute_force_omega_with(&e, &ph, nu, lambda)
}

/// As [`brute_force_omega`] with prebuilt operators.
pub fn brute_force_omega_with(
    e: &JointOperator,
    ph: &JointOperator,
    nu: usize,
    lambda: f64,
) -> Result<f64> {
    let n = e.n;
    check_n(n, MAX_DENSE_N)?;
    if ph.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ph.n,
        });
    }
    let basis = projection_basis(n, nu);
    let m = DenseSymmetric::from_fn(basis.len(), |r, c| {
        let (b1, s1) = basis[r];
        let (b2, s2) = basis[c];
        ph.element(b1, s1, b2, s2) - lambda * e.element(b1, s1, b2, s2)
    })?;
    max_eigenvalue_dense(&m, 1e-13)
}

/// A pure state U†(|ā*⟩ ⊗ Σ c_i|i⟩) written in the transformed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackState {
    pattern: Pattern,
    amplitudes: Vec<f64>,
}

impl AttackState {
    pub fn new(pattern: Pattern, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != pattern.n() {
            return Err(Error::DimensionMismatch {
                expected: pattern.n(),
                got: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|c| c * c).sum();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::invalid(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            pattern,
            amplitudes,
        })
    }

    pub fn from_optimal(state: &OptimalState) -> Result<Self> {
        Self::new(state.omega.pattern, state.amplitudes.clone())
    }

    pub fn pattern(&self) -> Pattern {
        self.pattern
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Nonzero components `(bits, slot, amplitude)` in the untransformed frame.
    pub fn components(&self) -> Vec<(u64, usize, f64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| {
                let (b, s) = apply_u(self.pattern.bits(), i);
                (b, s, c)
            })
            .collect()
    }
}

/// (⟨ψ|ê|ψ⟩, ⟨ψ|ê^(ph)|ψ⟩).
pub fn attack_state_errors(
    state: &AttackState,
    e: &JointOperator,
    ph: &JointOperator,
) -> Result<(f64, f64)> {
    let n = state.pattern.n();
    for op in [e, ph] {
        if op.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: op.n,
            });
        }
    }
    let comps = state.components();
    Ok((e.expectation_sparse(&comps), ph.expectation_sparse(&comps)))
}

/// Norm of the component of the source state with Alice's register in |ā⟩
/// and ν photons in total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiAmplitude {
    pub pattern: Pattern,
    pub nu: usize,
    pub value: f64,
}

/// Fock coefficient of (|α⟩ + (−1)^a|−α⟩) on k photons; exactly zero when
/// the parities of a and k differ.
fn fock_coefficient(alpha: f64, a: bool, k: usize) -> f64 {
    if (k % 2 == 1) != a {
        return 0.0;
    }
    let mut c = 2.0 * (-alpha * alpha / 2.0).exp();
    for j in 1..=k {
        c *= alpha / (j as f64).sqrt();
    }
    c
}

/// Amplitudes for every pattern ā of ν-photon components of the source
/// state, with each pulse expanded up to `fock_cutoff` photons.
pub fn phi_support(
    n: usize,
    alpha: f64,
    nu: usize,
    fock_cutoff: usize,
) -> Result<Vec<PhiAmplitude>> {
    check_n(n, MAX_SPARSE_N)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::OutOfRange(format!(
            "amplitude {alpha} must be positive"
        )));
    }
    if fock_cutoff < nu {
        return Err(Error::invalid(format!(
            "Fock cutoff {fock_cutoff} below photon number {nu}"
        )));
    }
    let scale = 0.5f64.powi(n as i32);
    let mut counts = vec![0usize; n];
    let mut configs: Vec<Vec<usize>> = Vec::new();
    compositions(nu, fock_cutoff, 0, &mut counts, &mut configs);
    let mut out = Vec::with_capacity(1 << n);
    for bits in 0..(1u64 << n) {
        let pattern = Pattern::new(n, bits)?;
        let mut sq = 0.0;
        for k in &configs {
            let mut amp = scale;
            for (i, &ki) in k.iter().enumerate() {
                amp *= fock_coefficient(alpha, pattern.bit(i), ki);
                if amp == 0.0 {
                    break;
                }
            }
            sq += amp * amp;
        }
        out.push(PhiAmplitude {
            pattern,
            nu,
            value: sq.sqrt(),
        });
    }
    Ok(out)
}

/// Photon counts per pulse summing to `left`, each at most `cap`.
fn compositions(
    left: usize,
    cap: usize,
    i: usize,
    counts: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if i + 1 == counts.len() {
        if left <= cap {
            counts[i] = left;
            out.push(counts.clone());
        }
        return;
    }
    for k in 0..=left.min(cap) {
        counts[i] = k;
        compositions(left - k, cap, i + 1, counts, out);
    }
}

/// Largest elementwise deviations of the conjugated operators from their
/// block forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationReport {
    pub n: usize,
    /// U ê Uᵀ against 1 ⊗ Π̂.
    pub bit: f64,
    /// U ê^(ph) Uᵀ against Σ_ā P(ā) ⊗ Π^(ph)_ā.
    pub phase: f64,
    /// U P^(ν) Uᵀ against its block form, for ν = 0..=3.
    pub projections: Vec<(usize, f64)>,
    /// ‖UᵀU − 1‖_max.
    pub orthogonality: f64,
}

impl ConjugationReport {
    pub fn max_deviation(&self) -> f64 {
        self.projections
            .iter()
            .map(|p| p.1)
            .fold(self.bit.max(self.phase).max(self.orthogonality), f64::max)
    }
}

fn block_target(n: usize, f: impl Fn(u64, usize, usize) -> f64) -> DenseMatrix {
    let d = (1usize << n) * n;
    let mut data = vec![0.0; d * d];
    for bits in 0..(1u64 << n) {
        for i in 0..n {
            for k in 0..n {
                let r = bits as usize * n + i;
                data[r * d + bits as usize * n + k] = f(bits, i, k);
            }
        }
    }
    DenseMatrix { dim: d, data }
}

/// Conjugates ê, ê^(ph) and the support projections by the dense U and
/// compares with the block forms assembled from the operators module.
pub fn conjugation_check(n: usize) -> Result<ConjugationReport> {
    conjugation_check_against(&build_pi(n)?)
}

/// As [`conjugation_check`] with the expected bit-error block supplied.
pub fn conjugation_check_against(pi: &TridiagonalSymmetric) -> Result<ConjugationReport> {
    let n = pi.dim();
    check_n(n, MAX_FULL_N)?;
    let u = build_u(n)?;
    let ut = u.transpose();
    let (e, ph) = build_error_operators(n)?;
    let conj = |m: &DenseMatrix| u.mul(m).mul(&ut);

    let bit_target = block_target(n, |_, i, k| pi.get(i, k));
    let bit = conj(&DenseMatrix::from_symmetric(&e.to_dense()?)).max_abs_diff(&bit_target);

    let mut diags = Vec::with_capacity(1 << n);
    for bits in 0..(1u64 << n) {
        diags.push(build_pi_ph(&Pattern::new(n, bits)?)?);
    }
    let phase_target = block_target(n, |b, i, k| {
        if i == k {
            diags[b as usize].entries()[i]
        } else {
            0.0
        }
    });
    let phase = conj(&DenseMatrix::from_symmetric(&ph.to_dense()?)).max_abs_diff(&phase_target);

    let d = (1usize << n) * n;
    let mut projections = Vec::new();
    for nu in 0..=3usize {
        let mut p = DenseMatrix {
            dim: d,
            data: vec![0.0; d * d],
        };
        for (b, s) in projection_basis(n, nu) {
            let r = b as usize * n + s;
            p.data[r * d + r] = 1.0;
        }
        let target = block_target(n, |b, i, k| {
            let w = b.count_ones() as usize;
            if i != k {
                0.0
            } else if (w < nu && (nu - w) % 2 == 1) || (w == nu + 1 && (b >> i) & 1 == 1) {
                1.0
            } else {
                0.0
            }
        });
        projections.push((nu, conj(&p).max_abs_diff(&target)));
    }
    let orthogonality = ut.mul(&u).max_abs_diff(&DenseMatrix::identity(d));
    Ok(ConjugationReport {
        n,
        bit,
        phase,
        projections,
        orthogonality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_squares_to_identity_and_permutes() {
        for n in 3..=4 {
            let u = build_u(n).unwrap();
            let d = u.dim();
            assert!(u.mul(&u).max_abs_diff(&DenseMatrix::identity(d)) < 1e-13);
            for bits in 0..(1u64 << n) {
                for i in 0..n {
                    let (b2, s2) = apply_u(bits, i);
                    assert!(
                        (u.get(b2 as usize * n + s2, bits as usize * n + i) - 1.0).abs() < 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn bob_povm_from_filter() {
        // Fᵀ P(|s⟩) F reproduces ½ P(√κ_j|j⟩ + (−1)^s √κ_{j+1}|j+1⟩).
        let kap = kappa(5).unwrap();
        for j in 0..4 {
            let f = filter(&kap, j);
            for s in 0..2 {
                let got = sandwich(&f, [(s == 0) as u8 as f64, (s == 1) as u8 as f64]);
                let sign = if s == 0 { 1.0 } else { -1.0 };
                let v = [kap[j].sqrt(), sign * kap[j + 1].sqrt()];
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((got[r][c] - 0.5 * v[r] * v[c]).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn alice_measurement_complete() {
        let meas = alice_measurements();
        let mut sum = [[0.0; 4]; 4];
        for m in &meas {
            for r in 0..4 {
                for c in 0..4 {
                    sum[r][c] += m[0][r] * m[0][c] + m[1][r] * m[1][c];
                }
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                assert!((sum[r][c] - (r == c) as u8 as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn operators_bounded() {
        let (e, ph) = build_error_operators(4).unwrap();
        for op in [&e, &ph] {
            let d = op.to_dense().unwrap();
            let top = max_eigenvalue_dense(&d, 1e-13).unwrap();
            let neg = DenseSymmetric::from_fn(d.size(), |r, c| -d.get(r, c)).unwrap();
            let bottom = -max_eigenvalue_dense(&neg, 1e-13).unwrap();
            assert!(top <= 1.0 + 1e-12 && bottom >= -1e-12, "{top} {bottom}");
        }
    }

    #[test]
    fn uniform_trace() {
        let (e, _) = build_error_operators(4).unwrap();
        let d = e.dim();
        let trace: f64 = (0..d).map(|r| e.element_at(r, r)).sum();
        // Tr(1 ⊗ Π̂) = 2ⁿ·n/2
        assert!((trace - d as f64 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        for lambda in [0.0, 0.5, 2.0] {
            let v = brute_force_omega(4, 0, lambda).unwrap();
            assert!((v - (1.0 - lambda) / 2.0).abs() < 1e-10);
        }
        let v = brute_force_omega(5, 1, 2.0).unwrap();
        assert!((v - (7.0 - 8.0 + 33f64.sqrt()) / 8.0).abs() < 1e-10);
    }

    #[test]
    fn zero_error_state() {
        let n = 6;
        let (e, ph) = build_error_operators(n).unwrap();
        let mut c = vec![1.0; n];
        c[0] = FRAC_1_SQRT_2;
        c[n - 1] = FRAC_1_SQRT_2;
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let c: Vec<f64> = c.iter().map(|x| x / norm).collect();
        let s = AttackState::new(Pattern::zeros(n).unwrap(), c).unwrap();
        let (be, pe) = attack_state_errors(&s, &e, &ph).unwrap();
        assert!(be.abs() < 1e-15);
        assert!(pe.abs() < 1e-15);
    }

    #[test]
    fn phi_vanishing_conditions() {
        let (n, alpha) = (4, 0.7);
        for nu in 0..=3 {
            for a in phi_support(n, alpha, nu, nu + 8).unwrap() {
                let w = a.pattern.weight();
                if w > nu || (w % 2) != (nu % 2) {
                    assert_eq!(a.value, 0.0, "{} nu={nu}", a.pattern);
                } else {
                    assert!(a.value > 0.0);
                }
            }
        }
    }

    #[test]
    fn phi_hand_expansion() {
        let alpha = 0.3f64;
        let amps = phi_support(3, alpha, 1, 9).unwrap();
        let p = Pattern::parse("100").unwrap();
        let a = amps.iter().find(|x| x.pattern == p).unwrap();
        assert!((a.value - alpha * (-1.5 * alpha * alpha).exp()).abs() < 1e-15);
        assert!(phi_support(3, alpha, 2, 1).is_err());
    }

    #[test]
    fn phi_sums_to_poisson() {
        let (n, alpha) = (5, 0.4f64);
        let mean = n as f64 * alpha * alpha;
        for nu in 0..=3 {
            let total: f64 = phi_support(n, alpha, nu, nu)
                .unwrap()
                .iter()
                .map(|a| a.value * a.value)
                .sum();
            let mut p = (-mean).exp();
            for j in 1..=nu {
                p *= mean / j as f64;
            }
            assert!((total - p).abs() < 1e-15, "nu={nu}");
        }
    }

    #[test]
    fn size_limits() {
        assert!(build_u(6).is_err());
        assert!(brute_force_omega(9, 1, 0.0).is_err());
        assert!(build_error_operators(2).is_err());
    }
}
