//! Finite-dimensional instruments as dense matrices: there every repeatable
//! instrument must have an orthogonal projective POVM, so randomized
//! instruments exercise both directions of that statement.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest dimension the randomized suite accepts.
pub const FINITE_DIM_CAP: usize = 16;

/// Tolerance for dense identities; accumulated rounding in `dim ≤ 16`
/// products stays several orders below it.
const DENSE_TOL: f64 = 1e-10;

pub type DenseInstrument = Vec<DMatrix<Complex64>>;

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn effects(ops: &DenseInstrument) -> Vec<DMatrix<Complex64>> {
    ops.iter().map(|m| m.adjoint() * m).collect()
}

pub fn dense_complete(ops: &DenseInstrument, tol: f64) -> bool {
    let Some(first) = ops.first() else { return false };
    let n = first.ncols();
    let sum = effects(ops).into_iter().fold(DMatrix::zeros(n, n), |acc, p| acc + p);
    max_abs(&(sum - DMatrix::identity(n, n))) <= tol
}

/// Completeness, `M_e†M_eM_e = M_e` and `M_fM_e = 0`.
pub fn dense_repeatable(ops: &DenseInstrument, tol: f64) -> bool {
    if !dense_complete(ops, tol) {
        return false;
    }
    for (e, me) in ops.iter().enumerate() {
        if max_abs(&(me.adjoint() * me * me - me)) > tol {
            return false;
        }
        for (f, mf) in ops.iter().enumerate() {
            if e != f && max_abs(&(mf * me)) > tol {
                return false;
            }
        }
    }
    true
}

/// `P_eP_f = δ_ef P_f` on the effects of `ops`.
pub fn dense_orthogonal(ops: &DenseInstrument, tol: f64) -> bool {
    let effects = effects(ops);
    for (e, pe) in effects.iter().enumerate() {
        for (f, pf) in effects.iter().enumerate() {
            let product = pe * pf;
            let deviation = if e == f { max_abs(&(product - pf)) } else { max_abs(&product) };
            if deviation > tol {
                return false;
            }
        }
    }
    true
}

fn is_projective(effects: &[DMatrix<Complex64>], tol: f64) -> bool {
    effects.iter().all(|p| max_abs(&(p * p - p)) <= tol)
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via QR with the phase fix on `R`'s diagonal.
fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    let qr = gaussian(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) }
    });
    q * DMatrix::from_diagonal(&phases)
}

/// `h^power` for a Hermitian positive semidefinite `h`.
fn psd_power(h: &DMatrix<Complex64>, power: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let values = eig
        .eigenvalues
        .map(|x| Complex64::new(x.max(0.0).powf(power), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&values) * eig.eigenvectors.adjoint()
}

/// A random partition of the basis into blocks, rotated by a random unitary,
/// with a random unitary acting inside each block: `M_e = Q B_e Q†`.
pub fn random_projective_instrument(rng: &mut impl Rng, dim: usize) -> DenseInstrument {
    let outcomes = rng.random_range(1..=dim);
    let mut order: Vec<usize> = (0..dim).collect();
    order.shuffle(rng);
    let mut cuts: Vec<usize> = (1..dim).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(outcomes - 1).collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(dim);

    let rotation = random_unitary(rng, dim);
    cuts.windows(2)
        .map(|w| {
            let block = &order[w[0]..w[1]];
            let inner = random_unitary(rng, block.len());
            let mut b = DMatrix::zeros(dim, dim);
            for (a, &ra) in block.iter().enumerate() {
                for (c, &rc) in block.iter().enumerate() {
                    b[(ra, rc)] = inner[(a, c)];
                }
            }
            &rotation * b * rotation.adjoint()
        })
        .collect()
}

/// A random POVM `P_e = S^{-1/2} A_e†A_e S^{-1/2}` with square-root reduction
/// `M_e = √P_e`, optionally followed by a random unitary per outcome.
pub fn random_sqrt_instrument(
    rng: &mut impl Rng,
    dim: usize,
    outcomes: usize,
    twisted: bool,
) -> (DenseInstrument, Vec<DMatrix<Complex64>>) {
    let raw: Vec<_> = (0..outcomes)
        .map(|_| {
            let a = gaussian(rng, dim, dim);
            a.adjoint() * a
        })
        .collect();
    let total = raw.iter().fold(DMatrix::zeros(dim, dim), |acc, p| acc + p);
    let whitening = psd_power(&total, -0.5);
    let effects: Vec<_> = raw.iter().map(|p| &whitening * p * &whitening).collect();
    let ops = effects
        .iter()
        .map(|p| {
            let root = psd_power(p, 0.5);
            if twisted { random_unitary(rng, dim) * root } else { root }
        })
        .collect();
    (ops, effects)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryReport {
    pub dim: usize,
    pub seed: u64,
    /// Projective instruments that certified repeatable and orthogonal.
    pub projective_ok: usize,
    pub projective_cases: usize,
    /// Square-root style instruments whose POVM is not projective, and how
    /// many of those were (correctly) rejected as non-repeatable.
    pub non_projective_cases: usize,
    pub non_projective_rejected: usize,
    /// Instruments certified repeatable, and how many of those are orthogonal.
    pub repeatable_cases: usize,
    pub repeatable_orthogonal: usize,
}

impl CorollaryReport {
    pub fn passed(&self) -> bool {
        self.projective_ok == self.projective_cases
            && self.non_projective_rejected == self.non_projective_cases
            && self.repeatable_orthogonal == self.repeatable_cases
    }
}

/// Randomized check that in dimension `dim`, repeatable ⇔ orthogonal on
/// projective, square-root and twisted square-root instruments.
///
/// The generator is `ChaCha8Rng::seed_from_u64(seed)` on stream `dim`.
pub fn finite_dim_corollary_suite(dim: usize, seed: u64) -> Result<CorollaryReport> {
    if dim == 0 || dim > FINITE_DIM_CAP {
        return Err(Error::ParameterOutOfRange(format!("dimension {dim} outside 1..={FINITE_DIM_CAP}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(dim as u64);
    let mut report = CorollaryReport { dim, seed, ..Default::default() };

    let record_repeatable = |report: &mut CorollaryReport, ops: &DenseInstrument| {
        if dense_repeatable(ops, DENSE_TOL) {
            report.repeatable_cases += 1;
            if dense_orthogonal(ops, DENSE_TOL) {
                report.repeatable_orthogonal += 1;
            }
        }
    };

    for _ in 0..2 {
        let ops = random_projective_instrument(&mut rng, dim);
        report.projective_cases += 1;
        if dense_repeatable(&ops, DENSE_TOL) && dense_orthogonal(&ops, DENSE_TOL) {
            report.projective_ok += 1;
        }
        record_repeatable(&mut report, &ops);
    }

    for twisted in [false, false, true] {
        let outcomes = rng.random_range(2..=4);
        let (ops, effects) = random_sqrt_instrument(&mut rng, dim, outcomes, twisted);
        if !is_projective(&effects, DENSE_TOL) {
            report.non_projective_cases += 1;
            if !dense_repeatable(&ops, DENSE_TOL) {
                report.non_projective_rejected += 1;
            }
        }
        record_repeatable(&mut report, &ops);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn qubit_projective_pair() {
        let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let p1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let ops = vec![p0, p1];
        assert!(dense_repeatable(&ops, DENSE_TOL));
        assert!(dense_orthogonal(&ops, DENSE_TOL));
    }

    #[test]
    fn qubit_non_orthogonal_pair_with_square_roots() {
        // P_1 = cos²θ|0⟩⟨0| + sin²θ|1⟩⟨1| and P_2 = I − P_1; neither is a projector.
        let theta: f64 = 0.4;
        let (a, b) = (theta.cos().powi(2), theta.sin().powi(2));
        let p1 = DMatrix::from_row_slice(2, 2, &[c(a), c(0.0), c(0.0), c(b)]);
        let p2 = DMatrix::identity(2, 2) - &p1;
        let ops = vec![psd_power(&p1, 0.5), psd_power(&p2, 0.5)];
        assert!(dense_complete(&ops, DENSE_TOL));
        assert!(!dense_repeatable(&ops, DENSE_TOL));
        // p(2|1) on |0⟩ computed densely: ‖M2 M1|0⟩‖² / ‖M1|0⟩‖² = sin²θ.
        let ket0 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let after = &ops[0] * &ket0;
        let ratio = (&ops[1] * &after).norm_squared() / after.norm_squared();
        assert!((ratio - b).abs() < 1e-14);
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let u = random_unitary(&mut rng, n);
            assert!(max_abs(&(u.adjoint() * &u - DMatrix::identity(n, n))) < 1e-12);
        }
    }

    #[test]
    fn suite_passes_on_small_dims() {
        for dim in 1..=4 {
            for seed in 0..25 {
                let report = finite_dim_corollary_suite(dim, seed).unwrap();
                assert!(report.passed(), "{report:?}");
                assert_eq!(report.projective_cases, 2);
            }
        }
    }

    #[test]
    fn suite_rejects_large_dims() {
        assert!(finite_dim_corollary_suite(FINITE_DIM_CAP + 1, 0).is_err());
        assert!(finite_dim_corollary_suite(0, 0).is_err());
    }
}
