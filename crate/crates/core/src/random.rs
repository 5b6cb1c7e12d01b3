//! Random states, effects, unitaries and operations for testing and
//! benchmarking. All samplers take the caller's RNG so runs are reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;
use crate::model::{DensityState, Effect, Operation};

/// Complex Ginibre matrix with i.i.d. standard normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    CMatrix::from_row_major(rows, cols, data).expect("finite samples")
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Haar-random unitary via Gram–Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut v = g.column(c);
        for q in &cols {
            let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut u = CMatrix::zeros(d, d);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            u[(r, c)] = *z;
        }
    }
    u
}

/// Random unit vector.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Complex64> {
    let g = ginibre(rng, d, 1);
    let norm = g.frobenius_norm();
    g.as_slice().iter().map(|z| z / norm).collect()
}

/// `U·diag(λ)·U†` for Haar `U`.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> CMatrix {
    let u = unitary(rng, spectrum.len());
    (&(&u * &CMatrix::from_diag(spectrum)) * &u.adjoint()).hermitian_part()
}

/// Effect with Haar eigenbasis and i.i.d. uniform eigenvalues in `[0, 1]`.
pub fn effect<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Effect {
    let spectrum: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    Effect::new(with_spectrum(rng, &spectrum)).expect("spectrum in [0,1]")
}

/// Rank-1 projection onto a Haar-random vector.
pub fn rank_one_projection<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Effect {
    Effect::new(CMatrix::outer(&unit_vector(rng, d))).expect("projection")
}

/// Mixed state `GG†/tr(GG†)` from a Ginibre matrix (Hilbert–Schmidt measure).
pub fn state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityState {
    let g = ginibre(rng, d, d);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityState::new(m.scale(1.0 / tr)).expect("normalized PSD")
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityState {
    DensityState::pure(&unit_vector(rng, d)).expect("unit vector")
}

/// Random Kraus set `{X_k}` of length `count` with `Σ X_k†X_k = E` for a
/// random effect `E`: normalize Ginibre operators to a channel, then
/// compose with `√E` on the input side.
pub fn kraus_set<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..count).map(|_| ginibre(rng, d, d)).collect();
    let s = crate::model::kraus_effect(&raw, d);
    let inv_sqrt = s
        .herm_eig()
        .expect("Hermitian")
        .map_spectrum(|x| 1.0 / x.max(1e-300).sqrt());
    let root_e = crate::linalg::sqrt_psd(effect(rng, d).matrix()).expect("effect is PSD");
    let right = &inv_sqrt * &root_e;
    raw.iter().map(|x| x * &right).collect()
}

/// Random operation with `count` Kraus operators.
pub fn operation<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> Operation {
    Operation::from_kraus(kraus_set(rng, d, count)).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samplers_produce_valid_objects() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=4 {
            let u = unitary(&mut rng, d);
            let defect = (&(&u.adjoint() * &u) - &CMatrix::identity(d)).frobenius_norm();
            assert!(defect < 1e-12);
            let _ = effect(&mut rng, d);
            let _ = state(&mut rng, d);
            let op = operation(&mut rng, d, 3);
            assert!(op.kraus_rank() <= 3);
            assert!(op.induced_effect().matrix().max_eigenvalue().unwrap() <= 1.0 + 1e-9);
        }
    }
}
