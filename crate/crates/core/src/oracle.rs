//! Exact deciders for restricted instances, written without the projection
//! machinery or the eigensolver so they can check the general solver.
//!
//! For diagonal (commuting) instances the problem decouples per basis
//! element: pinching any feasible point to its diagonal keeps it feasible,
//! so a scalar interval argument is exact.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::Effect;

/// Tolerance of the scalar oracles (pure arithmetic, no eigensolver).
pub const ORACLE_TOL: f64 = 1e-12;

/// Choi diagonals of two operations whose Choi operators are diagonal in
/// the product basis, indexed by `(j, k) ↦ j·d + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalInstance {
    pub d: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl DiagonalInstance {
    pub fn new(d: usize, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let inst = Self { d, p, q };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.d * self.d;
        if self.d == 0 || self.p.len() != n || self.q.len() != n {
            return Err(Error::MalformedInstance(format!(
                "expected two vectors of length {n}"
            )));
        }
        for (name, v) in [("p", &self.p), ("q", &self.q)] {
            if v.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::MalformedInstance(format!(
                    "{name} has a negative entry"
                )));
            }
            for k in 0..self.d {
                let col: f64 = (0..self.d).map(|j| v[j * self.d + k]).sum();
                if self.d as f64 * col > 1.0 + ORACLE_TOL {
                    return Err(Error::MalformedInstance(format!(
                        "{name} violates the trace bound in column {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The diagonal Choi operators `(diag p, diag q)`.
    pub fn choi_pair(&self) -> (CMatrix, CMatrix) {
        (CMatrix::from_diag(&self.p), CMatrix::from_diag(&self.q))
    }
}

/// Commuting effects with spectra `a`, `b` in a common eigenbasis coexist
/// iff every interval `[max(0, a_i + b_i − 1), min(a_i, b_i)]` is nonempty.
pub fn diagonal_effects_oracle(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "spectra of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    for &x in a.iter().chain(b) {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange(x));
        }
    }
    Ok(a.iter()
        .zip(b)
        .all(|(&x, &y)| (x + y - 1.0).max(0.0) <= x.min(y) + ORACLE_TOL))
}

/// Coexistence of two diagonal operations: with `x = min(p, q)` the largest
/// admissible common part, the remaining condition is
/// `d·Σ_j max(p, q)_{(j,k)} ≤ 1` for every column `k`.
pub fn diagonal_operations_oracle(inst: &DiagonalInstance) -> Result<bool> {
    inst.validate()?;
    let d = inst.d;
    Ok((0..d).all(|k| {
        let col: f64 = (0..d)
            .map(|j| inst.p[j * d + k].max(inst.q[j * d + k]))
            .sum();
        d as f64 * col <= 1.0 + ORACLE_TOL
    }))
}

/// `2×2` Hermitian `[[a, b], [b̄, c]]` is PSD within `slack`: both
/// eigenvalues `(a + c)/2 ± √(((a − c)/2)² + |b|²)` are `≥ −slack`.
fn psd2(a: f64, c: f64, b_re: f64, b_im: f64, slack: f64) -> bool {
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b_re * b_re + b_im * b_im).sqrt();
    mean - rad >= -slack
}

/// Exhaustive search for a qubit effect `G` with `0 ⪯ G ⪯ A`, `G ⪯ B`,
/// `A + B − I ⪯ G` over the grid
/// `G = g₀·I + g₁·σx + g₂·σy + g₃·σz`, `g₀ ∈ [0, 1]`, `g₁,g₂,g₃ ∈ [−½, ½]`,
/// `steps` points per axis.
///
/// Constraint violations up to the grid spacing are tolerated, so `true`
/// is reliable (a point within grid resolution exists) while `false` only
/// corroborates infeasibility.
pub fn grid_search_effects(a: &Effect, b: &Effect, steps: usize) -> Result<bool> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::UnsupportedDimension(a.dim().max(b.dim())));
    }
    if steps < 2 {
        return Err(Error::OutOfRange(steps as f64));
    }
    let (am, bm) = (a.matrix(), b.matrix());
    let entries = |m: &CMatrix| (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].re, m[(0, 1)].im);
    let (a00, a11, a01r, a01i) = entries(am);
    let (b00, b11, b01r, b01i) = entries(bm);
    let h = 1.0 / (steps - 1) as f64;
    let slack = h;
    let axis = |i: usize| i as f64 * h;

    for i0 in 0..steps {
        let g0 = axis(i0);
        for i3 in 0..steps {
            let g3 = axis(i3) - 0.5;
            let (g00, g11) = (g0 + g3, g0 - g3);
            for i1 in 0..steps {
                let g1 = axis(i1) - 0.5;
                for i2 in 0..steps {
                    let g2 = axis(i2) - 0.5;
                    // G[0,1] = g1 − i·g2
                    let (gr, gi) = (g1, -g2);
                    let ok = psd2(g00, g11, gr, gi, slack)
                        && psd2(a00 - g00, a11 - g11, a01r - gr, a01i - gi, slack)
                        && psd2(b00 - g00, b11 - g11, b01r - gr, b01i - gi, slack)
                        && psd2(
                            g00 - (a00 + b00 - 1.0),
                            g11 - (a11 + b11 - 1.0),
                            gr - (a01r + b01r),
                            gi - (a01i + b01i),
                            slack,
                        );
                    if ok {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sharp_x() -> Effect {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(1.0, 0.0);
        Effect::new(m.scale(0.5)).unwrap()
    }

    fn sharp_z() -> Effect {
        Effect::new(CMatrix::from_diag(&[1.0, 0.0])).unwrap()
    }

    #[test]
    fn effects_oracle_examples() {
        assert!(diagonal_effects_oracle(&[0.6, 0.3], &[0.7, 0.5]).unwrap());
        assert!(diagonal_effects_oracle(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
        assert!(diagonal_effects_oracle(&[1.0, 1.0], &[0.5, 0.5]).unwrap());
        assert!(matches!(
            diagonal_effects_oracle(&[1.2], &[0.0]),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn effects_oracle_is_always_true_for_commuting_pairs() {
        // max(0, a+b−1) ≤ min(a, b) holds for all a, b ∈ [0,1]: commuting
        // effects always coexist.
        for i in 0..=20 {
            for j in 0..=20 {
                let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
                assert!(diagonal_effects_oracle(&[a], &[b]).unwrap());
                assert_eq!(
                    diagonal_effects_oracle(&[a], &[b]).unwrap(),
                    diagonal_effects_oracle(&[b], &[a]).unwrap()
                );
            }
        }
    }

    #[test]
    fn operations_oracle_examples() {
        let p = vec![0.25, 0.1, 0.05, 0.2];
        let inst = DiagonalInstance::new(2, p.clone(), p.clone()).unwrap();
        assert!(diagonal_operations_oracle(&inst).unwrap());

        let inst =
            DiagonalInstance::new(2, vec![0.5, 0.0, 0.0, 0.5], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(!diagonal_operations_oracle(&inst).unwrap());

        let inst = DiagonalInstance::new(2, p, vec![0.0; 4]).unwrap();
        assert!(diagonal_operations_oracle(&inst).unwrap());

        assert!(matches!(
            DiagonalInstance::new(2, vec![0.6, 0.0, 0.0, 0.0], vec![0.0; 4]),
            Err(Error::MalformedInstance(_))
        ));
        assert!(matches!(
            DiagonalInstance::new(2, vec![0.1; 3], vec![0.0; 4]),
            Err(Error::MalformedInstance(_))
        ));
    }

    #[test]
    fn grid_examples() {
        let half = Effect::new(CMatrix::identity(2).scale(0.5)).unwrap();
        assert!(grid_search_effects(&half, &half, 11).unwrap());
        let a = Effect::new(CMatrix::from_diag(&[0.3, 0.2])).unwrap();
        let b = Effect::new(CMatrix::from_diag(&[0.5, 0.7])).unwrap();
        assert!(grid_search_effects(&a, &b, 11).unwrap());
        assert!(!grid_search_effects(&sharp_x(), &sharp_z(), 50).unwrap());
        assert!(matches!(
            grid_search_effects(&Effect::identity(3), &Effect::identity(3), 5),
            Err(Error::UnsupportedDimension(3))
        ));
    }
}
