//! Dense complex matrices and the Hermitian spectral toolbox.
//!
//! Entries are stored row-major. Operators on `H ⊗ H` use the index map
//! `(j, k) ↦ j·d + k`, i.e. the first tensor factor is the major index.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance for Hermiticity checks.
pub const TOL_HERM: f64 = 1e-10;

/// Cyclic Jacobi stops once the off-diagonal mass drops below this
/// fraction of the input norm.
const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data. Rejects wrong lengths and
    /// non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|`
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.diag().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(A† B)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// True if `‖M − M†‖_F ≤ tol·max(1, ‖M‖_F)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol * self.frobenius_norm().max(1.0)
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        let mut m = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let mrow = &mut m.data[r * other.cols..(r + 1) * other.cols];
                for (dst, b) in mrow.iter_mut().zip(orow) {
                    *dst += a * b;
                }
            }
        }
        m
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }

    /// Kronecker product `X ⊗ Y` with `X` as the major (first) factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut m = Self::zeros(r1 * r2, c1 * c2);
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self[(i, j)];
                for k in 0..r2 {
                    for l in 0..c2 {
                        m[(i * r2 + k, j * c2 + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    /// Traces out the first factor of an operator on `C^d ⊗ C^d`:
    /// `N[k,l] = Σ_j M[(j,k),(j,l)]`.
    pub fn partial_trace_first(&self, d: usize) -> Result<Self> {
        self.check_bipartite(d)?;
        let mut n = Self::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    n[(k, l)] += self[(j * d + k, j * d + l)];
                }
            }
        }
        Ok(n)
    }

    /// Traces out the second factor: `N[j,l] = Σ_k M[(j,k),(l,k)]`.
    pub fn partial_trace_second(&self, d: usize) -> Result<Self> {
        self.check_bipartite(d)?;
        let mut n = Self::zeros(d, d);
        for j in 0..d {
            for l in 0..d {
                for k in 0..d {
                    n[(j, l)] += self[(j * d + k, l * d + k)];
                }
            }
        }
        Ok(n)
    }

    fn check_bipartite(&self, d: usize) -> Result<()> {
        if self.rows != d * d || self.cols != d * d {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} operator on C^{d} ⊗ C^{d}, got {1}x{2}",
                d * d,
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }

    /// Spectral decomposition of a Hermitian matrix, default tolerance.
    pub fn herm_eig(&self) -> Result<HermEig> {
        herm_eig_with_tol(self, TOL_HERM)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.herm_eig()?.eigenvalues[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.herm_eig()?.eigenvalues.last().unwrap_or(&0.0))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    /// Panics on incompatible shapes; use [`CMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "incompatible shapes for product");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.check_same_shape(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        self.check_same_shape(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Full spectral decomposition `M = V·diag(λ)·V†`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, ordered like `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl HermEig {
    /// Rebuilds `V·diag(f(λ))·V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = CMatrix::zeros(n, n);
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = v[(r, i)] * w;
                for c in 0..n {
                    out[(r, c)] += a * v[(c, i)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|x| x)
    }

    /// Orthogonal projector onto the span of eigenvectors with `λ > cutoff`.
    pub fn range_projector(&self, cutoff: f64) -> CMatrix {
        self.map_spectrum(|x| if x > cutoff { 1.0 } else { 0.0 })
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn herm_eig_with_tol(m: &CMatrix, tol_herm: f64) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows, m.cols));
    }
    let norm = m.frobenius_norm();
    let residual = m.hermiticity_residual();
    if residual > tol_herm * norm.max(1.0) {
        return Err(Error::NotHermitian(residual));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_REL_TOL * norm;

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[(r, dst)] = v[(r, src)];
        }
    }
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows;
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation annihilating `a[p,q]`. The rotation is
/// `J = S·R` where `S` rotates the phase of `a[p,q]` away and `R` is the
/// real symmetric Jacobi rotation; `a ← J†·a·J`, `v ← v·J`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J entries restricted to the (p, q) block.
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// True iff `λ_min(M) ≥ −tol·max(1, ‖M‖_F)`.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    let eig = m.herm_eig()?;
    Ok(eig
        .eigenvalues
        .first()
        .is_none_or(|&l| l >= -tol * m.frobenius_norm().max(1.0)))
}

/// Frobenius-nearest positive semidefinite matrix.
pub fn psd_part(m: &CMatrix) -> Result<CMatrix> {
    Ok(m.herm_eig()?.map_spectrum(|x| x.max(0.0)))
}

/// Principal square root of a PSD matrix. Eigenvalues down to
/// `−tol·max(1, ‖M‖_F)` are treated as zero.
pub fn sqrt_psd_with_tol(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = m.herm_eig()?;
    let floor = -tol * m.frobenius_norm().max(1.0);
    if let Some(&l) = eig.eigenvalues.first() {
        if l < floor {
            return Err(Error::NotPsd(l));
        }
    }
    // Eigenvalues at rounding level are indistinguishable from zero; their
    // square roots would not be.
    let noise = 64.0 * f64::EPSILON * m.frobenius_norm();
    Ok(eig.map_spectrum(|x| if x > noise { x.sqrt() } else { 0.0 }))
}

pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    sqrt_psd_with_tol(m, crate::DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() < tol
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let eig = CMatrix::from_diag(&[2.0, -1.0]).herm_eig().unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 2.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = x.herm_eig().unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v0 = eig.eigenvectors.column(0);
        // (1, -1)/√2 up to phase
        let ratio = v0[1] / v0[0];
        assert!((ratio - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((v0[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5)],
            vec![c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.2)],
            vec![c(0.0, -0.5), c(0.3, -0.2), c(0.5, 0.0)],
        ])
        .unwrap();
        let eig = m.herm_eig().unwrap();
        assert!(close(&eig.reconstruct(), &m, 1e-12));
        let v = &eig.eigenvectors;
        assert!(close(&(&v.adjoint() * v), &CMatrix::identity(3), 1e-12));
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(m.herm_eig(), Err(Error::NotHermitian(_))));
        let r = CMatrix::zeros(2, 3);
        assert!(matches!(r.herm_eig(), Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn zero_matrix_eig() {
        let eig = CMatrix::zeros(3, 3).herm_eig().unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&CMatrix::from_diag(&[0.3, 0.0]), 1e-12).unwrap());
        assert!(!is_psd(&CMatrix::from_diag(&[1.0, -0.5]), 1e-12).unwrap());
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        assert!(is_psd(&CMatrix::outer(&psi), 1e-12).unwrap());
    }

    #[test]
    fn psd_part_examples() {
        let p = psd_part(&CMatrix::from_diag(&[1.0, -1.0])).unwrap();
        assert!(close(&p, &CMatrix::from_diag(&[1.0, 0.0]), 1e-14));
        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let expect = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(close(&psd_part(&x).unwrap(), &expect, 1e-14));
    }

    #[test]
    fn sqrt_examples() {
        let s = sqrt_psd(&CMatrix::from_diag(&[0.25, 1.0])).unwrap();
        assert!(close(&s, &CMatrix::from_diag(&[0.5, 1.0]), 1e-14));
        let i = CMatrix::identity(3);
        assert!(close(&sqrt_psd(&i).unwrap(), &i, 1e-14));
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let p = CMatrix::outer(&psi);
        let s = sqrt_psd(&p.scale(0.5)).unwrap();
        assert!(close(&s, &p.scale(0.5f64.sqrt()), 1e-12));
        assert!(matches!(
            sqrt_psd(&CMatrix::from_diag(&[1.0, -0.1])),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn tensor_and_partial_trace() {
        let i4 = CMatrix::identity(2).tensor(&CMatrix::identity(2));
        assert_eq!(i4, CMatrix::identity(4));
        let t = CMatrix::from_diag(&[1.0, 0.0]).tensor(&CMatrix::from_diag(&[0.0, 1.0]));
        assert_eq!(t, CMatrix::from_diag(&[0.0, 1.0, 0.0, 0.0]));

        // maximally entangled marginal is I/d
        let d = 3;
        let mut psi = vec![c(0.0, 0.0); d * d];
        for j in 0..d {
            psi[j * d + j] = c(1.0 / (d as f64).sqrt(), 0.0);
        }
        let marg = CMatrix::outer(&psi).partial_trace_first(d).unwrap();
        assert!(close(
            &marg,
            &CMatrix::identity(d).scale(1.0 / d as f64),
            1e-15
        ));

        // (1/d) ξ ⊗ Aᵀ → Aᵀ/d
        let xi = CMatrix::from_rows(&[
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ])
        .unwrap();
        let a = CMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.0, 0.1)],
            vec![c(0.0, -0.1), c(0.2, 0.0)],
        ])
        .unwrap();
        let choi = xi.tensor(&a.transpose()).scale(0.5);
        let tr1 = choi.partial_trace_first(2).unwrap();
        assert!(close(&tr1, &a.transpose().scale(0.5), 1e-15));

        assert!(matches!(
            CMatrix::identity(3).partial_trace_first(2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn from_row_major_validates() {
        assert!(matches!(
            CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            CMatrix::from_real(1, 1, &[f64::NAN]),
            Err(Error::NonFinite)
        ));
    }
}
