//! States, effects, operations and instruments on a `d`-dimensional system.
//!
//! An [`Operation`] is stored canonically as its Choi–Jamiolkowski operator
//! `Ξ = (Φ ⊗ 𝓘)(|ψ₊⟩⟨ψ₊|) = (1/d)·Σ_{j,k} Φ(|j⟩⟨k|) ⊗ |j⟩⟨k|`, where the
//! first tensor factor carries the output of `Φ`. Complete positivity is
//! `Ξ ⪰ 0`; the trace bound is `d·tr₁Ξ = Aᵀ ⪯ I` with `A` the induced
//! effect. Transposes are taken in the computational basis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{is_psd, psd_part, sqrt_psd_with_tol, CMatrix};
use crate::{DEFAULT_TOL, PROB_FLOOR, RANK_TOL};

fn check_square(m: &CMatrix, d: usize, what: &str) -> Result<()> {
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {d}x{d}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// A positive operator bounded by the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    matrix: CMatrix,
}

impl Effect {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    /// Validates `0 ⪯ A ⪯ I` within `tol` (relative, as in [`is_psd`]).
    pub fn with_tol(matrix: CMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        let eig = matrix
            .herm_eig()
            .map_err(|e| Error::InvalidEffect(e.to_string()))?;
        let slack = tol * matrix.frobenius_norm().max(1.0);
        let lo = eig.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if lo < -slack {
            return Err(Error::InvalidEffect(format!(
                "negative eigenvalue {lo:.3e}"
            )));
        }
        if hi > 1.0 + slack {
            return Err(Error::InvalidEffect(format!(
                "eigenvalue {hi:.6} exceeds 1"
            )));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Complement `I − A`.
    pub fn complement(&self) -> Self {
        Self {
            matrix: &CMatrix::identity(self.dim()) - &self.matrix,
        }
    }
}

/// A positive trace-one operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: CMatrix,
}

impl DensityState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: CMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        let psd = is_psd(&matrix, tol).map_err(|e| Error::InvalidState(e.to_string()))?;
        if !psd {
            return Err(Error::InvalidState("not positive semidefinite".into()));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol.max(1e-12) * matrix.rows() as f64 {
            return Err(Error::InvalidState(format!("trace is {:.12}", tr.re)));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// The pure state `|ψ⟩⟨ψ|` for a nonzero vector, normalized.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: CMatrix::outer(&unit),
        })
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Diagnostic numbers for a candidate Choi operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiReport {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// `1 − λ_max(d·tr₁Ξ)`; negative when the trace bound is violated.
    pub trace_margin: f64,
    /// `‖d·tr₁Ξ − I‖_F`; zero exactly for channels.
    pub channel_defect: f64,
}

impl ChoiReport {
    pub fn compute(choi: &CMatrix, d: usize) -> Result<Self> {
        check_square(choi, d * d, "Choi operator")?;
        let hermiticity_residual = choi.hermiticity_residual();
        let herm = choi.hermitian_part();
        let min_eigenvalue = herm.min_eigenvalue()?;
        let marginal = herm.partial_trace_first(d)?.scale(d as f64);
        let trace_margin = 1.0 - marginal.max_eigenvalue()?;
        let channel_defect = (&marginal - &CMatrix::identity(d)).frobenius_norm();
        Ok(Self {
            hermiticity_residual,
            min_eigenvalue,
            trace_margin,
            channel_defect,
        })
    }

    /// First violated invariant at tolerance `tol`, if any.
    pub fn check(&self, choi_norm: f64, tol: f64) -> Result<()> {
        let scale = choi_norm.max(1.0);
        if self.hermiticity_residual > crate::linalg::TOL_HERM * scale {
            return Err(Error::NotHermitian(self.hermiticity_residual));
        }
        if self.min_eigenvalue < -tol * scale {
            return Err(Error::InvalidOperation(format!(
                "Choi operator is not positive (min eigenvalue {:.3e})",
                self.min_eigenvalue
            )));
        }
        if self.trace_margin < -tol * scale {
            return Err(Error::TraceBoundViolated(1.0 - self.trace_margin));
        }
        Ok(())
    }
}

/// A completely positive, trace non-increasing map.
#[derive(Clone, Debug)]
pub struct Operation {
    d: usize,
    choi: CMatrix,
    kraus: Option<Vec<CMatrix>>,
}

/// Result of applying an operation to a state.
#[derive(Clone, Debug)]
pub struct Application {
    pub probability: f64,
    /// `Φ(ρ)/p`, absent when `p` is below the probability floor.
    pub conditional: Option<DensityState>,
}

/// `Σ_k |v_k⟩⟨v_k|` with `v_k[(i, j)] = X_k[i, j]/√d`.
fn choi_from_kraus(kraus: &[CMatrix], d: usize) -> CMatrix {
    let mut choi = CMatrix::zeros(d * d, d * d);
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    for x in kraus {
        let v: Vec<Complex64> = x.as_slice().iter().map(|z| z * inv_sqrt_d).collect();
        choi += &CMatrix::outer(&v);
    }
    choi
}

impl Operation {
    /// Validates and wraps a Choi operator at the default tolerance.
    pub fn from_choi(choi: CMatrix, d: usize) -> Result<Self> {
        Self::from_choi_with_tol(choi, d, DEFAULT_TOL)
    }

    pub fn from_choi_with_tol(choi: CMatrix, d: usize, tol: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch(
                "dimension must be positive".into(),
            ));
        }
        let report = ChoiReport::compute(&choi, d)?;
        report.check(choi.frobenius_norm(), tol)?;
        Ok(Self {
            d,
            choi: choi.hermitian_part(),
            kraus: None,
        })
    }

    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::from_kraus_with_tol(kraus, DEFAULT_TOL)
    }

    pub fn from_kraus_with_tol(kraus: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let d = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?
            .rows();
        if d == 0 {
            return Err(Error::DimensionMismatch(
                "dimension must be positive".into(),
            ));
        }
        for x in &kraus {
            check_square(x, d, "Kraus operator")?;
        }
        let effect = kraus_effect(&kraus, d);
        let top = effect.max_eigenvalue()?;
        if top > 1.0 + tol * effect.frobenius_norm().max(1.0) {
            return Err(Error::TraceBoundViolated(top));
        }
        Ok(Self {
            d,
            choi: choi_from_kraus(&kraus, d),
            kraus: Some(kraus),
        })
    }

    pub fn null(d: usize) -> Self {
        Self {
            d,
            choi: CMatrix::zeros(d * d, d * d),
            kraus: Some(Vec::new()),
        }
    }

    pub fn identity(d: usize) -> Self {
        let i = CMatrix::identity(d);
        Self {
            d,
            choi: choi_from_kraus(std::slice::from_ref(&i), d),
            kraus: Some(vec![i]),
        }
    }

    /// Lüders operation `ρ ↦ √A ρ √A`.
    pub fn luders(effect: &Effect) -> Result<Self> {
        let root = sqrt_psd_with_tol(effect.matrix(), DEFAULT_TOL)
            .map_err(|e| Error::InvalidEffect(e.to_string()))?;
        let d = effect.dim();
        Ok(Self {
            d,
            choi: choi_from_kraus(std::slice::from_ref(&root), d),
            kraus: Some(vec![root]),
        })
    }

    /// Conditional state preparator `ρ ↦ tr[ρA]·ξ`, with Choi operator
    /// `(1/d)·ξ ⊗ Aᵀ`.
    pub fn preparator(effect: &Effect, state: &DensityState) -> Result<Self> {
        let d = effect.dim();
        if state.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "effect is {d}-dimensional, state is {}-dimensional",
                state.dim()
            )));
        }
        let choi = state
            .matrix()
            .tensor(&effect.matrix().transpose())
            .scale(1.0 / d as f64);
        Ok(Self {
            d,
            choi,
            kraus: None,
        })
    }

    /// Unitary channel `ρ ↦ UρU†`.
    pub fn unitary_channel(u: &CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare(u.rows(), u.cols()));
        }
        let d = u.rows();
        let defect = (&(&u.adjoint() * u) - &CMatrix::identity(d)).frobenius_norm();
        if defect > DEFAULT_TOL * (d as f64).sqrt().max(1.0) {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            d,
            choi: choi_from_kraus(std::slice::from_ref(u), d),
            kraus: Some(vec![u.clone()]),
        })
    }

    /// `λ·Φ` for `λ ∈ [0, 1]`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange(lambda));
        }
        let root = lambda.sqrt();
        Ok(Self {
            d: self.d,
            choi: self.choi.scale(lambda),
            kraus: self
                .kraus
                .as_ref()
                .map(|ks| ks.iter().map(|k| k.scale(root)).collect()),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// The Kraus list this operation was built from, if any.
    pub fn kraus_cache(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    /// Minimal Kraus decomposition read off the spectrum of the Choi
    /// operator: each eigenvector with `λ > RANK_TOL`, reshaped to `d×d`
    /// and scaled by `√(λ·d)`.
    pub fn to_kraus(&self) -> Vec<CMatrix> {
        self.to_kraus_with_tol(RANK_TOL)
    }

    pub fn to_kraus_with_tol(&self, rank_tol: f64) -> Vec<CMatrix> {
        let d = self.d;
        let eig = self
            .choi
            .herm_eig()
            .expect("stored Choi operator is Hermitian");
        let mut out = Vec::new();
        for (i, &lam) in eig.eigenvalues.iter().enumerate().rev() {
            if lam <= rank_tol {
                continue;
            }
            let w = (lam * d as f64).sqrt();
            let v = eig.eigenvectors.column(i);
            let data = v.into_iter().map(|z| z * w).collect();
            out.push(CMatrix::from_row_major(d, d, data).expect("d*d entries"));
        }
        out
    }

    pub fn kraus_rank(&self) -> usize {
        self.kraus_rank_with_tol(RANK_TOL)
    }

    pub fn kraus_rank_with_tol(&self, rank_tol: f64) -> usize {
        self.choi
            .herm_eig()
            .expect("stored Choi operator is Hermitian")
            .eigenvalues
            .iter()
            .filter(|&&l| l > rank_tol)
            .count()
    }

    pub fn is_pure(&self) -> bool {
        self.kraus_rank() == 1
    }

    /// Heisenberg-picture effect `A = Φ*(I) = (d·tr₁Ξ)ᵀ`.
    pub fn induced_effect(&self) -> Effect {
        let m = self
            .choi
            .partial_trace_first(self.d)
            .expect("Choi operator is d²×d²")
            .scale(self.d as f64)
            .transpose()
            .hermitian_part();
        Effect { matrix: m }
    }

    /// `Φ(ρ)`, via `Φ(ρ)[a,b] = d·Σ_{k,l} ρ[k,l]·Ξ[(a,k),(b,l)]`.
    pub fn image(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.d;
        check_square(rho, d, "state")?;
        let mut out = CMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    for l in 0..d {
                        acc += rho[(k, l)] * self.choi[(a * d + k, b * d + l)];
                    }
                }
                out[(a, b)] = acc * d as f64;
            }
        }
        Ok(out.hermitian_part())
    }

    pub fn apply(&self, rho: &DensityState) -> Result<Application> {
        if rho.dim() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "operation is {}-dimensional, state is {}-dimensional",
                self.d,
                rho.dim()
            )));
        }
        let out = self.image(rho.matrix())?;
        let probability = out.trace().re;
        let conditional = if probability > PROB_FLOOR {
            let m = out.scale(1.0 / probability);
            // Renormalized output of a valid operation is a state up to rounding.
            Some(DensityState {
                matrix: psd_part(&m)?,
            })
        } else {
            None
        };
        Ok(Application {
            probability,
            conditional,
        })
    }

    /// Frobenius distance between Choi operators.
    pub fn distance(&self, other: &Operation) -> f64 {
        (&self.choi - &other.choi).frobenius_norm()
    }
}

/// `Σ_k X_k† X_k`
pub fn kraus_effect(kraus: &[CMatrix], d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d, d);
    for x in kraus {
        s += &(&x.adjoint() * x);
    }
    s.hermitian_part()
}

/// Finite-outcome instrument: labelled operations summing to a channel.
#[derive(Clone, Debug)]
pub struct Instrument {
    d: usize,
    outcomes: Vec<(String, Operation)>,
}

impl Instrument {
    /// Checks that `λ_max(|d·tr₁Ω − I|) ≤ tol` with `Ω` the summed Choi operator.
    pub fn new(outcomes: Vec<(String, Operation)>, tol: f64) -> Result<Self> {
        let d = outcomes
            .first()
            .ok_or_else(|| Error::DimensionMismatch("instrument has no outcomes".into()))?
            .1
            .dim();
        if outcomes.iter().any(|(_, op)| op.dim() != d) {
            return Err(Error::DimensionMismatch(
                "instrument outcomes differ in dimension".into(),
            ));
        }
        let inst = Self { d, outcomes };
        let defect = &inst.normalization() - &CMatrix::identity(d);
        let eig = defect.herm_eig()?;
        let worst = eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        if worst > tol {
            return Err(Error::NotNormalized(worst));
        }
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn outcomes(&self) -> &[(String, Operation)] {
        &self.outcomes
    }

    pub fn operation(&self, index: usize) -> &Operation {
        &self.outcomes[index].1
    }

    /// Sum of the member Choi operators.
    pub fn total_choi(&self) -> CMatrix {
        let mut omega = CMatrix::zeros(self.d * self.d, self.d * self.d);
        for (_, op) in &self.outcomes {
            omega += op.choi();
        }
        omega
    }

    /// `d·tr₁Ω`, equal to the identity for a normalized instrument.
    pub fn normalization(&self) -> CMatrix {
        self.total_choi()
            .partial_trace_first(self.d)
            .expect("Choi operators are d²×d²")
            .scale(self.d as f64)
    }

    pub fn normalization_residual(&self) -> f64 {
        (&self.normalization() - &CMatrix::identity(self.d)).frobenius_norm()
    }

    /// Total number of Kraus operators over all outcomes, using minimal
    /// decompositions.
    pub fn kraus_count(&self) -> usize {
        self.outcomes.iter().map(|(_, op)| op.kraus_rank()).sum()
    }
}
