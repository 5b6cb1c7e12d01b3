//! Coexistence of two operations (and of two effects).
//!
//! Two operations `Φ`, `Ψ` coexist iff there are positive `Ξ₁..Ξ₄` with
//! `Ξ_Φ = Ξ₁ + Ξ₂`, `Ξ_Ψ = Ξ₁ + Ξ₃` and `d·tr₁(Ξ₁+Ξ₂+Ξ₃+Ξ₄) = I`.
//! Eliminating `Ξ₂`, `Ξ₃` and absorbing `Ξ₄` as slack leaves a problem in
//! `Ξ₁` alone:
//!
//! ```text
//! Ξ₁ ⪰ 0,   Ξ₁ ⪯ Ξ_Φ,   Ξ₁ ⪯ Ξ_Ψ,   d·tr₁(Ξ_Φ + Ξ_Ψ − Ξ₁) ⪯ I
//! ```
//!
//! Any solution is completed to a four-outcome instrument by
//! [`build_witness`]. Cheaper sufficient or exact tests run first in
//! [`operations_coexistent`].

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{is_psd, psd_part, CMatrix};
use crate::model::{DensityState, Effect, Instrument, Operation};
use crate::solver::{solve_feasibility, FeasibilitySpec, FeasibilityStatus, SolverSettings};
use crate::DEFAULT_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Feasible => "feasible",
            Self::Infeasible => "infeasible",
            Self::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which test produced a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// `Φ + Ψ` is an operation (`A + B ⪯ I` for effects).
    TrivialSum,
    /// `Φ − Ψ` or `Ψ − Φ` is an operation (`A ⪯ B` or `B ⪯ A` for effects).
    TrivialDiff,
    /// One effect is a multiple of the identity.
    TrivialEffect,
    PureClosedForm,
    Luders,
    Unitary,
    /// The induced effects are not coexistent.
    EffectsNecessary,
    Solver,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TrivialSum => "trivial-sum",
            Self::TrivialDiff => "trivial-diff",
            Self::TrivialEffect => "trivial-effect",
            Self::PureClosedForm => "pure-closed-form",
            Self::Luders => "luders",
            Self::Unitary => "unitary",
            Self::EffectsNecessary => "effects-necessary",
            Self::Solver => "solver",
            Self::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pipeline selection for [`operations_coexistent`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Auto,
    ClosedFormOnly,
    SolverOnly,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Evidence {
    /// Worst constraint violation, or the fit residual for closed forms.
    pub residual: f64,
    pub iterations: usize,
    pub gap_estimate: f64,
    pub violated_constraint: Option<String>,
    pub note: String,
}

impl Evidence {
    fn note(note: impl Into<String>) -> Self {
        Self {
            note: note.into(),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoexistenceDecision {
    pub verdict: Verdict,
    pub method: Method,
    /// Four-outcome instrument with `J₁+J₂ = Φ`, `J₁+J₃ = Ψ`; present iff feasible.
    pub witness: Option<Instrument>,
    /// For effect-level decisions: the joint observable `G₁..G₄` with
    /// `G₁+G₂ = A`, `G₁+G₃ = B`.
    pub observable: Option<[Effect; 4]>,
    pub evidence: Evidence,
}

impl CoexistenceDecision {
    fn feasible(method: Method, witness: Instrument, evidence: Evidence) -> Self {
        Self {
            verdict: Verdict::Feasible,
            method,
            witness: Some(witness),
            observable: None,
            evidence,
        }
    }

    fn infeasible(method: Method, evidence: Evidence) -> Self {
        Self {
            verdict: Verdict::Infeasible,
            method,
            witness: None,
            observable: None,
            evidence,
        }
    }
}

fn same_dim(phi: &Operation, psi: &Operation) -> Result<usize> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operations act on dimensions {} and {}",
            phi.dim(),
            psi.dim()
        )));
    }
    Ok(phi.dim())
}

fn effect_leq_identity(m: &CMatrix, tol: f64) -> Result<bool> {
    let slack = &CMatrix::identity(m.rows()) - m;
    is_psd(&slack.hermitian_part(), tol)
}

/// `Φ + Ψ` is an operation, i.e. `A + B ⪯ I` for the induced effects.
pub fn is_sum_operation(phi: &Operation, psi: &Operation) -> Result<bool> {
    same_dim(phi, psi)?;
    let sum = phi.induced_effect().matrix() + psi.induced_effect().matrix();
    effect_leq_identity(&sum, DEFAULT_TOL)
}

/// `Φ − Ψ` is an operation, i.e. `Ξ_Φ − Ξ_Ψ ⪰ 0`.
pub fn is_difference_operation(phi: &Operation, psi: &Operation) -> Result<bool> {
    same_dim(phi, psi)?;
    is_psd(&(phi.choi() - psi.choi()).hermitian_part(), DEFAULT_TOL)
}

/// Tests (T1) and (T2) in both directions. `None` means "not trivially
/// coexistent", which is not a negative verdict.
pub fn trivially_coexistent(
    phi: &Operation,
    psi: &Operation,
) -> Result<Option<CoexistenceDecision>> {
    let d = same_dim(phi, psi)?;
    let tol = SolverSettings::default().tol_feas;
    if is_sum_operation(phi, psi)? {
        let w = build_witness(&CMatrix::zeros(d * d, d * d), phi, psi, tol)?;
        return Ok(Some(CoexistenceDecision::feasible(
            Method::TrivialSum,
            w,
            Evidence::note("Φ + Ψ is an operation"),
        )));
    }
    if is_difference_operation(phi, psi)? {
        let w = build_witness(psi.choi(), phi, psi, tol)?;
        return Ok(Some(CoexistenceDecision::feasible(
            Method::TrivialDiff,
            w,
            Evidence::note("Ψ ≤ Φ"),
        )));
    }
    if is_difference_operation(psi, phi)? {
        let w = build_witness(phi.choi(), phi, psi, tol)?;
        return Ok(Some(CoexistenceDecision::feasible(
            Method::TrivialDiff,
            w,
            Evidence::note("Φ ≤ Ψ"),
        )));
    }
    Ok(None)
}

/// Least-squares fit `w ≈ c·v`; returns `(c, ‖w − c·v‖_F)`.
fn scalar_fit(v: &CMatrix, w: &CMatrix) -> (num_complex::Complex64, f64) {
    let vv = v.inner(v).re;
    if vv == 0.0 {
        return (num_complex::Complex64::new(0.0, 0.0), w.frobenius_norm());
    }
    let c = v.inner(w) / vv;
    (c, (w - &v.scale_c(c)).frobenius_norm())
}

const PROPORTIONAL_TOL: f64 = 1e-9;

fn proportional(v: &CMatrix, w: &CMatrix) -> (bool, f64) {
    let (_, r1) = scalar_fit(v, w);
    let (_, r2) = scalar_fit(w, v);
    let ok1 = r1 <= PROPORTIONAL_TOL * w.frobenius_norm().max(1.0);
    let ok2 = r2 <= PROPORTIONAL_TOL * v.frobenius_norm().max(1.0);
    (ok1 || ok2, r1.min(r2))
}

/// Exact decision for two pure operations: coexistent iff trivially
/// coexistent, i.e. `A + B ⪯ I` or the Kraus operators are proportional.
pub fn pure_coexistent(phi: &Operation, psi: &Operation) -> Result<CoexistenceDecision> {
    let d = same_dim(phi, psi)?;
    for op in [phi, psi] {
        let r = op.kraus_rank();
        if r != 1 {
            return Err(Error::NotPure(r));
        }
    }
    let tol = SolverSettings::default().tol_feas;
    if is_sum_operation(phi, psi)? {
        let w = build_witness(&CMatrix::zeros(d * d, d * d), phi, psi, tol)?;
        return Ok(CoexistenceDecision::feasible(
            Method::PureClosedForm,
            w,
            Evidence::note("A + B ⪯ I"),
        ));
    }
    let v = &phi.to_kraus()[0];
    let w = &psi.to_kraus()[0];
    let (is_prop, residual) = proportional(v, w);
    if is_prop {
        let ratio = psi.choi().trace().re / phi.choi().trace().re;
        let xi1 = if ratio <= 1.0 { psi.choi() } else { phi.choi() };
        let wit = build_witness(xi1, phi, psi, tol)?;
        return Ok(CoexistenceDecision::feasible(
            Method::PureClosedForm,
            wit,
            Evidence {
                residual,
                note: format!("Ψ = {ratio:.12}·Φ"),
                ..Evidence::default()
            },
        ));
    }
    Ok(CoexistenceDecision::infeasible(
        Method::PureClosedForm,
        Evidence {
            residual,
            note: "A + B ⋠ I and the Kraus operators are not proportional".into(),
            ..Evidence::default()
        },
    ))
}

/// Closed-form Lüders criterion on the effects themselves:
/// `A + B ⪯ I`, or `A` and `B` proportional.
pub fn luders_closed_form(a: &Effect, b: &Effect) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "effects act on dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if effect_leq_identity(&(a.matrix() + b.matrix()), DEFAULT_TOL)? {
        return Ok(true);
    }
    Ok(proportional(a.matrix(), b.matrix()).0)
}

/// Decides coexistence of the Lüders operations `L_A`, `L_B`.
pub fn luders_coexistent(a: &Effect, b: &Effect) -> Result<CoexistenceDecision> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "effects act on dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let la = Operation::luders(a)?;
    let lb = Operation::luders(b)?;
    let mut decision = if la.kraus_rank() == 0 || lb.kraus_rank() == 0 {
        let d = a.dim();
        let w = build_witness(
            &CMatrix::zeros(d * d, d * d),
            &la,
            &lb,
            SolverSettings::default().tol_feas,
        )?;
        CoexistenceDecision::feasible(Method::Luders, w, Evidence::note("null operation"))
    } else {
        pure_coexistent(&la, &lb)?
    };
    decision.method = Method::Luders;
    Ok(decision)
}

/// `Φ` coexists with the unitary channel `U` iff `Ξ_Φ = λ·Ξ_U`, `λ ∈ [0, 1]`.
pub fn unitary_coexistent(u: &CMatrix, phi: &Operation) -> Result<CoexistenceDecision> {
    let chan = Operation::unitary_channel(u)?;
    same_dim(&chan, phi)?;
    let xu = chan.choi();
    let lambda = xu.inner(phi.choi()).re / xu.inner(xu).re;
    let residual = (phi.choi() - &xu.scale(lambda)).frobenius_norm();
    let fits = residual <= PROPORTIONAL_TOL * phi.choi().frobenius_norm().max(1.0)
        && (-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&lambda);
    if fits {
        let w = build_witness(phi.choi(), &chan, phi, SolverSettings::default().tol_feas)?;
        return Ok(CoexistenceDecision::feasible(
            Method::Unitary,
            w,
            Evidence {
                residual,
                note: format!("Φ = {lambda:.12}·U"),
                ..Evidence::default()
            },
        ));
    }
    Ok(CoexistenceDecision::infeasible(
        Method::Unitary,
        Evidence {
            residual,
            note: "Φ is not a multiple of the unitary channel".into(),
            ..Evidence::default()
        },
    ))
}

/// Deterministic total order used to put arguments in a canonical order
/// before any order-dependent computation.
fn canonical_cmp(a: &CMatrix, b: &CMatrix) -> Ordering {
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn approx_scalar_identity(m: &CMatrix) -> Option<f64> {
    let n = m.rows();
    let lambda = m.trace().re / n as f64;
    let dev = (m - &CMatrix::identity(n).scale(lambda)).frobenius_norm();
    (dev <= PROPORTIONAL_TOL * m.frobenius_norm().max(1.0)).then_some(lambda)
}

/// Feasibility problem for an effect `G` with `0 ⪯ G ⪯ A`, `G ⪯ B`,
/// `A + B − I ⪯ G`.
pub fn effect_feasibility_spec(
    a: &Effect,
    b: &Effect,
    settings: &SolverSettings,
) -> FeasibilitySpec {
    let d = a.dim();
    let floor = &(a.matrix() + b.matrix()) - &CMatrix::identity(d);
    FeasibilitySpec::new(d)
        .lower(CMatrix::zeros(d, d))
        .lower(floor)
        .upper(a.matrix().clone())
        .upper(b.matrix().clone())
        .settings(*settings)
}

/// Decides whether `A` and `B` belong to one observable, i.e. whether some
/// effect `G` gives the four-outcome observable
/// `(G, A − G, B − G, I − A − B + G)`.
///
/// The witness instrument certifies the same fact at the operation level:
/// it contains the preparators `Φ_A^ξ`, `Φ_B^ξ` with `ξ = I/d`.
pub fn effects_coexistent(
    a: &Effect,
    b: &Effect,
    settings: &SolverSettings,
) -> Result<CoexistenceDecision> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "effects act on dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if canonical_cmp(a.matrix(), b.matrix()) == Ordering::Greater {
        let mut dec = effects_coexistent_ordered(b, a, settings)?;
        swap_roles(&mut dec)?;
        return Ok(dec);
    }
    effects_coexistent_ordered(a, b, settings)
}

fn effects_coexistent_ordered(
    a: &Effect,
    b: &Effect,
    settings: &SolverSettings,
) -> Result<CoexistenceDecision> {
    let d = a.dim();
    let fast = if let Some(l) = approx_scalar_identity(a.matrix()) {
        Some((
            b.matrix().scale(l),
            Method::TrivialEffect,
            "A is a multiple of I",
        ))
    } else if let Some(l) = approx_scalar_identity(b.matrix()) {
        Some((
            a.matrix().scale(l),
            Method::TrivialEffect,
            "B is a multiple of I",
        ))
    } else if effect_leq_identity(&(a.matrix() + b.matrix()), DEFAULT_TOL)? {
        Some((CMatrix::zeros(d, d), Method::TrivialSum, "A + B ⪯ I"))
    } else if is_psd(&(a.matrix() - b.matrix()).hermitian_part(), DEFAULT_TOL)? {
        Some((b.matrix().clone(), Method::TrivialDiff, "B ⪯ A"))
    } else if is_psd(&(b.matrix() - a.matrix()).hermitian_part(), DEFAULT_TOL)? {
        Some((a.matrix().clone(), Method::TrivialDiff, "A ⪯ B"))
    } else {
        None
    };
    if let Some((g, method, note)) = fast {
        return effect_decision(a, b, &g, method, Evidence::note(note), settings.tol_feas);
    }

    let spec = effect_feasibility_spec(a, b, settings);
    let out = solve_feasibility(&spec)?;
    let evidence = Evidence {
        residual: out.residual,
        iterations: out.iterations,
        gap_estimate: out.gap_estimate,
        violated_constraint: out.violated_constraint.clone(),
        note: String::new(),
    };
    match out.status {
        FeasibilityStatus::Feasible => {
            let g = out.point.expect("feasible outcome carries a point");
            effect_decision(a, b, &g, Method::Solver, evidence, settings.tol_feas)
        }
        FeasibilityStatus::Infeasible => {
            Ok(CoexistenceDecision::infeasible(Method::Solver, evidence))
        }
        FeasibilityStatus::Undecided => Ok(CoexistenceDecision {
            verdict: Verdict::Undecided,
            method: Method::Solver,
            witness: None,
            observable: None,
            evidence,
        }),
    }
}

fn clamp_effect(m: &CMatrix) -> Result<Effect> {
    let clipped = m
        .hermitian_part()
        .herm_eig()?
        .map_spectrum(|x| x.clamp(0.0, 1.0));
    Effect::new(clipped)
}

fn effect_decision(
    a: &Effect,
    b: &Effect,
    g: &CMatrix,
    method: Method,
    evidence: Evidence,
    tol_feas: f64,
) -> Result<CoexistenceDecision> {
    let d = a.dim();
    let id = CMatrix::identity(d);
    let g1 = clamp_effect(g)?;
    let g2 = clamp_effect(&(a.matrix() - g))?;
    let g3 = clamp_effect(&(b.matrix() - g))?;
    let g4 = clamp_effect(&(&(&id - a.matrix()) - &(b.matrix() - g)))?;

    let rho0 = DensityState::maximally_mixed(d);
    let pa = Operation::preparator(a, &rho0)?;
    let pb = Operation::preparator(b, &rho0)?;
    let xi1 = rho0.matrix().tensor(&g.transpose()).scale(1.0 / d as f64);
    let witness = build_witness(&xi1, &pa, &pb, tol_feas)?;
    Ok(CoexistenceDecision {
        verdict: Verdict::Feasible,
        method,
        witness: Some(witness),
        observable: Some([g1, g2, g3, g4]),
        evidence,
    })
}

/// Exchanges the roles of the two arguments in a decision: outcomes 2 and 3
/// of the witness and of the observable.
fn swap_roles(dec: &mut CoexistenceDecision) -> Result<()> {
    if let Some(w) = dec.witness.take() {
        let mut outcomes = w.outcomes().to_vec();
        outcomes.swap(1, 2);
        outcomes[1].0 = "J2".into();
        outcomes[2].0 = "J3".into();
        dec.witness = Some(Instrument::new(outcomes, f64::INFINITY)?);
    }
    if let Some(obs) = dec.observable.as_mut() {
        obs.swap(1, 2);
    }
    Ok(())
}

/// The single-variable feasibility problem for `Ξ₁` described in the
/// module docs, with the sweep order `Ξ₁ ⪰ 0`, `Ξ₁ ⪯ Ξ_Φ`, `Ξ₁ ⪯ Ξ_Ψ`,
/// `tr₁Ξ₁ ⪰ tr₁(Ξ_Φ + Ξ_Ψ) − I/d`.
pub fn operation_feasibility_spec(
    phi: &Operation,
    psi: &Operation,
    settings: &SolverSettings,
) -> Result<FeasibilitySpec> {
    let d = same_dim(phi, psi)?;
    let n = d * d;
    let marginal = (phi.choi() + psi.choi()).partial_trace_first(d)?;
    let bound = &marginal - &CMatrix::identity(d).scale(1.0 / d as f64);
    Ok(FeasibilitySpec::new(n)
        .lower(CMatrix::zeros(n, n))
        .upper(phi.choi().clone())
        .upper(psi.choi().clone())
        .trace_bound(d, bound)
        .settings(*settings))
}

/// Completes a feasible `Ξ₁` to a four-outcome instrument
/// `J₁ = Ξ₁`, `J₂ = (Ξ_Φ − Ξ₁)₊`, `J₃ = (Ξ_Ψ − Ξ₁)₊`, and `J₄` the Lüders
/// operation of the residual effect `R = I − Σ_{k≤3} J_k*(I)`, so that the
/// total number of Kraus operators is at most `3d² + 1`.
///
/// Clipping can push `Σ_{k≤3} J_k*(I)` above `I` by rounding-size amounts;
/// the first three outcomes are then rescaled by `1/λ_max` so every outcome
/// is exactly valid. Errors with `InfeasiblePoint` when `xi1` violates the
/// constraints by more than `tol_feas` or the resulting margins exceed
/// `10·tol_feas`.
pub fn build_witness(
    xi1: &CMatrix,
    phi: &Operation,
    psi: &Operation,
    tol_feas: f64,
) -> Result<Instrument> {
    let d = same_dim(phi, psi)?;
    if xi1.rows() != d * d || xi1.cols() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "Ξ₁ must be {0}x{0}",
            d * d
        )));
    }
    let spec = operation_feasibility_spec(phi, psi, &SolverSettings::default())?;
    let (violation, _) = spec.violation(&xi1.hermitian_part())?;
    if violation > tol_feas {
        return Err(Error::InfeasiblePoint(violation));
    }

    let x1 = psd_part(&xi1.hermitian_part())?;
    let x2 = psd_part(&(phi.choi() - &x1))?;
    let x3 = psd_part(&(psi.choi() - &x1))?;
    let mut parts = [x1, x2, x3];

    let used = |parts: &[CMatrix; 3]| -> Result<CMatrix> {
        let total = &(&parts[0] + &parts[1]) + &parts[2];
        Ok(total
            .partial_trace_first(d)?
            .scale(d as f64)
            .transpose()
            .hermitian_part())
    };
    let mut s = used(&parts)?;
    let top = s.max_eigenvalue()?;
    if top > 1.0 {
        for p in parts.iter_mut() {
            *p = p.scale(1.0 / top);
        }
        s = used(&parts)?;
    }
    let residual = (&CMatrix::identity(d) - &s)
        .hermitian_part()
        .herm_eig()?
        .map_spectrum(|x| x.clamp(0.0, 1.0));
    let j4 = Operation::luders(&Effect::new(residual)?)?;

    let [x1, x2, x3] = parts;
    let outcomes = vec![
        ("J1".to_string(), Operation::from_choi(x1, d)?),
        ("J2".to_string(), Operation::from_choi(x2, d)?),
        ("J3".to_string(), Operation::from_choi(x3, d)?),
        ("J4".to_string(), j4),
    ];
    let inst = Instrument::new(outcomes, 10.0 * tol_feas)?;

    let (m_phi, m_psi) = witness_margins(&inst, phi, psi);
    let worst = m_phi.max(m_psi).max(inst.normalization_residual());
    if worst > 10.0 * tol_feas {
        return Err(Error::InfeasiblePoint(worst));
    }
    Ok(inst)
}

/// `(‖Ξ_{J₁} + Ξ_{J₂} − Ξ_Φ‖_F, ‖Ξ_{J₁} + Ξ_{J₃} − Ξ_Ψ‖_F)`
pub fn witness_margins(inst: &Instrument, phi: &Operation, psi: &Operation) -> (f64, f64) {
    let j1 = inst.operation(0).choi();
    let m_phi = (&(j1 + inst.operation(1).choi()) - phi.choi()).frobenius_norm();
    let m_psi = (&(j1 + inst.operation(2).choi()) - psi.choi()).frobenius_norm();
    (m_phi, m_psi)
}

fn is_rank_one_channel(op: &Operation) -> bool {
    op.kraus_rank() == 1
        && (op.induced_effect().matrix() - &CMatrix::identity(op.dim())).frobenius_norm()
            <= PROPORTIONAL_TOL
}

fn solver_decision(
    phi: &Operation,
    psi: &Operation,
    settings: &SolverSettings,
) -> Result<CoexistenceDecision> {
    let spec = operation_feasibility_spec(phi, psi, settings)?;
    let out = solve_feasibility(&spec)?;
    let mut evidence = Evidence {
        residual: out.residual,
        iterations: out.iterations,
        gap_estimate: out.gap_estimate,
        violated_constraint: out.violated_constraint.clone(),
        note: String::new(),
    };
    let verdict = match out.status {
        FeasibilityStatus::Feasible => {
            let xi1 = out.point.expect("feasible outcome carries a point");
            match build_witness(&xi1, phi, psi, settings.tol_feas) {
                Ok(w) => {
                    return Ok(CoexistenceDecision::feasible(Method::Solver, w, evidence));
                }
                Err(e) => {
                    evidence.note = format!("witness completion failed: {e}");
                    Verdict::Undecided
                }
            }
        }
        FeasibilityStatus::Infeasible => Verdict::Infeasible,
        FeasibilityStatus::Undecided => Verdict::Undecided,
    };
    Ok(CoexistenceDecision {
        verdict,
        method: Method::Solver,
        witness: None,
        observable: None,
        evidence,
    })
}

/// Decides coexistence of two operations.
///
/// `Auto` runs, in order: the effect-level necessary condition, the
/// trivial tests, the pure closed form, the unitary closed form and finally
/// the general solver. `ClosedFormOnly` skips every solver call and fails
/// with [`Error::NoClosedForm`] when no closed form applies. `SolverOnly`
/// goes straight to the solver. The verdict does not depend on argument
/// order.
pub fn operations_coexistent(
    phi: &Operation,
    psi: &Operation,
    strategy: Strategy,
    settings: &SolverSettings,
) -> Result<CoexistenceDecision> {
    same_dim(phi, psi)?;
    if canonical_cmp(phi.choi(), psi.choi()) == Ordering::Greater {
        let mut dec = decide_ordered(psi, phi, strategy, settings)?;
        swap_roles(&mut dec)?;
        return Ok(dec);
    }
    decide_ordered(phi, psi, strategy, settings)
}

fn decide_ordered(
    phi: &Operation,
    psi: &Operation,
    strategy: Strategy,
    settings: &SolverSettings,
) -> Result<CoexistenceDecision> {
    if strategy == Strategy::SolverOnly {
        return solver_decision(phi, psi, settings);
    }
    if strategy == Strategy::Auto {
        let eff = effects_coexistent(&phi.induced_effect(), &psi.induced_effect(), settings)?;
        if eff.verdict == Verdict::Infeasible {
            let mut evidence = eff.evidence;
            evidence.note = "induced effects are not coexistent".into();
            return Ok(CoexistenceDecision::infeasible(
                Method::EffectsNecessary,
                evidence,
            ));
        }
    }
    if let Some(dec) = trivially_coexistent(phi, psi)? {
        return Ok(dec);
    }
    let (r_phi, r_psi) = (phi.kraus_rank(), psi.kraus_rank());
    if r_phi == 1 && r_psi == 1 {
        return pure_coexistent(phi, psi);
    }
    for (chan, other, swapped) in [(phi, psi, false), (psi, phi, true)] {
        if is_rank_one_channel(chan) {
            let u = &chan.to_kraus()[0];
            let mut dec = unitary_coexistent(u, other)?;
            if swapped {
                swap_roles(&mut dec)?;
            }
            return Ok(dec);
        }
    }
    match strategy {
        Strategy::ClosedFormOnly => Err(Error::NoClosedForm),
        _ => solver_decision(phi, psi, settings),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eff(diag: &[f64]) -> Effect {
        Effect::new(CMatrix::from_diag(diag)).unwrap()
    }

    fn plus_projector() -> Effect {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Effect::new(CMatrix::outer(&[c(s, 0.0), c(s, 0.0)])).unwrap()
    }

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    fn check_witness(dec: &CoexistenceDecision, phi: &Operation, psi: &Operation) {
        let w = dec
            .witness
            .as_ref()
            .expect("feasible decisions carry a witness");
        assert_eq!(w.outcomes().len(), 4);
        let (a, b) = witness_margins(w, phi, psi);
        assert!(a <= 1e-6 && b <= 1e-6, "margins {a:e} {b:e}");
        assert!(w.normalization_residual() <= 1e-6);
        let d = phi.dim();
        assert!(w.kraus_count() <= 3 * d * d + 1);
    }

    #[test]
    fn sum_and_difference() {
        let la = Operation::luders(&eff(&[0.5, 0.0])).unwrap();
        let lb = Operation::luders(&eff(&[0.0, 0.5])).unwrap();
        assert!(is_sum_operation(&la, &lb).unwrap());
        let id = Operation::identity(2);
        assert!(!is_sum_operation(&id, &id).unwrap());
        assert!(is_sum_operation(&id, &Operation::null(2)).unwrap());

        let op =
            Operation::unitary_channel(&CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap())
                .unwrap()
                .scale(0.9)
                .unwrap();
        assert!(is_difference_operation(&op, &op.scale(0.4).unwrap()).unwrap());
        assert!(is_difference_operation(&op, &op).unwrap());

        let lp = Operation::luders(&plus_projector()).unwrap();
        assert!(!is_difference_operation(&id, &lp).unwrap());
        assert!(!is_difference_operation(&lp, &id).unwrap());
        assert!(!is_sum_operation(&id, &lp).unwrap());

        // A ⪰ B but not proportional
        let a = Operation::luders(&eff(&[0.9, 0.8])).unwrap();
        let b = Operation::luders(&eff(&[0.5, 0.1])).unwrap();
        assert!(!is_difference_operation(&a, &b).unwrap());

        let three = Operation::identity(3);
        assert!(matches!(
            is_sum_operation(&id, &three),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn trivial_examples() {
        let xi = DensityState::basis(2, 0);
        let pa = Operation::preparator(&eff(&[0.9, 0.6]), &xi).unwrap();
        let pb = Operation::preparator(&eff(&[0.5, 0.2]), &xi).unwrap();
        let dec = trivially_coexistent(&pa, &pb).unwrap().unwrap();
        assert_eq!(dec.method, Method::TrivialDiff);
        check_witness(&dec, &pa, &pb);

        let lp = Operation::luders(&plus_projector()).unwrap();
        assert!(trivially_coexistent(&lp, &Operation::identity(2))
            .unwrap()
            .is_none());

        let dec = trivially_coexistent(&pa, &Operation::null(2))
            .unwrap()
            .unwrap();
        check_witness(&dec, &pa, &Operation::null(2));
    }

    #[test]
    fn pure_examples() {
        let a = eff(&[0.8, 0.3]);
        let la = Operation::luders(&a).unwrap();
        let lb = Operation::luders(&Effect::new(a.matrix().scale(0.5)).unwrap()).unwrap();
        let dec = pure_coexistent(&la, &lb).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);
        check_witness(&dec, &la, &lb);

        let lp = Operation::luders(&plus_projector()).unwrap();
        let id = Operation::identity(2);
        assert_eq!(
            pure_coexistent(&lp, &id).unwrap().verdict,
            Verdict::Infeasible
        );

        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let ux = Operation::unitary_channel(&x).unwrap();
        assert_eq!(
            pure_coexistent(&ux, &id).unwrap().verdict,
            Verdict::Infeasible
        );
        // global phase does not matter
        let ix = Operation::unitary_channel(&x.scale_c(c(0.0, 1.0))).unwrap();
        assert_eq!(
            pure_coexistent(&ux, &ix).unwrap().verdict,
            Verdict::Feasible
        );

        let prep =
            Operation::preparator(&eff(&[0.5, 0.5]), &DensityState::maximally_mixed(2)).unwrap();
        assert!(matches!(
            pure_coexistent(&prep, &id),
            Err(Error::NotPure(4))
        ));
    }

    #[test]
    fn luders_examples() {
        let id = Effect::identity(2);
        let dec = luders_coexistent(&id, &id).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);
        assert_eq!(dec.method, Method::Luders);

        let dec = luders_coexistent(&eff(&[0.4, 0.1]), &eff(&[0.5, 0.8])).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);

        let dec = luders_coexistent(&plus_projector(), &id).unwrap();
        assert_eq!(dec.verdict, Verdict::Infeasible);

        let dec = luders_coexistent(&Effect::zero(2), &id).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);

        for (a, b) in [
            (id.clone(), id.clone()),
            (eff(&[0.4, 0.1]), eff(&[0.5, 0.8])),
            (plus_projector(), id.clone()),
            (eff(&[0.9, 0.6]), eff(&[0.3, 0.2])),
        ] {
            let closed = luders_closed_form(&a, &b).unwrap();
            let dec = luders_coexistent(&a, &b).unwrap();
            assert_eq!(closed, dec.verdict == Verdict::Feasible);
        }
    }

    #[test]
    fn unitary_examples() {
        let u = CMatrix::from_rows(&[
            vec![c(0.6, 0.0), c(0.0, 0.8)],
            vec![c(0.0, 0.8), c(0.6, 0.0)],
        ])
        .unwrap();
        let chan = Operation::unitary_channel(&u).unwrap();
        let dec = unitary_coexistent(&u, &chan.scale(0.3).unwrap()).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);
        check_witness(&dec, &chan, &chan.scale(0.3).unwrap());
        let w = dec.witness.unwrap();
        assert!((w.operation(0).choi().trace().re - 0.3).abs() < 1e-9);
        assert!((w.operation(1).choi().trace().re - 0.7).abs() < 1e-9);
        assert!(w.operation(2).choi().frobenius_norm() < 1e-9);
        assert!(w.operation(3).choi().frobenius_norm() < 1e-9);

        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let other = Operation::unitary_channel(&x).unwrap();
        assert_eq!(
            unitary_coexistent(&u, &other).unwrap().verdict,
            Verdict::Infeasible
        );

        let dec = unitary_coexistent(&u, &Operation::null(2)).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);
        assert!(matches!(
            unitary_coexistent(&CMatrix::from_diag(&[1.0, 0.5]), &other),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn effects_examples() {
        let s = settings();
        let half = Effect::new(CMatrix::identity(2).scale(0.5)).unwrap();
        let dec = effects_coexistent(&half, &plus_projector(), &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);
        assert_eq!(dec.method, Method::TrivialEffect);

        let dec = effects_coexistent(&eff(&[0.6, 0.3]), &eff(&[0.7, 0.5]), &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);

        let z = Effect::new(CMatrix::from_diag(&[1.0, 0.0])).unwrap();
        let dec = effects_coexistent(&plus_projector(), &z, &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Infeasible);
        assert!(dec.witness.is_none());
    }

    #[test]
    fn effect_observable_sums() {
        let s = settings();
        let a = Effect::new(
            CMatrix::from_rows(&[
                vec![c(0.7, 0.0), c(0.1, 0.05)],
                vec![c(0.1, -0.05), c(0.4, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let b = eff(&[0.5, 0.65]);
        let dec = effects_coexistent(&a, &b, &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Feasible);
        let [g1, g2, g3, g4] = dec.observable.unwrap();
        let sum_a = g1.matrix() + g2.matrix();
        let sum_b = g1.matrix() + g3.matrix();
        let total = &(&sum_a + g3.matrix()) + g4.matrix();
        assert!((&sum_a - a.matrix()).frobenius_norm() < 1e-6);
        assert!((&sum_b - b.matrix()).frobenius_norm() < 1e-6);
        assert!((&total - &CMatrix::identity(2)).frobenius_norm() < 1e-6);
    }

    #[test]
    fn witness_examples() {
        let phi = Operation::identity(2).scale(0.5).unwrap();
        let w = build_witness(phi.choi(), &phi, &phi, 1e-7).unwrap();
        assert!((w.operation(0).choi() - phi.choi()).frobenius_norm() < 1e-12);
        assert!(w.operation(1).choi().frobenius_norm() < 1e-12);
        assert!(w.operation(2).choi().frobenius_norm() < 1e-12);
        assert!(w.normalization_residual() < 1e-12);

        let la = Operation::luders(&eff(&[0.5, 0.1])).unwrap();
        let lb = Operation::luders(&eff(&[0.3, 0.6])).unwrap();
        let w = build_witness(&CMatrix::zeros(4, 4), &la, &lb, 1e-7).unwrap();
        assert!((w.operation(1).choi() - la.choi()).frobenius_norm() < 1e-12);
        assert!((w.operation(2).choi() - lb.choi()).frobenius_norm() < 1e-12);
        assert_eq!(w.operation(3).kraus_rank(), 1);

        let id = Operation::identity(2);
        assert!(matches!(
            build_witness(&CMatrix::zeros(4, 4), &id, &id, 1e-7),
            Err(Error::InfeasiblePoint(_))
        ));
    }

    #[test]
    fn pipeline_examples() {
        let s = settings();
        let lp = Operation::luders(&plus_projector()).unwrap();
        let id = Operation::identity(2);
        let dec = operations_coexistent(&lp, &id, Strategy::Auto, &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Infeasible);
        let dec = operations_coexistent(&lp, &id, Strategy::SolverOnly, &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Infeasible);
        assert_eq!(dec.method, Method::Solver);

        // preparators with distinct pure states and A + B ⋠ I
        let p0 = DensityState::basis(2, 0);
        let p1 = DensityState::pure(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let a = eff(&[0.7, 0.6]);
        let b = eff(&[0.5, 0.6]);
        let pa = Operation::preparator(&a, &p0).unwrap();
        let pb = Operation::preparator(&b, &p1).unwrap();
        let dec = operations_coexistent(&pa, &pb, Strategy::Auto, &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Infeasible);
        let dec = operations_coexistent(&pa, &pb, Strategy::SolverOnly, &s).unwrap();
        assert_eq!(dec.verdict, Verdict::Infeasible);

        // preparators with a common state and coexistent effects
        let a = Effect::new(
            CMatrix::from_rows(&[
                vec![c(0.7, 0.0), c(0.1, 0.05)],
                vec![c(0.1, -0.05), c(0.4, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let b = eff(&[0.5, 0.65]);
        let xi = DensityState::maximally_mixed(2);
        let pa = Operation::preparator(&a, &xi).unwrap();
        let pb = Operation::preparator(&b, &xi).unwrap();
        for strategy in [Strategy::Auto, Strategy::SolverOnly] {
            let dec = operations_coexistent(&pa, &pb, strategy, &s).unwrap();
            assert_eq!(dec.verdict, Verdict::Feasible, "{strategy:?}");
            check_witness(&dec, &pa, &pb);
        }

        for lambda in [0.0, 0.25, 0.5, 1.0] {
            let scaled = lp.scale(lambda).unwrap();
            let dec = operations_coexistent(&lp, &scaled, Strategy::Auto, &s).unwrap();
            assert_eq!(dec.verdict, Verdict::Feasible);
            check_witness(&dec, &lp, &scaled);
        }

        assert!(matches!(
            operations_coexistent(&lp, &Operation::identity(3), Strategy::Auto, &s),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn swapped_arguments_keep_witness_roles() {
        let s = settings();
        let phi = Operation::luders(&eff(&[0.5, 0.1])).unwrap();
        let psi = Operation::luders(&eff(&[0.3, 0.6])).unwrap();
        for (x, y) in [(&phi, &psi), (&psi, &phi)] {
            let dec = operations_coexistent(x, y, Strategy::Auto, &s).unwrap();
            check_witness(&dec, x, y);
            let dec = operations_coexistent(x, y, Strategy::SolverOnly, &s).unwrap();
            assert_eq!(dec.verdict, Verdict::Feasible);
            check_witness(&dec, x, y);
        }
    }

    #[test]
    fn closed_form_only_can_refuse() {
        let s = settings();
        let a = Effect::new(
            CMatrix::from_rows(&[
                vec![c(0.7, 0.0), c(0.1, 0.05)],
                vec![c(0.1, -0.05), c(0.4, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let xi = DensityState::maximally_mixed(2);
        let pa = Operation::preparator(&a, &xi).unwrap();
        let pb = Operation::preparator(&eff(&[0.5, 0.65]), &xi).unwrap();
        assert!(matches!(
            operations_coexistent(&pa, &pb, Strategy::ClosedFormOnly, &s),
            Err(Error::NoClosedForm)
        ));
    }
}
