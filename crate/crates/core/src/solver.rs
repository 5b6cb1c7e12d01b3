//! Feasibility of PSD-order constraint systems by cyclic Dykstra projections.
//!
//! The variable is a Hermitian `n×n` matrix `X` subject to
//!
//! * lower bounds `X ⪰ L_i`,
//! * upper bounds `X ⪯ U_j`,
//! * optionally a partial-trace bound `tr₁X ⪰ M` (with `n = d²`).
//!
//! Every set has a closed-form Frobenius projection. When some `U_j − L_i`
//! is singular, `X − L_i` is confined to the face of the cone supported on
//! `range(U_j − L_i)`; those faces are added as extra affine sets so the
//! cyclic sweep does not crawl along a tangential intersection.

use crate::error::{Error, Result};
use crate::linalg::{psd_part, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// A point whose worst violation is at most this is accepted.
    pub tol_feas: f64,
    /// A stalled violation above this is reported as infeasible.
    pub tol_infeas: f64,
    pub max_iter: usize,
    /// Length in cycles of the trailing windows compared for stall detection.
    pub window: usize,
    /// Relative change between consecutive windows below which the
    /// violation counts as stalled.
    pub stall_rel: f64,
    /// Relative eigenvalue cutoff when detecting singular gaps `U_j − L_i`.
    pub face_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_feas: 1e-7,
            tol_infeas: 1e-5,
            max_iter: 20_000,
            window: 200,
            stall_rel: 1e-3,
            face_tol: 1e-9,
        }
    }
}

/// `tr₁X ⪰ lower` for `X` acting on `C^d ⊗ C^d`.
#[derive(Clone, Debug)]
pub struct TraceBound {
    pub d: usize,
    pub lower: CMatrix,
}

#[derive(Clone, Debug)]
pub struct FeasibilitySpec {
    pub dim: usize,
    pub lower: Vec<CMatrix>,
    pub upper: Vec<CMatrix>,
    pub trace_bound: Option<TraceBound>,
    pub settings: SolverSettings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct FeasibilityOutcome {
    pub status: FeasibilityStatus,
    /// Accepted point, present iff `Feasible`.
    pub point: Option<CMatrix>,
    /// Worst constraint violation of the final iterate.
    pub residual: f64,
    pub iterations: usize,
    /// Estimated distance between the constraint sets (0 when feasible).
    pub gap_estimate: f64,
    /// Label of the constraint with the largest violation at exit.
    pub violated_constraint: Option<String>,
}

impl FeasibilitySpec {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            lower: Vec::new(),
            upper: Vec::new(),
            trace_bound: None,
            settings: SolverSettings::default(),
        }
    }

    pub fn lower(mut self, m: CMatrix) -> Self {
        self.lower.push(m);
        self
    }

    pub fn upper(mut self, m: CMatrix) -> Self {
        self.upper.push(m);
        self
    }

    pub fn trace_bound(mut self, d: usize, lower: CMatrix) -> Self {
        self.trace_bound = Some(TraceBound { d, lower });
        self
    }

    pub fn settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::MalformedSpec("zero dimension".into()));
        }
        for (name, m) in self
            .lower
            .iter()
            .map(|m| ("lower bound", m))
            .chain(self.upper.iter().map(|m| ("upper bound", m)))
        {
            if m.rows() != n || m.cols() != n {
                return Err(Error::MalformedSpec(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_hermitian(crate::linalg::TOL_HERM) {
                return Err(Error::MalformedSpec(format!("{name} is not Hermitian")));
            }
        }
        if let Some(tb) = &self.trace_bound {
            if tb.d * tb.d != n || tb.lower.rows() != tb.d || tb.lower.cols() != tb.d {
                return Err(Error::MalformedSpec(format!(
                    "partial-trace bound of size {}x{} does not fit a {n}x{n} variable",
                    tb.lower.rows(),
                    tb.lower.cols()
                )));
            }
            if !tb.lower.is_hermitian(crate::linalg::TOL_HERM) {
                return Err(Error::MalformedSpec(
                    "partial-trace bound is not Hermitian".into(),
                ));
            }
        }
        let s = &self.settings;
        if !(s.tol_feas > 0.0 && s.tol_infeas > 0.0 && s.window > 0 && s.stall_rel > 0.0) {
            return Err(Error::MalformedSpec(
                "non-positive tolerance or window".into(),
            ));
        }
        Ok(())
    }

    /// Worst violation of `x` over the stated constraints, with the label of
    /// the worst one.
    pub fn violation(&self, x: &CMatrix) -> Result<(f64, Option<String>)> {
        let sets = self.base_sets();
        worst_violation(&sets, x)
    }

    fn base_sets(&self) -> Vec<ConstraintSet> {
        let mut sets = Vec::new();
        for (i, l) in self.lower.iter().enumerate() {
            sets.push(ConstraintSet::Lower {
                label: format!("lower[{i}]"),
                bound: l.hermitian_part(),
            });
        }
        for (j, u) in self.upper.iter().enumerate() {
            sets.push(ConstraintSet::Upper {
                label: format!("upper[{j}]"),
                bound: u.hermitian_part(),
            });
        }
        if let Some(tb) = &self.trace_bound {
            sets.push(ConstraintSet::PartialTrace {
                label: "partial-trace".into(),
                d: tb.d,
                bound: tb.lower.hermitian_part(),
            });
        }
        sets
    }
}

enum ConstraintSet {
    /// `X − shift = Π(X − shift)Π`
    Face {
        label: String,
        shift: CMatrix,
        projector: CMatrix,
    },
    Lower {
        label: String,
        bound: CMatrix,
    },
    Upper {
        label: String,
        bound: CMatrix,
    },
    PartialTrace {
        label: String,
        d: usize,
        bound: CMatrix,
    },
}

impl ConstraintSet {
    fn label(&self) -> &str {
        match self {
            Self::Face { label, .. }
            | Self::Lower { label, .. }
            | Self::Upper { label, .. }
            | Self::PartialTrace { label, .. } => label,
        }
    }

    fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        Ok(match self {
            Self::Face {
                shift, projector, ..
            } => {
                let y = x - shift;
                &(&(projector * &y) * projector) + shift
            }
            Self::Lower { bound, .. } => bound + &psd_part(&(x - bound))?,
            Self::Upper { bound, .. } => bound - &psd_part(&(bound - x))?,
            Self::PartialTrace { d, bound, .. } => {
                // Nearest X' with tr₁X' ⪰ M is X + (1/d)·I ⊗ D, D = (M − tr₁X)₊.
                let k = bound - &x.partial_trace_first(*d)?;
                let correction = psd_part(&k)?;
                x + &CMatrix::identity(*d)
                    .tensor(&correction)
                    .scale(1.0 / *d as f64)
            }
        })
    }

    fn violation(&self, x: &CMatrix) -> Result<f64> {
        Ok(match self {
            Self::Face {
                shift, projector, ..
            } => {
                let y = x - shift;
                (&y - &(&(projector * &y) * projector)).frobenius_norm()
            }
            Self::Lower { bound, .. } => (-(x - bound).hermitian_part().min_eigenvalue()?).max(0.0),
            Self::Upper { bound, .. } => (-(bound - x).hermitian_part().min_eigenvalue()?).max(0.0),
            Self::PartialTrace { d, bound, .. } => {
                let t = &x.partial_trace_first(*d)? - bound;
                (-t.hermitian_part().min_eigenvalue()?).max(0.0)
            }
        })
    }
}

fn worst_violation(sets: &[ConstraintSet], x: &CMatrix) -> Result<(f64, Option<String>)> {
    let mut worst = 0.0;
    let mut label = None;
    for s in sets {
        let v = s.violation(x)?;
        if v > worst {
            worst = v;
            label = Some(s.label().to_string());
        }
    }
    Ok((worst, label))
}

/// Runs cyclic Dykstra projections from the zero matrix.
///
/// Sweep order: faces, lower bounds, upper bounds, partial-trace bound.
/// Feasible as soon as the worst violation of the iterate drops to
/// `tol_feas`; infeasible when the violation averaged over the last
/// `window` cycles is above `tol_infeas` and has changed by less than
/// `stall_rel` relative to the window before; undecided at `max_iter`.
pub fn solve_feasibility(spec: &FeasibilitySpec) -> Result<FeasibilityOutcome> {
    spec.validate()?;
    let s = spec.settings;
    let n = spec.dim;
    let base = spec.base_sets();

    // Pairwise gaps between lower and upper bounds are necessary conditions
    // and also reveal faces the iterate is confined to.
    let mut faces = Vec::new();
    for (i, l) in spec.lower.iter().enumerate() {
        let mut face: Option<CMatrix> = None;
        for (j, u) in spec.upper.iter().enumerate() {
            let gap = (u - l).hermitian_part();
            let eig = gap.herm_eig()?;
            let lo = eig.eigenvalues[0];
            if lo < -s.tol_infeas {
                return Ok(FeasibilityOutcome {
                    status: FeasibilityStatus::Infeasible,
                    point: None,
                    residual: -lo,
                    iterations: 0,
                    gap_estimate: -lo,
                    violated_constraint: Some(format!("upper[{j}] ⋡ lower[{i}]")),
                });
            }
            let cutoff = s.face_tol * gap.frobenius_norm().max(1.0);
            if eig.eigenvalues.iter().any(|&x| x <= cutoff) {
                let p = eig.range_projector(cutoff);
                face = Some(match face {
                    None => p,
                    Some(q) => range_intersection(&q, &p)?,
                });
            }
        }
        if let Some(projector) = face {
            faces.push(ConstraintSet::Face {
                label: format!("face[{i}]"),
                shift: l.hermitian_part(),
                projector,
            });
        }
    }
    if let (Some(tb), false) = (&spec.trace_bound, spec.upper.is_empty()) {
        for (j, u) in spec.upper.iter().enumerate() {
            let t = &u.partial_trace_first(tb.d)? - &tb.lower;
            let lo = t.hermitian_part().min_eigenvalue()?;
            if lo < -s.tol_infeas {
                return Ok(FeasibilityOutcome {
                    status: FeasibilityStatus::Infeasible,
                    point: None,
                    residual: -lo,
                    iterations: 0,
                    gap_estimate: -lo,
                    violated_constraint: Some(format!("partial-trace ⋡ upper[{j}]")),
                });
            }
        }
    }

    let mut sets = faces;
    sets.extend(base);

    let mut x = CMatrix::zeros(n, n);
    let (v0, label0) = worst_violation(&sets, &x)?;
    if v0 <= s.tol_feas {
        return Ok(FeasibilityOutcome {
            status: FeasibilityStatus::Feasible,
            point: Some(x),
            residual: v0,
            iterations: 0,
            gap_estimate: 0.0,
            violated_constraint: label0,
        });
    }

    let mut increments = vec![CMatrix::zeros(n, n); sets.len()];
    let mut history: Vec<f64> = Vec::with_capacity(s.max_iter.min(1 << 16));
    let mut last = (v0, label0);
    for iter in 1..=s.max_iter {
        for (set, inc) in sets.iter().zip(increments.iter_mut()) {
            let z = &x + inc;
            let p = set.project(&z)?;
            *inc = &z - &p;
            x = p;
        }
        last = worst_violation(&sets, &x)?;
        let v = last.0;
        if v <= s.tol_feas {
            let (point, residual, extra) = polish(&sets, &mut increments, x, v, iter, s.tol_feas)?;
            return Ok(FeasibilityOutcome {
                status: FeasibilityStatus::Feasible,
                point: Some(point.hermitian_part()),
                residual,
                iterations: iter + extra,
                gap_estimate: 0.0,
                violated_constraint: None,
            });
        }
        history.push(v);
        let w = s.window;
        if history.len() >= 2 * w {
            let h = history.len();
            let recent = history[h - w..].iter().sum::<f64>() / w as f64;
            let prev = history[h - 2 * w..h - w].iter().sum::<f64>() / w as f64;
            if recent > s.tol_infeas && (recent - prev).abs() <= s.stall_rel * prev {
                return Ok(FeasibilityOutcome {
                    status: FeasibilityStatus::Infeasible,
                    point: None,
                    residual: v,
                    iterations: iter,
                    gap_estimate: recent,
                    violated_constraint: last.1,
                });
            }
        }
    }
    Ok(FeasibilityOutcome {
        status: FeasibilityStatus::Undecided,
        point: None,
        residual: last.0,
        iterations: s.max_iter,
        gap_estimate: last.0,
        violated_constraint: last.1,
    })
}

/// Once feasibility is reached, keeps cycling for up to `iter` more cycles
/// (at least 50) and returns the least-violating point seen. A witness built
/// from a point at the edge of `tol_feas` would carry that violation into its
/// margins; a few more cycles usually shrink it by orders of magnitude.
fn polish(
    sets: &[ConstraintSet],
    increments: &mut [CMatrix],
    mut x: CMatrix,
    v: f64,
    iter: usize,
    tol_feas: f64,
) -> Result<(CMatrix, f64, usize)> {
    let target = 1e-3 * tol_feas;
    let budget = iter.max(50);
    let (mut best, mut best_v) = (x.clone(), v);
    let mut extra = 0;
    while best_v > target && extra < budget {
        for (set, inc) in sets.iter().zip(increments.iter_mut()) {
            let z = &x + inc;
            let p = set.project(&z)?;
            *inc = &z - &p;
            x = p;
        }
        extra += 1;
        let (v, _) = worst_violation(sets, &x)?;
        if v < best_v {
            best_v = v;
            best = x.clone();
        }
    }
    Ok((best, best_v, extra))
}

/// Projector onto `range(P) ∩ range(Q)` for orthogonal projectors `P`, `Q`:
/// the eigenspace of `P + Q` at eigenvalue 2.
pub fn range_intersection(p: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let eig = (p + q).hermitian_part().herm_eig()?;
    Ok(eig.range_projector(2.0 - 1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_already_feasible() {
        let spec = FeasibilitySpec::new(4)
            .lower(CMatrix::zeros(4, 4))
            .upper(CMatrix::from_diag(&[0.1, 0.2, 0.3, 0.4]))
            .upper(CMatrix::identity(4))
            .trace_bound(2, CMatrix::identity(2).scale(-0.5));
        let out = solve_feasibility(&spec).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Feasible);
        assert!(out.iterations <= 1);
        assert_eq!(out.point.unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn crossing_bounds_are_infeasible() {
        let spec = FeasibilitySpec::new(2)
            .lower(CMatrix::from_diag(&[0.5, 0.0]))
            .upper(CMatrix::from_diag(&[0.2, 1.0]));
        let out = solve_feasibility(&spec).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Infeasible);
        assert!((out.gap_estimate - 0.3).abs() < 1e-12);
    }

    #[test]
    fn box_with_room_is_feasible() {
        // 0.3 ⪯ X ⪯ 0.8·I plus a non-commuting upper bound
        let u = CMatrix::from_rows(&[
            vec![c(0.9, 0.0), c(0.2, 0.1)],
            vec![c(0.2, -0.1), c(0.6, 0.0)],
        ])
        .unwrap();
        let spec = FeasibilitySpec::new(2)
            .lower(CMatrix::identity(2).scale(0.3))
            .upper(CMatrix::identity(2).scale(0.8))
            .upper(u);
        let out = solve_feasibility(&spec).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Feasible);
        let (v, _) = spec.violation(out.point.as_ref().unwrap()).unwrap();
        assert!(v <= 1e-7);
    }

    #[test]
    fn partial_trace_projection_hits_the_set() {
        let d = 2;
        let x = CMatrix::from_diag(&[0.1, 0.0, 0.0, 0.05]);
        let m = CMatrix::from_rows(&[
            vec![c(0.4, 0.0), c(0.1, 0.05)],
            vec![c(0.1, -0.05), c(-0.2, 0.0)],
        ])
        .unwrap();
        let set = ConstraintSet::PartialTrace {
            label: String::new(),
            d,
            bound: m,
        };
        let p = set.project(&x).unwrap();
        assert!(set.violation(&p).unwrap() < 1e-12);
        // projecting twice changes nothing
        let pp = set.project(&p).unwrap();
        assert!((&pp - &p).frobenius_norm() < 1e-12);
    }

    /// Brute-force nearest point over real-symmetric perturbations
    /// X + (1/d)·I ⊗ D is not assumed: search all real 4×4 symmetric
    /// corrections along a coarse grid and compare distances.
    #[test]
    fn partial_trace_projection_is_nearest_on_a_grid() {
        let d = 2;
        let x = CMatrix::from_real(
            4,
            4,
            &[
                0.2, 0.0, 0.1, 0.0, //
                0.0, 0.1, 0.0, 0.0, //
                0.1, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.1,
            ],
        )
        .unwrap();
        let m = CMatrix::from_real(2, 2, &[0.5, 0.1, 0.1, 0.0]).unwrap();
        let set = ConstraintSet::PartialTrace {
            label: String::new(),
            d,
            bound: m.clone(),
        };
        let p = set.project(&x).unwrap();
        let best = (&p - &x).frobenius_norm();

        // Any feasible X' differs from X by Δ with tr₁Δ ⪰ K := M − tr₁X.
        // ‖Δ‖ ≥ ‖tr₁Δ‖/√d, so scan Hermitian real E = tr₁Δ on a grid and
        // take the cheapest lift Δ = (1/d)·I ⊗ E.
        let k = &m - &x.partial_trace_first(d).unwrap();
        let mut brute = f64::INFINITY;
        let steps = 81;
        let span = |i: usize| -0.2 + 0.8 * i as f64 / (steps - 1) as f64;
        for a in 0..steps {
            for b in 0..steps {
                for e in 0..steps {
                    let cand =
                        CMatrix::from_real(2, 2, &[span(a), span(b), span(b), span(e)]).unwrap();
                    let slack = &cand - &k;
                    let tr = slack[(0, 0)].re + slack[(1, 1)].re;
                    let det = slack[(0, 0)].re * slack[(1, 1)].re - slack[(0, 1)].norm_sqr();
                    if tr >= 0.0 && det >= 0.0 {
                        brute = brute.min(cand.frobenius_norm() / (d as f64).sqrt());
                    }
                }
            }
        }
        assert!(best <= brute + 1e-12, "closed form {best} vs grid {brute}");
        assert!(brute - best < 0.02, "grid optimum {brute} far from {best}");
    }

    #[test]
    fn malformed_specs_rejected() {
        let spec = FeasibilitySpec::new(2).upper(CMatrix::identity(3));
        assert!(matches!(
            solve_feasibility(&spec),
            Err(Error::MalformedSpec(_))
        ));
        let spec = FeasibilitySpec::new(4).trace_bound(3, CMatrix::identity(3));
        assert!(matches!(
            solve_feasibility(&spec),
            Err(Error::MalformedSpec(_))
        ));
        let nh = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let spec = FeasibilitySpec::new(2).lower(nh);
        assert!(matches!(
            solve_feasibility(&spec),
            Err(Error::MalformedSpec(_))
        ));
    }

    #[test]
    fn face_intersection() {
        let p = CMatrix::from_diag(&[1.0, 1.0, 0.0]);
        let q = CMatrix::from_diag(&[0.0, 1.0, 1.0]);
        let r = range_intersection(&p, &q).unwrap();
        assert!((&r - &CMatrix::from_diag(&[0.0, 1.0, 0.0])).frobenius_norm() < 1e-12);
    }
}
