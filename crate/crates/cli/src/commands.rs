//! Subcommand implementations. Each returns the text for standard output
//! and the exit code; `main` only does the printing.

use std::path::{Path, PathBuf};

use coexist::engine::witness_margins;
use coexist::model::ChoiReport;
use coexist::{
    effects_coexistent, operations_coexistent, CoexistenceDecision, Error, Instrument, Operation,
    SolverSettings, Strategy, Verdict, DEFAULT_TOL, PROB_FLOOR,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::doc::{
    self, detect_kind, instrument_document, matrix_to_json, parse, read_text, to_json,
    DocumentKind, EffectDocument, InstrumentDocument, Loader, MatrixJson, OperationDocument,
};
use crate::failure::{Failure, EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_UNDECIDED};

pub struct Output {
    pub stdout: String,
    pub code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: EXIT_FEASIBLE,
        }
    }
}

/// Options shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Options {
    pub settings: SolverSettings,
    pub strategy: Strategy,
    pub lenient: bool,
    pub effects_only: bool,
    pub witness: Option<PathBuf>,
}

impl Options {
    fn loader(&self) -> Loader {
        Loader::new(DEFAULT_TOL, self.lenient)
    }

    pub fn check(&self) -> Result<(), Failure> {
        let s = &self.settings;
        if !(s.tol_feas > 0.0 && s.tol_feas.is_finite()) {
            return Err(Failure::Parse(format!(
                "--tol-feas must be positive, got {}",
                s.tol_feas
            )));
        }
        if !(s.tol_infeas >= s.tol_feas && s.tol_infeas.is_finite()) {
            return Err(Failure::Parse(format!(
                "--tol-infeas must be at least --tol-feas, got {}",
                s.tol_infeas
            )));
        }
        if s.max_iter == 0 {
            return Err(Failure::Parse("--max-iter must be positive".into()));
        }
        if self.effects_only && self.strategy != Strategy::Auto {
            return Err(Failure::Parse(
                "--method applies to operation-level decisions only; drop it with --effects-only"
                    .into(),
            ));
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Parse(format!("{}: cannot write: {e}", path.display())))
}

/// Writes to `path` when given, otherwise returns the text for stdout.
fn emit(path: Option<&Path>, text: String) -> Result<String, Failure> {
    match path {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

// ---------------------------------------------------------------- validate

#[derive(Serialize)]
struct OperationReport {
    valid: bool,
    kind: &'static str,
    dim: usize,
    kraus_rank: usize,
    hermiticity_residual: f64,
    min_choi_eigenvalue: f64,
    /// `1 − λ_max(d·tr₁Ξ)`.
    trace_margin: f64,
    /// `‖d·tr₁Ξ − I‖_F`, zero for channels.
    channel_defect: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    repairs: Vec<String>,
}

fn operation_report(op: &Operation, repairs: Vec<String>) -> Result<OperationReport, Failure> {
    let r =
        ChoiReport::compute(op.choi(), op.dim()).map_err(|e| doc::library_failure("report", e))?;
    Ok(OperationReport {
        valid: true,
        kind: "operation",
        dim: op.dim(),
        kraus_rank: op.kraus_rank(),
        hermiticity_residual: r.hermiticity_residual,
        min_choi_eigenvalue: r.min_eigenvalue,
        trace_margin: r.trace_margin,
        channel_defect: r.channel_defect,
        repairs,
    })
}

#[derive(Serialize)]
struct SpectrumReport {
    valid: bool,
    kind: &'static str,
    dim: usize,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    trace: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    repairs: Vec<String>,
}

fn spectrum_report(
    kind: &'static str,
    m: &coexist::CMatrix,
    repairs: Vec<String>,
) -> Result<SpectrumReport, Failure> {
    let eig = m.herm_eig().map_err(|e| doc::library_failure(kind, e))?;
    Ok(SpectrumReport {
        valid: true,
        kind,
        dim: m.rows(),
        min_eigenvalue: eig.eigenvalues[0],
        max_eigenvalue: *eig.eigenvalues.last().expect("nonempty"),
        trace: m.trace().re,
        repairs,
    })
}

#[derive(Serialize)]
struct InstrumentReport {
    valid: bool,
    kind: &'static str,
    dim: usize,
    normalization_residual: f64,
    kraus_count: usize,
    outcomes: Vec<OutcomeReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    repairs: Vec<String>,
}

#[derive(Serialize)]
struct OutcomeReport {
    label: String,
    #[serde(flatten)]
    report: OperationReport,
}

/// Instruments are accepted when `d·tr₁Ω` is within this of the identity,
/// the tolerance witness completion guarantees.
fn normalization_tol(opts: &Options) -> f64 {
    10.0 * opts.settings.tol_feas
}

pub fn validate(input: &Path, opts: &Options) -> Result<Output, Failure> {
    let origin = input.display().to_string();
    let text = read_text(input)?;
    let mut loader = opts.loader();
    let report = match detect_kind(&text, &origin)? {
        DocumentKind::Operation => {
            let d: OperationDocument = parse(&text, &origin)?;
            let op = loader.operation_document(&d, &origin)?;
            to_json(&operation_report(&op, loader.repairs)?)
        }
        DocumentKind::State => {
            let rho = loader.state_file(input)?;
            to_json(&spectrum_report("state", rho.matrix(), loader.repairs)?)
        }
        DocumentKind::Effect => {
            let d: EffectDocument = parse(&text, &origin)?;
            let a = loader.effect_document(&d, &origin)?;
            to_json(&spectrum_report("effect", a.matrix(), loader.repairs)?)
        }
        DocumentKind::Instrument => {
            let d: InstrumentDocument = parse(&text, &origin)?;
            let inst = loader.instrument_document(&d, &origin, normalization_tol(opts))?;
            let outcomes = inst
                .outcomes()
                .iter()
                .map(|(label, op)| {
                    Ok(OutcomeReport {
                        label: label.clone(),
                        report: operation_report(op, Vec::new())?,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            to_json(&InstrumentReport {
                valid: true,
                kind: "instrument",
                dim: inst.dim(),
                normalization_residual: inst.normalization_residual(),
                kraus_count: inst.kraus_count(),
                outcomes,
                repairs: loader.repairs,
            })
        }
    };
    Ok(Output::ok(report))
}

// ----------------------------------------------------- convert, effect, apply

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Kraus,
    Choi,
}

pub fn convert(
    input: &Path,
    to: Form,
    output: Option<&Path>,
    opts: &Options,
) -> Result<Output, Failure> {
    let op = opts.loader().operation_file(input)?;
    let text = to_json(&doc::operation_document(&op, to == Form::Kraus));
    Ok(Output::ok(emit(output, text)?))
}

pub fn effect(input: &Path, output: Option<&Path>, opts: &Options) -> Result<Output, Failure> {
    let op = opts.loader().operation_file(input)?;
    let text = to_json(&doc::effect_document(&op.induced_effect()));
    Ok(Output::ok(emit(output, text)?))
}

/// `x` with 12 significant digits in positional notation.
pub fn significant_12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // The exponent after rounding to 12 digits, so 0.99999999999999 counts
    // as 1.
    let sci = format!("{x:.11e}");
    let magnitude: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if !(-6..12).contains(&magnitude) {
        return sci;
    }
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn apply(
    input: &Path,
    state: &Path,
    output: Option<&Path>,
    opts: &Options,
) -> Result<Output, Failure> {
    let mut loader = opts.loader();
    let op = loader.operation_file(input)?;
    let rho = loader.state_file(state)?;
    let app = op
        .apply(&rho)
        .map_err(|e| doc::library_failure("apply", e))?;
    let mut stdout = format!("probability {}\n", significant_12(app.probability));
    match &app.conditional {
        Some(cond) => stdout.push_str(&emit(output, to_json(&doc::state_document(cond)))?),
        None => eprintln!("no conditional state: probability is below {PROB_FLOOR:e}"),
    }
    Ok(Output::ok(stdout))
}

// ----------------------------------------------------------------- coexist

#[derive(Serialize)]
pub struct DecisionDocument {
    pub schema_version: &'static str,
    /// `operations`, or `effects` for `--effects-only`.
    pub level: &'static str,
    pub verdict: &'static str,
    pub method: &'static str,
    pub tolerances: Tolerances,
    pub iterations: usize,
    pub residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated_constraint: Option<String>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<InstrumentDocument>,
    /// Joint observable `G₁..G₄` for effect-level feasible decisions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Vec<MatrixJson>>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
pub struct Tolerances {
    pub tol_feas: f64,
    pub tol_infeas: f64,
    pub max_iter: usize,
    pub strategy: &'static str,
}

#[derive(Serialize)]
pub struct Residuals {
    /// Worst constraint violation of the solver point, or the fit residual
    /// of a closed form.
    pub residual: f64,
    pub gap_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
}

#[derive(Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub inputs: Vec<InputDigest>,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

fn digest(path: &Path) -> Result<InputDigest, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Parse(format!("{}: cannot read: {e}", path.display())))?;
    let hash = Sha256::digest(&bytes);
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::Auto => "auto",
        Strategy::ClosedFormOnly => "closed-form-only",
        Strategy::SolverOnly => "solver-only",
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Feasible => EXIT_FEASIBLE,
        Verdict::Infeasible => EXIT_INFEASIBLE,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

/// A decision ready to print, with its exit code and the witness (if any)
/// for `--witness`.
pub struct Decided {
    pub document: DecisionDocument,
    pub code: u8,
    pub witness: Option<Instrument>,
}

fn decision_document(
    dec: Option<&CoexistenceDecision>,
    level: &'static str,
    margins: Option<(f64, f64)>,
    opts: &Options,
    inputs: Vec<InputDigest>,
) -> DecisionDocument {
    let s = &opts.settings;
    let tolerances = Tolerances {
        tol_feas: s.tol_feas,
        tol_infeas: s.tol_infeas,
        max_iter: s.max_iter,
        strategy: strategy_name(opts.strategy),
    };
    let provenance = Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        inputs,
    };
    let Some(dec) = dec else {
        return DecisionDocument {
            schema_version: doc::SCHEMA_VERSION,
            level,
            verdict: Verdict::Undecided.as_str(),
            method: "none",
            tolerances,
            iterations: 0,
            residuals: Residuals {
                residual: 0.0,
                gap_estimate: 0.0,
                margin_a: None,
                margin_b: None,
                normalization: None,
            },
            violated_constraint: None,
            note: "no closed form applies to this pair".into(),
            witness: None,
            observable: None,
            provenance,
        };
    };
    let e = &dec.evidence;
    DecisionDocument {
        schema_version: doc::SCHEMA_VERSION,
        level,
        verdict: dec.verdict.as_str(),
        method: dec.method.as_str(),
        tolerances,
        iterations: e.iterations,
        residuals: Residuals {
            residual: e.residual,
            gap_estimate: e.gap_estimate,
            margin_a: margins.map(|m| m.0),
            margin_b: margins.map(|m| m.1),
            normalization: dec.witness.as_ref().map(Instrument::normalization_residual),
        },
        violated_constraint: e.violated_constraint.clone(),
        note: e.note.clone(),
        witness: dec.witness.as_ref().map(instrument_document),
        observable: dec
            .observable
            .as_ref()
            .map(|gs| gs.iter().map(|g| matrix_to_json(g.matrix())).collect()),
        provenance,
    }
}

/// Runs one coexistence decision on two files.
pub fn decide(a: &Path, b: &Path, opts: &Options) -> Result<Decided, Failure> {
    opts.check()?;
    let inputs = vec![digest(a)?, digest(b)?];
    let mut loader = opts.loader();
    if opts.effects_only {
        let ea = loader.effect_file(a)?;
        let eb = loader.effect_file(b)?;
        let dec = effects_coexistent(&ea, &eb, &opts.settings)
            .map_err(|e| doc::library_failure("coexist", e))?;
        let document = decision_document(Some(&dec), "effects", None, opts, inputs);
        return Ok(Decided {
            document,
            code: verdict_code(dec.verdict),
            witness: dec.witness,
        });
    }
    let phi = loader.operation_file(a)?;
    let psi = loader.operation_file(b)?;
    match operations_coexistent(&phi, &psi, opts.strategy, &opts.settings) {
        Ok(dec) => {
            let margins = dec.witness.as_ref().map(|w| witness_margins(w, &phi, &psi));
            let document = decision_document(Some(&dec), "operations", margins, opts, inputs);
            Ok(Decided {
                document,
                code: verdict_code(dec.verdict),
                witness: dec.witness,
            })
        }
        Err(Error::NoClosedForm) => Ok(Decided {
            document: decision_document(None, "operations", None, opts, inputs),
            code: EXIT_UNDECIDED,
            witness: None,
        }),
        Err(e) => Err(doc::library_failure("coexist", e)),
    }
}

pub fn coexist(a: &Path, b: &Path, opts: &Options) -> Result<Output, Failure> {
    let decided = decide(a, b, opts)?;
    if let Some(path) = &opts.witness {
        if let Some(w) = &decided.witness {
            write_file(path, &to_json(&instrument_document(w)))?;
        }
    }
    Ok(Output {
        stdout: to_json(&decided.document),
        code: decided.code,
    })
}

/// Runs every pair listed in `manifest` (two paths per line, relative to
/// the manifest's directory; `#` starts a comment) and prints a table.
/// A failing pair is reported in its row and does not stop the batch.
pub fn batch(manifest: &Path, opts: &Options) -> Result<Output, Failure> {
    opts.check()?;
    if opts.witness.is_some() {
        return Err(Failure::Parse(
            "--witness cannot be combined with --batch".into(),
        ));
    }
    let text = read_text(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    let mut first_failure = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let result = match fields.as_slice() {
            [a, b] => decide(&base.join(a), &base.join(b), opts)
                .map(|d| (a.to_string(), b.to_string(), d)),
            _ => Err(Failure::Parse(format!(
                "{}:{}: expected two paths",
                manifest.display(),
                lineno + 1
            ))),
        };
        let row = match result {
            Ok((a, b, d)) => format!(
                "{:<5} {:<11} {:<17} {:>10} {:>4}  {a} {b}",
                lineno + 1,
                d.document.verdict,
                d.document.method,
                d.document.iterations,
                d.code
            ),
            Err(f) => {
                first_failure.get_or_insert(f.exit_code());
                format!(
                    "{:<5} {:<11} {:<17} {:>10} {:>4}  {f}",
                    lineno + 1,
                    "error",
                    "-",
                    "-",
                    f.exit_code()
                )
            }
        };
        rows.push(row);
    }
    let mut stdout = format!(
        "{:<5} {:<11} {:<17} {:>10} {:>4}  {}\n",
        "line", "verdict", "method", "iterations", "exit", "inputs"
    );
    for row in rows {
        stdout.push_str(&row);
        stdout.push('\n');
    }
    Ok(Output {
        stdout,
        code: first_failure.unwrap_or(EXIT_FEASIBLE),
    })
}
