//! JSON documents read and written by the command-line tool, and the
//! loaders that turn them into validated library objects.
//!
//! Complex scalars are `[re, im]` pairs and matrices are row-major nested
//! arrays. Every document carries `schema_version` and unknown fields are
//! rejected.

use std::path::Path;

use coexist::model::ChoiReport;
use coexist::{CMatrix, Complex64, DensityState, Effect, Error, Instrument, Operation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const SCHEMA_VERSION: &str = "1";

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperationDocument {
    pub schema_version: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constructor: Option<Constructor>,
}

impl OperationDocument {
    pub fn body(&self) -> OperationBody {
        OperationBody {
            kraus: self.kraus.clone(),
            choi: self.choi.clone(),
            constructor: self.constructor.clone(),
        }
    }
}

/// Exactly one of the three representations, without the header; used for
/// operations nested in `scaled` constructors and instrument outcomes.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperationBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constructor: Option<Constructor>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Constructor {
    Luders {
        effect: MatrixJson,
    },
    Preparator {
        effect: MatrixJson,
        state: MatrixJson,
    },
    Unitary {
        unitary: MatrixJson,
    },
    Null {},
    Scaled {
        lambda: f64,
        operation: Box<OperationBody>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub schema_version: String,
    pub dim: usize,
    pub state: MatrixJson,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EffectDocument {
    pub schema_version: String,
    pub dim: usize,
    pub effect: MatrixJson,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentDocument {
    pub schema_version: String,
    pub dim: usize,
    pub outcomes: Vec<OutcomeDocument>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDocument {
    pub label: String,
    pub operation: OperationBody,
}

/// Which document a file holds, decided by its distinguishing field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentKind {
    Operation,
    State,
    Effect,
    Instrument,
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn operation_body(op: &Operation, kraus_form: bool) -> OperationBody {
    if kraus_form {
        // Constructors keep their exact Kraus operators; use them when the
        // set is already minimal instead of re-deriving it from the Choi
        // eigendecomposition.
        let kraus = match op.kraus_cache() {
            Some(cached) if cached.len() == op.kraus_rank() => cached.to_vec(),
            _ => op.to_kraus(),
        };
        OperationBody {
            kraus: Some(kraus.iter().map(matrix_to_json).collect()),
            ..OperationBody::default()
        }
    } else {
        OperationBody {
            choi: Some(matrix_to_json(op.choi())),
            ..OperationBody::default()
        }
    }
}

pub fn operation_document(op: &Operation, kraus_form: bool) -> OperationDocument {
    let body = operation_body(op, kraus_form);
    OperationDocument {
        schema_version: SCHEMA_VERSION.into(),
        dim: op.dim(),
        kraus: body.kraus,
        choi: body.choi,
        constructor: body.constructor,
    }
}

pub fn state_document(state: &DensityState) -> StateDocument {
    StateDocument {
        schema_version: SCHEMA_VERSION.into(),
        dim: state.dim(),
        state: matrix_to_json(state.matrix()),
    }
}

pub fn effect_document(effect: &Effect) -> EffectDocument {
    EffectDocument {
        schema_version: SCHEMA_VERSION.into(),
        dim: effect.dim(),
        effect: matrix_to_json(effect.matrix()),
    }
}

pub fn instrument_document(inst: &Instrument) -> InstrumentDocument {
    InstrumentDocument {
        schema_version: SCHEMA_VERSION.into(),
        dim: inst.dim(),
        outcomes: inst
            .outcomes()
            .iter()
            .map(|(label, op)| OutcomeDocument {
                label: label.clone(),
                operation: operation_body(op, true),
            })
            .collect(),
    }
}

/// Indented JSON with a trailing newline. Arrays nesting at most two levels
/// of numbers (a matrix row of `[re, im]` pairs) stay on one line, so each
/// matrix prints one row per line. Floats use the shortest decimal that
/// parses back to the same binary value.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("documents serialize");
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    out
}

fn numeric_depth(v: &serde_json::Value) -> Option<usize> {
    match v {
        serde_json::Value::Number(_) => Some(0),
        serde_json::Value::Array(items) => items
            .iter()
            .map(numeric_depth)
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
            .map(|d| d + 1),
        _ => None,
    }
}

fn write_value(out: &mut String, v: &serde_json::Value, indent: usize) {
    use serde_json::Value;
    let pad = |out: &mut String, n: usize| out.push_str(&"  ".repeat(n));
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if numeric_depth(v).is_some_and(|d| d <= 2) => {
            out.push_str(&serde_json::to_string(items).expect("numbers serialize"));
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("keys serialize"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("{}: cannot read: {e}", path.display())))
}

/// Strict deserialization with the JSON path and line/column of the first
/// problem in the message.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path == "." {
            String::new()
        } else {
            format!(" at `{path}`")
        };
        Failure::Parse(format!("{origin}{at}: {inner}"))
    })?;
    Ok(value)
}

pub fn detect_kind(text: &str, origin: &str) -> Result<DocumentKind, Failure> {
    let value: serde_json::Value = parse(text, origin)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Failure::Parse(format!("{origin}: expected a JSON object")))?;
    let kind = if obj.contains_key("outcomes") {
        DocumentKind::Instrument
    } else if obj.contains_key("state") {
        DocumentKind::State
    } else if obj.contains_key("effect") {
        DocumentKind::Effect
    } else {
        DocumentKind::Operation
    };
    Ok(kind)
}

fn check_version(version: &str, origin: &str) -> Result<(), Failure> {
    if version != SCHEMA_VERSION {
        return Err(Failure::Parse(format!(
            "{origin}: unsupported schema_version {version:?} (expected {SCHEMA_VERSION:?})"
        )));
    }
    Ok(())
}

/// Converts validated library errors to exit categories.
pub fn library_failure(context: &str, e: Error) -> Failure {
    match e {
        Error::DimensionMismatch(_) | Error::NotSquare(..) => {
            Failure::Dimension(format!("{context}: {e}"))
        }
        _ => Failure::Invalid(format!("{context}: {e}")),
    }
}

/// Loads documents into library objects, optionally repairing defects of
/// at most `10·tol` and recording each repair.
pub struct Loader {
    pub tol: f64,
    pub lenient: bool,
    pub repairs: Vec<String>,
}

impl Loader {
    pub fn new(tol: f64, lenient: bool) -> Self {
        Self {
            tol,
            lenient,
            repairs: Vec::new(),
        }
    }

    fn slack(&self) -> f64 {
        10.0 * self.tol
    }

    fn matrix(&self, m: &MatrixJson, dim: usize, field: &str) -> Result<CMatrix, Failure> {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        if m.iter().any(|r| r.len() != cols) {
            return Err(Failure::Parse(format!(
                "{field}: rows have different lengths"
            )));
        }
        if rows != dim || cols != dim {
            return Err(Failure::Dimension(format!(
                "{field}: expected {dim}x{dim}, got {rows}x{cols}"
            )));
        }
        let data = m
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        CMatrix::from_row_major(rows, cols, data).map_err(|e| library_failure(field, e))
    }

    pub fn operation_file(&mut self, path: &Path) -> Result<Operation, Failure> {
        let origin = path.display().to_string();
        let text = read_text(path)?;
        let doc: OperationDocument = parse(&text, &origin)?;
        self.operation_document(&doc, &origin)
    }

    pub fn operation_document(
        &mut self,
        doc: &OperationDocument,
        origin: &str,
    ) -> Result<Operation, Failure> {
        check_version(&doc.schema_version, origin)?;
        if doc.dim == 0 {
            return Err(Failure::Invalid(format!("{origin}: dim must be positive")));
        }
        self.operation_body(&doc.body(), doc.dim, origin)
    }

    pub fn operation_body(
        &mut self,
        body: &OperationBody,
        d: usize,
        field: &str,
    ) -> Result<Operation, Failure> {
        let present = [
            body.kraus.is_some(),
            body.choi.is_some(),
            body.constructor.is_some(),
        ];
        if present.iter().filter(|&&p| p).count() != 1 {
            return Err(Failure::Parse(format!(
                "{field}: exactly one of `kraus`, `choi`, `constructor` is required"
            )));
        }
        if let Some(kraus) = &body.kraus {
            let ops = kraus
                .iter()
                .enumerate()
                .map(|(i, m)| self.matrix(m, d, &format!("{field}.kraus[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if ops.is_empty() {
                return Ok(Operation::null(d));
            }
            return self.kraus_operation(ops, field);
        }
        if let Some(choi) = &body.choi {
            let m = self.matrix(choi, d * d, &format!("{field}.choi"))?;
            return self.choi_operation(m, d, field);
        }
        let ctor = body.constructor.as_ref().expect("checked above");
        let field = format!("{field}.constructor");
        match ctor {
            Constructor::Luders { effect } => {
                let a = self.effect_matrix(effect, d, &format!("{field}.effect"))?;
                Operation::luders(&a).map_err(|e| library_failure(&field, e))
            }
            Constructor::Preparator { effect, state } => {
                let a = self.effect_matrix(effect, d, &format!("{field}.effect"))?;
                let xi = self.state_matrix(state, d, &format!("{field}.state"))?;
                Operation::preparator(&a, &xi).map_err(|e| library_failure(&field, e))
            }
            Constructor::Unitary { unitary } => {
                let u = self.matrix(unitary, d, &format!("{field}.unitary"))?;
                self.unitary_operation(u, &field)
            }
            Constructor::Null {} => Ok(Operation::null(d)),
            Constructor::Scaled { lambda, operation } => {
                let inner = self.operation_body(operation, d, &format!("{field}.operation"))?;
                let mut lambda = *lambda;
                if self.lenient && !(0.0..=1.0).contains(&lambda) {
                    let clipped = lambda.clamp(0.0, 1.0);
                    if (clipped - lambda).abs() <= self.slack() {
                        self.repairs
                            .push(format!("{field}.lambda: clipped {lambda} to {clipped}"));
                        lambda = clipped;
                    }
                }
                inner
                    .scale(lambda)
                    .map_err(|e| library_failure(&format!("{field}.lambda"), e))
            }
        }
    }

    fn kraus_operation(&mut self, ops: Vec<CMatrix>, field: &str) -> Result<Operation, Failure> {
        match Operation::from_kraus_with_tol(ops.clone(), self.tol) {
            Err(Error::TraceBoundViolated(top)) if self.lenient && top <= 1.0 + self.slack() => {
                let factor = 1.0 / top.sqrt();
                self.repairs.push(format!(
                    "{field}.kraus: trace bound exceeded by {:.3e}, scaled operators by {factor}",
                    top - 1.0
                ));
                let scaled = ops.iter().map(|x| x.scale(factor)).collect();
                Operation::from_kraus_with_tol(scaled, self.tol)
                    .map_err(|e| library_failure(field, e))
            }
            other => other.map_err(|e| library_failure(field, e)),
        }
    }

    fn choi_operation(&mut self, m: CMatrix, d: usize, field: &str) -> Result<Operation, Failure> {
        let strict = Operation::from_choi_with_tol(m.clone(), d, self.tol);
        if strict.is_ok() || !self.lenient {
            return strict.map_err(|e| library_failure(field, e));
        }
        let report = ChoiReport::compute(&m, d).map_err(|e| library_failure(field, e))?;
        let scale = m.frobenius_norm().max(1.0);
        let slack = self.slack() * scale;
        if report.hermiticity_residual > slack
            || report.min_eigenvalue < -slack
            || report.trace_margin < -slack
        {
            return strict.map_err(|e| library_failure(field, e));
        }
        let eig = m
            .hermitian_part()
            .herm_eig()
            .map_err(|e| library_failure(field, e))?;
        let mut repaired = eig.map_spectrum(|x| x.max(0.0));
        let mut notes = Vec::new();
        if report.hermiticity_residual > 0.0 {
            notes.push(format!(
                "hermitized (residual {:.3e})",
                report.hermiticity_residual
            ));
        }
        if report.min_eigenvalue < 0.0 {
            notes.push(format!("clipped eigenvalue {:.3e}", report.min_eigenvalue));
        }
        let top = repaired
            .partial_trace_first(d)
            .map_err(|e| library_failure(field, e))?
            .scale(d as f64)
            .max_eigenvalue()
            .map_err(|e| library_failure(field, e))?;
        if top > 1.0 {
            repaired = repaired.scale(1.0 / top);
            notes.push(format!("scaled by 1/{top} to meet the trace bound"));
        }
        self.repairs
            .push(format!("{field}.choi: {}", notes.join(", ")));
        Operation::from_choi_with_tol(repaired, d, self.tol).map_err(|e| library_failure(field, e))
    }

    fn unitary_operation(&mut self, u: CMatrix, field: &str) -> Result<Operation, Failure> {
        match Operation::unitary_channel(&u) {
            Err(Error::NotUnitary(defect)) if self.lenient && defect <= self.slack() => {
                // Nearest unitary: the polar factor U·(U†U)^(-1/2).
                let gram = (&u.adjoint() * &u).hermitian_part();
                let inv_root = gram
                    .herm_eig()
                    .map_err(|e| library_failure(field, e))?
                    .map_spectrum(|x| 1.0 / x.sqrt());
                self.repairs.push(format!(
                    "{field}.unitary: replaced by its polar factor (defect {defect:.3e})"
                ));
                Operation::unitary_channel(&(&u * &inv_root)).map_err(|e| library_failure(field, e))
            }
            other => other.map_err(|e| library_failure(field, e)),
        }
    }

    pub fn effect_matrix(
        &mut self,
        m: &MatrixJson,
        d: usize,
        field: &str,
    ) -> Result<Effect, Failure> {
        let a = self.matrix(m, d, field)?;
        match Effect::with_tol(a.clone(), self.tol) {
            Err(e) if self.lenient => {
                let eig = a
                    .hermitian_part()
                    .herm_eig()
                    .map_err(|e| library_failure(field, e))?;
                let lo = eig.eigenvalues.first().copied().unwrap_or(0.0);
                let hi = eig.eigenvalues.last().copied().unwrap_or(0.0);
                if lo < -self.slack() || hi > 1.0 + self.slack() {
                    return Err(library_failure(field, e));
                }
                self.repairs.push(format!(
                    "{field}: clipped spectrum [{lo:.3e}, {hi}] into [0, 1]"
                ));
                Effect::with_tol(eig.map_spectrum(|x| x.clamp(0.0, 1.0)), self.tol)
                    .map_err(|e| library_failure(field, e))
            }
            other => other.map_err(|e| library_failure(field, e)),
        }
    }

    pub fn state_matrix(
        &mut self,
        m: &MatrixJson,
        d: usize,
        field: &str,
    ) -> Result<DensityState, Failure> {
        let rho = self.matrix(m, d, field)?;
        match DensityState::with_tol(rho.clone(), self.tol) {
            Err(e) if self.lenient => {
                let eig = rho
                    .hermitian_part()
                    .herm_eig()
                    .map_err(|e| library_failure(field, e))?;
                let lo = eig.eigenvalues.first().copied().unwrap_or(0.0);
                let tr: f64 = eig.eigenvalues.iter().sum();
                if lo < -self.slack() || (tr - 1.0).abs() > self.slack() {
                    return Err(library_failure(field, e));
                }
                let clipped = eig.map_spectrum(|x| x.max(0.0));
                let total = clipped.trace().re;
                self.repairs.push(format!(
                    "{field}: clipped eigenvalue {lo:.3e} and renormalized trace {tr}"
                ));
                DensityState::with_tol(clipped.scale(1.0 / total), self.tol)
                    .map_err(|e| library_failure(field, e))
            }
            other => other.map_err(|e| library_failure(field, e)),
        }
    }

    pub fn state_file(&mut self, path: &Path) -> Result<DensityState, Failure> {
        let origin = path.display().to_string();
        let doc: StateDocument = parse(&read_text(path)?, &origin)?;
        check_version(&doc.schema_version, &origin)?;
        self.state_matrix(&doc.state, doc.dim, &format!("{origin}: state"))
    }

    pub fn effect_document(
        &mut self,
        doc: &EffectDocument,
        origin: &str,
    ) -> Result<Effect, Failure> {
        check_version(&doc.schema_version, origin)?;
        self.effect_matrix(&doc.effect, doc.dim, &format!("{origin}: effect"))
    }

    /// Effect from either an effect document or the induced effect of an
    /// operation document.
    pub fn effect_file(&mut self, path: &Path) -> Result<Effect, Failure> {
        let origin = path.display().to_string();
        let text = read_text(path)?;
        match detect_kind(&text, &origin)? {
            DocumentKind::Effect => self.effect_document(&parse(&text, &origin)?, &origin),
            DocumentKind::Operation => {
                let doc: OperationDocument = parse(&text, &origin)?;
                Ok(self.operation_document(&doc, &origin)?.induced_effect())
            }
            other => Err(Failure::Parse(format!(
                "{origin}: expected an operation or effect document, found {other:?}"
            ))),
        }
    }

    /// Loads every outcome as an operation, then checks the sum.
    pub fn instrument_document(
        &mut self,
        doc: &InstrumentDocument,
        origin: &str,
        normalization_tol: f64,
    ) -> Result<Instrument, Failure> {
        check_version(&doc.schema_version, origin)?;
        if doc.outcomes.is_empty() {
            return Err(Failure::Invalid(format!(
                "{origin}: instrument has no outcomes"
            )));
        }
        let outcomes = doc
            .outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let field = format!("{origin}: outcomes[{i}] ({})", o.label);
                Ok((
                    o.label.clone(),
                    self.operation_body(&o.operation, doc.dim, &field)?,
                ))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        Instrument::new(outcomes, normalization_tol).map_err(|e| library_failure(origin, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Operation, Failure> {
        let doc: OperationDocument = parse(text, "test")?;
        Loader::new(1e-9, false).operation_document(&doc, "test")
    }

    #[test]
    fn parses_each_representation() {
        let kraus = r#"{"schema_version":"1","dim":1,"kraus":[[[[1,0]]]]}"#;
        assert_eq!(load(kraus).unwrap().dim(), 1);
        let choi = r#"{"schema_version":"1","dim":1,"choi":[[[0.5,0]]]}"#;
        assert!((load(choi).unwrap().choi()[(0, 0)].re - 0.5).abs() < 1e-15);
        let ctor = r#"{"schema_version":"1","dim":2,"constructor":{"kind":"null"}}"#;
        assert_eq!(load(ctor).unwrap().kraus_rank(), 0);
        let scaled = r#"{"schema_version":"1","dim":1,"constructor":{"kind":"scaled","lambda":0.25,
            "operation":{"kraus":[[[[1,0]]]]}}}"#;
        assert!((load(scaled).unwrap().choi()[(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_structural_problems() {
        let cases = [
            r#"{"schema_version":"1","dim":1}"#,
            r#"{"schema_version":"1","dim":1,"kraus":[[[[1,0]]]],"choi":[[[1,0]]]}"#,
            r#"{"schema_version":"1","dim":1,"kraus":[[[[1,0]]]],"extra":1}"#,
            r#"{"schema_version":"2","dim":1,"kraus":[[[[1,0]]]]}"#,
            r#"{"dim":1,"kraus":[[[[1,0]]]]}"#,
            r#"{"schema_version":"1","dim":1,"constructor":{"kind":"null","effect":[]}}"#,
            r#"{"schema_version":"1","dim":1,"constructor":{"kind":"bogus"}}"#,
            r#"{"schema_version":"1","dim":1,"kraus":[[[[1,0,0]]]]}"#,
        ];
        for text in cases {
            assert!(matches!(load(text), Err(Failure::Parse(_))), "{text}");
        }
    }

    #[test]
    fn dimension_and_validity_errors() {
        let wrong_size = r#"{"schema_version":"1","dim":2,"kraus":[[[[1,0]]]]}"#;
        assert!(matches!(load(wrong_size), Err(Failure::Dimension(_))));
        let too_big = r#"{"schema_version":"1","dim":1,"kraus":[[[[1.5,0]]]]}"#;
        assert!(matches!(load(too_big), Err(Failure::Invalid(_))));
    }

    #[test]
    fn lenient_repairs_small_defects_only() {
        let text = r#"{"schema_version":"1","dim":1,"kraus":[[[[1.000000001,0]]]]}"#;
        let doc: OperationDocument = parse(text, "t").unwrap();
        let mut strict = Loader::new(1e-9, false);
        assert!(strict.operation_document(&doc, "t").is_err());
        let mut lenient = Loader::new(1e-9, true);
        assert!(lenient.operation_document(&doc, "t").is_ok());
        assert_eq!(lenient.repairs.len(), 1);

        let text = r#"{"schema_version":"1","dim":1,"kraus":[[[[1.001,0]]]]}"#;
        let doc: OperationDocument = parse(text, "t").unwrap();
        assert!(Loader::new(1e-9, true)
            .operation_document(&doc, "t")
            .is_err());
    }

    #[test]
    fn documents_round_trip_through_json() {
        let op = Operation::luders(&Effect::new(CMatrix::from_diag(&[0.3, 0.9])).unwrap()).unwrap();
        for kraus_form in [true, false] {
            let text = to_json(&operation_document(&op, kraus_form));
            let back = load(&text).unwrap();
            assert!((back.choi() - op.choi()).frobenius_norm() < 1e-15);
        }
    }
}
