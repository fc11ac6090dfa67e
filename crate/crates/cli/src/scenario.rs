//! Scenario files: a task name, a task-specific payload and free-form metadata.

use std::fmt;
use std::path::Path;

use revtherm_core::linalg::{c64, CMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Classify,
    EntropyDecompose,
    ImplementsCheck,
    Landauer,
    ThermoCheck,
    CtoCheck,
    GkslEvolve,
    GkslAsymptotic,
    AdiabaticSweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::EntropyDecompose => "entropy-decompose",
            Task::ImplementsCheck => "implements-check",
            Task::Landauer => "landauer",
            Task::ThermoCheck => "thermo-check",
            Task::CtoCheck => "cto-check",
            Task::GkslEvolve => "gksl-evolve",
            Task::GkslAsymptotic => "gksl-asymptotic",
            Task::AdiabaticSweep => "adiabatic-sweep",
        }
    }
}

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Ok = 0,
    MissingFile = 1,
    MalformedJson = 2,
    Schema = 3,
    CheckFailed = 4,
    NumericHealth = 5,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub status: ExitStatus,
    pub message: String,
}

impl Failure {
    pub fn new(status: ExitStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    pub fn schema(path: &str, message: impl fmt::Display) -> Self {
        Self::new(ExitStatus::Schema, format!("schema violation at {path}: {message}"))
    }

    /// Core errors raised while validating inputs found at `path`.
    pub fn from_core(path: &str, err: revtherm_core::Error) -> Self {
        use revtherm_core::Error;
        match err {
            Error::NumericHealth(_) | Error::NonDiagonalizable { .. } => {
                Self::new(ExitStatus::NumericHealth, format!("numeric health failure in {path}: {err}"))
            }
            Error::Shape(_) | Error::Contract(_) => Self::schema(path, err),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Lets `?` attach a field path to core errors.
pub trait AtPath<T> {
    fn at(self, path: &str) -> Outcome<T>;
}

impl<T> AtPath<T> for revtherm_core::Result<T> {
    fn at(self, path: &str) -> Outcome<T> {
        self.map_err(|e| Failure::from_core(path, e))
    }
}

/// Complex matrix as nested row-major arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn decode(&self, path: &str) -> Outcome<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Failure::schema(path, "matrix is empty"));
        }
        if let Some(r) = self.0.iter().position(|row| row.len() != cols) {
            return Err(Failure::schema(&format!("{path}[{r}]"), format!("row has {} entries, expected {cols}", self.0[r].len())));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| c64(self.0[i][j][0], self.0[i][j][1])))
    }

    pub fn encode(m: &CMatrix) -> Self {
        Self((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }
}

/// A classical operation: a deterministic map or explicit transition rows.
/// `null` entries leave the operation undefined on that input.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpJson {
    pub n_out: usize,
    #[serde(default)]
    pub map: Option<Vec<Option<usize>>>,
    #[serde(default)]
    pub rows: Option<Vec<Option<Vec<f64>>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyPayload {
    pub op: OpJson,
    #[serde(default)]
    pub input: Option<Vec<f64>>,
    #[serde(default)]
    pub support: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyDecomposePayload {
    pub state: MatrixJson,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplementsPayload {
    pub unitary: MatrixJson,
    pub blocks_in: Vec<Vec<usize>>,
    pub blocks_out: Vec<Vec<usize>>,
    pub op: OpJson,
    pub state: MatrixJson,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentJson {
    pub hamiltonian: MatrixJson,
    pub temperature: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedStateJson {
    pub probability: f64,
    pub state: MatrixJson,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandauerPayload {
    pub environment: EnvironmentJson,
    pub states: Vec<WeightedStateJson>,
    pub target: MatrixJson,
    #[serde(default)]
    pub unitary: Option<MatrixJson>,
    #[serde(default)]
    pub conditional_unitaries: Option<Vec<MatrixJson>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingJson {
    #[default]
    Slope,
    BoltzmannWeighted,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoPayload {
    pub hamiltonian: MatrixJson,
    pub temperature: f64,
    pub rho_in: MatrixJson,
    pub rho_out: MatrixJson,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub ordering: OrderingJson,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtoPayload {
    pub hamiltonian: MatrixJson,
    pub temperature: f64,
    pub rho_in: MatrixJson,
    pub rho_out: MatrixJson,
    #[serde(default)]
    pub qmi_budget: f64,
    /// Also require the reverse transition, as in a compute-then-reset cycle.
    #[serde(default)]
    pub cycle: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpJson {
    pub operator: MatrixJson,
    pub rate: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    pub hamiltonian: MatrixJson,
    #[serde(default)]
    pub jumps: Vec<JumpJson>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolvePayload {
    pub generator: GeneratorJson,
    pub rho0: MatrixJson,
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeJson {
    pub state: MatrixJson,
    pub t_resolve: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticPayload {
    pub generator: GeneratorJson,
    #[serde(default)]
    pub blocks: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub probe: Option<ProbeJson>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticPayload {
    pub e_sig: f64,
    pub tau_r: f64,
    pub tau_e: f64,
    pub c_sw: f64,
    pub c_lk: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    #[serde(default = "one")]
    pub efficiency_constant: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
pub enum Payload {
    Classify(ClassifyPayload),
    EntropyDecompose(EntropyDecomposePayload),
    ImplementsCheck(ImplementsPayload),
    Landauer(LandauerPayload),
    ThermoCheck(ThermoPayload),
    CtoCheck(CtoPayload),
    GkslEvolve(EvolvePayload),
    GkslAsymptotic(AsymptoticPayload),
    AdiabaticSweep(AdiabaticPayload),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub task: Task,
    pub payload: Payload,
    pub metadata: Option<Value>,
    /// SHA-256 of the raw file bytes, hex encoded.
    pub digest: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    task: Task,
    payload: Value,
    #[serde(default)]
    metadata: Option<Value>,
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Outcome<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) if inner.starts_with('[') => format!("{prefix}{inner}"),
            (false, _) => format!("{prefix}.{inner}"),
        };
        Failure::schema(&path, e.into_inner())
    })
}

pub fn parse_scenario(path: &Path) -> Outcome<Scenario> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::new(ExitStatus::MissingFile, format!("cannot read {}: {e}", path.display())))?;
    parse_bytes(&bytes)
}

pub fn parse_bytes(bytes: &[u8]) -> Outcome<Scenario> {
    use sha2::{Digest, Sha256};
    let value: Value = serde_json::from_slice(bytes)
        .map_err(|e| Failure::new(ExitStatus::MalformedJson, format!("malformed JSON: {e}")))?;
    let envelope: Envelope = typed(value, "")?;
    let payload = match envelope.task {
        Task::Classify => Payload::Classify(typed(envelope.payload, "payload")?),
        Task::EntropyDecompose => Payload::EntropyDecompose(typed(envelope.payload, "payload")?),
        Task::ImplementsCheck => Payload::ImplementsCheck(typed(envelope.payload, "payload")?),
        Task::Landauer => Payload::Landauer(typed(envelope.payload, "payload")?),
        Task::ThermoCheck => Payload::ThermoCheck(typed(envelope.payload, "payload")?),
        Task::CtoCheck => Payload::CtoCheck(typed(envelope.payload, "payload")?),
        Task::GkslEvolve => Payload::GkslEvolve(typed(envelope.payload, "payload")?),
        Task::GkslAsymptotic => Payload::GkslAsymptotic(typed(envelope.payload, "payload")?),
        Task::AdiabaticSweep => Payload::AdiabaticSweep(typed(envelope.payload, "payload")?),
    };
    Ok(Scenario { task: envelope.task, payload, metadata: envelope.metadata, digest: hex::encode(Sha256::digest(bytes)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(text: &str) -> ExitStatus {
        parse_bytes(text.as_bytes()).map(|_| ExitStatus::Ok).unwrap_or_else(|f| f.status)
    }

    #[test]
    fn decodes_row_major_pairs() {
        let m: MatrixJson = serde_json::from_str("[[[1,0],[0,2]],[[0,-2],[3,0]]]").unwrap();
        let c = m.decode("m").unwrap();
        assert_eq!(c[(0, 1)], c64(0.0, 2.0));
        assert_eq!(c[(1, 0)], c64(0.0, -2.0));
        assert_eq!(MatrixJson::encode(&c), m);
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let m: MatrixJson = serde_json::from_str("[[[1,0],[0,0]],[[1,0]]]").unwrap();
        let err = m.decode("payload.state").unwrap_err();
        assert_eq!(err.status, ExitStatus::Schema);
        assert!(err.message.contains("payload.state[1]"), "{}", err.message);
    }

    #[test]
    fn failure_classes() {
        assert_eq!(status("{\"task\": "), ExitStatus::MalformedJson);
        assert_eq!(status("{\"task\": \"nope\", \"payload\": {}}"), ExitStatus::Schema);
        assert_eq!(status("{\"task\": \"entropy-decompose\", \"payload\": {}}"), ExitStatus::Schema);
        let odd = r#"{"task": "entropy-decompose", "payload": {"state": [[[1, 0, 0]]], "blocks": [[0]]}}"#;
        let err = parse_bytes(odd.as_bytes()).unwrap_err();
        assert_eq!(err.status, ExitStatus::Schema);
        assert!(err.message.contains("payload.state[0][0]"), "{}", err.message);
        let ok = r#"{"task": "entropy-decompose", "payload": {"state": [[[1, 0]]], "blocks": [[0]]}}"#;
        assert_eq!(status(ok), ExitStatus::Ok);
    }

    #[test]
    fn digest_is_content_hash() {
        let a = r#"{"task": "entropy-decompose", "payload": {"state": [[[1, 0]]], "blocks": [[0]]}}"#;
        let s = parse_bytes(a.as_bytes()).unwrap();
        assert_eq!(s.digest.len(), 64);
        assert_eq!(s.digest, parse_bytes(a.as_bytes()).unwrap().digest);
        assert_ne!(s.digest, parse_bytes(format!("{a} ").as_bytes()).unwrap().digest);
    }
}
