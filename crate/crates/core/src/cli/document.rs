//! Result documents emitted by the CLI, as CSV tables or JSON objects.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "npn";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A real number that serializes `+inf` as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn render(self) -> String {
        if self.0 == f64::INFINITY {
            "inf".into()
        } else if self.0 == f64::NEG_INFINITY {
            "-inf".into()
        } else {
            self.0.to_string()
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.render())
        }
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateConfigEcho {
    pub input: String,
    pub estimators: Vec<String>,
    pub z: f64,
    pub gauss_z: f64,
    pub k: usize,
    pub ties: String,
    pub entropy: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub estimator: String,
    pub value: Option<Num>,
    pub lambda_min: Option<f64>,
    pub clamped_eigenvalues: Option<usize>,
    pub max_diag_deviation: Option<f64>,
    pub error: Option<String>,
}

impl EstimateRow {
    pub fn failed(estimator: &str, err: &Error) -> Self {
        EstimateRow {
            estimator: estimator.to_string(),
            value: None,
            lambda_min: None,
            clamped_eigenvalues: None,
            max_diag_deviation: None,
            error: Some(format!("{}: {err}", err.code())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyRow {
    pub value: Option<Num>,
    pub marginal_entropies: Vec<Num>,
    pub mutual_information: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateDocument {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config: EstimateConfigEcho,
    pub n: usize,
    pub d: usize,
    pub estimates: Vec<EstimateRow>,
    pub entropy: Option<EntropyRow>,
}

pub const ESTIMATE_CSV_HEADER: [&str; 6] = [
    "estimator",
    "value",
    "lambda_min",
    "clamped_eigenvalues",
    "max_diag_deviation",
    "error",
];

impl EstimateDocument {
    pub fn has_errors(&self) -> bool {
        self.estimates.iter().any(|r| r.error.is_some())
            || self.entropy.as_ref().is_some_and(|e| e.error.is_some())
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(ESTIMATE_CSV_HEADER).map_err(io)?;
        for r in &self.estimates {
            w.write_record([
                r.estimator.clone(),
                cell(r.value.map(Num::render)),
                cell(r.lambda_min),
                cell(r.clamped_eigenvalues),
                cell(r.max_diag_deviation),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        if let Some(h) = &self.entropy {
            w.write_record([
                "entropy".to_string(),
                cell(h.value.map(Num::render)),
                String::new(),
                String::new(),
                String::new(),
                h.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfigEcho {
    pub experiment: u8,
    pub trials: usize,
    pub n: usize,
    pub d: usize,
    pub grid: Vec<f64>,
    pub transform: String,
    pub estimators: Vec<String>,
    pub z: f64,
    pub k: usize,
    pub ties: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub experiment: u8,
    pub sweep_param: &'static str,
    pub sweep_value: f64,
    pub estimator: String,
    pub mse: Option<f64>,
    pub stderr: Option<f64>,
    pub finite_fraction: f64,
    pub trials: usize,
}

pub const SIMULATE_CSV_HEADER: [&str; 8] = [
    "experiment",
    "sweep_param",
    "sweep_value",
    "estimator",
    "mse",
    "stderr",
    "finite_fraction",
    "trials",
];

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDocument {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config: SimulateConfigEcho,
    pub rows: Vec<SummaryRow>,
}

impl SimulateDocument {
    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(SIMULATE_CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.to_string(),
                r.sweep_param.to_string(),
                r.sweep_value.to_string(),
                r.estimator.clone(),
                cell(r.mse),
                cell(r.stderr),
                r.finite_fraction.to_string(),
                r.trials.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandableConfigEcho {
    pub c: f64,
    pub d: usize,
    pub verify: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandableVerification {
    pub draws: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub within_bounds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandableDocument {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config: BandableConfigEcho,
    pub lower: f64,
    pub upper: f64,
    pub positive_definite_guaranteed: bool,
    pub verification: Option<BandableVerification>,
}

pub const BANDABLE_CSV_HEADER: [&str; 8] = [
    "c",
    "d",
    "lower",
    "upper",
    "draws",
    "min_eigenvalue",
    "max_eigenvalue",
    "within_bounds",
];

impl BandableDocument {
    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(BANDABLE_CSV_HEADER).map_err(io)?;
        let v = self.verification.as_ref();
        w.write_record([
            self.config.c.to_string(),
            self.config.d.to_string(),
            self.lower.to_string(),
            self.upper.to_string(),
            cell(v.map(|v| v.draws)),
            cell(v.map(|v| v.min_eigenvalue)),
            cell(v.map(|v| v.max_eigenvalue)),
            cell(v.map(|v| v.within_bounds)),
        ])
        .map_err(io)?;
        w.flush()?;
        Ok(())
    }
}

/// Output encoding of a result document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

pub enum ResultDocument {
    Estimate(EstimateDocument),
    Simulate(SimulateDocument),
    Bandable(BandableDocument),
}

impl ResultDocument {
    pub fn write<W: Write>(&self, format: OutputFormat, mut out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => match self {
                ResultDocument::Estimate(d) => d.write_csv(out),
                ResultDocument::Simulate(d) => d.write_csv(out),
                ResultDocument::Bandable(d) => d.write_csv(out),
            },
            OutputFormat::Json => {
                let json = match self {
                    ResultDocument::Estimate(d) => serde_json::to_string_pretty(d),
                    ResultDocument::Simulate(d) => serde_json::to_string_pretty(d),
                    ResultDocument::Bandable(d) => serde_json::to_string_pretty(d),
                }
                .map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out, "{json}")?;
                Ok(())
            }
        }
    }
}
