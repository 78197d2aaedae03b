//! JSON and CSV interchange.
//!
//! Matrices are row-major nested arrays. Floats are written in shortest
//! round-trip form, so parsing a document and writing it again reproduces it
//! byte for byte.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gaussian::Gaussian;
use crate::inference::{Posterior, SufficientStats};
use crate::klpriors::{KlNormalWishartPrior, KlWishartPrior};
use crate::pdcore::{matrix_to_rows, PdMatrix};
use crate::wishart::{InverseWishartParams, WishartParams};

pub type Rows = Vec<Vec<f64>>;

/// Failures while reading or decoding input, before any model validation.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },

    #[error("invalid JSON in {path}: {source}")]
    Json { path: String, source: serde_json::Error },

    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("{0}")]
    Model(#[from] Error),
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Read { path: path.display().to_string(), source })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json { path: path.display().to_string(), source })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn is_delimiter(c: char) -> bool {
    c == ',' || c.is_whitespace()
}

enum Row {
    Values(Vec<f64>),
    /// Some field is not a number at all.
    Text,
    /// A field parses but is NaN or infinite.
    NonFinite,
}

fn parse_row(line: &str) -> Row {
    let mut values = Vec::new();
    for t in line.split(is_delimiter).filter(|t| !t.is_empty()) {
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => values.push(x),
            Ok(_) => return Row::NonFinite,
            Err(_) => return Row::Text,
        }
    }
    Row::Values(values)
}

/// Parses numeric CSV. Fields are separated by commas and/or whitespace; blank
/// lines and lines starting with `#` are skipped. A first row containing a
/// non-numeric field is treated as a header.
pub fn parse_csv(text: &str) -> Result<Rows, FormatError> {
    let mut rows: Rows = Vec::new();
    let mut seen_first = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_first;
        seen_first = true;
        match parse_row(line) {
            Row::Values(row) => {
                if let Some(d) = rows.first().map(Vec::len) {
                    if row.len() != d {
                        return Err(FormatError::Csv {
                            line: i + 1,
                            message: format!("expected {d} fields, found {}", row.len()),
                        });
                    }
                }
                rows.push(row);
            }
            Row::Text if first => {}
            Row::Text => {
                return Err(FormatError::Csv { line: i + 1, message: format!("non-numeric field in {line:?}") })
            }
            Row::NonFinite => {
                return Err(FormatError::Csv { line: i + 1, message: format!("non-finite value in {line:?}") })
            }
        }
    }
    if rows.is_empty() {
        return Err(FormatError::Model(Error::EmptyData));
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Rows, FormatError> {
    parse_csv(&read_text(path)?)
}

/// A matrix given either as a JSON nested array or as CSV rows.
pub fn parse_matrix(text: &str) -> Result<Rows, FormatError> {
    if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|source| FormatError::Json { path: "matrix".into(), source })
    } else {
        parse_csv(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianJson {
    pub mean: Vec<f64>,
    pub cov: Rows,
}

impl GaussianJson {
    pub fn from_gaussian(g: &Gaussian) -> Self {
        Self { mean: g.mean().iter().copied().collect(), cov: g.cov().to_rows() }
    }

    pub fn to_gaussian(&self) -> crate::Result<Gaussian> {
        Gaussian::new(DVector::from_vec(self.mean.clone()), PdMatrix::from_rows(&self.cov)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Wishart,
    InverseWishart,
}

/// `{"family": …, "scatter": [[…]], "shape": ν}`; `family` defaults to `wishart`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WishartJson {
    #[serde(default)]
    pub family: Family,
    pub scatter: Rows,
    pub shape: f64,
}

/// A decoded sampling distribution over matrices.
#[derive(Debug, Clone)]
pub enum MatrixLaw {
    Wishart(WishartParams),
    InverseWishart(InverseWishartParams),
}

impl WishartJson {
    pub fn from_wishart(w: &WishartParams) -> Self {
        Self { family: Family::Wishart, scatter: w.scatter().to_rows(), shape: w.shape() }
    }

    pub fn from_inverse_wishart(w: &InverseWishartParams) -> Self {
        Self { family: Family::InverseWishart, scatter: w.scatter().to_rows(), shape: w.shape() }
    }

    pub fn to_law(&self) -> crate::Result<MatrixLaw> {
        let scatter = PdMatrix::from_rows(&self.scatter)?;
        Ok(match self.family {
            Family::Wishart => MatrixLaw::Wishart(WishartParams::new(scatter, self.shape)?),
            Family::InverseWishart => MatrixLaw::InverseWishart(InverseWishartParams::new(scatter, self.shape)?),
        })
    }
}

/// `{"mean": […], "mode_cov": [[…]], "alpha": α}`; `mean` is absent when it is supplied separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    pub mode_cov: Rows,
    pub alpha: f64,
}

impl PriorJson {
    pub fn from_known_mean(p: &KlWishartPrior) -> Self {
        Self { mean: None, mode_cov: p.mode_cov().to_rows(), alpha: p.pseudocount() }
    }

    pub fn from_normal_wishart(p: &KlNormalWishartPrior) -> Self {
        Self {
            mean: Some(p.prior_mean().iter().copied().collect()),
            mode_cov: p.mode_cov().to_rows(),
            alpha: p.pseudocount(),
        }
    }

    /// Known-mean prior; `known_mean` is used when the document has no `mean`.
    pub fn to_known_mean(&self, known_mean: Option<&DVector<f64>>) -> crate::Result<KlWishartPrior> {
        let mode_cov = PdMatrix::from_rows(&self.mode_cov)?;
        let mean = match (&self.mean, known_mean) {
            (Some(m), _) => DVector::from_vec(m.clone()),
            (None, Some(m)) => m.clone(),
            (None, None) => return Err(Error::DimensionMismatch { expected: mode_cov.dim(), found: 0 }),
        };
        KlWishartPrior::new(mean, mode_cov, self.alpha)
    }

    pub fn to_normal_wishart(&self) -> crate::Result<KlNormalWishartPrior> {
        let mode_cov = PdMatrix::from_rows(&self.mode_cov)?;
        let mean = self.mean.clone().unwrap_or_default();
        KlNormalWishartPrior::new(DVector::from_vec(mean), mode_cov, self.alpha)
    }
}

/// The posterior as a KL prior: pseudocount, mode mean, mode covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlView {
    #[serde(rename = "alpha*")]
    pub alpha: f64,
    #[serde(rename = "m*")]
    pub mean: Vec<f64>,
    #[serde(rename = "sigma*")]
    pub sigma: Rows,
}

/// The posterior in textbook parameters. `mean` and `mean_precision_scale`
/// are present for the normal-Wishart case only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalView {
    pub family: String,
    pub shape: f64,
    pub scatter: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_precision_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorJson {
    pub kl: KlView,
    pub classical: ClassicalView,
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

impl PosteriorJson {
    pub fn from_posterior(post: &Posterior) -> crate::Result<Self> {
        Ok(match post {
            Posterior::KnownMean(p) => Self {
                kl: KlView { alpha: p.pseudocount(), mean: vec_of(p.known_mean()), sigma: p.map_cov()?.to_rows() },
                classical: ClassicalView {
                    family: "wishart".into(),
                    shape: p.wishart().shape(),
                    scatter: p.scatter().to_rows(),
                    mean: None,
                    mean_precision_scale: None,
                },
            },
            Posterior::UnknownMean(p) => {
                let nw = p.to_normal_wishart();
                Self {
                    kl: KlView { alpha: p.pseudocount(), mean: vec_of(p.mean()), sigma: p.mode_cov().to_rows() },
                    classical: ClassicalView {
                        family: "normal_wishart".into(),
                        shape: nw.wishart.shape(),
                        scatter: nw.wishart.scatter().to_rows(),
                        mean: Some(vec_of(&nw.mean)),
                        mean_precision_scale: Some(nw.mean_precision_scale),
                    },
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsJson {
    pub n: usize,
    pub d: usize,
    pub sample_mean: Vec<f64>,
    pub centered_scatter: Rows,
}

impl StatsJson {
    pub fn from_stats(s: &SufficientStats) -> Self {
        Self {
            n: s.count(),
            d: s.dim(),
            sample_mean: vec_of(s.sample_mean()),
            centered_scatter: matrix_to_rows(s.centered_scatter()),
        }
    }
}

/// MAP point: mean and covariance (the inverse of the MAP precision).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub mean: Vec<f64>,
    pub cov: Rows,
}

impl MapJson {
    pub fn new(mean: &DVector<f64>, cov: &PdMatrix) -> Self {
        Self { mean: vec_of(mean), cov: cov.to_rows() }
    }
}

/// Output of `klw fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mean_mode: String,
    pub alpha: f64,
    pub stats: StatsJson,
    pub posterior: PosteriorJson,
    pub map: MapJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}
