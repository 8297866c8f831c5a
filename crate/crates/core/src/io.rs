//! JSON file formats for filters, weight vectors and eigenproblems, and a
//! small CSV writer. Every file carries `format_version` and the
//! configuration that produced it.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{FilterError, Result};
use crate::filter::RationalFilter;
use crate::harness::{EigenProblem, ProblemMatrix};
use crate::weights::WeightVector;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterFile {
    pub format_version: u32,
    pub m: usize,
    /// `None` when the filter was not designed for a particular gap.
    pub gap: Option<f64>,
    pub scaled: bool,
    pub beta: Vec<[f64; 2]>,
    pub z: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wcr: Option<f64>,
    #[serde(default)]
    pub config: Value,
}

impl FilterFile {
    pub fn from_filter(f: &RationalFilter, wcr: Option<f64>, config: Value) -> Self {
        let pair = |c: &Complex64| [c.re, c.im];
        Self {
            format_version: FORMAT_VERSION,
            m: f.m(),
            gap: f.gap().is_finite().then_some(f.gap()),
            scaled: f.scaled(),
            beta: f.beta().iter().map(pair).collect(),
            z: f.z().iter().map(pair).collect(),
            wcr,
            config,
        }
    }

    pub fn to_filter(&self) -> Result<RationalFilter> {
        check_version(self.format_version)?;
        if self.beta.len() != self.m || self.z.len() != self.m {
            return Err(FilterError::Format(format!(
                "m = {} but {} coefficients and {} poles",
                self.m,
                self.beta.len(),
                self.z.len()
            )));
        }
        let c = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
        RationalFilter::new(
            self.beta.iter().map(c).collect(),
            self.z.iter().map(c).collect(),
            self.gap.unwrap_or(f64::NAN),
            self.scaled,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub format_version: u32,
    pub s: usize,
    #[serde(rename = "G")]
    pub gap: f64,
    pub v: Vec<f64>,
}

impl WeightFile {
    pub fn from_weight(w: &WeightVector) -> Self {
        Self { format_version: FORMAT_VERSION, s: w.s(), gap: w.gap(), v: w.values().to_vec() }
    }

    pub fn to_weight(&self) -> Result<WeightVector> {
        check_version(self.format_version)?;
        WeightVector::new(self.s, self.v.clone(), self.gap)
    }
}

/// Problem file: either `diagonal` or a row-major `matrix` of `[re, im]`
/// pairs, plus the search interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
    pub interval: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_eigs: Option<Vec<f64>>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

impl ProblemFile {
    pub fn from_problem(p: &EigenProblem) -> Self {
        let (a, b) = p.interval();
        let n = p.n();
        let (diagonal, matrix, true_eigs) = match p.matrix() {
            ProblemMatrix::Diagonal(d) => (Some(d.clone()), None, None),
            ProblemMatrix::Dense(m) => {
                let flat = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]);
                (None, Some(flat.collect()), p.true_eigs().map(<[f64]>::to_vec))
            }
        };
        Self { format_version: FORMAT_VERSION, n, diagonal, matrix, interval: [a, b], true_eigs }
    }

    pub fn to_problem(&self) -> Result<EigenProblem> {
        check_version(self.format_version)?;
        let interval = (self.interval[0], self.interval[1]);
        match (&self.diagonal, &self.matrix) {
            (Some(d), None) => {
                if d.len() != self.n {
                    return Err(FilterError::Format(format!("n = {} but {} diagonal entries", self.n, d.len())));
                }
                EigenProblem::diagonal(d.clone(), interval)
            }
            (None, Some(m)) => {
                if m.len() != self.n * self.n {
                    return Err(FilterError::Format(format!("n = {} but {} matrix entries", self.n, m.len())));
                }
                let a = DMatrix::from_row_iterator(self.n, self.n, m.iter().map(|p| Complex64::new(p[0], p[1])));
                EigenProblem::dense(a, interval, self.true_eigs.clone())
            }
            _ => Err(FilterError::Format("exactly one of `diagonal` and `matrix` is required".into())),
        }
    }
}

/// A bare spectrum for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub spectrum: Vec<f64>,
}

fn check_version(v: u32) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FilterError::Format(format!("unsupported format_version {v}")))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| FilterError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FilterError::Format(e.to_string()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FilterError::Format(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| FilterError::Format(format!("cannot write {}: {e}", path.display())))
}

pub fn read_filter(path: &Path) -> Result<RationalFilter> {
    read_json::<FilterFile>(path)?.to_filter()
}

/// Reads a problem file, or a spectrum file as a diagonal problem on the
/// spectrum's full range.
pub fn read_spectrum(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FilterError::Format(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(s) = from_json::<SpectrumFile>(&text) {
        check_version(s.format_version)?;
        return Ok(s.spectrum);
    }
    let p: ProblemFile = from_json(&text)?;
    Ok(p.to_problem()?.eigenvalues())
}

/// CSV text with a leading `# ratfilt format_version=1 ...` comment line.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &str, header: &[&str]) -> Self {
        let mut text = format!("# ratfilt format_version={FORMAT_VERSION} {config}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Shortest representation that round-trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}
