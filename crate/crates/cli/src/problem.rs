use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use posreal::realizer::Target;
use posreal::{PartialFraction, PoleTerm, Realization, TransferFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexDoc> for Complex64 {
    fn from(c: ComplexDoc) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferDoc {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominantDoc {
    pub pole: f64,
    pub residue: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub pole: ComplexDoc,
    pub order: Option<usize>,
    pub coeffs: Vec<ComplexDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialFractionsDoc {
    pub dominant: DominantDoc,
    #[serde(default)]
    pub terms: Vec<TermDoc>,
}

/// Dense row-major realization `{dimension, A, b, c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationDoc {
    pub dimension: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl RealizationDoc {
    pub fn from_realization(r: &Realization) -> Self {
        let m = r.dim();
        Self {
            dimension: m,
            a: (0..m)
                .map(|i| (0..m).map(|j| r.a()[(i, j)]).collect())
                .collect(),
            b: r.b().iter().copied().collect(),
            c: r.c().iter().copied().collect(),
        }
    }

    pub fn to_realization(&self) -> Result<Realization> {
        if self.a.len() != self.dimension {
            bail!(
                "A has {} rows but dimension is {}",
                self.a.len(),
                self.dimension
            );
        }
        Ok(Realization::from_rows(&self.a, &self.b, &self.c)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseDoc {
    /// Realization file, relative to the problem file.
    pub path: Option<PathBuf>,
    pub realization: Option<RealizationDoc>,
    pub shift: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    pub mode: Option<String>,
    pub tol: Option<f64>,
    pub max_shifts: Option<usize>,
    pub horizon: Option<usize>,
    pub base: Option<BaseDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    transfer: Option<TransferDoc>,
    partial_fractions: Option<PartialFractionsDoc>,
    #[serde(default)]
    options: OptionsDoc,
}

#[derive(Debug, Clone)]
pub enum Input {
    Transfer(TransferFunction),
    PartialFractions(PartialFraction),
}

impl Input {
    pub fn target(&self) -> Target<'_> {
        match self {
            Input::Transfer(tf) => Target::Transfer(tf),
            Input::PartialFractions(pf) => Target::PartialFractions(pf),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub input: Input,
    pub options: OptionsDoc,
    pub base: Option<(Realization, usize)>,
}

fn parse_pf(doc: PartialFractionsDoc) -> Result<PartialFraction> {
    let mut terms = Vec::with_capacity(doc.terms.len());
    for (i, t) in doc.terms.into_iter().enumerate() {
        if let Some(order) = t.order {
            if order != t.coeffs.len() {
                bail!(
                    "term {i}: order {order} but {} coefficients",
                    t.coeffs.len()
                );
            }
        }
        terms.push(PoleTerm {
            pole: t.pole.into(),
            coeffs: t.coeffs.into_iter().map(Complex64::from).collect(),
        });
    }
    Ok(PartialFraction::new(
        doc.dominant.pole,
        doc.dominant.residue,
        terms,
    )?)
}

/// Reads a realization document, or the `realization` member of a `realize` output.
pub fn load_realization(path: &Path) -> Result<Realization> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let value = match value.get("realization") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let doc: RealizationDoc = serde_json::from_value(value)
        .with_context(|| format!("{} is not a realization document", path.display()))?;
    doc.to_realization()
}

pub fn load(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ProblemDoc =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let input = match (doc.transfer, doc.partial_fractions) {
        (Some(t), None) => Input::Transfer(TransferFunction::from_coefficients(&t.num, &t.den)?),
        (None, Some(pf)) => Input::PartialFractions(parse_pf(pf)?),
        _ => bail!("exactly one of \"transfer\" and \"partial_fractions\" must be given"),
    };
    let base = match &doc.options.base {
        None => None,
        Some(b) => {
            let real = match (&b.path, &b.realization) {
                (Some(p), None) => {
                    let dir = path.parent().unwrap_or(Path::new("."));
                    load_realization(&dir.join(p))?
                }
                (None, Some(r)) => r.to_realization()?,
                _ => bail!("base needs exactly one of \"path\" and \"realization\""),
            };
            Some((real, b.shift))
        }
    };
    Ok(Problem {
        input,
        options: doc.options,
        base,
    })
}
