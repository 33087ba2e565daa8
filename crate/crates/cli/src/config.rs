//! JSON problem description.
//!
//! Matrices are arrays of rows; an entry is either a real number or a
//! `[re, im]` pair. Unknown keys are rejected so that typos surface as config
//! errors instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub tau: TauSpec,
    pub lambda: LambdaGrid,
    /// Quadrature panels; defaults to the built-in heuristic.
    #[serde(default)]
    pub panels: Option<usize>,
    #[serde(default)]
    pub routes: Option<Vec<String>>,
    #[serde(default)]
    pub resolve: ResolveSpec,
    #[serde(default)]
    pub eig: Option<EigSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Builtin {
        builtin: String,
    },
    Tables {
        dim_h: usize,
        #[serde(default)]
        dim_hhat: usize,
        interval: [f64; 2],
        b: CoefficientSpec,
        delta: CoefficientSpec,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant(MatrixSpec),
    /// Coefficients of `t⁰, t¹, ...`.
    Polynomial(Vec<MatrixSpec>),
    /// Piecewise-linear samples.
    Table { t: Vec<f64>, values: Vec<MatrixSpec> },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TauSpec {
    #[default]
    Dirichlet,
    /// `τ = 0`, the pair `(I, 0)`.
    Zero,
    /// `τ = ∞`, the pair `(0, I)`.
    Multivalued,
    /// `τ(λ) = λ I`.
    Linear,
    SelfAdjoint {
        c0: MatrixSpec,
        c1: MatrixSpec,
    },
    Pair {
        c0: MatrixSpec,
        c1: MatrixSpec,
        #[serde(default)]
        lower: Option<PairSpec>,
    },
    Rational {
        a: MatrixSpec,
        b: MatrixSpec,
        #[serde(default)]
        poles: Vec<PoleSpec>,
    },
    RandomSelfAdjoint,
    RandomDissipative,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub c0: MatrixSpec,
    pub c1: MatrixSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub at: f64,
    pub residue: MatrixSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaGrid {
    List(Vec<Entry>),
    /// Tensor grid over `re × im`, row-major in the imaginary part.
    Rect { re: [f64; 2], im: [f64; 2], counts: [usize; 2] },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ResolveSpec {
    #[serde(default)]
    pub f: ForcingSpec,
    #[serde(default)]
    pub route: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    /// Smooth random forcing drawn from the seed.
    #[default]
    Random,
    /// Constant vector.
    Constant(Vec<Entry>),
    /// CSV in the `t, re_0, im_0, ...` layout on the engine mesh.
    Csv(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigSpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_eig_grid")]
    pub grid: usize,
}

fn default_eig_grid() -> usize {
    200
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<(), CliError> {
        match &self.lambda {
            LambdaGrid::List(v) if v.is_empty() => return Err(CliError::Schema("lambda list is empty".into())),
            LambdaGrid::Rect { counts, .. } if counts[0] == 0 || counts[1] == 0 => {
                return Err(CliError::Schema("lambda rectangle needs positive counts".into()))
            }
            _ => {}
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(CliError::Schema(format!("tolerance {k} must be positive, got {v}")));
            }
        }
        if self.panels == Some(0) || self.workers == Some(0) {
            return Err(CliError::Schema("panels and workers must be positive".into()));
        }
        if let Some(e) = &self.eig {
            if e.lo.is_nan() || e.hi.is_nan() || e.lo >= e.hi || e.grid < 2 {
                return Err(CliError::Schema("eig needs lo < hi and grid ≥ 2".into()));
            }
        }
        Ok(())
    }
}
