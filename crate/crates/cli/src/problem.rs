//! Turns a [`ProblemConfig`] into core objects.

use std::sync::Arc;

use charmat_core::charmat::{NumericWeyl, Route, WeylSource};
use charmat_core::parameter::{self, BoundaryParameter, InterfaceDims, Pair};
use charmat_core::resolvent::ResolventRoute;
use charmat_core::system::CoefficientKind;
use charmat_core::weighted::{read_csv, random_smooth_function};
use charmat_core::{builtins, CMat, CVec, CoefficientMap, Engine, SpaceDecomposition, SymmetricSystem, Tolerances, WeightedFunction, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CoefficientSpec, Entry, ForcingSpec, LambdaGrid, MatrixSpec, ProblemConfig, SystemSpec, TauSpec};
use crate::error::{CliError, Provenance};

/// Command-line settings that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub tolerances: Vec<(String, f64)>,
}

pub struct Problem {
    pub system_name: String,
    pub tau_name: String,
    pub num: NumericWeyl,
    pub tau: BoundaryParameter,
    pub lambdas: Vec<C64>,
    pub routes: Vec<Route>,
    pub resolve_route: ResolventRoute,
    pub seed: u64,
    pub workers: usize,
    pub config: ProblemConfig,
}

impl Problem {
    pub fn build(config: ProblemConfig, overrides: &Overrides) -> Result<Self, CliError> {
        let mut tol = Tolerances::default();
        let pairs = config.tolerances.iter().map(|(k, v)| (k.clone(), *v)).chain(overrides.tolerances.iter().cloned());
        for (key, value) in pairs {
            tol.set(&key, value).ok_or_else(|| CliError::Schema(format!("unknown tolerance {key}")))?;
        }
        let (system_name, sys) = build_system(&config.system)?;
        let panels = config.panels.unwrap_or_else(|| builtins::default_panels(&sys));
        let engine = Arc::new(Engine::new(sys, panels, tol));
        let num = NumericWeyl::new(engine);
        let seed = overrides.seed.or(config.seed).unwrap_or(0);
        let (tau_name, tau) = build_tau(&config.tau, &num.dims(), seed)?;
        let lambdas = lambda_grid(&config.lambda);
        let routes = match &config.routes {
            None => Route::ALL.to_vec(),
            Some(names) => names.iter().map(|n| parse_route(n)).collect::<Result<_, _>>()?,
        };
        let resolve_route = parse_resolvent_route(config.resolve.route.as_deref().unwrap_or("bvp"))?;
        let workers = overrides.workers.or(config.workers).unwrap_or(1);
        Ok(Self { system_name, tau_name, num, tau, lambdas, routes, resolve_route, seed, workers, config })
    }

    pub fn engine(&self) -> &Arc<Engine> {
        self.num.engine()
    }

    /// Random draws for forcing terms come from a stream separate from the
    /// one used for random boundary parameters.
    pub fn forcing_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }

    pub fn forcing(&self) -> Result<WeightedFunction, CliError> {
        let e = self.engine();
        let dim = e.dim();
        match &self.config.resolve.f {
            ForcingSpec::Random => Ok(random_smooth_function(&mut self.forcing_rng(), e.mesh(), dim, 4)),
            ForcingSpec::Constant(v) => {
                if v.len() != dim {
                    return Err(CliError::Schema(format!("forcing has {} components, system has {dim}", v.len())));
                }
                let c = CVec::from_iterator(dim, v.iter().map(|&x| entry(x)));
                Ok(WeightedFunction::from_fn(e.mesh().clone(), move |_| c.clone()))
            }
            ForcingSpec::Csv(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{path}: {e}")))?;
                let f = read_csv(e.mesh().clone(), &text).config("weighted-space")?;
                if f.dim() != dim {
                    return Err(CliError::Schema(format!("forcing CSV has {} components, system has {dim}", f.dim())));
                }
                Ok(f)
            }
        }
    }
}

pub fn entry(e: Entry) -> C64 {
    match e {
        Entry::Real(x) => C64::new(x, 0.0),
        Entry::Complex([x, y]) => C64::new(x, y),
    }
}

pub fn matrix(spec: &MatrixSpec, what: &str) -> Result<CMat, CliError> {
    let rows = spec.len();
    let cols = spec.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || spec.iter().any(|r| r.len() != cols) {
        return Err(CliError::Schema(format!("{what} must be a non-empty rectangular array of rows")));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| entry(spec[i][j])))
}

fn coefficient(spec: &CoefficientSpec, kind: CoefficientKind, what: &str) -> Result<CoefficientMap, CliError> {
    match spec {
        CoefficientSpec::Constant(m) => CoefficientMap::constant(kind, matrix(m, what)?),
        CoefficientSpec::Polynomial(ms) => {
            CoefficientMap::polynomial(kind, ms.iter().map(|m| matrix(m, what)).collect::<Result<_, _>>()?)
        }
        CoefficientSpec::Table { t, values } => {
            CoefficientMap::tabulated(kind, t.clone(), values.iter().map(|m| matrix(m, what)).collect::<Result<_, _>>()?)
        }
    }
    .config("system-model")
}

fn build_system(spec: &SystemSpec) -> Result<(String, SymmetricSystem), CliError> {
    match spec {
        SystemSpec::Builtin { builtin } => builtins::by_name(builtin)
            .map(|s| (builtin.clone(), s))
            .ok_or_else(|| CliError::Schema(format!("unknown built-in system {builtin}"))),
        SystemSpec::Tables { dim_h, dim_hhat, interval, b, delta } => {
            let dec = SpaceDecomposition::new(*dim_h, *dim_hhat).config("system-model")?;
            let b = coefficient(b, CoefficientKind::HermitianB, "B")?;
            let delta = coefficient(delta, CoefficientKind::PsdWeight, "delta")?;
            let sys = SymmetricSystem::new(dec, (interval[0], interval[1]), b, delta).config("system-model")?;
            Ok(("tables".into(), sys))
        }
    }
}

fn build_tau(spec: &TauSpec, dims: &InterfaceDims, seed: u64) -> Result<(String, BoundaryParameter), CliError> {
    let d = dims.dim0();
    let adm = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = match spec {
        TauSpec::Dirichlet => parameter::dirichlet(dims.dim_h, dims.dim_hhat),
        TauSpec::Zero => parameter::zero_operator(d),
        TauSpec::Multivalued => parameter::multivalued(d),
        TauSpec::Linear => parameter::linear_lambda(d),
        TauSpec::SelfAdjoint { c0, c1 } => {
            BoundaryParameter::make_constant_selfadjoint(matrix(c0, "c0")?, matrix(c1, "c1")?, adm).config("boundary-parameter")?
        }
        TauSpec::Pair { c0, c1, lower } => {
            let upper = Pair::new(matrix(c0, "c0")?, matrix(c1, "c1")?).config("boundary-parameter")?;
            let lower = match lower {
                Some(p) => Some(Pair::new(matrix(&p.c0, "lower.c0")?, matrix(&p.c1, "lower.c1")?).config("boundary-parameter")?),
                None => None,
            };
            BoundaryParameter::make_constant_pair(upper, lower, adm).config("boundary-parameter")?
        }
        TauSpec::Rational { a, b, poles } => {
            let terms = poles.iter().map(|p| Ok((p.at, matrix(&p.residue, "residue")?))).collect::<Result<_, CliError>>()?;
            BoundaryParameter::make_rational(matrix(a, "a")?, matrix(b, "b")?, terms, 1e-12).config("boundary-parameter")?
        }
        TauSpec::RandomSelfAdjoint => parameter::random_selfadjoint(&mut rng, d),
        TauSpec::RandomDissipative => parameter::random_dissipative(&mut rng, d),
    };
    let (d0, d1) = tau.dims();
    if d0 != d || d1 != dims.dim1() {
        return Err(CliError::Schema(format!("boundary parameter acts on {d1} coordinates, the system needs {}", dims.dim1())));
    }
    let name = match spec {
        TauSpec::Dirichlet => "dirichlet",
        TauSpec::Zero => "zero",
        TauSpec::Multivalued => "multivalued",
        TauSpec::Linear => "linear",
        TauSpec::SelfAdjoint { .. } => "self-adjoint",
        TauSpec::Pair { .. } => "pair",
        TauSpec::Rational { .. } => "rational",
        TauSpec::RandomSelfAdjoint => "random-self-adjoint",
        TauSpec::RandomDissipative => "random-dissipative",
    };
    Ok((name.into(), tau))
}

pub fn lambda_grid(spec: &LambdaGrid) -> Vec<C64> {
    match spec {
        LambdaGrid::List(v) => v.iter().map(|&e| entry(e)).collect(),
        LambdaGrid::Rect { re, im, counts } => {
            let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
                if n == 1 {
                    vec![lo]
                } else {
                    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
                }
            };
            let xs = axis(re[0], re[1], counts[0]);
            let ys = axis(im[0], im[1], counts[1]);
            ys.iter().flat_map(|&y| xs.iter().map(move |&x| C64::new(x, y))).collect()
        }
    }
}

pub fn parse_route(name: &str) -> Result<Route, CliError> {
    Route::ALL
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| CliError::Schema(format!("unknown characteristic-matrix route {name}")))
}

pub fn parse_resolvent_route(name: &str) -> Result<ResolventRoute, CliError> {
    Ok(match name {
        "bvp" => ResolventRoute::BoundaryValue,
        "kernel" => ResolventRoute::Kernel,
        "green" => ResolventRoute::Green,
        "krein" => ResolventRoute::Krein,
        other => return Err(CliError::Schema(format!("unknown resolvent route {other}"))),
    })
}
