use charmat_core::charmat::{self, CharacteristicMatrix, Route, WeylSource};
use charmat_core::resolvent::{self, ResolventResult, ResolventRoute};
use charmat_core::{linalg, CMat, Error, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, Provenance};
use crate::output::{self, Csv, OutDir};
use crate::problem::Problem;
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Weyl,
    Charmat,
    Resolve,
    Eig,
    Verify,
}

/// Maps `f` over the λ-grid on the problem's worker pool; results come back
/// in grid order.
fn sweep<T, F>(p: &Problem, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(C64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(p.workers)
        .build()
        .map_err(|e| CliError::Schema(format!("worker pool: {e}")))?;
    Ok(pool.install(|| p.lambdas.par_iter().map(|&l| f(l)).collect()))
}

fn header(p: &Problem) -> Value {
    json!({
        "system": p.system_name,
        "tau": p.tau_name,
        "seed": p.seed,
        "panels": p.engine().mesh().panels(),
        "tolerances": output::tolerances(p.engine().tolerances()),
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

/// Runs one command and writes its artifacts.
pub fn run(command: Command, p: &Problem, out: &mut OutDir) -> Result<(), CliError> {
    match command {
        Command::Weyl => weyl(p, out),
        Command::Charmat => charmat(p, out),
        Command::Resolve => resolve(p, out),
        Command::Eig => eig(p, out),
        Command::Verify => verify::run(p, out),
    }
}

fn weyl(p: &Problem, out: &mut OutDir) -> Result<(), CliError> {
    let values = sweep(p, |l| p.num.weyl_matrix(l).map(|w| w.value))?;
    let values = values.into_iter().collect::<Result<Vec<CMat>, _>>().numeric("boundary-triplet")?;
    let n = values[0].nrows();
    let mut cols = vec!["lambda_re".to_string(), "lambda_im".to_string()];
    cols.extend(output::matrix_columns("M", n, n));
    let mut csv = Csv::new(&cols);
    for (l, m) in p.lambdas.iter().zip(&values) {
        csv.row([output::num(l.re), output::num(l.im)].into_iter().chain(output::matrix_fields(m)));
    }
    out.write("weyl.csv", csv.text())
}

enum Cell {
    Value(CMat),
    /// τ without an operator form has no Krein display; not a failure.
    Undefined(String),
}

fn charmat(p: &Problem, out: &mut OutDir) -> Result<(), CliError> {
    let raw = sweep(p, |l| p.routes.iter().map(|&r| (r, charmat::omega(&p.num, &p.tau, l, r))).collect::<Vec<_>>())?;
    let mut cells: Vec<Vec<Cell>> = Vec::with_capacity(raw.len());
    for row in raw {
        let mut out_row = Vec::with_capacity(row.len());
        for (route, res) in row {
            out_row.push(match res {
                Ok(m) => Cell::Value(m),
                Err(e @ Error::OperatorFormRequired { .. }) if route == Route::Krein => Cell::Undefined(e.to_string()),
                Err(source) => return Err(CliError::Numeric { module: "char-matrix", source }),
            });
        }
        cells.push(out_row);
    }
    let dim = p.num.dims().dim_total();
    let mut cols = vec!["lambda_re".to_string(), "lambda_im".to_string()];
    cols.extend(output::matrix_columns("Omega", dim, dim));
    let mut routes_json = serde_json::Map::new();
    for (ri, &route) in p.routes.iter().enumerate() {
        let mut csv = Csv::new(&cols);
        let mut entries = Vec::new();
        for (l, row) in p.lambdas.iter().zip(&cells) {
            match &row[ri] {
                Cell::Value(m) => {
                    csv.row([output::num(l.re), output::num(l.im)].into_iter().chain(output::matrix_fields(m)));
                    entries.push(json!({"lambda": output::complex(*l), "omega": output::matrix(m)}));
                }
                Cell::Undefined(why) => entries.push(json!({"lambda": output::complex(*l), "undefined": why})),
            }
        }
        out.write(&format!("charmat_{}.csv", route.name()), csv.text())?;
        routes_json.insert(route.name().to_string(), Value::Array(entries));
    }
    let mut worst = 0.0f64;
    for row in &cells {
        let ok: Vec<&CMat> = row.iter().filter_map(|c| if let Cell::Value(m) = c { Some(m) } else { None }).collect();
        for a in &ok {
            for b in &ok {
                worst = worst.max(linalg::norm(&(*a - *b)));
            }
        }
    }
    let tol = p.engine().tolerances().route;
    let report = merge(
        header(p),
        json!({
            "lambdas": p.lambdas.iter().map(|&l| output::complex(l)).collect::<Vec<_>>(),
            "routes": Value::Object(routes_json),
            "route_agreement": {"max_distance": worst, "tolerance": tol, "passed": worst <= tol},
        }),
    );
    out.write_json("charmat.json", &report)?;
    if worst > tol {
        return Err(CliError::ChecksFailed(1));
    }
    Ok(())
}

fn resolve_one(p: &Problem, lambda: C64, f: &charmat_core::WeightedFunction) -> charmat_core::Result<ResolventResult> {
    let e = p.engine();
    match p.resolve_route {
        ResolventRoute::BoundaryValue => resolvent::resolve_bvp(e, &p.tau, lambda, f),
        ResolventRoute::Kernel => {
            let grid = CharacteristicMatrix::compute(&p.num, &p.tau, &[lambda], Route::Correction)?;
            resolvent::resolve_kernel(e, &grid, lambda, f)
        }
        ResolventRoute::Green => resolvent::resolve_green(e, lambda, f),
        ResolventRoute::Krein => resolvent::resolve_krein(&p.num, &p.tau, lambda, f),
    }
}

fn resolve(p: &Problem, out: &mut OutDir) -> Result<(), CliError> {
    let f = p.forcing()?;
    let results = sweep(p, |l| resolve_one(p, l, &f))?;
    let results = results.into_iter().collect::<Result<Vec<_>, _>>().numeric("resolvent")?;
    let dim = p.engine().dim();
    let mut cols = vec!["lambda_re".to_string(), "lambda_im".to_string(), "t".to_string()];
    for k in 0..dim {
        cols.push(format!("y_re_{k}"));
        cols.push(format!("y_im_{k}"));
    }
    let mut csv = Csv::new(&cols);
    let nodes = p.engine().mesh().nodes();
    let mut summary = Vec::new();
    for r in &results {
        for (t, v) in nodes.iter().zip(r.y.values()) {
            let fields = [output::num(r.lambda.re), output::num(r.lambda.im), output::num(*t)]
                .into_iter()
                .chain(v.iter().flat_map(|z| [output::num(z.re), output::num(z.im)]));
            csv.row(fields);
        }
        summary.push(json!({
            "lambda": output::complex(r.lambda),
            "route": r.route.to_string(),
            "bc_residual": r.bc_residual,
            "ode_residual": r.ode_residual,
            "delta_norm": p.engine().space().delta_norm(&r.y).numeric("weighted-space")?,
        }));
    }
    out.write("resolve.csv", csv.text())?;
    let report = merge(header(p), json!({"results": summary}));
    out.write_json("resolve.json", &report)
}

fn eig(p: &Problem, out: &mut OutDir) -> Result<(), CliError> {
    let spec = p.config.eig.as_ref().ok_or_else(|| CliError::Schema("eig needs an \"eig\" section with lo and hi".into()))?;
    let scan = match resolvent::eig_scan(p.engine(), &p.tau, spec.lo, spec.hi, spec.grid) {
        Err(e @ Error::NotSelfAdjoint { .. }) => return Err(CliError::Build { module: "resolvent", source: e }),
        other => other.numeric("resolvent")?,
    };
    let list: Vec<Value> = scan
        .eigenvalues
        .iter()
        .map(|v| {
            json!({
                "value": v.value,
                "bracket": [v.bracket.0, v.bracket.1],
                "bisections": v.bisections,
                "condition": v.condition,
            })
        })
        .collect();
    let report = merge(
        header(p),
        json!({
            "interval": [spec.lo, spec.hi],
            "grid_points": scan.grid_points,
            "phase_defect": scan.phase_defect,
            "eigenvalues": list,
        }),
    );
    out.write_json("eig.json", &report)
}
