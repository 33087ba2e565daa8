//! `verify`: every invariant that makes sense for the configured problem,
//! one named check each.

use charmat_core::charmat::{self, CharacteristicMatrix, Route, WeylSource};
use charmat_core::linalg::{self, c, eye, re, I};
use charmat_core::parameter::{check_admissibility, from_interface_pair, to_interface_pair, BoundaryParameter};
use charmat_core::resolvent::{self, relative_distance, GreenKernel};
use charmat_core::system::{self, canonical_j};
use charmat_core::triplet::{self, RegularBoundaryMap};
use charmat_core::weighted::random_smooth_function;
use charmat_core::{CVec, Error, C64};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{self, OutDir};
use crate::problem::Problem;

type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub module: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

/// `value ≤ tol`.
fn at_most(value: f64, tol: f64, detail: String) -> Outcome {
    Outcome { status: pass_if(value <= tol), value: Some(value), tolerance: Some(tol), detail }
}

/// `value ≥ tol`.
fn at_least(value: f64, tol: f64, detail: String) -> Outcome {
    Outcome { status: pass_if(value >= tol), value: Some(value), tolerance: Some(tol), detail }
}

fn skipped(detail: &str) -> Outcome {
    Outcome { status: Status::Skipped, value: None, tolerance: None, detail: detail.into() }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub struct Outcome {
    status: Status,
    value: Option<f64>,
    tolerance: Option<f64>,
    detail: String,
}

type CheckFn = fn(&Ctx) -> Result<Outcome>;

struct Ctx<'a> {
    p: &'a Problem,
    /// Non-real grid points, or `{i, 2i, 1+i}` when the grid has none.
    upper: Vec<C64>,
    both: Vec<C64>,
}

impl Ctx<'_> {
    fn rng(&self) -> ChaCha8Rng {
        self.p.forcing_rng()
    }
}

const CHECKS: [(&str, &str, CheckFn); 25] = [
    ("structure-matrix", "system-model", structure_matrix),
    ("coefficient-validation", "system-model", coefficient_validation),
    ("definiteness", "system-model", definiteness),
    ("symplectic-residual", "ode-engine", symplectic),
    ("fundamental-invertibility", "ode-engine", invertibility),
    ("inhomogeneous-residual", "ode-engine", inhomogeneous),
    ("delta-inner-sesquilinear-psd", "weighted-space", delta_inner),
    ("solution-gram-hermitian-psd", "weighted-space", solution_gram),
    ("boundary-form-split", "boundary-triplet", boundary_form),
    ("lagrange-identity", "boundary-triplet", lagrange),
    ("weyl-nevanlinna", "boundary-triplet", weyl_nevanlinna),
    ("weyl-identity", "boundary-triplet", weyl_identity),
    ("tau-admissibility", "boundary-parameter", admissibility),
    ("tau-symmetry", "boundary-parameter", tau_symmetry),
    ("interface-round-trip", "boundary-parameter", interface_round_trip),
    ("omega-route-agreement", "char-matrix", omega_routes),
    ("omega-z-boundary", "char-matrix", omega_z),
    ("omega-nevanlinna-symmetry", "char-matrix", omega_symmetry),
    ("omega-imaginary-bound", "char-matrix", imag_bound),
    ("omega-display-equivalence", "char-matrix", display_equivalence),
    ("resolvent-route-agreement", "resolvent", resolvent_routes),
    ("resolvent-adjoint", "resolvent", resolvent_adjoint),
    ("canonical-resolvent-identity", "resolvent", canonical_identity),
    ("green-kernel-symmetry", "resolvent", green_symmetry),
    ("eigenvalue-conditioning", "resolvent", eigen_conditioning),
];

pub fn checks(p: &Problem) -> Result<Vec<Check>, CliError> {
    let mut upper: Vec<C64> = p.lambdas.iter().filter(|l| l.im != 0.0).map(|l| if l.im > 0.0 { *l } else { l.conj() }).collect();
    upper.dedup();
    if upper.is_empty() {
        upper = vec![I, c(0.0, 2.0), c(1.0, 1.0)];
    }
    let both = upper.iter().flat_map(|l| [*l, l.conj()]).collect();
    let ctx = Ctx { p, upper, both };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(p.workers)
        .build()
        .map_err(|e| CliError::Schema(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        CHECKS
            .par_iter()
            .map(|&(name, module, f)| {
                let o = f(&ctx).unwrap_or_else(|e| Outcome {
                    status: Status::Fail,
                    value: None,
                    tolerance: None,
                    detail: format!("error: {e}"),
                });
                Check { name, module, status: o.status, value: o.value, tolerance: o.tolerance, detail: o.detail }
            })
            .collect()
    }))
}

pub fn run(p: &Problem, out: &mut OutDir) -> Result<(), CliError> {
    let list = checks(p)?;
    let failed = list.iter().filter(|c| c.status == Status::Fail).count();
    let entries: Vec<Value> = list
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "module": c.module,
                "status": c.status.name(),
                "value": c.value,
                "tolerance": c.tolerance,
                "detail": c.detail,
            })
        })
        .collect();
    let report = json!({
        "system": p.system_name,
        "tau": p.tau_name,
        "seed": p.seed,
        "panels": p.engine().mesh().panels(),
        "tolerances": output::tolerances(p.engine().tolerances()),
        "checks": entries,
        "passed": failed == 0,
        "failed": failed,
    });
    out.write_json("verify.json", &report)?;
    for c in &list {
        eprintln!("{:<8} {:<30} {}", c.status.name(), c.name, c.detail);
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn structure_matrix(x: &Ctx) -> Result<Outcome> {
    let j = canonical_j(x.p.engine().system().decomposition());
    let n = j.nrows();
    let defect = linalg::norm(&(j.adjoint() + &j)) + linalg::norm(&(&j * &j + eye(n)));
    Ok(at_most(defect, 0.0, format!("‖J* + J‖ + ‖J² + I‖ = {defect:.2e}")))
}

fn coefficient_validation(x: &Ctx) -> Result<Outcome> {
    let sys = x.p.engine().system();
    let (a, b) = sys.interval();
    let grid: Vec<f64> = (0..200).map(|k| a + (b - a) * k as f64 / 199.0).collect();
    let rep = system::validate(sys, &grid, x.p.engine().tolerances());
    let detail = if rep.passed {
        format!("Hermiticity defect {:.2e}, smallest weight eigenvalue {:.2e}", rep.hermiticity_defect, rep.min_weight_eigenvalue)
    } else {
        rep.failures.join("; ")
    };
    Ok(Outcome { status: pass_if(rep.passed), value: Some(rep.hermiticity_defect), tolerance: Some(x.p.engine().tolerances().herm), detail })
}

fn definiteness(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let d1 = system::check_definiteness(e, I)?;
    let d2 = system::check_definiteness(e, c(0.0, 2.0))?;
    let ratio = |d: system::Definiteness| d.min_gram_eigenvalue / d.max_gram_eigenvalue;
    let worst = ratio(d1).min(ratio(d2));
    let tol = e.tolerances().definiteness_rel;
    Ok(Outcome {
        status: pass_if(d1.definite && d2.definite),
        value: Some(worst),
        tolerance: Some(tol),
        detail: format!("relative smallest Gram eigenvalue {worst:.2e} at λ = i, 2i"),
    })
}

fn symplectic(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let mut worst = 0.0f64;
    for r in [1.0, 5.0, 10.0] {
        for k in 0..8 {
            worst = worst.max(e.symplectic_residual(C64::from_polar(r, std::f64::consts::PI * k as f64 / 4.0))?);
        }
    }
    Ok(at_most(worst, 1e-8, format!("scaled ‖Y₀*(λ̄)JY₀(λ) - J‖ {worst:.2e} for |λ| ≤ 10")))
}

fn invertibility(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let mut smallest = f64::INFINITY;
    for &l in &x.both {
        for y in e.fundamental(l)?.values() {
            smallest = smallest.min(y.determinant().norm());
        }
    }
    Ok(at_least(smallest, 1e-12, format!("min |det Y₀(t, λ)| {smallest:.2e} over the mesh")))
}

fn inhomogeneous(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let f = random_smooth_function(&mut x.rng(), e.mesh(), e.dim(), 4);
    let mut worst = 0.0f64;
    for &l in &x.upper {
        let y = e.solve_inhomogeneous(l, &f, &CVec::zeros(e.dim()))?;
        worst = worst.max(e.ode_residual(&y, l, Some(&f))?);
    }
    let tol = 10.0 * e.tolerances().tmax;
    Ok(at_most(worst, tol, format!("ODE residual {worst:.2e} of y' = -J(B + λΔ)y - JΔf")))
}

fn delta_inner(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let sp = e.space();
    let mut rng = x.rng();
    let n = e.dim();
    let f = random_smooth_function(&mut rng, e.mesh(), n, 4);
    let g = random_smooth_function(&mut rng, e.mesh(), n, 4);
    let h = random_smooth_function(&mut rng, e.mesh(), n, 4);
    let (a, b) = (c(0.3, -1.2), c(2.0, 0.5));
    let lhs = sp.delta_inner(&f.scaled(a).add(&g.scaled(b))?, &h)?;
    let rhs = a * sp.delta_inner(&f, &h)? + b * sp.delta_inner(&g, &h)?;
    let lin = (lhs - rhs).norm() / (1.0 + lhs.norm());
    let herm = (sp.delta_inner(&h, &f)? - sp.delta_inner(&f, &h)?.conj()).norm();
    let self_min = [&f, &g, &h].iter().map(|u| sp.delta_inner(u, u).map(|z| z.re)).collect::<Result<Vec<_>>>()?;
    let min = self_min.into_iter().fold(f64::INFINITY, f64::min);
    let ok = lin <= 1e-12 && herm <= 1e-12 * (1.0 + lhs.norm()) && min >= -1e-12;
    Ok(Outcome {
        status: pass_if(ok),
        value: Some(lin.max(herm)),
        tolerance: Some(1e-12),
        detail: format!("linearity {lin:.2e}, conjugate symmetry {herm:.2e}, min (f, f)_Δ {min:.2e}"),
    })
}

fn solution_gram(x: &Ctx) -> Result<Outcome> {
    let mut herm = 0.0f64;
    let mut min = f64::INFINITY;
    for &l in &x.both {
        let z = x.p.num.weyl_data(l)?.z();
        let g = x.p.engine().space().solution_gram(&z, &z)?;
        herm = herm.max(linalg::norm(&(&g - g.adjoint())) / (1.0 + linalg::norm(&g)));
        min = min.min(linalg::min_hermitian_eigenvalue(&linalg::hermitian_part(&g)));
    }
    Ok(Outcome {
        status: pass_if(herm <= 1e-12 && min >= -1e-10),
        value: Some(herm),
        tolerance: Some(1e-12),
        detail: format!("relative Hermiticity defect {herm:.2e}, smallest eigenvalue {min:.2e} (≥ -1e-10)"),
    })
}

fn boundary_form(x: &Ctx) -> Result<Outcome> {
    let num = &x.p.num;
    let bmap = num.bmap();
    let j = num.engine().system().j();
    let mut worst = 0.0f64;
    for &l in &x.both {
        for &m in &x.both {
            let yb = num.weyl_data(l)?.z().at_b().clone();
            let zb = num.weyl_data(m)?.z().at_b().clone();
            let direct = bmap.boundary_form(j, &yb, &zb);
            let split = bmap.split_form(&yb, &zb);
            worst = worst.max(linalg::norm(&(&direct - split)) / (1.0 + linalg::norm(&direct)));
        }
    }
    Ok(at_most(worst, 1e-10, format!("relative defect {worst:.2e} of the component split of (Jy(b), z(b))")))
}

fn lagrange(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let mut rng = x.rng();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (y, f) = triplet::random_tmax_pair(e, &mut rng)?;
        let (z, g) = triplet::random_tmax_pair(e, &mut rng)?;
        worst = worst.max(triplet::lagrange_residual(e, (&y, &f), (&z, &g))?);
    }
    Ok(at_most(worst, 1e-8, format!("relative residual {worst:.2e} over 50 random pairs")))
}

fn weyl_nevanlinna(x: &Ctx) -> Result<Outcome> {
    let mut sym = 0.0f64;
    let mut min = f64::INFINITY;
    for &l in &x.upper {
        let m = x.p.num.weyl_matrix(l)?.value;
        let mc = x.p.num.weyl_matrix(l.conj())?.value;
        sym = sym.max(linalg::norm(&(mc - m.adjoint())));
        min = min.min(linalg::min_hermitian_eigenvalue(&(linalg::imag_part(&m) * re(1.0 / l.im))));
    }
    Ok(Outcome {
        status: pass_if(sym <= 1e-9 && min >= -1e-9),
        value: Some(sym),
        tolerance: Some(1e-9),
        detail: format!("‖M(λ̄) - M(λ)*‖ {sym:.2e}, min eig Im M / Im λ {min:.2e} (≥ -1e-9)"),
    })
}

fn weyl_identity(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let bmap = RegularBoundaryMap::for_engine(e);
    let grid: Vec<C64> = x.upper.iter().copied().chain([I, c(1.0, 2.0), c(-2.0, 0.5)]).take(3).collect();
    let mut worst = 0.0f64;
    for &l in &grid {
        for &m in &grid {
            worst = worst.max(triplet::weyl_identity_residual(e, &bmap, l, m)?);
        }
    }
    Ok(at_most(worst, 1e-7, format!("residual {worst:.2e} on a {0}×{0} grid", grid.len())))
}

fn admissibility(x: &Ctx) -> Result<Outcome> {
    let adm = x.p.engine().tolerances().adm;
    let rep = check_admissibility(&x.p.tau, &x.p.num.dims(), &x.both, adm)?;
    let worst_form = rep.samples.iter().map(|s| s.min_form_eigenvalue).fold(f64::INFINITY, f64::min);
    let worst_sym = rep.samples.iter().map(|s| s.symmetry_defect).fold(0.0, f64::max);
    Ok(Outcome {
        status: pass_if(rep.passed),
        value: Some(worst_sym),
        tolerance: Some(adm),
        detail: format!("rank, sign (min {worst_form:.2e}) and symmetry ({worst_sym:.2e}) at {} points", rep.samples.len()),
    })
}

fn tau_symmetry(x: &Ctx) -> Result<Outcome> {
    let tau = &x.p.tau;
    let dims = x.p.num.dims();
    match tau {
        BoundaryParameter::ConstantSelfAdjoint(pair) => {
            let ip = to_interface_pair(pair, &dims)?;
            let lhs = &ip.ca * dims.j() * ip.ca.adjoint();
            let rhs = &ip.cb * dims.j_b() * ip.cb.adjoint();
            let defect = linalg::norm(&(&lhs - rhs)) / (1.0 + linalg::norm(&lhs));
            let full = linalg::rank(&linalg::hcat(&[&ip.ca, &ip.cb]), 1e-12) == dims.dim0();
            Ok(Outcome {
                status: pass_if(full && defect <= 1e-12),
                value: Some(defect),
                tolerance: Some(1e-12),
                detail: format!("C_a J C_a* - C_b J_b C_b* relative {defect:.2e}, full rank {full}"),
            })
        }
        BoundaryParameter::RationalNevanlinna(_) => {
            let mut sym = 0.0f64;
            let mut min = f64::INFINITY;
            for &l in &x.upper {
                let t = tau.operator_at(l)?;
                sym = sym.max(linalg::norm(&(tau.operator_at(l.conj())? - t.adjoint())));
                min = min.min(linalg::min_hermitian_eigenvalue(&(linalg::imag_part(&t) * re(1.0 / l.im))));
            }
            Ok(Outcome {
                status: pass_if(sym <= 1e-12 && min >= -1e-12),
                value: Some(sym),
                tolerance: Some(1e-12),
                detail: format!("‖τ(λ̄) - τ(λ)*‖ {sym:.2e}, min eig Im τ / Im λ {min:.2e}"),
            })
        }
        BoundaryParameter::ConstantPair { .. } => Ok(skipped("constant non-self-adjoint pair; covered by admissibility")),
    }
}

fn interface_round_trip(x: &Ctx) -> Result<Outcome> {
    let dims = x.p.num.dims();
    let mut ok = true;
    for &l in &x.both {
        let pair = x.p.tau.pair_at(l)?;
        let back = from_interface_pair(&to_interface_pair(&pair, &dims)?, &dims, 1e-12)?;
        ok &= back.equivalent(&pair, 1e-12);
    }
    Ok(Outcome {
        status: pass_if(ok),
        value: None,
        tolerance: Some(1e-12),
        detail: format!("pair → (C_a, C_b) → pair equivalent at {} points", x.both.len()),
    })
}

fn omega_routes(x: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut krein = 0;
    for &l in &x.both {
        let mut vals = Vec::new();
        for route in Route::ALL {
            match charmat::omega(&x.p.num, &x.p.tau, l, route) {
                Ok(v) => vals.push(v),
                Err(Error::OperatorFormRequired { .. }) if route == Route::Krein => {}
                Err(e) => return Err(e),
            }
        }
        if vals.len() == Route::ALL.len() {
            krein += 1;
        }
        for a in &vals {
            for b in &vals {
                worst = worst.max(linalg::norm(&(a - b)));
            }
        }
    }
    let tol = x.p.engine().tolerances().route;
    Ok(at_most(worst, tol, format!("max pairwise distance {worst:.2e}; Krein form at {krein} of {} points", x.both.len())))
}

fn omega_z(x: &Ctx) -> Result<Outcome> {
    let j = x.p.engine().system().j();
    let mut worst = 0.0f64;
    let mut bc = 0.0f64;
    for &l in &x.both {
        let omega = charmat::omega(&x.p.num, &x.p.tau, l, Route::Correction)?;
        let z = charmat::z_tau(&x.p.num, &x.p.tau, l)?;
        bc = bc.max(z.bc_residual);
        worst = worst.max(linalg::norm(&(omega - charmat::omega_from_z(&z, j))));
    }
    Ok(at_most(worst, 1e-8, format!("‖Ω_τ - Z_τ(a) - J/2‖ {worst:.2e}, boundary residual {bc:.2e}")))
}

fn omega_symmetry(x: &Ctx) -> Result<Outcome> {
    let cm = CharacteristicMatrix::compute(&x.p.num, &x.p.tau, &x.both, Route::Correction)?;
    let d = cm.symmetry_defect();
    Ok(at_most(d, 1e-8, format!("‖Ω(λ̄) - Ω(λ)*‖ {d:.2e}")))
}

fn imag_bound(x: &Ctx) -> Result<Outcome> {
    let sa = x.p.tau.is_self_adjoint();
    let mut min = f64::INFINITY;
    let mut abs = 0.0f64;
    for &l in &x.both {
        let b = charmat::imag_bound_check(&x.p.num, &x.p.tau, l)?;
        min = min.min(b.min_eigenvalue);
        abs = abs.max(b.min_eigenvalue.abs());
    }
    let ok = min >= -1e-8 && (!sa || abs <= 1e-7);
    let detail = if sa {
        format!("min eigenvalue {min:.2e} (≥ -1e-8), |value| {abs:.2e} (≤ 1e-7 for self-adjoint τ)")
    } else {
        format!("min eigenvalue {min:.2e} (≥ -1e-8)")
    };
    Ok(Outcome { status: pass_if(ok), value: Some(min), tolerance: Some(-1e-8), detail })
}

fn display_equivalence(x: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &l in &x.upper {
        let w = x.p.num.weyl_matrix(l)?;
        worst = worst.max(charmat::omega_tilde(&x.p.tau.pair_at(l)?, &w)?.display_residual);
    }
    Ok(at_most(worst, 1e-11, format!("pair display vs resolvent display {worst:.2e}")))
}

fn resolvent_routes(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let mut rng = x.rng();
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let f = random_smooth_function(&mut rng, e.mesh(), e.dim(), 4);
        for &l in &x.upper {
            let grid = CharacteristicMatrix::compute(&x.p.num, &x.p.tau, &[l], Route::Correction)?;
            let bvp = resolvent::resolve_bvp(e, &x.p.tau, l, &f)?.y;
            let ker = resolvent::resolve_kernel(e, &grid, l, &f)?.y;
            let kr = resolvent::resolve_krein(&x.p.num, &x.p.tau, l, &f)?.y;
            for (a, b) in [(&bvp, &ker), (&bvp, &kr), (&ker, &kr)] {
                worst = worst.max(relative_distance(e, a, b)?);
            }
        }
    }
    Ok(at_most(worst, 1e-6, format!("max relative ‖·‖_Δ distance {worst:.2e} (boundary value, kernel, Krein)")))
}

fn resolvent_adjoint(x: &Ctx) -> Result<Outcome> {
    if !x.p.tau.is_self_adjoint() {
        return Ok(skipped("claimed for self-adjoint τ"));
    }
    let e = x.p.engine();
    let mut rng = x.rng();
    let f = random_smooth_function(&mut rng, e.mesh(), e.dim(), 4);
    let g = random_smooth_function(&mut rng, e.mesh(), e.dim(), 4);
    let mut worst = 0.0f64;
    for &l in &x.upper {
        let rf = resolvent::resolve_bvp(e, &x.p.tau, l, &f)?.y;
        let rg = resolvent::resolve_bvp(e, &x.p.tau, l.conj(), &g)?.y;
        worst = worst.max((e.space().delta_inner(&rf, &g)? - e.space().delta_inner(&f, &rg)?).norm());
    }
    Ok(at_most(worst, 1e-7, format!("|(R(λ)f, g) - (f, R(λ̄)g)| {worst:.2e}")))
}

fn canonical_identity(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let f = random_smooth_function(&mut x.rng(), e.mesh(), e.dim(), 4);
    let (l, m) = (I, c(0.0, 2.0));
    let r = resolvent::resolvent_identity_residual(e, &x.p.tau, l, m, &f)?;
    if x.p.tau.is_self_adjoint() {
        return Ok(at_most(r, 1e-6, format!("self-adjoint τ: Hilbert identity residual {r:.2e} at (i, 2i)")));
    }
    let lambda_dependent = match &x.p.tau {
        BoundaryParameter::RationalNevanlinna(rn) => linalg::norm(&rn.b) > 0.0 || !rn.terms.is_empty(),
        _ => false,
    };
    if lambda_dependent {
        Ok(at_least(r, 1e-3, format!("λ-dependent τ: Hilbert identity residual {r:.2e} at (i, 2i)")))
    } else {
        Ok(Outcome {
            status: Status::Skipped,
            value: Some(r),
            tolerance: None,
            detail: format!("constant non-self-adjoint τ, no claim: residual {r:.2e}"),
        })
    }
}

fn green_symmetry(x: &Ctx) -> Result<Outcome> {
    let e = x.p.engine();
    let (a, b) = e.system().interval();
    let samples: Vec<f64> = (0..12).map(|k| a + (b - a) * (k as f64 + 0.5) / 12.0).collect();
    let mut worst = 0.0f64;
    for &l in &x.upper {
        let g = GreenKernel::new(e, l)?;
        let gc = GreenKernel::new(e, l.conj())?;
        worst = worst.max(resolvent::green_symmetry_residual(&g, &gc, &samples));
    }
    Ok(at_most(worst, 1e-8, format!("‖G(x, t, λ) - G(t, x, λ̄)*‖ {worst:.2e}")))
}

fn eigen_conditioning(x: &Ctx) -> Result<Outcome> {
    let Some(spec) = &x.p.config.eig else {
        return Ok(skipped("no eig interval configured"));
    };
    if !x.p.tau.is_self_adjoint() {
        return Ok(skipped("eigenvalue scan needs a self-adjoint τ"));
    }
    let scan = resolvent::eig_scan(x.p.engine(), &x.p.tau, spec.lo, spec.hi, spec.grid)?;
    let min = scan.eigenvalues.iter().map(|v| v.condition).fold(f64::INFINITY, f64::min);
    if scan.eigenvalues.is_empty() {
        return Ok(skipped("no eigenvalues in the configured interval"));
    }
    Ok(at_least(min, 1e10, format!("{} eigenvalues, smallest condition number {min:.2e}", scan.eigenvalues.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut n: Vec<&str> = CHECKS.iter().map(|c| c.0).collect();
        n.sort();
        n.dedup();
        assert_eq!(n.len(), CHECKS.len());
        assert!(n.len() >= 12);
    }
}
