//! Generalized resolvents `R_τ(λ) f` and eigenvalue scans.
//!
//! `y = R_τ(λ) f` solves `J y' - B y = λ Δ y + Δ f` with
//! `C_a(λ) y(a) + C_b(λ) Γ_b y = 0`. Four independent assemblies are
//! offered: a direct two-point solve, the characteristic-matrix kernel,
//! the Green function of `A₀`, and the Krein formula on top of it.

use std::fmt;
use std::sync::Arc;

use crate::charmat::{self, CharacteristicMatrix, NumericWeyl, WeylMatrix};
use crate::linalg::{self, re, CMat, CVec, C64};
use crate::ode::{Engine, FundamentalSolution};
use crate::parameter::{to_interface_pair, BoundaryParameter, InterfaceDims, InterfacePair};
use crate::triplet::{self, solve_equilibrated};
use crate::weighted::{QuadratureMesh, WeightedFunction};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResolventRoute {
    BoundaryValue,
    Kernel,
    Green,
    Krein,
}

impl fmt::Display for ResolventRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BoundaryValue => "bvp",
            Self::Kernel => "kernel",
            Self::Green => "green",
            Self::Krein => "krein",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ResolventResult {
    pub lambda: C64,
    pub route: ResolventRoute,
    pub f: WeightedFunction,
    pub y: WeightedFunction,
    /// Relative boundary-condition residual; `None` when the route does not
    /// see `τ`.
    pub bc_residual: Option<f64>,
    pub ode_residual: f64,
}

impl ResolventResult {
    fn finish(
        engine: &Engine,
        lambda: C64,
        route: ResolventRoute,
        f: &WeightedFunction,
        y: WeightedFunction,
        bc: Option<f64>,
    ) -> Result<Self> {
        let ode_residual = engine.ode_residual(&y, lambda, Some(f))?;
        Ok(Self { lambda, route, f: f.clone(), y, bc_residual: bc, ode_residual })
    }
}

fn interface_at(engine: &Engine, tau: &BoundaryParameter, lambda: C64) -> Result<InterfacePair> {
    let dec = engine.system().decomposition();
    to_interface_pair(&tau.pair_at(lambda)?, &InterfaceDims::equal_index(dec.dim_h(), dec.dim_hhat()))
}

/// `C_a + C_b Y₀(b, λ)`: its null space is the set of initial values of
/// homogeneous solutions that satisfy the boundary condition.
pub fn boundary_matrix(ip: &InterfacePair, fund: &FundamentalSolution) -> CMat {
    &ip.ca + &ip.cb * fund.monodromy()
}

/// `dim` of the solution space of the homogeneous boundary problem at `λ`.
pub fn homogeneous_solution_count(engine: &Engine, tau: &BoundaryParameter, lambda: C64, tol: f64) -> Result<usize> {
    let ip = interface_at(engine, tau, lambda)?;
    let fund = engine.fundamental(lambda)?;
    let d = boundary_matrix(&ip, &fund);
    Ok(d.nrows() - linalg::rank(&d, tol))
}

fn bc_residual(ip: &InterfacePair, y: &WeightedFunction) -> f64 {
    let ya = y.at(0);
    let yb = y.at(y.values().len() - 1);
    let defect = linalg::vnorm(&(&ip.ca * ya + &ip.cb * yb));
    let scale = linalg::norm(&ip.ca) * linalg::vnorm(ya) + linalg::norm(&ip.cb) * linalg::vnorm(yb);
    if scale == 0.0 {
        defect
    } else {
        defect / scale
    }
}

fn check_lambda(tau: &BoundaryParameter, lambda: C64) -> Result<()> {
    if lambda.im == 0.0 && !tau.is_self_adjoint() {
        return Err(Error::SpectralParameter { lambda, reason: "real λ needs a self-adjoint τ" });
    }
    Ok(())
}

/// Variation of parameters plus one linear solve for `y(a)`.
pub fn resolve_bvp(engine: &Engine, tau: &BoundaryParameter, lambda: C64, f: &WeightedFunction) -> Result<ResolventResult> {
    check_lambda(tau, lambda)?;
    let ip = interface_at(engine, tau, lambda)?;
    let n = engine.dim();
    let particular = engine.solve_inhomogeneous(lambda, f, &CVec::zeros(n))?;
    let fund = engine.fundamental(lambda)?;
    let d = boundary_matrix(&ip, &fund);
    let rhs = -(&ip.cb * particular.at(particular.values().len() - 1));
    let rhs = CMat::from_column_slice(n, 1, rhs.as_slice());
    let what = if lambda.im == 0.0 { "boundary matrix (λ is an eigenvalue)" } else { "boundary matrix" };
    let ya = solve_equilibrated(&d, &rhs, engine.tolerances().cond, what, lambda)?;
    let homogeneous = engine.propagate(&fund, &ya)?.column(0);
    let y = particular.add(&homogeneous)?;
    let bc = bc_residual(&ip, &y);
    ResolventResult::finish(engine, lambda, ResolventRoute::BoundaryValue, f, y, Some(bc))
}

/// `∫_a^t Y*(s) Δ(s) f(s) ds` at every node, with `Y` given by its node values.
fn running_adjoint(engine: &Engine, y: &[CMat], f: &WeightedFunction) -> Vec<CMat> {
    let space = engine.space();
    let integrand: Vec<CMat> = (0..y.len())
        .map(|j| {
            let df = space.delta_at_node(j) * f.at(j);
            y[j].ad_mul(&CMat::from_column_slice(df.len(), 1, df.as_slice()))
        })
        .collect();
    engine.mesh().cumulative(&integrand)
}

fn check_f(engine: &Engine, f: &WeightedFunction) -> Result<()> {
    if **f.mesh() != **engine.mesh() {
        return Err(Error::MeshMismatch);
    }
    if f.dim() != engine.dim() {
        return Err(Error::DimensionMismatch {
            context: "resolvent input",
            expected: engine.dim().to_string(),
            found: f.dim().to_string(),
        });
    }
    Ok(())
}

fn to_function(mesh: &Arc<QuadratureMesh>, cols: Vec<CMat>) -> Result<WeightedFunction> {
    WeightedFunction::new(mesh.clone(), cols.into_iter().map(|m| m.column(0).into_owned()).collect())
}

/// `y(x) = ∫ Y₀(x, λ)(Ω + ½ sgn(t - x) J) Y₀*(t, λ̄) Δ(t) f(t) dt`, with the
/// integral split at the node `x`.
pub fn apply_characteristic_kernel(engine: &Engine, omega: &CMat, lambda: C64, f: &WeightedFunction) -> Result<WeightedFunction> {
    check_f(engine, f)?;
    let n = engine.dim();
    if omega.nrows() != n || omega.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "characteristic matrix",
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", omega.nrows(), omega.ncols()),
        });
    }
    let fund = engine.fundamental(lambda)?;
    let fund_conj = engine.fundamental(lambda.conj())?;
    let left = running_adjoint(engine, fund_conj.values(), f);
    let total = left.last().expect("mesh has nodes").clone();
    let j = engine.system().j();
    let base = omega * &total + j * &total * re(0.5);
    let cols = left.iter().enumerate().map(|(k, l)| fund.at(k) * (&base - j * l)).collect();
    to_function(engine.mesh(), cols)
}

/// Kernel route with `Ω_τ(λ)` taken from a precomputed grid.
pub fn resolve_kernel(
    engine: &Engine,
    omega: &CharacteristicMatrix,
    lambda: C64,
    f: &WeightedFunction,
) -> Result<ResolventResult> {
    let idx = omega
        .lambdas
        .iter()
        .position(|l| *l == lambda)
        .ok_or_else(|| Error::InvalidInput(format!("λ = {lambda} is not on the characteristic-matrix grid")))?;
    let y = apply_characteristic_kernel(engine, &omega.values[idx], lambda, f)?;
    ResolventResult::finish(engine, lambda, ResolventRoute::Kernel, f, y, None)
}

/// Green function of `A₀`:
/// `G₀(x, t, λ) = v₀(x, λ) φ*(t, λ̄)` for `x > t` and `φ(x, λ) v₀*(t, λ̄)` for
/// `x < t`, with `φ` the first `dim H₀` columns of `Y₀`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    lambda: C64,
    h0: usize,
    fund: Arc<FundamentalSolution>,
    fund_conj: Arc<FundamentalSolution>,
    /// `v₀(a, λ)` and `v₀(a, λ̄)`.
    v0a: CMat,
    v0a_conj: CMat,
}

impl GreenKernel {
    pub fn new(engine: &Engine, lambda: C64) -> Result<Self> {
        let h0 = engine.system().decomposition().dim_h0();
        let za = triplet::defining_initial_values(engine, lambda)?;
        let za_conj = triplet::defining_initial_values(engine, lambda.conj())?;
        Ok(Self {
            lambda,
            h0,
            fund: engine.fundamental(lambda)?,
            fund_conj: engine.fundamental(lambda.conj())?,
            v0a: za.columns(0, h0).into_owned(),
            v0a_conj: za_conj.columns(0, h0).into_owned(),
        })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    fn phi_a(&self) -> CMat {
        linalg::coordinate_projection(self.fund.monodromy().nrows(), 0, self.h0).transpose()
    }

    /// `G₀(x, t, λ)`; the mean of both branches on the diagonal.
    pub fn evaluate(&self, x: f64, t: f64) -> CMat {
        let yx = self.fund.eval(x);
        let yt = self.fund_conj.eval(t);
        let phi = self.phi_a();
        let lower = || &yx * &self.v0a * (&yt * &phi).adjoint();
        let upper = || &yx * &phi * (&yt * &self.v0a_conj).adjoint();
        if x > t {
            lower()
        } else if x < t {
            upper()
        } else {
            (lower() + upper()) * re(0.5)
        }
    }

    /// `∫ G₀(·, t, λ) Δ(t) f(t) dt`.
    pub fn apply(&self, engine: &Engine, f: &WeightedFunction) -> Result<WeightedFunction> {
        check_f(engine, f)?;
        let phi = self.phi_a();
        let conj_phi: Vec<CMat> = self.fund_conj.values().iter().map(|y| y * &phi).collect();
        let conj_v0: Vec<CMat> = self.fund_conj.values().iter().map(|y| y * &self.v0a_conj).collect();
        let left = running_adjoint(engine, &conj_phi, f);
        let right_run = running_adjoint(engine, &conj_v0, f);
        let total = right_run.last().expect("mesh has nodes").clone();
        let cols = (0..left.len())
            .map(|k| {
                let y = self.fund.at(k);
                y * &self.v0a * &left[k] + y * &phi * (&total - &right_run[k])
            })
            .collect();
        to_function(engine.mesh(), cols)
    }
}

/// `max ‖G₀(x, t, λ)* - G₀(t, x, λ̄)‖` over a sample grid.
pub fn green_symmetry_residual(g: &GreenKernel, g_conj: &GreenKernel, samples: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &x in samples {
        for &t in samples {
            if x != t {
                worst = worst.max(linalg::norm(&(g.evaluate(x, t).adjoint() - g_conj.evaluate(t, x))));
            }
        }
    }
    worst
}

/// `(A₀ - λ)⁻¹ f` through the Green function.
pub fn resolve_green(engine: &Engine, lambda: C64, f: &WeightedFunction) -> Result<ResolventResult> {
    let y = GreenKernel::new(engine, lambda)?.apply(engine, f)?;
    ResolventResult::finish(engine, lambda, ResolventRoute::Green, f, y, None)
}

/// `(A₀ - λ)⁻¹ f + γ(λ) T_τ(λ) γ*(λ̄) f`.
pub fn resolve_krein(num: &NumericWeyl, tau: &BoundaryParameter, lambda: C64, f: &WeightedFunction) -> Result<ResolventResult> {
    check_lambda(tau, lambda)?;
    let engine = num.engine();
    let green = GreenKernel::new(engine, lambda)?.apply(engine, f)?;
    let data = num.weyl_data(lambda)?;
    let pair = tau.pair_at(lambda)?;
    let t = charmat::t_tau(&pair, &WeylMatrix::from(&data))?;
    let z_conj = num.weyl_data(lambda.conj())?.z();
    let coeffs = t * engine.space().adjoint_apply(&z_conj, f)?;
    let correction = engine.space().apply_solution(&data.z(), &coeffs)?;
    let y = green.add(&correction)?;
    let bc = bc_residual(&interface_at(engine, tau, lambda)?, &y);
    ResolventResult::finish(engine, lambda, ResolventRoute::Krein, f, y, Some(bc))
}

/// `‖R(λ)f - R(μ)f - (λ - μ) R(λ) R(μ) f‖_Δ / ‖R(λ)f - R(μ)f‖_Δ` with the
/// boundary-value route.
pub fn resolvent_identity_residual(
    engine: &Engine,
    tau: &BoundaryParameter,
    lambda: C64,
    mu: C64,
    f: &WeightedFunction,
) -> Result<f64> {
    let rl = resolve_bvp(engine, tau, lambda, f)?.y;
    let rm = resolve_bvp(engine, tau, mu, f)?.y;
    let rlm = resolve_bvp(engine, tau, lambda, &rm)?.y;
    let diff = rl.sub(&rm)?;
    let defect = diff.sub(&rlm.scaled(lambda - mu))?;
    let space = engine.space();
    Ok(space.delta_norm(&defect)? / space.delta_norm(&diff)?)
}

/// `‖y₁ - y₂‖_Δ / ‖y₁‖_Δ`.
pub fn relative_distance(engine: &Engine, y1: &WeightedFunction, y2: &WeightedFunction) -> Result<f64> {
    let space = engine.space();
    let base = space.delta_norm(y1)?;
    let d = space.delta_norm(&y1.sub(y2)?)?;
    Ok(if base == 0.0 { d } else { d / base })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvalue {
    pub value: f64,
    pub bracket: (f64, f64),
    pub bisections: usize,
    /// Row-equilibrated condition number of the boundary matrix at `value`.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenScan {
    pub eigenvalues: Vec<Eigenvalue>,
    /// Largest `|Im q| / max |q|` of the phase-normalized determinant on
    /// the scan grid; near zero for a self-adjoint problem.
    pub phase_defect: f64,
    pub grid_points: usize,
}

/// `det(C_a + C_b Y₀(b, λ)) · det Y₀(b, λ)^{-1/2}`, the square root taken
/// through `det Y₀(b, λ) = exp(-∫ tr J(B + λΔ))`. For self-adjoint `τ` this
/// has constant phase on the real line.
struct NormalizedDeterminant<'a> {
    engine: &'a Engine,
    ip: InterfacePair,
    trace_b: C64,
    trace_delta: C64,
}

impl<'a> NormalizedDeterminant<'a> {
    fn new(engine: &'a Engine, ip: InterfacePair) -> Self {
        let sys = engine.system();
        let mesh = engine.mesh();
        let j = sys.j();
        let nodes = mesh.nodes();
        let tb = mesh.integrate(1, 1, |k| CMat::from_element(1, 1, (j * sys.b_at(nodes[k])).trace()))[(0, 0)];
        let td = mesh.integrate(1, 1, |k| CMat::from_element(1, 1, (j * engine.space().delta_at_node(k)).trace()))[(0, 0)];
        Self { engine, ip, trace_b: tb, trace_delta: td }
    }

    fn matrix(&self, lambda: f64) -> Result<CMat> {
        Ok(&self.ip.ca + &self.ip.cb * self.engine.monodromy(re(lambda))?)
    }

    fn value(&self, lambda: f64) -> Result<C64> {
        let monodromy = self.engine.monodromy(re(lambda))?;
        let det = (&self.ip.ca + &self.ip.cb * &monodromy).determinant();
        // the quadrature of the trace and the integrated det Y₀(b) differ by a
        // factor close to one; dividing by its root keeps q real to roundoff
        let liouville = ((self.trace_b + self.trace_delta * lambda) * 0.5).exp();
        let drift = monodromy.determinant() * liouville * liouville;
        Ok(det * liouville / drift.sqrt())
    }
}

/// Eigenvalues of the self-adjoint problem in `[lo, hi]`: sign changes of the
/// phase-normalized boundary determinant on `grid` points, refined by
/// bisection to the `eig` tolerance. Double roots without a sign change are
/// not detected.
pub fn eig_scan(engine: &Engine, tau: &BoundaryParameter, lo: f64, hi: f64, grid: usize) -> Result<EigenScan> {
    if !tau.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint { what: "eigenvalue scan" });
    }
    if lo.is_nan() || hi.is_nan() || lo >= hi || grid < 2 {
        return Err(Error::InvalidInput("scan needs lo < hi and at least two grid points".into()));
    }
    let det = NormalizedDeterminant::new(engine, interface_at(engine, tau, re(lo))?);
    let xs: Vec<f64> = (0..grid).map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64).collect();
    let qs = xs.iter().map(|&x| det.value(x)).collect::<Result<Vec<_>>>()?;
    let peak = qs.iter().copied().fold(re(0.0), |acc, q| if q.norm() > acc.norm() { q } else { acc });
    if peak.norm() == 0.0 {
        return Ok(EigenScan { eigenvalues: Vec::new(), phase_defect: 0.0, grid_points: grid });
    }
    let rot = (peak / peak.norm()).conj();
    let real: Vec<f64> = qs.iter().map(|q| (q * rot).re).collect();
    let phase_defect = qs.iter().map(|q| (q * rot).im.abs()).fold(0.0, f64::max) / peak.norm();
    let f = |x: f64| -> Result<f64> { Ok((det.value(x)? * rot).re) };
    let tol = engine.tolerances().eig;
    let mut eigenvalues = Vec::new();
    for k in 0..grid - 1 {
        let (a, b) = (xs[k], xs[k + 1]);
        let (fa, fb) = (real[k], real[k + 1]);
        if fa == 0.0 {
            eigenvalues.push(finish_root(&det, a, (a, a), 0)?);
            continue;
        }
        if fa * fb >= 0.0 {
            if k == grid - 2 && fb == 0.0 {
                eigenvalues.push(finish_root(&det, b, (b, b), 0)?);
            }
            continue;
        }
        let (mut l, mut h, mut fl, mut fh) = (a, b, fa, fb);
        let mut steps = 0;
        while (h - l) > tol * l.abs().max(h.abs()).max(1.0) && steps < 200 {
            let m = 0.5 * (l + h);
            let fm = f(m)?;
            steps += 1;
            if fm == 0.0 {
                l = m;
                h = m;
                break;
            }
            if (fm > 0.0) == (fl > 0.0) {
                l = m;
                fl = fm;
            } else {
                h = m;
                fh = fm;
            }
        }
        // a final secant step inside the bracket sharpens the root well past the bisection width
        let root = if h > l && fh != fl {
            (l - fl * (h - l) / (fh - fl)).clamp(l, h)
        } else {
            0.5 * (l + h)
        };
        eigenvalues.push(finish_root(&det, root, (a, b), steps)?);
    }
    Ok(EigenScan { eigenvalues, phase_defect, grid_points: grid })
}

fn finish_root(det: &NormalizedDeterminant<'_>, value: f64, bracket: (f64, f64), bisections: usize) -> Result<Eigenvalue> {
    let condition = linalg::row_equilibrated_condition(&det.matrix(value)?);
    Ok(Eigenvalue { value, bracket, bisections, condition })
}
