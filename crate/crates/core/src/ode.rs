//! Fundamental solutions of `y' = -J (B(t) + λ Δ(t)) y`.
//!
//! Integration uses the Dormand–Prince 5(4) pair with FSAL and its
//! fourth-order continuous extension. Solutions are stored at the nodes of
//! the engine's quadrature mesh; the accepted steps are kept so that
//! [`FundamentalSolution::eval`] works anywhere in `[a, b]`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::linalg::{self, key, re, CMat, CVec, C64};
use crate::system::SymmetricSystem;
use crate::weighted::{QuadratureMesh, WeightedFunction, WeightedSpace};
use crate::{Error, Result, Tolerances};

/// Grid-sampled `𝐇 × k` solution `Y(·, λ)`.
#[derive(Debug, Clone)]
pub struct SolutionMatrix {
    lambda: C64,
    mesh: Arc<QuadratureMesh>,
    values: Vec<CMat>,
}

impl SolutionMatrix {
    pub fn new(mesh: Arc<QuadratureMesh>, lambda: C64, values: Vec<CMat>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshMismatch);
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.shape() != first.shape()) {
                return Err(Error::InvalidInput("solution samples differ in shape".into()));
            }
        }
        Ok(Self { lambda, mesh, values })
    }

    pub fn from_fn<F>(mesh: Arc<QuadratureMesh>, lambda: C64, f: F) -> Self
    where
        F: Fn(f64) -> CMat,
    {
        let values = mesh.nodes().iter().map(|&t| f(t)).collect();
        Self { lambda, mesh, values }
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn at(&self, j: usize) -> &CMat {
        &self.values[j]
    }

    pub fn at_a(&self) -> &CMat {
        &self.values[0]
    }

    pub fn at_b(&self) -> &CMat {
        &self.values[self.values.len() - 1]
    }

    pub fn rows(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.values[0].ncols()
    }

    /// `Y(t) K` for a constant `K`.
    pub fn mul_right(&self, k: &CMat) -> SolutionMatrix {
        Self { lambda: self.lambda, mesh: self.mesh.clone(), values: self.values.iter().map(|v| v * k).collect() }
    }

    pub fn columns(&self, start: usize, count: usize) -> SolutionMatrix {
        let values = self.values.iter().map(|v| v.columns(start, count).into_owned()).collect();
        Self { lambda: self.lambda, mesh: self.mesh.clone(), values }
    }

    /// Column-wise concatenation `(Y, Z)`.
    pub fn hcat(&self, other: &SolutionMatrix) -> Result<SolutionMatrix> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) && *self.mesh != *other.mesh {
            return Err(Error::MeshMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| linalg::hcat(&[a, b])).collect();
        Ok(Self { lambda: self.lambda, mesh: self.mesh.clone(), values })
    }

    pub fn column(&self, k: usize) -> WeightedFunction {
        let values = self.values.iter().map(|v| v.column(k).into_owned()).collect();
        WeightedFunction::new(self.mesh.clone(), values).expect("same mesh")
    }
}

/// Coefficients of the continuous extension over one accepted step.
#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    r: [CMat; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> CMat {
        let s = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.r;
        r1 + (r2 + (r3 + (r4 + r5 * re(s1)) * re(s)) * re(s1)) * re(s)
    }
}

/// `Y₀(·, λ)` with `Y₀(a, λ) = I`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    lambda: C64,
    mesh: Arc<QuadratureMesh>,
    values: Vec<CMat>,
    steps: Vec<DenseStep>,
    rejected: usize,
}

impl FundamentalSolution {
    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn at(&self, j: usize) -> &CMat {
        &self.values[j]
    }

    /// `Y₀(b, λ)`.
    pub fn monodromy(&self) -> &CMat {
        &self.values[self.values.len() - 1]
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Dense-output value at any `t` in `[a, b]` (clamped outside).
    pub fn eval(&self, t: f64) -> CMat {
        let idx = self.steps.partition_point(|s| s.t0 + s.h < t);
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        step.eval(t)
    }

    pub fn as_solution(&self) -> SolutionMatrix {
        SolutionMatrix { lambda: self.lambda, mesh: self.mesh.clone(), values: self.values.clone() }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn lin(terms: &[(f64, &CMat)], h: f64) -> CMat {
    let mut acc = terms[0].1 * re(terms[0].0 * h);
    for (c, m) in &terms[1..] {
        if *c != 0.0 {
            acc += *m * re(c * h);
        }
    }
    acc
}

fn error_norm(err: &CMat, y0: &CMat, y1: &CMat, tol: &Tolerances) -> f64 {
    let mut sum = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let sc = tol.ode_atol + tol.ode_rtol * a.norm().max(b.norm());
        sum += (e.norm() / sc).powi(2);
    }
    (sum / err.len() as f64).sqrt()
}

/// Integrates `Y' = A(t) Y` from `a` to `b` starting at `initial`, sampling
/// the dense output at `mesh` nodes.
fn integrate(
    sys: &SymmetricSystem,
    lambda: C64,
    initial: &CMat,
    mesh: &QuadratureMesh,
    tol: &Tolerances,
) -> Result<(Vec<CMat>, Vec<DenseStep>, usize)> {
    let (a, b) = sys.interval();
    let rhs = |t: f64, y: &CMat| sys.generator(t, lambda) * y;
    let nodes = mesh.nodes();
    let mut out: Vec<CMat> = Vec::with_capacity(nodes.len());
    let mut next_node = 0;
    let mut steps = Vec::new();
    let mut rejected = 0;

    let mut t = a;
    let mut y = initial.clone();
    let mut k1 = rhs(t, &y);
    let span = b - a;
    let mut h = {
        let d0 = y.norm();
        let d1 = k1.norm();
        let guess = if d1 > 1e-10 && d0 > 1e-10 { 0.01 * d0 / d1 } else { 1e-3 * span };
        guess.min(span)
    };
    let mut reject_before = false;
    while t < b {
        if steps.len() >= tol.ode_max_steps {
            return Err(Error::TooManySteps { steps: steps.len(), t });
        }
        if h < 1e-14 * t.abs().max(span) {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= b;
        if last {
            h = b - t;
        }
        let k2 = rhs(t + C2 * h, &(&y + lin(&[(A21, &k1)], h)));
        let k3 = rhs(t + C3 * h, &(&y + lin(&[(A31, &k1), (A32, &k2)], h)));
        let k4 = rhs(t + C4 * h, &(&y + lin(&[(A41, &k1), (A42, &k2), (A43, &k3)], h)));
        let k5 = rhs(t + C5 * h, &(&y + lin(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h)));
        let k6 = rhs(t + h, &(&y + lin(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h)));
        let y_new = &y + lin(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let t_new = if last { b } else { t + h };
        let k7 = rhs(t_new, &y_new);
        let err = lin(&[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)], h);
        let en = error_norm(&err, &y, &y_new, tol);
        if !en.is_finite() {
            return Err(Error::StepUnderflow { t, h });
        }
        if en <= 1.0 {
            let ydiff = &y_new - &y;
            let bspl = &k1 * re(h) - &ydiff;
            let r4 = &ydiff - &k7 * re(h) - &bspl;
            let r5 = lin(&[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)], h);
            let step = DenseStep { t0: t, h: t_new - t, r: [y.clone(), ydiff, bspl, r4, r5] };
            while next_node < nodes.len() && (nodes[next_node] <= t_new || last) {
                let tn = nodes[next_node];
                out.push(if next_node == 0 { initial.clone() } else if tn >= t_new { y_new.clone() } else { step.eval(tn) });
                next_node += 1;
            }
            steps.push(step);
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            let fac = if reject_before { fac.min(1.0) } else { fac };
            t = t_new;
            y = y_new;
            k1 = k7;
            h *= fac;
            reject_before = false;
        } else {
            rejected += 1;
            h *= (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
            reject_before = true;
        }
    }
    Ok((out, steps, rejected))
}

/// Cached solutions kept per engine before the cache is dropped wholesale.
const CACHE_LIMIT: usize = 256;

/// Owns the system, its mesh and weight samples, and a per-`λ` cache of
/// fundamental solutions shared across threads.
#[derive(Debug)]
pub struct Engine {
    sys: Arc<SymmetricSystem>,
    space: Arc<WeightedSpace>,
    tol: Tolerances,
    cache: RwLock<HashMap<(u64, u64), Arc<FundamentalSolution>>>,
}

impl Engine {
    /// Uniform mesh with `panels` panels (at least two) on the system's
    /// interval.
    pub fn new(sys: SymmetricSystem, panels: usize, tol: Tolerances) -> Self {
        let (a, b) = sys.interval();
        let mesh = Arc::new(QuadratureMesh::uniform(a, b, panels.max(2)).expect("valid interval"));
        Self::with_mesh(sys, mesh, tol).expect("mesh spans the interval")
    }

    pub fn with_mesh(sys: SymmetricSystem, mesh: Arc<QuadratureMesh>, tol: Tolerances) -> Result<Self> {
        let (a, b) = sys.interval();
        if mesh.a() != a || mesh.b() != b {
            return Err(Error::MeshMismatch);
        }
        let space = Arc::new(WeightedSpace::new(&sys, mesh));
        Ok(Self { sys: Arc::new(sys), space, tol, cache: RwLock::new(HashMap::new()) })
    }

    pub fn system(&self) -> &SymmetricSystem {
        &self.sys
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        self.space.mesh()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    /// `Y₀(·, λ)`, computed once per exact `λ` value.
    pub fn fundamental(&self, lambda: C64) -> Result<Arc<FundamentalSolution>> {
        let k = key(lambda);
        if let Some(hit) = self.cache.read().expect("cache lock").get(&k) {
            return Ok(hit.clone());
        }
        let n = self.dim();
        let (values, steps, rejected) = integrate(&self.sys, lambda, &linalg::eye(n), self.mesh(), &self.tol)?;
        let fund = Arc::new(FundamentalSolution { lambda, mesh: self.mesh().clone(), values, steps, rejected });
        let mut cache = self.cache.write().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        Ok(cache.entry(k).or_insert(fund).clone())
    }

    /// `Y₀(b, λ)` without caching the solution; for real-axis scans that touch
    /// many `λ` once each.
    pub fn monodromy(&self, lambda: C64) -> Result<CMat> {
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key(lambda)) {
            return Ok(hit.monodromy().clone());
        }
        let n = self.dim();
        let (mut values, _, _) = integrate(&self.sys, lambda, &linalg::eye(n), self.mesh(), &self.tol)?;
        Ok(values.pop().expect("mesh has nodes"))
    }

    pub fn cached_count(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// `Y(t) = Y₀(t, λ) Y(a)`.
    pub fn propagate(&self, fund: &FundamentalSolution, initial: &CMat) -> Result<SolutionMatrix> {
        if initial.nrows() != self.dim() || initial.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                context: "propagate",
                expected: format!("{} x k with k >= 1", self.dim()),
                found: format!("{}x{}", initial.nrows(), initial.ncols()),
            });
        }
        let values = fund.values().iter().map(|y| y * initial).collect();
        SolutionMatrix::new(fund.mesh().clone(), fund.lambda(), values)
    }

    /// Variation of parameters for `J y' - B y = λ Δ y + Δ f` with `y(a) = y_a`:
    /// `y(t) = Y₀(t, λ) [y_a - J ∫_a^t Y₀*(s, λ̄) Δ(s) f(s) ds]`, using
    /// `Y₀(s, λ)⁻¹ = -J Y₀*(s, λ̄) J`.
    pub fn solve_inhomogeneous(&self, lambda: C64, f: &WeightedFunction, y_a: &CVec) -> Result<WeightedFunction> {
        let n = self.dim();
        if y_a.len() != n || f.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "solve_inhomogeneous",
                expected: n.to_string(),
                found: format!("y_a {}, f {}", y_a.len(), f.dim()),
            });
        }
        if **f.mesh() != **self.mesh() {
            return Err(Error::MeshMismatch);
        }
        let fund = self.fundamental(lambda)?;
        let fund_conj = self.fundamental(lambda.conj())?;
        let integrand: Vec<CMat> = (0..self.mesh().len())
            .map(|j| {
                let df = self.space.delta_at_node(j) * f.at(j);
                fund_conj.at(j).ad_mul(&CMat::from_column_slice(n, 1, df.as_slice()))
            })
            .collect();
        let running = self.mesh().cumulative(&integrand);
        let ya = CMat::from_column_slice(n, 1, y_a.as_slice());
        let j = self.sys.j();
        let values = running
            .iter()
            .enumerate()
            .map(|(k, c)| (fund.at(k) * (&ya - j * c)).column(0).into_owned())
            .collect();
        WeightedFunction::new(self.mesh().clone(), values)
    }

    /// Scaled symplectic residual, see [`symplectic_residual`].
    pub fn symplectic_residual(&self, lambda: C64) -> Result<f64> {
        let fund = self.fundamental(lambda)?;
        let conj = self.fundamental(lambda.conj())?;
        Ok(symplectic_residual(&fund, &conj, self.sys.j()))
    }

    /// Relative residual of `J y' - (B + λΔ) y - Δ f` at the mesh nodes, with
    /// `y'` from five-point differences.
    pub fn ode_residual(&self, y: &WeightedFunction, lambda: C64, f: Option<&WeightedFunction>) -> Result<f64> {
        let mesh = self.mesh();
        if **y.mesh() != **mesh || f.is_some_and(|f| **f.mesh() != **mesh) {
            return Err(Error::MeshMismatch);
        }
        let cols: Vec<CMat> = y.values().iter().map(|v| CMat::from_column_slice(v.len(), 1, v.as_slice())).collect();
        let forcing: Option<Vec<CMat>> =
            f.map(|f| f.values().iter().map(|v| CMat::from_column_slice(v.len(), 1, v.as_slice())).collect());
        Ok(self.residual_of_samples(&cols, lambda, forcing.as_deref()))
    }

    /// Largest column residual of a sampled homogeneous solution.
    pub fn solution_residual(&self, y: &SolutionMatrix) -> Result<f64> {
        if **y.mesh() != **self.mesh() {
            return Err(Error::MeshMismatch);
        }
        Ok(self.residual_of_samples(y.values(), y.lambda(), None))
    }

    fn residual_of_samples(&self, ys: &[CMat], lambda: C64, forcing: Option<&[CMat]>) -> f64 {
        let mesh = self.mesh();
        let h = mesh.step();
        let n = ys.len();
        let j = self.sys.j();
        let deriv = |k: usize| -> CMat {
            let c = |o: [f64; 5], s: usize| -> CMat {
                let mut acc = &ys[s] * re(o[0]);
                for (i, w) in o.iter().enumerate().skip(1) {
                    acc += &ys[s + i] * re(*w);
                }
                acc * re(1.0 / (12.0 * h))
            };
            if k >= 2 && k + 2 < n {
                c([1.0, -8.0, 0.0, 8.0, -1.0], k - 2)
            } else if k < 2 {
                let w = if k == 0 { [-25.0, 48.0, -36.0, 16.0, -3.0] } else { [-3.0, -10.0, 18.0, -6.0, 1.0] };
                c(w, 0)
            } else {
                let w = if k == n - 1 { [3.0, -16.0, 36.0, -48.0, 25.0] } else { [-1.0, 6.0, -18.0, 10.0, 3.0] };
                c(w, n - 5)
            }
        };
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..n {
            let t = mesh.nodes()[k];
            let delta = self.space.delta_at_node(k);
            let op = self.sys.b_at(t) + delta * lambda;
            let mut r = j * deriv(k) - &op * &ys[k];
            let mut sc = (op.norm() + 1.0) * ys[k].norm();
            if let Some(f) = forcing {
                let df = delta * &f[k];
                sc += df.norm();
                r -= df;
            }
            worst = worst.max(r.norm());
            scale = scale.max(sc);
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// `max_t ‖Y₀*(t, λ̄) J Y₀(t, λ) - J‖ / max(1, ‖Y₀(t, λ̄)‖ ‖Y₀(t, λ)‖)` for a
/// pair of fundamental solutions. The scaling is the roundoff floor of the
/// product, which matters once `Y₀` grows large.
pub fn symplectic_residual(fund: &FundamentalSolution, fund_conj: &FundamentalSolution, j: &CMat) -> f64 {
    fund.values()
        .iter()
        .zip(fund_conj.values())
        .map(|(y, yc)| {
            let scale = (linalg::norm(y) * linalg::norm(yc)).max(1.0);
            linalg::norm(&(yc.ad_mul(&(j * y)) - j)) / scale
        })
        .fold(0.0, f64::max)
}

/// Unscaled `max_t ‖Y₀*(t, λ̄) J Y₀(t, λ) - J‖`.
pub fn symplectic_defect(fund: &FundamentalSolution, fund_conj: &FundamentalSolution, j: &CMat) -> f64 {
    fund.values()
        .iter()
        .zip(fund_conj.values())
        .map(|(y, yc)| linalg::norm(&(yc.ad_mul(&(j * y)) - j)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::linalg::{c, eye, I};
    use std::f64::consts::PI;

    fn free2() -> Engine {
        Engine::new(builtins::free_system(1, 0, (0.0, 1.0)), 200, Tolerances::default())
    }

    #[test]
    fn free_system_closed_form() {
        let e = free2();
        let j = e.system().j().clone();
        for lambda in [re(PI), c(0.3, 1.2), c(-2.0, -0.5)] {
            let fund = e.fundamental(lambda).unwrap();
            for (k, &t) in e.mesh().nodes().iter().enumerate().step_by(17) {
                let exact = eye(2) * (lambda * t).cos() - &j * (lambda * t).sin();
                assert!((fund.at(k) - exact).norm() < 1e-9, "λ={lambda} t={t}");
            }
        }
        let fund = e.fundamental(re(PI)).unwrap();
        assert!((fund.monodromy() + eye(2)).norm() < 1e-9);
    }

    #[test]
    fn zero_generator_gives_identity() {
        let e = free2();
        let fund = e.fundamental(re(0.0)).unwrap();
        assert!(fund.values().iter().all(|y| (y - eye(2)).norm() < 1e-15));
    }

    #[test]
    fn sturm_liouville_monodromy_row() {
        let e = Engine::new(builtins::sturm_liouville_unit(), 200, Tolerances::default());
        for lambda in [c(0.0, 1.0), c(5.0, 3.0), re(20.0)] {
            let s = lambda.sqrt();
            let m = e.fundamental(lambda).unwrap().monodromy().clone();
            assert!((m[(0, 0)] - s.cos()).norm() < 1e-9);
            assert!((m[(0, 1)] - s.sin() / s).norm() < 1e-9);
        }
    }

    #[test]
    fn dense_output_between_nodes() {
        let e = free2();
        let lambda = c(1.0, 0.5);
        let fund = e.fundamental(lambda).unwrap();
        let j = e.system().j().clone();
        for t in [0.0, 0.0123, 0.5, 0.77777, 1.0] {
            let exact = eye(2) * (lambda * t).cos() - &j * (lambda * t).sin();
            assert!((fund.eval(t) - exact).norm() < 1e-9);
        }
    }

    #[test]
    fn propagation() {
        let e = free2();
        let lambda = c(0.7, 0.2);
        let fund = e.fundamental(lambda).unwrap();
        let id = e.propagate(&fund, &eye(2)).unwrap();
        assert!(id.values().iter().zip(fund.values()).all(|(a, b)| a == b));
        let first = e.propagate(&fund, &CMat::from_column_slice(2, 1, &[re(1.0), re(0.0)])).unwrap();
        for (k, &t) in e.mesh().nodes().iter().enumerate() {
            let expect = CMat::from_column_slice(2, 1, &[(lambda * t).cos(), -(lambda * t).sin()]);
            assert!((first.at(k) - expect).norm() < 1e-9);
        }
        let p = CMat::from_row_slice(2, 2, &[re(1.0), I, re(2.0), re(-1.0)]);
        let q = CMat::from_row_slice(2, 1, &[re(0.5), c(0.0, -1.0)]);
        let twice = e.propagate(&fund, &(&p * &q)).unwrap();
        let once = e.propagate(&fund, &p).unwrap().mul_right(&q);
        for k in 0..e.mesh().len() {
            assert!((twice.at(k) - once.at(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn propagate_rejects_bad_shape() {
        let e = free2();
        let fund = e.fundamental(I).unwrap();
        assert!(e.propagate(&fund, &eye(3)).is_err());
    }

    #[test]
    fn symplectic_residual_small_and_detects_corruption() {
        let e = free2();
        assert!(e.symplectic_residual(I).unwrap() <= 1e-10);
        assert!(e.symplectic_residual(re(2.5)).unwrap() <= 1e-10);
        let fund = e.fundamental(I).unwrap();
        let conj = e.fundamental(-I).unwrap();
        let mut bad = (*fund).clone();
        bad.values[10][(0, 1)] += re(1e-3);
        assert!(symplectic_residual(&bad, &conj, e.system().j()) >= 1e-4);
    }

    #[test]
    fn fundamental_solutions_stay_invertible() {
        for (_, sys) in builtins::all_systems() {
            let panels = 100;
            let e = Engine::new(sys, panels, Tolerances::default());
            for lambda in [I, c(3.0, -2.0), re(7.0)] {
                let fund = e.fundamental(lambda).unwrap();
                assert!(fund.values().iter().all(|y| y.determinant().norm() > 1e-12));
            }
        }
    }

    #[test]
    fn inhomogeneous_eigenfunction_forcing() {
        let e = Engine::new(builtins::sturm_liouville_unit(), 800, Tolerances::default());
        let lambda = I;
        let f = WeightedFunction::from_fn(e.mesh().clone(), |t| CVec::from_vec(vec![re((PI * t).sin()), re(0.0)]));
        let scale = re(1.0) / (re(PI * PI) - lambda);
        let exact = |t: f64| CVec::from_vec(vec![scale * (PI * t).sin(), scale * PI * (PI * t).cos()]);
        let y = e.solve_inhomogeneous(lambda, &f, &exact(0.0)).unwrap();
        for (k, &t) in e.mesh().nodes().iter().enumerate() {
            assert!((y.at(k) - exact(t)).norm() < 1e-9, "t={t}");
        }
        assert!(e.ode_residual(&y, lambda, Some(&f)).unwrap() < 1e-7);
    }

    #[test]
    fn inhomogeneous_zero_forcing_and_linearity() {
        let e = Engine::new(builtins::sturm_liouville_variable(), 400, Tolerances::default());
        let lambda = c(2.0, 1.0);
        let mesh = e.mesh().clone();
        let ya = CVec::from_vec(vec![re(1.0), c(0.0, 2.0)]);
        let y = e.solve_inhomogeneous(lambda, &WeightedFunction::zeros(mesh.clone(), 2), &ya).unwrap();
        let fund = e.fundamental(lambda).unwrap();
        for k in 0..mesh.len() {
            assert!((y.at(k) - fund.at(k) * &ya).norm() < 1e-14);
        }
        let f1 = WeightedFunction::from_fn(mesh.clone(), |t| CVec::from_vec(vec![re(t), re(1.0)]));
        let f2 = WeightedFunction::from_fn(mesh.clone(), |t| CVec::from_vec(vec![c(0.0, t * t), re(0.0)]));
        let ya2 = CVec::from_vec(vec![re(-1.0), re(0.5)]);
        let sum = e.solve_inhomogeneous(lambda, &f1.add(&f2).unwrap(), &(&ya + &ya2)).unwrap();
        let parts = e
            .solve_inhomogeneous(lambda, &f1, &ya)
            .unwrap()
            .add(&e.solve_inhomogeneous(lambda, &f2, &ya2).unwrap())
            .unwrap();
        for k in 0..mesh.len() {
            assert!((sum.at(k) - parts.at(k)).norm() < 1e-12);
        }
        assert!(e.ode_residual(&sum, lambda, Some(&f1.add(&f2).unwrap())).unwrap() < 1e-6);
    }

    #[test]
    fn cache_shares_solutions() {
        let e = free2();
        let a = e.fundamental(I).unwrap();
        let b = e.fundamental(I).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(e.cached_count(), 1);
    }

    #[test]
    fn homogeneous_residual_small() {
        let e = Engine::new(builtins::free_system(1, 1, (0.0, 1.0)), 400, Tolerances::default());
        let fund = e.fundamental(c(1.0, 2.0)).unwrap();
        assert!(e.solution_residual(&fund.as_solution()).unwrap() < 1e-8);
    }
}
