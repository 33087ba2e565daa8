//! The weighted space `L²_Δ`: quadrature mesh, sampled functions, and
//! Δ-weighted inner products.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;

use crate::linalg::{c, re, zeros, CMat, CVec, C64};
use crate::ode::SolutionMatrix;
use crate::system::SymmetricSystem;
use crate::{Error, Result};

/// Uniform composite Simpson rule; an odd panel count closes with one
/// three-eighths block over the last three panels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMesh {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    step: f64,
}

impl QuadratureMesh {
    pub fn uniform(a: f64, b: f64, panels: usize) -> Result<Self> {
        if panels < 2 {
            return Err(Error::InvalidInput("quadrature mesh needs at least two panels".into()));
        }
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::InvalidInput(format!("invalid mesh interval [{a}, {b}]")));
        }
        let h = (b - a) / panels as f64;
        let mut nodes: Vec<f64> = (0..=panels).map(|j| a + h * j as f64).collect();
        nodes[panels] = b;
        let mut weights = vec![0.0; panels + 1];
        let simpson_end = if panels.is_multiple_of(2) { panels } else { panels - 3 };
        for j in (0..simpson_end).step_by(2) {
            weights[j] += h / 3.0;
            weights[j + 1] += 4.0 * h / 3.0;
            weights[j + 2] += h / 3.0;
        }
        if simpson_end < panels {
            let m = simpson_end;
            for (off, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                weights[m + off] += 3.0 * h / 8.0 * c;
            }
        }
        Ok(Self { nodes, weights, step: h })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let j = ((x - self.a()) / self.step).round();
        (j.max(0.0) as usize).min(self.panels())
    }

    /// `Σ w_j F(j)` over all nodes.
    pub fn integrate<F>(&self, rows: usize, cols: usize, mut f: F) -> CMat
    where
        F: FnMut(usize) -> CMat,
    {
        let mut acc = zeros(rows, cols);
        for (j, &w) in self.weights.iter().enumerate() {
            acc += f(j) * re(w);
        }
        acc
    }

    /// Running integrals `∫_a^{t_j} F` at every node. Even nodes of the
    /// Simpson part take partial Simpson sums, odd nodes add a one-panel
    /// cubic rule, so the last entry equals [`Self::integrate`].
    pub fn cumulative(&self, values: &[CMat]) -> Vec<CMat> {
        let n = self.panels();
        assert_eq!(values.len(), n + 1, "cumulative: sample count does not match mesh");
        let h = self.step;
        let (r, c) = values[0].shape();
        let mut out = vec![zeros(r, c); n + 1];
        let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
        let fwd = |j: usize| -> CMat {
            // ∫_{t_j}^{t_{j+1}} from the cubic through nodes j..j+3
            (&values[j] * re(9.0) + &values[j + 1] * re(19.0) - &values[j + 2] * re(5.0) + &values[j + 3])
                * re(h / 24.0)
        };
        let bwd = |j: usize| -> CMat {
            // ∫_{t_j}^{t_{j+1}} from the cubic through nodes j-2..j+1
            (&values[j - 2] - &values[j - 1] * re(5.0) + &values[j] * re(19.0) + &values[j + 1] * re(9.0))
                * re(h / 24.0)
        };
        let one_panel = |j: usize| -> CMat {
            if j + 3 <= n {
                fwd(j)
            } else if j >= 2 {
                bwd(j)
            } else {
                (&values[j] + &values[j + 1]) * re(h / 2.0)
            }
        };
        let mut j = 0;
        while j < simpson_end {
            out[j + 1] = &out[j] + one_panel(j);
            out[j + 2] = &out[j] + (&values[j] + &values[j + 1] * re(4.0) + &values[j + 2]) * re(h / 3.0);
            j += 2;
        }
        if simpson_end < n {
            let m = simpson_end;
            out[m + 1] = &out[m] + one_panel(m);
            out[m + 2] = &out[m] + (&values[m] + &values[m + 1] * re(4.0) + &values[m + 2]) * re(h / 3.0);
            out[m + 3] = &out[m]
                + (&values[m] + &values[m + 1] * re(3.0) + &values[m + 2] * re(3.0) + &values[m + 3])
                    * re(3.0 * h / 8.0);
        }
        out
    }
}

/// A sampled element of `L²_Δ`, one vector in `𝐇` per mesh node.
#[derive(Debug, Clone)]
pub struct WeightedFunction {
    mesh: Arc<QuadratureMesh>,
    values: Vec<CVec>,
}

impl WeightedFunction {
    pub fn new(mesh: Arc<QuadratureMesh>, values: Vec<CVec>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshMismatch);
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.len() != first.len()) {
                return Err(Error::InvalidInput("sampled vectors differ in length".into()));
            }
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn<F>(mesh: Arc<QuadratureMesh>, f: F) -> Self
    where
        F: Fn(f64) -> CVec,
    {
        let values = mesh.nodes().iter().map(|&t| f(t)).collect();
        Self { mesh, values }
    }

    pub fn zeros(mesh: Arc<QuadratureMesh>, dim: usize) -> Self {
        let values = vec![CVec::zeros(dim); mesh.len()];
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[CVec] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn at(&self, j: usize) -> &CVec {
        &self.values[j]
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { mesh: self.mesh.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_mesh(other) {
            return Err(Error::MeshMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { mesh: self.mesh.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(re(-1.0)))
    }

    /// Writes `t, re_0, im_0, re_1, im_1, ...` rows after a `#` header line.
    pub fn write_csv<W: Write>(&self, mut out: W, name: &str) -> std::io::Result<()> {
        let dim = self.dim();
        let mut header = String::from("# t");
        for k in 0..dim {
            header.push_str(&format!(",{name}_re_{k},{name}_im_{k}"));
        }
        writeln!(out, "{header}")?;
        for (t, v) in self.mesh.nodes().iter().zip(&self.values) {
            let mut line = format!("{t:.17e}");
            for z in v.iter() {
                line.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// The weighted space attached to a system and a mesh: `Δ` is sampled once
/// at the nodes.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    mesh: Arc<QuadratureMesh>,
    delta: Vec<CMat>,
    dim: usize,
}

impl WeightedSpace {
    pub fn new(sys: &SymmetricSystem, mesh: Arc<QuadratureMesh>) -> Self {
        let delta = mesh.nodes().iter().map(|&t| sys.delta_at(t)).collect();
        Self { mesh, delta, dim: sys.dim() }
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta_at_node(&self, j: usize) -> &CMat {
        &self.delta[j]
    }

    fn check_fn(&self, f: &WeightedFunction) -> Result<()> {
        if !(Arc::ptr_eq(&self.mesh, f.mesh()) || *self.mesh == **f.mesh()) {
            return Err(Error::MeshMismatch);
        }
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "weighted function",
                expected: self.dim.to_string(),
                found: f.dim().to_string(),
            });
        }
        Ok(())
    }

    fn check_solution(&self, y: &SolutionMatrix) -> Result<()> {
        if !(Arc::ptr_eq(&self.mesh, y.mesh()) || *self.mesh == **y.mesh()) {
            return Err(Error::MeshMismatch);
        }
        if y.rows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "solution matrix",
                expected: self.dim.to_string(),
                found: y.rows().to_string(),
            });
        }
        Ok(())
    }

    /// `(f, g)_Δ = ∫ (Δ f, g) dt`, linear in `f`.
    pub fn delta_inner(&self, f: &WeightedFunction, g: &WeightedFunction) -> Result<C64> {
        self.check_fn(f)?;
        self.check_fn(g)?;
        let mut acc = C64::new(0.0, 0.0);
        for (j, &w) in self.mesh.weights().iter().enumerate() {
            acc += g.at(j).dotc(&(&self.delta[j] * f.at(j))) * w;
        }
        Ok(acc)
    }

    pub fn delta_norm(&self, f: &WeightedFunction) -> Result<f64> {
        Ok(self.delta_inner(f, f)?.re.max(0.0).sqrt())
    }

    /// `∫ Y*(t) Δ(t) f(t) dt`.
    pub fn adjoint_apply(&self, y: &SolutionMatrix, f: &WeightedFunction) -> Result<CVec> {
        self.check_solution(y)?;
        self.check_fn(f)?;
        let mut acc = CVec::zeros(y.cols());
        for (j, &w) in self.mesh.weights().iter().enumerate() {
            acc += y.at(j).ad_mul(&(&self.delta[j] * f.at(j))) * re(w);
        }
        Ok(acc)
    }

    /// `∫ Y*(t) Δ(t) Z(t) dt`.
    pub fn solution_gram(&self, y: &SolutionMatrix, z: &SolutionMatrix) -> Result<CMat> {
        self.check_solution(y)?;
        self.check_solution(z)?;
        Ok(self.mesh.integrate(y.cols(), z.cols(), |j| y.at(j).ad_mul(&(&self.delta[j] * z.at(j)))))
    }

    /// `Y(t) c` sampled on the mesh.
    pub fn apply_solution(&self, y: &SolutionMatrix, coeffs: &CVec) -> Result<WeightedFunction> {
        self.check_solution(y)?;
        if coeffs.len() != y.cols() {
            return Err(Error::DimensionMismatch {
                context: "solution coefficients",
                expected: y.cols().to_string(),
                found: coeffs.len().to_string(),
            });
        }
        let values = (0..self.mesh.len()).map(|j| y.at(j) * coeffs).collect();
        WeightedFunction::new(self.mesh.clone(), values)
    }
}

/// Reads `t, re_0, im_0, ...` rows (lines starting with `#` are skipped) and
/// checks that the `t` column matches the mesh.
pub fn read_csv(mesh: Arc<QuadratureMesh>, text: &str) -> Result<WeightedFunction> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("CSV line {}: {e}", lineno + 1)))?;
        if nums.len() < 3 || !(nums.len() - 1).is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("CSV line {}: expected t then re/im pairs", lineno + 1)));
        }
        let j = values.len();
        if j >= mesh.len() || (nums[0] - mesh.nodes()[j]).abs() > 1e-9 * (1.0 + nums[0].abs()) {
            return Err(Error::MeshMismatch);
        }
        values.push(CVec::from_iterator((nums.len() - 1) / 2, nums[1..].chunks(2).map(|p| C64::new(p[0], p[1]))));
    }
    WeightedFunction::new(mesh, values)
}

/// Smooth random input: a few Fourier modes per component with decaying
/// random complex amplitudes.
pub fn random_smooth_function<R: Rng>(rng: &mut R, mesh: &Arc<QuadratureMesh>, dim: usize, modes: usize) -> WeightedFunction {
    let (a, b) = (mesh.a(), mesh.b());
    let amps: Vec<Vec<(C64, C64)>> = (0..dim)
        .map(|_| {
            (0..modes)
                .map(|m| {
                    let s = 1.0 / (1.0 + m as f64);
                    let mut z = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s;
                    (z(), z())
                })
                .collect()
        })
        .collect();
    WeightedFunction::from_fn(mesh.clone(), |t| {
        let s = std::f64::consts::PI * (t - a) / (b - a);
        CVec::from_iterator(
            dim,
            amps.iter().map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(m, (p, q))| p * (m as f64 * s).cos() + q * ((m + 1) as f64 * s).sin())
                    .sum::<C64>()
            }),
        )
    })
}
