//! Symmetric systems `J y' - B(t) y = λ Δ(t) y` and their structure data.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{self, c, eye, re, zeros, CMat, C64};
use crate::ode::Engine;
use crate::{Error, Result, Tolerances};

/// `𝐇 = H ⊕ Ĥ ⊕ H` realized as index ranges `[0, n) ∪ [n, n+k) ∪ [n+k, 2n+k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceDecomposition {
    dim_h: usize,
    dim_hhat: usize,
}

impl SpaceDecomposition {
    pub fn new(dim_h: usize, dim_hhat: usize) -> Result<Self> {
        if dim_h == 0 {
            return Err(Error::InvalidInput("dim H must be positive".into()));
        }
        Ok(Self { dim_h, dim_hhat })
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_hhat(&self) -> usize {
        self.dim_hhat
    }

    /// `dim 𝐇 = 2 dim H + dim Ĥ`.
    pub fn dim_total(&self) -> usize {
        2 * self.dim_h + self.dim_hhat
    }

    /// `dim H₀ = dim H + dim Ĥ`.
    pub fn dim_h0(&self) -> usize {
        self.dim_h + self.dim_hhat
    }

    /// Offset of the `Ĥ` block.
    pub fn hat_offset(&self) -> usize {
        self.dim_h
    }

    /// Offset of the second `H` block (the `𝒫₁` component).
    pub fn h1_offset(&self) -> usize {
        self.dim_h + self.dim_hhat
    }
}

/// Block structure matrix on `A ⊕ C ⊕ A`:
/// `[[0, 0, -I_A], [0, i I_C, 0], [I_A, 0, 0]]`.
fn structure_matrix(outer: usize, middle: usize) -> CMat {
    let dim = 2 * outer + middle;
    let mut j = zeros(dim, dim);
    for r in 0..outer {
        j[(r, outer + middle + r)] = re(-1.0);
        j[(outer + middle + r, r)] = re(1.0);
    }
    for r in 0..middle {
        j[(outer + r, outer + r)] = c(0.0, 1.0);
    }
    j
}

/// Canonical structure matrix `J` of the decomposition.
pub fn canonical_j(dec: &SpaceDecomposition) -> CMat {
    structure_matrix(dec.dim_h, dec.dim_hhat)
}

/// `J_b` on `ℋ_b ⊕ (ℋ_b^⊥ ⊕ Ĥ) ⊕ ℋ_b`.
pub fn boundary_j_b(dim_hb: usize, dim_hbperp: usize, dim_hhat: usize) -> CMat {
    structure_matrix(dim_hb, dim_hbperp + dim_hhat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    HermitianB,
    PsdWeight,
}

type MatrixFn = dyn Fn(f64) -> CMat + Send + Sync;

/// A matrix-valued coefficient `t ↦ B(t)` or `t ↦ Δ(t)`. Evaluation must be
/// pure.
#[derive(Clone)]
pub struct CoefficientMap {
    kind: CoefficientKind,
    dim: usize,
    eval: Arc<MatrixFn>,
}

impl fmt::Debug for CoefficientMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientMap")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl CoefficientMap {
    pub fn from_fn<F>(kind: CoefficientKind, dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> CMat + Send + Sync + 'static,
    {
        Self { kind, dim, eval: Arc::new(f) }
    }

    pub fn constant(kind: CoefficientKind, m: CMat) -> Result<Self> {
        check_square(&m, "constant coefficient")?;
        let dim = m.nrows();
        Ok(Self::from_fn(kind, dim, move |_| m.clone()))
    }

    /// `Σ_j C_j t^j`.
    pub fn polynomial(kind: CoefficientKind, coeffs: Vec<CMat>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("polynomial coefficient needs at least one term".into()))?;
        check_square(first, "polynomial coefficient")?;
        let dim = first.nrows();
        if coeffs.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::InvalidInput("polynomial terms differ in size".into()));
        }
        Ok(Self::from_fn(kind, dim, move |t| {
            // Horner
            let mut acc = zeros(dim, dim);
            for m in coeffs.iter().rev() {
                acc = acc * re(t) + m;
            }
            acc
        }))
    }

    /// Piecewise-linear interpolation of samples; constant extrapolation
    /// outside the sample range.
    pub fn tabulated(kind: CoefficientKind, ts: Vec<f64>, values: Vec<CMat>) -> Result<Self> {
        if ts.is_empty() || ts.len() != values.len() {
            return Err(Error::InvalidInput("tabulated coefficient needs matching, non-empty t and values".into()));
        }
        if ts.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
            return Err(Error::InvalidInput("tabulated t-values must be strictly increasing".into()));
        }
        check_square(&values[0], "tabulated coefficient")?;
        let dim = values[0].nrows();
        if values.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::InvalidInput("tabulated samples differ in size".into()));
        }
        Ok(Self::from_fn(kind, dim, move |t| {
            let n = ts.len();
            if t <= ts[0] {
                return values[0].clone();
            }
            if t >= ts[n - 1] {
                return values[n - 1].clone();
            }
            let j = ts.partition_point(|&x| x <= t) - 1;
            let s = (t - ts[j]) / (ts[j + 1] - ts[j]);
            &values[j] * re(1.0 - s) + &values[j + 1] * re(s)
        }))
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> CMat {
        (self.eval)(t)
    }
}

fn check_square(m: &CMat, what: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            context: what,
            expected: "non-empty square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Scalar coefficient of a Sturm–Liouville expression.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone)]
pub struct SymmetricSystem {
    decomposition: SpaceDecomposition,
    interval: (f64, f64),
    b: CoefficientMap,
    delta: CoefficientMap,
    j: CMat,
}

impl SymmetricSystem {
    pub fn new(
        decomposition: SpaceDecomposition,
        interval: (f64, f64),
        b: CoefficientMap,
        delta: CoefficientMap,
    ) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("interval [{lo}, {hi}] must be finite with a < b")));
        }
        let dim = decomposition.dim_total();
        for (m, name) in [(&b, "B"), (&delta, "Δ")] {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "system coefficients",
                    expected: format!("{dim}x{dim} {name}"),
                    found: format!("{0}x{0}", m.dim()),
                });
            }
        }
        if b.kind() != CoefficientKind::HermitianB || delta.kind() != CoefficientKind::PsdWeight {
            return Err(Error::InvalidInput("B must be tagged hermitian-B and Δ psd-weight".into()));
        }
        Ok(Self { decomposition, interval, b, delta, j: canonical_j(&decomposition) })
    }

    /// Reduction of `-(p y')' + q y = λ w y` with `y = (y, p y')`:
    /// `B = diag(-q, 1/p)`, `Δ = diag(w, 0)`. `p` is checked on an
    /// `check_points`-point uniform grid.
    pub fn from_sturm_liouville(
        p: ScalarFn,
        q: ScalarFn,
        w: ScalarFn,
        interval: (f64, f64),
        check_points: usize,
    ) -> Result<Self> {
        let (lo, hi) = interval;
        let npts = check_points.max(2);
        for j in 0..npts {
            let t = lo + (hi - lo) * j as f64 / (npts - 1) as f64;
            let pv = p(t);
            if pv == 0.0 || !pv.is_finite() {
                return Err(Error::InvalidInput(format!("p vanishes or is not finite at t = {t}")));
            }
        }
        let dec = SpaceDecomposition::new(1, 0)?;
        let pb = p.clone();
        let b = CoefficientMap::from_fn(CoefficientKind::HermitianB, 2, move |t| {
            CMat::from_row_slice(2, 2, &[re(-q(t)), re(0.0), re(0.0), re(1.0 / pb(t))])
        });
        let delta = CoefficientMap::from_fn(CoefficientKind::PsdWeight, 2, move |t| {
            CMat::from_row_slice(2, 2, &[re(w(t)), re(0.0), re(0.0), re(0.0)])
        });
        Self::new(dec, interval, b, delta)
    }

    pub fn decomposition(&self) -> &SpaceDecomposition {
        &self.decomposition
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn dim(&self) -> usize {
        self.decomposition.dim_total()
    }

    pub fn j(&self) -> &CMat {
        &self.j
    }

    pub fn b_at(&self, t: f64) -> CMat {
        self.b.eval(t)
    }

    pub fn delta_at(&self, t: f64) -> CMat {
        self.delta.eval(t)
    }

    /// Same system on a different interval; the truncation recipe for a
    /// singular right endpoint uses this with increasing `b`.
    pub fn with_interval(&self, interval: (f64, f64)) -> Result<Self> {
        Self::new(self.decomposition, interval, self.b.clone(), self.delta.clone())
    }

    /// `A(t, λ) = J⁻¹ (B(t) + λ Δ(t)) = -J (B(t) + λ Δ(t))`, the generator of
    /// `y' = A y`.
    pub fn generator(&self, t: f64, lambda: C64) -> CMat {
        let rhs = self.b_at(t) + self.delta_at(t) * lambda;
        -(&self.j * rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub min_weight_eigenvalue: f64,
    pub structure_defect: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Checks `B = B*`, `Δ ⪰ 0` on `grid`, and the structure of `J`.
pub fn validate(sys: &SymmetricSystem, grid: &[f64], tol: &Tolerances) -> ValidationReport {
    let mut herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut failures = Vec::new();
    for &t in grid {
        let b = sys.b_at(t);
        herm = herm.max(linalg::norm(&(&b - b.adjoint())));
        let d = sys.delta_at(t);
        let skew = linalg::norm(&(&d - d.adjoint()));
        herm = herm.max(skew);
        min_eig = min_eig.min(linalg::min_hermitian_eigenvalue(&d));
    }
    if grid.is_empty() {
        failures.push("empty validation grid".to_string());
        min_eig = 0.0;
    }
    let j = sys.j();
    let n = sys.dim();
    let structure = linalg::norm(&(j - canonical_j(sys.decomposition())))
        + linalg::norm(&(j.adjoint() + j))
        + linalg::norm(&(j.adjoint() * j - eye(n)));
    if herm > tol.herm {
        failures.push(format!("coefficient Hermiticity defect {herm:e}"));
    }
    if min_eig < -tol.psd {
        failures.push(format!("weight has eigenvalue {min_eig:e}"));
    }
    if structure > 1e-14 {
        failures.push(format!("structure matrix defect {structure:e}"));
    }
    ValidationReport {
        hermiticity_defect: herm,
        min_weight_eigenvalue: min_eig,
        structure_defect: structure,
        passed: failures.is_empty(),
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Definiteness {
    pub definite: bool,
    pub min_gram_eigenvalue: f64,
    pub max_gram_eigenvalue: f64,
}

/// Numeric definiteness surrogate: the Gram matrix
/// `G(λ) = ∫ Y₀*(t, λ) Δ(t) Y₀(t, λ) dt` is positive definite iff no nonzero
/// solution is annihilated by `Δ`. The threshold is relative to the largest
/// Gram eigenvalue.
pub fn check_definiteness(engine: &Engine, lambda: C64) -> Result<Definiteness> {
    let fund = engine.fundamental(lambda)?;
    let y = fund.as_solution();
    let g = engine.space().solution_gram(&y, &y)?;
    let ev = linalg::hermitian_eigenvalues(&g);
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    let definite = hi > 0.0 && lo >= engine.tolerances().definiteness_rel * hi;
    Ok(Definiteness { definite, min_gram_eigenvalue: lo, max_gram_eigenvalue: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::linalg::I;

    fn cm(r: usize, c: usize, v: &[C64]) -> CMat {
        CMat::from_row_slice(r, c, v)
    }

    #[test]
    fn hamiltonian_structure_matrix() {
        let j = canonical_j(&SpaceDecomposition::new(1, 0).unwrap());
        assert_eq!(j, cm(2, 2, &[re(0.0), re(-1.0), re(1.0), re(0.0)]));
    }

    #[test]
    fn structure_matrix_with_hat_block() {
        let j = canonical_j(&SpaceDecomposition::new(1, 1).unwrap());
        let z = re(0.0);
        let expect = cm(3, 3, &[z, z, re(-1.0), z, I, z, re(1.0), z, z]);
        assert_eq!(j, expect);
    }

    #[test]
    fn structure_matrix_is_skew_and_squares_to_minus_identity() {
        for (n, k) in [(1, 0), (1, 1), (2, 3), (3, 0)] {
            let j = canonical_j(&SpaceDecomposition::new(n, k).unwrap());
            let d = 2 * n + k;
            assert_eq!(j.adjoint(), -j.clone());
            assert_eq!(&j * &j, -eye(d));
        }
    }

    #[test]
    fn boundary_structure_matrix() {
        assert_eq!(boundary_j_b(1, 0, 0), cm(2, 2, &[re(0.0), re(-1.0), re(1.0), re(0.0)]));
        let jb = boundary_j_b(1, 0, 1);
        assert_eq!(jb[(1, 1)], I);
        for (a, b, k) in [(1, 0, 0), (2, 1, 1), (0, 2, 1)] {
            let jb = boundary_j_b(a, b, k);
            assert_eq!(jb.adjoint(), -jb.clone());
        }
    }

    #[test]
    fn decomposition_rejects_empty_h() {
        assert!(SpaceDecomposition::new(0, 2).is_err());
        let d = SpaceDecomposition::new(2, 3).unwrap();
        assert_eq!(d.dim_total(), 7);
    }

    #[test]
    fn sturm_liouville_coefficients() {
        let sys = builtins::sturm_liouville_unit();
        let b = sys.b_at(0.3);
        let d = sys.delta_at(0.3);
        assert_eq!(b, cm(2, 2, &[re(0.0), re(0.0), re(0.0), re(1.0)]));
        assert_eq!(d, cm(2, 2, &[re(1.0), re(0.0), re(0.0), re(0.0)]));
    }

    #[test]
    fn sturm_liouville_eigenfunction_solves_homogeneous_system() {
        // y = (sin πt, π cos πt), λ = π²: J y' - B y - λ Δ y = 0
        let sys = builtins::sturm_liouville_unit();
        let pi = std::f64::consts::PI;
        for &t in &[0.1, 0.45, 0.9] {
            let y = nalgebra::DVector::from_vec(vec![re((pi * t).sin()), re(pi * (pi * t).cos())]);
            let dy = nalgebra::DVector::from_vec(vec![re(pi * (pi * t).cos()), re(-pi * pi * (pi * t).sin())]);
            let r = sys.j() * dy - sys.b_at(t) * &y - sys.delta_at(t) * &y * re(pi * pi);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn sturm_liouville_rejects_vanishing_p() {
        let p: ScalarFn = Arc::new(|t| t - 0.5);
        let one: ScalarFn = Arc::new(|_| 1.0);
        let err = SymmetricSystem::from_sturm_liouville(p, one.clone(), one, (0.0, 1.0), 101);
        assert!(err.is_err());
    }

    #[test]
    fn validation_passes_and_fails() {
        let tol = Tolerances::default();
        let grid: Vec<f64> = (0..101).map(|j| j as f64 / 100.0).collect();
        let sys = builtins::sturm_liouville_unit();
        assert!(validate(&sys, &grid, &tol).passed);

        let dec = SpaceDecomposition::new(1, 0).unwrap();
        let bad_b = CoefficientMap::constant(
            CoefficientKind::HermitianB,
            cm(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]),
        )
        .unwrap();
        let delta = CoefficientMap::constant(CoefficientKind::PsdWeight, eye(2)).unwrap();
        let sys = SymmetricSystem::new(dec, (0.0, 1.0), bad_b, delta).unwrap();
        let rep = validate(&sys, &grid, &tol);
        assert!(!rep.passed);
        assert!((rep.hermiticity_defect - 2f64.sqrt()).abs() < 1e-12);

        let b = CoefficientMap::constant(CoefficientKind::HermitianB, zeros(2, 2)).unwrap();
        let neg = CoefficientMap::constant(
            CoefficientKind::PsdWeight,
            cm(2, 2, &[re(-1.0), re(0.0), re(0.0), re(0.0)]),
        )
        .unwrap();
        let sys = SymmetricSystem::new(dec, (0.0, 1.0), b, neg).unwrap();
        let rep = validate(&sys, &grid, &tol);
        assert!(!rep.passed);
        assert!((rep.min_weight_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn builtins_validate_on_fine_grid() {
        let tol = Tolerances { herm: 1e-12, psd: 1e-12, ..Tolerances::default() };
        for (name, sys) in builtins::all_systems() {
            let (a, b) = sys.interval();
            let grid: Vec<f64> = (0..200).map(|j| a + (b - a) * j as f64 / 199.0).collect();
            assert!(validate(&sys, &grid, &tol).passed, "{name}");
        }
    }

    #[test]
    fn tabulated_and_polynomial_coefficients() {
        let p = CoefficientMap::polynomial(CoefficientKind::HermitianB, vec![eye(2), eye(2) * re(2.0)]).unwrap();
        assert_eq!(p.eval(0.5), eye(2) * re(2.0));
        let t = CoefficientMap::tabulated(CoefficientKind::PsdWeight, vec![0.0, 1.0], vec![zeros(2, 2), eye(2)])
            .unwrap();
        assert_eq!(t.eval(0.25), eye(2) * re(0.25));
        assert_eq!(t.eval(2.0), eye(2));
    }

    #[test]
    fn definiteness_of_builtins() {
        for (name, sys) in [
            ("sl", builtins::sturm_liouville_unit()),
            ("free2", builtins::free_system(1, 0, (0.0, 1.0))),
            ("free3", builtins::free_system(1, 1, (0.0, 1.0))),
        ] {
            let engine = Engine::new(sys, 200, Tolerances::default());
            let d1 = check_definiteness(&engine, I).unwrap();
            let d2 = check_definiteness(&engine, I * 2.0).unwrap();
            assert!(d1.definite && d2.definite, "{name}");
            assert!(d1.min_gram_eigenvalue > 0.0);
        }
    }

    #[test]
    fn zero_weight_is_not_definite() {
        let one: ScalarFn = Arc::new(|_| 1.0);
        let zero: ScalarFn = Arc::new(|_| 0.0);
        let sys = SymmetricSystem::from_sturm_liouville(one, zero.clone(), zero, (0.0, 1.0), 11).unwrap();
        let engine = Engine::new(sys, 100, Tolerances::default());
        let d = check_definiteness(&engine, I).unwrap();
        assert!(!d.definite);
        assert_eq!(d.min_gram_eigenvalue, 0.0);
    }
}
