//! Characteristic matrices `Ω_τ(λ)` on `𝐇 = H₀ ⊕ H`.
//!
//! The algebraic routes (correction term, Krein form, block matrix `Ω̃_τ`
//! with compression) work on any [`WeylSource`]: the numeric Weyl function
//! of a system with a regular right endpoint, or synthetic rectangular data
//! `M₊(λ) : ℋ₀ → ℋ₁`. The boundary-value route through `Z_τ` needs the
//! numeric path.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::linalg::{self, block, c, eye, hcat, re, set_block, vcat, zeros, CMat, C64, I};
use crate::ode::{Engine, SolutionMatrix};
use crate::parameter::{to_interface_pair, BoundaryParameter, InterfaceDims, Pair};
use crate::triplet::{self, hat_projection, RegularBoundaryMap, WeylData};
use crate::{Error, Result};

/// Condition limit for the inversions inside the characteristic-matrix routes.
pub const COND_LIMIT: f64 = 1e12;

/// `M₊(λ)` as a `dim ℋ₁ × dim ℋ₀` matrix with its block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylMatrix {
    pub lambda: C64,
    pub dims: InterfaceDims,
    pub value: CMat,
}

impl WeylMatrix {
    pub fn h0(&self) -> usize {
        self.dims.dim_h + self.dims.dim_hhat
    }

    pub fn m0(&self) -> CMat {
        block(&self.value, 0, 0, self.h0(), self.h0())
    }

    /// `M₂₊ : ℋ̃_b → H₀`.
    pub fn m2(&self) -> CMat {
        block(&self.value, 0, self.h0(), self.h0(), self.dims.dim_hb_tilde)
    }

    /// `M₃₊ : H₀ → ℋ_b`.
    pub fn m3(&self) -> CMat {
        block(&self.value, self.h0(), 0, self.dims.dim_hb, self.h0())
    }

    pub fn m4(&self) -> CMat {
        block(&self.value, self.h0(), self.h0(), self.dims.dim_hb, self.dims.dim_hb_tilde)
    }

    pub fn is_equal_index(&self) -> bool {
        self.dims.dim_hb == self.dims.dim_hb_tilde
    }
}

impl From<&WeylData> for WeylMatrix {
    fn from(w: &WeylData) -> Self {
        Self { lambda: w.lambda, dims: InterfaceDims::equal_index(w.dim_h, w.dim_hhat), value: w.m() }
    }
}

/// Anything that evaluates `M₊(λ)`.
pub trait WeylSource: Send + Sync {
    fn dims(&self) -> InterfaceDims;

    fn weyl_matrix(&self, lambda: C64) -> Result<WeylMatrix>;

    /// The numeric backend, when there is one.
    fn numeric(&self) -> Option<&NumericWeyl> {
        None
    }
}

/// Weyl data computed from a system by shooting.
#[derive(Clone)]
pub struct NumericWeyl {
    engine: Arc<Engine>,
    bmap: RegularBoundaryMap,
}

impl fmt::Debug for NumericWeyl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericWeyl").field("bmap", &self.bmap).finish_non_exhaustive()
    }
}

impl NumericWeyl {
    pub fn new(engine: Arc<Engine>) -> Self {
        let bmap = RegularBoundaryMap::for_engine(&engine);
        Self { engine, bmap }
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn bmap(&self) -> &RegularBoundaryMap {
        &self.bmap
    }

    pub fn weyl_data(&self, lambda: C64) -> Result<WeylData> {
        triplet::weyl(&self.engine, &self.bmap, lambda)
    }
}

impl WeylSource for NumericWeyl {
    fn dims(&self) -> InterfaceDims {
        let dec = self.bmap.decomposition();
        InterfaceDims::equal_index(dec.dim_h(), dec.dim_hhat())
    }

    fn weyl_matrix(&self, lambda: C64) -> Result<WeylMatrix> {
        Ok(WeylMatrix::from(&self.weyl_data(lambda)?))
    }

    fn numeric(&self) -> Option<&NumericWeyl> {
        Some(self)
    }
}

type MatrixFn = Arc<dyn Fn(C64) -> Result<CMat> + Send + Sync>;
type GramFn = Arc<dyn Fn(C64, C64) -> Result<CMat> + Send + Sync>;

/// Rectangular Weyl data supplied without an ODE backend.
#[derive(Clone)]
pub struct SyntheticWeylData {
    dims: InterfaceDims,
    m: MatrixFn,
    gram: Option<GramFn>,
}

impl fmt::Debug for SyntheticWeylData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SyntheticWeylData")
            .field("dims", &self.dims)
            .field("has_gram", &self.gram.is_some())
            .finish_non_exhaustive()
    }
}

impl SyntheticWeylData {
    pub fn from_fns<M, G>(dims: InterfaceDims, m: M, gram: Option<G>) -> Result<Self>
    where
        M: Fn(C64) -> Result<CMat> + Send + Sync + 'static,
        G: Fn(C64, C64) -> Result<CMat> + Send + Sync + 'static,
    {
        if dims.dim_hb > dims.dim_hb_tilde || dims.dim_h == 0 {
            return Err(Error::InvalidInput("need dim H > 0 and dim ℋ_b ≤ dim ℋ̃_b".into()));
        }
        Ok(Self { dims, m: Arc::new(m), gram: gram.map(|g| Arc::new(g) as GramFn) })
    }

    /// `M₊(μ) = [E + Γ*(A - μ)⁻¹Γ + (i/2)K₁*K₁, iK₁*]` with Hermitian `A`
    /// (`state_dim` square) and `E`. Its Gram kernel is
    /// `Γ̃*(A - λ̄)⁻¹(A - μ)⁻¹Γ̃ + i K*K / (μ - λ̄)` with `Γ̃ = [Γ, 0]`,
    /// `K = [K₁, I]`.
    pub fn random<R: Rng>(rng: &mut R, dims: InterfaceDims, state_dim: usize) -> Result<Self> {
        let d0 = dims.dim0();
        let d1 = dims.dim1();
        let d2 = d0 - d1;
        let rand = |rng: &mut R, r: usize, cols: usize| {
            CMat::from_fn(r, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        let a = linalg::hermitian_part(&rand(rng, state_dim, state_dim)) * re(3.0);
        let e = linalg::hermitian_part(&rand(rng, d1, d1));
        let gamma = rand(rng, state_dim, d1);
        let k1 = rand(rng, d2, d1) * re(0.7);
        let gamma_t = hcat(&[&gamma, &zeros(state_dim, d2)]);
        let kk = hcat(&[&k1, &eye(d2)]);
        let resolvent = move |a: &CMat, mu: C64| {
            let p = a.nrows();
            linalg::inverse(&(a - eye(p) * mu), COND_LIMIT, "A - μ", mu)
        };
        let (a1, g1, e1, k1c) = (a.clone(), gamma.clone(), e.clone(), k1.clone());
        let m = move |mu: C64| -> Result<CMat> {
            let top = &e1 + g1.adjoint() * resolvent(&a1, mu)? * &g1 + k1c.adjoint() * &k1c * c(0.0, 0.5);
            Ok(hcat(&[&top, &(k1c.adjoint() * I)]))
        };
        let gram = move |lambda: C64, mu: C64| -> Result<CMat> {
            let rl = resolvent(&a, lambda.conj())?;
            let rm = resolvent(&a, mu)?;
            Ok(gamma_t.adjoint() * rl * rm * &gamma_t + kk.adjoint() * &kk * (I / (mu - lambda.conj())))
        };
        Self::from_fns(dims, m, Some(gram))
    }

    /// Equal-index numeric data padded to `dim ℋ̃_b = dim ℋ_b + extra`:
    /// `M₊ = [M, 0]`, Gram kernel `diag(∫Z*ΔZ, i/(μ - λ̄) I)`.
    pub fn padded(source: NumericWeyl, extra: usize) -> Result<Self> {
        let base = source.dims();
        let dims = InterfaceDims { dim_hb_tilde: base.dim_hb + extra, ..base };
        let d1 = dims.dim1();
        let src = source.clone();
        let m = move |mu: C64| -> Result<CMat> {
            let w = src.weyl_matrix(mu)?;
            Ok(hcat(&[&w.value, &zeros(d1, extra)]))
        };
        let gram = move |lambda: C64, mu: C64| -> Result<CMat> {
            let zl = source.weyl_data(lambda)?.z();
            let zm = source.weyl_data(mu)?.z();
            let g = source.engine().space().solution_gram(&zl, &zm)?;
            let mut out = zeros(d1 + extra, d1 + extra);
            set_block(&mut out, 0, 0, &g);
            set_block(&mut out, d1, d1, &(eye(extra) * (I / (mu - lambda.conj()))));
            Ok(out)
        };
        Self::from_fns(dims, m, Some(gram))
    }

    pub fn gram(&self, lambda: C64, mu: C64) -> Option<Result<CMat>> {
        self.gram.as_ref().map(|g| g(lambda, mu))
    }

    /// `‖M₊(μ) - M₊(λ)*P₁ + iP₂ - (μ - λ̄) γ₊*(λ)γ₊(μ)‖` with `M₊(μ)` viewed
    /// in `[ℋ₀]`.
    pub fn identity_residual(&self, lambda: C64, mu: C64) -> Result<f64> {
        let gram = self
            .gram(lambda, mu)
            .ok_or_else(|| Error::InvalidInput("synthetic data carries no Gram kernel".into()))??;
        Ok(linalg::norm(&(weyl_identity_lhs(self, lambda, mu)? - gram * (mu - lambda.conj()))))
    }
}

impl WeylSource for SyntheticWeylData {
    fn dims(&self) -> InterfaceDims {
        self.dims
    }

    fn weyl_matrix(&self, lambda: C64) -> Result<WeylMatrix> {
        let value = (self.m)(lambda)?;
        if value.nrows() != self.dims.dim1() || value.ncols() != self.dims.dim0() {
            return Err(Error::DimensionMismatch {
                context: "synthetic M₊",
                expected: format!("{}x{}", self.dims.dim1(), self.dims.dim0()),
                found: format!("{}x{}", value.nrows(), value.ncols()),
            });
        }
        Ok(WeylMatrix { lambda, dims: self.dims, value })
    }
}

/// `M₊(μ) - M₊(λ)*P₁ + iP₂` as an operator in `ℋ₀`.
pub fn weyl_identity_lhs(src: &dyn WeylSource, lambda: C64, mu: C64) -> Result<CMat> {
    let dims = src.dims();
    let (d0, d1) = (dims.dim0(), dims.dim1());
    let mut ext = zeros(d0, d0);
    set_block(&mut ext, 0, 0, &src.weyl_matrix(mu)?.value);
    let ml = src.weyl_matrix(lambda)?.value;
    let mut back = zeros(d0, d0);
    set_block(&mut back, 0, 0, &ml.adjoint());
    let mut p2 = zeros(d0, d0);
    for j in d1..d0 {
        p2[(j, j)] = I;
    }
    Ok(ext - back + p2)
}

/// `I_{H→H₀}` as a `dim H₀ × dim H` matrix.
fn embed_h(w: &WeylMatrix) -> CMat {
    linalg::coordinate_projection(w.h0(), 0, w.dims.dim_h).transpose()
}

/// `Ω₀ = [[m₀, -½I_{H→H₀}], [-½P_{H₀→H}, 0]]`.
pub fn omega0(w: &WeylMatrix) -> CMat {
    let (h0, n) = (w.h0(), w.dims.dim_h);
    let e = embed_h(w);
    let mut out = zeros(h0 + n, h0 + n);
    set_block(&mut out, 0, 0, &w.m0());
    set_block(&mut out, 0, h0, &(&e * re(-0.5)));
    set_block(&mut out, h0, 0, &(e.transpose() * re(-0.5)));
    out
}

/// `S₁ = [[m₀ - (i/2)P_Ĥ, M₂₊], [-P_{H₀→H}, 0]]` and
/// `S₂ = [[m₀ + (i/2)P_Ĥ, -I_{H→H₀}], [M₃₊, 0]]`.
pub fn s_factors(w: &WeylMatrix) -> (CMat, CMat) {
    let (h0, n) = (w.h0(), w.dims.dim_h);
    let (hb, hbt) = (w.dims.dim_hb, w.dims.dim_hb_tilde);
    let p_hat = hat_projection(n, w.dims.dim_hhat);
    let e = embed_h(w);
    let m0 = w.m0();
    let mut s1 = zeros(h0 + n, h0 + hbt);
    set_block(&mut s1, 0, 0, &(&m0 - &p_hat * c(0.0, 0.5)));
    set_block(&mut s1, 0, h0, &w.m2());
    set_block(&mut s1, h0, 0, &(-e.transpose()));
    let mut s2 = zeros(h0 + hb, h0 + n);
    set_block(&mut s2, 0, 0, &(&m0 + &p_hat * c(0.0, 0.5)));
    set_block(&mut s2, 0, h0, &(-&e));
    set_block(&mut s2, h0, 0, &w.m3());
    (s1, s2)
}

fn check_pair(pair: &Pair, w: &WeylMatrix) -> Result<()> {
    if pair.dim0() != w.dims.dim0() || pair.dim1() != w.dims.dim1() || pair.c0.nrows() != w.dims.dim0() {
        return Err(Error::DimensionMismatch {
            context: "boundary parameter vs Weyl function",
            expected: format!("C₀ {0}x{0}, C₁ {0}x{1}", w.dims.dim0(), w.dims.dim1()),
            found: format!("C₀ {}x{}, C₁ {}x{}", pair.c0.nrows(), pair.dim0(), pair.c1.nrows(), pair.dim1()),
        });
    }
    Ok(())
}

/// `C₀ - C₁M₊`.
fn boundary_operator(pair: &Pair, w: &WeylMatrix) -> Result<CMat> {
    check_pair(pair, w)?;
    Ok(&pair.c0 - &pair.c1 * &w.value)
}

/// `T_τ = (C₀ - C₁M₊)⁻¹C₁`.
pub fn t_tau(pair: &Pair, w: &WeylMatrix) -> Result<CMat> {
    let k = boundary_operator(pair, w)?;
    linalg::solve(&k, &pair.c1, COND_LIMIT, "C₀ - C₁M₊ (τ inadmissible or numerical breakdown)", w.lambda)
}

/// `(τ + M₊)⁻¹ : ℋ₁ → ℋ₀`, valid for relations: solves
/// `C₀h + C₁h' = 0`, `M₊h + h' = k` for `h`.
pub fn tau_plus_m_inverse(pair: &Pair, w: &WeylMatrix) -> Result<CMat> {
    check_pair(pair, w)?;
    let (d0, d1) = (w.dims.dim0(), w.dims.dim1());
    let system = vcat(&[&hcat(&[&pair.c0, &pair.c1]), &hcat(&[&w.value, &eye(d1)])]);
    let rhs = vcat(&[&zeros(d0, d1), &eye(d1)]);
    let sol = linalg::solve(&system, &rhs, COND_LIMIT, "τ + M₊", w.lambda)?;
    Ok(block(&sol, 0, 0, d0, d1))
}

/// `Ω_τ = Ω₀ + S₁ T_τ S₂`.
pub fn omega_tau(pair: &Pair, w: &WeylMatrix) -> Result<CMat> {
    let t = t_tau(pair, w)?;
    let (s1, s2) = s_factors(w);
    Ok(omega0(w) + s1 * t * s2)
}

/// `Ω₀(λ) - S(λ)(τ(λ) + M(λ))⁻¹S(λ̄)*`; equal-index only, `τ(λ)` an operator.
pub fn omega_tau_krein(tau: &CMat, w: &WeylMatrix, w_conj: &WeylMatrix) -> Result<CMat> {
    if !w.is_equal_index() || !w_conj.is_equal_index() {
        return Err(Error::InvalidInput("the Krein form needs equal deficiency indices".into()));
    }
    let (s, _) = s_factors(w);
    let (s_conj, _) = s_factors(w_conj);
    let g = linalg::inverse(&(tau + &w.value), COND_LIMIT, "τ + M", w.lambda)?;
    Ok(omega0(w) - s * g * s_conj.adjoint())
}

/// `Ω̃_τ : ℋ₀ ⊕ ℋ₁ → ℋ₁ ⊕ ℋ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaTilde {
    pub value: CMat,
    /// Distance between the `(τ + M₊)⁻¹` assembly and the
    /// `(C₀ - C₁M₊)⁻¹` assembly.
    pub display_residual: f64,
}

fn assemble_tilde(w1: &CMat, w2: &CMat, w3: &CMat, w4: &CMat) -> CMat {
    vcat(&[&hcat(&[w1, w2]), &hcat(&[w3, w4])])
}

/// Assembles `Ω̃_τ` from `G = (τ + M₊)⁻¹` and from `K = C₀ - C₁M₊`; returns
/// the latter with the distance between them.
pub fn omega_tilde(pair: &Pair, w: &WeylMatrix) -> Result<OmegaTilde> {
    let (d0, d1) = (w.dims.dim0(), w.dims.dim1());
    let m = &w.value;
    let k = boundary_operator(pair, w)?;
    let kc0 = linalg::solve(&k, &pair.c0, COND_LIMIT, "C₀ - C₁M₊", w.lambda)?;
    let kc1 = linalg::solve(&k, &pair.c1, COND_LIMIT, "C₀ - C₁M₊", w.lambda)?;
    let by_pair = assemble_tilde(
        &(m * &kc0),
        &(eye(d1) * re(-0.5) - m * &kc1),
        &(eye(d0) * re(0.5) - &kc0),
        &kc1,
    );
    let g = tau_plus_m_inverse(pair, w)?;
    let by_resolvent = assemble_tilde(
        &(m - m * &g * m),
        &(eye(d1) * re(-0.5) + m * &g),
        &(eye(d0) * re(-0.5) + &g * m),
        &(-&g),
    );
    let display_residual = linalg::norm(&(&by_pair - by_resolvent));
    Ok(OmegaTilde { value: by_pair, display_residual })
}

/// `X₁ : ℋ₁ ⊕ ℋ₀ → 𝐇` and `X₂ : ℋ₀ ⊕ ℋ₁ → 𝐇`.
pub fn compression_x(dims: &InterfaceDims) -> (CMat, CMat) {
    let (n, k) = (dims.dim_h, dims.dim_hhat);
    let h0 = n + k;
    let p_hat = hat_projection(n, k);
    let build = |first: usize, second: usize| {
        let mut x = zeros(h0 + n, first + second);
        set_block(&mut x, 0, 0, &linalg::coordinate_projection(first, 0, h0));
        set_block(&mut x, 0, first, &(&p_hat * linalg::coordinate_projection(second, 0, h0) * c(0.0, 0.5)));
        set_block(&mut x, h0, first, &linalg::coordinate_projection(second, 0, n));
        x
    };
    (build(dims.dim1(), dims.dim0()), build(dims.dim0(), dims.dim1()))
}

/// `X₁ Ω̃ X₂*`.
pub fn compress(tilde: &CMat, x1: &CMat, x2: &CMat) -> Result<CMat> {
    if x1.ncols() != tilde.nrows() || x2.ncols() != tilde.ncols() {
        return Err(Error::DimensionMismatch {
            context: "compression",
            expected: format!("Ω̃ of size {}x{}", x1.ncols(), x2.ncols()),
            found: format!("{}x{}", tilde.nrows(), tilde.ncols()),
        });
    }
    Ok(x1 * tilde * x2.adjoint())
}

/// `Z_τ(·, λ)` with its boundary-condition residual.
#[derive(Debug, Clone)]
pub struct BoundarySolution {
    pub z: SolutionMatrix,
    /// `‖C_a(Z_τ(a) + J) + C_b Γ_b Z_τ‖`, relative to the size of the terms.
    pub bc_residual: f64,
}

/// `Z_τ = -Z(·, λ)(C₀ - C₁M)⁻¹C_a J`; fails when the boundary condition
/// is not met within the `bc` tolerance.
pub fn z_tau(num: &NumericWeyl, tau: &BoundaryParameter, lambda: C64) -> Result<BoundarySolution> {
    let data = num.weyl_data(lambda)?;
    let w = WeylMatrix::from(&data);
    let pair = tau.pair_at(lambda)?;
    let ip = to_interface_pair(&pair, &w.dims)?;
    let k = boundary_operator(&pair, &w)?;
    let j = num.engine().system().j().clone();
    let coeff = -linalg::solve(&k, &(&ip.ca * &j), COND_LIMIT, "C₀ - C₁M", lambda)?;
    let z = data.z().mul_right(&coeff);
    let za = z.at_a() + &j;
    let zb = z.at_b();
    let defect = linalg::norm(&(&ip.ca * &za + &ip.cb * zb));
    let scale = (linalg::norm(&ip.ca) * linalg::norm(&za) + linalg::norm(&ip.cb) * linalg::norm(zb)).max(1.0);
    let bc_residual = defect / scale;
    let tol = num.engine().tolerances().bc;
    if bc_residual > tol {
        return Err(Error::ResidualBreach { what: "boundary condition of Z_τ", value: bc_residual, tol });
    }
    Ok(BoundarySolution { z, bc_residual })
}

/// `Z_τ(a) + ½J`.
pub fn omega_from_z(z: &BoundarySolution, j: &CMat) -> CMat {
    z.z.at_a() + j * re(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagBound {
    pub min_eigenvalue: f64,
    pub passed: bool,
}

/// Smallest eigenvalue of `(Im λ)⁻¹ Im Ω_τ(λ) - ∫Z_τ*ΔZ_τ`.
pub fn imag_bound_check(num: &NumericWeyl, tau: &BoundaryParameter, lambda: C64) -> Result<ImagBound> {
    if lambda.im == 0.0 {
        return Err(Error::SpectralParameter { lambda, reason: "the bound needs Im λ ≠ 0" });
    }
    let zt = z_tau(num, tau, lambda)?;
    let omega = omega_from_z(&zt, num.engine().system().j());
    let gram = num.engine().space().solution_gram(&zt.z, &zt.z)?;
    let gap = linalg::imag_part(&omega) * re(1.0 / lambda.im) - gram;
    let min_eigenvalue = linalg::min_hermitian_eigenvalue(&linalg::hermitian_part(&gap));
    Ok(ImagBound { min_eigenvalue, passed: min_eigenvalue >= -num.engine().tolerances().ineq })
}

/// `‖Ω_τ(μ) - Ω_τ(λ)* - (μ - λ̄) ∫Z_τ*(λ)ΔZ_τ(μ)‖` for constant self-adjoint `τ`.
pub fn selfadjoint_identity_residual(num: &NumericWeyl, tau: &BoundaryParameter, lambda: C64, mu: C64) -> Result<f64> {
    if !matches!(tau, BoundaryParameter::ConstantSelfAdjoint(_)) {
        return Err(Error::NotSelfAdjoint { what: "the Ω_τ Gram identity" });
    }
    let j = num.engine().system().j();
    let zl = z_tau(num, tau, lambda)?;
    let zm = z_tau(num, tau, mu)?;
    let gram = num.engine().space().solution_gram(&zl.z, &zm.z)?;
    let diff = omega_from_z(&zm, j) - omega_from_z(&zl, j).adjoint() - gram * (mu - lambda.conj());
    Ok(linalg::norm(&diff))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Correction,
    Krein,
    ZBoundary,
    Compression,
}

impl Route {
    pub const ALL: [Route; 4] = [Route::Correction, Route::Krein, Route::ZBoundary, Route::Compression];

    pub fn name(self) -> &'static str {
        match self {
            Route::Correction => "correction",
            Route::Krein => "krein",
            Route::ZBoundary => "z-boundary",
            Route::Compression => "compression",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `Ω_τ(λ)` by one route. Off the equal-index path, values in `ℂ₋` come
/// from `Ω_τ(λ̄)*`.
pub fn omega(src: &dyn WeylSource, tau: &BoundaryParameter, lambda: C64, route: Route) -> Result<CMat> {
    let dims = src.dims();
    let equal = dims.dim_hb == dims.dim_hb_tilde;
    if lambda.im < 0.0 && !equal {
        return Ok(omega(src, tau, lambda.conj(), route)?.adjoint());
    }
    if lambda.im == 0.0 && !tau.is_self_adjoint() {
        return Err(Error::SpectralParameter { lambda, reason: "real λ needs a self-adjoint τ" });
    }
    match route {
        Route::Correction => omega_tau(&tau.pair_at(lambda)?, &src.weyl_matrix(lambda)?),
        Route::Krein => {
            let op = tau.operator_at(lambda)?;
            omega_tau_krein(&op, &src.weyl_matrix(lambda)?, &src.weyl_matrix(lambda.conj())?)
        }
        Route::Compression => {
            let tilde = omega_tilde(&tau.pair_at(lambda)?, &src.weyl_matrix(lambda)?)?;
            let (x1, x2) = compression_x(&dims);
            compress(&tilde.value, &x1, &x2)
        }
        Route::ZBoundary => {
            let num = src.numeric().ok_or_else(|| {
                Error::InvalidInput("the Z_τ route needs Weyl data computed from a system".into())
            })?;
            Ok(omega_from_z(&z_tau(num, tau, lambda)?, num.engine().system().j()))
        }
    }
}

/// `Ω_τ` on a grid of spectral parameters, one route per value.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicMatrix {
    pub lambdas: Vec<C64>,
    pub values: Vec<CMat>,
    pub routes: Vec<Route>,
}

impl CharacteristicMatrix {
    pub fn compute(src: &dyn WeylSource, tau: &BoundaryParameter, lambdas: &[C64], route: Route) -> Result<Self> {
        let values = lambdas.iter().map(|&l| omega(src, tau, l, route)).collect::<Result<Vec<_>>>()?;
        Ok(Self { lambdas: lambdas.to_vec(), values, routes: vec![route; lambdas.len()] })
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |m| m.nrows())
    }

    /// Largest `‖Ω(λ̄) - Ω(λ)*‖` over grid points whose conjugate is also
    /// on the grid.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, l) in self.lambdas.iter().enumerate() {
            if let Some(j) = self.lambdas.iter().position(|m| *m == l.conj()) {
                worst = worst.max(linalg::norm(&(&self.values[j] - self.values[i].adjoint())));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::parameter::{self, dirichlet_sl, linear_lambda, multivalued, zero_operator};
    use crate::Tolerances;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sl() -> NumericWeyl {
        NumericWeyl::new(Arc::new(Engine::new(builtins::sturm_liouville_unit(), 800, Tolerances::default())))
    }

    fn free3() -> NumericWeyl {
        NumericWeyl::new(Arc::new(Engine::new(builtins::free_system(1, 1, (0.0, 1.0)), 800, Tolerances::default())))
    }

    fn m2(v: [C64; 4]) -> CMat {
        CMat::from_row_slice(2, 2, &v)
    }

    #[test]
    fn omega0_sturm_liouville() {
        let num = sl();
        let s = linalg::csqrt(I);
        let expect = m2([s.tan() / s, re(-0.5), re(-0.5), re(0.0)]);
        let w = num.weyl_matrix(I).unwrap();
        assert!(linalg::norm(&(omega0(&w) - &expect)) < 1e-9);
        let wc = num.weyl_matrix(-I).unwrap();
        assert!(linalg::norm(&(omega0(&wc) - omega0(&w).adjoint())) < 1e-9);
    }

    #[test]
    fn omega0_with_hat_block() {
        let w = free3().weyl_matrix(I).unwrap();
        let o = omega0(&w);
        assert_eq!(o[(2, 2)], re(0.0));
        assert_eq!(o[(2, 1)], re(0.0));
        assert_eq!(block(&o, 0, 0, 2, 2), w.m0());
        assert_eq!(o[(0, 2)], re(-0.5));
    }

    #[test]
    fn s_factors_sturm_liouville() {
        let num = sl();
        let lambda = c(1.0, 1.0);
        let s = linalg::csqrt(lambda);
        let (s1, s2) = s_factors(&num.weyl_matrix(lambda).unwrap());
        let expect = m2([s.tan() / s, s.cos().inv(), re(-1.0), re(0.0)]);
        assert!(linalg::norm(&(&s1 - expect)) < 1e-8);
        let (s_conj, _) = s_factors(&num.weyl_matrix(lambda.conj()).unwrap());
        assert!(linalg::norm(&(s2 - s_conj.adjoint())) < 1e-9);
        // S₁ = Z(a)
        let z = num.weyl_data(lambda).unwrap().z();
        assert!(linalg::norm(&(s1 - z.at_a())) < 1e-10);
    }

    #[test]
    fn t_tau_special_pairs() {
        let w = sl().weyl_matrix(I).unwrap();
        let t = t_tau(&zero_operator(2).pair_at(I).unwrap(), &w).unwrap();
        assert_eq!(t, zeros(2, 2));
        let t = t_tau(&multivalued(2).pair_at(I).unwrap(), &w).unwrap();
        let minv = linalg::inverse(&w.value, 1e12, "M", I).unwrap();
        assert!(linalg::norm(&(t + minv)) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tau = parameter::random_dissipative(&mut rng, 2);
        let t = t_tau(&tau.pair_at(I).unwrap(), &w).unwrap();
        let op = tau.operator_at(I).unwrap();
        let direct = -linalg::inverse(&(op + &w.value), 1e12, "τ + M", I).unwrap();
        assert!(linalg::norm(&(t - direct)) < 1e-10);
    }

    #[test]
    fn routes_agree_on_sturm_liouville() {
        let num = sl();
        for tau in [dirichlet_sl(), zero_operator(2), multivalued(2)] {
            for lambda in [I, c(0.0, 2.0), c(1.0, 1.0), -I] {
                let corr = omega(&num, &tau, lambda, Route::Correction).unwrap();
                for route in [Route::ZBoundary, Route::Compression] {
                    let other = omega(&num, &tau, lambda, route).unwrap();
                    assert!(linalg::norm(&(&corr - other)) < 1e-8, "{route} at {lambda}");
                }
            }
        }
        let tau = linear_lambda(2);
        let a = omega(&num, &tau, c(0.0, 2.0), Route::Correction).unwrap();
        let b = omega(&num, &tau, c(0.0, 2.0), Route::Krein).unwrap();
        assert!(linalg::norm(&(a - b)) < 1e-9);
        let a = omega(&num, &multivalued(2), I, Route::Correction).unwrap();
        let b = omega(&num, &multivalued(2), I, Route::Krein).unwrap();
        assert!(linalg::norm(&(a - b)) < 1e-10);
    }

    #[test]
    fn krein_route_needs_operator_form() {
        let err = omega(&sl(), &zero_operator(2), I, Route::Krein).unwrap_err();
        assert!(matches!(err, Error::OperatorFormRequired { .. }));
    }

    #[test]
    fn zero_operator_reproduces_omega0() {
        let num = free3();
        let w = num.weyl_matrix(I).unwrap();
        let o0 = omega0(&w);
        let tau = zero_operator(3);
        for route in [Route::Correction, Route::ZBoundary, Route::Compression] {
            let o = omega(&num, &tau, I, route).unwrap();
            assert!(linalg::norm(&(o - &o0)) < 1e-8, "{route}");
        }
    }

    #[test]
    fn compression_on_hat_system() {
        let num = free3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tau = parameter::random_selfadjoint(&mut rng, 3);
        let lambda = c(0.0, 2.0);
        let a = omega(&num, &tau, lambda, Route::Compression).unwrap();
        let b = omega(&num, &tau, lambda, Route::Correction).unwrap();
        assert!(linalg::norm(&(a - b)) < 1e-8);
    }

    #[test]
    fn compression_shapes() {
        let (x1, x2) = compression_x(&InterfaceDims::equal_index(1, 0));
        let expect = CMat::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0].map(re));
        assert_eq!(x1, expect);
        assert_eq!(x2, expect);
        let dims = InterfaceDims { dim_h: 1, dim_hhat: 1, dim_hb: 1, dim_hb_tilde: 2 };
        let (x1, x2) = compression_x(&dims);
        assert_eq!((x1.nrows(), x1.ncols()), (3, 3 + 4));
        // X₂* = [[I_{H₀,ℋ₀}, 0], [-(i/2) I_{H₀,ℋ₁} P_Ĥ, I_{H,ℋ₁}]]
        let x2s = x2.adjoint();
        assert_eq!(x2s[(4 + 1, 1)], c(0.0, -0.5));
        assert_eq!(x2s[(4, 2)], re(1.0));
    }

    #[test]
    fn display_equivalence_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let w = sl().weyl_matrix(I).unwrap();
        for _ in 0..10 {
            let tau = parameter::random_selfadjoint(&mut rng, 2);
            let t = omega_tilde(&tau.pair_at(I).unwrap(), &w).unwrap();
            assert!(t.display_residual < 1e-11, "{}", t.display_residual);
        }
        let dims = InterfaceDims { dim_h: 1, dim_hhat: 1, dim_hb: 1, dim_hb_tilde: 3 };
        let syn = SyntheticWeylData::random(&mut rng, dims, 4).unwrap();
        let w = syn.weyl_matrix(c(0.3, 1.0)).unwrap();
        for _ in 0..10 {
            let tau = parameter::random_rectangular(&mut rng, &dims);
            let t = omega_tilde(&tau.pair_at(w.lambda).unwrap(), &w).unwrap();
            assert!(t.display_residual < 1e-11, "{}", t.display_residual);
        }
    }

    #[test]
    fn synthetic_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = InterfaceDims { dim_h: 1, dim_hhat: 1, dim_hb: 1, dim_hb_tilde: 2 };
        let syn = SyntheticWeylData::random(&mut rng, dims, 5).unwrap();
        for lambda in [I, c(1.0, 2.0)] {
            for mu in [c(0.0, 3.0), c(-1.0, 0.5)] {
                assert!(syn.identity_residual(lambda, mu).unwrap() < 1e-12);
            }
        }
        let padded = SyntheticWeylData::padded(sl(), 1).unwrap();
        assert!(padded.identity_residual(I, c(0.0, 2.0)).unwrap() < 1e-8);
    }

    #[test]
    fn rectangular_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dims = InterfaceDims { dim_h: 1, dim_hhat: 1, dim_hb: 1, dim_hb_tilde: 2 };
        let syn = SyntheticWeylData::random(&mut rng, dims, 4).unwrap();
        let tau = parameter::random_rectangular(&mut rng, &dims);
        let lambda = c(0.5, 1.5);
        let a = omega(&syn, &tau, lambda, Route::Correction).unwrap();
        let b = omega(&syn, &tau, lambda, Route::Compression).unwrap();
        assert!(linalg::norm(&(&a - b)) < 1e-10);
        let lower = omega(&syn, &tau, lambda.conj(), Route::Correction).unwrap();
        assert_eq!(lower, a.adjoint());
        assert!(omega(&syn, &tau, lambda, Route::ZBoundary).is_err());
    }

    #[test]
    fn boundary_solution_and_bounds() {
        let num = sl();
        let zt = z_tau(&num, &dirichlet_sl(), I).unwrap();
        assert!(zt.bc_residual < 1e-9);
        assert!(num.engine().solution_residual(&zt.z).unwrap() < 1e-6);
        let sa = imag_bound_check(&num, &dirichlet_sl(), I).unwrap();
        assert!(sa.min_eigenvalue.abs() < 1e-7, "{}", sa.min_eigenvalue);
        for lambda in [I, -I] {
            let diss = imag_bound_check(&num, &linear_lambda(2), lambda).unwrap();
            assert!(diss.passed && diss.min_eigenvalue > 1e-6, "{lambda}: {}", diss.min_eigenvalue);
        }
        let r = selfadjoint_identity_residual(&num, &dirichlet_sl(), I, c(0.0, 2.0)).unwrap();
        assert!(r < 1e-7, "{r}");
        let r = selfadjoint_identity_residual(&num, &dirichlet_sl(), I, I).unwrap();
        assert!(r < 1e-7, "{r}");
        assert!(selfadjoint_identity_residual(&num, &linear_lambda(2), I, I).is_err());
    }

    #[test]
    fn grid_symmetry() {
        let num = sl();
        let grid = [I, -I, c(1.0, 1.0), c(1.0, -1.0)];
        let cm = CharacteristicMatrix::compute(&num, &dirichlet_sl(), &grid, Route::Correction).unwrap();
        assert_eq!(cm.dim(), 2);
        assert!(cm.symmetry_defect() < 1e-8);
    }
}
