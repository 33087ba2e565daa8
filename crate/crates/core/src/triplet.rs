//! Decomposing boundary triplet at a regular right endpoint.
//!
//! With `ℋ_b = H` the boundary map at `b` is plain component extraction,
//! `Γ_b y = (y₀(b), ŷ(b), y₁(b))`, and `ℋ = H₀ ⊕ ℋ_b`. The defining
//! solutions `v₀`, `u` come from one linear solve against the monodromy
//! matrix; the Weyl function is read off from their boundary values.

use crate::linalg::{self, block, c, coordinate_projection, eye, re, set_block, zeros, CMat, CVec, C64, I};
use crate::ode::{Engine, SolutionMatrix};
use crate::system::SpaceDecomposition;
use crate::weighted::WeightedFunction;
use crate::{Error, Result};

/// Boundary values at `b` of one or several solutions (one column each).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    pub gamma0: CMat,
    pub gamma_hat: CMat,
    pub gamma1: CMat,
}

/// `Γ_b y = (y₀(b), ŷ(b), y₁(b))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularBoundaryMap {
    dec: SpaceDecomposition,
}

impl RegularBoundaryMap {
    pub fn new(dec: SpaceDecomposition) -> Self {
        Self { dec }
    }

    pub fn for_engine(engine: &Engine) -> Self {
        Self::new(*engine.system().decomposition())
    }

    pub fn decomposition(&self) -> &SpaceDecomposition {
        &self.dec
    }

    /// Splits values at `b` (`dim 𝐇 × k`) into the three components.
    pub fn split(&self, y_b: &CMat) -> BoundaryValues {
        let (n, k) = (self.dec.dim_h(), self.dec.dim_hhat());
        let cols = y_b.ncols();
        BoundaryValues {
            gamma0: block(y_b, 0, 0, n, cols),
            gamma_hat: block(y_b, n, 0, k, cols),
            gamma1: block(y_b, n + k, 0, n, cols),
        }
    }

    pub fn gamma_b(&self, y: &SolutionMatrix) -> BoundaryValues {
        self.split(y.at_b())
    }

    /// `[y, z]_b = (J y(b), z(b))` for all column pairs: `z(b)* J y(b)`.
    pub fn boundary_form(&self, j: &CMat, y_b: &CMat, z_b: &CMat) -> CMat {
        z_b.adjoint() * j * y_b
    }

    /// `(Γ₀b y, Γ₁b z) - (Γ₁b y, Γ₀b z) + i (Γ̂_b y, Γ̂_b z)` for all column pairs.
    pub fn split_form(&self, y_b: &CMat, z_b: &CMat) -> CMat {
        let y = self.split(y_b);
        let z = self.split(z_b);
        z.gamma1.adjoint() * &y.gamma0 - z.gamma0.adjoint() * &y.gamma1 + z.gamma_hat.adjoint() * &y.gamma_hat * I
    }
}

/// `(Γ₀, Γ₁)` of a pair with values `y(a)`, `y(b)` (one column per element).
/// Rows are ordered `H ⊕ Ĥ ⊕ ℋ_b`.
pub fn triplet_matrices(dec: &SpaceDecomposition, y_a: &CMat, y_b: &CMat) -> (CMat, CMat) {
    let (n, k) = (dec.dim_h(), dec.dim_hhat());
    let cols = y_a.ncols();
    let y0a = block(y_a, 0, 0, n, cols);
    let yha = block(y_a, n, 0, k, cols);
    let y1a = block(y_a, n + k, 0, n, cols);
    let y0b = block(y_b, 0, 0, n, cols);
    let yhb = block(y_b, n, 0, k, cols);
    let y1b = block(y_b, n + k, 0, n, cols);
    let g0 = linalg::vcat(&[&(-y1a), &((&yha - &yhb) * I), &y0b]);
    let g1 = linalg::vcat(&[&y0a, &((&yha + &yhb) * re(0.5)), &(-y1b)]);
    (g0, g1)
}

/// Boundary values `Γ₀`, `Γ₁` of an element of the maximal relation.
#[derive(Debug, Clone)]
pub struct TripletValues {
    pub gamma0: CVec,
    pub gamma1: CVec,
    /// ODE residual that certified membership.
    pub residual: f64,
}

/// `(Γ₀{y, f}, Γ₁{y, f})` for `J y' - B y = Δ f`. Membership is certified by the
/// relative finite-difference residual, which must not exceed `tmax`.
pub fn triplet_maps(engine: &Engine, y: &WeightedFunction, f: &WeightedFunction) -> Result<TripletValues> {
    let residual = engine.ode_residual(y, re(0.0), Some(f))?;
    let tol = engine.tolerances().tmax;
    if residual > tol {
        return Err(Error::ResidualBreach { what: "maximal-relation membership", value: residual, tol });
    }
    let n = y.dim();
    let last = y.values().len() - 1;
    let ya = CMat::from_column_slice(n, 1, y.at(0).as_slice());
    let yb = CMat::from_column_slice(n, 1, y.at(last).as_slice());
    let (g0, g1) = triplet_matrices(engine.system().decomposition(), &ya, &yb);
    Ok(TripletValues { gamma0: g0.column(0).into_owned(), gamma1: g1.column(0).into_owned(), residual })
}

/// Rows of the boundary system for the defining solutions:
/// `[𝒫₁ ; i(𝒫̂ - 𝒫̂ Y₀(b)) ; 𝒫₀ Y₀(b)]`.
fn defining_system(dec: &SpaceDecomposition, monodromy: &CMat) -> CMat {
    let (n, k) = (dec.dim_h(), dec.dim_hhat());
    let dim = dec.dim_total();
    let p1 = coordinate_projection(dim, n + k, n);
    let ph = coordinate_projection(dim, n, k);
    let p0 = coordinate_projection(dim, 0, n);
    let mut l = zeros(dim, dim);
    set_block(&mut l, 0, 0, &p1);
    set_block(&mut l, n, 0, &((&ph - &ph * monodromy) * I));
    set_block(&mut l, n + k, 0, &(&p0 * monodromy));
    l
}

/// Right-hand sides: `diag(-I_H, I_Ĥ, I_{ℋ_b})`; the first `dim H₀` columns
/// give `v₀(a)`, the last `dim H` give `u(a)`.
fn defining_rhs(dec: &SpaceDecomposition) -> CMat {
    let mut r = eye(dec.dim_total());
    for j in 0..dec.dim_h() {
        r[(j, j)] = re(-1.0);
    }
    r
}

/// `Z(a, λ) = (v₀(a, λ), u(a, λ))`. Fails when the boundary system is
/// numerically singular, i.e. `λ` is at (or very near) an eigenvalue of `A₀`.
pub fn defining_initial_values(engine: &Engine, lambda: C64) -> Result<CMat> {
    let dec = engine.system().decomposition();
    let fund = engine.fundamental(lambda)?;
    let l = defining_system(dec, fund.monodromy());
    solve_equilibrated(&l, &defining_rhs(dec), engine.tolerances().cond, "defining-solution boundary system", lambda)
}

/// LU solve guarded by the row-equilibrated condition estimate.
pub(crate) fn solve_equilibrated(a: &CMat, b: &CMat, cond_tol: f64, what: &'static str, lambda: C64) -> Result<CMat> {
    let cond = linalg::row_equilibrated_condition(a);
    if !cond.is_finite() || cond * cond_tol > 1.0 {
        return Err(Error::IllConditioned { what, lambda, cond });
    }
    let mut scaled = a.clone();
    let mut rhs = b.clone();
    for r in 0..a.nrows() {
        let s = scaled.row(r).norm();
        if s > 0.0 {
            scaled.row_mut(r).scale_mut(1.0 / s);
            rhs.row_mut(r).scale_mut(1.0 / s);
        }
    }
    scaled.lu().solve(&rhs).ok_or(Error::IllConditioned { what, lambda, cond })
}

pub fn solve_v0(engine: &Engine, bmap: &RegularBoundaryMap, lambda: C64) -> Result<SolutionMatrix> {
    let za = defining_initial_values(engine, lambda)?;
    let h0 = bmap.decomposition().dim_h0();
    let fund = engine.fundamental(lambda)?;
    engine.propagate(&fund, &za.columns(0, h0).into_owned())
}

pub fn solve_u(engine: &Engine, bmap: &RegularBoundaryMap, lambda: C64) -> Result<SolutionMatrix> {
    let za = defining_initial_values(engine, lambda)?;
    let dec = bmap.decomposition();
    let fund = engine.fundamental(lambda)?;
    engine.propagate(&fund, &za.columns(dec.dim_h0(), dec.dim_h()).into_owned())
}

/// Weyl function `M(λ) = [[m₀, M₂], [M₃, M₄]]` on `ℋ = H₀ ⊕ ℋ_b` with the
/// defining solutions.
#[derive(Debug, Clone)]
pub struct WeylData {
    pub lambda: C64,
    pub dim_h: usize,
    pub dim_hhat: usize,
    pub m0: CMat,
    pub m2: CMat,
    pub m3: CMat,
    pub m4: CMat,
    pub v0: SolutionMatrix,
    pub u: SolutionMatrix,
}

impl WeylData {
    pub fn dim_h0(&self) -> usize {
        self.dim_h + self.dim_hhat
    }

    pub fn m(&self) -> CMat {
        let h0 = self.dim_h0();
        let n = self.dim_h;
        let mut m = zeros(h0 + n, h0 + n);
        set_block(&mut m, 0, 0, &self.m0);
        set_block(&mut m, 0, h0, &self.m2);
        set_block(&mut m, h0, 0, &self.m3);
        set_block(&mut m, h0, h0, &self.m4);
        m
    }

    /// `Z(·, λ) = (v₀, u)`.
    pub fn z(&self) -> SolutionMatrix {
        self.v0.hcat(&self.u).expect("same mesh")
    }
}

/// `P_Ĥ` as a `dim H₀` square matrix.
pub fn hat_projection(dim_h: usize, dim_hhat: usize) -> CMat {
    let h0 = dim_h + dim_hhat;
    let mut p = zeros(h0, h0);
    for j in dim_h..h0 {
        p[(j, j)] = re(1.0);
    }
    p
}

pub fn weyl(engine: &Engine, bmap: &RegularBoundaryMap, lambda: C64) -> Result<WeylData> {
    let dec = *bmap.decomposition();
    let (n, k) = (dec.dim_h(), dec.dim_hhat());
    let h0 = dec.dim_h0();
    let za = defining_initial_values(engine, lambda)?;
    let fund = engine.fundamental(lambda)?;
    let z = engine.propagate(&fund, &za)?;
    let v0 = z.columns(0, h0);
    let u = z.columns(h0, n);
    let zb = z.at_b();
    let m0 = block(&za, 0, 0, h0, h0) + hat_projection(n, k) * c(0.0, 0.5);
    let m2 = block(&za, 0, h0, h0, n);
    let m3 = -block(zb, n + k, 0, n, h0);
    let m4 = -block(zb, n + k, h0, n, n);
    Ok(WeylData { lambda, dim_h: n, dim_hhat: k, m0, m2, m3, m4, v0, u })
}

/// `Z(·, λ)`: its `Δ`-action is `γ(λ)` and [`crate::weighted::WeightedSpace::adjoint_apply`]
/// realizes `γ*(λ)`.
pub fn gamma_field(engine: &Engine, bmap: &RegularBoundaryMap, lambda: C64) -> Result<SolutionMatrix> {
    Ok(weyl(engine, bmap, lambda)?.z())
}

/// Largest violation of the six defining conditions of `v₀` and `u`.
pub fn defining_condition_residual(bmap: &RegularBoundaryMap, w: &WeylData) -> f64 {
    let dec = bmap.decomposition();
    let (n, k) = (dec.dim_h(), dec.dim_hhat());
    let h0 = dec.dim_h0();
    let cond = |y: &SolutionMatrix, p1: CMat, hat: CMat, g0: CMat| {
        let ya = y.at_a();
        let b = bmap.gamma_b(y);
        let cols = ya.ncols();
        linalg::norm(&(block(ya, n + k, 0, n, cols) - p1))
            + linalg::norm(&((block(ya, n, 0, k, cols) - &b.gamma_hat) * I - hat))
            + linalg::norm(&(b.gamma0 - g0))
    };
    let mut p_h0_h = zeros(n, h0);
    let mut p_h0_hat = zeros(k, h0);
    for j in 0..n {
        p_h0_h[(j, j)] = re(1.0);
    }
    for j in 0..k {
        p_h0_hat[(j, n + j)] = re(1.0);
    }
    let r_v0 = cond(&w.v0, -p_h0_h, p_h0_hat, zeros(n, h0));
    let r_u = cond(&w.u, zeros(n, n), zeros(k, n), eye(n));
    r_v0.max(r_u)
}

/// `‖M(μ) - M(λ)* - (μ - λ̄) ∫ Z*(t, λ) Δ Z(t, μ) dt‖`.
pub fn weyl_identity_residual(engine: &Engine, bmap: &RegularBoundaryMap, lambda: C64, mu: C64) -> Result<f64> {
    let wl = weyl(engine, bmap, lambda)?;
    let wm = weyl(engine, bmap, mu)?;
    let gram = engine.space().solution_gram(&wl.z(), &wm.z())?;
    Ok(linalg::norm(&(wm.m() - wl.m().adjoint() - gram * (mu - lambda.conj()))))
}

/// Relative residual of `(f, z)_Δ - (y, g)_Δ = [y, z]_b - (J y(a), z(a))` for
/// two pairs `{y, f}`, `{z, g}` of the maximal relation.
pub fn lagrange_residual(
    engine: &Engine,
    (y, f): (&WeightedFunction, &WeightedFunction),
    (z, g): (&WeightedFunction, &WeightedFunction),
) -> Result<f64> {
    let space = engine.space();
    let j = engine.system().j();
    let last = y.values().len() - 1;
    let lhs = space.delta_inner(f, z)? - space.delta_inner(y, g)?;
    let form = |k: usize| z.at(k).dotc(&(j * y.at(k)));
    let rhs = form(last) - form(0);
    let scale = space.delta_norm(f)? * space.delta_norm(z)?
        + space.delta_norm(y)? * space.delta_norm(g)?
        + linalg::vnorm(y.at(last)) * linalg::vnorm(z.at(last))
        + linalg::vnorm(y.at(0)) * linalg::vnorm(z.at(0));
    Ok((lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE))
}

/// `{y, f}` in the maximal relation: smooth random `f` and random `y(a)`.
pub fn random_tmax_pair<R: rand::Rng>(engine: &Engine, rng: &mut R) -> Result<(WeightedFunction, WeightedFunction)> {
    let n = engine.dim();
    let f = crate::weighted::random_smooth_function(rng, engine.mesh(), n, 4);
    let ya = CVec::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let y = engine.solve_inhomogeneous(re(0.0), &f, &ya)?;
    Ok((y, f))
}
