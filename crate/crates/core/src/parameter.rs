//! Boundary parameters `τ(λ) = {(C₀(λ), C₁(λ)); ℋ}` and their interface form.
//!
//! A pair stands for the relation `{(h, h') : C₀ h + C₁ h' = 0}`, so an
//! operator `τ` is the pair `(τ, -I)`. In the rectangular case `C₀` acts on
//! `ℋ₀ = H ⊕ Ĥ ⊕ ℋ̃_b` and `C₁` on `ℋ₁ = H ⊕ Ĥ ⊕ ℋ_b`, with `ℋ_b` the
//! leading `dim ℋ_b` coordinates of `ℋ̃_b`.

use rand::Rng;

use crate::linalg::{self, block, c, eye, hcat, imag_part, re, zeros, CMat, C64, I};
use crate::system::boundary_j_b;
use crate::{Error, Result};

/// Condition limit for treating `C₁` as invertible (operator form).
const OPERATOR_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub c0: CMat,
    pub c1: CMat,
}

impl Pair {
    pub fn new(c0: CMat, c1: CMat) -> Result<Self> {
        if c0.nrows() != c1.nrows() || c1.ncols() > c0.ncols() {
            return Err(Error::DimensionMismatch {
                context: "boundary pair",
                expected: "C₀ r×d₀ and C₁ r×d₁ with d₁ ≤ d₀".into(),
                found: format!("C₀ {}x{}, C₁ {}x{}", c0.nrows(), c0.ncols(), c1.nrows(), c1.ncols()),
            });
        }
        Ok(Self { c0, c1 })
    }

    /// The operator `τ` as the pair `(τ, -I)`.
    pub fn from_operator(tau: CMat) -> Result<Self> {
        let d = tau.nrows();
        Self::new(tau, -eye(d))
    }

    /// `dim ℋ₀`.
    pub fn dim0(&self) -> usize {
        self.c0.ncols()
    }

    /// `dim ℋ₁`.
    pub fn dim1(&self) -> usize {
        self.c1.ncols()
    }

    pub fn stacked(&self) -> CMat {
        hcat(&[&self.c0, &self.c1])
    }

    /// Rows of `(C₀, C₁)` orthonormalized; equivalent pairs have the same
    /// row space.
    pub fn canonical(&self) -> Result<Self> {
        let w = linalg::orthonormalize_rows(&self.stacked())?;
        let d0 = self.dim0();
        Ok(Self { c0: w.columns(0, d0).into_owned(), c1: w.columns(d0, self.dim1()).into_owned() })
    }

    /// Pairs related by left multiplication with an invertible matrix.
    pub fn equivalent(&self, other: &Pair, tol: f64) -> bool {
        if self.dim0() != other.dim0() || self.dim1() != other.dim1() {
            return false;
        }
        match (linalg::row_space_projector(&self.stacked()), linalg::row_space_projector(&other.stacked())) {
            (Ok(p), Ok(q)) => linalg::norm(&(p - q)) <= tol,
            _ => false,
        }
    }

    /// `rank (C₀, C₁) = dim ℋ₀`.
    pub fn has_full_rank(&self, tol: f64) -> bool {
        linalg::rank(&self.stacked(), tol) == self.c0.nrows()
    }

    /// `τ = -C₁⁻¹ C₀` when `C₁` is invertible.
    pub fn operator(&self) -> Result<CMat> {
        if self.dim0() != self.dim1() {
            return Err(Error::OperatorFormRequired { what: "rectangular pair" });
        }
        let cond = linalg::condition_number(&self.c1);
        if !cond.is_finite() || cond > OPERATOR_COND_LIMIT {
            return Err(Error::OperatorFormRequired { what: "operator form of τ" });
        }
        let inv = linalg::inverse(&self.c1, OPERATOR_COND_LIMIT, "C₁", re(0.0))?;
        Ok(-(inv * &self.c0))
    }

    /// `Im(C₁ C₀*)` (square case).
    pub fn imag_form(&self) -> CMat {
        imag_part(&(&self.c1 * self.c0.adjoint()))
    }

    /// Kernel form of the adjoint relation
    /// `τ* = {(-C₁* ξ, C₀* ξ)}` (square case).
    pub fn adjoint(&self) -> Result<Self> {
        if self.dim0() != self.dim1() {
            return Err(Error::InvalidInput("adjoint pair needs equal dimensions".into()));
        }
        let d = self.dim0();
        let span = linalg::vcat(&[&(-self.c1.adjoint()), &self.c0.adjoint()]);
        let rows = linalg::column_complement(&span)?.adjoint();
        if rows.nrows() != d {
            return Err(Error::Admissibility("pair does not have full rank".into()));
        }
        Ok(Self { c0: rows.columns(0, d).into_owned(), c1: rows.columns(d, d).into_owned() })
    }
}

/// `τ(λ) = A + B λ + Σ_j α_j ((t_j - λ)⁻¹ - t_j (1 + t_j²)⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalNevanlinna {
    pub a: CMat,
    pub b: CMat,
    pub terms: Vec<(f64, CMat)>,
}

impl RationalNevanlinna {
    pub fn eval(&self, lambda: C64) -> Result<CMat> {
        let mut tau = &self.a + &self.b * lambda;
        for (t, alpha) in &self.terms {
            let d = re(*t) - lambda;
            if d.norm() == 0.0 {
                return Err(Error::SpectralParameter { lambda, reason: "λ is a pole of τ" });
            }
            tau += alpha * (d.inv() - re(t / (1.0 + t * t)));
        }
        Ok(tau)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryParameter {
    /// `Im(C₁C₀*) = 0`, `C₀ ± iC₁` invertible.
    ConstantSelfAdjoint(Pair),
    /// Constant pair on `ℂ₊`; on `ℂ₋` the given lower pair, or the adjoint
    /// pair when none is given.
    ConstantPair { upper: Pair, lower: Option<Pair> },
    RationalNevanlinna(RationalNevanlinna),
}

impl BoundaryParameter {
    pub fn make_constant_selfadjoint(c0: CMat, c1: CMat, adm: f64) -> Result<Self> {
        let pair = Pair::new(c0, c1)?;
        if pair.dim0() != pair.dim1() {
            return Err(Error::Admissibility("self-adjoint pair must be square".into()));
        }
        let defect = linalg::norm(&pair.imag_form());
        if defect > adm {
            return Err(Error::Admissibility(format!("Im(C₁C₀*) has norm {defect:e}")));
        }
        for (sign, name) in [(1.0, "C₀ + iC₁"), (-1.0, "C₀ - iC₁")] {
            let m = &pair.c0 + &pair.c1 * c(0.0, sign);
            let smin = linalg::min_singular_value(&m);
            if smin < adm {
                return Err(Error::Admissibility(format!("{name} is singular (smallest singular value {smin:e})")));
            }
        }
        Ok(Self::ConstantSelfAdjoint(pair))
    }

    pub fn make_constant_pair(upper: Pair, lower: Option<Pair>, adm: f64) -> Result<Self> {
        if !upper.has_full_rank(adm) {
            return Err(Error::Admissibility("rank (C₀, C₁) is deficient".into()));
        }
        if let Some(l) = &lower {
            if l.c0.nrows() != upper.dim1() || !l.has_full_rank(adm) {
                return Err(Error::Admissibility("lower pair must have full rank dim ℋ₁".into()));
            }
        }
        Ok(Self::ConstantPair { upper, lower })
    }

    pub fn make_rational(a: CMat, b: CMat, terms: Vec<(f64, CMat)>, tol: f64) -> Result<Self> {
        let d = a.nrows();
        let square = |m: &CMat| m.nrows() == d && m.ncols() == d;
        if !square(&a) || !square(&b) || terms.iter().any(|(_, m)| !square(m)) {
            return Err(Error::DimensionMismatch {
                context: "rational τ",
                expected: format!("{d}x{d} coefficients"),
                found: "mixed sizes".into(),
            });
        }
        if linalg::norm(&(&a - a.adjoint())) > tol {
            return Err(Error::Admissibility("A is not Hermitian".into()));
        }
        let psd = |m: &CMat| linalg::norm(&(m - m.adjoint())) <= tol && linalg::min_hermitian_eigenvalue(m) >= -tol;
        if !psd(&b) {
            return Err(Error::Admissibility("B is not positive semidefinite".into()));
        }
        for (t, alpha) in &terms {
            if !t.is_finite() {
                return Err(Error::Admissibility("poles must be real".into()));
            }
            if !psd(alpha) {
                return Err(Error::Admissibility(format!("residue at {t} is not positive semidefinite")));
            }
        }
        let mut poles: Vec<f64> = terms.iter().map(|(t, _)| *t).collect();
        poles.sort_by(f64::total_cmp);
        if poles.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Admissibility("poles must be distinct".into()));
        }
        Ok(Self::RationalNevanlinna(RationalNevanlinna { a, b, terms }))
    }

    /// `(C₀(λ), C₁(λ))`.
    pub fn pair_at(&self, lambda: C64) -> Result<Pair> {
        match self {
            Self::ConstantSelfAdjoint(p) => Ok(p.clone()),
            Self::ConstantPair { upper, lower } => {
                if lambda.im > 0.0 {
                    Ok(upper.clone())
                } else if lambda.im < 0.0 {
                    match lower {
                        Some(l) => Ok(l.clone()),
                        None => upper.adjoint(),
                    }
                } else {
                    Err(Error::SpectralParameter { lambda, reason: "real λ needs a self-adjoint τ" })
                }
            }
            Self::RationalNevanlinna(r) => {
                if lambda.im == 0.0 && !self.is_self_adjoint() {
                    return Err(Error::SpectralParameter { lambda, reason: "real λ needs a self-adjoint τ" });
                }
                Pair::from_operator(r.eval(lambda)?)
            }
        }
    }

    /// `τ(λ)` as a matrix, when `τ(λ)` is an operator.
    pub fn operator_at(&self, lambda: C64) -> Result<CMat> {
        match self {
            Self::RationalNevanlinna(r) => r.eval(lambda),
            _ => self.pair_at(lambda)?.operator(),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        match self {
            Self::ConstantSelfAdjoint(_) => true,
            Self::ConstantPair { .. } => false,
            Self::RationalNevanlinna(r) => r.b.iter().all(|z| z.norm() == 0.0) && r.terms.is_empty(),
        }
    }

    /// `(dim ℋ₀, dim ℋ₁)`.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Self::ConstantSelfAdjoint(p) | Self::ConstantPair { upper: p, .. } => (p.dim0(), p.dim1()),
            Self::RationalNevanlinna(r) => (r.dim(), r.dim()),
        }
    }
}

/// Block sizes of `ℋ₀ = H ⊕ Ĥ ⊕ ℋ̃_b` and `ℋ₁ = H ⊕ Ĥ ⊕ ℋ_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceDims {
    pub dim_h: usize,
    pub dim_hhat: usize,
    pub dim_hb: usize,
    pub dim_hb_tilde: usize,
}

impl InterfaceDims {
    /// `ℋ̃_b = ℋ_b = H`.
    pub fn equal_index(dim_h: usize, dim_hhat: usize) -> Self {
        Self { dim_h, dim_hhat, dim_hb: dim_h, dim_hb_tilde: dim_h }
    }

    pub fn dim0(&self) -> usize {
        self.dim_h + self.dim_hhat + self.dim_hb_tilde
    }

    pub fn dim1(&self) -> usize {
        self.dim_h + self.dim_hhat + self.dim_hb
    }

    pub fn dim_perp(&self) -> usize {
        self.dim_hb_tilde - self.dim_hb
    }

    /// `dim 𝐇`.
    pub fn dim_total(&self) -> usize {
        2 * self.dim_h + self.dim_hhat
    }

    /// `dim 𝐇_b`.
    pub fn dim_boundary(&self) -> usize {
        self.dim_hb_tilde + self.dim_hhat + self.dim_hb
    }

    pub fn j(&self) -> CMat {
        crate::system::canonical_j(&crate::system::SpaceDecomposition::new(self.dim_h, self.dim_hhat).expect("dim_h > 0"))
    }

    pub fn j_b(&self) -> CMat {
        boundary_j_b(self.dim_hb, self.dim_perp(), self.dim_hhat)
    }
}

/// `(C_a, C_b)` with `C_a y(a) + C_b Γ_b y = 0`. Columns of `C_b` follow
/// `ℋ_b ⊕ ℋ_b^⊥ ⊕ Ĥ ⊕ ℋ_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfacePair {
    pub ca: CMat,
    pub cb: CMat,
}

/// `C_a = (-C_{1a}, iĈ₀ - ½Ĉ₁, -C_{0a})`, `C_b = (C_{0b}, -iĈ₀ - ½Ĉ₁, C_{1b})`.
pub fn to_interface_pair(pair: &Pair, dims: &InterfaceDims) -> Result<InterfacePair> {
    let (n, k) = (dims.dim_h, dims.dim_hhat);
    if pair.dim0() != dims.dim0() || pair.dim1() != dims.dim1() {
        return Err(Error::DimensionMismatch {
            context: "interface transform",
            expected: format!("C₀ on {} and C₁ on {} coordinates", dims.dim0(), dims.dim1()),
            found: format!("{} and {}", pair.dim0(), pair.dim1()),
        });
    }
    let d = pair.c0.nrows();
    let c0a = block(&pair.c0, 0, 0, d, n);
    let c0h = block(&pair.c0, 0, n, d, k);
    let c0b = block(&pair.c0, 0, n + k, d, dims.dim_hb_tilde);
    let c1a = block(&pair.c1, 0, 0, d, n);
    let c1h = block(&pair.c1, 0, n, d, k);
    let c1b = block(&pair.c1, 0, n + k, d, dims.dim_hb);
    let ca = hcat(&[&(-&c1a), &(&c0h * I - &c1h * re(0.5)), &(-&c0a)]);
    let cb = hcat(&[&c0b, &(-&c0h * I - &c1h * re(0.5)), &c1b]);
    Ok(InterfacePair { ca, cb })
}

/// Inverse of [`to_interface_pair`]: `Ĉ₁ = -(C_{a2} + C_{b2})`,
/// `Ĉ₀ = (C_{a2} - C_{b2}) / 2i`. Rejects `(C_a, C_b)` without full row rank.
pub fn from_interface_pair(ip: &InterfacePair, dims: &InterfaceDims, tol: f64) -> Result<Pair> {
    let (n, k) = (dims.dim_h, dims.dim_hhat);
    let d = ip.ca.nrows();
    if ip.ca.ncols() != dims.dim_total() || ip.cb.ncols() != dims.dim_boundary() || ip.cb.nrows() != d {
        return Err(Error::DimensionMismatch {
            context: "interface pair",
            expected: format!("C_a with {} and C_b with {} columns", dims.dim_total(), dims.dim_boundary()),
            found: format!("{}x{} and {}x{}", d, ip.ca.ncols(), ip.cb.nrows(), ip.cb.ncols()),
        });
    }
    if linalg::rank(&hcat(&[&ip.ca, &ip.cb]), tol) != d || d != dims.dim0() {
        return Err(Error::Admissibility("ran (C_a, C_b) is not the whole boundary space".into()));
    }
    let hbt = dims.dim_hb_tilde;
    let c1a = -block(&ip.ca, 0, 0, d, n);
    let ca2 = block(&ip.ca, 0, n, d, k);
    let c0a = -block(&ip.ca, 0, n + k, d, n);
    let c0b = block(&ip.cb, 0, 0, d, hbt);
    let cb2 = block(&ip.cb, 0, hbt, d, k);
    let c1b = block(&ip.cb, 0, hbt + k, d, dims.dim_hb);
    let c1h = -(&ca2 + &cb2);
    let c0h = (&ca2 - &cb2) * c(0.0, -0.5);
    Pair::new(hcat(&[&c0a, &c0h, &c0b]), hcat(&[&c1a, &c1h, &c1b]))
}

/// Admissibility verdicts at one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilitySample {
    pub lambda: C64,
    pub rank: usize,
    pub required_rank: usize,
    /// Smallest eigenvalue of `i sgn(Im λ) (C_a J C_a* - C_b J_b C_b*)`;
    /// zero for real `λ`.
    pub min_form_eigenvalue: f64,
    /// `‖C_a(λ) J C_a(λ̄)* - C_b(λ) J_b C_b(λ̄)*‖`.
    pub symmetry_defect: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub samples: Vec<AdmissibilitySample>,
    pub passed: bool,
}

pub fn check_interface(
    upper: &InterfacePair,
    conj: &InterfacePair,
    lambda: C64,
    dims: &InterfaceDims,
    adm: f64,
) -> AdmissibilitySample {
    let j = dims.j();
    let jb = dims.j_b();
    let required_rank = upper.ca.nrows();
    let rank = linalg::rank(&hcat(&[&upper.ca, &upper.cb]), adm);
    let form = (&upper.ca * &j * upper.ca.adjoint() - &upper.cb * &jb * upper.cb.adjoint()) * I;
    let sgn = if lambda.im > 0.0 {
        1.0
    } else if lambda.im < 0.0 {
        -1.0
    } else {
        0.0
    };
    let min_form_eigenvalue = if sgn == 0.0 { 0.0 } else { linalg::min_hermitian_eigenvalue(&(form * re(sgn))) };
    let cross = &upper.ca * &j * conj.ca.adjoint() - &upper.cb * &jb * conj.cb.adjoint();
    let symmetry_defect = linalg::norm(&cross);
    let passed = rank == required_rank && min_form_eigenvalue >= -adm && symmetry_defect <= adm;
    AdmissibilitySample { lambda, rank, required_rank, min_form_eigenvalue, symmetry_defect, passed }
}

/// Rank, sign and symmetry conditions on `(C_a(λ), C_b(λ))` at each sample.
pub fn check_admissibility(
    tau: &BoundaryParameter,
    dims: &InterfaceDims,
    samples: &[C64],
    adm: f64,
) -> Result<AdmissibilityReport> {
    let mut out = Vec::with_capacity(samples.len());
    for &lambda in samples {
        let up = to_interface_pair(&tau.pair_at(lambda)?, dims)?;
        let conj = to_interface_pair(&tau.pair_at(lambda.conj())?, dims)?;
        out.push(check_interface(&up, &conj, lambda, dims, adm));
    }
    let passed = !out.is_empty() && out.iter().all(|s| s.passed);
    Ok(AdmissibilityReport { samples: out, passed })
}

/// `‖i(C_a J C_a* - C_b J_b C_b*) - (2 Im(C₁ C₀₁*) + C₀₂ C₀₂*)‖`, where `C₀₁`,
/// `C₀₂` are the restrictions of `C₀` to `ℋ₁` and `ℋ₂ = ℋ_b^⊥`.
pub fn interface_form_identity_residual(pair: &Pair, dims: &InterfaceDims) -> Result<f64> {
    let ip = to_interface_pair(pair, dims)?;
    let lhs = (&ip.ca * dims.j() * ip.ca.adjoint() - &ip.cb * dims.j_b() * ip.cb.adjoint()) * I;
    let d = pair.c0.nrows();
    let d1 = dims.dim1();
    let c01 = block(&pair.c0, 0, 0, d, d1);
    let c02 = block(&pair.c0, 0, d1, d, dims.dim_perp());
    let rhs = imag_part(&(&pair.c1 * c01.adjoint())) * re(2.0) + &c02 * c02.adjoint();
    Ok(linalg::norm(&(lhs - rhs)))
}

/// `y₀(a) = 0`, `y₀(b) = 0` and `ŷ(a) = ŷ(b)`: separated Dirichlet conditions
/// on `H` with a periodic condition on `Ĥ`.
pub fn dirichlet(dim_h: usize, dim_hhat: usize) -> BoundaryParameter {
    let dims = InterfaceDims::equal_index(dim_h, dim_hhat);
    let (n, k) = (dim_h, dim_hhat);
    let d = dims.dim0();
    let mut ca = zeros(d, 2 * n + k);
    let mut cb = zeros(d, 2 * n + k);
    for j in 0..n {
        ca[(j, j)] = re(1.0);
        cb[(n + j, j)] = re(1.0);
    }
    for j in 0..k {
        ca[(2 * n + j, n + j)] = re(1.0);
        cb[(2 * n + j, n + j)] = re(-1.0);
    }
    let pair = from_interface_pair(&InterfacePair { ca, cb }, &dims, 1e-12).expect("full rank");
    BoundaryParameter::make_constant_selfadjoint(pair.c0, pair.c1, 1e-12).expect("Dirichlet pair is self-adjoint")
}

/// Dirichlet conditions `u(a) = u(b) = 0` for a Sturm–Liouville system.
pub fn dirichlet_sl() -> BoundaryParameter {
    dirichlet(1, 0)
}

/// `τ = (I, 0)`: the operator `0`, which reproduces `A₀`.
pub fn zero_operator(dim: usize) -> BoundaryParameter {
    BoundaryParameter::make_constant_selfadjoint(eye(dim), zeros(dim, dim), 1e-12).expect("self-adjoint")
}

/// `τ = (0, I)`: the purely multivalued relation.
pub fn multivalued(dim: usize) -> BoundaryParameter {
    BoundaryParameter::make_constant_selfadjoint(zeros(dim, dim), eye(dim), 1e-12).expect("self-adjoint")
}

/// `τ(λ) = λ I`.
pub fn linear_lambda(dim: usize) -> BoundaryParameter {
    BoundaryParameter::make_rational(zeros(dim, dim), eye(dim), Vec::new(), 1e-12).expect("Nevanlinna")
}

fn random_complex<R: Rng>(rng: &mut R, r: usize, cols: usize) -> CMat {
    CMat::from_fn(r, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    random_complex(rng, d, d).qr().q()
}

/// Random well-conditioned invertible matrix.
pub fn random_invertible<R: Rng>(rng: &mut R, d: usize) -> CMat {
    eye(d) * re(2.0) + random_complex(rng, d, d) * re(0.5)
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMat {
    linalg::hermitian_part(&random_complex(rng, d, d))
}

/// `(i(I - U), I + U)` for a random unitary `U`, left-multiplied by a random
/// invertible matrix.
pub fn random_selfadjoint<R: Rng>(rng: &mut R, d: usize) -> BoundaryParameter {
    let u = random_unitary(rng, d);
    let g = random_invertible(rng, d);
    let c0 = &g * ((eye(d) - &u) * I);
    let c1 = &g * (eye(d) + &u);
    BoundaryParameter::make_constant_selfadjoint(c0, c1, 1e-9).expect("Cayley pairs are self-adjoint")
}

/// Constant dissipative operator `Θ + iD` with `D ⪰ 0`, as a pair.
pub fn random_dissipative<R: Rng>(rng: &mut R, d: usize) -> BoundaryParameter {
    let theta = random_hermitian(rng, d);
    let x = random_complex(rng, d, d);
    let tau = theta + &x * x.adjoint() * I;
    let g = random_invertible(rng, d);
    let upper = Pair::new(&g * &tau, -g).expect("square");
    BoundaryParameter::make_constant_pair(upper, None, 1e-9).expect("full rank")
}

/// Rectangular pair on `ℂ₊`: `C₁ = G [-I_{d₁}; 0]`,
/// `C₀ = G [[Θ + iD, W], [0, V]]` with `D ⪰ 0`, and the lower pair `([Θ, 0], -I)`.
pub fn random_rectangular<R: Rng>(rng: &mut R, dims: &InterfaceDims) -> BoundaryParameter {
    let d0 = dims.dim0();
    let d1 = dims.dim1();
    let d2 = d0 - d1;
    let theta = random_hermitian(rng, d1);
    let x = random_complex(rng, d1, d1);
    let mut c0 = zeros(d0, d0);
    linalg::set_block(&mut c0, 0, 0, &(&theta + &x * x.adjoint() * c(0.0, 0.2)));
    linalg::set_block(&mut c0, 0, d1, &random_complex(rng, d1, d2));
    linalg::set_block(&mut c0, d1, d1, &(eye(d2) + random_complex(rng, d2, d2) * re(0.3)));
    let mut c1 = zeros(d0, d1);
    linalg::set_block(&mut c1, 0, 0, &(-eye(d1)));
    let g = random_invertible(rng, d0);
    let upper = Pair::new(&g * c0, &g * c1).expect("conforming blocks");
    let lower = Pair::new(hcat(&[&theta, &zeros(d1, d2)]), -eye(d1)).expect("conforming blocks");
    BoundaryParameter::ConstantPair { upper, lower: Some(lower) }
}
