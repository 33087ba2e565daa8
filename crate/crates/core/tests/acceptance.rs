//! Acceptance suite: one line per criterion.
//!
//! Criterion 12 asks for `m₀(i) ≈ i√i` on the truncated half-line. The Weyl
//! function computed here is `m₀(λ) = tan(√λ L)/√λ`, whose limit is `i/√λ`,
//! so `m₀(i) → √i`. The check is run as stated and reported as failing; the
//! suite then requires the failure to be exactly that one, with the
//! computed value matching `√i`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use charmat_core::builtins;
use charmat_core::charmat::{self, NumericWeyl, Route, SyntheticWeylData, WeylSource};
use charmat_core::linalg::{self, c, csqrt, C64, I};
use charmat_core::ode::symplectic_defect;
use charmat_core::parameter::{self, dirichlet, linear_lambda, multivalued, zero_operator, BoundaryParameter, InterfaceDims};
use charmat_core::resolvent::{self, relative_distance};
use charmat_core::triplet::{self, RegularBoundaryMap};
use charmat_core::weighted::random_smooth_function;
use charmat_core::{Engine, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn engine(sys: charmat_core::SymmetricSystem) -> Arc<Engine> {
    let panels = builtins::default_panels(&sys);
    Arc::new(Engine::new(sys, panels, Tolerances::default()))
}

fn sl() -> NumericWeyl {
    NumericWeyl::new(engine(builtins::sturm_liouville_unit()))
}

fn free3() -> NumericWeyl {
    NumericWeyl::new(engine(builtins::free_system(1, 1, (0.0, 1.0))))
}

const LAMBDAS: [C64; 3] = [C64::new(0.0, 1.0), C64::new(0.0, 2.0), C64::new(1.0, 1.0)];

/// Dirichlet-type, `(I, 0)`, `(0, I)` and `τ(λ) = λI`.
fn tau_set(num: &NumericWeyl) -> Vec<(&'static str, BoundaryParameter)> {
    let dims = num.dims();
    let d = dims.dim0();
    vec![
        ("dirichlet", dirichlet(dims.dim_h, dims.dim_hhat)),
        ("(I,0)", zero_operator(d)),
        ("(0,I)", multivalued(d)),
        ("lambda*I", linear_lambda(d)),
    ]
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn weyl_oracle() -> Outcome {
    let num = sl();
    let thetas = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    let mut worst = 0.0f64;
    for k in 0..20 {
        let lambda = C64::from_polar(9.0 * (k + 1) as f64 / 20.0, thetas[k % 3]);
        let w = num.weyl_data(lambda).expect("Weyl data");
        let s = csqrt(lambda);
        let sec = s.cos().inv();
        for (got, want) in [(w.m0[(0, 0)], s.tan() / s), (w.m2[(0, 0)], sec), (w.m3[(0, 0)], sec), (w.m4[(0, 0)], s * s.tan())] {
            worst = worst.max(rel(got, want));
        }
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:.2e} over 20 points (tol 1e-8)"))
}

/// Boundary parameter, closed-form k-th eigenvalue, scan interval.
type EigenCase = (BoundaryParameter, fn(usize) -> f64, f64, f64);

fn eigenvalue_oracle() -> Outcome {
    let num = sl();
    let e = num.engine();
    let mut worst = 0.0f64;
    let mut counts = Vec::new();
    let cases: [EigenCase; 2] = [
        (dirichlet(1, 0), |k| ((k + 1) as f64 * PI).powi(2), 1.0, 260.0),
        (zero_operator(2), |k| ((k as f64 + 0.5) * PI).powi(2), 0.5, 220.0),
    ];
    for (tau, exact, lo, hi) in cases {
        let scan = resolvent::eig_scan(e, &tau, lo, hi, 200).expect("scan");
        counts.push(scan.eigenvalues.len());
        if scan.eigenvalues.len() < 5 {
            return outcome(false, format!("found only {} eigenvalues", scan.eigenvalues.len()));
        }
        for (k, v) in scan.eigenvalues.iter().take(5).enumerate() {
            worst = worst.max((v.value - exact(k)).abs() / exact(k));
        }
    }
    outcome(worst <= 1e-8, format!("counts {counts:?}, max relative error {worst:.2e} (tol 1e-8)"))
}

fn resolvent_routes() -> Outcome {
    let num = sl();
    let e = num.engine();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fs: Vec<_> = (0..10).map(|_| random_smooth_function(&mut rng, e.mesh(), 2, 5)).collect();
    let mut worst = 0.0f64;
    for (_, tau) in tau_set(&num) {
        for lambda in LAMBDAS {
            let grid = charmat::CharacteristicMatrix::compute(&num, &tau, &[lambda], Route::Correction).expect("Ω");
            for f in &fs {
                let bvp = resolvent::resolve_bvp(e, &tau, lambda, f).expect("bvp").y;
                let ker = resolvent::resolve_kernel(e, &grid, lambda, f).expect("kernel").y;
                let kr = resolvent::resolve_krein(&num, &tau, lambda, f).expect("krein").y;
                for (a, b) in [(&bvp, &ker), (&bvp, &kr), (&ker, &kr)] {
                    worst = worst.max(relative_distance(e, a, b).expect("distance"));
                }
            }
        }
    }
    outcome(worst <= 1e-6, format!("max pairwise relative distance {worst:.2e} over 120 cases (tol 1e-6)"))
}

fn both_half_planes() -> Vec<C64> {
    LAMBDAS.iter().flat_map(|l| [*l, l.conj()]).collect()
}

fn omega_routes() -> Outcome {
    let mut worst = 0.0f64;
    let mut krein_cases = 0;
    for num in [sl(), free3()] {
        for (_, tau) in tau_set(&num) {
            for lambda in both_half_planes() {
                let mut vals = Vec::new();
                for route in Route::ALL {
                    match charmat::omega(&num, &tau, lambda, route) {
                        Ok(v) => vals.push(v),
                        Err(charmat_core::Error::OperatorFormRequired { .. }) if route == Route::Krein => {}
                        Err(e) => return outcome(false, format!("{route} failed at {lambda}: {e}")),
                    }
                }
                if vals.len() == 4 {
                    krein_cases += 1;
                }
                for a in &vals {
                    for b in &vals {
                        worst = worst.max(linalg::norm(&(a - b)));
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-7,
        format!("max pairwise distance {worst:.2e}, Krein form defined in {krein_cases} of 48 cases (tol 1e-7)"),
    )
}

fn omega_from_z_check() -> Outcome {
    let mut worst = 0.0f64;
    let mut bc = 0.0f64;
    for num in [sl(), free3()] {
        for (_, tau) in tau_set(&num) {
            for lambda in both_half_planes() {
                let w = num.weyl_matrix(lambda).expect("Weyl");
                let omega = charmat::omega_tau(&tau.pair_at(lambda).expect("pair"), &w).expect("Ω");
                let z = charmat::z_tau(&num, &tau, lambda).expect("Z_τ");
                bc = bc.max(z.bc_residual);
                let j = num.engine().system().j();
                worst = worst.max(linalg::norm(&(omega - charmat::omega_from_z(&z, j))));
            }
        }
    }
    outcome(worst <= 1e-8, format!("max ‖Ω_τ - Z_τ(a) - J/2‖ {worst:.2e}, boundary residual {bc:.2e} (tol 1e-8)"))
}

fn imag_bounds() -> Outcome {
    let mut min_all = f64::INFINITY;
    let mut sa_worst = 0.0f64;
    let mut identity = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for num in [sl(), free3()] {
        let d = num.dims().dim0();
        let mut taus = tau_set(&num);
        taus.push(("dissipative", parameter::random_dissipative(&mut rng, d)));
        for (_, tau) in &taus {
            for lambda in both_half_planes() {
                let b = charmat::imag_bound_check(&num, tau, lambda).expect("bound");
                min_all = min_all.min(b.min_eigenvalue);
                if tau.is_self_adjoint() {
                    sa_worst = sa_worst.max(b.min_eigenvalue.abs());
                }
            }
            if tau.is_self_adjoint() {
                for l in [I, c(0.0, 2.0)] {
                    for m in [I, c(0.0, 2.0)] {
                        let r = charmat::selfadjoint_identity_residual(&num, tau, l, m).expect("identity");
                        identity = identity.max(r);
                    }
                }
            }
        }
    }
    let passed = min_all >= -1e-8 && sa_worst <= 1e-7 && identity <= 1e-7;
    outcome(
        passed,
        format!(
            "min eigenvalue {min_all:.2e} (≥ -1e-8), self-adjoint |value| {sa_worst:.2e} (≤ 1e-7), identity residual {identity:.2e} (≤ 1e-7)"
        ),
    )
}

fn nevanlinna_symmetry() -> Outcome {
    let mut omega_worst = 0.0f64;
    let mut m_worst = 0.0f64;
    let samples = [I, c(0.0, 2.0), c(1.0, 1.0), c(-3.0, 0.5), c(5.0, 4.0)];
    for num in [sl(), free3()] {
        for lambda in samples {
            let m = num.weyl_matrix(lambda).expect("M").value;
            let mc = num.weyl_matrix(lambda.conj()).expect("M").value;
            m_worst = m_worst.max(linalg::norm(&(mc - m.adjoint())));
        }
        for (_, tau) in tau_set(&num) {
            let grid: Vec<C64> = samples.iter().flat_map(|l| [*l, l.conj()]).collect();
            let cm = charmat::CharacteristicMatrix::compute(&num, &tau, &grid, Route::Correction).expect("Ω");
            omega_worst = omega_worst.max(cm.symmetry_defect());
        }
    }
    outcome(
        omega_worst <= 1e-8 && m_worst <= 1e-9,
        format!("Ω defect {omega_worst:.2e} (tol 1e-8), M defect {m_worst:.2e} (tol 1e-9)"),
    )
}

fn weyl_identity() -> Outcome {
    let grid = [I, c(1.0, 2.0), c(-2.0, 0.5)];
    let mut numeric = 0.0f64;
    for num in [sl(), free3()] {
        let bmap = RegularBoundaryMap::for_engine(num.engine());
        for l in grid {
            for m in grid {
                numeric = numeric.max(triplet::weyl_identity_residual(num.engine(), &bmap, l, m).expect("identity"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dims = InterfaceDims { dim_h: 1, dim_hhat: 1, dim_hb: 1, dim_hb_tilde: 3 };
    let random = SyntheticWeylData::random(&mut rng, dims, 5).expect("synthetic");
    let padded = SyntheticWeylData::padded(sl(), 2).expect("padded");
    let mut synthetic = 0.0f64;
    for syn in [&random, &padded] {
        for l in grid {
            for m in grid {
                synthetic = synthetic.max(syn.identity_residual(l, m).expect("identity"));
            }
        }
    }
    outcome(
        numeric <= 1e-7 && synthetic <= 1e-7,
        format!("numeric {numeric:.2e}, synthetic rectangular {synthetic:.2e} (tol 1e-7)"),
    )
}

fn display_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    let num = sl();
    for k in 0..10 {
        let lambda = LAMBDAS[k % 3];
        let w = num.weyl_matrix(lambda).expect("M");
        let tau = if k % 2 == 0 {
            parameter::random_selfadjoint(&mut rng, 2)
        } else {
            parameter::random_dissipative(&mut rng, 2)
        };
        let t = charmat::omega_tilde(&tau.pair_at(lambda).expect("pair"), &w).expect("Ω̃");
        worst = worst.max(t.display_residual);
    }
    let dims = InterfaceDims { dim_h: 1, dim_hhat: 1, dim_hb: 1, dim_hb_tilde: 3 };
    let syn = SyntheticWeylData::random(&mut rng, dims, 5).expect("synthetic");
    for k in 0..10 {
        let lambda = LAMBDAS[k % 3];
        let w = syn.weyl_matrix(lambda).expect("M₊");
        let tau = parameter::random_rectangular(&mut rng, &dims);
        let t = charmat::omega_tilde(&tau.pair_at(lambda).expect("pair"), &w).expect("Ω̃");
        worst = worst.max(t.display_residual);
    }
    outcome(worst <= 1e-11, format!("max cross-display residual {worst:.2e} over 20 parameters (tol 1e-11)"))
}

fn lagrange_and_symplectic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut lagrange = 0.0f64;
    let mut symplectic = 0.0f64;
    let mut unscaled = 0.0f64;
    for num in [sl(), free3()] {
        let e = num.engine();
        for _ in 0..25 {
            let (y, f) = triplet::random_tmax_pair(e, &mut rng).expect("pair");
            let (z, g) = triplet::random_tmax_pair(e, &mut rng).expect("pair");
            lagrange = lagrange.max(triplet::lagrange_residual(e, (&y, &f), (&z, &g)).expect("residual"));
        }
        for r in [1.0, 5.0, 10.0] {
            for k in 0..8 {
                let lambda = C64::from_polar(r, PI * k as f64 / 4.0);
                symplectic = symplectic.max(e.symplectic_residual(lambda).expect("symplectic"));
                let fund = e.fundamental(lambda).expect("Y₀");
                let conj = e.fundamental(lambda.conj()).expect("Y₀");
                unscaled = unscaled.max(symplectic_defect(&fund, &conj, e.system().j()));
            }
        }
    }
    outcome(
        lagrange <= 1e-8 && symplectic <= 1e-8,
        format!(
            "Lagrange residual {lagrange:.2e} over 50 pairs, scaled symplectic residual {symplectic:.2e} \
             (unscaled {unscaled:.2e}) for |λ| ≤ 10 (tol 1e-8)"
        ),
    )
}

fn canonical_discrimination() -> Outcome {
    let num = sl();
    let e = num.engine();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let f = random_smooth_function(&mut rng, e.mesh(), 2, 4);
    let mut sa = 0.0f64;
    for tau in [dirichlet(1, 0), zero_operator(2), multivalued(2)] {
        sa = sa.max(resolvent::resolvent_identity_residual(e, &tau, I, c(0.0, 2.0), &f).expect("identity"));
    }
    let gen = resolvent::resolvent_identity_residual(e, &linear_lambda(2), I, c(0.0, 2.0), &f).expect("identity");
    outcome(
        sa <= 1e-6 && gen >= 1e-3,
        format!("self-adjoint {sa:.2e} (≤ 1e-6), τ(λ) = λI {gen:.2e} (≥ 1e-3)"),
    )
}

/// Returns the stated check and the distance to `√i`.
fn half_line() -> (Outcome, f64) {
    let num = NumericWeyl::new(engine(builtins::half_line_truncation(builtins::HALF_LINE_LENGTH)));
    let m0 = num.weyl_data(I).expect("Weyl data").m0[(0, 0)];
    let stated = I * csqrt(I);
    let err = (m0 - stated).norm();
    let to_sqrt_i = (m0 - csqrt(I)).norm();
    let detail = format!(
        "m0(i) = {:.10}{:+.10}i, |m0(i) - i√i| = {err:.2e} (tol 1e-8); |m0(i) - √i| = {to_sqrt_i:.2e}: \
         the oracle i√i belongs to the opposite sign convention for m0",
        m0.re, m0.im
    );
    (outcome(err <= 1e-8, detail), to_sqrt_i)
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let checks: [(&str, Check); 11] = [
        ("Weyl-function oracle", weyl_oracle),
        ("eigenvalue oracle", eigenvalue_oracle),
        ("resolvent route agreement", resolvent_routes),
        ("characteristic-matrix route agreement", omega_routes),
        ("Ω_τ = Z_τ(a) + J/2", omega_from_z_check),
        ("imaginary-part bound and Gram identity", imag_bounds),
        ("Nevanlinna symmetry", nevanlinna_symmetry),
        ("Weyl identity (numeric and rectangular)", weyl_identity),
        ("Ω̃ display equivalence", display_equivalence),
        ("Lagrange identity and symplectic residual", lagrange_and_symplectic),
        ("canonical vs generalized resolvent", canonical_discrimination),
    ];
    let mut unexpected = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{verdict}] {name}: {} ({:.1}s)", k + 1, o.detail, start.elapsed().as_secs_f64());
        if !o.passed {
            unexpected += 1;
        }
    }
    let start = Instant::now();
    let (o, to_sqrt_i) = half_line();
    let verdict = if o.passed { "PASS" } else { "FAIL" };
    println!("criterion 12 [{verdict}] half-line truncation: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
    // the known failure must be the convention mismatch and nothing else
    if o.passed || to_sqrt_i > 1e-8 {
        println!("criterion 12 did not fail in the documented way");
        unexpected += 1;
    }
    if unexpected == 0 {
        println!("acceptance: 11 of 12 pass; criterion 12 fails only through the m0 sign convention");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
