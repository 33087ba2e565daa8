//! Built-in example systems.

use std::sync::Arc;

use crate::linalg::{eye, zeros};
use crate::system::{CoefficientKind, CoefficientMap, ScalarFn, SpaceDecomposition, SymmetricSystem};

/// Length used for the half-line truncation.
pub const HALF_LINE_LENGTH: f64 = 30.0;

fn sl(p: ScalarFn, q: ScalarFn, w: ScalarFn, interval: (f64, f64)) -> SymmetricSystem {
    SymmetricSystem::from_sturm_liouville(p, q, w, interval, 1001).expect("built-in coefficients are valid")
}

/// `-u'' = λ u` on `[0, 1]`.
pub fn sturm_liouville_unit() -> SymmetricSystem {
    sl(Arc::new(|_| 1.0), Arc::new(|_| 0.0), Arc::new(|_| 1.0), (0.0, 1.0))
}

/// `-u'' = λ u` on `[0, length]`.
pub fn half_line_truncation(length: f64) -> SymmetricSystem {
    sl(Arc::new(|_| 1.0), Arc::new(|_| 0.0), Arc::new(|_| 1.0), (0.0, length))
}

/// `-((1 + t/2) u')' + t u = λ (1 + t²) u` on `[0, 1]`.
pub fn sturm_liouville_variable() -> SymmetricSystem {
    sl(Arc::new(|t| 1.0 + 0.5 * t), Arc::new(|t| t), Arc::new(|t| 1.0 + t * t), (0.0, 1.0))
}

/// `B = 0`, `Δ = I` on the given decomposition; `Y₀(t, λ) = exp(-λ J t)`.
pub fn free_system(dim_h: usize, dim_hhat: usize, interval: (f64, f64)) -> SymmetricSystem {
    let dec = SpaceDecomposition::new(dim_h, dim_hhat).expect("dim_h > 0");
    let n = dec.dim_total();
    let b = CoefficientMap::constant(CoefficientKind::HermitianB, zeros(n, n)).expect("square");
    let delta = CoefficientMap::constant(CoefficientKind::PsdWeight, eye(n)).expect("square");
    SymmetricSystem::new(dec, interval, b, delta).expect("valid free system")
}

/// Looks up a built-in by its CLI name.
pub fn by_name(name: &str) -> Option<SymmetricSystem> {
    Some(match name {
        "sl" | "sl-dirichlet" | "sl-unit" => sturm_liouville_unit(),
        "sl-variable" => sturm_liouville_variable(),
        "half-line" => half_line_truncation(HALF_LINE_LENGTH),
        "free2" => free_system(1, 0, (0.0, 1.0)),
        "free3" => free_system(1, 1, (0.0, 1.0)),
        _ => return None,
    })
}

/// Quadrature panels adequate for the default tolerances on a built-in.
pub fn default_panels(sys: &SymmetricSystem) -> usize {
    let (a, b) = sys.interval();
    ((800.0 * (b - a)).ceil() as usize).max(800)
}

pub fn all_systems() -> Vec<(&'static str, SymmetricSystem)> {
    ["sl", "sl-variable", "half-line", "free2", "free3"]
        .into_iter()
        .map(|n| (n, by_name(n).expect("listed name")))
        .collect()
}
