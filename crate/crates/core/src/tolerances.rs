/// Numerical thresholds shared by all modules.
///
/// Every field is an absolute or relative bound whose meaning is documented on
/// the consumer; defaults follow the accuracy the integrator can deliver at
/// `rtol = 1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Hermiticity defect of `B(t)` accepted by validation.
    pub herm: f64,
    /// Most negative eigenvalue of `Δ(t)` accepted by validation.
    pub psd: f64,
    /// Definiteness threshold relative to the largest Gram eigenvalue.
    pub definiteness_rel: f64,
    /// Relative local error tolerance of the integrator.
    pub ode_rtol: f64,
    /// Absolute local error tolerance of the integrator.
    pub ode_atol: f64,
    /// Maximum accepted plus rejected integrator steps per solve.
    pub ode_max_steps: usize,
    /// A boundary system with condition number above `1 / cond` is singular.
    pub cond: f64,
    /// Admissibility slack for boundary parameters.
    pub adm: f64,
    /// Agreement between routes for characteristic matrices.
    pub route: f64,
    /// Slack of the imaginary-part inequality.
    pub ineq: f64,
    /// Boundary condition residual of `Z_τ`.
    pub bc: f64,
    /// ODE residual certifying membership in the maximal relation.
    pub tmax: f64,
    /// Relative bracket width at which eigenvalue bisection stops.
    pub eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-10,
            definiteness_rel: 1e-10,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            ode_max_steps: 2_000_000,
            cond: 1e-9,
            adm: 1e-9,
            route: 1e-7,
            ineq: 1e-8,
            bc: 1e-9,
            tmax: 1e-6,
            eig: 1e-13,
        }
    }
}

impl Tolerances {
    /// Overrides one field by name; used by the CLI's `--tol-override KEY=VAL`.
    pub fn set(&mut self, key: &str, value: f64) -> Option<()> {
        let slot = match key {
            "herm" => &mut self.herm,
            "psd" => &mut self.psd,
            "definiteness_rel" => &mut self.definiteness_rel,
            "ode_rtol" => &mut self.ode_rtol,
            "ode_atol" => &mut self.ode_atol,
            "cond" => &mut self.cond,
            "adm" => &mut self.adm,
            "route" => &mut self.route,
            "ineq" => &mut self.ineq,
            "bc" => &mut self.bc,
            "tmax" => &mut self.tmax,
            "eig" => &mut self.eig,
            "ode_max_steps" => {
                self.ode_max_steps = value as usize;
                return Some(());
            }
            _ => return None,
        };
        *slot = value;
        Some(())
    }

    /// Field names and values in a fixed order, for reports.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("herm", self.herm),
            ("psd", self.psd),
            ("definiteness_rel", self.definiteness_rel),
            ("ode_rtol", self.ode_rtol),
            ("ode_atol", self.ode_atol),
            ("ode_max_steps", self.ode_max_steps as f64),
            ("cond", self.cond),
            ("adm", self.adm),
            ("route", self.route),
            ("ineq", self.ineq),
            ("bc", self.bc),
            ("tmax", self.tmax),
            ("eig", self.eig),
        ]
    }
}
