use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::StateVec;
use crate::{Error, Result};

/// Right-hand side `f(t, x)`. Must be a pure function of its arguments.
pub type RhsFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// Closed-form solution `t ↦ x(t)`, when one is known.
pub type ExactSolution = fn(f64) -> Vec<f64>;

/// `x'(t) = f(t, x)`, `x(t0) = x0` on `[t0, t_end]`, with a user-supplied
/// Lipschitz constant for `f` in its state argument.
#[derive(Clone)]
pub struct OdeProblem {
    name: String,
    rhs: Arc<RhsFn>,
    t0: f64,
    t_end: f64,
    x0: StateVec,
    lipschitz: f64,
    autonomous: bool,
    exact: Option<ExactSolution>,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("x0", &self.x0)
            .field("lipschitz", &self.lipschitz)
            .field("autonomous", &self.autonomous)
            .finish_non_exhaustive()
    }
}

impl OdeProblem {
    pub fn new<F>(rhs: F, t0: f64, t_end: f64, x0: StateVec, lipschitz: f64) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(t0.is_finite() && t_end.is_finite()) || t_end <= t0 {
            return Err(Error::InvalidProblem("horizon must satisfy t0 < T"));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidProblem("Lipschitz constant must be positive"));
        }
        let problem = Self {
            name: String::from("custom"),
            rhs: Arc::new(rhs),
            t0,
            t_end,
            x0,
            lipschitz,
            autonomous: false,
            exact: None,
        };
        // Output dimension is checked on every evaluation; probe once here so
        // a mismatched rhs fails at construction.
        problem.eval(t0, &problem.x0)?;
        Ok(problem)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_exact_solution(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    /// Declares the problem autonomous. The rhs is probed at two times on a
    /// few states around `x0`; any time dependence is rejected.
    pub fn autonomous(mut self) -> Result<Self> {
        let probe_times = [self.t0, 0.5 * (self.t0 + self.t_end), self.t_end];
        let d = self.x0.dim();
        for shift in [0.0, 0.5, -1.0] {
            let x = StateVec::from_raw(self.x0.as_slice().iter().map(|c| c + shift).collect());
            let reference = self.eval(probe_times[0], &x)?;
            for &t in &probe_times[1..] {
                if self.eval(t, &x)? != reference {
                    return Err(Error::InvalidProblem("rhs declared autonomous depends on time"));
                }
            }
            debug_assert_eq!(reference.dim(), d);
        }
        self.autonomous = true;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn horizon(&self) -> f64 {
        self.t_end - self.t0
    }

    pub fn x0(&self) -> &StateVec {
        &self.x0
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn exact_solution(&self, t: f64) -> Option<Result<StateVec>> {
        self.exact.map(|x| StateVec::new(x(t)))
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact.is_some()
    }

    /// Evaluates `f(t, x)`, rejecting wrong output dimension and non-finite
    /// output.
    pub fn eval(&self, t: f64, x: &StateVec) -> Result<StateVec> {
        let out = (self.rhs)(t, x.as_slice());
        if out.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: out.len(),
            });
        }
        let out = StateVec::from_raw(out);
        if !out.is_finite() {
            return Err(Error::IntegrationBlowUp { t });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn x0() -> StateVec {
        StateVec::scalar(1.0).unwrap()
    }

    #[test]
    fn rejects_bad_horizon_and_lipschitz() {
        let f = |_t: f64, x: &[f64]| x.to_vec();
        assert!(OdeProblem::new(f, 1.0, 1.0, x0(), 1.0).is_err());
        assert!(OdeProblem::new(f, 1.0, 0.0, x0(), 1.0).is_err());
        assert!(OdeProblem::new(f, 0.0, 1.0, x0(), 0.0).is_err());
        assert!(OdeProblem::new(f, 0.0, 1.0, x0(), -2.0).is_err());
        assert!(OdeProblem::new(f, 0.0, 1.0, x0(), 1.0).is_ok());
    }

    #[test]
    fn rejects_wrong_output_dimension() {
        let f = |_t: f64, _x: &[f64]| vec![0.0, 0.0];
        assert_eq!(
            OdeProblem::new(f, 0.0, 1.0, x0(), 1.0).unwrap_err(),
            Error::DimensionMismatch { expected: 1, found: 2 }
        );
    }

    #[test]
    fn autonomous_probe_detects_time_dependence() {
        let f = |t: f64, x: &[f64]| vec![x[0] + t];
        let p = OdeProblem::new(f, 0.0, 1.0, x0(), 1.0).unwrap();
        assert!(p.autonomous().is_err());
        let g = |_t: f64, x: &[f64]| vec![-x[0]];
        let p = OdeProblem::new(g, 0.0, 1.0, x0(), 1.0).unwrap();
        assert!(p.autonomous().unwrap().is_autonomous());
    }

    #[test]
    fn eval_flags_blow_up() {
        let f = |_t: f64, x: &[f64]| vec![1.0 / (x[0] - 2.0)];
        let p = OdeProblem::new(f, 0.0, 1.0, x0(), 1.0).unwrap();
        let at_pole = StateVec::scalar(2.0).unwrap();
        assert_eq!(
            p.eval(0.25, &at_pole).unwrap_err(),
            Error::IntegrationBlowUp { t: 0.25 }
        );
    }
}
