//! Coarse (forward/backward Euler) and fine (m-substep classical RK4)
//! interval propagators.
//!
//! Every propagator is a pure function of its inputs. Any non-finite
//! intermediate aborts with [`Error::IntegrationBlowUp`].

use alloc::vec::Vec;

use crate::ode_model::{Mesh, OdeProblem, StateVec};
use crate::{Error, Result};

pub const DEFAULT_FP_TOLERANCE: f64 = 1e-14;
pub const DEFAULT_FP_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseKind {
    ForwardEuler,
    BackwardEuler,
}

/// Coarse propagator selection. The fixed-point settings only matter for
/// backward Euler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseMethod {
    kind: CoarseKind,
    fp_tolerance: f64,
    fp_max_iters: usize,
}

impl CoarseMethod {
    pub fn forward_euler() -> Self {
        Self {
            kind: CoarseKind::ForwardEuler,
            fp_tolerance: DEFAULT_FP_TOLERANCE,
            fp_max_iters: DEFAULT_FP_MAX_ITERS,
        }
    }

    pub fn backward_euler() -> Self {
        Self {
            kind: CoarseKind::BackwardEuler,
            ..Self::forward_euler()
        }
    }

    pub fn new(kind: CoarseKind) -> Self {
        match kind {
            CoarseKind::ForwardEuler => Self::forward_euler(),
            CoarseKind::BackwardEuler => Self::backward_euler(),
        }
    }

    /// Overrides the fixed-point residual tolerance and iteration cap.
    pub fn with_fixed_point(mut self, tolerance: f64, max_iters: usize) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidConfig("fixed-point tolerance must be positive"));
        }
        if max_iters == 0 {
            return Err(Error::InvalidConfig("fixed-point iteration cap must be at least 1"));
        }
        self.fp_tolerance = tolerance;
        self.fp_max_iters = max_iters;
        Ok(self)
    }

    pub fn kind(&self) -> CoarseKind {
        self.kind
    }

    pub fn fp_tolerance(&self) -> f64 {
        self.fp_tolerance
    }

    pub fn fp_max_iters(&self) -> usize {
        self.fp_max_iters
    }
}

/// Number of RK4 substeps the fine propagator takes per coarse interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinePropagatorConfig {
    substeps: usize,
}

impl FinePropagatorConfig {
    pub fn new(substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::InvalidMesh("fine propagator needs at least one substep"));
        }
        Ok(Self { substeps })
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }
}

fn finite(x: StateVec, t: f64) -> Result<StateVec> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::IntegrationBlowUp { t })
    }
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig("step width must be positive"))
    }
}

fn check_state(problem: &OdeProblem, u: &StateVec, t: f64) -> Result<()> {
    if u.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: u.dim(),
        });
    }
    if !u.is_finite() {
        return Err(Error::IntegrationBlowUp { t });
    }
    Ok(())
}

/// Explicit Euler: `u + h f(t, u)`.
pub fn euler_step(problem: &OdeProblem, t: f64, u: &StateVec, h: f64) -> Result<StateVec> {
    check_step(h)?;
    check_state(problem, u, t)?;
    let slope = problem.eval(t, u)?;
    finite(u.add_scaled(h, &slope), t + h)
}

/// Implicit Euler: solves `z = u + h f(t_next, z)` by fixed-point iteration
/// from `z = u`. Requires `h L < 1`, which makes the map a contraction.
///
/// Iterates until an iterate `z` has residual `‖z − u − h f(t_next, z)‖` at
/// most `cfg.fp_tolerance()` and returns its image `u + h f(t_next, z)`,
/// whose residual is smaller still by the contraction factor `hL`.
pub fn backward_euler_step(
    problem: &OdeProblem,
    t_next: f64,
    u: &StateVec,
    h: f64,
    cfg: &CoarseMethod,
) -> Result<StateVec> {
    check_step(h)?;
    check_state(problem, u, t_next)?;
    let hl = h * problem.lipschitz();
    if hl >= 1.0 {
        return Err(Error::ContractionViolated { hl });
    }
    let mut z = u.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.fp_max_iters {
        let image = finite(u.add_scaled(h, &problem.eval(t_next, &z)?), t_next)?;
        residual = z.distance(&image)?;
        if residual <= cfg.fp_tolerance {
            return Ok(image);
        }
        z = image;
    }
    Err(Error::FixedPointDidNotConverge {
        iterations: cfg.fp_max_iters,
        residual,
    })
}

/// Weighted RK4 slope `F₄(h, t, u; f) = (k₁ + 2k₂ + 2k₃ + k₄)/6`.
pub fn rk4_increment(problem: &OdeProblem, t: f64, u: &StateVec, h: f64) -> Result<StateVec> {
    check_step(h)?;
    check_state(problem, u, t)?;
    let half = 0.5 * h;
    let k1 = problem.eval(t, u)?;
    let k2 = problem.eval(t + half, &finite(u.add_scaled(half, &k1), t + half)?)?;
    let k3 = problem.eval(t + half, &finite(u.add_scaled(half, &k2), t + half)?)?;
    let k4 = problem.eval(t + h, &finite(u.add_scaled(h, &k3), t + h)?)?;
    let combined: Vec<f64> = (0..u.dim())
        .map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0)
        .collect();
    finite(StateVec::from_raw(combined), t + h)
}

/// One classical RK4 step: `u + h F₄(h, t, u; f)`.
pub fn rk4_step(problem: &OdeProblem, t: f64, u: &StateVec, h: f64) -> Result<StateVec> {
    let slope = rk4_increment(problem, t, u, h)?;
    finite(u.add_scaled(h, &slope), t + h)
}

fn check_interval(mesh: &Mesh, n: usize) -> Result<()> {
    if n == 0 || n > mesh.intervals() {
        return Err(Error::IntervalOutOfRange {
            index: n,
            intervals: mesh.intervals(),
        });
    }
    Ok(())
}

/// Coarse propagator `C_{I_n}` over `[t_{n−1}, t_n]`.
pub fn coarse_propagate(
    problem: &OdeProblem,
    mesh: &Mesh,
    n: usize,
    u: &StateVec,
    method: &CoarseMethod,
) -> Result<StateVec> {
    check_interval(mesh, n)?;
    match method.kind {
        CoarseKind::ForwardEuler => euler_step(problem, mesh.node(n - 1), u, mesh.h()),
        CoarseKind::BackwardEuler => backward_euler_step(problem, mesh.node(n), u, mesh.h(), method),
    }
}

/// Fine propagator `F_{I_n}`: `m` RK4 steps of width `τ` from `t_{n−1}`.
pub fn fine_propagate(problem: &OdeProblem, mesh: &Mesh, n: usize, u: &StateVec) -> Result<StateVec> {
    check_interval(mesh, n)?;
    let mut state = u.clone();
    for j in 0..mesh.fine_substeps() {
        state = rk4_step(problem, mesh.subnode(n, j), &state, mesh.tau())?;
    }
    Ok(state)
}

/// Sequential fine solution `u_0 = x0`, `u_n = F_{I_n}(u_{n−1})`.
pub fn serial_fine_solve(problem: &OdeProblem, mesh: &Mesh) -> Result<Vec<StateVec>> {
    let mut out = Vec::with_capacity(mesh.intervals() + 1);
    out.push(problem.x0().clone());
    for n in 1..=mesh.intervals() {
        let next = fine_propagate(problem, mesh, n, &out[n - 1])?;
        out.push(next);
    }
    Ok(out)
}

/// Sequential coarse solution, the analogue of [`serial_fine_solve`].
pub fn serial_coarse_solve(problem: &OdeProblem, mesh: &Mesh, method: &CoarseMethod) -> Result<Vec<StateVec>> {
    let mut out = Vec::with_capacity(mesh.intervals() + 1);
    out.push(problem.x0().clone());
    for n in 1..=mesh.intervals() {
        let next = coarse_propagate(problem, mesh, n, &out[n - 1], method)?;
        out.push(next);
    }
    Ok(out)
}
