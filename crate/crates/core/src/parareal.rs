//! The parareal iteration.
//!
//! Row `k = 0` is a sequential coarse sweep from `x0`. Each later row first
//! computes the defects `ξ_n = F(u_{n−1}^{(k−1)}) − C(u_{n−1}^{(k−1)})`,
//! which are independent across `n` and are handed to a [`SweepExecutor`],
//! then runs the sequential correction `u_n^{(k)} = C(u_{n−1}^{(k)}) + ξ_n`.
//!
//! The correction is applied for every `n ≥ 1`, including the intervals that
//! have already converged; the entries `n < k` then coincide with the
//! previous row up to round-off instead of being copied.

use alloc::vec::Vec;

use crate::integrators::{coarse_propagate, fine_propagate, serial_fine_solve, CoarseMethod};
use crate::ode_model::{grid_sup_error, Mesh, OdeProblem, StateVec};
use crate::{Error, Result};

/// Runs the independent tasks of a defect sweep.
///
/// Implementations must return `task(0), …, task(len − 1)` in index order.
/// Each task is a pure function of its index, so the output does not depend
/// on how the tasks are scheduled.
pub trait SweepExecutor: Sync {
    fn map<T, F>(&self, len: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs the sweep on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl SweepExecutor for Sequential {
    fn map<T, F>(&self, len: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(task).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PararealConfig {
    coarse: CoarseMethod,
    max_iterations: usize,
    stop_tolerance: Option<f64>,
}

impl PararealConfig {
    /// `max_iterations` must not exceed the number of intervals of the mesh
    /// the config is used with; that is checked by [`parareal_run`].
    pub fn new(coarse: CoarseMethod, max_iterations: usize) -> Self {
        Self {
            coarse,
            max_iterations,
            stop_tolerance: None,
        }
    }

    /// Stops early once successive rows differ by at most `tolerance` in the
    /// grid max norm.
    pub fn with_stop_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidConfig("stop tolerance must be positive"));
        }
        self.stop_tolerance = Some(tolerance);
        Ok(self)
    }

    pub fn coarse(&self) -> &CoarseMethod {
        &self.coarse
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn stop_tolerance(&self) -> Option<f64> {
        self.stop_tolerance
    }

    fn validate(&self, mesh: &Mesh) -> Result<()> {
        if self.max_iterations > mesh.intervals() {
            return Err(Error::InvalidConfig("K exceeds N"));
        }
        Ok(())
    }
}

/// All iterates of a parareal run together with the serial fine reference
/// and the errors `E_n^{(k)} = ‖u_n^{(k)} − u_n‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealRun {
    iterates: Vec<Vec<StateVec>>,
    reference: Vec<StateVec>,
    errors: Vec<Vec<f64>>,
    sup_errors: Vec<f64>,
}

impl PararealRun {
    /// Assembles a run from its rows and the fine reference, computing the
    /// error table.
    pub fn from_rows(iterates: Vec<Vec<StateVec>>, reference: Vec<StateVec>) -> Result<Self> {
        if iterates.is_empty() {
            return Err(Error::ShapeMismatch("a run has at least the initial row"));
        }
        let mut errors = Vec::with_capacity(iterates.len());
        let mut sup_errors = Vec::with_capacity(iterates.len());
        for row in &iterates {
            if row.len() != reference.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: reference.len(),
                });
            }
            let e = row
                .iter()
                .zip(&reference)
                .map(|(u, r)| u.distance(r))
                .collect::<Result<Vec<f64>>>()?;
            sup_errors.push(e.iter().copied().fold(0.0, f64::max));
            errors.push(e);
        }
        Ok(Self {
            iterates,
            reference,
            errors,
            sup_errors,
        })
    }

    /// Rows `u^{(0)}, …, u^{(K_actual)}`, each with `N + 1` states.
    pub fn iterates(&self) -> &[Vec<StateVec>] {
        &self.iterates
    }

    pub fn row(&self, k: usize) -> &[StateVec] {
        &self.iterates[k]
    }

    /// Serial fine solution `u_n`.
    pub fn reference(&self) -> &[StateVec] {
        &self.reference
    }

    /// `errors()[k][n] = E_n^{(k)}`.
    pub fn errors(&self) -> &[Vec<f64>] {
        &self.errors
    }

    /// `max_n E_n^{(k)}` per iteration.
    pub fn sup_errors(&self) -> &[f64] {
        &self.sup_errors
    }

    pub fn iterations_performed(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn intervals(&self) -> usize {
        self.reference.len() - 1
    }

    /// Largest state norm along the reference, used to scale round-off
    /// tolerances.
    pub fn reference_scale(&self) -> f64 {
        self.reference.iter().map(StateVec::norm).fold(0.0, f64::max)
    }
}

/// Initial row: `u_0 = x0`, `u_n = C_{I_n}(u_{n−1})`.
pub fn parareal_init(problem: &OdeProblem, mesh: &Mesh, coarse: &CoarseMethod) -> Result<Vec<StateVec>> {
    crate::integrators::serial_coarse_solve(problem, mesh, coarse)
}

/// Defects `ξ_n = F_{I_n}(row[n−1]) − C_{I_n}(row[n−1])` for `n = 1..=N`,
/// returned as `(ξ_1, …, ξ_N)`.
pub fn defect_sweep<E: SweepExecutor>(
    problem: &OdeProblem,
    mesh: &Mesh,
    row: &[StateVec],
    coarse: &CoarseMethod,
    executor: &E,
) -> Result<Vec<StateVec>> {
    if row.len() != mesh.intervals() + 1 {
        return Err(Error::LengthMismatch {
            left: row.len(),
            right: mesh.intervals() + 1,
        });
    }
    executor
        .map(mesh.intervals(), |i| {
            let n = i + 1;
            let fine = fine_propagate(problem, mesh, n, &row[n - 1])?;
            let coarse = coarse_propagate(problem, mesh, n, &row[n - 1], coarse)?;
            Ok(fine.sub(&coarse))
        })
        .into_iter()
        .collect()
}

/// One parareal iteration from the previous row.
pub fn parareal_iterate<E: SweepExecutor>(
    problem: &OdeProblem,
    mesh: &Mesh,
    prev_row: &[StateVec],
    coarse: &CoarseMethod,
    executor: &E,
) -> Result<Vec<StateVec>> {
    let defects = defect_sweep(problem, mesh, prev_row, coarse, executor)?;
    let mut row = Vec::with_capacity(prev_row.len());
    row.push(prev_row[0].clone());
    for (i, xi) in defects.iter().enumerate() {
        let n = i + 1;
        let predicted = coarse_propagate(problem, mesh, n, &row[n - 1], coarse)?;
        let corrected = predicted.add(xi);
        if !corrected.is_finite() {
            return Err(Error::IntegrationBlowUp { t: mesh.node(n) });
        }
        row.push(corrected);
    }
    Ok(row)
}

/// Initialization followed by up to `K` iterations, with the fine reference
/// and error table.
pub fn parareal_run<E: SweepExecutor>(
    problem: &OdeProblem,
    mesh: &Mesh,
    cfg: &PararealConfig,
    executor: &E,
) -> Result<PararealRun> {
    cfg.validate(mesh)?;
    let reference = serial_fine_solve(problem, mesh)?;
    let mut rows = Vec::with_capacity(cfg.max_iterations + 1);
    rows.push(parareal_init(problem, mesh, &cfg.coarse)?);
    for _ in 1..=cfg.max_iterations {
        let prev = rows.last().expect("initial row present");
        let next = parareal_iterate(problem, mesh, prev, &cfg.coarse, executor)?;
        let change = grid_sup_error(&next, prev)?;
        rows.push(next);
        if cfg.stop_tolerance.is_some_and(|tol| change <= tol) {
            break;
        }
    }
    PararealRun::from_rows(rows, reference)
}
