//! Empirical checks of the convergence hypotheses: defect size and order,
//! Lipschitz-type ratios of the propagators, the leading defect coefficient
//! `Φ₁`, and log-log order fits for integrators and parareal iterates.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{exceeds, rk4_lipschitz_m, substep_condition3_constant, SubstepConstants};
use crate::integrators::{
    coarse_propagate, fine_propagate, rk4_increment, rk4_step, serial_coarse_solve, serial_fine_solve, CoarseKind,
    CoarseMethod,
};
use crate::ode_model::{Mesh, OdeProblem, StateVec};
use crate::parareal::{parareal_init, parareal_run, PararealConfig, PararealRun, SweepExecutor};
use crate::{Error, Result};

/// Seed used by the sampled condition checks unless overridden.
pub const DEFAULT_SEED: u64 = 42;

/// Step sizes `2⁻³, …, 2⁻⁸`.
pub fn dyadic_steps(first_exp: i32, last_exp: i32) -> Vec<f64> {
    (first_exp..=last_exp).map(|e| libm::pow(2.0, -(e as f64))).collect()
}

/// Least-squares fit of `log(error) = slope · log(h) + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub h_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Step sizes whose error was exactly zero and was left out of the fit.
    pub excluded: Vec<f64>,
}

pub fn fit_order(h_values: &[f64], errors: &[f64]) -> Result<OrderFit> {
    if h_values.len() != errors.len() {
        return Err(Error::LengthMismatch {
            left: h_values.len(),
            right: errors.len(),
        });
    }
    if h_values.iter().any(|h| !(h.is_finite() && *h > 0.0)) || h_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::UnorderedSteps);
    }
    if errors.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::NonFiniteState);
    }
    let mut excluded = Vec::new();
    let mut xs = Vec::with_capacity(h_values.len());
    let mut ys = Vec::with_capacity(h_values.len());
    for (&h, &e) in h_values.iter().zip(errors) {
        if e == 0.0 {
            excluded.push(h);
        } else {
            xs.push(libm::log(h));
            ys.push(libm::log(e));
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientPoints { usable: xs.len() });
    }
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(OrderFit {
        h_values: h_values.to_vec(),
        errors: errors.to_vec(),
        slope,
        intercept,
        r_squared,
        excluded,
    })
}

/// `F_{I_n}(u) − C_{I_n}(u)` on interval `n`.
pub fn interval_defect(
    problem: &OdeProblem,
    mesh: &Mesh,
    n: usize,
    u: &StateVec,
    coarse: &CoarseMethod,
) -> Result<f64> {
    let fine = fine_propagate(problem, mesh, n, u)?;
    let coarse = coarse_propagate(problem, mesh, n, u, coarse)?;
    fine.distance(&coarse)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectMeasurement {
    /// `‖F_{I_n}(u_{n−1}^{(0)}) − C_{I_n}(u_{n−1}^{(0)})‖` for `n = 1..=N`.
    pub defects: Vec<f64>,
    pub h: f64,
    pub alpha: f64,
    /// `max_n defect / h^{1+α}`.
    pub c2: f64,
}

impl DefectMeasurement {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

/// Defect sizes along the initial coarse sweep.
pub fn measure_defect(
    problem: &OdeProblem,
    mesh: &Mesh,
    coarse: &CoarseMethod,
    alpha: f64,
) -> Result<DefectMeasurement> {
    let row = parareal_init(problem, mesh, coarse)?;
    let defects = (1..=mesh.intervals())
        .map(|n| interval_defect(problem, mesh, n, &row[n - 1], coarse))
        .collect::<Result<Vec<f64>>>()?;
    let max = defects.iter().copied().fold(0.0, f64::max);
    Ok(DefectMeasurement {
        c2: max / libm::pow(mesh.h(), 1.0 + alpha),
        defects,
        h: mesh.h(),
        alpha,
    })
}

/// `c₂` calibrated over every state a run feeds into the propagators: all
/// iterate rows and the fine reference. The error recursions need the
/// defect bound at both the iterates and the reference states.
pub fn calibrate_c2(
    problem: &OdeProblem,
    mesh: &Mesh,
    coarse: &CoarseMethod,
    run: &PararealRun,
    alpha: f64,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for row in run
        .iterates()
        .iter()
        .map(Vec::as_slice)
        .chain(core::iter::once(run.reference()))
    {
        for n in 1..=mesh.intervals() {
            worst = worst.max(interval_defect(problem, mesh, n, &row[n - 1], coarse)?);
        }
    }
    Ok(worst / libm::pow(mesh.h(), 1.0 + alpha))
}

fn check_contraction(problem: &OdeProblem, h: f64) -> Result<()> {
    let hl = h * problem.lipschitz();
    if hl >= 1.0 {
        return Err(Error::ContractionViolated { hl });
    }
    Ok(())
}

/// Max coarse-sweep defect for each `h` and the fitted order (2 expected).
pub fn defect_order_study(
    problem: &OdeProblem,
    coarse: &CoarseMethod,
    h_grid: &[f64],
    substeps: usize,
) -> Result<OrderFit> {
    if h_grid.len() < 4 {
        return Err(Error::InsufficientPoints { usable: h_grid.len() });
    }
    let mut errors = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        check_contraction(problem, h)?;
        let mesh = Mesh::with_step(problem, h, substeps)?;
        errors.push(measure_defect(problem, &mesh, coarse, 1.0)?.max_defect());
    }
    fit_order(h_grid, &errors)
}

/// `Φ₁(t, u) = ½ (∂f/∂x · f + ∂f/∂t)(t, u)` by central differences with
/// step `δ = 10⁻⁶ (1 + ‖u‖)`.
pub fn phi1_reference(problem: &OdeProblem, t: f64, u: &StateVec) -> Result<StateVec> {
    let delta = 1e-6 * (1.0 + u.norm());
    let f = problem.eval(t, u)?;
    // Directional derivative of f along f.
    let ahead = problem.eval(t, &u.add_scaled(delta, &f))?;
    let behind = problem.eval(t, &u.add_scaled(-delta, &f))?;
    let later = problem.eval(t + delta, u)?;
    let earlier = problem.eval(t - delta, u)?;
    let phi: Vec<f64> = (0..u.dim())
        .map(|i| 0.5 * ((ahead[i] - behind[i]) + (later[i] - earlier[i])) / (2.0 * delta))
        .collect();
    StateVec::new(phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phi1Report {
    pub t: f64,
    pub u: StateVec,
    pub phi1: StateVec,
    pub h_values: Vec<f64>,
    /// `(F₄(h, t, u) − f(t, u))/h` for each step.
    pub quotients: Vec<StateVec>,
    /// `‖quotient − Φ₁‖` for each step.
    pub deviations: Vec<f64>,
    /// Absent when every deviation is zero.
    pub fit: Option<OrderFit>,
}

/// Checks that `(F₄(h) − f)/h → Φ₁` with first-order deviation.
pub fn phi1_convergence_check(problem: &OdeProblem, t: f64, u: &StateVec, h_grid: &[f64]) -> Result<Phi1Report> {
    let phi1 = phi1_reference(problem, t, u)?;
    let f = problem.eval(t, u)?;
    let mut quotients = Vec::with_capacity(h_grid.len());
    let mut deviations = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let inc = rk4_increment(problem, t, u, h)?;
        let q = inc.sub(&f);
        let q = StateVec::new(q.as_slice().iter().map(|c| c / h).collect())?;
        deviations.push(q.distance(&phi1)?);
        quotients.push(q);
    }
    let fit = if deviations.iter().all(|d| *d == 0.0) {
        None
    } else {
        Some(fit_order(h_grid, &deviations)?)
    };
    Ok(Phi1Report {
        t,
        u: u.clone(),
        phi1,
        h_values: h_grid.to_vec(),
        quotients,
        deviations,
        fit,
    })
}

/// Observed ratios for one Lipschitz-type condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub max: f64,
    pub min: f64,
    /// Asserted bound, if the condition is asserted for this setup.
    pub bound: Option<f64>,
    pub violations: usize,
    /// Pair attaining the maximum ratio.
    pub worst_pair: Option<(StateVec, StateVec)>,
}

impl RatioStats {
    fn new(bound: Option<f64>) -> Self {
        Self {
            max: f64::NEG_INFINITY,
            min: f64::INFINITY,
            bound,
            violations: 0,
            worst_pair: None,
        }
    }

    fn record(&mut self, ratio: f64, a: &StateVec, b: &StateVec) {
        if ratio > self.max {
            self.max = ratio;
            self.worst_pair = Some((a.clone(), b.clone()));
        }
        self.min = self.min.min(ratio);
        if let Some(bound) = self.bound {
            if exceeds(ratio, bound * (1.0 + LIPSCHITZ_RTOL)) {
                self.violations += 1;
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Multiplicative slack on the sampled Lipschitz ratios.
pub const LIPSCHITZ_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub seed: u64,
    pub samples: usize,
    /// `‖C(u₁) − C(u₂)‖ / ‖u₁ − u₂‖` against `b`.
    pub condition1: RatioStats,
    /// `‖(F − C)(u₁) − (F − C)(u₂)‖ / (h ‖u₁ − u₂‖)` against `c₃`.
    pub condition3: RatioStats,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.condition1.passed() && self.condition3.passed()
    }
}

/// Condition-1 bound: `1 + hL` for forward Euler; `1 + 2hL` for backward
/// Euler when `h ≤ 1/(2L)`, `1/(1 − hL)` otherwise.
pub fn condition1_bound(problem: &OdeProblem, mesh: &Mesh, coarse: &CoarseMethod) -> f64 {
    let hl = mesh.h() * problem.lipschitz();
    match coarse.kind() {
        CoarseKind::ForwardEuler => 1.0 + hl,
        CoarseKind::BackwardEuler if hl <= 0.5 => 1.0 + 2.0 * hl,
        CoarseKind::BackwardEuler => 1.0 / (1.0 - hl),
    }
}

/// Condition-3 constant when it is asserted: `L + M` for a single RK4 step,
/// `c̃₃ = c₆ + L` for several substeps of an autonomous system. `None` for
/// backward Euler (condition dropped) and for substeps of a nonautonomous
/// system (no constant available).
pub fn condition3_bound(problem: &OdeProblem, mesh: &Mesh, coarse: &CoarseMethod) -> Option<f64> {
    let l = problem.lipschitz();
    match (coarse.kind(), mesh.fine_substeps()) {
        (CoarseKind::BackwardEuler, _) => None,
        (CoarseKind::ForwardEuler, 1) => Some(l + rk4_lipschitz_m(l, mesh.h())),
        (CoarseKind::ForwardEuler, m) if problem.is_autonomous() => Some(substep_condition3_constant(l, mesh.h(), m)),
        _ => None,
    }
}

/// Samples `sample_count` pairs from the max-norm tube of radius 1 around
/// the initial coarse sweep and records the ratios of conditions 1 and 3.
pub fn lipschitz_condition_check(
    problem: &OdeProblem,
    mesh: &Mesh,
    coarse: &CoarseMethod,
    sample_count: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    let row = parareal_init(problem, mesh, coarse)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cond1 = RatioStats::new(Some(condition1_bound(problem, mesh, coarse)));
    let mut cond3 = RatioStats::new(condition3_bound(problem, mesh, coarse));
    let h = mesh.h();
    let mut drawn = 0;
    while drawn < sample_count {
        let n = rng.gen_range(1..=mesh.intervals());
        let centre = &row[n - 1];
        let mut perturb = || {
            StateVec::new(
                centre
                    .as_slice()
                    .iter()
                    .map(|c| c + rng.gen_range(-1.0..=1.0))
                    .collect(),
            )
        };
        let u1 = perturb()?;
        let u2 = perturb()?;
        let gap = u1.distance(&u2)?;
        if gap == 0.0 {
            continue;
        }
        drawn += 1;
        let c1 = coarse_propagate(problem, mesh, n, &u1, coarse)?;
        let c2 = coarse_propagate(problem, mesh, n, &u2, coarse)?;
        cond1.record(c1.distance(&c2)? / gap, &u1, &u2);
        let d1 = fine_propagate(problem, mesh, n, &u1)?.sub(&c1);
        let d2 = fine_propagate(problem, mesh, n, &u2)?.sub(&c2);
        cond3.record(d1.distance(&d2)? / (h * gap), &u1, &u2);
    }
    Ok(LipschitzReport {
        seed,
        samples: sample_count,
        condition1: cond1,
        condition3: cond3,
    })
}

/// Serial integrators whose global error order can be measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SerialIntegrator {
    Rk4,
    Coarse(CoarseMethod),
}

/// Grid max-norm error of a serial integration with step `h` against the
/// exact solution, for each `h`, and the fitted order.
pub fn global_error_study(problem: &OdeProblem, integrator: SerialIntegrator, h_grid: &[f64]) -> Result<OrderFit> {
    if !problem.has_exact_solution() {
        return Err(Error::NoExactSolution(problem.name().to_string()));
    }
    let mut errors = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let mesh = Mesh::with_step(problem, h, 1)?;
        let path = match integrator {
            SerialIntegrator::Rk4 => serial_fine_solve(problem, &mesh)?,
            SerialIntegrator::Coarse(c) => serial_coarse_solve(problem, &mesh, &c)?,
        };
        let mut worst = 0.0_f64;
        for (n, u) in path.iter().enumerate() {
            let exact = problem.exact_solution(mesh.node(n)).expect("checked above")?;
            worst = worst.max(u.distance(&exact)?);
        }
        errors.push(worst);
    }
    fit_order(h_grid, &errors)
}

/// Parareal sup error after exactly `k` iterations for each coarse step `h`,
/// and its fitted order in `h`.
pub fn refinement_study<E: SweepExecutor>(
    problem: &OdeProblem,
    coarse: &CoarseMethod,
    h_grid: &[f64],
    substeps: usize,
    k: usize,
    executor: &E,
) -> Result<OrderFit> {
    let mut errors = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let mesh = Mesh::with_step(problem, h, substeps)?;
        let run = parareal_run(problem, &mesh, &PararealConfig::new(*coarse, k), executor)?;
        errors.push(run.sup_errors()[k]);
    }
    fit_order(h_grid, &errors)
}

/// Reference RK4 refinement used to stand in for the exact local flow when
/// calibrating `c₄`.
const LOCAL_FLOW_REFINEMENT: usize = 64;

/// Calibrates the substep constants along the fine trajectory:
///
/// * `Λ`: max of `‖F₄(τ, t, û) − f(t, û)‖/τ` over all substep states,
/// * `c₄`: max deviation of the substeps from the local flow, over `τ⁴`,
/// * `c₅`: max of `‖f(u)‖ e^{Lh}` over interval start states,
/// * `c₆ = (e^{hM} − 1)/h`.
pub fn calibrate_substep_constants(problem: &OdeProblem, mesh: &Mesh) -> Result<SubstepConstants> {
    let l = problem.lipschitz();
    let (h, tau, m) = (mesh.h(), mesh.tau(), mesh.fine_substeps());
    let reference = serial_fine_solve(problem, mesh)?;
    let mut lambda = 0.0_f64;
    let mut c4 = 0.0_f64;
    let mut c5 = 0.0_f64;
    let fine_tau = tau / LOCAL_FLOW_REFINEMENT as f64;
    for n in 1..=mesh.intervals() {
        let start = &reference[n - 1];
        c5 = c5.max(problem.eval(mesh.node(n - 1), start)?.norm() * libm::exp(l * h));
        let mut coarse_path = start.clone();
        let mut flow = start.clone();
        for j in 0..m {
            let t = mesh.subnode(n, j);
            let f = problem.eval(t, &coarse_path)?;
            let inc = rk4_increment(problem, t, &coarse_path, tau)?;
            lambda = lambda.max(inc.distance(&f)? / tau);
            coarse_path = rk4_step(problem, t, &coarse_path, tau)?;
            for i in 0..LOCAL_FLOW_REFINEMENT {
                flow = rk4_step(problem, t + i as f64 * fine_tau, &flow, fine_tau)?;
            }
            c4 = c4.max(coarse_path.distance(&flow)? / libm::pow(tau, 4.0));
        }
    }
    Ok(SubstepConstants {
        lambda,
        c4,
        c5,
        c6: libm::expm1(h * rk4_lipschitz_m(l, tau)) / h,
    })
}
