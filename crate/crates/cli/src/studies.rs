//! Study drivers. Each adds tables and checks to an [`ExperimentReport`].

use parareal_core::analysis::{
    calibrate_c2, calibrate_substep_constants, defect_order_study, dyadic_steps, global_error_study,
    lipschitz_condition_check, phi1_convergence_check, refinement_study, OrderFit, RatioStats, SerialIntegrator,
};
use parareal_core::bounds::{
    backward_euler_constants, forward_euler_constants, recurrence_violations, second_recurrence_violations,
    theorem2_bound, verify_dominance, verify_theorem2, z_triangle, BoundConstants, WorstMargin,
};
use parareal_core::integrators::{CoarseKind, CoarseMethod};
use parareal_core::ode_model::{builtin_problem, Mesh, OdeProblem};
use parareal_core::parareal::{parareal_run, PararealConfig, PararealRun};
use parareal_core::Error as CoreError;

use crate::report::{format_float, Check, ExperimentReport};
use crate::{CliError, ExperimentConfig, Study, ThreadPoolExecutor};

/// Relative tolerance for the exactness ladder and finalization.
pub const LADDER_RTOL: f64 = 1e-12;
/// Slack on the recurrence checks, scaled by `1 + ‖u_n‖`.
pub const RECURRENCE_SLACK: f64 = 1e-10;
/// Pairs sampled by the condition study.
pub const CONDITION_SAMPLES: usize = 1000;
/// Iteration index of the refinement study.
pub const REFINEMENT_K: usize = 2;

/// Accepted slope ranges.
pub const DEFECT_ORDER_RANGE: (f64, f64) = (1.9, 2.1);
pub const RK4_ORDER_RANGE: (f64, f64) = (3.8, 4.2);
pub const EULER_ORDER_RANGE: (f64, f64) = (0.9, 1.1);
pub const MIN_PHI1_ORDER: f64 = 0.9;
pub const MIN_REFINEMENT_ORDER: f64 = 0.9;
pub const PHI1_LIMIT_TOL: f64 = 1e-3;

/// Step sizes `h = 2⁻³ … 2⁻⁸` used by every order study.
pub fn step_grid() -> Vec<f64> {
    dyadic_steps(3, 8)
}

const ORDER_FITS: &str = "order_fits";
const ORDER_FITS_HEADER: [&str; 5] = ["study", "h", "error", "slope", "r_squared"];

/// Runs the configured study, writes its tables and manifest to
/// `cfg.output_dir`, and returns the report. Module errors surface as
/// `Err`; failed checks are recorded in the report (see
/// [`ExperimentReport::exit_code`]).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let report = build_report(cfg)?;
    report.write(&cfg.output_dir)?;
    Ok(report)
}

/// Same as [`run_experiment`] without writing files.
pub fn build_report(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let problem = builtin_problem(&cfg.problem)?;
    let mesh = Mesh::for_problem(&problem, cfg.intervals, cfg.m)?;
    let executor = ThreadPoolExecutor::new(cfg.workers)?;
    let ctx = Ctx {
        cfg,
        problem: &problem,
        mesh: &mesh,
        coarse: cfg.coarse.method(),
        executor: &executor,
    };
    let mut report = ExperimentReport::new(cfg.clone());
    let studies: &[Study] = match cfg.study {
        Study::All => &[
            Study::Run,
            Study::Bounds,
            Study::DefectOrder,
            Study::IntegratorOrder,
            Study::Conditions,
            Study::Phi1,
        ],
        ref one => std::slice::from_ref(one),
    };
    for study in studies {
        match study {
            Study::Run => ctx.run(&mut report)?,
            Study::Bounds => ctx.bounds(&mut report)?,
            Study::DefectOrder => ctx.defect_order(&mut report)?,
            Study::IntegratorOrder => ctx.integrator_order(&mut report)?,
            Study::Conditions => ctx.conditions(&mut report)?,
            Study::Phi1 => ctx.phi1(&mut report)?,
            Study::All => unreachable!("expanded above"),
        }
    }
    Ok(report)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    problem: &'a OdeProblem,
    mesh: &'a Mesh,
    coarse: CoarseMethod,
    executor: &'a ThreadPoolExecutor,
}

fn f(x: f64) -> String {
    format_float(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

fn describe_worst(worst: Option<&WorstMargin>) -> String {
    match worst {
        Some(w) => {
            let at = match w.n {
                Some(n) => format!("k={}, n={n}", w.k),
                None => format!("k={}", w.k),
            };
            format!(
                "worst ratio {:.6e} ({:?} at {at}: {:.6e} vs {:.6e})",
                w.ratio, w.check, w.value, w.bound
            )
        }
        None => "no entries".into(),
    }
}

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

/// Fits with fewer than three nonzero errors are not applicable rather than
/// failures (e.g. every error is exactly zero on `zero-rhs`).
fn fit_or_skip(fit: Result<OrderFit, CoreError>) -> Result<Option<OrderFit>, CliError> {
    match fit {
        Ok(fit) => Ok(Some(fit)),
        Err(CoreError::InsufficientPoints { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn push_fit(report: &mut ExperimentReport, study: &str, h_values: &[f64], errors: &[f64], fit: Option<&OrderFit>) {
    let table = report.table_mut(ORDER_FITS, &ORDER_FITS_HEADER);
    for (&h, &e) in h_values.iter().zip(errors) {
        table.push(vec![
            study.to_string(),
            f(h),
            f(e),
            opt(fit.map(|x| x.slope)),
            opt(fit.map(|x| x.r_squared)),
        ]);
    }
}

fn slope_check(name: &str, fit: Option<&OrderFit>, accept: impl Fn(f64) -> bool, expect: &str) -> Check {
    match fit {
        Some(fit) => Check::new(
            name,
            accept(fit.slope),
            format!("slope {:.4} (expected {expect}), r^2 {:.6}", fit.slope, fit.r_squared),
        ),
        None => Check::skip(name, "errors are exactly zero; no order to fit"),
    }
}

fn coarse_label(c: &CoarseMethod) -> &'static str {
    match c.kind() {
        CoarseKind::ForwardEuler => "forward-euler",
        CoarseKind::BackwardEuler => "backward-euler",
    }
}

impl Ctx<'_> {
    fn parareal(&self) -> Result<PararealRun, CliError> {
        let cfg = PararealConfig::new(self.coarse, self.cfg.iterations);
        Ok(parareal_run(self.problem, self.mesh, &cfg, self.executor)?)
    }

    /// Error table, ladder (`E_n^{(k)}` at round-off for `n ≤ k`) and, when
    /// `K = N`, agreement of the last iterate with the fine solution.
    fn run(&self, report: &mut ExperimentReport) -> Result<(), CliError> {
        let run = self.parareal()?;
        let errors = report.table_mut("errors", &["k", "n", "t_n", "error"]);
        for (k, row) in run.errors().iter().enumerate() {
            for (n, e) in row.iter().enumerate() {
                errors.push(vec![k.to_string(), n.to_string(), f(self.mesh.node(n)), f(*e)]);
            }
        }
        let sup = report.table_mut("sup_errors", &["k", "sup_error"]);
        for (k, e) in run.sup_errors().iter().enumerate() {
            sup.push(vec![k.to_string(), f(*e)]);
        }

        let relative = |k: usize, n: usize| {
            let e = run.errors()[k][n];
            let scale = run.reference()[n].norm();
            if e == 0.0 {
                0.0
            } else {
                e / scale
            }
        };
        let mut worst = (0.0_f64, 0, 0);
        for k in 0..=run.iterations_performed() {
            for n in 0..=k.min(run.intervals()) {
                let r = relative(k, n);
                if r.is_nan() || r > worst.0 {
                    worst = (r, k, n);
                }
            }
        }
        report.add_check(Check::new(
            "exactness-ladder",
            worst.0 <= LADDER_RTOL,
            format!(
                "max relative error for n <= k is {:.3e} at k={}, n={} (tolerance {LADDER_RTOL:e})",
                worst.0, worst.1, worst.2
            ),
        ));
        if run.iterations_performed() == run.intervals() {
            let k = run.intervals();
            let worst = (0..=k).map(|n| relative(k, n)).fold(0.0_f64, f64::max);
            report.add_check(Check::new(
                "finalization",
                worst <= LADDER_RTOL,
                format!("iterate K=N matches the fine solution to {worst:.3e} relative"),
            ));
        }
        Ok(())
    }

    fn bounds(&self, report: &mut ExperimentReport) -> Result<(), CliError> {
        let run = self.parareal()?;
        let l = self.problem.lipschitz();
        let (h, horizon) = (self.mesh.h(), self.problem.horizon());
        let c2 = calibrate_c2(self.problem, self.mesh, &self.coarse, &run, 1.0)?;
        let constants = match self.coarse.kind() {
            CoarseKind::ForwardEuler => forward_euler_constants(l, h, horizon, c2)?,
            CoarseKind::BackwardEuler => backward_euler_constants(l, h, horizon, c2)?,
        };
        self.constants_table(report, &constants);
        let second = verify_theorem2(&run, &constants);
        let t2 = theorem2_bound(&constants);

        let header = [
            "k",
            "sup_error",
            "z_sup",
            "closed_form_sup",
            "theorem1_bound",
            "theorem2_bound_if_applicable",
        ];
        if let Some(maj) = constants.majorant() {
            let dominance = verify_dominance(&run, &constants)?;
            let table = report.table_mut("bounds", &header);
            for it in &dominance.iterations {
                table.push(vec![
                    it.k.to_string(),
                    f(it.sup_error),
                    f(it.majorant_sup),
                    f(it.closed_form_sup),
                    f(it.uniform_bound),
                    f(t2),
                ]);
            }
            let z = z_triangle(&maj, run.intervals(), run.iterations_performed());
            let table = report.table_mut("z_triangle", &["k", "n", "z"]);
            for (k, row) in z.iter().enumerate() {
                for (n, v) in row.iter().enumerate() {
                    table.push(vec![k.to_string(), n.to_string(), f(*v)]);
                }
            }
            let table = report.table_mut(
                "dominance",
                &["k", "n", "error", "majorant", "closed_form", "error_over_majorant"],
            );
            for e in &dominance.entries {
                let ratio = if e.error == 0.0 { 0.0 } else { e.error / e.majorant };
                table.push(vec![
                    e.k.to_string(),
                    e.n.to_string(),
                    f(e.error),
                    f(e.majorant),
                    f(e.closed_form),
                    f(ratio),
                ]);
            }
            report.add_check(Check::new(
                "dominance",
                dominance.passed(),
                format!(
                    "{} violations; {}",
                    dominance.violations,
                    describe_worst(dominance.worst.as_ref())
                ),
            ));
            let rec = recurrence_violations(&run, &maj, RECURRENCE_SLACK);
            report.add_check(Check::new(
                "error-recurrence",
                rec.is_empty(),
                match rec.first() {
                    None => "E_n^(k) <= a E_{n-1}^(k-1) + b E_{n-1}^(k) + gamma a^k holds everywhere".into(),
                    Some(v) => format!(
                        "{} violations; first at k={}, n={}: {:e} > {:e}",
                        rec.len(),
                        v.k,
                        v.n,
                        v.lhs,
                        v.rhs
                    ),
                },
            ));
        } else {
            let table = report.table_mut("bounds", &header);
            for (k, e) in run.sup_errors().iter().enumerate() {
                table.push(vec![
                    k.to_string(),
                    f(*e),
                    String::new(),
                    String::new(),
                    String::new(),
                    f(t2),
                ]);
            }
        }

        report.add_check(Check::new(
            "second-bound",
            second.passed(),
            format!(
                "bound {:.6e}; {} violations; {}",
                second.bound,
                second.violations,
                describe_worst(second.worst.as_ref())
            ),
        ));
        let rec = second_recurrence_violations(&run, constants.b(), constants.gamma(), RECURRENCE_SLACK);
        report.add_check(Check::new(
            "second-recurrence",
            rec.is_empty(),
            match rec.first() {
                None => "E_n^(k) <= b E_{n-1}^(k) + 2 gamma holds for k >= 1".into(),
                Some(v) => format!(
                    "{} violations; first at k={}, n={}: {:e} > {:e}",
                    rec.len(),
                    v.k,
                    v.n,
                    v.lhs,
                    v.rhs
                ),
            },
        ));
        Ok(())
    }

    fn constants_table(&self, report: &mut ExperimentReport, c: &BoundConstants) {
        let rows: [(&str, Option<f64>); 10] = [
            ("alpha", Some(c.alpha())),
            ("c1", Some(c.c1())),
            ("c2", Some(c.c2())),
            ("c3", c.c3()),
            ("h", Some(c.h())),
            ("horizon", Some(c.horizon())),
            ("b", Some(c.b())),
            ("a", c.a()),
            ("gamma", Some(c.gamma())),
            ("M", Some(c.m_rk4())),
        ];
        let table = report.table_mut("constants", &["name", "value"]);
        for (name, value) in rows {
            table.push(vec![name.to_string(), opt(value)]);
        }
    }

    fn defect_order(&self, report: &mut ExperimentReport) -> Result<(), CliError> {
        let grid = step_grid();
        let fit = fit_or_skip(defect_order_study(self.problem, &self.coarse, &grid, self.cfg.m))?;
        let label = format!("defect:{}:m={}", coarse_label(&self.coarse), self.cfg.m);
        let errors = match &fit {
            Some(fit) => fit.errors.clone(),
            None => vec![0.0; grid.len()],
        };
        push_fit(report, &label, &grid, &errors, fit.as_ref());
        report.add_check(slope_check(
            &format!("defect-order {label}"),
            fit.as_ref(),
            |s| in_range(s, DEFECT_ORDER_RANGE),
            "in [1.9, 2.1]",
        ));
        Ok(())
    }

    fn integrator_order(&self, report: &mut ExperimentReport) -> Result<(), CliError> {
        let grid = step_grid();
        let studies = [
            ("global:rk4", SerialIntegrator::Rk4, RK4_ORDER_RANGE, "in [3.8, 4.2]"),
            (
                if self.coarse.kind() == CoarseKind::ForwardEuler {
                    "global:forward-euler"
                } else {
                    "global:backward-euler"
                },
                SerialIntegrator::Coarse(self.coarse),
                EULER_ORDER_RANGE,
                "in [0.9, 1.1]",
            ),
        ];
        for (label, integrator, range, expect) in studies {
            let fit = fit_or_skip(global_error_study(self.problem, integrator, &grid))?;
            let errors = fit.as_ref().map(|x| x.errors.clone()).unwrap_or(vec![0.0; grid.len()]);
            push_fit(report, label, &grid, &errors, fit.as_ref());
            report.add_check(slope_check(label, fit.as_ref(), |s| in_range(s, range), expect));
        }

        let label = format!("refinement:k={REFINEMENT_K}:{}", coarse_label(&self.coarse));
        let fit = fit_or_skip(refinement_study(
            self.problem,
            &self.coarse,
            &grid,
            self.cfg.m,
            REFINEMENT_K,
            self.executor,
        ))?;
        let errors = fit.as_ref().map(|x| x.errors.clone()).unwrap_or(vec![0.0; grid.len()]);
        push_fit(report, &label, &grid, &errors, fit.as_ref());
        report.add_check(slope_check(
            &label,
            fit.as_ref(),
            |s| s >= MIN_REFINEMENT_ORDER,
            ">= 0.9",
        ));
        Ok(())
    }

    fn conditions(&self, report: &mut ExperimentReport) -> Result<(), CliError> {
        let lip = lipschitz_condition_check(self.problem, self.mesh, &self.coarse, CONDITION_SAMPLES, self.cfg.seed)?;
        let table = report.table_mut(
            "conditions",
            &[
                "condition",
                "samples",
                "seed",
                "min_ratio",
                "max_ratio",
                "bound",
                "violations",
            ],
        );
        for (name, stats) in [("condition1", &lip.condition1), ("condition3", &lip.condition3)] {
            table.push(vec![
                name.to_string(),
                lip.samples.to_string(),
                lip.seed.to_string(),
                f(stats.min),
                f(stats.max),
                opt(stats.bound),
                stats.violations.to_string(),
            ]);
        }
        let check = |name: &str, stats: &RatioStats| match stats.bound {
            Some(bound) => Check::new(
                name,
                stats.passed(),
                format!(
                    "max ratio {:.6e} vs bound {bound:.6e} over {} pairs (seed {}); {} violations",
                    stats.max, lip.samples, lip.seed, stats.violations
                ),
            ),
            None => Check::skip(
                name,
                format!("no constant asserted; max ratio {:.6e} reported", stats.max),
            ),
        };
        report.add_check(check("condition1", &lip.condition1));
        report.add_check(check("condition3", &lip.condition3));

        if self.cfg.m > 1 {
            let l = self.problem.lipschitz();
            let sc = calibrate_substep_constants(self.problem, self.mesh)?;
            let table = report.table_mut("substep_constants", &["name", "value"]);
            for (name, value) in [
                ("lambda", sc.lambda),
                ("c4", sc.c4),
                ("c5", sc.c5),
                ("c6", sc.c6),
                ("lambda_tilde", sc.lambda_tilde(l, self.mesh.h(), self.cfg.m)),
                ("c_tilde3", sc.c_tilde3(l)),
            ] {
                table.push(vec![name.to_string(), f(value)]);
            }
        }
        Ok(())
    }

    fn phi1(&self, report: &mut ExperimentReport) -> Result<(), CliError> {
        let grid = step_grid();
        let (t, u) = (self.problem.t0(), self.problem.x0());
        let r = phi1_convergence_check(self.problem, t, u, &grid)?;
        let table = report.table_mut("phi1", &["h", "component", "quotient", "phi1", "deviation"]);
        for (i, &h) in r.h_values.iter().enumerate() {
            for c in 0..u.dim() {
                table.push(vec![
                    f(h),
                    c.to_string(),
                    f(r.quotients[i][c]),
                    f(r.phi1[c]),
                    f(r.deviations[i]),
                ]);
            }
        }
        report.add_check(slope_check(
            "phi1-order",
            r.fit.as_ref(),
            |s| s >= MIN_PHI1_ORDER,
            ">= 0.9",
        ));
        let last = *r.deviations.last().expect("non-empty grid");
        report.add_check(Check::new(
            "phi1-limit",
            last <= PHI1_LIMIT_TOL,
            format!(
                "deviation {last:.3e} from phi1 = {:?} at h = {:e}",
                r.phi1.as_slice(),
                grid[grid.len() - 1]
            ),
        ));
        Ok(())
    }
}
