//! Constants, majorant recursions and a-priori error bounds for parareal
//! with Euler coarse and RK4 fine propagators.
//!
//! With `b = 1 + h c₁`, `a = h c₃` and `γ = h^{1+α} c₂` the errors obey
//! `E_n^{(0)} ≤ b E_{n−1}^{(0)} + γ` and
//! `E_n^{(k)} ≤ b E_{n−1}^{(k)} + a E_{n−1}^{(k−1)}`, so they are dominated by
//! the majorant `z_n^{(k)}` solving the same recursion with equality. Its
//! generating function is `ρ_k(ζ) = γ a^k ζ^{k+1} / ((1 − ζ)(1 − bζ)^{k+1})`.
//! Replacing `1/(1 − ζ)` by `1/(1 − bζ)` gives the closed-form upper bound
//! `γ a^k b^{n−k−1} C(n, k+1)`, which is exact only when `b = 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::parareal::PararealRun;
use crate::{Error, Result};

/// Multiplicative slack used by the dominance checks.
pub const DOMINANCE_RTOL: f64 = 1e-9;

/// Lipschitz constant of the RK4 increment `F₄(h, t, ·; f)` when `f` is
/// `L`-Lipschitz: `L (1 + hL/2 + (hL)²/6 + (hL)³/24)`.
pub fn rk4_lipschitz_m(l: f64, h: f64) -> f64 {
    let hl = h * l;
    l * (1.0 + 0.5 * hl + hl * hl / 6.0 + hl * hl * hl / 24.0)
}

/// Condition-3 constant for `m` RK4 substeps of an autonomous system:
/// `c̃₃ = c₆ + L` with `c₆ = (e^{hM} − 1)/h`, `M` the increment Lipschitz
/// constant at the substep width `τ = h/m`.
pub fn substep_condition3_constant(l: f64, h: f64, substeps: usize) -> f64 {
    let tau = h / substeps as f64;
    let m = rk4_lipschitz_m(l, tau);
    libm::expm1(h * m) / h + l
}

/// Coefficients of the majorant recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Majorant {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

/// Constants for the substep variant of the fine propagator. `Λ`, `c₄` and
/// `c₅` are calibrated from data; `c₆` is `(e^{hM} − 1)/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstepConstants {
    pub lambda: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl SubstepConstants {
    /// `Λ̃ = Λ/m + L c₄ h³/m⁴ + L c₅`.
    pub fn lambda_tilde(&self, l: f64, h: f64, substeps: usize) -> f64 {
        let m = substeps as f64;
        self.lambda / m + l * self.c4 * h * h * h / (m * m * m * m) + l * self.c5
    }

    /// `c̃₃ = c₆ + L`.
    pub fn c_tilde3(&self, l: f64) -> f64 {
        self.c6 + l
    }
}

/// Every constant entering the two convergence bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    alpha: f64,
    c1: f64,
    c2: f64,
    c3: Option<f64>,
    h: f64,
    horizon: f64,
    m_rk4: f64,
    c_tilde2: Option<f64>,
    c_tilde3: Option<f64>,
    lambda: Option<f64>,
    lambda_tilde: Option<f64>,
    c4: Option<f64>,
    c5: Option<f64>,
    c6: Option<f64>,
}

fn positive(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidConfig(what))
    }
}

impl BoundConstants {
    /// General constructor. `c3` may be absent when only the second bound
    /// (which drops condition 3) is of interest. `c2` may be zero, which is
    /// what a calibration on an exactly integrated problem produces.
    pub fn new(alpha: f64, c1: f64, c2: f64, c3: Option<f64>, l: f64, h: f64, horizon: f64) -> Result<Self> {
        positive(alpha, "alpha must be positive")?;
        positive(c1, "c1 must be positive")?;
        if !(c2.is_finite() && c2 >= 0.0) {
            return Err(Error::InvalidConfig("c2 must be non-negative"));
        }
        if let Some(c3) = c3 {
            positive(c3, "c3 must be positive")?;
        }
        positive(l, "L must be positive")?;
        positive(h, "h must be positive")?;
        positive(horizon, "horizon must be positive")?;
        Ok(Self {
            alpha,
            c1,
            c2,
            c3,
            h,
            horizon,
            m_rk4: rk4_lipschitz_m(l, h),
            c_tilde2: None,
            c_tilde3: None,
            lambda: None,
            lambda_tilde: None,
            c4: None,
            c5: None,
            c6: None,
        })
    }

    /// Records the substep constants and the derived `Λ̃`, `c̃₃`.
    pub fn with_substep_constants(mut self, l: f64, substeps: usize, sc: SubstepConstants) -> Self {
        self.lambda = Some(sc.lambda);
        self.c4 = Some(sc.c4);
        self.c5 = Some(sc.c5);
        self.c6 = Some(sc.c6);
        self.lambda_tilde = Some(sc.lambda_tilde(l, self.h, substeps));
        self.c_tilde3 = Some(sc.c_tilde3(l));
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn c3(&self) -> Option<f64> {
        self.c3
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `b = 1 + h c₁`.
    pub fn b(&self) -> f64 {
        1.0 + self.h * self.c1
    }

    /// `a = h c₃`.
    pub fn a(&self) -> Option<f64> {
        self.c3.map(|c3| self.h * c3)
    }

    /// `γ = h^{1+α} c₂`.
    pub fn gamma(&self) -> f64 {
        libm::pow(self.h, 1.0 + self.alpha) * self.c2
    }

    /// RK4 increment Lipschitz constant `M` at step `h`.
    pub fn m_rk4(&self) -> f64 {
        self.m_rk4
    }

    pub fn c_tilde2(&self) -> Option<f64> {
        self.c_tilde2
    }

    pub fn c_tilde3(&self) -> Option<f64> {
        self.c_tilde3
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn lambda_tilde(&self) -> Option<f64> {
        self.lambda_tilde
    }

    pub fn c4(&self) -> Option<f64> {
        self.c4
    }

    pub fn c5(&self) -> Option<f64> {
        self.c5
    }

    pub fn c6(&self) -> Option<f64> {
        self.c6
    }

    pub fn majorant(&self) -> Option<Majorant> {
        self.a().map(|a| Majorant {
            a,
            b: self.b(),
            gamma: self.gamma(),
        })
    }
}

/// Forward-Euler coarse, single-step RK4 fine: `c₁ = L`, `c₃ = L + M`,
/// `α = 1`.
pub fn forward_euler_constants(l: f64, h: f64, horizon: f64, c2: f64) -> Result<BoundConstants> {
    positive(l, "L must be positive")?;
    positive(h, "h must be positive")?;
    let c3 = l + rk4_lipschitz_m(l, h);
    BoundConstants::new(1.0, l, c2, Some(c3), l, h, horizon)
}

/// Backward-Euler coarse (condition 3 dropped): `c₁ = 2L`, `c₂ = c̃₂`,
/// `α = 1`. Needs `h ≤ 1/(2L)`.
pub fn backward_euler_constants(l: f64, h: f64, horizon: f64, c_tilde2: f64) -> Result<BoundConstants> {
    positive(l, "L must be positive")?;
    positive(h, "h must be positive")?;
    let limit = 1.0 / (2.0 * l);
    if h > limit {
        return Err(Error::StepTooLarge { h, limit });
    }
    let mut c = BoundConstants::new(1.0, 2.0 * l, c_tilde2, None, l, h, horizon)?;
    c.c_tilde2 = Some(c_tilde2);
    Ok(c)
}

/// Majorant triangle by direct recursion, indexed `[k][n]` for
/// `0 ≤ k ≤ max_k`, `0 ≤ n ≤ intervals`.
pub fn z_triangle(maj: &Majorant, intervals: usize, max_k: usize) -> Vec<Vec<f64>> {
    let mut z = vec![vec![0.0; intervals + 1]; max_k + 1];
    for n in 1..=intervals {
        z[0][n] = maj.b * z[0][n - 1] + maj.gamma;
    }
    for k in 1..=max_k {
        for n in 1..=intervals {
            z[k][n] = maj.b * z[k][n - 1] + maj.a * z[k - 1][n - 1];
        }
    }
    z
}

/// Exact `ζ^n` coefficient of `ρ_k`:
/// `γ a^k Σ_{j=0}^{n−k−1} C(j+k, k) b^j`. Equals `z_n^{(k)}`.
pub fn z_generating_coefficient(maj: &Majorant, n: usize, k: usize) -> f64 {
    if n <= k {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut term = 1.0; // C(k, k) b^0
    for j in 0..(n - k) {
        if j > 0 {
            term *= maj.b * (j + k) as f64 / j as f64;
        }
        sum += term;
    }
    maj.gamma * libm::pow(maj.a, k as f64) * sum
}

/// Closed-form upper bound `γ a^k b^{n−k−1} n(n−1)…(n−k)/(k+1)!`; zero for
/// `n ≤ k`.
pub fn z_closed_form(maj: &Majorant, n: usize, k: usize) -> f64 {
    if n <= k {
        return 0.0;
    }
    let falling: f64 = (0..=k).map(|i| (n - i) as f64).product();
    let factorial: f64 = (1..=k + 1).map(|i| i as f64).product();
    maj.gamma * libm::pow(maj.a, k as f64) * libm::pow(maj.b, (n - k - 1) as f64) * falling / factorial
}

/// Uniform bound after `k` iterations:
/// `h^α c₂ c₃^k (T − t₀)^{k+1} e^{c₁(T − t₀)} / (k+1)!`.
pub fn theorem1_bound(c: &BoundConstants, k: usize) -> Result<f64> {
    let c3 = c.c3.ok_or(Error::MissingConstant("c3"))?;
    let factorial: f64 = (1..=k + 1).map(|i| i as f64).product();
    Ok(libm::pow(c.h, c.alpha)
        * c.c2
        * libm::pow(c3, k as f64)
        * libm::pow(c.horizon, (k + 1) as f64)
        * libm::exp(c.c1 * c.horizon)
        / factorial)
}

/// `k`-independent bound without condition 3:
/// `2 h^α e^{(T − t₀) c₁} c₂ / c₁`.
pub fn theorem2_bound(c: &BoundConstants) -> f64 {
    2.0 * libm::pow(c.h, c.alpha) * libm::exp(c.horizon * c.c1) * c.c2 / c.c1
}

/// Which inequality a dominance entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceCheck {
    /// `E_n^{(k)} ≤ z_n^{(k)}`
    ErrorByMajorant,
    /// `z_n^{(k)} ≤ γ a^k b^{n−k−1} C(n, k+1)`
    MajorantByClosedForm,
    /// `max_n E_n^{(k)} ≤` the uniform bound
    SupByUniformBound,
    /// `max_n E_n^{(k)} ≤` the condition-3-free bound
    SupBySecondBound,
}

/// The tightest observed inequality, as `value / bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstMargin {
    pub check: DominanceCheck,
    pub k: usize,
    pub n: Option<usize>,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceEntry {
    pub k: usize,
    pub n: usize,
    pub error: f64,
    pub majorant: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationBound {
    pub k: usize,
    pub sup_error: f64,
    pub majorant_sup: f64,
    pub closed_form_sup: f64,
    pub uniform_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub entries: Vec<DominanceEntry>,
    pub iterations: Vec<IterationBound>,
    pub violations: usize,
    pub worst: Option<WorstMargin>,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `value > limit`, treating NaN on either side as exceeding.
pub(crate) fn exceeds(value: f64, limit: f64) -> bool {
    !matches!(
        value.partial_cmp(&limit),
        Some(core::cmp::Ordering::Less | core::cmp::Ordering::Equal)
    )
}

fn ratio(value: f64, bound: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else if bound == 0.0 {
        f64::INFINITY
    } else {
        value / bound
    }
}

#[derive(Default)]
struct MarginTracker {
    violations: usize,
    worst: Option<WorstMargin>,
}

impl MarginTracker {
    fn record(&mut self, check: DominanceCheck, k: usize, n: Option<usize>, value: f64, bound: f64) {
        if exceeds(value, bound * (1.0 + DOMINANCE_RTOL)) {
            self.violations += 1;
        }
        let r = ratio(value, bound);
        if self.worst.is_none_or(|w| r > w.ratio) {
            self.worst = Some(WorstMargin {
                check,
                k,
                n,
                value,
                bound,
                ratio: r,
            });
        }
    }
}

/// Checks `E ≤ z ≤ closed form` entrywise and `max_n E ≤` the uniform bound
/// per iteration, each with multiplicative slack [`DOMINANCE_RTOL`].
#[allow(clippy::needless_range_loop)]
pub fn verify_dominance(run: &PararealRun, c: &BoundConstants) -> Result<DominanceReport> {
    let maj = c.majorant().ok_or(Error::MissingConstant("c3"))?;
    let intervals = run.intervals();
    let max_k = run.iterations_performed();
    let z = z_triangle(&maj, intervals, max_k);
    if run.errors().len() != z.len() || run.errors().iter().any(|row| row.len() != intervals + 1) {
        return Err(Error::ShapeMismatch("error table does not match the majorant triangle"));
    }
    let mut tracker = MarginTracker::default();
    let mut entries = Vec::with_capacity((max_k + 1) * (intervals + 1));
    let mut iterations = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let mut majorant_sup = 0.0_f64;
        let mut closed_form_sup = 0.0_f64;
        for n in 0..=intervals {
            let error = run.errors()[k][n];
            let majorant = z[k][n];
            let closed_form = z_closed_form(&maj, n, k);
            tracker.record(DominanceCheck::ErrorByMajorant, k, Some(n), error, majorant);
            tracker.record(DominanceCheck::MajorantByClosedForm, k, Some(n), majorant, closed_form);
            majorant_sup = majorant_sup.max(majorant);
            closed_form_sup = closed_form_sup.max(closed_form);
            entries.push(DominanceEntry {
                k,
                n,
                error,
                majorant,
                closed_form,
            });
        }
        let sup_error = run.sup_errors()[k];
        let uniform_bound = theorem1_bound(c, k)?;
        tracker.record(DominanceCheck::SupByUniformBound, k, None, sup_error, uniform_bound);
        iterations.push(IterationBound {
            k,
            sup_error,
            majorant_sup,
            closed_form_sup,
            uniform_bound,
        });
    }
    Ok(DominanceReport {
        entries,
        iterations,
        violations: tracker.violations,
        worst: tracker.worst,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondBoundReport {
    pub bound: f64,
    pub sup_errors: Vec<f64>,
    pub violations: usize,
    pub worst: Option<WorstMargin>,
}

impl SecondBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `max_n E_n^{(k)} ≤ 2 h^α e^{(T−t₀)c₁} c₂/c₁` for every iteration.
pub fn verify_theorem2(run: &PararealRun, c: &BoundConstants) -> SecondBoundReport {
    let bound = theorem2_bound(c);
    let mut tracker = MarginTracker::default();
    for (k, &e) in run.sup_errors().iter().enumerate() {
        tracker.record(DominanceCheck::SupBySecondBound, k, None, e, bound);
    }
    SecondBoundReport {
        bound,
        sup_errors: run.sup_errors().to_vec(),
        violations: tracker.violations,
        worst: tracker.worst,
    }
}

/// Largest violation of a one-step error recursion, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceViolation {
    pub k: usize,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks the one-step error inequalities
/// `E_n^{(0)} ≤ b E_{n−1}^{(0)} + γ`,
/// `E_n^{(k)} ≤ b E_{n−1}^{(k)} + a E_{n−1}^{(k−1)}`
/// on a run, allowing an absolute slack of `slack (1 + ‖u_n‖)`.
pub fn recurrence_violations(run: &PararealRun, maj: &Majorant, slack: f64) -> Vec<RecurrenceViolation> {
    let e = run.errors();
    let mut out = Vec::new();
    for k in 0..e.len() {
        for n in 1..=run.intervals() {
            let rhs = if k == 0 {
                maj.b * e[0][n - 1] + maj.gamma
            } else {
                maj.b * e[k][n - 1] + maj.a * e[k - 1][n - 1]
            };
            let lhs = e[k][n];
            if lhs > rhs + slack * (1.0 + run.reference()[n].norm()) {
                out.push(RecurrenceViolation { k, n, lhs, rhs });
            }
        }
    }
    out
}

/// Same as [`recurrence_violations`] for the condition-3-free recursion
/// `E_n^{(k)} ≤ b E_{n−1}^{(k)} + 2γ` (`γ` alone at `k = 0`).
#[allow(clippy::needless_range_loop)]
pub fn second_recurrence_violations(run: &PararealRun, b: f64, gamma: f64, slack: f64) -> Vec<RecurrenceViolation> {
    let e = run.errors();
    let mut out = Vec::new();
    for k in 0..e.len() {
        let forcing = if k == 0 { gamma } else { 2.0 * gamma };
        for n in 1..=run.intervals() {
            let rhs = b * e[k][n - 1] + forcing;
            let lhs = e[k][n];
            if lhs > rhs + slack * (1.0 + run.reference()[n].norm()) {
                out.push(RecurrenceViolation { k, n, lhs, rhs });
            }
        }
    }
    out
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    fn unit() -> Majorant {
        Majorant {
            a: 1.0,
            b: 1.0,
            gamma: 1.0,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn rk4_lipschitz_examples() {
        assert_eq!(rk4_lipschitz_m(1.0, 0.0), 1.0);
        assert!(rel(rk4_lipschitz_m(1.0, 0.1), 1.0 + 0.05 + 0.01 / 6.0 + 0.001 / 24.0) < 1e-15);
        // hL = 0.2: 2 (1 + 0.1 + 0.04/6 + 0.008/24)
        let expected = 2.0 * (1.0 + 0.1 + 0.04 / 6.0 + 0.008 / 24.0);
        assert!(rel(rk4_lipschitz_m(2.0, 0.1), expected) < 1e-15);
        assert!((rk4_lipschitz_m(2.0, 0.1) - 2.214).abs() < 1e-14);
    }

    #[test]
    fn forward_euler_constant_examples() {
        let c = forward_euler_constants(1.0, 0.1, 1.0, 0.5).unwrap();
        assert!(rel(c.b(), 1.1) < 1e-15);
        assert!(rel(c.a().unwrap(), 0.1 * (1.0 + 1.0517083333333333)) < 1e-14);
        assert!(rel(c.gamma(), 0.005) < 1e-14);
        assert_eq!(c.c1(), 1.0);
        assert_eq!(c.alpha(), 1.0);
        assert!(c.m_rk4() >= c.c1());

        let c = forward_euler_constants(2.0, 0.05, 1.0, 0.5).unwrap();
        assert!(rel(c.b(), 1.1) < 1e-15);

        let tiny = forward_euler_constants(1.0, 1e-9, 1.0, 0.5).unwrap();
        assert!(tiny.b() - 1.0 < 1e-8);
        assert!(tiny.a().unwrap() < 1e-8);
        assert!(tiny.gamma() < 1e-17);
    }

    #[test]
    fn backward_euler_constant_examples() {
        let c = backward_euler_constants(1.0, 0.25, 1.0, 1.0).unwrap();
        assert_eq!(c.b(), 1.5);
        // h = 1/(2L) is admissible
        let c = backward_euler_constants(1.0, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(c.b(), 2.0);
        assert!(matches!(
            backward_euler_constants(1.0, 0.6, 1.0, 1.0),
            Err(Error::StepTooLarge { .. })
        ));
        let c = backward_euler_constants(1.0, 0.1, 1.0, 0.7).unwrap();
        assert!(rel(c.b(), 1.2) < 1e-15);
        assert_eq!(c.c1(), 2.0);
        assert_eq!(c.c2(), 0.7);
        assert_eq!(c.c_tilde2(), Some(0.7));
        assert!(c.majorant().is_none());
        assert!(theorem1_bound(&c, 0).is_err());
    }

    #[test]
    fn invalid_constants_rejected() {
        assert!(BoundConstants::new(0.0, 1.0, 1.0, Some(1.0), 1.0, 0.1, 1.0).is_err());
        assert!(BoundConstants::new(1.0, 1.0, -1.0, Some(1.0), 1.0, 0.1, 1.0).is_err());
        assert!(BoundConstants::new(1.0, 1.0, 1.0, Some(0.0), 1.0, 0.1, 1.0).is_err());
        assert!(BoundConstants::new(1.0, 1.0, f64::NAN, Some(1.0), 1.0, 0.1, 1.0).is_err());
        assert!(forward_euler_constants(0.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn z_triangle_examples() {
        let z = z_triangle(&unit(), 6, 3);
        for n in 0..=6 {
            assert_eq!(z[0][n], n as f64);
        }
        assert_eq!(z[1][4], 6.0);
        let zero = z_triangle(&Majorant { gamma: 0.0, ..unit() }, 8, 4);
        assert!(zero.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn z_triangle_monotone_in_n() {
        let maj = Majorant {
            a: 0.2,
            b: 1.1,
            gamma: 0.005,
        };
        let z = z_triangle(&maj, 20, 6);
        for row in &z {
            assert!(row.iter().all(|v| *v >= 0.0));
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
        // Zero on and above the diagonal.
        for (k, row) in z.iter().enumerate() {
            for (n, v) in row.iter().enumerate().take(k + 1) {
                assert_eq!(*v, 0.0, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(z_closed_form(&unit(), 4, 1), 6.0);
        assert_eq!(z_closed_form(&unit(), 3, 3), 0.0);
        assert_eq!(z_closed_form(&unit(), 2, 5), 0.0);
        let maj = Majorant {
            a: 0.2,
            b: 1.1,
            gamma: 0.005,
        };
        let z = z_triangle(&maj, 10, 2);
        // Exact coefficient reproduces the recursion; the closed form bounds it.
        assert!(rel(z_generating_coefficient(&maj, 10, 2), z[2][10]) < 1e-12);
        assert!(z_closed_form(&maj, 10, 2) >= z[2][10]);
    }

    #[test]
    fn closed_form_is_strict_upper_bound_when_b_exceeds_one() {
        // k = 0: z_n = γ (bⁿ − 1)/(b − 1) < γ n b^{n−1} for b > 1, n ≥ 2.
        let maj = Majorant {
            a: 0.1,
            b: 1.5,
            gamma: 1.0,
        };
        let z = z_triangle(&maj, 3, 0);
        assert!(rel(z[0][3], (1.5f64 * 1.5 * 1.5 - 1.0) / 0.5) < 1e-15);
        assert!(rel(z_closed_form(&maj, 3, 0), 3.0 * 1.5 * 1.5) < 1e-15);
        assert!(z_closed_form(&maj, 3, 0) > z[0][3] * 1.1);
    }

    fn grid() -> Vec<Majorant> {
        let mut out = Vec::new();
        for a in [0.01, 0.1, 1.0] {
            for b in [1.01, 1.5, 2.0] {
                for gamma in [1e-4, 1e-2, 1.0] {
                    out.push(Majorant { a, b, gamma });
                }
            }
        }
        out
    }

    #[test]
    fn generating_coefficient_matches_recursion_on_grid() {
        for maj in grid() {
            let z = z_triangle(&maj, 30, 10);
            for n in 1..=30 {
                for k in 0..=n.min(10) {
                    let exact = z_generating_coefficient(&maj, n, k);
                    let closed = z_closed_form(&maj, n, k);
                    if z[k][n] > 0.0 {
                        assert!(rel(exact, z[k][n]) <= 1e-10, "{maj:?} n={n} k={k}");
                    } else {
                        assert_eq!(exact, 0.0);
                    }
                    assert!(z[k][n] <= closed * (1.0 + 1e-10), "{maj:?} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn closed_form_equals_recursion_when_b_is_one() {
        for a in [0.01, 0.1, 1.0] {
            for gamma in [1e-4, 1e-2, 1.0] {
                let maj = Majorant { a, b: 1.0, gamma };
                let z = z_triangle(&maj, 30, 10);
                for n in 1..=30 {
                    for k in 0..=n.min(10) {
                        if z[k][n] > 0.0 {
                            assert!(rel(z_closed_form(&maj, n, k), z[k][n]) <= 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn theorem1_examples() {
        let c = BoundConstants::new(1.0, 1.0, 1.0, Some(1.0), 1.0, 0.1, 1.0).unwrap();
        assert!(rel(theorem1_bound(&c, 1).unwrap(), 0.1 * E / 2.0) < 1e-14);
        let half = BoundConstants::new(1.0, 1.0, 1.0, Some(1.0), 1.0, 0.05, 1.0).unwrap();
        for k in 0..6 {
            assert!(rel(theorem1_bound(&half, k).unwrap(), 0.5 * theorem1_bound(&c, k).unwrap()) < 1e-14);
        }
        // Factorial domination: decreasing once k + 1 > c₃ (T − t₀).
        let big = BoundConstants::new(1.0, 1.0, 1.0, Some(3.0), 1.0, 0.1, 2.0).unwrap();
        let values: Vec<f64> = (0..40).map(|k| theorem1_bound(&big, k).unwrap()).collect();
        assert!(values[6..].windows(2).all(|w| w[1] < w[0]));
        assert!(values[39] < 1e-10);
    }

    #[test]
    fn theorem1_scaling() {
        let c = BoundConstants::new(1.0, 1.3, 0.7, Some(1.9), 1.0, 0.1, 1.5).unwrap();
        let c2x = BoundConstants::new(1.0, 1.3, 1.4, Some(1.9), 1.0, 0.1, 1.5).unwrap();
        let c3x = BoundConstants::new(1.0, 1.3, 0.7, Some(3.8), 1.0, 0.1, 1.5).unwrap();
        for k in 0..8 {
            let base = theorem1_bound(&c, k).unwrap();
            assert!(rel(theorem1_bound(&c2x, k).unwrap(), 2.0 * base) < 1e-14);
            assert!(rel(theorem1_bound(&c3x, k).unwrap(), libm::pow(2.0, k as f64) * base) < 1e-14);
        }
    }

    #[test]
    fn theorem2_examples() {
        let c = BoundConstants::new(1.0, 2.0, 1.0, None, 1.0, 0.1, 1.0).unwrap();
        assert!(rel(theorem2_bound(&c), 0.1 * E * E) < 1e-14);
        assert!(rel(theorem2_bound(&c), 0.738905609893065) < 1e-12);
        let tiny = BoundConstants::new(1.0, 2.0, 1.0, None, 1.0, 1e-12, 1.0).unwrap();
        assert!(theorem2_bound(&tiny) < 1e-10);
        let c2x = BoundConstants::new(1.0, 2.0, 2.0, None, 1.0, 0.1, 1.0).unwrap();
        assert!(rel(theorem2_bound(&c2x), 2.0 * theorem2_bound(&c)) < 1e-15);
    }

    #[test]
    fn substep_constants() {
        // m = 1 reduces to (e^{hM} − 1)/h + L ≥ M + L.
        let c = substep_condition3_constant(1.0, 0.1, 1);
        assert!(c >= 1.0 + rk4_lipschitz_m(1.0, 0.1));
        assert!(substep_condition3_constant(1.0, 0.1, 4) < c);
        let sc = SubstepConstants {
            lambda: 0.6,
            c4: 0.01,
            c5: 3.0,
            c6: 1.2,
        };
        let expected = 0.6 / 4.0 + 1.0 * 0.01 * 0.001 / 256.0 + 3.0;
        assert!(rel(sc.lambda_tilde(1.0, 0.1, 4), expected) < 1e-15);
        assert_eq!(sc.c_tilde3(1.0), 2.2);
        let c = forward_euler_constants(1.0, 0.1, 1.0, 0.5)
            .unwrap()
            .with_substep_constants(1.0, 4, sc);
        assert_eq!(c.c_tilde3(), Some(2.2));
        assert_eq!(c.c6(), Some(1.2));
    }
}
