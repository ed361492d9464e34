use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{OdeProblem, StateVec};
use crate::{Error, Result};

/// Names accepted by [`builtin_problem`].
pub const CATALOG: [&str; 4] = ["linear-scalar", "linear-decay", "nonautonomous", "zero-rhs"];

fn exp_growth(t: f64) -> Vec<f64> {
    vec![libm::exp(t)]
}

fn exp_decay(t: f64) -> Vec<f64> {
    vec![libm::exp(-t)]
}

// x' = x + sin t, x(0) = 0
fn forced_growth(t: f64) -> Vec<f64> {
    vec![0.5 * (libm::exp(t) - libm::sin(t) - libm::cos(t))]
}

fn constant_one(_t: f64) -> Vec<f64> {
    vec![1.0]
}

/// Test problems, all scalar on `[0, 1]` with `L = 1`:
///
/// * `linear-scalar`: `x' = x`, `x0 = 1`
/// * `linear-decay`: `x' = −x`, `x0 = 1`
/// * `nonautonomous`: `x' = x + sin t`, `x0 = 0`
/// * `zero-rhs`: `x' = 0`, `x0 = 1`
pub fn builtin_problem(name: &str) -> Result<OdeProblem> {
    let one = StateVec::scalar(1.0)?;
    let problem = match name {
        "linear-scalar" => OdeProblem::new(|_t, x: &[f64]| vec![x[0]], 0.0, 1.0, one, 1.0)?
            .with_exact_solution(exp_growth)
            .autonomous()?,
        "linear-decay" => OdeProblem::new(|_t, x: &[f64]| vec![-x[0]], 0.0, 1.0, one, 1.0)?
            .with_exact_solution(exp_decay)
            .autonomous()?,
        "nonautonomous" => OdeProblem::new(
            |t, x: &[f64]| vec![x[0] + libm::sin(t)],
            0.0,
            1.0,
            StateVec::scalar(0.0)?,
            1.0,
        )?
        .with_exact_solution(forced_growth),
        "zero-rhs" => OdeProblem::new(|_t, x: &[f64]| vec![0.0; x.len()], 0.0, 1.0, one, 1.0)?
            .with_exact_solution(constant_one)
            .autonomous()?,
        _ => return Err(Error::UnknownProblem { name: name.to_string() }),
    };
    Ok(problem.with_name(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(v: f64) -> StateVec {
        StateVec::scalar(v).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let zero = builtin_problem("zero-rhs").unwrap();
        assert_eq!(zero.eval(0.3, &s(1.0)).unwrap(), s(0.0));
        let lin = builtin_problem("linear-scalar").unwrap();
        assert_eq!(lin.eval(0.0, &s(2.0)).unwrap(), s(2.0));
        let na = builtin_problem("nonautonomous").unwrap();
        assert_eq!(na.eval(FRAC_PI_2, &s(0.0)).unwrap(), s(1.0));
        assert!(!na.is_autonomous());
        assert!(lin.is_autonomous());
    }

    #[test]
    fn unknown_name_lists_catalog() {
        let err = builtin_problem("van-der-pol").unwrap_err();
        let msg = err.to_string();
        for name in CATALOG {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn exact_solutions_satisfy_the_ode() {
        // Central-difference residual of the closed forms.
        for name in CATALOG {
            let p = builtin_problem(name).unwrap();
            let x0 = p.exact_solution(p.t0()).unwrap().unwrap();
            assert!(x0.distance(p.x0()).unwrap() < 1e-15, "{name}");
            for i in 1..10 {
                let t = i as f64 / 10.0;
                let d = 1e-5;
                let xp = p.exact_solution(t + d).unwrap().unwrap()[0];
                let xm = p.exact_solution(t - d).unwrap().unwrap()[0];
                let x = p.exact_solution(t).unwrap().unwrap();
                let fx = p.eval(t, &x).unwrap()[0];
                assert!(((xp - xm) / (2.0 * d) - fx).abs() < 1e-8, "{name} at {t}");
            }
        }
    }

    #[test]
    fn lipschitz_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for name in CATALOG {
            let p = builtin_problem(name).unwrap();
            for _ in 0..100 {
                let t = rng.gen_range(p.t0()..=p.t_end());
                let x = rng.gen_range(-5.0..5.0);
                let y = x + rng.gen_range(-1.0..=1.0);
                let fx = p.eval(t, &s(x)).unwrap();
                let fy = p.eval(t, &s(y)).unwrap();
                let lhs = fx.distance(&fy).unwrap();
                assert!(lhs <= p.lipschitz() * (x - y).abs() * (1.0 + 1e-12) + 1e-15, "{name}");
            }
        }
    }

    #[test]
    fn rhs_is_deterministic() {
        for name in CATALOG {
            let p = builtin_problem(name).unwrap();
            let a = p.eval(0.37, &s(0.81)).unwrap();
            for _ in 0..10 {
                let b = p.eval(0.37, &s(0.81)).unwrap();
                assert_eq!(a[0].to_bits(), b[0].to_bits());
            }
        }
    }
}
