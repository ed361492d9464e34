use crate::integrators::FinePropagatorConfig;
use crate::{Error, Result};

use super::OdeProblem;

/// Uniform coarse grid `t_n = t0 + n h`, `h = (T − t0)/N`, with `m` equal
/// fine substeps of width `τ = h/m` inside each interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    t0: f64,
    t_end: f64,
    intervals: usize,
    h: f64,
    fine: FinePropagatorConfig,
    tau: f64,
}

impl Mesh {
    pub fn new(t0: f64, t_end: f64, intervals: usize, fine_substeps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite()) || t_end <= t0 {
            return Err(Error::InvalidMesh("horizon must satisfy t0 < T"));
        }
        if intervals == 0 {
            return Err(Error::InvalidMesh("at least one interval is required"));
        }
        let fine = FinePropagatorConfig::new(fine_substeps)?;
        let h = (t_end - t0) / intervals as f64;
        let tau = h / fine_substeps as f64;
        if !(h > 0.0 && tau > 0.0) {
            return Err(Error::InvalidMesh("step underflows"));
        }
        Ok(Self {
            t0,
            t_end,
            intervals,
            h,
            fine,
            tau,
        })
    }

    /// Mesh over the horizon of `problem`.
    pub fn for_problem(problem: &OdeProblem, intervals: usize, fine_substeps: usize) -> Result<Self> {
        Self::new(problem.t0(), problem.t_end(), intervals, fine_substeps)
    }

    /// Mesh whose coarse step is `h`; `(T − t0)/h` must be an integer to
    /// within round-off.
    pub fn with_step(problem: &OdeProblem, h: f64, fine_substeps: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidMesh("step must be positive"));
        }
        let ratio = problem.horizon() / h;
        let intervals = libm::round(ratio);
        if intervals < 1.0 || libm::fabs(ratio - intervals) > 1e-9 * ratio {
            return Err(Error::InvalidMesh("step does not divide the horizon"));
        }
        Self::for_problem(problem, intervals as usize, fine_substeps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fine(&self) -> FinePropagatorConfig {
        self.fine
    }

    pub fn fine_substeps(&self) -> usize {
        self.fine.substeps()
    }

    /// `t_n = t0 + n h`; the last node is `T` itself.
    pub fn node(&self, n: usize) -> f64 {
        debug_assert!(n <= self.intervals);
        if n == self.intervals {
            return self.t_end;
        }
        self.t0 + n as f64 * self.h
    }

    /// `t_{n,j} = t_{n−1} + j τ` for interval `n ≥ 1` and `0 ≤ j ≤ m`.
    pub fn subnode(&self, n: usize, j: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.intervals && j <= self.fine_substeps());
        if j == self.fine_substeps() {
            return self.node(n);
        }
        self.node(n - 1) + j as f64 * self.tau
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.intervals).map(|n| self.node(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn rejects_degenerate_meshes() {
        assert!(Mesh::new(0.0, 1.0, 0, 1).is_err());
        assert!(Mesh::new(0.0, 1.0, 4, 0).is_err());
        assert!(Mesh::new(1.0, 0.0, 4, 1).is_err());
    }

    #[test]
    fn basic_geometry() {
        let mesh = Mesh::new(0.0, 1.0, 10, 4).unwrap();
        assert_eq!(mesh.h(), 0.1);
        assert_eq!(mesh.tau(), 0.025);
        assert_eq!(mesh.node(0), 0.0);
        assert_eq!(mesh.subnode(1, 0), 0.0);
    }

    proptest! {
        #[test]
        fn node_and_subnode_invariants(
            t0 in -10.0..10.0f64,
            len in 0.01..50.0f64,
            n in 1usize..400,
            m in 1usize..16,
        ) {
            let t_end = t0 + len;
            let mesh = Mesh::new(t0, t_end, n, m).unwrap();
            prop_assert!(ulps(mesh.h(), m as f64 * mesh.tau()) <= 1);
            prop_assert!(ulps(mesh.node(n), t_end) <= 4);
            let nodes: alloc::vec::Vec<f64> = mesh.nodes().collect();
            prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            for k in 1..=n.min(5) {
                prop_assert!(ulps(mesh.subnode(k, m), mesh.node(k)) <= 4);
                let sub: alloc::vec::Vec<f64> = (0..=m).map(|j| mesh.subnode(k, j)).collect();
                prop_assert!(sub.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
