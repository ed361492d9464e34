use parareal_core::parareal::SweepExecutor;
use rayon::prelude::*;

/// Runs defect sweeps on a dedicated rayon pool with a fixed worker count.
///
/// Results are collected in index order, so rows are bit-identical for any
/// worker count.
pub struct ThreadPoolExecutor {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl ThreadPoolExecutor {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("parareal-sweep-{i}"))
            .build()?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl std::fmt::Debug for ThreadPoolExecutor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThreadPoolExecutor")
            .field("workers", &self.workers)
            .finish()
    }
}

impl SweepExecutor for ThreadPoolExecutor {
    fn map<T, F>(&self, len: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().map(task).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use parareal_core::integrators::CoarseMethod;
    use parareal_core::ode_model::{builtin_problem, Mesh};
    use parareal_core::parareal::{defect_sweep, parareal_init, parareal_run, PararealConfig, Sequential};

    #[test]
    fn preserves_index_order() {
        let exec = ThreadPoolExecutor::new(4).unwrap();
        let out = exec.map(1000, |i| i * i);
        assert!(out.iter().enumerate().all(|(i, v)| *v == i * i));
        assert_eq!(exec.workers(), 4);
    }

    #[test]
    fn defect_sweep_matches_sequential_bitwise() {
        let p = builtin_problem("nonautonomous").unwrap();
        let mesh = Mesh::for_problem(&p, 64, 5).unwrap();
        let fe = CoarseMethod::forward_euler();
        let row = parareal_init(&p, &mesh, &fe).unwrap();
        let seq = defect_sweep(&p, &mesh, &row, &fe, &Sequential).unwrap();
        for workers in [1, 2, 4, 7] {
            let exec = ThreadPoolExecutor::new(workers).unwrap();
            let par = defect_sweep(&p, &mesh, &row, &fe, &exec).unwrap();
            assert_eq!(par, seq);
        }
    }

    #[test]
    fn runs_identical_across_worker_counts() {
        let p = builtin_problem("linear-scalar").unwrap();
        let mesh = Mesh::for_problem(&p, 20, 4).unwrap();
        let cfg = PararealConfig::new(CoarseMethod::backward_euler(), 8);
        let one = parareal_run(&p, &mesh, &cfg, &ThreadPoolExecutor::new(1).unwrap()).unwrap();
        let many = parareal_run(&p, &mesh, &cfg, &ThreadPoolExecutor::new(6).unwrap()).unwrap();
        for (a, b) in one.iterates().iter().flatten().zip(many.iterates().iter().flatten()) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
        }
    }
}
