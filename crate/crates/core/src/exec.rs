//! Trial fan-out with a deterministic reduction.
//!
//! Estimators map trial indices to scalars and reduce the collected vector in
//! index order, so the parallel and sequential paths produce identical bits.

/// Runs `eval(i)` for `i in 0..n`, parallel when the `parallel` feature is on.
pub fn run_trials<F>(n: u64, eval: F) -> Vec<f64>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        run_trials_par(n, eval)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_seq(n, eval)
    }
}

/// Sequential reference path.
pub fn run_trials_seq<F>(n: u64, eval: F) -> Vec<f64>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    (0..n).map(eval).collect()
}

/// Rayon path; output order matches trial index regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn run_trials_par<F>(n: u64, eval: F) -> Vec<f64>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(eval).collect()
}

/// Mean and standard error of a sample, reduced in index order.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0) / n).sqrt())
}
