//! Seeded Monte-Carlo runner and the data-generating processes used to
//! validate the tests.
//!
//! Replication `i` draws from stream `i` of a ChaCha8 generator keyed by the
//! run seed, so results do not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Generator for replication `replication` of a run keyed by `seed`.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Runs `f` once per replication in parallel; output order follows the
/// replication index.
pub fn monte_carlo<T, F>(seed: u64, replications: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..replications as u64)
        .into_par_iter()
        .map(|i| f(&mut replication_rng(seed, i)))
        .collect()
}

/// Share of `true` outcomes.
pub fn rate(outcomes: &[bool]) -> f64 {
    outcomes.iter().filter(|&&b| b).count() as f64 / outcomes.len() as f64
}

pub fn white_noise<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Partial sums of `steps`, starting from the first step.
pub fn cumulate(steps: &[f64]) -> Vec<f64> {
    steps
        .iter()
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect()
}

pub fn random_walk<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    cumulate(&white_noise(rng, n))
}

/// Random walk whose increments are MA(1): `e_t + theta e_{t-1}`.
pub fn ma1_random_walk<R: Rng>(rng: &mut R, n: usize, theta: f64) -> Vec<f64> {
    let e = white_noise(rng, n + 1);
    let steps: Vec<f64> = e.windows(2).map(|w| w[1] + theta * w[0]).collect();
    cumulate(&steps)
}

/// Doubly cumulated white noise.
pub fn i2_process<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    cumulate(&random_walk(rng, n))
}

/// Stationary AR(1) started from its unconditional distribution.
pub fn ar1<R: Rng>(rng: &mut R, n: usize, phi: f64) -> Vec<f64> {
    assert!(phi.abs() < 1.0, "ar1 needs |phi| < 1");
    let mut out = Vec::with_capacity(n);
    let mut prev = rng.sample::<f64, _>(StandardNormal) / (1.0 - phi * phi).sqrt();
    for _ in 0..n {
        prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
        out.push(prev);
    }
    out
}

/// `x` a random walk, `y = intercept + beta x + u` with AR(1) equilibrium
/// error `u` of persistence `rho`.
pub fn cointegrated_pair<R: Rng>(rng: &mut R, n: usize, intercept: f64, beta: f64, rho: f64) -> (Vec<f64>, Vec<f64>) {
    let x = random_walk(rng, n);
    let u = ar1(rng, n, rho);
    let y = x.iter().zip(&u).map(|(xv, uv)| intercept + beta * xv + uv).collect();
    (y, x)
}
