//! Reference heuristics for comparison with bSB.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Config, IsingProblem, Solution, SpinConfig};
use crate::rng::derived_stream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaParams {
    pub sweeps: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            sweeps: 500,
            beta_initial: 0.1,
            beta_final: 10.0,
            restarts: 1,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidParams("sweeps must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParams("restarts must be at least 1".into()));
        }
        if self.beta_initial.is_nan() || self.beta_initial <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta_initial must be positive, got {}",
                self.beta_initial
            )));
        }
        if self.beta_final.is_nan() || self.beta_final < self.beta_initial {
            return Err(Error::InvalidParams(format!(
                "beta_final ({}) must be at least beta_initial ({})",
                self.beta_final, self.beta_initial
            )));
        }
        Ok(())
    }
}

/// Instance-scaled `(beta_initial, beta_final)`. The start accepts a typical
/// move from a random configuration with probability 1/2 (`ln 2 / mean|ΔE|`);
/// the end accepts the cheapest uphill move `4·min|J_ij|` with probability
/// `e^-6`. The random start is drawn from stream 0 of `seed`.
pub fn anneal_betas(p: &IsingProblem, seed: u64) -> (f64, f64) {
    let mut rng = derived_stream(seed, 0);
    let s: Vec<i8> = (0..p.n()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let fields = p.local_fields(&s);
    let mean = s.iter().zip(&fields).map(|(&si, &h)| flip_delta(si, h).abs()).sum::<f64>() / p.n() as f64;
    let min = p
        .pairs()
        .map(|(_, _, j)| j.abs())
        .filter(|&j| j > 0.0)
        .fold(f64::INFINITY, f64::min);
    if mean > 0.0 && min.is_finite() {
        let initial = std::f64::consts::LN_2 / mean;
        (initial, (6.0 / (4.0 * min)).max(initial))
    } else {
        (1.0, 1.0)
    }
}

/// Geometric inverse-temperature schedule, one value per sweep. An infinite
/// `beta_initial` yields a zero-temperature (greedy) schedule.
pub fn geometric_betas(beta_initial: f64, beta_final: f64, sweeps: usize) -> Vec<f64> {
    if beta_initial.is_infinite() {
        return vec![f64::INFINITY; sweeps];
    }
    if sweeps == 1 {
        return vec![beta_initial];
    }
    let ratio = (beta_final / beta_initial).powf(1.0 / (sweeps - 1) as f64);
    let mut betas = Vec::with_capacity(sweeps);
    let mut beta = beta_initial;
    for _ in 0..sweeps {
        betas.push(beta);
        beta *= ratio;
    }
    betas
}

/// Energy change of flipping spin `i` from its current value `s_i`, given the
/// local field `h_i = Σ_j J_ij s_j`: `−4·s_i·h_i`, i.e. `4·s_i'·h_i` in terms
/// of the flipped spin `s_i'`.
pub fn flip_delta(s_i: i8, field: f64) -> f64 {
    -4.0 * f64::from(s_i) * field
}

/// One annealing run. `on_sweep` sees the best-so-far energy after each sweep.
pub fn sa_run(
    p: &IsingProblem,
    params: &SaParams,
    restart_index: usize,
    mut on_sweep: impl FnMut(usize, f64, f64),
) -> Result<(f64, SpinConfig, usize)> {
    params.validate()?;
    let n = p.n();
    let mut rng = derived_stream(params.seed, restart_index as u64);
    let mut spins: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut fields = p.local_fields(&spins);
    let mut energy = p.energy_of(&spins);
    let mut best = (energy, spins.clone(), 0);

    for (sweep, beta) in geometric_betas(params.beta_initial, params.beta_final, params.sweeps)
        .into_iter()
        .enumerate()
    {
        for i in 0..n {
            let delta = flip_delta(spins[i], fields[i]);
            let accept = delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp();
            if accept {
                spins[i] = -spins[i];
                energy += delta;
                let change = 2.0 * f64::from(spins[i]);
                for (h, j) in fields.iter_mut().zip(p.row(i)) {
                    *h += change * j;
                }
            }
        }
        if energy < best.0 {
            best = (energy, spins.clone(), sweep + 1);
        }
        on_sweep(sweep + 1, energy, best.0);
    }

    let spins = SpinConfig::new(best.1)?;
    Ok((p.energy_of(spins.as_slice()), spins, best.2))
}

/// Metropolis single-spin-flip annealing with independent restarts; the best
/// restart wins, ties going to the lowest index.
pub fn sa_solve(p: &IsingProblem, params: &SaParams) -> Result<Solution> {
    params.validate()?;
    let runs = (0..params.restarts)
        .into_par_iter()
        .map(|r| sa_run(p, params, r, |_, _, _| {}).map(|out| (r, out)))
        .collect::<Result<Vec<_>>>()?;
    let (restart_index, (_, spins, best_step)) = runs
        .into_iter()
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .expect("restarts >= 1");
    let spins = spins.normalized();
    Ok(Solution {
        energy: p.energy_of(spins.as_slice()),
        config: Config::Spins(spins),
        seed: params.seed,
        restart_index,
        best_step,
    })
}

/// Best of `samples` uniformly random configurations.
pub fn random_search(p: &IsingProblem, samples: usize, seed: u64) -> Result<Solution> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be at least 1".into()));
    }
    let n = p.n();
    let mut rng = derived_stream(seed, 0);
    let mut spins = vec![1i8; n];
    let mut best: Option<(f64, Vec<i8>, usize)> = None;
    for sample in 0..samples {
        spins.iter_mut().for_each(|s| *s = if rng.gen::<bool>() { 1 } else { -1 });
        let e = p.energy_of(&spins);
        if best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, spins.clone(), sample));
        }
    }
    let (_, spins, sample) = best.expect("samples >= 1");
    let spins = SpinConfig::new(spins)?.normalized();
    Ok(Solution {
        energy: p.energy_of(spins.as_slice()),
        config: Config::Spins(spins),
        seed,
        restart_index: 0,
        best_step: sample,
    })
}
