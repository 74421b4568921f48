//! Ballistic simulated bifurcation.
//!
//! Each spin is an oscillator with position `x_i ∈ [-1, 1]` and momentum
//! `y_i`. One step of symplectic Euler is
//!
//! ```text
//! y_i ← y_i + dt·(−(a0 − a(t))·x_i − c0·Σ_j J_ij x_j)
//! x_i ← x_i + dt·a0·y_i
//! ```
//!
//! followed by the inelastic wall: wherever `|x_i| > 1`, `x_i ← sgn(x_i)` and
//! `y_i ← 0`. The control `a(t)` ramps linearly from 0 to `a0`, and the spin
//! configuration `sgn(x)` is read out after every step.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::problem::{Config, IsingProblem, Solution, SpinConfig};
use crate::rng::derived_stream;

/// Scale `c0` of the coupling force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingScale {
    /// `0.5·a0 / (σ_J·√n)`, see [`auto_coupling_scale`].
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsbParams {
    pub a0: f64,
    pub c0: CouplingScale,
    pub dt: f64,
    pub steps: usize,
    pub schedule: Schedule,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BsbParams {
    fn default() -> Self {
        BsbParams {
            a0: 1.0,
            c0: CouplingScale::Auto,
            dt: 0.1,
            steps: 2000,
            schedule: Schedule::Linear,
            restarts: 1,
            seed: 0,
        }
    }
}

impl BsbParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.a0) {
            return Err(Error::InvalidParams(format!("a0 must be positive, got {}", self.a0)));
        }
        if let CouplingScale::Fixed(c0) = self.c0 {
            if !positive(c0) {
                return Err(Error::InvalidParams(format!("c0 must be positive, got {c0}")));
            }
        }
        if !positive(self.dt) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParams("steps must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParams("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// The concrete `c0` used on `p`.
    pub fn coupling_scale(&self, p: &IsingProblem) -> f64 {
        match self.c0 {
            CouplingScale::Fixed(c0) => c0,
            CouplingScale::Auto => auto_coupling_scale(p, self.a0),
        }
    }

    fn control(&self, step: usize) -> f64 {
        match self.schedule {
            Schedule::Linear => linear_schedule(step, self.steps, self.a0),
        }
    }
}

/// `a0 · step / steps`.
pub fn linear_schedule(step: usize, steps: usize, a0: f64) -> f64 {
    a0 * step as f64 / steps as f64
}

/// `0.5·a0 / (σ·√n)` with `σ` the standard deviation of the off-diagonal
/// couplings. When every off-diagonal coupling is equal, `σ` is zero and the
/// root mean square is used instead; for an all-zero matrix `σ = 1`.
pub fn auto_coupling_scale(p: &IsingProblem, a0: f64) -> f64 {
    let n = p.n();
    if n < 2 {
        return 0.5 * a0;
    }
    let count = (n * (n - 1)) as f64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for i in 0..n {
        for (j, &v) in p.row(i).iter().enumerate() {
            if i != j {
                sum += v;
                sum_sq += v * v;
            }
        }
    }
    let mean = sum / count;
    let variance = (sum_sq / count - mean * mean).max(0.0);
    let rms = (sum_sq / count).sqrt();
    let sigma = if variance.sqrt() > 1e-12 * rms {
        variance.sqrt()
    } else if rms > 0.0 {
        rms
    } else {
        1.0
    };
    0.5 * a0 / (sigma * (n as f64).sqrt())
}

/// Positions, momenta and elapsed time of the oscillator network.
#[derive(Debug, Clone, PartialEq)]
pub struct BsbState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl BsbState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_len(x.len(), y.len())?;
        Ok(BsbState { x, y, t: 0.0 })
    }

    /// `x_i, y_i ~ Uniform(-0.1, 0.1)`, positions drawn before momenta.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let x = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let y = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
        BsbState { x, y, t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `sgn(x)` with `sgn(0) = +1`.
    pub fn signs(&self) -> SpinConfig {
        SpinConfig::from_signs(self.x.len(), |i| self.x[i] >= 0.0)
    }

    pub fn negated(&self) -> Self {
        BsbState {
            x: self.x.iter().map(|v| -v).collect(),
            y: self.y.iter().map(|v| -v).collect(),
            t: self.t,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..4 {
            acc[k] += ca[k] * cb[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

struct Dynamics<'a> {
    p: &'a IsingProblem,
    a0: f64,
    c0: f64,
    dt: f64,
    force: Vec<f64>,
}

impl<'a> Dynamics<'a> {
    fn new(p: &'a IsingProblem, a0: f64, c0: f64, dt: f64) -> Self {
        Dynamics {
            p,
            a0,
            c0,
            dt,
            force: vec![0.0; p.n()],
        }
    }

    fn step(&mut self, state: &mut BsbState, a_t: f64) {
        let x = &mut state.x;
        let y = &mut state.y;
        for (i, f) in self.force.iter_mut().enumerate() {
            *f = dot(self.p.row(i), x);
        }
        let detuning = self.a0 - a_t;
        for i in 0..x.len() {
            y[i] += self.dt * (-detuning * x[i] - self.c0 * self.force[i]);
        }
        for i in 0..x.len() {
            x[i] += self.dt * self.a0 * y[i];
            if x[i].abs() > 1.0 {
                x[i] = x[i].signum();
                y[i] = 0.0;
            }
        }
        state.t += self.dt;
    }
}

fn ensure_finite(state: &BsbState, step: usize) -> Result<()> {
    if state.x.iter().chain(&state.y).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("bSB state became non-finite at step {step}")))
    }
}

/// One integration step with control value `a_t`.
pub fn bsb_step(
    state: &BsbState,
    p: &IsingProblem,
    params: &BsbParams,
    a_t: f64,
) -> Result<BsbState> {
    check_len(p.n(), state.len())?;
    ensure_finite(state, 0)?;
    let mut dynamics = Dynamics::new(p, params.a0, params.coupling_scale(p), params.dt);
    let mut next = state.clone();
    dynamics.step(&mut next, a_t);
    ensure_finite(&next, 1)?;
    Ok(next)
}

/// Energy of the current sign configuration, maintained through local fields
/// so that steps flipping few spins cost `O(n)` per flip.
struct SignTracker<'a> {
    p: &'a IsingProblem,
    spins: Vec<i8>,
    fields: Vec<f64>,
    energy: f64,
    flipped: Vec<usize>,
}

impl<'a> SignTracker<'a> {
    fn new(p: &'a IsingProblem, x: &[f64]) -> Self {
        let spins: Vec<i8> = x.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
        let fields = p.local_fields(&spins);
        let mut tracker = SignTracker {
            p,
            spins,
            fields,
            energy: 0.0,
            flipped: Vec::new(),
        };
        tracker.refresh_energy();
        tracker
    }

    fn refresh_energy(&mut self) {
        let e: f64 = self
            .spins
            .iter()
            .zip(&self.fields)
            .map(|(&s, h)| f64::from(s) * h)
            .sum();
        self.energy = e + self.p.offset();
    }

    /// Returns whether the sign configuration changed.
    fn update(&mut self, x: &[f64]) -> bool {
        self.flipped.clear();
        for (i, &v) in x.iter().enumerate() {
            let s = if v >= 0.0 { 1 } else { -1 };
            if s != self.spins[i] {
                self.spins[i] = s;
                self.flipped.push(i);
            }
        }
        if self.flipped.is_empty() {
            return false;
        }
        let n = self.spins.len();
        if self.flipped.len() * 4 < n {
            for &k in &self.flipped {
                let delta = 2.0 * f64::from(self.spins[k]);
                for (h, j) in self.fields.iter_mut().zip(self.p.row(k)) {
                    *h += delta * j;
                }
            }
        } else {
            self.fields = self.p.local_fields(&self.spins);
        }
        self.refresh_energy();
        true
    }
}

/// One readout of the sign configuration after a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub a_t: f64,
    pub energy: f64,
}

/// A new best-so-far configuration within one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub restart_index: usize,
    pub step: usize,
    pub energy: f64,
    pub spins: SpinConfig,
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub restart_index: usize,
    pub best_energy: f64,
    pub best_spins: SpinConfig,
    pub best_step: usize,
    /// Best-so-far configurations in the order they were found; empty unless
    /// requested.
    pub improvements: Vec<Improvement>,
    /// Per-step readouts; empty unless requested.
    pub trace: Vec<TraceRow>,
    pub final_state: BsbState,
}

#[derive(Debug, Clone, Copy, Default)]
struct Recording {
    improvements: bool,
    trace: bool,
}

fn evolve(
    p: &IsingProblem,
    params: &BsbParams,
    c0: f64,
    restart_index: usize,
    mut state: BsbState,
    rec: Recording,
) -> Result<RestartOutcome> {
    check_len(p.n(), state.len())?;
    let mut dynamics = Dynamics::new(p, params.a0, c0, params.dt);
    let mut tracker: Option<SignTracker> = None;
    let mut best_energy = f64::INFINITY;
    let mut best_spins = Vec::new();
    let mut best_step = 0;
    let mut improvements = Vec::new();
    let mut trace = Vec::new();

    for step in 1..=params.steps {
        let a_t = params.control(step);
        dynamics.step(&mut state, a_t);
        ensure_finite(&state, step)?;
        let tracker = match tracker.as_mut() {
            Some(t) => {
                t.update(&state.x);
                t
            }
            None => tracker.insert(SignTracker::new(p, &state.x)),
        };
        if rec.trace {
            trace.push(TraceRow {
                step,
                a_t,
                energy: tracker.energy,
            });
        }
        if tracker.energy < best_energy {
            best_energy = tracker.energy;
            best_spins.clone_from(&tracker.spins);
            best_step = step;
            if rec.improvements {
                improvements.push(Improvement {
                    restart_index,
                    step,
                    energy: tracker.energy,
                    spins: SpinConfig::new(tracker.spins.clone())?,
                });
            }
        }
    }

    let best_spins = SpinConfig::new(best_spins)?;
    Ok(RestartOutcome {
        restart_index,
        best_energy: p.energy_of(best_spins.as_slice()),
        best_spins,
        best_step,
        improvements,
        trace,
        final_state: state,
    })
}

fn prepare(p: &IsingProblem, params: &BsbParams) -> Result<f64> {
    params.validate()?;
    if p.n() == 0 {
        return Err(Error::InvalidInput("empty problem".into()));
    }
    Ok(params.coupling_scale(p))
}

fn restart(
    p: &IsingProblem,
    params: &BsbParams,
    c0: f64,
    restart_index: usize,
    rec: Recording,
) -> Result<RestartOutcome> {
    let mut rng = derived_stream(params.seed, restart_index as u64);
    let init = BsbState::random(p.n(), &mut rng);
    evolve(p, params, c0, restart_index, init, rec)
}

/// Run restart `restart_index` alone, exactly as [`bsb_solve`] runs it.
pub fn bsb_restart(p: &IsingProblem, params: &BsbParams, restart_index: usize) -> Result<RestartOutcome> {
    let c0 = prepare(p, params)?;
    restart(
        p,
        params,
        c0,
        restart_index,
        Recording {
            improvements: true,
            trace: true,
        },
    )
}

/// Integrate from a caller-supplied initial state, recording every readout.
pub fn bsb_evolve_from(p: &IsingProblem, params: &BsbParams, init: BsbState) -> Result<RestartOutcome> {
    let c0 = prepare(p, params)?;
    evolve(
        p,
        params,
        c0,
        0,
        init,
        Recording {
            improvements: true,
            trace: true,
        },
    )
}

fn run_all(p: &IsingProblem, params: &BsbParams, rec: Recording) -> Result<Vec<RestartOutcome>> {
    let c0 = prepare(p, params)?;
    (0..params.restarts)
        .into_par_iter()
        .map(|r| restart(p, params, c0, r, rec))
        .collect()
}

fn merge(p: &IsingProblem, params: &BsbParams, outcomes: &[RestartOutcome]) -> Solution {
    // Lowest energy wins; equal energies go to the lowest restart index.
    let best = outcomes
        .iter()
        .reduce(|a, b| if b.best_energy < a.best_energy { b } else { a })
        .expect("restarts >= 1");
    let spins = best.best_spins.clone().normalized();
    Solution {
        energy: p.energy_of(spins.as_slice()),
        config: Config::Spins(spins),
        seed: params.seed,
        restart_index: best.restart_index,
        best_step: best.best_step,
    }
}

/// Minimize `p` with `params.restarts` independent trajectories.
pub fn bsb_solve(p: &IsingProblem, params: &BsbParams) -> Result<Solution> {
    let outcomes = run_all(p, params, Recording::default())?;
    Ok(merge(p, params, &outcomes))
}

/// Like [`bsb_solve`], also returning every best-so-far configuration from
/// every restart, ordered by restart then step.
pub fn bsb_solve_with_improvements(
    p: &IsingProblem,
    params: &BsbParams,
) -> Result<(Solution, Vec<Improvement>)> {
    let outcomes = run_all(
        p,
        params,
        Recording {
            improvements: true,
            trace: false,
        },
    )?;
    let solution = merge(p, params, &outcomes);
    let improvements = outcomes.into_iter().flat_map(|o| o.improvements).collect();
    Ok((solution, improvements))
}

/// Per-step readouts of one restart, for diagnostics.
pub fn bsb_trace(p: &IsingProblem, params: &BsbParams, restart_index: usize) -> Result<Vec<TraceRow>> {
    let c0 = prepare(p, params)?;
    Ok(restart(
        p,
        params,
        c0,
        restart_index,
        Recording {
            improvements: false,
            trace: true,
        },
    )?
    .trace)
}
