//! Oracles and instance generators shared by the integration tests. Nothing
//! here calls into the solver or evaluation code paths it is used to check.
#![allow(dead_code)]

use qdopt_core::{BinaryVector, IsingProblem, QuboProblem, Direction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric `J_ij ~ U(-1, 1)`, zero diagonal.
pub fn random_ising(n: usize, seed: u64) -> IsingProblem {
    let mut r = rng(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, r.gen_range(-1.0..1.0)));
        }
    }
    IsingProblem::from_pairs(n, pairs, 0.0).unwrap()
}

pub fn random_qubo(n: usize, seed: u64, direction: Direction) -> QuboProblem {
    let mut r = rng(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i..n {
            pairs.push((i, j, r.gen_range(-3.0..3.0)));
        }
    }
    QuboProblem::from_pairs(n, pairs, direction).unwrap()
}

/// Literal `Σ_i Σ_j J_ij s_i s_j + offset` over a dense copy of `J`.
pub fn ising_energy_terms(p: &IsingProblem, s: &[i8]) -> f64 {
    let n = p.n();
    let mut e = p.offset();
    for i in 0..n {
        for j in 0..n {
            e += p.coupling(i, j) * s[i] as f64 * s[j] as f64;
        }
    }
    e
}

pub fn qubo_value_terms(p: &QuboProblem, q: &[u8]) -> f64 {
    let n = p.n();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            v += p.entry(i, j) * q[i] as f64 * q[j] as f64;
        }
    }
    v
}

/// Ground-state energy by recursive enumeration of every spin assignment.
pub fn ground_energy_recursive(p: &IsingProblem) -> f64 {
    fn go(p: &IsingProblem, s: &mut Vec<i8>, best: &mut f64) {
        if s.len() == p.n() {
            let e = ising_energy_terms(p, s);
            if e < *best {
                *best = e;
            }
            return;
        }
        for v in [-1i8, 1] {
            s.push(v);
            go(p, s, best);
            s.pop();
        }
    }
    let mut best = f64::INFINITY;
    go(p, &mut Vec::with_capacity(p.n()), &mut best);
    best
}

pub fn all_bits(n: usize) -> impl Iterator<Item = BinaryVector> {
    (0..1u64 << n).map(move |m| {
        BinaryVector::new((0..n).map(|i| ((m >> i) & 1) as u8).collect()).unwrap()
    })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
