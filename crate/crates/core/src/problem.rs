//! Ising and QUBO problem representations.
//!
//! The Ising energy is the literal double sum `Σ_i Σ_j J_ij s_i s_j + offset`,
//! so every unordered pair contributes twice. Couplings are stored densely,
//! row-major, and are always symmetric with a zero diagonal.
//!
//! A QUBO is `Σ_i Σ_j Q_ij q_i q_j` over bits; its diagonal acts as a linear
//! term because `q_i² = q_i`. Solvers in this crate always minimize, so a
//! [`Direction::Maximize`] QUBO is negated when it is compiled to Ising form.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::derived_stream;

/// Largest problem the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// A configuration of `±1` spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!("spin value {bad} is not ±1")));
        }
        Ok(SpinConfig(spins))
    }

    /// Spin `i` is `+1` where `positive(i)` holds and `-1` elsewhere.
    pub fn from_signs(n: usize, positive: impl Fn(usize) -> bool) -> Self {
        SpinConfig((0..n).map(|i| if positive(i) { 1 } else { -1 }).collect())
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Global flip `s -> -s`.
    pub fn negated(&self) -> Self {
        SpinConfig(self.0.iter().map(|&s| -s).collect())
    }

    /// Flip globally if needed so that spin 0 is `+1`.
    pub fn normalized(mut self) -> Self {
        if self.0.first() == Some(&-1) {
            self.0.iter_mut().for_each(|s| *s = -*s);
        }
        self
    }
}

/// A vector of `{0, 1}` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct BinaryVector(Vec<u8>);

impl BinaryVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidInput(format!("bit value {bad} is not 0 or 1")));
        }
        Ok(BinaryVector(bits))
    }

    pub fn zeros(n: usize) -> Self {
        BinaryVector(vec![0; n])
    }

    /// The `n`-bit pattern of `mask`, with bit 0 of the vector as the most
    /// significant bit. Iterating masks upward therefore walks patterns in
    /// lexicographic order.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        BinaryVector((0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl std::fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

pub fn spins_to_bits(s: &SpinConfig) -> BinaryVector {
    BinaryVector(s.0.iter().map(|&v| u8::from(v > 0)).collect())
}

pub fn bits_to_spins(q: &BinaryVector) -> SpinConfig {
    SpinConfig(q.0.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect())
}

/// Decode a configuration of a problem built by [`qubo_to_ising`]: spin 0 is
/// the ancilla, and the remaining spins are read relative to it.
pub fn ancilla_spins_to_bits(s: &SpinConfig) -> BinaryVector {
    let reference = s.0.first().copied().unwrap_or(1);
    BinaryVector(s.0[1..].iter().map(|&v| u8::from(v == reference)).collect())
}

/// The embedding `s_0 = +1, s_i = 2 q_{i-1} - 1` used by [`qubo_to_ising`].
pub fn bits_to_ancilla_spins(q: &BinaryVector) -> SpinConfig {
    let mut spins = Vec::with_capacity(q.len() + 1);
    spins.push(1);
    spins.extend(q.0.iter().map(|&b| if b == 1 { 1i8 } else { -1 }));
    SpinConfig(spins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Minimize,
    Maximize,
}

impl Direction {
    /// Whether `a` is strictly better than `b` in this direction.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Minimize => a < b,
            Direction::Maximize => a > b,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" | "minimize" => Ok(Direction::Minimize),
            "max" | "maximize" => Ok(Direction::Maximize),
            other => Err(Error::InvalidInput(format!("unknown direction `{other}`"))),
        }
    }
}

fn check_square(n: usize, entries: &[f64], what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput(format!("{what} must have at least one variable")));
    }
    check_len(n * n, entries.len())?;
    if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} entry ({}, {}) is not finite",
            pos / n,
            pos % n
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if entries[i * n + j] != entries[j * n + i] {
                return Err(Error::InvalidInput(format!(
                    "{what} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// An Ising energy landscape over `n` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    couplings: Vec<f64>,
    offset: f64,
}

impl IsingProblem {
    /// Build from a dense row-major `n × n` coupling matrix.
    pub fn new(n: usize, couplings: Vec<f64>, offset: f64) -> Result<Self> {
        check_square(n, &couplings, "coupling matrix")?;
        if let Some(i) = (0..n).find(|&i| couplings[i * n + i] != 0.0) {
            return Err(Error::InvalidInput(format!(
                "coupling matrix has nonzero diagonal at {i}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidInput("offset is not finite".into()));
        }
        Ok(IsingProblem {
            n,
            couplings,
            offset,
        })
    }

    /// Build from unordered pairs `(i, j, J_ij)`; each pair is mirrored.
    /// Repeated pairs are rejected.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("problem must have at least one spin".into()));
        }
        let mut couplings = vec![0.0; n * n];
        let mut seen = std::collections::HashSet::new();
        for (i, j, v) in pairs {
            let (i, j) = (i.min(j), i.max(j));
            if j >= n {
                return Err(Error::InvalidInput(format!("index {j} out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("diagonal coupling at {i}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidInput(format!("duplicate pair ({i}, {j})")));
            }
            couplings[i * n + j] = v;
            couplings[j * n + i] = v;
        }
        IsingProblem::new(n, couplings, offset)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        IsingProblem::new(n, vec![0.0; n * n], 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.couplings[i * self.n..(i + 1) * self.n]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Nonzero couplings with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let v = self.coupling(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    /// `h_i = Σ_j J_ij s_j`.
    pub fn local_fields(&self, s: &[i8]) -> Vec<f64> {
        (0..self.n).map(|i| signed_dot(self.row(i), s)).collect()
    }

    pub(crate) fn energy_of(&self, s: &[i8]) -> f64 {
        let mut total = 0.0;
        for (i, &si) in s.iter().enumerate() {
            total += f64::from(si) * signed_dot(self.row(i), s);
        }
        total + self.offset
    }

    /// `J_ij -> -J_ij`, `offset -> -offset`.
    pub fn negated(&self) -> Self {
        IsingProblem {
            n: self.n,
            couplings: self.couplings.iter().map(|v| -v).collect(),
            offset: -self.offset,
        }
    }
}

pub(crate) fn signed_dot(row: &[f64], s: &[i8]) -> f64 {
    row.iter().zip(s).map(|(j, &v)| j * f64::from(v)).sum()
}

/// A quadratic objective over bits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n: usize,
    matrix: Vec<f64>,
    direction: Direction,
}

impl QuboProblem {
    pub fn new(n: usize, matrix: Vec<f64>, direction: Direction) -> Result<Self> {
        check_square(n, &matrix, "QUBO matrix")?;
        Ok(QuboProblem {
            n,
            matrix,
            direction,
        })
    }

    /// Build from unordered entries `(i, j, Q_ij)` with `i ≤ j`; off-diagonal
    /// entries are mirrored. Repeated pairs are rejected.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
        direction: Direction,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("problem must have at least one bit".into()));
        }
        let mut matrix = vec![0.0; n * n];
        let mut seen = std::collections::HashSet::new();
        for (i, j, v) in pairs {
            let (i, j) = (i.min(j), i.max(j));
            if j >= n {
                return Err(Error::InvalidInput(format!("index {j} out of range for n = {n}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidInput(format!("duplicate pair ({i}, {j})")));
            }
            matrix[i * n + j] = v;
            matrix[j * n + i] = v;
        }
        QuboProblem::new(n, matrix, direction)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Nonzero entries with `i ≤ j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i..self.n).filter_map(move |j| {
                let v = self.entry(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    pub(crate) fn value_of(&self, q: &[u8]) -> f64 {
        let ones: Vec<usize> = (0..q.len()).filter(|&i| q[i] == 1).collect();
        let mut total = 0.0;
        for &i in &ones {
            let row = &self.matrix[i * self.n..(i + 1) * self.n];
            for &j in &ones {
                total += row[j];
            }
        }
        total
    }
}

/// Either kind of problem, as read from a problem file.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Ising(IsingProblem),
    Qubo(QuboProblem),
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Ising(p) => p.n(),
            Problem::Qubo(p) => p.n(),
        }
    }
}

/// A candidate solution in the variable space of the problem it solves.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Config {
    Spins(SpinConfig),
    Bits(BinaryVector),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub energy: f64,
    pub config: Config,
    pub seed: u64,
    pub restart_index: usize,
    pub best_step: usize,
}

impl Solution {
    pub fn spins(&self) -> Option<&SpinConfig> {
        match &self.config {
            Config::Spins(s) => Some(s),
            Config::Bits(_) => None,
        }
    }

    pub fn bits(&self) -> Option<&BinaryVector> {
        match &self.config {
            Config::Bits(q) => Some(q),
            Config::Spins(_) => None,
        }
    }
}

/// `Σ_i Σ_j J_ij s_i s_j + offset`.
pub fn ising_energy(p: &IsingProblem, s: &SpinConfig) -> Result<f64> {
    check_len(p.n, s.len())?;
    Ok(p.energy_of(&s.0))
}

/// `Σ_i Σ_j Q_ij q_i q_j`, independent of the problem's direction.
pub fn qubo_value(p: &QuboProblem, q: &BinaryVector) -> Result<f64> {
    check_len(p.n, q.len())?;
    Ok(p.value_of(&q.0))
}

/// Compile a QUBO to an Ising problem on `n + 1` spins.
///
/// Spin 0 is an ancilla that carries the linear fields. For every bit vector
/// `q`, the compiled energy at `bits_to_ancilla_spins(q)` equals
/// `qubo_value(p, q)` for a minimizing QUBO and `-qubo_value(p, q)` for a
/// maximizing one.
pub fn qubo_to_ising(p: &QuboProblem) -> IsingProblem {
    let n = p.n;
    let m = n + 1;
    let sign = p.direction.sign();
    let mut couplings = vec![0.0; m * m];
    let mut offset = 0.0;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let v = sign * p.entry(i, j);
            row_sum += v;
            offset += 0.25 * v;
            if i != j {
                couplings[(i + 1) * m + (j + 1)] = 0.25 * v;
            }
        }
        offset += 0.25 * sign * p.entry(i, i);
        // The linear field 0.5·row_sum becomes a pair counted twice.
        couplings[i + 1] = 0.25 * row_sum;
        couplings[(i + 1) * m] = 0.25 * row_sum;
    }
    IsingProblem {
        n: m,
        couplings,
        offset,
    }
}

fn spins_from_mask(n: usize, mask: u64) -> Vec<i8> {
    // Spin 0 is pinned to +1; spin 1 is the most significant bit of the mask.
    let mut s = vec![1i8; n];
    for (i, spin) in s.iter_mut().enumerate().skip(1) {
        if (mask >> (n - 1 - i)) & 1 == 0 {
            *spin = -1;
        }
    }
    s
}

fn best_in_range<F>(lo: u64, hi: u64, better: impl Fn(f64, f64) -> bool, eval: F) -> (f64, u64)
where
    F: Fn(u64) -> f64,
{
    let mut best = (eval(lo), lo);
    for mask in (lo + 1)..hi {
        let e = eval(mask);
        if better(e, best.0) {
            best = (e, mask);
        }
    }
    best
}

/// Exhaustive search over `total` masks, split across workers. The earliest
/// mask wins ties, whatever the partitioning.
fn exhaustive<F>(total: u64, better: impl Fn(f64, f64) -> bool + Sync, eval: F) -> (f64, u64)
where
    F: Fn(u64) -> f64 + Sync,
{
    const CHUNK: u64 = 1 << 12;
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| best_in_range(c * CHUNK, ((c + 1) * CHUNK).min(total), &better, &eval))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if better(b.0, a.0) { b } else { a })
        .expect("at least one chunk")
}

fn check_capacity(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity {
            what: "brute-force search",
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(())
}

/// Exact ground state by enumeration.
///
/// Ising energies are invariant under a global flip, so only configurations
/// with spin 0 equal to `+1` are enumerated; ties go to the lexicographically
/// smallest of those (with `-1 < +1`).
pub fn brute_force_ising(p: &IsingProblem) -> Result<Solution> {
    check_capacity(p.n)?;
    let n = p.n;
    let (energy, mask) = exhaustive(1u64 << (n - 1), |a, b| a < b, |mask| {
        p.energy_of(&spins_from_mask(n, mask))
    });
    Ok(Solution {
        energy,
        config: Config::Spins(SpinConfig(spins_from_mask(n, mask))),
        seed: 0,
        restart_index: 0,
        best_step: 0,
    })
}

/// Exact optimum of a QUBO in its own direction; ties go to the
/// lexicographically smallest bit pattern.
pub fn brute_force_qubo(p: &QuboProblem) -> Result<Solution> {
    check_capacity(p.n)?;
    let n = p.n;
    let direction = p.direction;
    let (energy, mask) = exhaustive(
        1u64 << n,
        move |a, b| direction.better(a, b),
        |mask| p.value_of(&BinaryVector::from_mask(n, mask).0),
    );
    Ok(Solution {
        energy,
        config: Config::Bits(BinaryVector::from_mask(n, mask)),
        seed: 0,
        restart_index: 0,
        best_step: 0,
    })
}

pub fn brute_force_ground_state(p: &Problem) -> Result<Solution> {
    match p {
        Problem::Ising(p) => brute_force_ising(p),
        Problem::Qubo(p) => brute_force_qubo(p),
    }
}

/// A weighted undirected edge `(u, v, w)`.
pub type Edge = (usize, usize, f64);

/// MAX-CUT as Ising: `J_uv = w_uv / 2`, so that
/// `cut(s) = (W_total - E(s)) / 2`. Parallel edges are summed.
pub fn maxcut_to_ising(edges: &[Edge], n: usize) -> Result<IsingProblem> {
    if n == 0 {
        return Err(Error::InvalidInput("graph must have at least one vertex".into()));
    }
    let mut couplings = vec![0.0; n * n];
    for &(u, v, w) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidInput(format!(
                "edge ({u}, {v}) references a vertex outside 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
        }
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!("edge ({u}, {v}) has a non-finite weight")));
        }
        couplings[u * n + v] += 0.5 * w;
        couplings[v * n + u] += 0.5 * w;
    }
    IsingProblem::new(n, couplings, 0.0)
}

/// Unit-weight cycle `0 - 1 - ... - (n-1) - 0`.
pub fn cycle_graph(n: usize) -> Vec<Edge> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1, 1.0)],
        _ => (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect(),
    }
}

/// Each pair becomes an edge with probability `density`, weighted `1` or,
/// when `signed`, `±1` with equal odds. `density >= 1` gives the complete
/// graph.
pub fn random_graph(n: usize, density: f64, signed: bool, seed: u64) -> Vec<Edge> {
    let mut rng = derived_stream(seed, 0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if density < 1.0 && rng.gen::<f64>() >= density {
                continue;
            }
            let w = if signed && rng.gen::<bool>() { -1.0 } else { 1.0 };
            edges.push((i, j, w));
        }
    }
    edges
}

/// Couplings `J_ij ~ Uniform(-1, 1)` on each pair with probability `density`.
pub fn random_ising(n: usize, density: f64, seed: u64) -> Result<IsingProblem> {
    let mut rng = derived_stream(seed, 0);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if density < 1.0 && rng.gen::<f64>() >= density {
                continue;
            }
            pairs.push((i, j, rng.gen_range(-1.0..1.0)));
        }
    }
    IsingProblem::from_pairs(n, pairs, 0.0)
}

/// Entries `Q_ij ~ Uniform(-1, 1)` for `i <= j`, each present with
/// probability `density`.
pub fn random_qubo(n: usize, density: f64, direction: Direction, seed: u64) -> Result<QuboProblem> {
    let mut rng = derived_stream(seed, 0);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i..n {
            if density < 1.0 && rng.gen::<f64>() >= density {
                continue;
            }
            pairs.push((i, j, rng.gen_range(-1.0..1.0)));
        }
    }
    QuboProblem::from_pairs(n, pairs, direction)
}

pub fn total_weight(edges: &[Edge]) -> f64 {
    edges.iter().map(|e| e.2).sum()
}

/// Weight of edges whose endpoints have opposite spins.
pub fn cut_value(edges: &[Edge], s: &SpinConfig) -> f64 {
    edges
        .iter()
        .filter(|&&(u, v, _)| s.0[u] != s.0[v])
        .map(|e| e.2)
        .sum()
}

/// Cut weight implied by an Ising energy of a problem from [`maxcut_to_ising`].
pub fn cut_from_energy(total_weight: f64, energy: f64) -> f64 {
    0.5 * (total_weight - energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ising(n: usize, seed: u64) -> IsingProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
        IsingProblem::from_pairs(n, pairs, 0.0).unwrap()
    }

    fn random_qubo(n: usize, seed: u64, direction: Direction) -> QuboProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i..n {
                pairs.push((i, j, rng.gen_range(-2.0..2.0)));
            }
        }
        QuboProblem::from_pairs(n, pairs, direction).unwrap()
    }

    #[test]
    fn zero_coupling_energy() {
        let p = IsingProblem::zeros(4).unwrap();
        let s = SpinConfig::new(vec![1, -1, -1, 1]).unwrap();
        assert_eq!(ising_energy(&p, &s).unwrap(), 0.0);
    }

    #[test]
    fn pair_counted_twice() {
        let p = IsingProblem::from_pairs(2, [(0, 1, 0.5)], 0.0).unwrap();
        let s = SpinConfig::all_up(2);
        assert_eq!(ising_energy(&p, &s).unwrap(), 1.0);
    }

    #[test]
    fn energy_matches_term_enumeration() {
        let p = random_ising(3, 7);
        let s = [1i8, -1, 1];
        let mut expected = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                expected += p.coupling(i, j) * f64::from(s[i]) * f64::from(s[j]);
            }
        }
        let got = ising_energy(&p, &SpinConfig::new(s.to_vec()).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn energy_dimension_mismatch() {
        let p = IsingProblem::zeros(3).unwrap();
        let err = ising_energy(&p, &SpinConfig::all_up(2)).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 3, actual: 2 }));
    }

    #[test]
    fn qubo_values() {
        let p = QuboProblem::new(2, vec![1.0, 2.0, 2.0, 4.0], Direction::Minimize).unwrap();
        assert_eq!(qubo_value(&p, &BinaryVector::zeros(2)).unwrap(), 0.0);
        let q = BinaryVector::new(vec![1, 1]).unwrap();
        assert_eq!(qubo_value(&p, &q).unwrap(), 9.0);
    }

    #[test]
    fn qubo_value_matches_term_enumeration() {
        let p = random_qubo(4, 3, Direction::Minimize);
        let q = BinaryVector::new(vec![1, 0, 1, 1]).unwrap();
        let mut expected = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                expected += p.entry(i, j) * f64::from(q.0[i]) * f64::from(q.0[j]);
            }
        }
        assert!((qubo_value(&p, &q).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn compile_zero_qubo() {
        let p = QuboProblem::new(3, vec![0.0; 9], Direction::Minimize).unwrap();
        let ising = qubo_to_ising(&p);
        assert_eq!(ising.n(), 4);
        assert!(ising.couplings().iter().all(|&v| v == 0.0));
        assert_eq!(ising.offset(), 0.0);
    }

    #[test]
    fn compile_identity_small() {
        let p = QuboProblem::new(2, vec![1.0, 2.0, 2.0, 4.0], Direction::Minimize).unwrap();
        let ising = qubo_to_ising(&p);
        for mask in 0..4 {
            let q = BinaryVector::from_mask(2, mask);
            let e = ising_energy(&ising, &bits_to_ancilla_spins(&q)).unwrap();
            assert!((e - qubo_value(&p, &q).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn compile_identity_exhaustive_n8() {
        for direction in [Direction::Minimize, Direction::Maximize] {
            let p = random_qubo(8, 11, direction);
            let ising = qubo_to_ising(&p);
            for mask in 0..256 {
                let q = BinaryVector::from_mask(8, mask);
                let e = ising_energy(&ising, &bits_to_ancilla_spins(&q)).unwrap();
                let v = direction.sign() * qubo_value(&p, &q).unwrap();
                assert!((e - v).abs() <= 1e-9 * v.abs().max(1.0), "mask {mask}");
            }
        }
    }

    #[test]
    fn conversions() {
        let s = SpinConfig::new(vec![1, -1]).unwrap();
        assert_eq!(spins_to_bits(&s).as_slice(), &[1, 0]);
        let q = BinaryVector::new(vec![0, 1, 1]).unwrap();
        assert_eq!(bits_to_spins(&q).as_slice(), &[-1, 1, 1]);
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(SpinConfig::new(vec![1, 0]).is_err());
        assert!(BinaryVector::new(vec![2]).is_err());
        assert!(IsingProblem::new(2, vec![1.0, 0.0, 0.0, 0.0], 0.0).is_err());
        assert!(IsingProblem::new(2, vec![0.0, 1.0, 2.0, 0.0], 0.0).is_err());
        assert!(IsingProblem::new(2, vec![0.0, f64::NAN, f64::NAN, 0.0], 0.0).is_err());
        assert!(IsingProblem::new(0, vec![], 0.0).is_err());
        assert!(IsingProblem::from_pairs(3, [(0, 1, 1.0), (1, 0, 2.0)], 0.0).is_err());
    }

    #[test]
    fn antiferromagnetic_pair() {
        let p = IsingProblem::from_pairs(2, [(0, 1, 1.0)], 0.0).unwrap();
        let sol = brute_force_ising(&p).unwrap();
        assert_eq!(sol.energy, -2.0);
        assert_eq!(sol.spins().unwrap().as_slice(), &[1, -1]);
    }

    #[test]
    fn ferromagnetic_pair() {
        let p = IsingProblem::from_pairs(2, [(0, 1, -1.0)], 0.0).unwrap();
        let sol = brute_force_ising(&p).unwrap();
        assert_eq!(sol.energy, -2.0);
        assert_eq!(sol.spins().unwrap().as_slice(), &[1, 1]);
    }

    #[test]
    fn brute_force_refuses_large() {
        let p = IsingProblem::zeros(25).unwrap();
        assert!(matches!(brute_force_ising(&p), Err(Error::Capacity { .. })));
    }

    #[test]
    fn brute_force_single_spin() {
        let p = IsingProblem::zeros(1).unwrap();
        let sol = brute_force_ising(&p).unwrap();
        assert_eq!(sol.spins().unwrap().as_slice(), &[1]);
    }

    #[test]
    fn qubo_tie_break_is_lexicographic() {
        // Every pattern is optimal for the zero QUBO.
        let p = QuboProblem::new(3, vec![0.0; 9], Direction::Maximize).unwrap();
        let sol = brute_force_qubo(&p).unwrap();
        assert_eq!(sol.bits().unwrap().as_slice(), &[0, 0, 0]);
    }

    #[test]
    fn maxcut_single_edge() {
        let edges = [(0, 1, 1.0)];
        let p = maxcut_to_ising(&edges, 2).unwrap();
        let s = SpinConfig::new(vec![1, -1]).unwrap();
        let e = ising_energy(&p, &s).unwrap();
        assert_eq!(cut_from_energy(total_weight(&edges), e), 1.0);
        assert_eq!(cut_value(&edges, &s), 1.0);
    }

    #[test]
    fn maxcut_rejects_bad_edges() {
        assert!(maxcut_to_ising(&[(0, 0, 1.0)], 2).is_err());
        assert!(maxcut_to_ising(&[(0, 2, 1.0)], 2).is_err());
    }

    #[test]
    fn ancilla_decoding_normalizes() {
        let s = SpinConfig::new(vec![-1, -1, 1]).unwrap();
        assert_eq!(ancilla_spins_to_bits(&s).as_slice(), &[1, 0]);
    }
}
