//! Restricted Boltzmann machine over binary vectors.
//!
//! Energy `E(v, h) = −vᵀWh − b_vᵀv − b_hᵀh`. Both conditionals factorize:
//! `P(h_j = 1 | v) = σ(b_h[j] + Σ_i v_i W_ij)` and symmetrically for `v`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::problem::BinaryVector;
use crate::rng::{derived_stream, Stream};

/// Largest `n_v + n_h` accepted by [`exact_distribution`].
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmModel {
    pub n_v: usize,
    pub n_h: usize,
    /// Row-major `n_v × n_h`.
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    pub b_v: Vec<f64>,
    pub b_h: Vec<f64>,
}

impl RbmModel {
    pub fn new(n_v: usize, n_h: usize, w: Vec<f64>, b_v: Vec<f64>, b_h: Vec<f64>) -> Result<Self> {
        let m = RbmModel { n_v, n_h, w, b_v, b_h };
        m.validate()?;
        Ok(m)
    }

    pub fn zeros(n_v: usize, n_h: usize) -> Result<Self> {
        RbmModel::new(n_v, n_h, vec![0.0; n_v * n_h], vec![0.0; n_v], vec![0.0; n_h])
    }

    /// Weights `~ Uniform(−scale, scale)`, zero biases.
    pub fn random(n_v: usize, n_h: usize, scale: f64, seed: u64) -> Result<Self> {
        let mut rng = derived_stream(seed, 0);
        let w = (0..n_v * n_h)
            .map(|_| if scale > 0.0 { rng.gen_range(-scale..scale) } else { 0.0 })
            .collect();
        RbmModel::new(n_v, n_h, w, vec![0.0; n_v], vec![0.0; n_h])
    }

    fn validate(&self) -> Result<()> {
        if self.n_v == 0 || self.n_h == 0 {
            return Err(Error::InvalidInput("RBM needs at least one visible and one hidden unit".into()));
        }
        check_len(self.n_v * self.n_h, self.w.len())?;
        check_len(self.n_v, self.b_v.len())?;
        check_len(self.n_h, self.b_h.len())?;
        if self.w.iter().chain(&self.b_v).chain(&self.b_h).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("RBM has non-finite parameters".into()));
        }
        Ok(())
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n_h + j]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RbmModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    /// `P(h_j = 1 | v)` for every hidden unit.
    pub fn hidden_probs(&self, v: &[u8]) -> Vec<f64> {
        let mut act = self.b_h.clone();
        for (i, _) in v.iter().enumerate().filter(|(_, &b)| b == 1) {
            for (a, w) in act.iter_mut().zip(&self.w[i * self.n_h..(i + 1) * self.n_h]) {
                *a += w;
            }
        }
        act.into_iter().map(sigmoid).collect()
    }

    /// `P(v_i = 1 | h)` for every visible unit.
    pub fn visible_probs(&self, h: &[u8]) -> Vec<f64> {
        (0..self.n_v)
            .map(|i| {
                let row = &self.w[i * self.n_h..(i + 1) * self.n_h];
                let act: f64 = row
                    .iter()
                    .zip(h)
                    .filter(|(_, &hj)| hj == 1)
                    .map(|(w, _)| w)
                    .sum();
                sigmoid(self.b_v[i] + act)
            })
            .collect()
    }

    /// `F(v) = −b_vᵀv − Σ_j log(1 + exp(b_h[j] + Σ_i v_i W_ij))`; lower is
    /// more probable.
    pub fn free_energy(&self, v: &BinaryVector) -> Result<f64> {
        check_len(self.n_v, v.len())?;
        let mut act = self.b_h.clone();
        let mut linear = 0.0;
        for i in v.ones() {
            linear += self.b_v[i];
            for (a, w) in act.iter_mut().zip(&self.w[i * self.n_h..(i + 1) * self.n_h]) {
                *a += w;
            }
        }
        Ok(-linear - act.into_iter().map(softplus).sum::<f64>())
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn bernoulli(probs: &[f64], rng: &mut impl Rng) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(rng.gen::<f64>() < p)).collect()
}

#[allow(clippy::needless_range_loop)]
pub fn rbm_energy(m: &RbmModel, v: &BinaryVector, h: &BinaryVector) -> Result<f64> {
    check_len(m.n_v, v.len())?;
    check_len(m.n_h, h.len())?;
    let (v, h) = (v.as_slice(), h.as_slice());
    let mut e = 0.0;
    for i in 0..m.n_v {
        if v[i] == 0 {
            continue;
        }
        e -= m.b_v[i];
        for j in 0..m.n_h {
            if h[j] == 1 {
                e -= m.weight(i, j);
            }
        }
    }
    for j in 0..m.n_h {
        if h[j] == 1 {
            e -= m.b_h[j];
        }
    }
    Ok(e)
}

/// One block Gibbs sweep: `h ~ P(h | v)`, then `v' ~ P(v | h)`.
pub fn gibbs_step(
    m: &RbmModel,
    v: &BinaryVector,
    rng: &mut impl Rng,
) -> Result<(BinaryVector, BinaryVector)> {
    check_len(m.n_v, v.len())?;
    let h = bernoulli(&m.hidden_probs(v.as_slice()), rng);
    let v_next = bernoulli(&m.visible_probs(&h), rng);
    Ok((BinaryVector::new(v_next)?, BinaryVector::new(h)?))
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `P(v)` for every visible configuration, indexed like
/// [`BinaryVector::from_mask`]. Computed by summing `exp(−E(v, h))` over every
/// hidden configuration.
pub fn exact_distribution(m: &RbmModel) -> Result<Vec<f64>> {
    if m.n_v + m.n_h > EXACT_LIMIT {
        return Err(Error::Capacity {
            what: "exact RBM distribution",
            size: m.n_v + m.n_h,
            limit: EXACT_LIMIT,
        });
    }
    let hidden: Vec<BinaryVector> = (0..1u64 << m.n_h)
        .map(|mask| BinaryVector::from_mask(m.n_h, mask))
        .collect();
    let log_marginals = (0..1u64 << m.n_v)
        .into_par_iter()
        .map(|mask| {
            let v = BinaryVector::from_mask(m.n_v, mask);
            let terms = hidden
                .iter()
                .map(|h| rbm_energy(m, &v, h).map(|e| -e))
                .collect::<Result<Vec<f64>>>()?;
            Ok(log_sum_exp(&terms))
        })
        .collect::<Result<Vec<f64>>>()?;
    let log_z = log_sum_exp(&log_marginals);
    Ok(log_marginals.into_iter().map(|l| (l - log_z).exp()).collect())
}

/// Run `chains` independent chains from uniform random starts, discard
/// `burn_in` sweeps, then keep every `thin`-th visible state. Chain `c`
/// contributes samples `c·per_chain ..` of the output, where
/// `per_chain = ceil(count / chains)`, and the list is cut to `count`.
pub fn rbm_sample(
    m: &RbmModel,
    chains: usize,
    burn_in: usize,
    thin: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<BinaryVector>> {
    if chains == 0 || thin == 0 || count == 0 {
        return Err(Error::InvalidParams("chains, thin and count must be positive".into()));
    }
    let per_chain = count.div_ceil(chains);
    let samples = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = derived_stream(seed, c as u64);
            let mut v = BinaryVector::new((0..m.n_v).map(|_| rng.gen_range(0..2)).collect())?;
            for _ in 0..burn_in {
                v = gibbs_step(m, &v, &mut rng)?.0;
            }
            let mut out = Vec::with_capacity(per_chain);
            while out.len() < per_chain {
                for _ in 0..thin {
                    v = gibbs_step(m, &v, &mut rng)?.0;
                }
                out.push(v.clone());
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(samples.into_iter().flatten().take(count).collect())
}

/// Sufficient statistics `E[v hᵀ]`, `E[v]`, `E[h]` with hidden units replaced
/// by their conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistics {
    pub vh: Vec<f64>,
    pub v: Vec<f64>,
    pub h: Vec<f64>,
}

impl Statistics {
    fn zeros(m: &RbmModel) -> Self {
        Statistics {
            vh: vec![0.0; m.n_v * m.n_h],
            v: vec![0.0; m.n_v],
            h: vec![0.0; m.n_h],
        }
    }

    fn accumulate(&mut self, m: &RbmModel, v: &[u8], weight: f64) {
        let ph = m.hidden_probs(v);
        for (i, _) in v.iter().enumerate().filter(|(_, &b)| b == 1) {
            self.v[i] += weight;
            for (s, p) in self.vh[i * m.n_h..(i + 1) * m.n_h].iter_mut().zip(&ph) {
                *s += weight * p;
            }
        }
        for (s, p) in self.h.iter_mut().zip(&ph) {
            *s += weight * p;
        }
    }
}

/// Statistics of a weighted set of visible vectors; weights should sum to 1.
pub fn weighted_statistics(m: &RbmModel, data: &[(BinaryVector, f64)]) -> Result<Statistics> {
    let mut stats = Statistics::zeros(m);
    for (v, w) in data {
        check_len(m.n_v, v.len())?;
        stats.accumulate(m, v.as_slice(), *w);
    }
    Ok(stats)
}

/// Statistics under the model's own exact distribution.
pub fn model_statistics(m: &RbmModel) -> Result<Statistics> {
    let dist = exact_distribution(m)?;
    let weighted: Vec<_> = dist
        .into_iter()
        .enumerate()
        .map(|(mask, p)| (BinaryVector::from_mask(m.n_v, mask as u64), p))
        .collect();
    weighted_statistics(m, &weighted)
}

/// One CD-k update: positive statistics from `batch`, negative statistics
/// after `k` Gibbs sweeps started at each batch vector.
pub fn cd_update(
    m: &RbmModel,
    batch: &[BinaryVector],
    k: usize,
    lr: f64,
    rng: &mut Stream,
) -> Result<RbmModel> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("CD batch is empty".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParams("CD needs k >= 1".into()));
    }
    let weight = 1.0 / batch.len() as f64;
    let mut positive = Statistics::zeros(m);
    let mut negative = Statistics::zeros(m);
    for v in batch {
        check_len(m.n_v, v.len())?;
        positive.accumulate(m, v.as_slice(), weight);
        let mut chain = v.clone();
        for _ in 0..k {
            chain = gibbs_step(m, &chain, rng)?.0;
        }
        negative.accumulate(m, chain.as_slice(), weight);
    }
    let mut next = m.clone();
    let step = |params: &mut [f64], pos: &[f64], neg: &[f64]| {
        for ((p, a), b) in params.iter_mut().zip(pos).zip(neg) {
            *p += lr * (a - b);
        }
    };
    step(&mut next.w, &positive.vh, &negative.vh);
    step(&mut next.b_v, &positive.v, &negative.v);
    step(&mut next.b_h, &positive.h, &negative.h);
    next.validate().map_err(|_| Error::Numeric("CD update produced non-finite parameters".into()))?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdParams {
    pub hidden: usize,
    pub k: usize,
    pub lr: f64,
    pub updates: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for CdParams {
    fn default() -> Self {
        CdParams {
            hidden: 8,
            k: 1,
            lr: 0.01,
            updates: 2000,
            batch_size: 32,
            init_scale: 0.01,
            seed: 0,
        }
    }
}

/// Train a fresh RBM on `data` with `updates` CD-k steps over cyclic
/// minibatches.
pub fn cd_train(data: &[BinaryVector], params: &CdParams) -> Result<RbmModel> {
    let n_v = data
        .first()
        .map(BinaryVector::len)
        .ok_or_else(|| Error::InvalidInput("training data is empty".into()))?;
    if params.batch_size == 0 {
        return Err(Error::InvalidParams("batch_size must be positive".into()));
    }
    let mut model = RbmModel::random(n_v, params.hidden, params.init_scale, params.seed)?;
    let mut rng = derived_stream(params.seed, 1);
    let mut cursor = 0;
    let mut batch = Vec::with_capacity(params.batch_size);
    for _ in 0..params.updates {
        batch.clear();
        for _ in 0..params.batch_size.min(data.len()) {
            batch.push(data[cursor].clone());
            cursor = (cursor + 1) % data.len();
        }
        model = cd_update(&model, &batch, params.k, params.lr, &mut rng)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[u8]) -> BinaryVector {
        BinaryVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn energies() {
        let zero = RbmModel::zeros(3, 2).unwrap();
        assert_eq!(rbm_energy(&zero, &bits(&[1, 0, 1]), &bits(&[1, 1])).unwrap(), 0.0);
        let single = RbmModel::new(1, 1, vec![1.0], vec![0.0], vec![0.0]).unwrap();
        assert_eq!(rbm_energy(&single, &bits(&[1]), &bits(&[1])).unwrap(), -1.0);
        assert!(rbm_energy(&single, &bits(&[1, 0]), &bits(&[1])).is_err());
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = RbmModel::zeros(3, 2).unwrap();
        let dist = exact_distribution(&m).unwrap();
        assert!(dist.iter().all(|p| (p - 0.125).abs() < 1e-15));
        assert!(m.hidden_probs(&[1, 0, 1]).iter().all(|&p| p == 0.5));
    }

    #[test]
    fn single_visible_bias() {
        let m = RbmModel::new(1, 1, vec![0.0], vec![3f64.ln()], vec![0.0]).unwrap();
        let dist = exact_distribution(&m).unwrap();
        assert!((dist[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn saturated_weight() {
        let m = RbmModel::new(1, 1, vec![50.0], vec![0.0], vec![0.0]).unwrap();
        let mut rng = derived_stream(0, 0);
        for _ in 0..100 {
            let (_, h) = gibbs_step(&m, &bits(&[1]), &mut rng).unwrap();
            assert_eq!(h.as_slice(), &[1]);
        }
    }

    #[test]
    fn capacity_limit() {
        let m = RbmModel::zeros(11, 10).unwrap();
        assert!(matches!(exact_distribution(&m), Err(Error::Capacity { .. })));
    }

    #[test]
    fn free_energy_matches_hidden_sum() {
        let m = RbmModel::new(2, 2, vec![0.5, -1.0, 0.25, 2.0], vec![0.1, -0.3], vec![0.2, 0.0]).unwrap();
        for mask in 0..4 {
            let v = BinaryVector::from_mask(2, mask);
            let sum: f64 = (0..4)
                .map(|hm| (-rbm_energy(&m, &v, &BinaryVector::from_mask(2, hm)).unwrap()).exp())
                .sum();
            assert!((m.free_energy(&v).unwrap() + sum.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let m = RbmModel::random(3, 2, 0.5, 1).unwrap();
        let batch = vec![bits(&[1, 0, 1]), bits(&[0, 1, 1])];
        let mut rng = derived_stream(0, 0);
        assert_eq!(cd_update(&m, &batch, 1, 0.0, &mut rng).unwrap(), m);
        assert!(cd_update(&m, &[], 1, 0.1, &mut rng).is_err());
        assert!(cd_update(&m, &batch, 0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = RbmModel::random(4, 3, 1.0, 2).unwrap();
        let a = rbm_sample(&m, 3, 10, 2, 20, 5).unwrap();
        assert_eq!(a.len(), 20);
        assert_eq!(a, rbm_sample(&m, 3, 10, 2, 20, 5).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let m = RbmModel::random(3, 2, 0.5, 4).unwrap();
        let json = m.to_json();
        assert!(json.contains("\"W\""));
        assert_eq!(RbmModel::from_json(&json).unwrap(), m);
        assert!(RbmModel::from_json(r#"{"n_v":2,"n_h":1,"W":[1],"b_v":[0,0],"b_h":[0]}"#).is_err());
    }
}
