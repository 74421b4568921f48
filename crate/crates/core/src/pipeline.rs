//! Property optimization over binary vectors: scalarize the targets, fit the
//! factorization surrogate, compile it to an Ising problem, minimize with
//! bSB and rank the configurations found along the way.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use crate::bsb::{bsb_solve_with_improvements, BsbParams};
use crate::error::{check_len, Error, Result, Stage};
use crate::fm::{fm_fit, fm_to_qubo, FactorModel, FitParams, PropertyDataset, TargetTransform};
use crate::problem::{ancilla_spins_to_bits, qubo_to_ising, BinaryVector, Direction, QuboProblem};
use crate::rbm::RbmModel;
use crate::rng::derived_stream;

/// Largest bit width the pipeline accepts.
pub const MAX_BITS: usize = 4096;

/// Weighted sum of the target columns, e.g. weights `(1, 10)` for
/// "activity + 10 × drug-likeness".
pub fn scalarize(data: &PropertyDataset, weights: &[f64]) -> Result<PropertyDataset> {
    if weights.len() != data.columns() {
        return Err(Error::InvalidInput(format!(
            "{} weights given for {} target columns",
            weights.len(),
            data.columns()
        )));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite".into()));
    }
    let target = (0..data.len())
        .map(|r| data.targets(r).iter().zip(weights).map(|(t, w)| t * w).sum())
        .collect();
    data.with_target("score", target)
}

#[derive(Debug, Clone)]
pub struct RbmFilter {
    pub model: RbmModel,
    /// Fraction of candidates kept, the most plausible (lowest free energy)
    /// first.
    pub keep_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub rank: usize,
    pub direction: Direction,
    /// One weight per target column; empty means `[1.0]` for single-target data.
    pub weights: Vec<f64>,
    pub fit: FitParams,
    pub solver: BsbParams,
    pub top_k: usize,
    pub rbm_filter: Option<RbmFilter>,
    /// Overrides the seeds in `fit` and `solver`.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rank: 8,
            direction: Direction::Maximize,
            weights: Vec::new(),
            fit: FitParams::default(),
            solver: BsbParams {
                restarts: 16,
                ..BsbParams::default()
            },
            top_k: 10,
            rbm_filter: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub bits: BinaryVector,
    /// Surrogate prediction in original target units.
    pub predicted: f64,
    /// Energy of the compiled Ising problem at this configuration.
    pub energy: f64,
    pub restart: usize,
}

#[derive(Debug, Clone)]
pub struct RankedCandidates {
    pub direction: Direction,
    pub candidates: Vec<Candidate>,
    pub model: FactorModel,
}

impl RankedCandidates {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

/// Scalarize, orient and fit: the model's transform maps original scores to
/// non-negative values where larger is better. Empty `weights` means `[1.0]`
/// for single-target data.
pub fn fit_surrogate(
    data: &PropertyDataset,
    weights: &[f64],
    direction: Direction,
    rank: usize,
    fit: &FitParams,
) -> Result<FactorModel> {
    let weights = if weights.is_empty() && data.columns() == 1 {
        vec![1.0]
    } else {
        weights.to_vec()
    };
    let scored = scalarize(data, &weights).map_err(|e| e.at(Stage::Scalarize))?;

    let targets = scored.target_column().map_err(|e| e.at(Stage::Transform))?;
    let transform = TargetTransform::for_direction(&targets, direction);
    let shifted = scored
        .with_target("score", targets.iter().map(|&y| transform.apply(y)).collect())
        .map_err(|e| e.at(Stage::Transform))?;

    let mut model = fm_fit(&shifted, rank, fit).map_err(|e| e.at(Stage::Fit))?;
    model.transform = transform;
    Ok(model)
}

/// Run the full fit-and-solve pass.
pub fn optimize_property(data: &PropertyDataset, cfg: &PipelineConfig) -> Result<RankedCandidates> {
    if data.n() > MAX_BITS {
        return Err(Error::Capacity {
            what: "pipeline bit width",
            size: data.n(),
            limit: MAX_BITS,
        });
    }
    if cfg.top_k == 0 {
        return Err(Error::InvalidParams("top_k must be at least 1".into()));
    }

    let fit = FitParams {
        seed: cfg.seed,
        ..cfg.fit.clone()
    };
    let model = fit_surrogate(data, &cfg.weights, cfg.direction, cfg.rank, &fit)?;

    // Larger transformed values are always better.
    let qubo = fm_to_qubo(&model, Direction::Maximize);
    let ising = qubo_to_ising(&qubo);

    let solver = BsbParams {
        seed: cfg.seed,
        ..cfg.solver.clone()
    };
    let (_, improvements) =
        bsb_solve_with_improvements(&ising, &solver).map_err(|e| e.at(Stage::Solve))?;

    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    for imp in improvements {
        let bits = ancilla_spins_to_bits(&imp.spins);
        if !seen.insert(bits.clone()) {
            continue;
        }
        let predicted = model.predict_original(&bits).map_err(|e| e.at(Stage::Rank))?;
        candidates.push(Candidate {
            bits,
            predicted,
            energy: imp.energy,
            restart: imp.restart_index,
        });
    }
    rank_candidates(&mut candidates, cfg.direction);
    candidates.truncate(cfg.top_k);

    if let Some(filter) = &cfg.rbm_filter {
        candidates = apply_rbm_filter(candidates, filter).map_err(|e| e.at(Stage::RbmFilter))?;
    }

    Ok(RankedCandidates {
        direction: cfg.direction,
        candidates,
        model,
    })
}

/// Best predicted value first; ties broken by bit pattern.
fn rank_candidates(candidates: &mut [Candidate], direction: Direction) {
    candidates.sort_by(|a, b| {
        let ord = match direction {
            Direction::Maximize => b.predicted.total_cmp(&a.predicted),
            Direction::Minimize => a.predicted.total_cmp(&b.predicted),
        };
        ord.then_with(|| a.bits.cmp(&b.bits))
    });
}

fn apply_rbm_filter(candidates: Vec<Candidate>, filter: &RbmFilter) -> Result<Vec<Candidate>> {
    if !(filter.keep_fraction > 0.0 && filter.keep_fraction <= 1.0) {
        return Err(Error::InvalidParams("keep_fraction must lie in (0, 1]".into()));
    }
    let scores = candidates
        .iter()
        .map(|c| filter.model.free_energy(&c.bits))
        .collect::<Result<Vec<f64>>>()?;
    let keep = ((candidates.len() as f64) * filter.keep_fraction).ceil() as usize;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let kept: HashSet<usize> = order.into_iter().take(keep).collect();
    Ok(candidates
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| kept.contains(&i).then_some(c))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// `qᵀQ*q` with `Q* = W·Wᵀ`, `W` an `n × 4` matrix of `Uniform(−1, 1)`.
    Quadratic,
    /// Symmetric `Q*` with about three nonzero entries per row, `Uniform(−1, 1)`.
    SparseQuadratic,
    /// Number of ones.
    OneMax,
}

impl std::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(OracleKind::Quadratic),
            "sparse-quadratic" => Ok(OracleKind::SparseQuadratic),
            "onemax" => Ok(OracleKind::OneMax),
            other => Err(Error::InvalidInput(format!("unknown oracle kind `{other}`"))),
        }
    }
}

/// Rank of the factor matrix behind [`OracleKind::Quadratic`].
pub const QUADRATIC_ORACLE_RANK: usize = 4;

/// A deterministic black-box property over bit vectors.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    kind: OracleKind,
    n: usize,
    matrix: Option<QuboProblem>,
}

impl SyntheticOracle {
    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The hidden coupling matrix of quadratic kinds.
    pub fn matrix(&self) -> Option<&QuboProblem> {
        self.matrix.as_ref()
    }

    pub fn eval(&self, q: &BinaryVector) -> Result<f64> {
        check_len(self.n, q.len())?;
        Ok(match &self.matrix {
            Some(m) => crate::problem::qubo_value(m, q)?,
            None => q.count_ones() as f64,
        })
    }

    /// `rows` uniformly random bit vectors labelled by the oracle.
    pub fn dataset(&self, rows: usize, seed: u64) -> Result<PropertyDataset> {
        let mut rng = derived_stream(seed, 2);
        let mut bits = Vec::with_capacity(rows);
        let mut targets = Vec::with_capacity(rows);
        for _ in 0..rows {
            let q = BinaryVector::new((0..self.n).map(|_| rng.gen_range(0..2)).collect())?;
            targets.push(self.eval(&q)?);
            bits.push(q);
        }
        PropertyDataset::single(bits, targets)
    }
}

pub fn synthetic_oracle(kind: OracleKind, n: usize, seed: u64) -> Result<SyntheticOracle> {
    if n == 0 {
        return Err(Error::InvalidInput("oracle needs n >= 1".into()));
    }
    let mut rng = derived_stream(seed, 3);
    let matrix = match kind {
        OracleKind::OneMax => None,
        OracleKind::Quadratic => {
            let r = QUADRATIC_ORACLE_RANK;
            let w: Vec<f64> = (0..n * r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let factors = FactorModel::new(n, r, w)?;
            Some(fm_to_qubo(&factors, Direction::Maximize))
        }
        OracleKind::SparseQuadratic => {
            let density = (3.0 / n as f64).min(1.0);
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if rng.gen::<f64>() < density {
                        pairs.push((i, j, rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            Some(QuboProblem::from_pairs(n, pairs, Direction::Maximize)?)
        }
    };
    Ok(SyntheticOracle { kind, n, matrix })
}
