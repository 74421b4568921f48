//! Factorization surrogate `f(q) = Σ_k (Σ_i v_ik q_i)²`.
//!
//! Expanding the square gives `Σ_i Σ_j (Σ_k v_ik v_jk) q_i q_j`, so a fitted
//! model is exactly a QUBO with `Q = V·Vᵀ`. The form is non-negative and has
//! no bias term; [`TargetTransform`] maps arbitrary targets into its range.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::problem::{BinaryVector, Direction, QuboProblem};
use crate::rng::derived_stream;

/// Affine map `y' = scale·(y − shift)` from original targets to the units the
/// surrogate is fitted in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetTransform {
    pub scale: f64,
    pub shift: f64,
}

impl Default for TargetTransform {
    fn default() -> Self {
        TargetTransform {
            scale: 1.0,
            shift: 0.0,
        }
    }
}

impl TargetTransform {
    /// Transform under which better targets (in `direction`) become larger
    /// and every target is non-negative.
    ///
    /// Maximize: `y' = y − min(0, min y)`. Minimize: `y' = max(0, max y) − y`.
    /// Already non-negative targets are left unshifted when maximizing, and
    /// maximizing `D` uses the same transformed targets as minimizing `−D`.
    pub fn for_direction(targets: &[f64], direction: Direction) -> Self {
        match direction {
            Direction::Maximize => {
                let lo = targets.iter().copied().fold(0.0, f64::min);
                TargetTransform { scale: 1.0, shift: lo }
            }
            Direction::Minimize => {
                let hi = targets.iter().copied().fold(0.0, f64::max);
                TargetTransform {
                    scale: -1.0,
                    shift: hi,
                }
            }
        }
    }

    pub fn apply(&self, y: f64) -> f64 {
        self.scale * (y - self.shift)
    }

    pub fn invert(&self, y: f64) -> f64 {
        y / self.scale + self.shift
    }
}

/// The `n × K` coefficient matrix of the surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    n: usize,
    rank: usize,
    v: Vec<f64>,
    pub transform: TargetTransform,
}

impl FactorModel {
    pub fn new(n: usize, rank: usize, v: Vec<f64>) -> Result<Self> {
        if n == 0 || rank == 0 {
            return Err(Error::InvalidInput(format!(
                "factor model needs n >= 1 and K >= 1, got n = {n}, K = {rank}"
            )));
        }
        check_len(n * rank, v.len())?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("factor model has non-finite entries".into()));
        }
        Ok(FactorModel {
            n,
            rank,
            v,
            transform: TargetTransform::default(),
        })
    }

    pub fn zeros(n: usize, rank: usize) -> Result<Self> {
        FactorModel::new(n, rank, vec![0.0; n * rank])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coefficient(&self, i: usize, k: usize) -> f64 {
        self.v[i * self.rank + k]
    }

    /// Row-major coefficients.
    pub fn coefficients(&self) -> &[f64] {
        &self.v
    }

    fn factor_sums(&self, q: &[u8], sums: &mut [f64]) {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (i, _) in q.iter().enumerate().filter(|(_, &b)| b == 1) {
            let row = &self.v[i * self.rank..(i + 1) * self.rank];
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
    }

    /// Surrogate value in transformed units.
    pub fn predict(&self, q: &BinaryVector) -> Result<f64> {
        check_len(self.n, q.len())?;
        let mut sums = vec![0.0; self.rank];
        self.factor_sums(q.as_slice(), &mut sums);
        Ok(sums.iter().map(|s| s * s).sum())
    }

    /// Surrogate value mapped back to original target units.
    pub fn predict_original(&self, q: &BinaryVector) -> Result<f64> {
        Ok(self.transform.invert(self.predict(q)?))
    }

    /// `∂f/∂v_ik = 2·q_i·Σ_j v_jk q_j`, row-major.
    pub fn gradient(&self, q: &BinaryVector) -> Result<Vec<f64>> {
        check_len(self.n, q.len())?;
        let mut sums = vec![0.0; self.rank];
        self.factor_sums(q.as_slice(), &mut sums);
        let mut grad = vec![0.0; self.v.len()];
        for i in q.ones() {
            for k in 0..self.rank {
                grad[i * self.rank + k] = 2.0 * sums[k];
            }
        }
        Ok(grad)
    }
}

pub fn fm_predict(m: &FactorModel, q: &BinaryVector) -> Result<f64> {
    m.predict(q)
}

/// `Q = V·Vᵀ`, so that `qubo_value(Q, q) == fm_predict(m, q)`.
pub fn fm_to_qubo(m: &FactorModel, direction: Direction) -> QuboProblem {
    let n = m.n;
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..m.rank)
                .map(|k| m.coefficient(i, k) * m.coefficient(j, k))
                .sum();
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    QuboProblem::new(n, q, direction).expect("V·Vᵀ is symmetric and finite")
}

/// Bit vectors paired with one or more named target columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDataset {
    n: usize,
    rows: Vec<BinaryVector>,
    targets: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl PropertyDataset {
    pub fn new(
        rows: Vec<BinaryVector>,
        targets: Vec<Vec<f64>>,
        names: Vec<String>,
    ) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no rows or zero-width rows".into()));
        }
        check_len(rows.len(), targets.len())?;
        if names.is_empty() {
            return Err(Error::InvalidInput("dataset has no target columns".into()));
        }
        for (r, (row, t)) in rows.iter().zip(&targets).enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {r} has {} bits, expected {n}",
                    row.len()
                )));
            }
            if t.len() != names.len() {
                return Err(Error::InvalidInput(format!(
                    "row {r} has {} targets, expected {}",
                    t.len(),
                    names.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {r} has a non-finite target")));
            }
        }
        Ok(PropertyDataset {
            n,
            rows,
            targets,
            names,
        })
    }

    pub fn single(rows: Vec<BinaryVector>, targets: Vec<f64>) -> Result<Self> {
        let targets = targets.into_iter().map(|t| vec![t]).collect();
        PropertyDataset::new(rows, targets, vec!["target".into()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[BinaryVector] {
        &self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> usize {
        self.names.len()
    }

    pub fn targets(&self, row: usize) -> &[f64] {
        &self.targets[row]
    }

    /// The only target column; fails when there are several.
    pub fn target_column(&self) -> Result<Vec<f64>> {
        if self.columns() != 1 {
            return Err(Error::InvalidInput(format!(
                "expected a single target column, found {}",
                self.columns()
            )));
        }
        Ok(self.targets.iter().map(|t| t[0]).collect())
    }

    /// Same rows with a replacement single target column.
    pub fn with_target(&self, name: &str, target: Vec<f64>) -> Result<Self> {
        check_len(self.len(), target.len())?;
        PropertyDataset::new(
            self.rows.clone(),
            target.into_iter().map(|t| vec![t]).collect(),
            vec![name.to_string()],
        )
    }

    /// Read CSV with header `b0,...,b{n-1},target[,target2,...]`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        let n = header
            .iter()
            .enumerate()
            .take_while(|(i, h)| *h == format!("b{i}"))
            .count();
        if n == 0 {
            return Err(Error::Parse {
                line: 1,
                msg: "header must start with bit columns b0, b1, ...".into(),
            });
        }
        let names: Vec<String> = header.iter().skip(n).map(str::to_string).collect();
        if names.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "header has no target column".into(),
            });
        }
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let line = idx + 2;
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            let bits = record
                .iter()
                .take(n)
                .map(|f| match f {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Parse {
                        line,
                        msg: format!("bit field `{other}` is not 0 or 1"),
                    }),
                })
                .collect::<Result<Vec<u8>>>()?;
            let values = record
                .iter()
                .skip(n)
                .map(|f| {
                    f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("target `{f}` is not a finite number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(BinaryVector::new(bits)?);
            targets.push(values);
        }
        PropertyDataset::new(rows, targets, names)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.n)
            .map(|i| format!("b{i}"))
            .chain(self.names.iter().cloned())
            .collect();
        wtr.write_record(&header)?;
        for (row, t) in self.rows.iter().zip(&self.targets) {
            let record: Vec<String> = row
                .as_slice()
                .iter()
                .map(u8::to_string)
                .chain(t.iter().map(f64::to_string))
                .collect();
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParams {
    pub lr: f64,
    pub epochs: usize,
    pub init_scale: f64,
    pub seed: u64,
    pub val_fraction: f64,
    pub weight_decay: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            lr: 1e-3,
            epochs: 5000,
            init_scale: 0.01,
            seed: 0,
            val_fraction: 0.2,
            weight_decay: 0.0,
        }
    }
}

impl FitParams {
    fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::InvalidParams(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::InvalidParams("init_scale must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::InvalidParams("val_fraction must lie in [0, 1)".into()));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InvalidParams("weight_decay must be non-negative".into()));
        }
        Ok(())
    }
}

/// Row indices of the training and validation split.
pub fn split_indices(len: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut derived_stream(seed, 1));
    let val = ((len as f64) * val_fraction).floor() as usize;
    let val = val.min(len.saturating_sub(1));
    let train = idx.split_off(val);
    (train, idx)
}

/// Mean squared error of `m` over the given rows.
pub fn mse(m: &FactorModel, rows: &[BinaryVector], targets: &[f64]) -> Result<f64> {
    check_len(rows.len(), targets.len())?;
    let mut total = 0.0;
    for (q, y) in rows.iter().zip(targets) {
        let r = m.predict(q)? - y;
        total += r * r;
    }
    Ok(total / rows.len().max(1) as f64)
}

struct Batch {
    ones: Vec<Vec<usize>>,
    targets: Vec<f64>,
}

impl Batch {
    fn new(rows: &[BinaryVector], targets: &[f64], idx: &[usize]) -> Self {
        Batch {
            ones: idx.iter().map(|&r| rows[r].ones().collect()).collect(),
            targets: idx.iter().map(|&r| targets[r]).collect(),
        }
    }

    fn len(&self) -> usize {
        self.targets.len()
    }

    /// Mean squared error and, when `grad` is given, its gradient.
    fn loss(&self, v: &[f64], rank: usize, mut grad: Option<&mut [f64]>) -> f64 {
        let m = self.len() as f64;
        let mut sums = vec![0.0; rank];
        let mut total = 0.0;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for (ones, &y) in self.ones.iter().zip(&self.targets) {
            sums.iter_mut().for_each(|s| *s = 0.0);
            for &i in ones {
                for (s, vi) in sums.iter_mut().zip(&v[i * rank..(i + 1) * rank]) {
                    *s += vi;
                }
            }
            let residual = sums.iter().map(|s| s * s).sum::<f64>() - y;
            total += residual * residual;
            if let Some(g) = grad.as_deref_mut() {
                // d(r²)/dv_ik = 2r · 2 s_k for every set bit i.
                let coef = 4.0 * residual / m;
                for &i in ones {
                    for (gk, s) in g[i * rank..(i + 1) * rank].iter_mut().zip(&sums) {
                        *gk += coef * s;
                    }
                }
            }
        }
        total / m
    }
}

/// Gradient of the mean squared error over all rows of `data` (single target).
pub fn loss_gradient(m: &FactorModel, data: &PropertyDataset) -> Result<(f64, Vec<f64>)> {
    check_len(m.n, data.n())?;
    let targets = data.target_column()?;
    let idx: Vec<usize> = (0..data.len()).collect();
    let batch = Batch::new(data.rows(), &targets, &idx);
    let mut grad = vec![0.0; m.v.len()];
    let loss = batch.loss(&m.v, m.rank, Some(&mut grad));
    Ok((loss, grad))
}

/// Full-batch gradient descent on mean squared error. Returns the parameters
/// with the lowest validation error seen (training error when there is no
/// validation split). The dataset must have a single target column, which is
/// fitted as is; callers apply any [`TargetTransform`] beforehand.
pub fn fm_fit(data: &PropertyDataset, rank: usize, hyper: &FitParams) -> Result<FactorModel> {
    hyper.validate()?;
    if rank == 0 {
        return Err(Error::InvalidParams("rank K must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("dataset is empty".into()));
    }
    let targets = data.target_column()?;
    let n = data.n();
    let (train_idx, val_idx) = split_indices(data.len(), hyper.val_fraction, hyper.seed);
    let train = Batch::new(data.rows(), &targets, &train_idx);
    let val = (!val_idx.is_empty()).then(|| Batch::new(data.rows(), &targets, &val_idx));

    let mut rng = derived_stream(hyper.seed, 0);
    let mut v: Vec<f64> = (0..n * rank)
        .map(|_| {
            if hyper.init_scale > 0.0 {
                rng.gen_range(-hyper.init_scale..hyper.init_scale)
            } else {
                0.0
            }
        })
        .collect();
    let mut grad = vec![0.0; v.len()];
    let mut best_v = v.clone();
    let mut best_score = f64::INFINITY;

    for epoch in 0..=hyper.epochs {
        let train_loss = train.loss(&v, rank, Some(&mut grad));
        if !train_loss.is_finite() {
            return Err(Error::Numeric(format!("training loss is non-finite at epoch {epoch}")));
        }
        let score = match &val {
            Some(b) => b.loss(&v, rank, None),
            None => train_loss,
        };
        if score < best_score {
            best_score = score;
            best_v.clone_from(&v);
        }
        if epoch == hyper.epochs {
            break;
        }
        for (w, g) in v.iter_mut().zip(&grad) {
            *w -= hyper.lr * (g + 2.0 * hyper.weight_decay * *w);
        }
    }
    FactorModel::new(n, rank, best_v)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    #[serde(rename = "K")]
    rank: usize,
    #[serde(rename = "V")]
    v: Vec<f64>,
    target_transform: TargetTransform,
}

impl FactorModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile {
            n: self.n,
            rank: self.rank,
            v: self.v.clone(),
            target_transform: self.transform,
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let t = file.target_transform;
        if !(t.scale.is_finite() && t.scale != 0.0 && t.shift.is_finite()) {
            return Err(Error::InvalidInput("target_transform must be finite with nonzero scale".into()));
        }
        let mut m = FactorModel::new(file.n, file.rank, file.v)?;
        m.transform = t;
        Ok(m)
    }
}
