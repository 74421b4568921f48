use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use qdopt_core::baseline::anneal_betas;
use qdopt_core::bsb::bsb_trace;
use qdopt_core::format::{parse_problem, write_problem};
use qdopt_core::pipeline::fit_surrogate;
use qdopt_core::problem::{
    ancilla_spins_to_bits, cut_from_energy, cycle_graph, maxcut_to_ising, random_graph, random_ising,
    random_qubo, total_weight,
};
use qdopt_core::rbm::{cd_train, CdParams};
use qdopt_core::rng::derived_stream;
use qdopt_core::*;
use rand::Rng;
use serde_json::{json, Value};

use crate::args::*;
use crate::CliError;

type Out<'a> = &'a mut Vec<u8>;
type CliResult = std::result::Result<(), CliError>;

pub fn run(command: Command, out: Out) -> CliResult {
    match command {
        Command::Solve(a) => solve(a, out),
        Command::Fit(a) => fit(a, out),
        Command::Compile(a) => compile(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Sample(SampleCommand::Relax(a)) => sample_relax(a, out),
        Command::Sample(SampleCommand::Rbm(a)) => sample_rbm(a, out),
        Command::Gen(a) => gen(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn read_text(path: &Path) -> std::result::Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path) -> std::result::Result<PropertyDataset, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(PropertyDataset::read_csv(file)?)
}

/// Write to `path` when given, otherwise to the result stream.
fn emit(path: Option<&Path>, text: &str, out: Out) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            out.extend_from_slice(text.as_bytes());
            Ok(())
        }
    }
}

fn json_line(v: &Value, out: Out) {
    let _ = writeln!(out, "{v}");
}

fn with_params(json_text: &str, params: Value) -> String {
    let mut v: Value = serde_json::from_str(json_text).expect("model JSON is valid");
    v["params"] = params;
    format!("{v}\n")
}

fn bits_csv(bits: &[u8]) -> String {
    bits.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")
}

fn header(prefix: &str, n: usize) -> String {
    (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

fn bsb_params(f: &BsbFlags, restarts: usize, seed: u64) -> BsbParams {
    BsbParams {
        a0: f.a0,
        c0: f.c0,
        dt: f.dt,
        steps: f.steps,
        restarts,
        seed,
        ..BsbParams::default()
    }
}

fn solve(a: SolveArgs, out: Out) -> CliResult {
    let problem = parse_problem(&read_text(&a.problem)?)?;
    if a.cut && !matches!(problem, Problem::Ising(_)) {
        return Err(CliError::infeasible("--cut needs an ising problem file"));
    }
    if a.trace.is_some() && a.algo != Algo::Bsb {
        return Err(CliError::infeasible("--trace is only available with --algo bsb"));
    }
    let (ising, qubo) = match &problem {
        Problem::Ising(p) => (p.clone(), None),
        Problem::Qubo(q) => (qubo_to_ising(q), Some(q)),
    };
    let bsb = bsb_params(&a.bsb, a.restarts, a.seed);
    let sa = SaParams {
        sweeps: a.sa.sweeps,
        beta_initial: a.sa.beta_initial,
        beta_final: a.sa.beta_final,
        restarts: a.restarts,
        seed: a.seed,
    };
    let (algo, params) = match a.algo {
        Algo::Bsb => ("bsb", serde_json::to_value(&bsb).expect("params serialize")),
        Algo::Sa => ("sa", serde_json::to_value(&sa).expect("params serialize")),
        Algo::Random => ("random", json!({ "samples": a.samples, "seed": a.seed })),
        Algo::Brute => ("brute", json!({})),
    };

    let mut sol = match a.algo {
        Algo::Brute => brute_force_ground_state(&problem)?,
        Algo::Bsb => bsb_solve(&ising, &bsb)?,
        Algo::Sa => sa_solve(&ising, &sa)?,
        Algo::Random => random_search(&ising, a.samples, a.seed)?,
    };
    if let (Some(q), Some(spins)) = (qubo, sol.spins()) {
        let bits = ancilla_spins_to_bits(spins);
        sol.energy = qubo_value(q, &bits)?;
        sol.config = Config::Bits(bits);
    }
    let cut = a.cut.then(|| {
        let w: f64 = ising.pairs().map(|(_, _, j)| 2.0 * j).sum();
        cut_from_energy(w, sol.energy - ising.offset())
    });

    if let Some(path) = &a.trace {
        let rows = bsb_trace(&ising, &bsb, sol.restart_index)?;
        let mut text = String::from("step,a_t,energy\n");
        for r in rows {
            let _ = writeln!(text, "{},{},{}", r.step, r.a_t, r.energy);
        }
        emit(Some(path), &text, out)?;
    }

    let (label, values): (&str, Vec<i64>) = match &sol.config {
        Config::Spins(s) => ("spins", s.as_slice().iter().map(|&v| v as i64).collect()),
        Config::Bits(q) => ("bits", q.as_slice().iter().map(|&v| v as i64).collect()),
    };
    match a.format {
        Format::Json => {
            let mut v = json!({
                "algo": algo,
                "energy": sol.energy,
                label: values,
                "seed": sol.seed,
                "restart_index": sol.restart_index,
                "best_step": sol.best_step,
                "params": params,
            });
            if let Some(c) = cut {
                v["cut"] = json!(c);
            }
            json_line(&v, out);
        }
        Format::Csv => {
            eprintln!("params: {}", json!({ "algo": algo, "params": params }));
            let prefix = if label == "spins" { "s" } else { "b" };
            let cut_col = if cut.is_some() { ",cut" } else { "" };
            let _ = writeln!(out, "energy,restart_index,best_step{cut_col},{}", header(prefix, values.len()));
            let cut_val = cut.map(|c| format!(",{c}")).unwrap_or_default();
            let cfg = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let _ = writeln!(out, "{},{},{}{cut_val},{cfg}", sol.energy, sol.restart_index, sol.best_step);
        }
    }
    Ok(())
}

fn fit_params(f: &FitFlags, seed: u64) -> FitParams {
    FitParams {
        lr: f.lr,
        epochs: f.epochs,
        init_scale: f.init_scale,
        seed,
        val_fraction: f.val_fraction,
        weight_decay: f.weight_decay,
    }
}

fn fit(a: FitArgs, out: Out) -> CliResult {
    let data = read_dataset(&a.dataset)?;
    let text = match a.kind {
        ModelKind::Fm => {
            let hyper = fit_params(&a.fm, a.seed);
            let model = fit_surrogate(&data, &a.weights, a.direction, a.fm.rank, &hyper)?;
            let params = json!({
                "kind": "fm",
                "rank": a.fm.rank,
                "direction": a.direction,
                "weights": a.weights,
                "fit": hyper,
            });
            with_params(&model.to_json(), params)
        }
        ModelKind::Rbm => {
            let cd = CdParams {
                hidden: a.hidden,
                k: a.cd_k,
                lr: a.cd_lr,
                updates: a.updates,
                batch_size: a.batch_size,
                seed: a.seed,
                ..CdParams::default()
            };
            let model = cd_train(data.rows(), &cd)?;
            with_params(&model.to_json(), json!({ "kind": "rbm", "cd": cd }))
        }
    };
    emit(a.output.as_deref(), &text, out)
}

fn compile(a: CompileArgs, out: Out) -> CliResult {
    let model = FactorModel::from_json(&read_text(&a.model)?)?;
    // Transformed predictions: larger is better whatever the original direction.
    let qubo = fm_to_qubo(&model, Direction::Maximize);
    let problem = if a.ising {
        Problem::Ising(qubo_to_ising(&qubo))
    } else {
        Problem::Qubo(qubo)
    };
    emit(a.output.as_deref(), &write_problem(&problem), out)
}

fn optimize(a: OptimizeArgs, out: Out) -> CliResult {
    let data = read_dataset(&a.dataset)?;
    let rbm_filter = match &a.rbm_model {
        Some(path) => Some(RbmFilter {
            model: RbmModel::from_json(&read_text(path)?)?,
            keep_fraction: a.keep_fraction,
        }),
        None => None,
    };
    let cfg = PipelineConfig {
        rank: a.fit.rank,
        direction: a.direction,
        weights: a.weights.clone(),
        fit: fit_params(&a.fit, a.seed),
        solver: bsb_params(&a.bsb, a.restarts, a.seed),
        top_k: a.top_k,
        rbm_filter,
        seed: a.seed,
    };
    let ranked = optimize_property(&data, &cfg)?;
    eprintln!(
        "params: {}",
        json!({
            "direction": a.direction,
            "weights": a.weights,
            "top_k": a.top_k,
            "rank": a.fit.rank,
            "fit": cfg.fit,
            "solver": cfg.solver,
            "rbm_model": a.rbm_model.as_ref().map(|p| p.display().to_string()),
            "keep_fraction": a.keep_fraction,
        })
    );
    match a.format {
        Format::Json => {
            for c in &ranked.candidates {
                json_line(&serde_json::to_value(c).expect("candidate serializes"), out);
            }
        }
        Format::Csv => {
            let _ = writeln!(out, "bits,predicted,energy,restart");
            for c in &ranked.candidates {
                let bits: String = c.bits.as_slice().iter().map(|b| char::from(b'0' + b)).collect();
                let _ = writeln!(out, "{bits},{},{},{}", c.predicted, c.energy, c.restart);
            }
        }
    }
    Ok(())
}

fn sample_relax(a: RelaxArgs, out: Out) -> CliResult {
    let p = RelaxationParams::new(a.beta)?;
    let mut rng = derived_stream(a.seed, 0);
    match a.q {
        None => {
            let _ = writeln!(out, "u,zeta");
            for _ in 0..a.count {
                let u: f64 = rng.gen();
                let _ = writeln!(out, "{u},{}", inverse_cdf_sample(u, true, p)?);
            }
        }
        Some(q) => {
            let _ = writeln!(out, "q,rho,zeta");
            for _ in 0..a.count {
                let rho: f64 = rng.gen();
                let _ = writeln!(out, "{q},{rho},{}", reparam_sample(q, rho, p)?);
            }
        }
    }
    Ok(())
}

fn sample_rbm(a: RbmSampleArgs, out: Out) -> CliResult {
    let model = RbmModel::from_json(&read_text(&a.model)?)?;
    let samples = rbm_sample(&model, a.chains, a.burn_in, a.thin, a.count, a.seed)?;
    let _ = writeln!(out, "{}", header("b", model.n_v));
    for v in samples {
        let _ = writeln!(out, "{}", bits_csv(v.as_slice()));
    }
    Ok(())
}

fn gen(a: GenArgs, out: Out) -> CliResult {
    if !(0.0..=1.0).contains(&a.density) {
        return Err(CliError::infeasible("--density must lie in [0, 1]"));
    }
    let text = match a.kind {
        GenKind::Ising => write_problem(&Problem::Ising(random_ising(a.n, a.density, a.seed)?)),
        GenKind::Qubo => write_problem(&Problem::Qubo(random_qubo(a.n, a.density, a.direction, a.seed)?)),
        GenKind::Maxcut => {
            let edges = if a.cycle {
                cycle_graph(a.n)
            } else {
                random_graph(a.n, a.density, a.signed, a.seed)
            };
            write_problem(&Problem::Ising(maxcut_to_ising(&edges, a.n)?))
        }
        GenKind::Dataset => {
            let kind = match a.oracle {
                OracleArg::Quadratic => OracleKind::Quadratic,
                OracleArg::SparseQuadratic => OracleKind::SparseQuadratic,
                OracleArg::Onemax => OracleKind::OneMax,
            };
            let data = synthetic_oracle(kind, a.n, a.seed)?.dataset(a.rows, a.seed)?;
            let mut buf = Vec::new();
            data.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("CSV is UTF-8")
        }
    };
    emit(a.output.as_deref(), &text, out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn bench(a: BenchArgs, out: Out) -> CliResult {
    if a.seeds == 0 {
        return Err(CliError::infeasible("--seeds must be at least 1"));
    }
    let edges = random_graph(a.n, 1.0, true, a.instance_seed);
    let w = total_weight(&edges);
    let p = maxcut_to_ising(&edges, a.n)?;
    let (auto_initial, auto_final) = anneal_betas(&p, a.instance_seed);
    let beta_initial = a.sa_beta_initial.unwrap_or(auto_initial);
    let beta_final = a.sa_beta_final.unwrap_or(auto_final);

    let mut bsb_cuts = Vec::new();
    let mut sa_cuts = Vec::new();
    for seed in 0..a.seeds {
        let params = BsbParams {
            a0: a.a0,
            c0: a.c0,
            dt: a.dt,
            steps: a.steps,
            restarts: 1,
            seed,
            ..BsbParams::default()
        };
        let t = Instant::now();
        let sol = bsb_solve(&p, &params)?;
        let cut = cut_from_energy(w, sol.energy);
        eprintln!("bsb seed {seed}: cut {cut} in {:.2?}", t.elapsed());
        bsb_cuts.push(cut);

        // One sweep evaluates every row of J once, as does one bSB step.
        let params = SaParams {
            sweeps: a.steps,
            beta_initial,
            beta_final,
            restarts: 1,
            seed,
        };
        let t = Instant::now();
        let sol = sa_solve(&p, &params)?;
        let cut = cut_from_energy(w, sol.energy);
        eprintln!("sa  seed {seed}: cut {cut} in {:.2?}", t.elapsed());
        sa_cuts.push(cut);
    }
    let (bm, sm) = (mean(&bsb_cuts), mean(&sa_cuts));
    let report = json!({
        "n": a.n,
        "edges": edges.len(),
        "instance_seed": a.instance_seed,
        "total_weight": w,
        "row_evaluations": a.steps * a.n,
        "bsb": { "dt": a.dt, "a0": a.a0, "c0": a.c0, "steps": a.steps, "cuts": bsb_cuts, "mean_cut": bm },
        "sa": { "sweeps": a.steps, "beta_initial": beta_initial, "beta_final": beta_final, "cuts": sa_cuts, "mean_cut": sm },
        "bsb_at_least_sa": bm >= sm,
    });
    match a.format {
        Format::Json => json_line(&report, out),
        Format::Csv => {
            let _ = writeln!(out, "seed,bsb_cut,sa_cut");
            for (i, (b, s)) in bsb_cuts.iter().zip(&sa_cuts).enumerate() {
                let _ = writeln!(out, "{i},{b},{s}");
            }
        }
    }
    Ok(())
}
