use rayon::prelude::*;
use serde_json::json;
use skspec_core::analysis::{path_distance, CheckRecord, ConvergenceReport};
use skspec_core::dynamics::{ledger_for, solve_model_with, Model};
use skspec_core::Result;

use super::{mean_stderr, num, Csv, Outcome};
use crate::config::SkRun;

/// `sup_t ||u_eps - u_0||_{H^s}` for each listed `eps` on one seed.
#[derive(Clone, Debug)]
pub struct SeedDistances {
    pub seed: u64,
    pub distances: Vec<f64>,
}

impl SeedDistances {
    pub fn monotone(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs every seed; trajectories are dropped as soon as their distances are known.
pub fn sk_distances(run: &SkRun, model: Model) -> Result<Vec<SeedDistances>> {
    let first = run.model_config(model, run.seeds[0]);
    first.validate()?;
    let ledger = ledger_for(&first)?;
    run.seeds
        .par_iter()
        .map(|&seed| {
            let traj = solve_model_with(&run.model_config(model, seed), &ledger)?;
            let (reference, family) = traj.split_last().expect("eps family is non-empty");
            let distances = family
                .iter()
                .map(|t| path_distance(t, reference, run.s))
                .collect::<Result<_>>()?;
            Ok(SeedDistances { seed, distances })
        })
        .collect()
}

pub fn run(run: &SkRun, model: Model) -> Result<Outcome> {
    let mut out = Outcome::default();
    let seeds = sk_distances(run, model)?;
    let mut per_seed = Csv::new(&["seed", "eps", "distance", "decreasing"]);
    for s in &seeds {
        for (&e, &d) in run.eps.iter().zip(&s.distances) {
            per_seed.row([s.seed.to_string(), num(e), num(d), s.monotone().to_string()]);
        }
    }
    out.files.push(per_seed.finish("distances.csv"));

    let mut summary = Csv::new(&["eps", "mean", "stderr", "slope"]);
    let means: Vec<f64> = (0..run.eps.len())
        .map(|i| mean_stderr(&seeds.iter().map(|s| s.distances[i]).collect::<Vec<_>>()))
        .map(|(m, _)| m)
        .collect();
    let slope =
        ConvergenceReport::new(run.eps.iter().copied().zip(means.iter().copied()).collect())
            .map(|r| r.slope)
            .unwrap_or(f64::NAN);
    for (i, &e) in run.eps.iter().enumerate() {
        let (m, se) = mean_stderr(&seeds.iter().map(|s| s.distances[i]).collect::<Vec<_>>());
        summary.row([num(e), num(m), num(se), num(slope)]);
    }
    out.files.push(summary.finish("summary.csv"));

    let params = json!({
        "model": model,
        "eps": run.eps,
        "N": run.cutoff,
        "M": run.lattice,
        "T": run.horizon,
        "K": run.steps,
        "s": run.s,
        "seeds": run.seeds.len(),
    });
    let fraction = seeds.iter().filter(|s| s.monotone()).count() as f64 / seeds.len() as f64;
    out.checks.push(CheckRecord::constant(
        "sk-monotone-fraction",
        params.clone(),
        fraction,
        fraction >= run.monotone_fraction,
    ));
    let ratio = means[means.len() - 1] / means[0];
    out.checks.push(CheckRecord::constant(
        "sk-mean-ratio",
        params,
        ratio,
        ratio <= run.ratio_max,
    ));
    Ok(out)
}
