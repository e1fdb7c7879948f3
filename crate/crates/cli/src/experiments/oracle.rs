use serde_json::json;
use skspec_core::analysis::{CheckRecord, ConvergenceReport};
use skspec_core::dynamics::{
    enhanced_snapshot, integrate_frozen, picard_solve_local, LocalProblem, Model,
};
use skspec_core::noise::{advance_convolutions, sample_path, ConvolutionState};
use skspec_core::renorm::sigma_variance;
use skspec_core::{FrequencyLattice, Result};

use super::{num, Csv, Outcome};
use crate::config::OracleConfig;

pub fn run(cfg: &OracleConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let model = Model::Polynomial { k: cfg.k };
    let grid = FrequencyLattice::new(cfg.lattice)?;
    let initial = cfg.initial.to_pair(grid)?;

    // Frozen enhanced data from one heat convolution sample.
    let path = sample_path(cfg.snapshot_seed, grid, cfg.snapshot_t, 1)?;
    let mut st = [ConvolutionState::new(0.0, cfg.cutoff, &path)?];
    advance_convolutions(&mut st, &path, 0)?;
    let sigma = sigma_variance(0.0, cfg.cutoff, cfg.snapshot_t)?;
    let snapshot = enhanced_snapshot(model, &st[0].field(grid)?, 0.0, sigma, grid)?;

    let problem = |eps: f64, steps: usize| LocalProblem {
        model,
        eps,
        cutoff: cfg.cutoff,
        lattice: cfg.lattice,
        horizon: cfg.horizon,
        steps,
    };

    let mut picard = Csv::new(&["eps", "steps", "iterations", "sup_difference"]);
    let mut conv = Csv::new(&["eps", "steps", "error"]);
    for &eps in &cfg.eps {
        let pic = picard_solve_local(
            &problem(eps, cfg.picard_steps),
            &snapshot,
            &initial,
            cfg.picard_tol,
        )?;
        let step = integrate_frozen(&problem(eps, cfg.picard_steps), &snapshot, &initial)?;
        let mut sup = 0.0f64;
        for (a, b) in pic.trajectory.v.iter().zip(&step.v) {
            sup = sup.max(a.sub(b)?.sobolev_norm(0.5));
        }
        picard.row([
            num(eps),
            cfg.picard_steps.to_string(),
            pic.iterations.to_string(),
            num(sup),
        ]);
        out.checks.push(CheckRecord::constant(
            "picard-stepper-agreement",
            json!({"eps": eps, "k": cfg.k, "N": cfg.cutoff, "T": cfg.horizon, "K": cfg.picard_steps, "tolerance": cfg.tolerance}),
            sup,
            sup <= cfg.tolerance,
        ));

        let reference = integrate_frozen(&problem(eps, cfg.reference_steps), &snapshot, &initial)?;
        let end = reference.v.last().expect("final step is recorded");
        let mut points = Vec::new();
        for &k in &cfg.steps {
            let tr = integrate_frozen(&problem(eps, k), &snapshot, &initial)?;
            let err =
                tr.v.last()
                    .expect("final step is recorded")
                    .sub(end)?
                    .sobolev_norm(0.5);
            conv.row([num(eps), k.to_string(), num(err)]);
            points.push((cfg.horizon / k as f64, err));
        }
        let slope = ConvergenceReport::new(points)
            .map(|r| r.slope)
            .unwrap_or(f64::NAN);
        out.checks.push(CheckRecord::constant(
            "stepper-self-convergence",
            json!({"eps": eps, "steps": cfg.steps, "reference_steps": cfg.reference_steps, "allowed": cfg.slope_range}),
            slope,
            (cfg.slope_range.0..=cfg.slope_range.1).contains(&slope),
        ));
    }
    out.files.push(picard.finish("picard.csv"));
    out.files.push(conv.finish("convergence.csv"));
    Ok(out)
}
