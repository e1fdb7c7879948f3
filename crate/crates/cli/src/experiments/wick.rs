use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;
use skspec_core::analysis::CheckRecord;
use skspec_core::noise::{advance_convolutions, sample_path, ConvolutionState, SupportModes};
use skspec_core::renorm::{
    gamma_from_sigma, gmc_theta_on, sigma_variance, wick_orthogonality_mc, wick_power_on,
    WickLedger,
};
use skspec_core::{FrequencyLattice, Result};

use super::{mean_stderr, num, Csv, Outcome};
use crate::config::{CauchyConfig, GmcConfig, OrthogonalityConfig, VarianceLawConfig, WickConfig};

pub fn run(cfg: &WickConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    if let Some(v) = &cfg.variance_law {
        variance_law(v, &mut out)?;
    }
    if let Some(o) = &cfg.orthogonality {
        orthogonality(o, &mut out)?;
    }
    if let Some(c) = &cfg.cauchy {
        cauchy(c, cfg, &mut out)?;
    }
    if let Some(g) = &cfg.gmc {
        gmc(g, &cfg.seeds, &mut out)?;
    }
    Ok(out)
}

fn variance_law(v: &VarianceLawConfig, out: &mut Outcome) -> Result<()> {
    let mut csv = Csv::new(&["eps", "N", "t", "sigma_eps", "sigma_0", "difference"]);
    let s0 = sigma_variance(0.0, v.cutoff, v.t)?;
    let ratio = 4.0 * PI * s0 / v.cutoff.ln();
    csv.row([
        num(0.0),
        num(v.cutoff),
        num(v.t),
        num(s0),
        num(s0),
        num(0.0),
    ]);
    let mut diffs = Vec::new();
    for &e in &v.eps {
        let n = e.powf(-v.exponent).floor();
        let se = sigma_variance(e, n, v.t)?;
        let s0 = sigma_variance(0.0, n, v.t)?;
        diffs.push((se - s0).abs());
        csv.row([
            num(e),
            num(n),
            num(v.t),
            num(se),
            num(s0),
            num((se - s0).abs()),
        ]);
    }
    out.files.push(csv.finish("sigma.csv"));
    out.checks.push(CheckRecord::constant(
        "variance-log-ratio",
        json!({"N": v.cutoff, "t": v.t, "allowed": v.ratio_range}),
        ratio,
        (v.ratio_range.0..=v.ratio_range.1).contains(&ratio),
    ));
    out.checks.push(CheckRecord::constant(
        "variance-eps-difference",
        json!({"eps": v.eps, "exponent": v.exponent, "t": v.t, "differences": diffs}),
        diffs.last().copied().unwrap_or(0.0),
        diffs.windows(2).all(|w| w[1] < w[0]),
    ));
    Ok(())
}

fn orthogonality(o: &OrthogonalityConfig, out: &mut Outcome) -> Result<()> {
    let est = wick_orthogonality_mc(o.var_f, o.var_g, o.cov_fg, o.samples, o.seed)?;
    let target = 2.0 * o.cov_fg * o.cov_fg;
    let mut csv = Csv::new(&["samples", "mean", "stderr", "target"]);
    csv.row([
        o.samples.to_string(),
        num(est.mean),
        num(est.stderr),
        num(target),
    ]);
    out.files.push(csv.finish("orthogonality.csv"));
    out.checks.push(CheckRecord::constant(
        "wick-orthogonality",
        json!({"samples": o.samples, "var_f": o.var_f, "var_g": o.var_g, "cov_fg": o.cov_fg, "stderr": est.stderr}),
        (est.mean - target) / est.stderr,
        est.within(target, o.stderr_multiple),
    ));
    Ok(())
}

/// One convolution per `eps` at cutoff `top` on a shared single-step path.
fn convolutions(
    seed: u64,
    eps: &[f64],
    top: f64,
    t: f64,
) -> Result<(Vec<ConvolutionState>, FrequencyLattice)> {
    let modes = Arc::new(SupportModes::new(top)?);
    let lattice = FrequencyLattice::covering(modes.radius());
    let path = sample_path(seed, lattice, t, 1)?;
    let mut states: Vec<ConvolutionState> = eps
        .iter()
        .map(|&e| ConvolutionState::with_modes(e, modes.clone(), &path))
        .collect::<Result<_>>()?;
    advance_convolutions(&mut states, &path, 0)?;
    Ok((states, lattice))
}

fn cauchy(c: &CauchyConfig, cfg: &WickConfig, out: &mut Outcome) -> Result<()> {
    let top = 2.0 * c.cutoffs[c.cutoffs.len() - 1];
    let mut all_cutoffs: Vec<f64> = c.cutoffs.iter().flat_map(|&n| [n, 2.0 * n]).collect();
    all_cutoffs.sort_by(f64::total_cmp);
    all_cutoffs.dedup();
    let ledger = WickLedger::build(cfg.beta, &c.eps, &all_cutoffs, &[c.t])?;
    let mut buf = Vec::new();
    ledger.write_csv(&mut buf)?;
    out.files.push(("ledger.csv".into(), buf));

    // Per-N padded lattices on which the square is exact.
    let lattices: Vec<FrequencyLattice> = c
        .cutoffs
        .iter()
        .map(|&n| {
            Ok(FrequencyLattice::covering(
                2 * SupportModes::new(2.0 * n)?.radius(),
            ))
        })
        .collect::<Result<_>>()?;

    // samples[seed][eps][N]
    let samples: Vec<Vec<Vec<f64>>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<Vec<f64>>> {
            let (states, _) = convolutions(seed, &c.eps, top, c.t)?;
            states
                .iter()
                .map(|st| {
                    c.cutoffs
                        .iter()
                        .zip(&lattices)
                        .map(|(&n, &lat)| {
                            let sq = |m: f64| -> Result<_> {
                                let psi = st.field_with_cutoff(lat, m)?;
                                Ok(
                                    wick_power_on(&psi, 2, ledger.sigma(st.eps(), m, c.t)?, lat)?
                                        .field,
                                )
                            };
                            Ok(sq(n)?.sub(&sq(2.0 * n)?)?.sobolev_norm(c.s))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut per_seed = Csv::new(&["seed", "eps", "N", "distance"]);
    let mut summary = Csv::new(&["eps", "N", "mean", "stderr", "samples"]);
    for (i, &e) in c.eps.iter().enumerate() {
        let mut means = Vec::new();
        for (k, &n) in c.cutoffs.iter().enumerate() {
            let xs: Vec<f64> = samples.iter().map(|s| s[i][k]).collect();
            for (&seed, &x) in cfg.seeds.iter().zip(&xs) {
                per_seed.row([seed.to_string(), num(e), num(n), num(x)]);
            }
            let (m, se) = mean_stderr(&xs);
            summary.row([num(e), num(n), num(m), num(se), xs.len().to_string()]);
            means.push(m);
        }
        let worst = means.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        out.checks.push(CheckRecord::constant(
            "wick-square-cauchy",
            json!({"eps": e, "N": c.cutoffs, "t": c.t, "s": c.s, "seeds": cfg.seeds.len(), "means": means}),
            worst,
            means.windows(2).all(|w| w[1] < w[0]),
        ));
    }
    out.files.push(per_seed.finish("cauchy_samples.csv"));
    out.files.push(summary.finish("cauchy.csv"));
    Ok(())
}

fn gmc(g: &GmcConfig, seeds: &[u64], out: &mut Outcome) -> Result<()> {
    let lattice = FrequencyLattice::new(g.lattice)?;
    let top = 2.0 * g.cutoffs[g.cutoffs.len() - 1];
    let mut levels: Vec<f64> = g.cutoffs.iter().flat_map(|&n| [n, 2.0 * n]).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let gammas: Vec<f64> = levels
        .iter()
        .map(|&n| gamma_from_sigma(g.beta, sigma_variance(g.eps, n, g.t)?))
        .collect::<Result<_>>()?;
    let level = |n: f64| levels.iter().position(|&m| m == n).unwrap_or(0);

    // Per seed: (distances per N, spatial mean of Theta_N per N).
    type SeedStats = (Vec<f64>, Vec<(f64, f64)>);
    let stats: Vec<SeedStats> = seeds
        .par_iter()
        .map(|&seed| -> Result<SeedStats> {
            let (states, _) = convolutions(seed, &[g.eps], top, g.t)?;
            let st = &states[0];
            let theta = |n: f64| {
                gmc_theta_on(
                    &st.field_with_cutoff(lattice, n)?,
                    g.beta,
                    gammas[level(n)],
                    lattice,
                )
            };
            let mut dist = Vec::new();
            let mut means = Vec::new();
            for &n in &g.cutoffs {
                let a = theta(n)?;
                let b = theta(2.0 * n)?;
                dist.push(a.field()?.sub(&b.field()?)?.sobolev_norm(g.s));
                let len = a.values.len() as f64;
                let re = a.values.iter().map(|v| v.re).sum::<f64>() / len;
                let im = a.values.iter().map(|v| v.im).sum::<f64>() / len;
                means.push((re, im));
            }
            Ok((dist, means))
        })
        .collect::<Result<_>>()?;

    let mut csv = Csv::new(&[
        "N",
        "mean_distance",
        "stderr_distance",
        "mean_re",
        "stderr_re",
        "mean_im",
        "stderr_im",
    ]);
    let mut dmeans = Vec::new();
    for (k, &n) in g.cutoffs.iter().enumerate() {
        let d: Vec<f64> = stats.iter().map(|s| s.0[k]).collect();
        let re: Vec<f64> = stats.iter().map(|s| s.1[k].0).collect();
        let im: Vec<f64> = stats.iter().map(|s| s.1[k].1).collect();
        let (dm, ds) = mean_stderr(&d);
        let (rm, rs) = mean_stderr(&re);
        let (im_m, im_s) = mean_stderr(&im);
        csv.row([
            num(n),
            num(dm),
            num(ds),
            num(rm),
            num(rs),
            num(im_m),
            num(im_s),
        ]);
        dmeans.push(dm);
        let z = ((rm - 1.0) / rs).abs().max((im_m / im_s).abs());
        out.checks.push(CheckRecord::constant(
            "gmc-mean",
            json!({"N": n, "beta": g.beta, "eps": g.eps, "t": g.t, "seeds": seeds.len(), "mean_re": rm, "stderr_re": rs}),
            z,
            z <= g.stderr_multiple,
        ));
    }
    out.files.push(csv.finish("gmc.csv"));
    let worst = dmeans.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    out.checks.push(CheckRecord::constant(
        "gmc-cauchy",
        json!({"N": g.cutoffs, "beta": g.beta, "eps": g.eps, "lattice": g.lattice, "s": g.s, "means": dmeans}),
        worst,
        dmeans.windows(2).all(|w| w[1] < w[0]),
    ));
    Ok(())
}
