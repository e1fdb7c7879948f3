use serde_json::json;
use skspec_core::analysis::{cov_difference_check, covariance_band, CheckRecord};
use skspec_core::Result;

use super::{num, Csv, Outcome};
use crate::config::CovConfig;

pub fn run(cfg: &CovConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut csv = Csv::new(&["eps", "N", "t", "x1", "x2", "gamma", "prediction"]);
    let mut bands = Csv::new(&["eps", "N", "c1", "c2", "width", "pass"]);
    for &eps in &cfg.eps {
        for &n in &cfg.cutoffs {
            let r = covariance_band(eps, n, &cfg.probes, cfg.width)?;
            for (i, &(t, x)) in r.probes.iter().enumerate() {
                csv.row([
                    num(eps),
                    num(n),
                    num(t),
                    num(x.0),
                    num(x.1),
                    num(r.gamma[i]),
                    num(r.prediction[i]),
                ]);
            }
            bands.row([
                num(eps),
                num(n),
                num(r.band.c1),
                num(r.band.c2),
                num(r.band.width),
                r.band.pass.to_string(),
            ]);
            out.checks.push(CheckRecord::band(
                "covariance-log-potential",
                json!({"eps": eps, "N": n}),
                &r.band,
            ));
        }
    }
    out.files.push(csv.finish("cov.csv"));
    out.files.push(bands.finish("cov_bands.csv"));

    if let Some(d) = &cfg.difference {
        let mut diff = Csv::new(&[
            "eps",
            "N1",
            "N2",
            "delta",
            "constant",
            "refined_constant",
            "probes",
            "refined_probes",
        ]);
        let fine = cfg.probes.refined();
        for &eps in &d.eps {
            let a = cov_difference_check(d.n1, d.n2, eps, &cfg.probes, d.delta)?;
            let b = cov_difference_check(d.n1, d.n2, eps, &fine, d.delta)?;
            diff.row([
                num(eps),
                num(d.n1),
                num(d.n2),
                num(d.delta),
                num(a.constant),
                num(b.constant),
                a.probes.to_string(),
                b.probes.to_string(),
            ]);
            let stable = a.constant.is_finite()
                && b.constant <= d.refine_factor * a.constant.max(f64::MIN_POSITIVE);
            out.checks.push(CheckRecord::constant(
                "covariance-projection-difference",
                json!({"eps": eps, "N1": d.n1, "N2": d.n2, "delta": d.delta, "refined": b.constant}),
                a.constant,
                stable,
            ));
        }
        out.files.push(diff.finish("cov_difference.csv"));
    }
    Ok(out)
}
