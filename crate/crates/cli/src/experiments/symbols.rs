use serde_json::json;
use skspec_core::analysis::{CheckRecord, CheckValue};
use skspec_core::propagators::{
    combined_symbol, dhat, dhat_dt, heat_symbol, multiplier_certificates, CertificateGrid,
    ModeSymbolQuery,
};
use skspec_core::Result;

use super::{num, Csv, Outcome};
use crate::config::SymbolsConfig;

pub fn run(cfg: &SymbolsConfig) -> Result<Outcome> {
    let mut out = Outcome::default();

    let mut table = Csv::new(&[
        "eps", "n1", "n2", "t", "dhat", "dhat_dt", "combined", "heat",
    ]);
    for &eps in &cfg.eps {
        for &(n1, n2) in &cfg.modes {
            for &t in &cfg.times {
                let q = ModeSymbolQuery::new(eps, (n1, n2), t);
                table.row([
                    num(eps),
                    n1.to_string(),
                    n2.to_string(),
                    num(t),
                    num(dhat(q)?),
                    num(dhat_dt(q)?),
                    num(combined_symbol(q)),
                    num(heat_symbol(q.k2, t)),
                ]);
            }
        }
    }
    out.files.push(table.finish("symbols.csv"));

    let grid = CertificateGrid {
        eps: cfg.eps.clone(),
        times: cfg.times.clone(),
        max_bracket: cfg.max_bracket,
        theta: cfg.theta,
    };
    let cert = multiplier_certificates(&grid);
    let mut certs = Csv::new(&["name", "value", "points", "skipped"]);
    let params = json!({"theta": cfg.theta, "max_bracket": cfg.max_bracket, "eps": cfg.eps.len(), "times": cfg.times.len()});
    for (name, v) in [
        ("mul1", cert.mul1),
        ("mul2_low", cert.mul2_low),
        ("mul2_high", cert.mul2_high),
        ("mul3", cert.mul3),
        ("mul4", cert.mul4),
    ] {
        certs.row([
            name.to_string(),
            num(v),
            cert.points.to_string(),
            cert.skipped.to_string(),
        ]);
        out.checks.push(CheckRecord::constant(
            &format!("multiplier-{name}"),
            params.clone(),
            v,
            v.is_finite(),
        ));
    }
    out.files.push(certs.finish("certificates.csv"));

    if let Some(h) = &cfg.heat_limit {
        let k2 = ModeSymbolQuery::new(1.0, h.mode, h.t).k2;
        let exact = heat_symbol(k2, h.t);
        let errors: Vec<f64> = h
            .eps
            .iter()
            .map(|&e| (combined_symbol(ModeSymbolQuery::new(e, h.mode, h.t)) - exact).abs())
            .collect();
        let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        let mut csv = Csv::new(&["eps", "error", "ratio"]);
        for (i, (&e, &err)) in h.eps.iter().zip(&errors).enumerate() {
            let r = if i == 0 {
                String::new()
            } else {
                num(ratios[i - 1])
            };
            csv.row([num(e), num(err), r]);
        }
        out.files.push(csv.finish("heat_limit.csv"));
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pass = ratios
            .iter()
            .all(|r| (h.ratio_range.0..=h.ratio_range.1).contains(r));
        out.checks.push(CheckRecord {
            check: "heat-limit-ratio".into(),
            params: json!({"mode": h.mode, "t": h.t, "eps": h.eps, "allowed": h.ratio_range}),
            constant_or_band: CheckValue::Band {
                c1: lo,
                c2: hi,
                width: h.ratio_range.1 - h.ratio_range.0,
            },
            pass,
        });
    }
    Ok(out)
}
