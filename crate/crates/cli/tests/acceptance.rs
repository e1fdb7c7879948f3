//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p skspec --test acceptance [-- filter]`. The process
//! fails if any criterion fails, except those in `KNOWN_RED`, which must fail
//! in the documented way (see the analysis in the project notes).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{json, Value};
use skspec::{load_config, run, validate_config, RunManifest, RunOptions};
use skspec_core::analysis::{CheckRecord, CheckValue};

struct Verdict {
    pass: bool,
    /// A failure matching the documented analysis of a known-red criterion.
    explained: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            explained: false,
            detail,
        }
    }
}

type Criterion = (&'static str, fn() -> Verdict);

/// Unattainable as stated: at `n = (1, 0)`, `t = 0.5` the second-order term of
/// the heat-limit error vanishes (`<n>^2 t = 1`), so the error is fourth order
/// and successive ratios sit near 16, not in [2.5, 6]. Any other failure of
/// these criteria still counts.
const KNOWN_RED: &[&str] = &["symbol-heat-limit-ratio"];

fn run_json(cfg: Value, jobs: Option<usize>) -> (RunManifest, tempfile::TempDir) {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = validate_config(&cfg.to_string()).expect("valid config");
    let opts = RunOptions {
        out: dir.path().to_path_buf(),
        jobs,
        seed_offset: 0,
    };
    (run(&config, &opts).expect("run completes"), dir)
}

fn checks<'a>(m: &'a RunManifest, name: &str) -> Vec<&'a CheckRecord> {
    let out: Vec<_> = m.checks.iter().filter(|c| c.check == name).collect();
    assert!(!out.is_empty(), "no check named {name}");
    out
}

fn constant(c: &CheckRecord) -> f64 {
    match c.constant_or_band {
        CheckValue::Constant(v) => v,
        CheckValue::Band { c2, .. } => c2,
    }
}

fn symbol_heat_limit() -> Verdict {
    let (m, _d) = run_json(
        json!({"experiment": "symbols", "eps": [0.1], "times": [0.5], "modes": [[1, 0]], "max_bracket": 2.0}),
        None,
    );
    let c = checks(&m, "heat-limit-ratio")[0];
    let CheckValue::Band { c1, c2, .. } = c.constant_or_band else {
        unreachable!()
    };
    let mut v = Verdict::new(
        c.pass,
        format!("per-halving ratios in [{c1:.3}, {c2:.3}], required [2.5, 6]"),
    );
    // Fourth-order decay gives ratios near 2^4.
    v.explained = (12.0..=20.0).contains(&c1) && (12.0..=20.0).contains(&c2);
    v
}

fn multiplier_certificates() -> Verdict {
    let (m, _d) = run_json(json!({"experiment": "symbols", "heat_limit": null}), None);
    let names = ["mul1", "mul2_low", "mul2_high", "mul3", "mul4"];
    let vals: Vec<String> = names
        .iter()
        .map(|n| {
            format!(
                "{n}={:.3e}",
                constant(checks(&m, &format!("multiplier-{n}"))[0])
            )
        })
        .collect();
    Verdict::new(m.checks.iter().all(|c| c.pass), vals.join(" "))
}

fn variance_law() -> Verdict {
    let (m, _d) = run_json(
        json!({"experiment": "wick", "orthogonality": null, "cauchy": null, "gmc": null}),
        None,
    );
    let r = checks(&m, "variance-log-ratio")[0];
    let d = checks(&m, "variance-eps-difference")[0];
    Verdict::new(
        r.pass && d.pass,
        format!(
            "4 pi sigma_0,256(1) / log 256 = {:.4}; |sigma_eps - sigma_0| = {}",
            constant(r),
            d.params["differences"]
        ),
    )
}

fn wick_orthogonality() -> Verdict {
    let (m, _d) = run_json(
        json!({"experiment": "wick", "variance_law": null, "cauchy": null, "gmc": null}),
        None,
    );
    let c = checks(&m, "wick-orthogonality")[0];
    Verdict::new(
        c.pass,
        format!(
            "z-score {:.3} with {} samples",
            constant(c),
            c.params["samples"]
        ),
    )
}

fn wick_cauchy() -> Verdict {
    let (m, _d) = run_json(
        json!({"experiment": "wick", "variance_law": null, "orthogonality": null, "gmc": null}),
        None,
    );
    let cs = checks(&m, "wick-square-cauchy");
    let detail = cs
        .iter()
        .map(|c| format!("eps={} means={}", c.params["eps"], c.params["means"]))
        .collect::<Vec<_>>()
        .join("; ");
    Verdict::new(cs.len() == 2 && cs.iter().all(|c| c.pass), detail)
}

fn gmc_convergence() -> Verdict {
    let (m, _d) = run_json(
        json!({"experiment": "wick", "variance_law": null, "orthogonality": null, "cauchy": null}),
        None,
    );
    let cauchy = checks(&m, "gmc-cauchy")[0];
    let means = checks(&m, "gmc-mean");
    let z: Vec<String> = means
        .iter()
        .map(|c| format!("{:.2}", constant(c)))
        .collect();
    Verdict::new(
        cauchy.pass && means.iter().all(|c| c.pass),
        format!(
            "distance means {}; mean z-scores [{}]",
            cauchy.params["means"],
            z.join(", ")
        ),
    )
}

fn covariance_bands() -> Verdict {
    let (m, _d) = run_json(json!({"experiment": "cov", "difference": null}), None);
    let cs = checks(&m, "covariance-log-potential");
    let widest = cs
        .iter()
        .map(|c| match c.constant_or_band {
            CheckValue::Band { c1, c2, .. } => c2 - c1,
            CheckValue::Constant(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    Verdict::new(
        cs.len() == 6 && cs.iter().all(|c| c.pass),
        format!(
            "{} (eps, N) pairs, widest band {widest:.4} <= 3.0",
            cs.len()
        ),
    )
}

fn solver_oracle() -> Verdict {
    let (m, _d) = run_json(json!({"experiment": "oracle"}), None);
    let agree = checks(&m, "picard-stepper-agreement");
    let slope = checks(&m, "stepper-self-convergence");
    let gap = agree.iter().map(|c| constant(c)).fold(0.0, f64::max);
    let slopes: Vec<String> = slope
        .iter()
        .map(|c| format!("{:.3}", constant(c)))
        .collect();
    Verdict::new(
        agree.iter().chain(&slope).all(|c| c.pass),
        format!("max Picard gap {gap:.2e}; slopes [{}]", slopes.join(", ")),
    )
}

fn sk(experiment: &str) -> Verdict {
    let (m, _d) = run_json(json!({"experiment": experiment}), None);
    let frac = checks(&m, "sk-monotone-fraction")[0];
    let ratio = checks(&m, "sk-mean-ratio")[0];
    Verdict::new(
        frac.pass && ratio.pass,
        format!(
            "decreasing for {:.0}% of seeds; mean(0.05) / mean(0.2) = {:.3}",
            100.0 * constant(frac),
            constant(ratio)
        ),
    )
}

fn sk_polynomial() -> Verdict {
    sk("sk-poly")
}

fn sk_sine_gordon() -> Verdict {
    sk("sk-sine")
}

fn csv_bytes(dir: &std::path::Path, m: &RunManifest) -> Vec<(String, Vec<u8>)> {
    m.files
        .iter()
        .filter(|f| f.path.ends_with(".csv") || f.path.ends_with(".json"))
        .map(|f| {
            (
                f.path.clone(),
                std::fs::read(dir.join(&f.path)).expect("listed file exists"),
            )
        })
        .collect()
}

fn determinism() -> Verdict {
    let configs = [
        json!({"experiment": "sk-poly", "cutoff": 8.0, "lattice": 64, "steps": 20, "seeds": [1, 2, 3, 4]}),
        json!({"experiment": "sk-sine", "cutoff": 8.0, "lattice": 64, "steps": 20, "seeds": [5, 6]}),
        json!({"experiment": "wick", "seeds": [1, 2, 3, 4], "orthogonality": {"samples": 1000},
               "cauchy": {"cutoffs": [4.0, 8.0]}, "gmc": {"cutoffs": [4.0, 8.0], "lattice": 128}}),
        json!({"experiment": "cov", "cutoffs": [16.0]}),
    ];
    let mut compared = 0;
    for cfg in configs {
        let (first, d1) = run_json(cfg, Some(1));
        // Rerun from the written manifest, on a different worker count.
        let raw = std::fs::read_to_string(d1.path().join("manifest.json")).expect("manifest");
        let again = load_config(&raw).expect("manifest config loads");
        let d2 = tempfile::tempdir().expect("temp dir");
        let opts = RunOptions {
            out: d2.path().to_path_buf(),
            jobs: Some(2),
            seed_offset: 0,
        };
        let second = run(&again, &opts).expect("rerun completes");
        if first.config_hash != second.config_hash || first.files != second.files {
            return Verdict::new(false, format!("{}: manifests differ", first.experiment));
        }
        let a = csv_bytes(d1.path(), &first);
        if a != csv_bytes(d2.path(), &second) {
            return Verdict::new(false, format!("{}: output bytes differ", first.experiment));
        }
        compared += a.len();
    }
    Verdict::new(
        true,
        format!("{compared} files byte-identical across reruns from manifests"),
    )
}

const CRITERIA: &[Criterion] = &[
    ("symbol-heat-limit-ratio", symbol_heat_limit),
    ("multiplier-certificates", multiplier_certificates),
    ("variance-law", variance_law),
    ("wick-orthogonality", wick_orthogonality),
    ("wick-square-cauchy", wick_cauchy),
    ("gmc-convergence", gmc_convergence),
    ("covariance-bands", covariance_bands),
    ("solver-oracle", solver_oracle),
    ("sk-polynomial", sk_polynomial),
    ("sk-sine-gordon", sk_sine_gordon),
    ("determinism", determinism),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut unexpected = 0;
    let mut ran = 0;
    for (i, &(name, f)) in CRITERIA.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .map(String::as_str)
                .or(e.downcast_ref::<&str>().copied());
            Verdict::new(false, format!("panicked: {}", msg.unwrap_or("?")))
        });
        let known = KNOWN_RED.contains(&name) && verdict.explained;
        let tag = match (verdict.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "{tag} [{:>2}] {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            verdict.detail
        );
        if !verdict.pass && !known {
            unexpected += 1;
        }
    }
    println!("{ran} criteria run, {unexpected} unexpected failures");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
