use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use skspec_core::analysis::ProbeGrid;
use skspec_core::dynamics::{InitialData, Model, ModelConfig};
use skspec_core::noise::SupportModes;
use skspec_core::FrequencyLattice;

/// A parsed experiment document. Unset fields take the documented defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Symbols(SymbolsConfig),
    Wick(WickConfig),
    Cov(CovConfig),
    SkPoly(SkPolyConfig),
    SkSine(SkSineConfig),
    Oracle(OracleConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Symbols(_) => "symbols",
            Experiment::Wick(_) => "wick",
            Experiment::Cov(_) => "cov",
            Experiment::SkPoly(_) => "sk-poly",
            Experiment::SkSine(_) => "sk-sine",
            Experiment::Oracle(_) => "oracle",
        }
    }
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolsConfig {
    pub eps: Vec<f64>,
    pub times: Vec<f64>,
    pub max_bracket: f64,
    pub theta: f64,
    /// Modes tabulated in `symbols.csv`.
    pub modes: Vec<(i64, i64)>,
    pub heat_limit: Option<HeatLimitConfig>,
}

impl Default for SymbolsConfig {
    fn default() -> Self {
        let grid = skspec_core::propagators::CertificateGrid::default();
        Self {
            eps: grid.eps,
            times: grid.times,
            max_bracket: grid.max_bracket,
            theta: grid.theta,
            modes: vec![
                (0, 0),
                (1, 0),
                (2, 1),
                (4, 0),
                (8, 8),
                (16, 0),
                (32, 32),
                (63, 0),
            ],
            heat_limit: Some(HeatLimitConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatLimitConfig {
    pub mode: (i64, i64),
    pub t: f64,
    /// Decreasing `eps` values.
    pub eps: Vec<f64>,
    /// Allowed range of successive error ratios.
    pub ratio_range: (f64, f64),
}

impl Default for HeatLimitConfig {
    fn default() -> Self {
        Self {
            mode: (1, 0),
            t: 0.5,
            eps: vec![0.1, 0.05, 0.025],
            ratio_range: (2.5, 6.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WickConfig {
    /// Chaos parameter recorded in `ledger.csv`.
    pub beta: f64,
    pub seeds: Vec<u64>,
    pub variance_law: Option<VarianceLawConfig>,
    pub orthogonality: Option<OrthogonalityConfig>,
    pub cauchy: Option<CauchyConfig>,
    pub gmc: Option<GmcConfig>,
}

impl Default for WickConfig {
    fn default() -> Self {
        Self {
            beta: PI.sqrt(),
            seeds: seeds(32),
            variance_law: Some(VarianceLawConfig::default()),
            orthogonality: Some(OrthogonalityConfig::default()),
            cauchy: Some(CauchyConfig::default()),
            gmc: Some(GmcConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceLawConfig {
    pub t: f64,
    /// Cutoff for the `4 pi sigma / log N` ratio.
    pub cutoff: f64,
    pub ratio_range: (f64, f64),
    /// Decreasing `eps`, each paired with `N = floor(eps^-exponent)`.
    pub eps: Vec<f64>,
    pub exponent: f64,
}

impl Default for VarianceLawConfig {
    fn default() -> Self {
        Self {
            t: 1.0,
            cutoff: 256.0,
            ratio_range: (0.85, 1.15),
            eps: vec![0.2, 0.1, 0.05],
            exponent: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrthogonalityConfig {
    pub samples: usize,
    pub var_f: f64,
    pub var_g: f64,
    pub cov_fg: f64,
    pub seed: u64,
    pub stderr_multiple: f64,
}

impl Default for OrthogonalityConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            var_f: 1.5,
            var_g: 0.8,
            cov_fg: 0.6,
            seed: 2024,
            stderr_multiple: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CauchyConfig {
    pub eps: Vec<f64>,
    /// Ascending `N`; each is compared with `2N`.
    pub cutoffs: Vec<f64>,
    pub t: f64,
    pub s: f64,
}

impl Default for CauchyConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.0, 0.1],
            cutoffs: vec![8.0, 16.0, 32.0, 64.0],
            t: 1.0,
            s: -0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmcConfig {
    pub beta: f64,
    pub eps: f64,
    pub cutoffs: Vec<f64>,
    pub t: f64,
    pub lattice: usize,
    pub s: f64,
    pub stderr_multiple: f64,
}

impl Default for GmcConfig {
    fn default() -> Self {
        Self {
            beta: PI.sqrt(),
            eps: 0.0,
            cutoffs: vec![8.0, 16.0, 32.0],
            t: 1.0,
            lattice: 512,
            s: -0.5,
            stderr_multiple: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovConfig {
    pub eps: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub probes: ProbeGrid,
    pub width: f64,
    pub difference: Option<DifferenceConfig>,
}

impl Default for CovConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.0, 0.1, 0.3],
            cutoffs: vec![16.0, 64.0],
            probes: ProbeGrid::default(),
            width: skspec_core::analysis::DEFAULT_BAND_WIDTH,
            difference: Some(DifferenceConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DifferenceConfig {
    pub n1: f64,
    pub n2: f64,
    pub eps: Vec<f64>,
    pub delta: f64,
    /// Allowed growth of the constant when the probe grid is refined.
    pub refine_factor: f64,
}

impl Default for DifferenceConfig {
    fn default() -> Self {
        Self {
            n1: 16.0,
            n2: 64.0,
            eps: vec![0.0, 0.05],
            delta: 0.1,
            refine_factor: 1.5,
        }
    }
}

/// Shared protocol of the `eps -> 0` experiments. The heat reference `eps = 0`
/// is always simulated on the same noise path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkRun {
    pub cutoff: f64,
    pub lattice: usize,
    pub horizon: f64,
    pub steps: usize,
    /// Strictly decreasing positive `eps`.
    pub eps: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Sobolev index of the distance.
    pub s: f64,
    pub initial: InitialData,
    pub record_every: usize,
    /// Required fraction of seeds whose distances strictly decrease.
    pub monotone_fraction: f64,
    /// Largest admissible ratio of the seed-mean distance at the last and first `eps`.
    pub ratio_max: f64,
}

impl Default for SkRun {
    fn default() -> Self {
        Self {
            cutoff: 32.0,
            lattice: 256,
            horizon: 0.25,
            steps: 100,
            eps: vec![0.2, 0.1, 0.05],
            seeds: seeds(16),
            s: -0.25,
            initial: InitialData::Zero,
            record_every: 1,
            monotone_fraction: 0.8,
            ratio_max: 0.5,
        }
    }
}

impl SkRun {
    pub fn model_config(&self, model: Model, seed: u64) -> ModelConfig {
        let mut eps = self.eps.clone();
        eps.push(0.0);
        ModelConfig {
            model,
            eps,
            cutoff: self.cutoff,
            lattice: self.lattice,
            horizon: self.horizon,
            steps: self.steps,
            initial: self.initial.clone(),
            seed,
            record_every: self.record_every,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkPolyConfig {
    pub k: usize,
    #[serde(flatten)]
    pub run: SkRun,
}

impl Default for SkPolyConfig {
    fn default() -> Self {
        Self {
            k: 3,
            run: SkRun::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkSineConfig {
    pub beta: f64,
    #[serde(flatten)]
    pub run: SkRun,
}

impl Default for SkSineConfig {
    fn default() -> Self {
        Self {
            beta: PI.sqrt(),
            run: SkRun::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub k: usize,
    pub cutoff: f64,
    pub lattice: usize,
    pub horizon: f64,
    pub eps: Vec<f64>,
    /// Seed and time of the convolution sample the frozen data is built from.
    pub snapshot_seed: u64,
    pub snapshot_t: f64,
    pub initial: InitialData,
    pub picard_steps: usize,
    pub picard_tol: f64,
    /// Bound on the sup-in-time `H^{1/2}` gap between Picard and the stepper.
    pub tolerance: f64,
    /// Ascending step counts for the self-convergence fit.
    pub steps: Vec<usize>,
    pub reference_steps: usize,
    pub slope_range: (f64, f64),
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            k: 3,
            cutoff: 8.0,
            lattice: 64,
            horizon: 0.05,
            eps: vec![0.0, 0.1],
            snapshot_seed: 31,
            snapshot_t: 1.0,
            initial: InitialData::Modes {
                phi0: vec![
                    (0, 0, 0.3, 0.0),
                    (1, 0, 0.4, -0.1),
                    (1, 2, 0.1, 0.2),
                    (-3, 1, 0.05, 0.0),
                ],
                phi1: vec![(0, 1, 0.2, 0.1), (2, -1, -0.1, 0.05)],
            },
            picard_steps: 256,
            picard_tol: 1e-12,
            tolerance: 1e-3,
            steps: vec![32, 64, 128],
            reference_steps: 1024,
            slope_range: (0.8, 1.3),
        }
    }
}

/// One rejected field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for d in &self.diagnostics {
            write!(f, "\n  {}: {}", d.field, d.message)?;
        }
        Ok(())
    }
}

impl ConfigError {
    fn single(field: &str, message: impl Into<String>) -> Self {
        Self {
            diagnostics: vec![Diagnostic {
                field: field.into(),
                message: message.into(),
            }],
        }
    }
}

/// Parses a JSON or TOML document (JSON when it starts with `{`) and validates it.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig, ConfigError> {
    let parsed: ExperimentConfig = if raw.trim_start().starts_with('{') {
        serde_json::from_str(raw).map_err(|e| ConfigError::single("document", e.to_string()))?
    } else {
        toml::from_str(raw).map_err(|e| ConfigError::single("document", e.to_string()))?
    };
    let diagnostics = parsed.diagnostics();
    if diagnostics.is_empty() {
        Ok(parsed)
    } else {
        Err(ConfigError { diagnostics })
    }
}

#[derive(Default)]
struct Checker {
    out: Vec<Diagnostic>,
}

impl Checker {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.out.push(Diagnostic {
            field: field.into(),
            message: message.into(),
        });
    }

    fn require(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.fail(field, message);
        }
    }

    fn positive(&mut self, field: &str, v: f64) {
        self.require(
            v > 0.0 && v.is_finite(),
            field,
            format!("must be positive and finite, got {v}"),
        );
    }

    fn all(&mut self, field: &str, xs: &[f64], pred: impl Fn(f64) -> bool, what: &str) {
        if xs.is_empty() {
            self.fail(field, "must not be empty");
        } else if let Some(x) = xs.iter().find(|&&x| !pred(x) || !x.is_finite()) {
            self.fail(field, format!("entries must be {what}, got {x}"));
        }
    }

    fn range(&mut self, field: &str, r: (f64, f64)) {
        self.require(
            r.0 < r.1,
            field,
            format!("lower end must be below upper end, got {r:?}"),
        );
    }

    fn ascending(&mut self, field: &str, xs: &[f64], min_len: usize) {
        self.require(
            xs.len() >= min_len,
            field,
            format!("needs at least {min_len} entries"),
        );
        self.require(
            xs.windows(2).all(|w| w[1] > w[0]),
            field,
            "must be strictly ascending",
        );
    }

    fn descending(&mut self, field: &str, xs: &[f64], min_len: usize) {
        self.require(
            xs.len() >= min_len,
            field,
            format!("needs at least {min_len} entries"),
        );
        self.require(
            xs.windows(2).all(|w| w[1] < w[0]),
            field,
            "must be strictly descending",
        );
    }

    fn model(&mut self, field: &str, cfg: &ModelConfig) {
        if let Err(e) = cfg.validate() {
            self.fail(field, e.to_string());
        }
    }
}

impl ExperimentConfig {
    /// Field-level problems; empty when the config is runnable.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut c = Checker::default();
        match &self.experiment {
            Experiment::Symbols(s) => {
                c.all("eps", &s.eps, |e| e > 0.0, "positive");
                c.all("times", &s.times, |t| t > 0.0, "positive");
                c.require(s.max_bracket >= 1.0, "max_bracket", "must be at least 1");
                c.require(
                    s.theta > 0.0 && s.theta < 1.0,
                    "theta",
                    "must lie in (0, 1)",
                );
                c.require(!s.modes.is_empty(), "modes", "must not be empty");
                if let Some(h) = &s.heat_limit {
                    c.positive("heat_limit.t", h.t);
                    c.all("heat_limit.eps", &h.eps, |e| e > 0.0, "positive");
                    c.descending("heat_limit.eps", &h.eps, 2);
                    c.range("heat_limit.ratio_range", h.ratio_range);
                }
            }
            Experiment::Wick(w) => {
                c.positive("beta", w.beta);
                if w.cauchy.is_some() || w.gmc.is_some() {
                    c.require(w.seeds.len() >= 2, "seeds", "needs at least two seeds");
                }
                if let Some(v) = &w.variance_law {
                    c.positive("variance_law.t", v.t);
                    c.require(v.cutoff >= 2.0, "variance_law.cutoff", "must be at least 2");
                    c.range("variance_law.ratio_range", v.ratio_range);
                    c.positive("variance_law.exponent", v.exponent);
                    c.all(
                        "variance_law.eps",
                        &v.eps,
                        |e| e > 0.0 && e < 1.0,
                        "in (0, 1)",
                    );
                    c.descending("variance_law.eps", &v.eps, 2);
                }
                if let Some(o) = &w.orthogonality {
                    c.require(
                        o.samples >= 2,
                        "orthogonality.samples",
                        "needs at least two samples",
                    );
                    c.positive("orthogonality.var_f", o.var_f);
                    c.positive("orthogonality.var_g", o.var_g);
                    c.require(
                        o.cov_fg * o.cov_fg <= o.var_f * o.var_g,
                        "orthogonality.cov_fg",
                        "covariance exceeds the Cauchy-Schwarz bound",
                    );
                    c.positive("orthogonality.stderr_multiple", o.stderr_multiple);
                }
                if let Some(q) = &w.cauchy {
                    c.all("cauchy.eps", &q.eps, |e| e >= 0.0, "non-negative");
                    c.all("cauchy.cutoffs", &q.cutoffs, |n| n >= 1.0, "at least 1");
                    c.ascending("cauchy.cutoffs", &q.cutoffs, 2);
                    c.positive("cauchy.t", q.t);
                }
                if let Some(g) = &w.gmc {
                    let b2 = g.beta * g.beta;
                    c.require(
                        g.beta > 0.0 && b2 < 4.0 * PI,
                        "gmc.beta",
                        format!("beta^2 must lie in (0, 4 pi), got {b2}"),
                    );
                    c.require(g.eps >= 0.0, "gmc.eps", "must be non-negative");
                    c.positive("gmc.t", g.t);
                    c.positive("gmc.stderr_multiple", g.stderr_multiple);
                    c.all("gmc.cutoffs", &g.cutoffs, |n| n >= 1.0, "at least 1");
                    c.ascending("gmc.cutoffs", &g.cutoffs, 2);
                    match FrequencyLattice::new(g.lattice) {
                        Err(e) => c.fail("gmc.lattice", e.to_string()),
                        Ok(_) => {
                            if let Some(&top) = g.cutoffs.last() {
                                if let Ok(m) = SupportModes::new(2.0 * top) {
                                    let need = FrequencyLattice::covering(m.radius()).size();
                                    c.require(
                                        g.lattice >= need,
                                        "gmc.lattice",
                                        format!(
                                            "must be at least {need} to hold cutoff 2N = {}",
                                            2.0 * top
                                        ),
                                    );
                                }
                            }
                        }
                    }
                }
            }
            Experiment::Cov(v) => {
                c.all("eps", &v.eps, |e| e >= 0.0, "non-negative");
                c.all("cutoffs", &v.cutoffs, |n| n >= 1.0, "at least 1");
                c.all("probes.radii", &v.probes.radii, |r| r > 0.0, "positive");
                c.all(
                    "probes.directions",
                    &v.probes.directions,
                    |_| true,
                    "finite",
                );
                c.all("probes.times", &v.probes.times, |t| t > 0.0, "positive");
                c.positive("width", v.width);
                if let Some(d) = &v.difference {
                    c.require(d.n1 >= 8.0, "difference.n1", "must be at least 8");
                    c.require(d.n2 >= d.n1, "difference.n2", "must be at least n1");
                    c.all("difference.eps", &d.eps, |e| e >= 0.0, "non-negative");
                    c.positive("difference.delta", d.delta);
                    c.require(
                        d.refine_factor >= 1.0,
                        "difference.refine_factor",
                        "must be at least 1",
                    );
                }
            }
            Experiment::SkPoly(p) => sk_checks(&mut c, &p.run, Model::Polynomial { k: p.k }),
            Experiment::SkSine(s) => sk_checks(&mut c, &s.run, Model::SineGordon { beta: s.beta }),
            Experiment::Oracle(o) => {
                c.all("eps", &o.eps, |e| e >= 0.0, "non-negative");
                c.positive("horizon", o.horizon);
                c.positive("snapshot_t", o.snapshot_t);
                c.positive("tolerance", o.tolerance);
                c.positive("picard_tol", o.picard_tol);
                c.require(o.picard_steps >= 1, "picard_steps", "must be at least 1");
                let steps: Vec<f64> = o.steps.iter().map(|&k| k as f64).collect();
                c.all("steps", &steps, |k| k >= 1.0, "at least 1");
                c.ascending("steps", &steps, 3);
                c.require(
                    o.steps.last().is_some_and(|&k| o.reference_steps > k),
                    "reference_steps",
                    "must exceed every entry of steps",
                );
                c.range("slope_range", o.slope_range);
                if o.horizon > 0.0 && !o.eps.is_empty() {
                    c.model(
                        "model",
                        &ModelConfig {
                            model: Model::Polynomial { k: o.k },
                            eps: o.eps.clone(),
                            cutoff: o.cutoff,
                            lattice: o.lattice,
                            horizon: o.horizon,
                            steps: o.reference_steps.max(1),
                            initial: o.initial.clone(),
                            seed: o.snapshot_seed,
                            record_every: 1,
                        },
                    );
                }
            }
        }
        c.out
    }
}

fn sk_checks(c: &mut Checker, run: &SkRun, model: Model) {
    c.positive("horizon", run.horizon);
    c.require(run.steps >= 1, "steps", "must be at least 1");
    c.require(run.record_every >= 1, "record_every", "must be at least 1");
    c.all(
        "eps",
        &run.eps,
        |e| e > 0.0,
        "positive (the eps = 0 reference is added automatically)",
    );
    c.descending("eps", &run.eps, 2);
    c.require(!run.seeds.is_empty(), "seeds", "must not be empty");
    c.require(
        (0.0..=1.0).contains(&run.monotone_fraction),
        "monotone_fraction",
        "must lie in [0, 1]",
    );
    c.positive("ratio_max", run.ratio_max);
    if c.out.is_empty() {
        c.model("model", &run.model_config(model, 0));
    }
}
