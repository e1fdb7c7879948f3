//! Experiment drivers. Each returns its files as bytes plus the checks it ran;
//! writing to disk is left to the runner.

mod cov;
mod oracle;
mod sk;
mod symbols;
mod wick;

use skspec_core::analysis::CheckRecord;
use skspec_core::Result;

use crate::config::Experiment;

pub use sk::{sk_distances, SeedDistances};

/// Files (name, bytes) and check outcomes of one experiment.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<CheckRecord>,
}

pub fn execute(experiment: &Experiment) -> Result<Outcome> {
    match experiment {
        Experiment::Symbols(c) => symbols::run(c),
        Experiment::Wick(c) => wick::run(c),
        Experiment::Cov(c) => cov::run(c),
        Experiment::SkPoly(c) => {
            sk::run(&c.run, skspec_core::dynamics::Model::Polynomial { k: c.k })
        }
        Experiment::SkSine(c) => sk::run(
            &c.run,
            skspec_core::dynamics::Model::SineGordon { beta: c.beta },
        ),
        Experiment::Oracle(c) => oracle::run(c),
    }
}

/// Fixed 17-significant-digit float field.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated rows with LF line ends; no field here needs quoting.
pub(crate) struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self, name: &str) -> (String, Vec<u8>) {
        (name.to_string(), self.buf.into_bytes())
    }
}

/// Mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let e = skspec_core::noise::McEstimate::from_samples(xs);
    (e.mean, e.stderr)
}
