//! Seeded Monte Carlo estimates of decoding success and property rates.
//!
//! Trial `t` draws everything from `derive_seed(master_seed, t)`: the
//! defective set from stream 0 and the matrix from stream 1. Trials run in
//! parallel and are aggregated in trial order, so a report depends only on
//! its configuration (timings aside).

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::{decode, surviving_items, DecoderKind};
use crate::error::{Error, Result};
use crate::matrix::{answer_vector, ItemSet, TestMatrix};
use crate::params::{DesignSpec, Model, Property};
use crate::randgen::{derive_seed, generate, GeneratorSeed};
use crate::verify::check_property;

/// Header line that versions every CSV this crate writes.
pub const CSV_VERSION_LINE: &str = "# pooltest-csv v1";

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectMode {
    /// Exactly `d` defectives, uniformly placed.
    ExactlyD,
    /// Size uniform in `0..=d`, then a uniform set of that size.
    AtMostD,
}

impl DefectMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DefectMode::ExactlyD => "exactly-d",
            DefectMode::AtMostD => "at-most-d",
        }
    }
}

impl std::str::FromStr for DefectMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exactly" | "exactly-d" => Ok(DefectMode::ExactlyD),
            "at-most" | "at-most-d" => Ok(DefectMode::AtMostD),
            other => Err(Error::domain(format!("unknown defect mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialConfig {
    pub spec: DesignSpec,
    pub trials: usize,
    pub defect_mode: DefectMode,
    pub master_seed: u64,
    pub decoder: DecoderKind,
    /// Budget for exhaustive phases; decoder defaults when absent.
    pub budget: Option<u128>,
    /// Use this matrix in every trial instead of drawing one.
    #[serde(skip)]
    pub fixed_matrix: Option<Arc<TestMatrix>>,
}

impl TrialConfig {
    pub fn new(spec: DesignSpec, trials: usize, master_seed: u64, decoder: DecoderKind) -> Self {
        TrialConfig {
            spec,
            trials,
            defect_mode: DefectMode::ExactlyD,
            master_seed,
            decoder,
            budget: None,
            fixed_matrix: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.trials == 0 {
            return Err(Error::domain("trials must be ≥ 1"));
        }
        if self.defect_mode == DefectMode::ExactlyD && self.spec.d > self.spec.n {
            return Err(Error::domain("exactly-d defect mode needs d ≤ n"));
        }
        if let Some(m) = &self.fixed_matrix {
            if m.cols() != self.spec.n {
                return Err(Error::domain(format!(
                    "fixed matrix has {} columns, design has n={}",
                    m.cols(),
                    self.spec.n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub mean_decode_ms: f64,
    pub max_decode_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub m: usize,
    pub property: Property,
    pub model: Model,
    /// `decode` or `property`.
    pub mode: String,
    /// Decoder or property name.
    pub method: String,
    pub defect_mode: DefectMode,
    pub master_seed: u64,
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub refusals: usize,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Mean number of items surviving elimination.
    pub mean_residual: f64,
    /// Mean number of non-defective items surviving elimination.
    pub mean_non_disjunct: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<TimingSummary>,
}

impl SimulationReport {
    /// The report with timing removed; equal for equal configurations.
    pub fn without_timing(&self) -> SimulationReport {
        SimulationReport {
            timing: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header(include_timing: bool) -> String {
        let mut h = String::from(
            "n,d,delta,m,property,model,model_param,mode,method,defect_mode,seed,trials,\
             successes,failures,refusals,success_rate,wilson_low,wilson_high,\
             mean_residual,mean_non_disjunct",
        );
        if include_timing {
            h.push_str(",mean_decode_ms,max_decode_ms");
        }
        h
    }

    pub fn csv_row(&self, include_timing: bool) -> String {
        let (model, param) = match self.model {
            Model::Rid { zero_prob } => ("rid", format!("{zero_prob:.6}")),
            Model::RrSd { row_weight } => ("rrsd", row_weight.to_string()),
        };
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.n,
            self.d,
            self.delta,
            self.m,
            self.property,
            model,
            param,
            self.mode,
            self.method,
            self.defect_mode.as_str(),
            self.master_seed,
            self.trials,
            self.successes,
            self.failures,
            self.refusals,
            self.success_rate,
            self.wilson_low,
            self.wilson_high,
            self.mean_residual,
            self.mean_non_disjunct,
        );
        if include_timing {
            let t = self.timing.unwrap_or(TimingSummary {
                mean_decode_ms: f64::NAN,
                max_decode_ms: f64::NAN,
            });
            write!(row, ",{:.3},{:.3}", t.mean_decode_ms, t.max_decode_ms).unwrap();
        }
        row
    }

    /// Versioned CSV with one row per report.
    pub fn to_csv(reports: &[SimulationReport], include_timing: bool) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_VERSION_LINE}").unwrap();
        writeln!(out, "{}", Self::csv_header(include_timing)).unwrap();
        for r in reports {
            writeln!(out, "{}", r.csv_row(include_timing)).unwrap();
        }
        out
    }
}

/// Wilson score interval for `successes` out of `trials` at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Draws the defective set for one trial.
pub fn draw_defectives(n: usize, d: usize, mode: DefectMode, rng: &mut impl Rng) -> ItemSet {
    let size = match mode {
        DefectMode::ExactlyD => d,
        DefectMode::AtMostD => rng.random_range(0..=d.min(n)),
    };
    index::sample(rng, n, size).into_iter().collect()
}

enum Evaluation {
    Decode(DecoderKind),
    Property(Property),
}

#[derive(Debug, Clone, Copy)]
enum Verdict {
    Success,
    Failure,
    Refusal,
}

struct TrialOutcome {
    verdict: Verdict,
    residual: usize,
    non_disjunct: usize,
    elapsed_ms: f64,
}

fn run_one(cfg: &TrialConfig, eval: &Evaluation, trial: usize) -> TrialOutcome {
    let trial_seed = derive_seed(cfg.master_seed, trial as u64);
    let mut rng = GeneratorSeed::new(trial_seed, 0).rng();
    let defective = draw_defectives(cfg.spec.n, cfg.spec.d, cfg.defect_mode, &mut rng);
    let refusal = TrialOutcome {
        verdict: Verdict::Refusal,
        residual: 0,
        non_disjunct: 0,
        elapsed_ms: 0.0,
    };

    let generated;
    let matrix = match &cfg.fixed_matrix {
        Some(m) => m.as_ref(),
        None => match generate(&cfg.spec, derive_seed(trial_seed, 1)) {
            Ok(m) => {
                generated = m;
                &generated
            }
            Err(_) => return refusal,
        },
    };
    let Ok(answers) = answer_vector(matrix, &defective) else {
        return refusal;
    };
    let Ok(survivors) = surviving_items(matrix, &answers) else {
        return refusal;
    };
    let residual = survivors.count_ones();

    let start = Instant::now();
    let verdict = match eval {
        Evaluation::Decode(kind) => match decode(*kind, matrix, &answers, cfg.spec.d, cfg.budget) {
            Ok(out) if out.found() == Some(&defective) => Verdict::Success,
            Ok(_) => Verdict::Failure,
            Err(_) => Verdict::Refusal,
        },
        Evaluation::Property(property) => {
            let budget = cfg
                .budget
                .unwrap_or(crate::decode::DEFAULT_BRUTE_FORCE_BUDGET);
            match check_property(matrix, &defective, cfg.spec.d, *property, budget) {
                Ok(report) if report.holds => Verdict::Success,
                Ok(_) => Verdict::Failure,
                Err(_) => Verdict::Refusal,
            }
        }
    };
    TrialOutcome {
        verdict,
        residual,
        non_disjunct: residual - defective.len(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn run(cfg: &TrialConfig, eval: Evaluation, workers: Option<usize>) -> Result<SimulationReport> {
    cfg.validate()?;
    let work = || -> Vec<TrialOutcome> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_one(cfg, &eval, t))
            .collect()
    };
    let outcomes = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::domain(e.to_string()))?
            .install(work),
        None => work(),
    };

    let (mut successes, mut failures, mut refusals) = (0, 0, 0);
    let (mut residual, mut non_disjunct, mut measured) = (0usize, 0usize, 0usize);
    let (mut total_ms, mut max_ms) = (0.0f64, 0.0f64);
    for o in &outcomes {
        match o.verdict {
            Verdict::Success => successes += 1,
            Verdict::Failure => failures += 1,
            Verdict::Refusal => refusals += 1,
        }
        if !matches!(o.verdict, Verdict::Refusal) {
            residual += o.residual;
            non_disjunct += o.non_disjunct;
            measured += 1;
            total_ms += o.elapsed_ms;
            max_ms = max_ms.max(o.elapsed_ms);
        }
    }
    let per = |x: usize| {
        if measured == 0 {
            0.0
        } else {
            x as f64 / measured as f64
        }
    };
    let (wilson_low, wilson_high) = wilson_interval(successes, cfg.trials);
    let (mode, method) = match eval {
        Evaluation::Decode(k) => ("decode", k.as_str().to_string()),
        Evaluation::Property(p) => ("property", p.as_str().to_string()),
    };
    let m = cfg.fixed_matrix.as_ref().map_or(cfg.spec.m, |x| x.rows());

    Ok(SimulationReport {
        n: cfg.spec.n,
        d: cfg.spec.d,
        delta: cfg.spec.delta,
        m,
        property: cfg.spec.property,
        model: cfg.spec.model,
        mode: mode.to_string(),
        method,
        defect_mode: cfg.defect_mode,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        successes,
        failures,
        refusals,
        success_rate: successes as f64 / cfg.trials as f64,
        wilson_low,
        wilson_high,
        mean_residual: per(residual),
        mean_non_disjunct: per(non_disjunct),
        timing: Some(TimingSummary {
            mean_decode_ms: if measured == 0 {
                0.0
            } else {
                total_ms / measured as f64
            },
            max_decode_ms: max_ms,
        }),
    })
}

/// Success means the decoder returns exactly the drawn defective set.
pub fn run_trials(cfg: &TrialConfig) -> Result<SimulationReport> {
    run(cfg, Evaluation::Decode(cfg.decoder), None)
}

/// [`run_trials`] on a dedicated pool of `workers` threads.
pub fn run_trials_with_workers(cfg: &TrialConfig, workers: usize) -> Result<SimulationReport> {
    run(cfg, Evaluation::Decode(cfg.decoder), Some(workers))
}

/// Success means the drawn matrix has `property` for the drawn set.
pub fn estimate_property_rate(cfg: &TrialConfig, property: Property) -> Result<SimulationReport> {
    run(cfg, Evaluation::Property(property), None)
}
