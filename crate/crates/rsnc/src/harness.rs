//! Scenario generation and experiment orchestration.
//!
//! Scenarios are generated from independent ChaCha substreams per sample and
//! per random field (set structure, rates, deadlines, benefits), so sweeping
//! one range perturbs only that quantity. Experiments run every algorithm on
//! the identical per-sample scenario and emit plot-ready CSV; aggregates are
//! reproducible byte-for-byte given the config and seed.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{mix_seed, run_algorithm, Algorithm, BaselineConfig, BaselineError};
use crate::model::{
    deadline_miss_ratio, is_positive, validate_scenario, Destination, Request, RequestId,
    Scenario, EPS,
};
use crate::pairwise::{self, PairwiseError};

// substream ids within one sample
const STREAM_SETS: u64 = 0;
const STREAM_RATES: u64 = 1;
const STREAM_DEADLINES: u64 = 2;
const STREAM_BENEFITS: u64 = 3;
const STREAM_STRUCTURE: u64 = 4;
const STREAMS_PER_SAMPLE: u64 = 8;

/// Two benefit classes split over a fixed number of requests: the first half
/// of the requests in (destination, packet) order get `alpha_a`, the rest
/// `alpha_b`, and every request shares one common deadline drawn from the
/// deadline range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoClassConfig {
    pub requests: usize,
    pub alpha_a: f64,
    pub alpha_b: f64,
}

/// One point of a sweep: a label plus the config fields it overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub label: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub rmin: Option<f64>,
    #[serde(default)]
    pub rmax: Option<f64>,
    #[serde(default)]
    pub tmin: Option<f64>,
    #[serde(default)]
    pub tmax: Option<f64>,
    #[serde(default)]
    pub alpha_b: Option<f64>,
}

/// Random-scenario generator parameters. JSON config files mirror these
/// field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Number of packets.
    pub n: usize,
    /// Number of destinations.
    pub m: usize,
    #[serde(default = "default_packet_size")]
    pub packet_size: f64,
    pub rmin: f64,
    pub rmax: f64,
    pub tmin: f64,
    pub tmax: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Probability that a destination holds a packet it does not want.
    #[serde(default = "default_has_density")]
    pub has_density: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub two_class: Option<TwoClassConfig>,
    #[serde(default)]
    pub sweep: Vec<SweepPoint>,
}

fn default_packet_size() -> f64 {
    10.0
}

fn default_has_density() -> f64 {
    0.5
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Pairwise(#[from] PairwiseError),
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.n == 0 || self.m == 0 {
            return fail(format!("n and m must be positive, got n={} m={}", self.n, self.m));
        }
        if !is_positive(self.packet_size) {
            return fail(format!("packet_size must be positive, got {}", self.packet_size));
        }
        if !(self.rmin > 0.0 && self.rmin <= self.rmax) {
            return fail(format!("need 0 < rmin <= rmax, got [{}, {}]", self.rmin, self.rmax));
        }
        if !(self.tmin > 0.0 && self.tmin <= self.tmax) {
            return fail(format!("need 0 < tmin <= tmax, got [{}, {}]", self.tmin, self.tmax));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max) {
            return fail(format!(
                "need 0 < alpha_min <= alpha_max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            ));
        }
        if !(0.0..=1.0).contains(&self.has_density) {
            return fail(format!("has_density must be in [0, 1], got {}", self.has_density));
        }
        if self.samples == 0 {
            return fail("samples must be at least 1".to_string());
        }
        if let Some(tc) = &self.two_class {
            if tc.requests == 0 || tc.requests > self.n * self.m {
                return fail(format!(
                    "two_class.requests must be in 1..={} for an {}x{} grid, got {}",
                    self.n * self.m,
                    self.m,
                    self.n,
                    tc.requests
                ));
            }
            if !(tc.alpha_a > 0.0 && tc.alpha_b > 0.0) {
                return fail("two_class benefits must be positive".to_string());
            }
        }
        Ok(())
    }

    fn stream(&self, sample: usize, field: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(sample as u64 * STREAMS_PER_SAMPLE + field);
        rng
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + rng.random::<f64>() * (hi - lo)
}

/// Generate the `sample_index`-th scenario of a config: deterministic given
/// (seed, sample_index).
pub fn generate_scenario(cfg: &GeneratorConfig, sample_index: usize) -> Scenario {
    let packets: Vec<String> = (1..=cfg.n).map(|j| format!("p{j}")).collect();

    // wants first, then holdings over the non-wanted packets, so the sets
    // can never overlap
    let (want_sets, has_sets): (Vec<BTreeSet<usize>>, Vec<BTreeSet<usize>>) =
        if let Some(tc) = &cfg.two_class {
            // exactly `requests` cells of the m x n grid, drawn without
            // replacement by a partial shuffle
            let mut rng = cfg.stream(sample_index, STREAM_STRUCTURE);
            let total = cfg.n * cfg.m;
            let mut cells: Vec<usize> = (0..total).collect();
            for k in 0..tc.requests {
                let pick = k + rng.random_range(0..total - k);
                cells.swap(k, pick);
            }
            let mut wants = vec![BTreeSet::new(); cfg.m];
            for &cell in &cells[..tc.requests] {
                wants[cell / cfg.n].insert(cell % cfg.n);
            }
            let mut rng = cfg.stream(sample_index, STREAM_SETS);
            let has = wants
                .iter()
                .map(|w| {
                    (0..cfg.n)
                        .filter(|j| !w.contains(j))
                        .filter(|_| rng.random::<f64>() < cfg.has_density)
                        .collect()
                })
                .collect();
            (wants, has)
        } else {
            let mut rng = cfg.stream(sample_index, STREAM_SETS);
            let mut wants = Vec::with_capacity(cfg.m);
            let mut has = Vec::with_capacity(cfg.m);
            for _ in 0..cfg.m {
                let w = loop {
                    let set: BTreeSet<usize> =
                        (0..cfg.n).filter(|_| rng.random::<f64>() < 0.5).collect();
                    if !set.is_empty() {
                        break set;
                    }
                };
                has.push(
                    (0..cfg.n)
                        .filter(|j| !w.contains(j))
                        .filter(|_| rng.random::<f64>() < cfg.has_density)
                        .collect(),
                );
                wants.push(w);
            }
            (wants, has)
        };

    let rates: Vec<f64> = {
        let mut rng = cfg.stream(sample_index, STREAM_RATES);
        (0..cfg.m).map(|_| uniform(&mut rng, cfg.rmin, cfg.rmax)).collect()
    };

    let deadlines: Vec<Vec<f64>> = {
        let mut rng = cfg.stream(sample_index, STREAM_DEADLINES);
        if let Some(_tc) = &cfg.two_class {
            // one shared deadline for every request
            let t = uniform(&mut rng, cfg.tmin, cfg.tmax);
            want_sets.iter().map(|w| vec![t; w.len()]).collect()
        } else {
            want_sets
                .iter()
                .map(|w| (0..w.len()).map(|_| uniform(&mut rng, cfg.tmin, cfg.tmax)).collect())
                .collect()
        }
    };

    let benefits: Vec<Vec<f64>> = if let Some(tc) = &cfg.two_class {
        // classes follow request enumeration order: (dest, packet) ascending
        let mut benefits: Vec<Vec<f64>> = Vec::with_capacity(cfg.m);
        let mut assigned = 0usize;
        let split = tc.requests / 2;
        for wants in &want_sets {
            benefits.push(
                wants
                    .iter()
                    .map(|_| {
                        let b = if assigned < split { tc.alpha_a } else { tc.alpha_b };
                        assigned += 1;
                        b
                    })
                    .collect(),
            );
        }
        benefits
    } else {
        let mut rng = cfg.stream(sample_index, STREAM_BENEFITS);
        want_sets
            .iter()
            .map(|w| {
                (0..w.len())
                    .map(|_| uniform(&mut rng, cfg.alpha_min, cfg.alpha_max))
                    .collect()
            })
            .collect()
    };

    let destinations = (0..cfg.m)
        .map(|i| Destination {
            id: format!("d{}", i + 1),
            max_rate: rates[i],
            has: has_sets[i].clone(),
            wants: want_sets[i]
                .iter()
                .enumerate()
                .map(|(k, &j)| {
                    (
                        j,
                        Request {
                            deadline: deadlines[i][k],
                            benefit: benefits[i][k],
                        },
                    )
                })
                .collect(),
        })
        .collect();

    Scenario {
        packet_size: cfg.packet_size,
        packets,
        destinations,
    }
}

/// Class-B request set of a two-class scenario, by enumeration order.
pub fn higher_benefit_requests(cfg: &GeneratorConfig, s: &Scenario) -> Option<BTreeSet<RequestId>> {
    let tc = cfg.two_class.as_ref()?;
    let split = tc.requests / 2;
    Some(s.requests().skip(split).map(|(id, _)| id).collect())
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub sweep_label: String,
    pub algorithm: Algorithm,
    pub sample: usize,
    pub total_benefit: f64,
    pub miss_ratio: f64,
    /// Fraction of satisfied requests that carry the higher benefit class;
    /// only present for two-class configs with at least one satisfaction.
    pub hb_success_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub sweep_label: String,
    pub algorithm: Algorithm,
    pub samples: usize,
    pub mean_benefit: f64,
    pub se_benefit: f64,
    pub mean_miss_ratio: f64,
    pub se_miss_ratio: f64,
    pub mean_hb_ratio: Option<f64>,
    pub se_hb_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<SampleRow>,
    pub summaries: Vec<Summary>,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

impl ExperimentResult {
    pub fn summary(&self, label: &str, algorithm: Algorithm) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.sweep_label == label && s.algorithm == algorithm)
    }

    /// Plot-ready CSV, one row per (sweep point, algorithm, sample).
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("sweep_param,algorithm,sample,total_benefit,miss_ratio,hb_success_ratio\n");
        for r in &self.rows {
            let hb = r.hb_success_ratio.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.sweep_label,
                r.algorithm.tag(),
                r.sample,
                r.total_benefit,
                r.miss_ratio,
                hb
            ));
        }
        out
    }
}

fn apply_sweep(cfg: &GeneratorConfig, point: &SweepPoint) -> Result<GeneratorConfig, HarnessError> {
    let mut eff = cfg.clone();
    eff.sweep = Vec::new();
    if let Some(n) = point.n {
        eff.n = n;
    }
    if let Some(m) = point.m {
        eff.m = m;
    }
    if let Some(v) = point.rmin {
        eff.rmin = v;
    }
    if let Some(v) = point.rmax {
        eff.rmax = v;
    }
    if let Some(v) = point.tmin {
        eff.tmin = v;
    }
    if let Some(v) = point.tmax {
        eff.tmax = v;
    }
    if let Some(v) = point.alpha_b {
        match &mut eff.two_class {
            Some(tc) => tc.alpha_b = v,
            None => {
                return Err(HarnessError::InvalidConfig(
                    "sweep overrides alpha_b but the config has no two_class section".to_string(),
                ))
            }
        }
    }
    eff.validate()?;
    Ok(eff)
}

/// Run every algorithm on the same generated scenario per sample, across all
/// sweep points (or a single base point when no sweep is configured).
/// `baseline` carries the field size and SIN-1 rate policy; its seed is
/// re-derived per sample.
pub fn run_experiment(
    cfg: &GeneratorConfig,
    algorithms: &[Algorithm],
    baseline: &BaselineConfig,
) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let base_point = SweepPoint {
        label: "base".to_string(),
        ..Default::default()
    };
    let points: Vec<SweepPoint> = if cfg.sweep.is_empty() {
        vec![base_point]
    } else {
        cfg.sweep.clone()
    };

    let mut rows = Vec::new();
    for point in &points {
        let eff = apply_sweep(cfg, point)?;
        for sample in 0..eff.samples {
            let s = generate_scenario(&eff, sample);
            debug_assert!(validate_scenario(&s).is_ok());
            let class_b = higher_benefit_requests(&eff, &s);
            for &algorithm in algorithms {
                let bcfg = BaselineConfig {
                    seed: mix_seed(eff.seed, sample as u64),
                    ..*baseline
                };
                let sched = run_algorithm(&s, algorithm, &bcfg)?;
                let hb = class_b.as_ref().and_then(|cb| {
                    let total = sched.satisfied.len();
                    if total == 0 {
                        return None;
                    }
                    let high = sched.satisfied.iter().filter(|id| cb.contains(id)).count();
                    Some(high as f64 / total as f64)
                });
                rows.push(SampleRow {
                    sweep_label: point.label.clone(),
                    algorithm,
                    sample,
                    total_benefit: sched.total_benefit,
                    miss_ratio: deadline_miss_ratio(&sched, &s),
                    hb_success_ratio: hb,
                });
            }
        }
    }

    let mut summaries = Vec::new();
    for point in &points {
        for &algorithm in algorithms {
            let selected: Vec<&SampleRow> = rows
                .iter()
                .filter(|r| r.sweep_label == point.label && r.algorithm == algorithm)
                .collect();
            let benefits: Vec<f64> = selected.iter().map(|r| r.total_benefit).collect();
            let misses: Vec<f64> = selected.iter().map(|r| r.miss_ratio).collect();
            let hbs: Vec<f64> = selected.iter().filter_map(|r| r.hb_success_ratio).collect();
            let (mean_benefit, se_benefit) = mean_and_se(&benefits);
            let (mean_miss_ratio, se_miss_ratio) = mean_and_se(&misses);
            let (mean_hb, se_hb) = mean_and_se(&hbs);
            summaries.push(Summary {
                sweep_label: point.label.clone(),
                algorithm,
                samples: selected.len(),
                mean_benefit,
                se_benefit,
                mean_miss_ratio,
                se_miss_ratio,
                mean_hb_ratio: (!hbs.is_empty()).then_some(mean_hb),
                se_hb_ratio: (!hbs.is_empty()).then_some(se_hb),
            });
        }
    }

    Ok(ExperimentResult { rows, summaries })
}

// ---------------------------------------------------------------------------
// Pairwise experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSampleRow {
    pub sample: usize,
    pub greedy_weight: f64,
    pub exact_weight: f64,
    /// greedy / exact; 1 by convention when both are zero.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseExperimentResult {
    pub rows: Vec<PairwiseSampleRow>,
}

impl PairwiseExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,greedy_weight,exact_weight,ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.sample, r.greedy_weight, r.exact_weight, r.ratio
            ));
        }
        out
    }
}

/// Generate one scenario per sample with every deadline forced to
/// `common_deadline`, then compare the pairwise greedy against the exact
/// optimum.
pub fn run_pairwise_experiment(
    cfg: &GeneratorConfig,
    common_deadline: f64,
    max_cliques: usize,
) -> Result<PairwiseExperimentResult, HarnessError> {
    cfg.validate()?;
    if !is_positive(common_deadline) {
        return Err(HarnessError::InvalidConfig(format!(
            "common deadline must be positive, got {common_deadline}"
        )));
    }
    let mut rows = Vec::new();
    for sample in 0..cfg.samples {
        let s = generate_common_deadline_scenario(cfg, sample, common_deadline);
        let inst = pairwise::enumerate(&s, common_deadline)?;
        let run = pairwise::greedy(&inst);
        let (_, exact_weight) = pairwise::exact(&inst, max_cliques)?;
        let ratio = if exact_weight <= EPS {
            1.0
        } else {
            run.total_weight / exact_weight
        };
        rows.push(PairwiseSampleRow {
            sample,
            greedy_weight: run.total_weight,
            exact_weight,
            ratio,
        });
    }
    Ok(PairwiseExperimentResult { rows })
}

/// A generated scenario with all deadlines replaced by one common value.
pub fn generate_common_deadline_scenario(
    cfg: &GeneratorConfig,
    sample_index: usize,
    common_deadline: f64,
) -> Scenario {
    let mut s = generate_scenario(cfg, sample_index);
    for d in &mut s.destinations {
        for req in d.wants.values_mut() {
            req.deadline = common_deadline;
        }
    }
    s
}
