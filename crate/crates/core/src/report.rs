//! Run reports: one JSON document and one flat CSV row per experiment.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::inequalities::{ConstantsTable, InequalityReport, Verdict};
use crate::prm::{CfReport, PoissonLemmaRow};
use crate::Result;

pub const CSV_HEADER: &str = "id,kind,inequality,p,param,N,seed,lhs,se_lhs,rhs,se_rhs,constant,variant,ratio,\
measured_constant,m0,verdict,other_variants,runtime_ms,config_hash";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteOutcome {
    pub check: String,
    pub p: f64,
    pub instances: usize,
    pub passed: usize,
    /// Instances on which the statement applied (good-λ only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub applicable: Option<usize>,
    /// The instance with the largest measured constant.
    pub worst: Option<WorstInstance>,
    pub reports: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstInstance {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub measured_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonLemmaOutcome {
    pub rows: Vec<PoissonLemmaRow>,
    /// `max |E|ξ−λ|² − λ|` over the grid rows with `p = 2`.
    pub p2_max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "data", rename_all = "kebab-case")]
pub enum Outcome {
    Continuous(InequalityReport),
    Discrete(DiscreteOutcome),
    Constants(ConstantsTable),
    Cf(CfReport),
    PoissonLemma(PoissonLemmaOutcome),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub id: String,
    pub base_id: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepPoint>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    pub outcome: Outcome,
}

/// Trend over the points of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub base_id: String,
    pub parameter: String,
    pub values: Vec<f64>,
    pub lhs: Vec<f64>,
    pub se_lhs: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `|lhs_{k+1} − lhs_k|`.
    pub lhs_differences: Vec<f64>,
    /// `3(SE_k + SE_{k+1})` for each consecutive pair.
    pub combined_3se: Vec<f64>,
    /// Consecutive pairs whose difference is within `combined_3se`.
    pub pairs_within_3se: Vec<bool>,
    /// The last consecutive pair agrees within its combined 3 SE.
    pub tail_cauchy: bool,
    /// "nondecreasing", "nonincreasing" or "mixed".
    pub ratio_trend: String,
    /// `SE·√N` per point (constant when the SE scales like `1/√N`).
    pub se_sqrt_n: Vec<f64>,
}

impl SweepSummary {
    pub fn from_results(results: &[&ExperimentResult]) -> Option<Self> {
        let first = results.first()?;
        let param = first.sweep.as_ref()?.parameter.clone();
        let mut s = SweepSummary {
            base_id: first.base_id.clone(),
            parameter: param,
            values: Vec::new(),
            lhs: Vec::new(),
            se_lhs: Vec::new(),
            ratios: Vec::new(),
            lhs_differences: Vec::new(),
            combined_3se: Vec::new(),
            pairs_within_3se: Vec::new(),
            tail_cauchy: true,
            ratio_trend: String::new(),
            se_sqrt_n: Vec::new(),
        };
        for r in results {
            s.values.push(r.sweep.as_ref().map_or(f64::NAN, |p| p.value));
            let (lhs, se, ratio, n) = match &r.outcome {
                Outcome::Continuous(rep) => {
                    (rep.primary.lhs.mean, rep.primary.lhs.se, rep.primary.ratio, rep.paths as f64)
                }
                Outcome::Cf(rep) => (rep.sup_error, 0.0, rep.sup_error / rep.tolerance, rep.paths as f64),
                _ => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            s.lhs.push(lhs);
            s.se_lhs.push(se);
            s.ratios.push(ratio);
            s.se_sqrt_n.push(se * n.sqrt());
        }
        for k in 1..s.lhs.len() {
            let d = (s.lhs[k] - s.lhs[k - 1]).abs();
            let band = 3.0 * (s.se_lhs[k] + s.se_lhs[k - 1]);
            s.lhs_differences.push(d);
            s.combined_3se.push(band);
            s.pairs_within_3se.push(d <= band);
        }
        s.tail_cauchy = s.pairs_within_3se.last().copied().unwrap_or(true);
        let up = s.ratios.windows(2).all(|w| w[1] >= w[0]);
        let down = s.ratios.windows(2).all(|w| w[1] <= w[0]);
        s.ratio_trend = match (up, down) {
            (true, _) => "nondecreasing",
            (_, true) => "nonincreasing",
            _ => "mixed",
        }
        .into();
        Some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub config_hash: String,
    pub seed: u64,
    pub results: Vec<ExperimentResult>,
    pub sweeps: Vec<SweepSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl RunReport {
    pub fn new(config_hash: String, seed: u64, results: Vec<ExperimentResult>) -> Self {
        let mut sweeps = Vec::new();
        let mut i = 0;
        while i < results.len() {
            let base = &results[i].base_id;
            let mut j = i;
            while j < results.len() && &results[j].base_id == base {
                j += 1;
            }
            if results[i].sweep.is_some() {
                let group: Vec<&ExperimentResult> = results[i..j].iter().collect();
                sweeps.extend(SweepSummary::from_results(&group));
            }
            i = j;
        }
        Self { schema: SCHEMA_VERSION, config_hash, seed, results, sweeps }
    }

    /// 0 when every verdict is a pass (possibly with a degenerate constant), 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().all(|r| r.verdict.is_ok()) {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.results {
            out.push_str(&csv_row(r, self.seed, &self.config_hash).join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `report.json` and/or `report.csv` into `dir`.
    pub fn write(&self, dir: &Path, format: Format) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        if matches!(format, Format::Json | Format::Both) {
            std::fs::write(dir.join("report.json"), self.to_json()?)?;
        }
        if matches!(format, Format::Csv | Format::Both) {
            std::fs::write(dir.join("report.csv"), self.to_csv())?;
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_row(r: &ExperimentResult, seed: u64, hash: &str) -> Vec<String> {
    let blank = String::new;
    let mut f: [String; 20] = Default::default();
    f[0] = r.id.replace(',', ";");
    f[1] = r.kind.clone();
    f[6] = seed.to_string();
    f[16] = r.verdict.as_str().into();
    f[18] = r.runtime_ms.map_or_else(blank, |v| v.to_string());
    f[19] = hash.into();
    match &r.outcome {
        Outcome::Continuous(rep) => {
            let c = &rep.primary;
            f[2] = rep.inequality.clone();
            f[3] = num(rep.p);
            f[4] = num(rep.param);
            f[5] = rep.paths.to_string();
            f[7] = num(c.lhs.mean);
            f[8] = num(c.lhs.se);
            f[9] = num(c.rhs.mean);
            f[10] = num(c.rhs.se);
            f[11] = num(c.constant);
            f[12] = c.variant.clone();
            f[13] = num(c.ratio);
            f[14] = num(c.measured_constant);
            let others: Vec<String> = rep
                .variants
                .iter()
                .map(|v| {
                    format!("{}:{}:ratio={}:measured={}", v.variant, v.verdict.as_str(), v.ratio, v.measured_constant)
                })
                .collect();
            f[17] = others.join(";");
        }
        Outcome::Discrete(d) => {
            f[2] = d.check.clone();
            f[3] = num(d.p);
            f[5] = d.instances.to_string();
            if let Some(w) = d.worst {
                f[7] = num(w.lhs);
                f[9] = num(w.rhs);
                f[11] = num(w.constant);
                f[13] = num(crate::filtration::measured_constant(w.lhs, w.rhs));
                f[14] = num(w.measured_constant);
            }
            f[12] = format!("passed={}/{}", d.passed, d.instances);
            if let Some(a) = d.applicable {
                f[17] = format!("applicable={a}");
            }
        }
        Outcome::Constants(t) => {
            f[2] = "constants".into();
            f[3] = num(t.p);
            f[4] = num(t.r);
            f[11] = num(t.const_ii);
            f[12] = "const_ii".into();
            f[15] = t.m0.to_string();
            let join = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join("|");
            f[17] = format!(
                "const_i={};bar_c_statement={};bar_c_proof={};n={}",
                num(t.const_i),
                join(&t.bar_c_statement),
                join(&t.bar_c_proof),
                t.n
            );
        }
        Outcome::Cf(c) => {
            f[2] = "levy-khinchin".into();
            f[4] = num(c.t);
            f[5] = c.paths.to_string();
            f[7] = num(c.sup_error);
            f[9] = num(c.tolerance);
            f[11] = "1".into();
            f[12] = "sup-error-vs-4/sqrt(N)".into();
            f[13] = num(c.sup_error / c.tolerance);
        }
        Outcome::PoissonLemma(pl) => {
            f[2] = "poisson-moment".into();
            f[4] = pl.rows.len().to_string();
            let worst = pl.rows.iter().map(|r| r.value / r.bound).fold(0.0, f64::max);
            f[7] = num(worst);
            f[9] = "1".into();
            f[11] = "1".into();
            f[12] = "max-value/bound".into();
            f[13] = num(worst);
            let mut s = String::new();
            let _ = write!(s, "p2_max_deviation={}", pl.p2_max_deviation);
            f[17] = s;
        }
    }
    f.into_iter().collect()
}
