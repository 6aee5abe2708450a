//! Running scenarios, alone or in parallel batches.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use super::export::{chain_text, emit_control, emit_trajectory, format_f64, report_text, write_text};
use super::scenario::{Artifact, Scenario};
use crate::controls::ControlSignal;
use crate::policies::build_policy;
use crate::strategy::{play_pursuit, z_rhs, PursuitOutcome};

/// A completed scenario: the evader signal that was played and the result.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub nu: ControlSignal,
    pub outcome: PursuitOutcome,
    pub z_rhs: f64,
}

pub fn run_scenario(scenario: &Scenario) -> crate::Result<ScenarioRun> {
    let nu = build_policy(&scenario.policy, &scenario.params, scenario.grid_n)?;
    let outcome = play_pursuit(&scenario.params, &nu)?;
    Ok(ScenarioRun {
        nu,
        outcome,
        z_rhs: z_rhs(&scenario.params),
    })
}

/// Writes the artifacts a scenario asked for into `out_dir`.
pub fn write_artifacts(scenario: &Scenario, run: &ScenarioRun, out_dir: &Path) -> Result<(), String> {
    let label = &scenario.label;
    for artifact in &scenario.outputs {
        let result = match artifact {
            Artifact::Report => write_text(
                &out_dir.join(format!("{label}.report.toml")),
                &report_text(label, &run.outcome.report, run.z_rhs),
            ),
            Artifact::Chain => write_text(
                &out_dir.join(format!("{label}.chain.toml")),
                &chain_text(&run.outcome.report.chain),
            ),
            Artifact::Trajectory => emit_trajectory(
                &run.outcome.trajectory,
                &out_dir.join(format!("{label}.trajectory.csv")),
            ),
            Artifact::Control => emit_control(&run.nu, &out_dir.join(format!("{label}.control.csv"))),
        };
        result.map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// One batch input: a parsed scenario, or the reason it could not be parsed.
#[derive(Debug, Clone)]
pub struct BatchEntry {
    /// Label used in the summary when the scenario did not parse.
    pub name: String,
    pub scenario: Result<Scenario, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowValues {
    pub captured: bool,
    pub miss: f64,
    pub strategy_energy: f64,
    pub gamma_sq: f64,
    pub z_satisfied: Option<bool>,
    pub chain: [bool; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub outcome: Result<RowValues, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub rows: Vec<SummaryRow>,
}

impl BatchSummary {
    pub fn all_captured(&self) -> bool {
        self.rows
            .iter()
            .all(|r| matches!(&r.outcome, Ok(v) if v.captured))
    }

    /// 0 iff every scenario ran and was captured.
    pub fn exit_code(&self) -> i32 {
        if self.all_captured() {
            0
        } else {
            1
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = [
            "label", "status", "captured", "miss", "strategy_energy", "gamma_sq", "z_satisfied",
            "chain_a", "chain_b", "chain_c", "chain_d", "message",
        ];
        w.write_record(header).expect("in-memory write");
        for row in &self.rows {
            let record: Vec<String> = match &row.outcome {
                Ok(v) => {
                    let mut r = vec![
                        row.label.clone(),
                        "ok".to_string(),
                        v.captured.to_string(),
                        format_f64(v.miss),
                        format_f64(v.strategy_energy),
                        format_f64(v.gamma_sq),
                        v.z_satisfied.map_or("n/a".to_string(), |b| b.to_string()),
                    ];
                    r.extend(v.chain.iter().map(|b| if *b { "pass" } else { "fail" }.to_string()));
                    r.push(String::new());
                    r
                }
                Err(msg) => {
                    let mut r = vec![row.label.clone(), "error".to_string()];
                    r.extend(std::iter::repeat_n(String::new(), 9));
                    r.push(msg.clone());
                    r
                }
            };
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

fn execute(scenario: &Scenario, out_dir: Option<&Path>) -> Result<RowValues, String> {
    let run = run_scenario(scenario).map_err(|e| e.to_string())?;
    if let Some(dir) = out_dir {
        write_artifacts(scenario, &run, dir)?;
    }
    let r = &run.outcome.report;
    let mut chain = [false; 4];
    for (slot, line) in chain.iter_mut().zip(&r.chain.lines) {
        *slot = line.passed;
    }
    Ok(RowValues {
        captured: r.captured,
        miss: r.miss,
        strategy_energy: r.strategy_energy,
        gamma_sq: r.gamma_sq,
        z_satisfied: r.z_satisfied,
        chain,
    })
}

/// Runs every entry on at most `parallelism` threads. Rows keep input order.
pub fn run_batch(entries: &[BatchEntry], parallelism: usize, out_dir: Option<&Path>) -> BatchSummary {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in entries {
        if let Ok(s) = &e.scenario {
            *counts.entry(s.label.as_str()).or_default() += 1;
        }
    }
    let job = |e: &BatchEntry| -> SummaryRow {
        match &e.scenario {
            Err(msg) => SummaryRow {
                label: e.name.clone(),
                outcome: Err(msg.clone()),
            },
            Ok(s) if counts[s.label.as_str()] > 1 => SummaryRow {
                label: s.label.clone(),
                outcome: Err(format!("duplicate label `{}` in batch", s.label)),
            },
            Ok(s) => SummaryRow {
                label: s.label.clone(),
                outcome: execute(s, out_dir),
            },
        }
    };
    let rows = match rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| entries.par_iter().map(job).collect()),
        Err(_) => entries.iter().map(job).collect(),
    };
    BatchSummary { rows }
}
