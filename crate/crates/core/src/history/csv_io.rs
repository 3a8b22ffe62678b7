//! CSV export and import.
//!
//! Header: `agent,sim,t,choice,reward,optimal_reward,optimal_arm,propensity`,
//! followed by `context_d,context_k,context_x` when any record carries a
//! context and `theta_json` when any record carries a theta snapshot.
//! `context_x` holds the `d × k` matrix in column-major order, values
//! separated by single spaces. Missing values are empty fields; floats use
//! [`fmt_g17`].

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use super::{fmt_g17, HistoryLog, StepRecord};
use crate::context::ContextSnapshot;

const BASE_HEADER: [&str; 8] = [
    "agent",
    "sim",
    "t",
    "choice",
    "reward",
    "optimal_reward",
    "optimal_arm",
    "propensity",
];

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("missing column {0}")]
    MissingColumn(&'static str),
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_g17).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl HistoryLog {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), HistoryError> {
        let with_context = self.records.iter().any(|r| r.context.is_some());
        let with_theta = self.records.iter().any(|r| r.theta.is_some());
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);

        let mut header: Vec<&str> = BASE_HEADER.to_vec();
        if with_context {
            header.extend(["context_d", "context_k", "context_x"]);
        }
        if with_theta {
            header.push("theta_json");
        }
        out.write_record(&header)?;

        for r in &self.records {
            let mut row = vec![
                r.agent.to_string(),
                r.sim.to_string(),
                r.t.to_string(),
                r.choice.to_string(),
                fmt_g17(r.reward),
                opt_f64(r.optimal_reward),
                opt_usize(r.optimal_arm),
                opt_f64(r.propensity),
            ];
            if with_context {
                match r.context.as_deref() {
                    Some(ctx) => {
                        row.push(opt_usize(ctx.d));
                        row.push(ctx.k.to_string());
                        row.push(
                            ctx.x
                                .as_ref()
                                .map(|x| {
                                    x.iter().map(|&v| fmt_g17(v)).collect::<Vec<_>>().join(" ")
                                })
                                .unwrap_or_default(),
                        );
                    }
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
            }
            if with_theta {
                row.push(r.theta.as_ref().map(|t| t.to_string()).unwrap_or_default());
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, HistoryError> {
        let mut input = csv::Reader::from_reader(reader);
        let headers = input.headers()?.clone();
        let col = |name: &'static str| headers.iter().position(|h| h == name);
        let need = |name: &'static str| col(name).ok_or(HistoryError::MissingColumn(name));
        let (c_agent, c_sim, c_t, c_choice, c_reward) = (
            need("agent")?,
            need("sim")?,
            need("t")?,
            need("choice")?,
            need("reward")?,
        );
        let c_opt = col("optimal_reward");
        let c_opt_arm = col("optimal_arm");
        let c_prop = col("propensity");
        let (c_d, c_k, c_x) = (col("context_d"), col("context_k"), col("context_x"));
        let c_theta = col("theta_json");

        let mut agents: Vec<Arc<str>> = Vec::new();
        let mut records = Vec::new();
        for row in input.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let err = |message: String| HistoryError::Parse { line, message };
            let field = |c: usize| row.get(c).unwrap_or("");
            let opt = |c: Option<usize>| c.map(field).filter(|s| !s.is_empty());
            let float = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));

            let name = field(c_agent);
            let agent = match agents.iter().find(|a| &***a == name) {
                Some(a) => a.clone(),
                None => {
                    let a: Arc<str> = Arc::from(name);
                    agents.push(a.clone());
                    a
                }
            };

            let context = match opt(c_k) {
                Some(k) => {
                    let k = int(k)?;
                    let d = opt(c_d).map(int).transpose()?;
                    let x = match (d, opt(c_x)) {
                        (Some(d), Some(xs)) => {
                            let values = xs.split(' ').map(float).collect::<Result<Vec<_>, _>>()?;
                            if values.len() != d * k {
                                return Err(err(format!(
                                    "context_x has {} values, expected {}",
                                    values.len(),
                                    d * k
                                )));
                            }
                            Some(DMatrix::from_column_slice(d, k, &values))
                        }
                        _ => None,
                    };
                    Some(Box::new(ContextSnapshot {
                        k,
                        d,
                        x,
                        arms: None,
                        expected_rewards: None,
                    }))
                }
                None => None,
            };
            let theta = opt(c_theta)
                .map(|s| serde_json::from_str(s).map_err(|e| err(format!("theta_json: {e}"))))
                .transpose()?
                .map(Box::new);

            records.push(StepRecord {
                agent,
                sim: int(field(c_sim))?,
                t: int(field(c_t))?,
                choice: int(field(c_choice))?,
                reward: float(field(c_reward))?,
                optimal_reward: opt(c_opt).map(float).transpose()?,
                optimal_arm: opt(c_opt_arm).map(int).transpose()?,
                propensity: opt(c_prop).map(float).transpose()?,
                context,
                theta,
            });
        }
        Ok(HistoryLog::from_records(records))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HistoryError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HistoryError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// The CSV export as a string.
    pub fn to_csv_string(&self) -> Result<String, HistoryError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
