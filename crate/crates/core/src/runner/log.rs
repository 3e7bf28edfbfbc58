//! Append-only run logs as JSON lines. Every line is a complete record, so any
//! prefix of a log file is itself a valid log.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::game::PolicyParams;
use crate::graph::GraphKind;
use crate::matrix::Matrix;
use crate::metagame::NashSolution;
use crate::metrics::{MetricsRecord, TrajectoryLog};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub run_id: String,
    pub seed: u64,
    pub period: u64,
    #[serde(flatten)]
    pub body: RecordBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RecordBody {
    Config { config: Box<ExperimentConfig> },
    Graph { snapshot_id: u64, kind: GraphKind, weights: Matrix },
    Trajectory { params: Vec<PolicyParams> },
    Metrics { metrics: MetricsRecord },
    Event { event: Event },
    Final { params: Vec<PolicyParams>, payoff: Matrix, nash: Option<NashSolution>, effective_diversity: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    /// Rows without edges were given self-play.
    GraphFallback {
        snapshot_id: u64,
        rows: Vec<usize>,
    },
    UpdateSkipped {
        learner: usize,
        step: u64,
        reason: String,
    },
    /// The adaptive-graph Nash could not be certified; the previous graph stays.
    SolverFailure {
        message: String,
        exploitability: f64,
    },
}

/// Destination for records as they are produced.
pub trait RecordSink {
    fn push(&mut self, record: Record) -> Result<()>;
}

impl RecordSink for Vec<Record> {
    fn push(&mut self, record: Record) -> Result<()> {
        Vec::push(self, record);
        Ok(())
    }
}

/// Writes each record as one line and flushes it immediately.
pub struct JsonlWriter<W: Write> {
    out: W,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl JsonlWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self::new(BufWriter::new(File::create(path)?)))
    }
}

impl<W: Write> RecordSink for JsonlWriter<W> {
    fn push(&mut self, record: Record) -> Result<()> {
        let mut line = serde_json::to_vec(&record)?;
        line.push(b'\n');
        self.out.write_all(&line)?;
        self.out.flush()?;
        Ok(())
    }
}

/// Forwards every record to two sinks.
pub struct Tee<'a, A: RecordSink, B: RecordSink>(pub &'a mut A, pub &'a mut B);

impl<A: RecordSink, B: RecordSink> RecordSink for Tee<'_, A, B> {
    fn push(&mut self, record: Record) -> Result<()> {
        self.0.push(record.clone())?;
        self.1.push(record)
    }
}

/// All records of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub run_id: String,
    pub seed: u64,
    pub records: Vec<Record>,
}

impl RunLog {
    pub fn from_records(records: Vec<Record>) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::Parse("run log is empty".into()))?;
        Ok(Self { run_id: first.run_id.clone(), seed: first.seed, records })
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut records = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), n + 1)))?;
            records.push(record);
        }
        Self::from_records(records)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut w = JsonlWriter::create(path)?;
        for r in &self.records {
            w.push(r.clone())?;
        }
        Ok(())
    }

    pub fn config(&self) -> Option<&ExperimentConfig> {
        self.records.iter().find_map(|r| match &r.body {
            RecordBody::Config { config } => Some(config.as_ref()),
            _ => None,
        })
    }

    pub fn graph_kind(&self) -> Option<GraphKind> {
        self.config().map(|c| c.graph)
    }

    pub fn metrics(&self) -> impl Iterator<Item = &MetricsRecord> {
        self.records.iter().filter_map(|r| match &r.body {
            RecordBody::Metrics { metrics } => Some(metrics),
            _ => None,
        })
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.records.iter().filter_map(|r| match &r.body {
            RecordBody::Event { event } => Some(event),
            _ => None,
        })
    }

    /// Graph snapshots in order, keyed by snapshot id.
    pub fn graphs(&self) -> impl Iterator<Item = (u64, &Matrix)> {
        self.records.iter().filter_map(|r| match &r.body {
            RecordBody::Graph { snapshot_id, weights, .. } => Some((*snapshot_id, weights)),
            _ => None,
        })
    }

    pub fn trajectory(&self) -> Result<TrajectoryLog> {
        let mut log: Option<TrajectoryLog> = None;
        for r in &self.records {
            if let RecordBody::Trajectory { params } = &r.body {
                let t = log.get_or_insert_with(|| TrajectoryLog::new(params.len()));
                t.push(r.period, params.clone())?;
            }
        }
        Ok(log.unwrap_or_default())
    }

    /// Final parameters: from the final record, else the last trajectory point.
    pub fn final_params(&self) -> Option<Vec<PolicyParams>> {
        self.records.iter().rev().find_map(|r| match &r.body {
            RecordBody::Final { params, .. } | RecordBody::Trajectory { params } => Some(params.clone()),
            _ => None,
        })
    }

    /// Serialized metric lines, for byte-level comparisons between runs.
    pub fn metric_lines(&self) -> Result<Vec<String>> {
        self.records
            .iter()
            .filter(|r| matches!(r.body, RecordBody::Metrics { .. }))
            .map(|r| serde_json::to_string(r).map_err(Error::from))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn metrics_record(period: u64) -> Record {
        Record {
            run_id: "r".into(),
            seed: 1,
            period,
            body: RecordBody::Metrics {
                metrics: MetricsRecord {
                    period,
                    effective_diversity: 0.25,
                    rpp_vs_evaluators: BTreeMap::from([("gt".to_string(), -0.1)]),
                    convergence: -0.01,
                    coverage: Some(1.0),
                    graph_snapshot_ref: 0,
                },
            },
        }
    }

    #[test]
    fn jsonl_round_trip_and_prefix_validity() {
        let mut w = JsonlWriter::new(Vec::new());
        for p in 0..3 {
            w.push(metrics_record(p)).unwrap();
        }
        w.push(Record {
            run_id: "r".into(),
            seed: 1,
            period: 2,
            body: RecordBody::Event { event: Event::GraphFallback { snapshot_id: 0, rows: vec![0] } },
        })
        .unwrap();
        let bytes = w.into_inner();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        for k in 1..=lines.len() {
            let records: Vec<Record> = lines[..k].iter().map(|l| serde_json::from_str(l).unwrap()).collect();
            let log = RunLog::from_records(records).unwrap();
            assert_eq!(log.run_id, "r");
        }
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["type"], "metrics");
        assert_eq!(first["period"], 0);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(RunLog::from_records(vec![]).is_err());
    }
}
