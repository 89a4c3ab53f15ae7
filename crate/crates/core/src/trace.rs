//! Timestamped event records of a simulation run, their NDJSON encoding, and
//! the verdict vocabulary shared by the engine, the offline monitor and the
//! analysis layer.
//!
//! A trace file is newline-delimited JSON: one header record followed by
//! event records whose times never decrease. Replaying the header's seed on
//! the same configuration reproduces the records byte for byte.

use crate::sched::SchedLocation;
use crate::task::TaskLocation;
use crate::time::{Dur, TimePoint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub config_hash: String,
    pub seed: u64,
    pub horizon: TimePoint,
    /// "stochastic" or "scripted" (exhaustive-exploration witness).
    pub mode: String,
    /// Scope: "global" or the slice partition id.
    pub scope: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortSide {
    Src,
    Dst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WriteOp {
    /// Task or message interface writing the source port.
    Send,
    /// UDP/IP receive path delivering a complete message to a destination
    /// port (resets the sampling refresh clock).
    Deliver,
}

/// The three schedulability violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum ViolationKind {
    DeadlineMiss { task: String, job: u64 },
    RefreshViolation { message: String, partition: String, age: Dur },
    QueuingOverflow { message: String, partition: String, side: PortSide },
}

impl ViolationKind {
    /// Subject the violation is attributed to, for reports.
    pub fn subject(&self) -> String {
        match self {
            ViolationKind::DeadlineMiss { task, .. } => task.clone(),
            ViolationKind::RefreshViolation { message, partition, .. } => format!("{message}@{partition}"),
            ViolationKind::QueuingOverflow { message, partition, side } => match side {
                PortSide::Src => format!("{message}@{partition}(src)"),
                PortSide::Dst => format!("{message}@{partition}"),
            },
        }
    }
}

/// Model-integrity faults; these abort a run without deciding schedulability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFaultKind {
    /// FIFO shortage or error propagation on a virtual link.
    VlError,
    /// More frames in flight than the route permits.
    LinkError,
    /// Internal invariant broken.
    InvariantFault,
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    NoViolationWithinHorizon,
    Violation { kind: ViolationKind, time: TimePoint },
    ModelFault { kind: ModelFaultKind, time: TimePoint, detail: String },
}

impl Verdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, Verdict::Violation { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    JobRelease {
        job: u64,
        deadline: TimePoint,
    },
    JobEnd {
        job: u64,
    },
    TaskState {
        state: TaskLocation,
    },
    SchedState {
        location: SchedLocation,
        running: Option<String>,
    },
    PartitionWindow {
        inside: bool,
    },
    /// Write attempt on a port; overflow outcomes are recomputed by the
    /// offline monitor from the record stream.
    PortWrite {
        message: String,
        partition: String,
        side: PortSide,
        op: WriteOp,
        #[serde(skip_serializing_if = "Option::is_none")]
        job: Option<u64>,
    },
    /// Read attempt on a destination port by a task.
    PortRead {
        message: String,
        partition: String,
        hit: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        age: Option<Dur>,
    },
    IfaceEmit {
        message: String,
        seq: u64,
    },
    /// UDP/IP transmit forwarding activity (start and completion).
    IpForward {
        message: String,
        done: bool,
    },
    /// Frame emission started on a VL (entering the Sending location).
    VlSending {
        frame: u64,
    },
    /// Frame departed the source end system.
    VlDepart {
        frame: u64,
        message: String,
    },
    /// Frame delivered to a destination module's FIFO.
    VlDeliver {
        frame: u64,
        module: String,
        message: String,
        entered: TimePoint,
    },
    /// Reassembly of one fragment finished; `complete` names the message
    /// forwarded to its destination port(s), if finished.
    Reassembly {
        #[serde(skip_serializing_if = "Option::is_none")]
        complete: Option<String>,
    },
    Violation {
        #[serde(flatten)]
        violation: ViolationKind,
    },
    ModelFault {
        fault: ModelFaultKind,
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: TimePoint,
    pub subject: String,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("empty trace")]
    Empty,
    #[error("malformed trace line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl Trace {
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&self.header).expect("header serializes"));
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Trace, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let header: TraceHeader = serde_json::from_str(first)
            .map_err(|e| TraceError::Malformed { line: 1, message: e.to_string() })?;
        let mut records = Vec::new();
        for (i, line) in lines {
            let rec: TraceRecord = serde_json::from_str(line)
                .map_err(|e| TraceError::Malformed { line: i + 1, message: e.to_string() })?;
            records.push(rec);
        }
        Ok(Trace { header, records })
    }
}

/// Trace recording switch: exploration runs with recording off.
#[derive(Debug)]
pub enum TraceSink {
    Off,
    On(Vec<TraceRecord>),
}

impl TraceSink {
    pub fn push(&mut self, t: TimePoint, subject: &str, event: TraceEvent) {
        if let TraceSink::On(records) = self {
            records.push(TraceRecord { t, subject: subject.to_string(), event });
        }
    }

    pub fn records(self) -> Vec<TraceRecord> {
        match self {
            TraceSink::Off => Vec::new(),
            TraceSink::On(r) => r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ndjson_roundtrip() {
        let trace = Trace {
            header: TraceHeader {
                config_hash: "abc".into(),
                seed: 7,
                horizon: 100_000,
                mode: "stochastic".into(),
                scope: "global".into(),
            },
            records: vec![
                TraceRecord {
                    t: 8_088,
                    subject: "port:Msg2@P3".into(),
                    event: TraceEvent::PortWrite {
                        message: "Msg2".into(),
                        partition: "P3".into(),
                        side: PortSide::Dst,
                        op: WriteOp::Deliver,
                        job: None,
                    },
                },
                TraceRecord {
                    t: 60_000,
                    subject: "Tsk3_2".into(),
                    event: TraceEvent::Violation {
                        violation: ViolationKind::RefreshViolation {
                            message: "Msg2".into(),
                            partition: "P3".into(),
                            age: 51_912,
                        },
                    },
                },
            ],
        };
        let text = trace.to_ndjson();
        assert_eq!(text.lines().count(), 3);
        let back = Trace::from_ndjson(&text).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn malformed_line_reports_position() {
        let text = "{\"config_hash\":\"x\",\"seed\":0,\"horizon\":1,\"mode\":\"stochastic\",\"scope\":\"global\"}\nnot json\n";
        match Trace::from_ndjson(text) {
            Err(TraceError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed, got {other:?}"),
        }
    }
}
