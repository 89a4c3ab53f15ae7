//! System configuration: declarative description of modules, partition
//! schedules, tasks, mutexes, messages, virtual links and network constants.
//!
//! Configurations are ingested from JSON (see `parse_config`). Durations are
//! written as strings with a unit suffix (`"25ms"`, `"800us"`) and scaled to
//! integer microseconds at parse time. A parsed [`SystemConfig`] is immutable
//! and safe to share read-only across concurrent analysis workers.

mod validate;

pub use validate::{validate, Diagnostic, Severity};

use crate::time::{parse_duration, Dur, DurParseError, DurRange};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Serde adapter: `Dur` as a suffixed string ("25ms").
mod dur_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Dur, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::time::format_duration(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Dur, D::Error> {
        let raw = String::deserialize(d)?;
        parse_duration(&raw).map_err(D::Error::custom)
    }
}

/// Serde adapter: `DurRange` as a two-element array of suffixed strings.
mod range_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DurRange, s: S) -> Result<S::Ok, S::Error> {
        let pair = [crate::time::format_duration(v.lo), crate::time::format_duration(v.hi)];
        pair.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DurRange, D::Error> {
        let pair = <[String; 2]>::deserialize(d)?;
        let lo = parse_duration(&pair[0]).map_err(D::Error::custom)?;
        let hi = parse_duration(&pair[1]).map_err(D::Error::custom)?;
        Ok(DurRange { lo, hi })
    }
}

mod dur_vec_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Dur], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|d| crate::time::format_duration(*d)).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Dur>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter().map(|x| parse_duration(x).map_err(D::Error::custom)).collect()
    }
}

/// One partition window within the major frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionWindow {
    pub partition: String,
    #[serde(with = "dur_str")]
    pub offset: Dur,
    #[serde(with = "dur_str")]
    pub duration: Dur,
}

impl PartitionWindow {
    pub fn start(&self) -> Dur {
        self.offset
    }

    pub fn end(&self) -> Dur {
        self.offset + self.duration
    }
}

/// TDM schedule of one module: windows repeat every `major_frame`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSchedule {
    pub module: String,
    #[serde(with = "dur_str")]
    pub major_frame: Dur,
    pub windows: Vec<PartitionWindow>,
}

/// Release pattern of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Release {
    Periodic {
        #[serde(with = "dur_str")]
        period: Dur,
    },
    Sporadic {
        #[serde(with = "dur_str")]
        min_separation: Dur,
        /// Empirical rate of the exponential extra separation, events per
        /// millisecond. Defaults to one event per minimum separation.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smc_rate_per_ms: Option<f64>,
    },
}

impl Release {
    /// Period for periodic tasks, minimum separation for sporadic ones.
    pub fn cadence(&self) -> Dur {
        match self {
            Release::Periodic { period } => *period,
            Release::Sporadic { min_separation, .. } => *min_separation,
        }
    }

    pub fn is_sporadic(&self) -> bool {
        matches!(self, Release::Sporadic { .. })
    }

    /// Exponential rate per microsecond for the sporadic extra separation.
    pub fn sporadic_rate_per_us(&self) -> Option<f64> {
        match self {
            Release::Periodic { .. } => None,
            Release::Sporadic { min_separation, smc_rate_per_ms } => Some(match smc_rate_per_ms {
                Some(r) => r / 1000.0,
                None => 1.0 / (*min_separation).max(1) as f64,
            }),
        }
    }
}

/// One abstract instruction of a task body. The trailing `End` is implicit in
/// the configuration file and appended at parse time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instruction {
    Compute {
        #[serde(with = "dur_str")]
        bcet: Dur,
        #[serde(with = "dur_str")]
        wcet: Dur,
    },
    Lock(String),
    Unlock(String),
    Delay(#[serde(with = "dur_str")] Dur),
    Send(String),
    Receive(String),
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub partition: String,
    pub release: Release,
    #[serde(with = "dur_str", default)]
    pub offset: Dur,
    #[serde(with = "dur_str", default)]
    pub jitter: Dur,
    #[serde(with = "dur_str")]
    pub deadline: Dur,
    /// Smaller number means higher priority.
    pub priority: u32,
    #[serde(serialize_with = "ser_chunks", deserialize_with = "de_chunks")]
    pub chunks: Vec<Instruction>,
}

fn ser_chunks<S: Serializer>(chunks: &[Instruction], s: S) -> Result<S::Ok, S::Error> {
    // The implicit trailing End is not written out.
    let body: Vec<&Instruction> = chunks.iter().filter(|i| !matches!(i, Instruction::End)).collect();
    body.serialize(s)
}

fn de_chunks<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Instruction>, D::Error> {
    let mut chunks = Vec::<Instruction>::deserialize(d)?;
    chunks.retain(|i| !matches!(i, Instruction::End));
    chunks.push(Instruction::End);
    Ok(chunks)
}

impl TaskSpec {
    /// Sum of worst-case execution times over all compute chunks.
    pub fn wcet_sum(&self) -> Dur {
        self.chunks
            .iter()
            .map(|c| match c {
                Instruction::Compute { wcet, .. } => *wcet,
                _ => 0,
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutexSpec {
    pub id: String,
    pub partition: String,
    /// Derived: minimum numeric priority value among tasks that lock this
    /// mutex. Not part of the configuration file.
    #[serde(skip)]
    pub ceiling: u32,
}

/// Port transfer mode of a message at its destination(s).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortMode {
    Sampling {
        #[serde(with = "dur_str")]
        refresh_period: Dur,
    },
    Queuing {
        capacity: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageSpec {
    pub id: String,
    pub length_bytes: u64,
    pub vl: String,
    pub source: String,
    pub destinations: Vec<String>,
    pub port: PortMode,
    /// IP fragment count. When absent it is derived from the message length,
    /// the VL's Lmax and the frame overhead; an explicit value is recorded as
    /// an override.
    #[serde(rename = "frag", default, skip_serializing_if = "Option::is_none")]
    pub frag_override: Option<u32>,
    /// Resolved fragment count (override or derived).
    #[serde(skip)]
    pub frag: u32,
}

impl MessageSpec {
    /// Fragments reassembled into one complete message; equals `frag`.
    pub fn reass(&self) -> u32 {
        self.frag
    }

    pub fn is_sampling(&self) -> bool {
        matches!(self.port, PortMode::Sampling { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub links: u32,
    pub switches: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualLinkSpec {
    pub id: String,
    #[serde(with = "dur_str")]
    pub bag: Dur,
    pub lmax_bytes: u64,
    /// Per-physical-link frame delay.
    #[serde(with = "dur_str", default)]
    pub tx_delay: Dur,
    /// Module whose end system transmits this VL.
    pub source: String,
    /// Route parameters per destination module.
    pub routes: BTreeMap<String, Route>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Technological latency of a frame emission.
    #[serde(with = "range_str")]
    pub tech: DurRange,
    /// Per-switch processing delay.
    #[serde(with = "range_str")]
    pub switch: DurRange,
    /// Latency at the destination end system.
    #[serde(with = "range_str")]
    pub rx: DurRange,
    /// UDP/IP forwarding delay in the transmitting end system.
    #[serde(with = "range_str")]
    pub ip_forward: DurRange,
    /// Per-fragment reassembly delay in the receiving end system.
    #[serde(with = "range_str")]
    pub ip_reassembly: DurRange,
    /// Maximum configuration jitter per frame, indexed by the number of VLs
    /// with pending traffic at the transmitting end system (entry 0 applies
    /// when only this VL has traffic). The last entry applies to any higher
    /// count.
    #[serde(with = "dur_vec_str")]
    pub tx_jitter: Vec<Dur>,
    /// Frames that may travel a route simultaneously.
    pub max_packets: u32,
    /// Capacity of the FIFO buffers between the UDP/IP layer and the VLs.
    pub max_msg: u32,
    /// Protocol overhead per frame, subtracted from Lmax when deriving
    /// fragment counts.
    #[serde(default = "default_frame_overhead")]
    pub frame_overhead_bytes: u64,
}

fn default_frame_overhead() -> u64 {
    47
}

impl NetworkParams {
    /// Jitter bound for a frame emitted while `active_vls` VLs (including the
    /// emitting one) have pending traffic at the same end system.
    pub fn tx_jitter_bound(&self, active_vls: usize) -> Dur {
        if self.tx_jitter.is_empty() || active_vls == 0 {
            return 0;
        }
        let idx = (active_vls - 1).min(self.tx_jitter.len() - 1);
        self.tx_jitter[idx]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcDefaults {
    #[serde(with = "dur_str")]
    pub horizon: Dur,
    pub theta: f64,
}

fn default_true() -> bool {
    true
}

/// Fully resolved system model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub modules: Vec<String>,
    /// partition id -> hosting module id
    pub partitions: BTreeMap<String, String>,
    pub schedules: Vec<PartitionSchedule>,
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub mutexes: Vec<MutexSpec>,
    #[serde(default)]
    pub messages: Vec<MessageSpec>,
    #[serde(default)]
    pub virtual_links: Vec<VirtualLinkSpec>,
    pub network: NetworkParams,
    pub smc: SmcDefaults,
    /// Immediate ceiling priority elevation on mutex acquisition. Disabling
    /// falls back to plain blocking semantics.
    #[serde(default = "default_true")]
    pub icpp_elevation: bool,
}

/// Configuration ingestion error.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Duration(#[from] DurParseError),
    #[error("dangling reference: {kind} {id:?} referenced by {referenced_by}")]
    DanglingRef { kind: &'static str, id: String, referenced_by: String },
    #[error("{0}")]
    Invalid(String),
}

/// Parses a JSON configuration document into a resolved [`SystemConfig`].
///
/// Millisecond durations are scaled to microseconds, mutex ceilings are
/// derived from their users and fragment counts are resolved. Cross-reference
/// resolution failures are reported as errors; semantic invariants are left
/// to [`validate`].
pub fn parse_config(text: &str) -> Result<SystemConfig, ConfigError> {
    let mut cfg: SystemConfig = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            ConfigError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
        } else {
            ConfigError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
        }
    })?;
    resolve(&mut cfg)?;
    Ok(cfg)
}

fn resolve(cfg: &mut SystemConfig) -> Result<(), ConfigError> {
    // Cross-reference resolution.
    for sched in &cfg.schedules {
        if !cfg.modules.contains(&sched.module) {
            return Err(ConfigError::DanglingRef {
                kind: "module",
                id: sched.module.clone(),
                referenced_by: "schedule".into(),
            });
        }
        for w in &sched.windows {
            if !cfg.partitions.contains_key(&w.partition) {
                return Err(ConfigError::DanglingRef {
                    kind: "partition",
                    id: w.partition.clone(),
                    referenced_by: format!("schedule of {}", sched.module),
                });
            }
        }
    }
    for (pid, module) in &cfg.partitions {
        if !cfg.modules.contains(module) {
            return Err(ConfigError::DanglingRef {
                kind: "module",
                id: module.clone(),
                referenced_by: format!("partition {pid}"),
            });
        }
    }
    for task in &cfg.tasks {
        if !cfg.partitions.contains_key(&task.partition) {
            return Err(ConfigError::DanglingRef {
                kind: "partition",
                id: task.partition.clone(),
                referenced_by: format!("task {}", task.id),
            });
        }
        for instr in &task.chunks {
            match instr {
                Instruction::Lock(m) | Instruction::Unlock(m) => {
                    if !cfg.mutexes.iter().any(|x| &x.id == m) {
                        return Err(ConfigError::DanglingRef {
                            kind: "mutex",
                            id: m.clone(),
                            referenced_by: format!("task {}", task.id),
                        });
                    }
                }
                Instruction::Send(m) | Instruction::Receive(m) => {
                    if !cfg.messages.iter().any(|x| &x.id == m) {
                        return Err(ConfigError::DanglingRef {
                            kind: "message",
                            id: m.clone(),
                            referenced_by: format!("task {}", task.id),
                        });
                    }
                }
                _ => {}
            }
        }
    }
    for msg in &cfg.messages {
        if !cfg.virtual_links.iter().any(|v| v.id == msg.vl) {
            return Err(ConfigError::DanglingRef {
                kind: "virtual link",
                id: msg.vl.clone(),
                referenced_by: format!("message {}", msg.id),
            });
        }
        if !cfg.partitions.contains_key(&msg.source) {
            return Err(ConfigError::DanglingRef {
                kind: "partition",
                id: msg.source.clone(),
                referenced_by: format!("message {}", msg.id),
            });
        }
        for d in &msg.destinations {
            if !cfg.partitions.contains_key(d) {
                return Err(ConfigError::DanglingRef {
                    kind: "partition",
                    id: d.clone(),
                    referenced_by: format!("message {}", msg.id),
                });
            }
        }
    }
    for vl in &cfg.virtual_links {
        if !cfg.modules.contains(&vl.source) {
            return Err(ConfigError::DanglingRef {
                kind: "module",
                id: vl.source.clone(),
                referenced_by: format!("virtual link {}", vl.id),
            });
        }
    }

    // Fragment counts: override, or ceil(length / usable frame payload).
    let vls: BTreeMap<String, VirtualLinkSpec> =
        cfg.virtual_links.iter().map(|v| (v.id.clone(), v.clone())).collect();
    for msg in &mut cfg.messages {
        msg.frag = match msg.frag_override {
            Some(f) => f,
            None => {
                let vl = &vls[&msg.vl];
                let payload = vl.lmax_bytes.saturating_sub(cfg.network.frame_overhead_bytes).max(1);
                msg.length_bytes.div_ceil(payload).max(1) as u32
            }
        };
    }

    // Mutex ceilings: highest priority (minimum numeric value) among users.
    let tasks = cfg.tasks.clone();
    for mux in &mut cfg.mutexes {
        mux.ceiling = derive_ceiling(&tasks, &cfg.partitions, &mux.id, &mux.partition);
    }
    Ok(())
}

fn derive_ceiling(
    tasks: &[TaskSpec],
    partitions: &BTreeMap<String, String>,
    mutex_id: &str,
    mutex_partition: &str,
) -> u32 {
    let users = tasks
        .iter()
        .filter(|t| t.chunks.iter().any(|c| matches!(c, Instruction::Lock(m) if m == mutex_id)))
        .map(|t| t.priority)
        .min();
    match users {
        Some(p) => p,
        None => {
            // Never locked: fall back to the lowest priority in its partition.
            let _ = partitions;
            tasks
                .iter()
                .filter(|t| t.partition == mutex_partition)
                .map(|t| t.priority)
                .max()
                .unwrap_or(255)
        }
    }
}

/// Highest (numerically smallest) priority among tasks that lock the mutex.
pub fn ceiling_of(cfg: &SystemConfig, mutex_id: &str) -> Option<u32> {
    cfg.mutexes.iter().find(|m| m.id == mutex_id).map(|m| m.ceiling)
}

impl SystemConfig {
    pub fn task(&self, id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn message(&self, id: &str) -> Option<&MessageSpec> {
        self.messages.iter().find(|m| m.id == id)
    }

    pub fn vl(&self, id: &str) -> Option<&VirtualLinkSpec> {
        self.virtual_links.iter().find(|v| v.id == id)
    }

    pub fn mutex(&self, id: &str) -> Option<&MutexSpec> {
        self.mutexes.iter().find(|m| m.id == id)
    }

    /// Module hosting the given partition.
    pub fn module_of(&self, partition: &str) -> Option<&str> {
        self.partitions.get(partition).map(|s| s.as_str())
    }

    /// Schedule of the module hosting the given partition.
    pub fn schedule_for_partition(&self, partition: &str) -> Option<&PartitionSchedule> {
        let module = self.partitions.get(partition)?;
        self.schedules.iter().find(|s| &s.module == module)
    }

    pub fn tasks_of_partition(&self, partition: &str) -> Vec<&TaskSpec> {
        self.tasks.iter().filter(|t| t.partition == partition).collect()
    }

    /// Canonical JSON serialization.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Hex SHA-256 of the canonical serialization; identifies a configuration
    /// in trace headers and reports.
    pub fn config_hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(compact.as_bytes());
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Least common multiple of the major frames and all periodic cadences of
    /// the given tasks, capped to `cap`.
    pub fn hyper_period(&self, tasks: impl Iterator<Item = impl AsRef<str>>, cap: Dur) -> Dur {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        fn lcm(a: u64, b: u64) -> u64 {
            if a == 0 || b == 0 {
                a.max(b)
            } else {
                (a / gcd(a, b)).saturating_mul(b)
            }
        }
        let mut h: u64 = 1;
        for s in &self.schedules {
            h = lcm(h, s.major_frame);
        }
        for t in tasks {
            if let Some(spec) = self.task(t.as_ref()) {
                if let Release::Periodic { period } = spec.release {
                    h = lcm(h, period);
                }
            }
            if h >= cap {
                return cap;
            }
        }
        h.min(cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{CASE1_JSON, CASE2_JSON};

    #[test]
    fn parses_case1_workload_row() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let t = cfg.task("Tsk1_1").unwrap();
        assert_eq!(t.release, Release::Periodic { period: 25_000 });
        assert_eq!(t.offset, 2_000);
        assert_eq!(t.deadline, 25_000);
        assert_eq!(t.priority, 2);
        assert_eq!(
            t.chunks,
            vec![
                Instruction::Compute { bcet: 800, wcet: 1300 },
                Instruction::Compute { bcet: 100, wcet: 200 },
                Instruction::End,
            ]
        );
    }

    #[test]
    fn parses_case1_vl_row() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let v = cfg.vl("V1").unwrap();
        assert_eq!(v.bag, 8_000);
        assert_eq!(v.lmax_bytes, 200);
        assert_eq!(v.source, "M1");
        assert!(v.routes.contains_key("M2") && v.routes.contains_key("M3"));
    }

    #[test]
    fn empty_task_list_flagged_by_validation() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let mut empty = cfg.clone();
        empty.tasks.clear();
        empty.mutexes.clear();
        empty.messages.clear();
        empty.virtual_links.clear();
        let diags = validate(&empty);
        assert!(diags.iter().any(|d| d.severity == Severity::Error && d.message.contains("no tasks")));
    }

    #[test]
    fn ceilings_follow_users() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        // Mux1_1 used by Tsk1_4 (prio 5) and Tsk1_5 (prio 6)
        assert_eq!(ceiling_of(&cfg, "Mux1_1"), Some(5));
        // Mux5_1 used by Tsk5_3 (prio 3) and Tsk5_4 (prio 4)
        assert_eq!(ceiling_of(&cfg, "Mux5_1"), Some(3));
        assert_eq!(ceiling_of(&cfg, "Mux2_1"), Some(4));
        assert_eq!(ceiling_of(&cfg, "NoSuchMux"), None);
    }

    #[test]
    fn singleton_user_ceiling_is_its_priority() {
        let mut cfg = parse_config(CASE1_JSON).unwrap();
        // Drop Tsk1_4 so Mux1_1 has the single user Tsk1_5 (prio 6).
        cfg.tasks.retain(|t| t.id != "Tsk1_4");
        let tasks = cfg.tasks.clone();
        let c = derive_ceiling(&tasks, &cfg.partitions, "Mux1_1", "P1");
        assert_eq!(c, 6);
    }

    #[test]
    fn frag_defaults_and_override() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        // Msg1: explicit override to 2 (306 B > Lmax 200 B on a sampling port)
        let m1 = cfg.message("Msg1").unwrap();
        assert_eq!(m1.frag, 2);
        assert!(m1.frag_override.is_some());
        // Msg2: 953 B fits one 1000-B frame less 47 B overhead
        let m2 = cfg.message("Msg2").unwrap();
        assert_eq!(m2.frag, 1);
        assert!(m2.frag_override.is_none());
        // Msg3: 453 = 500 - 47 exactly
        assert_eq!(cfg.message("Msg3").unwrap().frag, 1);
        assert_eq!(cfg.message("Msg4").unwrap().frag, 1);
    }

    #[test]
    fn roundtrip_is_structural_identity() {
        for text in [CASE1_JSON, CASE2_JSON] {
            let cfg = parse_config(text).unwrap();
            let re = parse_config(&cfg.to_canonical_json()).unwrap();
            assert_eq!(cfg, re);
            assert_eq!(cfg.config_hash(), re.config_hash());
        }
    }

    #[test]
    fn case_hashes_differ() {
        let a = parse_config(CASE1_JSON).unwrap();
        let b = parse_config(CASE2_JSON).unwrap();
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn dangling_reference_is_a_parse_error() {
        let text = CASE1_JSON.replace("\"receive\": \"Msg2\"", "\"receive\": \"MsgX\"");
        match parse_config(&text) {
            Err(ConfigError::DanglingRef { kind, id, .. }) => {
                assert_eq!(kind, "message");
                assert_eq!(id, "MsgX");
            }
            other => panic!("expected dangling ref, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config("{ \"modules\": [") {
            Err(ConfigError::Syntax { line, .. }) => assert!(line >= 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn hyper_period_of_case_partitions() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let ids: Vec<String> = cfg.tasks_of_partition("P3").iter().map(|t| t.id.clone()).collect();
        // lcm(T_mf=25ms, 25ms, 50ms, 50ms) with the sporadic task excluded
        assert_eq!(cfg.hyper_period(ids.iter(), 400_000), 50_000);
    }
}
