//! Static model: the configuration compiled into index-addressed components
//! for one analysis scope (global system, partition slice, or the task
//! system of a single partition).

use crate::afdx::{vl_rx_bounds, BufferRole};
use crate::config::{PartitionSchedule, PortMode, SystemConfig, TaskSpec};
use crate::interfaces::{IfacePattern, MsgInterfaceSpec, PartitionSlice};
use crate::task::{resolve_chunks, ResolvedInstr};
use crate::time::DurRange;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Global,
    /// Compositional slice of one partition with message-interface drivers.
    Slice(String),
    /// Only the partition's schedulers and tasks; message sends terminate at
    /// stub ports and monitors are disabled (used for envelope derivation).
    TasksOnly(String),
}

impl Scope {
    pub fn label(&self) -> String {
        match self {
            Scope::Global => "global".into(),
            Scope::Slice(p) => p.clone(),
            Scope::TasksOnly(p) => format!("tasks:{p}"),
        }
    }
}

#[derive(Debug)]
pub struct TaskStatic {
    pub spec: TaskSpec,
    pub part_idx: usize,
    pub chunks: Vec<ResolvedInstr>,
    pub subject: usize,
}

#[derive(Debug)]
pub struct PartStatic {
    pub id: String,
    pub module: String,
    pub schedule: PartitionSchedule,
    pub subject: usize,
    pub sched_subject: usize,
}

#[derive(Debug)]
pub struct MutexStatic {
    pub id: String,
    pub ceiling: u32,
}

#[derive(Debug)]
pub struct DstPortStatic {
    pub port: usize,
    pub partition: String,
    pub module: String,
}

#[derive(Debug)]
pub struct MsgStatic {
    pub id: String,
    pub frag: u32,
    pub reass: u32,
    pub port_mode: PortMode,
    pub source_partition: String,
    pub vl_idx: Option<usize>,
    pub src_port: usize,
    /// Destination ports instantiated in this scope.
    pub dst_ports: Vec<DstPortStatic>,
    pub iface_idx: Option<usize>,
    pub iptx_subject: usize,
    /// False in tasks-only scope: sends stop at the source port.
    pub networked: bool,
}

#[derive(Debug)]
pub struct VlRxStatic {
    pub module: String,
    pub bounds: DurRange,
    pub dst_fifo: usize,
    pub iprx_idx: usize,
    pub subject: usize,
    pub iprx_subject: usize,
}

#[derive(Debug)]
pub struct VlStatic {
    pub id: String,
    pub bag: u64,
    pub tx_delay: u64,
    pub source_module: String,
    pub src_fifo: usize,
    pub rx: Vec<VlRxStatic>,
    /// VL indices (into `Model::vls`) sharing this source end system,
    /// including this one; determines the transmit-jitter bound.
    pub es_peers: Vec<usize>,
    pub subject: usize,
}

#[derive(Debug)]
pub struct IfaceStatic {
    pub spec: MsgInterfaceSpec,
    pub msg_idx: usize,
    pub subject: usize,
}

#[derive(Debug)]
pub struct PortStatic {
    pub name: String,
    pub role: BufferRole,
    pub message: String,
    pub partition: String,
    /// Refresh period for sampling destination ports.
    pub refresh: Option<u64>,
}

/// Compiled model for one scope. Immutable and shared across runs.
#[derive(Debug)]
pub struct Model {
    pub cfg: Arc<SystemConfig>,
    pub scope: Scope,
    pub tasks: Vec<TaskStatic>,
    pub partitions: Vec<PartStatic>,
    pub mutexes: Vec<MutexStatic>,
    pub messages: Vec<MsgStatic>,
    pub vls: Vec<VlStatic>,
    pub ifaces: Vec<IfaceStatic>,
    pub ports: Vec<PortStatic>,
    /// fifo count: one source fifo per VL then one per VL-rx route.
    pub fifo_count: usize,
    pub subjects: Vec<String>,
    pub subject_keys: Vec<u64>,
    pub monitors_enabled: bool,
    /// Original configuration index of each message (for chunk resolution).
    pub cfg_msg_index: BTreeMap<usize, usize>,
    pub cfg_mutex_index: BTreeMap<usize, usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unknown partition {0}")]
    UnknownPartition(String),
    #[error("configuration invalid: {0}")]
    Invalid(String),
}

struct Builder {
    subjects: Vec<String>,
}

impl Builder {
    fn subject(&mut self, name: String) -> usize {
        self.subjects.push(name);
        self.subjects.len() - 1
    }
}

impl Model {
    pub fn global(cfg: Arc<SystemConfig>) -> Result<Arc<Model>, ModelError> {
        Self::build(cfg, Scope::Global, None)
    }

    pub fn slice(cfg: Arc<SystemConfig>, slice: &PartitionSlice) -> Result<Arc<Model>, ModelError> {
        Self::build(cfg, Scope::Slice(slice.partition.clone()), Some(slice))
    }

    pub fn tasks_only(cfg: Arc<SystemConfig>, partition: &str) -> Result<Arc<Model>, ModelError> {
        Self::build(cfg, Scope::TasksOnly(partition.to_string()), None)
    }

    fn build(cfg: Arc<SystemConfig>, scope: Scope, slice: Option<&PartitionSlice>) -> Result<Arc<Model>, ModelError> {
        let mut b = Builder { subjects: Vec::new() };

        // Partitions in scope.
        let part_ids: Vec<String> = match &scope {
            Scope::Global => cfg.partitions.keys().cloned().collect(),
            Scope::Slice(p) | Scope::TasksOnly(p) => {
                if !cfg.partitions.contains_key(p) {
                    return Err(ModelError::UnknownPartition(p.clone()));
                }
                vec![p.clone()]
            }
        };
        let mut partitions = Vec::new();
        for pid in &part_ids {
            let module = cfg.module_of(pid).unwrap().to_string();
            let schedule = cfg
                .schedule_for_partition(pid)
                .ok_or_else(|| ModelError::Invalid(format!("partition {pid} has no schedule")))?
                .clone();
            let subject = b.subject(format!("part:{pid}"));
            let sched_subject = b.subject(format!("sched:{pid}"));
            partitions.push(PartStatic { id: pid.clone(), module, schedule, subject, sched_subject });
        }
        let part_index: BTreeMap<&str, usize> =
            partitions.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();

        // Tasks of in-scope partitions.
        let mut tasks = Vec::new();
        for spec in &cfg.tasks {
            let Some(&part_idx) = part_index.get(spec.partition.as_str()) else { continue };
            let subject = b.subject(spec.id.clone());
            tasks.push(TaskStatic { spec: spec.clone(), part_idx, chunks: resolve_chunks(&cfg, spec), subject });
        }

        // All mutexes carry over; chunk resolution indexes cfg.mutexes.
        let mutexes: Vec<MutexStatic> =
            cfg.mutexes.iter().map(|m| MutexStatic { id: m.id.clone(), ceiling: m.ceiling }).collect();
        let cfg_mutex_index: BTreeMap<usize, usize> = (0..mutexes.len()).map(|i| (i, i)).collect();

        // Messages in scope. Chunk instructions index cfg.messages, so the
        // model keeps all messages but only instantiates network chains for
        // those in scope.
        let monitors_enabled = !matches!(scope, Scope::TasksOnly(_));
        let networked = |msg_source_in: bool, msg_dest_in: bool| -> bool {
            match &scope {
                Scope::Global => true,
                Scope::Slice(_) => msg_source_in || msg_dest_in,
                Scope::TasksOnly(_) => false,
            }
        };

        let mut ports: Vec<PortStatic> = Vec::new();
        let mut messages = Vec::new();
        let mut cfg_msg_index = BTreeMap::new();
        let mut vl_use: BTreeMap<usize, Vec<usize>> = BTreeMap::new(); // cfg vl idx -> model msg idxs

        for (ci, m) in cfg.messages.iter().enumerate() {
            let source_in = part_index.contains_key(m.source.as_str());
            let dest_in = m.destinations.iter().any(|d| part_index.contains_key(d.as_str()));
            if !source_in && !dest_in {
                continue;
            }
            let net = networked(source_in, dest_in);
            let src_port = ports.len();
            ports.push(PortStatic {
                name: format!("port:src:{}@{}", m.id, m.source),
                role: match m.port {
                    PortMode::Sampling { .. } => BufferRole::SamplingPort,
                    PortMode::Queuing { capacity } => BufferRole::QueuingPort { capacity },
                },
                message: m.id.clone(),
                partition: m.source.clone(),
                refresh: None,
            });
            let mut dst_ports = Vec::new();
            if net {
                for d in &m.destinations {
                    if !part_index.contains_key(d.as_str()) {
                        continue;
                    }
                    let port = ports.len();
                    ports.push(PortStatic {
                        name: format!("port:{}@{}", m.id, d),
                        role: match m.port {
                            PortMode::Sampling { .. } => BufferRole::SamplingPort,
                            PortMode::Queuing { capacity } => BufferRole::QueuingPort { capacity },
                        },
                        message: m.id.clone(),
                        partition: d.clone(),
                        refresh: match m.port {
                            PortMode::Sampling { refresh_period } => Some(refresh_period),
                            PortMode::Queuing { .. } => None,
                        },
                    });
                    dst_ports.push(DstPortStatic {
                        port,
                        partition: d.clone(),
                        module: cfg.module_of(d).unwrap().to_string(),
                    });
                }
            }
            let vl_cfg_idx = cfg.virtual_links.iter().position(|v| v.id == m.vl);
            let msg_idx = messages.len();
            cfg_msg_index.insert(ci, msg_idx);
            if net {
                if let Some(v) = vl_cfg_idx {
                    vl_use.entry(v).or_default().push(msg_idx);
                }
            }
            let iptx_subject = b.subject(format!("iptx:{}", m.id));
            messages.push(MsgStatic {
                id: m.id.clone(),
                frag: m.frag,
                reass: m.reass(),
                port_mode: m.port.clone(),
                source_partition: m.source.clone(),
                vl_idx: None, // fixed up below
                src_port,
                dst_ports,
                iface_idx: None,
                iptx_subject,
                networked: net,
            });
        }

        // Virtual links actually used in scope.
        let mut vls = Vec::new();
        let mut fifo_count = 0usize;
        for (cfg_vl_idx, msg_idxs) in &vl_use {
            let v = &cfg.virtual_links[*cfg_vl_idx];
            let src_fifo = fifo_count;
            fifo_count += 1;
            // Destination modules with at least one in-scope destination port
            // among this VL's messages.
            let mut modules: Vec<String> = Vec::new();
            for mi in msg_idxs {
                for dp in &messages[*mi].dst_ports {
                    if !modules.contains(&dp.module) {
                        modules.push(dp.module.clone());
                    }
                }
            }
            modules.sort();
            let mut rx = Vec::new();
            for module in modules {
                let bounds = vl_rx_bounds(v, &module, &cfg.network)
                    .map_err(|e| ModelError::Invalid(e.to_string()))?;
                let dst_fifo = fifo_count;
                fifo_count += 1;
                let subject = b.subject(format!("vlrx:{}@{}", v.id, module));
                let iprx_subject = b.subject(format!("iprx:{}@{}", v.id, module));
                rx.push(VlRxStatic { module, bounds, dst_fifo, iprx_idx: rx.len(), subject, iprx_subject });
            }
            let subject = b.subject(format!("vltx:{}", v.id));
            let vl_model_idx = vls.len();
            for mi in msg_idxs {
                messages[*mi].vl_idx = Some(vl_model_idx);
            }
            vls.push(VlStatic {
                id: v.id.clone(),
                bag: v.bag,
                tx_delay: v.tx_delay,
                source_module: v.source.clone(),
                src_fifo,
                rx,
                es_peers: Vec::new(),
                subject,
            });
        }
        // Peers at the same source end system.
        let peer_map: Vec<Vec<usize>> = vls
            .iter()
            .map(|v| {
                vls.iter()
                    .enumerate()
                    .filter(|(_, w)| w.source_module == v.source_module)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        for (v, peers) in vls.iter_mut().zip(peer_map) {
            v.es_peers = peers;
        }

        // Message interfaces (slice scope only).
        let mut ifaces = Vec::new();
        if let Some(slice) = slice {
            for spec in &slice.inbound {
                let msg_idx = messages
                    .iter()
                    .position(|m| m.id == spec.message)
                    .ok_or_else(|| ModelError::Invalid(format!("interface message {} not in scope", spec.message)))?;
                let subject = b.subject(format!("iface:{}", spec.message));
                messages[msg_idx].iface_idx = Some(ifaces.len());
                ifaces.push(IfaceStatic { spec: spec.clone(), msg_idx, subject });
            }
        }

        // Port subjects appended for trace naming symmetry.
        let subjects = b.subjects;
        let subject_keys = subjects.iter().map(|s| crate::rng::subject_key(s)).collect();

        Ok(Arc::new(Model {
            cfg,
            scope,
            tasks,
            partitions,
            mutexes,
            messages,
            vls,
            ifaces,
            ports,
            fifo_count,
            subjects,
            subject_keys,
            monitors_enabled,
            cfg_msg_index,
            cfg_mutex_index,
        }))
    }

    pub fn task_by_id(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.spec.id == id)
    }

    /// Model message index for a configuration message index (chunk
    /// instructions address the latter).
    pub fn msg_of_cfg(&self, cfg_idx: usize) -> Option<usize> {
        self.cfg_msg_index.get(&cfg_idx).copied()
    }

    /// Tasks of a partition sorted by base priority for deterministic
    /// iteration.
    pub fn tasks_of_partition(&self, part_idx: usize) -> Vec<usize> {
        self.tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.part_idx == part_idx)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Interface emission pattern helpers shared by the runtime.
impl IfaceStatic {
    /// Base instant of emission `k` before the phase choice is applied.
    pub fn arm_base(&self, k: u64, last_emit: Option<u64>) -> u64 {
        match &self.spec.pattern {
            IfacePattern::Periodic { period, initial_offset, offset, .. } => k * period + initial_offset + offset,
            IfacePattern::Sporadic { min_separation, initial_offset, offset, .. } => match last_emit {
                None => initial_offset + offset,
                Some(prev) => prev + min_separation,
            },
        }
    }
}
