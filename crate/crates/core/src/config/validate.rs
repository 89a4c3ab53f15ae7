//! Static validation of a parsed configuration. All invariant violations are
//! collected as diagnostics; an empty error set means the model is analyzable.

use super::{Instruction, PortMode, SystemConfig};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &'static str, message: String) -> Self {
        Self { severity: Severity::Error, code, message }
    }

    fn warning(code: &'static str, message: String) -> Self {
        Self { severity: Severity::Warning, code, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// Checks every static invariant of the model and returns the violations.
pub fn validate(cfg: &SystemConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_ids(cfg, &mut out);
    check_schedules(cfg, &mut out);
    check_tasks(cfg, &mut out);
    check_mutexes(cfg, &mut out);
    check_messages(cfg, &mut out);
    check_network(cfg, &mut out);
    check_smc(cfg, &mut out);
    out
}

/// True when no error-severity diagnostics are present.
pub(crate) fn is_valid(diags: &[Diagnostic]) -> bool {
    diags.iter().all(|d| d.severity != Severity::Error)
}

fn check_ids(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for id in cfg
        .modules
        .iter()
        .chain(cfg.partitions.keys())
        .chain(cfg.tasks.iter().map(|t| &t.id))
        .chain(cfg.mutexes.iter().map(|m| &m.id))
        .chain(cfg.messages.iter().map(|m| &m.id))
        .chain(cfg.virtual_links.iter().map(|v| &v.id))
    {
        if !seen.insert(id) {
            out.push(Diagnostic::error("dup-id", format!("duplicate identifier {id:?}")));
        }
    }
    if cfg.tasks.is_empty() {
        out.push(Diagnostic::error("no-tasks", "no tasks defined".into()));
    }
}

fn check_schedules(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    let mut scheduled_modules = BTreeSet::new();
    let mut major_frames = BTreeSet::new();
    for sched in &cfg.schedules {
        if !scheduled_modules.insert(&sched.module) {
            out.push(Diagnostic::error("dup-schedule", format!("module {} has multiple schedules", sched.module)));
        }
        major_frames.insert(sched.major_frame);
        if sched.major_frame == 0 {
            out.push(Diagnostic::error("zero-frame", format!("module {}: major frame must be positive", sched.module)));
            continue;
        }
        let mut sorted = sched.windows.clone();
        sorted.sort_by_key(|w| w.offset);
        let mut prev_end = 0;
        let mut prev_name: Option<String> = None;
        for w in &sorted {
            if w.duration == 0 {
                out.push(Diagnostic::error(
                    "empty-window",
                    format!("module {}: window of {} has zero duration", sched.module, w.partition),
                ));
            }
            if w.end() > sched.major_frame {
                out.push(Diagnostic::error(
                    "window-overrun",
                    format!(
                        "module {}: window of {} ends at {}us beyond the major frame {}us",
                        sched.module,
                        w.partition,
                        w.end(),
                        sched.major_frame
                    ),
                ));
            }
            if w.offset < prev_end {
                out.push(Diagnostic::error(
                    "window-overlap",
                    format!(
                        "module {}: window of {} at {}us overlaps window of {} ending at {}us",
                        sched.module,
                        w.partition,
                        w.offset,
                        prev_name.as_deref().unwrap_or("?"),
                        prev_end
                    ),
                ));
            }
            prev_end = prev_end.max(w.end());
            prev_name = Some(w.partition.clone());
            match cfg.partitions.get(&w.partition) {
                Some(m) if m != &sched.module => out.push(Diagnostic::error(
                    "foreign-partition",
                    format!(
                        "module {}: window references partition {} hosted on {}",
                        sched.module, w.partition, m
                    ),
                )),
                Some(_) => {}
                None => out.push(Diagnostic::error(
                    "unknown-partition",
                    format!("module {}: window references unknown partition {}", sched.module, w.partition),
                )),
            }
        }
    }
    for module in &cfg.modules {
        if !scheduled_modules.contains(module) {
            out.push(Diagnostic::error("missing-schedule", format!("module {module} has no schedule")));
        }
    }
    for (pid, module) in &cfg.partitions {
        let has_window = cfg
            .schedules
            .iter()
            .any(|s| &s.module == module && s.windows.iter().any(|w| &w.partition == pid));
        if !has_window {
            out.push(Diagnostic::error("no-window", format!("partition {pid} has no window on module {module}")));
        }
    }
    if major_frames.len() > 1 {
        out.push(Diagnostic::warning(
            "uneven-frames",
            "modules use different major frames; compositional analysis assumes a common frame".into(),
        ));
    }
}

fn check_tasks(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    for task in &cfg.tasks {
        let cadence = task.release.cadence();
        if cadence == 0 {
            out.push(Diagnostic::error("zero-cadence", format!("task {}: period/separation must be positive", task.id)));
        }
        if task.deadline > cadence {
            out.push(Diagnostic::error(
                "deadline-overrun",
                format!(
                    "task {}: deadline {}us exceeds its period/minimum separation {}us",
                    task.id, task.deadline, cadence
                ),
            ));
        }
        if task.release.is_sporadic() && task.jitter != 0 {
            out.push(Diagnostic::warning(
                "sporadic-jitter",
                format!("task {}: jitter on a sporadic task is ignored", task.id),
            ));
        }
        if task.chunks.len() <= 1 {
            out.push(Diagnostic::error("empty-body", format!("task {}: no instructions", task.id)));
        }
        if task.chunks.last() != Some(&Instruction::End) {
            out.push(Diagnostic::error("missing-end", format!("task {}: body must end with End", task.id)));
        }
        // Lock/Unlock nesting, message directions, compute ranges.
        let mut held: Vec<&String> = Vec::new();
        for instr in &task.chunks {
            match instr {
                Instruction::Compute { bcet, wcet } => {
                    if bcet > wcet {
                        out.push(Diagnostic::error(
                            "bad-interval",
                            format!("task {}: bcet {}us exceeds wcet {}us", task.id, bcet, wcet),
                        ));
                    }
                }
                Instruction::Lock(m) => {
                    if held.contains(&m) {
                        out.push(Diagnostic::error(
                            "relock",
                            format!("task {}: locks {} while already holding it", task.id, m),
                        ));
                    }
                    if let Some(mux) = cfg.mutex(m) {
                        if mux.partition != task.partition {
                            out.push(Diagnostic::error(
                                "cross-partition-mutex",
                                format!("task {}: mutex {} belongs to partition {}", task.id, m, mux.partition),
                            ));
                        }
                    }
                    held.push(m);
                }
                Instruction::Unlock(m) => match held.pop() {
                    Some(top) if top == m => {}
                    Some(top) => out.push(Diagnostic::error(
                        "unlock-order",
                        format!("task {}: unlocks {} but {} is the innermost held mutex", task.id, m, top),
                    )),
                    None => out.push(Diagnostic::error(
                        "unlock-unheld",
                        format!("task {}: unlocks {} without holding it", task.id, m),
                    )),
                },
                Instruction::Send(m) => {
                    if let Some(msg) = cfg.message(m) {
                        if msg.source != task.partition {
                            out.push(Diagnostic::error(
                                "send-not-source",
                                format!("task {}: sends {} whose source partition is {}", task.id, m, msg.source),
                            ));
                        }
                    }
                }
                Instruction::Receive(m) => {
                    if let Some(msg) = cfg.message(m) {
                        if !msg.destinations.contains(&task.partition) {
                            out.push(Diagnostic::error(
                                "receive-not-dest",
                                format!("task {}: receives {} not destined to partition {}", task.id, m, task.partition),
                            ));
                        }
                    }
                }
                Instruction::Delay(_) | Instruction::End => {}
            }
        }
        if !held.is_empty() {
            out.push(Diagnostic::error(
                "unreleased-mutex",
                format!("task {}: job ends still holding {:?}", task.id, held),
            ));
        }
    }
}

fn check_mutexes(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    for mux in &cfg.mutexes {
        if !cfg.partitions.contains_key(&mux.partition) {
            out.push(Diagnostic::error(
                "unknown-partition",
                format!("mutex {}: unknown partition {}", mux.id, mux.partition),
            ));
        }
        let locked = cfg
            .tasks
            .iter()
            .any(|t| t.chunks.iter().any(|c| matches!(c, Instruction::Lock(m) if m == &mux.id)));
        if !locked {
            out.push(Diagnostic::warning(
                "unused-mutex",
                format!("mutex {}: never locked; ceiling falls back to the lowest partition priority", mux.id),
            ));
        }
    }
}

fn check_messages(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    for msg in &cfg.messages {
        if msg.destinations.is_empty() {
            out.push(Diagnostic::error("no-destinations", format!("message {}: no destinations", msg.id)));
        }
        let Some(vl) = cfg.vl(&msg.vl) else { continue };
        if vl.lmax_bytes <= cfg.network.frame_overhead_bytes {
            out.push(Diagnostic::error(
                "lmax-too-small",
                format!("message {}: VL {} Lmax {}B does not exceed the frame overhead", msg.id, vl.id, vl.lmax_bytes),
            ));
        }
        // Routes must cover every destination module.
        for dest in &msg.destinations {
            if let Some(module) = cfg.module_of(dest) {
                if !vl.routes.contains_key(module) {
                    out.push(Diagnostic::error(
                        "unroutable",
                        format!("message {}: VL {} has no route to module {module} (destination {dest})", msg.id, vl.id),
                    ));
                }
            }
        }
        // The source end system of the VL must be the sender's module.
        if let Some(module) = cfg.module_of(&msg.source) {
            if vl.source != module {
                out.push(Diagnostic::error(
                    "vl-source-mismatch",
                    format!("message {}: source partition is on {module} but VL {} transmits from {}", msg.id, module, vl.source),
                ));
            }
        }
        if msg.is_sampling() && msg.frag > 1 {
            // Sampling ports should not use IP fragmentation; the case-study
            // configuration overrides this deliberately for Msg1 whose length
            // exceeds its VL's Lmax.
            let how = if msg.frag_override.is_some() { "via explicit override" } else { "derived from its length" };
            out.push(Diagnostic::warning(
                "sampling-fragmented",
                format!("sampling message {} exceeds Lmax and is fragmented into {} frames ({how})", msg.id, msg.frag),
            ));
        }
        // Source partition must host a sender, destinations a receiver.
        let sends = cfg
            .tasks
            .iter()
            .any(|t| t.partition == msg.source && t.chunks.iter().any(|c| matches!(c, Instruction::Send(m) if m == &msg.id)));
        if !sends {
            out.push(Diagnostic::error(
                "no-sender",
                format!("message {}: no task in partition {} sends it", msg.id, msg.source),
            ));
        }
        for dest in &msg.destinations {
            let receives = cfg
                .tasks
                .iter()
                .any(|t| &t.partition == dest && t.chunks.iter().any(|c| matches!(c, Instruction::Receive(m) if m == &msg.id)));
            if !receives {
                out.push(Diagnostic::error(
                    "no-receiver",
                    format!("message {}: no task in destination partition {dest} receives it", msg.id),
                ));
            }
        }
        if let PortMode::Queuing { capacity } = msg.port {
            if capacity == 0 {
                out.push(Diagnostic::warning(
                    "zero-capacity",
                    format!("message {}: queuing capacity 0 overflows on the first send", msg.id),
                ));
            }
        }
    }
    for vl in &cfg.virtual_links {
        if vl.bag == 0 {
            out.push(Diagnostic::error("zero-bag", format!("virtual link {}: BAG must be positive", vl.id)));
        }
        for (module, route) in &vl.routes {
            if route.links < 1 {
                out.push(Diagnostic::error(
                    "no-links",
                    format!("virtual link {}: route to {module} needs at least one link", vl.id),
                ));
            }
        }
    }
}

fn check_network(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    let net = &cfg.network;
    for (name, r) in [
        ("tech", net.tech),
        ("switch", net.switch),
        ("rx", net.rx),
        ("ip_forward", net.ip_forward),
        ("ip_reassembly", net.ip_reassembly),
    ] {
        if r.lo > r.hi {
            out.push(Diagnostic::error("bad-interval", format!("network.{name}: min {}us exceeds max {}us", r.lo, r.hi)));
        }
    }
    if net.tx_jitter.is_empty() {
        out.push(Diagnostic::error("no-tx-jitter", "network.tx_jitter must not be empty".into()));
    }
    if net.tx_jitter.windows(2).any(|w| w[0] > w[1]) {
        out.push(Diagnostic::error("tx-jitter-order", "network.tx_jitter must be non-decreasing".into()));
    }
    if net.max_packets < 1 {
        out.push(Diagnostic::error("max-packets", "network.max_packets must be at least 1".into()));
    }
    if net.max_msg < 1 {
        out.push(Diagnostic::error("max-msg", "network.max_msg must be at least 1".into()));
    }
}

fn check_smc(cfg: &SystemConfig, out: &mut Vec<Diagnostic>) {
    if !(cfg.smc.theta > 0.0 && cfg.smc.theta < 1.0) {
        out.push(Diagnostic::error("theta-range", format!("smc.theta {} outside (0, 1)", cfg.smc.theta)));
    }
    if cfg.smc.horizon == 0 {
        out.push(Diagnostic::error("zero-horizon", "smc.horizon must be positive".into()));
    }
    // Messages on a shared VL share FIFO counters; warn when ambiguous.
    let mut per_vl: BTreeMap<&str, usize> = BTreeMap::new();
    for m in &cfg.messages {
        *per_vl.entry(m.vl.as_str()).or_default() += 1;
    }
    for (vl, n) in per_vl {
        if n > 1 {
            out.push(Diagnostic::warning(
                "shared-vl",
                format!("virtual link {vl} carries {n} message types; FIFO occupancy is shared"),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::configs::{CASE1_JSON, CASE2_JSON};

    #[test]
    fn bundled_cases_have_no_errors() {
        for text in [CASE1_JSON, CASE2_JSON] {
            let cfg = parse_config(text).unwrap();
            let diags = validate(&cfg);
            let errors: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
            assert!(errors.is_empty(), "unexpected errors: {errors:?}");
            // The Msg1 length/Lmax anomaly surfaces as a warning.
            assert!(diags.iter().any(|d| d.code == "sampling-fragmented" && d.message.contains("Msg1")));
        }
    }

    #[test]
    fn case2_windows_are_disjoint_and_cover() {
        let cfg = parse_config(CASE2_JSON).unwrap();
        let diags = validate(&cfg);
        assert!(!diags.iter().any(|d| d.code == "window-overlap"));
        let m1 = cfg.schedules.iter().find(|s| s.module == "M1").unwrap();
        let mut ws: Vec<_> = m1.windows.iter().map(|w| (w.partition.clone(), w.offset, w.duration)).collect();
        ws.sort_by_key(|w| w.1);
        assert_eq!(ws, vec![("P2".into(), 0, 5000), ("P1".into(), 5000, 5000)]);
    }

    #[test]
    fn overlapping_windows_reported() {
        let mut cfg = parse_config(CASE1_JSON).unwrap();
        let m1 = cfg.schedules.iter_mut().find(|s| s.module == "M1").unwrap();
        // ⟨P1,0,5⟩⟨P2,4,5⟩: 4 < 0+5
        m1.windows[1].offset = 4_000;
        m1.windows[1].duration = 5_000;
        let diags = validate(&cfg);
        assert!(diags.iter().any(|d| d.code == "window-overlap"));
    }

    #[test]
    fn deadline_beyond_period_reported() {
        let mut cfg = parse_config(CASE1_JSON).unwrap();
        cfg.tasks[0].deadline = 30_000; // period is 25 ms
        assert!(validate(&cfg).iter().any(|d| d.code == "deadline-overrun"));
    }

    #[test]
    fn improper_lock_nesting_reported() {
        let mut cfg = parse_config(CASE1_JSON).unwrap();
        let t = cfg.tasks.iter_mut().find(|t| t.id == "Tsk1_4").unwrap();
        // Remove the unlock: job ends holding the mutex.
        t.chunks.retain(|c| !matches!(c, super::Instruction::Unlock(_)));
        assert!(validate(&cfg).iter().any(|d| d.code == "unreleased-mutex"));
    }

    #[test]
    fn unroutable_message_reported() {
        let mut cfg = parse_config(CASE1_JSON).unwrap();
        let vl = cfg.virtual_links.iter_mut().find(|v| v.id == "V1").unwrap();
        vl.routes.remove("M3");
        assert!(validate(&cfg).iter().any(|d| d.code == "unroutable"));
    }
}
