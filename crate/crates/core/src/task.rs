//! Task layer: periodic/sporadic releases, the abstract instruction
//! interpreter with a stopwatch execution-time clock, and priority-ceiling
//! mutexes.
//!
//! The stopwatch `exe_time` accrues processing time of the current compute
//! chunk and advances only while the task is `Running` inside its partition
//! window; preemption and partition switches freeze it in place.

use crate::config::{Instruction, Release, SystemConfig, TaskSpec};
use crate::rng;
use crate::time::{Dur, TimePoint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum TaskLocation {
    WaitInitial,
    Ready,
    Running,
    ReadOp,
    Blocked,
    WaitDelay,
    WaitNextRelease,
    MsgErr,
    DeadlineMiss,
}

/// Instruction with identifier references resolved to model indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum ResolvedInstr {
    Compute { bcet: Dur, wcet: Dur },
    Lock(usize),
    Unlock(usize),
    Delay(Dur),
    Send(usize),
    Receive(usize),
    End,
}

/// Resolves a task body against the configuration's mutex and message lists
/// (indices into `cfg.mutexes` / `cfg.messages`).
pub fn resolve_chunks(cfg: &SystemConfig, spec: &TaskSpec) -> Vec<ResolvedInstr> {
    let mutex_idx = |id: &str| cfg.mutexes.iter().position(|m| m.id == id).expect("validated mutex");
    let msg_idx = |id: &str| cfg.messages.iter().position(|m| m.id == id).expect("validated message");
    spec.chunks
        .iter()
        .map(|i| match i {
            Instruction::Compute { bcet, wcet } => ResolvedInstr::Compute { bcet: *bcet, wcet: *wcet },
            Instruction::Lock(m) => ResolvedInstr::Lock(mutex_idx(m)),
            Instruction::Unlock(m) => ResolvedInstr::Unlock(mutex_idx(m)),
            Instruction::Delay(d) => ResolvedInstr::Delay(*d),
            Instruction::Send(m) => ResolvedInstr::Send(msg_idx(m)),
            Instruction::Receive(m) => ResolvedInstr::Receive(msg_idx(m)),
            Instruction::End => ResolvedInstr::End,
        })
        .collect()
}

/// Release-time window for job `k`: the release falls in
/// `[base, base + jitter]`; sporadic separations are unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReleaseWindow {
    pub base: TimePoint,
    pub jitter: Dur,
    pub unbounded: bool,
}

/// Release window of job `k`. For sporadic tasks job 0 releases at the task
/// offset and every later job at least `min_separation` after the previous
/// release (`prev`).
pub fn release_window(spec: &TaskSpec, k: u64, prev: Option<TimePoint>) -> ReleaseWindow {
    match &spec.release {
        Release::Periodic { period } => {
            ReleaseWindow { base: k * period + spec.offset, jitter: spec.jitter, unbounded: false }
        }
        Release::Sporadic { min_separation, .. } => {
            if k == 0 {
                ReleaseWindow { base: spec.offset, jitter: 0, unbounded: false }
            } else {
                let prev = prev.expect("sporadic job k>0 needs the previous release");
                ReleaseWindow { base: prev + min_separation, jitter: 0, unbounded: true }
            }
        }
    }
}

/// Samples a concrete release time for job `k` in stochastic mode: uniform
/// jitter for periodic tasks, exponential extra separation for sporadic ones.
pub fn sample_release(spec: &TaskSpec, k: u64, prev: Option<TimePoint>, raw: u64) -> TimePoint {
    let w = release_window(spec, k, prev);
    if w.unbounded {
        let rate = spec.release.sporadic_rate_per_us().expect("sporadic");
        w.base.saturating_add(rng::exponential(raw, rate))
    } else if w.jitter == 0 {
        w.base
    } else {
        rng::uniform_in(raw, w.base, w.base + w.jitter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("task fault: {0}")]
pub struct TaskFault(pub String);

/// Mutable task automaton state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct TaskState {
    pub location: TaskLocation,
    pub pc: usize,
    /// Accrued stopwatch time of the current compute chunk.
    pub exe_time: Dur,
    /// Sampled (or branched) duration of the current compute chunk.
    pub budget: Option<Dur>,
    pub job: u64,
    pub release_time: TimePoint,
    pub abs_deadline: TimePoint,
    pub base_priority: u32,
    pub effective_priority: u32,
    /// Mutex indices in acquisition order.
    pub held: Vec<usize>,
    pub job_done: bool,
}

impl TaskState {
    pub fn new(base_priority: u32) -> Self {
        Self {
            location: TaskLocation::WaitInitial,
            pc: 0,
            exe_time: 0,
            budget: None,
            job: 0,
            release_time: 0,
            abs_deadline: 0,
            base_priority,
            effective_priority: base_priority,
            held: Vec::new(),
            job_done: false,
        }
    }

    /// Remaining stopwatch time of the current chunk.
    pub fn remaining(&self) -> Dur {
        self.budget.unwrap_or(0).saturating_sub(self.exe_time)
    }

    /// Advances the stopwatch by `delta`; returns true when the chunk
    /// completes exactly at the new value.
    pub fn advance_exec(&mut self, delta: Dur) -> Result<bool, TaskFault> {
        let budget = self.budget.ok_or_else(|| TaskFault("advance without a chunk budget".into()))?;
        let new = self.exe_time + delta;
        if new > budget {
            return Err(TaskFault(format!("stopwatch overshoot: {new} > budget {budget}")));
        }
        self.exe_time = new;
        Ok(new == budget)
    }

    /// Deadline check for the current job: a miss iff `End` has not executed
    /// by `release + deadline`. Finishing exactly at the deadline is a meet.
    pub fn deadline_missed(&self, now: TimePoint) -> bool {
        !self.job_done && now >= self.abs_deadline
    }
}

/// Priority-ceiling mutex state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct MutexState {
    pub ceiling: u32,
    pub holder: Option<usize>,
    /// Tasks blocked on the lock, in arrival order. Empty under immediate
    /// ceiling elevation on a single core.
    pub blocked: Vec<usize>,
}

impl MutexState {
    pub fn new(ceiling: u32) -> Self {
        Self { ceiling, holder: None, blocked: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockOutcome {
    /// Lock acquired; effective priority possibly elevated to the ceiling.
    Acquired,
    /// Lock held by another task; caller must block.
    Blocked,
}

/// Attempts to acquire `mutex` for `task_idx`. Under the immediate ceiling
/// protocol the acquiring task's effective priority rises to
/// `min(effective, ceiling)`; on a single core a dispatched task then never
/// finds the lock held. The blocked outcome is retained for configurations
/// that disable elevation.
pub fn pcp_lock(
    task_idx: usize,
    st: &mut TaskState,
    mutex_idx: usize,
    mutex: &mut MutexState,
    icpp_elevation: bool,
) -> Result<LockOutcome, TaskFault> {
    if st.held.contains(&mutex_idx) {
        return Err(TaskFault(format!("task re-locks mutex #{mutex_idx}")));
    }
    match mutex.holder {
        None => {
            mutex.holder = Some(task_idx);
            st.held.push(mutex_idx);
            if icpp_elevation {
                st.effective_priority = st.effective_priority.min(mutex.ceiling);
            }
            Ok(LockOutcome::Acquired)
        }
        Some(h) if h == task_idx => unreachable!("guarded by held check"),
        Some(_) => {
            mutex.blocked.push(task_idx);
            Ok(LockOutcome::Blocked)
        }
    }
}

/// Releases `mutex`, wakes all tasks blocked on it (returned for the engine
/// to re-ready) and restores the holder's effective priority from its base
/// and the ceilings of the mutexes it still holds.
pub fn pcp_unlock(
    task_idx: usize,
    st: &mut TaskState,
    mutex_idx: usize,
    mutex: &mut MutexState,
    ceilings: &[u32],
) -> Result<Vec<usize>, TaskFault> {
    if mutex.holder != Some(task_idx) {
        return Err(TaskFault(format!("unlock of mutex #{mutex_idx} by non-holder")));
    }
    let Some(pos) = st.held.iter().position(|m| *m == mutex_idx) else {
        return Err(TaskFault(format!("unlock of mutex #{mutex_idx} not in held set")));
    };
    st.held.remove(pos);
    mutex.holder = None;
    let woken = std::mem::take(&mut mutex.blocked);
    let mut eff = st.base_priority;
    for m in &st.held {
        eff = eff.min(ceilings[*m]);
    }
    st.effective_priority = eff;
    Ok(woken)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::configs::CASE1_JSON;

    #[test]
    fn periodic_release_window() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        // Tsk1_1: period 25 ms, offset 2 ms, jitter 0 → job 1 at 27000
        let t = cfg.task("Tsk1_1").unwrap();
        let w = release_window(t, 1, None);
        assert_eq!((w.base, w.jitter, w.unbounded), (27_000, 0, false));
        assert_eq!(sample_release(t, 1, None, 12345), 27_000);
        // Tsk2_1: period 50 ms, offset 0, jitter 0.5 ms → job 0 in [0, 500]
        let t = cfg.task("Tsk2_1").unwrap();
        let w = release_window(t, 0, None);
        assert_eq!((w.base, w.base + w.jitter), (0, 500));
        for i in 0..200 {
            let r = sample_release(t, 0, None, rng::draw(1, 2, i));
            assert!(r <= 500);
        }
    }

    #[test]
    fn zero_offset_zero_jitter_releases_at_zero() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let t = cfg.task("Tsk3_2").unwrap();
        assert_eq!(sample_release(t, 0, None, 9), 0);
    }

    #[test]
    fn sporadic_separation_is_respected() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let t = cfg.task("Tsk1_5").unwrap(); // min separation 120 ms
        assert_eq!(sample_release(t, 0, None, 1), 0); // offset 0
        for i in 0..500 {
            let r = sample_release(t, 1, Some(0), rng::draw(3, 4, i));
            assert!(r >= 120_000);
        }
        let w = release_window(t, 1, Some(40_000));
        assert_eq!(w.base, 160_000);
        assert!(w.unbounded);
    }

    #[test]
    fn dispatch_branches_follow_the_instruction() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        // Tsk1_4: [Lock Mux1_1, Compute, Unlock, End] — pc 0 is the lock
        let chunks = resolve_chunks(&cfg, cfg.task("Tsk1_4").unwrap());
        assert!(matches!(chunks[0], ResolvedInstr::Lock(0)));
        assert!(matches!(chunks[chunks.len() - 1], ResolvedInstr::End));
        // Tsk3_2: receive precedes its compute chunk
        let chunks = resolve_chunks(&cfg, cfg.task("Tsk3_2").unwrap());
        assert!(matches!(chunks[0], ResolvedInstr::Receive(m) if cfg.messages[m].id == "Msg2"));
        assert!(matches!(chunks[1], ResolvedInstr::Compute { bcet: 700, wcet: 1100 }));
    }

    #[test]
    fn lock_elevates_and_unlock_restores() {
        let cfg = parse_config(CASE1_JSON).unwrap();
        let spec = cfg.task("Tsk1_5").unwrap(); // base priority 6
        let mut st = TaskState::new(spec.priority);
        let ceilings: Vec<u32> = cfg.mutexes.iter().map(|m| m.ceiling).collect();
        let mut mux = MutexState::new(ceilings[0]); // Mux1_1, ceiling 5
        let got = pcp_lock(0, &mut st, 0, &mut mux, true).unwrap();
        assert_eq!(got, LockOutcome::Acquired);
        assert_eq!(st.effective_priority, 5);
        let woken = pcp_unlock(0, &mut st, 0, &mut mux, &ceilings).unwrap();
        assert!(woken.is_empty());
        assert_eq!(st.effective_priority, 6);
    }

    #[test]
    fn relock_is_a_fault_and_contention_blocks() {
        let mut a = TaskState::new(3);
        let mut b = TaskState::new(4);
        let mut mux = MutexState::new(3);
        pcp_lock(0, &mut a, 0, &mut mux, true).unwrap();
        assert!(pcp_lock(0, &mut a, 0, &mut mux, true).is_err());
        // Without elevation a second task can reach the lock and must block.
        assert_eq!(pcp_lock(1, &mut b, 0, &mut mux, false).unwrap(), LockOutcome::Blocked);
        let woken = pcp_unlock(0, &mut a, 0, &mut mux, &[3]).unwrap();
        assert_eq!(woken, vec![1]);
    }

    #[test]
    fn stopwatch_accrues_and_completes() {
        let mut st = TaskState::new(2);
        st.budget = Some(1000);
        assert!(st.advance_exec(1000).unwrap()); // completes exactly
        let mut st = TaskState::new(2);
        st.budget = Some(1300);
        assert!(!st.advance_exec(700).unwrap()); // preempted part-way
        assert_eq!(st.remaining(), 600);
        assert!(st.advance_exec(600).unwrap()); // resumed later
        assert!(st.advance_exec(1).is_err()); // overshoot is a fault
    }

    #[test]
    fn deadline_is_closed() {
        let mut st = TaskState::new(2);
        st.release_time = 2_000;
        st.abs_deadline = 27_000;
        assert!(st.deadline_missed(27_000));
        st.job_done = true;
        assert!(!st.deadline_missed(27_000)); // finishing exactly at r+D is a meet
    }
}
