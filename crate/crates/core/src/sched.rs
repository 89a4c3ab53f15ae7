//! Scheduling layer: TDM partition scheduling and the per-partition
//! preemptive fixed-priority task scheduler.
//!
//! Window boundaries are start-inclusive and end-exclusive, so a boundary
//! instant shared by two windows belongs to the later one. The task scheduler
//! is a pure state machine; it consumes ready/release/enter/exit events and
//! emits stop/dispatch commands for the engine to apply to the task layer.

use crate::config::{PartitionSchedule, PartitionWindow};
use crate::time::{Dur, TimePoint};
use serde::{Deserialize, Serialize};

/// Window of `partition` containing time `t` (modulo the major frame), if any.
pub fn window_at<'a>(
    sched: &'a PartitionSchedule,
    partition: &str,
    t: TimePoint,
) -> Option<&'a PartitionWindow> {
    let phase = t % sched.major_frame;
    sched
        .windows
        .iter()
        .find(|w| w.partition == partition && w.start() <= phase && phase < w.end())
}

/// Error for a partition whose in/out-of-window status never changes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundaryError {
    #[error("partition {0} has no windows")]
    NoWindows(String),
    #[error("partition {0} covers the whole major frame")]
    AlwaysInside(String),
}

/// Least `t' > t` at which the partition's in/out-of-window status changes.
///
/// Adjacent windows of the same partition are transparent: an instant where
/// one window ends exactly as another begins is not a boundary.
pub fn next_boundary(
    sched: &PartitionSchedule,
    partition: &str,
    t: TimePoint,
) -> Result<TimePoint, BoundaryError> {
    let mut candidates: Vec<Dur> = sched
        .windows
        .iter()
        .filter(|w| w.partition == partition)
        .flat_map(|w| [w.start(), w.end() % sched.major_frame])
        .collect();
    if candidates.is_empty() {
        return Err(BoundaryError::NoWindows(partition.to_string()));
    }
    candidates.sort_unstable();
    candidates.dedup();
    let inside_now = window_at(sched, partition, t).is_some();
    let frame_base = t - t % sched.major_frame;
    // Status can only change at window starts/ends; two frames suffice.
    for frame in 0..2 {
        for b in &candidates {
            let abs = frame_base + frame * sched.major_frame + b;
            if abs > t && (window_at(sched, partition, abs).is_some() != inside_now) {
                return Ok(abs);
            }
        }
    }
    Err(BoundaryError::AlwaysInside(partition.to_string()))
}

/// The four major locations of a task scheduler, determined by whether the
/// current time is inside a partition window and whether ready tasks exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum SchedLocation {
    NoTask,
    Idle,
    WaitPartition,
    Occupied,
}

/// Command emitted toward the task layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedCommand {
    /// Interrupt the currently running task.
    Stop(usize),
    /// Dispatch a task (start or resume).
    Dispatch(usize),
}

/// Internal invariant violation; aborts the run with a model fault.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("task scheduler fault: {0}")]
pub struct SchedFault(pub String);

/// Ready-queue entry: task index with its current effective priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct RqEntry {
    pub task: usize,
    pub prio: u32,
}

/// Fixed-priority scheduler of one partition.
///
/// `rq` is sorted by effective priority (smaller number first); tasks of
/// equal priority are served in order of readiness. While `Occupied` the
/// running task is the queue head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct TaskSchedulerState {
    pub location: SchedLocation,
    pub in_window: bool,
    pub rq: Vec<RqEntry>,
    pub running: Option<usize>,
}

impl Default for TaskSchedulerState {
    fn default() -> Self {
        Self { location: SchedLocation::NoTask, in_window: false, rq: Vec::new(), running: None }
    }
}

impl TaskSchedulerState {
    pub fn rq_len(&self) -> usize {
        self.rq.len()
    }

    pub fn front(&self) -> Option<usize> {
        self.rq.first().map(|e| e.task)
    }

    /// Inserts a task keeping priority order, after existing equals.
    pub fn enque(&mut self, task: usize, prio: u32) -> Result<(), SchedFault> {
        if self.rq.iter().any(|e| e.task == task) {
            return Err(SchedFault(format!("task #{task} enqueued twice")));
        }
        let pos = self.rq.partition_point(|e| e.prio <= prio);
        self.rq.insert(pos, RqEntry { task, prio });
        Ok(())
    }

    /// Removes the queue head.
    pub fn deque(&mut self) -> Option<usize> {
        if self.rq.is_empty() {
            None
        } else {
            Some(self.rq.remove(0).task)
        }
    }

    fn refresh_location(&mut self) {
        self.location = match (self.in_window, self.rq.is_empty()) {
            (false, true) => SchedLocation::NoTask,
            (true, true) => SchedLocation::Idle,
            (false, false) => SchedLocation::WaitPartition,
            (true, false) => SchedLocation::Occupied,
        };
    }

    /// A task became ready. Inside the window this may preempt the running
    /// task; outside it only joins the queue.
    pub fn on_ready(&mut self, task: usize, prio: u32) -> Result<Vec<SchedCommand>, SchedFault> {
        self.enque(task, prio)?;
        let mut cmds = Vec::new();
        if self.in_window {
            let head = self.front().expect("nonempty after enque");
            if self.running != Some(head) {
                if let Some(prev) = self.running {
                    cmds.push(SchedCommand::Stop(prev));
                }
                cmds.push(SchedCommand::Dispatch(head));
                self.running = Some(head);
            }
        }
        self.refresh_location();
        Ok(cmds)
    }

    /// The running task relinquishes the processor (job end, delay, or
    /// blocking). Dispatches the next queue head or goes idle.
    pub fn on_release(&mut self, task: usize) -> Result<Vec<SchedCommand>, SchedFault> {
        if self.running != Some(task) {
            return Err(SchedFault(format!("release from task #{task} which is not running")));
        }
        let head = self.deque();
        debug_assert_eq!(head, Some(task));
        self.running = None;
        let mut cmds = Vec::new();
        if self.in_window {
            if let Some(next) = self.front() {
                cmds.push(SchedCommand::Dispatch(next));
                self.running = Some(next);
            }
        }
        self.refresh_location();
        Ok(cmds)
    }

    /// Partition window opens. With a nonempty queue the head is dispatched.
    pub fn on_enter_partition(&mut self) -> Result<Vec<SchedCommand>, SchedFault> {
        if self.in_window {
            return Err(SchedFault("enter_partition while already inside".into()));
        }
        self.in_window = true;
        let mut cmds = Vec::new();
        if let Some(head) = self.front() {
            cmds.push(SchedCommand::Dispatch(head));
            self.running = Some(head);
        }
        self.refresh_location();
        Ok(cmds)
    }

    /// Partition window closes. A running task is suspended in place: no stop
    /// command reaches the task logic, its stopwatch simply halts, and the
    /// ready set is preserved for the next window.
    pub fn on_exit_partition(&mut self) -> Result<Vec<SchedCommand>, SchedFault> {
        if !self.in_window {
            return Err(SchedFault("exit_partition while already outside".into()));
        }
        self.in_window = false;
        let mut cmds = Vec::new();
        if let Some(prev) = self.running.take() {
            cmds.push(SchedCommand::Stop(prev));
        }
        self.refresh_location();
        Ok(cmds)
    }

    /// Re-sorts one queued task after an effective-priority change (ceiling
    /// elevation or restoration). May preempt or re-dispatch.
    pub fn on_priority_change(&mut self, task: usize, prio: u32) -> Result<Vec<SchedCommand>, SchedFault> {
        let Some(pos) = self.rq.iter().position(|e| e.task == task) else {
            return Err(SchedFault(format!("priority change for task #{task} not in queue")));
        };
        self.rq.remove(pos);
        let ins = self.rq.partition_point(|e| e.prio <= prio);
        self.rq.insert(ins, RqEntry { task, prio });
        let mut cmds = Vec::new();
        if self.in_window {
            let head = self.front().expect("nonempty");
            if self.running != Some(head) {
                if let Some(prev) = self.running {
                    cmds.push(SchedCommand::Stop(prev));
                }
                cmds.push(SchedCommand::Dispatch(head));
                self.running = Some(head);
            }
        }
        self.refresh_location();
        Ok(cmds)
    }

    /// Removes a task that left the ready set without running (only valid for
    /// tasks that are queued but not running, e.g. entering an error state).
    pub fn remove_queued(&mut self, task: usize) -> Result<(), SchedFault> {
        if self.running == Some(task) {
            return Err(SchedFault(format!("cannot remove running task #{task}")));
        }
        let Some(pos) = self.rq.iter().position(|e| e.task == task) else {
            return Err(SchedFault(format!("task #{task} not queued")));
        };
        self.rq.remove(pos);
        self.refresh_location();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::configs::CASE1_JSON;
    use proptest::prelude::*;

    fn case1_m1() -> PartitionSchedule {
        parse_config(CASE1_JSON).unwrap().schedules.iter().find(|s| s.module == "M1").unwrap().clone()
    }

    fn case1_m2() -> PartitionSchedule {
        parse_config(CASE1_JSON).unwrap().schedules.iter().find(|s| s.module == "M2").unwrap().clone()
    }

    #[test]
    fn window_lookup_within_first_frame() {
        let s = case1_m1();
        let w = window_at(&s, "P1", 2_000).unwrap();
        assert_eq!((w.offset, w.duration), (0, 5_000));
    }

    #[test]
    fn window_lookup_wraps_modulo_frame() {
        let s = case1_m1();
        // 27000 mod 25000 = 2000
        let w = window_at(&s, "P1", 27_000).unwrap();
        assert_eq!(w.offset, 0);
    }

    #[test]
    fn window_end_is_exclusive() {
        let s = case1_m1();
        assert!(window_at(&s, "P1", 5_000).is_none());
        assert!(window_at(&s, "P2", 5_000).is_some());
    }

    #[test]
    fn boundaries_of_case1() {
        let m1 = case1_m1();
        let m2 = case1_m2();
        assert_eq!(next_boundary(&m1, "P1", 0).unwrap(), 5_000);
        assert_eq!(next_boundary(&m2, "P3", 0).unwrap(), 10_000);
        assert_eq!(next_boundary(&m1, "P1", 5_000).unwrap(), 25_000);
    }

    #[test]
    fn no_windows_is_an_error() {
        let s = case1_m1();
        assert_eq!(next_boundary(&s, "P9", 0), Err(BoundaryError::NoWindows("P9".into())));
    }

    #[test]
    fn adjacent_windows_are_transparent() {
        let sched = PartitionSchedule {
            module: "M".into(),
            major_frame: 10,
            windows: vec![
                PartitionWindow { partition: "P".into(), offset: 0, duration: 2 },
                PartitionWindow { partition: "P".into(), offset: 2, duration: 3 },
            ],
        };
        assert_eq!(next_boundary(&sched, "P", 0).unwrap(), 5);
        assert_eq!(next_boundary(&sched, "P", 5).unwrap(), 10);
    }

    #[test]
    fn enque_orders_by_priority_fifo_among_equals() {
        let mut st = TaskSchedulerState::default();
        st.enque(0, 2).unwrap();
        st.enque(1, 1).unwrap(); // strictly higher priority goes first
        assert_eq!(st.rq.iter().map(|e| e.task).collect::<Vec<_>>(), vec![1, 0]);

        let mut st = TaskSchedulerState::default();
        st.enque(0, 2).unwrap();
        st.enque(1, 2).unwrap(); // equal priority served in readiness order
        assert_eq!(st.rq.iter().map(|e| e.task).collect::<Vec<_>>(), vec![0, 1]);

        let mut st = TaskSchedulerState::default();
        st.enque(7, 3).unwrap();
        assert_eq!(st.front(), Some(7));
    }

    #[test]
    fn duplicate_enqueue_is_a_fault() {
        let mut st = TaskSchedulerState::default();
        st.enque(0, 2).unwrap();
        assert!(st.enque(0, 2).is_err());
    }

    #[test]
    fn ready_preempts_lower_priority() {
        let mut st = TaskSchedulerState::default();
        st.on_enter_partition().unwrap();
        assert_eq!(st.on_ready(0, 3).unwrap(), vec![SchedCommand::Dispatch(0)]);
        let cmds = st.on_ready(1, 2).unwrap();
        assert_eq!(cmds, vec![SchedCommand::Stop(0), SchedCommand::Dispatch(1)]);
        assert_eq!(st.running, Some(1));
        assert_eq!(st.location, SchedLocation::Occupied);
    }

    #[test]
    fn last_release_goes_idle() {
        let mut st = TaskSchedulerState::default();
        st.on_enter_partition().unwrap();
        st.on_ready(0, 3).unwrap();
        let cmds = st.on_release(0).unwrap();
        assert!(cmds.is_empty());
        assert_eq!(st.location, SchedLocation::Idle);
        assert_eq!(st.running, None);
    }

    #[test]
    fn release_from_non_running_is_a_fault() {
        let mut st = TaskSchedulerState::default();
        st.on_enter_partition().unwrap();
        st.on_ready(0, 3).unwrap();
        st.on_ready(1, 5).unwrap();
        assert!(st.on_release(1).is_err());
    }

    #[test]
    fn enter_with_waiting_tasks_dispatches_front() {
        let mut st = TaskSchedulerState::default();
        st.on_ready(4, 2).unwrap();
        assert_eq!(st.location, SchedLocation::WaitPartition);
        let cmds = st.on_enter_partition().unwrap();
        assert_eq!(cmds, vec![SchedCommand::Dispatch(4)]);
        assert_eq!(st.location, SchedLocation::Occupied);
    }

    #[test]
    fn exit_while_occupied_suspends_without_dropping_ready_set() {
        let mut st = TaskSchedulerState::default();
        st.on_enter_partition().unwrap();
        st.on_ready(0, 3).unwrap();
        let cmds = st.on_exit_partition().unwrap();
        assert_eq!(cmds, vec![SchedCommand::Stop(0)]);
        assert_eq!(st.location, SchedLocation::WaitPartition);
        assert_eq!(st.rq_len(), 1);
        assert_eq!(st.running, None);
    }

    #[test]
    fn idle_exit_goes_no_task() {
        let mut st = TaskSchedulerState::default();
        st.on_enter_partition().unwrap();
        assert_eq!(st.location, SchedLocation::Idle);
        st.on_exit_partition().unwrap();
        assert_eq!(st.location, SchedLocation::NoTask);
        assert!(st.on_exit_partition().is_err());
    }

    #[test]
    fn no_task_enter_goes_idle() {
        let mut st = TaskSchedulerState::default();
        assert_eq!(st.location, SchedLocation::NoTask);
        let cmds = st.on_enter_partition().unwrap();
        assert!(cmds.is_empty());
        assert_eq!(st.location, SchedLocation::Idle);
        assert!(st.on_enter_partition().is_err());
    }

    proptest! {
        // Brute-force oracle: scan two major frames microsecond by
        // microsecond (scaled down) and compare every status change against
        // next_boundary.
        #[test]
        fn next_boundary_matches_per_tick_scan(
            durations in proptest::collection::vec(1u64..20, 1..4),
            gaps in proptest::collection::vec(0u64..15, 1..4),
        ) {
            let mut windows = Vec::new();
            let mut t = 0;
            for (d, g) in durations.iter().zip(gaps.iter()) {
                t += g;
                windows.push(PartitionWindow { partition: "P".into(), offset: t, duration: *d });
                t += d;
            }
            let major = t + 5;
            let sched = PartitionSchedule { module: "M".into(), major_frame: major, windows };
            let inside = |t: u64| window_at(&sched, "P", t).is_some();
            for start in 0..(2 * major) {
                let expected = ((start + 1)..=(start + 2 * major))
                    .find(|&u| inside(u) != inside(start))
                    .unwrap();
                prop_assert_eq!(next_boundary(&sched, "P", start).unwrap(), expected);
            }
        }

        #[test]
        fn enqueue_matches_stable_sort_oracle(prios in proptest::collection::vec(0u32..5, 1..12)) {
            let mut st = TaskSchedulerState::default();
            for (i, p) in prios.iter().enumerate() {
                st.enque(i, *p).unwrap();
            }
            let mut oracle: Vec<(u32, usize)> = prios.iter().cloned().zip(0..).collect();
            oracle.sort_by_key(|(p, _)| *p); // stable: readiness order among equals
            let got: Vec<usize> = st.rq.iter().map(|e| e.task).collect();
            let want: Vec<usize> = oracle.into_iter().map(|(_, i)| i).collect();
            prop_assert_eq!(got, want);
        }
    }
}
