//! Communication layer: ARINC-653 ports, UDP/IP transmit/receive with
//! fragmentation and reassembly, and virtual-link transmit/receive with BAG
//! regulation.
//!
//! All components are pure state machines; delay values are chosen by the
//! caller (sampled in stochastic runs, branched in exhaustive exploration)
//! and passed in. One frame carries one IP fragment, so a message split into
//! `frag` fragments occupies `frag` FIFO slots and crosses the VL as `frag`
//! BAG-regulated frames.

use crate::config::{NetworkParams, VirtualLinkSpec};
use crate::time::{Dur, DurRange, TimePoint};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Transfer semantics of a message buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum BufferRole {
    /// Single-message port with overwrite semantics and a refresh clock.
    SamplingPort,
    /// Bounded FIFO port; overflow is a schedulability violation.
    QueuingPort { capacity: u32 },
    /// FIFO between the UDP/IP layer and a VL; overflow is a model fault.
    Fifo { capacity: u32 },
}

/// Counted message buffer. FIFOs additionally track the message type of each
/// queued fragment so that reassembly can attribute fragments on shared VLs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct MsgBuffer {
    pub role: BufferRole,
    pub buf: u32,
    /// Time of the last write (sampling ports: the refresh clock reset).
    pub last_reset: TimePoint,
    /// Message index per queued fragment, oldest first. FIFO role only.
    pub tags: VecDeque<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendOutcome {
    Stored,
    Overflow,
}

impl MsgBuffer {
    pub fn new(role: BufferRole) -> Self {
        Self { role, buf: 0, last_reset: 0, tags: VecDeque::new() }
    }

    pub fn capacity(&self) -> u32 {
        match self.role {
            BufferRole::SamplingPort => 1,
            BufferRole::QueuingPort { capacity } | BufferRole::Fifo { capacity } => capacity,
        }
    }

    /// Source-side port write by a task (or message interface). Sampling
    /// ports overwrite; the refresh clock of the destination is unaffected
    /// (it resets on delivery, not on send).
    pub fn send(&mut self) -> SendOutcome {
        match self.role {
            BufferRole::SamplingPort => {
                self.buf = 1;
                SendOutcome::Stored
            }
            BufferRole::QueuingPort { capacity } => {
                if self.buf < capacity {
                    self.buf += 1;
                    SendOutcome::Stored
                } else {
                    SendOutcome::Overflow
                }
            }
            BufferRole::Fifo { .. } => unreachable!("send targets ports"),
        }
    }

    /// Destination-side delivery of a complete message by the UDP/IP receive
    /// path. Sampling ports overwrite and reset the port clock.
    pub fn deliver(&mut self, now: TimePoint) -> SendOutcome {
        match self.role {
            BufferRole::SamplingPort => {
                self.buf = 1;
                self.last_reset = now;
                SendOutcome::Stored
            }
            BufferRole::QueuingPort { capacity } => {
                if self.buf < capacity {
                    self.buf += 1;
                    self.last_reset = now;
                    SendOutcome::Stored
                } else {
                    SendOutcome::Overflow
                }
            }
            BufferRole::Fifo { .. } => unreachable!("deliver targets ports"),
        }
    }

    /// Non-blocking task read. Queuing ports consume one message; sampling
    /// ports keep the message until overwritten. Returns whether a message
    /// was present.
    pub fn read(&mut self) -> bool {
        match self.role {
            BufferRole::SamplingPort => self.buf == 1,
            BufferRole::QueuingPort { .. } => {
                if self.buf > 0 {
                    self.buf -= 1;
                    true
                } else {
                    false
                }
            }
            BufferRole::Fifo { .. } => unreachable!("read targets ports"),
        }
    }

    /// FIFO push of `frag` fragments of one message as an atomic batch.
    pub fn push_fragments(&mut self, msg: usize, frag: u32) {
        debug_assert!(matches!(self.role, BufferRole::Fifo { .. }));
        for _ in 0..frag {
            self.tags.push_back(msg);
        }
        self.buf += frag;
    }

    /// FIFO pop of the oldest fragment.
    pub fn pop_fragment(&mut self) -> Option<usize> {
        debug_assert!(matches!(self.role, BufferRole::Fifo { .. }));
        let tag = self.tags.pop_front()?;
        self.buf -= 1;
        Some(tag)
    }
}

/// Message age check against a sampling port's refresh period on a task
/// read. The bound is closed: age equal to the period is still valid. A port
/// that never received a message ages from the initial instant.
pub fn refresh_check(port: &MsgBuffer, now: TimePoint, refresh_period: Dur) -> Option<Dur> {
    let age = now - port.last_reset;
    if age > refresh_period {
        Some(age)
    } else {
        None
    }
}

/// UDP/IP transmit: forwards messages from a source port into the VL source
/// FIFO, breaking each into `frag` fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum IpTxLocation {
    Waiting,
    Forwarding,
    VlError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct IpTxState {
    pub location: IpTxLocation,
}

/// Effect of completing one forwarding delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpTxStep {
    /// Fragments entered the FIFO; forwarding continues with another delay.
    ForwardedMore,
    /// Fragments entered the FIFO; source port drained, back to waiting.
    ForwardedIdle,
    /// Destination FIFO cannot take `frag` fragments (or the VL reported an
    /// error): forwarding halts at VlError.
    Fault,
}

impl IpTxState {
    pub fn new() -> Self {
        Self { location: IpTxLocation::Waiting }
    }

    /// A message arrived in the source port. Returns true when a forwarding
    /// delay must be started (the machine was idle).
    pub fn on_msg_arrival(&mut self) -> bool {
        match self.location {
            IpTxLocation::Waiting => {
                self.location = IpTxLocation::Forwarding;
                true
            }
            IpTxLocation::Forwarding | IpTxLocation::VlError => false,
        }
    }

    /// The forwarding delay elapsed: move one message (as `frag` fragments)
    /// from the source port into the destination FIFO.
    pub fn on_forward_done(
        &mut self,
        msg: usize,
        frag: u32,
        src: &mut MsgBuffer,
        dst: &mut MsgBuffer,
        vl_error: bool,
    ) -> IpTxStep {
        debug_assert_eq!(self.location, IpTxLocation::Forwarding);
        debug_assert!(src.buf >= 1);
        if vl_error || dst.buf > dst.capacity().saturating_sub(frag) {
            self.location = IpTxLocation::VlError;
            return IpTxStep::Fault;
        }
        src.buf -= 1;
        dst.push_fragments(msg, frag);
        if src.buf > 0 {
            IpTxStep::ForwardedMore
        } else {
            self.location = IpTxLocation::Waiting;
            IpTxStep::ForwardedIdle
        }
    }
}

/// Virtual-link transmit: emits one BAG-regulated frame per queued fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum VlTxLocation {
    Idle,
    Sending,
    WaitBag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct VlTxState {
    pub location: VlTxLocation,
    pub last_departure: Option<TimePoint>,
    pub frames_sent: u64,
}

/// What the transmitter should do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VlTxAction {
    /// Start the emission latency now (enter Sending).
    StartSending,
    /// Wait for the BAG to elapse; re-check at the given instant.
    WaitUntil(TimePoint),
    /// Nothing to do.
    None,
}

impl VlTxState {
    pub fn new() -> Self {
        Self { location: VlTxLocation::Idle, last_departure: None, frames_sent: 0 }
    }

    /// Earliest instant a new frame emission may start: departures must be at
    /// least one BAG apart.
    fn bag_ready(&self, bag: Dur) -> TimePoint {
        match self.last_departure {
            None => 0,
            Some(d) => d + bag,
        }
    }

    /// A fragment was queued. Only an idle transmitter reacts; while sending
    /// or waiting for the BAG the fragment waits its turn.
    pub fn on_fragment_queued(&mut self, now: TimePoint, bag: Dur) -> VlTxAction {
        if self.location != VlTxLocation::Idle {
            return VlTxAction::None;
        }
        let ready = self.bag_ready(bag);
        if now >= ready {
            self.location = VlTxLocation::Sending;
            VlTxAction::StartSending
        } else {
            self.location = VlTxLocation::WaitBag;
            VlTxAction::WaitUntil(ready)
        }
    }

    /// The BAG wait expired; emission of the next queued frame starts.
    pub fn on_send_ready(&mut self) -> VlTxAction {
        debug_assert_eq!(self.location, VlTxLocation::WaitBag);
        self.location = VlTxLocation::Sending;
        VlTxAction::StartSending
    }

    /// The emission latency elapsed: the frame departs. Pops the fragment
    /// from the FIFO and returns its message tag plus, when more fragments
    /// wait, the instant the next emission may start.
    pub fn on_departure(&mut self, now: TimePoint, bag: Dur, fifo: &mut MsgBuffer) -> (usize, Option<TimePoint>) {
        debug_assert_eq!(self.location, VlTxLocation::Sending);
        let tag = fifo.pop_fragment().expect("departure needs a queued fragment");
        self.last_departure = Some(now);
        self.frames_sent += 1;
        if fifo.buf > 0 {
            self.location = VlTxLocation::WaitBag;
            (tag, Some(now + bag))
        } else {
            self.location = VlTxLocation::Idle;
            (tag, None)
        }
    }
}

/// Total route latency interval from frame departure at the source end
/// system to delivery at the destination end system:
/// `tx_delay*links + switch*switches + rx`.
pub fn vl_rx_bounds(
    vl: &VirtualLinkSpec,
    dest_module: &str,
    net: &NetworkParams,
) -> Result<DurRange, MissingRoute> {
    let route = vl
        .routes
        .get(dest_module)
        .ok_or_else(|| MissingRoute { vl: vl.id.clone(), dest: dest_module.to_string() })?;
    let fixed = vl.tx_delay * route.links as u64;
    let lo = fixed + net.switch.lo * route.switches as u64 + net.rx.lo;
    let hi = fixed + net.switch.hi * route.switches as u64 + net.rx.hi;
    Ok(DurRange::new(lo, hi))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("virtual link {vl} has no route to module {dest}")]
pub struct MissingRoute {
    pub vl: String,
    pub dest: String,
}

/// One frame travelling a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct InFlightFrame {
    pub seq: u64,
    pub msg: usize,
    pub entered: TimePoint,
    /// Instant the chosen route latency elapses.
    pub ready: TimePoint,
}

/// Virtual-link receive for one (VL, destination module) route. Frames are
/// tracked as a bounded queue of timers and delivered strictly in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub struct VlRxState {
    pub inflight: VecDeque<InFlightFrame>,
    pub next_seq: u64,
}

/// More than `max_packets` frames on the route at once.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("more than {max_packets} frames in flight on the route")]
pub struct LinkError {
    pub max_packets: u32,
}

impl VlRxState {
    pub fn new() -> Self {
        Self { inflight: VecDeque::new(), next_seq: 0 }
    }

    /// A frame entered its first physical link. `latency` is the chosen
    /// route latency. Returns the delivery instant to schedule when the new
    /// frame is at the queue front.
    pub fn on_frame_entry(
        &mut self,
        now: TimePoint,
        msg: usize,
        latency: Dur,
        max_packets: u32,
    ) -> Result<Option<TimePoint>, LinkError> {
        if self.inflight.len() as u32 >= max_packets {
            return Err(LinkError { max_packets });
        }
        let frame = InFlightFrame { seq: self.next_seq, msg, entered: now, ready: now + latency };
        self.next_seq += 1;
        self.inflight.push_back(frame);
        if self.inflight.len() == 1 {
            Ok(Some(frame.ready))
        } else {
            Ok(None)
        }
    }

    /// The front frame is delivered. Returns its tag plus the delivery
    /// instant of the next frame, which preserves arrival order.
    pub fn on_delivered(&mut self, now: TimePoint) -> (InFlightFrame, Option<TimePoint>) {
        let frame = self.inflight.pop_front().expect("delivery needs an in-flight frame");
        let next = self.inflight.front().map(|f| f.ready.max(now));
        (frame, next)
    }
}

/// UDP/IP receive: reassembles `reass` consecutive fragments into one
/// complete message and forwards it to the destination port(s).
///
/// `processing` is true while a per-fragment reassembly delay is pending;
/// `halted` latches the invalid-message port error and stops forwarding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IpRxState {
    /// Fragments of the current message accumulated so far.
    pub cnt: u32,
    pub current_msg: Option<usize>,
    pub processing: bool,
    pub halted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpRxStep {
    /// A fragment was consumed; the message is still incomplete.
    Partial,
    /// A complete message reassembled; forward it to the destination ports.
    Complete(usize),
}

impl IpRxState {
    pub fn new() -> Self {
        Self { cnt: 0, current_msg: None, processing: false, halted: false }
    }

    /// Whether a new reassembly delay should start for a queued fragment.
    pub fn should_start(&self, fifo: &MsgBuffer) -> bool {
        !self.processing && !self.halted && fifo.buf > 0
    }

    /// The per-fragment reassembly delay elapsed: consume one fragment from
    /// the FIFO. `reass_of` maps a message index to its fragment count.
    pub fn consume_fragment(&mut self, fifo: &mut MsgBuffer, reass_of: impl Fn(usize) -> u32) -> IpRxStep {
        debug_assert!(self.processing && !self.halted);
        self.processing = false;
        let msg = fifo.pop_fragment().expect("reassembly needs a queued fragment");
        debug_assert!(self.current_msg.is_none() || self.current_msg == Some(msg), "fragment interleaving");
        self.current_msg = Some(msg);
        self.cnt += 1;
        if self.cnt >= reass_of(msg) {
            self.cnt = 0;
            self.current_msg = None;
            IpRxStep::Complete(msg)
        } else {
            IpRxStep::Partial
        }
    }
}
