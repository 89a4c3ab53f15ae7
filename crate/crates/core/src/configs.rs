//! Bundled case-study configurations.
//!
//! Case 1 runs the avionics workload with partition windows
//! ⟨P1,0,5⟩⟨P2,5,5⟩⟨P3,10,5⟩⟨P4,15,5⟩⟨P5,20,5⟩ (milliseconds); case 2 swaps
//! the time slots of P1 and P2. Network latency constants are calibration
//! defaults recorded in the files themselves, not hard-coded anywhere else.

/// Original schedule; not schedulable (sampling-port refresh violation).
pub const CASE1_JSON: &str = include_str!("../configs/case1.json");

/// Schedule with the P1/P2 slot swap; schedulable.
pub const CASE2_JSON: &str = include_str!("../configs/case2.json");
