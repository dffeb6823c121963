//! Explicit floating-point operation counters.
//!
//! Kernels report their multiply-add counts in bulk through [`count`]. The
//! tally is thread-local, so concurrent solves on different threads never
//! observe each other's work.

use std::cell::Cell;

thread_local! {
    static COUNTER: Cell<u64> = const { Cell::new(0) };
}

/// Adds `n` multiply-adds to the current thread's tally.
#[inline]
pub fn count(n: usize) {
    COUNTER.with(|c| c.set(c.get().wrapping_add(n as u64)));
}

/// Current thread-local tally.
pub fn total() -> u64 {
    COUNTER.with(Cell::get)
}

/// Measures the multiply-adds performed on this thread while `f` runs.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let start = total();
    let out = f();
    (out, total().wrapping_sub(start))
}
