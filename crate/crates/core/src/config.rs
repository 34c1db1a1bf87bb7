//! Process-wide numeric settings: the amplitude tolerance and the period cap
//! guarding eventually periodic index arithmetic.

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_PERIOD_CAP: u64 = 1_000_000;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3D71_9799_812D_EA11); // 1e-12
static PERIOD_CAP: AtomicU64 = AtomicU64::new(DEFAULT_PERIOD_CAP);

/// Amplitude tolerance used by every equality and zero test.
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

pub fn set_tolerance(eps: f64) {
    assert!(eps.is_finite() && eps > 0.0, "tolerance must be positive and finite");
    TOLERANCE_BITS.store(eps.to_bits(), Ordering::Relaxed);
}

/// Largest period an index set may carry before operations fail.
pub fn period_cap() -> u64 {
    PERIOD_CAP.load(Ordering::Relaxed)
}

pub fn set_period_cap(cap: u64) {
    assert!(cap >= 1, "period cap must be at least 1");
    PERIOD_CAP.store(cap, Ordering::Relaxed);
}
