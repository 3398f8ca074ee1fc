//! Process-wide numerical tolerances.
//!
//! A single setting backs every residual check in the crate. It is read far
//! more often than written, so it lives in two atomics rather than behind a
//! lock; callers that want isolation pass explicit tolerances instead.

use std::sync::atomic::{AtomicU64, Ordering};

/// Residual tolerance for algebraic identities.
pub const DEFAULT_IDENTITY: f64 = 1e-12;
/// Residual-norm tolerance for Newton convergence.
pub const DEFAULT_NEWTON: f64 = 1e-13;

/// Environment variable read by front ends as a fallback for `--tol`.
pub const TOL_ENV: &str = "CONETUBE_TOL";

static IDENTITY: AtomicU64 = AtomicU64::new(0x3D71_9799_812D_EA11); // 1e-12
static NEWTON: AtomicU64 = AtomicU64::new(0x3D3C_25C2_6849_7682); // 1e-13

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub identity: f64,
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: DEFAULT_IDENTITY, newton: DEFAULT_NEWTON }
    }
}

pub fn get() -> Tolerances {
    Tolerances {
        identity: f64::from_bits(IDENTITY.load(Ordering::Relaxed)),
        newton: f64::from_bits(NEWTON.load(Ordering::Relaxed)),
    }
}

/// Replace the global tolerances. Non-positive or non-finite values are ignored.
pub fn set(t: Tolerances) {
    if t.identity.is_finite() && t.identity > 0.0 {
        IDENTITY.store(t.identity.to_bits(), Ordering::Relaxed);
    }
    if t.newton.is_finite() && t.newton > 0.0 {
        NEWTON.store(t.newton.to_bits(), Ordering::Relaxed);
    }
}

pub fn identity() -> f64 {
    get().identity
}

pub fn newton() -> f64 {
    get().newton
}
