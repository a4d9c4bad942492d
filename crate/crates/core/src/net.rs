//! Process-wide switch that blocks outbound provider traffic.
//!
//! Offline runs flip this off; HTTP providers check it before every request.

use std::sync::atomic::{AtomicBool, Ordering};

static NETWORK_ALLOWED: AtomicBool = AtomicBool::new(true);

pub fn set_network_allowed(allowed: bool) {
    NETWORK_ALLOWED.store(allowed, Ordering::SeqCst);
}

pub fn network_allowed() -> bool {
    NETWORK_ALLOWED.load(Ordering::SeqCst)
}
