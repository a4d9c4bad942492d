use std::sync::Arc;

use parking_lot::{Condvar, Mutex};

/// Counting semaphore bounding in-flight provider requests.
///
/// Clones share the same permits, so one limiter can cap traffic across every
/// job in a process.
#[derive(Debug, Clone)]
pub struct RequestLimiter {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    available: Mutex<usize>,
    capacity: usize,
    freed: Condvar,
}

impl RequestLimiter {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self {
            inner: Arc::new(Inner {
                available: Mutex::new(capacity),
                capacity,
                freed: Condvar::new(),
            }),
        }
    }

    pub fn capacity(&self) -> usize {
        self.inner.capacity
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut available = self.inner.available.lock();
        while *available == 0 {
            self.inner.freed.wait(&mut available);
        }
        *available -= 1;
        Permit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        self.inner.capacity - *self.inner.available.lock()
    }
}

impl Default for RequestLimiter {
    fn default() -> Self {
        Self::new(4)
    }
}

pub struct Permit<'a> {
    limiter: &'a RequestLimiter,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.limiter.inner.available.lock() += 1;
        self.limiter.inner.freed.notify_one();
    }
}
