use std::sync::{Condvar, Mutex};

/// Counting semaphore bounding concurrent in-flight requests per backend.
#[derive(Debug)]
pub struct InflightLimiter {
    cap: usize,
    in_use: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a> {
    limiter: &'a InflightLimiter,
}

impl InflightLimiter {
    pub fn new(cap: usize) -> Self {
        InflightLimiter {
            cap: cap.max(1),
            in_use: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut in_use = self.in_use.lock().unwrap_or_else(|p| p.into_inner());
        while *in_use >= self.cap {
            in_use = self.freed.wait(in_use).unwrap_or_else(|p| p.into_inner());
        }
        *in_use += 1;
        Permit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        *self.in_use.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut in_use = self.limiter.in_use.lock().unwrap_or_else(|p| p.into_inner());
        *in_use -= 1;
        self.limiter.freed.notify_one();
    }
}
