use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

/// Time source for timestamps, backoff and rate limiting.
pub trait Clock: Send + Sync {
    /// Milliseconds since the Unix epoch.
    fn now_ms(&self) -> u64;
    fn sleep_ms(&self, ms: u64);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64)
    }

    fn sleep_ms(&self, ms: u64) {
        std::thread::sleep(Duration::from_millis(ms));
    }
}

/// A clock that only moves when slept on. Records every sleep.
#[derive(Debug, Default)]
pub struct ManualClock {
    state: Mutex<(u64, Vec<u64>)>,
}

impl ManualClock {
    pub fn starting_at(ms: u64) -> Self {
        Self {
            state: Mutex::new((ms, Vec::new())),
        }
    }

    pub fn advance(&self, ms: u64) {
        self.state.lock().unwrap().0 += ms;
    }

    pub fn sleeps(&self) -> Vec<u64> {
        self.state.lock().unwrap().1.clone()
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.state.lock().unwrap().0
    }

    fn sleep_ms(&self, ms: u64) {
        let mut state = self.state.lock().unwrap();
        state.0 += ms;
        state.1.push(ms);
    }
}

/// Spaces consecutive requests at least `min_interval_ms` apart. Callers
/// block inside [`RateLimiter::acquire`] while the gate is held.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval_ms: u64,
    last: Mutex<Option<u64>>,
}

impl RateLimiter {
    pub fn new(min_interval_ms: u64) -> Self {
        Self {
            min_interval_ms,
            last: Mutex::new(None),
        }
    }

    /// Waits for the gate and returns the timestamp the request may go out at.
    pub fn acquire(&self, clock: &dyn Clock) -> u64 {
        let mut last = self.last.lock().unwrap();
        let mut now = clock.now_ms();
        if let Some(prev) = *last {
            let ready = prev + self.min_interval_ms;
            if now < ready {
                clock.sleep_ms(ready - now);
                now = clock.now_ms();
            }
        }
        *last = Some(now);
        now
    }
}
