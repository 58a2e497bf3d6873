use std::collections::VecDeque;

use crate::controller::Joystick;

/// FIFO that holds operator input back by a fixed latency.
///
/// An entry pushed at time `t` becomes visible to [`DelayLine::poll`] at
/// any time `≥ t + latency`. Until the first entry matures, polling yields
/// the neutral joystick.
#[derive(Debug, Clone)]
pub struct DelayLine {
    latency: f64,
    queue: VecDeque<(f64, Joystick)>,
    current: Joystick,
    last_push: f64,
}

impl DelayLine {
    pub fn new(latency: f64) -> Self {
        assert!(latency >= 0.0 && latency.is_finite(), "latency must be ≥ 0");
        Self {
            latency,
            queue: VecDeque::new(),
            current: Joystick::NEUTRAL,
            last_push: f64::NEG_INFINITY,
        }
    }

    pub fn latency(&self) -> f64 {
        self.latency
    }

    /// Enqueues `j` stamped at `t`. Stamps earlier than the previous push are
    /// raised to it so release order always matches push order.
    pub fn push(&mut self, t: f64, j: Joystick) {
        let t = t.max(self.last_push);
        self.last_push = t;
        self.queue.push_back((t, j));
    }

    /// Returns the latest state whose release time `push_time + latency` is `≤ t`.
    pub fn poll(&mut self, t: f64) -> Joystick {
        while let Some(&(stamp, j)) = self.queue.front() {
            if stamp + self.latency <= t {
                self.current = j;
                self.queue.pop_front();
            } else {
                break;
            }
        }
        self.current
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }
}
