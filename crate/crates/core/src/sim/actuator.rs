use std::collections::VecDeque;

use crate::robot::JointArray;

/// PD torque for one joint.
#[inline]
pub fn pd_torque(kp: f64, kd: f64, q_target: f64, q: f64, dq: f64) -> f64 {
    kp * (q_target - q) - kd * dq
}

/// Number of physics steps an action is delayed by.
pub fn latency_steps(latency_s: f64, physics_hz: u32) -> usize {
    (latency_s * f64::from(physics_hz)).round().max(0.0) as usize
}

/// FIFO that delays actions by a whole number of physics steps.
#[derive(Clone, Debug)]
pub struct LatencyQueue {
    delay: usize,
    queue: VecDeque<JointArray>,
}

impl LatencyQueue {
    /// Queue pre-filled with `initial` so the first `delay` physics steps
    /// replay it.
    pub fn new(delay: usize, initial: JointArray) -> Self {
        LatencyQueue {
            delay,
            queue: std::iter::repeat_n(initial, delay).collect(),
        }
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Pushes the action issued at this physics step and returns the one
    /// that takes effect now.
    pub fn push(&mut self, action: JointArray) -> JointArray {
        self.queue.push_back(action);
        self.queue
            .pop_front()
            .expect("queue holds at least the action just pushed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_at_setpoint_is_zero() {
        assert_eq!(pd_torque(20.0, 0.5, 0.8, 0.8, 0.0), 0.0);
    }

    #[test]
    fn pd_position_error() {
        assert!((pd_torque(20.0, 0.5, 0.1, 0.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((pd_torque(20.0, 0.5, 0.0, 0.0, 2.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn twenty_ms_is_four_physics_steps() {
        let n = latency_steps(0.020, 200);
        assert_eq!(n, 4);
        let mut q = LatencyQueue::new(n, [0.0; 12]);
        assert_eq!(q.len(), 4);
        let mut applied = Vec::new();
        for k in 0..12 {
            let a = [f64::from(k / 4 + 1); 12];
            applied.push(q.push(a)[0]);
        }
        // control step k issued at physics step 4k lands at 4(k+1)
        assert_eq!(&applied[..4], &[0.0; 4]);
        assert_eq!(&applied[4..8], &[1.0; 4]);
        assert_eq!(&applied[8..], &[2.0; 4]);
    }

    #[test]
    fn zero_latency_passes_through() {
        let mut q = LatencyQueue::new(0, [0.0; 12]);
        assert_eq!(q.push([3.0; 12]), [3.0; 12]);
        assert!(q.is_empty());
    }
}
