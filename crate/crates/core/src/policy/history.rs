use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sim::{Observation, OBS_DIM};

/// The last `H` observations, oldest first.
#[derive(Clone, Debug)]
pub struct ObservationHistory {
    capacity: usize,
    buf: VecDeque<Observation>,
}

impl ObservationHistory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::param("history length", "must be at least 1"));
        }
        Ok(ObservationHistory {
            capacity,
            buf: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.capacity
    }

    /// Starts an episode: every slot holds `first`.
    pub fn reset(&mut self, first: &Observation) {
        self.buf.clear();
        self.buf.extend(std::iter::repeat_n(*first, self.capacity));
    }

    pub fn push(&mut self, obs: &Observation) {
        if self.buf.is_empty() {
            self.reset(obs);
            return;
        }
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(*obs);
    }

    pub fn latest(&self) -> Option<&Observation> {
        self.buf.back()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> {
        self.buf.iter()
    }

    /// Concatenation `o_{t-H+1} .. o_t`, `H × 45` values.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.capacity * OBS_DIM);
        for o in &self.buf {
            out.extend_from_slice(o);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(v: f64) -> Observation {
        [v; OBS_DIM]
    }

    #[test]
    fn prefilled_on_reset() {
        let mut h = ObservationHistory::new(5).unwrap();
        h.reset(&obs(1.0));
        assert!(h.is_full());
        assert_eq!(h.flatten(), vec![1.0; 5 * OBS_DIM]);
    }

    #[test]
    fn first_push_prefills_then_rolls() {
        let mut h = ObservationHistory::new(3).unwrap();
        h.push(&obs(1.0));
        assert_eq!(h.len(), 3);
        h.push(&obs(2.0));
        h.push(&obs(3.0));
        h.push(&obs(4.0));
        let firsts: Vec<f64> = h.iter().map(|o| o[0]).collect();
        assert_eq!(firsts, vec![2.0, 3.0, 4.0]);
        assert_eq!(h.latest().unwrap()[0], 4.0);
    }
}
