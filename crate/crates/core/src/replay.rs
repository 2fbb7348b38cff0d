//! Experience replay and ε-greedy exploration.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::Transition;

/// Fixed-capacity ring buffer of transitions; pushing into a full memory
/// overwrites the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: Vec<Transition>,
    /// Slot the next push writes to once the buffer is full.
    head: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay memory needs a positive capacity");
        ReplayMemory {
            capacity,
            buffer: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.buffer.len() < self.capacity {
            self.buffer.push(transition);
        } else {
            self.buffer[self.head] = transition;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Stored transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.buffer.split_at(self.head);
        older.iter().chain(newer)
    }

    /// Draws `batch_size` distinct entries uniformly at random, or `None` when
    /// the memory holds fewer than `batch_size` transitions.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if batch_size > self.buffer.len() {
            return None;
        }
        Some(
            index::sample(rng, self.buffer.len(), batch_size)
                .into_iter()
                .map(|i| &self.buffer[i])
                .collect(),
        )
    }
}

/// Multiplicatively decaying exploration rate with a floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub value: f64,
    pub decay: f64,
    pub floor: f64,
}

impl EpsilonSchedule {
    pub fn new(initial: f64, decay: f64, floor: f64) -> Self {
        EpsilonSchedule {
            value: initial.clamp(floor, 1.0),
            decay,
            floor,
        }
    }

    /// Fixed rate that never decays.
    pub fn constant(value: f64) -> Self {
        EpsilonSchedule {
            value,
            decay: 1.0,
            floor: value,
        }
    }

    pub fn decay(&mut self) {
        self.value = (self.value * self.decay).max(self.floor);
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice: uniform random action with probability ε, otherwise the
/// greedy action.
pub fn select_action<R: Rng + ?Sized>(q: &[f64], epsilon: &EpsilonSchedule, rng: &mut R) -> usize {
    assert!(!q.is_empty(), "no actions to choose from");
    if rng.gen::<f64>() < epsilon.value {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::Observation;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(tag: usize) -> Transition {
        Transition {
            state: Observation::Discrete(tag),
            action: 0,
            reward: 0.0,
            next_state: Observation::Discrete(tag),
            done: false,
            truncated: false,
        }
    }

    fn tags(m: &ReplayMemory) -> Vec<usize> {
        m.iter()
            .map(|t| match t.state {
                Observation::Discrete(k) => k,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn fifo_eviction() {
        let mut m = ReplayMemory::new(2);
        for k in 0..3 {
            m.push(tr(k));
        }
        assert_eq!(tags(&m), vec![1, 2]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn size_grows_until_capacity() {
        let mut m = ReplayMemory::new(10);
        for k in 0..7 {
            m.push(tr(k));
        }
        assert_eq!(m.len(), 7);
    }

    #[test]
    fn sample_not_ready_and_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = ReplayMemory::new(1000);
        for k in 0..5 {
            m.push(tr(k));
        }
        assert!(m.sample(11, &mut rng).is_none());
        for k in 5..100 {
            m.push(tr(k));
        }
        let batch = m.sample(16, &mut rng).unwrap();
        let mut seen: Vec<usize> = batch
            .iter()
            .map(|t| match t.state {
                Observation::Discrete(k) => k,
                _ => unreachable!(),
            })
            .collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn single_draws_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut m = ReplayMemory::new(10);
        for k in 0..10 {
            m.push(tr(k));
        }
        let draws = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..draws {
            if let Observation::Discrete(k) = m.sample(1, &mut rng).unwrap()[0].state {
                counts[k] += 1;
            }
        }
        let p: f64 = 0.1;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn greedy_and_tie_break() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let greedy = EpsilonSchedule::constant(0.0);
        assert_eq!(select_action(&[0.2, 0.9], &greedy, &mut rng), 1);
        assert_eq!(select_action(&[0.5, 0.5], &greedy, &mut rng), 0);
    }

    #[test]
    fn fully_random_policy_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let random = EpsilonSchedule::constant(1.0);
        let mut counts = [0usize; 4];
        let draws = 10_000;
        for _ in 0..draws {
            counts[select_action(&[0.0, 1.0, 2.0, 3.0], &random, &mut rng)] += 1;
        }
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 2500.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn decay_examples() {
        let mut eps = EpsilonSchedule::new(1.0, 0.99, 0.01);
        eps.decay();
        assert!((eps.value - 0.99).abs() < 1e-15);

        let mut eps = EpsilonSchedule::new(1.0, 0.99, 0.01);
        for _ in 0..459 {
            eps.decay();
        }
        assert_eq!(eps.value, 0.01);
        eps.decay();
        assert_eq!(eps.value, 0.01);
    }

    proptest! {
        #[test]
        fn memory_keeps_last_pushes(capacity in 1usize..20, pushes in 0usize..60) {
            let mut m = ReplayMemory::new(capacity);
            for k in 0..pushes {
                m.push(tr(k));
            }
            let expected: Vec<usize> = (pushes.saturating_sub(capacity)..pushes).collect();
            prop_assert_eq!(tags(&m), expected);
        }

        #[test]
        fn greedy_choice_is_affine_invariant(
            q in prop::collection::vec(-100.0f64..100.0, 1..6),
            shift in -50.0f64..50.0,
            scale in 0.01f64..20.0,
        ) {
            let transformed: Vec<f64> = q.iter().map(|v| v * scale + shift).collect();
            // rounding can merge near-ties, so compare values rather than indices
            let a = argmax(&q);
            let b = argmax(&transformed);
            prop_assert!(a == b || (q[a] - q[b]).abs() < 1e-9 * (1.0 + q[a].abs()));
        }

        #[test]
        fn epsilon_stays_in_bounds(steps in 0usize..2000) {
            let mut eps = EpsilonSchedule::new(1.0, 0.99, 0.01);
            for _ in 0..steps {
                eps.decay();
            }
            prop_assert!(eps.value >= 0.01 && eps.value <= 1.0);
        }
    }
}
