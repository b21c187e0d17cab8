use crate::mobility::Action;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    /// Pre-squash action.
    pub raw: Vec<f64>,
    /// Standard-normal noise behind `raw`.
    pub eps: Vec<f64>,
    pub actions: Vec<Action>,
    /// Behaviour-policy log probability, fixed at collection time.
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// On-policy storage, emptied after every update.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    capacity: usize,
    steps: Vec<Transition>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            steps: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, t: Transition) {
        debug_assert!(!self.is_full(), "rollout buffer overflow");
        self.steps.push(t);
    }

    pub fn is_full(&self) -> bool {
        self.steps.len() >= self.capacity
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn steps(&self) -> &[Transition] {
        &self.steps
    }

    pub fn clear(&mut self) {
        self.steps.clear();
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|t| t.reward).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|t| t.value).collect()
    }

    pub fn dones(&self) -> Vec<bool> {
        self.steps.iter().map(|t| t.done).collect()
    }
}
