//! Streaming Top-K unit.

use alloc::vec::Vec;
use core::cmp::Ordering;

use half::f16;

/// Similarity score and local vector id produced by one MAC lane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreEntry {
    pub score: f16,
    pub vector_id: u32,
}

impl ScoreEntry {
    pub fn new(score: f16, vector_id: u32) -> Self {
        Self { score, vector_id }
    }
}

// -0.0 and +0.0 compare equal; NaN ranks by its total-order position.
fn score_key(s: f16) -> f32 {
    s.to_f32() + 0.0
}

/// Ranking order: higher score first, then lower id.
pub fn rank(a: &ScoreEntry, b: &ScoreEntry) -> Ordering {
    score_key(b.score)
        .total_cmp(&score_key(a.score))
        .then(a.vector_id.cmp(&b.vector_id))
}

/// Ordered list of the best `capacity` entries seen so far.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialTopK {
    capacity: usize,
    entries: Vec<ScoreEntry>,
}

impl PartialTopK {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "top-k capacity must be at least 1");
        Self {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    pub fn entries(&self) -> &[ScoreEntry] {
        &self.entries
    }

    /// Current worst retained entry, the one an incoming score must beat
    /// once the list is full.
    pub fn tail(&self) -> Option<&ScoreEntry> {
        self.entries.last()
    }

    /// Offers `entry` to the list. Returns whether it was retained.
    pub fn insert(&mut self, entry: ScoreEntry) -> bool {
        if self.is_full() {
            match self.tail() {
                Some(tail) if rank(&entry, tail) == Ordering::Less => {}
                _ => return false,
            }
        }
        let at = self
            .entries
            .partition_point(|e| rank(e, &entry) == Ordering::Less);
        self.entries.insert(at, entry);
        self.entries.truncate(self.capacity);
        true
    }
}

/// Value-style insertion: returns the updated list.
pub fn topk_insert(mut list: PartialTopK, entry: ScoreEntry) -> PartialTopK {
    list.insert(entry);
    list
}
