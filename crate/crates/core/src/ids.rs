//! Identifiers for dependent factors.
//!
//! Every factor that appears in a set carries a [`FactorId`]. Two sets that
//! share an id share the factor: evaluating both at the same assignment uses
//! the same value. Ids come from a [`FactorContext`], one per reachability run.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorId(u64);

impl FactorId {
    /// Ids start at 1. Panics on 0.
    pub fn new(value: u64) -> Self {
        assert!(value >= 1, "factor ids start at 1");
        FactorId(value)
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Builds an id list from raw values, e.g. `ids(&[1, 2, 3])`.
pub fn ids(values: &[u64]) -> Vec<FactorId> {
    values.iter().copied().map(FactorId::new).collect()
}

/// `[first, ids of second not in first]`, the common id list of two sets.
pub fn merge_id_lists(first: &[FactorId], second: &[FactorId]) -> Vec<FactorId> {
    let known: std::collections::HashSet<FactorId> = first.iter().copied().collect();
    let mut out = first.to_vec();
    out.extend(second.iter().copied().filter(|id| !known.contains(id)));
    out
}

/// Monotonic id allocator. Allocation is atomic, so a context may be shared
/// by reference across threads.
#[derive(Debug)]
pub struct FactorContext {
    next: AtomicU64,
}

impl FactorContext {
    pub fn new() -> Self {
        Self::starting_at(1)
    }

    pub fn starting_at(next: u64) -> Self {
        assert!(next >= 1, "factor ids start at 1");
        FactorContext {
            next: AtomicU64::new(next),
        }
    }

    /// Returns `k` fresh consecutive ids.
    pub fn allocate(&self, k: usize) -> Vec<FactorId> {
        let start = self.next.fetch_add(k as u64, Ordering::Relaxed);
        (start..start + k as u64).map(FactorId).collect()
    }

    pub fn peek_next(&self) -> u64 {
        self.next.load(Ordering::Relaxed)
    }
}

impl Default for FactorContext {
    fn default() -> Self {
        Self::new()
    }
}

/// Values for a collection of factors, each in `[-1, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorAssignment {
    values: HashMap<FactorId, f64>,
}

impl FactorAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs `ids` with `values` positionally.
    pub fn from_pairs(ids: &[FactorId], values: &[f64]) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(SetError::dims("FactorAssignment::from_pairs", ids.len(), values.len()));
        }
        let mut out = FactorAssignment::new();
        for (&id, &v) in ids.iter().zip(values) {
            out.set(id, v)?;
        }
        Ok(out)
    }

    pub fn set(&mut self, id: FactorId, value: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(SetError::FactorOutOfRange { id, value });
        }
        self.values.insert(id, value);
        Ok(())
    }

    /// Like [`set`](Self::set) but clamps values that overshoot the box by
    /// rounding noise (at most `slack`).
    pub fn set_clamped(&mut self, id: FactorId, value: f64, slack: f64) -> Result<()> {
        if value.abs() > 1.0 + slack || value.is_nan() {
            return Err(SetError::FactorOutOfRange { id, value });
        }
        self.values.insert(id, value.clamp(-1.0, 1.0));
        Ok(())
    }

    pub fn get(&self, id: FactorId) -> Option<f64> {
        self.values.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Merges `other` into `self`; `other` wins on overlap.
    pub fn extend(&mut self, other: &FactorAssignment) {
        self.values.extend(other.values.iter().map(|(k, v)| (*k, *v)));
    }

    /// Values aligned to `ids`, or the first id without a value.
    pub fn values_for(&self, ids: &[FactorId]) -> Result<Vec<f64>> {
        ids.iter()
            .map(|&id| self.get(id).ok_or(SetError::MissingFactor(id)))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FactorId, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}
