use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State values `V: S -> R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueTable(Vec<f64>);

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("value at state {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(state_count: usize) -> Self {
        Self(vec![0.0; state_count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    /// `max_s |self(s) - other(s)|`.
    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl std::ops::Index<usize> for ValueTable {
    type Output = f64;

    fn index(&self, state: usize) -> &f64 {
        &self.0[state]
    }
}

/// Dense `Q: S x A -> R`, joint actions in lexicographic index order.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    joint_count: usize,
    values: Vec<f64>,
}

impl QTable {
    pub(crate) fn from_parts(joint_count: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len() % joint_count.max(1), 0);
        Self { joint_count, values }
    }

    pub fn state_count(&self) -> usize {
        self.values.len() / self.joint_count.max(1)
    }

    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    pub fn get(&self, state: usize, joint_index: usize) -> f64 {
        self.values[state * self.joint_count + joint_index]
    }

    /// All joint-action values of one state.
    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.joint_count..(state + 1) * self.joint_count]
    }
}
