//! Mixed-radix indexing of charge configurations over several rotor slots.

use crate::error::{Error, Result};

/// Largest basis any builder will materialize.
pub const MAX_STATES: u128 = 1 << 26;

/// Product of symmetric charge windows `−n_max[k]..=n_max[k]`; slot 0 is the
/// slowest-varying index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigSpace {
    cutoffs: Vec<i64>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl ConfigSpace {
    pub fn new(cutoffs: &[u32]) -> Result<Self> {
        let states: u128 = cutoffs.iter().map(|&c| 2 * c as u128 + 1).product();
        if states > MAX_STATES {
            return Err(Error::DimensionOverflow {
                states,
                limit: MAX_STATES,
            });
        }
        let dims: Vec<usize> = cutoffs.iter().map(|&c| 2 * c as usize + 1).collect();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(Self {
            cutoffs: cutoffs.iter().map(|&c| c as i64).collect(),
            dims,
            strides,
            dim: states as usize,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> usize {
        self.dims.len()
    }

    pub fn slot_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cutoff(&self, slot: usize) -> i64 {
        self.cutoffs[slot]
    }

    pub fn decode_into(&self, index: usize, out: &mut [i64]) {
        let mut rest = index;
        for k in 0..self.dims.len() {
            out[k] = (rest / self.strides[k]) as i64 - self.cutoffs[k];
            rest %= self.strides[k];
        }
    }

    pub fn decode(&self, index: usize) -> Vec<i64> {
        let mut out = vec![0; self.dims.len()];
        self.decode_into(index, &mut out);
        out
    }

    pub fn encode(&self, charges: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for (k, &c) in charges.iter().enumerate() {
            if c.abs() > self.cutoffs[k] {
                return None;
            }
            idx += (c + self.cutoffs[k]) as usize * self.strides[k];
        }
        Some(idx)
    }

    /// Index after adding `delta[k]` to each listed slot, if still in range.
    pub fn shifted(&self, index: usize, charges: &[i64], delta: &[(usize, i64)]) -> Option<usize> {
        let mut idx = index as i64;
        for &(slot, d) in delta {
            let c = charges[slot] + d;
            if c.abs() > self.cutoffs[slot] {
                return None;
            }
            idx += d * self.strides[slot] as i64;
        }
        Some(idx as usize)
    }
}
