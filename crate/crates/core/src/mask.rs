//! Binary feature masks and the column operations built on them.
//!
//! Indices are 0-based. A mask `[1, 0, 1]` keeps columns 0 and 2 and zeroes column 1
//! in place, so the masked matrix keeps its original width and a model fitted on all
//! columns can still consume it.

use std::fmt;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: Vec<bool>,
}

impl Mask {
    pub fn ones(len: usize) -> Self {
        Self { bits: vec![true; len] }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    /// Builds a mask from 0/1 entries; anything else is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .enumerate()
            .map(|(j, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Selection(format!("mask entry {j} is {other}, not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(|bits| Self { bits })
    }

    /// Mask of width `len` with exactly `indices` set.
    pub fn from_support(len: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = Self::zeros(len);
        for &j in indices {
            if j >= len {
                return Err(Error::Selection(format!("index {j} out of range for width {len}")));
            }
            mask.bits[j] = true;
        }
        Ok(mask)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_set(&self, j: usize) -> bool {
        self.bits[j]
    }

    /// The L0 norm: number of kept features.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }

    /// Ascending indices of the kept features.
    pub fn support(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }

    /// Zeroes entry `j`. Panics if `j` is out of range.
    pub fn clear(&mut self, j: usize) {
        self.bits[j] = false;
    }

    /// Copy of this mask with entry `j` zeroed.
    pub fn without(&self, j: usize) -> Mask {
        let mut m = self.clone();
        m.clear(j);
        m
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Ascending support of `mask`; its length is the mask's L0 norm.
pub fn mask_support(mask: &Mask) -> Vec<usize> {
    mask.support()
}

/// Hadamard product of every row with the mask. The input is left untouched.
pub fn apply_mask(features: ArrayView2<'_, f64>, mask: &Mask) -> Result<Array2<f64>> {
    if features.ncols() != mask.len() {
        return Err(Error::Dimension(format!(
            "mask of length {} applied to {} columns",
            mask.len(),
            features.ncols()
        )));
    }
    let mut out = features.to_owned();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        if !mask.is_set(j) {
            col.fill(0.0);
        }
    }
    Ok(out)
}

/// Columns `indices` of `features` in ascending index order. Duplicates are collapsed.
pub fn select_columns(features: ArrayView2<'_, f64>, indices: &[usize]) -> Result<Array2<f64>> {
    if indices.is_empty() {
        return Err(Error::Selection("empty column selection".into()));
    }
    if let Some(&j) = indices.iter().find(|&&j| j >= features.ncols()) {
        return Err(Error::Selection(format!(
            "column {j} out of range for width {}",
            features.ncols()
        )));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(features.select(Axis(1), &sorted).as_standard_layout().into_owned())
}
