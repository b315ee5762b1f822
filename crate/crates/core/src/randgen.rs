//! Seeded generation of random test matrices.
//!
//! Every row draws from its own ChaCha8 stream seeded with
//! `derive_seed(seed, row)`, so rows can be produced in any order or in
//! parallel and the matrix is still a pure function of its parameters.
//! Streams are stable within this implementation only.

use rand::distr::Bernoulli;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{words_for, WORD_BITS};
use crate::error::{Error, Result};
use crate::matrix::{ModelTag, TestMatrix};
use crate::params::{DesignSpec, Model};

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `master`:
/// `mix64(master ^ mix64(index + φ))` with φ the 64-bit golden-ratio constant.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// A master seed plus a stream counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSeed {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl GeneratorSeed {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        GeneratorSeed {
            master_seed,
            stream_index,
        }
    }

    pub fn value(&self) -> u64 {
        derive_seed(self.master_seed, self.stream_index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.value())
    }
}

fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    GeneratorSeed::new(seed, row as u64).rng()
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::domain(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    Ok(())
}

/// Marks positions of a Bernoulli(`prob`) process over `n` cells by sampling
/// the gaps between hits. With `flip` the hits clear bits instead of setting them.
fn bernoulli_positions(
    row: &mut [u64],
    n: usize,
    gaps: &Geometric,
    flip: bool,
    rng: &mut ChaCha8Rng,
) {
    let mut pos: u64 = 0;
    loop {
        pos = pos.saturating_add(gaps.sample(rng));
        if pos >= n as u64 {
            break;
        }
        let c = pos as usize;
        let bit = 1u64 << (c % WORD_BITS);
        if flip {
            row[c / WORD_BITS] &= !bit;
        } else {
            row[c / WORD_BITS] |= bit;
        }
        pos += 1;
    }
}

/// Below this probability of the rarer value a row is filled by sampling
/// gaps; above it, cell by cell.
const GAP_SAMPLING_BELOW: f64 = 1.0 / 16.0;

fn bernoulli_cells(row: &mut [u64], n: usize, cell: &Bernoulli, rng: &mut ChaCha8Rng) {
    for (w, word) in row.iter_mut().enumerate() {
        let width = (n - w * WORD_BITS).min(WORD_BITS);
        let mut acc = 0u64;
        for b in 0..width {
            acc |= u64::from(cell.sample(rng)) << b;
        }
        *word = acc;
    }
}

/// `m x n` matrix with independent cells, each zero with probability `zero_prob`.
pub fn gen_rid(m: usize, n: usize, zero_prob: f64, seed: u64) -> Result<TestMatrix> {
    check_dims(m, n)?;
    if !(zero_prob > 0.0 && zero_prob < 1.0) {
        return Err(Error::domain(format!(
            "zero probability {zero_prob} must lie in (0, 1)"
        )));
    }
    let one_prob = 1.0 - zero_prob;
    let cell = Bernoulli::new(one_prob).map_err(|e| Error::domain(e.to_string()))?;
    // Sample whichever value is rarer; the other fills the row.
    let flip = one_prob > 0.5;
    let rare = if flip { zero_prob } else { one_prob };
    let gaps = Geometric::new(rare).map_err(|e| Error::domain(e.to_string()))?;
    let wpr = words_for(n);
    let full_tail = crate::bits::tail_mask(n);

    let mut bits = vec![0u64; m * wpr];
    bits.par_chunks_mut(wpr).enumerate().for_each(|(r, row)| {
        let mut rng = row_rng(seed, r);
        if rare >= GAP_SAMPLING_BELOW {
            bernoulli_cells(row, n, &cell, &mut rng);
            return;
        }
        if flip {
            row.fill(u64::MAX);
            row[wpr - 1] = full_tail;
        }
        bernoulli_positions(row, n, &gaps, flip, &mut rng);
    });
    TestMatrix::from_words(m, n, bits, seed, ModelTag::Rid)
}

/// `m x n` matrix whose rows are independent uniform `r`-subsets of the items.
pub fn gen_rrsd(m: usize, n: usize, row_weight: usize, seed: u64) -> Result<TestMatrix> {
    check_dims(m, n)?;
    if row_weight == 0 || row_weight > n {
        return Err(Error::domain(format!(
            "row weight {row_weight} must lie in 1..={n}"
        )));
    }
    let wpr = words_for(n);
    let mut bits = vec![0u64; m * wpr];
    bits.par_chunks_mut(wpr).enumerate().for_each(|(r, row)| {
        let mut rng = row_rng(seed, r);
        for c in index::sample(&mut rng, n, row_weight) {
            row[c / WORD_BITS] |= 1 << (c % WORD_BITS);
        }
    });
    TestMatrix::from_words(m, n, bits, seed, ModelTag::RrSd)
}

/// Draws the matrix a design describes.
pub fn generate(spec: &DesignSpec, seed: u64) -> Result<TestMatrix> {
    spec.validate()?;
    match spec.model {
        Model::Rid { zero_prob } => gen_rid(spec.m, spec.n, zero_prob, seed),
        Model::RrSd { row_weight } => gen_rrsd(spec.m, spec.n, row_weight, seed),
    }
}
