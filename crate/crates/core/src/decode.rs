//! Decoders: elimination, elimination with an exhaustive finish, and a
//! brute-force search over every candidate set.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::matrix::{AnswerVector, ItemSet, TestMatrix};
use crate::subsets::{binomial, subsets_up_to, walk_k_subsets};

/// Subset tests the exhaustive finish may spend before giving up.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 100_000_000;

/// Candidate sets the brute-force decoder may test: all sets of size ≤ 4
/// out of 40 items.
pub const DEFAULT_BRUTE_FORCE_BUDGET: u128 = 102_091;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DecodeResult {
    Found(ItemSet),
    /// Several sets explain the answers equally well.
    Ambiguous {
        count: u64,
    },
    NoConsistentSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub result: DecodeResult,
    /// Items removed by negative tests.
    pub eliminated_count: usize,
    /// Size of the set searched exhaustively, 0 if no search ran.
    pub exhaustive_candidates: usize,
}

impl DecodeOutcome {
    pub fn found(&self) -> Option<&ItemSet> {
        match &self.result {
            DecodeResult::Found(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Disjunct,
    SemiDisjunct,
    BruteForce,
}

impl DecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Disjunct => "disjunct",
            DecoderKind::SemiDisjunct => "semi-disjunct",
            DecoderKind::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disjunct" => Ok(DecoderKind::Disjunct),
            "semi" | "semidisjunct" | "semi-disjunct" => Ok(DecoderKind::SemiDisjunct),
            "brute" | "bruteforce" | "brute-force" => Ok(DecoderKind::BruteForce),
            other => Err(Error::domain(format!("unknown decoder `{other}`"))),
        }
    }
}

fn check_lengths(matrix: &TestMatrix, answers: &AnswerVector) -> Result<()> {
    if answers.len() != matrix.rows() {
        return Err(Error::input(format!(
            "answer vector has {} entries, matrix has {} tests",
            answers.len(),
            matrix.rows()
        )));
    }
    Ok(())
}

/// Items that appear in no negative test, as a bit set over the columns.
pub(crate) fn surviving_items(matrix: &TestMatrix, answers: &AnswerVector) -> Result<BitVec> {
    check_lengths(matrix, answers)?;
    let mut alive = BitVec::ones(matrix.cols());
    for r in 0..matrix.rows() {
        if !answers.get(r) {
            alive.clear_words(matrix.row_words(r));
        }
    }
    Ok(alive)
}

/// Removes every item that occurs in a negative test. The defective set is
/// always contained in the result when `answers` came from it.
pub fn eliminate(matrix: &TestMatrix, answers: &AnswerVector) -> Result<ItemSet> {
    surviving_items(matrix, answers).map(|bits| ItemSet::from_bits(&bits))
}

/// Elimination decoding; exact whenever the matrix is disjunct for the
/// defective set.
pub fn decode_disjunct(matrix: &TestMatrix, answers: &AnswerVector) -> Result<DecodeOutcome> {
    let survivors = eliminate(matrix, answers)?;
    Ok(DecodeOutcome {
        eliminated_count: matrix.cols() - survivors.len(),
        result: DecodeResult::Found(survivors),
        exhaustive_candidates: 0,
    })
}

pub fn decode_semidisjunct(
    matrix: &TestMatrix,
    answers: &AnswerVector,
    d: usize,
) -> Result<DecodeOutcome> {
    decode_semidisjunct_with_budget(matrix, answers, d, DEFAULT_EXHAUSTIVE_BUDGET)
}

/// Elimination, then (if more than `d` items survive) the lexicographically
/// first `d`-subset of the survivors whose answers match.
pub fn decode_semidisjunct_with_budget(
    matrix: &TestMatrix,
    answers: &AnswerVector,
    d: usize,
    budget: u128,
) -> Result<DecodeOutcome> {
    if d == 0 {
        return Err(Error::domain("d must be ≥ 1"));
    }
    let survivors = eliminate(matrix, answers)?;
    let eliminated_count = matrix.cols() - survivors.len();
    if survivors.len() <= d {
        return Ok(DecodeOutcome {
            result: DecodeResult::Found(survivors),
            eliminated_count,
            exhaustive_candidates: 0,
        });
    }

    let required = binomial(survivors.len(), d);
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let columns = matrix.columns(survivors.as_slice());
    let target = answers.bits();
    let mut hit = None;
    let _ = walk_k_subsets(
        &columns,
        d,
        matrix.rows(),
        Some(target),
        &mut |subset, or| {
            if or == target {
                hit = Some(subset.to_vec());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );

    let result = match hit {
        Some(positions) => DecodeResult::Found(ItemSet::from_sorted(
            positions.iter().map(|&p| survivors.as_slice()[p]).collect(),
        )),
        None => DecodeResult::NoConsistentSet,
    };
    Ok(DecodeOutcome {
        result,
        eliminated_count,
        exhaustive_candidates: survivors.len(),
    })
}

pub fn decode_separable_bruteforce(
    matrix: &TestMatrix,
    answers: &AnswerVector,
    d: usize,
) -> Result<DecodeOutcome> {
    decode_separable_bruteforce_with_budget(matrix, answers, d, DEFAULT_BRUTE_FORCE_BUDGET)
}

/// Every set of at most `d` items is checked against the answers.
pub fn decode_separable_bruteforce_with_budget(
    matrix: &TestMatrix,
    answers: &AnswerVector,
    d: usize,
    budget: u128,
) -> Result<DecodeOutcome> {
    check_lengths(matrix, answers)?;
    let consistent = consistent_sets(matrix, answers.bits(), d, budget, None)?;
    let result = match consistent.as_slice() {
        [] => DecodeResult::NoConsistentSet,
        [only] => DecodeResult::Found(only.clone()),
        many => DecodeResult::Ambiguous {
            count: many.len() as u64,
        },
    };
    Ok(DecodeOutcome {
        result,
        eliminated_count: 0,
        exhaustive_candidates: matrix.cols(),
    })
}

/// All sets of at most `d` items whose answer vector equals `target`, in
/// order of size then lexicographic order. Stops after `limit` sets.
pub(crate) fn consistent_sets(
    matrix: &TestMatrix,
    target: &BitVec,
    d: usize,
    budget: u128,
    limit: Option<usize>,
) -> Result<Vec<ItemSet>> {
    let n = matrix.cols();
    let required = subsets_up_to(n, d);
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let all: Vec<usize> = (0..n).collect();
    let columns = matrix.columns(&all);
    let mut found = Vec::new();
    for size in 0..=d.min(n) {
        let (_, flow) =
            walk_k_subsets(&columns, size, matrix.rows(), Some(target), &mut |s, or| {
                if or == target {
                    found.push(ItemSet::from_sorted(s.to_vec()));
                    if limit.is_some_and(|l| found.len() >= l) {
                        return ControlFlow::Break(());
                    }
                }
                ControlFlow::Continue(())
            });
        if flow.is_break() {
            break;
        }
    }
    Ok(found)
}

/// Runs the chosen decoder. `budget` applies to the exhaustive phases.
pub fn decode(
    kind: DecoderKind,
    matrix: &TestMatrix,
    answers: &AnswerVector,
    d: usize,
    budget: Option<u128>,
) -> Result<DecodeOutcome> {
    match kind {
        DecoderKind::Disjunct => decode_disjunct(matrix, answers),
        DecoderKind::SemiDisjunct => decode_semidisjunct_with_budget(
            matrix,
            answers,
            d,
            budget.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET),
        ),
        DecoderKind::BruteForce => decode_separable_bruteforce_with_budget(
            matrix,
            answers,
            d,
            budget.unwrap_or(DEFAULT_BRUTE_FORCE_BUDGET),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{answer_vector, ModelTag};
    use crate::randgen::gen_rid;
    use crate::verify;

    fn set(items: &[usize]) -> ItemSet {
        ItemSet::new(items.to_vec()).unwrap()
    }

    fn answers(bits: &str) -> AnswerVector {
        AnswerVector::from_bits(BitVec::from_bools(bits.chars().map(|c| c == '1')))
    }

    #[test]
    fn all_positive_eliminates_nothing() {
        let m = gen_rid(10, 12, 0.5, 1).unwrap();
        assert_eq!(eliminate(&m, &answers("1111111111")).unwrap().len(), 12);
    }

    #[test]
    fn identity_elimination() {
        let m = TestMatrix::identity(3).unwrap();
        assert_eq!(eliminate(&m, &answers("010")).unwrap(), set(&[1]));
    }

    #[test]
    fn length_mismatch() {
        let m = TestMatrix::identity(3).unwrap();
        assert!(matches!(
            eliminate(&m, &answers("01")),
            Err(Error::Input(_))
        ));
        assert!(decode_semidisjunct(&m, &answers("0101"), 1).is_err());
    }

    /// Per item: survives iff no negative row contains it.
    fn eliminate_naive(m: &TestMatrix, a: &AnswerVector) -> ItemSet {
        (0..m.cols())
            .filter(|&i| (0..m.rows()).all(|r| a.get(r) || !m.get(r, i)))
            .collect()
    }

    #[test]
    fn elimination_matches_naive_loop() {
        for seed in 0..20 {
            let m = gen_rid(30, 20, 0.7, seed).unwrap();
            let truth = set(&[(seed as usize * 3) % 7, 7, 13]);
            let a = answer_vector(&m, &truth).unwrap();
            let x = eliminate(&m, &a).unwrap();
            assert_eq!(x, eliminate_naive(&m, &a));
            assert!(truth.is_subset_of(&x));
        }
    }

    #[test]
    fn disjunct_decoder_on_verified_instance() {
        let truth = set(&[2, 40, 77]);
        let mut checked = 0;
        for seed in 0..50 {
            let m = gen_rid(60, 100, 0.75, seed).unwrap();
            let a = answer_vector(&m, &truth).unwrap();
            let out = decode_disjunct(&m, &a).unwrap();
            let found = out.found().unwrap();
            assert!(truth.is_subset_of(found));
            if verify::is_disjunct(&m, &truth).unwrap() {
                assert_eq!(found, &truth);
                assert_eq!(out.eliminated_count, 97);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn untested_items_survive() {
        let m =
            TestMatrix::from_fn(3, 4, 0, ModelTag::Explicit, |r, c| c != 2 && r == c % 3).unwrap();
        let out = decode_disjunct(&m, &answers("000")).unwrap();
        assert_eq!(out.found().unwrap(), &set(&[2]));
    }

    #[test]
    fn short_circuit_matches_disjunct_decoder() {
        let truth = set(&[5, 9]);
        for seed in 0..10 {
            let m = gen_rid(80, 50, 0.7, seed).unwrap();
            let a = answer_vector(&m, &truth).unwrap();
            if verify::is_disjunct(&m, &truth).unwrap() {
                let semi = decode_semidisjunct(&m, &a, 2).unwrap();
                let disj = decode_disjunct(&m, &a).unwrap();
                assert_eq!(semi, disj);
                assert_eq!(semi.exhaustive_candidates, 0);
            }
        }
    }

    fn explicit(rows: &[&str]) -> TestMatrix {
        let n = rows[0].len();
        TestMatrix::from_fn(rows.len(), n, 0, ModelTag::Explicit, |r, c| {
            rows[r].as_bytes()[c] == b'1'
        })
        .unwrap()
    }

    #[test]
    fn exhaustive_finish_recovers_planted_set() {
        // Item 0 only sits in positive tests, so elimination leaves {0, 1, 2};
        // {0, 1} and {0, 2} each miss one positive test.
        let m = explicit(&["1100", "0010", "0100", "0001"]);
        let truth = set(&[1, 2]);
        let a = answer_vector(&m, &truth).unwrap();
        assert_eq!(a.to_bit_string(), "1110");
        let out = decode_semidisjunct(&m, &a, 2).unwrap();
        assert_eq!(out.exhaustive_candidates, 3);
        assert_eq!(out.eliminated_count, 1);
        assert_eq!(out.found(), Some(&truth));
    }

    #[test]
    fn no_consistent_d_subset() {
        let m = explicit(&["10", "01"]);
        let out = decode_semidisjunct(&m, &answers("11"), 1).unwrap();
        assert_eq!(out.result, DecodeResult::NoConsistentSet);
        assert_eq!(out.exhaustive_candidates, 2);
    }

    #[test]
    fn budget_refusal() {
        let m = TestMatrix::from_fn(2, 30, 0, ModelTag::Explicit, |_, _| true).unwrap();
        let err = decode_semidisjunct_with_budget(&m, &answers("11"), 3, 100).unwrap_err();
        assert_eq!(
            err,
            Error::Budget {
                required: 4060,
                budget: 100
            }
        );
        assert!(decode_separable_bruteforce(
            &TestMatrix::identity(41).unwrap(),
            &answers(&"0".repeat(41)),
            4
        )
        .unwrap_err()
        .is_budget());
    }

    #[test]
    fn bruteforce_ambiguous_and_inconsistent() {
        let zero_row = TestMatrix::from_fn(1, 2, 0, ModelTag::Explicit, |_, _| false).unwrap();
        let out = decode_separable_bruteforce(&zero_row, &answers("0"), 1).unwrap();
        assert_eq!(out.result, DecodeResult::Ambiguous { count: 3 });
        let out = decode_separable_bruteforce(&zero_row, &answers("1"), 1).unwrap();
        assert_eq!(out.result, DecodeResult::NoConsistentSet);
    }

    #[test]
    fn bruteforce_on_identity() {
        let m = TestMatrix::identity(6).unwrap();
        let truth = set(&[1, 4]);
        let a = answer_vector(&m, &truth).unwrap();
        let out = decode_separable_bruteforce(&m, &a, 3).unwrap();
        assert_eq!(out.result, DecodeResult::Found(truth));
    }

    #[test]
    fn decoder_names() {
        assert_eq!(
            "semi".parse::<DecoderKind>().unwrap(),
            DecoderKind::SemiDisjunct
        );
        assert_eq!(
            "brute".parse::<DecoderKind>().unwrap(),
            DecoderKind::BruteForce
        );
        assert!("x".parse::<DecoderKind>().is_err());
    }
}
