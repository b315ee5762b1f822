//! Exhaustive checks of the matrix properties for a known defective set.
//!
//! These are ground truth for tests and experiments at desk scale; the
//! separability check enumerates every candidate set.

use serde::{Deserialize, Serialize};

use crate::decode::{consistent_sets, surviving_items, DEFAULT_BRUTE_FORCE_BUDGET};
use crate::error::{Error, Result};
use crate::matrix::{answer_vector, ItemSet, TestMatrix};
use crate::params::Property;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    /// A non-defective item no negative test can rule out.
    NonDisjunctItem(usize),
    /// Another set of at most `d` items with the same answers.
    ConfusableSet(ItemSet),
    /// More than `n^(1/d)` items lack a ruling-out test.
    OversizedResidual(ItemSet),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Items outside the defective set that no negative test contains.
    pub non_disjunct_items: ItemSet,
}

fn check_set(matrix: &TestMatrix, defective: &ItemSet) -> Result<()> {
    defective.check_within(matrix.cols())
}

/// True iff some test contains `item` and none of `defective`.
pub fn is_disjunct_for_item(matrix: &TestMatrix, defective: &ItemSet, item: usize) -> Result<bool> {
    check_set(matrix, defective)?;
    if item >= matrix.cols() {
        return Err(Error::input(format!("item {} out of range", item + 1)));
    }
    if defective.contains(item) {
        return Err(Error::input(format!(
            "item {} is in the defective set",
            item + 1
        )));
    }
    Ok((0..matrix.rows())
        .any(|r| matrix.get(r, item) && defective.iter().all(|i| !matrix.get(r, i))))
}

/// The items outside `defective` that no negative test rules out.
pub fn non_disjunct_items(matrix: &TestMatrix, defective: &ItemSet) -> Result<ItemSet> {
    check_set(matrix, defective)?;
    let answers = answer_vector(matrix, defective)?;
    let mut residual = surviving_items(matrix, &answers)?;
    for i in defective.iter() {
        residual.set(i, false);
    }
    Ok(ItemSet::from_bits(&residual))
}

pub fn is_disjunct(matrix: &TestMatrix, defective: &ItemSet) -> Result<bool> {
    Ok(non_disjunct_items(matrix, defective)?.is_empty())
}

/// A set `J != defective`, `|J| <= d`, with the same answers, if one exists.
pub fn separability_witness(
    matrix: &TestMatrix,
    defective: &ItemSet,
    d: usize,
    budget: u128,
) -> Result<Option<ItemSet>> {
    check_set(matrix, defective)?;
    let target = answer_vector(matrix, defective)?;
    let found = consistent_sets(matrix, target.bits(), d, budget, Some(2))?;
    Ok(found.into_iter().find(|s| s != defective))
}

pub fn is_separable(matrix: &TestMatrix, defective: &ItemSet, d: usize) -> Result<bool> {
    Ok(separability_witness(matrix, defective, d, DEFAULT_BRUTE_FORCE_BUDGET)?.is_none())
}

/// `n^(1/d)`, the residual size a semi-disjunct matrix may leave.
pub fn residual_threshold(n: usize, d: usize) -> f64 {
    (n as f64).powf(1.0 / d as f64)
}

pub fn is_semidisjunct(
    matrix: &TestMatrix,
    defective: &ItemSet,
    d: usize,
) -> Result<PropertyReport> {
    check_property(
        matrix,
        defective,
        d,
        Property::SemiDisjunct,
        DEFAULT_BRUTE_FORCE_BUDGET,
    )
}

/// Full report for one property. `budget` bounds the separability search.
pub fn check_property(
    matrix: &TestMatrix,
    defective: &ItemSet,
    d: usize,
    property: Property,
    budget: u128,
) -> Result<PropertyReport> {
    if d == 0 {
        return Err(Error::domain("d must be ≥ 1"));
    }
    let residual = non_disjunct_items(matrix, defective)?;
    let witness = match property {
        Property::Disjunct => residual.iter().next().map(Witness::NonDisjunctItem),
        Property::Separable => {
            separability_witness(matrix, defective, d, budget)?.map(Witness::ConfusableSet)
        }
        Property::SemiDisjunct => match separability_witness(matrix, defective, d, budget)? {
            Some(j) => Some(Witness::ConfusableSet(j)),
            None if residual.len() as f64 > residual_threshold(matrix.cols(), d) => {
                Some(Witness::OversizedResidual(residual.clone()))
            }
            None => None,
        },
    };
    Ok(PropertyReport {
        property,
        holds: witness.is_none(),
        witness,
        non_disjunct_items: residual,
    })
}
