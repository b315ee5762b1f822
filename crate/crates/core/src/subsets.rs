//! Lexicographic subset enumeration.

use std::ops::ControlFlow;

use crate::bits::BitVec;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `Σ_{j=0..=k} C(n, j)`, saturating.
pub fn subsets_up_to(n: usize, k: usize) -> u128 {
    (0..=k.min(n)).fold(0u128, |acc, j| acc.saturating_add(binomial(n, j)))
}

/// Iterator over the `k`-subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let cur = self.current.as_mut().unwrap();
        // rightmost position that can still advance
        match (0..k).rev().find(|&i| cur[i] < self.n - k + i) {
            Some(i) => {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// Walks the `k`-subsets of `0..columns.len()` in lexicographic order,
/// handing `visit` each subset together with the OR of its columns.
///
/// With `within` set, any prefix whose OR has a bit outside `within` is
/// skipped along with all its extensions. Returns the number of subsets
/// visited and whether `visit` broke out.
pub(crate) fn walk_k_subsets<F>(
    columns: &[BitVec],
    k: usize,
    rows: usize,
    within: Option<&BitVec>,
    visit: &mut F,
) -> (u64, ControlFlow<()>)
where
    F: FnMut(&[usize], &BitVec) -> ControlFlow<()>,
{
    let mut chosen = Vec::with_capacity(k);
    let mut stack = vec![BitVec::zeros(rows); k + 1];
    let mut visited = 0;
    let flow = descend(
        columns,
        k,
        within,
        0,
        &mut chosen,
        &mut stack,
        &mut visited,
        visit,
    );
    (visited, flow)
}

#[allow(clippy::too_many_arguments)]
fn descend<F>(
    columns: &[BitVec],
    k: usize,
    within: Option<&BitVec>,
    start: usize,
    chosen: &mut Vec<usize>,
    stack: &mut [BitVec],
    visited: &mut u64,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize], &BitVec) -> ControlFlow<()>,
{
    let depth = chosen.len();
    if depth == k {
        *visited += 1;
        return visit(chosen, &stack[depth]);
    }
    let remaining = k - depth;
    if columns.len() < start + remaining {
        return ControlFlow::Continue(());
    }
    for c in start..=columns.len() - remaining {
        let (lower, upper) = stack.split_at_mut(depth + 1);
        let next = &mut upper[0];
        next.clone_from(&lower[depth]);
        next.or_assign(&columns[c]);
        if within.is_some_and(|w| !next.is_subset_of(w)) {
            continue;
        }
        chosen.push(c);
        let flow = descend(columns, k, within, c + 1, chosen, stack, visited, visit);
        chosen.pop();
        flow?;
    }
    ControlFlow::Continue(())
}
