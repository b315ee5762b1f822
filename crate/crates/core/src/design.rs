//! Closed-form design mathematics.
//!
//! All logarithms are natural. Probabilities named `p` are the probability
//! that a matrix cell is ZERO; a cell is one with probability `1 - p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Property;

/// Relative tolerance under which two candidate maxima count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `ln(1 / (1 - x))`, accurate for small `x`.
#[inline]
fn ln_inv_one_minus(x: f64) -> f64 {
    -(-x).ln_1p()
}

/// `(1 - 1/k)^k` evaluated through `ln_1p`.
#[inline]
fn one_minus_inv_pow(k: f64) -> f64 {
    (k * (-1.0 / k).ln_1p()).exp()
}

fn check_prob(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {p} must lie in (0, 1)")))
    }
}

fn check_instance(n: usize, d: usize, delta: f64, property: Property) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("n must be ≥ 2, got {n}")));
    }
    property.check_d(d)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Coefficient of `ln n + ln(1/δ)` in the disjunct test count:
/// `1 / ln(1 / (1 - (1/d)(1 - 1/(d+1))^(d+1)))`.
pub fn gamma(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("gamma requires d ≥ 1"));
    }
    let d = d as f64;
    let x = one_minus_inv_pow(d + 1.0) / d;
    Ok(1.0 / ln_inv_one_minus(x))
}

/// Three-term expansion `e·d + (e-1)/2 - (e²+2)/(24e)/d` of [`gamma`].
pub fn gamma_expansion(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("gamma_expansion requires d ≥ 1"));
    }
    let e = std::f64::consts::E;
    let d = d as f64;
    Ok(e * d + (e - 1.0) / 2.0 - (e * e + 2.0) / (24.0 * e) / d)
}

/// Optimal probability of a zero cell: `1 - 1/(d+1)` for disjunct,
/// `1 - 1/d` for separable and semi-disjunct designs.
pub fn optimal_zero_prob(property: Property, d: usize) -> Result<f64> {
    property.check_d(d)?;
    let d = d as f64;
    Ok(match property {
        Property::Disjunct => 1.0 - 1.0 / (d + 1.0),
        Property::Separable | Property::SemiDisjunct => 1.0 - 1.0 / d,
    })
}

/// `(1 - 1/d) / ln(1 / (1 - (1/d)(1 - 1/d)^d))`, the `ln n` coefficient of
/// the semi-disjunct test count.
pub fn semidisjunct_coefficient(d: usize) -> Result<f64> {
    Property::SemiDisjunct.check_d(d)?;
    let df = d as f64;
    Ok((1.0 - 1.0 / df) / semidisjunct_rate(df))
}

/// `ln(1 / (1 - (1/d)(1 - 1/d)^d))`
fn semidisjunct_rate(d: f64) -> f64 {
    ln_inv_one_minus(one_minus_inv_pow(d) / d)
}

/// Coefficient of `ln n` in the prescribed test count for `property`.
pub fn ln_n_coefficient(property: Property, d: usize) -> Result<f64> {
    property.check_d(d)?;
    match property {
        Property::Disjunct => gamma(d),
        Property::Separable => gamma(d - 1),
        Property::SemiDisjunct => semidisjunct_coefficient(d),
    }
}

fn ceil_count(value: f64) -> Result<usize> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::domain(format!("test count evaluated to {value}")));
    }
    Ok((value.ceil() as usize).max(1))
}

/// `ceil(γ_d (ln n + ln(1/δ)))`.
pub fn disjunct_test_count(n: usize, d: usize, delta: f64) -> Result<usize> {
    check_instance(n, d, delta, Property::Disjunct)?;
    ceil_count(gamma(d)? * ((n as f64).ln() - delta.ln()))
}

/// Per-`w` terms of the separable test count at `p = 1 - 1/d`, indexed by
/// `w = 0..d`. Each is
/// `((d-w) ln n + ln(1/δ) + ln(d² 2^d)) / min(ln(1/(1-2p^d+2p^(2d-w))), ln(1/(1+p^d-p^w)))`.
pub fn separable_test_count_terms(n: usize, d: usize, delta: f64) -> Result<Vec<f64>> {
    check_instance(n, d, delta, Property::Separable)?;
    let p = optimal_zero_prob(Property::Separable, d)?;
    let df = d as f64;
    let ln_n = (n as f64).ln();
    let additive = -delta.ln() + 2.0 * df.ln() + df * std::f64::consts::LN_2;
    let pd = p.powi(d as i32);
    Ok((0..d)
        .map(|w| {
            let pair = 1.0 - 2.0 * pd + 2.0 * p.powi((2 * d - w) as i32);
            let nested = 1.0 + pd - p.powi(w as i32);
            let rate = (-pair.ln()).min(-nested.ln());
            ((d - w) as f64 * ln_n + additive) / rate
        })
        .collect())
}

/// Ceiling of the maximum of [`separable_test_count_terms`].
pub fn separable_test_count(n: usize, d: usize, delta: f64) -> Result<usize> {
    let terms = separable_test_count_terms(n, d, delta)?;
    ceil_count(terms.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `ceil(((1 - 1/d) ln n + ln(1/δ) + d ln 2 + 2 ln d) / ln(1/(1 - (1/d)(1-1/d)^d)))`.
pub fn semidisjunct_test_count(n: usize, d: usize, delta: f64) -> Result<usize> {
    check_instance(n, d, delta, Property::SemiDisjunct)?;
    let df = d as f64;
    let numerator = (1.0 - 1.0 / df) * (n as f64).ln() - delta.ln()
        + df * std::f64::consts::LN_2
        + 2.0 * df.ln();
    ceil_count(numerator / semidisjunct_rate(df))
}

/// One row of the coefficient comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub d: usize,
    pub disjunct: f64,
    pub separable: f64,
    pub semi_disjunct: f64,
}

pub fn coefficient_row(d: usize) -> Result<CoefficientRow> {
    Ok(CoefficientRow {
        d,
        disjunct: gamma(d)?,
        separable: ln_n_coefficient(Property::Separable, d)?,
        semi_disjunct: semidisjunct_coefficient(d)?,
    })
}

pub fn coefficient_table(d_max: usize) -> Result<Vec<CoefficientRow>> {
    if d_max < 2 {
        return Err(Error::domain("table needs d-max ≥ 2"));
    }
    (2..=d_max).map(coefficient_row).collect()
}

fn check_overlap(d1: usize, d2: usize, k: usize) -> Result<()> {
    if k > d1.min(d2) {
        return Err(Error::domain(format!(
            "overlap k={k} exceeds min(d1={d1}, d2={d2})"
        )));
    }
    Ok(())
}

/// Probability that one RID row gives the same answer for a defective set
/// of size `d1` and a candidate of size `d2` sharing `k` items:
/// `1 - p^d2 - p^d1 + 2 p^(d1+d2-k)`.
pub fn p_collision(d1: usize, d2: usize, k: usize, p: f64) -> Result<f64> {
    check_overlap(d1, d2, k)?;
    check_prob(p)?;
    Ok(1.0 - p.powi(d2 as i32) - p.powi(d1 as i32) + 2.0 * p.powi((d1 + d2 - k) as i32))
}

/// A nonnegative quantity held as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    /// Linear value, when it neither overflows nor underflows.
    pub fn value(&self) -> Option<f64> {
        let v = self.ln.exp();
        (v.is_finite() && (v.is_normal() || self.ln == f64::NEG_INFINITY)).then_some(v)
    }
}

/// `n^(d2-k) · p_collision(d1, d2, k, p)^m`, evaluated in log space.
pub fn big_p(n: usize, d1: usize, d2: usize, k: usize, p: f64, m: usize) -> Result<LogValue> {
    if n == 0 || m == 0 {
        return Err(Error::domain("big_p requires n ≥ 1 and m ≥ 1"));
    }
    let collision = p_collision(d1, d2, k, p)?;
    Ok(LogValue {
        ln: (d2 - k) as f64 * (n as f64).ln() + m as f64 * collision.ln(),
    })
}

/// Indices `(d1, d2, k)` of one union-bound term, with `w` the reduced index
/// when the term belongs to the reduced family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub d1: usize,
    pub d2: usize,
    pub k: usize,
    pub w: usize,
}

/// Position of `(d1, d2, k)` in the reduced family
/// `[(d,d,0), (0,d,0), (d,d,1), (1,d,1), ...]`, if it belongs to it.
fn reduced_rank(d: usize, d1: usize, d2: usize, k: usize) -> Option<usize> {
    if d2 != d || k >= d {
        return None;
    }
    if d1 == d {
        Some(2 * k)
    } else if d1 == k {
        Some(2 * k + 1)
    } else {
        None
    }
}

fn beats(candidate: f64, best: f64) -> bool {
    candidate > best + TIE_TOLERANCE
}

fn ties(candidate: f64, best: f64) -> bool {
    (candidate - best).abs() <= TIE_TOLERANCE || candidate == best
}

/// Maximum of the union-bound terms over the reduced family
/// `max_{0≤w<d} max(P(n,d,d,w,p), P(n,w,d,w,p))`.
pub fn pi_reduced(n: usize, d: usize, p: f64, m: usize) -> Result<(LogValue, SeparableTerm)> {
    Property::Separable.check_d(d)?;
    let mut best: Option<(LogValue, SeparableTerm)> = None;
    for w in 0..d {
        for (d1, d2, k) in [(d, d, w), (w, d, w)] {
            let value = big_p(n, d1, d2, k, p, m)?;
            let term = SeparableTerm { d1, d2, k, w };
            match best {
                Some((b, _)) if !beats(value.ln, b.ln) => {}
                _ => best = Some((value, term)),
            }
        }
    }
    Ok(best.expect("d ≥ 2 yields terms"))
}

/// Largest `d` the exhaustive [`pi_bruteforce`] accepts.
pub const PI_BRUTEFORCE_MAX_D: usize = 8;

/// Exhaustive maximum of `P(n,d1,d2,k,p)` over `d1, d2 ≤ d`, `k ≤ min(d1,d2)`,
/// excluding `d1 = d2 = k` (the candidate equal to the defective set).
/// Near-ties prefer the term [`pi_reduced`] would report.
pub fn pi_bruteforce(
    n: usize,
    d: usize,
    p: f64,
    m: usize,
) -> Result<(LogValue, (usize, usize, usize))> {
    Property::Separable.check_d(d)?;
    if d > PI_BRUTEFORCE_MAX_D {
        return Err(Error::domain(format!(
            "pi_bruteforce is limited to d ≤ {PI_BRUTEFORCE_MAX_D}"
        )));
    }
    let mut best: Option<(LogValue, (usize, usize, usize))> = None;
    for d1 in 0..=d {
        for d2 in 0..=d {
            for k in 0..=d1.min(d2) {
                if d1 == d2 && d2 == k {
                    continue;
                }
                let value = big_p(n, d1, d2, k, p, m)?;
                let replace = match best {
                    None => true,
                    Some((b, (b1, b2, bk))) => {
                        beats(value.ln, b.ln)
                            || (ties(value.ln, b.ln)
                                && match (reduced_rank(d, d1, d2, k), reduced_rank(d, b1, b2, bk)) {
                                    (Some(r), Some(rb)) => r < rb,
                                    (Some(_), None) => true,
                                    _ => false,
                                })
                    }
                };
                if replace {
                    best = Some((value, (d1, d2, k)));
                }
            }
        }
    }
    Ok(best.expect("d ≥ 2 yields terms"))
}

fn check_reduced(d: usize, w: usize, p: f64) -> Result<()> {
    if w >= d {
        return Err(Error::domain(format!(
            "w={w} must satisfy 0 ≤ w ≤ d-1 with d={d}"
        )));
    }
    check_prob(p)
}

/// `(d - w) / ln(1 / (1 + p^d - p^w))`; `+inf` when the log argument reaches 1.
pub fn t1(d: usize, w: usize, p: f64) -> Result<f64> {
    check_reduced(d, w, p)?;
    let arg = 1.0 + p.powi(d as i32) - p.powi(w as i32);
    Ok(rate_ratio(d - w, arg))
}

/// `(d - w) / ln(1 / (1 - 2p^d + 2p^(2d-w)))`; `+inf` when the log argument reaches 1.
pub fn t2(d: usize, w: usize, p: f64) -> Result<f64> {
    check_reduced(d, w, p)?;
    let arg = 1.0 - 2.0 * p.powi(d as i32) + 2.0 * p.powi((2 * d - w) as i32);
    Ok(rate_ratio(d - w, arg))
}

fn rate_ratio(numerator: usize, arg: f64) -> f64 {
    if arg >= 1.0 {
        return f64::INFINITY;
    }
    numerator as f64 / -arg.ln()
}

/// `(w/d)^(1/(d-w))`, the minimizer of [`t1`] in `p`.
pub fn p1_minimizer(d: usize, w: usize) -> Result<f64> {
    if w >= d {
        return Err(Error::domain(format!(
            "w={w} must satisfy 0 ≤ w ≤ d-1 with d={d}"
        )));
    }
    Ok((w as f64 / d as f64).powf(1.0 / (d - w) as f64))
}

/// `(d/(2d-w))^(1/(d-w))`, the minimizer of [`t2`] in `p`.
pub fn p2_minimizer(d: usize, w: usize) -> Result<f64> {
    if w >= d {
        return Err(Error::domain(format!(
            "w={w} must satisfy 0 ≤ w ≤ d-1 with d={d}"
        )));
    }
    Ok((d as f64 / (2 * d - w) as f64).powf(1.0 / (d - w) as f64))
}

/// Probability that a uniform weight-`r` row avoids `x` fixed columns:
/// `∏_{i=1..x} (1 - r/(n-i+1))`, or 0 when `x > n - r`.
pub fn q_avoid(n: usize, r: usize, x: usize) -> Result<f64> {
    if r > n {
        return Err(Error::domain(format!("row weight {r} exceeds n={n}")));
    }
    if x > n - r {
        return Ok(0.0);
    }
    let (nf, rf) = (n as f64, r as f64);
    Ok((1..=x).map(|i| 1.0 - rf / (nf - i as f64 + 1.0)).product())
}

/// Collision probability of [`p_collision`] for one constant-weight-`r` row:
/// `1 - q_d2 - q_d1 + 2 q_(d1+d2-k)`.
pub fn rrsd_collision(n: usize, r: usize, d1: usize, d2: usize, k: usize) -> Result<f64> {
    check_overlap(d1, d2, k)?;
    if d1 + d2 - k > n {
        return Err(Error::domain(format!(
            "sets of sizes {d1} and {d2} with overlap {k} do not fit in n={n}"
        )));
    }
    Ok(1.0 - q_avoid(n, r, d2)? - q_avoid(n, r, d1)? + 2.0 * q_avoid(n, r, d1 + d2 - k)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISJUNCT: [f64; 6] = [6.2366, 8.9722, 11.6999, 14.4241, 17.1465, 19.8678];
    const SEPARABLE: [f64; 6] = [3.4761, 6.2366, 8.9722, 11.6999, 14.4241, 17.1465];
    const SEMI: [f64; 6] = [3.7444, 6.4109, 9.1013, 11.8025, 14.5093, 17.2193];

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gamma_table_values() {
        for (i, d) in (2..=7).enumerate() {
            assert!(close(gamma(d).unwrap(), DISJUNCT[i], 5e-4), "gamma({d})");
            assert!(
                close(gamma(d - 1).unwrap(), SEPARABLE[i], 5e-4),
                "gamma({})",
                d - 1
            );
            assert!(
                close(semidisjunct_coefficient(d).unwrap(), SEMI[i], 5e-4),
                "semi({d})"
            );
        }
        assert!(close(gamma(1).unwrap(), 3.4761, 5e-4));
        assert!(gamma(0).is_err());
        assert!(semidisjunct_coefficient(1).is_err());
    }

    #[test]
    fn gamma_expansion_direct_values() {
        // e*2 + (e-1)/2 - (e^2+2)/(48e)
        assert!(close(
            gamma_expansion(2).unwrap(),
            6.223_745_389_672_57,
            1e-12
        ));
        assert!((gamma(100).unwrap() - gamma_expansion(100).unwrap()).abs() < 1e-3);
        let gaps: Vec<f64> = (1..=100)
            .map(|i| (gamma(10 * i).unwrap() - gamma_expansion(10 * i).unwrap()).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn optimal_probabilities() {
        assert!(close(
            optimal_zero_prob(Property::Disjunct, 2).unwrap(),
            2.0 / 3.0,
            1e-15
        ));
        assert_eq!(optimal_zero_prob(Property::Separable, 2).unwrap(), 0.5);
        assert!(close(
            optimal_zero_prob(Property::SemiDisjunct, 10).unwrap(),
            0.9,
            1e-15
        ));
        assert!(optimal_zero_prob(Property::SemiDisjunct, 1).is_err());
        assert!(optimal_zero_prob(Property::Disjunct, 0).is_err());
    }

    #[test]
    fn disjunct_counts() {
        // gamma(2) * (ln 1e6 + ln 100) = 114.883...
        assert_eq!(disjunct_test_count(1_000_000, 2, 0.01).unwrap(), 115);
        // gamma(5) * (ln 1e4 + ln 10) = 166.064...
        assert_eq!(disjunct_test_count(10_000, 5, 0.1).unwrap(), 167);
        assert!(disjunct_test_count(2, 1, 0.999).unwrap() >= 1);
        assert!(disjunct_test_count(1, 1, 0.1).is_err());
        assert!(disjunct_test_count(10, 1, 0.0).is_err());
    }

    #[test]
    fn separable_counts() {
        for d in 3..=7 {
            for n in [1_000, 10_000, 1_000_000] {
                let terms = separable_test_count_terms(n, d, 0.1).unwrap();
                let argmax = (0..d)
                    .max_by(|&a, &b| terms[a].total_cmp(&terms[b]))
                    .unwrap();
                assert_eq!(argmax, d - 1, "n={n} d={d}");
            }
        }
        // At d = 2 the disjoint-pair term (w = 0) takes over for large n.
        let terms = separable_test_count_terms(1_000_000, 2, 0.1).unwrap();
        assert!(terms[0] > terms[1]);
        let terms = separable_test_count_terms(1_000, 2, 0.1).unwrap();
        assert!(terms[1] > terms[0]);

        let n = 1_000_000f64;
        let cross = gamma(2).unwrap()
            * (n.ln() + 10f64.ln() + 2.0 * 3f64.ln() + 3.0 * std::f64::consts::LN_2);
        let m = separable_test_count(1_000_000, 3, 0.1).unwrap();
        assert!((m as f64 - cross.ceil()).abs() <= 1.0);
        assert_eq!(m, 128);

        for d in 2..=7 {
            let p = 1.0 - 1.0 / d as f64;
            let rate = -(1.0 + p.powi(d as i32) - p.powi(d as i32 - 1)).ln();
            let floor = (n.ln() / rate).ceil() as usize;
            assert!(separable_test_count(1_000_000, d, 0.1).unwrap() >= floor);
        }
        assert!(separable_test_count(100, 1, 0.1).is_err());
    }

    #[test]
    fn semidisjunct_counts() {
        // the additive d ln 2 term dominates at any usize n, so only the
        // slopes are ordered
        for d in 2..=64 {
            assert!(
                semidisjunct_coefficient(d).unwrap() < gamma(d).unwrap(),
                "d={d}"
            );
        }
        assert!(semidisjunct_test_count(2, 2, 0.999).unwrap() >= 1);
        // ln n coefficient of the count
        let a = semidisjunct_test_count(10_000, 4, 0.1).unwrap() as f64;
        let b = semidisjunct_test_count(100_000_000, 4, 0.1).unwrap() as f64;
        let slope = (b - a) / (100_000_000f64.ln() - 10_000f64.ln());
        assert!((slope - semidisjunct_coefficient(4).unwrap()).abs() < 0.15);
        assert!(close(semidisjunct_coefficient(4).unwrap(), 9.1013, 5e-4));
    }

    #[test]
    fn collision_examples() {
        assert!(close(p_collision(3, 3, 3, 0.4).unwrap(), 1.0, 1e-15));
        assert!(close(p_collision(1, 1, 0, 0.5).unwrap(), 0.5, 1e-15));
        assert!(close(p_collision(2, 1, 1, 0.5).unwrap(), 0.75, 1e-15));
        assert!(p_collision(1, 2, 2, 0.5).is_err());
        assert!(p_collision(1, 1, 0, 1.0).is_err());
    }

    /// Exhaustive probability over the joint states of the relevant cells.
    fn collision_by_enumeration(d1: usize, d2: usize, k: usize, p: f64) -> f64 {
        let relevant = d1 + d2 - k;
        let mut total = 0.0;
        for mask in 0u32..(1 << relevant) {
            // cells [0, k) shared, [k, d1) only in I, [d1, relevant) only in J
            let one = |c: usize| mask >> c & 1 == 1;
            let in_i = (0..d1).any(one);
            let in_j = (0..k).chain(d1..relevant).any(one);
            if in_i == in_j {
                let ones = mask.count_ones() as i32;
                total += (1.0 - p).powi(ones) * p.powi(relevant as i32 - ones);
            }
        }
        total
    }

    #[test]
    fn collision_matches_enumeration() {
        for d1 in 0..=4 {
            for d2 in 0..=4 {
                for k in 0..=d1.min(d2) {
                    for p in [0.2, 0.5, 0.85] {
                        let a = p_collision(d1, d2, k, p).unwrap();
                        let b = collision_by_enumeration(d1, d2, k, p);
                        assert!(close(a, b, 1e-12), "({d1},{d2},{k},{p}): {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn big_p_examples() {
        for (n, m) in [(10, 1), (1_000_000, 500)] {
            assert_eq!(big_p(n, 4, 4, 4, 0.3, m).unwrap().value(), Some(1.0));
        }
        let v = big_p(100, 2, 2, 1, 0.5, 10).unwrap().value().unwrap();
        assert!(close(v, 100.0 * 0.75f64.powi(10), 1e-12));
        assert!(close(v, 5.631_351_470_947_27, 1e-12));

        let huge = big_p(1_000_000, 5, 5, 0, 0.9, 1).unwrap();
        assert!(huge.ln > 60.0);
        let tiny = big_p(10, 1, 1, 0, 0.5, 5_000).unwrap();
        assert_eq!(tiny.value(), None);
    }

    #[test]
    fn big_p_log_and_linear_paths_agree() {
        for d1 in 0..=3 {
            for d2 in 0..=3 {
                for k in 0..=d1.min(d2) {
                    for (n, m, p) in [(50usize, 7usize, 0.4), (1000, 30, 0.75)] {
                        let log = big_p(n, d1, d2, k, p, m).unwrap().value().unwrap();
                        let linear = (n as f64).powi((d2 - k) as i32)
                            * p_collision(d1, d2, k, p).unwrap().powi(m as i32);
                        assert!((log - linear).abs() <= 1e-10 * linear.abs());
                    }
                }
            }
        }
    }

    #[test]
    fn pi_reduced_family_for_d2() {
        let (value, term) = pi_reduced(100, 2, 0.5, 50).unwrap();
        let family = [(2, 2, 0), (0, 2, 0), (2, 2, 1), (1, 2, 1)];
        assert!(family.contains(&(term.d1, term.d2, term.k)));
        let members: Vec<f64> = family
            .iter()
            .map(|&(a, b, c)| big_p(100, a, b, c, 0.5, 50).unwrap().ln)
            .collect();
        let max = members.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(value.ln, max);
    }

    #[test]
    fn pi_reduced_dominates_last_term() {
        for d in 2..=6 {
            for p in [0.3, 0.6, 0.95] {
                let (v, _) = pi_reduced(1000, d, p, 40).unwrap();
                assert!(v.ln >= big_p(1000, d, d, d - 1, p, 40).unwrap().ln);
            }
        }
    }

    #[test]
    fn pi_bruteforce_behaviour() {
        for d in 2..=5 {
            let m = separable_test_count(10_000, d, 0.1).unwrap();
            let p = 1.0 - 1.0 / d as f64;
            let (v, (d1, d2, k)) = pi_bruteforce(10_000, d, p, m).unwrap();
            assert!(!(d1 == d2 && d2 == k));
            assert!(v.value().unwrap() < 1.0);
            let bound = 0.1 / ((d * d) as f64 * 2f64.powi(d as i32));
            assert!(v.value().unwrap() <= bound, "d={d}");
        }
        assert!(pi_bruteforce(100, 9, 0.5, 10).is_err());
    }

    #[test]
    fn t_functions() {
        for d in 2..=8 {
            let p = 1.0 - 1.0 / d as f64;
            let a = t1(d, d - 1, p).unwrap();
            assert!(close(a, gamma(d - 1).unwrap(), 1e-9), "d={d}");
            for q in [0.1, 0.5, 0.9] {
                let direct = 1.0 / (1.0f64 / q).ln();
                assert!(close(t1(d, 0, q).unwrap(), direct, 1e-9));
            }
        }
        assert!(close(t1(3, 2, 2.0 / 3.0).unwrap(), 6.2366, 5e-4));
        assert!(close(
            t2(2, 1, 0.5).unwrap(),
            1.0 / (4.0f64 / 3.0).ln(),
            1e-12
        ));
        assert!(t1(3, 3, 0.5).is_err());
        assert!(t2(3, 1, 0.0).is_err());
        // 1 + p^d - p^w rounds to exactly 1
        assert_eq!(t1(40, 39, 1e-10).unwrap(), f64::INFINITY);
        assert_eq!(t2(40, 0, 1e-10).unwrap(), f64::INFINITY);
    }

    #[test]
    fn minimizers() {
        for d in 2..=10 {
            assert!(close(
                p1_minimizer(d, d - 1).unwrap(),
                1.0 - 1.0 / d as f64,
                1e-15
            ));
            assert!(close(
                p2_minimizer(d, 0).unwrap(),
                0.5f64.powf(1.0 / d as f64),
                1e-15
            ));
            assert_eq!(p1_minimizer(d, 0).unwrap(), 0.0);
        }
        assert!(p1_minimizer(3, 3).is_err());
    }

    #[test]
    fn minimizers_agree_with_grid_search() {
        const GRID: usize = 10_000;
        for d in 2..=6 {
            for w in 0..d {
                let argmin = |f: &dyn Fn(f64) -> f64| {
                    (1..GRID)
                        .map(|i| i as f64 / GRID as f64)
                        .min_by(|&a, &b| f(a).total_cmp(&f(b)))
                        .unwrap()
                };
                let g1 = argmin(&|p| t1(d, w, p).unwrap());
                let g2 = argmin(&|p| t2(d, w, p).unwrap());
                let resolution = 1.5 / GRID as f64;
                let p1 = p1_minimizer(d, w).unwrap();
                if w == 0 {
                    // t1(d, 0, p) = 1/ln(1/p) decreases toward p = 0
                    assert!(g1 <= resolution);
                } else {
                    assert!(
                        (g1 - p1).abs() <= resolution,
                        "t1 d={d} w={w}: {g1} vs {p1}"
                    );
                }
                let p2 = p2_minimizer(d, w).unwrap();
                assert!(
                    (g2 - p2).abs() <= resolution,
                    "t2 d={d} w={w}: {g2} vs {p2}"
                );
            }
        }
    }

    /// Fraction of all weight-`r` rows on which the two sets collide.
    fn rrsd_by_enumeration(n: usize, r: usize, d1: usize, d2: usize, k: usize) -> f64 {
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != r {
                continue;
            }
            total += 1;
            let one = |c: usize| mask >> c & 1 == 1;
            let in_i = (0..d1).any(one);
            let in_j = (0..k).chain(d1..d1 + d2 - k).any(one);
            hits += u64::from(in_i == in_j);
        }
        hits as f64 / total as f64
    }

    #[test]
    fn rrsd_collision_matches_enumeration() {
        assert!(close(
            rrsd_collision(4, 2, 1, 1, 0).unwrap(),
            1.0 / 3.0,
            1e-15
        ));
        for n in [4, 6, 9] {
            for r in 1..=n {
                for (d1, d2, k) in [(1, 1, 0), (2, 1, 1), (2, 2, 1), (3, 2, 0), (2, 3, 2)] {
                    if d1 + d2 - k > n {
                        continue;
                    }
                    let a = rrsd_collision(n, r, d1, d2, k).unwrap();
                    let b = rrsd_by_enumeration(n, r, d1, d2, k);
                    assert!(close(a, b, 1e-12), "n={n} r={r} ({d1},{d2},{k})");
                }
            }
        }
        assert!(rrsd_collision(3, 4, 1, 1, 0).is_err());
        assert!(rrsd_collision(3, 1, 2, 2, 0).is_err());
    }

    #[test]
    fn q_avoid_bounds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let n = rng.random_range(10..10_000usize);
            let r = rng.random_range(1..=n / 2);
            let x = rng.random_range(0..=(n / 20).max(1));
            let q = q_avoid(n, r, x).unwrap();
            let upper = (1.0 - r as f64 / n as f64).powi(x as i32);
            let lower = upper - (x * x) as f64 * r as f64 / (n * n) as f64;
            assert!(q <= upper * (1.0 + 1e-12), "n={n} r={r} x={x}");
            assert!(q >= lower - 1e-12, "n={n} r={r} x={x}");
        }
        assert_eq!(q_avoid(10, 4, 7).unwrap(), 0.0);
        assert_eq!(q_avoid(10, 10, 1).unwrap(), 0.0);
    }

    #[test]
    fn coefficient_table_rows() {
        let table = coefficient_table(7).unwrap();
        assert_eq!(table.len(), 6);
        let row6 = table.iter().find(|r| r.d == 6).unwrap();
        assert!(close(row6.disjunct, 17.1465, 5e-4));
        assert!(close(row6.separable, 14.4241, 5e-4));
        assert!(close(row6.semi_disjunct, 14.5093, 5e-4));
        for pair in table.windows(2) {
            assert!(pair[1].disjunct > pair[0].disjunct);
            assert!(pair[1].separable > pair[0].separable);
            assert!(pair[1].semi_disjunct > pair[0].semi_disjunct);
        }
        assert!(coefficient_table(1).is_err());
    }
}
