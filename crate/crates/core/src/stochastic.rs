//! Stochastic cells: expected utility, first-order stochastic dominance and
//! Monte Carlo rank stability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classic::weighted_sum_rank;
use crate::error::{Error, Result};
use crate::model::{scale_columns, CellValue, Criterion, DecisionMatrix, Direction, Scaling, ScoreMatrix, CLOSURE_TOL};
use crate::rank::RankResult;

/// A finite distribution with strictly increasing outcome values and
/// positive probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    outcomes: Vec<(f64, f64)>,
}

impl DiscreteDistribution {
    /// Canonicalizes raw `(value, probability)` pairs: drops zero-probability
    /// outcomes, sorts by value and merges duplicates.
    pub fn new(raw: &[(f64, f64)]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        for &(v, p) in raw {
            if !v.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidDistribution(format!("bad outcome ({v}, {p})")));
            }
        }
        let total: f64 = raw.iter().map(|o| o.1).sum();
        if (total - 1.0).abs() > CLOSURE_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let mut sorted: Vec<(f64, f64)> = raw.iter().copied().filter(|o| o.1 > 0.0).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut outcomes: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (v, p) in sorted {
            match outcomes.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => outcomes.push((v, p)),
            }
        }
        Ok(DiscreteDistribution { outcomes })
    }

    pub fn degenerate(value: f64) -> Self {
        DiscreteDistribution {
            outcomes: vec![(value, 1.0)],
        }
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    pub fn min(&self) -> f64 {
        self.outcomes[0].0
    }

    pub fn max(&self) -> f64 {
        self.outcomes[self.outcomes.len() - 1].0
    }

    pub fn is_degenerate(&self) -> bool {
        self.outcomes.len() == 1
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.outcomes.iter().take_while(|o| o.0 <= t).map(|o| o.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|(v, p)| v * p).sum()
    }

    /// Mirror image `x -> -x`, turning "lower is better" into "higher is
    /// better".
    pub fn negated(&self) -> Self {
        DiscreteDistribution {
            outcomes: self.outcomes.iter().rev().map(|&(v, p)| (-v, p)).collect(),
        }
    }

    /// Inverse-CDF draw for `u` in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, p) in &self.outcomes {
            acc += p;
            if u < acc {
                return v;
            }
        }
        self.max()
    }

    /// Probability-weighted mixture of distributions.
    pub fn mixture(parts: &[(&DiscreteDistribution, f64)]) -> Result<Self> {
        let raw: Vec<(f64, f64)> = parts
            .iter()
            .flat_map(|(d, w)| d.outcomes.iter().map(move |&(v, p)| (v, p * w)))
            .collect();
        DiscreteDistribution::new(&raw)
    }

    pub fn from_cell(cell: &CellValue) -> Option<Result<Self>> {
        match cell {
            CellValue::Crisp(v) => Some(Ok(DiscreteDistribution::degenerate(*v))),
            CellValue::Dist(raw) => Some(DiscreteDistribution::new(raw)),
            CellValue::Ifs(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum UtilityFunction {
    #[default]
    Linear,
    /// Concave, risk-averse; `alpha > 0`.
    Exponential { alpha: f64 },
}

impl UtilityFunction {
    pub fn check(&self) -> Result<()> {
        match *self {
            UtilityFunction::Exponential { alpha } if !(alpha > 0.0) || !alpha.is_finite() => Err(
                Error::InvalidParameter(format!("exponential utility needs alpha > 0, got {alpha}")),
            ),
            _ => Ok(()),
        }
    }

    /// Utility of a rescaled outcome in [0, 1]; `u(0) = 0`, `u(1) = 1`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            UtilityFunction::Linear => x,
            UtilityFunction::Exponential { alpha } => (1.0 - (-alpha * x).exp()) / (1.0 - (-alpha).exp()),
        }
    }
}

/// Expected utility of `d` after rescaling outcomes from `range` to [0, 1].
pub fn expected_utility(d: &DiscreteDistribution, u: UtilityFunction, range: (f64, f64)) -> Result<f64> {
    u.check()?;
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::BadRange { lo, hi });
    }
    let mut total = 0.0;
    for &(v, p) in d.outcomes() {
        if v < lo || v > hi {
            return Err(Error::OutOfRange { value: v, lo, hi });
        }
        total += p * u.eval((v - lo) / (hi - lo));
    }
    Ok(total)
}

fn stochastic_cells(
    matrix: &DecisionMatrix,
    alternatives: &[String],
    criteria: &[Criterion],
) -> Result<Vec<Vec<DiscreteDistribution>>> {
    alternatives
        .iter()
        .map(|a| {
            criteria
                .iter()
                .map(|c| {
                    let cell = matrix.cell(a, &c.id).ok_or_else(|| {
                        Error::DimensionMismatch(format!("missing cell ({a}, {})", c.id))
                    })?;
                    DiscreteDistribution::from_cell(cell).unwrap_or_else(|| {
                        Err(Error::NonStochasticCell {
                            alternative: a.clone(),
                            criterion: c.id.clone(),
                        })
                    })
                })
                .collect()
        })
        .collect()
}

/// Reduces every cell to its expected utility on the criterion's observed
/// outcome range and ranks the result by weighted sum.
pub fn eu_rank(
    matrix: &DecisionMatrix,
    alternatives: &[String],
    criteria: &[Criterion],
    utility: UtilityFunction,
    weights: &[f64],
) -> Result<RankResult> {
    utility.check()?;
    let dists = stochastic_cells(matrix, alternatives, criteria)?;
    let mut rows = vec![vec![0.0; criteria.len()]; alternatives.len()];
    for (j, c) in criteria.iter().enumerate() {
        let lo = dists.iter().map(|r| r[j].min()).fold(f64::INFINITY, f64::min);
        let hi = dists.iter().map(|r| r[j].max()).fold(f64::NEG_INFINITY, f64::max);
        for (i, row) in rows.iter_mut().enumerate() {
            row[j] = if hi <= lo {
                0.5
            } else {
                let d = match c.direction {
                    Direction::Benefit => dists[i][j].clone(),
                    // u(1 - x') over [lo, hi] equals u(x') of -x over [-hi, -lo]
                    Direction::Cost => dists[i][j].negated(),
                };
                let range = match c.direction {
                    Direction::Benefit => (lo, hi),
                    Direction::Cost => (-hi, -lo),
                };
                expected_utility(&d, utility, range)?
            };
        }
    }
    let reduced = ScoreMatrix::new(alternatives.to_vec(), rows.clone());
    let mut result = weighted_sum_rank(&reduced, weights)?;
    result.method = "expected_utility".into();
    let table: serde_json::Map<String, serde_json::Value> = alternatives
        .iter()
        .zip(&rows)
        .map(|(a, row)| {
            let cells: serde_json::Map<_, _> = criteria.iter().zip(row).map(|(c, v)| (c.id.clone(), json!(v))).collect();
            (a.clone(), cells.into())
        })
        .collect();
    Ok(result
        .with_diagnostic("expectedUtility", table.into())
        .with_diagnostic("utility", json!(utility)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    ADominates,
    BDominates,
    None,
    Equal,
}

const CDF_TOL: f64 = 1e-12;

/// First-order stochastic dominance by comparing CDFs on the merged support.
pub fn fsd_check(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Dominance {
    let mut support: Vec<f64> = a.outcomes().iter().chain(b.outcomes()).map(|o| o.0).collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    let (mut a_below, mut b_below) = (false, false);
    for t in support {
        let diff = a.cdf(t) - b.cdf(t);
        if diff < -CDF_TOL {
            a_below = true;
        } else if diff > CDF_TOL {
            b_below = true;
        }
    }
    match (a_below, b_below) {
        (true, false) => Dominance::ADominates,
        (false, true) => Dominance::BDominates,
        (false, false) => Dominance::Equal,
        (true, true) => Dominance::None,
    }
}

/// Scores each alternative by weighted net FSD wins per criterion,
/// normalized by `n - 1`.
pub fn fsd_rank(
    matrix: &DecisionMatrix,
    alternatives: &[String],
    criteria: &[Criterion],
    weights: &[f64],
) -> Result<RankResult> {
    if weights.len() != criteria.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} criteria",
            weights.len(),
            criteria.len()
        )));
    }
    let n = alternatives.len();
    if n < 2 {
        return Err(Error::DimensionMismatch("at least two alternatives are required".into()));
    }
    let dists = stochastic_cells(matrix, alternatives, criteria)?;
    let mut scores = vec![0.0; n];
    let mut relation = Vec::new();
    for (j, c) in criteria.iter().enumerate() {
        let oriented: Vec<DiscreteDistribution> = dists
            .iter()
            .map(|r| match c.direction {
                Direction::Benefit => r[j].clone(),
                Direction::Cost => r[j].negated(),
            })
            .collect();
        for a in 0..n {
            for b in (a + 1)..n {
                let (winner, loser) = match fsd_check(&oriented[a], &oriented[b]) {
                    Dominance::ADominates => (a, b),
                    Dominance::BDominates => (b, a),
                    _ => continue,
                };
                let step = weights[j] / (n as f64 - 1.0);
                scores[winner] += step;
                scores[loser] -= step;
                relation.push(json!([c.id, alternatives[winner], alternatives[loser]]));
            }
        }
    }
    Ok(RankResult::from_scores("fsd", alternatives, &scores).with_diagnostic("dominance", relation.into()))
}

/// Frequency with which each alternative lands at each rank position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankFrequency {
    pub alternatives: Vec<String>,
    /// `frequencies[i][p]`: share of samples placing alternative `i` at
    /// zero-based position `p`.
    pub frequencies: Vec<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
}

impl RankFrequency {
    pub fn of(&self, id: &str) -> Option<&[f64]> {
        let i = self.alternatives.iter().position(|a| a == id)?;
        Some(&self.frequencies[i])
    }
}

fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &byte in part.as_bytes().iter().chain(std::iter::once(&0xff)) {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Uniform draw in [0, 1) for one (cell, sample).
///
/// The ChaCha8 stream is keyed by `seed`, the stream id by a hash of the
/// alternative and criterion ids, and the word position by the sample index,
/// so draws do not depend on evaluation order.
pub fn cell_uniform(seed: u64, alternative: &str, criterion: &str, sample: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(&[alternative, criterion]));
    rng.set_word_pos(sample as u128 * 2);
    rng.random::<f64>()
}

/// Samples every distribution cell independently, ranks each realization by
/// weighted sum and tallies rank positions.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_stability(
    matrix: &DecisionMatrix,
    alternatives: &[String],
    criteria: &[Criterion],
    weights: &[f64],
    samples: usize,
    seed: u64,
    scaling: Scaling,
) -> Result<RankFrequency> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let dists = stochastic_cells(matrix, alternatives, criteria)?;
    let directions: Vec<Direction> = criteria.iter().map(|c| c.direction).collect();
    let n = alternatives.len();
    let mut counts = vec![vec![0usize; n]; n];
    let index = |id: &str| alternatives.iter().position(|a| a == id).expect("ranked ids come from input");
    for s in 0..samples as u64 {
        let realization: Vec<Vec<f64>> = dists
            .iter()
            .zip(alternatives)
            .map(|(row, a)| {
                row.iter()
                    .zip(criteria)
                    .map(|(d, c)| {
                        if d.is_degenerate() {
                            d.min()
                        } else {
                            d.quantile(cell_uniform(seed, a, &c.id, s))
                        }
                    })
                    .collect()
            })
            .collect();
        let scaled = scale_columns(&realization, &directions, scaling)?;
        let ranked = weighted_sum_rank(&ScoreMatrix::new(alternatives.to_vec(), scaled), weights)?;
        for (pos, id) in ranked.order.iter().enumerate() {
            counts[index(id)][pos] += 1;
        }
    }
    let frequencies = counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / samples as f64).collect())
        .collect();
    Ok(RankFrequency {
        alternatives: alternatives.to_vec(),
        frequencies,
        samples,
        seed,
    })
}

/// Collapses rank frequencies into a ranking by expected normalized
/// position score (1 for always first, 0 for always last).
pub fn stability_rank(freq: &RankFrequency) -> RankResult {
    let n = freq.alternatives.len();
    let denom = (n.max(2) - 1) as f64;
    let scores: Vec<f64> = freq
        .frequencies
        .iter()
        .map(|row| row.iter().enumerate().map(|(p, f)| f * (n - 1 - p) as f64 / denom).sum())
        .collect();
    let table: serde_json::Map<String, serde_json::Value> = freq
        .alternatives
        .iter()
        .zip(&freq.frequencies)
        .map(|(a, row)| (a.clone(), json!(row)))
        .collect();
    RankResult::from_scores("monte_carlo_stability", &freq.alternatives, &scores)
        .with_diagnostic("rankFrequencies", table.into())
        .with_diagnostic("samples", json!(freq.samples))
        .with_diagnostic("seed", json!(freq.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::weighted_sum_rank;
    use crate::model::normalize_columns;

    fn dist(raw: &[(f64, f64)]) -> DiscreteDistribution {
        DiscreteDistribution::new(raw).unwrap()
    }

    fn crit(id: &str, direction: Direction) -> Criterion {
        Criterion {
            id: id.into(),
            name: id.into(),
            direction,
        }
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn canonical_form() {
        let d = dist(&[(2.0, 0.25), (1.0, 0.5), (2.0, 0.25), (5.0, 0.0)]);
        assert_eq!(d.outcomes(), &[(1.0, 0.5), (2.0, 0.5)]);
        assert!(DiscreteDistribution::new(&[(1.0, 0.5)]).is_err());
        assert!(DiscreteDistribution::new(&[]).is_err());
    }

    #[test]
    fn expected_utility_examples() {
        let lin = UtilityFunction::Linear;
        assert!((expected_utility(&DiscreteDistribution::degenerate(13.0), lin, (10.0, 20.0)).unwrap() - 0.3).abs() < 1e-12);
        let d = dist(&[(10.0, 0.5), (20.0, 0.5)]);
        assert_eq!(expected_utility(&d, lin, (10.0, 20.0)).unwrap(), 0.5);
        let exp = UtilityFunction::Exponential { alpha: 1.0 };
        assert!((expected_utility(&d, exp, (10.0, 20.0)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(expected_utility(&d, lin, (12.0, 20.0)).unwrap_err().code(), "OUT_OF_RANGE");
        assert_eq!(expected_utility(&d, lin, (20.0, 10.0)).unwrap_err().code(), "BAD_RANGE");
        assert!(expected_utility(&d, UtilityFunction::Exponential { alpha: 0.0 }, (10.0, 20.0)).is_err());
    }

    fn plane(rows: &[(&str, &[CellValue])], crit_ids: &[&str], weights: &[f64]) -> DecisionMatrix {
        let mut m = DecisionMatrix::new("dm");
        for (a, cells) in rows {
            for (c, cell) in crit_ids.iter().zip(cells.iter()) {
                m.set_cell(a, c, cell.clone());
            }
        }
        for (c, w) in crit_ids.iter().zip(weights) {
            m.criterion_weights.insert(c.to_string(), *w);
        }
        m
    }

    #[test]
    fn crisp_reduction_matches_weighted_sum() {
        let crits = [crit("c1", Direction::Benefit), crit("c2", Direction::Cost)];
        let vals = [[3.0, 10.0], [7.0, 40.0], [5.0, 20.0]];
        let rows: Vec<(&str, Vec<CellValue>)> = ["x", "y", "z"]
            .iter()
            .zip(vals)
            .map(|(a, r)| (*a, r.iter().map(|v| CellValue::Crisp(*v)).collect()))
            .collect();
        let rows_ref: Vec<(&str, &[CellValue])> = rows.iter().map(|(a, r)| (*a, r.as_slice())).collect();
        let m = plane(&rows_ref, &["c1", "c2"], &[0.3, 0.7]);
        let alts = ids(&["x", "y", "z"]);
        let eu = eu_rank(&m, &alts, &crits, UtilityFunction::Linear, &[0.3, 0.7]).unwrap();
        let norm = normalize_columns(&vals.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), &[Direction::Benefit, Direction::Cost]).unwrap();
        let ws = weighted_sum_rank(&ScoreMatrix::new(alts.clone(), norm), &[0.3, 0.7]).unwrap();
        assert_eq!(eu.order, ws.order);
        for (id, s) in &ws.scores {
            assert!((eu.scores[id] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn dominant_degenerate_alternative_wins() {
        let crits = [crit("c1", Direction::Benefit), crit("c2", Direction::Benefit)];
        let m = plane(
            &[
                ("a", &[CellValue::Crisp(1.0), CellValue::Dist(vec![(0.0, 0.5), (2.0, 0.5)])]),
                ("b", &[CellValue::Crisp(4.0), CellValue::Crisp(3.0)]),
            ],
            &["c1", "c2"],
            &[0.5, 0.5],
        );
        let r = eu_rank(&m, &ids(&["a", "b"]), &crits, UtilityFunction::Linear, &[0.5, 0.5]).unwrap();
        assert_eq!(r.order, ["b", "a"]);
    }

    #[test]
    fn risk_aversion_flips_order() {
        // "a" is a 50/50 gamble on {0, 1}, "b" a sure 0.5.
        let crits = [crit("c", Direction::Benefit)];
        let m = plane(
            &[
                ("a", &[CellValue::Dist(vec![(0.0, 0.5), (1.0, 0.5)])]),
                ("b", &[CellValue::Crisp(0.5)]),
            ],
            &["c"],
            &[1.0],
        );
        let alts = ids(&["a", "b"]);
        let lin = eu_rank(&m, &alts, &crits, UtilityFunction::Linear, &[1.0]).unwrap();
        assert_eq!(lin.scores["a"], lin.scores["b"]);
        assert_eq!(lin.order, ["a", "b"]);
        let averse = eu_rank(&m, &alts, &crits, UtilityFunction::Exponential { alpha: 4.0 }, &[1.0]).unwrap();
        // u(0.5) = (1 - e^-2) / (1 - e^-4)
        let sure = (1.0 - (-2.0f64).exp()) / (1.0 - (-4.0f64).exp());
        assert!((averse.scores["b"] - sure).abs() < 1e-12);
        assert_eq!(averse.order, ["b", "a"]);
    }

    #[test]
    fn cost_criterion_reflects_utility() {
        let crits = [crit("c", Direction::Cost)];
        let m = plane(
            &[("a", &[CellValue::Crisp(10.0)]), ("b", &[CellValue::Crisp(30.0)]), ("c", &[CellValue::Crisp(20.0)])],
            &["c"],
            &[1.0],
        );
        let r = eu_rank(&m, &ids(&["a", "b", "c"]), &crits, UtilityFunction::Exponential { alpha: 2.0 }, &[1.0]).unwrap();
        assert_eq!(r.order, ["a", "c", "b"]);
        assert!((r.scores["a"] - 1.0).abs() < 1e-12);
        assert!(r.scores["b"].abs() < 1e-12);
    }

    #[test]
    fn eu_rejects_fuzzy_cells() {
        let crits = [crit("c", Direction::Benefit)];
        let m = plane(
            &[("a", &[CellValue::Ifs(crate::fuzzy::Ifv { mu: 0.2, nu: 0.3 })]), ("b", &[CellValue::Crisp(1.0)])],
            &["c"],
            &[1.0],
        );
        let err = eu_rank(&m, &ids(&["a", "b"]), &crits, UtilityFunction::Linear, &[1.0]).unwrap_err();
        assert_eq!(err.code(), "NON_STOCHASTIC_CELL");
    }

    #[test]
    fn fsd_examples() {
        let a = dist(&[(1.0, 0.5), (2.0, 0.5)]);
        let b = dist(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(fsd_check(&a, &a), Dominance::Equal);
        assert_eq!(fsd_check(&a, &b), Dominance::ADominates);
        assert_eq!(fsd_check(&b, &a), Dominance::BDominates);
        let crossing = dist(&[(0.0, 0.5), (3.0, 0.5)]);
        assert_eq!(fsd_check(&crossing, &DiscreteDistribution::degenerate(1.0)), Dominance::None);
    }

    #[test]
    fn fsd_rank_counts_wins() {
        let crits = [crit("c", Direction::Benefit)];
        let m = plane(
            &[
                ("a", &[CellValue::Dist(vec![(1.0, 0.5), (2.0, 0.5)])]),
                ("b", &[CellValue::Dist(vec![(0.0, 0.5), (1.0, 0.5)])]),
            ],
            &["c"],
            &[1.0],
        );
        let r = fsd_rank(&m, &ids(&["a", "b"]), &crits, &[1.0]).unwrap();
        assert_eq!(r.order, ["a", "b"]);
        assert_eq!(r.scores["a"], 1.0);
    }

    #[test]
    fn degenerate_monte_carlo_is_deterministic() {
        let crits = [crit("c1", Direction::Benefit), crit("c2", Direction::Benefit)];
        let m = plane(
            &[("a", &[CellValue::Crisp(0.8), CellValue::Crisp(0.2)]), ("b", &[CellValue::Crisp(0.5), CellValue::Crisp(0.9)])],
            &["c1", "c2"],
            &[0.6, 0.4],
        );
        let freq = monte_carlo_stability(&m, &ids(&["a", "b"]), &crits, &[0.6, 0.4], 50, 1, Scaling::Auto).unwrap();
        assert_eq!(freq.of("b").unwrap(), &[1.0, 0.0]);
        assert_eq!(freq.of("a").unwrap(), &[0.0, 1.0]);
        assert_eq!(stability_rank(&freq).order, ["b", "a"]);
    }

    #[test]
    fn monte_carlo_matches_enumeration() {
        let crits = [crit("c", Direction::Benefit)];
        let m = plane(
            &[("a", &[CellValue::Dist(vec![(0.0, 0.5), (1.0, 0.5)])]), ("b", &[CellValue::Crisp(0.5)])],
            &["c"],
            &[1.0],
        );
        let samples = 10_000;
        let freq = monte_carlo_stability(&m, &ids(&["a", "b"]), &crits, &[1.0], samples, 2024, Scaling::MinMax).unwrap();
        // exhaustive: a first exactly when it draws 1
        let p = 0.5;
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((freq.of("a").unwrap()[0] - p).abs() < 3.0 * sigma);
        for row in &freq.frequencies {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let again = monte_carlo_stability(&m, &ids(&["a", "b"]), &crits, &[1.0], samples, 2024, Scaling::MinMax).unwrap();
        assert_eq!(freq, again);
    }

    #[test]
    fn monte_carlo_rejects_zero_samples() {
        let crits = [crit("c", Direction::Benefit)];
        let m = plane(&[("a", &[CellValue::Crisp(0.0)]), ("b", &[CellValue::Crisp(1.0)])], &["c"], &[1.0]);
        assert!(monte_carlo_stability(&m, &ids(&["a", "b"]), &crits, &[1.0], 0, 0, Scaling::Auto).is_err());
    }

    #[test]
    fn substreams_are_independent_of_order() {
        let x = cell_uniform(9, "a", "c", 17);
        let _ = cell_uniform(9, "b", "c", 3);
        assert_eq!(cell_uniform(9, "a", "c", 17), x);
        assert_ne!(cell_uniform(9, "a", "c", 18), x);
        assert_ne!(cell_uniform(9, "ac", "", 17), cell_uniform(9, "a", "c", 17));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn distribution() -> impl Strategy<Value = DiscreteDistribution> {
            prop::collection::vec((0i32..6, 1u32..10), 1..4).prop_map(|raw| {
                let total: u32 = raw.iter().map(|r| r.1).sum();
                let pairs: Vec<(f64, f64)> = raw.iter().map(|&(v, w)| (v as f64, w as f64 / total as f64)).collect();
                DiscreteDistribution::new(&pairs).unwrap()
            })
        }

        proptest! {
            #[test]
            fn fsd_implies_eu_order(a in distribution(), b in distribution()) {
                let lo = a.min().min(b.min());
                let hi = a.max().max(b.max());
                prop_assume!(hi > lo);
                let utilities = [
                    UtilityFunction::Linear,
                    UtilityFunction::Exponential { alpha: 0.5 },
                    UtilityFunction::Exponential { alpha: 1.0 },
                    UtilityFunction::Exponential { alpha: 4.0 },
                ];
                let (win, lose) = match fsd_check(&a, &b) {
                    Dominance::ADominates => (&a, &b),
                    Dominance::BDominates => (&b, &a),
                    _ => return Ok(()),
                };
                for u in utilities {
                    let ew = expected_utility(win, u, (lo, hi)).unwrap();
                    let el = expected_utility(lose, u, (lo, hi)).unwrap();
                    prop_assert!(ew >= el - 1e-12);
                }
            }

            #[test]
            fn linear_eu_is_rescaled_mean(a in distribution()) {
                let (lo, hi) = (a.min() - 1.0, a.max() + 2.0);
                let eu = expected_utility(&a, UtilityFunction::Linear, (lo, hi)).unwrap();
                let mean: f64 = a.outcomes().iter().map(|(v, p)| p * (v - lo) / (hi - lo)).sum();
                prop_assert!((eu - mean).abs() <= 1e-12);
            }
        }
    }
}
