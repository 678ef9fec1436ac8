//! Group aggregation (projecting individual decision planes onto the group
//! plane), ranking agreement, and weight negotiation probes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{ifwa, Ifv};
use crate::methods::{rank_plane, MethodId, MethodOptions};
use crate::model::{normalize_weights, CellKind, CellValue, DecisionMatrix, GroupProblem};
use crate::stochastic::DiscreteDistribution;

/// Maker id used for the aggregated plane.
pub const GROUP_PLANE: &str = "group";

/// Projects every maker's plane onto a single group plane.
///
/// Crisp cells average under maker weights, fuzzy cells combine with IFWA,
/// and distributions form the weighted mixture. Group criterion weights are
/// the maker-weighted average of individual criterion weights. Makers are
/// visited in id order, so the result does not depend on how they are
/// listed.
pub fn aggregate_group_matrix(problem: &GroupProblem) -> Result<DecisionMatrix> {
    let mut makers: Vec<(&DecisionMatrix, f64)> = problem
        .makers
        .iter()
        .filter_map(|m| problem.matrix_for(&m.id).map(|matrix| (matrix, m.weight)))
        .collect();
    makers.sort_by(|a, b| a.0.maker.cmp(&b.0.maker));

    let active: Vec<&(&DecisionMatrix, f64)> = makers.iter().filter(|(_, w)| *w > 0.0).collect();
    if let [(only, _)] = active.as_slice() {
        let mut copy = (*only).clone();
        copy.maker = GROUP_PLANE.to_string();
        return Ok(copy);
    }

    let mut group = DecisionMatrix::new(GROUP_PLANE);
    for a in &problem.alternatives {
        for c in &problem.criteria {
            let present: Vec<(&CellValue, f64)> = makers
                .iter()
                .filter_map(|(m, w)| m.cell(&a.id, &c.id).map(|cell| (cell, *w)))
                .collect();
            if present.is_empty() {
                continue;
            }
            let kind = present[0].0.kind();
            if present.iter().any(|(cell, _)| cell.kind() != kind) {
                return Err(Error::MixedCellKinds {
                    alternative: a.id.clone(),
                    criterion: c.id.clone(),
                });
            }
            let weights = normalize_weights(&present.iter().map(|p| p.1).collect::<Vec<_>>())?;
            let cell = match kind {
                CellKind::Crisp => CellValue::Crisp(
                    present
                        .iter()
                        .zip(&weights)
                        .map(|((cell, _), w)| w * cell.as_crisp().expect("kind checked"))
                        .sum(),
                ),
                CellKind::Ifs => {
                    let values: Vec<Ifv> = present
                        .iter()
                        .map(|(cell, _)| match cell {
                            CellValue::Ifs(v) => *v,
                            _ => unreachable!("kind checked"),
                        })
                        .collect();
                    CellValue::Ifs(ifwa(&values, &weights)?)
                }
                CellKind::Dist => {
                    let dists = present
                        .iter()
                        .map(|(cell, _)| DiscreteDistribution::from_cell(cell).expect("kind checked"))
                        .collect::<Result<Vec<_>>>()?;
                    let parts: Vec<(&DiscreteDistribution, f64)> = dists.iter().zip(weights.iter().copied()).collect();
                    CellValue::Dist(DiscreteDistribution::mixture(&parts)?.outcomes().to_vec())
                }
            };
            group.set_cell(&a.id, &c.id, cell);
        }
    }

    let raw: Vec<f64> = problem
        .criteria
        .iter()
        .map(|c| {
            makers
                .iter()
                .map(|(m, w)| w * m.criterion_weights.get(&c.id).copied().unwrap_or(0.0))
                .sum()
        })
        .collect();
    let omega = normalize_weights(&raw)?;
    group.criterion_weights = problem.criteria.iter().map(|c| c.id.clone()).zip(omega).collect();
    Ok(group)
}

/// Share of discordant pairs between two strict orders of the same ids.
pub fn kendall_distance(a: &[String], b: &[String]) -> Result<f64> {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort();
    sb.sort();
    if sa != sb || sa.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotSameSet);
    }
    let n = a.len();
    if n < 2 {
        return Ok(0.0);
    }
    let pos_b: BTreeMap<&str, usize> = b.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let ranks: Vec<usize> = a.iter().map(|id| pos_b[id.as_str()]).collect();
    let mut discordant = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if ranks[i] > ranks[j] {
                discordant += 1;
            }
        }
    }
    Ok(discordant as f64 / (n * (n - 1) / 2) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ConsensusConfig {
    /// Makers farther than this from the group order are flagged.
    pub conflict_threshold: f64,
    /// Criterion weight perturbation used to locate a conflict's source.
    pub probe: f64,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            conflict_threshold: 0.5,
            probe: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Conflict {
    pub maker: String,
    /// Criterion whose ±probe reweighting brings the maker closest to the
    /// group, if any probe helps.
    pub criterion: Option<String>,
    pub severity: f64,
    pub probed_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsensusReport {
    pub method: MethodId,
    pub per_maker: BTreeMap<String, f64>,
    pub consensus_index: f64,
    pub conflicts: Vec<Conflict>,
    pub group_order: Vec<String>,
    pub individual_orders: BTreeMap<String, Vec<String>>,
}

/// Replaces weight `j` by `w_j + delta` and rescales the others
/// proportionally so the vector still sums to one.
pub fn adjust_weights(weights: &[f64], j: usize, delta: f64, criterion: &str) -> Result<Vec<f64>> {
    let target = weights[j] + delta;
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::WeightOutOfRange {
            criterion: criterion.to_string(),
            weight: target,
        });
    }
    if delta == 0.0 {
        return Ok(weights.to_vec());
    }
    if weights.len() == 1 {
        return Ok(vec![1.0]);
    }
    let rest: f64 = weights.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, w)| w).sum();
    let remaining = 1.0 - target;
    let others = weights.len() as f64 - 1.0;
    Ok(weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if i == j {
                target
            } else if rest > 0.0 {
                w * remaining / rest
            } else {
                remaining / others
            }
        })
        .collect())
}

fn with_weights(plane: &DecisionMatrix, problem: &GroupProblem, weights: &[f64]) -> DecisionMatrix {
    let mut out = plane.clone();
    out.criterion_weights = problem.criteria.iter().map(|c| c.id.clone()).zip(weights.iter().copied()).collect();
    out
}

/// Agreement between every maker's own ranking and the group ranking.
pub fn consensus(
    problem: &GroupProblem,
    method: MethodId,
    options: &MethodOptions,
    config: &ConsensusConfig,
) -> Result<ConsensusReport> {
    let group = aggregate_group_matrix(problem)?;
    let group_order = rank_plane(problem, &group, method, options)?.order;

    let mut per_maker = BTreeMap::new();
    let mut individual_orders = BTreeMap::new();
    let mut conflicts = Vec::new();
    let mut weighted = 0.0;
    let mut total_weight = 0.0;
    for maker in &problem.makers {
        let Some(plane) = problem.matrix_for(&maker.id) else {
            continue;
        };
        let order = rank_plane(problem, plane, method, options)?.order;
        let distance = kendall_distance(&order, &group_order)?;
        weighted += maker.weight * distance;
        total_weight += maker.weight;

        if distance > config.conflict_threshold {
            let weights = plane.weights_for(&problem.criteria);
            let mut best: Option<(String, f64)> = None;
            for (j, c) in problem.criteria.iter().enumerate() {
                for delta in [config.probe, -config.probe] {
                    let Ok(adjusted) = adjust_weights(&weights, j, delta, &c.id) else {
                        continue;
                    };
                    let probed = rank_plane(problem, &with_weights(plane, problem, &adjusted), method, options)?.order;
                    let d = kendall_distance(&probed, &group_order)?;
                    if d < distance && best.as_ref().is_none_or(|(_, b)| d < *b) {
                        best = Some((c.id.clone(), d));
                    }
                }
            }
            conflicts.push(Conflict {
                maker: maker.id.clone(),
                criterion: best.as_ref().map(|b| b.0.clone()),
                severity: distance,
                probed_distance: best.map(|b| b.1),
            });
        }
        per_maker.insert(maker.id.clone(), distance);
        individual_orders.insert(maker.id.clone(), order);
    }
    let consensus_index = if total_weight > 0.0 {
        (1.0 - weighted / total_weight).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ConsensusReport {
        method,
        per_maker,
        consensus_index,
        conflicts,
        group_order,
        individual_orders,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WhatIfResult {
    pub method: MethodId,
    pub criterion: String,
    pub delta: f64,
    pub baseline_weights: BTreeMap<String, f64>,
    pub adjusted_weights: BTreeMap<String, f64>,
    pub baseline_order: Vec<String>,
    pub new_order: Vec<String>,
    pub flipped: bool,
    pub min_flip_delta: Option<f64>,
}

/// Re-ranks the group plane after shifting one criterion's group weight by
/// `delta`.
pub fn whatif_weights(
    problem: &GroupProblem,
    method: MethodId,
    criterion: &str,
    delta: f64,
    options: &MethodOptions,
) -> Result<WhatIfResult> {
    let j = problem
        .criterion_index(criterion)
        .ok_or_else(|| Error::UnknownCriterion(criterion.to_string()))?;
    let group = aggregate_group_matrix(problem)?;
    let baseline_weights = group.weights_for(&problem.criteria);
    let adjusted = adjust_weights(&baseline_weights, j, delta, criterion)?;
    let baseline = rank_plane(problem, &group, method, options)?;
    let moved = rank_plane(problem, &with_weights(&group, problem, &adjusted), method, options)?;
    let ids = || problem.criteria.iter().map(|c| c.id.clone());
    Ok(WhatIfResult {
        method,
        criterion: criterion.to_string(),
        delta,
        baseline_weights: ids().zip(baseline_weights.iter().copied()).collect(),
        adjusted_weights: ids().zip(adjusted).collect(),
        flipped: moved.order.first() != baseline.order.first(),
        baseline_order: baseline.order,
        new_order: moved.order,
        min_flip_delta: min_weight_flip(problem, method, criterion, options)?,
    })
}

/// Grid points per side before bisection.
const FLIP_SCAN_STEPS: usize = 100;
/// Bisection stops once the bracket is this narrow.
pub const FLIP_RESOLUTION: f64 = 1e-4;

/// Smallest `|delta|` on the criterion's group weight that changes the top
/// alternative, or `None` when no feasible shift does.
///
/// Each side of the feasible interval is scanned on a uniform grid and the
/// first flipping cell is bisected to [`FLIP_RESOLUTION`]; the reported
/// delta is the flipping end of the final bracket.
pub fn min_weight_flip(
    problem: &GroupProblem,
    method: MethodId,
    criterion: &str,
    options: &MethodOptions,
) -> Result<Option<f64>> {
    let j = problem
        .criterion_index(criterion)
        .ok_or_else(|| Error::UnknownCriterion(criterion.to_string()))?;
    if problem.criteria.len() == 1 {
        return Ok(None);
    }
    let group = aggregate_group_matrix(problem)?;
    let weights = group.weights_for(&problem.criteria);
    let top = rank_plane(problem, &group, method, options)?.order.first().cloned();
    let flips = |delta: f64| -> Result<bool> {
        let adjusted = adjust_weights(&weights, j, delta, criterion)?;
        let order = rank_plane(problem, &with_weights(&group, problem, &adjusted), method, options)?.order;
        Ok(order.first() != top.as_ref())
    };

    let mut best: Option<f64> = None;
    for (sign, extent) in [(1.0, 1.0 - weights[j]), (-1.0, weights[j])] {
        if extent <= 0.0 {
            continue;
        }
        let mut prev = 0.0;
        for step in 1..=FLIP_SCAN_STEPS {
            let delta = sign * extent * step as f64 / FLIP_SCAN_STEPS as f64;
            if flips(delta)? {
                let (mut lo, mut hi) = (prev, delta);
                while (hi - lo).abs() > FLIP_RESOLUTION {
                    let mid = 0.5 * (lo + hi);
                    if flips(mid)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                if best.is_none_or(|b: f64| hi.abs() < b.abs()) {
                    best = Some(hi);
                }
                break;
            }
            prev = delta;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alternative, Criterion, DecisionMaker, Direction};

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    type MakerSpec<'a> = (&'a str, f64, &'a [[f64; 2]], [f64; 2]);

    fn crisp_problem(makers: &[MakerSpec]) -> GroupProblem {
        let alts = ["a", "b", "c"];
        let n = makers[0].2.len();
        GroupProblem {
            id: "g".into(),
            alternatives: alts[..n].iter().map(|a| Alternative { id: a.to_string(), name: a.to_string() }).collect(),
            criteria: ["c1", "c2"]
                .iter()
                .map(|c| Criterion { id: c.to_string(), name: c.to_string(), direction: Direction::Benefit })
                .collect(),
            makers: makers.iter().map(|m| DecisionMaker { id: m.0.into(), weight: m.1 }).collect(),
            judgments: makers
                .iter()
                .map(|(id, _, rows, w)| {
                    let mut m = DecisionMatrix::new(*id);
                    m.criterion_weights.insert("c1".into(), w[0]);
                    m.criterion_weights.insert("c2".into(), w[1]);
                    for (a, row) in alts.iter().zip(rows.iter()) {
                        m.set_cell(a, "c1", CellValue::Crisp(row[0]));
                        m.set_cell(a, "c2", CellValue::Crisp(row[1]));
                    }
                    m
                })
                .collect(),
            sorting: None,
            flags: None,
        }
    }

    fn golden() -> GroupProblem {
        crisp_problem(&[("dm1", 1.0, &[[0.8, 0.2], [0.5, 0.9]], [0.6, 0.4])])
    }

    #[test]
    fn single_maker_is_identity() {
        let p = golden();
        let g = aggregate_group_matrix(&p).unwrap();
        assert_eq!(g.cells, p.judgments[0].cells);
        assert_eq!(g.criterion_weights, p.judgments[0].criterion_weights);
    }

    #[test]
    fn crisp_cells_average() {
        let p = crisp_problem(&[
            ("dm1", 0.5, &[[0.2, 0.0], [0.0, 0.0]], [0.5, 0.5]),
            ("dm2", 0.5, &[[0.6, 0.0], [0.0, 0.0]], [0.5, 0.5]),
        ]);
        let g = aggregate_group_matrix(&p).unwrap();
        assert!((g.cell("a", "c1").unwrap().as_crisp().unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn distributions_mix() {
        let mut p = crisp_problem(&[
            ("dm1", 0.5, &[[0.0, 0.0], [0.0, 0.0]], [0.5, 0.5]),
            ("dm2", 0.5, &[[0.0, 0.0], [0.0, 0.0]], [0.5, 0.5]),
        ]);
        p.judgments[0].set_cell("a", "c1", CellValue::Dist(vec![(0.0, 1.0)]));
        p.judgments[1].set_cell("a", "c1", CellValue::Dist(vec![(1.0, 1.0)]));
        let g = aggregate_group_matrix(&p).unwrap();
        assert_eq!(g.cell("a", "c1").unwrap(), &CellValue::Dist(vec![(0.0, 0.5), (1.0, 0.5)]));
    }

    #[test]
    fn mixed_kinds_rejected() {
        let mut p = crisp_problem(&[
            ("dm1", 0.5, &[[0.0, 0.0], [0.0, 0.0]], [0.5, 0.5]),
            ("dm2", 0.5, &[[0.0, 0.0], [0.0, 0.0]], [0.5, 0.5]),
        ]);
        p.judgments[1].set_cell("b", "c2", CellValue::Ifs(Ifv { mu: 0.1, nu: 0.1 }));
        assert_eq!(aggregate_group_matrix(&p).unwrap_err().code(), "MIXED_CELL_KINDS");
    }

    #[test]
    fn kendall_examples() {
        let abc = ids(&["a", "b", "c"]);
        assert_eq!(kendall_distance(&abc, &abc).unwrap(), 0.0);
        assert_eq!(kendall_distance(&abc, &ids(&["c", "b", "a"])).unwrap(), 1.0);
        assert_eq!(kendall_distance(&abc, &ids(&["b", "a", "c"])).unwrap(), 1.0 / 3.0);
        assert_eq!(kendall_distance(&abc, &ids(&["a", "b", "d"])).unwrap_err(), Error::NotSameSet);
        assert_eq!(kendall_distance(&abc, &ids(&["a", "b"])).unwrap_err(), Error::NotSameSet);
    }

    #[test]
    fn identical_makers_agree() {
        let rows: &[[f64; 2]] = &[[0.3, 0.9], [0.7, 0.1], [0.5, 0.5]];
        let p = crisp_problem(&[("dm1", 0.3, rows, [0.2, 0.8]), ("dm2", 0.7, rows, [0.2, 0.8])]);
        let r = consensus(&p, MethodId::Promethee2, &MethodOptions::default(), &ConsensusConfig::default()).unwrap();
        assert_eq!(r.consensus_index, 1.0);
        assert!(r.conflicts.is_empty());
    }

    #[test]
    fn reversed_makers() {
        // dm1 ranks a > b > c, dm2 ranks c > b > a
        let p = crisp_problem(&[
            ("dm1", 0.5, &[[0.9, 0.9], [0.5, 0.5], [0.1, 0.1]], [0.5, 0.5]),
            ("dm2", 0.5, &[[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]], [0.5, 0.5]),
        ]);
        let r = consensus(&p, MethodId::WeightedSum, &MethodOptions::default(), &ConsensusConfig::default()).unwrap();
        // group plane is all ties: order a, b, c
        assert_eq!(r.group_order, ids(&["a", "b", "c"]));
        assert_eq!(r.per_maker["dm1"], 0.0);
        assert_eq!(r.per_maker["dm2"], 1.0);
        assert_eq!(r.consensus_index, 0.5);
        assert_eq!(r.conflicts.len(), 1);
        assert_eq!(r.conflicts[0].maker, "dm2");
        assert_eq!(r.conflicts[0].severity, 1.0);
    }

    #[test]
    fn single_maker_full_consensus() {
        let r = consensus(&golden(), MethodId::Sir, &MethodOptions::default(), &ConsensusConfig::default()).unwrap();
        assert_eq!(r.consensus_index, 1.0);
    }

    #[test]
    fn whatif_examples() {
        let p = golden();
        let opts = MethodOptions::default();
        let r = whatif_weights(&p, MethodId::WeightedSum, "c1", 0.0, &opts).unwrap();
        assert!(!r.flipped);
        assert_eq!(r.new_order, r.baseline_order);
        assert_eq!(r.baseline_order, ids(&["b", "a"]));

        let r = whatif_weights(&p, MethodId::WeightedSum, "c1", 0.15, &opts).unwrap();
        assert!(r.flipped);
        assert_eq!(r.new_order, ids(&["a", "b"]));
        assert!((r.adjusted_weights["c1"] - 0.75).abs() < 1e-12);
        assert!((r.adjusted_weights["c2"] - 0.25).abs() < 1e-12);

        let err = whatif_weights(&p, MethodId::WeightedSum, "c1", -0.7, &opts).unwrap_err();
        assert_eq!(err.code(), "WEIGHT_OUT_OF_RANGE");
        assert_eq!(whatif_weights(&p, MethodId::WeightedSum, "zz", 0.1, &opts).unwrap_err().code(), "UNKNOWN_CRITERION");
    }

    #[test]
    fn min_flip_at_closed_form_boundary() {
        let p = golden();
        let delta = min_weight_flip(&p, MethodId::WeightedSum, "c1", &MethodOptions::default()).unwrap().unwrap();
        // S_a - S_b = w1 - 0.7
        assert!((0.6 + delta - 0.7).abs() < 1e-3);
        assert!(delta >= 0.1 - 1e-9);
    }

    #[test]
    fn dominant_alternative_never_flips() {
        let p = crisp_problem(&[("dm1", 1.0, &[[0.9, 0.9], [0.1, 0.2]], [0.5, 0.5])]);
        assert_eq!(min_weight_flip(&p, MethodId::WeightedSum, "c1", &MethodOptions::default()).unwrap(), None);
    }

    #[test]
    fn single_criterion_never_flips() {
        let mut p = golden();
        p.criteria.truncate(1);
        p.judgments[0].criterion_weights = [("c1".to_string(), 1.0)].into();
        assert_eq!(min_weight_flip(&p, MethodId::WeightedSum, "c1", &MethodOptions::default()).unwrap(), None);
    }

    #[test]
    fn adjust_keeps_sum() {
        let w = adjust_weights(&[0.2, 0.3, 0.5], 1, 0.2, "x").unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((w[1] - 0.5).abs() < 1e-12);
        assert!((w[0] / w[2] - 0.4).abs() < 1e-12);
        let w = adjust_weights(&[1.0, 0.0, 0.0], 0, -0.4, "x").unwrap();
        assert_eq!(w, [0.6, 0.2, 0.2]);
    }
}
