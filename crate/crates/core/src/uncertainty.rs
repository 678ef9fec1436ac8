//! Decision environment analysis: which kind of uncertainty a problem
//! carries, and which ranking methods suit it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::methods::MethodId;
use crate::model::{CellKind, GroupProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyClass {
    Certain,
    Stochastic,
    Fuzzy,
    Rough,
    Multiple,
}

impl UncertaintyClass {
    pub const ALL: [UncertaintyClass; 5] = [
        UncertaintyClass::Certain,
        UncertaintyClass::Stochastic,
        UncertaintyClass::Fuzzy,
        UncertaintyClass::Rough,
        UncertaintyClass::Multiple,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).expect("listed")
    }
}

/// Information-quality situations. `incompleteness` and `multiple` are
/// detected; the rest are annotations carried on the problem file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Situation {
    Deficiency,
    Incompleteness,
    Dynamic,
    Unclear,
    Inaccuracy,
    Multiple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvironmentReport {
    pub uncertainty_class: UncertaintyClass,
    /// Uncertain kinds present, in dispatch order.
    pub components: Vec<UncertaintyClass>,
    pub flags: BTreeSet<Situation>,
    pub per_criterion_kinds: BTreeMap<String, BTreeSet<CellKind>>,
}

pub fn classify_problem(problem: &GroupProblem) -> EnvironmentReport {
    let mut per_criterion_kinds: BTreeMap<String, BTreeSet<CellKind>> =
        problem.criteria.iter().map(|c| (c.id.clone(), BTreeSet::new())).collect();
    for matrix in &problem.judgments {
        for row in matrix.cells.values() {
            for (crit, cell) in row {
                per_criterion_kinds.entry(crit.clone()).or_default().insert(cell.kind());
            }
        }
    }
    let kinds = problem.cell_kinds();
    let mut components = Vec::new();
    if kinds.contains(&CellKind::Dist) {
        components.push(UncertaintyClass::Stochastic);
    }
    if kinds.contains(&CellKind::Ifs) {
        components.push(UncertaintyClass::Fuzzy);
    }
    if problem.sorting.is_some() {
        components.push(UncertaintyClass::Rough);
    }
    let uncertainty_class = match components.as_slice() {
        [] => UncertaintyClass::Certain,
        [only] => *only,
        _ => UncertaintyClass::Multiple,
    };

    let mut flags: BTreeSet<Situation> = problem
        .flags
        .iter()
        .flatten()
        .copied()
        .filter(|f| !matches!(f, Situation::Incompleteness | Situation::Multiple))
        .collect();
    let maker_ids: BTreeSet<&str> = problem.judgments.iter().map(|m| m.maker.as_str()).collect();
    let incomplete = problem.makers.iter().any(|m| !maker_ids.contains(m.id.as_str()))
        || problem
            .judgments
            .iter()
            .any(|m| !m.covers(&problem.alternatives, &problem.criteria));
    if incomplete {
        flags.insert(Situation::Incompleteness);
    }
    if uncertainty_class == UncertaintyClass::Multiple {
        flags.insert(Situation::Multiple);
    }
    EnvironmentReport {
        uncertainty_class,
        components,
        flags,
        per_criterion_kinds,
    }
}

fn dispatch(class: UncertaintyClass) -> &'static [MethodId] {
    match class {
        UncertaintyClass::Certain => &[MethodId::WeightedSum, MethodId::Promethee2, MethodId::Sir, MethodId::Electre1],
        UncertaintyClass::Stochastic => &[MethodId::ExpectedUtility, MethodId::MonteCarloStability, MethodId::Fsd],
        UncertaintyClass::Fuzzy => &[MethodId::IfwaGroup],
        UncertaintyClass::Rough => &[MethodId::Drsa],
        UncertaintyClass::Multiple => &[],
    }
}

/// Methods suited to the classified environment, most preferred first.
pub fn recommend_methods(report: &EnvironmentReport) -> Vec<MethodId> {
    let classes: Vec<UncertaintyClass> = match report.uncertainty_class {
        UncertaintyClass::Multiple => report.components.clone(),
        other => vec![other],
    };
    let mut out: Vec<MethodId> = Vec::new();
    for class in classes {
        for m in dispatch(class) {
            if !out.contains(m) {
                out.push(*m);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::Ifv;
    use crate::model::{Alternative, CellValue, Criterion, DecisionMaker, DecisionMatrix, Direction};

    fn crisp_problem() -> GroupProblem {
        let mut m = DecisionMatrix::new("dm1");
        m.criterion_weights.insert("c1".into(), 0.5);
        m.criterion_weights.insert("c2".into(), 0.5);
        for a in ["a1", "a2"] {
            for c in ["c1", "c2"] {
                m.set_cell(a, c, CellValue::Crisp(1.0));
            }
        }
        GroupProblem {
            id: "p".into(),
            alternatives: ["a1", "a2"].iter().map(|a| Alternative { id: a.to_string(), name: a.to_string() }).collect(),
            criteria: ["c1", "c2"]
                .iter()
                .map(|c| Criterion { id: c.to_string(), name: c.to_string(), direction: Direction::Benefit })
                .collect(),
            makers: vec![DecisionMaker { id: "dm1".into(), weight: 1.0 }],
            judgments: vec![m],
            sorting: None,
            flags: None,
        }
    }

    #[test]
    fn certain_problem() {
        let r = classify_problem(&crisp_problem());
        assert_eq!(r.uncertainty_class, UncertaintyClass::Certain);
        assert!(r.flags.is_empty());
        assert_eq!(
            recommend_methods(&r),
            [MethodId::WeightedSum, MethodId::Promethee2, MethodId::Sir, MethodId::Electre1]
        );
    }

    #[test]
    fn one_fuzzy_cell() {
        let mut p = crisp_problem();
        p.judgments[0].set_cell("a1", "c2", CellValue::Ifs(Ifv { mu: 0.4, nu: 0.4 }));
        let r = classify_problem(&p);
        assert_eq!(r.uncertainty_class, UncertaintyClass::Fuzzy);
        assert_eq!(recommend_methods(&r), [MethodId::IfwaGroup]);
        assert_eq!(r.per_criterion_kinds["c2"], [CellKind::Crisp, CellKind::Ifs].into());
    }

    #[test]
    fn stochastic_and_fuzzy_is_multiple() {
        let mut p = crisp_problem();
        p.judgments[0].set_cell("a1", "c2", CellValue::Ifs(Ifv { mu: 0.4, nu: 0.4 }));
        p.judgments[0].set_cell("a2", "c1", CellValue::Dist(vec![(0.0, 0.5), (1.0, 0.5)]));
        let r = classify_problem(&p);
        assert_eq!(r.uncertainty_class, UncertaintyClass::Multiple);
        assert!(r.flags.contains(&Situation::Multiple));
        assert_eq!(
            recommend_methods(&r),
            [MethodId::ExpectedUtility, MethodId::MonteCarloStability, MethodId::Fsd, MethodId::IfwaGroup]
        );
    }

    #[test]
    fn sorting_table_means_rough() {
        let mut p = crisp_problem();
        p.sorting = Some(
            serde_json::from_str(r#"{"objects":["x","y"],"classes":{"x":1,"y":2},"values":{"x":{"c1":1,"c2":1},"y":{"c1":2,"c2":2}}}"#)
                .unwrap(),
        );
        let r = classify_problem(&p);
        assert_eq!(r.uncertainty_class, UncertaintyClass::Rough);
        assert_eq!(recommend_methods(&r), [MethodId::Drsa]);
    }

    #[test]
    fn incompleteness_and_annotations() {
        let mut p = crisp_problem();
        p.judgments[0].cells.get_mut("a1").unwrap().remove("c1");
        p.flags = Some(vec![Situation::Dynamic, Situation::Multiple]);
        let r = classify_problem(&p);
        assert_eq!(r.flags, [Situation::Incompleteness, Situation::Dynamic].into());
    }
}
