//! Dominance-based rough set analysis of an example sorting table: dominance
//! cones, approximations of upward and downward class unions, quality of
//! approximation and minimal certain decision rules.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{push_sorting_violation, Criterion, Direction, ValidationReport};

/// Sorting data as carried in the problem file under `"sorting"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SortingBlock {
    pub objects: Vec<String>,
    /// Object id to class index in `1..=m`; higher is better.
    pub classes: BTreeMap<String, usize>,
    /// Object id to criterion id to value.
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
    /// Number of ordered classes `m`; defaults to the highest assigned class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_count: Option<usize>,
}

impl SortingBlock {
    fn class_count_or_max(&self) -> usize {
        self.class_count
            .unwrap_or_else(|| self.classes.values().copied().max().unwrap_or(0))
    }

    pub(crate) fn validate_into(&self, criteria: &[Criterion], report: &mut ValidationReport) {
        let m = self.class_count_or_max();
        if m < 2 {
            push_sorting_violation(report, "SORTING_CLASSES", "sorting.classCount".into(), format!("need at least 2 classes, got {m}"));
        }
        let mut seen = BTreeSet::new();
        for (i, obj) in self.objects.iter().enumerate() {
            let loc = format!("sorting.objects[{i}]");
            if obj.is_empty() || !seen.insert(obj.as_str()) {
                push_sorting_violation(report, "SORTING_OBJECT", loc, format!("empty or duplicate object id {obj:?}"));
                continue;
            }
            match self.classes.get(obj) {
                Some(&t) if (1..=m).contains(&t) => {}
                Some(&t) => push_sorting_violation(report, "SORTING_CLASS_RANGE", format!("sorting.classes.{obj}"), format!("class {t} outside 1..={m}")),
                None => push_sorting_violation(report, "SORTING_MISSING_CLASS", format!("sorting.classes.{obj}"), format!("object {obj} has no class")),
            }
            for c in criteria {
                match self.values.get(obj).and_then(|row| row.get(&c.id)) {
                    Some(v) if v.is_finite() => {}
                    Some(v) => push_sorting_violation(report, "SORTING_VALUE", format!("sorting.values.{obj}.{}", c.id), format!("value {v} is not finite")),
                    None => push_sorting_violation(report, "SORTING_MISSING_VALUE", format!("sorting.values.{obj}.{}", c.id), "missing value".into()),
                }
            }
        }
        for key in self.classes.keys().chain(self.values.keys()) {
            if !seen.contains(key.as_str()) {
                push_sorting_violation(report, "SORTING_UNKNOWN_OBJECT", format!("sorting.{key}"), format!("object {key} is not listed"));
            }
        }
        for (obj, row) in &self.values {
            for crit in row.keys() {
                if !criteria.iter().any(|c| &c.id == crit) {
                    push_sorting_violation(report, "SORTING_UNKNOWN_CRITERION", format!("sorting.values.{obj}.{crit}"), format!("no criterion {crit}"));
                }
            }
        }
    }

    pub fn to_table(&self, criteria: &[Criterion]) -> Result<SortingTable> {
        let mut report = ValidationReport::default();
        self.validate_into(criteria, &mut report);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidParameter(format!("{}: {}", v.code, v.message)));
        }
        let values = self
            .objects
            .iter()
            .map(|o| criteria.iter().map(|c| self.values[o][&c.id]).collect())
            .collect();
        let classes = self.objects.iter().map(|o| self.classes[o]).collect();
        SortingTable::new(self.objects.clone(), criteria.to_vec(), values, classes, self.class_count_or_max())
    }
}

/// An example-based sorting table with preference-ordered criteria and
/// ordered decision classes `1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortingTable {
    objects: Vec<String>,
    criteria: Vec<Criterion>,
    values: Vec<Vec<f64>>,
    classes: Vec<usize>,
    class_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UnionKind {
    /// `Cl_t^≥`: class t or better.
    AtLeast,
    /// `Cl_t^≤`: class t or worse.
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassUnion {
    pub kind: UnionKind,
    #[serde(rename = "class")]
    pub class_index: usize,
}

impl ClassUnion {
    pub fn contains(&self, class: usize) -> bool {
        match self.kind {
            UnionKind::AtLeast => class >= self.class_index,
            UnionKind::AtMost => class <= self.class_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Approximation {
    pub target: ClassUnion,
    pub lower: Vec<String>,
    pub upper: Vec<String>,
    pub boundary: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub criterion: String,
    pub relation: Relation,
    pub threshold: f64,
}

impl Condition {
    fn holds(&self, value: f64) -> bool {
        match self.relation {
            Relation::AtLeast => value >= self.threshold,
            Relation::AtMost => value <= self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub kind: UnionKind,
    pub conditions: Vec<Condition>,
    pub conclusion: ClassUnion,
    pub certain: bool,
}

impl DecisionRule {
    /// True when the object's values (in criterion order of `criteria`)
    /// satisfy every condition. Unknown criteria never match.
    pub fn matches(&self, criteria: &[Criterion], values: &[f64]) -> bool {
        self.conditions.iter().all(|cond| {
            criteria
                .iter()
                .position(|c| c.id == cond.criterion)
                .and_then(|j| values.get(j))
                .is_some_and(|&v| cond.holds(v))
        })
    }
}

/// Bitset over table objects.
type ObjectSet = Vec<bool>;

impl SortingTable {
    pub fn new(
        objects: Vec<String>,
        criteria: Vec<Criterion>,
        values: Vec<Vec<f64>>,
        classes: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 classes, got {class_count}")));
        }
        if values.len() != objects.len() || classes.len() != objects.len() {
            return Err(Error::DimensionMismatch("values and classes must cover every object".into()));
        }
        if values.iter().any(|r| r.len() != criteria.len()) {
            return Err(Error::DimensionMismatch("every object needs one value per criterion".into()));
        }
        if let Some(t) = classes.iter().find(|t| !(1..=class_count).contains(*t)) {
            return Err(Error::InvalidParameter(format!("class {t} outside 1..={class_count}")));
        }
        Ok(SortingTable {
            objects,
            criteria,
            values,
            classes,
            class_count,
        })
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.classes[i]
    }

    pub fn values_of(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// `y` is at least as good as `x` on every criterion.
    pub fn weakly_dominates(&self, y: usize, x: usize) -> bool {
        self.criteria.iter().enumerate().all(|(j, c)| match c.direction {
            Direction::Benefit => self.values[y][j] >= self.values[x][j],
            Direction::Cost => self.values[y][j] <= self.values[x][j],
        })
    }

    fn index_of(&self, id: &str) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o == id)
            .ok_or_else(|| Error::UnknownObject(id.to_string()))
    }

    fn ids(&self, set: &ObjectSet) -> Vec<String> {
        self.objects
            .iter()
            .zip(set)
            .filter(|(_, &inside)| inside)
            .map(|(o, _)| o.clone())
            .collect()
    }

    fn cone_up(&self, x: usize) -> ObjectSet {
        (0..self.objects.len()).map(|y| self.weakly_dominates(y, x)).collect()
    }

    fn cone_down(&self, x: usize) -> ObjectSet {
        (0..self.objects.len()).map(|y| self.weakly_dominates(x, y)).collect()
    }

    /// All targets: `Cl_t^≥` for t in 2..=m, then `Cl_t^≤` for t in 1..m.
    pub fn targets(&self) -> Vec<ClassUnion> {
        let m = self.class_count;
        (2..=m)
            .map(|t| ClassUnion { kind: UnionKind::AtLeast, class_index: t })
            .chain((1..m).map(|t| ClassUnion { kind: UnionKind::AtMost, class_index: t }))
            .collect()
    }

    fn lower_set(&self, target: ClassUnion) -> ObjectSet {
        (0..self.objects.len())
            .map(|x| {
                let cone = match target.kind {
                    UnionKind::AtLeast => self.cone_up(x),
                    UnionKind::AtMost => self.cone_down(x),
                };
                cone.iter().enumerate().all(|(y, &inside)| !inside || target.contains(self.classes[y]))
            })
            .collect()
    }

    fn upper_set(&self, target: ClassUnion) -> ObjectSet {
        (0..self.objects.len())
            .map(|x| {
                let cone = match target.kind {
                    UnionKind::AtLeast => self.cone_down(x),
                    UnionKind::AtMost => self.cone_up(x),
                };
                cone.iter().enumerate().any(|(y, &inside)| inside && target.contains(self.classes[y]))
            })
            .collect()
    }

    pub fn approximation(&self, target: ClassUnion) -> Approximation {
        let lower = self.lower_set(target);
        let upper = self.upper_set(target);
        let boundary: ObjectSet = upper.iter().zip(&lower).map(|(&u, &l)| u && !l).collect();
        Approximation {
            target,
            lower: self.ids(&lower),
            upper: self.ids(&upper),
            boundary: self.ids(&boundary),
        }
    }
}

/// Dominating cone `D+(x)` and dominated cone `D−(x)`, both containing `x`.
pub fn dominance_cones(table: &SortingTable, object: &str) -> Result<(Vec<String>, Vec<String>)> {
    let x = table.index_of(object)?;
    Ok((table.ids(&table.cone_up(x)), table.ids(&table.cone_down(x))))
}

pub fn union_approximations(table: &SortingTable) -> Vec<Approximation> {
    table.targets().into_iter().map(|t| table.approximation(t)).collect()
}

/// Share of objects outside every boundary region.
pub fn quality_gamma(table: &SortingTable) -> f64 {
    let n = table.objects.len();
    if n == 0 {
        return 1.0;
    }
    let boundary: BTreeSet<String> = union_approximations(table).into_iter().flat_map(|a| a.boundary).collect();
    (n - boundary.len()) as f64 / n as f64
}

fn relation_for(kind: UnionKind, direction: Direction) -> Relation {
    match (kind, direction) {
        (UnionKind::AtLeast, Direction::Benefit) | (UnionKind::AtMost, Direction::Cost) => Relation::AtLeast,
        (UnionKind::AtLeast, Direction::Cost) | (UnionKind::AtMost, Direction::Benefit) => Relation::AtMost,
    }
}

fn combinations(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for j in start..k {
            cur.push(j);
            go(j + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, size, &mut Vec::new(), &mut out);
    out
}

// Candidate thresholds for a criterion, weakest condition first.
fn thresholds(table: &SortingTable, j: usize, relation: Relation) -> Vec<f64> {
    let mut vals: Vec<f64> = table.values.iter().map(|r| r[j]).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    if relation == Relation::AtMost {
        vals.reverse();
    }
    vals
}

struct Candidate {
    criteria: Vec<usize>,
    thresholds: Vec<f64>,
}

impl Candidate {
    fn weaker_or_equal(&self, other: &Candidate, relation: &[Relation]) -> bool {
        self.criteria.iter().zip(&self.thresholds).all(|(j, t)| {
            other.criteria.iter().position(|o| o == j).is_some_and(|k| {
                let u = other.thresholds[k];
                match relation[*j] {
                    Relation::AtLeast => *t <= u,
                    Relation::AtMost => *t >= u,
                }
            })
        })
    }
}

/// Minimal certain rules for every lower approximation, found by exhaustive
/// search over condition sets of up to `max_conditions` criteria with
/// thresholds taken from observed values.
///
/// Rules come out sorted by target, then size, then conditions.
pub fn induce_rules(table: &SortingTable, max_conditions: usize) -> Result<Vec<DecisionRule>> {
    if max_conditions == 0 {
        return Err(Error::InvalidParameter("maxConditions must be at least 1".into()));
    }
    let k = table.criteria.len();
    let n = table.objects.len();
    let mut rules = Vec::new();
    for target in table.targets() {
        let lower = table.lower_set(target);
        if !lower.iter().any(|&b| b) {
            continue;
        }
        let relations: Vec<Relation> = table.criteria.iter().map(|c| relation_for(target.kind, c.direction)).collect();
        let mut kept: Vec<Candidate> = Vec::new();
        for size in 1..=max_conditions.min(k) {
            for subset in combinations(k, size) {
                let grids: Vec<Vec<f64>> = subset.iter().map(|&j| thresholds(table, j, relations[j])).collect();
                let mut cursor = vec![0usize; size];
                'grid: loop {
                    let cand = Candidate {
                        criteria: subset.clone(),
                        thresholds: cursor.iter().zip(&grids).map(|(&i, g)| g[i]).collect(),
                    };
                    let matched: Vec<usize> = (0..n)
                        .filter(|&x| {
                            cand.criteria.iter().zip(&cand.thresholds).all(|(&j, &t)| match relations[j] {
                                Relation::AtLeast => table.values[x][j] >= t,
                                Relation::AtMost => table.values[x][j] <= t,
                            })
                        })
                        .collect();
                    let certain = !matched.is_empty() && matched.iter().all(|&x| lower[x]);
                    if certain && !kept.iter().any(|r| r.weaker_or_equal(&cand, &relations)) {
                        kept.push(cand);
                    }
                    // odometer over the threshold grid, last criterion fastest
                    for pos in (0..size).rev() {
                        cursor[pos] += 1;
                        if cursor[pos] < grids[pos].len() {
                            continue 'grid;
                        }
                        cursor[pos] = 0;
                    }
                    break;
                }
            }
        }
        rules.extend(kept.into_iter().map(|cand| DecisionRule {
            kind: target.kind,
            conditions: cand
                .criteria
                .iter()
                .zip(&cand.thresholds)
                .map(|(&j, &t)| Condition {
                    criterion: table.criteria[j].id.clone(),
                    relation: relations[j],
                    threshold: t,
                })
                .collect(),
            conclusion: target,
            certain: true,
        }));
    }
    Ok(rules)
}

/// Class interval `(lo, hi)` implied by the rules an object matches.
pub fn classify_with_rules(
    rules: &[DecisionRule],
    criteria: &[Criterion],
    values: &[f64],
    class_count: usize,
) -> (usize, usize) {
    let mut lo = 1;
    let mut hi = class_count;
    for rule in rules.iter().filter(|r| r.matches(criteria, values)) {
        match rule.kind {
            UnionKind::AtLeast => lo = lo.max(rule.conclusion.class_index),
            UnionKind::AtMost => hi = hi.min(rule.conclusion.class_index),
        }
    }
    (lo, hi)
}
