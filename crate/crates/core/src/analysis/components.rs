use std::collections::BTreeSet;

use super::{direct_deps, goal_pred, reachable, AnalysisError};
use crate::frontend::{Program, Rule, RuleKind};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Classification {
    pub guess: Vec<String>,
    pub standard: Vec<String>,
}

/// Guess predicates are the heads of partition and subset rules. Each must
/// have exactly one defining rule, and no guess body may reach a guess.
pub fn classify_predicates(p: &Program) -> Result<Classification, AnalysisError> {
    let mut out = Classification::default();
    for r in p.rules.iter().filter(|r| r.is_guess()) {
        for h in r.defined() {
            if out.guess.iter().any(|g| g == h) {
                return Err(AnalysisError::MultipleDefinition(h.to_string()));
            }
            out.guess.push(h.to_string());
        }
    }
    for r in p.rules.iter().filter(|r| r.kind == RuleKind::Standard) {
        let h = &r.head[0].pred;
        if out.guess.contains(h) {
            return Err(AnalysisError::MultipleDefinition(h.clone()));
        }
        if !out.standard.contains(h) {
            out.standard.push(h.clone());
        }
    }
    let deps = direct_deps(&p.rules);
    for r in p.rules.iter().filter(|r| r.is_guess()) {
        for l in r.body_literals() {
            let Some(a) = l.atom() else { continue };
            let mut reach = reachable(&deps, &a.pred);
            reach.insert(a.pred.clone());
            if let Some(g) = out.guess.iter().find(|g| reach.contains(*g)) {
                return Err(AnalysisError::GuessDependency { pred: r.head[0].pred.clone(), guess: g.clone() });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Constrained {
    pub constrained: BTreeSet<String>,
    pub recursion_dependent: BTreeSet<String>,
    pub guess_dependent: BTreeSet<String>,
}

/// A predicate is constrained when it depends on a guess and appears in,
/// or is depended on by something in, a constraint or the goal.
pub fn mark_constrained(p: &Program) -> Constrained {
    let guess: BTreeSet<String> =
        p.rules.iter().filter(|r| r.is_guess()).flat_map(|r| r.defined()).map(String::from).collect();
    let deps = direct_deps(&p.rules);
    let std_deps = direct_deps(p.rules.iter().filter(|r| r.kind == RuleKind::Standard));
    let idb = p.idb();

    let guess_dependent: BTreeSet<String> = idb
        .iter()
        .filter(|q| !guess.contains(*q) && reachable(&deps, q).iter().any(|r| guess.contains(r)))
        .cloned()
        .collect();

    let mut roots: BTreeSet<String> = BTreeSet::new();
    for r in p.rules.iter().filter(|r| r.kind == RuleKind::Constraint) {
        for l in r.body_literals() {
            if let Some(a) = l.atom() {
                roots.insert(a.pred.clone());
            }
        }
    }
    if let Some(g) = goal_pred(p.goal.as_ref()) {
        roots.insert(g.to_string());
    }
    let mut reached = roots.clone();
    for r in &roots {
        reached.extend(reachable(&deps, r));
    }
    let constrained: BTreeSet<String> = guess_dependent.iter().filter(|q| reached.contains(*q)).cloned().collect();

    let recursive: BTreeSet<&String> = constrained.iter().filter(|q| reachable(&std_deps, q).contains(*q)).collect();
    let recursion_dependent = constrained
        .iter()
        .filter(|q| {
            recursive.contains(q) || {
                let reach = reachable(&deps, q);
                recursive.iter().any(|r| reach.contains(*r))
            }
        })
        .cloned()
        .collect();
    Constrained { constrained, recursion_dependent, guess_dependent }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComponentPartition {
    pub p1: Vec<Rule>,
    pub p2_g: Vec<Rule>,
    pub p2_s: Vec<Rule>,
    pub p2_c: Vec<Rule>,
    pub p3_s: Vec<Rule>,
    pub p3_c: Vec<Rule>,
    pub p4: Vec<Rule>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.sets().iter().map(|(_, s)| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sets(&self) -> [(&'static str, &Vec<Rule>); 7] {
        [
            ("P1", &self.p1),
            ("P2_G", &self.p2_g),
            ("P2_S", &self.p2_s),
            ("P2_C", &self.p2_c),
            ("P3_S", &self.p3_s),
            ("P3_C", &self.p3_c),
            ("P4", &self.p4),
        ]
    }

    pub fn p2_is_empty(&self) -> bool {
        self.p2_g.is_empty() && self.p2_s.is_empty() && self.p2_c.is_empty()
    }

    pub fn p3_is_empty(&self) -> bool {
        self.p3_s.is_empty() && self.p3_c.is_empty()
    }

    /// Component holding the defining rules of `pred`.
    pub fn component_of(&self, pred: &str) -> Option<&'static str> {
        self.sets().into_iter().find(|(_, rules)| rules.iter().any(|r| r.defined().contains(&pred))).map(|(n, _)| n)
    }
}

pub fn partition_components(p: &Program) -> Result<ComponentPartition, AnalysisError> {
    classify_predicates(p)?;
    let c = mark_constrained(p);
    let mut out = ComponentPartition::default();
    for r in &p.rules {
        match r.kind {
            RuleKind::Constraint => {}
            RuleKind::Standard => {
                let h = &r.head[0].pred;
                if !c.guess_dependent.contains(h) {
                    out.p1.push(r.clone());
                } else if c.recursion_dependent.contains(h) {
                    out.p3_s.push(r.clone());
                } else if c.constrained.contains(h) {
                    out.p2_s.push(r.clone());
                } else {
                    out.p4.push(r.clone());
                }
            }
            _ => out.p2_g.push(r.clone()),
        }
    }
    let p3: BTreeSet<&str> = out.p3_s.iter().flat_map(|r| r.defined()).collect();
    for r in p.rules.iter().filter(|r| r.kind == RuleKind::Constraint) {
        let hits_p3 = r.body_literals().any(|l| l.atom().is_some_and(|a| p3.contains(a.pred.as_str())));
        if hits_p3 {
            out.p3_c.push(r.clone());
        } else {
            out.p2_c.push(r.clone());
        }
    }
    Ok(out)
}
