use std::collections::{BTreeMap, BTreeSet};

use super::OracleError;
use crate::analysis::{direct_deps, reachable};
use crate::fixpoint::{self, Binding, Interpretation};
use crate::frontend::{Atom, Database, Rule, RuleKind, Term, Tuple};

fn instantiate(a: &Atom, b: &Binding) -> Tuple {
    a.args
        .iter()
        .map(|t| match t {
            Term::Var(v) => b[v].clone(),
            Term::Const(c) => c.clone(),
        })
        .collect()
}

/// One independent choice: exactly one of `options` is added.
type Choice = Vec<Vec<(String, Tuple)>>;

/// Models computed without the rewrite: enumerate every combination of
/// guess choices, close under the standard rules, keep those satisfying
/// all constraints.
pub fn guess_and_check(rules: &[Rule], db: &Database) -> Result<Vec<Interpretation>, OracleError> {
    let guess: BTreeSet<String> =
        rules.iter().filter(|r| r.is_guess()).flat_map(|r| r.defined()).map(String::from).collect();
    let deps = direct_deps(rules);
    let standard: Vec<Rule> = rules.iter().filter(|r| r.kind == RuleKind::Standard).cloned().collect();
    let pre: Vec<Rule> = standard
        .iter()
        .filter(|r| !reachable(&deps, &r.head[0].pred).iter().any(|q| guess.contains(q)))
        .cloned()
        .collect();
    let base = fixpoint::evaluate_stratified(&pre, &db.atoms())?;

    let mut choices: Vec<Choice> = Vec::new();
    for r in rules.iter().filter(|r| r.is_guess()) {
        let mut b = Binding::new();
        match r.kind {
            RuleKind::Subset => {
                let h = &r.head[0];
                let mut ts = BTreeSet::new();
                fixpoint::solve_conj(r.conj(), &base, &mut b, &mut |b| {
                    ts.insert(instantiate(h, b));
                });
                for t in ts {
                    choices.push(vec![Vec::new(), vec![(h.pred.clone(), t)]]);
                }
            }
            RuleKind::Partition => {
                let mut per: BTreeMap<Vec<Tuple>, Vec<(String, Tuple)>> = BTreeMap::new();
                fixpoint::solve_conj(r.conj(), &base, &mut b, &mut |b| {
                    let heads: Vec<(String, Tuple)> =
                        r.head.iter().map(|h| (h.pred.clone(), instantiate(h, b))).collect();
                    let key: Vec<Tuple> = heads.iter().map(|(_, t)| t.clone()).collect();
                    per.insert(key, heads);
                });
                for heads in per.into_values() {
                    choices.push(heads.into_iter().map(|h| vec![h]).collect());
                }
            }
            RuleKind::GeneralizedPartition => {
                let h = &r.head[0];
                let mut per: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
                fixpoint::solve_conj(r.conj(), &base, &mut b, &mut |b| {
                    let t = instantiate(h, b);
                    per.entry(t[..t.len() - 1].to_vec()).or_default().insert(t);
                });
                for ts in per.into_values() {
                    choices.push(ts.into_iter().map(|t| vec![(h.pred.clone(), t)]).collect());
                }
            }
            _ => {}
        }
    }

    let strata = crate::analysis::stratify(&standard)?;
    let constraints: Vec<&Rule> = rules.iter().filter(|r| r.kind == RuleKind::Constraint).collect();
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let mut m = base.clone();
        for g in &guess {
            m.entry(g.clone()).or_default();
        }
        for (c, &k) in choices.iter().zip(&pick) {
            for (p, t) in &c[k] {
                m.entry(p.clone()).or_default().insert(t.clone());
            }
        }
        let mut m = fixpoint::evaluate_strata(&strata, &m);
        if constraints.iter().all(|c| fixpoint::constraint_holds(c, &m)) {
            m.retain(|_, ts| !ts.is_empty());
            out.insert(m);
        }
        // Odometer over the choice vector.
        let mut i = 0;
        loop {
            if i == pick.len() {
                return Ok(out.into_iter().collect());
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}
