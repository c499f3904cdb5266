//! Replacement of arithmetic expressions by fresh variables.

use super::*;
use std::collections::BTreeSet;

struct Fresh {
    used: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn new(rule: &Rule) -> Self {
        let used = rule.all_vars().into_iter().map(str::to_string).collect();
        Fresh { used, next: 1 }
    }

    fn var(&mut self) -> String {
        loop {
            let name = format!("T{}", self.next);
            self.next += 1;
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// Post-order flattening: operands first, left to right, so `(X+Y)*Z`
/// yields `T1 = X + Y` followed by `T2 = T1 * Z`.
fn flatten(t: &Term, fresh: &mut Fresh, defs: &mut Vec<Atom>) -> Term {
    match t {
        Term::Expr(op, a, b) => {
            let a = flatten(a, fresh, defs);
            let b = flatten(b, fresh, defs);
            let name = fresh.var();
            defs.push(Atom::Arith { op: *op, result: Term::Var(name.clone()), lhs: a, rhs: b });
            Term::Var(name)
        }
        other => other.clone(),
    }
}

fn flatten_atom(atom: &Atom, fresh: &mut Fresh, defs: &mut Vec<Atom>) -> Atom {
    match atom {
        Atom::Pred(p) => Atom::Pred(PredAtom {
            pred: p.pred.clone(),
            args: p.args.iter().map(|t| flatten(t, fresh, defs)).collect(),
        }),
        // `V = a op b` with a simple left side is already the defining form.
        Atom::Cmp { op: CmpOp::Eq, lhs, rhs } if lhs.is_simple() && rhs.has_expr() => arith_from(lhs, rhs, fresh, defs),
        Atom::Cmp { op: CmpOp::Eq, lhs, rhs } if rhs.is_simple() && lhs.has_expr() => arith_from(rhs, lhs, fresh, defs),
        Atom::Cmp { op, lhs, rhs } => {
            Atom::Cmp { op: *op, lhs: flatten(lhs, fresh, defs), rhs: flatten(rhs, fresh, defs) }
        }
        Atom::Arith { op, result, lhs, rhs } => Atom::Arith {
            op: *op,
            result: flatten(result, fresh, defs),
            lhs: flatten(lhs, fresh, defs),
            rhs: flatten(rhs, fresh, defs),
        },
    }
}

fn arith_from(simple: &Term, expr: &Term, fresh: &mut Fresh, defs: &mut Vec<Atom>) -> Atom {
    let Term::Expr(op, a, b) = expr else { unreachable!() };
    Atom::Arith { op: *op, result: simple.clone(), lhs: flatten(a, fresh, defs), rhs: flatten(b, fresh, defs) }
}

fn flatten_card(c: &CardinalityAtom, fresh: &mut Fresh, rule_defs: &mut Vec<Atom>) -> CardinalityAtom {
    let lower = c.lower.as_ref().map(|t| flatten(t, fresh, rule_defs));
    let upper = c.upper.as_ref().map(|t| flatten(t, fresh, rule_defs));
    let defs = c
        .defs
        .iter()
        .map(|d| {
            let mut pre = Vec::new();
            let template = match flatten_atom(&Atom::Pred(d.template.clone()), fresh, &mut pre) {
                Atom::Pred(p) => p,
                _ => unreachable!(),
            };
            let mut conditions = Vec::new();
            for cond in &d.conditions {
                let mut local_defs = Vec::new();
                let flat = flatten_atom(cond, fresh, &mut local_defs);
                conditions.extend(local_defs);
                conditions.push(flat);
            }
            conditions.extend(pre);
            SetDefinition { template, conditions }
        })
        .collect();
    CardinalityAtom { lower, upper, defs }
}

/// Rewrites every arithmetic expression into a fresh variable defined by
/// a predefined atom. Definitions for antecedent terms are placed just
/// before the atom that uses them; definitions for consequent terms are
/// appended to the antecedent. Inside a set definition the defining atoms
/// become conditions of that definition, which makes the fresh variables
/// bound there. Applying the function to its own output changes nothing.
pub fn desugar_arithmetic(rule: &Rule) -> Rule {
    let mut fresh = Fresh::new(rule);
    let mut antecedent = Vec::new();
    for lit in &rule.antecedent {
        let mut defs = Vec::new();
        let lit = match lit {
            Literal::Atom(a) => Literal::Atom(flatten_atom(a, &mut fresh, &mut defs)),
            Literal::Card(c) => Literal::Card(flatten_card(c, &mut fresh, &mut defs)),
        };
        antecedent.extend(defs.into_iter().map(Literal::Atom));
        antecedent.push(lit);
    }
    let mut consequent = Vec::new();
    for lit in &rule.consequent {
        let mut defs = Vec::new();
        let lit = match lit {
            Literal::Atom(a) => Literal::Atom(flatten_atom(a, &mut fresh, &mut defs)),
            Literal::Card(c) => Literal::Card(flatten_card(c, &mut fresh, &mut defs)),
        };
        antecedent.extend(defs.into_iter().map(Literal::Atom));
        consequent.push(lit);
    }
    Rule { antecedent, consequent, flavor: rule.flavor, span: rule.span.clone() }
}
