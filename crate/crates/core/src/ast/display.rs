//! Canonical pretty-printing. The output re-parses to the same syntax tree.

use super::*;

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(i) => write!(f, "{i}"),
            Constant::Sym(s) => f.write_str(s),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term, parent: ArithOp, right: bool) -> fmt::Result {
    let paren = match t {
        Term::Expr(op, ..) => {
            op.precedence() < parent.precedence() || (right && op.precedence() == parent.precedence())
        }
        _ => false,
    };
    if paren {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => f.write_str(v),
            Term::Placeholder => f.write_str("_"),
            Term::Expr(op, a, b) => {
                write_operand(f, a, *op, false)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, *op, true)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[impl fmt::Display]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for PredAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        write_args(f, &self.args)
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        write_args(f, &self.args)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Pred(p) => write!(f, "{p}"),
            Atom::Cmp { op, lhs, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Atom::Arith { op, result, lhs, rhs } => {
                let expr = Term::Expr(*op, Box::new(lhs.clone()), Box::new(rhs.clone()));
                write!(f, "{result} = {expr}")
            }
        }
    }
}

fn write_bound(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Expr(..) => write!(f, "({t})"),
        _ => write!(f, "{t}"),
    }
}

impl fmt::Display for SetDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.template)?;
        for (i, c) in self.conditions.iter().enumerate() {
            f.write_str(if i == 0 { " : " } else { ", " })?;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for CardinalityAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.lower {
            write_bound(f, l)?;
            f.write_str(" ")?;
        }
        f.write_str("{ ")?;
        for (i, d) in self.defs.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(" }")?;
        if let Some(u) = &self.upper {
            f.write_str(" ")?;
            write_bound(f, u)?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Atom(a) => write!(f, "{a}"),
            Literal::Card(c) => write!(f, "{c}"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, lits: &[Literal], sep: &str) -> fmt::Result {
    for (i, l) in lits.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{l}")?;
    }
    Ok(())
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_horn() {
            write_list(f, &self.consequent, " | ")?;
            f.write_str(" <- ")?;
            if self.antecedent.is_empty() {
                f.write_str("true")?;
            } else {
                write_list(f, &self.antecedent, ", ")?;
            }
            return f.write_str(".");
        }
        match (self.antecedent.is_empty(), self.consequent.is_empty()) {
            (true, false) => write_list(f, &self.consequent, " | ")?,
            (true, true) => f.write_str("true -> false")?,
            (false, true) => {
                write_list(f, &self.antecedent, ", ")?;
                f.write_str(" -> false")?;
            }
            (false, false) => {
                write_list(f, &self.antecedent, ", ")?;
                f.write_str(" -> ")?;
                write_list(f, &self.consequent, " | ")?;
            }
        }
        f.write_str(".")
    }
}
