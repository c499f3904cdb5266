//! Concrete syntax for data files (`.dps`), program files (`.ps`),
//! DATALOG¬ programs (`.dlg`) and `name=value` constant bindings.
//!
//! ```text
//! % data
//! vtx(1..3). edge(1,2). color(red).
//!
//! % program
//! clrd(X,C) -> vtx(X).
//! vtx(X) -> 1 { clrd(X,C) : color(C) } 1.
//! edge(X,Y), clrd(X,C), clrd(Y,C) -> false.
//! visit(Y) <- visit(X), hc_edge(X,Y).
//! ```

mod lexer;

use crate::ast::{
    ArithOp, Atom, Bindings, CardinalityAtom, CmpOp, Constant, Flavor, GroundAtom, Literal, PredAtom, Rule,
    SetDefinition, SourceSpan, Term,
};
use crate::translate::DatalogClause;
use lexer::{tokenize, Tok, Token};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    IntegerOverflow,
    NonGroundData,
    BadRange,
    Malformed(&'static str),
}

/// A syntax error. Errors order by their position in the input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(kind: ParseErrorKind, span: SourceSpan) -> Self {
        ParseError { span, kind }
    }

    pub fn message(&self) -> String {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => format!("unexpected character `{c}`"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                format!("expected {expected}, found {found}")
            }
            ParseErrorKind::IntegerOverflow => "integer literal out of range".to_string(),
            ParseErrorKind::NonGroundData => "data facts must be ground".to_string(),
            ParseErrorKind::BadRange => "range bounds must be integers".to_string(),
            ParseErrorKind::Malformed(what) => what.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self.kind {
            ParseErrorKind::NonGroundData => "E_NONGROUND_DATA",
            _ => "E_PARSE",
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BindingError {
    #[error("constant `{0}` bound more than once")]
    Duplicate(String),
    #[error("malformed binding `{0}`; expected name=value")]
    Malformed(String),
}

impl BindingError {
    pub fn code(&self) -> &'static str {
        match self {
            BindingError::Duplicate(_) => "E_DUPLICATE_CONST",
            BindingError::Malformed(_) => "E_BAD_BINDING",
        }
    }
}

enum Item {
    Lit(Literal),
    True,
    False,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sep {
    Comma,
    Bar,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, file: Option<&str>) -> PResult<Self> {
        Ok(Parser { toks: tokenize(text, file)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn unexpected<T>(&self, expected: &'static str) -> PResult<T> {
        Err(ParseError::new(ParseErrorKind::UnexpectedToken { found: self.peek().describe(), expected }, self.span()))
    }

    fn malformed<T>(&self, what: &'static str, span: SourceSpan) -> PResult<T> {
        let _ = self;
        Err(ParseError::new(ParseErrorKind::Malformed(what), span))
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(expected)
        }
    }

    // ---- terms ----

    fn sum(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Expr(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                Tok::Mod => ArithOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Term::Expr(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(match self.unary()? {
                Term::Const(Constant::Int(v)) => Term::Const(Constant::Int(-v)),
                t => Term::Expr(ArithOp::Sub, Box::new(Term::int(0)), Box::new(t)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Term> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Term::int(v))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Ident(s) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    return self.malformed("function symbols are not allowed", span);
                }
                Ok(Term::Const(Constant::Sym(s)))
            }
            Tok::Underscore => {
                self.bump();
                Ok(Term::Placeholder)
            }
            Tok::LParen => {
                self.bump();
                let t = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.unexpected("a term"),
        }
    }

    // ---- atoms ----

    fn pred_atom(&mut self) -> PResult<PredAtom> {
        let Tok::Ident(name) = self.peek().clone() else {
            return self.unexpected("a predicate name");
        };
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.sum()?);
                match self.bump() {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => {
                        self.pos -= 1;
                        return self.unexpected("`,` or `)`");
                    }
                }
            }
        }
        Ok(PredAtom { pred: name, args })
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn is_operator(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Plus
                | Tok::Minus
                | Tok::Star
                | Tok::Slash
                | Tok::Mod
                | Tok::Eq
                | Tok::Ne
                | Tok::Lt
                | Tok::Le
                | Tok::Gt
                | Tok::Ge
        )
    }

    /// An ordinary atom or an infix comparison.
    fn atom(&mut self) -> PResult<Atom> {
        let span = self.span();
        if let Tok::Ident(_) = self.peek() {
            let next = self.peek_at(1);
            if *next == Tok::LParen || !Self::is_operator(next) {
                let a = self.pred_atom()?;
                if self.cmp_op().is_some() {
                    return self.malformed("atoms cannot be compared", span);
                }
                return Ok(Atom::Pred(a));
            }
        }
        let lhs = self.sum()?;
        let Some(op) = self.cmp_op() else {
            return self.unexpected("a comparison operator");
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(Atom::Cmp { op, lhs, rhs })
    }

    fn starts_bound(tok: &Tok) -> bool {
        matches!(tok, Tok::Int(_) | Tok::Var(_) | Tok::Ident(_) | Tok::Minus | Tok::LParen)
    }

    fn card(&mut self, lower: Option<Term>) -> PResult<CardinalityAtom> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut defs = Vec::new();
        loop {
            let template = self.pred_atom()?;
            let mut conditions = Vec::new();
            if *self.peek() == Tok::Colon {
                self.bump();
                loop {
                    conditions.push(self.atom()?);
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                }
            }
            defs.push(SetDefinition { template, conditions });
            match self.bump() {
                Tok::Semi => continue,
                Tok::RBrace => break,
                _ => {
                    self.pos -= 1;
                    return self.unexpected("`;` or `}`");
                }
            }
        }
        let upper = if Self::starts_bound(self.peek()) { Some(self.sum()?) } else { None };
        Ok(CardinalityAtom { lower, upper, defs })
    }

    fn item(&mut self) -> PResult<Item> {
        match self.peek() {
            Tok::True => {
                self.bump();
                return Ok(Item::True);
            }
            Tok::False => {
                self.bump();
                return Ok(Item::False);
            }
            Tok::LBrace => return Ok(Item::Lit(Literal::Card(self.card(None)?))),
            _ => {}
        }
        if Self::starts_bound(self.peek()) {
            let save = self.pos;
            if let Ok(bound) = self.sum() {
                if *self.peek() == Tok::LBrace {
                    return Ok(Item::Lit(Literal::Card(self.card(Some(bound))?)));
                }
            }
            self.pos = save;
        }
        Ok(Item::Lit(Literal::Atom(self.atom()?)))
    }

    fn items(&mut self) -> PResult<(Vec<Item>, Option<Sep>, SourceSpan)> {
        let span = self.span();
        let mut items = vec![self.item()?];
        let mut sep = None;
        loop {
            let s = match self.peek() {
                Tok::Comma => Sep::Comma,
                Tok::Bar => Sep::Bar,
                _ => return Ok((items, sep, span)),
            };
            if sep.is_some_and(|p| p != s) {
                return self.malformed("`,` and `|` cannot be mixed in one rule side", self.span());
            }
            sep = Some(s);
            self.bump();
            items.push(self.item()?);
        }
    }

    fn side(&self, items: Vec<Item>, sep: Option<Sep>, want: Sep, span: SourceSpan) -> PResult<Vec<Literal>> {
        if sep.is_some_and(|s| s != want) {
            let what = match want {
                Sep::Comma => "antecedent atoms are separated by `,`",
                Sep::Bar => "consequent atoms are separated by `|`",
            };
            return self.malformed(what, span);
        }
        let (neutral, what) = match want {
            Sep::Comma => (true, "`false` cannot appear in an antecedent"),
            Sep::Bar => (false, "`true` cannot appear in a consequent"),
        };
        let n = items.len();
        let mut out = Vec::new();
        for it in items {
            match it {
                Item::Lit(l) => out.push(l),
                Item::True | Item::False => {
                    let is_true = matches!(it, Item::True);
                    if is_true != neutral {
                        return self.malformed(what, span);
                    }
                    if n > 1 {
                        return self.malformed("`true`/`false` must stand alone", span);
                    }
                }
            }
        }
        Ok(out)
    }

    fn rule(&mut self) -> PResult<Rule> {
        let start = self.span();
        let (items, sep, span) = self.items()?;
        let mut rule = match self.peek() {
            Tok::Arrow => {
                self.bump();
                let antecedent = self.side(items, sep, Sep::Comma, span)?;
                let (items, sep, span) = self.items()?;
                let consequent = self.side(items, sep, Sep::Bar, span)?;
                Rule::new(antecedent, consequent)
            }
            Tok::LArrow => {
                self.bump();
                let head = match (items.len(), items.into_iter().next()) {
                    (1, Some(Item::Lit(l @ Literal::Atom(Atom::Pred(_))))) => l,
                    _ => return self.malformed("a Horn rule has a single atom as its head", span),
                };
                let (items, sep, span) = self.items()?;
                let body = self.side(items, sep, Sep::Comma, span)?;
                Rule { antecedent: body, consequent: vec![head], flavor: Some(Flavor::Horn), span: None }
            }
            Tok::Dot => {
                let consequent = self.side(items, sep, Sep::Bar, span)?;
                Rule::new(Vec::new(), consequent)
            }
            _ => return self.unexpected("`->`, `<-` or `.`"),
        };
        let end = self.span();
        self.expect(Tok::Dot, "`.`")?;
        rule.span = Some(SourceSpan { end: end.end, ..start });
        Ok(rule)
    }

    // ---- data ----

    fn data_const(&mut self, bindings: &Bindings) -> PResult<Constant> {
        let span = self.span();
        match self.bump() {
            Tok::Int(v) => Ok(Constant::Int(v)),
            Tok::Minus => match self.bump() {
                Tok::Int(v) => Ok(Constant::Int(-v)),
                _ => {
                    self.pos -= 1;
                    self.unexpected("an integer")
                }
            },
            Tok::Ident(s) => {
                let mut c = Constant::Sym(s);
                bindings.resolve(&mut c);
                Ok(c)
            }
            Tok::Var(_) | Tok::Underscore => Err(ParseError::new(ParseErrorKind::NonGroundData, span)),
            _ => {
                self.pos -= 1;
                self.unexpected("a constant")
            }
        }
    }

    fn data_arg(&mut self, bindings: &Bindings) -> PResult<Vec<Constant>> {
        let span = self.span();
        let lo = self.data_const(bindings)?;
        if *self.peek() != Tok::DotDot {
            return Ok(vec![lo]);
        }
        self.bump();
        let hi = self.data_const(bindings)?;
        match (lo, hi) {
            (Constant::Int(lo), Constant::Int(hi)) => Ok((lo..=hi).map(Constant::Int).collect()),
            _ => Err(ParseError::new(ParseErrorKind::BadRange, span)),
        }
    }

    fn fact(&mut self, bindings: &Bindings, out: &mut BTreeSet<GroundAtom>) -> PResult<()> {
        let Tok::Ident(pred) = self.peek().clone() else {
            return self.unexpected("a predicate name");
        };
        self.bump();
        let mut args: Vec<Vec<Constant>> = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.data_arg(bindings)?);
                match self.bump() {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => {
                        self.pos -= 1;
                        return self.unexpected("`,` or `)`");
                    }
                }
            }
        }
        let mut tuples: Vec<Vec<Constant>> = vec![Vec::new()];
        for choices in &args {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    choices.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            out.insert(GroundAtom { pred: pred.clone(), args: t });
        }
        Ok(())
    }

    // ---- DATALOG¬ ----

    fn datalog_clause(&mut self) -> PResult<DatalogClause> {
        let head = self.pred_atom()?;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        if *self.peek() == Tok::ColonDash {
            self.bump();
            loop {
                let negated =
                    matches!(self.peek(), Tok::Ident(s) if s == "not") && matches!(self.peek_at(1), Tok::Ident(_));
                if negated {
                    self.bump();
                    negative.push(self.pred_atom()?);
                } else {
                    positive.push(self.pred_atom()?);
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(DatalogClause { head, positive, negative })
    }
}

/// Parses a program file.
pub fn parse_program(text: &str) -> Result<Vec<Rule>, ParseError> {
    parse_program_named(text, None)
}

/// Like [`parse_program`], recording `file` in error spans.
pub fn parse_program_named(text: &str, file: Option<&str>) -> Result<Vec<Rule>, ParseError> {
    let mut p = Parser::new(text, file)?;
    let mut rules = Vec::new();
    while !p.at_eof() {
        rules.push(p.rule()?);
    }
    Ok(rules)
}

/// Parses a data file. `p(lo..hi)` expands to one fact per integer in the
/// range. The result is sorted and free of duplicates.
pub fn parse_data(text: &str) -> Result<Vec<GroundAtom>, ParseError> {
    parse_data_with(text, None, &Bindings::new())
}

/// Like [`parse_data`]; symbolic arguments naming a bound constant are
/// replaced by its value, which lets range bounds refer to bindings
/// (`index(1..n).`).
pub fn parse_data_with(text: &str, file: Option<&str>, bindings: &Bindings) -> Result<Vec<GroundAtom>, ParseError> {
    let mut p = Parser::new(text, file)?;
    let mut facts = BTreeSet::new();
    while !p.at_eof() {
        p.fact(bindings, &mut facts)?;
        p.expect(Tok::Dot, "`.`")?;
    }
    Ok(facts.into_iter().collect())
}

/// Parses a single ground atom such as `edge(1,b)`.
pub fn parse_ground_atom(text: &str) -> Result<GroundAtom, ParseError> {
    let mut p = Parser::new(text, None)?;
    let mut out = BTreeSet::new();
    p.fact(&Bindings::new(), &mut out)?;
    if !p.at_eof() || out.len() != 1 {
        return p.unexpected("end of atom");
    }
    Ok(out.into_iter().next().unwrap())
}

/// Parses a DATALOG¬ program: `head :- b1, not b2.`
pub fn parse_datalog(text: &str) -> Result<Vec<DatalogClause>, ParseError> {
    let mut p = Parser::new(text, None)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        out.push(p.datalog_clause()?);
    }
    Ok(out)
}

/// Parses `name=value` bindings. Values are integers or symbolic
/// constants.
pub fn parse_constants<S: AsRef<str>>(args: &[S]) -> Result<Bindings, BindingError> {
    let mut out = Bindings::new();
    for arg in args {
        let arg = arg.as_ref();
        let malformed = || BindingError::Malformed(arg.to_string());
        let (name, value) = arg.split_once('=').ok_or_else(malformed)?;
        let (name, value) = (name.trim(), value.trim());
        let is_ident = |s: &str| {
            s.starts_with(|c: char| c.is_ascii_lowercase()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        };
        if !is_ident(name) {
            return Err(malformed());
        }
        let value = if let Ok(v) = value.parse::<i64>() {
            Constant::Int(v)
        } else if is_ident(value) {
            Constant::Sym(value.to_string())
        } else {
            return Err(malformed());
        };
        if out.insert(name, value).is_some() {
            return Err(BindingError::Duplicate(name.to_string()));
        }
    }
    Ok(out)
}
