use std::collections::BTreeSet;

use super::lexer::{lex, Spanned, Tok};
use super::*;

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(FrontendError::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected {what}, found {}", describe(&other))),
        }
    }

    fn pred_name(&mut self) -> PResult<String> {
        let name = self.ident("predicate name")?;
        if name.contains("__") {
            self.pos -= 1;
            return self.err(format!("`{name}`: names containing `__` are reserved"));
        }
        if name == "not" || name == "min" || name == "max" {
            self.pos -= 1;
            return self.err(format!("`{name}` is a keyword"));
        }
        Ok(name)
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            other => self.err(format!("expected integer, found {}", describe(&other))),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Term::Const(Value::Sym(s)))
            }
            Tok::Int(_) | Tok::Minus => Ok(Term::Const(Value::Int(self.int()?))),
            other => self.err(format!("expected term, found {}", describe(&other))),
        }
    }

    fn constant(&mut self) -> PResult<Value> {
        match self.term()? {
            Term::Const(c) => Ok(c),
            Term::Var(v) => {
                self.pos -= 1;
                self.err(format!("variable `{v}` in a fact"))
            }
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let pred = self.pred_name()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.term()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom::new(pred, args))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        while self.eat(&Tok::Star) {
            let rhs = self.factor()?;
            lhs = Expr::Bin(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Expr::Var(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Expr::Const(Value::Sym(s)))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Const(Value::Int(n)))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(n) = self.peek().clone() {
                    self.bump();
                    return Ok(Expr::Const(Value::Int(-n)));
                }
                let f = self.factor()?;
                Ok(Expr::Bin(ArithOp::Sub, Box::new(Expr::Const(Value::Int(0))), Box::new(f)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => self.err(format!("expected expression, found {}", describe(&other))),
        }
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            other => return self.err(format!("expected comparison, found {}", describe(other))),
        };
        self.bump();
        Ok(op)
    }

    fn literal(&mut self) -> PResult<Literal> {
        if let (Tok::Ident(k), Tok::Ident(_)) = (self.peek(), self.peek_at(1)) {
            if k == "not" {
                self.bump();
                return Ok(Literal::Neg(self.atom()?));
            }
        }
        let is_atom = match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(_), Tok::LParen) => true,
            (Tok::Ident(_), next) => !is_operator(next),
            _ => false,
        };
        if is_atom {
            return Ok(Literal::Pos(self.atom()?));
        }
        let l = self.expr()?;
        let op = self.cmp_op()?;
        let r = self.expr()?;
        Ok(Literal::Cmp(op, l, r))
    }

    fn conj(&mut self) -> PResult<Conj> {
        let mut out = vec![self.literal()?];
        while self.eat(&Tok::Comma) {
            out.push(self.literal()?);
        }
        Ok(out)
    }

    fn body(&mut self, disjunctive: bool) -> PResult<Vec<Conj>> {
        let mut out = vec![self.conj()?];
        while *self.peek() == Tok::Semi {
            if !disjunctive {
                return self.err("disjunctive bodies are only allowed in standard rules");
            }
            self.bump();
            out.push(self.conj()?);
        }
        Ok(out)
    }

    fn end(&mut self) -> PResult<()> {
        self.expect(Tok::Dot, "`.`")
    }

    fn goal(&mut self) -> PResult<Goal> {
        self.expect(Tok::Query, "`?`")?;
        let mode = match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(k), Tok::Bar) if k == "min" => GoalMode::Min,
            (Tok::Ident(k), Tok::Bar) if k == "max" => GoalMode::Max,
            _ => GoalMode::Plain,
        };
        let atom = if mode == GoalMode::Plain {
            self.atom()?
        } else {
            self.bump();
            self.bump();
            let a = self.atom()?;
            self.expect(Tok::Bar, "`|`")?;
            a
        };
        self.end()?;
        Ok(Goal { mode, atom })
    }

    fn rule(&mut self) -> PResult<Rule> {
        if self.eat(&Tok::If) {
            let body = self.body(false)?;
            self.end()?;
            return Ok(Rule { kind: RuleKind::Constraint, head: Vec::new(), body, label: None });
        }
        if self.eat(&Tok::Xor) {
            return self.generalized_partition();
        }
        let start = self.pos;
        let first = self.atom()?;
        match self.peek().clone() {
            Tok::Dot => {
                self.bump();
                Ok(Rule::standard(first, Vec::new()))
            }
            Tok::If => {
                self.bump();
                let body = self.body(true)?;
                self.end()?;
                Ok(Rule { kind: RuleKind::Standard, head: vec![first], body, label: None })
            }
            Tok::Subset => {
                self.bump();
                let body = self.body(false)?;
                self.end()?;
                Ok(Rule { kind: RuleKind::Subset, head: vec![first], body, label: None })
            }
            Tok::Xor => {
                let mut head = vec![first];
                while self.eat(&Tok::Xor) {
                    head.push(self.atom()?);
                }
                if *self.peek() != Tok::If {
                    return self.err("partition rules need `:-`");
                }
                self.bump();
                let body = self.body(false)?;
                self.end()?;
                if let Err(msg) = check_partition_head(&head) {
                    self.pos = start;
                    return self.err(msg);
                }
                Ok(Rule { kind: RuleKind::Partition, head, body, label: None })
            }
            Tok::Bar | Tok::Implied => {
                let mut heads = vec![first];
                while self.eat(&Tok::Bar) {
                    heads.push(self.atom()?);
                }
                if *self.peek() != Tok::Implied {
                    return self.err("`|` heads need `<-`");
                }
                self.bump();
                let mut body = self.body(false)?;
                body[0].extend(heads.into_iter().map(Literal::Neg));
                self.end()?;
                Ok(Rule { kind: RuleKind::Constraint, head: Vec::new(), body, label: None })
            }
            other => self.err(format!("expected rule arrow or `.`, found {}", describe(&other))),
        }
    }

    fn generalized_partition(&mut self) -> PResult<Rule> {
        self.expect(Tok::LBracket, "`[`")?;
        let label = match self.bump() {
            Tok::Var(v) => v,
            other => {
                self.pos -= 1;
                return self.err(format!("expected partition variable, found {}", describe(&other)));
            }
        };
        self.expect(Tok::RBracket, "`]`")?;
        let head = self.atom()?;
        self.expect(Tok::If, "`:-`")?;
        let body_start = self.pos;
        let body = self.body(false)?;
        self.end()?;
        let complaint = match head.args.last() {
            Some(Term::Var(v)) if *v == label => None,
            _ => Some(format!("partition variable `{label}` must be the last head argument")),
        }
        .or_else(|| {
            let conj = &body[0];
            let ok_last = matches!(conj.last(), Some(Literal::Pos(a))
                if a.args.len() == 1 && a.args[0] == Term::Var(label.clone()));
            if !ok_last {
                return Some(format!("body must end with a domain atom d({label})"));
            }
            let mut vs = Vec::new();
            for l in &conj[..conj.len() - 1] {
                l.vars(&mut vs);
            }
            if vs.contains(&label) {
                return Some(format!("partition variable `{label}` may only occur in the final domain atom"));
            }
            let hv: Vec<&Term> = head.args[..head.args.len() - 1].iter().collect();
            if hv.contains(&&Term::Var(label.clone())) {
                return Some(format!("partition variable `{label}` repeated in the head"));
            }
            None
        });
        if let Some(msg) = complaint {
            self.pos = body_start;
            return self.err(msg);
        }
        Ok(Rule { kind: RuleKind::GeneralizedPartition, head: vec![head], body, label: Some(label) })
    }
}

/// Forms (4) and (5): distinct predicates over one argument vector, or one
/// predicate whose last arguments are pairwise-distinct constants.
fn check_partition_head(head: &[Atom]) -> Result<(), String> {
    let same_pred = head.iter().all(|a| a.pred == head[0].pred);
    if same_pred {
        let n = head[0].args.len();
        if n == 0 || head.iter().any(|a| a.args.len() != n) {
            return Err("partition heads over one predicate need a constant last argument".into());
        }
        let prefix = &head[0].args[..n - 1];
        let mut seen = BTreeSet::new();
        for a in head {
            if a.args[..n - 1] != *prefix {
                return Err("partition heads must share one argument vector".into());
            }
            match &a.args[n - 1] {
                Term::Const(c) => {
                    if !seen.insert(c.clone()) {
                        return Err(format!("partition constant `{c}` repeated"));
                    }
                }
                Term::Var(_) => {
                    return Err("partition head mixes forms (4) and (5)".into());
                }
            }
        }
        return Ok(());
    }
    let mut preds = BTreeSet::new();
    for a in head {
        if a.args != head[0].args {
            return Err("partition heads must share one argument vector".into());
        }
        if !preds.insert(a.pred.clone()) {
            return Err("partition head mixes forms (4) and (5)".into());
        }
    }
    Ok(())
}

fn is_operator(t: &Tok) -> bool {
    matches!(t, Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Plus | Tok::Minus | Tok::Star)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Var(s) => format!("variable `{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

pub fn parse_program(text: &str) -> Result<Program, FrontendError> {
    let mut p = Parser::new(text)?;
    let mut prog = Program::default();
    while *p.peek() != Tok::Eof {
        if *p.peek() == Tok::Query {
            if prog.goal.is_some() {
                return p.err("second query line");
            }
            prog.goal = Some(p.goal()?);
            continue;
        }
        if prog.goal.is_some() {
            return p.err("the query line must come last");
        }
        prog.rules.push(p.rule()?);
    }
    Ok(prog)
}

/// Parses a program file that must carry a query line.
pub fn parse_query(text: &str) -> Result<Query, FrontendError> {
    let mut program = parse_program(text)?;
    let goal = program.goal.clone().ok_or(FrontendError::MissingQuery)?;
    program.goal = Some(goal.clone());
    Ok(Query { program, goal })
}

pub fn parse_schema(text: &str) -> Result<Schema, FrontendError> {
    let mut p = Parser::new(text)?;
    let mut s = Schema::default();
    let (mut min, mut max) = (None, None);
    let mut seen_domains: BTreeSet<String> = BTreeSet::new();
    while *p.peek() != Tok::Eof {
        let header = match p.bump() {
            Tok::Var(h) => h,
            other => {
                p.pos -= 1;
                return p.err(format!("expected section header, found {}", describe(&other)));
            }
        };
        match header.as_str() {
            "DOMAINS" | "INT" => {
                let int = header == "INT";
                if int {
                    p.expect(Tok::Minus, "`-DOMAINS`")?;
                    match p.bump() {
                        Tok::Var(h) if h == "DOMAINS" => {}
                        _ => {
                            p.pos -= 1;
                            return p.err("expected `INT-DOMAINS`");
                        }
                    }
                }
                p.expect(Tok::Colon, "`:`")?;
                if *p.peek() != Tok::Dot {
                    loop {
                        let d = p.pred_name()?;
                        if !seen_domains.insert(d.clone()) {
                            return Err(FrontendError::DuplicateDomain(d));
                        }
                        if int {
                            s.int_domains.push(d);
                        } else {
                            s.string_domains.push(d);
                        }
                        if !(p.eat(&Tok::Semi) || p.eat(&Tok::Comma)) {
                            break;
                        }
                    }
                }
                p.end()?;
            }
            "PREDICATES" => {
                p.expect(Tok::Colon, "`:`")?;
                if *p.peek() != Tok::Dot {
                    loop {
                        let name = p.pred_name()?;
                        let mut sig = Vec::new();
                        if p.eat(&Tok::LParen) {
                            loop {
                                sig.push(p.ident("domain name")?);
                                if !p.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                            p.expect(Tok::RParen, "`)`")?;
                        }
                        if s.predicates.insert(name.clone(), sig).is_some() {
                            return Err(FrontendError::DuplicatePredicate(name));
                        }
                        if !(p.eat(&Tok::Semi) || p.eat(&Tok::Comma)) {
                            break;
                        }
                    }
                }
                p.end()?;
            }
            "MinInt" | "MaxInt" => {
                p.expect(Tok::Eq, "`=`")?;
                let v = p.int()?;
                p.end()?;
                if header == "MinInt" {
                    min = Some(v);
                } else {
                    max = Some(v);
                }
            }
            other => {
                p.pos -= 1;
                return p.err(format!("unknown section `{other}`"));
            }
        }
    }
    match (min, max) {
        (Some(a), Some(b)) => {
            if a > b {
                return Err(FrontendError::BadRange(a, b));
            }
            s.int_range = Some((a, b));
        }
        (None, None) => {}
        _ => return p.err("MinInt and MaxInt must be given together"),
    }
    for (pred, sig) in &s.predicates {
        if seen_domains.contains(pred) || (pred == INTEGER && s.int_range.is_some()) {
            return Err(FrontendError::DuplicatePredicate(pred.clone()));
        }
        for d in sig {
            if !s.is_declared_domain(d) {
                return Err(FrontendError::UndeclaredDomain { pred: pred.clone(), domain: d.clone() });
            }
        }
    }
    Ok(s)
}

pub fn parse_database(text: &str, schema: &Schema) -> Result<Database, FrontendError> {
    let mut p = Parser::new(text)?;
    let mut db = Database::default();
    for d in schema.string_domains.iter() {
        db.extents.insert(d.clone(), Vec::new());
    }
    for d in schema.int_domains.iter() {
        db.extents.insert(d.clone(), Vec::new());
        db.int_domains.insert(d.clone());
    }
    if let Some((lo, hi)) = schema.int_range {
        db.extents.insert(INTEGER.to_string(), (lo..=hi).map(Value::Int).collect());
        db.int_domains.insert(INTEGER.to_string());
    }
    for pred in schema.predicates.keys() {
        db.facts.insert(pred.clone(), BTreeSet::new());
    }
    while *p.peek() != Tok::Eof {
        let pred = p.pred_name()?;
        let mut args = Vec::new();
        if p.eat(&Tok::LParen) {
            loop {
                args.push(p.constant()?);
                if !p.eat(&Tok::Comma) {
                    break;
                }
            }
            p.expect(Tok::RParen, "`)`")?;
        }
        p.end()?;
        if pred == INTEGER && schema.int_range.is_some() {
            continue;
        }
        if schema.is_declared_domain(&pred) {
            if args.len() != 1 {
                return Err(FrontendError::Arity { pred, expected: 1, got: args.len() });
            }
            let v = args.pop().unwrap();
            if schema.is_int_domain(&pred) && v.as_int().is_none() {
                return Err(FrontendError::NotInteger { domain: pred, value: v });
            }
            let ext = db.extents.get_mut(&pred).expect("declared domain");
            if !ext.contains(&v) {
                ext.push(v);
            }
        } else if let Some(sig) = schema.predicates.get(&pred) {
            if args.len() != sig.len() {
                return Err(FrontendError::Arity { pred, expected: sig.len(), got: args.len() });
            }
            db.facts.get_mut(&pred).expect("declared predicate").insert(args);
        } else {
            return Err(FrontendError::UnknownFact(pred));
        }
    }
    for (pred, sig) in &schema.predicates {
        for t in &db.facts[pred] {
            for (v, d) in t.iter().zip(sig) {
                if !db.extent(d).contains(v) {
                    return Err(FrontendError::OutsideDomain {
                        pred: pred.clone(),
                        value: v.clone(),
                        domain: d.clone(),
                    });
                }
            }
        }
    }
    Ok(db)
}
