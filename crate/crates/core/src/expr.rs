//! Combination expressions: arithmetic over sub-test metrics with
//! aggregation (`sum`, `mean`, `max`, `min`) and up-scaling (`scale`).
//!
//! Grammar, left-associative, `*`/`/` binding tighter than `+`/`-`:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := number | ident '.' ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `×` and `÷` are accepted as aliases. Literal-only subtrees are folded at
//! parse time.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::diag::{codes, Diagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sum,
    Mean,
    Max,
    Min,
    Scale,
}

impl Func {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "sum" => Func::Sum,
            "mean" => Func::Mean,
            "max" => Func::Max,
            "min" => Func::Min,
            "scale" => Func::Scale,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sum => "sum",
            Func::Mean => "mean",
            Func::Max => "max",
            Func::Min => "min",
            Func::Scale => "scale",
        }
    }

    fn apply(self, args: &[f64]) -> f64 {
        match self {
            Func::Sum => args.iter().sum(),
            Func::Mean => args.iter().sum::<f64>() / args.len() as f64,
            Func::Max => args.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Func::Min => args.iter().copied().fold(f64::INFINITY, f64::min),
            Func::Scale => args[0] * args[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Ref { subtest: String, metric: String },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    fn collect_refs<'a>(&'a self, out: &mut BTreeSet<(&'a str, &'a str)>) {
        match self {
            Expr::Num(_) => {}
            Expr::Ref { subtest, metric } => {
                out.insert((subtest, metric));
            }
            Expr::Neg(e) => e.collect_refs(out),
            Expr::Bin(_, a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_refs(out)),
        }
    }

    fn eval<F>(&self, lookup: &F) -> Result<f64, (String, String)>
    where
        F: Fn(&str, &str) -> Option<f64>,
    {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Ref { subtest, metric } => {
                lookup(subtest, metric).ok_or_else(|| (subtest.clone(), metric.clone()))?
            }
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Bin(op, a, b) => op.apply(a.eval(lookup)?, b.eval(lookup)?),
            Expr::Call(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(lookup))
                    .collect::<Result<Vec<_>, _>>()?;
                f.apply(&vals)
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Ref { subtest, metric } => write!(f, "{subtest}.{metric}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse failure with a 1-based character column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub code: &'static str,
    pub column: usize,
    pub message: String,
}

impl ExprError {
    pub fn into_diagnostic(self, path: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.code, path, format!("column {}: {}", self.column, self.message))
    }
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {}: {}", self.code, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinationExpression {
    pub source: String,
    pub tree: Expr,
}

impl CombinationExpression {
    /// Distinct `(subtest, metric)` references, sorted.
    pub fn references(&self) -> BTreeSet<(&str, &str)> {
        let mut out = BTreeSet::new();
        self.tree.collect_refs(&mut out);
        out
    }

    pub fn referenced_subtests(&self) -> BTreeSet<&str> {
        self.references().into_iter().map(|(s, _)| s).collect()
    }

    /// Fails with every reference not admitted by `known`.
    pub fn check_references<F>(&self, known: F) -> Result<(), ExprError>
    where
        F: Fn(&str, &str) -> bool,
    {
        let bad: Vec<String> = self
            .references()
            .into_iter()
            .filter(|(s, m)| !known(s, m))
            .map(|(s, m)| format!("{s}.{m}"))
            .collect();
        if bad.is_empty() {
            return Ok(());
        }
        let column = self
            .source
            .find(bad[0].as_str())
            .map(|b| self.source[..b].chars().count() + 1)
            .unwrap_or(1);
        Err(ExprError {
            code: codes::E_EXPR_REF,
            column,
            message: format!("unknown metric reference(s): {}", bad.join(", ")),
        })
    }

    /// Evaluates with `lookup(subtest, metric)`; an unanswered lookup is an
    /// `E_EXPR_REF` error.
    pub fn evaluate<F>(&self, lookup: F) -> Result<f64, ExprError>
    where
        F: Fn(&str, &str) -> Option<f64>,
    {
        self.tree.eval(&lookup).map_err(|(s, m)| {
            let needle = format!("{s}.{m}");
            let column = self
                .source
                .find(needle.as_str())
                .map(|b| self.source[..b].chars().count() + 1)
                .unwrap_or(1);
            ExprError {
                code: codes::E_EXPR_REF,
                column,
                message: format!("no value for metric '{needle}'"),
            }
        })
    }

    /// Value when the expression folded to a literal.
    pub fn constant(&self) -> Option<f64> {
        match self.tree {
            Expr::Num(v) => Some(v),
            _ => None,
        }
    }
}

pub fn parse_expression(text: &str) -> Result<CombinationExpression, ExprError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, end_col: text.chars().count() + 1 };
    let tree = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(p.error_at(t.col, format!("unexpected {}", t.tok.describe())));
    }
    Ok(CombinationExpression {
        source: text.to_string(),
        tree,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Dot,
    Comma,
    LParen,
    RParen,
    Op(BinOp),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Dot => "'.'".into(),
            Tok::Comma => "','".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Op(op) => format!("'{}'", op.symbol()),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn syntax(column: usize, message: impl Into<String>) -> ExprError {
    ExprError {
        code: codes::E_EXPR_SYNTAX,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let single = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '.' if !chars.get(i + 1).is_some_and(char::is_ascii_digit) => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '+' => Some(Tok::Op(BinOp::Add)),
            '-' | '−' => Some(Tok::Op(BinOp::Sub)),
            '*' | '×' => Some(Tok::Op(BinOp::Mul)),
            '/' | '÷' => Some(Tok::Op(BinOp::Div)),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, col });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let v: f64 = lit
                .parse()
                .map_err(|_| syntax(col, format!("malformed number '{lit}'")))?;
            out.push(Spanned { tok: Tok::Num(v), col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        return Err(syntax(col, format!("unexpected character '{c}'")));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn error_at(&self, col: usize, message: String) -> ExprError {
        syntax(col, message)
    }

    fn expect(&mut self, want: Tok) -> Result<Spanned, ExprError> {
        match self.next() {
            Some(t) if t.tok == want => Ok(t),
            Some(t) => Err(syntax(
                t.col,
                format!("expected {}, found {}", want.describe(), t.tok.describe()),
            )),
            None => Err(syntax(
                self.end_col,
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Spanned { tok: Tok::Op(op @ (BinOp::Add | BinOp::Sub)), col }) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = fold(op, lhs, rhs, col)?;
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Spanned { tok: Tok::Op(op @ (BinOp::Mul | BinOp::Div)), col }) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = fold(op, lhs, rhs, col)?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Spanned { tok: Tok::Op(BinOp::Sub), .. }) = self.peek() {
            self.pos += 1;
            return Ok(match self.unary()? {
                Expr::Num(v) => Expr::Num(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(t) = self.next() else {
            return Err(syntax(self.end_col, "unexpected end of input"));
        };
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match self.peek().map(|s| &s.tok) {
                Some(Tok::Dot) => {
                    self.pos += 1;
                    match self.next() {
                        Some(Spanned { tok: Tok::Ident(metric), .. }) => Ok(Expr::Ref {
                            subtest: name,
                            metric,
                        }),
                        Some(o) => Err(syntax(o.col, format!("expected metric name, found {}", o.tok.describe()))),
                        None => Err(syntax(self.end_col, "expected metric name, found end of input")),
                    }
                }
                Some(Tok::LParen) => {
                    let func = Func::parse(&name)
                        .ok_or_else(|| syntax(t.col, format!("unknown function '{name}'")))?;
                    self.pos += 1;
                    let mut args = alloc::vec![self.expr()?];
                    while let Some(Tok::Comma) = self.peek().map(|s| &s.tok) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    if func == Func::Scale && args.len() != 2 {
                        return Err(syntax(t.col, format!("scale takes 2 arguments, got {}", args.len())));
                    }
                    if args.iter().all(|a| matches!(a, Expr::Num(_))) {
                        let vals: Vec<f64> = args
                            .iter()
                            .map(|a| match a {
                                Expr::Num(v) => *v,
                                _ => unreachable!(),
                            })
                            .collect();
                        return Ok(Expr::Num(func.apply(&vals)));
                    }
                    Ok(Expr::Call(func, args))
                }
                _ => Err(syntax(
                    t.col,
                    format!("bare identifier '{name}'; expected <subtest>.<metric> or a function call"),
                )),
            },
            other => Err(syntax(t.col, format!("unexpected {}", other.describe()))),
        }
    }
}

fn fold(op: BinOp, lhs: Expr, rhs: Expr, col: usize) -> Result<Expr, ExprError> {
    match (&lhs, &rhs) {
        (_, Expr::Num(b)) if op == BinOp::Div && *b == 0.0 => {
            Err(syntax(col, "division by literal zero"))
        }
        (Expr::Num(a), Expr::Num(b)) => Ok(Expr::Num(op.apply(*a, *b))),
        _ => Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs))),
    }
}
