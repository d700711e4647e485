//! Syntax tree, parser and printer for `.qs` descriptions.

use std::fmt::{self, Write as _};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::lexer::{decimal_text, tokenize, Span, Tok, Token};
use super::{Diagnostic, DiagnosticKind};
use crate::system::{NbarMode, ThetaBarConvention};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Number(BigRational),
    Imag,
    Ident(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Adj(Box<Expr>),
}

impl Expr {
    fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    fn precedence(&self) -> u8 {
        match self.kind {
            ExprKind::Add(..) | ExprKind::Sub(..) => 1,
            ExprKind::Mul(..) | ExprKind::Div(..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Pow(..) => 4,
            ExprKind::Adj(_) => 5,
            ExprKind::Number(_) | ExprKind::Imag | ExprKind::Ident(_) => 6,
        }
    }

    fn write_at(&self, out: &mut String, min: u8) {
        let paren = self.precedence() < min;
        if paren {
            out.push('(');
        }
        match &self.kind {
            ExprKind::Number(r) => match decimal_text(r) {
                Some(t) => out.push_str(&t),
                None => {
                    let _ = write!(out, "({}/{})", r.numer(), r.denom());
                }
            },
            ExprKind::Imag => out.push('i'),
            ExprKind::Ident(name) => out.push_str(name),
            ExprKind::Neg(x) => {
                out.push('-');
                x.write_at(out, 3);
            }
            ExprKind::Add(l, r) | ExprKind::Sub(l, r) => {
                l.write_at(out, 1);
                out.push_str(if matches!(self.kind, ExprKind::Add(..)) { " + " } else { " - " });
                r.write_at(out, 2);
            }
            ExprKind::Mul(l, r) | ExprKind::Div(l, r) => {
                l.write_at(out, 2);
                out.push(if matches!(self.kind, ExprKind::Mul(..)) { '*' } else { '/' });
                r.write_at(out, 3);
            }
            ExprKind::Pow(b, e) => {
                b.write_at(out, 5);
                let _ = write!(out, "^{e}");
            }
            ExprKind::Adj(x) => {
                x.write_at(out, 5);
                out.push('\'');
            }
        }
        if paren {
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_at(&mut s, 0);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetDef {
    pub name: Ident,
    pub expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Drift(usize),
    Diffusion(usize, usize),
    Output(usize),
    Feedthrough(usize, usize),
    Hamiltonian,
    Coupling(usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Drift(i) => write!(f, "A[{i}]"),
            Target::Diffusion(i, j) => write!(f, "B[{i}][{j}]"),
            Target::Output(i) => write!(f, "C[{i}]"),
            Target::Feedthrough(i, j) => write!(f, "D[{i}][{j}]"),
            Target::Hamiltonian => f.write_str("H"),
            Target::Coupling(i) => write!(f, "L[{i}]"),
        }
    }
}

impl Target {
    pub fn is_oscillator(&self) -> bool {
        matches!(self, Target::Hamiltonian | Target::Coupling(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub target: Target,
    pub expr: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ThetaSpec {
    #[default]
    Identity,
    Matrix { rows: Vec<Vec<Expr>>, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    pub nbar: Option<NbarMode>,
    pub theta_bar: Option<ThetaBarConvention>,
    pub allow_multi_generator: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SystemDescription {
    pub name: Option<String>,
    pub params: Vec<Ident>,
    pub lets: Vec<LetDef>,
    pub modes: Vec<Ident>,
    pub channels: Option<usize>,
    pub theta: ThetaSpec,
    pub options: Options,
    pub assignments: Vec<Assignment>,
}

impl SystemDescription {
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("unnamed")
    }

    pub fn has_system_block(&self) -> bool {
        self.assignments.iter().any(|a| !a.target.is_oscillator())
    }

    pub fn has_oscillator_block(&self) -> bool {
        self.assignments.iter().any(|a| a.target.is_oscillator())
    }
}

pub fn parse(src: &str) -> Result<SystemDescription, Diagnostic> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut desc = SystemDescription::default();
    let mut saw_theta = false;
    loop {
        match p.peek().tok.clone() {
            Tok::Eof => break,
            Tok::Newline => {
                p.pos += 1;
            }
            Tok::Ident(word) => {
                let span = p.peek().span;
                p.pos += 1;
                p.statement(&word, span, &mut desc, &mut saw_theta)?;
                p.end_of_line()?;
            }
            other => return Err(p.error_at(span_of(&p), format!("expected a statement, found {other}"))),
        }
    }
    Ok(desc)
}

/// Parse a single expression, e.g. the printed form of an operator polynomial.
pub fn parse_expr(src: &str) -> Result<Expr, Diagnostic> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.end_of_line()?;
    match p.peek().tok {
        Tok::Eof => Ok(e),
        ref other => Err(p.error_at(p.peek().span, format!("unexpected {other}"))),
    }
}

fn span_of(p: &Parser) -> Span {
    p.peek().span
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, span: Span, msg: String) -> Diagnostic {
        Diagnostic::new(DiagnosticKind::Syntax, span, msg)
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, Diagnostic> {
        let t = self.next();
        if t.tok == tok {
            Ok(t.span)
        } else {
            Err(self.error_at(t.span, format!("expected {tok}, found {}", t.tok)))
        }
    }

    fn end_of_line(&mut self) -> Result<(), Diagnostic> {
        match self.peek().tok {
            Tok::Newline => {
                self.pos += 1;
                Ok(())
            }
            Tok::Eof => Ok(()),
            ref other => Err(self.error_at(self.peek().span, format!("expected end of line, found {other}"))),
        }
    }

    fn ident(&mut self) -> Result<Ident, Diagnostic> {
        let t = self.next();
        match t.tok {
            Tok::Ident(name) => Ok(Ident { name, span: t.span }),
            other => Err(self.error_at(t.span, format!("expected identifier, found {other}"))),
        }
    }

    fn word(&mut self, choices: &[&str]) -> Result<(String, Span), Diagnostic> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(w) if choices.contains(&w.as_str()) => Ok((w.clone(), t.span)),
            other => Err(self.error_at(t.span, format!("expected one of {}, found {other}", choices.join(", ")))),
        }
    }

    fn integer(&mut self) -> Result<(usize, Span), Diagnostic> {
        let t = self.next();
        match &t.tok {
            Tok::Number(r) if r.is_integer() && !r.is_negative() => r
                .to_integer()
                .to_usize()
                .map(|v| (v, t.span))
                .ok_or_else(|| self.error_at(t.span, "integer too large".into())),
            other => Err(self.error_at(t.span, format!("expected a non-negative integer, found {other}"))),
        }
    }

    fn index(&mut self) -> Result<usize, Diagnostic> {
        self.expect(Tok::LBracket)?;
        let (i, span) = self.integer()?;
        self.expect(Tok::RBracket)?;
        if i == 0 {
            return Err(self.error_at(span, "indices start at 1".into()));
        }
        Ok(i)
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, Diagnostic> {
        let mut out = Vec::new();
        while !matches!(self.peek().tok, Tok::Newline | Tok::Eof) {
            out.push(self.ident()?);
            if self.peek().tok == Tok::Comma {
                self.pos += 1;
            }
        }
        Ok(out)
    }

    fn statement(
        &mut self,
        word: &str,
        span: Span,
        desc: &mut SystemDescription,
        saw_theta: &mut bool,
    ) -> Result<(), Diagnostic> {
        match word {
            "system" => {
                let name = self.ident()?;
                if desc.name.is_some() {
                    return Err(self.error_at(span, "duplicate `system` line".into()));
                }
                desc.name = Some(name.name);
            }
            "params" => desc.params.extend(self.ident_list()?),
            "modes" => desc.modes.extend(self.ident_list()?),
            "let" => {
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                desc.lets.push(LetDef { name, expr });
            }
            "channels" => {
                let (m, _) = self.integer()?;
                if desc.channels.is_some() {
                    return Err(self.error_at(span, "duplicate `channels` line".into()));
                }
                desc.channels = Some(m);
            }
            "theta" => {
                if *saw_theta {
                    return Err(self.error_at(span, "duplicate `theta` line".into()));
                }
                *saw_theta = true;
                desc.theta = self.theta(span)?;
            }
            "nbar" => {
                let t = self.next();
                desc.options.nbar = Some(match &t.tok {
                    Tok::Ident(w) if w == "literal" => NbarMode::Literal,
                    Tok::Ident(w) if w == "graded" => NbarMode::Graded,
                    Tok::Number(r) if r.is_integer() && r.is_positive() => {
                        NbarMode::Fixed(r.to_integer().to_u32().ok_or_else(|| self.error_at(t.span, "n̄ too large".into()))?)
                    }
                    other => {
                        return Err(self.error_at(t.span, format!("expected literal, graded or a positive integer, found {other}")))
                    }
                });
            }
            "theta_bar" => {
                let (w, _) = self.word(&["physical", "conjugate"])?;
                desc.options.theta_bar = Some(if w == "physical" {
                    ThetaBarConvention::Physical
                } else {
                    ThetaBarConvention::Conjugate
                });
            }
            "allow" => {
                self.word(&["multi_generator"])?;
                desc.options.allow_multi_generator = true;
            }
            "A" | "C" | "L" | "B" | "D" | "H" => {
                let target = match word {
                    "A" => Target::Drift(self.index()?),
                    "C" => Target::Output(self.index()?),
                    "L" => Target::Coupling(self.index()?),
                    "B" => {
                        let i = self.index()?;
                        Target::Diffusion(i, self.index()?)
                    }
                    "D" => {
                        let i = self.index()?;
                        Target::Feedthrough(i, self.index()?)
                    }
                    _ => Target::Hamiltonian,
                };
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                if desc.assignments.iter().any(|a| a.target == target) {
                    return Err(self.error_at(span, format!("{target} is assigned twice")));
                }
                desc.assignments.push(Assignment { target, expr, span });
            }
            other => return Err(self.error_at(span, format!("unknown statement `{other}`"))),
        }
        Ok(())
    }

    fn theta(&mut self, span: Span) -> Result<ThetaSpec, Diagnostic> {
        if let Tok::Ident(w) = &self.peek().tok {
            if w == "identity" {
                self.pos += 1;
                return Ok(ThetaSpec::Identity);
            }
        }
        self.expect(Tok::LBracket)?;
        let mut rows = vec![Vec::new()];
        if self.peek().tok == Tok::RBracket {
            self.pos += 1;
            return Ok(ThetaSpec::Matrix { rows: Vec::new(), span });
        }
        loop {
            rows.last_mut().expect("nonempty").push(self.expr()?);
            let t = self.next();
            match t.tok {
                Tok::Comma => {}
                Tok::Semi => rows.push(Vec::new()),
                Tok::RBracket => break,
                other => return Err(self.error_at(t.span, format!("expected `,`, `;` or `]`, found {other}"))),
            }
        }
        Ok(ThetaSpec::Matrix { rows, span })
    }

    pub fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.term()?;
        loop {
            let span = self.peek().span;
            let ctor = match self.peek().tok {
                Tok::Plus => ExprKind::Add,
                Tok::Minus => ExprKind::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::new(ctor(Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.unary()?;
        loop {
            let span = self.peek().span;
            let ctor = match self.peek().tok {
                Tok::Star => ExprKind::Mul,
                Tok::Slash => ExprKind::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::new(ctor(Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        if self.peek().tok == Tok::Minus {
            let span = self.next().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, Diagnostic> {
        let base = self.postfix()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let span = self.next().span;
        let (e, espan) = self.integer()?;
        let e = u32::try_from(e).map_err(|_| self.error_at(espan, "exponent too large".into()))?;
        if self.peek().tok == Tok::Caret {
            return Err(self.error_at(self.peek().span, "chained powers need parentheses".into()));
        }
        Ok(Expr::new(ExprKind::Pow(Box::new(base), e), span))
    }

    fn postfix(&mut self) -> Result<Expr, Diagnostic> {
        let mut e = self.atom()?;
        while self.peek().tok == Tok::Quote {
            let span = self.next().span;
            e = Expr::new(ExprKind::Adj(Box::new(e)), span);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        let t = self.next();
        match t.tok {
            Tok::Number(r) => Ok(Expr::new(ExprKind::Number(r), t.span)),
            Tok::Ident(name) if name == "i" => Ok(Expr::new(ExprKind::Imag, t.span)),
            Tok::Ident(name) if name == "adj" && self.peek().tok == Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::new(ExprKind::Adj(Box::new(inner)), t.span))
            }
            Tok::Ident(name) => Ok(Expr::new(ExprKind::Ident(name), t.span)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(self.error_at(t.span, format!("expected an expression, found {other}"))),
        }
    }
}

/// Canonical text of a description; `parse(&print(d)) == Ok(d)`.
pub fn print(desc: &SystemDescription) -> String {
    let mut out = String::new();
    let names = |v: &[Ident]| v.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(" ");
    if let Some(n) = &desc.name {
        let _ = writeln!(out, "system {n}");
    }
    if !desc.params.is_empty() {
        let _ = writeln!(out, "params {}", names(&desc.params));
    }
    for l in &desc.lets {
        let _ = writeln!(out, "let {} = {}", l.name.name, l.expr);
    }
    if !desc.modes.is_empty() {
        let _ = writeln!(out, "modes {}", names(&desc.modes));
    }
    if let Some(m) = desc.channels {
        let _ = writeln!(out, "channels {m}");
    }
    if let ThetaSpec::Matrix { rows, .. } = &desc.theta {
        let rows: Vec<String> = rows
            .iter()
            .map(|r| r.iter().map(Expr::to_string).collect::<Vec<_>>().join(", "))
            .collect();
        let _ = writeln!(out, "theta [{}]", rows.join("; "));
    }
    if let Some(m) = desc.options.nbar {
        let _ = writeln!(out, "nbar {m}");
    }
    if let Some(c) = desc.options.theta_bar {
        let _ = writeln!(out, "theta_bar {c}");
    }
    if desc.options.allow_multi_generator {
        let _ = writeln!(out, "allow multi_generator");
    }
    if !desc.assignments.is_empty() {
        out.push('\n');
    }
    for a in &desc.assignments {
        let _ = writeln!(out, "{} = {}", a.target, a.expr);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(src: &str) {
        let d = parse(src).unwrap();
        let printed = print(&d);
        assert_eq!(parse(&printed).unwrap(), d, "{printed}");
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-k1*a1 - 2*chi*a1'*a2").unwrap();
        assert_eq!(e.to_string(), "-k1*a1 - 2*chi*a1'*a2");
        let e = parse_expr("a - (b - c)").unwrap();
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = parse_expr("(a + b)'^2").unwrap();
        assert_eq!(e.to_string(), "(a + b)'^2");
        assert_eq!(parse_expr("adj(a1)").unwrap(), parse_expr("a1'").unwrap());
        assert_eq!(parse_expr("-a^2").unwrap().to_string(), "-a^2");
        assert_eq!(parse_expr("(-a)^2").unwrap().to_string(), "(-a)^2");
    }

    #[test]
    fn statements_round_trip() {
        roundtrip(
            "system s\nparams g, h\nlet k = g^2/2\nmodes a1 a2\nchannels 1\ntheta [1, 0; 0, 1]\nnbar 3\ntheta_bar conjugate\nallow multi_generator\nA[1] = -k*a1 + 0.5*i*a2'\nB[1][1] = -g\nH = 0\nL[1] = g*a1\n",
        );
        roundtrip("");
        roundtrip("modes a\nA[1] = a - (a - a) / (2 - 1)\n");
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse("modes a\nA[1] = a +\n").unwrap_err();
        assert_eq!((e.line, e.kind), (2, DiagnosticKind::Syntax));
        let e = parse("modes a\nA[0] = a\n").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse("modes a\nA[1] = a\nA[1] = a\n").unwrap_err();
        assert!(e.message.contains("twice"));
        assert!(parse("frobnicate x").is_err());
        assert!(parse("A[1] = a^2^2").is_err());
    }
}
