//! Turn a parsed description into algebra values.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::Span;
use super::syntax::{parse_expr, Assignment, Expr, ExprKind, Ident, Options, SystemDescription, Target, ThetaSpec};
use super::{Diagnostic, DiagnosticKind};
use crate::algebra::{default_names, CommutationMatrix, OpPoly};
use crate::matrix::{OpMatrix, OpVector, ScalarMatrix};
use crate::realize::{synthesize, Oscillator, RealizeError};
use crate::scalar::Scalar;
use crate::system::{NoiseModel, QSystem};

const RESERVED: [&str; 8] = ["i", "adj", "A", "B", "C", "D", "H", "L"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elaborated {
    pub name: String,
    pub mode_names: Vec<String>,
    pub system: QSystem,
    /// True when the system was produced from an `H`/`L` block.
    pub system_from_oscillator: bool,
    pub oscillator: Option<Oscillator>,
    pub options: Options,
}

fn semantic(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Semantic, span, msg.into())
}

enum Binding {
    Mode(usize),
    Param,
    Value(OpPoly),
}

struct Env {
    n: usize,
    theta: CommutationMatrix,
    names: BTreeMap<String, Binding>,
}

impl Env {
    fn declare(&mut self, id: &Ident, b: Binding) -> Result<(), Diagnostic> {
        if RESERVED.contains(&id.name.as_str()) {
            return Err(semantic(id.span, format!("`{}` is reserved", id.name)));
        }
        if self.names.contains_key(&id.name) {
            return Err(semantic(id.span, format!("`{}` is declared twice", id.name)));
        }
        self.names.insert(id.name.clone(), b);
        Ok(())
    }

    fn eval(&self, e: &Expr) -> Result<OpPoly, Diagnostic> {
        let n = self.n;
        let algebra = |r: Result<OpPoly, crate::algebra::AlgebraError>| r.map_err(|err| semantic(e.span, err.to_string()));
        Ok(match &e.kind {
            ExprKind::Number(r) => OpPoly::constant(n, Scalar::from_rational(r.clone())),
            ExprKind::Imag => OpPoly::constant(n, Scalar::i()),
            ExprKind::Ident(name) => match self.names.get(name) {
                Some(Binding::Mode(j)) => OpPoly::annihilator(n, *j),
                Some(Binding::Param) => OpPoly::constant(n, Scalar::param(name)),
                Some(Binding::Value(v)) => v.clone(),
                None => return Err(semantic(e.span, format!("undeclared identifier `{name}`"))),
            },
            ExprKind::Neg(x) => -self.eval(x)?,
            ExprKind::Add(l, r) => self.eval(l)? + self.eval(r)?,
            ExprKind::Sub(l, r) => self.eval(l)? - self.eval(r)?,
            ExprKind::Mul(l, r) => algebra(self.eval(l)?.product(&self.eval(r)?, &self.theta))?,
            ExprKind::Div(l, r) => {
                let den = self.eval(r)?;
                let s = den
                    .as_scalar()
                    .ok_or_else(|| semantic(r.span, "division by an operator"))?;
                let inv = s.inv().map_err(|_| semantic(r.span, "division by zero"))?;
                self.eval(l)?.scale(&inv)
            }
            ExprKind::Pow(b, k) => algebra(self.eval(b)?.pow(*k, &self.theta))?,
            ExprKind::Adj(x) => self.eval(x)?.adjoint(),
        })
    }

    fn scalar(&self, e: &Expr, what: &str) -> Result<Scalar, Diagnostic> {
        self.eval(e)?
            .as_scalar()
            .ok_or_else(|| semantic(e.span, format!("{what} must be a scalar")))
    }
}

fn check_index(a: &Assignment, i: usize, bound: usize, what: &str) -> Result<usize, Diagnostic> {
    if i > bound {
        return Err(semantic(
            a.span,
            format!("{} is out of range: there are {bound} {what}", a.target),
        ));
    }
    Ok(i - 1)
}

pub fn elaborate(desc: &SystemDescription) -> Result<Elaborated, Diagnostic> {
    let n = desc.modes.len();
    let m = desc.channels.unwrap_or(0);
    let mut env = Env {
        n,
        theta: CommutationMatrix::identity(n),
        names: BTreeMap::new(),
    };
    for p in &desc.params {
        env.declare(p, Binding::Param)?;
    }
    for (j, md) in desc.modes.iter().enumerate() {
        env.declare(md, Binding::Mode(j))?;
    }

    if let ThetaSpec::Matrix { rows, span } = &desc.theta {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(semantic(*span, format!("theta must be {n}x{n}")));
        }
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|e| env.scalar(e, "a theta entry")).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        env.theta = CommutationMatrix::new(ScalarMatrix::from_rows(entries)).map_err(|e| semantic(*span, e.to_string()))?;
    }

    for l in &desc.lets {
        let v = env.eval(&l.expr)?;
        env.declare(&l.name, Binding::Value(v))?;
    }

    let mut drift = vec![OpPoly::zero(n); n];
    let mut diffusion = OpMatrix::zeros(n, n, m);
    let mut output = vec![OpPoly::zero(n); m];
    let mut feedthrough: Option<ScalarMatrix> = None;
    let mut hamiltonian = OpPoly::zero(n);
    let mut ham_span = None;
    let mut coupling = vec![OpPoly::zero(n); m];
    let mut coupling_spans = vec![None; m];

    for a in &desc.assignments {
        let v = env.eval(&a.expr)?;
        match a.target {
            Target::Drift(i) => drift[check_index(a, i, n, "modes")?] = v,
            Target::Diffusion(i, j) => {
                let (i, j) = (check_index(a, i, n, "modes")?, check_index(a, j, m, "channels")?);
                diffusion.set(i, j, v);
            }
            Target::Output(i) => output[check_index(a, i, m, "channels")?] = v,
            Target::Feedthrough(i, j) => {
                let (i, j) = (check_index(a, i, m, "channels")?, check_index(a, j, m, "channels")?);
                let s = v
                    .as_scalar()
                    .ok_or_else(|| semantic(a.expr.span, format!("{} must be a scalar", a.target)))?;
                feedthrough.get_or_insert_with(|| ScalarMatrix::zeros(m, m)).set(i, j, s);
            }
            Target::Hamiltonian => {
                hamiltonian = v;
                ham_span = Some(a.span);
            }
            Target::Coupling(i) => {
                let k = check_index(a, i, m, "channels")?;
                coupling[k] = v;
                coupling_spans[k] = Some(a.span);
            }
        }
    }

    let oscillator = if desc.has_oscillator_block() {
        let l = OpVector::new(n, coupling).expect("mode counts agree");
        match Oscillator::new(env.theta.clone(), hamiltonian, l) {
            Ok(o) => Some(o),
            Err(RealizeError::NotSelfAdjoint) => {
                return Err(semantic(ham_span.unwrap_or_default(), "H must be self-adjoint"))
            }
            Err(RealizeError::CouplingNotAnnihilationOnly(k)) => {
                return Err(semantic(
                    coupling_spans[k].unwrap_or_default(),
                    format!("L[{}] must contain only annihilation operators", k + 1),
                ))
            }
            Err(e) => return Err(semantic(Span::new(1, 1), e.to_string())),
        }
    } else {
        None
    };

    let from_osc = !desc.has_system_block() && oscillator.is_some();
    let system = match (&oscillator, from_osc) {
        (Some(osc), true) => synthesize(osc).map_err(|e| semantic(Span::new(1, 1), e.to_string()))?,
        _ => QSystem::new(
            env.theta.clone(),
            OpVector::new(n, drift).expect("mode counts agree"),
            diffusion,
            OpVector::new(n, output).expect("mode counts agree"),
            feedthrough.unwrap_or_else(|| ScalarMatrix::identity(m)),
            NoiseModel::canonical(m),
        )
        .map_err(|e| semantic(Span::new(1, 1), e.to_string()))?,
    };

    Ok(Elaborated {
        name: desc.display_name().to_string(),
        mode_names: desc.modes.iter().map(|i| i.name.clone()).collect(),
        system,
        system_from_oscillator: from_osc,
        oscillator,
        options: desc.options,
    })
}

fn expr_of(text: &str) -> Expr {
    parse_expr(text).expect("printed operator polynomials reparse")
}

fn ident(name: &str) -> Ident {
    Ident {
        name: name.to_string(),
        span: Span::default(),
    }
}

/// Describe a system in `.qs` form, using `mode_names` for the generators.
pub fn describe(name: &str, mode_names: &[String], s: &QSystem) -> SystemDescription {
    let n = s.modes();
    let m = s.channels();
    let names = if mode_names.len() == n { mode_names.to_vec() } else { default_names(n) };
    let mut params = BTreeSet::new();
    let mut collect = |p: &OpPoly| {
        for (_, c) in p.terms() {
            params.extend(c.params().into_iter().map(|p| p.name().to_string()));
        }
    };
    s.drift().iter().for_each(&mut collect);
    s.diffusion().entries().for_each(&mut collect);
    s.output().iter().for_each(&mut collect);
    for r in 0..m {
        for c in 0..m {
            collect(&OpPoly::constant(n, s.feedthrough().get(r, c).clone()));
        }
    }
    for r in 0..n {
        for c in 0..n {
            collect(&OpPoly::constant(n, s.theta().get(r, c).clone()));
        }
    }

    let mut assignments = Vec::new();
    let mut push = |target: Target, p: &OpPoly| {
        if !p.is_zero() {
            assignments.push(Assignment {
                target,
                expr: expr_of(&p.to_text(&names)),
                span: Span::default(),
            });
        }
    };
    for (i, p) in s.drift().iter().enumerate() {
        push(Target::Drift(i + 1), p);
    }
    for i in 0..n {
        for j in 0..m {
            push(Target::Diffusion(i + 1, j + 1), s.diffusion().get(i, j));
        }
    }
    for (i, p) in s.output().iter().enumerate() {
        push(Target::Output(i + 1), p);
    }
    if s.feedthrough() != &ScalarMatrix::identity(m) {
        for i in 0..m {
            for j in 0..m {
                push(Target::Feedthrough(i + 1, j + 1), &OpPoly::constant(n, s.feedthrough().get(i, j).clone()));
            }
        }
    }
    let theta = if s.theta().is_identity() {
        ThetaSpec::Identity
    } else {
        ThetaSpec::Matrix {
            rows: (0..n)
                .map(|r| (0..n).map(|c| expr_of(&s.theta().get(r, c).to_string())).collect())
                .collect(),
            span: Span::default(),
        }
    };
    SystemDescription {
        name: Some(name.to_string()),
        params: params.iter().map(|p| ident(p)).collect(),
        lets: Vec::new(),
        modes: names.iter().map(|p| ident(p)).collect(),
        channels: Some(m),
        theta,
        options: Options::default(),
        assignments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::syntax::{parse, print};

    const CAVITY: &str = "system cavity\nparams g\nmodes a1\nchannels 1\nH = 0\nL[1] = g*a1\n";

    #[test]
    fn opo_line_elaborates() {
        let d = parse("params k1 chi\nmodes a1 a2\nA[1] = -k1*a1 - 2*chi*a1'*a2\n").unwrap();
        let e = elaborate(&d).unwrap();
        assert_eq!(
            e.system.drift().get(0).to_text(&e.mode_names),
            "(-2*chi) * a1' * a2 + (-k1) * a1"
        );
    }

    #[test]
    fn undeclared_identifier() {
        let d = parse("modes a1 a2\nA[1] = a3\n").unwrap();
        let err = elaborate(&d).unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Semantic);
        assert_eq!((err.line, err.col), (2, 8));
        assert!(err.message.contains("a3"));
    }

    #[test]
    fn shape_and_scalar_errors() {
        let e = elaborate(&parse("modes a\nchannels 1\nA[2] = a\n").unwrap()).unwrap_err();
        assert!(e.message.contains("out of range"));
        let e = elaborate(&parse("modes a\nchannels 1\nD[1][1] = a\n").unwrap()).unwrap_err();
        assert!(e.message.contains("scalar"));
        let e = elaborate(&parse("modes a\nA[1] = a/a\n").unwrap()).unwrap_err();
        assert!(e.message.contains("operator"));
        let e = elaborate(&parse("params i\n").unwrap()).unwrap_err();
        assert!(e.message.contains("reserved"));
        let e = elaborate(&parse("modes a\ntheta [i]\n").unwrap()).unwrap_err();
        assert!(e.message.contains("Hermitian") || e.message.contains("hermitian"), "{e}");
    }

    #[test]
    fn oscillator_block_synthesizes() {
        let e = elaborate(&parse(CAVITY).unwrap()).unwrap();
        assert!(e.system_from_oscillator);
        let names = &e.mode_names;
        assert_eq!(e.system.drift().get(0).to_text(names), "(-1/2*g^2) * a1");
        assert_eq!(e.system.diffusion().get(0, 0).to_text(names), "(-g)");
        assert_eq!(e.system.output().get(0).to_text(names), "(g) * a1");
        let e = elaborate(&parse("modes a\nchannels 1\nL[1] = a'\n").unwrap()).unwrap_err();
        assert!(e.message.contains("annihilation"));
        let e = elaborate(&parse("modes a\nH = a\n").unwrap()).unwrap_err();
        assert!(e.message.contains("self-adjoint"));
    }

    #[test]
    fn describe_round_trips() {
        let e = elaborate(&parse(CAVITY).unwrap()).unwrap();
        let d = describe("cavity", &e.mode_names, &e.system);
        let text = print(&d);
        let again = elaborate(&parse(&text).unwrap()).unwrap();
        assert_eq!(again.system, e.system, "{text}");
    }
}
