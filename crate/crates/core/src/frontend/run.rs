//! Command dispatch for `check`, `extract`, `synthesize` and `explain`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::elaborate::{describe, elaborate};
use super::lexer::Span;
use super::report::{OracleCheck, OracleSection, Report};
use super::syntax::{parse, print, SystemDescription};
use super::{Diagnostic, DiagnosticKind};
use crate::algebra::OpPoly;
use crate::matrix::OpVector;
use crate::fock::{Agreement, ExactComplex, FockError, SparseMatrix, TruncatedRep};
use crate::realize::{analyze, generator_target, synthesize, Verdict};
use crate::scalar::Param;
use crate::system::{double_up_with, ClassOptions, DoubledSystem, NbarMode, ThetaBarConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Extract,
    Synthesize,
    Explain,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "check" => Ok(Command::Check),
            "extract" => Ok(Command::Extract),
            "synthesize" => Ok(Command::Synthesize),
            "explain" => Ok(Command::Explain),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Check => "check",
            Command::Extract => "extract",
            Command::Synthesize => "synthesize",
            Command::Explain => "explain",
        })
    }
}

/// Command-line overrides; `None` defers to the description's own options.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunFlags {
    pub nbar: Option<NbarMode>,
    pub theta_bar: Option<ThetaBarConvention>,
    pub oracle_cutoff: Option<u32>,
    pub params: BTreeMap<Param, BigRational>,
}

pub fn parse_nbar(s: &str) -> Result<NbarMode, String> {
    match s {
        "literal" => Ok(NbarMode::Literal),
        "graded" => Ok(NbarMode::Graded),
        other => match other.parse::<u32>() {
            Ok(k) if k > 0 => Ok(NbarMode::Fixed(k)),
            _ => Err(format!("n̄ must be `literal`, `graded` or a positive integer, not `{other}`")),
        },
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let q = parse_rational(q)?;
        return (q != BigRational::from_integer(0.into())).then(|| parse_rational(p).map(|p| p / q))?;
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let r = BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    Some(if neg { -r } else { r })
}

pub type ParamAssignment = BTreeMap<Param, BigRational>;

/// `name=value` pairs separated by commas; values are exact decimals or fractions.
pub fn parse_params(s: &str) -> Result<ParamAssignment, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, found `{part}`"))?;
        let v = parse_rational(value).ok_or_else(|| format!("`{value}` is not a rational number"))?;
        out.insert(Param::new(name.trim()), v);
    }
    Ok(out)
}

pub fn run_source(command: Command, src: &str, flags: &RunFlags) -> Report {
    match parse(src) {
        Ok(desc) => run(command, &desc, flags),
        Err(d) => Report::failure(&command.to_string(), "unnamed", d),
    }
}

pub fn run(command: Command, desc: &SystemDescription, flags: &RunFlags) -> Report {
    let cmd = command.to_string();
    let name = desc.display_name();
    let elab = match elaborate(desc) {
        Ok(e) => e,
        Err(d) => return Report::failure(&cmd, name, d),
    };
    let opts = ClassOptions {
        nbar: flags.nbar.or(elab.options.nbar).unwrap_or_default(),
        convention: flags.theta_bar.or(elab.options.theta_bar).unwrap_or_default(),
        allow_multi_generator: elab.options.allow_multi_generator,
    };
    let semantic = |msg: String| Diagnostic::new(DiagnosticKind::Semantic, Span::new(1, 1), msg);

    let mut report = Report::empty(&cmd, name);
    let system = if command == Command::Synthesize {
        let Some(osc) = &elab.oscillator else {
            return Report::failure(&cmd, name, semantic("synthesize needs an `H`/`L[j]` block".into()));
        };
        match synthesize(osc) {
            Ok(s) => {
                report.synthesized = Some(print(&describe(&elab.name, &elab.mode_names, &s)));
                s
            }
            Err(e) => return Report::failure(&cmd, name, semantic(e.to_string())),
        }
    } else {
        elab.system.clone()
    };

    let analysis = match analyze(&system, opts) {
        Ok(a) => a,
        Err(e) => return Report::failure(&cmd, name, semantic(e.to_string())),
    };
    report = report.with_analysis(&analysis, &elab.mode_names, command == Command::Explain);

    report.exit_code = match command {
        Command::Synthesize => 0,
        Command::Extract => i32::from(analysis.hamiltonian().is_none() || !analysis.extraction.reproduction.pass),
        Command::Check | Command::Explain => i32::from(analysis.verdict != Verdict::Realizable),
    };

    if let Some(cutoff) = flags.oracle_cutoff {
        let d = double_up_with(&system, opts.convention);
        let target = generator_target(&d).expect("analysis already evaluated this");
        match oracle(&d, &analysis.extraction.hamiltonian, &target, cutoff, &flags.params) {
            Ok(section) => {
                if !section.pass() && report.exit_code == 0 {
                    report.exit_code = 1;
                }
                report.oracle = Some(section);
            }
            Err(e) => {
                report.exit_code = 2;
                report
                    .diagnostics
                    .push(Diagnostic::new(DiagnosticKind::Oracle, Span::new(1, 1), e.to_string()));
            }
        }
    }
    report
}

fn merge(check: &mut OracleCheck, a: Agreement) {
    check.agree &= a.agree;
    check.max_error = check.max_error.max(a.max_error);
    check.checked += a.checked;
}

fn new_check(name: &str) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        agree: true,
        max_error: 0.0,
        checked: 0,
    }
}

fn reach(p: &OpPoly) -> u32 {
    p.degree().unwrap_or(0)
}

/// Re-derive the key identities from truncated matrices with exact arithmetic.
#[allow(clippy::needless_range_loop)]
fn oracle(
    d: &DoubledSystem,
    h: &OpPoly,
    target: &OpVector,
    cutoff: u32,
    sigma: &BTreeMap<Param, BigRational>,
) -> Result<OracleSection, FockError> {
    type M = SparseMatrix<ExactComplex>;
    let rep = TruncatedRep::new(d.theta(), cutoff)?;
    let r = |p: &OpPoly| rep.represent::<ExactComplex>(p, sigma);
    let n2 = d.state().len();
    let m2 = d.output().len();
    let state: Vec<M> = d.state().iter().map(r).collect::<Result<_, _>>()?;
    let state_adj: Vec<M> = state.iter().map(|x| rep.adjoint(x)).collect();

    let mut ccr = new_check("oracle.ccr");
    let theta_bar = ThetaBarConvention::Physical.double(d.theta().matrix());
    for j in 0..n2 {
        for k in 0..n2 {
            let expect = r(&OpPoly::constant(d.modes(), theta_bar.get(j, k).clone()))?;
            merge(&mut ccr, rep.compare(&state[j].commutator(&state_adj[k]), &expect, 2, 0.0)?);
        }
    }

    let mut generator = new_check("oracle.generator_identity");
    let rh = r(h)?;
    let minus_i = r(&OpPoly::constant(d.modes(), -crate::scalar::Scalar::i()))?;
    for j in 0..n2 {
        let lhs = minus_i.matmul(&state[j].commutator(&rh));
        merge(&mut generator, rep.compare(&r(target.get(j))?, &lhs, reach(h).min(1), 0.0)?);
    }

    // B̄ = [C̄†, ā]J̄, entry (j, k) = [C̄_k*, ā_j] J̄_kk
    let mut coupling = new_check("oracle.coupling");
    let c_adj: Vec<M> = d.output().iter().map(|c| r(&c.adjoint())).collect::<Result<_, _>>()?;
    for j in 0..n2 {
        for k in 0..m2 {
            let mut rhs = c_adj[k].commutator(&state[j]);
            if k >= m2 / 2 {
                rhs = rhs.scale(&-ExactComplex::from(BigRational::from_integer(1.into())));
            }
            let g = reach(d.output().get(k)).min(1);
            merge(&mut coupling, rep.compare(&r(d.diffusion().get(j, k))?, &rhs, g, 0.0)?);
        }
    }

    // [Ā, ā†] + [ā, Ā†] + B̄J̄B̄† = 0
    let mut preservation = new_check("oracle.preservation");
    let drift: Vec<M> = d.drift().iter().map(r).collect::<Result<_, _>>()?;
    let diff: Vec<Vec<M>> = (0..n2)
        .map(|j| (0..m2).map(|k| r(d.diffusion().get(j, k))).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let zero = M::zeros(rep.dim());
    let deg_b = d.diffusion().entries().map(reach).max().unwrap_or(0);
    for j in 0..n2 {
        for k in 0..n2 {
            let mut acc = drift[j].commutator(&state_adj[k]).add(&state[j].commutator(&rep.adjoint(&drift[k])));
            for l in 0..m2 {
                let term = diff[j][l].matmul(&rep.adjoint(&diff[k][l]));
                acc = if l < m2 / 2 { acc.add(&term) } else { acc.sub(&term) };
            }
            let g = deg_b.max(1);
            merge(&mut preservation, rep.compare(&acc, &zero, g, 0.0)?);
        }
    }

    Ok(OracleSection {
        cutoff,
        exact: true,
        tolerance: 0.0,
        checks: vec![ccr, generator, coupling, preservation],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_exactly() {
        let p = parse_params("b1=1.5, chi=-0.25,k=1/3").unwrap();
        assert_eq!(p[&Param::new("b1")], BigRational::new(3.into(), 2.into()));
        assert_eq!(p[&Param::new("chi")], BigRational::new((-1).into(), 4.into()));
        assert_eq!(p[&Param::new("k")], BigRational::new(1.into(), 3.into()));
        assert!(parse_params("x").is_err());
        assert!(parse_params("x=abc").is_err());
        assert!(parse_params("x=1/0").is_err());
    }

    #[test]
    fn nbar_flag() {
        assert_eq!(parse_nbar("3"), Ok(NbarMode::Fixed(3)));
        assert_eq!(parse_nbar("graded"), Ok(NbarMode::Graded));
        assert!(parse_nbar("0").is_err());
    }

    #[test]
    fn parse_failure_exit_two() {
        let r = run_source(Command::Check, "modes a\nA[1] = a3\n", &RunFlags::default());
        assert_eq!(r.exit_code, 2);
        assert_eq!(r.diagnostics[0].line, 2);
    }

    #[test]
    fn cavity_check_with_oracle() {
        let src = "system cavity\nparams g\nmodes a\nchannels 1\nA[1] = -g^2/2*a\nB[1][1] = -g\nC[1] = g*a\n";
        let flags = RunFlags {
            oracle_cutoff: Some(6),
            params: parse_params("g=0.7").unwrap(),
            ..RunFlags::default()
        };
        let r = run_source(Command::Check, src, &flags);
        assert_eq!(r.exit_code, 0, "{r:#?}");
        assert_eq!(r.verdict, Some(Verdict::Realizable));
        let o = r.oracle.unwrap();
        assert!(o.pass());
        assert!(o.checks.iter().all(|c| c.checked > 0));
        let missing = run_source(Command::Check, src, &RunFlags { params: BTreeMap::new(), ..flags });
        assert_eq!(missing.exit_code, 2);
    }
}
