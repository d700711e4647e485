//! Commutation preservation, physical realizability, and the extraction of
//! an equivalent open oscillator `(H, L)`; plus the reverse synthesis.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, CommutationMatrix, OpPoly};
use crate::matrix::{
    comm_adj_vec, comm_mat_adj, comm_vec_adj, comm_vec_mat_adj, quad_form, MatrixError, OpMatrix,
    OpVector, ScalarMatrix,
};
use crate::scalar::Scalar;
use crate::system::{
    class_check, double_up_with, ClassOptions, ClassReport, DoubledSystem, NoiseModel, QSystem,
    SystemError, ThetaBarConvention,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("Θ̄ is singular")]
    SingularThetaBar,
    #[error("Hamiltonian is not self-adjoint")]
    NotSelfAdjoint,
    #[error("coupling L[{0}] contains creation operators")]
    CouplingNotAnnihilationOnly(usize),
    #[error("n̄ must be positive")]
    ZeroNbar,
    #[error(transparent)]
    Matrix(MatrixError),
    #[error(transparent)]
    System(#[from] SystemError),
}

impl From<MatrixError> for RealizeError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Singular => RealizeError::SingularThetaBar,
            other => RealizeError::Matrix(other),
        }
    }
}

impl From<AlgebraError> for RealizeError {
    fn from(e: AlgebraError) -> Self {
        RealizeError::Matrix(e.into())
    }
}

/// One matrix condition `residual = 0`, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionResidual {
    pub name: String,
    pub label: String,
    pub residual: OpMatrix,
    pub pass: bool,
}

impl ConditionResidual {
    pub fn new(name: &str, label: &str, residual: OpMatrix) -> Self {
        ConditionResidual {
            name: name.to_string(),
            label: label.to_string(),
            pass: residual.is_zero(),
            residual,
        }
    }

    pub fn from_vector(name: &str, label: &str, v: OpVector) -> Self {
        ConditionResidual::new(name, label, v.to_column())
    }

    /// `(row, col, entry)` for each nonzero residual entry.
    pub fn nonzero(&self) -> Vec<(usize, usize, &OpPoly)> {
        let mut out = Vec::new();
        for r in 0..self.residual.rows() {
            for c in 0..self.residual.cols() {
                let e = self.residual.get(r, c);
                if !e.is_zero() {
                    out.push((r, c, e));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "nbar")]
pub enum ExtractionMode {
    /// `H̄ = (i/2n̄)(ā†Θ̄⁻¹Ā − Ā†Θ̄⁻¹ā)` with one n̄ for every degree.
    Literal(u32),
    /// Degree-by-degree solve of `−i[ā, H̄] = Ā − ½B̄C̄`.
    Graded,
}

impl fmt::Display for ExtractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractionMode::Literal(n) => write!(f, "literal (n̄ = {n})"),
            ExtractionMode::Graded => f.write_str("graded"),
        }
    }
}

fn theta_bar_inverse(d: &DoubledSystem) -> Result<ScalarMatrix, RealizeError> {
    Ok(d.theta_bar().inverse()?)
}

/// `ā†Θ̄⁻¹v − v†Θ̄⁻¹ā`.
pub fn hamiltonian_form(d: &DoubledSystem, v: &OpVector) -> Result<OpPoly, RealizeError> {
    let inv = theta_bar_inverse(d)?;
    let theta = d.theta();
    let left = quad_form(d.state(), &inv, v, theta)?;
    let right = quad_form(v, &inv, d.state(), theta)?;
    Ok(left.try_sub(&right)?)
}

/// `Ā − ½B̄C̄`, the part of the drift a Hamiltonian must generate.
pub fn generator_target(d: &DoubledSystem) -> Result<OpVector, RealizeError> {
    let bc = d.diffusion().mul_vec(d.output(), d.theta())?;
    Ok(d.drift().sub(&bc.scale(&Scalar::ratio(1, 2)))?)
}

/// `−i[ā, H]`, entrywise.
pub fn hamiltonian_generator(d: &DoubledSystem, h: &OpPoly) -> Result<OpVector, RealizeError> {
    let minus_i = -Scalar::i();
    Ok(d.state().commutator_with(h, d.theta())?.scale(&minus_i))
}

/// The two sides of the generator identity under a fixed n̄:
/// `(1/2n̄)[Ā†Θ̄⁻¹ā, ā]` and `(1/2n̄)[ā†Θ̄⁻¹Ā, ā]`.
pub fn generator_identity_terms(
    d: &DoubledSystem,
    nbar: u32,
) -> Result<(OpVector, OpVector), RealizeError> {
    if nbar == 0 {
        return Err(RealizeError::ZeroNbar);
    }
    let inv = theta_bar_inverse(d)?;
    let theta = d.theta();
    let k = Scalar::ratio(1, 2 * i64::from(nbar));
    let p = quad_form(d.drift(), &inv, d.state(), theta)?;
    let q = quad_form(d.state(), &inv, d.drift(), theta)?;
    // [P, ā_j] = −[ā_j, P]
    let lhs = d.state().commutator_with(&p, theta)?.scale(&-k.clone());
    let rhs = d.state().commutator_with(&q, theta)?.scale(&-k);
    Ok((lhs, rhs))
}

/// Residual of the generator identity. A literal n̄ evaluates the identity as
/// written; graded mode checks that the extracted Hamiltonian generates `Ā − ½B̄C̄`.
pub fn generator_identity_residual(
    d: &DoubledSystem,
    mode: ExtractionMode,
) -> Result<ConditionResidual, RealizeError> {
    let target = generator_target(d)?;
    match mode {
        ExtractionMode::Literal(n) => {
            let (lhs, rhs) = generator_identity_terms(d, n)?;
            let r = lhs.sub(&rhs)?.sub(&target)?;
            Ok(ConditionResidual::from_vector(
                "class.generator_identity",
                "(1/2n̄)([Ā†Θ̄⁻¹ā, ā] − [ā†Θ̄⁻¹Ā, ā]) − (Ā − ½B̄C̄)",
                r,
            ))
        }
        ExtractionMode::Graded => {
            let h = extract_graded(d)?;
            let r = hamiltonian_generator(d, &h)?.sub(&target)?;
            Ok(ConditionResidual::from_vector(
                "class.generator_identity",
                "−i[ā, H̄] − (Ā − ½B̄C̄)",
                r,
            ))
        }
    }
}

/// Evaluate the three commutation-preservation conditions with the system's T̄.
pub fn check_preservation(d: &DoubledSystem) -> Result<Vec<ConditionResidual>, RealizeError> {
    let theta = d.theta();
    let state = d.state();
    let b = d.diffusion();
    let t = d.noise_commutation().to_op(d.modes());
    let drift_terms = comm_vec_adj(d.drift(), state, theta)?.add(&comm_vec_adj(state, d.drift(), theta)?)?;
    let noise_term = b.matmul(&t, theta)?.matmul(&b.adjoint(), theta)?;
    Ok(vec![
        ConditionResidual::new(
            "preservation.drift",
            "[Ā, ā†] + [ā, Ā†] + B̄T̄B̄†",
            drift_terms.add(&noise_term)?,
        ),
        ConditionResidual::new("preservation.diffusion_left", "[B̄, ā†]", comm_mat_adj(b, state, theta)?),
        ConditionResidual::new("preservation.diffusion_right", "[ā, B̄†]", comm_vec_mat_adj(state, b, theta)?),
    ])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalCheck {
    /// Whether the noise commutation doubles to `J̄`, i.e. `T = I`.
    pub premise: bool,
    pub conditions: Vec<ConditionResidual>,
}

impl PhysicalCheck {
    pub fn pass(&self) -> bool {
        self.premise && self.conditions.iter().all(|c| c.pass)
    }
}

/// The five realizability conditions, with `J̄` substituted for `T̄`.
pub fn check_physical_realizability(d: &DoubledSystem) -> Result<PhysicalCheck, RealizeError> {
    let j = d.signature().clone();
    let premise = ThetaBarConvention::Physical.double(&d.base().noise().commutation) == j;
    let canonical = d.clone().with_noise_commutation(j.clone())?;
    let mut conditions = check_preservation(&canonical)?;
    for (c, n) in conditions.iter_mut().zip(["realizability.drift", "realizability.diffusion_left", "realizability.diffusion_right"]) {
        c.name = n.to_string();
        c.label = c.label.replace('T', "J");
    }
    let theta = d.theta();
    let cj = comm_adj_vec(d.output(), d.state(), theta)?.matmul(&j.to_op(d.modes()), theta)?;
    conditions.push(ConditionResidual::new(
        "realizability.coupling",
        "B̄ − [C̄†, ā]J̄",
        d.diffusion().sub(&cj)?,
    ));
    let dd = d.feedthrough().to_op(d.modes());
    let id = OpMatrix::identity(d.modes(), dd.rows());
    conditions.push(ConditionResidual::new("realizability.feedthrough", "D̄ − I", dd.sub(&id)?));
    Ok(PhysicalCheck { premise, conditions })
}

fn extract_literal(d: &DoubledSystem, nbar: u32) -> Result<OpPoly, RealizeError> {
    if nbar == 0 {
        return Err(RealizeError::ZeroNbar);
    }
    let x = hamiltonian_form(d, d.drift())?;
    Ok(x.scale(&(Scalar::i() * Scalar::ratio(1, 2 * i64::from(nbar)))))
}

/// `(i/2)(ā†Θ̄⁻¹g − g†Θ̄⁻¹ā)` with `g = −i[ā, K]`.
fn form_image(d: &DoubledSystem, k: &OpPoly) -> Result<OpPoly, RealizeError> {
    let g = hamiltonian_generator(d, k)?;
    Ok(hamiltonian_form(d, &g)?.scale(&(Scalar::i() * Scalar::ratio(1, 2))))
}

/// Solve `(i/2)X[−i[ā, H]] = (i/2)X[Ā − ½B̄C̄]` from the top degree down.
/// A homogeneous `K` of degree `d` maps to `d·K` plus lower-degree terms, so
/// each step fixes one degree. Stops early if the top degree fails to cancel.
fn extract_graded(d: &DoubledSystem) -> Result<OpPoly, RealizeError> {
    let target = generator_target(d)?;
    let y = hamiltonian_form(d, &target)?.scale(&(Scalar::i() * Scalar::ratio(1, 2)));
    let mut rest = y.without_constant();
    let mut h = OpPoly::zero(d.modes());
    while let Some(deg) = rest.degree() {
        if deg == 0 {
            break;
        }
        let hd = rest.homogeneous(deg).scale(&Scalar::ratio(1, i64::from(deg)));
        let next = rest.try_sub(&form_image(d, &hd)?)?.without_constant();
        h = h.try_add(&hd)?;
        if !next.homogeneous(deg).is_zero() {
            break;
        }
        rest = next;
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub mode: ExtractionMode,
    pub hamiltonian: OpPoly,
    pub self_adjoint: bool,
    /// Set when the realizability conditions failed; `H̄` is then diagnostic only.
    pub advisory: bool,
    /// `−i[ā, H̄] − (Ā − ½B̄C̄)`
    pub reproduction: ConditionResidual,
}

pub fn extract_hamiltonian(d: &DoubledSystem, mode: ExtractionMode) -> Result<Extraction, RealizeError> {
    let h = match mode {
        ExtractionMode::Literal(n) => extract_literal(d, n)?,
        ExtractionMode::Graded => extract_graded(d)?,
    };
    let r = hamiltonian_generator(d, &h)?.sub(&generator_target(d)?)?;
    Ok(Extraction {
        mode,
        self_adjoint: h.is_self_adjoint(),
        advisory: false,
        hamiltonian: h,
        reproduction: ConditionResidual::from_vector("extraction.reproduction", "−i[ā, H̄] − (Ā − ½B̄C̄)", r),
    })
}

/// `L̄ = C̄`.
pub fn extract_coupling(d: &DoubledSystem) -> OpVector {
    d.output().clone()
}

/// An open oscillator: self-adjoint `H` and annihilation-only couplings `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oscillator {
    theta: CommutationMatrix,
    hamiltonian: OpPoly,
    coupling: OpVector,
}

impl Oscillator {
    pub fn new(theta: CommutationMatrix, hamiltonian: OpPoly, coupling: OpVector) -> Result<Self, RealizeError> {
        let n = theta.modes();
        if hamiltonian.modes() != n || coupling.modes() != n {
            return Err(RealizeError::Matrix(
                AlgebraError::ModeMismatch {
                    left: n,
                    right: if hamiltonian.modes() != n { hamiltonian.modes() } else { coupling.modes() },
                }
                .into(),
            ));
        }
        if !hamiltonian.is_self_adjoint() {
            return Err(RealizeError::NotSelfAdjoint);
        }
        if let Some(k) = coupling.iter().position(|l| !l.is_annihilation_only()) {
            return Err(RealizeError::CouplingNotAnnihilationOnly(k));
        }
        Ok(Oscillator {
            theta,
            hamiltonian,
            coupling,
        })
    }

    pub fn theta(&self) -> &CommutationMatrix {
        &self.theta
    }

    pub fn hamiltonian(&self) -> &OpPoly {
        &self.hamiltonian
    }

    pub fn coupling(&self) -> &OpVector {
        &self.coupling
    }
}

/// `A = ½[L†, a]L − i[a, H]`, `B = [L†, a]`, `C = L`, `D = I`, canonical noise.
pub fn synthesize(osc: &Oscillator) -> Result<QSystem, RealizeError> {
    let theta = &osc.theta;
    let n = theta.modes();
    let m = osc.coupling.len();
    let a = OpVector::annihilators(n);
    let b = comm_adj_vec(&osc.coupling, &a, theta)?;
    let half_bl = b.mul_vec(&osc.coupling, theta)?.scale(&Scalar::ratio(1, 2));
    let ham = a.commutator_with(&osc.hamiltonian, theta)?.scale(&-Scalar::i());
    let drift = half_bl.add(&ham)?;
    Ok(QSystem::new(
        theta.clone(),
        drift,
        b,
        osc.coupling.clone(),
        ScalarMatrix::identity(m),
        NoiseModel::canonical(m),
    )?)
}

/// Residuals of `Ā = ½[L̄†, ā]J̄L̄ + i[H̄, ā]`, `B̄ = [L̄†, ā]J̄`, `C̄ = L̄`, `D̄ = I`.
pub fn verify_oscillator_representation(
    h: &OpPoly,
    lbar: &OpVector,
    d: &DoubledSystem,
) -> Result<Vec<ConditionResidual>, RealizeError> {
    let theta = d.theta();
    let j = d.signature().to_op(d.modes());
    let lj = comm_adj_vec(lbar, d.state(), theta)?.matmul(&j, theta)?;
    let drift = lj
        .mul_vec(lbar, theta)?
        .scale(&Scalar::ratio(1, 2))
        .add(&hamiltonian_generator(d, h)?)?;
    let dd = d.feedthrough().to_op(d.modes());
    Ok(vec![
        ConditionResidual::from_vector("oscillator.drift", "Ā − ½[L̄†, ā]J̄L̄ − i[H̄, ā]", d.drift().sub(&drift)?),
        ConditionResidual::new("oscillator.diffusion", "B̄ − [L̄†, ā]J̄", d.diffusion().sub(&lj)?),
        ConditionResidual::from_vector("oscillator.output", "C̄ − L̄", d.output().sub(lbar)?),
        ConditionResidual::new(
            "oscillator.feedthrough",
            "D̄ − I",
            dd.sub(&OpMatrix::identity(d.modes(), dd.rows()))?,
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Realizable,
    NotRealizable,
    OutsideClass,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Realizable => "realizable",
            Verdict::NotRealizable => "not realizable",
            Verdict::OutsideClass => "outside the admissible class",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizabilityReport {
    pub convention: ThetaBarConvention,
    pub class: ClassReport,
    pub preservation: Vec<ConditionResidual>,
    pub realizability: PhysicalCheck,
    pub extraction: Extraction,
    pub coupling: OpVector,
    pub oscillator: Vec<ConditionResidual>,
    pub nbar_graded: BTreeSet<u32>,
    pub verdict: Verdict,
}

impl RealizabilityReport {
    /// `H̄`, present only when every realizability condition holds.
    pub fn hamiltonian(&self) -> Option<&OpPoly> {
        (!self.extraction.advisory).then_some(&self.extraction.hamiltonian)
    }

    /// `L̄`, present only when every realizability condition holds.
    pub fn coupling(&self) -> Option<&OpVector> {
        (!self.extraction.advisory).then_some(&self.coupling)
    }

    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Realizable
    }
}

/// Run every stage, regardless of earlier failures.
pub fn analyze(s: &QSystem, opts: ClassOptions) -> Result<RealizabilityReport, RealizeError> {
    let class = class_check(s, opts)?;
    let d = double_up_with(s, opts.convention);
    let preservation = check_preservation(&d)?;
    let realizability = check_physical_realizability(&d)?;
    let mut extraction = extract_hamiltonian(&d, class.extraction_mode)?;
    extraction.advisory = !realizability.pass();
    let coupling = extract_coupling(&d);
    let oscillator = verify_oscillator_representation(&extraction.hamiltonian, &coupling, &d)?;
    let verdict = if !realizability.pass() {
        Verdict::NotRealizable
    } else if class.pass() && extraction.reproduction.pass && extraction.self_adjoint {
        Verdict::Realizable
    } else {
        Verdict::OutsideClass
    };
    Ok(RealizabilityReport {
        convention: opts.convention,
        nbar_graded: class.nbar_graded.clone(),
        class,
        preservation,
        realizability,
        extraction,
        coupling,
        oscillator,
        verdict,
    })
}
