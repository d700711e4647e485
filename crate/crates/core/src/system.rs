//! QSDE data, the doubled-up form, the canonical noise algebra, and the
//! membership test for the admissible system class.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{CommutationMatrix, OpPoly};
use crate::matrix::{comm_vec_transpose, MatrixError, OpMatrix, OpVector, ScalarMatrix};
use crate::realize::{self, ConditionResidual, ExtractionMode, RealizeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("feedthrough entry ({row}, {col}) must be a scalar")]
    NonScalarFeedthrough { row: usize, col: usize },
    #[error("n̄ is undefined for a zero drift")]
    ZeroDrift,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Quantum Wiener noise: Itô covariance `F` and commutation matrix `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseModel {
    pub ito: ScalarMatrix,
    pub commutation: ScalarMatrix,
}

impl NoiseModel {
    /// Canonical vacuum inputs: `dW_k dW_l* = δ_kl dt`, all other products zero.
    pub fn canonical(m: usize) -> Self {
        NoiseModel {
            ito: ScalarMatrix::identity(m),
            commutation: ScalarMatrix::identity(m),
        }
    }

    pub fn channels(&self) -> usize {
        self.ito.rows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.ito.is_hermitian() && self.commutation.is_hermitian()
    }
}

/// How Θ̄ (and T̄) are built from Θ (and T).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaBarConvention {
    /// `diag(Θ, −Θᵀ)`: what `[ā, ā†]` evaluates to.
    #[default]
    Physical,
    /// `diag(Θ, Θ*)`; differs from `[ā, ā†]` in the sign of the lower block.
    Conjugate,
}

impl ThetaBarConvention {
    pub fn double(self, m: &ScalarMatrix) -> ScalarMatrix {
        match self {
            ThetaBarConvention::Physical => m.block_diag(&m.transpose().neg()),
            ThetaBarConvention::Conjugate => m.block_diag(&m.conj()),
        }
    }
}

impl fmt::Display for ThetaBarConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThetaBarConvention::Physical => "physical",
            ThetaBarConvention::Conjugate => "conjugate",
        })
    }
}

/// `da = A dt + B dW`, `dy = C dt + D dW` over n modes and m channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSystem {
    theta: CommutationMatrix,
    drift: OpVector,
    diffusion: OpMatrix,
    output: OpVector,
    feedthrough: ScalarMatrix,
    noise: NoiseModel,
}

impl QSystem {
    pub fn new(
        theta: CommutationMatrix,
        drift: OpVector,
        diffusion: OpMatrix,
        output: OpVector,
        feedthrough: ScalarMatrix,
        noise: NoiseModel,
    ) -> Result<Self, SystemError> {
        let n = theta.modes();
        let m = output.len();
        let shape = |msg: String| Err(SystemError::Shape(msg));
        if drift.len() != n || drift.modes() != n {
            return shape(format!("drift has {} entries over {} modes, expected {n}", drift.len(), drift.modes()));
        }
        if diffusion.rows() != n || diffusion.cols() != m || diffusion.modes() != n {
            return shape(format!("diffusion is {}x{}, expected {n}x{m}", diffusion.rows(), diffusion.cols()));
        }
        if output.modes() != n {
            return shape(format!("output is over {} modes, expected {n}", output.modes()));
        }
        if feedthrough.rows() != m || feedthrough.cols() != m {
            return shape(format!("feedthrough is {}x{}, expected {m}x{m}", feedthrough.rows(), feedthrough.cols()));
        }
        if noise.ito.rows() != m || noise.commutation.rows() != m {
            return shape(format!("noise model has {} channels, expected {m}", noise.channels()));
        }
        Ok(QSystem {
            theta,
            drift,
            diffusion,
            output,
            feedthrough,
            noise,
        })
    }

    /// Like [`QSystem::new`] but takes `D` as an operator matrix and checks it is constant.
    pub fn with_operator_feedthrough(
        theta: CommutationMatrix,
        drift: OpVector,
        diffusion: OpMatrix,
        output: OpVector,
        feedthrough: &OpMatrix,
        noise: NoiseModel,
    ) -> Result<Self, SystemError> {
        let d = feedthrough.as_scalar_matrix().map_err(|e| match e {
            MatrixError::NotScalar { row, col } => SystemError::NonScalarFeedthrough { row, col },
            other => other.into(),
        })?;
        QSystem::new(theta, drift, diffusion, output, d, noise)
    }

    pub fn modes(&self) -> usize {
        self.theta.modes()
    }

    pub fn channels(&self) -> usize {
        self.output.len()
    }

    pub fn theta(&self) -> &CommutationMatrix {
        &self.theta
    }

    pub fn drift(&self) -> &OpVector {
        &self.drift
    }

    pub fn diffusion(&self) -> &OpMatrix {
        &self.diffusion
    }

    pub fn output(&self) -> &OpVector {
        &self.output
    }

    pub fn feedthrough(&self) -> &ScalarMatrix {
        &self.feedthrough
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }
}

/// The doubled-up system `dā = Ā dt + B̄ dW̄`, `dȳ = C̄ dt + D̄ dW̄`.
///
/// Only a [`QSystem`] can be doubled, so doubling twice does not type-check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubledSystem {
    base: QSystem,
    state: OpVector,
    drift: OpVector,
    diffusion: OpMatrix,
    output: OpVector,
    feedthrough: ScalarMatrix,
    theta_bar: ScalarMatrix,
    noise_commutation: ScalarMatrix,
    signature: ScalarMatrix,
    convention: ThetaBarConvention,
}

impl DoubledSystem {
    pub fn base(&self) -> &QSystem {
        &self.base
    }

    pub fn theta(&self) -> &CommutationMatrix {
        &self.base.theta
    }

    pub fn modes(&self) -> usize {
        self.base.modes()
    }

    /// `ā = [a; a*]`
    pub fn state(&self) -> &OpVector {
        &self.state
    }

    /// `Ā = [A; A*]`
    pub fn drift(&self) -> &OpVector {
        &self.drift
    }

    /// `B̄ = diag(B, B*)`
    pub fn diffusion(&self) -> &OpMatrix {
        &self.diffusion
    }

    /// `C̄ = [C; C*]`
    pub fn output(&self) -> &OpVector {
        &self.output
    }

    /// `D̄ = diag(D, D*)`
    pub fn feedthrough(&self) -> &ScalarMatrix {
        &self.feedthrough
    }

    pub fn theta_bar(&self) -> &ScalarMatrix {
        &self.theta_bar
    }

    /// `T̄`, the doubled noise commutation matrix.
    pub fn noise_commutation(&self) -> &ScalarMatrix {
        &self.noise_commutation
    }

    /// `J̄ = diag(I_m, −I_m)`
    pub fn signature(&self) -> &ScalarMatrix {
        &self.signature
    }

    pub fn convention(&self) -> ThetaBarConvention {
        self.convention
    }

    /// Replace `T̄`, e.g. to check preservation under non-canonical noise.
    pub fn with_noise_commutation(mut self, t_bar: ScalarMatrix) -> Result<Self, SystemError> {
        let m2 = 2 * self.base.channels();
        if t_bar.rows() != m2 || t_bar.cols() != m2 {
            return Err(SystemError::Shape(format!("T̄ must be {m2}x{m2}")));
        }
        self.noise_commutation = t_bar;
        Ok(self)
    }
}

pub fn double_up(s: &QSystem) -> DoubledSystem {
    double_up_with(s, ThetaBarConvention::Physical)
}

pub fn double_up_with(s: &QSystem, convention: ThetaBarConvention) -> DoubledSystem {
    let n = s.modes();
    let m = s.channels();
    let diffusion = s
        .diffusion
        .block_diag(&s.diffusion.conj())
        .expect("shared mode count");
    DoubledSystem {
        base: s.clone(),
        state: OpVector::doubled_annihilators(n),
        drift: s.drift.doubled(),
        diffusion,
        output: s.output.doubled(),
        feedthrough: s.feedthrough.block_diag(&s.feedthrough.conj()),
        theta_bar: convention.double(s.theta.matrix()),
        noise_commutation: convention.double(&s.noise.commutation),
        signature: ScalarMatrix::signature(m, m),
        convention,
    }
}

/// Choice of n̄ in the Hamiltonian formula and the generator identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NbarMode {
    /// Largest total degree among the drift's monomials.
    Literal,
    Fixed(u32),
    /// Per-degree scaling of the Hamiltonian components.
    #[default]
    Graded,
}

impl fmt::Display for NbarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NbarMode::Literal => f.write_str("literal"),
            NbarMode::Fixed(k) => write!(f, "{k}"),
            NbarMode::Graded => f.write_str("graded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nbar {
    Literal(u32),
    Graded(BTreeSet<u32>),
}

/// `sup (k + h)` over the drift's nonzero monomials.
pub fn nbar_literal(s: &QSystem) -> Result<u32, SystemError> {
    s.drift
        .iter()
        .filter_map(OpPoly::degree)
        .max()
        .filter(|_| !s.drift.is_zero())
        .ok_or(SystemError::ZeroDrift)
}

/// Degrees `d ≥ 1` with a nonzero component in `X = ā†Θ̄⁻¹Ā − Ā†Θ̄⁻¹ā`.
pub fn nbar_graded(d: &DoubledSystem) -> Result<BTreeSet<u32>, RealizeError> {
    let x = realize::hamiltonian_form(d, d.drift())?;
    Ok(x.grade().into_keys().filter(|&k| k > 0).collect())
}

pub fn nbar(d: &DoubledSystem, mode: NbarMode) -> Result<Nbar, RealizeError> {
    match mode {
        NbarMode::Literal => Ok(Nbar::Literal(nbar_literal(d.base())?)),
        NbarMode::Fixed(k) => Ok(Nbar::Literal(k)),
        NbarMode::Graded => Ok(Nbar::Graded(nbar_graded(d)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassOptions {
    pub nbar: NbarMode,
    pub convention: ThetaBarConvention,
    /// Accept drift/output monomials that mix several generators.
    pub allow_multi_generator: bool,
}

impl Default for ClassOptions {
    fn default() -> Self {
        ClassOptions {
            nbar: NbarMode::Graded,
            convention: ThetaBarConvention::Physical,
            allow_multi_generator: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeCheck {
    pub pass: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReport {
    pub shape: ShapeCheck,
    /// `[C, aᵀ]`
    pub output_commutes: ConditionResidual,
    /// `[A, aᵀ] + [a, Aᵀ]`
    pub drift_symmetry: ConditionResidual,
    /// Generator identity residual under the chosen n̄.
    pub generator_identity: ConditionResidual,
    pub nbar_literal: Option<u32>,
    pub nbar_graded: BTreeSet<u32>,
    pub extraction_mode: ExtractionMode,
}

impl ClassReport {
    pub fn pass(&self) -> bool {
        self.shape.pass
            && self.output_commutes.pass
            && self.drift_symmetry.pass
            && self.generator_identity.pass
    }
}

fn shape_violations(s: &QSystem, allow_multi: bool) -> Vec<String> {
    let mut out = Vec::new();
    let distinct = |e: &[u32]| e.iter().filter(|&&x| x > 0).count();
    for (i, p) in s.drift.iter().enumerate() {
        for (mono, _) in p.terms() {
            if !allow_multi && (distinct(mono.annihilation()) > 1 || distinct(mono.creation()) > 1) {
                out.push(format!(
                    "A[{}]: monomial {:?} mixes several annihilation or creation generators",
                    i + 1,
                    mono
                ));
            }
        }
    }
    for (v, p) in s.output.iter().enumerate() {
        for (mono, _) in p.terms() {
            if distinct(mono.creation()) > 0 {
                out.push(format!("C[{}]: monomial {:?} contains creation operators", v + 1, mono));
            } else if !allow_multi && distinct(mono.annihilation()) > 1 {
                out.push(format!(
                    "C[{}]: monomial {:?} mixes several annihilation generators",
                    v + 1,
                    mono
                ));
            }
        }
    }
    out
}

/// Extraction mode implied by an n̄ choice (literal n̄ falls back to 1 for a zero drift).
pub fn extraction_mode(s: &QSystem, mode: NbarMode) -> ExtractionMode {
    match mode {
        NbarMode::Literal => ExtractionMode::Literal(nbar_literal(s).unwrap_or(1)),
        NbarMode::Fixed(k) => ExtractionMode::Literal(k),
        NbarMode::Graded => ExtractionMode::Graded,
    }
}

/// Check membership in the admissible class. Violations are report
/// entries, never errors; errors only arise from a singular Θ̄.
pub fn class_check(s: &QSystem, opts: ClassOptions) -> Result<ClassReport, RealizeError> {
    let theta = &s.theta;
    let a = OpVector::annihilators(s.modes());
    let violations = shape_violations(s, opts.allow_multi_generator);

    let output_commutes = ConditionResidual::new(
        "class.output_commutes",
        "[C, aᵀ]",
        comm_vec_transpose(&s.output, &a, theta)?,
    );
    let lhs = comm_vec_transpose(&s.drift, &a, theta)?;
    let rhs = comm_vec_transpose(&a, &s.drift, theta)?;
    let drift_symmetry = ConditionResidual::new(
        "class.drift_symmetry",
        "[A, aᵀ] + [a, Aᵀ]",
        lhs.add(&rhs)?,
    );

    let d = double_up_with(s, opts.convention);
    let mode = extraction_mode(s, opts.nbar);
    let generator_identity = realize::generator_identity_residual(&d, mode)?;

    Ok(ClassReport {
        shape: ShapeCheck {
            pass: violations.is_empty(),
            violations,
        },
        output_commutes,
        drift_symmetry,
        generator_identity,
        nbar_literal: nbar_literal(s).ok(),
        nbar_graded: nbar_graded(&d)?,
        extraction_mode: mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn cavity(g: &Scalar) -> QSystem {
        let theta = CommutationMatrix::identity(1);
        let a = OpPoly::annihilator(1, 0);
        let g2 = &(g * g) * &Scalar::ratio(-1, 2);
        QSystem::new(
            theta,
            OpVector::new(1, vec![a.scale(&g2)]).unwrap(),
            OpMatrix::from_rows(1, vec![vec![OpPoly::constant(1, -g)]]).unwrap(),
            OpVector::new(1, vec![a.scale(g)]).unwrap(),
            ScalarMatrix::identity(1),
            NoiseModel::canonical(1),
        )
        .unwrap()
    }

    #[test]
    fn canonical_noise() {
        let nm = NoiseModel::canonical(2);
        assert_eq!(nm.ito, ScalarMatrix::identity(2));
        assert_eq!(nm.commutation, ScalarMatrix::identity(2));
        assert_eq!(NoiseModel::canonical(0).channels(), 0);
        let d = double_up(&cavity(&Scalar::param("g")));
        assert_eq!(d.noise_commutation(), d.signature());
    }

    #[test]
    fn doubling_blocks() {
        let s = cavity(&Scalar::param("g"));
        let d = double_up(&s);
        assert_eq!(d.drift().len(), 2);
        assert_eq!(d.drift().get(1), &d.drift().get(0).adjoint());
        assert_eq!(d.theta_bar(), &ScalarMatrix::signature(1, 1));
        let conj = double_up_with(&s, ThetaBarConvention::Conjugate);
        assert_eq!(conj.theta_bar(), &ScalarMatrix::identity(2));
    }

    #[test]
    fn empty_system_doubles() {
        let s = QSystem::new(
            CommutationMatrix::identity(0),
            OpVector::zeros(0, 0),
            OpMatrix::zeros(0, 0, 0),
            OpVector::zeros(0, 0),
            ScalarMatrix::identity(0),
            NoiseModel::canonical(0),
        )
        .unwrap();
        let d = double_up(&s);
        assert!(d.drift().is_empty());
        assert_eq!(d.diffusion().rows(), 0);
        let rep = class_check(&s, ClassOptions::default()).unwrap();
        assert!(rep.pass());
    }

    #[test]
    fn linear_cavity_in_class() {
        let s = cavity(&Scalar::param("g"));
        let rep = class_check(&s, ClassOptions::default()).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert_eq!(rep.nbar_literal, Some(1));
        assert!(rep.nbar_graded.is_empty());
    }

    #[test]
    fn creation_in_output_fails() {
        let mut s = cavity(&Scalar::param("g"));
        s.output = OpVector::new(1, vec![OpPoly::creator(1, 0)]).unwrap();
        let rep = class_check(&s, ClassOptions::default()).unwrap();
        assert!(!rep.shape.pass);
        assert!(!rep.output_commutes.pass);
    }

    #[test]
    fn shape_errors() {
        let r = QSystem::new(
            CommutationMatrix::identity(2),
            OpVector::zeros(2, 1),
            OpMatrix::zeros(2, 2, 1),
            OpVector::zeros(2, 1),
            ScalarMatrix::identity(1),
            NoiseModel::canonical(1),
        );
        assert!(matches!(r, Err(SystemError::Shape(_))));
        let r = QSystem::with_operator_feedthrough(
            CommutationMatrix::identity(1),
            OpVector::zeros(1, 1),
            OpMatrix::zeros(1, 1, 1),
            OpVector::zeros(1, 1),
            &OpMatrix::from_rows(1, vec![vec![OpPoly::annihilator(1, 0)]]).unwrap(),
            NoiseModel::canonical(1),
        );
        assert_eq!(r, Err(SystemError::NonScalarFeedthrough { row: 0, col: 0 }));
    }

    #[test]
    fn zero_drift_has_no_literal_nbar() {
        let s = QSystem::new(
            CommutationMatrix::identity(1),
            OpVector::zeros(1, 1),
            OpMatrix::zeros(1, 1, 0),
            OpVector::zeros(1, 0),
            ScalarMatrix::identity(0),
            NoiseModel::canonical(0),
        )
        .unwrap();
        assert_eq!(nbar_literal(&s), Err(SystemError::ZeroDrift));
    }
}
