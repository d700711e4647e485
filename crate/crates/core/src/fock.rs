//! Truncated Fock-space representations used to cross-check the symbolic algebra.
//!
//! Two number types are supported. [`Complex64`] uses the orthonormal number
//! basis with `√n` ladder entries. [`ExactComplex`] uses the unnormalized basis
//! `|n) = a*ⁿ|0⟩`, where `a*|n) = |n+1)` and `a|n) = n|n−1)`, so every matrix
//! entry stays rational. Matrix elements of two operators agree in one basis
//! exactly when they agree in the other.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{CommutationMatrix, NormalMonomial, OpPoly};
use crate::scalar::{ComplexRational, Param, ScalarError};

pub type ExactComplex = ComplexRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FockError {
    #[error("the Fock representation requires Θ = I")]
    NonIdentityTheta,
    #[error("cutoff {cutoff} leaves no safe states for degree {degree}")]
    CutoffTooSmall { cutoff: u32, degree: u32 },
    #[error("operator has {found} modes, representation has {expected}")]
    ModeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Coefficient field of a representation.
pub trait FockField:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_exact(c: &ComplexRational) -> Self;
    /// `⟨n−1|a|n⟩` in this basis.
    fn lowering_entry(n: u32) -> Self;
    /// `⟨n+1|a*|n⟩` in this basis.
    fn raising_entry(n: u32) -> Self;
    /// Squared norm of the basis vector with occupation `n`.
    fn gram(n: u32) -> Self;
    fn conj(&self) -> Self;
    fn divide(&self, other: &Self) -> Self;
    fn relative_error(a: &Self, b: &Self) -> f64;
}

impl FockField for Complex64 {
    fn from_exact(c: &ComplexRational) -> Self {
        Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
    }

    fn lowering_entry(n: u32) -> Self {
        Complex64::new(f64::from(n).sqrt(), 0.0)
    }

    fn raising_entry(n: u32) -> Self {
        Complex64::new(f64::from(n + 1).sqrt(), 0.0)
    }

    fn gram(_: u32) -> Self {
        Complex64::one()
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn divide(&self, other: &Self) -> Self {
        self / other
    }

    fn relative_error(a: &Self, b: &Self) -> f64 {
        (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
    }
}

impl FockField for ExactComplex {
    fn from_exact(c: &ComplexRational) -> Self {
        c.clone()
    }

    fn lowering_entry(n: u32) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn raising_entry(_: u32) -> Self {
        ExactComplex::one()
    }

    fn gram(n: u32) -> Self {
        let f: BigInt = (1..=n).map(BigInt::from).product();
        Complex::new(BigRational::from_integer(f), BigRational::zero())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn divide(&self, other: &Self) -> Self {
        self / other
    }

    fn relative_error(a: &Self, b: &Self) -> f64 {
        if a == b {
            return 0.0;
        }
        let to = |c: &ExactComplex| Complex64::from_exact(c);
        match Complex64::relative_error(&to(a), &to(b)) {
            // distinct rationals that round to the same float still disagree
            0.0 => f64::MIN_POSITIVE,
            e => e,
        }
    }
}

/// Square sparse matrix stored by columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<F> {
    dim: usize,
    cols: Vec<BTreeMap<usize, F>>,
}

impl<F: FockField> SparseMatrix<F> {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            cols: vec![BTreeMap::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.cols[k].insert(k, F::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> F {
        self.cols[col].get(&row).cloned().unwrap_or_else(F::zero)
    }

    pub fn add_to(&mut self, row: usize, col: usize, v: F) {
        if v.is_zero() {
            return;
        }
        let slot = self.cols[col].entry(row).or_insert_with(F::zero);
        *slot = slot.clone() + v;
        if slot.is_zero() {
            self.cols[col].remove(&row);
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(BTreeMap::len).sum()
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::zeros(self.dim);
        for (k, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                out.add_to(*r, k, v.clone() * c.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, col) in other.cols.iter().enumerate() {
            for (r, v) in col {
                out.add_to(*r, k, v.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-F::one()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (k, col) in other.cols.iter().enumerate() {
            for (mid, w) in col {
                for (r, v) in &self.cols[*mid] {
                    out.add_to(*r, k, v.clone() * w.clone());
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }
}

/// `n` modes, each truncated to occupations `0..cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedRep {
    modes: usize,
    cutoff: u32,
}

impl TruncatedRep {
    pub fn new(theta: &CommutationMatrix, cutoff: u32) -> Result<Self, FockError> {
        if !theta.is_identity() {
            return Err(FockError::NonIdentityTheta);
        }
        Ok(TruncatedRep {
            modes: theta.modes(),
            cutoff,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        (self.cutoff as usize).pow(self.modes as u32)
    }

    /// Occupation numbers of a basis index; mode 0 is the most significant digit.
    pub fn occupations(&self, mut index: usize) -> Vec<u32> {
        let d = self.cutoff as usize;
        let mut occ = vec![0; self.modes];
        for j in (0..self.modes).rev() {
            occ[j] = (index % d) as u32;
            index /= d;
        }
        occ
    }

    pub fn index(&self, occ: &[u32]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * self.cutoff as usize + n as usize)
    }

    pub fn excitation(&self, index: usize) -> u32 {
        self.occupations(index).iter().sum()
    }

    fn ladder<F: FockField>(&self, j: usize, raise: bool) -> SparseMatrix<F> {
        let mut m = SparseMatrix::zeros(self.dim());
        for col in 0..self.dim() {
            let mut occ = self.occupations(col);
            let n = occ[j];
            if raise && n + 1 < self.cutoff {
                occ[j] = n + 1;
                m.add_to(self.index(&occ), col, F::raising_entry(n));
            } else if !raise && n > 0 {
                occ[j] = n - 1;
                m.add_to(self.index(&occ), col, F::lowering_entry(n));
            }
        }
        m
    }

    pub fn lowering<F: FockField>(&self, j: usize) -> SparseMatrix<F> {
        self.ladder(j, false)
    }

    pub fn raising<F: FockField>(&self, j: usize) -> SparseMatrix<F> {
        self.ladder(j, true)
    }

    /// Replace each generator by its truncated matrix and sum the monomials.
    pub fn represent<F: FockField>(
        &self,
        p: &OpPoly,
        sigma: &BTreeMap<Param, BigRational>,
    ) -> Result<SparseMatrix<F>, FockError> {
        if p.modes() != self.modes {
            return Err(FockError::ModeMismatch {
                expected: self.modes,
                found: p.modes(),
            });
        }
        let mut cache: HashMap<(usize, bool, u32), SparseMatrix<F>> = HashMap::new();
        let mut power = |j: usize, raise: bool, e: u32| -> SparseMatrix<F> {
            cache
                .entry((j, raise, e))
                .or_insert_with(|| {
                    let g = self.ladder::<F>(j, raise);
                    (0..e).fold(SparseMatrix::identity(self.dim()), |acc, _| acc.matmul(&g))
                })
                .clone()
        };
        let mut out = SparseMatrix::zeros(self.dim());
        for (mono, coeff) in p.terms() {
            let c = F::from_exact(&coeff.evaluate(sigma)?);
            let m = self.monomial_matrix(mono, &mut power);
            out = out.add(&m.scale(&c));
        }
        Ok(out)
    }

    fn monomial_matrix<F: FockField>(
        &self,
        mono: &NormalMonomial,
        power: &mut impl FnMut(usize, bool, u32) -> SparseMatrix<F>,
    ) -> SparseMatrix<F> {
        let mut m = SparseMatrix::identity(self.dim());
        for (j, &h) in mono.creation().iter().enumerate() {
            if h > 0 {
                m = m.matmul(&power(j, true, h));
            }
        }
        for (j, &k) in mono.annihilation().iter().enumerate() {
            if k > 0 {
                m = m.matmul(&power(j, false, k));
            }
        }
        m
    }

    /// Adjoint with respect to the basis inner product.
    pub fn adjoint<F: FockField>(&self, m: &SparseMatrix<F>) -> SparseMatrix<F> {
        let gram = |i: usize| {
            self.occupations(i)
                .into_iter()
                .fold(F::one(), |acc, n| acc * F::gram(n))
        };
        let mut out = SparseMatrix::zeros(m.dim());
        for (col, entries) in m.cols.iter().enumerate() {
            for (row, v) in entries {
                // (M†)_{col,row} = conj(M_{row,col}) g_row / g_col
                out.add_to(col, *row, v.conj() * gram(*row).divide(&gram(col)));
            }
        }
        out
    }

    /// Basis states `|u⟩` with total excitation at most `cutoff − 1 − reach`.
    ///
    /// A single normal-ordered monomial never leaves the span of its two outer
    /// states, so its truncated matrix elements are exact. In `⟨u|PQ|v⟩` the
    /// intermediate states exceed `u` by at most `deg P` and `v` by at most
    /// `deg Q`, so `reach = min(deg P, deg Q)` keeps every path below the cutoff.
    pub fn safe_states(&self, reach: u32) -> Result<Vec<usize>, FockError> {
        let top = self
            .cutoff
            .checked_sub(1 + reach)
            .ok_or(FockError::CutoffTooSmall {
                cutoff: self.cutoff,
                degree: reach,
            })?;
        Ok((0..self.dim()).filter(|&i| self.excitation(i) <= top).collect())
    }

    /// Compare two matrices on the safe subspace for the given reach.
    pub fn compare<F: FockField>(
        &self,
        x: &SparseMatrix<F>,
        y: &SparseMatrix<F>,
        reach: u32,
        tol: f64,
    ) -> Result<Agreement, FockError> {
        let safe = self.safe_states(reach)?;
        let mut max_error = 0.0f64;
        let mut checked = 0;
        for &v in &safe {
            for &u in &safe {
                let e = F::relative_error(&x.get(u, v), &y.get(u, v));
                max_error = max_error.max(e);
                checked += 1;
            }
        }
        Ok(Agreement {
            agree: max_error <= tol,
            max_error,
            checked,
        })
    }

    /// Represent both operators and compare them on the states of excitation
    /// at most `cutoff − 1 − max(deg p, deg q)`.
    pub fn agree_on_safe_subspace<F: FockField>(
        &self,
        p: &OpPoly,
        q: &OpPoly,
        sigma: &BTreeMap<Param, BigRational>,
        tol: f64,
    ) -> Result<Agreement, FockError> {
        let reach = p.degree().unwrap_or(0).max(q.degree().unwrap_or(0));
        self.compare(&self.represent::<F>(p, sigma)?, &self.represent::<F>(q, sigma)?, reach, tol)
    }

    /// `rep(p·q)` against `rep(p)·rep(q)`.
    pub fn check_product<F: FockField>(
        &self,
        p: &OpPoly,
        q: &OpPoly,
        theta: &CommutationMatrix,
        sigma: &BTreeMap<Param, BigRational>,
        tol: f64,
    ) -> Result<Agreement, FockError> {
        let sym = p.product(q, theta).map_err(|_| self.mismatch(p, q))?;
        let (rp, rq) = (self.represent::<F>(p, sigma)?, self.represent::<F>(q, sigma)?);
        self.compare(&self.represent(&sym, sigma)?, &rp.matmul(&rq), reach(p).min(reach(q)), tol)
    }

    /// `rep([p, q])` against `[rep(p), rep(q)]`.
    pub fn check_commutator<F: FockField>(
        &self,
        p: &OpPoly,
        q: &OpPoly,
        theta: &CommutationMatrix,
        sigma: &BTreeMap<Param, BigRational>,
        tol: f64,
    ) -> Result<Agreement, FockError> {
        let sym = p.commutator(q, theta).map_err(|_| self.mismatch(p, q))?;
        let (rp, rq) = (self.represent::<F>(p, sigma)?, self.represent::<F>(q, sigma)?);
        self.compare(&self.represent(&sym, sigma)?, &rp.commutator(&rq), reach(p).min(reach(q)), tol)
    }

    /// `rep(p†)` against `rep(p)†`.
    pub fn check_adjoint<F: FockField>(
        &self,
        p: &OpPoly,
        sigma: &BTreeMap<Param, BigRational>,
        tol: f64,
    ) -> Result<Agreement, FockError> {
        let rp = self.represent::<F>(p, sigma)?;
        self.compare(&self.represent(&p.adjoint(), sigma)?, &self.adjoint(&rp), 0, tol)
    }

    fn mismatch(&self, p: &OpPoly, q: &OpPoly) -> FockError {
        FockError::ModeMismatch {
            expected: p.modes(),
            found: q.modes(),
        }
    }
}

fn reach(p: &OpPoly) -> u32 {
    p.degree().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub agree: bool,
    pub max_error: f64,
    /// Number of matrix elements compared.
    pub checked: usize,
}
