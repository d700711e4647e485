//! Normal-ordered polynomials in bosonic annihilation and creation generators.
//!
//! Generators satisfy `[a_j, a_k*] = Θ_jk` for a constant Hermitian matrix Θ,
//! with annihilators commuting among themselves and creators commuting among
//! themselves. A monomial is therefore determined by two exponent vectors
//! `(h, k)` meaning `a*^h a^k` (all creators left of all annihilators).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::matrix::ScalarMatrix;
use crate::scalar::{Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },
    #[error("commutation matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("commutation matrix is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// The matrix Θ of `[a_j, a_k*] = Θ_jk`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutationMatrix {
    theta: ScalarMatrix,
}

impl CommutationMatrix {
    pub fn identity(n: usize) -> Self {
        CommutationMatrix {
            theta: ScalarMatrix::identity(n),
        }
    }

    pub fn new(theta: ScalarMatrix) -> Result<Self, AlgebraError> {
        if theta.rows() != theta.cols() {
            return Err(AlgebraError::NotSquare {
                rows: theta.rows(),
                cols: theta.cols(),
            });
        }
        for r in 0..theta.rows() {
            for c in r..theta.cols() {
                if theta.get(r, c) != &theta.get(c, r).conj() {
                    return Err(AlgebraError::NotHermitian { row: r, col: c });
                }
            }
        }
        Ok(CommutationMatrix { theta })
    }

    pub fn modes(&self) -> usize {
        self.theta.rows()
    }

    pub fn get(&self, j: usize, k: usize) -> &Scalar {
        self.theta.get(j, k)
    }

    pub fn matrix(&self) -> &ScalarMatrix {
        &self.theta
    }

    pub fn is_identity(&self) -> bool {
        self.theta == ScalarMatrix::identity(self.modes())
    }
}

/// `a*^cre a^ann` over n modes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NormalMonomial {
    cre: Vec<u32>,
    ann: Vec<u32>,
}

impl NormalMonomial {
    pub fn one(n: usize) -> Self {
        NormalMonomial {
            cre: vec![0; n],
            ann: vec![0; n],
        }
    }

    pub fn new(cre: Vec<u32>, ann: Vec<u32>) -> Self {
        assert_eq!(cre.len(), ann.len(), "exponent vectors must have equal length");
        NormalMonomial { cre, ann }
    }

    pub fn creation(&self) -> &[u32] {
        &self.cre
    }

    pub fn annihilation(&self) -> &[u32] {
        &self.ann
    }

    pub fn modes(&self) -> usize {
        self.cre.len()
    }

    pub fn degree(&self) -> u32 {
        self.cre.iter().sum::<u32>() + self.ann.iter().sum::<u32>()
    }

    pub fn is_one(&self) -> bool {
        self.degree() == 0
    }

    pub fn adjoint(&self) -> Self {
        NormalMonomial {
            cre: self.ann.clone(),
            ann: self.cre.clone(),
        }
    }

    /// Print with the given mode names, e.g. `a1'^2*a2`.
    pub fn to_text(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (exps, suffix) in [(&self.cre, "'"), (&self.ann, "")] {
            for (j, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("{}{suffix}", names[j])),
                    _ => parts.push(format!("{}{suffix}^{e}", names[j])),
                }
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for NormalMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.cre.cmp(&other.cre))
            .then_with(|| self.ann.cmp(&other.ann))
    }
}

impl PartialOrd for NormalMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NormalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&default_names(self.modes())))
    }
}

/// `a1, a2, ...`
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("a{j}")).collect()
}

/// Finite sum of normal monomials with Scalar coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OpPoly {
    modes: usize,
    terms: BTreeMap<NormalMonomial, Scalar>,
}

type Terms = BTreeMap<NormalMonomial, Scalar>;

fn accumulate(terms: &mut Terms, m: NormalMonomial, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

fn check_modes(left: usize, right: usize) -> Result<(), AlgebraError> {
    if left == right {
        Ok(())
    } else {
        Err(AlgebraError::ModeMismatch { left, right })
    }
}

impl OpPoly {
    pub fn zero(n: usize) -> Self {
        OpPoly {
            modes: n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        OpPoly::term(NormalMonomial::one(n), c)
    }

    pub fn one(n: usize) -> Self {
        OpPoly::constant(n, Scalar::one())
    }

    pub fn term(m: NormalMonomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        let n = m.modes();
        accumulate(&mut terms, m, c);
        OpPoly { modes: n, terms }
    }

    /// The annihilation generator `a_j` (0-based).
    pub fn annihilator(n: usize, j: usize) -> Self {
        assert!(j < n, "mode index out of range");
        let mut m = NormalMonomial::one(n);
        m.ann[j] = 1;
        OpPoly::term(m, Scalar::one())
    }

    /// The creation generator `a_j*` (0-based).
    pub fn creator(n: usize, j: usize) -> Self {
        assert!(j < n, "mode index out of range");
        let mut m = NormalMonomial::one(n);
        m.cre[j] = 1;
        OpPoly::term(m, Scalar::one())
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (NormalMonomial, Scalar)>,
    {
        let mut out = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.modes(), n, "monomial mode count");
            accumulate(&mut out, m, c);
        }
        OpPoly {
            modes: n,
            terms: out,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&NormalMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &NormalMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Highest total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(NormalMonomial::degree).max()
    }

    /// The value if `self` is a multiple of the identity (zero included).
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Scalar) -> OpPoly {
        if c.is_zero() {
            return OpPoly::zero(self.modes);
        }
        OpPoly {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|(m, d)| (m.clone(), d * c))
                .collect(),
        }
    }

    pub fn try_add(&self, other: &OpPoly) -> Result<OpPoly, AlgebraError> {
        check_modes(self.modes, other.modes)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut terms, m.clone(), c.clone());
        }
        Ok(OpPoly {
            modes: self.modes,
            terms,
        })
    }

    pub fn try_sub(&self, other: &OpPoly) -> Result<OpPoly, AlgebraError> {
        self.try_add(&-other)
    }

    /// Normal-ordered product `p·q`.
    pub fn product(&self, other: &OpPoly, theta: &CommutationMatrix) -> Result<OpPoly, AlgebraError> {
        check_modes(self.modes, other.modes)?;
        check_modes(self.modes, theta.modes())?;
        let mut memo = HashMap::new();
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let c12 = c1 * c2;
                let middle = ann_times_cre(&m1.ann, &m2.cre, theta, &mut memo);
                for (m, c) in middle.iter() {
                    let cre = add_exps(&m1.cre, &m.cre);
                    let ann = add_exps(&m.ann, &m2.ann);
                    accumulate(&mut terms, NormalMonomial { cre, ann }, &c12 * c);
                }
            }
        }
        Ok(OpPoly {
            modes: self.modes,
            terms,
        })
    }

    pub fn commutator(&self, other: &OpPoly, theta: &CommutationMatrix) -> Result<OpPoly, AlgebraError> {
        let pq = self.product(other, theta)?;
        let qp = other.product(self, theta)?;
        pq.try_sub(&qp)
    }

    pub fn pow(&self, e: u32, theta: &CommutationMatrix) -> Result<OpPoly, AlgebraError> {
        let mut out = OpPoly::one(self.modes);
        for _ in 0..e {
            out = out.product(self, theta)?;
        }
        Ok(out)
    }

    /// Operator adjoint: `c·a*^h a^k ↦ conj(c)·a*^k a^h`.
    pub fn adjoint(&self) -> OpPoly {
        OpPoly {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.adjoint(), c.conj()))
                .collect(),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    /// Homogeneous components keyed by total degree; empty for zero.
    pub fn grade(&self) -> BTreeMap<u32, OpPoly> {
        let mut out: BTreeMap<u32, OpPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| OpPoly::zero(self.modes))
                .terms
                .insert(m.clone(), c.clone());
        }
        out
    }

    /// Component of the given total degree.
    pub fn homogeneous(&self, degree: u32) -> OpPoly {
        OpPoly {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `self` without its constant term.
    pub fn without_constant(&self) -> OpPoly {
        OpPoly {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.is_one())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_annihilation_only(&self) -> bool {
        self.terms.keys().all(|m| m.cre.iter().all(|&e| e == 0))
    }

    /// Print with the given mode names, e.g. `(-2*chi) * a1'^2 * a2`.
    pub fn to_text(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let mono = m.to_text(names).replace('*', " * ");
            if m.is_one() {
                out.push_str(&format!("({c})"));
            } else if c.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("({c}) * {mono}"));
            }
        }
        out
    }
}

fn add_exps(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Normal-ordered form of `a^k · a*^h`.
///
/// Peels one annihilator `a_j` off the right of `a^k` and uses
/// `a_j a*^h = a*^h a_j + Σ_m h_m Θ_jm a*^(h - e_m)`.
fn ann_times_cre(
    k: &[u32],
    h: &[u32],
    theta: &CommutationMatrix,
    memo: &mut HashMap<(Vec<u32>, Vec<u32>), Terms>,
) -> Terms {
    let n = k.len();
    if k.iter().all(|&e| e == 0) || h.iter().all(|&e| e == 0) {
        let mut t = BTreeMap::new();
        t.insert(
            NormalMonomial {
                cre: h.to_vec(),
                ann: k.to_vec(),
            },
            Scalar::one(),
        );
        return t;
    }
    let key = (k.to_vec(), h.to_vec());
    if let Some(t) = memo.get(&key) {
        return t.clone();
    }
    let j = k.iter().position(|&e| e > 0).unwrap();
    let mut k_rest = k.to_vec();
    k_rest[j] -= 1;

    let mut out = BTreeMap::new();
    for (mut m, c) in ann_times_cre(&k_rest, h, theta, memo) {
        m.ann[j] += 1;
        accumulate(&mut out, m, c);
    }
    for mi in 0..n {
        if h[mi] == 0 || theta.get(j, mi).is_zero() {
            continue;
        }
        let mut h_rest = h.to_vec();
        h_rest[mi] -= 1;
        let factor = theta.get(j, mi) * &Scalar::from_int(h[mi] as i64);
        for (m, c) in ann_times_cre(&k_rest, &h_rest, theta, memo) {
            accumulate(&mut out, m, &factor * &c);
        }
    }
    memo.insert(key, out.clone());
    out
}

impl fmt::Display for OpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&default_names(self.modes)))
    }
}

impl fmt::Debug for OpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Panics on mode-count mismatch; use [`OpPoly::try_add`] to get an error instead.
impl<'a> Add<&'a OpPoly> for &'a OpPoly {
    type Output = OpPoly;
    fn add(self, rhs: &'a OpPoly) -> OpPoly {
        self.try_add(rhs).expect("mode count mismatch in OpPoly addition")
    }
}

impl<'a> Sub<&'a OpPoly> for &'a OpPoly {
    type Output = OpPoly;
    fn sub(self, rhs: &'a OpPoly) -> OpPoly {
        self.try_sub(rhs).expect("mode count mismatch in OpPoly subtraction")
    }
}

impl Neg for &OpPoly {
    type Output = OpPoly;
    fn neg(self) -> OpPoly {
        OpPoly {
            modes: self.modes,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for OpPoly {
    type Output = OpPoly;
    fn neg(self) -> OpPoly {
        -&self
    }
}

impl Add for OpPoly {
    type Output = OpPoly;
    fn add(self, rhs: OpPoly) -> OpPoly {
        &self + &rhs
    }
}

impl Sub for OpPoly {
    type Output = OpPoly;
    fn sub(self, rhs: OpPoly) -> OpPoly {
        &self - &rhs
    }
}

impl<'a> Mul<&'a Scalar> for &'a OpPoly {
    type Output = OpPoly;
    fn mul(self, rhs: &'a Scalar) -> OpPoly {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: usize, j: usize) -> OpPoly {
        OpPoly::annihilator(n, j)
    }

    fn ad(n: usize, j: usize) -> OpPoly {
        OpPoly::creator(n, j)
    }

    fn s(name: &str) -> Scalar {
        Scalar::param(name)
    }

    #[test]
    fn ccr_with_symbolic_theta() {
        let t11 = s("t");
        let theta = CommutationMatrix::new(ScalarMatrix::from_rows(vec![vec![t11.clone()]])).unwrap();
        let p = a(1, 0).product(&ad(1, 0), &theta).unwrap();
        let expected = &ad(1, 0).product(&a(1, 0), &theta).unwrap() + &OpPoly::constant(1, t11.clone());
        assert_eq!(p, expected);
        assert_eq!(
            a(1, 0).commutator(&ad(1, 0), &theta).unwrap(),
            OpPoly::constant(1, t11)
        );
    }

    #[test]
    fn distinct_modes_commute() {
        let theta = CommutationMatrix::identity(2);
        let p = a(2, 0).product(&ad(2, 1), &theta).unwrap();
        assert_eq!(p, ad(2, 1).product(&a(2, 0), &theta).unwrap());
        assert_eq!(p.len(), 1);
        assert!(a(2, 0).commutator(&a(2, 1), &theta).unwrap().is_zero());
    }

    #[test]
    fn squared_ladder() {
        // a^2 a*^2 = a*^2 a^2 + 4 a* a + 2
        let theta = CommutationMatrix::identity(1);
        let a2 = OpPoly::term(NormalMonomial::new(vec![0], vec![2]), Scalar::one());
        let ad2 = a2.adjoint();
        let got = a2.product(&ad2, &theta).unwrap();
        let want = OpPoly::from_terms(
            1,
            [
                (NormalMonomial::new(vec![2], vec![2]), Scalar::one()),
                (NormalMonomial::new(vec![1], vec![1]), Scalar::from_int(4)),
                (NormalMonomial::one(1), Scalar::from_int(2)),
            ],
        );
        assert_eq!(got, want);
        // [a, a*^2] = 2 a*
        let c = a(1, 0).commutator(&ad2, &theta).unwrap();
        assert_eq!(c, ad(1, 0).scale(&Scalar::from_int(2)));
    }

    #[test]
    fn off_diagonal_theta() {
        let g = s("g");
        let theta = CommutationMatrix::new(ScalarMatrix::from_rows(vec![
            vec![Scalar::one(), g.clone()],
            vec![g.clone(), Scalar::one()],
        ]))
        .unwrap();
        let c = a(2, 0).commutator(&ad(2, 1), &theta).unwrap();
        assert_eq!(c, OpPoly::constant(2, g));
    }

    #[test]
    fn non_hermitian_theta_rejected() {
        let m = ScalarMatrix::from_rows(vec![
            vec![Scalar::one(), Scalar::i()],
            vec![Scalar::i(), Scalar::one()],
        ]);
        assert!(matches!(
            CommutationMatrix::new(m),
            Err(AlgebraError::NotHermitian { .. })
        ));
    }

    #[test]
    fn adjoint_examples() {
        let chi = s("chi");
        let p = ad(2, 0).product(&a(2, 1), &CommutationMatrix::identity(2)).unwrap();
        let p = p.scale(&(&Scalar::from_int(-2) * &chi));
        let q = ad(2, 1).product(&a(2, 0), &CommutationMatrix::identity(2)).unwrap();
        assert_eq!(p.adjoint(), q.scale(&(&Scalar::from_int(-2) * &chi)));
        let ic = &Scalar::i() * &chi;
        assert_eq!(a(1, 0).scale(&ic).adjoint(), ad(1, 0).scale(&-&ic));
    }

    #[test]
    fn grading() {
        let th = CommutationMatrix::identity(2);
        let k1 = s("k1");
        let chi = s("chi");
        let lin = a(2, 0).scale(&-&k1);
        let quad = ad(2, 0).product(&a(2, 1), &th).unwrap().scale(&(&Scalar::from_int(-2) * &chi));
        let g = (&lin + &quad).grade();
        assert_eq!(g.len(), 2);
        assert_eq!(g[&1], lin);
        assert_eq!(g[&2], quad);
        assert!(OpPoly::zero(2).grade().is_empty());
        assert_eq!(OpPoly::zero(2).degree(), None);
    }

    #[test]
    fn annihilation_only() {
        assert!(a(2, 0).scale(&s("b1")).is_annihilation_only());
        let th = CommutationMatrix::identity(2);
        assert!(!ad(2, 0).product(&a(2, 1), &th).unwrap().is_annihilation_only());
        assert!(OpPoly::constant(2, Scalar::from_int(5)).is_annihilation_only());
    }

    #[test]
    fn mode_mismatch() {
        let th = CommutationMatrix::identity(2);
        assert_eq!(
            a(2, 0).product(&a(3, 0), &th),
            Err(AlgebraError::ModeMismatch { left: 2, right: 3 })
        );
        assert!(a(3, 0).product(&a(3, 1), &th).is_err());
    }

    #[test]
    fn printing() {
        let th = CommutationMatrix::identity(2);
        let chi = s("chi");
        let p = ad(2, 0)
            .pow(2, &th)
            .unwrap()
            .product(&a(2, 1), &th)
            .unwrap()
            .scale(&(&Scalar::from_int(-2) * &chi));
        assert_eq!(p.to_string(), "(-2*chi) * a1'^2 * a2");
        let q = &a(2, 0) + &OpPoly::constant(2, Scalar::from_int(3));
        assert_eq!(q.to_string(), "a1 + (3)");
    }
}
