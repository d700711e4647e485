//! Vectors and matrices of operator polynomials, and the commutator
//! patterns the realizability conditions are written in.
//!
//! Conventions for matrix-valued commutators (all 0-based):
//!
//! * `[M, v†]_{jk} = [M_j, v_k*]` ([`comm_vec_adj`])
//! * `[M†, v]_{jk} = [M_k*, v_j]` ([`comm_adj_vec`])
//! * `[M, vᵀ]_{jk} = [M_j, v_k]` ([`comm_vec_transpose`])

use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, CommutationMatrix, OpPoly};
use crate::scalar::{Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix entry ({row}, {col}) is not a scalar")]
    NotScalar { row: usize, col: usize },
    #[error("matrix is singular")]
    Singular,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<ScalarError> for MatrixError {
    fn from(e: ScalarError) -> Self {
        MatrixError::Algebra(AlgebraError::Scalar(e))
    }
}

fn dim_err<T>(msg: String) -> Result<T, MatrixError> {
    Err(MatrixError::Dimension(msg))
}

/// Dense matrix of Scalars (row-major).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl ScalarMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ScalarMatrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ScalarMatrix::zeros(n, n);
        for j in 0..n {
            m.set(j, j, Scalar::one());
        }
        m
    }

    /// `diag(I_p, -I_q)`
    pub fn signature(p: usize, q: usize) -> Self {
        ScalarMatrix::identity(p).block_diag(&ScalarMatrix::identity(q).neg())
    }

    /// Panics if rows have unequal length.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        ScalarMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        ScalarMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x)
    }

    pub fn conj(&self) -> Self {
        self.map(Scalar::conj)
    }

    pub fn transpose(&self) -> Self {
        let mut t = ScalarMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> Self {
        self.transpose().conj()
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.conj_transpose()
    }

    pub fn block_diag(&self, other: &ScalarMatrix) -> Self {
        let mut m = ScalarMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                m.set(self.rows + r, self.cols + c, other.get(r, c).clone());
            }
        }
        m
    }

    pub fn matmul(&self, other: &ScalarMatrix) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return dim_err(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut m = ScalarMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let s: Scalar = (0..self.cols)
                    .map(|k| self.get(r, k) * other.get(k, c))
                    .sum();
                m.set(r, c, s);
            }
        }
        Ok(m)
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self, MatrixError> {
        if self.rows != self.cols {
            return dim_err(format!("inverse of {}x{} matrix", self.rows, self.cols));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = ScalarMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(MatrixError::Singular)?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a.get(col, col).inv()?;
            a.scale_row(col, &p);
            inv.scale_row(col, &p);
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                a.sub_row_multiple(r, col, &f);
                inv.sub_row_multiple(r, col, &f);
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, f: &Scalar) {
        for c in 0..self.cols {
            let v = self.get(r, c) * f;
            self.set(r, c, v);
        }
    }

    fn sub_row_multiple(&mut self, target: usize, src: usize, f: &Scalar) {
        for c in 0..self.cols {
            let v = self.get(target, c) - &(self.get(src, c) * f);
            self.set(target, c, v);
        }
    }

    /// Lift to an operator matrix with constant entries.
    pub fn to_op(&self, modes: usize) -> OpMatrix {
        OpMatrix {
            rows: self.rows,
            cols: self.cols,
            modes,
            data: self
                .data
                .iter()
                .map(|s| OpPoly::constant(modes, s.clone()))
                .collect(),
        }
    }
}

impl fmt::Debug for ScalarMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// Column of operator polynomials over a common mode count.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OpVector {
    modes: usize,
    entries: Vec<OpPoly>,
}

impl OpVector {
    pub fn new(modes: usize, entries: Vec<OpPoly>) -> Result<Self, MatrixError> {
        if let Some(e) = entries.iter().find(|e| e.modes() != modes) {
            return Err(AlgebraError::ModeMismatch {
                left: modes,
                right: e.modes(),
            }
            .into());
        }
        Ok(OpVector { modes, entries })
    }

    pub fn zeros(modes: usize, len: usize) -> Self {
        OpVector {
            modes,
            entries: vec![OpPoly::zero(modes); len],
        }
    }

    /// `a = [a_1, ..., a_n]`
    pub fn annihilators(n: usize) -> Self {
        OpVector {
            modes: n,
            entries: (0..n).map(|j| OpPoly::annihilator(n, j)).collect(),
        }
    }

    /// `ā = [a; a*]`
    pub fn doubled_annihilators(n: usize) -> Self {
        OpVector::annihilators(n).doubled()
    }

    /// `[v; v*]` with `v*` the entrywise adjoint.
    pub fn doubled(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend(self.entries.iter().map(OpPoly::adjoint));
        OpVector {
            modes: self.modes,
            entries,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: usize) -> &OpPoly {
        &self.entries[j]
    }

    pub fn entries(&self) -> &[OpPoly] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, OpPoly> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(OpPoly::is_zero)
    }

    pub fn map(&self, f: impl Fn(&OpPoly) -> OpPoly) -> Self {
        OpVector {
            modes: self.modes,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map<E>(&self, f: impl Fn(&OpPoly) -> Result<OpPoly, E>) -> Result<Self, E> {
        Ok(OpVector {
            modes: self.modes,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn add(&self, other: &OpVector) -> Result<Self, MatrixError> {
        self.zip(other, |x, y| x.try_add(y))
    }

    pub fn sub(&self, other: &OpVector) -> Result<Self, MatrixError> {
        self.zip(other, |x, y| x.try_sub(y))
    }

    fn zip(
        &self,
        other: &OpVector,
        f: impl Fn(&OpPoly, &OpPoly) -> Result<OpPoly, AlgebraError>,
    ) -> Result<Self, MatrixError> {
        if self.len() != other.len() {
            return dim_err(format!("vectors of length {} and {}", self.len(), other.len()));
        }
        Ok(OpVector {
            modes: self.modes,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| f(x, y))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|p| p.scale(c))
    }

    /// As an `len × 1` matrix.
    pub fn to_column(&self) -> OpMatrix {
        OpMatrix {
            rows: self.len(),
            cols: 1,
            modes: self.modes,
            data: self.entries.clone(),
        }
    }

    /// Entrywise `[v_j, p]`.
    pub fn commutator_with(&self, p: &OpPoly, theta: &CommutationMatrix) -> Result<Self, MatrixError> {
        Ok(self.try_map(|e| e.commutator(p, theta))?)
    }
}

impl fmt::Debug for OpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

/// Rectangular matrix of operator polynomials (row-major).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OpMatrix {
    rows: usize,
    cols: usize,
    modes: usize,
    data: Vec<OpPoly>,
}

impl OpMatrix {
    pub fn zeros(modes: usize, rows: usize, cols: usize) -> Self {
        OpMatrix {
            rows,
            cols,
            modes,
            data: vec![OpPoly::zero(modes); rows * cols],
        }
    }

    pub fn identity(modes: usize, n: usize) -> Self {
        ScalarMatrix::identity(n).to_op(modes)
    }

    pub fn from_rows(modes: usize, rows: Vec<Vec<OpPoly>>) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return dim_err("ragged matrix".into());
        }
        let data: Vec<OpPoly> = rows.into_iter().flatten().collect();
        if let Some(e) = data.iter().find(|e| e.modes() != modes) {
            return Err(AlgebraError::ModeMismatch {
                left: modes,
                right: e.modes(),
            }
            .into());
        }
        Ok(OpMatrix {
            rows: r,
            cols: c,
            modes,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn get(&self, r: usize, c: usize) -> &OpPoly {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: OpPoly) {
        assert_eq!(p.modes(), self.modes, "mode count");
        self.data[r * self.cols + c] = p;
    }

    pub fn row(&self, r: usize) -> &[OpPoly] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(OpPoly::is_zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = &OpPoly> {
        self.data.iter()
    }

    pub fn map(&self, f: impl Fn(&OpPoly) -> OpPoly) -> Self {
        OpMatrix {
            rows: self.rows,
            cols: self.cols,
            modes: self.modes,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|p| -p)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn transpose(&self) -> Self {
        let mut t = OpMatrix::zeros(self.modes, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    /// Transpose with entrywise operator adjoint.
    pub fn adjoint(&self) -> Self {
        self.transpose().map(OpPoly::adjoint)
    }

    /// Entrywise adjoint without transposing (`B*`).
    pub fn conj(&self) -> Self {
        self.map(OpPoly::adjoint)
    }

    pub fn block_diag(&self, other: &OpMatrix) -> Result<Self, MatrixError> {
        if self.modes != other.modes {
            return Err(AlgebraError::ModeMismatch {
                left: self.modes,
                right: other.modes,
            }
            .into());
        }
        let mut m = OpMatrix::zeros(self.modes, self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                m.set(self.rows + r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(m)
    }

    fn same_shape(&self, other: &OpMatrix) -> Result<(), MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return dim_err(format!(
                "{}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &OpMatrix) -> Result<Self, MatrixError> {
        self.same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x.try_add(y))
            .collect::<Result<_, _>>()?;
        Ok(OpMatrix { data, ..self.clone() })
    }

    pub fn sub(&self, other: &OpMatrix) -> Result<Self, MatrixError> {
        self.add(&other.neg())
    }

    /// Matrix product; entry products keep left-to-right operator order.
    pub fn matmul(&self, other: &OpMatrix, theta: &CommutationMatrix) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return dim_err(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut m = OpMatrix::zeros(self.modes, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = OpPoly::zero(self.modes);
                for k in 0..self.cols {
                    let (x, y) = (self.get(r, k), other.get(k, c));
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    acc = acc.try_add(&x.product(y, theta)?)?;
                }
                m.set(r, c, acc);
            }
        }
        Ok(m)
    }

    /// `M v` with `v` as a column.
    pub fn mul_vec(&self, v: &OpVector, theta: &CommutationMatrix) -> Result<OpVector, MatrixError> {
        let col = self.matmul(&v.to_column(), theta)?;
        Ok(OpVector {
            modes: self.modes,
            entries: col.data,
        })
    }

    /// The Scalar matrix, if every entry is a constant.
    pub fn as_scalar_matrix(&self) -> Result<ScalarMatrix, MatrixError> {
        let mut m = ScalarMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let s = self
                    .get(r, c)
                    .as_scalar()
                    .ok_or(MatrixError::NotScalar { row: r, col: c })?;
                m.set(r, c, s);
            }
        }
        Ok(m)
    }

    /// Inverse of a matrix whose entries are all constants.
    pub fn inverse_scalar(&self) -> Result<Self, MatrixError> {
        Ok(self.as_scalar_matrix()?.inverse()?.to_op(self.modes))
    }
}

impl fmt::Debug for OpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[OpPoly]> = (0..self.rows).map(|r| self.row(r)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// `[M, v†]`: entry `(j, k)` is `[M_j, v_k*]`.
pub fn comm_vec_adj(m: &OpVector, v: &OpVector, theta: &CommutationMatrix) -> Result<OpMatrix, MatrixError> {
    shared_modes(m, v)?;
    let mut out = OpMatrix::zeros(m.modes, m.len(), v.len());
    for j in 0..m.len() {
        for k in 0..v.len() {
            out.set(j, k, m.get(j).commutator(&v.get(k).adjoint(), theta)?);
        }
    }
    Ok(out)
}

/// `[M†, v]`: entry `(j, k)` is `[M_k*, v_j]`, so row `j` belongs to `v_j`.
pub fn comm_adj_vec(m: &OpVector, v: &OpVector, theta: &CommutationMatrix) -> Result<OpMatrix, MatrixError> {
    Ok(comm_vec_adj(v, m, theta)?.neg())
}

/// `[M, vᵀ]`: entry `(j, k)` is `[M_j, v_k]`.
pub fn comm_vec_transpose(m: &OpVector, v: &OpVector, theta: &CommutationMatrix) -> Result<OpMatrix, MatrixError> {
    shared_modes(m, v)?;
    let mut out = OpMatrix::zeros(m.modes, m.len(), v.len());
    for j in 0..m.len() {
        for k in 0..v.len() {
            out.set(j, k, m.get(j).commutator(v.get(k), theta)?);
        }
    }
    Ok(out)
}

/// `[M, v†]` for a matrix `M`: row `(j·cols + k)`, column `l` holds `[M_jk, v_l*]`.
pub fn comm_mat_adj(m: &OpMatrix, v: &OpVector, theta: &CommutationMatrix) -> Result<OpMatrix, MatrixError> {
    let flat = OpVector::new(m.modes, m.data.clone())?;
    comm_vec_adj(&flat, v, theta)
}

/// `[v, M†]` for a matrix `M`: row `(j·cols + k)`, column `l` holds `[v_l, M_jk*]`.
pub fn comm_vec_mat_adj(v: &OpVector, m: &OpMatrix, theta: &CommutationMatrix) -> Result<OpMatrix, MatrixError> {
    let flat = OpVector::new(m.modes, m.data.clone())?;
    // [v_l, M_jk*] = -[M_jk*, v_l]
    let mut out = OpMatrix::zeros(m.modes, flat.len(), v.len());
    for r in 0..flat.len() {
        let adj = flat.get(r).adjoint();
        for l in 0..v.len() {
            out.set(r, l, v.get(l).commutator(&adj, theta)?);
        }
    }
    Ok(out)
}

/// `Σ_{jk} u_j* S_jk w_k` with constant `S`, in that operator order.
pub fn quad_form(
    u: &OpVector,
    s: &ScalarMatrix,
    w: &OpVector,
    theta: &CommutationMatrix,
) -> Result<OpPoly, MatrixError> {
    shared_modes(u, w)?;
    if s.rows() != u.len() || s.cols() != w.len() {
        return dim_err(format!(
            "quadratic form {}x{} with vectors of length {} and {}",
            s.rows(),
            s.cols(),
            u.len(),
            w.len()
        ));
    }
    let mut acc = OpPoly::zero(u.modes);
    for j in 0..u.len() {
        let uj = u.get(j).adjoint();
        for k in 0..w.len() {
            let c = s.get(j, k);
            if c.is_zero() {
                continue;
            }
            acc = acc.try_add(&uj.product(w.get(k), theta)?.scale(c))?;
        }
    }
    Ok(acc)
}

fn shared_modes(u: &OpVector, v: &OpVector) -> Result<(), MatrixError> {
    if u.modes != v.modes {
        return Err(AlgebraError::ModeMismatch {
            left: u.modes,
            right: v.modes,
        }
        .into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubled_commutation_matrix() {
        let theta = CommutationMatrix::identity(2);
        let abar = OpVector::doubled_annihilators(2);
        let m = comm_vec_adj(&abar, &abar, &theta).unwrap();
        assert_eq!(m, ScalarMatrix::signature(2, 2).to_op(2));
    }

    #[test]
    fn adjoint_of_column() {
        let a = OpVector::annihilators(2).to_column();
        let row = a.adjoint();
        assert_eq!(row.rows(), 1);
        assert_eq!(row.get(0, 1), &OpPoly::creator(2, 1));
    }

    #[test]
    fn constants_commute() {
        let theta = CommutationMatrix::identity(1);
        let v = OpVector::new(1, vec![OpPoly::constant(1, Scalar::param("x"))]).unwrap();
        assert!(comm_vec_adj(&v, &v, &theta).unwrap().is_zero());
        let a = OpVector::annihilators(3);
        assert!(comm_vec_transpose(&a, &a, &CommutationMatrix::identity(3)).unwrap().is_zero());
    }

    #[test]
    fn number_operator_form() {
        let theta = CommutationMatrix::identity(2);
        let a = OpVector::annihilators(2);
        let n = quad_form(&a, &ScalarMatrix::identity(2), &a, &theta).unwrap();
        let want = &OpPoly::creator(2, 0).product(&OpPoly::annihilator(2, 0), &theta).unwrap()
            + &OpPoly::creator(2, 1).product(&OpPoly::annihilator(2, 1), &theta).unwrap();
        assert_eq!(n, want);
        assert!(quad_form(&a, &ScalarMatrix::identity(2), &OpVector::zeros(2, 2), &theta)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn scalar_inverse() {
        let k = Scalar::param("k");
        let m = ScalarMatrix::from_rows(vec![
            vec![k.clone(), Scalar::one()],
            vec![Scalar::zero(), Scalar::from_int(2)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.matmul(&inv).unwrap(), ScalarMatrix::identity(2));
        let sing = ScalarMatrix::from_rows(vec![
            vec![k.clone(), k.clone()],
            vec![k.clone(), k],
        ]);
        assert_eq!(sing.inverse(), Err(MatrixError::Singular));
        assert_eq!(
            ScalarMatrix::signature(2, 2).inverse().unwrap(),
            ScalarMatrix::signature(2, 2)
        );
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let theta = CommutationMatrix::identity(1);
        let a = OpMatrix::zeros(1, 2, 3);
        assert!(matches!(a.matmul(&a, &theta), Err(MatrixError::Dimension(_))));
    }

    #[test]
    fn non_scalar_inverse_rejected() {
        let m = OpMatrix::from_rows(1, vec![vec![OpPoly::annihilator(1, 0)]]).unwrap();
        assert_eq!(m.inverse_scalar(), Err(MatrixError::NotScalar { row: 0, col: 0 }));
    }
}
