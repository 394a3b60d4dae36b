use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::exactring::{Ctx, RingElem};

/// Dense matrix over `R_N`, row-major.
#[derive(Clone)]
pub struct Matrix {
    ctx: Ctx,
    rows: usize,
    cols: usize,
    data: Vec<RingElem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for Matrix {}

impl Index<(usize, usize)> for Matrix {
    type Output = RingElem;
    fn index(&self, (r, c): (usize, usize)) -> &RingElem {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut RingElem {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zero(ctx: &Ctx, rows: usize, cols: usize) -> Self {
        Matrix { ctx: ctx.clone(), rows, cols, data: vec![RingElem::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &Ctx, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for k in 0..n {
            m[(k, k)] = RingElem::one(ctx);
        }
        m
    }

    pub fn from_fn(ctx: &Ctx, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RingElem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { ctx: ctx.clone(), rows, cols, data }
    }

    pub fn from_rows(ctx: &Ctx, rows: Vec<Vec<RingElem>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        if rows.iter().flatten().any(|e| !e.ctx().same(ctx)) {
            return Err(Error::ContextMismatch);
        }
        let n = rows.len();
        Ok(Matrix { ctx: ctx.clone(), rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    /// Matrix with integer entries (reduced into `F_p ⊂ R_N`).
    pub fn from_ints(ctx: &Ctx, rows: &[&[i64]]) -> Self {
        Self::from_fn(ctx, rows.len(), rows.first().map_or(0, |r| r.len()), |r, c| RingElem::from_int(ctx, rows[r][c]))
    }

    /// Diagonal matrix `diag(s^{e_0}, s^{e_1}, …)` padded to `rows × cols`.
    pub fn diagonal_powers(ctx: &Ctx, rows: usize, cols: usize, exps: &[u32]) -> Self {
        let mut m = Self::zero(ctx, rows, cols);
        for (k, &e) in exps.iter().enumerate().take(rows.min(cols)) {
            m[(k, k)] = RingElem::uniformizer_pow(ctx, e);
        }
        m
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[RingElem] {
        &self.data
    }

    pub fn row(&self, r: usize) -> Vec<RingElem> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<RingElem>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn column(&self, c: usize) -> Matrix {
        self.select_cols(&[c])
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        Self::from_fn(&self.ctx, self.rows, cols.len(), |r, k| self[(r, cols[k])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        Self::from_fn(&self.ctx, rows.len(), self.cols, |k, c| self[(rows[k], c)].clone())
    }

    pub fn cols_range(&self, range: std::ops::Range<usize>) -> Matrix {
        let cols: Vec<usize> = range.collect();
        self.select_cols(&cols)
    }

    pub fn rows_range(&self, range: std::ops::Range<usize>) -> Matrix {
        let rows: Vec<usize> = range.collect();
        self.select_rows(&rows)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!("hstack of {} and {} rows", self.rows, other.rows)));
        }
        Ok(Self::from_fn(&self.ctx, self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        }))
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        let mut m = Self::zero(&self.ctx, self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)].clone();
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                m[(self.rows + r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(&self.ctx, self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map(&self, f: impl Fn(&RingElem) -> RingElem) -> Matrix {
        Matrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Entrywise Frobenius: the matrix of the twisted map.
    pub fn frobenius(&self) -> Matrix {
        self.map(RingElem::frobenius)
    }

    pub fn frobenius_pow(&self, k: u32) -> Matrix {
        self.map(|e| e.frobenius_pow(k))
    }

    pub fn lift(&self) -> Matrix {
        self.map(RingElem::lift)
    }

    pub fn truncate(&self, k: u32) -> Matrix {
        self.map(|e| e.truncate(k))
    }

    pub fn scale(&self, c: &RingElem) -> Matrix {
        self.map(|e| e * c)
    }

    pub fn min_prec(&self) -> u32 {
        self.data.iter().map(RingElem::prec).min().unwrap_or(self.ctx.n())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RingElem::is_zero)
    }

    /// True when every entry lies in `m_{k/N}`.
    pub fn vanishes_mod(&self, k: u32) -> bool {
        self.data.iter().all(|e| e.vanishes_mod(k))
    }

    /// Smallest entry valuation in digit units (`prec` for entries that vanish).
    pub fn min_valuation(&self) -> u32 {
        self.data.iter().map(RingElem::val_or_prec).min().unwrap_or(self.ctx.n())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// `row[target] += factor · row[source]`.
    pub fn add_row_multiple(&mut self, target: usize, source: usize, factor: &RingElem) {
        for c in 0..self.cols {
            let delta = factor * &self[(source, c)];
            self[(target, c)] = &self[(target, c)] + &delta;
        }
    }

    /// `col[target] += factor · col[source]`.
    pub fn add_col_multiple(&mut self, target: usize, source: usize, factor: &RingElem) {
        for r in 0..self.rows {
            let delta = &self[(r, source)] * factor;
            self[(r, target)] = &self[(r, target)] + &delta;
        }
    }

    pub fn scale_row(&mut self, r: usize, factor: &RingElem) {
        for c in 0..self.cols {
            self[(r, c)] = &self[(r, c)] * factor;
        }
    }

    pub fn scale_col(&mut self, c: usize, factor: &RingElem) {
        for r in 0..self.rows {
            self[(r, c)] = &self[(r, c)] * factor;
        }
    }

    pub fn checked_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if !self.ctx.same(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(Self::from_fn(&self.ctx, self.rows, other.cols, |r, c| {
            let mut acc = RingElem::zero(&self.ctx);
            for k in 0..self.cols {
                acc = &acc + &(&self[(r, k)] * &other[(k, c)]);
            }
            acc
        }))
    }

    /// Inverse of a matrix with unit determinant, by Gauss–Jordan elimination
    /// on unit pivots (an invertible matrix over a local ring has a unit in
    /// every column of every remaining block).
    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(&self.ctx, n);
        for k in 0..n {
            let pivot = (k..n)
                .find(|&r| a[(r, k)].is_unit())
                .ok_or_else(|| Error::NotInvertible("matrix is singular modulo the maximal ideal".into()))?;
            a.swap_rows(k, pivot);
            inv.swap_rows(k, pivot);
            let u = a[(k, k)].inverse()?;
            a.scale_row(k, &u);
            inv.scale_row(k, &u);
            for r in 0..n {
                if r != k && !a[(r, k)].is_zero() {
                    let factor = -&a[(r, k)];
                    a.add_row_multiple(r, k, &factor);
                    inv.add_row_multiple(r, k, &factor);
                }
            }
        }
        Ok(inv)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs).expect("matrix product")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape");
        Matrix::from_fn(&self.ctx, self.rows, self.cols, |r, c| &self[(r, c)] + &rhs[(r, c)])
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape");
        Matrix::from_fn(&self.ctx, self.rows, self.cols, |r, c| &self[(r, c)] - &rhs[(r, c)])
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.map(|e| -e)
    }
}

/// Division-free determinant (Berkowitz), computed on the stored
/// representatives and truncated to the smallest entry precision.
pub fn det_division_free(m: &Matrix) -> Result<RingElem> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("determinant of a {}x{} matrix", m.rows(), m.cols())));
    }
    let prec = m.min_prec();
    let a = m.lift();
    Ok(berkowitz(&a).truncate(prec))
}

/// Berkowitz: the characteristic polynomial via products of Toeplitz
/// matrices; the determinant is `(-1)^n` times its constant coefficient.
fn berkowitz(a: &Matrix) -> RingElem {
    let ctx = a.ctx().clone();
    let n = a.rows();
    if n == 0 {
        return RingElem::one(&ctx);
    }
    // Coefficient vector of the char poly of the leading 1x1 block: [1, -a00].
    let mut poly = vec![RingElem::one(&ctx), -&a[(0, 0)]];
    for k in 1..n {
        // Block [[A_k, col], [row, a_kk]] with A_k the leading k×k block.
        let row: Vec<RingElem> = (0..k).map(|c| a[(k, c)].clone()).collect();
        let col: Vec<RingElem> = (0..k).map(|r| a[(r, k)].clone()).collect();
        let akk = a[(k, k)].clone();
        // Toeplitz column: [1, -a_kk, -row·col, -row·A·col, ..., -row·A^{k-1}·col]
        let mut t = Vec::with_capacity(k + 2);
        t.push(RingElem::one(&ctx));
        t.push(-&akk);
        let mut v = col.clone();
        for _ in 0..k {
            let dot = row.iter().zip(&v).fold(RingElem::zero(&ctx), |acc, (x, y)| &acc + &(x * y));
            t.push(-&dot);
            v = (0..k).map(|r| (0..k).fold(RingElem::zero(&ctx), |acc, c| &acc + &(&a[(r, c)] * &v[c]))).collect();
        }
        // new_poly = T · poly, T lower-triangular Toeplitz of size (k+2)×(k+1)
        let new_poly: Vec<RingElem> = (0..k + 2)
            .map(|r| {
                (0..=k.min(r)).fold(RingElem::zero(&ctx), |acc, c| {
                    if r - c < t.len() && c < poly.len() {
                        &acc + &(&t[r - c] * &poly[c])
                    } else {
                        acc
                    }
                })
            })
            .collect();
        poly = new_poly;
    }
    let constant = poly[n].clone();
    if n.is_multiple_of(2) {
        constant
    } else {
        -&constant
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::Context;

    #[test]
    fn determinant_examples() {
        let ctx = Context::new(3, 1, 6, None).unwrap();
        assert_eq!(det_division_free(&Matrix::identity(&ctx, 4)).unwrap(), RingElem::one(&ctx));
        let mut m = Matrix::zero(&ctx, 2, 2);
        m[(0, 1)] = RingElem::one(&ctx);
        m[(1, 0)] = RingElem::uniformizer_pow(&ctx, 2);
        assert_eq!(det_division_free(&m).unwrap(), -&RingElem::uniformizer_pow(&ctx, 2));
        assert!(det_division_free(&Matrix::zero(&ctx, 2, 3)).is_err());
    }

    #[test]
    fn inverse_of_unipotent() {
        let ctx = Context::new(5, 1, 8, None).unwrap();
        let m = Matrix::from_ints(&ctx, &[&[1, 2, 3], &[0, 1, 4], &[0, 0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(&ctx, 3));
        let singular = Matrix::diagonal_powers(&ctx, 2, 2, &[0, 1]);
        assert!(singular.inverse().is_err());
    }
}
