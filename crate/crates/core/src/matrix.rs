//! Exact linear algebra over the rationals and over the jet ring.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::rat::{denominator_lcm, Rat};

/// Dense matrix of rationals, row-major.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Rat>>", into = "Vec<Vec<Rat>>")]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    /// Builds a matrix from rows. An empty row list gives a 0 x 0 matrix.
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(RatMatrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Rat::from_int(v)).collect()).collect())
            .expect("rectangular literal")
    }

    /// `n x n` diagonal matrix.
    pub fn diagonal(entries: &[Rat]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a * &other[(k, j)];
                    out[(i, j)] += &p;
                }
            }
        }
        Ok(out)
    }

    /// Select rows by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> RatMatrix {
        let rows = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(rows).unwrap_or_else(|_| Self::zeros(0, self.cols))
    }

    pub fn select_cols(&self, idx: &[usize]) -> RatMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out[(i, jj)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Rows scaled to integers, with the scale factor of each row.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut rows = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let l = denominator_lcm(self.row(i));
            let row = self
                .row(i)
                .iter()
                .map(|v| {
                    let scaled = v.to_big() * num_rational::BigRational::from_integer(l.clone());
                    debug_assert!(scaled.is_integer());
                    scaled.to_integer()
                })
                .collect();
            rows.push(row);
            scales.push(l);
        }
        (rows, scales)
    }

    /// Exact rank by fraction-free (Bareiss) elimination.
    pub fn rank(&self) -> usize {
        let (mut a, _) = self.integer_rows();
        bareiss(&mut a, self.cols).rank
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<Rat> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!("determinant of a {}x{} matrix", self.rows, self.cols)));
        }
        if self.rows == 0 {
            return Ok(Rat::one());
        }
        let (mut a, scales) = self.integer_rows();
        let out = bareiss(&mut a, self.cols);
        if out.rank < self.rows {
            return Ok(Rat::zero());
        }
        let mut det = a[self.rows - 1][self.cols - 1].clone();
        if out.swaps % 2 == 1 {
            det = -det;
        }
        let denom: BigInt = scales.iter().product();
        Ok(Rat::from_big(num_rational::BigRational::new(det, denom)))
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in 0..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let v = &m[(i, j)] - &(&f * &m[(r, j)]);
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(Error::Dimension("solve needs a square system".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut aug = Self::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok((0..n).map(|i| r[(i, n)].clone()).collect())
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rat::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[..n].iter().enumerate().any(|(i, &p)| p != i) {
            return Err(Error::Singular);
        }
        Ok(r.select_cols(&(n..2 * n).collect::<Vec<_>>()))
    }
}

struct Elimination {
    rank: usize,
    swaps: usize,
}

/// In-place fraction-free elimination. Every division is exact.
fn bareiss(a: &mut [Vec<BigInt>], cols: usize) -> Elimination {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut swaps = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            a.swap(p, r);
            swaps += 1;
        }
        for i in r + 1..rows {
            for j in c + 1..cols {
                let num = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                let (q, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                a[i][j] = q;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    Elimination { rank: r, swaps }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl TryFrom<Vec<Vec<Rat>>> for RatMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Rat>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<RatMatrix> for Vec<Vec<Rat>> {
    fn from(m: RatMatrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Square matrix of jets, row-major.
pub type JetMatrix = Vec<Vec<Jet>>;

fn check_square(a: &JetMatrix) -> Result<usize> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("jet matrix is not square".into()));
    }
    Ok(n)
}

/// Constant terms of a jet matrix.
pub fn jet_matrix_at_zero(a: &JetMatrix) -> Result<RatMatrix> {
    RatMatrix::from_rows(a.iter().map(|r| r.iter().map(Jet::constant_term).collect()).collect())
}

/// Gaussian elimination over the jet ring with unit pivots.
/// Returns the determinant and the solution of `A x = b`.
fn unit_pivot_solve(a: &JetMatrix, b: &[Jet]) -> Result<(Jet, Vec<Jet>)> {
    let n = check_square(a)?;
    if b.len() != n {
        return Err(Error::Dimension("right-hand side has the wrong length".into()));
    }
    let mut a = a.clone();
    let mut b = b.to_vec();
    let (nv, mut order) = match a.first().and_then(|r| r.first()).or(b.first()) {
        Some(j) => (j.num_vars(), j.order()),
        None => return Err(Error::Dimension("empty jet matrix".into())),
    };
    for j in a.iter().flatten().chain(b.iter()) {
        order = order.min(j.order());
    }
    let mut det = Jet::one(nv, order);
    let mut inv_pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].constant_term().is_zero()).ok_or(Error::Singular)?;
        if p != k {
            a.swap(p, k);
            b.swap(p, k);
            det = -&det;
        }
        det = &det * &a[k][k];
        let inv = a[k][k].recip()?;
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let factor = &a[i][k] * &inv;
            for j in k + 1..n {
                let upd = &a[i][j] - &(&factor * &a[k][j]);
                a[i][j] = upd;
            }
            let upd = &b[i] - &(&factor * &b[k]);
            b[i] = upd;
        }
        inv_pivots.push(inv);
    }
    let mut x = vec![Jet::zero(nv, order); n];
    for k in (0..n).rev() {
        let mut acc = b[k].clone();
        for j in k + 1..n {
            acc = &acc - &(&a[k][j] * &x[j]);
        }
        x[k] = &acc * &inv_pivots[k];
    }
    Ok((det, x))
}

/// Solves `A x = b` over the jet ring. `A(0)` must be invertible.
pub fn jet_matrix_solve(a: &JetMatrix, b: &[Jet]) -> Result<Vec<Jet>> {
    unit_pivot_solve(a, b).map(|(_, x)| x)
}

/// Determinant and solution in one elimination pass. `A(0)` must be invertible.
pub fn jet_det_and_solve(a: &JetMatrix, b: &[Jet]) -> Result<(Jet, Vec<Jet>)> {
    unit_pivot_solve(a, b)
}

/// Determinant of a square jet matrix by expansion over column subsets.
/// Works whether or not `A(0)` is invertible; costs `O(n 2^n)` products.
pub fn jet_det(a: &JetMatrix) -> Result<Jet> {
    let n = check_square(a)?;
    if n == 0 {
        return Err(Error::Dimension("determinant of an empty jet matrix".into()));
    }
    if n > 16 {
        return Err(Error::Dimension("jet determinant limited to 16 x 16".into()));
    }
    let nv = a[0][0].num_vars();
    let order = a.iter().flatten().map(Jet::order).min().unwrap_or(0);
    // minors[S] = det of rows 0..|S| restricted to column set S
    let mut minors: Vec<Option<Jet>> = vec![None; 1 << n];
    minors[0] = Some(Jet::one(nv, order));
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = Jet::zero(nv, order);
        // Laplace expansion of the last row of the minor
        let mut seen = 0;
        let size = mask.count_ones() as usize;
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let rest = mask & !(1 << col);
            let sub = minors[rest].as_ref().expect("smaller minors come first");
            if !a[row][col].is_zero() && !sub.is_zero() {
                let term = &a[row][col] * sub;
                acc = if (size - 1 - seen).is_multiple_of(2) { &acc + &term } else { &acc - &term };
            }
            seen += 1;
        }
        minors[mask] = Some(acc);
    }
    Ok(minors[(1 << n) - 1].take().expect("full minor"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_det_basics() {
        let id = RatMatrix::identity(3);
        assert_eq!(id.rank(), 3);
        assert_eq!(id.det().unwrap(), Rat::one());
        let m = RatMatrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.det().unwrap(), Rat::zero());
        assert_eq!(RatMatrix::zeros(0, 0).rank(), 0);
        assert!(RatMatrix::zeros(2, 3).det().is_err());
    }

    #[test]
    fn det_with_fractions_and_swaps() {
        let m = RatMatrix::from_rows(vec![
            vec![Rat::zero(), Rat::new(1, 2)],
            vec![Rat::new(2, 3), Rat::one()],
        ])
        .unwrap();
        assert_eq!(m.det().unwrap(), Rat::new(-1, 3));
    }

    #[test]
    fn rref_reports_pivots() {
        let m = RatMatrix::from_ints(&[&[0, 1, 2], &[0, 2, 4]]);
        let (_, piv) = m.rref();
        assert_eq!(piv, vec![1]);
        let inv = RatMatrix::from_ints(&[&[2, 1], &[1, 1]]).inverse().unwrap();
        assert_eq!(inv, RatMatrix::from_ints(&[&[1, -1], &[-1, 2]]));
    }

    #[test]
    fn geometric_series_solve() {
        let t = Jet::var(1, 2, 0).unwrap();
        let one = Jet::one(1, 2);
        let a = vec![vec![&one + &t]];
        let x = jet_matrix_solve(&a, std::slice::from_ref(&one)).unwrap();
        assert_eq!(x[0], &(&one - &t) + &(&t * &t));
        assert!(matches!(jet_matrix_solve(&vec![vec![t.clone()]], &[one]), Err(Error::Singular)));
    }

    #[test]
    fn subset_det_matches_unit_pivot_det() {
        let x = |k| Jet::var(2, 3, k).unwrap();
        let one = Jet::one(2, 3);
        let a = vec![
            vec![&one + &x(0), &x(1) * &x(1), x(0)],
            vec![x(1), &one - &x(1), &x(0) * &x(1)],
            vec![&x(0) * &x(0), x(0), &one + &one],
        ];
        let (d1, _) = jet_det_and_solve(&a, &[one.clone(), one.clone(), one.clone()]).unwrap();
        assert_eq!(jet_det(&a).unwrap(), d1);
    }
}
