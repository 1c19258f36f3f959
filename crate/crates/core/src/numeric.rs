//! Exact rational scalars, dense vectors and matrices.
//!
//! Every number in the crate is a [`Rational`], an arbitrary precision
//! fraction kept in lowest terms with a positive denominator. Vectors are
//! plain `Vec<Rational>`; matrices are row-major [`Matrix`] values whose
//! shape is checked at construction.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `p / q`, reduced. Panics if `q == 0`.
pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = zeros(n);
    v[i] = Rational::one();
    v
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn neg_vec(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| -x).collect()
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(s: &Rational, v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| s * x).collect()
}

/// Parses the text form `[-+]?digits(/digits)?`. The denominator must be
/// positive; the result is canonical.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t, None),
    };
    let digits = num.strip_prefix(['-', '+']).unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let n = BigInt::from_str(num).map_err(|_| bad())?;
    let d = match den {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let d = BigInt::from_str(d).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            d
        }
    };
    Ok(Rational::new(n, d))
}

/// Text form used in every file format: `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn format_vec(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

pub fn lex_cmp(a: &[Rational], b: &[Rational]) -> std::cmp::Ordering {
    a.cmp(b)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows. `cols` is required so that a matrix with
    /// zero rows still knows its width.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::dims(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(Matrix {
            rows: n,
            cols,
            data,
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect();
        Matrix::from_rows(cols, rows).expect("ragged literal matrix")
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

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Sub-matrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::dims(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exact determinant by Bareiss fraction-free elimination.
    pub fn determinant(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::dims("determinant of a non-square matrix"));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Rational::one());
        }
        let mut a = self.clone();
        let mut sign = Rational::one();
        let mut prev = Rational::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return Ok(Rational::zero());
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
                a[(i, k)] = Rational::zero();
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * a[(n - 1, n - 1)].clone())
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::dims("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let mut rhs = Matrix::identity(n);
        let mut a = self.clone();
        eliminate(&mut a, &mut rhs)?;
        Ok(rhs)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// Gauss-Jordan on a square `a`, applying the same row operations to `rhs`.
/// On success `a` is the identity and `rhs` holds `a⁻¹ · rhs`.
fn eliminate(a: &mut Matrix, rhs: &mut Matrix) -> Result<()> {
    let n = a.rows;
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !a[(i, k)].is_zero())
            .ok_or(Error::Singular)?;
        a.swap_rows(k, p);
        rhs.swap_rows(k, p);
        let piv = a[(k, k)].clone();
        if !piv.is_one() {
            for j in 0..n {
                a[(k, j)] /= &piv;
            }
            for j in 0..rhs.cols {
                rhs[(k, j)] /= &piv;
            }
        }
        for i in 0..n {
            if i == k || a[(i, k)].is_zero() {
                continue;
            }
            let f = a[(i, k)].clone();
            for j in 0..n {
                if !a[(k, j)].is_zero() {
                    let d = &f * &a[(k, j)];
                    a[(i, j)] -= d;
                }
            }
            for j in 0..rhs.cols {
                if !rhs[(k, j)].is_zero() {
                    let d = &f * &rhs[(k, j)];
                    rhs[(i, j)] -= d;
                }
            }
        }
    }
    Ok(())
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "[{}]", format_vec(self.row(i)))?;
        }
        write!(f, "]")
    }
}

/// The unique `v` with `m · v = r`, or [`Error::Singular`].
pub fn solve_square_system(m: &Matrix, r: &[Rational]) -> Result<Vec<Rational>> {
    if !m.is_square() {
        return Err(Error::dims(format!(
            "expected a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if r.len() != m.rows {
        return Err(Error::dims(
            "right-hand side length differs from matrix order",
        ));
    }
    let mut a = m.clone();
    let mut rhs = Matrix::from_rows(1, r.iter().map(|x| vec![x.clone()]).collect())?;
    eliminate(&mut a, &mut rhs)?;
    Ok(rhs.column(0))
}

pub fn determinant(m: &Matrix) -> Result<Rational> {
    m.determinant()
}

/// Solves a possibly overdetermined system with full column rank.
///
/// Returns [`Error::Singular`] when the columns are dependent and
/// [`Error::Inconsistent`] when no exact solution exists.
pub fn solve_full_column_rank(m: &Matrix, r: &[Rational]) -> Result<Vec<Rational>> {
    if r.len() != m.rows {
        return Err(Error::dims("right-hand side length differs from row count"));
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut b = r.to_vec();
    let mut pivot_row = 0;
    for k in 0..cols {
        let p = (pivot_row..rows)
            .find(|&i| !a[(i, k)].is_zero())
            .ok_or(Error::Singular)?;
        a.swap_rows(pivot_row, p);
        b.swap(pivot_row, p);
        let piv = a[(pivot_row, k)].clone();
        for j in 0..cols {
            a[(pivot_row, j)] /= &piv;
        }
        b[pivot_row] /= &piv;
        for i in 0..rows {
            if i == pivot_row || a[(i, k)].is_zero() {
                continue;
            }
            let f = a[(i, k)].clone();
            for j in 0..cols {
                let d = &f * &a[(pivot_row, j)];
                a[(i, j)] -= d;
            }
            let d = &f * &b[pivot_row];
            b[i] -= d;
        }
        pivot_row += 1;
    }
    if b[cols..].iter().any(|x| !x.is_zero()) {
        return Err(Error::Inconsistent);
    }
    b.truncate(cols);
    Ok(b)
}

pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_parse() {
        assert_eq!(parse_rational("2/4").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("-3/7").unwrap(), frac(-3, 7));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("+6/3").unwrap(), int(2));
        for bad in ["", "1/0", "1/-2", "a", "1.5", "-", "3/"] {
            assert!(parse_rational(bad).is_err(), "{bad:?} accepted");
        }
        assert_eq!(format_rational(&frac(-6, 14)), "-3/7");
        assert_eq!(format_rational(&int(5)), "5");
    }

    #[test]
    fn identity_solve() {
        let m = Matrix::identity(2);
        let v = solve_square_system(&m, &[int(3), frac(-1, 2)]).unwrap();
        assert_eq!(v, vec![int(3), frac(-1, 2)]);
    }

    #[test]
    fn rank_deficient_is_singular() {
        let m = Matrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(
            solve_square_system(&m, &[int(1), int(2)]),
            Err(Error::Singular)
        );
        assert_eq!(m.determinant().unwrap(), int(0));
    }

    #[test]
    fn moment_system_for_two_vertices() {
        // Σ τ = 1, Σ i τ = 1, Σ i² τ = 1 over K = {1, 2}.
        let m = Matrix::from_i64(&[&[1, 1], &[1, 2], &[1, 4]]);
        let tau = solve_full_column_rank(&m, &[int(1), int(1), int(1)]).unwrap();
        assert_eq!(tau, vec![int(1), int(0)]);
        let sq = solve_square_system(&m.select_rows(&[0, 1]), &[int(1), int(1)]).unwrap();
        assert_eq!(sq, tau);
        assert_eq!(
            solve_full_column_rank(&m, &[int(1), int(1), int(2)]),
            Err(Error::Inconsistent)
        );
    }

    #[test]
    fn small_determinants() {
        assert_eq!(Matrix::identity(3).determinant().unwrap(), int(1));
        assert_eq!(
            Matrix::from_i64(&[&[1, 1], &[1, 2]]).determinant().unwrap(),
            int(1)
        );
        // needs a row swap
        assert_eq!(
            Matrix::from_i64(&[&[0, 1], &[1, 0]]).determinant().unwrap(),
            int(-1)
        );
        assert_eq!(Matrix::zeros(0, 0).determinant().unwrap(), int(1));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Matrix::from_rows(2, vec![vec![int(1), int(2)], vec![int(1)]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(msg) if msg.contains("row 1")));
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(3));
    }
}
