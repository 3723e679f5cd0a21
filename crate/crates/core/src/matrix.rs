//! Dense matrices over a [`Scalar`] field.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<K> {
    rows: usize,
    cols: usize,
    data: Vec<K>,
}

impl<K: Scalar> Matrix<K> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![K::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = K::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<K>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    /// Integer entries; panics on ragged input.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| K::from_i64(x)).collect())
                .collect(),
        )
        .expect("rectangular integer literal")
    }

    pub fn scalar(x: K) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![x],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[K] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &K> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(K::is_negligible)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && self.near(&Self::identity(self.rows))
    }

    /// Exact equality for exact scalars, tolerance for floats.
    pub fn near(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(&other.data).all(|(a, b)| a.near(b))
    }

    pub fn map<L, F: Fn(&K) -> L>(&self, f: F) -> Matrix<L> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, k: &K) -> Self {
        self.map(|x| x.clone() * k.clone())
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

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        if self.shape() != o.shape() {
            return Err(self.mismatch("+", o));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        self.checked_add(&-o)
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(self.mismatch("*", o));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_negligible() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_negligible() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    fn mismatch(&self, op: &str, o: &Self) -> Error {
        Error::Shape(format!(
            "{}x{} {op} {}x{}",
            self.rows, self.cols, o.rows, o.cols
        ))
    }

    /// Kronecker product; row index of `(i, k)` is `i * other.rows + k`.
    pub fn kron(&self, o: &Self) -> Self {
        let mut out = Self::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_negligible() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out[(i * o.rows + k, j * o.cols + l)] = a.clone() * o[(k, l)].clone();
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(blocks: &[Self]) -> Self {
        let r = blocks.iter().map(|b| b.rows).sum();
        let c = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                let v = self[(r0 + i, c0 + j)].clone() + b[(i, j)].clone();
                self[(r0 + i, c0 + j)] = v;
            }
        }
    }

    pub fn trace(&self) -> K {
        (0..self.rows.min(self.cols)).fold(K::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Row-reduces a copy, returning (reduced matrix, pivot columns, determinant factor).
    fn eliminate(&self, augment: Option<&Self>) -> (Self, Option<Self>, Vec<usize>, K) {
        let mut a = self.clone();
        let mut b = augment.cloned();
        let mut det = K::one();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let mut best: Option<usize> = None;
            for i in r..a.rows {
                let v = &a[(i, c)];
                if v.is_negligible() {
                    continue;
                }
                match best {
                    None => best = Some(i),
                    Some(bi) if v.better_pivot(&a[(bi, c)]) => best = Some(i),
                    _ => {}
                }
            }
            let Some(p) = best else {
                det = K::zero();
                continue;
            };
            if p != r {
                a.swap_rows(p, r);
                if let Some(b) = b.as_mut() {
                    b.swap_rows(p, r);
                }
                det = -det;
            }
            let piv = a[(r, c)].clone();
            det = det * piv.clone();
            for j in 0..a.cols {
                a[(r, j)] = a[(r, j)].clone() / piv.clone();
            }
            if let Some(b) = b.as_mut() {
                for j in 0..b.cols {
                    b[(r, j)] = b[(r, j)].clone() / piv.clone();
                }
            }
            for i in 0..a.rows {
                if i == r {
                    continue;
                }
                let f = a[(i, c)].clone();
                if f.is_negligible() {
                    continue;
                }
                for j in 0..a.cols {
                    let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                    a[(i, j)] = v;
                }
                if let Some(b) = b.as_mut() {
                    for j in 0..b.cols {
                        let v = b[(i, j)].clone() - f.clone() * b[(r, j)].clone();
                        b[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        if pivots.len() < a.rows.min(a.cols) || a.rows != a.cols {
            det = K::zero();
        }
        (a, b, pivots, det)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.eliminate(None).2.len()
    }

    pub fn det(&self) -> Result<K> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        if self.rows == 0 {
            return Ok(K::one());
        }
        Ok(self.eliminate(None).3)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "inverse of {}x{}",
                self.rows, self.cols
            )));
        }
        let (_, inv, pivots, _) = self.eliminate(Some(&Self::identity(self.rows)));
        if pivots.len() < self.rows {
            return Err(Error::NotInvertible);
        }
        Ok(inv.expect("augmented"))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "power of {}x{}",
                self.rows, self.cols
            )));
        }
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Coefficients `[1, c1, ..., cn]` of det(t - M) = t^n + c1 t^(n-1) + ... + cn.
    pub fn char_poly(&self) -> Result<Vec<K>> {
        if !self.is_square() {
            return Err(Error::Shape(
                "characteristic polynomial of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut coeffs = vec![K::one()];
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            let mut prev = m.clone();
            for i in 0..n {
                prev[(i, i)] = prev[(i, i)].clone() + coeffs[k - 1].clone();
            }
            m = self * &prev;
            let c = -(m.trace() / K::from_i64(k as i64));
            coeffs.push(c);
        }
        Ok(coeffs)
    }

    pub fn is_nilpotent(&self) -> bool {
        self.is_square()
            && self
                .pow(self.rows as i64)
                .map(|p| p.is_zero())
                .unwrap_or(false)
    }

    /// log(M) for M = Id + N with N strictly graded by `grading`.
    pub fn nilpotent_log(&self, grading: &Grading) -> Result<Self> {
        let n = self.rows;
        if !self.is_square() || grading.len() != n {
            return Err(Error::Shape(format!(
                "{}x{} matrix with a grading of length {}",
                self.rows,
                self.cols,
                grading.len()
            )));
        }
        let nil = self - &Self::identity(n);
        for i in 0..n {
            for j in 0..n {
                if !nil[(i, j)].is_negligible() && !grading.allows(i, j) {
                    return Err(Error::NotUnipotent);
                }
            }
        }
        Ok(log_series(&nil, grading.depth()))
    }

    /// exp(N) for nilpotent N.
    pub fn nilpotent_exp(&self) -> Result<Self> {
        if !self.is_nilpotent() {
            return Err(Error::NotUnipotent);
        }
        let n = self.rows;
        let mut acc = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=n {
            term = (&term * self).scale(&K::ratio(1, k as i64));
            acc = &acc + &term;
        }
        Ok(acc)
    }
}

fn log_series<K: Scalar>(nil: &Matrix<K>, depth: usize) -> Matrix<K> {
    let n = nil.rows;
    let mut acc = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n);
    for s in 1..=depth.max(1) {
        power = &power * nil;
        if power.is_zero() {
            break;
        }
        let sign = if s % 2 == 1 { 1 } else { -1 };
        acc = &acc + &power.scale(&K::ratio(sign, s as i64));
    }
    acc
}

impl Matrix<Rational> {
    pub fn to_scalar<L: Scalar>(&self) -> Matrix<L> {
        self.map(L::from_rational)
    }
}

/// Assigns a level to each basis index; a graded-nilpotent matrix only
/// has entries between strictly ordered levels in one fixed sense.
#[derive(Clone, Debug)]
pub struct Grading {
    levels: Vec<Rational>,
    raising: bool,
}

impl Grading {
    /// Nonzero `(i, j)` requires `level[i] < level[j]` (upper triangular when levels increase).
    pub fn upper(levels: Vec<Rational>) -> Self {
        Self {
            levels,
            raising: false,
        }
    }

    /// Nonzero `(i, j)` requires `level[i] > level[j]`.
    pub fn lower(levels: Vec<Rational>) -> Self {
        Self {
            levels,
            raising: true,
        }
    }

    pub fn by_index_upper(n: usize) -> Self {
        Self::upper((0..n as i64).map(crate::scalar::int).collect())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn allows(&self, i: usize, j: usize) -> bool {
        if self.raising {
            self.levels[i] > self.levels[j]
        } else {
            self.levels[i] < self.levels[j]
        }
    }

    fn depth(&self) -> usize {
        let mut l = self.levels.clone();
        l.sort();
        l.dedup();
        l.len().saturating_sub(1)
    }
}

impl<K> Index<(usize, usize)> for Matrix<K> {
    type Output = K;
    fn index(&self, (i, j): (usize, usize)) -> &K {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl<K> IndexMut<(usize, usize)> for Matrix<K> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut K {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; the checked_* methods report it.
impl<K: Scalar> Add for &Matrix<K> {
    type Output = Matrix<K>;
    fn add(self, o: &Matrix<K>) -> Matrix<K> {
        self.checked_add(o).unwrap()
    }
}

impl<K: Scalar> Sub for &Matrix<K> {
    type Output = Matrix<K>;
    fn sub(self, o: &Matrix<K>) -> Matrix<K> {
        self.checked_sub(o).unwrap()
    }
}

impl<K: Scalar> Mul for &Matrix<K> {
    type Output = Matrix<K>;
    fn mul(self, o: &Matrix<K>) -> Matrix<K> {
        self.checked_mul(o).unwrap()
    }
}

impl<K: Scalar> Neg for &Matrix<K> {
    type Output = Matrix<K>;
    fn neg(self) -> Matrix<K> {
        self.map(|x| -x.clone())
    }
}

impl<K: Scalar> fmt::Display for Matrix<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(Scalar::to_text).collect();
        let w = cells.iter().map(String::len).max().unwrap_or(0);
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>w$}", cells[i * self.cols + j])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
