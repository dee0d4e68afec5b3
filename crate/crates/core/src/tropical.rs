//! The min-plus semiring and dense min-plus matrices.
//!
//! Scalars are `f64` values with `+inf` playing the role of the additive
//! identity. `NaN` and `-inf` are rejected at construction, so sums of
//! admissible values never produce `inf - inf`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of the min-plus semiring: a finite real or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TropicalScalar(f64);

impl TropicalScalar {
    /// Additive identity, `+inf`.
    pub const INF: TropicalScalar = TropicalScalar(f64::INFINITY);
    /// Multiplicative identity, `0`.
    pub const UNIT: TropicalScalar = TropicalScalar(0.0);

    pub fn new(value: f64) -> Result<Self> {
        check_admissible(value)?;
        Ok(TropicalScalar(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_inf(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// `a ⊕ b = min(a, b)`
    #[inline]
    pub fn oplus(self, other: Self) -> Self {
        TropicalScalar(self.0.min(other.0))
    }

    /// `a ⊗ b = a + b`, with `+inf` absorbing.
    #[inline]
    pub fn otimes(self, other: Self) -> Self {
        TropicalScalar(self.0 + other.0)
    }
}

impl fmt::Display for TropicalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for TropicalScalar {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        TropicalScalar::new(value)
    }
}

fn check_admissible(value: f64) -> Result<()> {
    if value.is_nan() {
        return Err(Error::Domain("NaN is not a min-plus scalar".into()));
    }
    if value == f64::NEG_INFINITY {
        return Err(Error::Domain("-inf is not a min-plus scalar".into()));
    }
    Ok(())
}

/// Dense row-major min-plus matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropicalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TropicalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for &v in &data {
            check_admissible(v)?;
        }
        Ok(TropicalMatrix { rows, cols, data })
    }

    /// Build from a list of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n * m);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != m {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {m}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        TropicalMatrix::new(n, m, data)
    }

    /// Matrix with every entry equal to `value`.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        check_admissible(value)?;
        Ok(TropicalMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        })
    }

    /// The min-plus identity: `0` on the diagonal, `+inf` elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![f64::INFINITY; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        TropicalMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Column vector (n x 1).
    pub fn column_vector(values: &[f64]) -> Result<Self> {
        TropicalMatrix::new(values.len(), 1, values.to_vec())
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|v| !v.is_nan() && *v != f64::NEG_INFINITY));
        TropicalMatrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn entry(&self, i: usize, j: usize) -> TropicalScalar {
        TropicalScalar(self.get(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        check_admissible(value)?;
        self.data[i * self.cols + j] = value;
        Ok(())
    }

    #[inline]
    pub(crate) fn set_raw(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        TropicalMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// The submatrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(Error::Shape(format!(
                "column index {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            data.extend(columns.iter().map(|&c| self.get(i, c)));
        }
        Ok(TropicalMatrix::from_raw(self.rows, columns.len(), data))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Exact symmetry `a_ij == a_ji`.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Classical scalar multiple `c * A` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor {c} must be positive")));
        }
        Ok(TropicalMatrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * c).collect(),
        ))
    }

    /// Entrywise `min`, the matrix `⊕`.
    pub fn oplus(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot combine {:?} with {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.min(*b))
            .collect();
        Ok(TropicalMatrix::from_raw(self.rows, self.cols, data))
    }

    /// Entrywise `a <= b`.
    pub fn le(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    /// Largest absolute entrywise difference; `inf` if the `inf` patterns differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                if a == b {
                    0.0
                } else if a.is_infinite() || b.is_infinite() {
                    f64::INFINITY
                } else {
                    (a - b).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Render as header-free CSV, writing `inf` for `+inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format_entry(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse header-free CSV. The token `inf` (any case, optional `+`) is `+inf`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for token in line.split(',') {
                row.push(parse_entry(token.trim()).map_err(|m| Error::parse(lineno + 1, m))?);
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(
                        lineno + 1,
                        format!("expected {} entries, found {}", first.len(), row.len()),
                    ));
                }
            }
            rows.push(row);
        }
        TropicalMatrix::from_rows(&rows)
    }
}

fn format_entry(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_entry(token: &str) -> std::result::Result<f64, String> {
    let unsigned = token.strip_prefix('+').unwrap_or(token);
    if unsigned.eq_ignore_ascii_case("inf") || unsigned.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    let v: f64 = token
        .parse()
        .map_err(|_| format!("cannot parse {token:?} as a number"))?;
    if v.is_nan() || v == f64::NEG_INFINITY {
        return Err(format!("{token:?} is not an admissible min-plus entry"));
    }
    Ok(v)
}

/// Min-plus product `(A ⊗ B)_ij = min_k (a_ik + b_kj)`.
pub fn mp_multiply(a: &TropicalMatrix, b: &TropicalMatrix) -> Result<TropicalMatrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "inner dimensions disagree: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (n, m, d) = (a.rows, a.cols, b.cols);
    let mut out = vec![f64::INFINITY; n * d];
    for i in 0..n {
        let out_row = &mut out[i * d..(i + 1) * d];
        for k in 0..m {
            let aik = a.data[i * m + k];
            if aik == f64::INFINITY {
                continue;
            }
            let b_row = &b.data[k * d..(k + 1) * d];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                let s = aik + bkj;
                if s < *o {
                    *o = s;
                }
            }
        }
    }
    Ok(TropicalMatrix::from_raw(n, d, out))
}

/// `A^{⊗ power}`, with `A^{⊗0} = I`.
pub fn mp_power(a: &TropicalMatrix, power: usize) -> Result<TropicalMatrix> {
    require_square(a)?;
    let mut acc = TropicalMatrix::identity(a.rows);
    for _ in 0..power {
        acc = mp_multiply(&acc, a)?;
    }
    Ok(acc)
}

fn require_square(a: &TropicalMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            a.rows, a.cols
        )))
    }
}

/// Kleene star `I ⊕ A ⊕ A^2 ⊕ ...` computed with the Floyd–Warshall
/// recurrence. Fails if the precedence graph has a negative cycle.
pub fn kleene_star(a: &TropicalMatrix) -> Result<TropicalMatrix> {
    require_square(a)?;
    let n = a.rows;
    let mut s = a.data.clone();
    for i in 0..n {
        let d = &mut s[i * n + i];
        *d = d.min(0.0);
    }
    for k in 0..n {
        for i in 0..n {
            let sik = s[i * n + k];
            if sik == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let via = sik + s[k * n + j];
                if via < s[i * n + j] {
                    s[i * n + j] = via;
                }
            }
        }
        if let Some(node) = (0..n).find(|&i| s[i * n + i] < 0.0) {
            return Err(Error::NegativeCycle { node });
        }
    }
    Ok(TropicalMatrix::from_raw(n, n, s))
}

/// Truncated series `I ⊕ A ⊕ ... ⊕ A^{⊗ max_power}` by repeated products.
///
/// Slower than [`kleene_star`] but follows the series literally; for inputs
/// without negative cycles it agrees with the star once
/// `max_power >= n - 1`.
pub fn kleene_series(a: &TropicalMatrix, max_power: usize) -> Result<TropicalMatrix> {
    require_square(a)?;
    let mut term = TropicalMatrix::identity(a.rows);
    let mut sum = term.clone();
    for _ in 0..max_power {
        term = mp_multiply(&term, a)?;
        sum = sum.oplus(&term)?;
    }
    Ok(sum)
}

/// Whether `A ⊗ A` equals `A` within `tol`; `inf` only matches `inf`.
pub fn is_idempotent(a: &TropicalMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    match mp_multiply(a, a) {
        Ok(sq) => sq.max_abs_diff(a) <= tol,
        Err(_) => false,
    }
}

/// Frobenius norm of `A - B`; defined only for finite matrices.
pub fn frobenius_distance(a: &TropicalMatrix, b: &TropicalMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "cannot compare {:?} with {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(
            "the Frobenius objective needs finite matrices".into(),
        ));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Frobenius norm of a finite matrix.
pub fn frobenius_norm(a: &TropicalMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::Domain(
            "the Frobenius norm needs a finite matrix".into(),
        ));
    }
    Ok(a.data.iter().map(|x| x * x).sum::<f64>().sqrt())
}
