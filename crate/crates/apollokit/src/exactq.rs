//! Exact rational scalars and dense rational matrices.
//!
//! This is the kernel every other module builds on. Scalars are
//! arbitrary-precision rationals kept in lowest terms with positive
//! denominator; matrices are immutable-by-convention dense values, and all
//! operations return new values. Nothing here ever rounds.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use num_traits::ToPrimitive;

/// Exact rational scalar. Always in lowest terms, denominator positive.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Rational from a numerator/denominator pair.
///
/// # Panics
/// Panics if `den == 0`; intended for literal constants.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactqError {
    /// Operand shapes are incompatible.
    DimensionMismatch,
    /// Operation requires a square matrix.
    NotSquare,
    /// Matrix has no inverse.
    Singular,
    /// Entry list does not match the declared shape.
    Shape,
    /// Text could not be parsed as a rational or matrix.
    Parse(String),
}

impl std::fmt::Display for ExactqError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExactqError::DimensionMismatch => write!(f, "matrix dimension mismatch"),
            ExactqError::NotSquare => write!(f, "matrix is not square"),
            ExactqError::Singular => write!(f, "matrix is singular"),
            ExactqError::Shape => write!(f, "entry count does not match declared shape"),
            ExactqError::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

impl std::error::Error for ExactqError {}

/// Parse a rational from `"p/q"`, `"p"`, or a decimal string like `"-0.25"`.
///
/// Decimal strings are read exactly (`"0.1"` becomes 1/10, not the nearest
/// binary float).
pub fn rational_from_str(s: &str) -> Result<Rational, ExactqError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ExactqError::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ExactqError::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ExactqError::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(ExactqError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (sign, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if !frac_part.chars().all(|c| c.is_ascii_digit()) || frac_part.is_empty() {
            return Err(ExactqError::Parse(format!("bad decimal {s:?}")));
        }
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        let whole: BigInt = int_digits
            .parse()
            .map_err(|_| ExactqError::Parse(format!("bad decimal {s:?}")))?;
        let frac: BigInt = frac_part
            .parse()
            .map_err(|_| ExactqError::Parse(format!("bad decimal {s:?}")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let value = Rational::new(whole * &scale + frac, scale);
        return Ok(if sign < 0 { -value } else { value });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| ExactqError::Parse(format!("bad integer {s:?}")))?;
    Ok(Rational::from_integer(n))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl std::fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| rational_to_string(self.at(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self, ExactqError> {
        if entries.len() != rows * cols {
            return Err(ExactqError::Shape);
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ExactqError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(ExactqError::Shape);
        }
        Ok(RationalMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from i64 literals.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat(v)).collect())
                .collect(),
        )
        .expect("literal rows are rectangular")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
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

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = RationalMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, s: &Rational) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn neg(&self) -> RationalMatrix {
        self.scale(&rat(-1))
    }

    pub fn add(&self, other: &RationalMatrix) -> Result<RationalMatrix, ExactqError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ExactqError::DimensionMismatch);
        }
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &RationalMatrix) -> Result<RationalMatrix, ExactqError> {
        self.add(&other.neg())
    }

    /// Entry-wise float image of the matrix.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.at(i, j).to_f64().expect("rational magnitude fits in f64"))
                    .collect()
            })
            .collect()
    }
}

/// Exact matrix product.
pub fn mat_mul(a: &RationalMatrix, b: &RationalMatrix) -> Result<RationalMatrix, ExactqError> {
    if a.cols != b.rows {
        return Err(ExactqError::DimensionMismatch);
    }
    let mut out = RationalMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.at(i, k);
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let v = out.at(i, j) + aik * b.at(k, j);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Exact congruence transform `wᵀ · q · w`.
///
/// `w` may be rectangular; `q` must be square with as many rows as `w`.
pub fn congruence(w: &RationalMatrix, q: &RationalMatrix) -> Result<RationalMatrix, ExactqError> {
    if !q.is_square() {
        return Err(ExactqError::NotSquare);
    }
    if w.rows != q.rows {
        return Err(ExactqError::DimensionMismatch);
    }
    mat_mul(&mat_mul(&w.transpose(), q)?, w)
}

/// Clear each row to integers by its denominator lcm; returns the integer
/// matrix and the product of all row multipliers.
fn clear_rows_to_integers(m: &RationalMatrix) -> (Vec<Vec<BigInt>>, BigInt) {
    let n = m.rows;
    let mut scale_product = BigInt::one();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut lcm = BigInt::one();
        for j in 0..m.cols {
            lcm = num::integer::lcm(lcm, m.at(i, j).denom().clone());
        }
        let row: Vec<BigInt> = (0..m.cols)
            .map(|j| {
                let e = m.at(i, j);
                e.numer() * (&lcm / e.denom())
            })
            .collect();
        scale_product *= &lcm;
        rows.push(row);
    }
    (rows, scale_product)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
///
/// Rows are first cleared to integers; every interior division in the
/// elimination is exact by the Sylvester identity.
pub fn determinant(m: &RationalMatrix) -> Result<Rational, ExactqError> {
    if !m.is_square() {
        return Err(ExactqError::NotSquare);
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Rational::one());
    }
    let (mut a, scale) = clear_rows_to_integers(m);
    let mut sign = 1i64;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(Rational::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det_int = a[n - 1][n - 1].clone() * BigInt::from(sign);
    Ok(Rational::new(det_int, scale))
}

/// Exact inverse by Gauss-Jordan elimination over the rationals.
pub fn inverse(m: &RationalMatrix) -> Result<RationalMatrix, ExactqError> {
    if !m.is_square() {
        return Err(ExactqError::NotSquare);
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = RationalMatrix::identity(n);
    for k in 0..n {
        let pivot_row = (k..n)
            .find(|&r| !a.at(r, k).is_zero())
            .ok_or(ExactqError::Singular)?;
        if pivot_row != k {
            for j in 0..n {
                let (x, y) = (a.at(k, j).clone(), a.at(pivot_row, j).clone());
                a.set(k, j, y);
                a.set(pivot_row, j, x);
                let (x, y) = (inv.at(k, j).clone(), inv.at(pivot_row, j).clone());
                inv.set(k, j, y);
                inv.set(pivot_row, j, x);
            }
        }
        let pivot = a.at(k, k).clone();
        for j in 0..n {
            a.set(k, j, a.at(k, j) / &pivot);
            inv.set(k, j, inv.at(k, j) / &pivot);
        }
        for i in 0..n {
            if i == k || a.at(i, k).is_zero() {
                continue;
            }
            let factor = a.at(i, k).clone();
            for j in 0..n {
                let av = a.at(i, j) - &factor * a.at(k, j);
                a.set(i, j, av);
                let iv = inv.at(i, j) - &factor * inv.at(k, j);
                inv.set(i, j, iv);
            }
        }
    }
    Ok(inv)
}

/// Matrix as a JSON array of row arrays of canonical rational strings.
pub fn matrix_to_json(m: &RationalMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.cols())
                        .map(|j| serde_json::Value::String(rational_to_string(m.at(i, j))))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Parse a matrix from the JSON shape produced by [`matrix_to_json`].
///
/// Entries may be rational strings or JSON numbers (integers only, so no
/// precision is silently lost).
pub fn matrix_from_json(v: &serde_json::Value) -> Result<RationalMatrix, ExactqError> {
    let rows = v
        .as_array()
        .ok_or_else(|| ExactqError::Parse("matrix JSON must be an array of rows".into()))?;
    let mut out: Vec<Vec<Rational>> = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| ExactqError::Parse("matrix row must be an array".into()))?;
        let mut r = Vec::with_capacity(cells.len());
        for cell in cells {
            let value = match cell {
                serde_json::Value::String(s) => rational_from_str(s)?,
                serde_json::Value::Number(num) => {
                    let as_i64 = num
                        .as_i64()
                        .ok_or_else(|| ExactqError::Parse(format!("non-integer number {num}")))?;
                    rat(as_i64)
                }
                other => return Err(ExactqError::Parse(format!("bad matrix entry {other}"))),
            };
            r.push(value);
        }
        out.push(r);
    }
    RationalMatrix::from_rows(out)
}

/// Absolute value helper for tolerance checks on rationals mapped to floats.
pub fn rational_abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_determinant(m: &RationalMatrix) -> Rational {
        let n = m.rows();
        if n == 1 {
            return m.at(0, 0).clone();
        }
        let mut acc = Rational::zero();
        for j in 0..n {
            if m.at(0, j).is_zero() {
                continue;
            }
            let mut minor = RationalMatrix::zeros(n - 1, n - 1);
            for i in 1..n {
                let mut c = 0;
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    minor.set(i - 1, c, m.at(i, k).clone());
                    c += 1;
                }
            }
            let term = m.at(0, j) * naive_determinant(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-9i64..=9, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
    }

    fn square_matrix(n: usize) -> impl Strategy<Value = RationalMatrix> {
        proptest::collection::vec(small_rational(), n * n)
            .prop_map(move |entries| RationalMatrix::new(n, n, entries).unwrap())
    }

    #[test]
    fn identity_product() {
        let i4 = RationalMatrix::identity(4);
        assert_eq!(mat_mul(&i4, &i4).unwrap(), i4);
    }

    #[test]
    fn determinant_of_identity() {
        assert_eq!(determinant(&RationalMatrix::identity(6)).unwrap(), rat(1));
    }

    #[test]
    fn inverse_of_diagonal() {
        let d = RationalMatrix::from_i64_rows(&[&[2, 0, 0, 0], &[0, 2, 0, 0], &[0, 0, 2, 0], &[0, 0, 0, -2]]);
        let inv = inverse(&d).unwrap();
        let mut expected = RationalMatrix::zeros(4, 4);
        for i in 0..3 {
            expected.set(i, i, ratio(1, 2));
        }
        expected.set(3, 3, ratio(-1, 2));
        assert_eq!(inv, expected);
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(inverse(&m), Err(ExactqError::Singular));
    }

    #[test]
    fn congruence_by_identity_is_identity_map() {
        let q = RationalMatrix::from_i64_rows(&[&[0, -4], &[-4, 0]]);
        assert_eq!(congruence(&RationalMatrix::identity(2), &q).unwrap(), q);
    }

    #[test]
    fn rational_string_round_trip() {
        for s in ["3", "-3", "5/7", "-5/7", "0"] {
            let r = rational_from_str(s).unwrap();
            assert_eq!(rational_to_string(&r), s);
        }
        assert_eq!(rational_from_str("0.25").unwrap(), ratio(1, 4));
        assert_eq!(rational_from_str("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(rational_from_str("6/4").unwrap(), ratio(3, 2));
        assert!(rational_from_str("1/0").is_err());
        assert!(rational_from_str("").is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = RationalMatrix::from_rows(vec![
            vec![ratio(1, 2), rat(-3)],
            vec![rat(0), ratio(7, 5)],
        ])
        .unwrap();
        let j = matrix_to_json(&m);
        assert_eq!(matrix_from_json(&j).unwrap(), m);
    }

    proptest! {
        #[test]
        fn mat_mul_is_associative(a in square_matrix(3), b in square_matrix(3), c in square_matrix(3)) {
            let left = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
            let right = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn determinant_is_multiplicative(a in square_matrix(4), b in square_matrix(4)) {
            let ab = mat_mul(&a, &b).unwrap();
            prop_assert_eq!(determinant(&ab).unwrap(),
                determinant(&a).unwrap() * determinant(&b).unwrap());
        }

        #[test]
        fn determinant_matches_cofactor_oracle(a in square_matrix(4)) {
            prop_assert_eq!(determinant(&a).unwrap(), naive_determinant(&a));
        }

        #[test]
        fn determinant_matches_cofactor_oracle_5x5(a in square_matrix(5)) {
            prop_assert_eq!(determinant(&a).unwrap(), naive_determinant(&a));
        }

        #[test]
        fn inverse_times_original_is_identity(a in square_matrix(4)) {
            match inverse(&a) {
                Ok(inv) => {
                    prop_assert_eq!(mat_mul(&inv, &a).unwrap(), RationalMatrix::identity(4));
                    prop_assert_eq!(mat_mul(&a, &inv).unwrap(), RationalMatrix::identity(4));
                }
                Err(ExactqError::Singular) => {
                    prop_assert_eq!(determinant(&a).unwrap(), rat(0));
                }
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }
    }
}
