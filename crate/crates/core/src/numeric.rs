//! Exact rational scalars, vectors and affine maps.
//!
//! Every value a transformer computes lives here. Rationals are kept in
//! lowest terms after every operation, so structural equality is value
//! equality and [`Rational::bit_length`] is well defined.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("dimension mismatch: expected width {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid rational literal {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("matrix entry ({row}, {col}) outside a {rows}x{cols} map")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

/// Arbitrary-precision rational in canonical form (positive denominator,
/// coprime numerator and denominator).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, NumericError> {
        let numer = numer.into();
        let denom = denom.into();
        if denom.is_zero() {
            return Err(NumericError::ZeroDenominator(format!("{numer}/0")));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// `max(0, self)`.
    pub fn relu(&self) -> Self {
        if self.0.is_negative() {
            Rational::zero()
        } else {
            self.clone()
        }
    }

    /// Number of bits needed for the larger of `|numerator|` and the
    /// denominator. Zero is `0/1` and therefore has length 1.
    pub fn bit_length(&self) -> u64 {
        let numer_bits = self.0.numer().magnitude().bits();
        let denom_bits = self.0.denom().magnitude().bits();
        numer_bits.max(denom_bits)
    }

    /// Re-reduces the value. A no-op on anything built through this type,
    /// kept so the canonical-form invariant can be checked directly.
    pub fn canonical(&self) -> Self {
        Rational(BigRational::new(self.0.numer().clone(), self.0.denom().clone()))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_digits(s: &str, signed: bool, whole: &str) -> Result<BigInt, NumericError> {
    let body = if signed { s.strip_prefix('-').unwrap_or(s) } else { s };
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NumericError::Parse(whole.to_string()));
    }
    BigInt::from_str(s).map_err(|_| NumericError::Parse(whole.to_string()))
}

impl FromStr for Rational {
    type Err = NumericError;

    /// Accepts `p/q` or `p`; only the numerator may carry a minus sign.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.split_once('/') {
            Some((p, q)) => {
                let numer = parse_digits(p, true, s)?;
                let denom = parse_digits(q, false, s)?;
                Rational::new(numer, denom).map_err(|_| NumericError::ZeroDenominator(s.to_string()))
            }
            None => Ok(Rational::from_integer(parse_digits(t, true, s)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fixed-width vector of rationals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RationalVector(entries)
    }

    pub fn zeros(width: usize) -> Self {
        RationalVector(vec![Rational::zero(); width])
    }

    pub fn from_ints(values: &[i64]) -> Self {
        values.iter().map(|&v| Rational::from(v)).collect()
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.0.get(k)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    /// Copy of `self` with coordinate `k` replaced by `max(0, self[k])`.
    pub fn relu_at(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.0[k] = out.0[k].relu();
        out
    }

    pub fn add(&self, other: &RationalVector) -> Result<RationalVector, NumericError> {
        check_width(self.width(), other.width())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RationalVector) -> Result<RationalVector, NumericError> {
        check_width(self.width(), other.width())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn max_bit_length(&self) -> u64 {
        self.0.iter().map(Rational::bit_length).max().unwrap_or(0)
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RationalVector(iter.into_iter().collect())
    }
}

impl std::ops::Index<usize> for RationalVector {
    type Output = Rational;
    fn index(&self, k: usize) -> &Rational {
        &self.0[k]
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn check_width(expected: usize, actual: usize) -> Result<(), NumericError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NumericError::Dimension { expected, actual })
    }
}

/// Exact inner product.
pub fn dot(u: &RationalVector, v: &RationalVector) -> Result<Rational, NumericError> {
    check_width(u.width(), v.width())?;
    let mut acc = Rational::zero();
    for (a, b) in u.iter().zip(v.iter()) {
        if !a.is_zero() && !b.is_zero() {
            acc = acc + a * b;
        }
    }
    Ok(acc)
}

/// `x ↦ Qx + b`. The matrix is stored row-wise with zero entries omitted;
/// the models built by the translators are wide and very sparse.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffineMap {
    cols: usize,
    rows: Vec<Vec<(usize, Rational)>>,
    bias: RationalVector,
}

impl AffineMap {
    pub fn from_dense(matrix: Vec<Vec<Rational>>, bias: RationalVector) -> Result<Self, NumericError> {
        check_width(matrix.len(), bias.width())?;
        let cols = matrix.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(matrix.len());
        for row in matrix {
            check_width(cols, row.len())?;
            rows.push(
                row.into_iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .collect(),
            );
        }
        Ok(AffineMap { cols, rows, bias })
    }

    /// Builds a map from `(row, col, value)` triples. Repeated coordinates
    /// are summed.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Rational)>,
        bias: RationalVector,
    ) -> Result<Self, NumericError> {
        check_width(rows, bias.width())?;
        let mut grid: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
        for (r, c, x) in entries {
            if r >= rows || c >= cols {
                return Err(NumericError::EntryOutOfRange { row: r, col: c, rows, cols });
            }
            grid[r].push((c, x));
        }
        for row in &mut grid {
            row.sort_by_key(|(c, _)| *c);
            let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(row.len());
            for (c, x) in row.drain(..) {
                match merged.last_mut() {
                    Some((lc, lx)) if *lc == c => *lx = &*lx + &x,
                    _ => merged.push((c, x)),
                }
            }
            merged.retain(|(_, x)| !x.is_zero());
            *row = merged;
        }
        Ok(AffineMap { cols, rows: grid, bias })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            cols: n,
            rows: (0..n).map(|k| vec![(k, Rational::one())]).collect(),
            bias: RationalVector::zeros(n),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        AffineMap {
            cols,
            rows: vec![Vec::new(); rows],
            bias: RationalVector::zeros(rows),
        }
    }

    pub fn input_width(&self) -> usize {
        self.cols
    }

    pub fn output_width(&self) -> usize {
        self.rows.len()
    }

    pub fn bias(&self) -> &RationalVector {
        &self.bias
    }

    pub fn entry(&self, row: usize, col: usize) -> Rational {
        self.rows[row]
            .iter()
            .find(|(c, _)| *c == col)
            .map_or_else(Rational::zero, |(_, x)| x.clone())
    }

    /// Nonzero entries of row `row` as `(col, value)` pairs.
    pub fn row(&self, row: usize) -> &[(usize, Rational)] {
        &self.rows[row]
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![Rational::zero(); self.cols];
                for (c, x) in row {
                    dense[*c] = x.clone();
                }
                dense
            })
            .collect()
    }

    /// Same matrix, zero bias.
    pub fn linear_part(&self) -> Self {
        AffineMap {
            cols: self.cols,
            rows: self.rows.clone(),
            bias: RationalVector::zeros(self.rows.len()),
        }
    }

    pub fn apply(&self, x: &RationalVector) -> Result<RationalVector, NumericError> {
        check_width(self.cols, x.width())?;
        Ok(self.eval(|c| &x[c]))
    }

    /// Applies the map to the concatenation `(x, y)` without materializing it.
    pub fn apply_concat(&self, x: &RationalVector, y: &RationalVector) -> Result<RationalVector, NumericError> {
        check_width(self.cols, x.width() + y.width())?;
        let split = x.width();
        Ok(self.eval(|c| if c < split { &x[c] } else { &y[c - split] }))
    }

    fn eval<'a>(&self, input: impl Fn(usize) -> &'a Rational) -> RationalVector {
        self.rows
            .iter()
            .zip(self.bias.iter())
            .map(|(row, b)| {
                let mut acc = b.clone();
                for (c, q) in row {
                    let x = input(*c);
                    if !x.is_zero() {
                        acc = acc + q * x;
                    }
                }
                acc
            })
            .collect()
    }
}
