//! Square integer matrices with exact determinant and inverse.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{HybridError, Result};
use crate::point::Rational;

/// Shape of a canonical choice matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChoiceStyle {
    /// Ones along the top row and the diagonal, zeros elsewhere.
    #[default]
    OnesOnTopRow,
    /// Ones everywhere on and above the diagonal.
    FullUpperTriangle,
}

impl std::str::FromStr for ChoiceStyle {
    type Err = HybridError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top-row" | "ones-on-top-row" => Ok(ChoiceStyle::OnesOnTopRow),
            "upper-triangle" | "full-upper-triangle" => Ok(ChoiceStyle::FullUpperTriangle),
            other => Err(HybridError::Parse(format!("unknown choice matrix style `{other}`"))),
        }
    }
}

/// A square integer matrix. Rows of a choice matrix express the universe
/// and the kept partition pieces in terms of refinement pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceMatrix {
    rows: Vec<Vec<i64>>,
}

impl ChoiceMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(HybridError::DimensionMismatch {
                expected: format!("{n} columns"),
                found: format!("a row of length {}", bad.len()),
            });
        }
        Ok(ChoiceMatrix { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        ChoiceMatrix { rows }
    }

    pub fn canonical(dim: usize, style: ChoiceStyle) -> Self {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let on = match style {
                            ChoiceStyle::OnesOnTopRow => i == 0 || i == j,
                            ChoiceStyle::FullUpperTriangle => j >= i,
                        };
                        i64::from(on)
                    })
                    .collect()
            })
            .collect();
        ChoiceMatrix { rows }
    }

    /// Parses rows separated by `;` or newlines, entries by commas or
    /// whitespace: `1 1 1; 0 1 0; 0 0 1`.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .split([';', '\n'])
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(|r| {
                r.split([',', ' ', '\t'])
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<i64>()
                            .map_err(|_| HybridError::Parse(format!("invalid matrix entry `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ChoiceMatrix::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(HybridError::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim()),
                found: format!("{0}x{0}", other.dim()),
            });
        }
        let n = self.dim();
        let mut rows = vec![vec![0i64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = 0i64;
                for k in 0..n {
                    let t = self.rows[i][k]
                        .checked_mul(other.rows[k][j])
                        .ok_or(HybridError::Overflow("matrix product"))?;
                    acc = acc.checked_add(t).ok_or(HybridError::Overflow("matrix product"))?;
                }
                *cell = acc;
            }
        }
        Ok(ChoiceMatrix { rows })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.dim();
        let mut m: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        if n == 0 {
            return sign;
        }
        sign * &m[n - 1][n - 1]
    }

    /// Exact inverse. Fails unless the determinant is `±1`.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det.abs() != BigInt::one() {
            return Err(HybridError::NotUnimodular {
                determinant: det.to_string(),
            });
        }
        let n = self.dim();
        let mut a: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .map(|&x| Rational::from_integer(x.into()))
                    .chain((0..n).map(|j| Rational::from_integer(i64::from(i == j).into())))
                    .collect()
            })
            .collect();
        for col in 0..n {
            let p = (col..n)
                .find(|&i| !a[i][col].is_zero())
                .expect("unimodular matrix has a pivot in every column");
            a.swap(col, p);
            let pivot = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = &*x / &pivot;
            }
            let pivot_row = a[col].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == col || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * p;
                }
            }
        }
        let rows = a
            .into_iter()
            .map(|r| {
                r[n..]
                    .iter()
                    .map(|x| {
                        debug_assert!(x.is_integer());
                        x.to_integer().to_i64().ok_or(HybridError::Overflow("matrix inverse"))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChoiceMatrix { rows })
    }
}

impl fmt::Display for ChoiceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .flatten()
            .map(|x| x.to_string().len())
            .max()
            .unwrap_or(1);
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = r.iter().map(|x| format!("{x:>width$}")).collect();
            f.write_str(&cells.join(" "))?;
        }
        Ok(())
    }
}

/// `c⁻¹`, or a unimodularity error carrying the determinant.
pub fn integer_inverse(c: &ChoiceMatrix) -> Result<ChoiceMatrix> {
    c.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_row_example_and_inverse() {
        let c = ChoiceMatrix::canonical(3, ChoiceStyle::OnesOnTopRow);
        assert_eq!(c.rows(), &[vec![1, 1, 1], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(
            c.inverse().unwrap().rows(),
            &[vec![1, -1, -1], vec![0, 1, 0], vec![0, 0, 1]]
        );
    }

    #[test]
    fn upper_triangle_inverse_is_a_band() {
        let c = ChoiceMatrix::canonical(4, ChoiceStyle::FullUpperTriangle);
        let inv = c.inverse().unwrap();
        assert_eq!(
            inv.rows(),
            &[
                vec![1, -1, 0, 0],
                vec![0, 1, -1, 0],
                vec![0, 0, 1, -1],
                vec![0, 0, 0, 1]
            ]
        );
    }

    #[test]
    fn determinant_with_pivoting() {
        let c = ChoiceMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(c.determinant(), BigInt::from(-1));
        assert_eq!(c.inverse().unwrap(), c);
        let c = ChoiceMatrix::new(vec![vec![2, 3, 1], vec![4, 1, 5], vec![6, 2, 3]]).unwrap();
        assert_eq!(c.determinant(), BigInt::from(42));
        assert_eq!(ChoiceMatrix::identity(0).determinant(), BigInt::one());
    }

    #[test]
    fn non_unimodular_is_rejected() {
        let c = ChoiceMatrix::new(vec![vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(
            c.inverse(),
            Err(HybridError::NotUnimodular {
                determinant: "2".into()
            })
        );
    }

    #[test]
    fn parse_and_shape_errors() {
        let c = ChoiceMatrix::parse("1 1 1; 0 1 0\n0,0,1").unwrap();
        assert_eq!(c, ChoiceMatrix::canonical(3, ChoiceStyle::OnesOnTopRow));
        assert!(ChoiceMatrix::parse("1 1; 0").is_err());
        assert!(ChoiceMatrix::parse("1 x").is_err());
    }
}
