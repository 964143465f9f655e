use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Square matrix over ℕ stored by rows: `rows[y]` lists the nonzero
/// entries `(x, T[y][x])` sorted by `x`. Row `y` is the source register.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    dim: usize,
    rows: Vec<Vec<(usize, BigUint)>>,
}

impl Matrix {
    pub fn zero(dim: usize) -> Self {
        Matrix { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Matrix { dim, rows: (0..dim).map(|i| vec![(i, BigUint::from(1u32))]).collect() }
    }

    pub fn from_dense(rows: Vec<Vec<BigUint>>) -> Result<Self> {
        let dim = rows.len();
        let mut m = Matrix::zero(dim);
        for (y, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::MalformedSst(format!("row {y} has {} entries, expected {dim}", row.len())));
            }
            m.rows[y] = row.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> Vec<Vec<BigUint>> {
        let mut out = vec![vec![BigUint::zero(); self.dim]; self.dim];
        for (y, row) in self.rows.iter().enumerate() {
            for (x, v) in row {
                out[y][*x] = v.clone();
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero entries of row `y`.
    pub fn row(&self, y: usize) -> &[(usize, BigUint)] {
        &self.rows[y]
    }

    pub fn get(&self, y: usize, x: usize) -> BigUint {
        match self.rows[y].binary_search_by_key(&x, |e| e.0) {
            Ok(i) => self.rows[y][i].1.clone(),
            Err(_) => BigUint::zero(),
        }
    }

    /// `T[y][x] += v`.
    pub fn add(&mut self, y: usize, x: usize, v: &BigUint) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.rows[y];
        match row.binary_search_by_key(&x, |e| e.0) {
            Ok(i) => row[i].1 += v,
            Err(i) => row.insert(i, (x, v.clone())),
        }
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); self.dim];
        for (y, vy) in v.iter().enumerate() {
            if vy.is_zero() {
                continue;
            }
            for (x, c) in &self.rows[y] {
                out[*x] += vy * c;
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let mut out = Matrix::zero(self.dim);
        for (y, row) in self.rows.iter().enumerate() {
            let mut acc = vec![BigUint::zero(); self.dim];
            for (k, c) in row {
                for (x, d) in &other.rows[*k] {
                    acc[*x] += c * d;
                }
            }
            out.rows[y] = acc.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        }
        out
    }

    /// The submatrix on the given registers, in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Matrix {
        let mut new_index = vec![usize::MAX; self.dim];
        for (i, &k) in keep.iter().enumerate() {
            new_index[k] = i;
        }
        let rows = keep
            .iter()
            .map(|&y| {
                let mut row: Vec<(usize, BigUint)> = self.rows[y]
                    .iter()
                    .filter(|(x, _)| new_index[*x] != usize::MAX)
                    .map(|(x, v)| (new_index[*x], v.clone()))
                    .collect();
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        Matrix { dim: keep.len(), rows }
    }
}

pub fn dot(u: &[BigUint], v: &[BigUint]) -> BigUint {
    u.iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum()
}
