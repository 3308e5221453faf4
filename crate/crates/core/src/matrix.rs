//! Dense matrices over GF(q), just enough for the encoding maps and rank computations.

use crate::field::{FieldElement, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(field, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.field.modulus();
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// The submatrix made of the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack needs equal row counts");
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Matrix {
            field: self.field,
            rows: self.rows,
            cols,
            data,
        }
    }

    pub fn mul_vec(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        let f = self.field;
        (0..self.rows)
            .map(|i| {
                let acc = self
                    .row(i)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, b)| f.add_raw(acc, f.mul_raw(a, b.value())));
                f.elem(acc)
            })
            .collect()
    }

    /// Rank by Gaussian elimination over GF(q).
    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
                continue;
            };
            if pivot != rank {
                for j in 0..cols {
                    m.swap(pivot * cols + j, rank * cols + j);
                }
            }
            let inv = f.inv_raw(m[rank * cols + col]).expect("pivot is nonzero");
            for j in col..cols {
                m[rank * cols + j] = f.mul_raw(m[rank * cols + j], inv);
            }
            for r in rank + 1..rows {
                let factor = m[r * cols + col];
                if factor == 0 {
                    continue;
                }
                for j in col..cols {
                    let sub = f.mul_raw(factor, m[rank * cols + j]);
                    m[r * cols + j] = f.sub_raw(m[r * cols + j], sub);
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_small() {
        let f = PrimeField::new(5).unwrap();
        let m = Matrix::from_rows(f, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
        let m = Matrix::from_rows(f, &[vec![1, 2], vec![2, 3]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(Matrix::zeros(f, 3, 0).rank(), 0);
        assert_eq!(Matrix::zeros(f, 0, 3).rank(), 0);
        // Dependent only mod 5: row2 = 3 * row1 since 3*2 = 6 = 1.
        let m = Matrix::from_rows(f, &[vec![1, 2, 0], vec![3, 1, 0], vec![0, 0, 1]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn stacking_and_selection() {
        let f = PrimeField::new(7).unwrap();
        let a = Matrix::from_rows(f, &[vec![1], vec![2], vec![3]]);
        let b = Matrix::from_rows(f, &[vec![4], vec![5], vec![6]]);
        let ab = a.hstack(&b);
        assert_eq!(ab.row(1), &[2, 5]);
        let s = ab.select_rows(&[2, 0]);
        assert_eq!(s.row(0), &[3, 6]);
        assert_eq!(s.row(1), &[1, 4]);
        let y = ab.mul_vec(&[f.elem(1), f.elem(1)]);
        assert_eq!(y.iter().map(|e| e.value()).collect::<Vec<_>>(), vec![5, 0, 2]);
    }
}
