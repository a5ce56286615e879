//! Dense row-major matrices over a finite field.

use crate::galois::Field;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("evaluation points are not pairwise distinct")]
    DuplicatePoints,
    #[error("entry {0} is not a field element")]
    NotAnElement(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, size: usize) -> Self {
        let mut m = Self::zeros(field, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    pub fn from_vec(
        field: &Field,
        rows: usize,
        cols: usize,
        data: Vec<u64>,
    ) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(MatrixError::NotAnElement(bad));
        }
        Ok(Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Dimension("ragged rows".into()));
        }
        Self::from_vec(field, rows.len(), cols, rows.concat())
    }

    /// `rows x points.len()` matrix with entry `(i, j) = points[j]^i`.
    pub fn vandermonde(field: &Field, rows: usize, points: &[u64]) -> Result<Self, MatrixError> {
        if let Some(&bad) = points.iter().find(|&&v| !field.contains(v)) {
            return Err(MatrixError::NotAnElement(bad));
        }
        let mut sorted = points.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(MatrixError::DuplicatePoints);
        }
        if rows > points.len() {
            return Err(MatrixError::Dimension(format!(
                "{rows} rows need at least {rows} points, got {}",
                points.len()
            )));
        }
        let cols = points.len();
        let mut m = Self::zeros(field, rows, cols);
        for (j, &a) in points.iter().enumerate() {
            let mut v = 1;
            for i in 0..rows {
                m.data[i * cols + j] = v;
                v = field.mul(v, a);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u64) {
        debug_assert!(self.field.contains(value));
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }

    /// New matrix made of the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Self::zeros(&self.field, self.rows, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for i in 0..self.rows {
                out.data[i * cols.len() + j] = self.get(i, c);
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if self.field != other.field {
            return Err(MatrixError::MixedFields);
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MatrixError::Dimension(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if self.field != other.field {
            return Err(MatrixError::MixedFields);
        }
        if self.cols != other.rows {
            return Err(MatrixError::Dimension(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(i, t);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(t, j)));
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[u64]) -> Result<Vec<u64>, MatrixError> {
        if v.len() != self.rows {
            return Err(MatrixError::Dimension(format!(
                "vector of length {} times {}x{}",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![0u64; self.cols];
        for (t, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(a, self.get(t, j)));
            }
        }
        Ok(out)
    }

    /// Gauss-Jordan inversion with first-nonzero pivoting.
    pub fn invert(&self) -> Result<Matrix, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::Dimension(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let f = &self.field;
        let mut a = self.clone();
        let mut inv = Self::identity(f, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a.get(r, col) != 0)
                .ok_or(MatrixError::Singular)?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let scale = f.inv(a.get(col, col)).expect("pivot is nonzero");
            a.scale_row(col, scale);
            inv.scale_row(col, scale);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col);
                if factor != 0 {
                    a.sub_scaled_row(r, col, factor);
                    inv.sub_scaled_row(r, col, factor);
                }
            }
        }
        Ok(inv)
    }

    /// Solves `x * self = b` for a row vector `x`.
    pub fn solve_left(&self, b: &[u64]) -> Result<Vec<u64>, MatrixError> {
        self.invert()?.left_mul_vec(b)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, row: usize, s: u64) {
        for j in 0..self.cols {
            let idx = row * self.cols + j;
            self.data[idx] = self.field.mul(self.data[idx], s);
        }
    }

    /// `row[target] -= factor * row[source]`
    fn sub_scaled_row(&mut self, target: usize, source: usize, factor: u64) {
        for j in 0..self.cols {
            let v = self.field.mul(factor, self.get(source, j));
            let idx = target * self.cols + j;
            self.data[idx] = self.field.sub(self.data[idx], v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::{smallest_prime_power_geq, FieldSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> Field {
        Field::new(smallest_prime_power_geq(q).unwrap())
    }

    fn naive_mul(a: &Matrix, b: &Matrix) -> Vec<Vec<u64>> {
        let f = a.field();
        (0..a.rows())
            .map(|i| {
                (0..b.cols())
                    .map(|j| {
                        let mut s = 0;
                        for t in 0..a.cols() {
                            s = f.add(s, f.mul(a.get(i, t), b.get(t, j)));
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    fn random(f: &Field, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(0..f.order()))
            .collect();
        Matrix::from_vec(f, rows, cols, data).unwrap()
    }

    #[test]
    fn vandermonde_examples() {
        let f = gf(5);
        let v = Matrix::vandermonde(&f, 2, &[0, 1, 2, 3]).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1, 1, 1, 1], vec![0, 1, 2, 3]]);
        let v = Matrix::vandermonde(&f, 1, &[4, 2]).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1, 1]]);
        let v = Matrix::vandermonde(&f, 3, &[1, 2, 3]).unwrap();
        assert_eq!(
            v.to_rows(),
            vec![vec![1, 1, 1], vec![1, 2, 3], vec![1, 4, 4]]
        );
        assert_eq!(
            Matrix::vandermonde(&f, 2, &[1, 1]).unwrap_err(),
            MatrixError::DuplicatePoints
        );
        assert!(matches!(
            Matrix::vandermonde(&f, 3, &[1, 2]),
            Err(MatrixError::Dimension(_))
        ));
    }

    #[test]
    fn multiplication_examples() {
        let f = gf(5);
        let a = Matrix::from_rows(&f, &[vec![1, 1], vec![0, 1]]).unwrap();
        let b = Matrix::from_rows(&f, &[vec![1], vec![1]]).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_rows(), vec![vec![2], vec![1]]);
        assert_eq!(Matrix::identity(&f, 2).mul(&a).unwrap(), a);
        assert!(matches!(b.mul(&b), Err(MatrixError::Dimension(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [5, 7, 16, 256] {
            let f = gf(q);
            let a = random(&f, 3, 3, &mut rng);
            let b = random(&f, 3, 3, &mut rng);
            assert_eq!(a.mul(&b).unwrap().to_rows(), naive_mul(&a, &b));
        }
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = Matrix::identity(&gf(5), 2);
        let b = Matrix::identity(&gf(7), 2);
        assert_eq!(a.mul(&b).unwrap_err(), MatrixError::MixedFields);
        assert_eq!(a.add(&b).unwrap_err(), MatrixError::MixedFields);
    }

    #[test]
    fn inversion_examples() {
        let f = gf(5);
        let i = Matrix::identity(&f, 3);
        assert_eq!(i.invert().unwrap(), i);
        let a = Matrix::from_rows(&f, &[vec![1, 1], vec![1, 2]]).unwrap();
        let inv = a.invert().unwrap();
        assert_eq!(inv.to_rows(), vec![vec![2, 4], vec![4, 1]]);
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(&f, 2));
        let singular = Matrix::from_rows(&f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(singular.invert().unwrap_err(), MatrixError::Singular);
        let rect = Matrix::zeros(&f, 2, 3);
        assert!(matches!(rect.invert(), Err(MatrixError::Dimension(_))));
    }

    #[test]
    fn every_vandermonde_submatrix_inverts() {
        use itertools::Itertools;
        for n in 2..=10u64 {
            let f = Field::new(smallest_prime_power_geq(n).unwrap());
            let points = f.first_elements(n as usize);
            for k in 1..=n as usize {
                let g = Matrix::vandermonde(&f, k, &points).unwrap();
                for cols in (0..n as usize).combinations(k) {
                    let sub = g.select_columns(&cols);
                    let inv = sub.invert().expect("MDS submatrix");
                    assert_eq!(sub.mul(&inv).unwrap(), Matrix::identity(&f, k));
                }
            }
        }
    }

    #[test]
    fn algebraic_laws_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [
            FieldSpec::prime(7).unwrap(),
            FieldSpec::with_default_modulus(3, 2).unwrap(),
            FieldSpec::with_default_modulus(2, 8).unwrap(),
        ] {
            let f = Field::new(spec);
            for _ in 0..20 {
                let a = random(&f, 3, 4, &mut rng);
                let b = random(&f, 4, 2, &mut rng);
                let c = random(&f, 2, 3, &mut rng);
                let b2 = random(&f, 4, 2, &mut rng);
                let left = a.mul(&b).unwrap().mul(&c).unwrap();
                let right = a.mul(&b.mul(&c).unwrap()).unwrap();
                assert_eq!(left, right);
                let dist = a.mul(&b.add(&b2).unwrap()).unwrap();
                let sum = a.mul(&b).unwrap().add(&a.mul(&b2).unwrap()).unwrap();
                assert_eq!(dist, sum);
            }
        }
    }

    #[test]
    fn solve_left_recovers_row() {
        let f = gf(7);
        let g = Matrix::vandermonde(&f, 3, &[1, 2, 3]).unwrap();
        let x = vec![4, 0, 6];
        let b = g.left_mul_vec(&x).unwrap();
        assert_eq!(g.solve_left(&b).unwrap(), x);
    }
}
