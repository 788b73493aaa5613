use rayon::prelude::*;

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

// Below this many multiply-adds the rayon split costs more than it saves.
const PAR_THRESHOLD: usize = 1 << 16;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_f32(rows: usize, cols: usize, data: &[f32]) -> Self {
        Self::from_vec(rows, cols, data.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_vec(idx.len(), self.cols, data)
    }

    pub fn vstack(parts: &[Matrix]) -> Matrix {
        let cols = parts.first().map(|m| m.cols).unwrap_or(0);
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            assert_eq!(p.cols, cols);
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Matrix::from_vec(rows, cols, data)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · w + bias` where `w` is `(self.cols, out)`.
    pub fn affine(&self, w: &Matrix, bias: &[f64]) -> Matrix {
        assert_eq!(self.cols, w.rows);
        assert_eq!(bias.len(), w.cols);
        let mut out = Matrix::zeros(self.rows, w.cols);
        let body = |(i, dst): (usize, &mut [f64])| {
            dst.copy_from_slice(bias);
            for (k, &x) in self.row(i).iter().enumerate() {
                if x != 0.0 {
                    for (d, &wv) in dst.iter_mut().zip(w.row(k)) {
                        *d += x * wv;
                    }
                }
            }
        };
        if self.rows * self.cols * w.cols >= PAR_THRESHOLD {
            out.data.par_chunks_mut(w.cols).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(w.cols).enumerate().for_each(body);
        }
        out
    }

    /// `selfᵀ · other`, shapes `(n, a)ᵀ (n, b) -> (a, b)`.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.cols, other.cols);
        let body = |(k, dst): (usize, &mut [f64])| {
            for i in 0..self.rows {
                let x = self.data[i * self.cols + k];
                if x != 0.0 {
                    for (d, &g) in dst.iter_mut().zip(other.row(i)) {
                        *d += x * g;
                    }
                }
            }
        };
        if self.rows * self.cols * other.cols >= PAR_THRESHOLD {
            out.data.par_chunks_mut(other.cols).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(other.cols).enumerate().for_each(body);
        }
        out
    }

    /// `self · otherᵀ`, shapes `(n, b) (a, b)ᵀ -> (n, a)`.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut out = Matrix::zeros(self.rows, other.rows);
        let body = |(i, dst): (usize, &mut [f64])| {
            let g = self.row(i);
            for (k, d) in dst.iter_mut().enumerate() {
                *d = g.iter().zip(other.row(k)).map(|(a, b)| a * b).sum();
            }
        };
        if self.rows * self.cols * other.rows >= PAR_THRESHOLD {
            out.data.par_chunks_mut(other.rows).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(other.rows).enumerate().for_each(body);
        }
        out
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in s.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_agree_with_naive_loops() {
        let a = Matrix::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]);
        let w = Matrix::from_vec(3, 2, vec![1., 0., 0., 1., 1., 1.]);
        let y = a.affine(&w, &[10., 20.]);
        assert_eq!(y.data, vec![14., 25., 20., 31.]);

        let g = Matrix::from_vec(2, 2, vec![1., 2., 3., 4.]);
        // aᵀ g
        assert_eq!(a.t_matmul(&g).data, vec![13., 18., 17., 24., 21., 30.]);
        // g wᵀ
        assert_eq!(g.matmul_t(&w).data, vec![1., 2., 3., 3., 4., 7.]);
    }
}
