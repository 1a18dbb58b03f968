//! Dense row-major matrices and the handful of vector ops the graph encoder
//! needs. Dimensions here are tiny (graph-sized), so clarity beats BLAS.

use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Mat { rows, cols, data })
    }

    /// Uniform init in [-1/sqrt(cols), 1/sqrt(cols)].
    pub fn seeded(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (cols.max(1) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// self (rows x cols) times v (cols) -> rows.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// self^T (cols x rows) times v (rows) -> cols.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (c, &m) in self.row(r).iter().enumerate() {
                out[c] += m * vr;
            }
        }
        out
    }

    /// self += coeff * u v^T.
    pub fn add_outer(&mut self, u: &[f64], v: &[f64], coeff: f64) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, &ur) in u.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (cell, &vc) in row.iter_mut().zip(v) {
                *cell += coeff * ur * vc;
            }
        }
    }
}

pub fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Gradient gate for ReLU: 1 where the pre-activation is strictly positive.
pub fn relu_gate(pre: &[f64], grad: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(grad)
        .map(|(&z, &g)| if z > 0.0 { g } else { 0.0 })
        .collect()
}

pub fn add_assign(acc: &mut [f64], v: &[f64]) {
    debug_assert_eq!(acc.len(), v.len());
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

pub fn scale(v: &mut [f64], by: f64) {
    for x in v {
        *x *= by;
    }
}
