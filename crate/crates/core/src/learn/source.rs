use nalgebra::DMatrix;

use crate::kernels::GramMatrix;

/// Read access to a square kernel matrix. Training and model selection only
/// ever read kernel values through this trait, so an instrumented
/// implementation can audit which entries were touched.
pub trait KernelSource: Sync {
    fn size(&self) -> usize;
    fn get(&self, i: usize, j: usize) -> f64;
}

impl KernelSource for DMatrix<f64> {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self[(i, j)]
    }
}

impl KernelSource for GramMatrix {
    fn size(&self) -> usize {
        self.len()
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        GramMatrix::get(self, i, j)
    }
}

impl<S: KernelSource + ?Sized> KernelSource for &S {
    fn size(&self) -> usize {
        (**self).size()
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        (**self).get(i, j)
    }
}

/// Dense copy of the principal submatrix on `indices`.
#[derive(Debug, Clone)]
pub struct SubMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SubMatrix {
    pub fn gather(source: &impl KernelSource, indices: &[usize]) -> Self {
        let n = indices.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in indices {
            for &j in indices {
                data.push(source.get(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub(crate) fn add_diagonal(&mut self, jitter: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += jitter;
        }
    }

    pub(crate) fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }
}

impl KernelSource for SubMatrix {
    fn size(&self) -> usize {
        self.n
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.at(i, j)
    }
}
