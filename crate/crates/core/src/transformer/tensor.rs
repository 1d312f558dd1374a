use crate::error::{Error, Result};

/// Dense row-major tensor of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Value at a multi-dimensional index.
    pub fn at(&self, index: &[usize]) -> f64 {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.shape) {
            debug_assert!(i < d);
            flat = flat * d + i;
        }
        self.data[flat]
    }
}

/// Row-major matrix used inside the model.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn add_assign(&mut self, other: &Mat) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }
}

/// `x · w + b` with `x: [n × k]`, `w: [k × m]` row-major, `b: [m]`.
pub(crate) fn linear(x: &Mat, w: &[f64], b: &[f64]) -> Mat {
    let m = b.len();
    debug_assert_eq!(w.len(), x.cols * m);
    let mut out = Mat::zeros(x.rows, m);
    for r in 0..x.rows {
        let o = &mut out.data[r * m..(r + 1) * m];
        o.copy_from_slice(b);
        for (i, &xi) in x.row(r).iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let wr = &w[i * m..(i + 1) * m];
            for (oj, &wj) in o.iter_mut().zip(wr) {
                *oj += xi * wj;
            }
        }
    }
    out
}

/// Backward of [`linear`]: accumulates `xᵀ·dy` into `dw` and column sums
/// of `dy` into `db`, and returns `dy · wᵀ`.
pub(crate) fn linear_backward(x: &Mat, w: &[f64], dy: &Mat, dw: &mut [f64], db: &mut [f64]) -> Mat {
    let m = dy.cols;
    let k = x.cols;
    let mut dx = Mat::zeros(x.rows, k);
    for r in 0..x.rows {
        let g = dy.row(r);
        for (dbj, &gj) in db.iter_mut().zip(g) {
            *dbj += gj;
        }
        let xr = x.row(r);
        for (i, &xi) in xr.iter().enumerate() {
            let wr = &w[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for (&wj, &gj) in wr.iter().zip(g) {
                acc += wj * gj;
            }
            dx.data[r * k + i] = acc;
            if xi != 0.0 {
                let dwr = &mut dw[i * m..(i + 1) * m];
                for (d, &gj) in dwr.iter_mut().zip(g) {
                    *d += xi * gj;
                }
            }
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_shape_checked() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        let t = Tensor::new(vec![2, 3], (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(t.at(&[1, 2]), 5.0);
        assert_eq!(t.rank(), 2);
    }

    #[test]
    fn linear_matches_naive() {
        let x = Mat::from_vec(2, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let w: Vec<f64> = (0..6).map(|i| i as f64 * 0.1 - 0.2).collect();
        let b = [0.5, -0.5];
        let y = linear(&x, &w, &b);
        for r in 0..2 {
            for j in 0..2 {
                let naive: f64 = (0..3).map(|i| x.row(r)[i] * w[i * 2 + j]).sum::<f64>() + b[j];
                assert!((y.row(r)[j] - naive).abs() < 1e-15);
            }
        }
        let dy = Mat::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let mut dw = vec![0.0; 6];
        let mut db = vec![0.0; 2];
        let dx = linear_backward(&x, &w, &dy, &mut dw, &mut db);
        assert_eq!(db, [1.0, 1.0]);
        assert_eq!(dw[0], 1.0);
        assert_eq!(dw[1], -1.0);
        assert!((dx.row(0)[2] - w[4]).abs() < 1e-15);
    }
}
