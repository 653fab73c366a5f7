//! Dense complex linear algebra for the small nodal systems of the model.
//!
//! Systems here have at most a few dozen unknowns, so a row-major dense
//! matrix and an LU factorization with partial pivoting are all that is
//! needed. The factorization is deterministic: pivot ties resolve to the
//! lowest row index.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged matrix rows");
            data.extend(row);
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `b − A·x` with every product and sum carried as an unevaluated pair
    /// of doubles, so the result is accurate even when it nearly cancels.
    pub fn residual_compensated(&self, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        assert_eq!(b.len(), self.rows);
        (0..self.rows)
            .map(|r| {
                let mut re = Compensated::new(b[r].re);
                let mut im = Compensated::new(b[r].im);
                for (a, v) in self.row(r).iter().zip(x) {
                    re.add_product(-a.re, v.re);
                    re.add_product(a.im, v.im);
                    im.add_product(-a.re, v.im);
                    im.add_product(-a.im, v.re);
                }
                Complex64::new(re.value(), im.value())
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Copy with row `skip` and column `skip` removed.
    pub fn without_row_col(&self, skip: usize) -> Self {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != skip).collect();
        let mut out = Self::zeros(keep.len(), keep.len());
        for (i, &r) in keep.iter().enumerate() {
            for (j, &c) in keep.iter().enumerate() {
                out.set(i, j, self.get(r, c));
            }
        }
        out
    }
}

/// LU factorization `P·A = L·U` of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Domain(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_mag = lu[k * n + k].norm();
            for r in (k + 1)..n {
                let mag = lu[r * n + k].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag == 0.0 || !pivot_mag.is_finite() {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if pivot_row != k {
                for c in 0..n {
                    lu.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor.norm() == 0.0 {
                    continue;
                }
                for c in (k + 1)..n {
                    let upper = lu[k * n + c];
                    lu[r * n + c] -= factor * upper;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in (r + 1)..n {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }

    /// 1-norm condition number `‖A‖₁·‖A⁻¹‖₁`, with the inverse formed
    /// column by column. Only sensible for the small systems used here.
    pub fn condition_one(&self, a: &ComplexMatrix) -> f64 {
        let n = self.n;
        let mut inv_norm = 0.0_f64;
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[c] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            inv_norm = inv_norm.max(col.iter().map(|v| v.norm()).sum());
        }
        a.norm_one() * inv_norm
    }
}

/// Running sum with a separate error term, using exact two-sum and
/// two-product transforms.
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    fn new(start: f64) -> Self {
        Self {
            sum: start,
            err: 0.0,
        }
    }

    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let p_err = a.mul_add(b, -p);
        let s = self.sum + p;
        let bb = s - self.sum;
        let s_err = (self.sum - (s - bb)) + (p - bb);
        self.sum = s;
        self.err += s_err + p_err;
    }

    fn value(&self) -> f64 {
        self.sum + self.err
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
