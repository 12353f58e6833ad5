use crate::error::{Error, Result};

/// Factorised constant-coefficient tridiagonal matrix
/// `diag * u_i + off * (u_{i-1} + u_{i+1})`, solved by the Thomas algorithm.
#[derive(Debug, Clone)]
pub struct ConstTridiagonal {
    off: f64,
    // inverse pivots and modified super-diagonal of the forward sweep
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl ConstTridiagonal {
    pub fn new(n: usize, diag: f64, off: f64) -> Result<Self> {
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = diag - off * prev_upper;
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem(i));
            }
            let inv = 1.0 / pivot;
            inv_pivot.push(inv);
            prev_upper = off * inv;
            upper.push(prev_upper);
        }
        Ok(Self {
            off,
            inv_pivot,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrite `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.off * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_dense_product() {
        let n = 9;
        let (d, o) = (3.0, -1.2);
        let m = ConstTridiagonal::new(n, d, o).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.3).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                d * x[i] + o * (left + right)
            })
            .collect();
        m.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_detected() {
        assert!(matches!(
            ConstTridiagonal::new(3, 0.0, 1.0),
            Err(Error::SingularSystem(0))
        ));
    }
}
