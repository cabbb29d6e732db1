use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp_space::{Domain1D, GridFunction};

/// Largest grid the dense oracles accept.
pub const MAX_ORACLE_N: usize = 256;

/// Second-difference Dirichlet Laplacian `(1/dx^2) tridiag(1, -2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOperator {
    domain: Domain1D,
}

impl FdOperator {
    pub fn new(domain: Domain1D) -> Self {
        Self { domain }
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    /// Off-diagonal entry `1/dx^2`; the diagonal is `-2/dx^2`.
    pub fn coupling(&self) -> f64 {
        1.0 / (self.domain.dx() * self.domain.dx())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.domain.n_interior();
        let c = self.coupling();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                -2.0 * c
            } else if i.abs_diff(j) == 1 {
                c
            } else {
                0.0
            }
        })
    }

    /// `A_h u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let c = self.coupling();
        let n = u.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { u[i - 1] } else { 0.0 };
                let right = if i + 1 < n { u[i + 1] } else { 0.0 };
                c * (left - 2.0 * u[i] + right)
            })
            .collect()
    }

    /// Dense `exp(t A_h)`.
    pub fn expm(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime { t, reason: "matrix exponential needs t >= 0" });
        }
        let n = self.domain.n_interior();
        if n > MAX_ORACLE_N {
            return Err(Error::OracleSize { n, max: MAX_ORACLE_N });
        }
        if t == 0.0 {
            return Ok(DMatrix::identity(n, n));
        }
        Ok(expm_pade13(&(self.matrix() * t)))
    }
}

/// `exp(t A_h) u` by dense scaling and squaring.
pub fn expm_apply(afd: &FdOperator, t: f64, u: &GridFunction) -> Result<GridFunction> {
    if u.domain() != afd.domain() {
        return Err(Error::DomainMismatch);
    }
    let e = afd.expm(t)?;
    let out = e * DVector::from_column_slice(u.values());
    GridFunction::new(*afd.domain(), out.as_slice().to_vec())
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Degree-13 diagonal Padé approximant with scaling and squaring. The degree
/// is fixed regardless of the norm so results depend only on the input.
pub fn expm_pade13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * 2f64.powi(-squarings);
    let b = PADE13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom.lu().solve(&numer).expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_matrix_structure() {
        let a = FdOperator::new(Domain1D::new(1.0, 6).unwrap()).matrix();
        assert_eq!(a, a.transpose());
        let sums: Vec<f64> = (0..6).map(|i| a.row(i).sum()).collect();
        assert!(sums[0] < 0.0 && sums[5] < 0.0);
        assert!(sums[1..5].iter().all(|&s| s == 0.0));
        assert!(a.clone().symmetric_eigenvalues().iter().all(|&l| l < 0.0));
    }

    #[test]
    fn scalar_and_diagonal_exponentials() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-30.0, 0.5, -1e-3]));
        let e = expm_pade13(&a);
        for (i, v) in [-30.0f64, 0.5, -1e-3].iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).abs() <= 1e-13 * v.exp().max(1e-300) + 1e-28);
        }
        // Nilpotent block: exp([[0,1],[0,0]]) = [[1,1],[0,1]].
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = expm_pade13(&nil);
        assert!((e - DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).abs().max() < 1e-15);
    }

    #[test]
    fn identity_at_zero_and_size_cap() {
        let op = FdOperator::new(Domain1D::new(1.0, 8).unwrap());
        let u = GridFunction::from_fn(*op.domain(), |x| x).unwrap();
        assert_eq!(expm_apply(&op, 0.0, &u).unwrap(), u);
        let big = FdOperator::new(Domain1D::new(1.0, 300).unwrap());
        assert!(matches!(big.expm(0.1), Err(Error::OracleSize { .. })));
    }

    #[test]
    fn fd_eigenvector_decay() {
        // sin(k pi x) is an exact eigenvector of A_h with eigenvalue -(4/dx^2) sin^2(k pi dx / 2).
        let d = Domain1D::new(1.0, 20).unwrap();
        let op = FdOperator::new(d);
        let u = GridFunction::from_fn(d, |x| (3.0 * std::f64::consts::PI * x).sin()).unwrap();
        let lam = 4.0 / d.dx().powi(2) * (1.5 * std::f64::consts::PI * d.dx()).sin().powi(2);
        let v = expm_apply(&op, 0.01, &u).unwrap();
        for (a, b) in v.values().iter().zip(u.values()) {
            assert!((a - (-lam * 0.01).exp() * b).abs() < 1e-13);
        }
    }
}
