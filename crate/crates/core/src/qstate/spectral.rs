use nalgebra::linalg::SymmetricEigen;

use super::{CMatrix, C64, RANK_TOL};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-9;

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
    /// Number of eigenvalues above [`RANK_TOL`].
    pub rank: usize,
}

impl SpectralDecomp {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..d {
            scaled.column_mut(k).scale_mut(self.eigenvalues[k]);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// Functions applied to the eigenvalues of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatFn {
    Sqrt,
    InvSqrt,
    /// Natural logarithm.
    Log,
}

impl MatFn {
    fn apply(self, x: f64) -> f64 {
        match self {
            MatFn::Sqrt => x.sqrt(),
            MatFn::InvSqrt => 1.0 / x.sqrt(),
            MatFn::Log => x.ln(),
        }
    }
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn symmetrized(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn eigh(m: &CMatrix) -> Result<SpectralDecomp> {
    check_hermitian(m)?;
    let eig = SymmetricEigen::new(symmetrized(m));
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    let rank = eigenvalues.iter().filter(|&&x| x > RANK_TOL).count();
    Ok(SpectralDecomp { eigenvalues, eigenvectors, rank })
}

/// Eigenvalues only, descending. The input is assumed Hermitian.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = if m.nrows() == 1 {
        vec![m[(0, 0)].re]
    } else {
        symmetrized(m).symmetric_eigenvalues().iter().copied().collect()
    };
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// `f(M)` restricted to the support (eigenvalues above [`RANK_TOL`]);
/// the kernel maps to zero.
pub fn mat_fn_on_support(m: &CMatrix, f: MatFn) -> Result<CMatrix> {
    let sd = eigh(m)?;
    Ok(spectral_fn(&sd, f))
}

pub(crate) fn spectral_fn(sd: &SpectralDecomp, f: MatFn) -> CMatrix {
    let d = sd.eigenvalues.len();
    let mut scaled = sd.eigenvectors.clone();
    for k in 0..d {
        let lam = sd.eigenvalues[k];
        let w = if lam > RANK_TOL { f.apply(lam) } else { 0.0 };
        scaled.column_mut(k).scale_mut(w);
    }
    scaled * sd.eigenvectors.adjoint()
}

pub fn support_projector(m: &CMatrix) -> Result<CMatrix> {
    let sd = eigh(m)?;
    let d = sd.eigenvalues.len();
    let cols: Vec<usize> = (0..d).filter(|&k| sd.eigenvalues[k] > RANK_TOL).collect();
    let v = CMatrix::from_fn(d, cols.len(), |i, j| sd.eigenvectors[(i, cols[j])]);
    Ok(&v * v.adjoint())
}

/// Sum of singular values. Hermitian inputs take the eigenvalue route.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == m.ncols() && hermiticity_defect(m) <= 1e-12 * m.norm().max(1.0) {
        return eigvalsh(m).iter().map(|x| x.abs()).sum();
    }
    m.clone().singular_values().iter().sum()
}

/// Von Neumann entropy in bits of a spectrum, clipped to [0, 1].
pub fn entropy_bits(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&x| x.clamp(0.0, 1.0)).filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(d: usize, seed: u64) -> CMatrix {
        let m = CMatrix::from_fn(d, d, |i, j| {
            let a = ((i * 31 + j * 17) as f64 + seed as f64).sin();
            let b = ((i * 13 + j * 5) as f64 * 0.7 + seed as f64).cos();
            C64::new(a, b)
        });
        &m * m.adjoint()
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let m = herm(7, 3);
        let sd = eigh(&m).unwrap();
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!((sd.reconstruct() - &m).norm() < 1e-9);
        let gram = sd.eigenvectors.adjoint() * &sd.eigenvectors;
        assert!((gram - CMatrix::identity(7, 7)).norm() < 1e-9);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian(_))));
        assert!(mat_fn_on_support(&m, MatFn::Sqrt).is_err());
    }

    #[test]
    fn inv_sqrt_of_maximally_mixed_qubit() {
        let m = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        let r = mat_fn_on_support(&m, MatFn::InvSqrt).unwrap();
        let expect = CMatrix::identity(2, 2) * C64::new(2f64.sqrt(), 0.0);
        assert!((r - expect).norm() < 1e-12);
    }

    #[test]
    fn sqrt_squared_is_support_part() {
        // rank-deficient PSD
        let v = CMatrix::from_fn(5, 2, |i, j| C64::new((i + j) as f64, (i * j) as f64 * 0.5));
        let m = &v * v.adjoint();
        let s = mat_fn_on_support(&m, MatFn::Sqrt).unwrap();
        assert!((&s * &s - &m).norm() < 1e-8);
        let p = support_projector(&m).unwrap();
        assert!((p.trace().re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn trace_norm_general_matrix() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert!((trace_norm(&m) - 3.0).abs() < 1e-12);
    }
}
