//! Random states for property suites and optimizer restarts.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::qstate::{CMatrix, DensityOp, PureState, Register, C64};

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on `n` qubits.
pub fn pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    let register = Register::new(n)?;
    let amps = (0..register.dim()).map(|_| gaussian_c64(rng)).collect();
    PureState::normalized(amps, register)
}

/// Random state of rank at most `rank` (normalized Ginibre `G G^dagger`).
pub fn mixed_state<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityOp> {
    let register = Register::new(n)?;
    let g = CMatrix::from_fn(register.dim(), rank.max(1), |_, _| gaussian_c64(rng));
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= C64::new(tr, 0.0);
    DensityOp::new(m, register)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian_c64(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mixed_state_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = mixed_state(3, 2, &mut rng).unwrap();
        assert_eq!(rho.eigh().unwrap().rank, 2);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = unitary(6, &mut rng);
        assert!((u.adjoint() * &u - CMatrix::identity(6, 6)).norm() < 1e-12);
    }
}
