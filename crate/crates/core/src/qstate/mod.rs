//! Dense multi-qubit states and the tensor primitives the rest of the crate
//! is built on.
//!
//! Qubit ordering: position 0 of a [`Register`] is the most significant bit
//! of the computational-basis label. Regions are given as qubit *labels*,
//! which survive partial traces, so a partition written for the full
//! register still addresses the right qubits of a marginal.

mod spectral;
pub mod tensor;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) use spectral::spectral_fn;
pub use spectral::{
    eigh, eigvalsh, entropy_bits, hermiticity_defect, mat_fn_on_support, support_projector, trace_norm, MatFn,
    SpectralDecomp,
};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Hard cap on the size of a density operator register.
pub const MAX_QUBITS: usize = 12;
/// Eigenvalues at or below this are outside the support.
pub const RANK_TOL: f64 = 1e-10;

const NORM_TOL: f64 = 1e-10;
const STATE_HERMITIAN_TOL: f64 = 1e-10;
const STATE_TRACE_TOL: f64 = 1e-9;
const STATE_POS_TOL: f64 = 1e-10;

/// Ordered qubit labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    labels: Vec<usize>,
}

impl Register {
    /// Register with labels `0..n`.
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::from_labels((0..n_qubits).collect())
    }

    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidRegister("register needs at least one qubit".into()));
        }
        if labels.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits(labels.len(), MAX_QUBITS));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRegister(format!("duplicate labels in {labels:?}")));
        }
        Ok(Self { labels })
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn positions(&self, labels: &[usize]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|&l| {
                self.position(l)
                    .ok_or_else(|| Error::InvalidRegister(format!("label {l} not in register {:?}", self.labels)))
            })
            .collect()
    }

    pub fn contains_all(&self, labels: &[usize]) -> bool {
        labels.iter().all(|&l| self.position(l).is_some())
    }

    pub fn is_disjoint(&self, other: &Register) -> bool {
        self.labels.iter().all(|l| !other.labels.contains(l))
    }

    fn qubit_dims(&self) -> Vec<usize> {
        vec![2; self.labels.len()]
    }
}

/// Disjoint regions A, B, C, D of qubit labels.
///
/// A and C must be nonempty. An empty B turns conditional quantities into
/// unconditional ones; D is the spectator and is traced out by the
/// entropic measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionPartition {
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<usize>,
    d: Vec<usize>,
}

impl RegionPartition {
    pub fn new(a: Vec<usize>, b: Vec<usize>, c: Vec<usize>, d: Vec<usize>) -> Result<Self> {
        if a.is_empty() || c.is_empty() {
            return Err(Error::InvalidPartition("regions A and C must be nonempty".into()));
        }
        let mut all: Vec<usize> = a.iter().chain(&b).chain(&c).chain(&d).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition("regions must be pairwise disjoint".into()));
        }
        Ok(Self { a, b, c, d })
    }

    /// A, B, C as given; D collects every other qubit of the register.
    pub fn with_rest(a: Vec<usize>, b: Vec<usize>, c: Vec<usize>, register: &Register) -> Result<Self> {
        let used: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        let d: Vec<usize> = register.labels().iter().copied().filter(|l| !used.contains(l)).collect();
        let p = Self::new(a, b, c, d)?;
        p.check_cover(register)?;
        Ok(p)
    }

    /// Single-qubit A = {0}, B = {1}, C = {2}; D holds qubits 3..n.
    pub fn single_qubits(n: usize) -> Result<Self> {
        Self::with_rest(vec![0], vec![1], vec![2], &Register::new(n)?)
    }

    /// The union of the regions must be exactly the register.
    pub fn check_cover(&self, register: &Register) -> Result<()> {
        let mut all = self.abcd();
        all.sort_unstable();
        let mut labels = register.labels().to_vec();
        labels.sort_unstable();
        if all != labels {
            return Err(Error::InvalidPartition(format!("regions {all:?} do not cover register {labels:?}")));
        }
        Ok(())
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }
    pub fn b(&self) -> &[usize] {
        &self.b
    }
    pub fn c(&self) -> &[usize] {
        &self.c
    }
    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn abc(&self) -> Vec<usize> {
        self.a.iter().chain(&self.b).chain(&self.c).copied().collect()
    }

    pub fn abcd(&self) -> Vec<usize> {
        self.a.iter().chain(&self.b).chain(&self.c).chain(&self.d).copied().collect()
    }

    /// Same A, B, C with an empty spectator.
    pub fn without_spectator(&self) -> Self {
        Self { a: self.a.clone(), b: self.b.clone(), c: self.c.clone(), d: Vec::new() }
    }

    /// Swaps the roles of B and D.
    pub fn conditioned_on_spectator(&self) -> Self {
        Self { a: self.a.clone(), b: self.d.clone(), c: self.c.clone(), d: self.b.clone() }
    }
}

/// Normalized state vector over a register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    register: Register,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, register: Register) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::DimensionMismatch { expected: register.dim(), got: amplitudes.len() });
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm2} is not 1")));
        }
        Ok(Self { amplitudes, register })
    }

    /// Normalizes before validating.
    pub fn normalized(mut amplitudes: Vec<C64>, register: Register) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes, register)
    }

    /// Computational basis state; `bits[k]` is the value of register position `k`.
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let register = Register::new(bits.len())?;
        let mut amps = vec![C64::new(0.0, 0.0); register.dim()];
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        amps[idx] = C64::new(1.0, 0.0);
        Self::new(amps, register)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn density(&self) -> DensityOp {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityOp { matrix: &v * v.adjoint(), register: self.register.clone() }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let register = joint_register(&self.register, &other.register)?;
        Ok(PureState { amplitudes: tensor::kron_vec(&self.amplitudes, &other.amplitudes), register })
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Reduced state on the given labels.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOp> {
        let (pos, register) = self.kept(keep)?;
        let m = tensor::reduced_from_pure(&self.amplitudes, &self.register.qubit_dims(), &pos);
        Ok(DensityOp { matrix: m, register })
    }

    /// Entropy (bits) of the reduced state on `labels`; empty or full sets give 0.
    pub fn entropy_of(&self, labels: &[usize]) -> Result<f64> {
        if labels.is_empty() || labels.len() == self.register.n_qubits() {
            self.register.positions(labels)?;
            return Ok(0.0);
        }
        let pos = self.register.positions(labels)?;
        let proxy = tensor::reduced_spectrum_proxy(&self.amplitudes, &self.register.qubit_dims(), &pos);
        Ok(entropy_bits(&eigvalsh(&proxy)))
    }

    fn kept(&self, keep: &[usize]) -> Result<(Vec<usize>, Register)> {
        kept_positions(&self.register, keep)
    }
}

fn kept_positions(register: &Register, keep: &[usize]) -> Result<(Vec<usize>, Register)> {
    if keep.is_empty() {
        return Err(Error::InvalidRegister("keep set is empty".into()));
    }
    let mut pos = register.positions(keep)?;
    pos.sort_unstable();
    pos.dedup();
    let labels = pos.iter().map(|&p| register.labels()[p]).collect();
    Ok((pos, Register::from_labels(labels)?))
}

fn joint_register(a: &Register, b: &Register) -> Result<Register> {
    if !a.is_disjoint(b) {
        return Err(Error::InvalidRegister("registers overlap".into()));
    }
    let labels: Vec<usize> = a.labels().iter().chain(b.labels()).copied().collect();
    Register::from_labels(labels)
}

/// Hermitian, positive semidefinite, unit-trace operator on a register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    matrix: CMatrix,
    register: Register,
}

impl DensityOp {
    pub fn new(matrix: CMatrix, register: Register) -> Result<Self> {
        let rho = Self::new_unchecked(matrix, register)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape check only; used on paths whose output is a state by construction.
    pub fn new_unchecked(matrix: CMatrix, register: Register) -> Result<Self> {
        if matrix.nrows() != register.dim() || matrix.ncols() != register.dim() {
            return Err(Error::DimensionMismatch { expected: register.dim(), got: matrix.nrows() });
        }
        Ok(Self { matrix, register })
    }

    pub fn validate(&self) -> Result<()> {
        let defect = hermiticity_defect(&self.matrix);
        if defect > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = eigvalsh(&self.matrix).last().copied().unwrap_or(0.0);
        if min < -STATE_POS_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let register = Register::new(n_qubits)?;
        let d = register.dim();
        Ok(Self { matrix: CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0), register })
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len().trailing_zeros() as usize;
        if probs.len() != 1 << n {
            return Err(Error::InvalidState("diagonal length must be a power of two".into()));
        }
        let diag = nalgebra::DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag), Register::new(n)?)
    }

    /// Convex combination of states on the same register.
    pub fn mixture(parts: &[(f64, &DensityOp)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?.1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.register != first.register {
                return Err(Error::InvalidRegister("mixture components on different registers".into()));
            }
            m += &rho.matrix * C64::new(*w, 0.0);
        }
        Self::new(m, first.register.clone())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn n_qubits(&self) -> usize {
        self.register.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.register.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigh(&self) -> Result<SpectralDecomp> {
        eigh(&self.matrix)
    }

    /// Spectrum clipped to [0, 1].
    pub fn spectrum(&self) -> Vec<f64> {
        eigvalsh(&self.matrix).into_iter().map(|x| x.clamp(0.0, 1.0)).collect()
    }

    pub fn tensor(&self, other: &DensityOp) -> Result<DensityOp> {
        let register = joint_register(&self.register, &other.register)?;
        Ok(DensityOp { matrix: self.matrix.kronecker(&other.matrix), register })
    }

    /// Marginal on the given labels; kept qubits stay in register order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOp> {
        let (pos, register) = kept_positions(&self.register, keep)?;
        if pos.len() == self.register.n_qubits() {
            return Ok(self.clone());
        }
        let m = tensor::ptrace(&self.matrix, &self.register.qubit_dims(), &pos);
        Ok(DensityOp { matrix: m, register })
    }

    /// Partial transpose on the qubits with the given labels.
    pub fn partial_transpose(&self, region: &[usize]) -> Result<CMatrix> {
        let pos = self.register.positions(region)?;
        Ok(tensor::partial_transpose(&self.matrix, &self.register.qubit_dims(), &pos))
    }

    /// Reorders the register to the given label order.
    pub fn reordered(&self, labels: &[usize]) -> Result<DensityOp> {
        if labels.len() != self.n_qubits() {
            return Err(Error::InvalidRegister("reorder must list every qubit".into()));
        }
        let pos = self.register.positions(labels)?;
        let (m, _) = tensor::permute_matrix(&self.matrix, &self.register.qubit_dims(), &pos);
        Ok(DensityOp { matrix: m, register: Register::from_labels(labels.to_vec())? })
    }

    /// Spectral purification `sum_k sqrt(l_k) |e_k>|k>` over the support.
    pub fn purify(&self) -> Result<Purification> {
        let sd = self.eigh()?;
        let r = sd.rank.max(1);
        let d = self.dim();
        let mut amps = vec![C64::new(0.0, 0.0); d * r];
        for k in 0..r {
            let w = sd.eigenvalues[k].max(0.0).sqrt();
            for s in 0..d {
                amps[s * r + k] = sd.eigenvectors[(s, k)] * w;
            }
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|z| *z /= norm);
        Ok(Purification { amplitudes: amps, system: self.register.clone(), purifier_dim: r })
    }
}

/// Pure state on `system (x) P` where `P` is the purifying subsystem of
/// dimension `purifier_dim`. Amplitude index is `s * purifier_dim + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Purification {
    pub amplitudes: Vec<C64>,
    pub system: Register,
    pub purifier_dim: usize,
}

impl Purification {
    pub fn from_pure(state: &PureState) -> Self {
        Self { amplitudes: state.amplitudes.clone(), system: state.register.clone(), purifier_dim: 1 }
    }

    /// Subsystem dimensions: one entry per system qubit, then `P`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![2; self.system.n_qubits()];
        d.push(self.purifier_dim);
        d
    }

    /// Amplitude matrix with rows indexed by the system, columns by `P`.
    pub fn as_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(self.system.dim(), self.purifier_dim, &self.amplitudes)
    }

    /// The state obtained by tracing out `P`.
    pub fn marginal(&self) -> DensityOp {
        let m = self.as_matrix();
        DensityOp { matrix: &m * m.adjoint(), register: self.system.clone() }
    }

    /// The purification as a qubit state when `P` is a power of two.
    pub fn as_pure_state(&self, purifier_labels: &[usize]) -> Result<PureState> {
        if 1usize << purifier_labels.len() != self.purifier_dim {
            return Err(Error::DimensionMismatch { expected: self.purifier_dim, got: 1 << purifier_labels.len() });
        }
        let labels: Vec<usize> = self.system.labels().iter().chain(purifier_labels).copied().collect();
        PureState::new(self.amplitudes.clone(), Register::from_labels(labels)?)
    }
}

/// Trace distance `1/2 ||a - b||_1` between two matrices of equal shape.
pub fn trace_distance_matrices(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(
            vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)],
            Register::new(2).unwrap(),
        )
        .unwrap()
    }

    fn ghz3() -> DensityOp {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = vec![C64::new(0.0, 0.0); 8];
        a[0] = C64::new(h, 0.0);
        a[7] = C64::new(h, 0.0);
        PureState::new(a, Register::new(3).unwrap()).unwrap().density()
    }

    #[test]
    fn register_rules() {
        assert!(Register::new(0).is_err());
        assert!(matches!(Register::new(13), Err(Error::TooManyQubits(13, 12))));
        assert!(Register::from_labels(vec![1, 1]).is_err());
        assert_eq!(Register::new(3).unwrap().dim(), 8);
    }

    #[test]
    fn partition_rules() {
        assert!(RegionPartition::new(vec![], vec![1], vec![2], vec![]).is_err());
        assert!(RegionPartition::new(vec![0], vec![0], vec![2], vec![]).is_err());
        let reg = Register::new(5).unwrap();
        let p = RegionPartition::with_rest(vec![0], vec![], vec![3], &reg).unwrap();
        assert_eq!(p.d(), &[1, 2, 4]);
        let q = RegionPartition::new(vec![0], vec![1], vec![2], vec![]).unwrap();
        assert!(q.check_cover(&reg).is_err());
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let m = DensityOp::maximally_mixed(1).unwrap();
        let other = DensityOp::new(m.matrix().clone(), Register::from_labels(vec![1]).unwrap()).unwrap();
        let t = m.tensor(&other).unwrap();
        assert!((t.matrix() - CMatrix::identity(4, 4) * C64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(m.tensor(&m).is_err(), "overlapping labels");
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = PureState::basis(&[0]).unwrap().density();
        let one = DensityOp::new(
            PureState::basis(&[1]).unwrap().density().into_matrix(),
            Register::from_labels(vec![1]).unwrap(),
        )
        .unwrap();
        let t = zero.tensor(&one).unwrap();
        assert_eq!(t.matrix(), PureState::basis(&[0, 1]).unwrap().density().matrix());
    }

    #[test]
    fn tensor_cap() {
        let a = DensityOp::maximally_mixed(7).unwrap();
        let b = DensityOp::new(
            DensityOp::maximally_mixed(6).unwrap().into_matrix(),
            Register::from_labels((7..13).collect()).unwrap(),
        )
        .unwrap();
        assert!(matches!(a.tensor(&b), Err(Error::TooManyQubits(13, 12))));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = bell().density().partial_trace(&[0]).unwrap();
        assert!((r.matrix() - CMatrix::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(bell().density().partial_trace(&[]).is_err());
    }

    #[test]
    fn ghz_two_qubit_marginal() {
        let r = ghz3().partial_trace(&[0, 1]).unwrap();
        let expect = DensityOp::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((r.matrix() - expect.matrix()).norm() < 1e-15);
        assert_eq!(r.register().labels(), &[0, 1]);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = bell().density().partial_transpose(&[1]).unwrap();
        let e = eigvalsh(&pt);
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (x, y) in e.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((trace_norm(&pt) - 2.0).abs() < 1e-12);
        let back = tensor::partial_transpose(&pt, &[2, 2], &[1]);
        assert_eq!(&back, bell().density().matrix());
    }

    #[test]
    fn product_partial_transpose_is_psd() {
        let a = DensityOp::diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityOp::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(0.6, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.4, 0.0)],
            ),
            Register::from_labels(vec![1]).unwrap(),
        )
        .unwrap();
        let pt = a.tensor(&b).unwrap().partial_transpose(&[1]).unwrap();
        assert!(eigvalsh(&pt).iter().all(|&x| x > -1e-12));
    }

    #[test]
    fn purify_cases() {
        let mixed = DensityOp::maximally_mixed(1).unwrap();
        let p = mixed.purify().unwrap();
        assert_eq!(p.purifier_dim, 2);
        let ps = p.as_pure_state(&[1]).unwrap();
        let marg = ps.reduced(&[0]).unwrap();
        assert!((marg.matrix() - mixed.matrix()).norm() < 1e-12);

        let pure = bell().density().purify().unwrap();
        assert_eq!(pure.purifier_dim, 1);

        let dephased = DensityOp::diagonal(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let p = dephased.purify().unwrap();
        assert_eq!(p.purifier_dim, 2);
        assert_eq!(p.as_pure_state(&[3]).unwrap().register().n_qubits(), 4);
        assert!(trace_distance_matrices(p.marginal().matrix(), dephased.matrix()) < 1e-9);
    }

    #[test]
    fn reorder_round_trip() {
        let rho = ghz3()
            .tensor(
                &DensityOp::new(
                    DensityOp::diagonal(&[0.2, 0.8]).unwrap().into_matrix(),
                    Register::from_labels(vec![3]).unwrap(),
                )
                .unwrap(),
            )
            .unwrap();
        let r = rho.reordered(&[3, 0, 2, 1]).unwrap();
        assert_eq!(r.register().labels(), &[3, 0, 2, 1]);
        let back = r.reordered(&[0, 1, 2, 3]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
        let marg = r.partial_trace(&[3]).unwrap();
        assert!((marg.matrix()[(0, 0)].re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn invalid_states_rejected() {
        let reg = Register::new(1).unwrap();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityOp::new(bad_trace, reg.clone()).is_err());
        let negative =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(DensityOp::new(negative, reg.clone()).is_err());
        assert!(PureState::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)], reg).is_err());
    }
}
