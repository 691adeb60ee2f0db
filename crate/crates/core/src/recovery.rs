//! Petz recovery maps and recoverability diagnostics.
//!
//! A channel is a list of Kraus operators. The Petz map of a channel `N`
//! with reference `sigma` is
//! `R(X) = sigma^{1/2} N^dagger[N(sigma)^{-1/2} X N(sigma)^{-1/2}] sigma^{1/2}`,
//! with inverses taken on the support. It is completely positive by
//! construction and is stored through its own Kraus operators
//! `sigma^{1/2} K_k^dagger N(sigma)^{-1/2}`.

use log::info;

use crate::error::{Error, Result};
use crate::qstate::{
    eigh, eigvalsh, entropy_bits, mat_fn_on_support, spectral_fn, support_projector, tensor, trace_norm, CMatrix,
    DensityOp, MatFn, RegionPartition, Register, C64,
};

const KRAUS_COMPLETENESS_TOL: f64 = 1e-9;
/// Largest QCMI accepted by [`iterate_recovery`].
pub const ITER_TOL: f64 = 1e-6;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A quantum channel in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<CMatrix>,
    in_dim: usize,
    out_dim: usize,
}

impl Channel {
    /// Validates shapes and `sum K^dagger K = I` within 1e-9.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::InvalidChannel("Kraus operators have different shapes".into()));
        }
        let mut sum = CMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let defect = (sum - CMatrix::identity(in_dim, in_dim)).camax();
        if defect > KRAUS_COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!("Kraus completeness defect {defect:.3e}")));
        }
        Ok(Self { kraus, in_dim, out_dim })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![CMatrix::identity(d, d)], in_dim: d, out_dim: d }
    }

    /// Qubit dephasing `(1-p) rho + p Z rho Z`.
    pub fn dephasing(p: f64) -> Result<Self> {
        check_prob(p)?;
        let z = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
        Self::new(vec![CMatrix::identity(2, 2) * c((1.0 - p).sqrt()), z * c(p.sqrt())])
    }

    /// Qubit depolarizing `(1-p) rho + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_prob(p)?;
        let (x, y, z) = paulis();
        let w = (p / 4.0).sqrt();
        Self::new(vec![CMatrix::identity(2, 2) * c((1.0 - 3.0 * p / 4.0).sqrt()), x * c(w), y * c(w), z * c(w)])
    }

    /// Projective measurement in the computational basis of dimension `d`.
    pub fn complete_dephasing(d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = c(1.0);
                k
            })
            .collect();
        Self { kraus, in_dim: d, out_dim: d }
    }

    /// Discards the input and prepares `state`.
    pub fn replacement(input_dim: usize, state: &CMatrix) -> Result<Self> {
        let sd = eigh(state)?;
        let d_out = state.nrows();
        let mut kraus = Vec::new();
        for k in 0..d_out {
            let lam = sd.eigenvalues[k];
            if lam <= 0.0 {
                continue;
            }
            for j in 0..input_dim {
                let mut op = CMatrix::zeros(d_out, input_dim);
                for i in 0..d_out {
                    op[(i, j)] = sd.eigenvectors[(i, k)] * lam.sqrt();
                }
                kraus.push(op);
            }
        }
        Self::new(kraus)
    }

    /// Traces out the second factor of `d_keep (x) d_traced`.
    pub fn partial_trace_second(d_keep: usize, d_traced: usize) -> Self {
        let kraus = (0..d_traced)
            .map(|t| {
                let mut k = CMatrix::zeros(d_keep, d_keep * d_traced);
                for i in 0..d_keep {
                    k[(i, i * d_traced + t)] = c(1.0);
                }
                k
            })
            .collect();
        Self { kraus, in_dim: d_keep * d_traced, out_dim: d_keep }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Heisenberg-picture adjoint `sum K^dagger Y K`.
    pub fn adjoint_apply(&self, y: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    /// The channel acting on subsystem `target` of a composite with `dims`.
    pub fn on_subsystem(&self, dims: &[usize], target: usize) -> Result<Self> {
        if dims[target] != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, got: dims[target] });
        }
        let kraus: Vec<CMatrix> = self.kraus.iter().map(|k| tensor::embed_operator(k, dims, target)).collect();
        let in_dim = dims.iter().product();
        let out_dim = in_dim / self.in_dim * self.out_dim;
        Ok(Self { kraus, in_dim, out_dim })
    }
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("channel strength {p} not in [0, 1]")));
    }
    Ok(())
}

fn paulis() -> (CMatrix, CMatrix, CMatrix) {
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let y = CMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
    let z = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    (x, y, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryKind {
    Petz,
    /// Petz map of a product reference, written with the support projector of
    /// the untouched factor applied on both sides.
    PetzWithProjector,
}

/// A Petz-type recovery map, stored in Kraus form.
#[derive(Debug, Clone)]
pub struct RecoveryMap {
    pub kind: RecoveryKind,
    /// Reference state the map is built on.
    pub reference: CMatrix,
    /// The channel being reversed.
    pub channel: Channel,
    kraus: Vec<CMatrix>,
}

impl RecoveryMap {
    fn petz_kraus(reference: &CMatrix, channel: &Channel) -> Result<Vec<CMatrix>> {
        let sqrt_ref = mat_fn_on_support(reference, MatFn::Sqrt)?;
        let image = channel.apply(reference);
        let inv_sqrt_image = mat_fn_on_support(&image, MatFn::InvSqrt)?;
        Ok(channel.kraus().iter().map(|k| &sqrt_ref * k.adjoint() * &inv_sqrt_image).collect())
    }

    /// Input dimension of the map (the channel's output space).
    pub fn in_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim(), self.out_dim());
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Applies the map to subsystem `target` of an operator on `dims`,
    /// identity elsewhere.
    pub fn apply_on(&self, x: &CMatrix, dims: &[usize], target: usize) -> Result<CMatrix> {
        if dims[target] != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), got: dims[target] });
        }
        let d_out: usize = dims.iter().product::<usize>() / self.in_dim() * self.out_dim();
        let mut out = CMatrix::zeros(d_out, d_out);
        for k in &self.kraus {
            let full = tensor::embed_operator(k, dims, target);
            out += &full * x * full.adjoint();
        }
        Ok(out)
    }

    /// Choi matrix `sum_ij |i><j| (x) R(|i><j|)`.
    pub fn choi(&self) -> CMatrix {
        let din = self.in_dim();
        let dout = self.out_dim();
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for a in 0..din {
            for b in 0..din {
                let mut e = CMatrix::zeros(din, din);
                e[(a, b)] = c(1.0);
                let block = self.apply(&e);
                for r in 0..dout {
                    for s in 0..dout {
                        j[(a * dout + r, b * dout + s)] = block[(r, s)];
                    }
                }
            }
        }
        j
    }

    /// Smallest Choi eigenvalue; complete positivity holds when it is >= -tol.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        eigvalsh(&self.choi()).last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue of `sum R^dagger R - I`; trace-nonincreasing when <= tol.
    pub fn trace_excess(&self) -> f64 {
        let d = self.in_dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        eigvalsh(&(sum - CMatrix::identity(d, d)))[0]
    }

    /// Deviation from trace preservation, `||sum R^dagger R - I||_max`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.in_dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        (sum - CMatrix::identity(d, d)).camax()
    }
}

/// Petz map of `channel` with reference `sigma`.
pub fn petz_general(sigma: &DensityOp, channel: &Channel) -> Result<RecoveryMap> {
    petz_general_matrix(sigma.matrix(), channel)
}

pub(crate) fn petz_general_matrix(sigma: &CMatrix, channel: &Channel) -> Result<RecoveryMap> {
    if sigma.nrows() != channel.in_dim() {
        return Err(Error::DimensionMismatch { expected: channel.in_dim(), got: sigma.nrows() });
    }
    let kraus = RecoveryMap::petz_kraus(sigma, channel)?;
    Ok(RecoveryMap { kind: RecoveryKind::Petz, reference: sigma.clone(), channel: channel.clone(), kraus })
}

/// Petz map for the reference `sigma_X (x) tau_Y` and a channel on `X`,
/// acting on `X' (x) Y` as `Pi_Y sigma^{1/2} N^dagger[..] sigma^{1/2} Pi_Y`.
pub fn petz_with_projector(sigma_x: &CMatrix, channel: &Channel, tau_y: &CMatrix) -> Result<RecoveryMap> {
    let inner = petz_general_matrix(sigma_x, channel)?;
    let proj = support_projector(tau_y)?;
    let kraus = inner.kraus.iter().map(|k| k.kronecker(&proj)).collect();
    Ok(RecoveryMap {
        kind: RecoveryKind::PetzWithProjector,
        reference: sigma_x.kronecker(tau_y),
        channel: channel.clone(),
        kraus,
    })
}

struct Ordered {
    rho_abc: CMatrix,
    dims: [usize; 3],
}

fn ordered_abc(rho: &DensityOp, part: &RegionPartition) -> Result<Ordered> {
    let marg = rho.partial_trace(&part.abc())?.reordered(&part.abc())?;
    let dims = [1 << part.a().len(), 1 << part.b().len(), 1 << part.c().len()];
    Ok(Ordered { rho_abc: marg.into_matrix(), dims })
}

/// The `B -> BC` Petz map of `rho`: reference `rho_BC`, reversed channel `tr_C`.
pub fn petz_map(rho: &DensityOp, part: &RegionPartition) -> Result<RecoveryMap> {
    let o = ordered_abc(rho, part)?;
    let rho_bc = tensor::ptrace(&o.rho_abc, &o.dims, &[1, 2]);
    petz_general_matrix(&rho_bc, &Channel::partial_trace_second(o.dims[1], o.dims[2]))
}

/// Outcome of recovering `rho_ABC` from `rho_AB` with the `B -> BC` Petz map.
#[derive(Debug, Clone)]
pub struct MarkovRecovery {
    pub fidelity: f64,
    pub trace_distance: f64,
    pub qcmi: f64,
    /// Recovered state, ordered A, B, C.
    pub recovered: CMatrix,
}

pub fn recover_markov(rho: &DensityOp, part: &RegionPartition) -> Result<MarkovRecovery> {
    let o = ordered_abc(rho, part)?;
    let map = petz_map(rho, part)?;
    let rho_ab = tensor::ptrace(&o.rho_abc, &o.dims, &[0, 1]);
    let recovered = map.apply_on(&rho_ab, &[o.dims[0], o.dims[1]], 1)?;
    let fid = fidelity_matrices(&o.rho_abc, &recovered)?;
    let td = 0.5 * trace_norm(&(&o.rho_abc - &recovered));
    let qcmi = crate::measures::qcmi(rho, part)?.value;
    Ok(MarkovRecovery { fidelity: fid, trace_distance: td, qcmi, recovered })
}

/// `||sqrt(a) sqrt(b)||_1^2` for PSD matrices.
pub fn fidelity_matrices(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    let sa = mat_fn_on_support(a, MatFn::Sqrt)?;
    let sb = mat_fn_on_support(b, MatFn::Sqrt)?;
    Ok(trace_norm(&(sa * sb)).powi(2).clamp(0.0, 1.0))
}

/// Relative entropy `D(rho || sigma)` in bits; infinite when the support of
/// `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let sr = eigh(rho)?;
    let ss = eigh(sigma)?;
    let proj_sigma = support_projector(sigma)?;
    let leak = (rho - &proj_sigma * rho * &proj_sigma).norm();
    if leak > 1e-9 {
        return Ok(f64::INFINITY);
    }
    let log_sigma = spectral_fn(&ss, MatFn::Log);
    let cross = (rho * log_sigma).trace().re / std::f64::consts::LN_2;
    Ok(-entropy_bits(&sr.eigenvalues) - cross)
}

/// `I(A;C|B)` of an operator on `dims` with regions given as subsystem lists.
pub(crate) fn qcmi_of_matrix(m: &CMatrix, dims: &[usize], a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let s = |sys: Vec<usize>| -> f64 {
        if sys.is_empty() {
            return 0.0;
        }
        entropy_bits(&eigvalsh(&tensor::ptrace(m, dims, &sys)))
    };
    let cat = |x: &[&[usize]]| -> Vec<usize> {
        let mut v: Vec<usize> = x.iter().flat_map(|s| s.iter().copied()).collect();
        v.sort_unstable();
        v
    };
    s(cat(&[a, b])) + s(cat(&[b, c])) - s(cat(&[b])) - s(cat(&[a, b, c]))
}

/// A state extension `rho_ABCDE`, ordered A, B, C, D, E.
#[derive(Debug, Clone)]
pub struct ExplicitExtension {
    pub matrix: CMatrix,
    pub e_dim: usize,
}

#[derive(Debug, Clone)]
pub struct RecoverabilityReport {
    /// `I(A;C|BE) - I(A';C|BE)` after the channel.
    pub delta_qcmi: f64,
    /// Fidelity between `rho_ABCE` and its Petz recovery.
    pub best_fidelity: f64,
    /// `2^(-delta)`.
    pub fidelity_floor: f64,
    /// Whether `best_fidelity >= 2^(-delta)` held for the plain Petz map.
    pub bound_holds: bool,
    /// `1 - sqrt(F) <= T <= sqrt(1 - F)` for the recovered state.
    pub sandwich_holds: bool,
    pub trace_distance: f64,
}

/// Recoverability of `rho_ABCE` after `channel` acts on region A.
///
/// The extension E defaults to the spectral purification of `rho_ABCD`.
pub fn recoverability_deficit(
    rho: &DensityOp,
    part: &RegionPartition,
    channel: &Channel,
    extension: Option<&ExplicitExtension>,
) -> Result<RecoverabilityReport> {
    part.check_cover(rho.register())?;
    let order = part.abcd();
    let ordered = rho.reordered(&order)?;
    let da = 1usize << part.a().len();
    let db = 1usize << part.b().len();
    let dc = 1usize << part.c().len();
    let dd = 1usize << part.d().len();
    if channel.in_dim() != da {
        return Err(Error::DimensionMismatch { expected: da, got: channel.in_dim() });
    }
    let ext = match extension {
        Some(e) => {
            if e.matrix.nrows() != ordered.dim() * e.e_dim {
                return Err(Error::DimensionMismatch { expected: ordered.dim() * e.e_dim, got: e.matrix.nrows() });
            }
            let back = tensor::ptrace(&e.matrix, &[ordered.dim(), e.e_dim], &[0]);
            if 0.5 * trace_norm(&(back - ordered.matrix())) > 1e-8 {
                return Err(Error::Precondition("extension does not reduce to rho_ABCD".into()));
            }
            e.clone()
        }
        None => {
            let p = ordered.purify()?;
            let v = nalgebra::DVector::from_column_slice(&p.amplitudes);
            ExplicitExtension { matrix: &v * v.adjoint(), e_dim: p.purifier_dim }
        }
    };
    let de = ext.e_dim;
    // rho_ABCE, then reorder to A, B, E, C for the product-reference Petz map.
    let rho_abce = tensor::ptrace(&ext.matrix, &[da, db, dc, dd, de], &[0, 1, 2, 4]);
    let dims_abce = [da, db, dc, de];
    let (rho_abec, _) = tensor::permute_matrix(&rho_abce, &dims_abce, &[0, 1, 3, 2]);
    let dims_abec = [da, db, de, dc];
    let after = channel.on_subsystem(&dims_abec, 0)?.apply(&rho_abec);
    let da2 = channel.out_dim();
    let dims_after = [da2, db, de, dc];

    let before_qcmi = qcmi_of_matrix(&rho_abec, &dims_abec, &[0], &[1, 2], &[3]);
    let after_qcmi = qcmi_of_matrix(&after, &dims_after, &[0], &[1, 2], &[3]);
    let delta = before_qcmi - after_qcmi;

    let rho_abe = tensor::ptrace(&rho_abec, &dims_abec, &[0, 1, 2]);
    let rho_c = tensor::ptrace(&rho_abec, &dims_abec, &[3]);
    let local = channel.on_subsystem(&[da, db, de], 0)?;
    let map = petz_with_projector(&rho_abe, &local, &rho_c)?;
    let recovered = map.apply(&after);
    let fid = fidelity_matrices(&rho_abec, &recovered)?;
    let td = 0.5 * trace_norm(&(&rho_abec - &recovered));
    let floor = 2f64.powf(-delta.max(0.0));
    let bound_holds = fid >= floor - 1e-9;
    let sandwich_holds = 1.0 - fid.sqrt() <= td + 1e-8 && td <= (1.0 - fid).max(0.0).sqrt() + 1e-8;
    if !bound_holds {
        info!("plain Petz map below 2^-delta: F = {fid:.6}, floor = {floor:.6}, delta = {delta:.6}");
    }
    Ok(RecoverabilityReport {
        delta_qcmi: delta,
        best_fidelity: fid,
        fidelity_floor: floor,
        bound_holds,
        sandwich_holds,
        trace_distance: td,
    })
}

/// `rho_{A B C_1 ... C_k}` from `k` applications of the `B -> BC` Petz map.
#[derive(Debug, Clone)]
pub struct IteratedRecovery {
    pub state: DensityOp,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Labels of each copy `C_i`, in creation order.
    pub copies: Vec<Vec<usize>>,
}

impl IteratedRecovery {
    /// Marginal on `A C_i`, relabelled onto the original A and C labels.
    pub fn marginal_ac(&self, i: usize, c_labels: &[usize]) -> Result<DensityOp> {
        let keep: Vec<usize> = self.a.iter().chain(&self.copies[i]).copied().collect();
        let m = self.state.partial_trace(&keep)?.reordered(&keep)?;
        let labels: Vec<usize> = self.a.iter().chain(c_labels).copied().collect();
        DensityOp::new_unchecked(m.into_matrix(), Register::from_labels(labels)?)
    }
}

pub fn iterate_recovery(rho: &DensityOp, part: &RegionPartition, k: usize) -> Result<IteratedRecovery> {
    let q = crate::measures::qcmi(rho, part)?.value;
    if q > ITER_TOL {
        return Err(Error::Precondition(format!("I(A;C|B) = {q:.3e} exceeds {ITER_TOL:e}")));
    }
    if k == 0 {
        return Err(Error::Precondition("at least one recovery step is required".into()));
    }
    let o = ordered_abc(rho, part)?;
    let map = petz_map(rho, part)?;
    let [da, db, dc] = o.dims;
    let mut state = tensor::ptrace(&o.rho_abc, &o.dims, &[0, 1]);
    // Subsystem layout after step j: A, B, C_j, C_{j-1}, ..., C_1.
    let mut dims = vec![da, db];
    for _ in 0..k {
        state = map.apply_on(&state, &dims, 1)?;
        dims = [vec![da, db, dc], dims[2..].to_vec()].concat();
    }
    let n_sys = dims.len();
    // Reorder to A, B, C_1, ..., C_k.
    let mut order = vec![0, 1];
    order.extend((2..n_sys).rev());
    let (state, _) = tensor::permute_matrix(&state, &dims, &order);

    let nc = part.c().len();
    let next = rho.register().labels().iter().max().copied().unwrap_or(0) + 1;
    let copies: Vec<Vec<usize>> = (0..k).map(|i| (0..nc).map(|j| next + i * nc + j).collect()).collect();
    let mut labels: Vec<usize> = part.a().iter().chain(part.b()).copied().collect();
    copies.iter().for_each(|cp| labels.extend(cp));
    let register = Register::from_labels(labels)?;
    Ok(IteratedRecovery {
        state: DensityOp::new_unchecked(state, register)?,
        a: part.a().to_vec(),
        b: part.b().to_vec(),
        copies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_ghz, trace_distance};
    use crate::qstate::PureState;

    fn classical_chain() -> DensityOp {
        // 1/2 (|000><000| + |111><111|)
        let mut d = vec![0.0; 8];
        d[0] = 0.5;
        d[7] = 0.5;
        DensityOp::diagonal(&d).unwrap()
    }

    fn p3() -> RegionPartition {
        RegionPartition::single_qubits(3).unwrap()
    }

    #[test]
    fn kraus_completeness_enforced() {
        assert!(Channel::new(vec![CMatrix::identity(2, 2) * c(0.5)]).is_err());
        assert!(Channel::dephasing(1.2).is_err());
        assert!(Channel::depolarizing(0.3).is_ok());
    }

    #[test]
    fn classical_markov_chain_recovers() {
        let r = recover_markov(&classical_chain(), &p3()).unwrap();
        assert!(r.fidelity >= 1.0 - 1e-8, "F = {}", r.fidelity);
        assert!(r.trace_distance < 1e-7);
    }

    #[test]
    fn product_state_recovers() {
        let a = DensityOp::diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityOp::new(
            DensityOp::diagonal(&[0.6, 0.4]).unwrap().into_matrix(),
            Register::from_labels(vec![1]).unwrap(),
        )
        .unwrap();
        let cst = DensityOp::new(
            DensityOp::maximally_mixed(1).unwrap().into_matrix(),
            Register::from_labels(vec![2]).unwrap(),
        )
        .unwrap();
        let rho = a.tensor(&b).unwrap().tensor(&cst).unwrap();
        let r = recover_markov(&rho, &p3()).unwrap();
        assert!(r.fidelity >= 1.0 - 1e-8);
    }

    #[test]
    fn ghz_fails_to_recover_within_bound() {
        let r = recover_markov(&make_ghz(3).unwrap().density(), &p3()).unwrap();
        assert!((r.qcmi - 1.0).abs() < 1e-9);
        assert!(r.fidelity < 1.0 - 1e-3);
        // -log F <= I(A;C|B) holds for the Petz map here.
        assert!(-r.fidelity.log2() <= r.qcmi + 1e-9, "F = {}", r.fidelity);
    }

    #[test]
    fn petz_identity_channel_is_support_projection() {
        let sigma = DensityOp::diagonal(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        let map = petz_general(&sigma, &Channel::identity(4)).unwrap();
        let x = CMatrix::from_fn(4, 4, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let proj = support_projector(sigma.matrix()).unwrap();
        assert!((map.apply(&x) - &proj * &x * &proj).norm() < 1e-9);
    }

    #[test]
    fn petz_dephasing_recovers_diagonal_reference() {
        let sigma = DensityOp::diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let ch = Channel::complete_dephasing(4);
        let map = petz_general(&sigma, &ch).unwrap();
        let back = map.apply(&ch.apply(sigma.matrix()));
        assert!((back - sigma.matrix()).norm() < 1e-7);
    }

    #[test]
    fn depolarized_bell_marginal_not_saturating() {
        // Reference Bell marginal I/2 is a fixed point; the state |0><0| is not recovered.
        let sigma = DensityOp::maximally_mixed(1).unwrap();
        let ch = Channel::depolarizing(0.3).unwrap();
        let map = petz_general(&sigma, &ch).unwrap();
        let back = map.apply(&ch.apply(sigma.matrix()));
        assert!((back - sigma.matrix()).norm() < 1e-7);
        let rho = PureState::basis(&[0]).unwrap().density();
        let rec = map.apply(&ch.apply(rho.matrix()));
        let f = fidelity_matrices(rho.matrix(), &rec).unwrap();
        let gap = relative_entropy(rho.matrix(), sigma.matrix()).unwrap()
            - relative_entropy(&ch.apply(rho.matrix()), &ch.apply(sigma.matrix())).unwrap();
        assert!(f < 1.0 - 1e-3);
        assert!(gap > 1e-3);
    }

    #[test]
    fn petz_map_is_cp_and_tp_on_full_support() {
        let rho =
            crate::random::mixed_state(3, 8, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3))
                .unwrap();
        let map = petz_map(&rho, &p3()).unwrap();
        assert!(map.min_choi_eigenvalue() >= -1e-8);
        assert!(map.trace_preservation_defect() < 1e-8);
    }

    #[test]
    fn deficit_identity_channel() {
        let rho = make_ghz(3)
            .unwrap()
            .tensor(&PureState::new(vec![c(1.0), c(0.0)], Register::from_labels(vec![3]).unwrap()).unwrap())
            .unwrap()
            .density();
        let part = RegionPartition::single_qubits(4).unwrap();
        let r = recoverability_deficit(&rho, &part, &Channel::identity(2), None).unwrap();
        assert!(r.delta_qcmi.abs() < 1e-9);
        assert!((r.best_fidelity - 1.0).abs() < 1e-8);
    }

    #[test]
    fn deficit_replacement_on_product() {
        let rho =
            crate::random::mixed_state(1, 2, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4))
                .unwrap();
        let mut prod = rho.clone();
        for l in 1..4 {
            let f = crate::random::mixed_state(
                1,
                2,
                &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(10 + l as u64),
            )
            .unwrap();
            let f = DensityOp::new(f.into_matrix(), Register::from_labels(vec![l]).unwrap()).unwrap();
            prod = prod.tensor(&f).unwrap();
        }
        let part = RegionPartition::single_qubits(4).unwrap();
        let half = CMatrix::identity(2, 2) * c(0.5);
        let ch = Channel::replacement(2, &half).unwrap();
        let r = recoverability_deficit(&prod, &part, &ch, None).unwrap();
        assert!(r.delta_qcmi.abs() < 1e-9);
        assert!((r.best_fidelity - 1.0).abs() < 1e-7, "F = {}", r.best_fidelity);
    }

    #[test]
    fn deficit_dephasing_on_ghz() {
        let rho = make_ghz(3)
            .unwrap()
            .tensor(&PureState::new(vec![c(1.0), c(0.0)], Register::from_labels(vec![3]).unwrap()).unwrap())
            .unwrap()
            .density();
        let part = RegionPartition::single_qubits(4).unwrap();
        let r = recoverability_deficit(&rho, &part, &Channel::dephasing(0.5).unwrap(), None).unwrap();
        assert!(r.delta_qcmi.is_finite());
        assert!(r.sandwich_holds);
        assert!((0.0..=1.0).contains(&r.best_fidelity));
    }

    #[test]
    fn iterated_recovery_preserves_ac_marginals() {
        let rho = classical_chain();
        let part = p3();
        let it = iterate_recovery(&rho, &part, 3).unwrap();
        assert_eq!(it.state.n_qubits(), 5);
        let target = rho.partial_trace(&[0, 2]).unwrap();
        for i in 0..3 {
            let m = it.marginal_ac(i, part.c()).unwrap();
            assert!(trace_distance(&m, &target).unwrap().value < 1e-6);
        }
        assert!(iterate_recovery(&make_ghz(3).unwrap().density(), &part, 2).is_err());
    }
}
