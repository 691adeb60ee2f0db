//! Certificates: explicit extensions and pure-state ensembles.

use crate::error::{Error, Result};
use crate::qstate::tensor::{self, split_table};
use crate::qstate::{
    eigvalsh, entropy_bits, trace_distance_matrices, CMatrix, DensityOp, PureState, Purification, RegionPartition,
    Register, C64,
};

use super::isometry::isometry_defect;

/// Tolerance for accepting a certificate as an extension of a given state.
pub const CERTIFICATE_TOL: f64 = 1e-8;

/// `I(A;C|B)` of normalized pure vectors on fixed subsystem dimensions,
/// with the index tables for the four cuts built once.
#[derive(Debug, Clone)]
pub(crate) struct PureCmi {
    terms: Vec<(f64, usize, usize, Vec<usize>)>,
}

impl PureCmi {
    /// `a`, `b`, `c` are subsystem positions; everything else is traced.
    pub(crate) fn new(dims: &[usize], a: &[usize], b: &[usize], c: &[usize]) -> Self {
        let cat = |parts: &[&[usize]]| -> Vec<usize> {
            let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
            v.sort_unstable();
            v
        };
        let cuts = [(1.0, cat(&[a, b])), (1.0, cat(&[b, c])), (-1.0, cat(&[b])), (-1.0, cat(&[a, b, c]))];
        let terms = cuts
            .into_iter()
            .filter(|(_, set)| !set.is_empty() && set.len() < dims.len())
            .map(|(sign, set)| {
                let (dk, dt, comp) = split_table(dims, &set);
                (sign, dk, dt, comp)
            })
            .collect();
        Self { terms }
    }

    /// Evaluates on `v / |v|`; the zero vector gives 0.
    pub(crate) fn eval(&self, v: &[C64]) -> f64 {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|(sign, dk, dt, comp)| {
                let m = CMatrix::from_fn(*dk, *dt, |k, t| v[comp[k * dt + t]]);
                let proxy = if dk <= dt { &m * m.adjoint() } else { m.adjoint() * &m };
                let ev: Vec<f64> = eigvalsh(&proxy).into_iter().map(|x| x / norm2).collect();
                sign * entropy_bits(&ev)
            })
            .sum()
    }
}

fn qubit_cmi(register: &Register, extra: &[usize], part: &RegionPartition, b_extra: &[usize]) -> Result<PureCmi> {
    let mut dims = vec![2; register.n_qubits()];
    dims.extend_from_slice(extra);
    let a = register.positions(part.a())?;
    let mut b = register.positions(part.b())?;
    b.extend_from_slice(b_extra);
    let c = register.positions(part.c())?;
    Ok(PureCmi::new(&dims, &a, &b, &c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionOrigin {
    Trivial,
    Purification,
    ClassicalFlag,
    Random,
    User,
}

/// Extension `sigma_{R E} = Tr_F[(1 (x) V) |psi><psi| (1 (x) V)^dagger]` of the
/// state on register `R`, where `psi` purifies it on `P` and
/// `V: P -> E (x) F` is an isometry (row index `e * f_dim + f`).
#[derive(Debug, Clone)]
pub struct ExtensionAnsatz {
    purification: Purification,
    isometry: CMatrix,
    e_dim: usize,
    f_dim: usize,
    origin: ExtensionOrigin,
    params: Vec<f64>,
}

impl ExtensionAnsatz {
    pub fn new(
        purification: Purification,
        isometry: CMatrix,
        e_dim: usize,
        f_dim: usize,
        origin: ExtensionOrigin,
    ) -> Result<Self> {
        if isometry.nrows() != e_dim * f_dim || isometry.ncols() != purification.purifier_dim {
            return Err(Error::DimensionMismatch {
                expected: e_dim * f_dim * purification.purifier_dim,
                got: isometry.nrows() * isometry.ncols(),
            });
        }
        let defect = isometry_defect(&isometry);
        if defect > CERTIFICATE_TOL {
            return Err(Error::InvalidState(format!("extension map is not an isometry (defect {defect:.2e})")));
        }
        Ok(Self { purification, isometry, e_dim, f_dim, origin, params: Vec::new() })
    }

    pub(crate) fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = params;
        self
    }

    /// `E` trivial, the purifier is discarded: gives `I(A;C|B)`.
    pub fn trivial(purification: Purification) -> Self {
        let r = purification.purifier_dim;
        Self {
            purification,
            isometry: CMatrix::identity(r, r),
            e_dim: 1,
            f_dim: r,
            origin: ExtensionOrigin::Trivial,
            params: Vec::new(),
        }
    }

    /// `E` is the whole purifier: gives `I(A;C|BD)` with the purifier
    /// standing in for everything outside the register.
    pub fn purification(purification: Purification) -> Self {
        let r = purification.purifier_dim;
        Self {
            purification,
            isometry: CMatrix::identity(r, r),
            e_dim: r,
            f_dim: 1,
            origin: ExtensionOrigin::Purification,
            params: Vec::new(),
        }
    }

    /// Flag extension of the ensemble `psi_i = sum_k U_ik w_k`, where
    /// `w_k` are the columns of the purification matrix and `U` is an
    /// `m x r` isometry. `E` and `F` both hold the index `i`.
    pub fn classical_flag(purification: Purification, mixing: &CMatrix) -> Result<Self> {
        let (m, r) = mixing.shape();
        if r != purification.purifier_dim {
            return Err(Error::DimensionMismatch { expected: purification.purifier_dim, got: r });
        }
        let mut v = CMatrix::zeros(m * m, r);
        for i in 0..m {
            for k in 0..r {
                v[(i * m + i, k)] = mixing[(i, k)];
            }
        }
        Self::new(purification, v, m, m, ExtensionOrigin::ClassicalFlag)
    }

    pub fn purification_state(&self) -> &Purification {
        &self.purification
    }
    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }
    pub fn e_dim(&self) -> usize {
        self.e_dim
    }
    pub fn f_dim(&self) -> usize {
        self.f_dim
    }
    pub fn origin(&self) -> ExtensionOrigin {
        self.origin
    }
    /// Generator parameters relative to the seed isometry (empty for
    /// closed-form extensions).
    pub fn params(&self) -> &[f64] {
        &self.params
    }
    pub fn register(&self) -> &Register {
        &self.purification.system
    }

    /// Pure vector on `R (x) E (x) F`, index `(s * e_dim + e) * f_dim + f`.
    pub fn extended_vector(&self) -> Vec<C64> {
        extended_vector(&self.purification.as_matrix(), &self.isometry)
    }

    /// Subsystem dimensions of [`extended_vector`](Self::extended_vector).
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![2; self.purification.system.n_qubits()];
        d.push(self.e_dim);
        d.push(self.f_dim);
        d
    }

    /// `1/2 I(A;C|BE)` of the extension.
    pub fn half_qcmi(&self, part: &RegionPartition) -> Result<f64> {
        let n = self.purification.system.n_qubits();
        let eval = qubit_cmi(&self.purification.system, &[self.e_dim, self.f_dim], part, &[n])?;
        Ok(0.5 * eval.eval(&self.extended_vector()))
    }

    /// The extended state with `F` traced out, ordered `R, E`.
    pub fn extended_state(&self) -> CMatrix {
        let v = self.extended_vector();
        let dims = self.dims();
        let n = dims.len();
        tensor::reduced_from_pure(&v, &dims, &(0..n - 1).collect::<Vec<_>>())
    }

    /// Checks the isometry and that tracing `E` and `F` recovers `rho`.
    pub fn validate(&self, rho: &DensityOp) -> Result<()> {
        if &self.purification.system != rho.register() {
            return Err(Error::InvalidRegister("extension built for a different register".into()));
        }
        let defect = isometry_defect(&self.isometry);
        if defect > CERTIFICATE_TOL {
            return Err(Error::InvalidState(format!("isometry defect {defect:.2e}")));
        }
        let s = self.purification.system.dim();
        let psi = CMatrix::from_row_slice(s, self.e_dim * self.f_dim, &self.extended_vector());
        let dist = trace_distance_matrices(&(&psi * psi.adjoint()), rho.matrix());
        if dist > CERTIFICATE_TOL {
            return Err(Error::InvalidState(format!("extension marginal is {dist:.2e} from the state")));
        }
        Ok(())
    }

    /// Reorders the register qubits to `labels`.
    pub fn reordered(&self, labels: &[usize]) -> Result<Self> {
        let sys = &self.purification.system;
        if labels.len() != sys.n_qubits() {
            return Err(Error::InvalidRegister("reorder must list every qubit".into()));
        }
        let mut order = sys.positions(labels)?;
        order.push(sys.n_qubits());
        let (amps, _) = tensor::permute_vector(&self.purification.amplitudes, &self.purification.dims(), &order);
        let purification = Purification {
            amplitudes: amps,
            system: Register::from_labels(labels.to_vec())?,
            purifier_dim: self.purification.purifier_dim,
        };
        Ok(Self { purification, ..self.clone() })
    }

    /// Extension of the marginal on `keep`: qubits in `into_e` join `E`,
    /// the remaining traced qubits join `F`.
    pub fn restrict(&self, keep: &[usize], into_e: &[usize]) -> Result<Self> {
        let sys = &self.purification.system;
        let n = sys.n_qubits();
        let mut keep_pos = sys.positions(keep)?;
        keep_pos.sort_unstable();
        let mut e_pos = sys.positions(into_e)?;
        e_pos.sort_unstable();
        if e_pos.iter().any(|p| keep_pos.contains(p)) {
            return Err(Error::InvalidPartition("qubits moved into E must be traced".into()));
        }
        let f_pos: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p) && !e_pos.contains(p)).collect();
        let mut order = keep_pos.clone();
        order.extend(&e_pos);
        order.extend(&f_pos);
        order.push(n);
        let (amps, _) = tensor::permute_vector(&self.purification.amplitudes, &self.purification.dims(), &order);

        let (de, df) = (1usize << e_pos.len(), 1usize << f_pos.len());
        let (e, f, r) = (self.e_dim, self.f_dim, self.purification.purifier_dim);
        let mut v = CMatrix::zeros(de * e * f * df, de * df * r);
        for qe in 0..de {
            for qf in 0..df {
                for ei in 0..e {
                    for fi in 0..f {
                        let row = ((qe * e + ei) * f + fi) * df + qf;
                        for p in 0..r {
                            v[(row, (qe * df + qf) * r + p)] = self.isometry[(ei * f + fi, p)];
                        }
                    }
                }
            }
        }
        let labels = keep_pos.iter().map(|&p| sys.labels()[p]).collect();
        let purification =
            Purification { amplitudes: amps, system: Register::from_labels(labels)?, purifier_dim: de * df * r };
        Ok(Self {
            purification,
            isometry: v,
            e_dim: de * e,
            f_dim: f * df,
            origin: ExtensionOrigin::User,
            params: Vec::new(),
        })
    }

    /// Product extension of a product state; `E` and `F` are the joint
    /// subsystems `E1 E2` and `F1 F2`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (s1, s2) = (&self.purification.system, &other.purification.system);
        if !s1.is_disjoint(s2) {
            return Err(Error::InvalidRegister("registers overlap".into()));
        }
        let (r1, r2) = (self.purification.purifier_dim, other.purification.purifier_dim);
        let joint = tensor::kron_vec(&self.purification.amplitudes, &other.purification.amplitudes);
        let (amps, _) = tensor::permute_vector(&joint, &[s1.dim(), r1, s2.dim(), r2], &[0, 2, 1, 3]);
        let labels: Vec<usize> = s1.labels().iter().chain(s2.labels()).copied().collect();
        let purification =
            Purification { amplitudes: amps, system: Register::from_labels(labels)?, purifier_dim: r1 * r2 };

        let (e1, f1, e2, f2) = (self.e_dim, self.f_dim, other.e_dim, other.f_dim);
        let mut v = CMatrix::zeros(e1 * e2 * f1 * f2, r1 * r2);
        for a1 in 0..e1 {
            for a2 in 0..e2 {
                for b1 in 0..f1 {
                    for b2 in 0..f2 {
                        let row = ((a1 * e2 + a2) * f1 + b1) * f2 + b2;
                        for p1 in 0..r1 {
                            let x = self.isometry[(a1 * f1 + b1, p1)];
                            if x == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for p2 in 0..r2 {
                                v[(row, p1 * r2 + p2)] = x * other.isometry[(a2 * f2 + b2, p2)];
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            purification,
            isometry: v,
            e_dim: e1 * e2,
            f_dim: f1 * f2,
            origin: ExtensionOrigin::User,
            params: Vec::new(),
        })
    }
}

/// Rows of the purification matrix `W` (system x purifier) pushed through `V`.
pub(crate) fn extended_vector(w: &CMatrix, v: &CMatrix) -> Vec<C64> {
    let psi = w * v.transpose();
    let (s, m) = psi.shape();
    let mut out = Vec::with_capacity(s * m);
    for i in 0..s {
        for j in 0..m {
            out.push(psi[(i, j)]);
        }
    }
    out
}

/// Pure-state ensemble `{p_i, psi_i}` on a common register.
#[derive(Debug, Clone)]
pub struct EnsembleDecomp {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl EnsembleDecomp {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidState("ensemble needs one weight per component".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidState("ensemble weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("ensemble weights sum to {total}")));
        }
        if states.iter().any(|s| s.register() != states[0].register()) {
            return Err(Error::InvalidRegister("ensemble components on different registers".into()));
        }
        Ok(Self { weights, states })
    }

    /// Ensemble from subnormalized vectors `sqrt(p_i) psi_i`; components of
    /// negligible weight are dropped.
    pub fn from_subnormalized(vectors: &[Vec<C64>], register: &Register) -> Result<Self> {
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for v in vectors {
            let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if p > 1e-14 {
                weights.push(p);
                states.push(PureState::normalized(v.clone(), register.clone())?);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights, states)
    }

    /// Eigen-ensemble over the support.
    pub fn eigen(rho: &DensityOp) -> Result<Self> {
        let sd = rho.eigh()?;
        let r = sd.rank.max(1);
        let vectors: Vec<Vec<C64>> = (0..r)
            .map(|k| {
                let w = sd.eigenvalues[k].max(0.0).sqrt();
                sd.eigenvectors.column(k).iter().map(|z| z * w).collect()
            })
            .collect();
        Self::from_subnormalized(&vectors, rho.register())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn states(&self) -> &[PureState] {
        &self.states
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn register(&self) -> &Register {
        self.states[0].register()
    }

    pub fn density(&self) -> Result<DensityOp> {
        let d = self.register().dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in self.weights.iter().zip(&self.states) {
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            m += (&v * v.adjoint()) * C64::new(*w, 0.0);
        }
        DensityOp::new_unchecked(m, self.register().clone())
    }

    pub fn validate(&self, rho: &DensityOp) -> Result<()> {
        if self.register() != rho.register() {
            return Err(Error::InvalidRegister("ensemble built for a different register".into()));
        }
        let dist = trace_distance_matrices(self.density()?.matrix(), rho.matrix());
        if dist > CERTIFICATE_TOL {
            return Err(Error::InvalidState(format!("ensemble average is {dist:.2e} from the state")));
        }
        Ok(())
    }

    /// `1/2 sum_i p_i I(A;C|B)_{psi_i}`.
    pub fn mean_half_qcmi(&self, part: &RegionPartition) -> Result<f64> {
        let eval = qubit_cmi(self.register(), &[], part, &[])?;
        Ok(0.5 * self.weights.iter().zip(&self.states).map(|(w, s)| w * eval.eval(s.amplitudes())).sum::<f64>())
    }

    /// Product ensemble `{p_i q_j, psi_i (x) phi_j}`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut weights = Vec::with_capacity(self.len() * other.len());
        let mut states = Vec::with_capacity(self.len() * other.len());
        for (p, s) in self.weights.iter().zip(&self.states) {
            for (q, t) in other.weights.iter().zip(&other.states) {
                weights.push(p * q);
                states.push(s.tensor(t)?);
            }
        }
        Self::new(weights, states)
    }

    pub fn reordered(&self, labels: &[usize]) -> Result<Self> {
        let reg = self.register();
        if labels.len() != reg.n_qubits() {
            return Err(Error::InvalidRegister("reorder must list every qubit".into()));
        }
        let order = reg.positions(labels)?;
        let new_reg = Register::from_labels(labels.to_vec())?;
        let states = self
            .states
            .iter()
            .map(|s| {
                let (amps, _) = tensor::permute_vector(s.amplitudes(), &vec![2; reg.n_qubits()], &order);
                PureState::new(amps, new_reg.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { weights: self.weights.clone(), states })
    }

    /// Isometry `U` (m x r) with `sqrt(p_i) psi_i = sum_k U_ik w_k`, where
    /// `w_k` are the columns of the purification matrix.
    pub fn mixing_matrix(&self, purification: &Purification) -> Result<CMatrix> {
        let w = purification.as_matrix();
        let gram_inv = (w.adjoint() * &w)
            .try_inverse()
            .ok_or_else(|| Error::InvalidState("purification has dependent columns".into()))?;
        let pinv = gram_inv * w.adjoint();
        let m = self.len();
        let r = purification.purifier_dim;
        let mut u = CMatrix::zeros(m, r);
        for (i, (p, s)) in self.weights.iter().zip(&self.states).enumerate() {
            let v = nalgebra::DVector::from_column_slice(s.amplitudes()) * C64::new(p.sqrt(), 0.0);
            let coeffs = &pinv * v;
            for k in 0..r {
                u[(i, k)] = coeffs[k];
            }
        }
        Ok(u)
    }

    /// The flag extension of this ensemble, built on the spectral
    /// purification of its average state.
    pub fn to_extension(&self) -> Result<ExtensionAnsatz> {
        let purification = self.density()?.purify()?;
        let u = self.mixing_matrix(&purification)?;
        ExtensionAnsatz::classical_flag(purification, &u)
    }
}

/// Witness for a bound: an extension or an ensemble.
#[derive(Debug, Clone)]
pub enum Certificate {
    Extension(ExtensionAnsatz),
    Decomposition(EnsembleDecomp),
}

impl Certificate {
    /// Recomputes the certified value `1/2 I(A;C|BE)`.
    pub fn evaluate(&self, part: &RegionPartition) -> Result<f64> {
        match self {
            Certificate::Extension(x) => x.half_qcmi(part),
            Certificate::Decomposition(d) => d.mean_half_qcmi(part),
        }
    }

    pub fn validate(&self, rho: &DensityOp) -> Result<()> {
        match self {
            Certificate::Extension(x) => x.validate(rho),
            Certificate::Decomposition(d) => d.validate(rho),
        }
    }

    pub fn register(&self) -> &Register {
        match self {
            Certificate::Extension(x) => x.register(),
            Certificate::Decomposition(d) => d.register(),
        }
    }

    pub fn to_extension(&self) -> Result<ExtensionAnsatz> {
        match self {
            Certificate::Extension(x) => Ok(x.clone()),
            Certificate::Decomposition(d) => d.to_extension(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Certificate::Decomposition(a), Certificate::Decomposition(b)) => {
                Ok(Certificate::Decomposition(a.tensor(b)?))
            }
            _ => Ok(Certificate::Extension(self.to_extension()?.tensor(&other.to_extension()?)?)),
        }
    }

    pub fn reordered(&self, labels: &[usize]) -> Result<Self> {
        Ok(match self {
            Certificate::Extension(x) => Certificate::Extension(x.reordered(labels)?),
            Certificate::Decomposition(d) => Certificate::Decomposition(d.reordered(labels)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_ghz, make_w, qcmi, qcmi_pure};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn part4() -> RegionPartition {
        RegionPartition::single_qubits(4).unwrap()
    }

    #[test]
    fn pure_cmi_matches_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random::pure_state(4, &mut rng).unwrap();
        let eval = qubit_cmi(psi.register(), &[], &part4(), &[]).unwrap();
        let scaled: Vec<C64> = psi.amplitudes().iter().map(|z| z * 3.0).collect();
        assert!((eval.eval(&scaled) - qcmi_pure(&psi, &part4()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn trivial_and_purification_extensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::mixed_state(4, 3, &mut rng).unwrap();
        let part = part4();
        let p = rho.purify().unwrap();
        let triv = ExtensionAnsatz::trivial(p.clone());
        let pur = ExtensionAnsatz::purification(p);
        triv.validate(&rho).unwrap();
        pur.validate(&rho).unwrap();
        let half_b = 0.5 * qcmi(&rho, &part).unwrap().value;
        let half_d = 0.5 * qcmi(&rho, &part.conditioned_on_spectator()).unwrap().value;
        assert!((triv.half_qcmi(&part).unwrap() - half_b).abs() < 1e-10);
        // Purifier + E = D's complement; I(A;C|BE) = I(A;C|D) by duality.
        assert!((pur.half_qcmi(&part).unwrap() - half_d).abs() < 1e-10);
    }

    #[test]
    fn flag_extension_equals_ensemble_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::mixed_state(4, 2, &mut rng).unwrap();
        let part = part4();
        let u = random::unitary(4, &mut rng).columns(0, 2).into_owned();
        let p = rho.purify().unwrap();
        let flag = ExtensionAnsatz::classical_flag(p.clone(), &u).unwrap();
        flag.validate(&rho).unwrap();
        let w = p.as_matrix();
        let vectors: Vec<Vec<C64>> =
            (0..4).map(|i| (0..16).map(|s| (0..2).map(|k| u[(i, k)] * w[(s, k)]).sum()).collect()).collect();
        let ens = EnsembleDecomp::from_subnormalized(&vectors, rho.register()).unwrap();
        ens.validate(&rho).unwrap();
        assert!((ens.mean_half_qcmi(&part).unwrap() - flag.half_qcmi(&part).unwrap()).abs() < 1e-10);
        let back = ens.to_extension().unwrap();
        assert!((back.half_qcmi(&part).unwrap() - flag.half_qcmi(&part).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn restrict_moves_traced_qubits() {
        let w = make_w(4).unwrap();
        let ext = ExtensionAnsatz::trivial(Purification::from_pure(&w));
        let part = part4();
        let abc = ext.restrict(&[0, 1, 2], &[]).unwrap();
        let rho_abc = w.reduced(&[0, 1, 2]).unwrap();
        abc.validate(&rho_abc).unwrap();
        let p3 = RegionPartition::new(vec![0], vec![1], vec![2], vec![]).unwrap();
        assert!((abc.half_qcmi(&p3).unwrap() - ext.half_qcmi(&part).unwrap()).abs() < 1e-12);

        let ac = abc.restrict(&[0, 2], &[1]).unwrap();
        ac.validate(&w.reduced(&[0, 2]).unwrap()).unwrap();
        let pac = RegionPartition::new(vec![0], vec![], vec![2], vec![]).unwrap();
        assert!((ac.half_qcmi(&pac).unwrap() - ext.half_qcmi(&part).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn tensor_and_reorder() {
        let ghz = make_ghz(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tau = random::mixed_state(1, 2, &mut rng).unwrap();
        let tau = DensityOp::new(tau.into_matrix(), Register::from_labels(vec![3]).unwrap()).unwrap();
        let x = ExtensionAnsatz::trivial(Purification::from_pure(&ghz));
        let y = ExtensionAnsatz::trivial(tau.purify().unwrap());
        let joint = x.tensor(&y).unwrap();
        let rho = ghz.density().tensor(&tau).unwrap();
        joint.validate(&rho).unwrap();
        let re = joint.reordered(&[3, 0, 1, 2]).unwrap();
        re.validate(&rho.reordered(&[3, 0, 1, 2]).unwrap()).unwrap();
        let part = RegionPartition::new(vec![0], vec![1], vec![2], vec![3]).unwrap();
        assert!((re.half_qcmi(&part).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_certificates_rejected() {
        let rho = DensityOp::maximally_mixed(2).unwrap();
        let other = DensityOp::diagonal(&[0.7, 0.1, 0.1, 0.1]).unwrap();
        let ext = ExtensionAnsatz::purification(other.purify().unwrap());
        assert!(ext.validate(&rho).is_err());
        let v = CMatrix::from_element(2, 1, C64::new(1.0, 0.0));
        assert!(ExtensionAnsatz::new(Purification::from_pure(&make_ghz(2).unwrap()), v, 2, 1, ExtensionOrigin::User)
            .is_err());
        assert!(EnsembleDecomp::new(vec![0.5, 0.4], vec![make_ghz(2).unwrap(), make_ghz(2).unwrap()]).is_err());
    }
}
