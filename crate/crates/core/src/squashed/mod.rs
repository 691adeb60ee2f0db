//! Certified upper bounds on the hysteretic squashed entanglement
//! `T(A;C|B) = 1/2 inf I(A;C|BE)` over extensions of `rho_ABCD`, and on its
//! relatives `N(A;C|B)` (extensions of `rho_ABC`) and `E(A;C)` (extensions
//! of `rho_AC`).
//!
//! The infimum is not computed. Every function returns the smallest value of
//! `1/2 I(A;C|BE)` found among explicitly constructed extensions, together
//! with the extension (or the ensemble whose flag is the extension). On pure
//! inputs the bound is exact.

mod ansatz;
pub mod isometry;
pub mod simplex;

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use ansatz::{Certificate, EnsembleDecomp, ExtensionAnsatz, ExtensionOrigin, CERTIFICATE_TOL};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::measures::qcmi;
use crate::qstate::{trace_distance_matrices, CMatrix, DensityOp, PureState, RegionPartition, C64};
use crate::random;
use ansatz::{extended_vector, PureCmi};
use isometry::{complete_to_unitary, isometry_from_params, param_count};
use simplex::{minimize, SimplexOptions};

/// Purity at or above which a state is treated as pure.
pub const PURE_PURITY: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    ExactPure,
    HalfQcmiTrivial,
    HalfQcmiGivenD,
    ClassicalFlag,
    ConvexRoof,
    Variational,
    /// A caller-supplied certificate was the best point found.
    Hint,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::ExactPure => "exact_pure",
            BoundKind::HalfQcmiTrivial => "half_qcmi_trivial",
            BoundKind::HalfQcmiGivenD => "half_qcmi_given_D",
            BoundKind::ClassicalFlag => "classical_flag",
            BoundKind::ConvexRoof => "convex_roof",
            BoundKind::Variational => "variational",
            BoundKind::Hint => "hint",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Bits.
    pub value: f64,
    pub kind: BoundKind,
    pub certificate: Certificate,
    pub restarts_used: usize,
    pub converged: bool,
}

impl BoundReport {
    fn closed_form(value: f64, kind: BoundKind, certificate: Certificate) -> Self {
        Self { value, kind, certificate, restarts_used: 0, converged: true }
    }
}

#[derive(Debug, Clone)]
pub struct SquashOptions {
    /// Optimizer runs per search, seeded runs included.
    pub restarts: usize,
    /// Ensemble size for the convex-roof search; defaults to twice the rank.
    pub m_max: Option<usize>,
    /// Extension dimensions for the variational search; default to the rank.
    pub e_dim: Option<usize>,
    pub f_dim: Option<usize>,
    pub tol: f64,
    pub patience: usize,
    pub max_evals: usize,
    pub step: f64,
    pub seed: u64,
    pub rank_cap: usize,
    pub variational: bool,
    pub max_variational_qubits: usize,
    /// Largest `dim(R) * e_dim * f_dim` for the variational search.
    pub max_extended_dim: usize,
    /// Feasible points offered by the caller; evaluated before any search.
    pub hints: Vec<Certificate>,
    pub exec: Execution,
}

impl Default for SquashOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            m_max: None,
            e_dim: None,
            f_dim: None,
            tol: 1e-7,
            patience: 50,
            max_evals: 1500,
            step: 0.4,
            seed: 0,
            rank_cap: 16,
            variational: true,
            max_variational_qubits: 6,
            max_extended_dim: 1024,
            hints: Vec::new(),
            exec: Execution::default(),
        }
    }
}

impl SquashOptions {
    fn simplex(&self) -> SimplexOptions {
        SimplexOptions { step: self.step, tol: self.tol, patience: self.patience, max_evals: self.max_evals }
    }

    fn with_hints(&self, hints: Vec<Certificate>) -> Self {
        Self { hints, ..self.clone() }
    }
}

/// Exact value `1/2 I(A;C|B)` on a pure global state.
pub fn tsq_pure(psi: &PureState, part: &RegionPartition) -> Result<BoundReport> {
    part.check_cover(psi.register())?;
    let ens = EnsembleDecomp::new(vec![1.0], vec![psi.clone()])?;
    let value = ens.mean_half_qcmi(part)?;
    Ok(BoundReport::closed_form(value, BoundKind::ExactPure, Certificate::Decomposition(ens)))
}

/// `1/2 sum_i p_i I(A;C|B)_{psi_i}`: the flag extension of the ensemble.
pub fn classical_flag_bound(decomp: &EnsembleDecomp, part: &RegionPartition) -> Result<BoundReport> {
    let value = decomp.mean_half_qcmi(part)?;
    Ok(BoundReport::closed_form(value, BoundKind::ClassicalFlag, Certificate::Decomposition(decomp.clone())))
}

fn check_purity(rho: &DensityOp) -> Option<PureState> {
    if rho.purity() < PURE_PURITY {
        return None;
    }
    let sd = rho.eigh().ok()?;
    let amps: Vec<C64> = sd.eigenvectors.column(0).iter().copied().collect();
    PureState::normalized(amps, rho.register().clone()).ok()
}

fn validated_hints(rho: &DensityOp, opts: &SquashOptions) -> Result<()> {
    for (i, h) in opts.hints.iter().enumerate() {
        h.validate(rho).map_err(|e| Error::Precondition(format!("hint {i} is not an extension of the state: {e}")))?;
    }
    Ok(())
}

fn restart_rng(seed: u64, salt: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(restart as u64);
    rng
}

struct SearchOutcome {
    value: f64,
    point: CMatrix,
    params: Vec<f64>,
    origin: ExtensionOrigin,
    converged: bool,
}

/// Runs one simplex descent per seed isometry, then random ones until
/// `restarts` runs are done; returns the best run.
/// `refine` post-processes each run's isometry; `params` stay those of the
/// simplex run.
fn multi_start<F, R>(
    seeds: Vec<(CMatrix, ExtensionOrigin)>,
    m: usize,
    r: usize,
    opts: &SquashOptions,
    salt: u64,
    objective: F,
    refine: R,
) -> Option<(SearchOutcome, usize)>
where
    F: Fn(&CMatrix) -> f64 + Sync + Send,
    R: Fn(CMatrix) -> CMatrix + Sync + Send,
{
    let runs = opts.restarts.max(seeds.len());
    let n_params = param_count(m, r);
    let simplex = opts.simplex();
    let outcomes = map_indexed(runs, opts.exec, |k| {
        let (base, origin) = match seeds.get(k) {
            Some((iso, origin)) => (complete_to_unitary(iso), *origin),
            None => (random::unitary(m, &mut restart_rng(opts.seed, salt, k)), ExtensionOrigin::Random),
        };
        let res = minimize(|x| objective(&isometry_from_params(&base, x, r)), &vec![0.0; n_params], &simplex);
        let point = refine(isometry_from_params(&base, &res.x, r));
        // Re-evaluate at the returned point so the value matches the certificate.
        let value = objective(&point);
        SearchOutcome { value, point, params: res.x, origin, converged: res.converged }
    });
    outcomes.into_iter().min_by(|a, b| a.value.total_cmp(&b.value)).map(|best| (best, runs))
}

const POLISH_SWEEPS: usize = 40;

/// Sweeps of 2x2 rotations between pairs of ensemble members. A rotation
/// changes only two vectors and has two effective parameters, so the simplex
/// converges cheaply where the full search in `m * r` parameters stalls.
fn pairwise_polish(mut u: CMatrix, w: &CMatrix, eval: &PureCmi, opts: &SquashOptions) -> CMatrix {
    let mut vecs = &u * w.transpose();
    let m = vecs.nrows();
    let term = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>() * eval.eval(v);
    let row = |mat: &CMatrix, i: usize| -> Vec<C64> { mat.row(i).iter().copied().collect() };
    let mut terms: Vec<f64> = (0..m).map(|i| term(&row(&vecs, i))).collect();
    let simplex = SimplexOptions { step: 0.3, tol: 1e-10, patience: 12, max_evals: 120 };
    // Rotation [[c, s e^{i phi}], [-s e^{-i phi}, c]]; row phases are irrelevant.
    let coeffs = |x: &[f64]| {
        let (c, s) = (C64::new(x[0].cos(), 0.0), x[0].sin());
        let ph = C64::from_polar(s, x[1]);
        (c, ph, -ph.conj())
    };
    for _ in 0..POLISH_SWEEPS {
        let before: f64 = terms.iter().sum();
        for i in 0..m {
            for k in i + 1..m {
                let (vi, vk) = (row(&vecs, i), row(&vecs, k));
                let mix = |x: &[f64]| {
                    let (c, a, b) = coeffs(x);
                    let ni: Vec<C64> = vi.iter().zip(&vk).map(|(p, q)| c * p + a * q).collect();
                    let nk: Vec<C64> = vi.iter().zip(&vk).map(|(p, q)| b * p + c * q).collect();
                    (ni, nk)
                };
                let res = minimize(
                    |x| {
                        let (ni, nk) = mix(x);
                        term(&ni) + term(&nk)
                    },
                    &[0.0, 0.0],
                    &simplex,
                );
                if res.value < terms[i] + terms[k] - 1e-13 {
                    let (c, a, b) = coeffs(&res.x);
                    for mat in [&mut vecs, &mut u] {
                        let (ri, rk) = (mat.row(i).clone_owned(), mat.row(k).clone_owned());
                        mat.set_row(i, &(&ri * c + &rk * a));
                        mat.set_row(k, &(&ri * b + &rk * c));
                    }
                    terms[i] = term(&row(&vecs, i));
                    terms[k] = term(&row(&vecs, k));
                }
            }
        }
        if before - terms.iter().sum::<f64>() < opts.tol {
            break;
        }
    }
    u
}

/// Ensemble vectors `sum_k U_ik w_k` for the rows of `u`.
fn mixed_vectors(w: &CMatrix, u: &CMatrix) -> Vec<Vec<C64>> {
    let mixed = u * w.transpose();
    (0..mixed.nrows()).map(|i| mixed.row(i).iter().copied().collect()).collect()
}

/// Convex roof of `1/2 I(A;C|B)` over ensembles of `m_max` vectors mixing
/// the eigen-ensemble, started from the eigen-ensemble and from every
/// ensemble hint that fits.
pub fn coqcmi(rho: &DensityOp, part: &RegionPartition, opts: &SquashOptions) -> Result<BoundReport> {
    part.check_cover(rho.register())?;
    validated_hints(rho, opts)?;
    let purification = rho.purify()?;
    let r = purification.purifier_dim;
    if r > opts.rank_cap {
        return Err(Error::RankCap { rank: r, cap: opts.rank_cap });
    }
    let m = opts.m_max.unwrap_or(2 * r).max(r);
    let w = purification.as_matrix();
    let eval = PureCmi::new(
        &vec![2; rho.n_qubits()],
        &rho.register().positions(part.a())?,
        &rho.register().positions(part.b())?,
        &rho.register().positions(part.c())?,
    );
    let objective = |u: &CMatrix| -> f64 {
        0.5 * mixed_vectors(&w, u)
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() * eval.eval(v))
            .sum::<f64>()
    };

    let mut seeds = vec![(CMatrix::identity(m, r), ExtensionOrigin::ClassicalFlag)];
    let mut fixed: Vec<(f64, Certificate)> = Vec::new();
    for h in &opts.hints {
        if let Certificate::Decomposition(d) = h {
            fixed.push((d.mean_half_qcmi(part)?, h.clone()));
            if d.len() <= m {
                let u = d.mixing_matrix(&purification)?;
                let mut padded = CMatrix::zeros(m, r);
                padded.rows_mut(0, d.len()).copy_from(&u);
                seeds.push((padded, ExtensionOrigin::User));
            }
        } else {
            fixed.push((h.evaluate(part)?, h.clone()));
        }
    }
    let refine = |u: CMatrix| pairwise_polish(u, &w, &eval, opts);
    let (best, runs) = multi_start(seeds, m, r, opts, 0x636f_7163_6d69, objective, refine).expect("at least one seed");
    let decomp = EnsembleDecomp::from_subnormalized(&mixed_vectors(&w, &best.point), rho.register())?;
    let mut report = BoundReport {
        value: decomp.mean_half_qcmi(part)?,
        kind: BoundKind::ConvexRoof,
        certificate: Certificate::Decomposition(decomp),
        restarts_used: runs,
        converged: best.converged,
    };
    for (value, cert) in fixed {
        if value < report.value {
            report.value = value;
            report.kind = BoundKind::Hint;
            report.certificate = cert;
        }
    }
    debug!("coqcmi: {:.6} ({}) after {} runs", report.value, report.kind.as_str(), runs);
    Ok(report)
}

/// Upper bound on `T(A;C|B)` of `rho_ABCD`: the minimum over the trivial,
/// purification and eigen-flag extensions, the convex-roof search, caller
/// hints and a variational search over extension isometries.
pub fn tsq_upper(rho: &DensityOp, part: &RegionPartition, opts: &SquashOptions) -> Result<BoundReport> {
    part.check_cover(rho.register())?;
    validated_hints(rho, opts)?;
    if let Some(psi) = check_purity(rho) {
        return tsq_pure(&psi, part);
    }
    if let Some(report) = spectator_product_route(rho, part, opts)? {
        return Ok(report);
    }
    if opts.variational && rho.n_qubits() > opts.max_variational_qubits {
        return Err(Error::Precondition(format!(
            "variational search is limited to {} qubits, state has {}",
            opts.max_variational_qubits,
            rho.n_qubits()
        )));
    }

    let purification = rho.purify()?;
    let r = purification.purifier_dim;
    let mut best: Option<BoundReport> = None;
    let mut offer = |report: BoundReport| match &best {
        Some(b) if b.value <= report.value => {}
        _ => best = Some(report),
    };

    let trivial = ExtensionAnsatz::trivial(purification.clone());
    offer(BoundReport::closed_form(
        trivial.half_qcmi(part)?,
        BoundKind::HalfQcmiTrivial,
        Certificate::Extension(trivial),
    ));
    let pur = ExtensionAnsatz::purification(purification.clone());
    offer(BoundReport::closed_form(pur.half_qcmi(part)?, BoundKind::HalfQcmiGivenD, Certificate::Extension(pur)));
    let eigen = EnsembleDecomp::eigen(rho)?;
    offer(classical_flag_bound(&eigen, part)?);
    for h in &opts.hints {
        offer(BoundReport::closed_form(h.evaluate(part)?, BoundKind::Hint, h.clone()));
    }
    if r <= opts.rank_cap {
        offer(coqcmi(rho, part, opts)?);
    } else {
        info!("convex-roof search skipped: rank {r} above cap {}", opts.rank_cap);
    }
    if opts.variational {
        if let Some(report) = variational(rho, part, opts)? {
            offer(report);
        }
    }
    let report = best.expect("closed-form candidates always exist");
    debug!("tsq_upper: {:.6} ({})", report.value, report.kind.as_str());
    Ok(report)
}

/// `rho_ABCD = rho_ABC (x) rho_D`: bound `N(A;C|B)` of `rho_ABC` and extend
/// the certificate by the spectator.
fn spectator_product_route(
    rho: &DensityOp,
    part: &RegionPartition,
    opts: &SquashOptions,
) -> Result<Option<BoundReport>> {
    if part.d().is_empty() {
        return Ok(None);
    }
    let rho_abc = rho.partial_trace(&part.abc())?;
    let rho_d = rho.partial_trace(part.d())?;
    let product = rho_abc.tensor(&rho_d)?.reordered(rho.register().labels())?;
    if trace_distance_matrices(product.matrix(), rho.matrix()) > 1e-12 {
        return Ok(None);
    }
    let abc_hints: Vec<Certificate> = opts
        .hints
        .iter()
        .filter_map(|h| h.to_extension().and_then(|x| x.restrict(rho_abc.register().labels(), &[])).ok())
        .map(Certificate::Extension)
        .collect();
    let inner = tsq_upper(&rho_abc, &part.without_spectator(), &opts.with_hints(abc_hints))?;
    let spectator = Certificate::Decomposition(EnsembleDecomp::eigen(&rho_d)?);
    let certificate = inner.certificate.tensor(&spectator)?.reordered(rho.register().labels())?;
    if certificate.validate(rho).is_err() {
        return Ok(None);
    }
    info!("spectator factorizes; bound computed on the ABC marginal");
    let kind = if inner.kind == BoundKind::ExactPure { BoundKind::ClassicalFlag } else { inner.kind };
    Ok(Some(BoundReport { value: certificate.evaluate(part)?, kind, certificate, ..inner }))
}

/// Extension dimensions for the variational search, shrunk until the
/// extended register fits the cap; `None` when no `e * f >= r` fits.
fn variational_dims(sys_dim: usize, r: usize, opts: &SquashOptions) -> Option<(usize, usize)> {
    let mut e = opts.e_dim.unwrap_or(r).max(1);
    let mut f = opts.f_dim.unwrap_or(r).max(1);
    while sys_dim * e * f > opts.max_extended_dim {
        if e >= f && e > 1 {
            e -= 1;
        } else if f > 1 {
            f -= 1;
        } else {
            return None;
        }
    }
    (e * f >= r).then_some((e, f))
}

fn variational(rho: &DensityOp, part: &RegionPartition, opts: &SquashOptions) -> Result<Option<BoundReport>> {
    let purification = rho.purify()?;
    let r = purification.purifier_dim;
    let Some((e, f)) = variational_dims(rho.dim(), r, opts) else {
        info!("variational search skipped: no extension of rank {r} fits the cap");
        return Ok(None);
    };
    let m = e * f;
    let w = purification.as_matrix();
    let n = rho.n_qubits();
    let mut dims = vec![2; n];
    dims.extend([e, f]);
    let mut b = rho.register().positions(part.b())?;
    b.push(n);
    let eval = PureCmi::new(&dims, &rho.register().positions(part.a())?, &b, &rho.register().positions(part.c())?);
    let objective = |v: &CMatrix| 0.5 * eval.eval(&extended_vector(&w, v));

    // Seed isometries embedded in E (x) F, row index e * f + f.
    let mut seeds = Vec::new();
    if f >= r {
        seeds.push((CMatrix::from_fn(m, r, |row, p| unit(row == p)), ExtensionOrigin::Trivial));
    }
    if e >= r {
        seeds.push((CMatrix::from_fn(m, r, |row, p| unit(row == p * f)), ExtensionOrigin::Purification));
    }
    if e >= r && f >= r {
        seeds.push((CMatrix::from_fn(m, r, |row, p| unit(row == p * f + p)), ExtensionOrigin::ClassicalFlag));
    }
    let Some((best, runs)) = multi_start(seeds, m, r, opts, 0x7661_7269, objective, |u| u) else {
        return Ok(None);
    };
    let ansatz = ExtensionAnsatz::new(purification, best.point, e, f, best.origin)?.with_params(best.params);
    Ok(Some(BoundReport {
        value: ansatz.half_qcmi(part)?,
        kind: BoundKind::Variational,
        certificate: Certificate::Extension(ansatz),
        restarts_used: runs,
        converged: best.converged,
    }))
}

fn unit(on: bool) -> C64 {
    C64::new(if on { 1.0 } else { 0.0 }, 0.0)
}

/// Upper bound on `N(A;C|B)`: extensions of the `ABC` marginal of `rho`.
pub fn nsq_upper(rho: &DensityOp, part: &RegionPartition, opts: &SquashOptions) -> Result<BoundReport> {
    let marginal = rho.partial_trace(&part.abc())?;
    tsq_upper(&marginal, &part.without_spectator(), opts)
}

/// Upper bound on `E(A;C)`: extensions of the `AC` marginal of `rho`.
pub fn esq_upper(rho: &DensityOp, a: &[usize], c: &[usize], opts: &SquashOptions) -> Result<BoundReport> {
    let part = RegionPartition::new(a.to_vec(), vec![], c.to_vec(), vec![])?;
    let marginal = rho.partial_trace(&part.abc())?;
    tsq_upper(&marginal, &part, opts)
}

#[derive(Debug, Clone)]
pub struct HierarchyRecord {
    pub esq: BoundReport,
    pub nsq: BoundReport,
    pub tsq: BoundReport,
    /// `1/2 I(A;C|D)`.
    pub half_qcmi_given_d: f64,
    /// `T <= 1/2 I(A;C|D) + 1e-9`.
    pub tsq_below_given_d: bool,
    /// `N <= T + 1e-2` with the `T` extension offered to the `N` search.
    pub nsq_below_tsq: bool,
}

impl HierarchyRecord {
    pub fn values(&self) -> [f64; 4] {
        [self.esq.value, self.nsq.value, self.tsq.value, self.half_qcmi_given_d]
    }
}

/// Bounds `E`, `N`, `T` and `1/2 I(A;C|D)` for one state. The `T`
/// certificate, restricted to `ABC`, seeds the `N` search; the `N`
/// certificate with `B` folded into `E` seeds the `E` search.
pub fn hierarchy_check(rho: &DensityOp, part: &RegionPartition, opts: &SquashOptions) -> Result<HierarchyRecord> {
    part.check_cover(rho.register())?;
    let tsq = tsq_upper(rho, part, opts)?;
    let half_d = if part.d().is_empty() { 0.0 } else { 0.5 * qcmi(rho, &part.conditioned_on_spectator())?.value };

    let abc = part.abc();
    let rho_abc = rho.partial_trace(&abc)?;
    let n_hint = tsq.certificate.to_extension()?.restrict(rho_abc.register().labels(), &[])?;
    let nsq = nsq_upper(rho, part, &opts.with_hints(vec![Certificate::Extension(n_hint)]))?;

    let ac: Vec<usize> = part.a().iter().chain(part.c()).copied().collect();
    let rho_ac = rho.partial_trace(&ac)?;
    let e_hint = nsq.certificate.to_extension()?.restrict(rho_ac.register().labels(), part.b())?;
    let esq = esq_upper(rho, part.a(), part.c(), &opts.with_hints(vec![Certificate::Extension(e_hint)]))?;

    let record = HierarchyRecord {
        tsq_below_given_d: tsq.value <= half_d + 1e-9,
        nsq_below_tsq: nsq.value <= tsq.value + 1e-2,
        esq,
        nsq,
        tsq,
        half_qcmi_given_d: half_d,
    };
    if !record.tsq_below_given_d || !record.nsq_below_tsq {
        log::warn!("hierarchy ordering violated: {:?}", record.values());
    }
    Ok(record)
}

/// `T(A1 A2;C|B) - T(A1;C|B) - T(A2;C|B A1)` from upper bounds; logged only,
/// since upper bounds do not preserve the inequality. In the middle term
/// `A2` joins the spectator.
pub fn monogamy_gap(
    rho: &DensityOp,
    a1: &[usize],
    a2: &[usize],
    part: &RegionPartition,
    opts: &SquashOptions,
) -> Result<f64> {
    let whole_a: Vec<usize> = a1.iter().chain(a2).copied().collect();
    let reg = rho.register();
    let joint = RegionPartition::with_rest(whole_a, part.b().to_vec(), part.c().to_vec(), reg)?;
    let first = RegionPartition::with_rest(a1.to_vec(), part.b().to_vec(), part.c().to_vec(), reg)?;
    let b_a1: Vec<usize> = part.b().iter().chain(a1).copied().collect();
    let second = RegionPartition::with_rest(a2.to_vec(), b_a1, part.c().to_vec(), reg)?;
    let gap = tsq_upper(rho, &joint, opts)?.value
        - tsq_upper(rho, &first, opts)?.value
        - tsq_upper(rho, &second, opts)?.value;
    info!("monogamy diagnostic (A2 joined to D): {gap:.6}");
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_ghz, make_w, qcmi_pure};
    use crate::qstate::Register;
    use rand::SeedableRng;

    fn quick() -> SquashOptions {
        SquashOptions { restarts: 3, max_evals: 400, exec: Execution::Sequential, ..Default::default() }
    }

    fn dephased_ghz3() -> DensityOp {
        DensityOp::diagonal(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap()
    }

    fn p3() -> RegionPartition {
        RegionPartition::new(vec![0], vec![1], vec![2], vec![]).unwrap()
    }

    #[test]
    fn pure_values() {
        let ghz = make_ghz(3).unwrap();
        let r = tsq_pure(&ghz, &p3()).unwrap();
        assert_eq!(r.kind, BoundKind::ExactPure);
        assert!((r.value - 0.5).abs() < 1e-12);
        let ghz4 = make_ghz(4).unwrap();
        assert!(tsq_pure(&ghz4, &RegionPartition::single_qubits(4).unwrap()).unwrap().value.abs() < 1e-12);
        let w5 = make_w(5).unwrap();
        let v = tsq_pure(&w5, &RegionPartition::single_qubits(5).unwrap()).unwrap().value;
        assert!((v - 0.1245).abs() < 5e-4, "{v}");
    }

    #[test]
    fn flag_bound_depends_on_decomposition() {
        let zero = PureState::basis(&[0, 0, 0]).unwrap();
        let one = PureState::basis(&[1, 1, 1]).unwrap();
        let product = EnsembleDecomp::new(vec![0.5, 0.5], vec![zero, one]).unwrap();
        product.validate(&dephased_ghz3()).unwrap();
        assert!(classical_flag_bound(&product, &p3()).unwrap().value.abs() < 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut plus = vec![C64::new(0.0, 0.0); 8];
        let mut minus = plus.clone();
        plus[0] = C64::new(h, 0.0);
        plus[7] = C64::new(h, 0.0);
        minus[0] = C64::new(h, 0.0);
        minus[7] = C64::new(-h, 0.0);
        let reg = Register::new(3).unwrap();
        let cat = EnsembleDecomp::new(
            vec![0.5, 0.5],
            vec![PureState::new(plus, reg.clone()).unwrap(), PureState::new(minus, reg).unwrap()],
        )
        .unwrap();
        cat.validate(&dephased_ghz3()).unwrap();
        assert!((classical_flag_bound(&cat, &p3()).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coqcmi_cases() {
        let ghz = make_ghz(3).unwrap();
        let r = coqcmi(&ghz.density(), &p3(), &quick()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);

        let r = coqcmi(&dephased_ghz3(), &p3(), &quick()).unwrap();
        assert!(r.value <= 1e-4, "{}", r.value);
        assert!((r.certificate.evaluate(&p3()).unwrap() - r.value).abs() < 1e-9);
        r.certificate.validate(&dephased_ghz3()).unwrap();

        let mix = DensityOp::mixture(&[(0.5, &ghz.density()), (0.5, &make_w(3).unwrap().density())]).unwrap();
        let r = coqcmi(&mix, &p3(), &quick()).unwrap();
        assert!(r.value <= 0.5 * (0.5 + 0.5 * 0.918_295_8) + 1e-6, "{}", r.value);
        let eigen = classical_flag_bound(&EnsembleDecomp::eigen(&mix).unwrap(), &p3()).unwrap().value;
        assert!(r.value <= eigen + 1e-9);
    }

    #[test]
    fn polish_never_worsens_and_keeps_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = crate::random::mixed_state(3, 3, &mut rng).unwrap();
        let w = rho.purify().unwrap().as_matrix();
        let eval = PureCmi::new(&[2, 2, 2], &[0], &[1], &[2]);
        let objective = |u: &CMatrix| -> f64 {
            mixed_vectors(&w, u).iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() * eval.eval(v)).sum()
        };
        let u = random::unitary(6, &mut rng).columns(0, 3).clone_owned();
        let polished = pairwise_polish(u.clone(), &w, &eval, &quick());
        assert!(objective(&polished) <= objective(&u) + 1e-12);
        assert!(isometry::isometry_defect(&polished) < 1e-10);
        let decomp = EnsembleDecomp::from_subnormalized(&mixed_vectors(&w, &polished), rho.register()).unwrap();
        decomp.validate(&rho).unwrap();
    }

    #[test]
    fn rank_cap_enforced() {
        let rho = DensityOp::maximally_mixed(3).unwrap();
        let opts = SquashOptions { rank_cap: 4, ..quick() };
        assert!(matches!(coqcmi(&rho, &p3(), &opts), Err(Error::RankCap { rank: 8, cap: 4 })));
    }

    #[test]
    fn tsq_upper_on_separable_marginal() {
        let rho = make_ghz(4).unwrap().reduced(&[0, 1, 2]).unwrap();
        let r = tsq_upper(&rho, &p3(), &quick()).unwrap();
        assert!(r.value <= 1e-4, "{r:?}");
        r.certificate.validate(&rho).unwrap();
        assert!((r.certificate.evaluate(&p3()).unwrap() - r.value).abs() < 1e-9);
    }

    #[test]
    fn tsq_upper_dispatches_pure() {
        let w = make_w(4).unwrap();
        let part = RegionPartition::single_qubits(4).unwrap();
        let r = tsq_upper(&w.density(), &part, &quick()).unwrap();
        assert_eq!(r.kind, BoundKind::ExactPure);
        assert!((r.value - 0.5 * qcmi_pure(&w, &part).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn variational_size_cap() {
        let part = RegionPartition::single_qubits(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random::mixed_state(7, 2, &mut rng).unwrap();
        assert!(matches!(tsq_upper(&rho, &part, &quick()), Err(Error::Precondition(_))));
        let closed = SquashOptions { variational: false, ..quick() };
        let r = tsq_upper(&closed_rho(), &part, &closed).unwrap();
        assert!(r.value.abs() < 1e-9, "product spectator route: {r:?}");
        let r = tsq_upper(&rho, &part, &closed).unwrap();
        assert!((r.certificate.evaluate(&part).unwrap() - r.value).abs() < 1e-9);
    }

    fn closed_rho() -> DensityOp {
        DensityOp::maximally_mixed(7).unwrap()
    }

    #[test]
    fn esq_cases() {
        let bell = make_ghz(2).unwrap().density();
        let r = esq_upper(&bell, &[0], &[1], &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        let classical = DensityOp::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(esq_upper(&classical, &[0], &[1], &quick()).unwrap().value <= 1e-4);
        let w = make_w(3).unwrap().density();
        let r = esq_upper(&w, &[0], &[2], &quick()).unwrap();
        assert!(r.value > 0.0 && r.value <= 1.0);
    }

    #[test]
    fn variational_dims_respect_cap() {
        let opts = SquashOptions::default();
        assert_eq!(variational_dims(16, 4, &opts), Some((4, 4)));
        assert_eq!(variational_dims(16, 16, &opts), Some((8, 8)));
        assert_eq!(variational_dims(64, 16, &opts), Some((4, 4)));
    }

    #[test]
    fn hierarchy_on_w4() {
        let w = make_w(4).unwrap().density();
        let part = RegionPartition::single_qubits(4).unwrap();
        let rec = hierarchy_check(&w, &part, &quick()).unwrap();
        let half = 0.5 * 0.377_443_8;
        assert!((rec.tsq.value - half).abs() < 1e-6);
        assert!((rec.half_qcmi_given_d - half).abs() < 1e-6);
        assert!(rec.tsq_below_given_d && rec.nsq_below_tsq);
        assert!(rec.esq.value <= rec.nsq.value + 1e-9);
    }
}
