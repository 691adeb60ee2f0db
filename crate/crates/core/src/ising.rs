//! Transverse-field Ising ring `H = -J sum_i Z_i Z_{i+1} + h(t) sum_i X_i`
//! under a ramp-hold-ramp quench of `h`, with uniform dephasing (jump
//! operators `sqrt(gamma) Z_i`).
//!
//! Two integrators share one structural Hamiltonian: RK4 on the full
//! density matrix, and Monte Carlo wavefunction trajectories. Qubit `i` is
//! register position `i` (bit `n - 1 - i` of the basis index); bit value 1
//! is spin down, `Z = -1`.

use log::debug;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{for_each_mut, map_indexed, Execution};
use crate::qstate::{CMatrix, DensityOp, PureState, Register, C64, MAX_QUBITS};
use crate::squashed::EnsembleDecomp;

const TRACE_DRIFT_LIMIT: f64 = 1e-6;
const MAX_DT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchProtocol {
    pub n_qubits: usize,
    pub j: f64,
    pub h_max: f64,
    pub t_up: f64,
    pub t_hold: f64,
    pub t_down: f64,
    pub gamma: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for QuenchProtocol {
    fn default() -> Self {
        Self {
            n_qubits: 8,
            j: 1.0,
            h_max: 2.0,
            t_up: 150.0,
            t_hold: 20.0,
            t_down: 150.0,
            gamma: 0.5,
            dt: 0.02,
            n_traj: 500,
            seed: 0,
        }
    }
}

impl QuenchProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(self.n_qubits, MAX_QUBITS));
        }
        for (name, v) in [("t_up", self.t_up), ("t_hold", self.t_hold), ("t_down", self.t_down), ("gamma", self.gamma)]
        {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange(format!("{name} must be a finite nonnegative number, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::OutOfRange(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if self.n_traj == 0 {
            return Err(Error::OutOfRange("n_traj must be at least 1".into()));
        }
        if !self.j.is_finite() || !self.h_max.is_finite() {
            return Err(Error::OutOfRange("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.t_up + self.t_hold + self.t_down
    }

    /// Field at time `t`: linear up, constant, linear down, then zero.
    pub fn ramp(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let hold_end = self.t_up + self.t_hold;
        if t < self.t_up {
            self.h_max * t / self.t_up
        } else if t <= hold_end {
            self.h_max
        } else if t < hold_end + self.t_down {
            self.h_max * (1.0 - (t - hold_end) / self.t_down)
        } else {
            0.0
        }
    }

    /// `0, every, 2 every, ...` up to the end of the protocol.
    pub fn checkpoints(&self, every: f64) -> Vec<f64> {
        let n = (self.total_time() / every + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * every).collect()
    }
}

/// Free-function form of [`QuenchProtocol::ramp`].
pub fn ramp(t: f64, proto: &QuenchProtocol) -> f64 {
    proto.ramp(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub j: f64,
    pub field: f64,
}

/// Matrix-free Ising operator on a periodic ring.
#[derive(Debug, Clone)]
pub struct IsingOperator {
    n: usize,
    /// Diagonal `-J sum Z_i Z_{i+1}` per basis index.
    zz: Vec<f64>,
    masks: Vec<usize>,
}

impl IsingOperator {
    pub fn new(n: usize, j: f64) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_QUBITS));
        }
        let d = 1usize << n;
        let masks: Vec<usize> = (0..n).map(|i| 1 << (n - 1 - i)).collect();
        let zz = (0..d)
            .map(|x| {
                let z = |i: usize| if x & masks[i] == 0 { 1.0 } else { -1.0 };
                -j * (0..n).map(|i| z(i) * z((i + 1) % n)).sum::<f64>()
            })
            .collect();
        Ok(Self { n, zz, masks })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.zz.len()
    }

    /// `out = H(h) psi`.
    pub fn apply(&self, h: f64, psi: &[C64], out: &mut [C64]) {
        for (x, o) in out.iter_mut().enumerate() {
            let mut flip = C64::new(0.0, 0.0);
            for &m in &self.masks {
                flip += psi[x ^ m];
            }
            *o = psi[x] * self.zz[x] + flip * h;
        }
    }

    pub fn energy(&self, h: f64, psi: &[C64]) -> f64 {
        let mut hp = vec![C64::new(0.0, 0.0); psi.len()];
        self.apply(h, psi, &mut hp);
        psi.iter().zip(&hp).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn dense(&self, h: f64) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for x in 0..d {
            m[(x, x)] = C64::new(self.zz[x], 0.0);
            for &mask in &self.masks {
                m[(x ^ mask, x)] += C64::new(h, 0.0);
            }
        }
        m
    }

    /// Lindblad generator `-i[H, rho] + gamma sum_i (Z_i rho Z_i - rho)` on
    /// a row-major matrix. The dissipator multiplies `rho_ab` by
    /// `-2 gamma popcount(a ^ b)`.
    fn lindblad_rhs(&self, h: f64, gamma: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim();
        let minus_i = C64::new(0.0, -1.0);
        for a in 0..d {
            let row = &mut out[a * d..(a + 1) * d];
            for (b, o) in row.iter_mut().enumerate() {
                let x = rho[a * d + b];
                let mut comm = x * (self.zz[a] - self.zz[b]);
                let mut flips = C64::new(0.0, 0.0);
                for &m in &self.masks {
                    flips += rho[(a ^ m) * d + b] - rho[a * d + (b ^ m)];
                }
                comm += flips * h;
                *o = minus_i * comm - x * (2.0 * gamma * (a ^ b).count_ones() as f64);
            }
        }
    }
}

/// Dense Hamiltonian at the given field.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<CMatrix> {
    Ok(IsingOperator::new(spec.n, spec.j)?.dense(spec.field))
}

/// The all-down product state.
pub fn initial_state(n: usize) -> Result<PureState> {
    PureState::basis(&vec![1; n])
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// One classical RK4 step of `dy/dt = f(t, y)` on a flat complex vector.
fn rk4<F: FnMut(f64, &[C64], &mut [C64])>(y: &mut [C64], t: f64, dt: f64, scratch: &mut Rk4Scratch, mut f: F) {
    let Rk4Scratch { k1, k2, k3, k4, tmp } = scratch;
    f(t, y, k1);
    tmp.copy_from_slice(y);
    axpy(tmp, C64::new(0.5 * dt, 0.0), k1);
    f(t + 0.5 * dt, tmp, k2);
    tmp.copy_from_slice(y);
    axpy(tmp, C64::new(0.5 * dt, 0.0), k2);
    f(t + 0.5 * dt, tmp, k3);
    tmp.copy_from_slice(y);
    axpy(tmp, C64::new(dt, 0.0), k3);
    f(t + dt, tmp, k4);
    let w = dt / 6.0;
    for i in 0..y.len() {
        y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
    }
}

#[derive(Debug, Clone)]
struct Rk4Scratch {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Scratch {
    fn new(len: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); len];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

/// Fixed-step RK4 integration of the master equation.
#[derive(Debug, Clone)]
pub struct LindbladIntegrator {
    proto: QuenchProtocol,
    op: IsingOperator,
    rho: Vec<C64>,
    t: f64,
    scratch: Rk4Scratch,
}

impl LindbladIntegrator {
    pub fn new(rho0: &DensityOp, proto: &QuenchProtocol) -> Result<Self> {
        proto.validate()?;
        if rho0.n_qubits() != proto.n_qubits {
            return Err(Error::DimensionMismatch { expected: proto.n_qubits, got: rho0.n_qubits() });
        }
        let op = IsingOperator::new(proto.n_qubits, proto.j)?;
        let d = op.dim();
        let m = rho0.matrix();
        let rho = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
        Ok(Self { proto: proto.clone(), op, rho, t: 0.0, scratch: Rk4Scratch::new(d * d) })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let (op, proto) = (&self.op, &self.proto);
        rk4(&mut self.rho, self.t, dt, &mut self.scratch, |t, y, out| {
            op.lindblad_rhs(proto.ramp(t), proto.gamma, y, out)
        });
        self.t += dt;
        let d = self.op.dim();
        let tr: f64 = (0..d).map(|a| self.rho[a * d + a].re).sum();
        if (tr - 1.0).abs() > TRACE_DRIFT_LIMIT || !tr.is_finite() {
            return Err(Error::Instability(format!("trace drifted to {tr} at t = {:.4}", self.t)));
        }
        Ok(())
    }

    /// Integrates with steps of `dt`, shortening the last one to land on `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.t < t - 1e-12 {
            let dt = self.proto.dt.min(t - self.t);
            self.step(dt)?;
        }
        Ok(())
    }

    pub fn state(&self) -> Result<DensityOp> {
        let d = self.op.dim();
        let m = CMatrix::from_row_slice(d, d, &self.rho);
        DensityOp::new_unchecked((&m + m.adjoint()) * C64::new(0.5, 0.0), Register::new(self.op.n)?)
    }
}

/// One RK4 step of length `proto.dt` from time `t`.
pub fn lindblad_step(rho: &DensityOp, t: f64, proto: &QuenchProtocol) -> Result<DensityOp> {
    let mut it = LindbladIntegrator::new(rho, proto)?;
    it.t = t;
    it.step(proto.dt)?;
    it.state()
}

/// A single jump trajectory. The non-Hermitian part of the effective
/// Hamiltonian is `-i gamma n / 2` times the identity because `Z_i^2 = 1`,
/// so the unnormalized norm decays as `exp(-gamma n t)` and the time at
/// which it crosses the drawn threshold is known in closed form; the state
/// is propagated under `H` to that time, a `Z_i` chosen uniformly (all
/// jump weights `|sqrt(gamma) Z_i psi|^2` are equal) is applied, and a new
/// threshold is drawn.
#[derive(Debug, Clone)]
pub struct Trajectory {
    psi: Vec<C64>,
    t: f64,
    next_jump: f64,
    jumps: usize,
    rng: ChaCha8Rng,
    scratch: Rk4Scratch,
}

impl Trajectory {
    fn new(psi0: &[C64], seed: u64, index: usize, rate: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut tr = Self {
            psi: psi0.to_vec(),
            t: 0.0,
            next_jump: f64::INFINITY,
            jumps: 0,
            rng,
            scratch: Rk4Scratch::new(psi0.len()),
        };
        tr.next_jump = tr.draw_wait(rate);
        tr
    }

    fn draw_wait(&mut self, rate: f64) -> f64 {
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        // Norm threshold r in (0, 1]; |psi|^2 = exp(-rate * tau) hits it at tau.
        let r: f64 = 1.0 - self.rng.random::<f64>();
        self.t - r.ln() / rate
    }

    pub fn state(&self) -> &[C64] {
        &self.psi
    }

    pub fn jumps(&self) -> usize {
        self.jumps
    }

    fn propagate(&mut self, op: &IsingOperator, proto: &QuenchProtocol, dt: f64) {
        let minus_i = C64::new(0.0, -1.0);
        rk4(&mut self.psi, self.t, dt, &mut self.scratch, |t, y, out| {
            op.apply(proto.ramp(t), y, out);
            out.iter_mut().for_each(|z| *z *= minus_i);
        });
        self.t += dt;
        let norm = self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        self.psi.iter_mut().for_each(|z| *z /= norm);
    }

    fn advance_to(&mut self, op: &IsingOperator, proto: &QuenchProtocol, t: f64) {
        let rate = proto.gamma * op.n as f64;
        while self.t < t - 1e-12 {
            let grid_end = t.min(self.t + proto.dt);
            if self.next_jump <= grid_end {
                let dt = self.next_jump - self.t;
                if dt > 0.0 {
                    self.propagate(op, proto, dt);
                }
                self.t = self.next_jump;
                let site = self.rng.random_range(0..op.n);
                let mask = op.masks[site];
                for (x, z) in self.psi.iter_mut().enumerate() {
                    if x & mask != 0 {
                        *z = -*z;
                    }
                }
                self.jumps += 1;
                self.next_jump = self.draw_wait(rate);
            } else {
                self.propagate(op, proto, grid_end - self.t);
            }
        }
    }
}

/// All trajectories of one protocol, advanced in lockstep so that only the
/// current states are held in memory.
#[derive(Debug, Clone)]
pub struct McwfStepper {
    proto: QuenchProtocol,
    op: IsingOperator,
    trajectories: Vec<Trajectory>,
    exec: Execution,
    t: f64,
}

impl McwfStepper {
    /// Trajectory `k` draws from the ChaCha8 stream `k` of the protocol seed.
    pub fn new(proto: &QuenchProtocol, exec: Execution) -> Result<Self> {
        proto.validate()?;
        let op = IsingOperator::new(proto.n_qubits, proto.j)?;
        let psi0 = initial_state(proto.n_qubits)?;
        let rate = proto.gamma * proto.n_qubits as f64;
        let trajectories = map_indexed(proto.n_traj, exec, |k| Trajectory::new(psi0.amplitudes(), proto.seed, k, rate));
        Ok(Self { proto: proto.clone(), op, trajectories, exec, t: 0.0 })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let (op, proto) = (&self.op, &self.proto);
        for_each_mut(&mut self.trajectories, self.exec, |tr| tr.advance_to(op, proto, t));
        self.t = self.t.max(t);
        if let Some(bad) =
            self.trajectories.iter().find(|tr| tr.psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
        {
            return Err(Error::Instability(format!("trajectory state diverged at t = {:.4}", bad.t)));
        }
        Ok(())
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn snapshot(&self) -> Result<EnsembleSnapshot> {
        Ok(EnsembleSnapshot {
            t: self.t,
            register: Register::new(self.op.n)?,
            states: self.trajectories.iter().map(|tr| tr.psi.clone()).collect(),
        })
    }

    pub fn jump_counts(&self) -> Vec<usize> {
        self.trajectories.iter().map(|tr| tr.jumps).collect()
    }

    pub fn operator(&self) -> &IsingOperator {
        &self.op
    }
}

/// Equally weighted trajectory states at one time.
#[derive(Debug, Clone)]
pub struct EnsembleSnapshot {
    pub t: f64,
    pub register: Register,
    pub states: Vec<Vec<C64>>,
}

impl EnsembleSnapshot {
    fn stacked(&self) -> CMatrix {
        let d = self.register.dim();
        let n = self.states.len();
        CMatrix::from_fn(d, n, |x, k| self.states[k][x])
    }

    /// Ensemble-average density operator.
    pub fn density(&self) -> Result<DensityOp> {
        let psi = self.stacked();
        let m = (&psi * psi.adjoint()) * C64::new(1.0 / self.states.len() as f64, 0.0);
        DensityOp::new_unchecked(m, self.register.clone())
    }

    /// Ensemble-average marginal on `labels`, in register order.
    pub fn marginal(&self, labels: &[usize]) -> Result<DensityOp> {
        let full = PureState::new(self.states[0].clone(), self.register.clone())?;
        let reg = full.reduced(labels)?.register().clone();
        let mut keep = self.register.positions(labels)?;
        keep.sort_unstable();
        let dims = vec![2; self.register.n_qubits()];
        let dk = reg.dim();
        let mut m = CMatrix::zeros(dk, dk);
        for s in &self.states {
            m += crate::qstate::tensor::reduced_from_pure(s, &dims, &keep);
        }
        m /= C64::new(self.states.len() as f64, 0.0);
        DensityOp::new_unchecked(m, reg)
    }

    /// `tr rho^2` of the ensemble average, via the trajectory Gram matrix.
    pub fn purity(&self) -> f64 {
        let psi = self.stacked();
        let n = self.states.len() as f64;
        let g = if psi.nrows() <= psi.ncols() { &psi * psi.adjoint() } else { psi.adjoint() * &psi };
        g.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n * n)
    }

    pub fn decomposition(&self) -> Result<EnsembleDecomp> {
        let w = 1.0 / self.states.len() as f64;
        let states = self
            .states
            .iter()
            .map(|s| PureState::normalized(s.clone(), self.register.clone()))
            .collect::<Result<Vec<_>>>()?;
        EnsembleDecomp::new(vec![w; states.len()], states)
    }

    /// Trajectory averages of the pure-state observables, with the purity
    /// of the ensemble average.
    pub fn observables(&self) -> Observables {
        let n = self.states.len() as f64;
        let mut acc = Observables { mean_z: 0.0, mean_x: 0.0, nn_corr: 0.0, purity: 0.0 };
        for s in &self.states {
            let o = pure_observables(s);
            acc.mean_z += o.mean_z / n;
            acc.mean_x += o.mean_x / n;
            acc.nn_corr += o.nn_corr / n;
        }
        acc.purity = self.purity();
        acc
    }
}

/// Checkpointed states of every trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub snapshots: Vec<EnsembleSnapshot>,
    pub jump_counts: Vec<usize>,
}

impl TrajectoryEnsemble {
    pub fn weights(&self) -> Vec<f64> {
        let n = self.jump_counts.len();
        vec![1.0 / n as f64; n]
    }
}

/// Runs all trajectories and keeps their states at the (sorted) checkpoints.
pub fn mcwf_run(proto: &QuenchProtocol, checkpoints: &[f64], exec: Execution) -> Result<TrajectoryEnsemble> {
    let mut stepper = McwfStepper::new(proto, exec)?;
    let mut times = checkpoints.to_vec();
    times.sort_by(f64::total_cmp);
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in &times {
        if t < 0.0 {
            return Err(Error::OutOfRange(format!("checkpoint {t} is negative")));
        }
        stepper.advance_to(t)?;
        snapshots.push(stepper.snapshot()?);
        debug!("mcwf checkpoint t = {t}");
    }
    Ok(TrajectoryEnsemble { snapshots, jump_counts: stepper.jump_counts() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub mean_z: f64,
    pub mean_x: f64,
    /// `n^-1 sum_i <Z_i Z_{i+1}>` around the ring.
    pub nn_corr: f64,
    pub purity: f64,
}

fn n_of_dim(d: usize) -> usize {
    d.trailing_zeros() as usize
}

fn z_sums(x: usize, n: usize) -> (f64, f64) {
    let z = |i: usize| if x >> (n - 1 - i) & 1 == 0 { 1.0 } else { -1.0 };
    let single: f64 = (0..n).map(z).sum();
    let bonds: f64 = (0..n).map(|i| z(i) * z((i + 1) % n)).sum();
    (single, bonds)
}

pub fn pure_observables(psi: &[C64]) -> Observables {
    let n = n_of_dim(psi.len());
    let nf = n as f64;
    let mut o = Observables { mean_z: 0.0, mean_x: 0.0, nn_corr: 0.0, purity: 1.0 };
    for (x, a) in psi.iter().enumerate() {
        let p = a.norm_sqr();
        let (single, bonds) = z_sums(x, n);
        o.mean_z += p * single / nf;
        o.nn_corr += p * bonds / nf;
        for i in 0..n {
            o.mean_x += (a.conj() * psi[x ^ (1 << i)]).re / nf;
        }
    }
    o
}

pub fn observables(rho: &DensityOp) -> Observables {
    let m = rho.matrix();
    let n = rho.n_qubits();
    let nf = n as f64;
    let mut o = Observables { mean_z: 0.0, mean_x: 0.0, nn_corr: 0.0, purity: rho.purity() };
    for x in 0..rho.dim() {
        let p = m[(x, x)].re;
        let (single, bonds) = z_sums(x, n);
        o.mean_z += p * single / nf;
        o.nn_corr += p * bonds / nf;
        for i in 0..n {
            o.mean_x += m[(x ^ (1 << i), x)].re / nf;
        }
    }
    o
}

/// Single-site `<Z_i>` of a density operator, by register position.
pub fn site_magnetizations(rho: &DensityOp) -> Vec<f64> {
    let n = rho.n_qubits();
    let m = rho.matrix();
    (0..n)
        .map(|i| (0..rho.dim()).map(|x| if x >> (n - 1 - i) & 1 == 0 { m[(x, x)].re } else { -m[(x, x)].re }).sum())
        .collect()
}

/// `<H>` of a pure state at field `h`.
pub fn energy(op: &IsingOperator, h: f64, psi: &[C64]) -> f64 {
    op.energy(h, psi)
}

/// Density matrix of a pure amplitude vector.
pub fn projector(psi: &[C64]) -> CMatrix {
    let v = DVector::from_column_slice(psi);
    &v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{eigvalsh, hermiticity_defect, trace_distance_matrices};

    #[test]
    fn ramp_shape() {
        let p = QuenchProtocol::default();
        assert_eq!(p.ramp(0.0), 0.0);
        assert!((p.ramp(75.0) - 1.0).abs() < 1e-15);
        assert_eq!(p.ramp(150.0), 2.0);
        assert_eq!(p.ramp(160.0), 2.0);
        assert_eq!(p.ramp(170.0), 2.0);
        assert!((p.ramp(245.0) - 1.0).abs() < 1e-12);
        assert_eq!(p.ramp(320.0), 0.0);
        assert_eq!(p.checkpoints(1.0).len(), 321);
    }

    #[test]
    fn protocol_validation() {
        assert!(QuenchProtocol { dt: 0.06, ..Default::default() }.validate().is_err());
        assert!(QuenchProtocol { n_traj: 0, ..Default::default() }.validate().is_err());
        assert!(QuenchProtocol { t_hold: -1.0, ..Default::default() }.validate().is_err());
        assert!(QuenchProtocol::default().validate().is_ok());
    }

    #[test]
    fn hamiltonian_basics() {
        let spec = HamiltonianSpec { n: 8, j: 1.0, field: 1.3 };
        let h = build_hamiltonian(&spec).unwrap();
        assert!(hermiticity_defect(&h) < 1e-12);
        let psi0 = initial_state(8).unwrap();
        let v = DVector::from_column_slice(psi0.amplitudes());
        let h0 = build_hamiltonian(&HamiltonianSpec { field: 0.0, ..spec }).unwrap();
        assert!(((v.adjoint() * &h0 * &v)[(0, 0)].re + 8.0).abs() < 1e-12);
        assert!(((v.adjoint() * &h * &v)[(0, 0)].re + 8.0).abs() < 1e-12, "X terms vanish on a basis state");
        let hv = &h0 * &v;
        assert!((hv + &v * C64::new(8.0, 0.0)).norm() < 1e-12, "eigenstate at h = 0");
    }

    #[test]
    fn two_site_ring_spectrum() {
        // Two bonds between the same pair: H = -2J ZZ + h (X1 + X2).
        let (j, h) = (1.0, 0.7);
        let m = build_hamiltonian(&HamiltonianSpec { n: 2, j, field: h }).unwrap();
        let mut ev = eigvalsh(&m);
        ev.sort_by(f64::total_cmp);
        let brute = {
            let zz = CMatrix::from_diagonal(&DVector::from_vec(
                vec![1.0, -1.0, -1.0, 1.0].into_iter().map(|x| C64::new(x, 0.0)).collect(),
            ));
            let x = CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            );
            let id = CMatrix::identity(2, 2);
            let full = zz * C64::new(-2.0 * j, 0.0) + (x.kronecker(&id) + id.kronecker(&x)) * C64::new(h, 0.0);
            let mut e = eigvalsh(&full);
            e.sort_by(f64::total_cmp);
            e
        };
        for (a, b) in ev.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
        let lowest = -(4.0 * j * j + 4.0 * h * h).sqrt();
        assert!((ev[0] - lowest).abs() < 1e-12);
    }

    #[test]
    fn structural_apply_matches_dense() {
        let op = IsingOperator::new(5, 0.8).unwrap();
        let psi: Vec<C64> = (0..32).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let mut out = vec![C64::new(0.0, 0.0); 32];
        op.apply(1.7, &psi, &mut out);
        let dense = op.dense(1.7) * DVector::from_column_slice(&psi);
        for k in 0..32 {
            assert!((out[k] - dense[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_dephasing() {
        let p = QuenchProtocol { n_qubits: 1, j: 0.0, h_max: 0.0, gamma: 0.5, ..Default::default() };
        let plus = DensityOp::new(CMatrix::from_element(2, 2, C64::new(0.5, 0.0)), Register::new(1).unwrap()).unwrap();
        let mut it = LindbladIntegrator::new(&plus, &p).unwrap();
        it.advance_to(1.0).unwrap();
        let off = it.state().unwrap().matrix()[(0, 1)].re;
        assert!((off - 0.5 * (-2.0 * 0.5f64).exp()).abs() < 1e-4, "{off}");
    }

    #[test]
    fn initial_state_is_stationary_without_field() {
        let p = QuenchProtocol { n_qubits: 4, h_max: 0.0, ..Default::default() };
        let rho0 = initial_state(4).unwrap().density();
        let mut it = LindbladIntegrator::new(&rho0, &p).unwrap();
        it.advance_to(2.0).unwrap();
        assert!(trace_distance_matrices(it.state().unwrap().matrix(), rho0.matrix()) < 1e-12);
    }

    #[test]
    fn lindblad_preserves_trace_and_hermiticity_and_purity_decreases() {
        let p = QuenchProtocol { n_qubits: 4, t_up: 5.0, t_hold: 1.0, t_down: 5.0, ..Default::default() };
        let rho0 = initial_state(4).unwrap().density();
        let mut it = LindbladIntegrator::new(&rho0, &p).unwrap();
        let mut last = 1.0;
        for k in 1..=20 {
            it.advance_to(0.5 * k as f64).unwrap();
            let s = it.state().unwrap();
            assert!((s.trace() - 1.0).abs() < 1e-9);
            s.validate().unwrap();
            let pur = s.purity();
            assert!(pur <= last + 1e-8, "purity rose from {last} to {pur}");
            last = pur;
        }
        let one = lindblad_step(&rho0, 3.0, &p).unwrap();
        assert!((one.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_system_conserves_energy() {
        let p = QuenchProtocol { n_qubits: 5, h_max: 1.0, t_up: 0.0, t_hold: 100.0, gamma: 0.0, ..Default::default() };
        let op = IsingOperator::new(5, 1.0).unwrap();
        let psi: Vec<C64> = (0..32).map(|k| C64::from_polar(32f64.sqrt().recip(), k as f64 * 0.37)).collect();
        let e0 = op.energy(1.0, &psi);
        let h = op.dense(1.0);
        let rho0 = DensityOp::new(projector(&psi), Register::new(5).unwrap()).unwrap();
        let mut it = LindbladIntegrator::new(&rho0, &p).unwrap();
        it.advance_to(10.0).unwrap();
        let s = it.state().unwrap();
        let e1 = (s.matrix() * &h).trace().re;
        assert!((e1 - e0).abs() < 1e-6, "{e0} -> {e1}");
        assert!((s.trace() - 1.0).abs() < 1e-12);

        // The pure-state path loses a little energy to RK4 damping of the
        // highest-frequency components.
        let mut tr = Trajectory::new(&psi, 0, 0, 0.0);
        tr.advance_to(&op, &p, 10.0);
        assert_eq!(tr.jumps, 0);
        assert!((op.energy(1.0, tr.state()) - e0).abs() < 1e-4);
    }

    #[test]
    fn zero_dephasing_trajectory_matches_lindblad() {
        let p = QuenchProtocol {
            n_qubits: 3,
            gamma: 0.0,
            t_up: 4.0,
            t_hold: 1.0,
            t_down: 4.0,
            n_traj: 2,
            ..Default::default()
        };
        let mut mc = McwfStepper::new(&p, Execution::Sequential).unwrap();
        mc.advance_to(6.0).unwrap();
        let a = mc.trajectories()[0].state().to_vec();
        let b = mc.trajectories()[1].state().to_vec();
        assert_eq!(a, b, "no randomness without jumps");
        let mut it = LindbladIntegrator::new(&initial_state(3).unwrap().density(), &p).unwrap();
        it.advance_to(6.0).unwrap();
        assert!(trace_distance_matrices(&projector(&a), it.state().unwrap().matrix()) < 1e-4);
    }

    #[test]
    fn jump_counts_are_poissonian() {
        let p = QuenchProtocol {
            n_qubits: 3,
            n_traj: 400,
            gamma: 0.5,
            t_up: 2.0,
            t_hold: 0.0,
            t_down: 2.0,
            ..Default::default()
        };
        let mut mc = McwfStepper::new(&p, Execution::Sequential).unwrap();
        mc.advance_to(4.0).unwrap();
        let counts = mc.jump_counts();
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        let expect = 0.5 * 3.0 * 4.0;
        let sigma = (expect / counts.len() as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * sigma, "mean {mean} vs {expect}");
    }

    #[test]
    fn observables_of_initial_state() {
        let psi0 = initial_state(8).unwrap();
        let o = pure_observables(psi0.amplitudes());
        assert_eq!((o.mean_z, o.mean_x, o.nn_corr), (-1.0, 0.0, 1.0));
        let od = observables(&psi0.density());
        assert_eq!((od.mean_z, od.mean_x, od.nn_corr, od.purity), (-1.0, 0.0, 1.0, 1.0));
        let plus: Vec<C64> = vec![C64::new(0.25, 0.0); 16];
        assert!((pure_observables(&plus).mean_x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snapshot_reductions_agree() {
        let p = QuenchProtocol { n_qubits: 4, n_traj: 30, t_up: 3.0, t_hold: 0.0, t_down: 3.0, ..Default::default() };
        let mut mc = McwfStepper::new(&p, Execution::Sequential).unwrap();
        mc.advance_to(2.0).unwrap();
        let snap = mc.snapshot().unwrap();
        let rho = snap.density().unwrap();
        rho.validate().unwrap();
        assert!((snap.purity() - rho.purity()).abs() < 1e-12);
        let marg = snap.marginal(&[1, 3]).unwrap();
        assert!(trace_distance_matrices(marg.matrix(), rho.partial_trace(&[1, 3]).unwrap().matrix()) < 1e-12);
        let o = snap.observables();
        let od = observables(&rho);
        assert!((o.mean_z - od.mean_z).abs() < 1e-12);
        assert!((o.mean_x - od.mean_x).abs() < 1e-12);
        assert!((o.nn_corr - od.nn_corr).abs() < 1e-12);
        snap.decomposition().unwrap().validate(&rho).unwrap();
    }

    #[test]
    fn execution_modes_agree() {
        let p = QuenchProtocol { n_qubits: 3, n_traj: 8, t_up: 2.0, t_hold: 0.0, t_down: 2.0, ..Default::default() };
        let run = |exec| {
            let mut mc = McwfStepper::new(&p, exec).unwrap();
            mc.advance_to(3.0).unwrap();
            mc.snapshot().unwrap().states
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}
