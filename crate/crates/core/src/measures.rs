//! Entropic and negativity-based correlation measures.
//!
//! All logarithms are base 2. Entropies use the clipped spectrum with
//! `0 log 0 = 0`. Conditional quantities trace the spectator region D out
//! before evaluating.

use crate::error::{Error, Result};
use crate::qstate::{
    eigvalsh, entropy_bits, mat_fn_on_support, trace_norm, DensityOp, MatFn, PureState, RegionPartition, Register, C64,
};

/// Factors of the tripartite witness below this are treated as zero.
pub const TAU3_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Entropy,
    Qmi,
    Qcmi,
    Tmi,
    Negativity,
    Tau3,
    Fidelity,
    TraceDistance,
}

/// A measure value in bits (or dimensionless for fidelity, distance and negativity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureValue {
    pub value: f64,
    pub kind: MeasureKind,
}

impl MeasureValue {
    fn new(value: f64, kind: MeasureKind) -> Self {
        Self { value, kind }
    }
}

pub fn entropy(rho: &DensityOp) -> MeasureValue {
    MeasureValue::new(entropy_bits(&rho.spectrum()), MeasureKind::Entropy)
}

/// Entropy of the marginal on `labels`; the empty set has zero entropy.
pub fn marginal_entropy(rho: &DensityOp, labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy(&rho.partial_trace(labels)?).value)
}

/// Shannon binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("binary entropy argument {p} not in [0, 1]")));
    }
    Ok(entropy_bits(&[p, 1.0 - p]))
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// `I(A;C) = S(A) + S(C) - S(AC)`.
pub fn qmi(rho: &DensityOp, a: &[usize], c: &[usize]) -> Result<MeasureValue> {
    let part = RegionPartition::new(a.to_vec(), vec![], c.to_vec(), vec![])?;
    let v = marginal_entropy(rho, part.a())? + marginal_entropy(rho, part.c())? - marginal_entropy(rho, &part.abc())?;
    Ok(MeasureValue::new(v, MeasureKind::Qmi))
}

/// `I(A;C|B) = S(AB) + S(BC) - S(B) - S(ABC)` on the marginal with D traced out.
pub fn qcmi(rho: &DensityOp, part: &RegionPartition) -> Result<MeasureValue> {
    let abc = part.abc();
    let marg = rho.partial_trace(&abc)?;
    let v = marginal_entropy(&marg, &union(part.a(), part.b()))? + marginal_entropy(&marg, &union(part.b(), part.c()))?
        - marginal_entropy(&marg, part.b())?
        - entropy(&marg).value;
    Ok(MeasureValue::new(v, MeasureKind::Qcmi))
}

/// QCMI of a pure global state via the smaller side of every cut.
pub fn qcmi_pure(psi: &PureState, part: &RegionPartition) -> Result<f64> {
    Ok(psi.entropy_of(&union(part.a(), part.b()))? + psi.entropy_of(&union(part.b(), part.c()))?
        - psi.entropy_of(part.b())?
        - psi.entropy_of(&part.abc())?)
}

/// `2 h(2/n) - h(1/n) - h(3/n)`: QCMI of the n-qubit W state with single-qubit A, B, C.
pub fn table1_closed_form(n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::OutOfRange(format!("closed form needs n >= 4, got {n}")));
    }
    let n = n as f64;
    Ok(2.0 * binary_entropy(2.0 / n)? - binary_entropy(1.0 / n)? - binary_entropy(3.0 / n)?)
}

/// Tripartite mutual information
/// `S(A)+S(B)+S(C)-S(AB)-S(BC)-S(AC)+S(ABC)`.
pub fn tmi(rho: &DensityOp, part: &RegionPartition) -> Result<MeasureValue> {
    if part.b().is_empty() {
        return Err(Error::InvalidPartition("tripartite mutual information needs a nonempty B".into()));
    }
    let marg = rho.partial_trace(&part.abc())?;
    let s = |labels: &[usize]| marginal_entropy(&marg, labels);
    let (a, b, c) = (part.a(), part.b(), part.c());
    let v = s(a)? + s(b)? + s(c)? - s(&union(a, b))? - s(&union(b, c))? - s(&union(a, c))? + entropy(&marg).value;
    Ok(MeasureValue::new(v, MeasureKind::Tmi))
}

/// Negativity `(||rho^{T_i}||_1 - 1) / 2` across `region | rest of register`.
pub fn negativity(rho: &DensityOp, region: &[usize]) -> Result<MeasureValue> {
    if region.is_empty() {
        return Err(Error::InvalidPartition("negativity needs a nonempty region".into()));
    }
    let pt = rho.partial_transpose(region)?;
    let tn: f64 = eigvalsh(&pt).iter().map(|x| x.abs()).sum();
    Ok(MeasureValue::new(((tn - 1.0) / 2.0).max(0.0), MeasureKind::Negativity))
}

/// The three one-vs-rest negativities of `rho_ABC` (D traced out).
pub fn tripartite_negativities(rho: &DensityOp, part: &RegionPartition) -> Result<[f64; 3]> {
    if part.b().is_empty() {
        return Err(Error::InvalidPartition("witness needs three nonempty regions".into()));
    }
    let marg = rho.partial_trace(&part.abc())?;
    Ok([negativity(&marg, part.a())?.value, negativity(&marg, part.b())?.value, negativity(&marg, part.c())?.value])
}

/// Geometric mean of the three one-vs-rest negativities of `rho_ABC`.
pub fn tau3(rho: &DensityOp, part: &RegionPartition) -> Result<MeasureValue> {
    let n = tripartite_negativities(rho, part)?;
    let v = if n.iter().any(|&x| x < TAU3_ZERO) { 0.0 } else { (n[0] * n[1] * n[2]).cbrt() };
    Ok(MeasureValue::new(v, MeasureKind::Tau3))
}

fn same_register(rho: &DensityOp, sigma: &DensityOp) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    Ok(())
}

/// `F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2`.
pub fn fidelity(rho: &DensityOp, sigma: &DensityOp) -> Result<MeasureValue> {
    same_register(rho, sigma)?;
    let sr = mat_fn_on_support(rho.matrix(), MatFn::Sqrt)?;
    let ss = mat_fn_on_support(sigma.matrix(), MatFn::Sqrt)?;
    let f = trace_norm(&(sr * ss)).powi(2);
    Ok(MeasureValue::new(f.clamp(0.0, 1.0), MeasureKind::Fidelity))
}

/// `1/2 ||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityOp, sigma: &DensityOp) -> Result<MeasureValue> {
    same_register(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    Ok(MeasureValue::new(0.5 * trace_norm(&diff), MeasureKind::TraceDistance))
}

/// Asymptotic-continuity modulus
/// `2 sqrt(e) log d + (1 + 2 sqrt(e)) h(2 sqrt(e) / (1 + 2 sqrt(e)))`.
pub fn continuity_bound(d: usize, eps: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("dimension {d} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("epsilon {eps} not in [0, 1]")));
    }
    let s = 2.0 * eps.sqrt();
    Ok(s * (d as f64).log2() + (1.0 + s) * binary_entropy(s / (1.0 + s))?)
}

/// `(|0...0> + |1...1>) / sqrt 2`.
pub fn make_ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("GHZ state needs n >= 2, got {n}")));
    }
    let register = Register::new(n)?;
    let mut amps = vec![C64::new(0.0, 0.0); register.dim()];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = C64::new(h, 0.0);
    amps[register.dim() - 1] = C64::new(h, 0.0);
    PureState::new(amps, register)
}

/// Equal superposition of the n weight-one strings.
pub fn make_w(n: usize) -> Result<PureState> {
    if n < 3 {
        return Err(Error::OutOfRange(format!("W state needs n >= 3, got {n}")));
    }
    let register = Register::new(n)?;
    let mut amps = vec![C64::new(0.0, 0.0); register.dim()];
    let w = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        amps[1 << k] = C64::new(w, 0.0);
    }
    PureState::new(amps, register)
}
