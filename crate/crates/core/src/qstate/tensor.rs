//! Index arithmetic over composite systems with arbitrary local dimensions.
//!
//! Subsystem 0 is the most significant digit of the composite basis index,
//! matching the qubit convention used by [`Register`](super::Register).

use super::{CMatrix, C64};

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Splits every composite index into (kept index, traced index).
///
/// `keep` must be strictly increasing. Returns a table `comp` with
/// `comp[k * d_traced + t]` equal to the composite index.
pub(crate) fn split_table(dims: &[usize], keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let d = total_dim(dims);
    let dk: usize = keep.iter().map(|&s| dims[s]).product();
    let dt = d / dk;
    let mut comp = vec![0usize; d];
    let mut digits = vec![0usize; dims.len()];
    for x in 0..d {
        let mut rem = x;
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let mut k = 0;
        let mut t = 0;
        for s in 0..dims.len() {
            if keep.binary_search(&s).is_ok() {
                k = k * dims[s] + digits[s];
            } else {
                t = t * dims[s] + digits[s];
            }
        }
        comp[k * dt + t] = x;
    }
    (dk, dt, comp)
}

fn sorted_unique(keep: &[usize], n: usize) -> Vec<usize> {
    let mut k: Vec<usize> = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    assert!(k.iter().all(|&s| s < n), "subsystem index out of range");
    k
}

/// Partial trace keeping the listed subsystems (in their original order).
pub fn ptrace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let keep = sorted_unique(keep, dims.len());
    debug_assert_eq!(m.nrows(), total_dim(dims));
    let (dk, dt, comp) = split_table(dims, &keep);
    let mut out = CMatrix::zeros(dk, dk);
    for j in 0..dk {
        for i in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += m[(comp[i * dt + t], comp[j * dt + t])];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Reshapes a pure vector into the (kept x traced) amplitude matrix.
pub(crate) fn amplitude_matrix(v: &[C64], dims: &[usize], keep: &[usize]) -> CMatrix {
    let keep = sorted_unique(keep, dims.len());
    debug_assert_eq!(v.len(), total_dim(dims));
    let (dk, dt, comp) = split_table(dims, &keep);
    CMatrix::from_fn(dk, dt, |k, t| v[comp[k * dt + t]])
}

/// Reduced density matrix of `|v><v|` on the kept subsystems.
pub fn reduced_from_pure(v: &[C64], dims: &[usize], keep: &[usize]) -> CMatrix {
    let m = amplitude_matrix(v, dims, keep);
    &m * m.adjoint()
}

/// A Hermitian matrix with the same nonzero spectrum as the reduced state on
/// `keep`, using whichever side of the cut is smaller.
pub fn reduced_spectrum_proxy(v: &[C64], dims: &[usize], keep: &[usize]) -> CMatrix {
    let m = amplitude_matrix(v, dims, keep);
    if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    }
}

/// Partial transpose on the listed subsystems.
pub fn partial_transpose(m: &CMatrix, dims: &[usize], sys: &[usize]) -> CMatrix {
    let sys = sorted_unique(sys, dims.len());
    let d = total_dim(dims);
    // Per-subsystem strides for digit swaps.
    let mut strides = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let mut out = CMatrix::zeros(d, d);
    for x in 0..d {
        for y in 0..d {
            let mut xs = x;
            let mut ys = y;
            for &s in &sys {
                let dx = (x / strides[s]) % dims[s];
                let dy = (y / strides[s]) % dims[s];
                xs = xs - dx * strides[s] + dy * strides[s];
                ys = ys - dy * strides[s] + dx * strides[s];
            }
            out[(x, y)] = m[(xs, ys)];
        }
    }
    out
}

fn permutation_map(dims: &[usize], order: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = dims.len();
    assert_eq!(order.len(), n, "order must list every subsystem");
    let mut seen = vec![false; n];
    for &o in order {
        assert!(o < n && !seen[o], "order must be a permutation");
        seen[o] = true;
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let d = total_dim(dims);
    let mut map = vec![0usize; d];
    let mut digits = vec![0usize; n];
    for (x, slot) in map.iter_mut().enumerate() {
        let mut rem = x;
        for s in (0..n).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let mut y = 0;
        for (j, &o) in order.iter().enumerate() {
            y = y * new_dims[j] + digits[o];
        }
        *slot = y;
    }
    (new_dims, map)
}

/// Reorders subsystems so that new subsystem `j` is old subsystem `order[j]`.
pub fn permute_vector(v: &[C64], dims: &[usize], order: &[usize]) -> (Vec<C64>, Vec<usize>) {
    let (new_dims, map) = permutation_map(dims, order);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (x, &y) in map.iter().enumerate() {
        out[y] = v[x];
    }
    (out, new_dims)
}

/// Matrix counterpart of [`permute_vector`].
pub fn permute_matrix(m: &CMatrix, dims: &[usize], order: &[usize]) -> (CMatrix, Vec<usize>) {
    let (new_dims, map) = permutation_map(dims, order);
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for x in 0..d {
        for y in 0..d {
            out[(map[x], map[y])] = m[(x, y)];
        }
    }
    (out, new_dims)
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Embeds an operator acting on subsystem `target` into the full space.
pub fn embed_operator(op: &CMatrix, dims: &[usize], target: usize) -> CMatrix {
    let left: usize = dims[..target].iter().product();
    let right: usize = dims[target + 1..].iter().product();
    let il = CMatrix::identity(left, left);
    let ir = CMatrix::identity(right, right);
    il.kronecker(op).kronecker(&ir)
}
