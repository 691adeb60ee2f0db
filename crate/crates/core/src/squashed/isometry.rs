//! Isometries `C^r -> C^m` as the first `r` columns of `B exp(G)`, where
//! `B` is a fixed unitary and `G` an anti-Hermitian generator supported on
//! the blocks that touch the first `r` columns:
//!
//! ```text
//! G = [ K   -L^dagger ]     K: r x r anti-Hermitian, L: (m-r) x r
//!     [ L    0        ]
//! ```
//!
//! `G = 0` reproduces the first `r` columns of `B`.

use crate::qstate::{eigh, CMatrix, C64};

pub fn param_count(m: usize, r: usize) -> usize {
    r * r + 2 * r * (m - r)
}

pub fn generator(params: &[f64], m: usize, r: usize) -> CMatrix {
    assert_eq!(params.len(), param_count(m, r));
    let mut g = CMatrix::zeros(m, m);
    let mut it = params.iter().copied();
    let mut next = || it.next().unwrap_or(0.0);
    for i in 0..r {
        g[(i, i)] = C64::new(0.0, next());
        for j in (i + 1)..r {
            let z = C64::new(next(), next());
            g[(i, j)] = z;
            g[(j, i)] = -z.conj();
        }
    }
    for i in r..m {
        for j in 0..r {
            let z = C64::new(next(), next());
            g[(i, j)] = z;
            g[(j, i)] = -z.conj();
        }
    }
    g
}

/// First `r` columns of `exp(G)` for anti-Hermitian `G`.
pub fn exp_first_columns(g: &CMatrix, r: usize) -> CMatrix {
    let m = g.nrows();
    // G = iH with H Hermitian.
    let h = g * C64::new(0.0, -1.0);
    let sd = eigh(&h).expect("generator is anti-Hermitian by construction");
    let w = &sd.eigenvectors;
    let mut left = w.clone();
    for k in 0..m {
        let phase = C64::from_polar(1.0, sd.eigenvalues[k]);
        for i in 0..m {
            left[(i, k)] *= phase;
        }
    }
    let w_top = w.adjoint().columns(0, r).into_owned();
    left * w_top
}

pub fn isometry_from_params(base: &CMatrix, params: &[f64], r: usize) -> CMatrix {
    let m = base.nrows();
    base * exp_first_columns(&generator(params, m, r), r)
}

/// Extends the orthonormal columns of `iso` (m x r) to an m x m unitary.
pub fn complete_to_unitary(iso: &CMatrix) -> CMatrix {
    let (m, r) = iso.shape();
    let mut cols: Vec<nalgebra::DVector<C64>> = (0..r).map(|j| iso.column(j).into_owned()).collect();
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = nalgebra::DVector::<C64>::zeros(m);
        v[e] = C64::new(1.0, 0.0);
        // Two passes of Gram-Schmidt for stability.
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    CMatrix::from_columns(&cols)
}

pub fn isometry_defect(v: &CMatrix) -> f64 {
    let r = v.ncols();
    (v.adjoint() * v - CMatrix::identity(r, r)).camax()
}
