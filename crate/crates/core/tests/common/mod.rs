//! Reference constructions built directly from basis indices, kept apart
//! from the library's own code paths.

#![allow(dead_code)]

use dso_core::{ComplexMatrix, C64};

/// Row-major digits of `index` in base `d`, most significant first.
fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

/// `tr_slot` over a space of equal factors `d`, by explicit index loops.
pub fn partial_trace(m: &ComplexMatrix, d: usize, n: usize, slot: usize) -> ComplexMatrix {
    let out_dim = d.pow(n as u32 - 1);
    let factors = vec![d; n - 1];
    let mut entries = vec![C64::new(0.0, 0.0); out_dim * out_dim];
    for r in 0..out_dim {
        for c in 0..out_dim {
            let rd = digits(r, d, n - 1);
            let cd = digits(c, d, n - 1);
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                let mut full_r = rd.clone();
                full_r.insert(slot, k);
                let mut full_c = cd.clone();
                full_c.insert(slot, k);
                acc += m.get(undigits(&full_r, d), undigits(&full_c, d));
            }
            entries[r * out_dim + c] = acc;
        }
    }
    ComplexMatrix::from_row_major(&factors, &entries).unwrap()
}

/// Operator sending `e_{i_0} ⊗ … ⊗ e_{i_{n-1}}` to the tensor whose
/// position `k` holds `e_{i_{perm[k]}}`.
pub fn permutation_operator(d: usize, perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let dim = d.pow(n as u32);
    let factors = vec![d; n];
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let src = digits(col, d, n);
        let dst: Vec<usize> = perm.iter().map(|&p| src[p]).collect();
        entries[undigits(&dst, d) * dim + col] = C64::new(1.0, 0.0);
    }
    ComplexMatrix::from_row_major(&factors, &entries).unwrap()
}

pub fn flip(d: usize) -> ComplexMatrix {
    permutation_operator(d, &[1, 0])
}

fn parity(perm: &[usize]) -> i32 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(Q₊, Q₋)`: symmetrizer and antisymmetrizer on three copies of `C^d`.
pub fn triple_projectors(d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let perms = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let mut plus = ComplexMatrix::zeros(&[d, d, d]);
    let mut minus = ComplexMatrix::zeros(&[d, d, d]);
    for p in perms {
        let op = permutation_operator(d, &p);
        plus = &plus + &op.scale(1.0 / 6.0);
        minus = &minus + &op.scale(parity(&p) as f64 / 6.0);
    }
    (plus, minus)
}

/// `(P₊, P₋) = (I ± V)/2`.
pub fn pair_projectors(d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let id = ComplexMatrix::identity(&[d, d]);
    let v = flip(d);
    ((&id + &v).scale(0.5), (&id - &v).scale(0.5))
}

/// `((d − Φ) I + (dΦ − 1) V) / (d³ − d)`.
pub fn werner(d: usize, phi: f64) -> ComplexMatrix {
    let df = d as f64;
    let norm = df * df * df - df;
    &ComplexMatrix::identity(&[d, d]).scale((df - phi) / norm) + &flip(d).scale((df * phi - 1.0) / norm)
}

/// `Re tr[ρ (A ⊗ B)]` via an explicit Kronecker product.
pub fn expectation(rho: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d * d {
        for j in 0..d * d {
            let (i1, i2) = (i / d, i % d);
            let (j1, j2) = (j / d, j % d);
            acc += rho.get(i, j) * a.get(j1, i1) * b.get(j2, i2);
        }
    }
    acc.re
}

/// Trace norm of a Hermitian difference.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).hermitian_part().trace_norm().unwrap()
}
