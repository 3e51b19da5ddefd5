use std::borrow::Cow;

use super::{dot, norm, Matrix, NumericsError, UnitVector};

/// Convergence threshold on `‖v_{k+1} − v_k‖` between power-iteration steps.
pub const POWER_ITERATION_TOLERANCE: f64 = 1e-12;
pub const MAX_POWER_ITERATIONS: usize = 10_000;

// Number of times the Gram matrix is squared before iterating. Each squaring
// squares the ratio between the second and first eigenvalue, so 4 squarings
// iterate with K^16.
const SQUARINGS: usize = 4;

// A start vector whose image is below this fraction of ‖A‖_F counts as
// orthogonal to the dominant eigenspace.
const DEGENERATE_START: f64 = 1e-12;

/// First principal direction of the rows of `m`: the unit vector maximizing
/// the sum of squared row projections (top right singular vector).
///
/// With `center` set, column means are subtracted first. Computed by power
/// iteration on the Gram matrix starting from `(1, …, 1)/√d`, so the result is
/// reproducible. The sign is canonicalized so the largest-magnitude component
/// is positive; ties go to the lowest index.
pub fn first_principal_component(m: &Matrix, center: bool) -> Result<UnitVector, NumericsError> {
    let m = if center {
        Cow::Owned(m.centered())
    } else {
        Cow::Borrowed(m)
    };
    let (n, d) = (m.n_rows(), m.n_cols());

    // Work in whichever Gram matrix is smaller: MᵀM (d×d) or MMᵀ (n×n).
    // Both share the non-zero spectrum; a top eigenvector u of MMᵀ maps to
    // the top right singular vector through Mᵀu.
    let dual = n < d;
    let mut gram = if dual { row_gram(&m) } else { column_gram(&m) };
    let size = n.min(d);

    let scale = frobenius(&gram);
    if scale == 0.0 || !scale.is_finite() {
        return Err(NumericsError::ZeroMatrix);
    }
    gram.iter_mut().for_each(|x| *x /= scale);

    let mut accel = gram;
    for _ in 0..SQUARINGS {
        accel = square(&accel, size);
        let f = frobenius(&accel);
        if f == 0.0 {
            return Err(NumericsError::ZeroMatrix);
        }
        accel.iter_mut().for_each(|x| *x /= f);
    }

    let u = power_iterate(&accel, size)?;
    let mut v = if dual {
        let mut v = vec![0.0; d];
        for (row, ui) in m.rows().zip(&u) {
            for (vj, x) in v.iter_mut().zip(row) {
                *vj += ui * x;
            }
        }
        v
    } else {
        u
    };
    canonicalize_sign(&mut v);
    UnitVector::normalize(v)
}

fn power_iterate(a: &[f64], size: usize) -> Result<Vec<f64>, NumericsError> {
    let a_norm = frobenius(a);
    let starts =
        std::iter::once(vec![1.0 / (size as f64).sqrt(); size]).chain((0..size).map(|k| {
            let mut e = vec![0.0; size];
            e[k] = 1.0;
            e
        }));

    for start in starts {
        let image = matvec(a, &start);
        if norm(&image) <= DEGENERATE_START * a_norm {
            continue;
        }
        let mut v = start;
        for _ in 0..MAX_POWER_ITERATIONS {
            let mut next = matvec(a, &v);
            let len = norm(&next);
            if len == 0.0 {
                break;
            }
            next.iter_mut().for_each(|x| *x /= len);
            let change = next
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            v = next;
            if change < POWER_ITERATION_TOLERANCE {
                return Ok(v);
            }
        }
        return Err(NumericsError::NoConvergence {
            iterations: MAX_POWER_ITERATIONS,
        });
    }
    Err(NumericsError::ZeroMatrix)
}

fn canonicalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn column_gram(m: &Matrix) -> Vec<f64> {
    let d = m.n_cols();
    let mut g = vec![0.0; d * d];
    for row in m.rows() {
        for i in 0..d {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..d {
                g[i * d + j] += ri * row[j];
            }
        }
    }
    mirror_upper(&mut g, d);
    g
}

fn row_gram(m: &Matrix) -> Vec<f64> {
    let n = m.n_rows();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            g[i * n + j] = dot(m.row(i), m.row(j));
        }
    }
    mirror_upper(&mut g, n);
    g
}

fn mirror_upper(g: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i];
        }
    }
}

fn square(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row_k = &a[k * n..(k + 1) * n];
            for (o, x) in out[i * n..(i + 1) * n].iter_mut().zip(row_k) {
                *o += aik * x;
            }
        }
    }
    // keep exact symmetry
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (out[i * n + j] + out[j * n + i]);
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

fn matvec(a: &[f64], v: &[f64]) -> Vec<f64> {
    a.chunks_exact(v.len()).map(|row| dot(row, v)).collect()
}

fn frobenius(a: &[f64]) -> f64 {
    norm(a)
}
