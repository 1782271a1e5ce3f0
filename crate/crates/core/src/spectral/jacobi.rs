//! Cyclic Jacobi eigenvalue iteration for dense symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair once using a round-robin
//! (tournament) ordering: the `n - 1` rounds of a sweep each hold `n / 2`
//! disjoint pairs, so their rotations commute and can be applied as one
//! block. That keeps every update a contiguous row operation:
//!
//! 1. rotate rows `p, q` of `A` for every pair (left multiplication `J^T A`),
//! 2. walk each row `k` of `A` and rotate its entries `(k, p), (k, q)` (right
//!    multiplication `A J`),
//! 3. rotate rows `p, q` of `V^T`.

use super::SpectralError;
use crate::graph::SymmetricMatrix;

pub const MAX_SWEEPS: usize = 100;

#[derive(Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
}

/// Rotation that annihilates `a_pq`: `J_pp = J_qq = c`, `J_pq = s`, `J_qp = -s`.
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

#[inline]
fn rotate_rows(buf: &mut [f64], n: usize, rot: Rotation) {
    let (lo, hi) = buf.split_at_mut(rot.q * n);
    let rp = &mut lo[rot.p * n..(rot.p + 1) * n];
    let rq = &mut hi[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = rot.c * a - rot.s * b;
        *y = rot.s * a + rot.c * b;
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Pairs of round `round` in the circle-method tournament on `m` (even) slots.
fn round_pairs(m: usize, round: usize, out: &mut Vec<(usize, usize)>) {
    out.clear();
    // slot 0 is fixed, slots 1..m rotate
    let slot = |i: usize| -> usize {
        if i == 0 {
            0
        } else {
            1 + (i - 1 + round) % (m - 1)
        }
    };
    for i in 0..m / 2 {
        let (a, b) = (slot(i), slot(m - 1 - i));
        out.push((a.min(b), a.max(b)));
    }
}

/// Returns the diagonal after convergence and `V^T` (row `k` is the `k`-th
/// eigenvector), both in the solver's internal order.
pub(super) fn cyclic_jacobi(m: &SymmetricMatrix, tol: f64) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let threshold = tol * m.frobenius_norm();
    // rotations below this contribute nothing measurable to the off-diagonal norm
    let skip_below = threshold / (n.max(1) as f64);
    let slots = n + n % 2;
    let mut pairs = Vec::with_capacity(slots / 2);
    let mut rots: Vec<Rotation> = Vec::with_capacity(slots / 2);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(SpectralError::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for round in 0..slots.saturating_sub(1) {
            round_pairs(slots, round, &mut pairs);
            rots.clear();
            for &(p, q) in &pairs {
                if q >= n {
                    continue;
                }
                let apq = a[p * n + q];
                if apq.abs() <= skip_below {
                    continue;
                }
                let (c, s) = rotation(a[p * n + p], a[q * n + q], apq);
                rots.push(Rotation { p, q, c, s });
            }
            if rots.is_empty() {
                continue;
            }
            for &rot in &rots {
                rotate_rows(&mut a, n, rot);
            }
            for row in a.chunks_exact_mut(n) {
                for rot in &rots {
                    let (x, y) = (row[rot.p], row[rot.q]);
                    row[rot.p] = rot.c * x - rot.s * y;
                    row[rot.q] = rot.s * x + rot.c * y;
                }
            }
            for &rot in &rots {
                rotate_rows(&mut vt, n, rot);
                a[rot.p * n + rot.q] = 0.0;
                a[rot.q * n + rot.p] = 0.0;
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    Ok((diag, vt))
}
