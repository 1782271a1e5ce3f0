//! Eigendecomposition of the normalized Laplacian, the graph Fourier transform,
//! the compact low-pass filter and subspace incoherence.

use thiserror::Error;

use crate::graph::SymmetricMatrix;
use crate::linalg::{axpy, dot, max_abs};
use crate::rng::Rng;

mod jacobi;

pub use jacobi::MAX_SWEEPS;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bandwidth r = {r} out of range 1..={n}")]
    BandwidthOutOfRange { r: usize, n: usize },
    #[error("bandlimited signal is identically zero")]
    ZeroSignal,
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
///
/// Eigenvectors are stored vertex-major: `vectors[i * n + j]` is entry `i` of
/// eigenvector `j`, so the first `r` entries of row `i` are the compact filter
/// column of vertex `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    n: usize,
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

impl SpectralBasis {
    /// Assembles a basis from raw parts (e.g. a cache file); no checks beyond shapes.
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: Vec<f64>) -> Result<Self, SpectralError> {
        let n = eigenvalues.len();
        if vectors.len() != n * n {
            return Err(SpectralError::LengthMismatch {
                expected: n * n,
                got: vectors.len(),
            });
        }
        Ok(Self {
            n,
            eigenvalues,
            vectors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row-major vertex-by-eigenvector matrix.
    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    #[inline]
    pub fn entry(&self, vertex: usize, k: usize) -> f64 {
        self.vectors[vertex * self.n + k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.entry(i, k)).collect()
    }

    /// Same basis with eigenvector `k` negated.
    pub fn negated(&self, k: usize) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.vectors[i * self.n + k] = -out.vectors[i * self.n + k];
        }
        out
    }

    /// `max |X^T X - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n;
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            let row = &self.vectors[i * n..(i + 1) * n];
            for a in 0..n {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                axpy(ra, row, &mut gram[a * n..(a + 1) * n]);
            }
        }
        for a in 0..n {
            gram[a * n + a] -= 1.0;
        }
        max_abs(&gram)
    }

    /// `max |M - X diag(lambda) X^T|`.
    pub fn reconstruction_residual(&self, m: &SymmetricMatrix) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        let scaled: Vec<f64> = (0..n * n)
            .map(|idx| self.vectors[idx] * self.eigenvalues[idx % n])
            .collect();
        for i in 0..n {
            let si = &scaled[i * n..(i + 1) * n];
            for j in 0..n {
                let xj = &self.vectors[j * n..(j + 1) * n];
                worst = worst.max((m.get(i, j) - dot(si, xj)).abs());
            }
        }
        worst
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Converges when the off-diagonal Frobenius norm drops to `tol * ||m||_F`
/// (at most [`MAX_SWEEPS`] sweeps). Eigenpairs are sorted ascending (stable in
/// the solver's order) and every eigenvector is signed so that its entry of
/// largest magnitude is positive, the smallest index deciding ties.
pub fn eigendecompose(m: &SymmetricMatrix, tol: f64) -> Result<SpectralBasis, SpectralError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SpectralError::BadTolerance(tol));
    }
    let n = m.dim();
    let (diag, vt) = jacobi::cyclic_jacobi(m, tol)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(diag[src]);
        let v = &vt[src * n..(src + 1) * n];
        let mut lead = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[lead].abs() {
                lead = i;
            }
        }
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in v.iter().enumerate() {
            vectors[i * n + k] = sign * x;
        }
    }
    Ok(SpectralBasis {
        n,
        eigenvalues,
        vectors,
    })
}

fn check_len(expected: usize, got: usize) -> Result<(), SpectralError> {
    if expected != got {
        return Err(SpectralError::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Graph Fourier transform `X^T f`.
pub fn gft(basis: &SpectralBasis, f: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = basis.n;
    check_len(n, f.len())?;
    let mut out = vec![0.0; n];
    for (i, &fi) in f.iter().enumerate() {
        axpy(fi, &basis.vectors[i * n..(i + 1) * n], &mut out);
    }
    Ok(out)
}

/// Inverse transform `X fhat`.
pub fn igft(basis: &SpectralBasis, fhat: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = basis.n;
    check_len(n, fhat.len())?;
    Ok((0..n)
        .map(|i| dot(&basis.vectors[i * n..(i + 1) * n], fhat))
        .collect())
}

/// Column access to a low-pass filter `L = [l_1, ..., l_N]`, possibly in
/// compressed coordinates.
///
/// All the quantizers only ever take inner products between columns and
/// states living in the same coordinates, so a filter may expose its columns
/// in any orthonormal frame of its range.
pub trait FilterColumns {
    fn n_vertices(&self) -> usize;

    /// Length of each column (the state dimension).
    fn dim(&self) -> usize;

    /// Rank `r` of the projector.
    fn bandwidth(&self) -> usize;

    fn column(&self, vertex: usize) -> &[f64];

    fn column_sq_norm(&self, vertex: usize) -> f64;

    /// `sum_i l_i v_i`, the filtered signal in column coordinates.
    fn coefficients(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, self.column(i), &mut out);
            }
        }
        out
    }

    /// Vertex-domain signal with entries `<l_i, c>`.
    fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        (0..self.n_vertices())
            .map(|i| dot(self.column(i), c))
            .collect()
    }

    /// `L v` in the vertex domain.
    fn lowpass(&self, v: &[f64]) -> Vec<f64> {
        self.synthesize(&self.coefficients(v))
    }
}

/// Ideal low-pass projector `X_r X_r^T`, stored as the `r`-dimensional columns
/// `X_r^T e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedFilter {
    n: usize,
    r: usize,
    columns: Vec<f64>,
    sq_norms: Vec<f64>,
    ambiguous_cut: bool,
}

impl BandlimitedFilter {
    pub fn column_sq_norms(&self) -> &[f64] {
        &self.sq_norms
    }

    /// True when `lambda_r` and `lambda_{r+1}` coincide within tolerance, so the
    /// band subspace depends on the solver's choice inside the eigenspace.
    pub fn ambiguous_cut(&self) -> bool {
        self.ambiguous_cut
    }

    /// Same filter expressed in a basis with the listed components negated.
    pub fn negated(&self, components: &[usize]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for &c in components {
                out.columns[i * self.r + c] = -out.columns[i * self.r + c];
            }
        }
        out
    }
}

impl FilterColumns for BandlimitedFilter {
    fn n_vertices(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.r
    }

    fn bandwidth(&self) -> usize {
        self.r
    }

    #[inline]
    fn column(&self, vertex: usize) -> &[f64] {
        &self.columns[vertex * self.r..(vertex + 1) * self.r]
    }

    #[inline]
    fn column_sq_norm(&self, vertex: usize) -> f64 {
        self.sq_norms[vertex]
    }
}

/// Relative gap below which `lambda_r` and `lambda_{r+1}` count as equal.
pub const DEGENERATE_CUT_TOL: f64 = 1e-8;

pub fn bandlimited_filter(basis: &SpectralBasis, r: usize) -> Result<BandlimitedFilter, SpectralError> {
    let n = basis.n;
    if r == 0 || r > n {
        return Err(SpectralError::BandwidthOutOfRange { r, n });
    }
    let mut columns = Vec::with_capacity(n * r);
    for i in 0..n {
        columns.extend_from_slice(&basis.vectors[i * n..i * n + r]);
    }
    let sq_norms = columns.chunks_exact(r).map(|c| dot(c, c)).collect();
    let ambiguous_cut = r < n && {
        let (a, b) = (basis.eigenvalues[r - 1], basis.eigenvalues[r]);
        (b - a).abs() <= DEGENERATE_CUT_TOL * a.abs().max(b.abs()).max(1.0)
    };
    Ok(BandlimitedFilter {
        n,
        r,
        columns,
        sq_norms,
        ambiguous_cut,
    })
}

/// The same projector with full `N`-dimensional columns `P e_i`.
///
/// Quadratically larger than [`BandlimitedFilter`]; used to cross-check the
/// compact representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProjector {
    n: usize,
    r: usize,
    columns: Vec<f64>,
    sq_norms: Vec<f64>,
}

impl DenseProjector {
    pub fn from_filter(filter: &BandlimitedFilter) -> Self {
        let n = filter.n;
        let mut columns = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let p = dot(filter.column(i), filter.column(j));
                columns[i * n + j] = p;
                columns[j * n + i] = p;
            }
        }
        let sq_norms = columns.chunks_exact(n).map(|c| dot(c, c)).collect();
        Self {
            n,
            r: filter.r,
            columns,
            sq_norms,
        }
    }
}

impl FilterColumns for DenseProjector {
    fn n_vertices(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn bandwidth(&self) -> usize {
        self.r
    }

    fn column(&self, vertex: usize) -> &[f64] {
        &self.columns[vertex * self.n..(vertex + 1) * self.n]
    }

    fn column_sq_norm(&self, vertex: usize) -> f64 {
        self.sq_norms[vertex]
    }
}

/// `X_r (X_r^T v)`.
pub fn apply_lowpass<F: FilterColumns + ?Sized>(filter: &F, v: &[f64]) -> Result<Vec<f64>, SpectralError> {
    check_len(filter.n_vertices(), v.len())?;
    Ok(filter.lowpass(v))
}

/// Upper and lower incoherence of the band subspace.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Incoherence {
    pub mu: f64,
    pub nu: f64,
    pub argmax_vertex: usize,
    pub argmin_vertex: usize,
}

/// `mu = (N / r) max_i |l_i|^2`, `nu = (N / r) min_i |l_i|^2`; first index wins ties.
pub fn incoherence(filter: &BandlimitedFilter) -> Incoherence {
    let scale = filter.n as f64 / filter.r as f64;
    let (mut imax, mut imin) = (0, 0);
    for (i, &s) in filter.sq_norms.iter().enumerate() {
        if s > filter.sq_norms[imax] {
            imax = i;
        }
        if s < filter.sq_norms[imin] {
            imin = i;
        }
    }
    Incoherence {
        mu: scale * filter.sq_norms[imax],
        nu: scale * filter.sq_norms[imin],
        argmax_vertex: imax,
        argmin_vertex: imin,
    }
}

/// `f = X_r alpha / ||X_r alpha||_inf`.
pub fn synthesize_bandlimited(filter: &BandlimitedFilter, alpha: &[f64]) -> Result<Vec<f64>, SpectralError> {
    check_len(filter.r, alpha.len())?;
    let mut f = filter.synthesize(alpha);
    let (mut lead, mut peak) = (0, 0.0_f64);
    for (i, x) in f.iter().enumerate() {
        if x.abs() > peak {
            peak = x.abs();
            lead = i;
        }
    }
    if peak == 0.0 || !peak.is_finite() {
        return Err(SpectralError::ZeroSignal);
    }
    for x in &mut f {
        *x /= peak;
    }
    f[lead] = f[lead].signum();
    Ok(f)
}

/// Bandlimited signal with i.i.d. standard normal coefficients drawn from `seed`.
pub fn random_bandlimited(filter: &BandlimitedFilter, seed: u64) -> Result<Vec<f64>, SpectralError> {
    let mut rng = Rng::new(seed);
    let alpha: Vec<f64> = (0..filter.r).map(|_| rng.normal()).collect();
    synthesize_bandlimited(filter, &alpha)
}
