//! Plain-text edge lists and the binary eigendecomposition cache.
//!
//! # Edge lists
//!
//! ```text
//! # comment lines and blank lines are ignored
//! 4            <- vertex count
//! 0 1 1.0      <- u v [weight], weight defaults to 1
//! 1 2 0.5
//! ```
//!
//! Fields may be separated by whitespace or commas.
//!
//! # Eigen cache
//!
//! One file per Laplacian, named after the SHA-256 of its dimension and
//! entries. Layout (little endian): magic `GNSQEIG1`, `N: u64`, `r: u64`
//! (always `N`), `N` eigenvalues, then the `N x N` eigenvector matrix in
//! vertex-major order.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Graph, GraphError, SymmetricMatrix};
use crate::spectral::{eigendecompose, SpectralBasis, SpectralError};

const MAGIC: &[u8; 8] = b"GNSQEIG1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn file_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads an edge list; see the module docs for the format.
pub fn load_edge_list(path: &Path) -> Result<Graph, IoError> {
    let file = fs::File::open(path).map_err(file_err(path))?;
    let parse_err = |line: usize, msg: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(file_err(path))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("`{s}` is not a vertex index")))
        };
        match n {
            None => {
                if fields.len() != 1 {
                    return Err(parse_err(lineno, "expected the vertex count on its own line".into()));
                }
                n = Some(index(fields[0])?);
            }
            Some(_) => {
                if !(2..=3).contains(&fields.len()) {
                    return Err(parse_err(lineno, format!("expected `u v [weight]`, got {} fields", fields.len())));
                }
                let w = match fields.get(2) {
                    Some(s) => s
                        .parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("`{s}` is not a number")))?,
                    None => 1.0,
                };
                edges.push((index(fields[0])?, index(fields[1])?, w));
            }
        }
    }
    let n = n.ok_or_else(|| parse_err(0, "missing vertex count".into()))?;
    Graph::from_edges(n, &edges).map_err(|source| IoError::Graph {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `graph` as an edge list that [`load_edge_list`] reads back exactly.
pub fn save_edge_list(graph: &Graph, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&format!("{}\n", graph.n_vertices()));
    for (u, v, w) in graph.edges() {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    fs::write(path, out).map_err(file_err(path))
}

/// Hex SHA-256 of a symmetric matrix's dimension and entries.
pub fn content_hash(m: &SymmetricMatrix) -> String {
    let mut h = Sha256::new();
    h.update((m.dim() as u64).to_le_bytes());
    for x in m.as_slice() {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn encode(basis: &SpectralBasis) -> Vec<u8> {
    let n = basis.n();
    let mut buf = Vec::with_capacity(24 + 8 * n * (n + 1));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for x in basis.eigenvalues().iter().chain(basis.vectors()) {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf
}

fn decode(bytes: &[u8], expected_n: usize) -> Option<SpectralBasis> {
    let word = |i: usize| -> Option<[u8; 8]> { bytes.get(i..i + 8)?.try_into().ok() };
    if bytes.get(..8)? != MAGIC {
        return None;
    }
    let n = u64::from_le_bytes(word(8)?) as usize;
    let r = u64::from_le_bytes(word(16)?) as usize;
    if n != expected_n || r != n || bytes.len() != 24 + 8 * n * (n + 1) {
        return None;
    }
    let floats: Vec<f64> = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let (vals, vecs) = floats.split_at(n);
    SpectralBasis::from_parts(vals.to_vec(), vecs.to_vec()).ok()
}

/// Directory of cached eigendecompositions keyed by [`content_hash`].
#[derive(Debug, Clone)]
pub struct EigenCache {
    dir: PathBuf,
}

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, laplacian: &SymmetricMatrix) -> PathBuf {
        self.dir.join(format!("{}.eig", content_hash(laplacian)))
    }

    /// Cached basis for `laplacian`, if a readable and well-formed entry exists.
    pub fn load(&self, laplacian: &SymmetricMatrix) -> Option<SpectralBasis> {
        let bytes = fs::read(self.path_for(laplacian)).ok()?;
        decode(&bytes, laplacian.dim())
    }

    /// Writes through a temporary file and renames it into place.
    pub fn store(&self, laplacian: &SymmetricMatrix, basis: &SpectralBasis) -> Result<PathBuf, IoError> {
        fs::create_dir_all(&self.dir).map_err(file_err(&self.dir))?;
        let path = self.path_for(laplacian);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut file = fs::File::create(&tmp).map_err(file_err(&tmp))?;
        file.write_all(&encode(basis)).map_err(file_err(&tmp))?;
        file.sync_all().map_err(file_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(file_err(&path))?;
        Ok(path)
    }

    /// Loads the cached basis or computes and stores it. The flag reports a cache hit.
    pub fn get_or_compute(&self, laplacian: &SymmetricMatrix, tol: f64) -> Result<(SpectralBasis, bool), IoError> {
        if let Some(b) = self.load(laplacian) {
            return Ok((b, true));
        }
        let basis = eigendecompose(laplacian, tol)?;
        if let Err(e) = self.store(laplacian, &basis) {
            log::warn!("could not write eigen cache: {e}");
        }
        Ok((basis, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_grid};

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        let g = Graph::from_edges(5, &[(0, 1, 0.1), (1, 4, 1.0 / 3.0), (2, 3, 2.5), (3, 4, 1e-7)]).unwrap();
        save_edge_list(&g, &p).unwrap();
        assert_eq!(load_edge_list(&p).unwrap(), g);
    }

    #[test]
    fn edge_list_syntax() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        fs::write(&p, "# triangle\n\n3\n0,1\n1 2 2.0  # heavy\n2\t0\n").unwrap();
        let g = load_edge_list(&p).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.weight(1, 2), 2.0);
        assert_eq!(g.weight(0, 2), 1.0);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        fs::write(&p, "3\n0 1\n1 x\n").unwrap();
        let e = load_edge_list(&p).unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 3, .. }), "{e}");
        assert!(e.to_string().contains(":3:"));
        fs::write(&p, "3\n0 1 1 1\n").unwrap();
        assert!(matches!(load_edge_list(&p), Err(IoError::Parse { line: 2, .. })));
        fs::write(&p, "3\n0 0\n").unwrap();
        assert!(matches!(load_edge_list(&p), Err(IoError::Graph { .. })));
        fs::write(&p, "# nothing\n").unwrap();
        assert!(matches!(load_edge_list(&p), Err(IoError::Parse { .. })));
        assert!(matches!(load_edge_list(&dir.path().join("missing")), Err(IoError::File { .. })));
    }

    #[test]
    fn hash_distinguishes_graphs() {
        let a = build_cycle(6).unwrap().normalized_laplacian().unwrap();
        let b = build_grid(2, 3).unwrap().normalized_laplacian().unwrap();
        assert_eq!(content_hash(&a), content_hash(&a.clone()));
        assert_ne!(content_hash(&a), content_hash(&b));
        assert_eq!(content_hash(&a).len(), 64);
    }

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path().join("eig"));
        let lap = build_grid(3, 4).unwrap().normalized_laplacian().unwrap();
        let (b1, hit1) = cache.get_or_compute(&lap, 1e-12).unwrap();
        let (b2, hit2) = cache.get_or_compute(&lap, 1e-12).unwrap();
        assert!(!hit1 && hit2);
        assert_eq!(b1, b2);
        let bytes = fs::read(cache.path_for(&lap)).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(bytes.len(), 24 + 8 * 12 * 13);
    }

    #[test]
    fn corrupt_cache_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let lap = build_cycle(5).unwrap().normalized_laplacian().unwrap();
        fs::write(cache.path_for(&lap), b"GNSQEIG1 truncated").unwrap();
        assert!(cache.load(&lap).is_none());
        let (_, hit) = cache.get_or_compute(&lap, 1e-12).unwrap();
        assert!(!hit);
        assert!(cache.load(&lap).is_some());
    }
}
