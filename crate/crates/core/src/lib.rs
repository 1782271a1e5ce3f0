//! Noise-shaping quantization of bandlimited graph signals.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds weighted undirected graphs (grids, cycles, k-NN graphs of
//!   point clouds) and their normalized Laplacians.
//! * [`spectral`] diagonalises the Laplacian with a cyclic Jacobi solver and
//!   exposes the graph Fourier transform, the compact low-pass filter and the
//!   subspace incoherence.
//! * [`quant`] holds the alphabets and the memoryless scalar quantizer.
//! * [`shape`] implements the noise-shaping quantizers: greedy refinement over
//!   a vertex permutation, its two initializations, and random sampling with
//!   replacement.
//! * [`analysis`] computes error metrics, theoretical bounds, a brute-force
//!   oracle for tiny instances and the bandwidth / iteration sweeps.
//!
//! ```
//! use gnsq::graph::build_cycle;
//! use gnsq::quant::Alphabet;
//! use gnsq::shape::quantize_sssr;
//! use gnsq::spectral::{bandlimited_filter, eigendecompose, random_bandlimited};
//!
//! let g = build_cycle(40).unwrap();
//! let lap = g.normalized_laplacian().unwrap();
//! let basis = eigendecompose(&lap, 1e-12).unwrap();
//! let filter = bandlimited_filter(&basis, 5).unwrap();
//! let f = random_bandlimited(&filter, 7).unwrap();
//! let alphabet: Alphabet = "mt:0.5:3".parse().unwrap();
//! let run = quantize_sssr(&filter, &f, &alphabet, 400, 7).unwrap();
//! assert_eq!(run.q.len(), 40);
//! ```

pub mod analysis;
pub mod graph;
pub mod io;
pub mod quant;
pub mod rng;
pub mod shape;
pub mod spectral;

pub(crate) mod linalg;
