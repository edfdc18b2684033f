//! Magic monotones for multi-qubit quantum channels, and quasiprobability
//! Monte Carlo simulators built on top of them.
//!
//! The crate is organised in layers:
//!
//! * [`pauli`] — phased Pauli strings over n qubits with exact phase algebra.
//! * [`tableau`] — stabiliser tableaux (Gottesman–Knill with destabilisers),
//!   Pauli measurement with exact dyadic probabilities, Bell-basis
//!   post-selection, and bipartite disentangling normal form.
//! * [`linalg`] — small dense complex-matrix helpers (Kronecker products,
//!   partial traces, Hermitian eigensolver) used by the oracles and the
//!   channel layer.
//! * [`channel`] — Kraus channels, Choi–Jamiołkowski states, composition and
//!   tensoring, plus a zoo of named channels.
//! * [`catalog`] — exhaustive enumeration of pure stabiliser states via
//!   phased affine forms over GF(2), with a binary on-disk cache.
//! * [`lp`] — a self-contained revised-simplex linear-programming solver with
//!   Bland anti-cycling and streamed-column (column-generation) support.
//! * [`monotones`] — robustness of magic, channel robustness, magic
//!   capacity, and the Clifford+reset robustness, with dual witnesses.
//! * [`sim`] — static and dynamic quasiprobability Monte Carlo simulators
//!   and a dense reference oracle.

pub mod catalog;
pub mod channel;
pub mod error;
pub mod fattal;
pub mod linalg;
pub mod lp;
pub mod monotones;
pub mod pauli;
pub mod sim;
pub mod tableau;

pub use error::{Error, Result};
