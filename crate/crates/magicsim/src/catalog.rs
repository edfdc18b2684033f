//! Exhaustive catalogues of pure stabiliser states.
//!
//! Every n-qubit pure stabiliser state can be written as
//!
//! ```text
//! |𝒦,q,d⟩ = |𝒦|^{−1/2} Σ_{x∈𝒦} i^{dᵀx} (−1)^{xᵀQx + λᵀx} |x⟩
//! ```
//!
//! where 𝒦 ⊆ F₂ⁿ is an affine space, Q is strictly upper triangular and
//! λ, d are binary vectors.  We enumerate canonical representatives of the
//! (𝒦, phases) classes directly — one generator matrix in reduced column
//! echelon form per subspace, one zero-pivot shift per coset, and phase data
//! in *coordinate* space (d′ ∈ Z₄ᵏ per coordinate plus a strictly upper
//! triangular k×k bit matrix Q′) — which bijects onto the states without any
//! dedup hashing.  Counts per width: 6, 60, 1080, 36720, 2423520.
//!
//! Each state also yields a sparse LP column: its 2ⁿ non-zero Pauli
//! expectations (all ±1, ⟨1⟩ = +1) at base-4 Pauli indices.  Catalogues for
//! n ≤ 4 are materialised eagerly; n = 5 builds states and columns on demand
//! so the 2.4M-column LP can stream.

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::tableau::{Gate, StabilizerTableau};
use rayon::prelude::*;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

/// Widths whose full catalogue is kept in memory (states + columns).
const EAGER_LIMIT: usize = 4;

pub const CACHE_MAGIC: &[u8; 4] = b"STBC";
pub const CACHE_VERSION: u32 = 1;

/// Closed-form stabiliser state count 2ⁿ ∏_{j=1..n}(2ʲ+1).
pub fn stabilizer_state_count(n: usize) -> u64 {
    let mut c = 1u64 << n;
    for j in 1..=n {
        c *= (1u64 << j) + 1;
    }
    c
}

/// An affine subspace 𝒦 = {Gy ⊕ h : y ∈ F₂ᵏ} of F₂ⁿ in canonical form:
/// G in reduced column echelon form (pivot rows strictly increasing, each
/// pivot row zero in all other columns) and h the lexicographically smallest
/// coset element (zero at every pivot row).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineSpace {
    pub n: usize,
    pub k: usize,
    /// Column j as a bitmask over rows (bit i = row i).
    pub g_cols: Vec<u8>,
    pub h: u8,
    /// Pivot row of each column, strictly increasing.
    pub pivots: Vec<u8>,
}

impl AffineSpace {
    /// All 2ᵏ elements of the coset.
    pub fn elements(&self) -> Vec<u8> {
        (0..(1u16 << self.k))
            .map(|y| {
                let mut x = self.h;
                for (j, g) in self.g_cols.iter().enumerate() {
                    if (y >> j) & 1 == 1 {
                        x ^= g;
                    }
                }
                x
            })
            .collect()
    }
}

/// A phased affine form: the affine space plus coordinate-space phase data.
/// `d[j] ∈ Z₄` acts on coordinate y_j; `q` packs the strictly upper
/// triangular Q′ bits in lexicographic (i,j), i<j order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineStabForm {
    pub space: AffineSpace,
    pub d: Vec<u8>,
    pub q: u16,
}

impl AffineStabForm {
    pub fn q_bit(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < j && j < self.space.k);
        let pos = pair_index(self.space.k, i, j);
        (self.q >> pos) & 1 == 1
    }

    /// The (Q, λ, d) data of the n-space normal form
    /// i^{dᵀx} (−1)^{xᵀQx + λᵀx}: Q rows as bitmasks, λ and d as bitmasks.
    /// Only pivot rows carry non-zero entries; d′_j = d_j + 2λ_j at pivot j.
    pub fn phase_params(&self) -> (Vec<u8>, u8, u8) {
        let k = self.space.k;
        let mut q_rows = vec![0u8; self.space.n];
        let mut lambda = 0u8;
        let mut d = 0u8;
        for j in 0..k {
            let r = self.space.pivots[j] as usize;
            if self.d[j] & 1 == 1 {
                d |= 1 << r;
            }
            if self.d[j] & 2 == 2 {
                lambda |= 1 << r;
            }
            for i in 0..j {
                if self.q_bit(i, j) {
                    q_rows[self.space.pivots[i] as usize] |= 1 << r;
                }
            }
        }
        (q_rows, lambda, d)
    }

    /// Amplitude (numerator phase only) at coset element x = Gy ⊕ h as a
    /// power of i, straight from the normal form — used as the oracle in
    /// tests and independent of the circuit construction.
    pub fn phase_power(&self, x: u8) -> u8 {
        let (q_rows, lambda, d) = self.phase_params();
        let mut pow = (x & d).count_ones() as u8;
        pow += 2 * (x & lambda).count_ones() as u8;
        for (i, row) in q_rows.iter().enumerate() {
            if (x >> i) & 1 == 1 {
                pow += 2 * (x & row).count_ones() as u8;
            }
        }
        pow & 3
    }
}

fn pair_index(k: usize, i: usize, j: usize) -> usize {
    // position of (i,j), i<j, in lexicographic order over k elements
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

/// All affine subspaces of F₂ⁿ in canonical form, ordered by dimension then
/// lexicographically.
pub fn enumerate_affine(n: usize) -> Result<Vec<AffineSpace>> {
    if n == 0 || n > 5 {
        return Err(Error::Limit(format!("affine enumeration supports n = 1..5, got {n}")));
    }
    let mut out = Vec::new();
    for k in 0..=n {
        for space in subspaces_of_dim(n, k) {
            // One canonical shift per coset: zero at every pivot row.
            let pivot_mask: u8 = space.pivots.iter().fold(0, |m, &r| m | (1 << r));
            for h in 0u8..(1 << n) {
                if h & pivot_mask == 0 {
                    let mut s = space.clone();
                    s.h = h;
                    out.push(s);
                }
            }
        }
    }
    Ok(out)
}

/// Linear subspaces of dimension k as reduced-column-echelon generator
/// matrices (h = 0).
fn subspaces_of_dim(n: usize, k: usize) -> Vec<AffineSpace> {
    let mut out = Vec::new();
    let mut pivots = Vec::new();
    choose_pivots(n, k, 0, &mut pivots, &mut out);
    out
}

fn choose_pivots(n: usize, k: usize, start: usize, pivots: &mut Vec<u8>, out: &mut Vec<AffineSpace>) {
    if pivots.len() == k {
        // Free entries of column j: rows below its pivot that are not pivots.
        let pivot_mask: u8 = pivots.iter().fold(0, |m, &r| m | (1 << r));
        let free_masks: Vec<u8> = pivots
            .iter()
            .map(|&r| {
                let below: u8 = if r as usize + 1 >= n {
                    0
                } else {
                    (((1u16 << n) - 1) as u8) & !((1u8 << (r + 1)) - 1)
                };
                below & !pivot_mask
            })
            .collect();
        let free_bits: Vec<Vec<u8>> = free_masks
            .iter()
            .map(|m| (0..n as u8).filter(|b| (m >> b) & 1 == 1).collect())
            .collect();
        let total: usize = free_bits.iter().map(|b| 1usize << b.len()).product();
        for combo in 0..total {
            let mut c = combo;
            let mut g_cols = Vec::with_capacity(k);
            for (j, bits) in free_bits.iter().enumerate() {
                let mut col = 1u8 << pivots[j];
                let pick = c & ((1 << bits.len()) - 1);
                c >>= bits.len();
                for (bi, &b) in bits.iter().enumerate() {
                    if (pick >> bi) & 1 == 1 {
                        col |= 1 << b;
                    }
                }
                g_cols.push(col);
            }
            out.push(AffineSpace { n, k, g_cols, h: 0, pivots: pivots.clone() });
        }
        return;
    }
    for r in start..n {
        pivots.push(r as u8);
        choose_pivots(n, k, r + 1, pivots, out);
        pivots.pop();
    }
}

/// All phased affine forms, i.e. all pure stabiliser states, for width n.
pub fn enumerate_forms(n: usize) -> Result<Vec<AffineStabForm>> {
    let spaces = enumerate_affine(n)?;
    let mut out = Vec::with_capacity(stabilizer_state_count(n) as usize);
    for space in spaces {
        let k = space.k;
        let qn = k * k.saturating_sub(1) / 2;
        for q in 0..(1u32 << qn) {
            for dcode in 0..(1u64 << (2 * k)) {
                let d: Vec<u8> = (0..k).map(|j| ((dcode >> (2 * j)) & 3) as u8).collect();
                out.push(AffineStabForm { space: space.clone(), d, q: q as u16 });
            }
        }
    }
    Ok(out)
}

/// Circuit-built tableau of a phased affine form.
pub fn form_state(form: &AffineStabForm) -> StabilizerTableau {
    let n = form.space.n;
    let k = form.space.k;
    let mut gates: Vec<Gate> = Vec::new();
    for j in 0..k {
        gates.push(Gate::H(form.space.pivots[j] as usize));
    }
    for (j, col) in form.space.g_cols.iter().enumerate() {
        let r = form.space.pivots[j] as usize;
        for i in 0..n {
            if i != r && (col >> i) & 1 == 1 {
                gates.push(Gate::Cnot(r, i));
            }
        }
    }
    for i in 0..n {
        if (form.space.h >> i) & 1 == 1 {
            gates.push(Gate::X(i));
        }
    }
    for j in 0..k {
        let r = form.space.pivots[j] as usize;
        for _ in 0..(form.d[j] & 3) {
            gates.push(Gate::S(r));
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if form.q_bit(i, j) {
                gates.push(Gate::Cz(
                    form.space.pivots[i] as usize,
                    form.space.pivots[j] as usize,
                ));
            }
        }
    }
    StabilizerTableau::zero_state(n).apply_all(&gates)
}

/// Uniform superposition |𝒦⟩ over a coset (all phases trivial).
pub fn affine_state(space: &AffineSpace) -> StabilizerTableau {
    form_state(&AffineStabForm { space: space.clone(), d: vec![0; space.k], q: 0 })
}

/// Sparse LP column of a state: its 2ⁿ non-zero Pauli expectations, sorted
/// by base-4 Pauli index.  Entries are ±1; index 0 (identity) carries +1.
pub type SparseColumn = Vec<(u32, i8)>;

pub fn state_column(state: &StabilizerTableau) -> SparseColumn {
    let mut col: SparseColumn = state
        .group_elements()
        .iter()
        .map(|p| (p.index() as u32, p.sign()))
        .collect();
    col.sort_unstable_by_key(|&(idx, _)| idx);
    col
}

pub struct StabilizerCatalog {
    pub n: usize,
    pub forms: Vec<AffineStabForm>,
    /// Materialised only for n ≤ 4.
    states: Vec<StabilizerTableau>,
    /// All columns flat-packed, 2ⁿ entries per state, each entry
    /// (pauli_index << 1) | sign_bit with sign_bit = 1 for −1.  Built on
    /// first use; ~300 MB at n = 5, negligible below.
    packed: std::sync::OnceLock<Vec<u32>>,
}

impl StabilizerCatalog {
    pub fn num_states(&self) -> usize {
        self.forms.len()
    }

    pub fn state(&self, i: usize) -> StabilizerTableau {
        if self.states.is_empty() {
            form_state(&self.forms[i])
        } else {
            self.states[i].clone()
        }
    }

    /// Flat-packed Pauli columns of every state (see `packed` field docs).
    ///
    /// Built with plain scoped threads rather than the global rayon pool:
    /// callers often sit inside a rayon task themselves, and a pool-sharing
    /// `get_or_init` initialiser can steal one of those tasks and re-enter
    /// the lock on its own thread — a deadlock.
    pub fn packed_columns(&self) -> &[u32] {
        self.packed.get_or_init(|| {
            let stride = 1usize << self.n;
            let mut flat = vec![0u32; self.forms.len() * stride];
            let workers = std::thread::available_parallelism().map_or(1, |p| p.get());
            let per = self.forms.len().div_ceil(workers).max(1);
            std::thread::scope(|s| {
                for (chunk, forms) in flat.chunks_mut(per * stride).zip(self.forms.chunks(per)) {
                    s.spawn(move || {
                        for (slot_row, form) in chunk.chunks_mut(stride).zip(forms) {
                            let col = state_column(&form_state(form));
                            for (slot, (idx, sign)) in slot_row.iter_mut().zip(col) {
                                *slot = (idx << 1) | u32::from(sign < 0);
                            }
                        }
                    });
                }
            });
            flat
        })
    }

    pub fn column(&self, i: usize) -> SparseColumn {
        let stride = 1usize << self.n;
        self.packed_columns()[i * stride..(i + 1) * stride]
            .iter()
            .map(|&e| (e >> 1, if e & 1 == 1 { -1 } else { 1 }))
            .collect()
    }

    pub fn is_eager(&self) -> bool {
        !self.states.is_empty()
    }

    fn from_forms(n: usize, forms: Vec<AffineStabForm>) -> StabilizerCatalog {
        let states = if n <= EAGER_LIMIT {
            forms.par_iter().map(form_state).collect()
        } else {
            Vec::new()
        };
        StabilizerCatalog { n, forms, states, packed: std::sync::OnceLock::new() }
    }
}

/// Build the full catalogue for width n (1..5).
pub fn enumerate_states(n: usize) -> Result<StabilizerCatalog> {
    if n == 0 || n > 5 {
        return Err(Error::Limit(format!("state catalogue supports n = 1..5, got {n}")));
    }
    let forms = enumerate_forms(n)?;
    debug_assert_eq!(forms.len() as u64, stabilizer_state_count(n));
    Ok(StabilizerCatalog::from_forms(n, forms))
}

/// Structural test for M_{t,n} = diag(e^{iθ}, 1, …, 1): diagonal unitary with
/// a phase only on |0…0⟩.
fn is_multicontrol_like(ch: &KrausChannel) -> bool {
    if !ch.diagonal || ch.kraus.len() != 1 {
        return false;
    }
    let k = &ch.kraus[0];
    let dim = 1usize << ch.n;
    ((k[[0, 0]].norm() - 1.0).abs() < 1e-12)
        && (1..dim).all(|i| (k[[i, i]].re - 1.0).abs() < 1e-12 && k[[i, i]].im.abs() < 1e-12)
}

/// The input states a capacity optimisation has to scan:
/// * multicontrol-phase channels need only one representative linear
///   subspace per dimension, 𝒦 = span{e₁,…,e_k} for k = 1..n;
/// * other diagonal channels need one |𝒦⟩ per non-trivial affine space;
/// * general channels need every pure stabiliser state on 2n qubits
///   (input entangled with a reference of equal size).
pub fn capacity_input_set(ch: &KrausChannel) -> Result<Vec<StabilizerTableau>> {
    if ch.diagonal {
        if ch.n > 5 {
            return Err(Error::Limit("diagonal capacity supports n ≤ 5".into()));
        }
        if is_multicontrol_like(ch) {
            let n = ch.n;
            return Ok((1..=n)
                .map(|k| {
                    let pivots: Vec<u8> = (0..k as u8).collect();
                    let g_cols: Vec<u8> = (0..k).map(|j| 1u8 << j).collect();
                    affine_state(&AffineSpace { n, k, g_cols, h: 0, pivots })
                })
                .collect());
        }
        let spaces = enumerate_affine(ch.n)?;
        return Ok(spaces
            .into_iter()
            .filter(|s| s.k >= 1)
            .map(|s| affine_state(&s))
            .collect());
    }
    if ch.n > 2 {
        return Err(Error::Limit("general capacity supports n ≤ 2 (needs the 2n-qubit catalogue)".into()));
    }
    let cat = enumerate_states(2 * ch.n)?;
    Ok((0..cat.num_states()).map(|i| cat.state(i)).collect())
}

// ---------------------------------------------------------------------------
// On-disk cache
// ---------------------------------------------------------------------------

fn fnv1a64(data: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn encode_forms(forms: &[AffineStabForm]) -> Vec<u8> {
    let mut body = Vec::new();
    for f in forms {
        body.push(f.space.k as u8);
        body.push(f.space.h);
        body.extend_from_slice(&f.space.pivots);
        body.extend_from_slice(&f.space.g_cols);
        body.extend_from_slice(&f.d);
        body.extend_from_slice(&f.q.to_le_bytes());
    }
    body
}

fn decode_forms(n: usize, count: u64, body: &[u8]) -> Result<Vec<AffineStabForm>> {
    let corrupt = || Error::Cache("catalogue cache truncated or corrupt".into());
    let mut forms = Vec::with_capacity(count as usize);
    let mut at = 0usize;
    let mut take = |len: usize| -> Result<&[u8]> {
        let s = body.get(at..at + len).ok_or_else(corrupt)?;
        at += len;
        Ok(s)
    };
    for _ in 0..count {
        let k = take(1)?[0] as usize;
        if k > n {
            return Err(corrupt());
        }
        let h = take(1)?[0];
        let pivots = take(k)?.to_vec();
        let g_cols = take(k)?.to_vec();
        let d = take(k)?.to_vec();
        let qb = take(2)?;
        let q = u16::from_le_bytes([qb[0], qb[1]]);
        forms.push(AffineStabForm { space: AffineSpace { n, k, g_cols, h, pivots }, d, q });
    }
    if at != body.len() {
        return Err(corrupt());
    }
    Ok(forms)
}

pub fn cache_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("stab_n{n}.stbc"))
}

/// Write the width-n catalogue to `dir` (little-endian: magic "STBC",
/// version u32, n u32, count u64, checksum u64, then the form records).
pub fn cache_write(dir: &Path, n: usize) -> Result<PathBuf> {
    let forms = enumerate_forms(n)?;
    let body = encode_forms(&forms);
    let path = cache_path(dir, n);
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let mut file = std::fs::File::create(&path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut header = Vec::with_capacity(28);
    header.extend_from_slice(CACHE_MAGIC);
    header.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    header.extend_from_slice(&(n as u32).to_le_bytes());
    header.extend_from_slice(&(forms.len() as u64).to_le_bytes());
    header.extend_from_slice(&fnv1a64(&body).to_le_bytes());
    file.write_all(&header)
        .and_then(|_| file.write_all(&body))
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(path)
}

pub fn cache_read(dir: &Path, n: usize) -> Result<Vec<AffineStabForm>> {
    let path = cache_path(dir, n);
    let mut data = Vec::new();
    std::fs::File::open(&path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    if data.len() < 28 || &data[0..4] != CACHE_MAGIC {
        return Err(Error::Cache("not a catalogue cache file".into()));
    }
    let version = u32::from_le_bytes(data[4..8].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!(
            "cache version {version} (expected {CACHE_VERSION})"
        )));
    }
    let file_n = u32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
    if file_n != n {
        return Err(Error::Cache(format!("cache holds n={file_n}, requested n={n}")));
    }
    let count = u64::from_le_bytes(data[12..20].try_into().unwrap());
    let checksum = u64::from_le_bytes(data[20..28].try_into().unwrap());
    let body = &data[28..];
    if fnv1a64(body) != checksum {
        return Err(Error::Cache("cache checksum mismatch".into()));
    }
    if count != stabilizer_state_count(n) {
        return Err(Error::Cache(format!("cache holds {count} forms (expected {})", stabilizer_state_count(n))));
    }
    decode_forms(n, count, body)
}

/// Read the cache if present and valid, otherwise enumerate from scratch
/// (and write the cache when a directory is given).
pub fn load_or_build(dir: Option<&Path>, n: usize) -> Result<StabilizerCatalog> {
    if let Some(d) = dir {
        match cache_read(d, n) {
            Ok(forms) => return Ok(StabilizerCatalog::from_forms(n, forms)),
            Err(Error::Io(_)) => {
                // no cache yet — build and persist
                cache_write(d, n)?;
                let forms = cache_read(d, n)?;
                return Ok(StabilizerCatalog::from_forms(n, forms));
            }
            Err(e) => return Err(e),
        }
    }
    enumerate_states(n)
}
