//! Bipartite normal form of a pure stabiliser state.
//!
//! Any pure stabiliser state on a bipartition A|B is local-Clifford
//! equivalent to p Bell pairs across the cut tensored with unentangled
//! remainders.  This module computes that normal form constructively: it
//! records a Clifford circuit on the A side and one on the B side which
//! together map the input state to
//!
//! ```text
//!   ⊗_{i<p} |Φ+⟩_{qa_i, qb_i}  ⊗  |0…0⟩ (all remaining qubits)
//! ```
//!
//! The construction scans the stabiliser generators for a pair whose
//! A-restrictions anticommute, canonicalises that pair to (X_{qa}X_{qb},
//! Z_{qa}Z_{qb}) with side-local gates, clears the consumed qubits from the
//! remaining rows by group multiplications, and repeats.  What is left
//! generates a product group G_A × G_B, which each side reduces to +Z's.
//! Tie-breaking is by lowest qubit index throughout so normal forms are
//! deterministic.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::tableau::{synthesize_to_z_basis, Gate, StabilizerTableau};

#[derive(Clone, Debug)]
pub struct BipartiteNormalForm {
    pub n: usize,
    /// A-side qubits of the declared cut (ascending).
    pub side_a: Vec<usize>,
    /// Local Clifford recorded on the A side, in application order.
    pub gates_a: Vec<Gate>,
    /// Local Clifford recorded on the B side.
    pub gates_b: Vec<Gate>,
    /// Bell pairs (qa, qb), each stabilised by +XX and +ZZ after the gates.
    pub pairs: Vec<(usize, usize)>,
    /// A-side qubits left in |0⟩.
    pub residual_a: Vec<usize>,
    /// B-side qubits left in |0⟩.
    pub residual_b: Vec<usize>,
}

impl BipartiteNormalForm {
    pub fn bell_pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Apply both recorded local Cliffords (they act on disjoint qubit sets,
    /// so the order is immaterial).
    pub fn apply(&self, t: &StabilizerTableau) -> StabilizerTableau {
        let mut out = t.clone();
        for g in self.gates_a.iter().chain(&self.gates_b) {
            out.apply_mut(*g);
        }
        out
    }

    /// Check the normal form against a state: after the local Cliffords the
    /// declared Bell pairs and |0⟩ residuals must all be certain (+1).
    pub fn verify(&self, t: &StabilizerTableau) -> Result<()> {
        let nf = self.apply(t);
        let n = self.n;
        for &(qa, qb) in &self.pairs {
            let xx = PauliString::single(n, qa, 'X').mul_unchecked(&PauliString::single(n, qb, 'X'));
            let zz = PauliString::single(n, qa, 'Z').mul_unchecked(&PauliString::single(n, qb, 'Z'));
            if nf.expectation(&xx)? != Some(1) || nf.expectation(&zz)? != Some(1) {
                return Err(Error::Solver(format!("normal form lost Bell pair ({qa},{qb})")));
            }
        }
        for &q in self.residual_a.iter().chain(&self.residual_b) {
            if nf.expectation(&PauliString::single(n, q, 'Z'))? != Some(1) {
                return Err(Error::Solver(format!("residual qubit {q} is not |0⟩")));
            }
        }
        Ok(())
    }
}

/// Symplectic product of the restrictions of two Paulis to the qubits in
/// `mask`: true ⇔ the restrictions anticommute.
fn part_anticommutes(p: &PauliString, q: &PauliString, mask: u64) -> bool {
    let s = (p.x & q.z & mask).count_ones() + (p.z & q.x & mask).count_ones();
    s % 2 == 1
}

/// GF(2) rank of the (x|z) restrictions of `rows` to the qubits in `mask`.
fn masked_rank(rows: &[PauliString], mask: u64) -> usize {
    let mut vecs: Vec<u128> = rows
        .iter()
        .map(|p| ((p.x & mask) as u128) | (((p.z & mask) as u128) << 64))
        .collect();
    let mut rank = 0;
    for bit in 0..128 {
        let Some(i) = (rank..vecs.len()).find(|&i| (vecs[i] >> bit) & 1 == 1) else {
            continue;
        };
        vecs.swap(rank, i);
        for j in 0..vecs.len() {
            if j != rank && (vecs[j] >> bit) & 1 == 1 {
                vecs[j] ^= vecs[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// Entanglement rank p across the cut, computed directly from the binary
/// stabiliser matrix: p = (rank_A + rank_B − n) / 2.
pub fn entanglement_rank(t: &StabilizerTableau, side_a: &[usize]) -> usize {
    let a_mask: u64 = side_a.iter().map(|&q| 1u64 << q).sum();
    let b_mask = !a_mask & ((1u64 << t.n) - 1);
    let ra = masked_rank(&t.stab, a_mask);
    let rb = masked_rank(&t.stab, b_mask);
    (ra + rb - t.n) / 2
}

/// Rotate every `free`-qubit component of rows[i] to Z, fold the Z support
/// into `target` with CNOTs, and finish with H so the part becomes exactly
/// X_target.  All gates touch only `free` qubits (plus `target`, which must
/// be in `free`).
fn reduce_part_to_x(
    rows: &mut [PauliString],
    i: usize,
    target: usize,
    free: &[usize],
    gates: &mut Vec<Gate>,
) {
    let apply = |rows: &mut [PauliString], g: Gate, gates: &mut Vec<Gate>| {
        for p in rows.iter_mut() {
            *p = crate::tableau::conjugate(p, g);
        }
        gates.push(g);
    };
    for &q in free {
        let xb = (rows[i].x >> q) & 1;
        let zb = (rows[i].z >> q) & 1;
        match (xb, zb) {
            (1, 0) => apply(rows, Gate::H(q), gates),
            (1, 1) => {
                apply(rows, Gate::S(q), gates);
                apply(rows, Gate::H(q), gates);
            }
            _ => {}
        }
    }
    let support: Vec<usize> = free.iter().copied().filter(|&q| (rows[i].z >> q) & 1 == 1).collect();
    debug_assert!(!support.is_empty());
    let head = support[0];
    for &q in &support[1..] {
        apply(rows, Gate::Cnot(q, head), gates); // Z_head Z_q → Z_head
    }
    if head != target {
        apply(rows, Gate::Swap(head, target), gates);
    }
    apply(rows, Gate::H(target), gates);
}

/// Reduce the side-part of rows[j] to exactly Z_target, assuming its
/// component at `target` is Z or Y (it anticommutes with the partner's
/// X_target) and its partner row is exactly X_target on this side.
fn reduce_partner_to_z(
    rows: &mut [PauliString],
    j: usize,
    target: usize,
    free: &[usize],
    gates: &mut Vec<Gate>,
) {
    let apply = |rows: &mut [PauliString], g: Gate, gates: &mut Vec<Gate>| {
        for p in rows.iter_mut() {
            *p = crate::tableau::conjugate(p, g);
        }
        gates.push(g);
    };
    // Rotate off-target components to Z; these gates never touch `target`.
    for &q in free {
        if q == target {
            continue;
        }
        let xb = (rows[j].x >> q) & 1;
        let zb = (rows[j].z >> q) & 1;
        match (xb, zb) {
            (1, 0) => apply(rows, Gate::H(q), gates),
            (1, 1) => {
                apply(rows, Gate::S(q), gates);
                apply(rows, Gate::H(q), gates);
            }
            _ => {}
        }
    }
    // CNOT(extra → target) maps Z_target Z_extra → Z_target and fixes
    // X_target, so it clears extras whether the target component is Z or Y.
    for &q in free {
        if q != target && (rows[j].z >> q) & 1 == 1 {
            apply(rows, Gate::Cnot(q, target), gates);
        }
    }
    // Y → Z while fixing X: conjugation by H·S·H.
    if (rows[j].x >> target) & 1 == 1 {
        apply(rows, Gate::H(target), gates);
        apply(rows, Gate::S(target), gates);
        apply(rows, Gate::H(target), gates);
    }
    debug_assert_eq!((rows[j].x >> target) & 1, 0);
    debug_assert_eq!((rows[j].z >> target) & 1, 1);
}

/// Compute the bipartite normal form of `t` across the cut given by the
/// A-side qubit list (the B side is the complement).
pub fn fattal_normal_form(t: &StabilizerTableau, side_a: &[usize]) -> Result<BipartiteNormalForm> {
    let n = t.n;
    let mut side_a: Vec<usize> = side_a.to_vec();
    side_a.sort_unstable();
    side_a.dedup();
    if side_a.iter().any(|&q| q >= n) {
        return Err(Error::Parse("cut qubit index out of range".into()));
    }
    let a_mask: u64 = side_a.iter().map(|&q| 1u64 << q).sum();
    let b_mask = !a_mask & ((1u64 << n) - 1);
    let side_b: Vec<usize> = (0..n).filter(|&q| b_mask >> q & 1 == 1).collect();

    let mut rows = t.stab.clone();
    let mut consumed = vec![false; n];
    let mut free_a = side_a.clone();
    let mut free_b = side_b.clone();
    let mut gates_a: Vec<Gate> = Vec::new();
    let mut gates_b: Vec<Gate> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    loop {
        // Lowest-index pair of live rows with anticommuting A-restrictions.
        let live: Vec<usize> = (0..n).filter(|&i| !consumed[i]).collect();
        let mut found = None;
        'outer: for (ii, &i) in live.iter().enumerate() {
            for &j in &live[ii + 1..] {
                if part_anticommutes(&rows[i], &rows[j], a_mask) {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let qa = free_a[0];
        let qb = *free_b.first().ok_or_else(|| {
            Error::Solver("Bell pair found but B side has no free qubit".into())
        })?;
        reduce_part_to_x(&mut rows, i, qa, &free_a, &mut gates_a);
        reduce_partner_to_z(&mut rows, j, qa, &free_a, &mut gates_a);
        reduce_part_to_x(&mut rows, i, qb, &free_b, &mut gates_b);
        reduce_partner_to_z(&mut rows, j, qb, &free_b, &mut gates_b);
        debug_assert_eq!(rows[i].support(), (1 << qa) | (1 << qb));
        debug_assert_eq!(rows[j].support(), (1 << qa) | (1 << qb));
        // Sign-fix to +XX, +ZZ with B-side gates (Z_qb flips XX only, X_qb
        // flips ZZ only).
        if rows[i].sign() == -1 {
            for p in rows.iter_mut() {
                *p = crate::tableau::conjugate(p, Gate::Z(qb));
            }
            gates_b.push(Gate::Z(qb));
        }
        if rows[j].sign() == -1 {
            for p in rows.iter_mut() {
                *p = crate::tableau::conjugate(p, Gate::X(qb));
            }
            gates_b.push(Gate::X(qb));
        }
        // Clear the consumed block from every other live row.  A live row's
        // block component commutes with both XX and ZZ, hence lies in
        // {II, XX, ZZ, YY} and two multiplications suffice.
        let g_row = rows[i];
        let h_row = rows[j];
        for k in 0..n {
            if k == i || k == j || consumed[k] {
                continue;
            }
            if (rows[k].x >> qa) & 1 == 1 {
                rows[k] = g_row.mul_unchecked(&rows[k]);
            }
            if (rows[k].z >> qa) & 1 == 1 {
                rows[k] = h_row.mul_unchecked(&rows[k]);
            }
            debug_assert_eq!(rows[k].support() & ((1 << qa) | (1 << qb)), 0);
        }
        consumed[i] = true;
        consumed[j] = true;
        pairs.push((qa, qb));
        free_a.remove(0);
        free_b.remove(0);
    }

    // Remaining rows generate a product group G_A × G_B.  Split them into
    // side-local generating sets by eliminating on the B columns (the
    // non-pivot rows are A-local and generate all of G_A), then reducing the
    // pivot rows' A-parts against those generators.
    let mut live: Vec<usize> = (0..n).filter(|&i| !consumed[i]).collect();
    let mut a_local: Vec<usize> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    {
        // Echelonise live rows over B columns.
        let mut r = 0usize;
        let cols: Vec<(usize, bool)> = side_b
            .iter()
            .map(|&q| (q, true))
            .chain(side_b.iter().map(|&q| (q, false)))
            .collect();
        for (q, use_x) in cols {
            let test = |p: &PauliString| {
                if use_x {
                    (p.x >> q) & 1 == 1
                } else {
                    (p.z >> q) & 1 == 1
                }
            };
            let Some(pos) = (r..live.len()).find(|&k| test(&rows[live[k]])) else {
                continue;
            };
            live.swap(r, pos);
            for k in 0..live.len() {
                if k != r && test(&rows[live[k]]) {
                    rows[live[k]] = rows[live[r]].mul_unchecked(&rows[live[k]]);
                }
            }
            r += 1;
        }
        for (k, &idx) in live.iter().enumerate() {
            if k < r {
                pivots.push(idx);
            } else {
                debug_assert_eq!(rows[idx].support() & b_mask, 0);
                a_local.push(idx);
            }
        }
    }
    // Reduce pivot rows' A-parts against the A-local generators.
    {
        // Echelonise the A-local rows over A columns.
        let cols: Vec<(usize, bool)> = side_a
            .iter()
            .map(|&q| (q, true))
            .chain(side_a.iter().map(|&q| (q, false)))
            .collect();
        let mut r = 0usize;
        for (q, use_x) in cols.iter().copied() {
            let test = |p: &PauliString| {
                if use_x {
                    (p.x >> q) & 1 == 1
                } else {
                    (p.z >> q) & 1 == 1
                }
            };
            let Some(pos) = (r..a_local.len()).find(|&k| test(&rows[a_local[k]])) else {
                continue;
            };
            a_local.swap(r, pos);
            for k in 0..a_local.len() {
                if k != r && test(&rows[a_local[k]]) {
                    rows[a_local[k]] = rows[a_local[r]].mul_unchecked(&rows[a_local[k]]);
                }
            }
            // Clear this pivot column from the crossing pivot rows too.
            for &idx in &pivots {
                if test(&rows[idx]) {
                    rows[idx] = rows[a_local[r]].mul_unchecked(&rows[idx]);
                }
            }
            r += 1;
        }
        for &idx in &pivots {
            if rows[idx].support() & a_mask != 0 {
                return Err(Error::Solver(
                    "stabiliser group failed to factorise after pair extraction".into(),
                ));
            }
        }
    }

    // Synthesise each residual side to +Z on its lowest free qubits.
    let free_a_mask: u64 = free_a.iter().map(|&q| 1u64 << q).sum();
    let free_b_mask: u64 = free_b.iter().map(|&q| 1u64 << q).sum();
    let residual_a: Vec<usize> = free_a.iter().copied().take(a_local.len()).collect();
    let residual_b: Vec<usize> = free_b.iter().copied().take(pivots.len()).collect();
    if a_local.len() != free_a.len() || pivots.len() != free_b.len() {
        return Err(Error::Solver("residual generator count mismatch".into()));
    }
    let mut a_rows: Vec<PauliString> = a_local.iter().map(|&i| rows[i]).collect();
    gates_a.extend(synthesize_to_z_basis(&mut a_rows, free_a_mask)?);
    let mut b_rows: Vec<PauliString> = pivots.iter().map(|&i| rows[i]).collect();
    gates_b.extend(synthesize_to_z_basis(&mut b_rows, free_b_mask)?);

    let nf = BipartiteNormalForm {
        n,
        side_a,
        gates_a,
        gates_b,
        pairs,
        residual_a,
        residual_b,
    };
    nf.verify(t)?;
    Ok(nf)
}
