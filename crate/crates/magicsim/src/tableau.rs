//! Stabiliser tableaux with destabilisers.
//!
//! A pure n-qubit stabiliser state is stored as 2n phased Pauli strings: n
//! stabiliser generators (mutually commuting, signs tracked exactly) and n
//! destabiliser partners (row i of one anticommutes exactly with row i of the
//! other).  Global phase is *not* tracked; every consumer downstream
//! (densities, probabilities, Pauli expectations) is phase-insensitive.
//!
//! Measurement and overlap probabilities are exact dyadic rationals — every
//! stabiliser Born probability is 0 or a power of 1/2 — so trajectory weights
//! in the Monte Carlo simulators accumulate no floating-point error.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use num_complex::Complex64;
use rand::Rng;

/// Largest register for dense statevector conversion.
pub const DENSE_LIMIT: usize = 12;

/// An exact dyadic probability: `num / 2^exp` with `num ∈ {0, 1}` here
/// (stabiliser probabilities are 0 or a power of 1/2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub num: u64,
    pub exp: u32,
}

impl Dyadic {
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };
    pub const HALF: Dyadic = Dyadic { num: 1, exp: 1 };
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn mul(self, other: Dyadic) -> Dyadic {
        if self.num == 0 || other.num == 0 {
            Dyadic::ZERO
        } else {
            Dyadic { num: self.num * other.num, exp: self.exp + other.exp }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * (0.5f64).powi(self.exp as i32)
    }
}

/// Clifford gates supported by the tableau (a generating set plus the usual
/// conveniences).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            g => g, // all others are involutions
        }
    }

    /// Qubits touched by the gate.
    pub fn support(self) -> (usize, Option<usize>) {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                (q, None)
            }
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    /// Relabel qubits through a map.
    pub fn relabel(self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::Y(q) => Gate::Y(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::Cnot(a, b) => Gate::Cnot(f(a), f(b)),
            Gate::Cz(a, b) => Gate::Cz(f(a), f(b)),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
        }
    }
}

/// Conjugate a Pauli string by a Clifford gate: P ↦ U P U†.
///
/// Rules are exact in the X/Z + i-power representation; CNOT and SWAP carry
/// no phase correction in this form (the bookkeeping that CHP-style sign
/// bits need is absorbed into the explicit i-power).
pub fn conjugate(p: &PauliString, g: Gate) -> PauliString {
    let mut q = *p;
    match g {
        Gate::H(j) => {
            let bit = 1u64 << j;
            if q.x & q.z & bit != 0 {
                q.e = (q.e + 2) & 3; // H Y H = −Y
            }
            let xb = q.x & bit;
            let zb = q.z & bit;
            q.x = (q.x & !bit) | if zb != 0 { bit } else { 0 };
            q.z = (q.z & !bit) | if xb != 0 { bit } else { 0 };
        }
        Gate::S(j) => {
            let bit = 1u64 << j;
            if q.x & bit != 0 {
                q.e = (q.e + 1) & 3; // S X S† = iXZ
                q.z ^= bit;
            }
        }
        Gate::Sdg(j) => {
            let bit = 1u64 << j;
            if q.x & bit != 0 {
                q.e = (q.e + 3) & 3;
                q.z ^= bit;
            }
        }
        Gate::X(j) => {
            if q.z & (1 << j) != 0 {
                q.e = (q.e + 2) & 3;
            }
        }
        Gate::Y(j) => {
            let bit = 1u64 << j;
            if (q.x ^ q.z) & bit != 0 {
                q.e = (q.e + 2) & 3;
            }
        }
        Gate::Z(j) => {
            if q.x & (1 << j) != 0 {
                q.e = (q.e + 2) & 3;
            }
        }
        Gate::Cnot(c, t) => {
            let cb = 1u64 << c;
            let tb = 1u64 << t;
            if q.x & cb != 0 {
                q.x ^= tb;
            }
            if q.z & tb != 0 {
                q.z ^= cb;
            }
        }
        Gate::Cz(a, b) => {
            let ab = 1u64 << a;
            let bb = 1u64 << b;
            if (q.x & ab != 0) && (q.x & bb != 0) {
                q.e = (q.e + 2) & 3;
            }
            if q.x & ab != 0 {
                q.z ^= bb;
            }
            if q.x & bb != 0 {
                q.z ^= ab;
            }
        }
        Gate::Swap(a, b) => {
            let (ab, bb) = (1u64 << a, 1u64 << b);
            let (xa, xb) = (q.x & ab != 0, q.x & bb != 0);
            let (za, zb) = (q.z & ab != 0, q.z & bb != 0);
            q.x = q.x & !(ab | bb)
                | if xb { ab } else { 0 }
                | if xa { bb } else { 0 };
            q.z = q.z & !(ab | bb)
                | if zb { ab } else { 0 }
                | if za { bb } else { 0 };
        }
    }
    q
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    pub n: usize,
    pub stab: Vec<PauliString>,
    pub destab: Vec<PauliString>,
}

impl StabilizerTableau {
    /// |0…0⟩: stabilised by +Z_q, destabilised by X_q.
    pub fn zero_state(n: usize) -> Self {
        let stab = (0..n).map(|q| PauliString::single(n, q, 'Z')).collect();
        let destab = (0..n).map(|q| PauliString::single(n, q, 'X')).collect();
        StabilizerTableau { n, stab, destab }
    }

    /// |+…+⟩.
    pub fn plus_state(n: usize) -> Self {
        let mut t = Self::zero_state(n);
        for q in 0..n {
            t = t.apply(Gate::H(q));
        }
        t
    }

    pub fn apply(&self, g: Gate) -> StabilizerTableau {
        let (a, b) = g.support();
        assert!(a < self.n && b.map_or(true, |b| b < self.n && b != a), "gate index out of range");
        StabilizerTableau {
            n: self.n,
            stab: self.stab.iter().map(|p| conjugate(p, g)).collect(),
            destab: self.destab.iter().map(|p| conjugate(p, g)).collect(),
        }
    }

    pub fn apply_all(&self, gates: &[Gate]) -> StabilizerTableau {
        let mut t = self.clone();
        for g in gates {
            t = t.apply(*g);
        }
        t
    }

    /// In-place variant used by hot loops.
    pub fn apply_mut(&mut self, g: Gate) {
        for p in self.stab.iter_mut() {
            *p = conjugate(p, g);
        }
        for p in self.destab.iter_mut() {
            *p = conjugate(p, g);
        }
    }

    /// Tensor product: `self` on qubits 0..n, `other` shifted to n..n+m.
    pub fn tensor(&self, other: &StabilizerTableau) -> StabilizerTableau {
        let n = self.n + other.n;
        let shift = |p: &PauliString| PauliString {
            n,
            x: p.x << self.n,
            z: p.z << self.n,
            e: p.e,
        };
        let widen = |p: &PauliString| PauliString { n, ..*p };
        StabilizerTableau {
            n,
            stab: self
                .stab
                .iter()
                .map(widen)
                .chain(other.stab.iter().map(|p| shift(p)))
                .collect(),
            destab: self
                .destab
                .iter()
                .map(widen)
                .chain(other.destab.iter().map(|p| shift(p)))
                .collect(),
        }
    }

    /// ⟨P⟩ for a Hermitian Pauli: None encodes expectation 0 (P anticommutes
    /// with the group), Some(±1) a deterministic value.
    pub fn expectation(&self, p: &PauliString) -> Result<Option<i8>> {
        self.check_pauli(p)?;
        if self.stab.iter().any(|g| !g.commutes(p)) {
            return Ok(None);
        }
        Ok(Some(self.deterministic_sign(p)))
    }

    /// For P commuting with the whole group: ±P is a group element; return
    /// the sign s with sP in the group.
    fn deterministic_sign(&self, p: &PauliString) -> i8 {
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.destab[i].commutes(p) {
                acc = acc.mul_unchecked(&self.stab[i]);
            }
        }
        debug_assert_eq!(acc.x, p.x, "Pauli not in the stabiliser group modulo sign");
        debug_assert_eq!(acc.z, p.z);
        // acc = i^{a} X^x Z^z and p = i^{b} X^x Z^z; both Hermitian.
        if acc.sigma_phase() == p.sigma_phase() {
            1
        } else {
            -1
        }
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.n != self.n {
            return Err(Error::Parse(format!(
                "Pauli on {} qubits measured on {}-qubit tableau",
                p.n, self.n
            )));
        }
        if !p.is_hermitian() {
            return Err(Error::Parse("measured Pauli must be Hermitian".into()));
        }
        Ok(())
    }

    /// Measure the Hermitian Pauli P, sampling the outcome when it is
    /// genuinely random.  Returns (outcome, exact probability of that
    /// outcome, post-measurement tableau).
    pub fn measure_pauli(
        &self,
        p: &PauliString,
        rng: &mut impl Rng,
    ) -> Result<(i8, Dyadic, StabilizerTableau)> {
        self.check_pauli(p)?;
        match self.find_anticommuting(p) {
            Some(pivot) => {
                let outcome: i8 = if rng.gen::<bool>() { 1 } else { -1 };
                Ok((outcome, Dyadic::HALF, self.project(p, pivot, outcome)))
            }
            None => {
                let s = self.deterministic_sign(p);
                Ok((s, Dyadic::ONE, self.clone()))
            }
        }
    }

    /// Measure with a forced outcome; errors with `ZeroProbability` if the
    /// forced outcome has probability 0.
    pub fn measure_forced(
        &self,
        p: &PauliString,
        outcome: i8,
    ) -> Result<(Dyadic, StabilizerTableau)> {
        self.check_pauli(p)?;
        match self.find_anticommuting(p) {
            Some(pivot) => Ok((Dyadic::HALF, self.project(p, pivot, outcome))),
            None => {
                let s = self.deterministic_sign(p);
                if s == outcome {
                    Ok((Dyadic::ONE, self.clone()))
                } else {
                    Err(Error::ZeroProbability(format!(
                        "outcome {outcome:+} of {} has probability 0",
                        p.render()
                    )))
                }
            }
        }
    }

    fn find_anticommuting(&self, p: &PauliString) -> Option<usize> {
        (0..self.n).find(|&i| !self.stab[i].commutes(p))
    }

    fn project(&self, p: &PauliString, pivot: usize, outcome: i8) -> StabilizerTableau {
        let mut t = self.clone();
        let piv_row = t.stab[pivot];
        for i in 0..t.n {
            if i != pivot && !t.stab[i].commutes(p) {
                t.stab[i] = piv_row.mul_unchecked(&t.stab[i]);
            }
            if !t.destab[i].commutes(p) && i != pivot {
                t.destab[i] = piv_row.mul_unchecked(&t.destab[i]);
            }
        }
        t.destab[pivot] = piv_row;
        t.stab[pivot] = if outcome == 1 { *p } else { p.negate() };
        t
    }

    /// Tr[Π |φ⟩⟨φ|] for Π = ∏ (1+P_i)/2 over pairwise-commuting Hermitian
    /// Paulis, as an exact dyadic rational.
    pub fn overlap_probability(&self, projectors: &[PauliString]) -> Result<Dyadic> {
        for (i, a) in projectors.iter().enumerate() {
            for b in &projectors[i + 1..] {
                if !a.commutes(b) {
                    return Err(Error::Parse(format!(
                        "projector list is not commuting: {} vs {}",
                        a.render(),
                        b.render()
                    )));
                }
            }
        }
        let mut t = self.clone();
        let mut prob = Dyadic::ONE;
        for p in projectors {
            match t.measure_forced(p, 1) {
                Ok((q, t2)) => {
                    prob = prob.mul(q);
                    t = t2;
                }
                Err(Error::ZeroProbability(_)) => return Ok(Dyadic::ZERO),
                Err(e) => return Err(e),
            }
        }
        Ok(prob)
    }

    /// A computational basis state with non-zero amplitude, as a bit mask
    /// (bit q set ⇔ qubit q reads |1⟩).
    fn pivot_basis_state(&self) -> u64 {
        let mut t = self.clone();
        let mut bits = 0u64;
        for q in 0..self.n {
            let z = PauliString::single(self.n, q, 'Z');
            match t.measure_forced(&z, 1) {
                Ok((_, t2)) => t = t2,
                Err(_) => {
                    let (_, t2) = t.measure_forced(&z, -1).expect("Z must have an outcome");
                    bits |= 1 << q;
                    t = t2;
                }
            }
        }
        bits
    }

    /// Dense unit-norm statevector (qubit 0 = most significant bit), n ≤ 12.
    /// The overall phase is fixed by making the first non-zero amplitude
    /// real positive.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        if self.n > DENSE_LIMIT {
            return Err(Error::Limit(format!(
                "dense conversion limited to {DENSE_LIMIT} qubits (got {})",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let x0 = self.pivot_basis_state();
        // Enumerate the full group by gray-code over generator subsets; for a
        // group element g = i^e X^x Z^z stabilising |ψ⟩,
        //   ⟨x0⊕x|ψ⟩ = i^{−e} (−1)^{z·(x0⊕x)} ⟨x0|ψ⟩.
        let mut count = 0usize;
        let mut g = PauliString::identity(self.n);
        let mut prev_gray = 0u64;
        for m in 0..(1u64 << self.n) {
            if m > 0 {
                let gray = m ^ (m >> 1);
                let flip = (gray ^ prev_gray).trailing_zeros() as usize;
                prev_gray = gray;
                g = g.mul_unchecked(&self.stab[flip]);
            }
            let y = x0 ^ g.x;
            let idx = bits_to_basis_index(y, self.n);
            if amps[idx].norm_sqr() == 0.0 {
                let zpar = ((g.z & y).count_ones() % 2) as i32;
                let mut ph = (4 - (g.e as i32 % 4)) % 4; // i^{−e}
                if zpar == 1 {
                    ph = (ph + 2) % 4;
                }
                amps[idx] = match ph {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                count += 1;
            }
        }
        let norm = (count as f64).sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(amps)
    }

    /// All 2ⁿ signed group elements (for Pauli-vector columns).  Every
    /// element is Hermitian with sign ±1.
    pub fn group_elements(&self) -> Vec<PauliString> {
        let mut out = Vec::with_capacity(1 << self.n);
        let mut g = PauliString::identity(self.n);
        out.push(g);
        let mut prev_gray = 0u64;
        for m in 1..(1u64 << self.n) {
            let gray = m ^ (m >> 1);
            let flip = (gray ^ prev_gray).trailing_zeros() as usize;
            prev_gray = gray;
            g = g.mul_unchecked(&self.stab[flip]);
            out.push(g);
        }
        out
    }

    /// Rebuild a full tableau (with destabilisers) from n independent,
    /// commuting, Hermitian stabiliser generators.
    pub fn from_stabilizers(gens: &[PauliString]) -> Result<StabilizerTableau> {
        let n = match gens.first() {
            Some(g) => g.n,
            None => return Err(Error::Parse("empty generator list".into())),
        };
        if gens.len() != n {
            return Err(Error::Parse(format!(
                "expected {n} generators for {n} qubits, got {}",
                gens.len()
            )));
        }
        for g in gens {
            if g.n != n || !g.is_hermitian() {
                return Err(Error::Parse("generators must be Hermitian, equal width".into()));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes(b) {
                    return Err(Error::Parse(format!(
                        "generators do not commute: {} vs {}",
                        a.render(),
                        b.render()
                    )));
                }
            }
        }
        // Synthesise a Clifford circuit mapping the generator set to
        // {+Z_0, …, +Z_{n−1}}, then run it backwards from |0…0⟩.
        let mut rows: Vec<PauliString> = gens.to_vec();
        let all = (0..n).map(|q| 1u64 << q).fold(0u64, |a, b| a | b);
        let gates = synthesize_to_z_basis(&mut rows, all)?;
        let mut t = StabilizerTableau::zero_state(n);
        for g in gates.iter().rev() {
            t.apply_mut(g.inverse());
        }
        Ok(t)
    }

    /// Parse the fixture format: one generator per line ("+XZI", "−IYZ").
    pub fn parse(text: &str) -> Result<StabilizerTableau> {
        let gens: Vec<PauliString> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(PauliString::parse)
            .collect::<Result<_>>()?;
        Self::from_stabilizers(&gens)
    }

    /// Render stabiliser generators in the fixture format (canonicalised).
    pub fn render(&self) -> String {
        let rows = self.canonical_generators();
        rows.iter().map(|p| p.render()).collect::<Vec<_>>().join("\n")
    }

    /// Deterministic canonical generator set: GF(2) reduced row echelon form
    /// of the stabiliser rows (columns ordered x_0..x_{n−1}, z_0..z_{n−1}),
    /// with signs carried through the row multiplications.  Two tableaux
    /// describe the same state iff their canonical generators are equal.
    pub fn canonical_generators(&self) -> Vec<PauliString> {
        let mut rows = self.stab.clone();
        let n = self.n;
        let mut r = 0usize;
        for col in 0..2 * n {
            let test = |p: &PauliString| {
                if col < n {
                    (p.x >> col) & 1 == 1
                } else {
                    (p.z >> (col - n)) & 1 == 1
                }
            };
            let Some(pivot) = (r..n).find(|&i| test(&rows[i])) else {
                continue;
            };
            rows.swap(r, pivot);
            for i in 0..n {
                if i != r && test(&rows[i]) {
                    rows[i] = rows[r].mul_unchecked(&rows[i]);
                }
            }
            r += 1;
            if r == n {
                break;
            }
        }
        rows
    }

    /// Hashable memoisation key for the canonical form.
    pub fn canonical_key(&self) -> Vec<(u64, u64, u8)> {
        self.canonical_generators()
            .iter()
            .map(|p| (p.x, p.z, p.sigma_phase()))
            .collect()
    }

    /// Restrict to the qubits in `keep` (ascending order), assuming the
    /// state factorises between `keep` and its complement; errors otherwise.
    pub fn restrict(&self, keep: &[usize]) -> Result<StabilizerTableau> {
        let keep_mask: u64 = keep.iter().map(|&q| 1u64 << q).sum();
        let drop_mask = !keep_mask & ((1u64 << self.n) - 1);
        if drop_mask == 0 {
            return Ok(self.clone());
        }
        // Gaussian-eliminate on the dropped-qubit columns so rows supported
        // purely inside `keep` float to the bottom.
        let mut rows = self.stab.clone();
        let drop_qubits: Vec<usize> = (0..self.n).filter(|&q| drop_mask >> q & 1 == 1).collect();
        let mut r = 0usize;
        for col in 0..2 * drop_qubits.len() {
            let q = drop_qubits[col % drop_qubits.len()];
            let use_x = col < drop_qubits.len();
            let test = |p: &PauliString| {
                if use_x {
                    (p.x >> q) & 1 == 1
                } else {
                    (p.z >> q) & 1 == 1
                }
            };
            let Some(pivot) = (r..self.n).find(|&i| test(&rows[i])) else {
                continue;
            };
            rows.swap(r, pivot);
            for i in 0..self.n {
                if i != r && test(&rows[i]) {
                    rows[i] = rows[r].mul_unchecked(&rows[i]);
                }
            }
            r += 1;
        }
        let local: Vec<&PauliString> =
            rows.iter().filter(|p| p.support() & drop_mask == 0).collect();
        if local.len() < keep.len() {
            return Err(Error::Parse(
                "restriction requested across an entangled cut".into(),
            ));
        }
        // Compress qubit labels.
        let mut pos = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let gens: Vec<PauliString> = local
            .iter()
            .take(keep.len())
            .map(|p| {
                let mut x = 0u64;
                let mut z = 0u64;
                for &old in keep {
                    if (p.x >> old) & 1 == 1 {
                        x |= 1 << pos[old];
                    }
                    if (p.z >> old) & 1 == 1 {
                        z |= 1 << pos[old];
                    }
                }
                PauliString { n: keep.len(), x, z, e: p.e }
            })
            .collect();
        StabilizerTableau::from_stabilizers(&gens)
    }
}

fn bits_to_basis_index(bits: u64, n: usize) -> usize {
    // qubit 0 (bit 0 of the mask) is the most significant basis-index bit.
    let mut idx = 0usize;
    for q in 0..n {
        idx = (idx << 1) | ((bits >> q) & 1) as usize;
    }
    idx
}

/// Synthesise Clifford gates (acting only on qubits in `allowed`, a bit
/// mask) that map the given independent commuting Hermitian rows to
/// {+Z_{q}} on the lowest `rows.len()` allowed qubits, conjugating `rows`
/// in place.  Row *multiplications* are also used, which is sound whenever
/// the rows generate (a subgroup of) a stabiliser group.
pub fn synthesize_to_z_basis(rows: &mut Vec<PauliString>, allowed: u64) -> Result<Vec<Gate>> {
    let n = rows.first().map(|p| p.n).unwrap_or(0);
    let mut gates: Vec<Gate> = Vec::new();
    let mut free: Vec<usize> = (0..n).filter(|&q| allowed >> q & 1 == 1).collect();
    for i in 0..rows.len() {
        let row_support =
            |p: &PauliString| free.iter().copied().find(|&q| (p.support() >> q) & 1 == 1);
        let Some(_) = row_support(&rows[i]) else {
            return Err(Error::Parse("dependent or out-of-region generator".into()));
        };
        let target = free[0];
        reduce_row_to_z(rows, i, target, &free, &mut gates);
        // Clear the target qubit from every other row.  Rows commute with
        // +Z_target overall and have no other support on fixed qubits, so
        // their component at `target` is I or Z.
        for j in 0..rows.len() {
            if j != i && (rows[j].support() >> target) & 1 == 1 {
                rows[j] = rows[i].mul_unchecked(&rows[j]);
            }
        }
        free.remove(0);
    }
    Ok(gates)
}

/// Bring rows[i] to +Z_target using gates on `free` qubits only.
fn reduce_row_to_z(
    rows: &mut [PauliString],
    i: usize,
    target: usize,
    free: &[usize],
    gates: &mut Vec<Gate>,
) {
    let apply = |rows: &mut [PauliString], g: Gate, gates: &mut Vec<Gate>| {
        for p in rows.iter_mut() {
            *p = conjugate(p, g);
        }
        gates.push(g);
    };
    // Rotate every supported qubit of the row to pure Z.
    for &q in free {
        let xb = (rows[i].x >> q) & 1;
        let zb = (rows[i].z >> q) & 1;
        match (xb, zb) {
            (1, 0) => apply(rows, Gate::H(q), gates),
            (1, 1) => {
                // Y → X → Z
                apply(rows, Gate::S(q), gates);
                apply(rows, Gate::H(q), gates);
            }
            _ => {}
        }
    }
    // Fold all Z support into one qubit.
    let support: Vec<usize> = free.iter().copied().filter(|&q| (rows[i].z >> q) & 1 == 1).collect();
    let head = support[0];
    for &q in &support[1..] {
        // CNOT(c=q, t=head) maps Z_head Z_q → Z_head.
        apply(rows, Gate::Cnot(q, head), gates);
    }
    if head != target {
        apply(rows, Gate::Swap(head, target), gates);
    }
    if rows[i].sigma_phase() == 2 {
        apply(rows, Gate::X(target), gates);
    }
    debug_assert_eq!(rows[i], PauliString::single(rows[i].n, target, 'Z'));
}

/// Post-selected Bell measurement: glue the resource Choi-state tableau
/// |ψ⟩^{AB} (2m qubits: A = output 0..m, B = reference m..2m) to an m-qubit
/// input |φ⟩ and project the (B, input) pairs onto |Ω_m⟩.
///
/// Returns the *raw squared norm* ‖(1⊗⟨Ω|)(|ψ⟩⊗|φ⟩)‖² as an exact dyadic —
/// e.g. 4^{−m} for the identity resource — plus the normalised m-qubit
/// output tableau.  Callers converting this to a map-trace probability must
/// scale by 2^{2m} (see the static simulator).
pub fn postselect_bell(
    resource: &StabilizerTableau,
    input: &StabilizerTableau,
) -> Result<(Dyadic, StabilizerTableau)> {
    if resource.n % 2 != 0 || resource.n != 2 * input.n {
        return Err(Error::Parse(format!(
            "resource must live on 2m qubits, input on m (got {} and {})",
            resource.n, input.n
        )));
    }
    let m = input.n;
    let total = 3 * m;
    let mut t = resource.tensor(input);
    let mut prob = Dyadic::ONE;
    for i in 0..m {
        let b = m + i;
        let c = 2 * m + i;
        let xx = PauliString::single(total, b, 'X')
            .mul_unchecked(&PauliString::single(total, c, 'X'));
        let zz = PauliString::single(total, b, 'Z')
            .mul_unchecked(&PauliString::single(total, c, 'Z'));
        for p in [xx, zz] {
            match t.measure_forced(&p, 1) {
                Ok((q, t2)) => {
                    prob = prob.mul(q);
                    t = t2;
                }
                Err(Error::ZeroProbability(_)) => {
                    return Err(Error::ZeroProbability(
                        "Bell post-selection has probability 0".into(),
                    ))
                }
                Err(e) => return Err(e),
            }
        }
    }
    let keep: Vec<usize> = (0..m).collect();
    let out = t.restrict(&keep)?;
    Ok((prob, out))
}
