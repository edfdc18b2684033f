//! Phased Pauli strings over n ≤ 64 qubits.
//!
//! A string is stored in the X/Z binary-symplectic form with an explicit
//! power of i: `P = i^e · X^{x} Z^{z}` where `x`, `z` are bit masks over the
//! qubits (bit q set ⇔ the factor on qubit q carries X resp. Z).  The more
//! familiar σ-tensor form `phase · σ_{d_0} ⊗ σ_{d_1} ⊗ …` is recovered via
//! `Y = iXZ`, so the public phase is `e − |x ∧ z| (mod 4)` in powers of i.
//!
//! Qubit 0 is the *leftmost* tensor factor and the most significant digit of
//! the base-4 Pauli index (digit order I, X, Y, Z).

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Maximum qubit count representable by the bit-mask layout.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PauliString {
    pub n: usize,
    /// X part, bit q ⇔ qubit q.
    pub x: u64,
    /// Z part.
    pub z: u64,
    /// Power of i in the X/Z form `i^e · X^x Z^z`, reduced mod 4.
    pub e: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliString { n, x: 0, z: 0, e: 0 }
    }

    /// Single-qubit X/Y/Z embedded at `q` in an n-qubit string.
    pub fn single(n: usize, q: usize, kind: char) -> Self {
        assert!(q < n);
        let bit = 1u64 << q;
        match kind {
            'X' => PauliString { n, x: bit, z: 0, e: 0 },
            'Y' => PauliString { n, x: bit, z: bit, e: 1 }, // Y = iXZ
            'Z' => PauliString { n, x: 0, z: bit, e: 0 },
            'I' => PauliString::identity(n),
            _ => panic!("bad Pauli letter {kind}"),
        }
    }

    /// Power of i multiplying the σ-tensor form; 0..4.
    pub fn sigma_phase(&self) -> u8 {
        (self.e + 4 - ((self.x & self.z).count_ones() as u8 & 3)) & 3
    }

    /// True when the operator is Hermitian (σ-phase ±1).
    pub fn is_hermitian(&self) -> bool {
        self.sigma_phase() % 2 == 0
    }

    /// Sign of a Hermitian string: +1 or −1.
    pub fn sign(&self) -> i8 {
        debug_assert!(self.is_hermitian());
        if self.sigma_phase() == 0 {
            1
        } else {
            -1
        }
    }

    /// Group product with exact phase: Z^b X^c = (−1)^{bc} X^c Z^b per qubit.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::Parse(format!(
                "Pauli size mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        let anti = (self.z & other.x).count_ones() as u8;
        PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            e: (self.e + other.e + 2 * (anti & 1)) & 3,
        }
    }

    /// True iff the strings commute.
    #[inline]
    pub fn commutes(&self, other: &PauliString) -> bool {
        let s = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        s % 2 == 0
    }

    /// Bitwise support (union of X and Z parts).
    #[inline]
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Base-4 index with qubit 0 as the most significant digit and digit
    /// order (I, X, Y, Z).  This is the row index used by the catalogue's
    /// Pauli-expectation vectors.
    pub fn index(&self) -> usize {
        let mut idx = 0usize;
        for q in 0..self.n {
            let xb = (self.x >> q) & 1;
            let zb = (self.z >> q) & 1;
            let digit = match (xb, zb) {
                (0, 0) => 0,
                (1, 0) => 1,
                (1, 1) => 2,
                (0, 1) => 3,
                _ => unreachable!(),
            };
            idx = idx * 4 + digit as usize;
        }
        idx
    }

    /// Inverse of [`index`](Self::index): the Hermitian string (+ sign) at a
    /// given base-4 index.
    pub fn from_index(n: usize, mut idx: usize) -> Self {
        let mut digits = vec![0u8; n];
        for q in (0..n).rev() {
            digits[q] = (idx % 4) as u8;
            idx /= 4;
        }
        let mut p = PauliString::identity(n);
        for (q, d) in digits.iter().enumerate() {
            let letter = [b'I', b'X', b'Y', b'Z'][*d as usize] as char;
            p = p.mul_unchecked(&PauliString::single(n, q, letter));
        }
        p
    }

    /// Flip the overall sign (multiply by −1).
    pub fn negate(&self) -> PauliString {
        PauliString { e: (self.e + 2) & 3, ..*self }
    }

    /// Parse "+XZI", "-IYZ" (ASCII '-' or Unicode '−'; sign optional, 'i'
    /// prefixes rejected — strings in fixtures are Hermitian).
    pub fn parse(s: &str) -> Result<PauliString> {
        let s = s.trim();
        let mut chars = s.chars().peekable();
        let mut neg = false;
        match chars.peek() {
            Some('+') => {
                chars.next();
            }
            Some('-') | Some('−') => {
                neg = true;
                chars.next();
            }
            _ => {}
        }
        let letters: Vec<char> = chars.collect();
        if letters.is_empty() {
            return Err(Error::Parse("empty Pauli literal".into()));
        }
        if letters.len() > MAX_QUBITS {
            return Err(Error::Limit(format!("Pauli literal longer than {MAX_QUBITS}")));
        }
        let n = letters.len();
        let mut p = PauliString::identity(n);
        for (q, c) in letters.iter().enumerate() {
            match c {
                'I' | 'X' | 'Y' | 'Z' => {
                    p = p.mul_unchecked(&PauliString::single(n, q, *c));
                }
                _ => return Err(Error::Parse(format!("bad Pauli letter '{c}' in \"{s}\""))),
            }
        }
        if neg {
            p = p.negate();
        }
        Ok(p)
    }

    /// Render in the fixture format, e.g. "+XZI".
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.n + 1);
        out.push(match self.sigma_phase() {
            0 => '+',
            2 => '-',
            1 => 'i',
            _ => 'j', // −i; only reachable for non-Hermitian strings
        });
        for q in 0..self.n {
            let xb = (self.x >> q) & 1;
            let zb = (self.z >> q) & 1;
            out.push(match (xb, zb) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                (0, 1) => 'Z',
                _ => unreachable!(),
            });
        }
        out
    }

    /// Dense 2ⁿ×2ⁿ matrix (row-major), for oracle tests and witnesses.
    /// Qubit 0 is the most significant bit of the computational-basis index.
    pub fn dense(&self) -> Vec<Complex64> {
        let dim = 1usize << self.n;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        let phase = match self.e & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        // ⟨r| i^e X^x Z^z |c⟩ = i^e (−1)^{z·c} δ_{r, c⊕x}; bit q of the mask
        // corresponds to basis-index bit (n−1−q) under the qubit-0-leftmost
        // convention.
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        for q in 0..self.n {
            if (self.x >> q) & 1 == 1 {
                xmask |= 1 << (self.n - 1 - q);
            }
            if (self.z >> q) & 1 == 1 {
                zmask |= 1 << (self.n - 1 - q);
            }
        }
        for c in 0..dim {
            let r = c ^ xmask;
            let s = ((c & zmask).count_ones() % 2) as f64;
            m[r * dim + c] = phase * Complex64::new(1.0 - 2.0 * s, 0.0);
        }
        m
    }
}

/// Convenience wrapper matching the operation contract.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.mul(b)
}
