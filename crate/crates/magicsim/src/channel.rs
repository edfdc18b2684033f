//! Quantum channels as Kraus lists, their Choi–Jamiołkowski states, and a
//! builder zoo for every channel exercised by the monotone and simulator
//! layers.
//!
//! Conventions, fixed once and used everywhere:
//! * qubit 0 is the most significant bit of a computational basis index;
//! * Choi states live on 2n qubits with A = output = qubits 0..n and
//!   B = reference = qubits n..2n, i.e. Φ_E = (E⊗1)|Ω⟩⟨Ω| with
//!   |Ω⟩ = 2^{−n/2} Σ_j |j⟩^A |j⟩^B;
//! * matrix identities are checked against a single tolerance ε_mat = 1e−10.

use crate::error::{Error, Result};
use crate::linalg::{
    cone, czero, dagger, hermitian_eigen, identity, kron, max_abs_diff, outer, partial_trace,
    pauli_vector, trace, CMat,
};
use crate::tableau::Gate;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Global tolerance for matrix identities (CPTP checks, Choi invariants).
pub const EPS_MAT: f64 = 1e-10;

/// Dense-evolution qubit limit.
pub const DENSE_LIMIT: usize = 12;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    pub n: usize,
    pub kraus: Vec<CMat>,
    /// Σ K†K = 1 within ε_mat.
    pub cptp: bool,
    /// Every Kraus operator diagonal (exact zero off-diagonals).
    pub diagonal: bool,
}

impl KrausChannel {
    pub fn new(n: usize, kraus: Vec<CMat>) -> Result<KrausChannel> {
        if kraus.is_empty() {
            return Err(Error::Parse("empty Kraus list".into()));
        }
        let dim = 1usize << n;
        for k in &kraus {
            if k.dim() != (dim, dim) {
                return Err(Error::Parse(format!(
                    "Kraus operator shape {:?} does not match n={n}",
                    k.dim()
                )));
            }
        }
        let mut sum = Array2::from_elem((dim, dim), czero());
        for k in &kraus {
            sum = sum + dagger(k).dot(k);
        }
        let cptp = max_abs_diff(&sum, &identity(dim)) <= EPS_MAT;
        let diagonal = kraus.iter().all(|k| {
            (0..dim).all(|i| (0..dim).all(|j| i == j || k[[i, j]] == czero()))
        });
        Ok(KrausChannel { n, kraus, cptp, diagonal })
    }

    pub fn require_cptp(&self) -> Result<()> {
        if self.cptp {
            Ok(())
        } else {
            Err(Error::Parse("channel is not trace preserving".into()))
        }
    }

    pub fn identity(n: usize) -> KrausChannel {
        KrausChannel::new(n, vec![identity(1 << n)]).unwrap()
    }

    pub fn from_unitary(u: CMat) -> Result<KrausChannel> {
        let dim = u.nrows();
        if !dim.is_power_of_two() {
            return Err(Error::Parse("unitary dimension not a power of two".into()));
        }
        let n = dim.trailing_zeros() as usize;
        let ch = KrausChannel::new(n, vec![u])?;
        if !ch.cptp {
            return Err(Error::Parse("matrix is not unitary".into()));
        }
        Ok(ch)
    }

    /// E(ρ) = Σ K ρ K† on the channel's own width.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let dim = 1usize << self.n;
        let mut out = Array2::from_elem((dim, dim), czero());
        for k in &self.kraus {
            out = out + k.dot(rho).dot(&dagger(k));
        }
        out
    }

    /// Apply embedded on `support` inside a `total_n`-qubit density matrix.
    /// `support[i]` hosts channel qubit i.
    pub fn apply_dense(&self, rho: &CMat, support: &[usize], total_n: usize) -> Result<CMat> {
        if total_n > DENSE_LIMIT {
            return Err(Error::Limit(format!(
                "dense evolution limited to {DENSE_LIMIT} qubits"
            )));
        }
        if support.len() != self.n {
            return Err(Error::Parse("support size does not match channel width".into()));
        }
        let mut seen = vec![false; total_n];
        for &q in support {
            if q >= total_n || seen[q] {
                return Err(Error::Parse("support qubits must be distinct and in range".into()));
            }
            seen[q] = true;
        }
        let dim = 1usize << total_n;
        if rho.dim() != (dim, dim) {
            return Err(Error::Parse("density matrix width mismatch".into()));
        }
        // Basis-index bit positions of the support qubits (msb-first).
        let bits: Vec<usize> = support.iter().map(|&q| total_n - 1 - q).collect();
        let sub_dim = 1usize << self.n;
        let embed = |rest: usize, sub: usize| -> usize {
            // `rest` enumerates non-support bit patterns compactly.
            let mut idx = 0usize;
            let mut r = rest;
            for pos in (0..total_n).rev() {
                if let Some(si) = bits.iter().position(|&b| b == pos) {
                    idx |= ((sub >> (self.n - 1 - si)) & 1) << pos;
                } else {
                    idx |= (r & 1) << pos;
                    r >>= 1;
                }
            }
            idx
        };
        let rest_dim = 1usize << (total_n - self.n);
        let mut out = Array2::from_elem((dim, dim), czero());
        for k in &self.kraus {
            // B = (K⊗1) ρ (K⊗1)†, computed blockwise over `rest` patterns.
            for rr in 0..rest_dim {
                for cr in 0..rest_dim {
                    for so in 0..sub_dim {
                        for to in 0..sub_dim {
                            let mut acc = czero();
                            for si in 0..sub_dim {
                                let kval = k[[so, si]];
                                if kval == czero() {
                                    continue;
                                }
                                for ti in 0..sub_dim {
                                    let kc = k[[to, ti]].conj();
                                    if kc == czero() {
                                        continue;
                                    }
                                    acc += kval * rho[[embed(rr, si), embed(cr, ti)]] * kc;
                                }
                            }
                            out[[embed(rr, so), embed(cr, to)]] += acc;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sequential composition a∘b: `b` acts first.
    pub fn compose(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
        if a.n != b.n {
            return Err(Error::Parse("compose: channel widths differ".into()));
        }
        let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
        for ka in &a.kraus {
            for kb in &b.kraus {
                kraus.push(ka.dot(kb));
            }
        }
        KrausChannel::new(a.n, kraus)
    }

    pub fn tensor(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
        let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
        for ka in &a.kraus {
            for kb in &b.kraus {
                kraus.push(kron(ka, kb));
            }
        }
        KrausChannel::new(a.n + b.n, kraus)
    }

    /// Choi state Φ = (E⊗1)|Ω⟩⟨Ω|.
    pub fn choi(&self) -> ChoiState {
        let dim = 1usize << self.n;
        let cdim = dim * dim;
        let scale = 1.0 / (dim as f64).sqrt();
        let mut rho = Array2::from_elem((cdim, cdim), czero());
        for k in &self.kraus {
            // v = (K⊗1)|Ω⟩: amplitude at |a⟩^A|j⟩^B is K[a,j]/√dim.
            let mut v = vec![czero(); cdim];
            for a in 0..dim {
                for j in 0..dim {
                    v[a * dim + j] = k[[a, j]] * scale;
                }
            }
            rho = rho + outer(&v, &v);
        }
        let pv = pauli_vector(&rho, 2 * self.n);
        ChoiState { n: self.n, rho, pauli_vector: pv }
    }

    /// E(|+⟩⟨+|^⊗n), the n-qubit state carrying all the magic of a diagonal
    /// channel.
    pub fn on_plus(&self) -> CMat {
        let dim = 1usize << self.n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let v = vec![amp; dim];
        self.apply(&outer(&v, &v))
    }
}

#[derive(Clone, Debug)]
pub struct ChoiState {
    pub n: usize,
    /// 4ⁿ×4ⁿ density matrix on AB.
    pub rho: CMat,
    /// All 16ⁿ Pauli expectations ⟨P_l ⊗ P_m⟩ in catalogue index order.
    pub pauli_vector: Vec<f64>,
}

impl ChoiState {
    /// Hermitian, unit trace, PSD within ε_mat.
    pub fn validate(&self) -> Result<()> {
        if !crate::linalg::is_hermitian(&self.rho, EPS_MAT) {
            return Err(Error::Parse("Choi state not Hermitian".into()));
        }
        if (trace(&self.rho).re - 1.0).abs() > EPS_MAT {
            return Err(Error::Parse("Choi state trace ≠ 1".into()));
        }
        let (vals, _) = hermitian_eigen(&self.rho)?;
        if vals[0] < -EPS_MAT {
            return Err(Error::Parse(format!("Choi state not PSD (λmin = {})", vals[0])));
        }
        Ok(())
    }

    /// Tr_A(Φ) = 1/2ⁿ within tolerance ⇔ the source channel is TP.
    pub fn is_tp(&self, tol: f64) -> bool {
        let traced: Vec<usize> = (0..self.n).collect(); // A = first n qubits
        let marginal = partial_trace(&self.rho, 2 * self.n, &traced);
        let dim = 1usize << self.n;
        let target = identity(dim).mapv(|z| z / dim as f64);
        max_abs_diff(&marginal, &target) <= tol
    }
}

/// Both sides of the Choi trace identity Tr[A E(ρ)] = 2ⁿ Tr[Φ_E (A⊗ρᵀ)],
/// returned for self-testing.
pub fn cj_trace_identity_check(ch: &KrausChannel, a: &CMat, rho: &CMat) -> (f64, f64) {
    let lhs = trace(&a.dot(&ch.apply(rho))).re;
    let phi = ch.choi();
    let rho_t = rho.t().to_owned();
    let rhs = (1usize << ch.n) as f64 * trace(&phi.rho.dot(&kron(a, &rho_t))).re;
    (lhs, rhs)
}

// ---------------------------------------------------------------------------
// Builder zoo
// ---------------------------------------------------------------------------

fn mat1(rows: [[Complex64; 2]; 2]) -> CMat {
    Array2::from_shape_vec((2, 2), rows.concat()).unwrap()
}

pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parse(format!("damping probability {p} outside [0,1]")));
    }
    let k1 = mat1([
        [cone(), czero()],
        [czero(), Complex64::new((1.0 - p).sqrt(), 0.0)],
    ]);
    let k2 = mat1([
        [czero(), Complex64::new(p.sqrt(), 0.0)],
        [czero(), czero()],
    ]);
    KrausChannel::new(1, vec![k1, k2])
}

/// exp(iZθ) = diag(e^{iθ}, e^{−iθ}).
pub fn z_rotation(theta: f64) -> KrausChannel {
    let u = mat1([
        [Complex64::from_polar(1.0, theta), czero()],
        [czero(), Complex64::from_polar(1.0, -theta)],
    ]);
    KrausChannel::from_unitary(u).unwrap()
}

/// exp(iXθ) = cosθ·1 + i sinθ·X.
pub fn x_rotation(theta: f64) -> KrausChannel {
    let c = Complex64::new(theta.cos(), 0.0);
    let is = Complex64::new(0.0, theta.sin());
    let u = mat1([[c, is], [is, c]]);
    KrausChannel::from_unitary(u).unwrap()
}

pub fn t_gate() -> KrausChannel {
    let u = mat1([
        [cone(), czero()],
        [czero(), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
    ]);
    KrausChannel::from_unitary(u).unwrap()
}

/// M_{t,n} = diag(e^{iπ/2^t}, 1, …, 1): the phase sits on |0…0⟩, which is
/// Clifford-equivalent to the textbook multicontrol gate phasing |1…1⟩.
pub fn multicontrol_phase(t: u32, n: usize) -> Result<KrausChannel> {
    if n == 0 {
        return Err(Error::Parse("multicontrol_phase needs n ≥ 1".into()));
    }
    let dim = 1usize << n;
    let mut u = identity(dim);
    u[[0, 0]] = Complex64::from_polar(1.0, std::f64::consts::PI / (1u64 << t) as f64);
    KrausChannel::from_unitary(u)
}

/// Reset to the ±1 eigenstate of a Pauli axis: ρ ↦ |s⟩⟨s|.
pub fn pauli_reset(axis: char, sign: i8) -> Result<KrausChannel> {
    let s = 1.0 / 2f64.sqrt();
    let v: [Complex64; 2] = match (axis, sign) {
        ('Z', 1) => [cone(), czero()],
        ('Z', -1) => [czero(), cone()],
        ('X', 1) => [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        ('X', -1) => [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ('Y', 1) => [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
        ('Y', -1) => [Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
        _ => return Err(Error::Parse(format!("bad reset axis {axis}/{sign}"))),
    };
    let bra0 = [cone(), czero()];
    let bra1 = [czero(), cone()];
    KrausChannel::new(1, vec![outer(&v, &bra0), outer(&v, &bra1)])
}

/// Λ_H: Z-measurement followed by a Hadamard conditioned on the |1⟩ outcome;
/// Kraus {|0⟩⟨0|, |−⟩⟨1|}.
pub fn hadamard_conditional() -> KrausChannel {
    let s = 1.0 / 2f64.sqrt();
    let zero = [cone(), czero()];
    let one = [czero(), cone()];
    let minus = [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)];
    KrausChannel::new(1, vec![outer(&zero, &zero), outer(&minus, &one)]).unwrap()
}

/// |T⟩ = T|+⟩ and its orthogonal complement.
pub fn t_state() -> [Complex64; 2] {
    let s = 1.0 / 2f64.sqrt();
    [
        Complex64::new(s, 0.0),
        Complex64::from_polar(s, std::f64::consts::FRAC_PI_4),
    ]
}

pub fn t_perp_state() -> [Complex64; 2] {
    let s = 1.0 / 2f64.sqrt();
    [
        Complex64::new(s, 0.0),
        Complex64::from_polar(s, std::f64::consts::FRAC_PI_4 + std::f64::consts::PI),
    ]
}

/// E_T: measurement in the T basis; Kraus {|0⟩⟨T|, |1⟩⟨T_⊥|}.
pub fn measure_t() -> KrausChannel {
    let zero = [cone(), czero()];
    let one = [czero(), cone()];
    KrausChannel::new(1, vec![outer(&zero, &t_state()), outer(&one, &t_perp_state())]).unwrap()
}

/// diag(e^{iθ_x}) for x = 0..2ⁿ−1.
pub fn diagonal_unitary(phases: &[f64]) -> Result<KrausChannel> {
    let dim = phases.len();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::Parse("diagonal_unitary needs 2ⁿ phases".into()));
    }
    let mut u = Array2::from_elem((dim, dim), czero());
    for (i, th) in phases.iter().enumerate() {
        u[[i, i]] = Complex64::from_polar(1.0, *th);
    }
    KrausChannel::from_unitary(u)
}

/// Dense unitary of a single Clifford gate on n qubits.
pub fn gate_unitary(g: Gate, n: usize) -> CMat {
    let dim = 1usize << n;
    let bitpos = |q: usize| n - 1 - q;
    let mut m = Array2::from_elem((dim, dim), czero());
    match g {
        Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
            let s = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
            let u: [[Complex64; 2]; 2] = match g {
                Gate::H(_) => [[s, s], [s, -s]],
                Gate::S(_) => [[cone(), czero()], [czero(), Complex64::new(0.0, 1.0)]],
                Gate::Sdg(_) => [[cone(), czero()], [czero(), Complex64::new(0.0, -1.0)]],
                Gate::X(_) => [[czero(), cone()], [cone(), czero()]],
                Gate::Y(_) => [
                    [czero(), Complex64::new(0.0, -1.0)],
                    [Complex64::new(0.0, 1.0), czero()],
                ],
                Gate::Z(_) => [[cone(), czero()], [czero(), -cone()]],
                _ => unreachable!(),
            };
            let bp = bitpos(q);
            for col in 0..dim {
                let cb = (col >> bp) & 1;
                for rb in 0..2 {
                    if u[rb][cb] != czero() {
                        m[[(col & !(1 << bp)) | (rb << bp), col]] = u[rb][cb];
                    }
                }
            }
        }
        Gate::Cnot(c, t) => {
            let (cb, tb) = (bitpos(c), bitpos(t));
            for col in 0..dim {
                let row = if (col >> cb) & 1 == 1 { col ^ (1 << tb) } else { col };
                m[[row, col]] = cone();
            }
        }
        Gate::Cz(a, b) => {
            let (ab, bb) = (bitpos(a), bitpos(b));
            for col in 0..dim {
                let s = if (col >> ab) & 1 == 1 && (col >> bb) & 1 == 1 {
                    -cone()
                } else {
                    cone()
                };
                m[[col, col]] = s;
            }
        }
        Gate::Swap(a, b) => {
            let (ab, bb) = (bitpos(a), bitpos(b));
            for col in 0..dim {
                let x = (col >> ab) & 1;
                let y = (col >> bb) & 1;
                m[[(col & !(1 << ab) & !(1 << bb)) | (y << ab) | (x << bb), col]] = cone();
            }
        }
    }
    m
}

/// Unitary channel from a Clifford gate list (applied in order).
pub fn clifford_unitary(gates: &[Gate], n: usize) -> Result<KrausChannel> {
    let mut u = identity(1 << n);
    for g in gates {
        u = gate_unitary(*g, n).dot(&u);
    }
    KrausChannel::from_unitary(u)
}

/// Random CPTP channel: Ginibre Kraus candidates whitened by S^{−1/2}.
pub fn random_channel(rng: &mut impl Rng, n: usize, kraus_count: usize) -> KrausChannel {
    let dim = 1usize << n;
    let mut gs: Vec<CMat> = Vec::with_capacity(kraus_count);
    for _ in 0..kraus_count {
        let mut g = Array2::from_elem((dim, dim), czero());
        for i in 0..dim {
            for j in 0..dim {
                // Box–Muller standard normals.
                let u1: f64 = rng.gen::<f64>().max(1e-12);
                let u2: f64 = rng.gen();
                let r = (-2.0 * u1.ln()).sqrt();
                g[[i, j]] = Complex64::new(
                    r * (2.0 * std::f64::consts::PI * u2).cos(),
                    r * (2.0 * std::f64::consts::PI * u2).sin(),
                );
            }
        }
        gs.push(g);
    }
    let mut s = Array2::from_elem((dim, dim), czero());
    for g in &gs {
        s = s + dagger(g).dot(g);
    }
    let (vals, v) = hermitian_eigen(&s).unwrap();
    let mut d = Array2::from_elem((dim, dim), czero());
    for i in 0..dim {
        d[[i, i]] = Complex64::new(1.0 / vals[i].sqrt(), 0.0);
    }
    let s_inv_sqrt = v.dot(&d).dot(&dagger(&v));
    let kraus: Vec<CMat> = gs.iter().map(|g| g.dot(&s_inv_sqrt)).collect();
    KrausChannel::new(n, kraus).unwrap()
}

// ---------------------------------------------------------------------------
// JSON interface
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelJson {
    Named {
        name: String,
        #[serde(default)]
        params: serde_json::Map<String, serde_json::Value>,
        #[serde(default)]
        n: Option<usize>,
    },
    Kraus {
        n: usize,
        /// ops[k][row][col] = [re, im]
        ops: Vec<Vec<Vec<[f64; 2]>>>,
    },
}

fn param_f64(params: &serde_json::Map<String, serde_json::Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::Parse(format!("missing numeric parameter \"{key}\"")))
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let spec: ChannelJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel JSON: {e}")))?;
    channel_from_spec(&spec)
}

pub fn channel_from_spec(spec: &ChannelJson) -> Result<KrausChannel> {
    match spec {
        ChannelJson::Named { name, params, n } => match name.as_str() {
            "identity" => Ok(KrausChannel::identity(n.unwrap_or(1))),
            "amplitude_damping" => amplitude_damping(param_f64(params, "p")?),
            "z_rotation" => Ok(z_rotation(param_f64(params, "theta")?)),
            "x_rotation" => Ok(x_rotation(param_f64(params, "theta")?)),
            "t_gate" => Ok(t_gate()),
            "multicontrol_phase" => {
                let t = param_f64(params, "t")? as u32;
                let nn = n.ok_or_else(|| Error::Parse("multicontrol_phase needs n".into()))?;
                multicontrol_phase(t, nn)
            }
            "pauli_reset" => {
                let axis = params
                    .get("axis")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| Error::Parse("pauli_reset needs axis".into()))?;
                let sign = params.get("sign").and_then(|v| v.as_i64()).unwrap_or(1);
                pauli_reset(
                    axis.chars().next().unwrap_or('Z').to_ascii_uppercase(),
                    sign as i8,
                )
            }
            "hadamard_conditional" => Ok(hadamard_conditional()),
            "measure_t" => Ok(measure_t()),
            "diagonal_unitary" => {
                let phases: Vec<f64> = params
                    .get("phases")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::Parse("diagonal_unitary needs phases".into()))?
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| Error::Parse("bad phase".into())))
                    .collect::<Result<_>>()?;
                diagonal_unitary(&phases)
            }
            "clifford_unitary" => {
                let nn = n.ok_or_else(|| Error::Parse("clifford_unitary needs n".into()))?;
                let gates = parse_gate_list(
                    params
                        .get("gates")
                        .ok_or_else(|| Error::Parse("clifford_unitary needs gates".into()))?,
                )?;
                clifford_unitary(&gates, nn)
            }
            other => Err(Error::Parse(format!("unknown named channel \"{other}\""))),
        },
        ChannelJson::Kraus { n, ops } => {
            let dim = 1usize << n;
            let kraus: Vec<CMat> = ops
                .iter()
                .map(|op| {
                    if op.len() != dim || op.iter().any(|r| r.len() != dim) {
                        return Err(Error::Parse("Kraus matrix shape mismatch".into()));
                    }
                    let mut m = Array2::from_elem((dim, dim), czero());
                    for (i, row) in op.iter().enumerate() {
                        for (j, [re, im]) in row.iter().enumerate() {
                            m[[i, j]] = Complex64::new(*re, *im);
                        }
                    }
                    Ok(m)
                })
                .collect::<Result<_>>()?;
            let ch = KrausChannel::new(*n, kraus)?;
            ch.require_cptp()?;
            Ok(ch)
        }
    }
}

fn parse_gate_list(v: &serde_json::Value) -> Result<Vec<Gate>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("gates must be an array".into()))?;
    arr.iter()
        .map(|g| {
            let parts = g
                .as_array()
                .ok_or_else(|| Error::Parse("gate entry must be [name, qubits…]".into()))?;
            let name = parts
                .first()
                .and_then(|x| x.as_str())
                .ok_or_else(|| Error::Parse("gate name missing".into()))?;
            let q = |i: usize| -> Result<usize> {
                parts
                    .get(i)
                    .and_then(|x| x.as_u64())
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Parse(format!("gate {name} missing qubit {i}")))
            };
            Ok(match name.to_ascii_lowercase().as_str() {
                "h" => Gate::H(q(1)?),
                "s" => Gate::S(q(1)?),
                "sdg" => Gate::Sdg(q(1)?),
                "x" => Gate::X(q(1)?),
                "y" => Gate::Y(q(1)?),
                "z" => Gate::Z(q(1)?),
                "cnot" | "cx" => Gate::Cnot(q(1)?, q(2)?),
                "cz" => Gate::Cz(q(1)?, q(2)?),
                "swap" => Gate::Swap(q(1)?, q(2)?),
                other => return Err(Error::Parse(format!("unknown gate \"{other}\""))),
            })
        })
        .collect()
}

/// Appendix-style test channels used across the test suites.
pub mod zoo {
    use super::*;

    /// E₁ = {|0⟩⟨0|, |0⟩⟨1|}: reset to |0⟩ (same as pauli_reset('Z', +1)).
    pub fn e1() -> KrausChannel {
        pauli_reset('Z', 1).unwrap()
    }

    /// E₂ = {|T⟩⟨0|, |1⟩⟨1|}.
    pub fn e2() -> KrausChannel {
        let zero = [cone(), czero()];
        let one = [czero(), cone()];
        KrausChannel::new(
            1,
            vec![outer(&t_state(), &zero), outer(&one, &one)],
        )
        .unwrap()
    }
}
