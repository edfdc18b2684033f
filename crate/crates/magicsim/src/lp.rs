//! Self-contained linear programming: a two-phase revised simplex over
//! equality constraints `A x = b, x ≥ 0`, with columns delivered by an
//! oracle so that very wide problems (the 2.4M-column stabiliser catalogue
//! at n = 5) can stream instead of materialising A.
//!
//! Anti-cycling: Dantzig pricing by default, switching to Bland's rule after
//! a run of non-improving iterations, which guarantees termination on the
//! degenerate polytopes these robustness programmes produce.  The basis
//! inverse is kept dense with rank-1 updates and periodic refactorisation.

use crate::error::{Error, Result};

/// Feasibility / duality tolerance used across the optimisation layer.
pub const EPS_LP: f64 = 1e-7;

/// Pivot magnitude below which a column entry is treated as zero.
const TOL_PIVOT: f64 = 1e-9;

/// Non-improving iterations before falling back to Bland's rule.
const STALL_LIMIT: usize = 60;

/// Rebuild the basis inverse from scratch every this many pivots.
const REFACTOR_EVERY: usize = 120;

/// Columns served on demand.  `column` pushes (row, value) pairs for column
/// `j`; `cost` is the objective coefficient of `x_j`.
pub trait ColumnOracle: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>);
    fn cost(&self, j: usize) -> f64;
}

/// Fully materialised problem: sparse columns plus costs.
pub struct DenseColumns {
    pub nrows: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub costs: Vec<f64>,
}

impl ColumnOracle for DenseColumns {
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.cols.len()
    }
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.extend_from_slice(&self.cols[j]);
    }
    fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }
}

/// Drop rows that are identically zero across all columns (they carry no
/// information; a non-zero rhs on such a row is an immediate infeasibility).
/// Returns the compressed problem and rhs, or an error.
pub fn compress_rows(problem: &DenseColumns, b: &[f64]) -> Result<(DenseColumns, Vec<f64>)> {
    let mut live = vec![false; problem.nrows];
    for col in &problem.cols {
        for &(r, v) in col {
            if v.abs() > TOL_PIVOT {
                live[r] = true;
            }
        }
    }
    for (r, &keep) in live.iter().enumerate() {
        if !keep && b[r].abs() > EPS_LP {
            return Err(Error::Solver(format!(
                "constraint row {r} is zero for every column but rhs = {}",
                b[r]
            )));
        }
    }
    let remap: Vec<Option<usize>> = {
        let mut next = 0usize;
        live.iter()
            .map(|&keep| {
                if keep {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let nrows = live.iter().filter(|&&k| k).count();
    let cols = problem
        .cols
        .iter()
        .map(|col| {
            col.iter()
                .filter_map(|&(r, v)| remap[r].map(|rr| (rr, v)))
                .collect()
        })
        .collect();
    let rhs = b
        .iter()
        .enumerate()
        .filter(|&(r, _)| live[r])
        .map(|(_, &v)| v)
        .collect();
    Ok((DenseColumns { nrows, cols, costs: problem.costs.clone() }, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Non-zero primal variables (column index, value), basic solution.
    pub x: Vec<(usize, f64)>,
    /// Dual vector y (one entry per constraint row).  For an infeasible
    /// problem this is a Farkas certificate: yᵀa_j ≤ 0 for every column
    /// while yᵀb > 0.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// |cᵀx − yᵀb| at termination (optimal status only).
    pub duality_gap: f64,
}

struct Simplex<'a> {
    oracle: &'a dyn ColumnOracle,
    m: usize,
    n: usize,
    /// rhs with rows flipped so that b ≥ 0.
    b: Vec<f64>,
    row_sign: Vec<f64>,
    /// basis column ids; ids ≥ n are artificials (id − n = row).
    basis: Vec<usize>,
    binv: Vec<f64>, // m×m row-major
    xb: Vec<f64>,
    iterations: usize,
    scratch: Vec<(usize, f64)>,
}

impl<'a> Simplex<'a> {
    fn new(oracle: &'a dyn ColumnOracle, b: &[f64]) -> Simplex<'a> {
        let m = oracle.nrows();
        let row_sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = b.iter().zip(&row_sign).map(|(&v, &s)| v * s).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let basis: Vec<usize> = (0..m).map(|i| oracle.ncols() + i).collect();
        let xb = b.clone();
        Simplex {
            oracle,
            m,
            n: oracle.ncols(),
            b,
            row_sign,
            basis,
            binv,
            xb,
            iterations: 0,
            scratch: Vec::new(),
        }
    }

    /// Add a tiny strictly-positive deterministic jitter to the (flipped)
    /// rhs.  This makes basic solutions generically nondegenerate, which is
    /// what defeats the long degenerate stalls on the ℓ1 programmes: their
    /// rhs vectors are mostly zeros.  Optimality of the final basis does not
    /// depend on b, so the true rhs can be restored afterwards.
    /// Shift b a small step into the column cone: b += Σₖ εₖ a_{jₖ} over m
    /// deterministically chosen columns, εₖ ∈ ε·[1, 2).  Staying inside the
    /// cone keeps feasible problems feasible (positive-only cones included,
    /// where plain rhs jitter would not) while breaking the ties of a
    /// degenerate vertex.  Must be called before any pivots (identity
    /// artificial basis), since rows that go negative are re-flipped.
    fn perturb(&mut self, eps: f64, salt: u64) {
        let mix = |v: u64| -> u64 {
            let mut z = v.wrapping_add(0x9E37_79B9_7F4A_7C15);
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        let mut delta = vec![0.0; self.m];
        for k in 0..self.m {
            let z = mix((k as u64).wrapping_add(salt.wrapping_mul(0xD1B5_4A32_D192_ED03)));
            let j = (z % self.n as u64) as usize;
            let r = 1.0 + (mix(z) as f64 / u64::MAX as f64); // [1, 2)
            for (row, v) in self.col(j) {
                delta[row] += eps * r * v;
            }
        }
        for i in 0..self.m {
            self.b[i] += delta[i];
            if self.b[i] < 0.0 {
                // Keep the artificial start valid: negate the whole row.
                self.b[i] = -self.b[i];
                self.row_sign[i] = -self.row_sign[i];
            }
            self.xb[i] = self.b[i];
        }
    }

    /// Fetch column `j` in sign-flipped row space (artificials are unit
    /// vectors by construction).
    fn col(&mut self, j: usize) -> Vec<(usize, f64)> {
        if j >= self.n {
            return vec![(j - self.n, 1.0)];
        }
        self.scratch.clear();
        self.oracle.column(j, &mut self.scratch);
        self.scratch
            .iter()
            .map(|&(r, v)| (r, v * self.row_sign[r]))
            .collect()
    }

    fn cost(&self, j: usize, phase1: bool) -> f64 {
        if phase1 {
            if j >= self.n { 1.0 } else { 0.0 }
        } else if j >= self.n {
            0.0 // leftover artificial pinned at zero
        } else {
            self.oracle.cost(j)
        }
    }

    /// y = c_Bᵀ B⁻¹.
    fn duals(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = self.cost(bi, phase1);
            if cb != 0.0 {
                for r in 0..m {
                    y[r] += cb * self.binv[i * m + r];
                }
            }
        }
        y
    }

    fn reduced_cost(&mut self, j: usize, y: &[f64], phase1: bool) -> f64 {
        let mut dot = 0.0;
        for &(r, v) in &self.col(j) {
            dot += y[r] * v;
        }
        self.cost(j, phase1) - dot
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        // Assemble B column-major then Gauss-Jordan invert with partial
        // pivoting.
        let mut aug = vec![0.0; m * 2 * m];
        let basis = self.basis.clone();
        for (i, &bi) in basis.iter().enumerate() {
            for &(r, v) in &self.col(bi) {
                aug[r * 2 * m + i] = v;
            }
        }
        for i in 0..m {
            aug[i * 2 * m + m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&a, &b| {
                    aug[a * 2 * m + c].abs().partial_cmp(&aug[b * 2 * m + c].abs()).unwrap()
                })
                .unwrap();
            if aug[piv * 2 * m + c].abs() < TOL_PIVOT {
                return Err(Error::Solver("singular basis during refactorisation".into()));
            }
            if piv != c {
                for k in 0..2 * m {
                    aug.swap(c * 2 * m + k, piv * 2 * m + k);
                }
            }
            let d = aug[c * 2 * m + c];
            for k in 0..2 * m {
                aug[c * 2 * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = aug[r * 2 * m + c];
                    if f != 0.0 {
                        for k in 0..2 * m {
                            aug[r * 2 * m + k] -= f * aug[c * 2 * m + k];
                        }
                    }
                }
            }
        }
        // binv row i corresponds to basis position i: binv = B⁻¹ in the
        // layout binv[i][r] = (B⁻¹)[i][r].
        for i in 0..m {
            for r in 0..m {
                self.binv[i * m + r] = aug[i * 2 * m + m + r];
            }
        }
        // refresh xb = B⁻¹ b
        for i in 0..m {
            let mut s = 0.0;
            for r in 0..m {
                s += self.binv[i * m + r] * self.b[r];
            }
            self.xb[i] = s;
        }
        Ok(())
    }

    /// Run simplex iterations until optimality for the given phase.
    fn optimize(&mut self, phase1: bool) -> Result<()> {
        let m = self.m;
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        let mut cursor = 0usize; // partial-pricing scan position
        loop {
            self.iterations += 1;
            if self.iterations % REFACTOR_EVERY == 0 {
                self.refactor()?;
            }
            let y = self.duals(phase1);
            let bland = stall >= STALL_LIMIT;
            // Entering variable: Dantzig over a partial scan (full scan if
            // nothing negative is found), Bland when stalled.
            let mut enter: Option<(usize, f64)> = None;
            let chunk = if self.n > 200_000 { 50_000 } else { self.n };
            if bland {
                // Bland needs the globally lowest-index improving column;
                // a cursor-offset scan would void the anti-cycling proof.
                cursor = 0;
            }
            let mut scanned = 0usize;
            while scanned < self.n {
                let start = cursor % self.n;
                let end = (start + chunk).min(self.n);
                for j in start..end {
                    if self.basis.contains(&j) {
                        continue;
                    }
                    let rc = self.reduced_cost(j, &y, phase1);
                    if rc < -EPS_LP {
                        if bland {
                            enter = Some((j, rc));
                            break;
                        }
                        if enter.map_or(true, |(_, best)| rc < best) {
                            enter = Some((j, rc));
                        }
                    }
                }
                scanned += end - start;
                cursor = end % self.n;
                if enter.is_some() {
                    break; // found candidates in this chunk
                }
            }
            let Some((jin, _)) = enter else {
                return Ok(()); // optimal for this phase
            };
            // Direction d = B⁻¹ a_j.
            let aj = self.col(jin);
            let mut d = vec![0.0; m];
            for i in 0..m {
                let mut s = 0.0;
                for &(r, v) in &aj {
                    s += self.binv[i * m + r] * v;
                }
                d[i] = s;
            }
            // Ratio test.  In phase 2, artificials pinned at zero may also
            // leave on a negative pivot (a degenerate exchange with θ = 0)
            // so they can never rise above zero; an artificial still
            // carrying value must never leave that way — it would silently
            // break A x = b.
            let mut rmin = f64::INFINITY;
            let mut eligible: Vec<usize> = Vec::new();
            for i in 0..m {
                // The pinning exception is outside Bland's termination
                // proof, so it is disabled while in anti-cycling mode.
                let pinned =
                    !bland && !phase1 && self.basis[i] >= self.n && self.xb[i] <= 1e-9;
                if d[i] > TOL_PIVOT || (pinned && d[i] < -TOL_PIVOT) {
                    eligible.push(i);
                    rmin = rmin.min((self.xb[i] / d[i]).max(0.0));
                }
            }
            if eligible.is_empty() {
                return Err(Error::Solver("unbounded linear programme".into()));
            }
            let mut cand: Vec<usize> = eligible
                .iter()
                .copied()
                .filter(|&i| (self.xb[i] / d[i]).max(0.0) <= rmin + 1e-12)
                .collect();
            let li = if cand.len() == 1 {
                cand[0]
            } else if bland {
                // Bland's rule: lowest basis index among minimum-ratio rows.
                cand.into_iter().min_by_key(|&i| self.basis[i]).unwrap()
            } else if cand.iter().any(|&i| d[i] < 0.0) {
                // Mixed-sign degenerate tie (artificial pinning): fall back
                // to the lowest basis id.
                cand.into_iter().min_by_key(|&i| self.basis[i]).unwrap()
            } else {
                // Lexicographic tie-break: compare the B⁻¹ rows scaled by
                // 1/d_i column by column.  This makes the basic solution
                // vector strictly lex-decrease each pivot, which rules out
                // cycling on degenerate vertices.
                for k in 0..m {
                    if cand.len() == 1 {
                        break;
                    }
                    let best = cand
                        .iter()
                        .map(|&i| self.binv[i * m + k] / d[i])
                        .fold(f64::INFINITY, f64::min);
                    cand.retain(|&i| self.binv[i * m + k] / d[i] <= best + 1e-12);
                }
                cand.into_iter().min_by_key(|&i| self.basis[i]).unwrap()
            };
            let theta = (self.xb[li] / d[li]).max(0.0);
            // Pivot: rank-1 update of B⁻¹ and xb.
            let piv = d[li];
            for r in 0..m {
                self.binv[li * m + r] /= piv;
            }
            for i in 0..m {
                if i != li && d[i].abs() > 0.0 {
                    let f = d[i];
                    for r in 0..m {
                        self.binv[i * m + r] -= f * self.binv[li * m + r];
                    }
                    self.xb[i] -= f * theta;
                    if self.xb[i] < 0.0 && self.xb[i] > -1e-11 {
                        self.xb[i] = 0.0;
                    }
                }
            }
            self.xb[li] = theta;
            self.basis[li] = jin;
            // Stall tracking on the phase objective.
            let obj = self.objective(phase1);
            if obj < last_obj - 1e-12 {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
            if self.iterations % 10_000 == 0 && std::env::var("LP_DEBUG").is_ok() {
                eprintln!(
                    "iter {}: phase{} obj {:.9} stall {}",
                    self.iterations,
                    if phase1 { 1 } else { 2 },
                    obj,
                    stall
                );
            }
            if self.iterations > 200_000 {
                return Err(Error::Solver("simplex iteration limit exceeded".into()));
            }
        }
    }

    /// Optimise, then re-verify optimality against a freshly refactorised
    /// basis inverse (rank-1 updates drift on near-degenerate pivots) and
    /// resume if any improving column remains.
    fn optimize_certified(&mut self, phase1: bool) -> Result<()> {
        for _round in 0..16 {
            self.optimize(phase1)?;
            self.refactor()?;
            // Primal feasibility against the clean basis inverse: a basic
            // value that went genuinely negative means a bad pivot slipped
            // through, and any "optimum" from here would be meaningless.
            if self.xb.iter().any(|&v| v < -1e-7) {
                return Err(Error::Solver("simplex lost primal feasibility".into()));
            }
            let y = self.duals(phase1);
            let mut improving = false;
            for j in 0..self.n {
                if !self.basis.contains(&j) && self.reduced_cost(j, &y, phase1) < -EPS_LP {
                    improving = true;
                    break;
                }
            }
            if !improving {
                return Ok(());
            }
        }
        Err(Error::Solver("simplex failed to certify optimality".into()))
    }

    /// Dual-simplex repair: after the rhs changes under an optimal (hence
    /// dual-feasible) basis, some basic values may go slightly negative.
    /// Drive them out with dual pivots — leaving row with the most negative
    /// value, entering column by the dual ratio test — which preserves
    /// nonnegative reduced costs, so the repaired basis is again optimal.
    /// Returns `false` when the ratio test finds no eligible column or the
    /// pivot budget runs out; the caller falls back to a fresh solve.
    fn dual_repair(&mut self, max_pivots: usize) -> Result<bool> {
        let m = self.m;
        for _ in 0..max_pivots {
            let mut li = usize::MAX;
            let mut worst = -1e-9;
            for (i, &v) in self.xb.iter().enumerate() {
                if v < worst {
                    worst = v;
                    li = i;
                }
            }
            if li == usize::MAX {
                return Ok(true);
            }
            self.iterations += 1;
            if self.iterations % REFACTOR_EVERY == 0 {
                self.refactor()?;
            }
            let y = self.duals(false);
            let row: Vec<f64> = self.binv[li * m..(li + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut alpha = 0.0;
                for &(r, v) in &self.col(j) {
                    alpha += row[r] * v;
                }
                if alpha < -TOL_PIVOT {
                    let rc = self.reduced_cost(j, &y, false).max(0.0);
                    let ratio = rc / -alpha;
                    if best.map_or(true, |(_, br)| ratio < br) {
                        best = Some((j, ratio));
                    }
                }
            }
            let Some((jin, _)) = best else {
                return Ok(false);
            };
            let aj = self.col(jin);
            let mut d = vec![0.0; m];
            for i in 0..m {
                let mut dot = 0.0;
                for &(r, v) in &aj {
                    dot += self.binv[i * m + r] * v;
                }
                d[i] = dot;
            }
            let piv = d[li];
            if piv.abs() < TOL_PIVOT {
                return Ok(false);
            }
            let theta = self.xb[li] / piv;
            for r in 0..m {
                self.binv[li * m + r] /= piv;
            }
            for i in 0..m {
                if i != li && d[i] != 0.0 {
                    let f = d[i];
                    for r in 0..m {
                        self.binv[i * m + r] -= f * self.binv[li * m + r];
                    }
                    self.xb[i] -= f * theta;
                }
            }
            self.xb[li] = theta;
            self.basis[li] = jin;
        }
        Ok(false)
    }

    fn objective(&self, phase1: bool) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, &x)| self.cost(j, phase1) * x)
            .sum()
    }
}

/// Minimise cᵀx subject to A x = b, x ≥ 0 with columns from the oracle.
///
/// Solved first on a perturbed rhs (anti-degeneracy), restoring and
/// re-verifying against the true rhs; falls back to the unperturbed problem
/// when the perturbed run is inconclusive.
pub fn solve_min(oracle: &dyn ColumnOracle, b: &[f64]) -> Result<LpSolution> {
    if b.len() != oracle.nrows() {
        return Err(Error::Solver("rhs length does not match constraint rows".into()));
    }
    let mut iterations = 0usize;
    // Ladder of perturbation sizes and column-choice salts: larger jitters
    // land on better-conditioned vertices when the tiny one stalls, and the
    // restore-and-verify step makes any of them safe to accept.
    for &(eps, salt) in &[(1e-7, 0u64), (1e-5, 1), (1e-4, 2), (1e-3, 3), (0.0, 0)] {
        match solve_attempt(oracle, b, eps, salt, &mut iterations)? {
            Some(sol) => return Ok(sol),
            None => continue,
        }
    }
    unreachable!("eps = 0 attempt either returns a solution or errors")
}

/// One solve at a given perturbation level.  `Ok(None)` means the perturbed
/// attempt was inconclusive (infeasible perturbed rhs, lost feasibility on
/// restore, or iteration limit) and the caller should retry unperturbed.
fn solve_attempt(
    oracle: &dyn ColumnOracle,
    b: &[f64],
    eps: f64,
    salt: u64,
    iterations: &mut usize,
) -> Result<Option<LpSolution>> {
    let perturbed = eps > 0.0;
    let mut s = Simplex::new(oracle, b);
    if perturbed {
        s.perturb(eps, salt);
    }
    let soften = |r: Result<()>, s: &Simplex| -> Result<bool> {
        match r {
            Ok(()) => Ok(true),
            Err(e) if perturbed => {
                if std::env::var("LP_DEBUG").is_ok() {
                    eprintln!("perturbed attempt abandoned after {} iterations: {e}", s.iterations);
                }
                Ok(false)
            }
            Err(e) => Err(e),
        }
    };
    let r = s.optimize_certified(true);
    if !soften(r, &s)? {
        *iterations += s.iterations;
        return Ok(None);
    }
    if s.objective(true) > EPS_LP {
        if perturbed {
            // The perturbation is cone-aligned (b' = b + A w with w ≥ 0), so
            // feasibility of the true system implies feasibility of the
            // perturbed one.  A Farkas certificate y for the perturbed
            // system therefore transfers: verify yᵀa_j ≤ 0 over every real
            // column and yᵀb > 0 against the *true* rhs, and if it holds the
            // true problem is conclusively infeasible.
            let y = s.duals(true);
            let mut cert_viol = 0.0f64;
            for j in 0..s.n {
                if !s.basis.contains(&j) {
                    cert_viol = cert_viol.max(-s.reduced_cost(j, &y, true));
                }
            }
            let ytb_true: f64 =
                y.iter().zip(b).zip(&s.row_sign).map(|((&yi, &bi), &sg)| yi * bi * sg).sum();
            if cert_viol <= 1e-9 && ytb_true >= 1e-5 && ytb_true > 1e8 * cert_viol {
                let duals: Vec<f64> =
                    y.iter().zip(&s.row_sign).map(|(&v, &sg)| v * sg).collect();
                return Ok(Some(LpSolution {
                    status: LpStatus::Infeasible,
                    objective: f64::INFINITY,
                    x: Vec::new(),
                    duals,
                    iterations: *iterations + s.iterations,
                    duality_gap: f64::NAN,
                }));
            }
            // Certificate did not validate against the true rhs: only the
            // unperturbed run decides feasibility.
            if std::env::var("LP_DEBUG").is_ok() {
                let max_rc_viol = cert_viol;
                let max_y = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let live_art =
                    s.basis.iter().zip(&s.xb).filter(|&(&j, &v)| j >= s.n && v > 1e-9).count();
                let min_xb = s.xb.iter().cloned().fold(f64::INFINITY, f64::min);
                // Residual ‖B xb − b‖∞: a large value means the basis is
                // numerically singular and the whole certificate is noise.
                let mut resid = vec![0.0f64; s.m];
                for i in 0..s.m {
                    let bi = s.basis[i];
                    let xv = s.xb[i];
                    for &(r, v) in &s.col(bi) {
                        resid[r] += v * xv;
                    }
                }
                let resid_inf = resid
                    .iter()
                    .zip(&s.b)
                    .map(|(&ax, &bv)| (ax - bv).abs())
                    .fold(0.0f64, f64::max);
                let bdiff = s
                    .b
                    .iter()
                    .zip(b)
                    .zip(&s.row_sign)
                    .map(|((&sb, &tb), &sg)| (sb - tb * sg).abs())
                    .fold(0.0f64, f64::max);
                eprintln!(
                    "perturbed attempt inconclusive: phase-1 objective {:.3e}, max yᵀa_j {:.3e}, max y {:.3e}, live artificials {}, min xb {:.3e}, residual {:.3e}, |b-b_true| {:.3e}",
                    s.objective(true), max_rc_viol, max_y, live_art, min_xb, resid_inf, bdiff
                );
            }
            *iterations += s.iterations;
            return Ok(None);
        }
        // Infeasible: the phase-1 duals are a Farkas certificate in the
        // sign-flipped row space; undo the flips for the caller.
        let y = s.duals(true);
        let duals: Vec<f64> = y.iter().zip(&s.row_sign).map(|(&v, &sg)| v * sg).collect();
        return Ok(Some(LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::INFINITY,
            x: Vec::new(),
            duals,
            iterations: *iterations + s.iterations,
            duality_gap: f64::NAN,
        }));
    }
    let r = s.optimize_certified(false);
    if !soften(r, &s)? {
        *iterations += s.iterations;
        return Ok(None);
    }
    if perturbed {
        // Restore the true rhs (in the current row-sign convention, since
        // perturbation may have re-flipped rows).  Reduced costs are
        // independent of b, so the basis stays dual-feasible (optimal) —
        // but it must also remain primal-feasible, and no leftover
        // artificial may carry value.
        s.b = b.iter().zip(&s.row_sign).map(|(&bv, &sg)| bv * sg).collect();
        s.refactor()?;
        let feasible_now = |s: &Simplex| {
            s.xb.iter().all(|&v| v >= -1e-7)
                && s
                    .basis
                    .iter()
                    .zip(&s.xb)
                    .all(|(&j, &v)| j < s.n || v.abs() <= 1e-7)
        };
        if !feasible_now(&s) {
            // The jitter moved the optimal vertex slightly outside the true
            // feasible region.  The basis is still dual feasible, so a short
            // dual-simplex repair re-achieves primal feasibility at an
            // optimal basis instead of discarding the whole solve.
            let repair = s.dual_repair(2_000).and_then(|done| {
                if done {
                    Ok(())
                } else {
                    Err(Error::Solver("dual repair exhausted".into()))
                }
            });
            let mut ok = false;
            if soften(repair, &s)? && soften(s.refactor(), &s)? && s.xb.iter().all(|&v| v >= -1e-9)
            {
                let r = s.optimize_certified(false);
                ok = soften(r, &s)? && feasible_now(&s);
            }
            if !ok {
                if std::env::var("LP_DEBUG").is_ok() {
                    let min_xb = s.xb.iter().cloned().fold(f64::INFINITY, f64::min);
                    let max_art = s
                        .basis
                        .iter()
                        .zip(&s.xb)
                        .filter(|&(&j, _)| j >= s.n)
                        .map(|(_, &v)| v.abs())
                        .fold(0.0f64, f64::max);
                    eprintln!(
                        "perturbed attempt lost feasibility on restore: min xb {min_xb:.3e}, max artificial {max_art:.3e}"
                    );
                }
                *iterations += s.iterations;
                return Ok(None);
            }
        }
        for v in &mut s.xb {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    let objective = s.objective(false);
    let y = s.duals(false);
    let duals: Vec<f64> = y.iter().zip(&s.row_sign).map(|(&v, &sg)| v * sg).collect();
    let ytb: f64 = duals.iter().zip(b).map(|(&yv, &bv)| yv * bv).sum();
    let x: Vec<(usize, f64)> = s
        .basis
        .iter()
        .zip(&s.xb)
        .filter(|&(&j, &v)| j < s.n && v > 1e-12)
        .map(|(&j, &v)| (j, v))
        .collect();
    Ok(Some(LpSolution {
        status: LpStatus::Optimal,
        objective,
        x,
        duals,
        iterations: *iterations + s.iterations,
        duality_gap: (objective - ytb).abs(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn dense(rows: usize, cols: Vec<Vec<f64>>, costs: Vec<f64>) -> DenseColumns {
        let cols = cols
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .enumerate()
                    .filter(|&(_, v)| v != 0.0)
                    .collect()
            })
            .collect();
        DenseColumns { nrows: rows, cols, costs }
    }

    #[test]
    fn tiny_equality_lp() {
        // min x1 + x2  s.t.  x1 + 2x2 = 4, x1 − x2 = 1  → x = (2,1), obj 3
        let p = dense(
            2,
            vec![vec![1.0, 1.0], vec![2.0, -1.0]],
            vec![1.0, 1.0],
        );
        let sol = solve_min(&p, &[4.0, 1.0]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!(sol.duality_gap < EPS_LP);
        let mut x = [0.0; 2];
        for (j, v) in sol.x {
            x[j] = v;
        }
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_handled() {
        // min x1 + x2  s.t. −x1 = −3 → x1 = 3
        let p = dense(1, vec![vec![-1.0], vec![0.5]], vec![1.0, 1.0]);
        let sol = solve_min(&p, &[-3.0]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_yields_farkas() {
        // x1 = 1 and x1 = 2 simultaneously
        let p = dense(2, vec![vec![1.0, 1.0]], vec![0.0]);
        let b = [1.0, 2.0];
        let sol = solve_min(&p, &b).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        // Farkas: yᵀa_j ≤ tol for all columns, yᵀb > 0
        let ya = sol.duals[0] + sol.duals[1];
        let yb = sol.duals[0] * b[0] + sol.duals[1] * b[1];
        assert!(ya <= EPS_LP, "yᵀa = {ya}");
        assert!(yb > EPS_LP, "yᵀb = {yb}");
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic degenerate vertex: multiple constraints meet at origin.
        let p = dense(
            3,
            vec![
                vec![1.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0],
        );
        let sol = solve_min(&p, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.duality_gap < EPS_LP);
    }

    #[test]
    fn random_feasible_lps_certify_optimality() {
        // Build LPs with a known feasible point; verify strong duality and
        // dual feasibility instead of trusting the primal path.
        let mut rng = StdRng::seed_from_u64(11);
        for _trial in 0..50 {
            let m = rng.gen_range(2..6);
            let n = rng.gen_range(m..m + 8);
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
            let x0: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..2.0) } else { 0.0 })
                .collect();
            let mut b = vec![0.0; m];
            for (j, col) in cols.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    b[r] += v * x0[j];
                }
            }
            let p = dense(m, cols.clone(), costs.clone());
            let sol = solve_min(&p, &b).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            let feas_obj: f64 = costs.iter().zip(&x0).map(|(c, x)| c * x).sum();
            assert!(sol.objective <= feas_obj + 1e-7);
            // dual feasibility: yᵀa_j ≤ c_j
            for (j, col) in cols.iter().enumerate() {
                let ya: f64 = col.iter().zip(&sol.duals).map(|(a, y)| a * y).sum();
                assert!(ya <= costs[j] + 1e-6, "dual infeasible at col {j}");
            }
            assert!(sol.duality_gap < 1e-6);
            // primal reconstruction
            let mut ax = vec![0.0; m];
            for &(j, v) in &sol.x {
                for (r, a) in cols[j].iter().enumerate() {
                    ax[r] += a * v;
                }
            }
            for r in 0..m {
                assert!((ax[r] - b[r]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn row_compression() {
        let p = dense(
            3,
            vec![vec![1.0, 0.0, 2.0], vec![1.0, 0.0, -1.0]],
            vec![1.0, 1.0],
        );
        let (c, b) = compress_rows(&p, &[4.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.nrows, 2);
        // rows after compression: x1 + x2 = 4 and 2x1 − x2 = 1 → obj 4
        let sol = solve_min(&c, &b).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 4.0).abs() < 1e-9);
        // non-zero rhs on a dead row is flagged
        assert!(compress_rows(&p, &[4.0, 0.5, 1.0]).is_err());
    }

    #[test]
    fn l1_split_matches_known_value() {
        // min ‖q‖₁ s.t. Σq_j v_j = t via the [V −V] split, tiny instance:
        // v₁=(1,1), v₂=(1,−1), t=(1,0) → q = (½,½), ℓ1 = 1.
        let p = dense(
            2,
            vec![
                vec![1.0, 1.0],
                vec![1.0, -1.0],
                vec![-1.0, -1.0],
                vec![-1.0, 1.0],
            ],
            vec![1.0; 4],
        );
        let sol = solve_min(&p, &[1.0, 0.0]).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }
}
