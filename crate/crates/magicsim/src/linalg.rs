//! Small dense complex-matrix helpers used by the channel layer and the
//! reference oracles.  Everything here targets matrices of dimension ≤ 2¹²,
//! with the hot paths (LP columns) living elsewhere.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use ndarray::Array2;
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn identity(dim: usize) -> CMat {
    Array2::from_diag_elem(dim, cone())
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::from_elem((ra * rb, ca * cb), czero());
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == czero() {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

/// Outer product |v⟩⟨w|.
pub fn outer(v: &[Complex64], w: &[Complex64]) -> CMat {
    let mut out = Array2::from_elem((v.len(), w.len()), czero());
    for i in 0..v.len() {
        for j in 0..w.len() {
            out[[i, j]] = v[i] * w[j].conj();
        }
    }
    out
}

/// Partial trace over the qubits in `traced` (qubit 0 = most significant
/// bit of the basis index; `n` total qubits).
pub fn partial_trace(rho: &CMat, n: usize, traced: &[usize]) -> CMat {
    let keep: Vec<usize> = (0..n).filter(|q| !traced.contains(q)).collect();
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let mut out = Array2::from_elem((dk, dk), czero());
    let build = |kbits: usize, tbits: usize| -> usize {
        let mut idx = 0usize;
        let mut ki = 0usize;
        let mut ti = 0usize;
        for q in 0..n {
            idx <<= 1;
            if keep.contains(&q) {
                idx |= (kbits >> (keep.len() - 1 - ki)) & 1;
                ki += 1;
            } else {
                idx |= (tbits >> (traced.len() - 1 - ti)) & 1;
                ti += 1;
            }
        }
        idx
    };
    for i in 0..dk {
        for j in 0..dk {
            let mut s = czero();
            for t in 0..dt {
                s += rho[[build(i, t), build(j, t)]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    max_abs_diff(a, &dagger(a)) <= tol
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.  Returns (eigenvalues ascending, unitary V with columns the
/// eigenvectors): A = V diag(λ) V†.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Parse("eigen: matrix not square".into()));
    }
    if !is_hermitian(a, 1e-9) {
        return Err(Error::Parse("eigen: matrix not Hermitian".into()));
    }
    let mut m = a.clone();
    let mut v = identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[[p, q]].norm());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.norm() < 1e-16 {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let phi = apq.arg();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                let eip = Complex64::from_polar(1.0, phi);
                // J = diag(1, e^{−iφ})·R(θ): J[p,p]=c, J[p,q]=−s,
                // J[q,p]=s·e^{−iφ}, J[q,q]=c·e^{−iφ}.  A ← J† A J, V ← V J.
                for i in 0..n {
                    let aip = m[[i, p]];
                    let aiq = m[[i, q]];
                    m[[i, p]] = aip * c + aiq * s * eip.conj();
                    m[[i, q]] = -aip * s + aiq * c * eip.conj();
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * c + viq * s * eip.conj();
                    v[[i, q]] = -vip * s + viq * c * eip.conj();
                }
                for j in 0..n {
                    let apj = m[[p, j]];
                    let aqj = m[[q, j]];
                    m[[p, j]] = apj * c + aqj * s * eip;
                    m[[q, j]] = -apj * s + aqj * c * eip;
                }
            }
        }
    }
    // Sort ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.partial_cmp(&m[[j, j]].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[[i, i]].re).collect();
    let mut vv = Array2::from_elem((n, n), czero());
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vv[[r, new]] = v[[r, old]];
        }
    }
    Ok((vals, vv))
}

/// Smallest eigenvalue of a Hermitian matrix (for PSD checks).
pub fn min_eigenvalue(a: &CMat) -> Result<f64> {
    Ok(hermitian_eigen(a)?.0[0])
}

/// Tr(Pρ) for one Pauli string, using P's one-non-zero-per-column
/// structure (ρ Hermitian, any register size).
pub fn pauli_expectation(rho: &CMat, p: &PauliString) -> f64 {
    let n = p.n;
    let dim = 1usize << n;
    assert_eq!(rho.nrows(), dim);
    let mut xmask = 0usize;
    let mut zmask = 0usize;
    for q in 0..n {
        if (p.x >> q) & 1 == 1 {
            xmask |= 1 << (n - 1 - q);
        }
        if (p.z >> q) & 1 == 1 {
            zmask |= 1 << (n - 1 - q);
        }
    }
    let phase = match p.e & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut acc = czero();
    for b in 0..dim {
        let sgn = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += phase * sgn * rho[[b, b ^ xmask]];
    }
    acc.re
}

/// All 4ⁿ Pauli expectations Tr(P_idx ρ) of a Hermitian ρ, in the catalogue
/// index order.  Exploits P's one-non-zero-per-column structure.
pub fn pauli_vector(rho: &CMat, n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    assert_eq!(rho.nrows(), dim);
    let mut out = Vec::with_capacity(1 << (2 * n));
    for idx in 0..(1usize << (2 * n)) {
        let p = PauliString::from_index(n, idx);
        // Basis-index masks with qubit 0 as the most significant bit.
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        for q in 0..n {
            if (p.x >> q) & 1 == 1 {
                xmask |= 1 << (n - 1 - q);
            }
            if (p.z >> q) & 1 == 1 {
                zmask |= 1 << (n - 1 - q);
            }
        }
        let phase = match p.e & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        // Tr(Pρ) = Σ_b P[b⊕x, b] ρ[b, b⊕x].
        let mut acc = czero();
        for b in 0..dim {
            let sgn = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += phase * sgn * rho[[b, b ^ xmask]];
        }
        out.push(acc.re);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{Gate, StabilizerTableau};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
        let mut a = Array2::from_elem((n, n), czero());
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        let h = &a + &dagger(&a);
        h
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = StdRng::seed_from_u64(1);
        for n in [2usize, 3, 5, 8] {
            let a = random_hermitian(&mut rng, n);
            let (vals, v) = hermitian_eigen(&a).unwrap();
            let mut d = Array2::from_elem((n, n), czero());
            for i in 0..n {
                d[[i, i]] = Complex64::new(vals[i], 0.0);
            }
            let rec = v.dot(&d).dot(&dagger(&v));
            assert!(max_abs_diff(&a, &rec) < 1e-10);
            // V unitary
            assert!(max_abs_diff(&dagger(&v).dot(&v), &identity(n)) < 1e-10);
            // ascending
            for w in vals.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        // ρ = |0⟩⟨0| ⊗ |+⟩⟨+| on 2 qubits; tracing qubit 1 gives |0⟩⟨0|.
        let zero = outer(&[cone(), czero()], &[cone(), czero()]);
        let s = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        let plus = outer(&[s, s], &[s, s]);
        let rho = kron(&zero, &plus);
        let red = partial_trace(&rho, 2, &[1]);
        assert!(max_abs_diff(&red, &zero) < 1e-12);
        let red2 = partial_trace(&rho, 2, &[0]);
        assert!(max_abs_diff(&red2, &plus) < 1e-12);
    }

    #[test]
    fn pauli_vector_matches_naive() {
        let bell = StabilizerTableau::zero_state(2)
            .apply(Gate::H(0))
            .apply(Gate::Cnot(0, 1));
        let v = bell.to_dense().unwrap();
        let rho = outer(&v, &v);
        let pv = pauli_vector(&rho, 2);
        assert_eq!(pv.len(), 16);
        // ⟨1⟩ = 1, ⟨XX⟩ = ⟨ZZ⟩ = 1, ⟨YY⟩ = −1, rest 0.
        for (idx, val) in pv.iter().enumerate() {
            let p = PauliString::from_index(2, idx);
            let expect = match p.render().as_str() {
                "+II" | "+XX" | "+ZZ" => 1.0,
                "+YY" => -1.0,
                _ => 0.0,
            };
            assert!((val - expect).abs() < 1e-12, "idx {idx}: {val} vs {expect}");
        }
        // Against a dense matrix-product oracle.
        for idx in 0..16 {
            let p = PauliString::from_index(2, idx);
            let pd = p.dense();
            let mut tr = czero();
            for i in 0..4 {
                for j in 0..4 {
                    tr += Complex64::from(pd[i * 4 + j]) * rho[[j, i]];
                }
            }
            assert!((tr.re - pv[idx]).abs() < 1e-12);
        }
    }
}
