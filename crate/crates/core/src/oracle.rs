//! Desk-scale validation of the spectral entropy formula.
//!
//! The spin-chain reduced density matrix ρ_N is reconstructed without
//! touching the Toeplitz eigensolver path: every Pauli word is mapped
//! through the finite Jordan–Wigner transform to a Majorana monomial, the
//! monomial's expectation is a Pfaffian of the Majorana covariance (odd
//! monomials vanish identically under the even-part extension), and
//! ρ_N = 2^{−N} Σ_P ⟨P⟩·P. The entropy of ρ_N is then compared against
//! Σ η(λ_i(Q_N)).
//!
//! Conventions, fixed and tested as operator identities:
//!   c_k = (Π_{m<k} σ₃^m)·(σ₁^k − iσ₂^k)/2, so σ₃^k = 2c_k†c_k − 1,
//!   m_{2k} = c_k + c_k†,  m_{2k+1} = i(c_k − c_k†),
//!   ⟨m_a m_b⟩ = δ_ab + i·Γ_ab.

use num_complex::Complex64;

use crate::eigen::jacobi_hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::report::OracleReport;
use crate::toeplitz::{entropy, SymbolCoefficients};

/// Covariance construction cap.
pub const MAX_COVARIANCE_SITES: usize = 16;

/// Density-matrix reconstruction cap (4^N Pauli words).
pub const MAX_DENSITY_SITES: usize = 8;

/// Single-site Pauli symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A word of Pauli symbols, one per site.
pub type PauliString = Vec<Pauli>;

/// Real antisymmetric 2N×2N Majorana covariance Γ.
#[derive(Debug, Clone)]
pub struct MajoranaCovariance {
    sites: usize,
    gamma: Vec<f64>,
}

impl MajoranaCovariance {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.gamma[a * 2 * self.sites + b]
    }
}

/// Γ from the two-point block Q_jk = q_{j−k}:
/// Γ_{2j,2k} = Γ_{2j+1,2k+1} = 2·Im Q_jk, Γ_{2j,2k+1} = 2·Re Q_jk − δ_jk,
/// antisymmetric by construction.
pub fn majorana_covariance(coeffs: &SymbolCoefficients, n: usize) -> Result<MajoranaCovariance> {
    if n == 0 || n > MAX_COVARIANCE_SITES {
        return Err(Error::InvalidInput(format!(
            "covariance needs 1 <= N <= {MAX_COVARIANCE_SITES}, got {n}"
        )));
    }
    if n > coeffs.k_max() + 1 {
        return Err(Error::InsufficientCoefficients { need: n - 1, have: coeffs.k_max() });
    }
    let dim = 2 * n;
    let mut gamma = vec![0.0f64; dim * dim];
    for j in 0..n {
        for k in 0..n {
            let q = coeffs.q(j as i64 - k as i64);
            let delta = if j == k { 1.0 } else { 0.0 };
            gamma[(2 * j) * dim + 2 * k] = 2.0 * q.im;
            gamma[(2 * j + 1) * dim + 2 * k + 1] = 2.0 * q.im;
            gamma[(2 * j) * dim + 2 * k + 1] = 2.0 * q.re - delta;
            gamma[(2 * j + 1) * dim + 2 * k] = delta - 2.0 * q.re;
        }
    }
    Ok(MajoranaCovariance { sites: n, gamma })
}

/// Pfaffian of a real antisymmetric matrix by skew-symmetric elimination
/// with row/column pivoting. Pf(A)² = det(A); 0 is a valid value.
pub fn pfaffian(dim: usize, a: &[f64]) -> f64 {
    assert_eq!(a.len(), dim * dim, "matrix buffer size mismatch");
    if dim % 2 == 1 {
        return 0.0;
    }
    if dim == 0 {
        return 1.0;
    }
    let mut m = a.to_vec();
    let mut pf = 1.0f64;
    let at = |m: &Vec<f64>, i: usize, j: usize| m[i * dim + j];
    for k in (0..dim).step_by(2) {
        // pivot: largest |A[k][p]| for p > k
        let mut p = k + 1;
        let mut best = at(&m, k, k + 1).abs();
        for cand in (k + 2)..dim {
            let v = at(&m, k, cand).abs();
            if v > best {
                best = v;
                p = cand;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if p != k + 1 {
            // swap rows and columns p <-> k+1; each pair swap flips the sign
            for j in 0..dim {
                m.swap((k + 1) * dim + j, p * dim + j);
            }
            for i in 0..dim {
                m.swap(i * dim + (k + 1), i * dim + p);
            }
            pf = -pf;
        }
        let pivot = at(&m, k, k + 1);
        pf *= pivot;
        // skew Schur complement on the trailing block
        for i in (k + 2)..dim {
            for j in (k + 2)..dim {
                let upd = (at(&m, k, i) * at(&m, k + 1, j) - at(&m, k, j) * at(&m, k + 1, i))
                    / pivot;
                m[i * dim + j] -= upd;
            }
        }
    }
    pf
}

/// Appends Majorana index `j` to a sorted monomial, tracking the sign from
/// anticommutation and m² = 1.
fn monomial_append(indices: &mut Vec<usize>, phase: &mut Complex64, j: usize) {
    let pos = indices.partition_point(|&x| x <= j);
    let transpositions = indices.len() - pos;
    if transpositions % 2 == 1 {
        *phase = -*phase;
    }
    if pos > 0 && indices[pos - 1] == j {
        indices.remove(pos - 1);
    } else {
        indices.insert(pos, j);
    }
}

/// Jordan–Wigner image of a Pauli word as (phase, sorted Majorana indices).
///
/// Site maps: σ₃^k = −i·m_{2k}m_{2k+1},
/// σ₁^k = (−i)^k·(Π_{m<k} m_{2m}m_{2m+1})·m_{2k},
/// σ₂^k = (−i)^k·(Π_{m<k} m_{2m}m_{2m+1})·m_{2k+1}.
pub fn jw_majorana_image(word: &[Pauli]) -> (Complex64, Vec<usize>) {
    let mut phase = Complex64::ONE;
    let mut indices: Vec<usize> = Vec::new();
    let minus_i_pow = |k: usize| -> Complex64 {
        match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    };
    for (k, p) in word.iter().enumerate() {
        match p {
            Pauli::I => {}
            Pauli::Z => {
                phase *= Complex64::new(0.0, -1.0);
                monomial_append(&mut indices, &mut phase, 2 * k);
                monomial_append(&mut indices, &mut phase, 2 * k + 1);
            }
            Pauli::X | Pauli::Y => {
                phase *= minus_i_pow(k);
                for m in 0..k {
                    monomial_append(&mut indices, &mut phase, 2 * m);
                    monomial_append(&mut indices, &mut phase, 2 * m + 1);
                }
                let idx = if *p == Pauli::X { 2 * k } else { 2 * k + 1 };
                monomial_append(&mut indices, &mut phase, idx);
            }
        }
    }
    (phase, indices)
}

/// Expectation of a Pauli word in the state with covariance Γ.
///
/// Odd Majorana monomials return 0 exactly; even ones evaluate to
/// phase·i^p·Pf(Γ restricted to the monomial indices). A residual imaginary
/// part above 1e-8 signals a convention mismatch and is an error.
pub fn pauli_expectation_gamma(word: &[Pauli], gamma: &MajoranaCovariance) -> Result<f64> {
    assert_eq!(word.len(), gamma.sites(), "word length != covariance sites");
    let (phase, indices) = jw_majorana_image(word);
    if indices.len() % 2 == 1 {
        return Ok(0.0);
    }
    let p = indices.len() / 2;
    let sub_dim = indices.len();
    let mut sub = vec![0.0f64; sub_dim * sub_dim];
    for (a, &ia) in indices.iter().enumerate() {
        for (b, &ib) in indices.iter().enumerate() {
            sub[a * sub_dim + b] = gamma.get(ia, ib);
        }
    }
    let pf = pfaffian(sub_dim, &sub);
    let i_pow = |p: usize| -> Complex64 {
        match p % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    };
    let val = phase * i_pow(p) * pf;
    if val.im.abs() > 1e-8 {
        return Err(Error::ImaginaryLeak(val.im));
    }
    Ok(val.re)
}

/// Expectation of a Pauli word for the symbol `coeffs` on `word.len()` sites.
pub fn pauli_expectation(
    word: &[Pauli],
    coeffs: &SymbolCoefficients,
    n: usize,
) -> Result<f64> {
    if word.len() != n {
        return Err(Error::InvalidInput(format!(
            "word length {} != N = {n}",
            word.len()
        )));
    }
    let gamma = majorana_covariance(coeffs, n)?;
    pauli_expectation_gamma(word, &gamma)
}

/// Dense Hermitian 2^N×2^N matrix, row-major.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

/// Applies a Pauli word to basis state `b`: P|b⟩ = coeff·|b'⟩.
/// Site k is bit k of the index; σ₃ = diag(1, −1) on (bit 0, bit 1).
fn pauli_apply(word: &[Pauli], b: usize) -> (Complex64, usize) {
    let mut coeff = Complex64::ONE;
    let mut out = b;
    for (k, p) in word.iter().enumerate() {
        let bit = (b >> k) & 1;
        match p {
            Pauli::I => {}
            Pauli::X => out ^= 1 << k,
            Pauli::Y => {
                out ^= 1 << k;
                coeff *= if bit == 0 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::new(0.0, -1.0)
                };
            }
            Pauli::Z => {
                if bit == 1 {
                    coeff = -coeff;
                }
            }
        }
    }
    (coeff, out)
}

/// ρ_N = 2^{−N} Σ_P ⟨P⟩·P over all 4^N Pauli words.
///
/// Checks Hermiticity, unit trace (1e-12) and positivity (min eigenvalue
/// ≥ −1e-10); a violation signals an inconsistency between the JW
/// convention and the covariance.
pub fn reduced_density_matrix(coeffs: &SymbolCoefficients, n: usize) -> Result<DensityMatrix> {
    if n == 0 || n > MAX_DENSITY_SITES {
        return Err(Error::InvalidInput(format!(
            "density matrix needs 1 <= N <= {MAX_DENSITY_SITES}, got {n}"
        )));
    }
    let gamma = majorana_covariance(coeffs, n)?;
    let dim = 1usize << n;
    let mut rho = vec![Complex64::ZERO; dim * dim];
    let norm = 1.0 / dim as f64;
    let mut word: PauliString = vec![Pauli::I; n];
    let total = 4usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for slot in word.iter_mut() {
            *slot = match c % 4 {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            };
            c /= 4;
        }
        let w = pauli_expectation_gamma(&word, &gamma)?;
        if w == 0.0 {
            continue;
        }
        for b in 0..dim {
            let (coeff, row) = pauli_apply(&word, b);
            rho[row * dim + b] += coeff * (w * norm);
        }
    }
    // validity checks
    let mut trace = Complex64::ZERO;
    let mut herm_dev = 0.0f64;
    for i in 0..dim {
        trace += rho[i * dim + i];
        for j in 0..=i {
            herm_dev = herm_dev.max((rho[i * dim + j] - rho[j * dim + i].conj()).norm());
        }
    }
    if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("density matrix trace = {trace}")));
    }
    if herm_dev > 1e-12 {
        return Err(Error::NotHermitian(herm_dev));
    }
    let evals = jacobi_hermitian_eigenvalues(dim, &rho)?;
    if evals[0] < -1e-10 {
        return Err(Error::NotPositive(evals[0]));
    }
    Ok(DensityMatrix { dim, data: rho })
}

/// Von Neumann entropy −Σ μ ln μ of a density matrix, via the Jacobi
/// route (independent of the Householder/QL solver under test).
pub fn oracle_entropy(rho: &DensityMatrix) -> Result<f64> {
    let evals = jacobi_hermitian_eigenvalues(rho.dim, &rho.data)?;
    Ok(evals
        .iter()
        .map(|&mu| {
            let mu = mu.max(0.0);
            if mu > 1e-15 {
                -mu * mu.ln()
            } else {
                0.0
            }
        })
        .sum())
}

/// Rebuilds c_k as 2^N matrices through the same JW convention and returns
/// max |Tr(ρ c_i† c_j) − Q_ij|: the two-point consistency of ρ with the
/// symbol.
pub fn wick_check(rho: &DensityMatrix, coeffs: &SymbolCoefficients, n: usize) -> Result<f64> {
    let dim = 1usize << n;
    assert_eq!(rho.dim, dim, "density matrix size mismatch");
    // c_k |b> = delta_{bit_k, 0} * (prod_{m<k} (-1)^{bit_m}) * |b with bit_k set>
    let lower = |k: usize, b: usize| -> Option<(f64, usize)> {
        if (b >> k) & 1 == 1 {
            return None;
        }
        let mut sign = 1.0;
        for m in 0..k {
            if (b >> m) & 1 == 1 {
                sign = -sign;
            }
        }
        Some((sign, b | (1 << k)))
    };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            // Tr(rho c_i^dag c_j) = sum_b <b| rho c_i^dag c_j |b>
            let mut acc = Complex64::ZERO;
            for b in 0..dim {
                if let Some((sj, bj)) = lower(j, b) {
                    // c_i^dag |b_j> = delta_{bit_i(bj),1} * sign * |bj without bit i>
                    if (bj >> i) & 1 == 1 {
                        let mut sign = 1.0;
                        for m in 0..i {
                            if (bj >> m) & 1 == 1 {
                                sign = -sign;
                            }
                        }
                        let bi = bj & !(1 << i);
                        acc += rho.data[b * dim + bi] * (sj * sign);
                    }
                }
            }
            let expect = coeffs.q(i as i64 - j as i64);
            worst = worst.max((acc - expect).norm());
        }
    }
    Ok(worst)
}

/// Full oracle run: spectral entropy vs density-matrix entropy, two-point
/// residual, and the positivity margin.
pub fn oracle_report(coeffs: &SymbolCoefficients, n: usize) -> Result<OracleReport> {
    let rho = reduced_density_matrix(coeffs, n)?;
    let s_spectral = entropy(coeffs, n)?;
    let s_oracle = oracle_entropy(&rho)?;
    let wick = wick_check(&rho, coeffs, n)?;
    let evals = jacobi_hermitian_eigenvalues(rho.dim, &rho.data)?;
    Ok(OracleReport {
        n,
        s_spectral,
        s_oracle,
        diff: s_oracle - s_spectral,
        wick_residual: wick,
        psd_min_eig: evals[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalSet;

    fn coeffs_of(raw: &[(f64, f64)], k_max: usize) -> SymbolCoefficients {
        SymbolCoefficients::from_set(&IntervalSet::normalize(raw).unwrap(), k_max)
    }

    #[test]
    fn pfaffian_two_by_two() {
        let a = vec![0.0, 3.5, -3.5, 0.0];
        assert_eq!(pfaffian(2, &a), 3.5);
    }

    #[test]
    fn pfaffian_block_diagonal_product() {
        // direct sum of [[0, a_i], [-a_i, 0]] has Pf = prod a_i
        let vals = [2.0, -0.5, 1.25];
        let dim = 6;
        let mut a = vec![0.0; dim * dim];
        for (i, v) in vals.iter().enumerate() {
            a[(2 * i) * dim + 2 * i + 1] = *v;
            a[(2 * i + 1) * dim + 2 * i] = -*v;
        }
        let expect: f64 = vals.iter().product();
        assert!((pfaffian(dim, &a) - expect).abs() < 1e-14);
    }

    /// O(n!!) cofactor expansion along the first row.
    fn pfaffian_cofactor(dim: usize, a: &[f64]) -> f64 {
        if dim == 0 {
            return 1.0;
        }
        let mut acc = 0.0;
        for j in 1..dim {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let keep: Vec<usize> = (1..dim).filter(|&x| x != j).collect();
            let sub_dim = dim - 2;
            let mut sub = vec![0.0; sub_dim * sub_dim];
            for (r, &ir) in keep.iter().enumerate() {
                for (c, &ic) in keep.iter().enumerate() {
                    sub[r * sub_dim + c] = a[ir * dim + ic];
                }
            }
            acc += sign * a[j] * pfaffian_cofactor(sub_dim, &sub);
        }
        acc
    }

    #[test]
    fn pfaffian_matches_cofactor_oracle() {
        // deterministic pseudo-random antisymmetric 8x8
        let dim = 8;
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..i {
                let v = rnd();
                a[i * dim + j] = v;
                a[j * dim + i] = -v;
            }
        }
        let fast = pfaffian(dim, &a);
        let slow = pfaffian_cofactor(dim, &a);
        assert!((fast - slow).abs() < 1e-12 * slow.abs().max(1.0), "{fast} vs {slow}");
        // Pf^2 = det, via the eigenvalues of the Hermitian i*Gamma
        let h: Vec<Complex64> =
            a.iter().map(|&x| Complex64::new(0.0, x)).collect();
        let evals = jacobi_hermitian_eigenvalues(dim, &h).unwrap();
        let det: f64 = evals.iter().product();
        assert!((fast * fast - det).abs() < 1e-8 * det.abs().max(1.0));
    }

    #[test]
    fn covariance_vacuum_blocks() {
        // K empty: per-site blocks [[0,-1],[1,0]]
        let c = coeffs_of(&[], 4);
        let g = majorana_covariance(&c, 3).unwrap();
        for k in 0..3 {
            assert_eq!(g.get(2 * k, 2 * k + 1), -1.0);
            assert_eq!(g.get(2 * k + 1, 2 * k), 1.0);
        }
        // K full: opposite sign
        let c = coeffs_of(&[(0.0, 1.0)], 4);
        let g = majorana_covariance(&c, 2).unwrap();
        assert_eq!(g.get(0, 1), 1.0);
        // half filling: Gamma = 0 on the diagonal blocks
        let c = coeffs_of(&[(0.0, 0.5)], 4);
        let g = majorana_covariance(&c, 2).unwrap();
        assert_eq!(g.get(0, 1), 0.0);
    }

    #[test]
    fn covariance_is_antisymmetric() {
        let c = coeffs_of(&[(0.1, 0.3), (0.6, 0.75)], 8);
        let g = majorana_covariance(&c, 5).unwrap();
        for a in 0..10 {
            for b in 0..10 {
                assert_eq!(g.get(a, b), -g.get(b, a), "({a},{b})");
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let q0 = 0.3;
        let c = coeffs_of(&[(0.0, q0)], 8);
        let g = majorana_covariance(&c, 4).unwrap();
        // identity word
        let word = vec![Pauli::I; 4];
        assert_eq!(pauli_expectation_gamma(&word, &g).unwrap(), 1.0);
        // sigma_3 at each site: 2 q0 - 1
        for k in 0..4 {
            let mut word = vec![Pauli::I; 4];
            word[k] = Pauli::Z;
            let v = pauli_expectation_gamma(&word, &g).unwrap();
            assert!((v - (2.0 * q0 - 1.0)).abs() < 1e-12, "site {k}: {v}");
        }
        // single sigma_1: odd image, exactly zero
        let mut word = vec![Pauli::I; 4];
        word[2] = Pauli::X;
        assert_eq!(pauli_expectation_gamma(&word, &g).unwrap(), 0.0);
    }

    #[test]
    fn jw_alpha_identities_as_operators() {
        // alpha(sigma3^k) = 2 c_k^dag c_k - 1 and
        // alpha(sigma1^k sigma1^l) = -prod_m (2 c^dag c - 1)(c_k^dag + c_k)(c_l^dag + c_l)
        // must hold exactly as 2^N matrices under the fixed convention.
        let n = 4;
        let dim = 1usize << n;
        // dense c_k
        let c_mat = |k: usize| -> Vec<Complex64> {
            let mut m = vec![Complex64::ZERO; dim * dim];
            for b in 0..dim {
                if (b >> k) & 1 == 0 {
                    let mut sign = 1.0;
                    for t in 0..k {
                        if (b >> t) & 1 == 1 {
                            sign = -sign;
                        }
                    }
                    m[(b | (1 << k)) * dim + b] = Complex64::new(sign, 0.0);
                }
            }
            m
        };
        let dag = |m: &Vec<Complex64>| -> Vec<Complex64> {
            let mut t = vec![Complex64::ZERO; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    t[i * dim + j] = m[j * dim + i].conj();
                }
            }
            t
        };
        let mul = |x: &Vec<Complex64>, y: &Vec<Complex64>| -> Vec<Complex64> {
            let mut t = vec![Complex64::ZERO; dim * dim];
            for i in 0..dim {
                for l in 0..dim {
                    let xv = x[i * dim + l];
                    if xv == Complex64::ZERO {
                        continue;
                    }
                    for j in 0..dim {
                        t[i * dim + j] += xv * y[l * dim + j];
                    }
                }
            }
            t
        };
        let pauli_mat = |word: &[Pauli]| -> Vec<Complex64> {
            let mut m = vec![Complex64::ZERO; dim * dim];
            for b in 0..dim {
                let (coeff, row) = pauli_apply(word, b);
                m[row * dim + b] += coeff;
            }
            m
        };
        let max_diff = |x: &Vec<Complex64>, y: &Vec<Complex64>| -> f64 {
            x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        };
        // number operator identity per site
        for k in 0..n {
            let ck = c_mat(k);
            let nk = mul(&dag(&ck), &ck);
            let mut rhs = vec![Complex64::ZERO; dim * dim];
            for (idx, slot) in rhs.iter_mut().enumerate() {
                let (i, j) = (idx / dim, idx % dim);
                *slot = 2.0 * nk[idx] - if i == j { Complex64::ONE } else { Complex64::ZERO };
            }
            let mut word = vec![Pauli::I; n];
            word[k] = Pauli::Z;
            assert!(max_diff(&pauli_mat(&word), &rhs) < 1e-13, "sigma3 identity at {k}");
        }
        // pair identity for k < l
        for k in 0..n {
            for l in (k + 1)..n {
                let mut prod: Vec<Complex64> = (0..dim * dim)
                    .map(|idx| {
                        if idx / dim == idx % dim {
                            Complex64::ONE
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                for m in k..l {
                    let cm = c_mat(m);
                    let nm = mul(&dag(&cm), &cm);
                    let mut z = vec![Complex64::ZERO; dim * dim];
                    for (idx, slot) in z.iter_mut().enumerate() {
                        let (i, j) = (idx / dim, idx % dim);
                        *slot =
                            2.0 * nm[idx] - if i == j { Complex64::ONE } else { Complex64::ZERO };
                    }
                    prod = mul(&prod, &z);
                }
                let ck = c_mat(k);
                let cl = c_mat(l);
                let xk: Vec<Complex64> =
                    ck.iter().zip(dag(&ck)).map(|(a, b)| a + b).collect();
                let xl: Vec<Complex64> =
                    cl.iter().zip(dag(&cl)).map(|(a, b)| a + b).collect();
                let mut rhs = mul(&mul(&prod, &xk), &xl);
                for v in rhs.iter_mut() {
                    *v = -*v;
                }
                let mut word = vec![Pauli::I; n];
                word[k] = Pauli::X;
                word[l] = Pauli::X;
                assert!(
                    max_diff(&pauli_mat(&word), &rhs) < 1e-13,
                    "sigma1 pair identity at ({k},{l})"
                );
            }
        }
    }

    #[test]
    fn density_matrix_maximally_mixed() {
        // q0 = 1/2 at N = 1 gives rho = I/2
        let c = coeffs_of(&[(0.0, 0.5)], 4);
        let rho = reduced_density_matrix(&c, 1).unwrap();
        assert!((rho.data[0].re - 0.5).abs() < 1e-14);
        assert!((rho.data[3].re - 0.5).abs() < 1e-14);
        assert!(rho.data[1].norm() < 1e-14);
        let s = oracle_entropy(&rho).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_pure_vacuum() {
        // K empty at N = 1: omega(sigma3) = -1, pure projector, entropy 0
        let c = coeffs_of(&[], 4);
        let rho = reduced_density_matrix(&c, 1).unwrap();
        let s = oracle_entropy(&rho).unwrap();
        assert!(s.abs() < 1e-12, "entropy {s}");
        let evals = jacobi_hermitian_eigenvalues(2, &rho.data).unwrap();
        assert!((evals[1] - 1.0).abs() < 1e-12 && evals[0].abs() < 1e-12);
    }

    #[test]
    fn density_matrix_eigenvalues_product_structure() {
        // N = 2, K = [0, 1/2): eigenvalues of rho are products over
        // {lambda_i, 1 - lambda_i} of the two Q_2 eigenvalues
        let c = coeffs_of(&[(0.0, 0.5)], 4);
        let rho = reduced_density_matrix(&c, 2).unwrap();
        let mut got = jacobi_hermitian_eigenvalues(4, &rho.data).unwrap();
        let p = 1.0 / std::f64::consts::PI;
        let (l1, l2) = (0.5 - p, 0.5 + p);
        let mut expect = vec![
            l1 * l2,
            l1 * (1.0 - l2),
            (1.0 - l1) * l2,
            (1.0 - l1) * (1.0 - l2),
        ];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-10, "{g} vs {e}");
        }
    }

    #[test]
    fn parity_odd_words_vanish_exactly() {
        let c = coeffs_of(&[(0.1, 0.4)], 8);
        let n = 3;
        let gamma = majorana_covariance(&c, n).unwrap();
        let mut word = vec![Pauli::I; n];
        for code in 0..4usize.pow(n as u32) {
            let mut cc = code;
            for slot in word.iter_mut() {
                *slot = match cc % 4 {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                };
                cc /= 4;
            }
            let (_, idx) = jw_majorana_image(&word);
            if idx.len() % 2 == 1 {
                assert_eq!(pauli_expectation_gamma(&word, &gamma).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn oracle_matches_spectral_entropy_small() {
        let c = coeffs_of(&[(0.0, 0.5)], 8);
        for n in 1..=4 {
            let rep = oracle_report(&c, n).unwrap();
            assert!(
                rep.diff.abs() < 1e-8,
                "N={n}: spectral {} vs oracle {}",
                rep.s_spectral,
                rep.s_oracle
            );
            assert!(rep.wick_residual < 1e-10, "N={n}: wick {}", rep.wick_residual);
            assert!(rep.psd_min_eig > -1e-10);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let c = coeffs_of(&[(0.0, 0.5)], 20);
        assert!(reduced_density_matrix(&c, 9).is_err());
        assert!(majorana_covariance(&c, 17).is_err());
    }
}
