//! Dense complex linear algebra for the coupled qubit-memory pair.
//!
//! Everything in the crate uses the fixed product-basis order
//!
//! ```text
//! index 0: |0_q 0_m>    index 1: |0_q 1_m>
//! index 2: |1_q 0_m>    index 3: |1_q 1_m>
//! ```
//!
//! (qubit is the first tensor factor, so index = 2*q + m). The
//! one-excitation subspace is spanned by indices 2 and 1, in *subspace
//! order* (|1_q 0_m>, |0_q 1_m>).
//!
//! Superoperators use column-stacking vectorization: `vec(rho)[i + n*j] =
//! rho[i, j]`, so `vec(A rho B) = (B^T (x) A) vec(rho)`.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;

/// Dimension of the coupled pair Hilbert space.
pub const DIM: usize = 4;
/// Basis index of |0_q 0_m>.
pub const IDX_GROUND: usize = 0;
/// Basis index of |0_q 1_m>.
pub const IDX_MEM: usize = 1;
/// Basis index of |1_q 0_m>.
pub const IDX_QUBIT: usize = 2;
/// Basis index of |1_q 1_m>.
pub const IDX_DOUBLE: usize = 3;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    Array2::from_diag_elem(n, cr(1.0))
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product, row-major block convention:
/// `out[[i*p + k, j*q + l]] = a[[i, j]] * b[[k, l]]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

/// 2x2 Pauli matrices in the (|0>, |1>) basis, sigma_z = diag(1, -1).
pub fn pauli_i() -> CMat {
    eye(2)
}

pub fn pauli_x() -> CMat {
    Array2::from_shape_vec((2, 2), vec![cr(0.0), cr(1.0), cr(1.0), cr(0.0)]).unwrap()
}

pub fn pauli_y() -> CMat {
    Array2::from_shape_vec((2, 2), vec![cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]).unwrap()
}

pub fn pauli_z() -> CMat {
    Array2::from_shape_vec((2, 2), vec![cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]).unwrap()
}

/// Lowering operator |0><1|.
pub fn sigma_minus() -> CMat {
    Array2::from_shape_vec((2, 2), vec![cr(0.0), cr(1.0), cr(0.0), cr(0.0)]).unwrap()
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

/// Pade(13) coefficients, Higham (2005) Table 10.4 scaled form.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// theta_13 from Higham (2005) Table 10.2.
const THETA13: f64 = 5.371920351148152;

fn matrix_1_norm(a: &CMat) -> f64 {
    let mut max_sum = 0.0f64;
    for j in 0..a.ncols() {
        let col_sum: f64 = (0..a.nrows()).map(|i| a[[i, j]].norm()).sum();
        max_sum = max_sum.max(col_sum);
    }
    max_sum
}

/// Solve A X = B by Gaussian elimination with partial pivoting.
fn solve_linear(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let m = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();

    for col in 0..n {
        let mut max_val = 0.0;
        let mut max_row = col;
        for row in col..n {
            let v = lu[[row, col]].norm();
            if v > max_val {
                max_val = v;
                max_row = row;
            }
        }
        if max_val < 1e-300 {
            return Err(Error::NonFiniteMatrix);
        }
        if max_row != col {
            for j in 0..n {
                lu.swap([col, j], [max_row, j]);
            }
            for j in 0..m {
                x.swap([col, j], [max_row, j]);
            }
        }
        let pivot = lu[[col, col]];
        for row in (col + 1)..n {
            let factor = lu[[row, col]] / pivot;
            if factor == cr(0.0) {
                continue;
            }
            for j in col..n {
                let v = lu[[col, j]];
                lu[[row, j]] -= factor * v;
            }
            for j in 0..m {
                let v = x[[col, j]];
                x[[row, j]] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[[col, col]];
        for j in 0..m {
            let mut sum = x[[col, j]];
            for k in (col + 1)..n {
                sum -= lu[[col, k]] * x[[k, j]];
            }
            x[[col, j]] = sum / pivot;
        }
    }
    Ok(x)
}

/// Matrix exponential via scaling-and-squaring with Pade(13) approximation
/// (Higham 2005). Accurate to ~1e-14 relative error for the well-conditioned
/// generators used here.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(Error::NonFiniteMatrix);
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }

    let norm = matrix_1_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a_s = a * cr(1.0 / (1u64 << s) as f64);

    let id = eye(n);
    let a2 = a_s.dot(&a_s);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = &a6 * cr(PADE13[13]) + &a4 * cr(PADE13[11]) + &a2 * cr(PADE13[9]);
    let u_poly = a6.dot(&u_inner)
        + &a6 * cr(PADE13[7])
        + &a4 * cr(PADE13[5])
        + &a2 * cr(PADE13[3])
        + &id * cr(PADE13[1]);
    let u = a_s.dot(&u_poly);

    let v_inner = &a6 * cr(PADE13[12]) + &a4 * cr(PADE13[10]) + &a2 * cr(PADE13[8]);
    let v = a6.dot(&v_inner)
        + &a6 * cr(PADE13[6])
        + &a4 * cr(PADE13[4])
        + &a2 * cr(PADE13[2])
        + &id * cr(PADE13[0]);

    let num = &v + &u;
    let den = &v - &u;
    let mut r = solve_linear(&den, &num)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary `v` whose columns
/// are the matching eigenvectors, so `a = v diag(w) v^dagger`.
pub fn hermitian_eigh(a: &CMat) -> Result<(Array1<f64>, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(Error::NonFiniteMatrix);
    }

    let mut m = a.clone();
    let mut v = eye(n);
    let scale = frobenius_norm(&m).max(1e-300);

    let mut converged = false;
    for _ in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[[p, q]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let phase = apq / cr(apq.norm());
                // tan(2 theta) = 2|a_pq| / (a_qq - a_pp); smaller root.
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // Plane rotation G: G[p,p]=c, G[p,q]=s*phase,
                // G[q,p]=-s*conj(phase), G[q,q]=c. Apply m <- G^dag m G.
                let gpq = cr(sth) * phase;
                let gqp = -cr(sth) * phase.conj();
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp * cr(cth) + mkq * gqp;
                    m[[k, q]] = mkp * gpq + mkq * cr(cth);
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = mpk * cr(cth) + mqk * gqp.conj();
                    m[[q, k]] = mpk * gpq.conj() + mqk * cr(cth);
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * cr(cth) + vkq * gqp;
                    v[[k, q]] = vkp * gpq + vkq * cr(cth);
                }
            }
        }
    }
    if !converged {
        // One final check; the sweep count above is generous for n <= 16.
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[[p, q]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > 1e-12 * scale {
            return Err(Error::EigenNoConvergence);
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[[i, i]].re, i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let w = Array1::from_iter(pairs.iter().map(|&(val, _)| val));
    let mut v_sorted = Array2::zeros((n, n));
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for k in 0..n {
            v_sorted[[k, new_col]] = v[[k, old_col]];
        }
    }
    Ok((w, v_sorted))
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

const NORM_TOL: f64 = 1e-12;
const HERM_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
const EIG_TOL: f64 = 1e-9;

/// Pure state of the coupled pair in the fixed basis order.
#[derive(Debug, Clone)]
pub struct PureState {
    amp: [C64; DIM],
}

impl PureState {
    /// Build from amplitudes in basis order (|0q0m>, |0q1m>, |1q0m>, |1q1m>).
    /// The norm must be 1 within 1e-12.
    pub fn new(amp: [C64; DIM]) -> Result<Self> {
        let norm: f64 = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm,
                tol: NORM_TOL,
            });
        }
        Ok(Self { amp })
    }

    /// Basis state |idx>.
    pub fn basis(idx: usize) -> Self {
        let mut amp = [cr(0.0); DIM];
        amp[idx] = cr(1.0);
        Self { amp }
    }

    /// |1_q 0_m>: qubit excited, memory in its ground state.
    pub fn excited_qubit() -> Self {
        Self::basis(IDX_QUBIT)
    }

    /// One-excitation subspace state a|1q0m> + b|0q1m| (normalized input).
    pub fn subspace(a: C64, b: C64) -> Result<Self> {
        let mut amp = [cr(0.0); DIM];
        amp[IDX_QUBIT] = a;
        amp[IDX_MEM] = b;
        Self::new(amp)
    }

    pub fn amplitudes(&self) -> &[C64; DIM] {
        &self.amp
    }

    /// Subspace amplitudes (a, b) of (|1q0m>, |0q1m>).
    pub fn subspace_amplitudes(&self) -> (C64, C64) {
        (self.amp[IDX_QUBIT], self.amp[IDX_MEM])
    }

    /// Amplitude outside the one-excitation subspace.
    pub fn subspace_leakage(&self) -> f64 {
        (self.amp[IDX_GROUND].norm_sqr() + self.amp[IDX_DOUBLE].norm_sqr()).sqrt()
    }

    /// Probability of finding the qubit excited (memory traced out).
    pub fn excited_qubit_population(&self) -> f64 {
        self.amp[IDX_QUBIT].norm_sqr() + self.amp[IDX_DOUBLE].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply a full-space 4x4 operator (caller guarantees unitarity).
    pub fn apply(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != DIM || u.ncols() != DIM {
            return Err(Error::DimensionMismatch {
                expected: DIM,
                got: u.nrows(),
            });
        }
        let mut amp = [cr(0.0); DIM];
        for (i, a) in amp.iter_mut().enumerate() {
            for j in 0..DIM {
                *a += u[[i, j]] * self.amp[j];
            }
        }
        Self::new(amp)
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amp
            .iter()
            .zip(other.amp.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// 4x4 density matrix of the coupled pair: Hermitian within 1e-10,
/// unit trace within 1e-9, minimum eigenvalue >= -1e-9.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != DIM || mat.ncols() != DIM {
            return Err(Error::DimensionMismatch {
                expected: DIM,
                got: mat.nrows(),
            });
        }
        if !all_finite(&mat) {
            return Err(Error::NonFiniteMatrix);
        }
        let rho = Self { mat };
        let herm = rho.hermiticity_error();
        if herm > HERM_TOL {
            return Err(Error::InvalidDensityMatrix {
                what: "hermiticity",
                value: herm,
            });
        }
        let tr = rho.trace_error();
        if tr > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix {
                what: "unit trace",
                value: tr,
            });
        }
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < -EIG_TOL {
            return Err(Error::InvalidDensityMatrix {
                what: "positivity",
                value: min_eig,
            });
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        let mat = Array2::from_shape_fn((DIM, DIM), |(i, j)| a[i] * a[j].conj());
        Self { mat }
    }

    /// Qubit state rho_q tensored with the memory ground state |0_m><0_m|.
    pub fn from_qubit(rho_q: &CMat) -> Result<Self> {
        if rho_q.nrows() != 2 || rho_q.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: rho_q.nrows(),
            });
        }
        let mut ket0 = Array2::zeros((2, 2));
        ket0[[0, 0]] = cr(1.0);
        Self::new(kron(rho_q, &ket0))
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.mat, &dagger(&self.mat))
    }

    pub fn trace_error(&self) -> f64 {
        let tr: C64 = (0..DIM).map(|i| self.mat[[i, i]]).sum();
        (tr - cr(1.0)).norm()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        // Eigenvalues of the Hermitized matrix; the anti-Hermitian residue
        // is bounded by the hermiticity tolerance.
        let h = (&self.mat + &dagger(&self.mat)) * cr(0.5);
        let (w, _) = hermitian_eigh(&h)?;
        Ok(w[0])
    }
}

/// Trace out the memory, leaving the 2x2 qubit state.
pub fn partial_trace_memory(rho: &DensityMatrix) -> CMat {
    let m = rho.matrix();
    Array2::from_shape_fn((2, 2), |(i, j)| {
        m[[2 * i, 2 * j]] + m[[2 * i + 1, 2 * j + 1]]
    })
}

// ---------------------------------------------------------------------------
// Vectorization and Liouvillian
// ---------------------------------------------------------------------------

/// Column-stacking vectorization: `out[i + n*j] = rho[i, j]`.
pub fn vec_density(rho: &CMat) -> Array1<C64> {
    let n = rho.nrows();
    Array1::from_shape_fn(n * n, |k| rho[[k % n, k / n]])
}

/// Inverse of [`vec_density`].
pub fn unvec_density(v: &Array1<C64>, n: usize) -> CMat {
    Array2::from_shape_fn((n, n), |(i, j)| v[i + n * j])
}

/// Dissipator superoperator for a single collapse channel:
/// `gamma * [conj(L) (x) L - 1/2 I (x) L^dag L - 1/2 (L^dag L)^T (x) I]`
/// in column-stacking convention.
pub fn dissipator(l: &CMat, rate: f64) -> Result<CMat> {
    if rate < 0.0 || !rate.is_finite() {
        return Err(Error::NegativeRate {
            name: "collapse rate",
            value: rate,
        });
    }
    let n = l.nrows();
    if n != l.ncols() {
        return Err(Error::NotSquare {
            rows: l.nrows(),
            cols: l.ncols(),
        });
    }
    let id = eye(n);
    let ldl = dagger(l).dot(l);
    let jump = kron(&l.mapv(|z| z.conj()), l);
    let anti = kron(&id, &ldl) * cr(0.5) + kron(&ldl.t().to_owned(), &id) * cr(0.5);
    Ok((jump - anti) * cr(rate))
}

/// Vectorized Lindblad generator for Hermitian `h` and collapse channels
/// `(L_k, gamma_k)`: coherent part `-i (I (x) H - H^T (x) I)` plus the sum
/// of [`dissipator`] terms. The vectorized identity is a left null vector
/// (trace preservation).
pub fn liouvillian(h: &CMat, collapse_ops: &[(CMat, f64)]) -> Result<CMat> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if !all_finite(h) {
        return Err(Error::NonFiniteMatrix);
    }
    let id = eye(n);
    let mut l = (kron(&id, h) - kron(&h.t().to_owned(), &id)) * c(0.0, -1.0);
    for (op, rate) in collapse_ops {
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: op.nrows(),
            });
        }
        l = l + dissipator(op, *rate)?;
    }
    Ok(l)
}

/// Max |row| of `vec(I)^T L`; zero for a trace-preserving generator.
pub fn trace_preservation_error(l: &CMat) -> f64 {
    let n2 = l.nrows();
    let n = (n2 as f64).sqrt().round() as usize;
    let mut worst = 0.0f64;
    for m in 0..n2 {
        let mut sum = cr(0.0);
        for d in 0..n {
            sum += l[[d * (n + 1), m]];
        }
        worst = worst.max(sum.norm());
    }
    worst
}
