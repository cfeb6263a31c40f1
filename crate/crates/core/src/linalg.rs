//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Largest dimension for which operator norms use a full SVD.
pub const SVD_DIM_LIMIT: usize = 64;
pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Block-diagonal `a ⊕ b`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar + br, ac + bc);
    out.view_mut((0, 0), (ar, ac)).copy_from(a);
    out.view_mut((ar, ac), (br, bc)).copy_from(b);
    out
}

/// `‖m†m − I‖_F`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.ncols();
    frobenius(&(m.adjoint() * m - identity(n)))
}

/// Operator norm (largest singular value).
///
/// Uses an SVD up to [`SVD_DIM_LIMIT`] and the dense Hermitian eigensolver on
/// `m†m` above it; both are exact up to floating point.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    if m.nrows().max(m.ncols()) <= SVD_DIM_LIMIT {
        m.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    } else {
        let gram = if m.nrows() >= m.ncols() {
            m.adjoint() * m
        } else {
            m * m.adjoint()
        };
        gram.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(0.0)
            .sqrt()
    }
}

/// Operator norm by power iteration on `m†m`.
///
/// Deterministic start vector; stops when the relative change of the Rayleigh
/// quotient falls below `tol` or after `iters` steps.
pub fn op_norm_power(m: &CMatrix, iters: usize, tol: f64) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    // Irrational-ish start so no eigenvector is missed by symmetry.
    let mut v = nalgebra::DVector::<C64>::from_fn(n, |i, _| {
        C64::new(
            1.0 + (i as f64 * 0.618_033_988_7).fract(),
            0.1 * ((i * 7 % 11) as f64),
        )
    });
    let norm = v.norm();
    v /= c(norm);
    let mut last = 0.0;
    for _ in 0..iters {
        let w = m.adjoint() * (m * &v);
        let lambda = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / c(wn);
        if last > 0.0 && ((lambda - last).abs() <= tol * lambda.abs()) {
            last = lambda;
            break;
        }
        last = lambda;
    }
    let w = m * &v;
    w.norm().max(last.max(0.0).sqrt())
}

/// Spectral norm with the SVD / power-iteration split.
pub fn op_norm_split(m: &CMatrix) -> f64 {
    if m.nrows().max(m.ncols()) <= SVD_DIM_LIMIT {
        op_norm(m)
    } else {
        op_norm_power(m, POWER_ITERATIONS, POWER_TOLERANCE)
    }
}

/// Numerical rank of a real matrix with threshold `rel_tol * σ_max`.
pub fn real_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Formats a complex number as `a+bi` with 17 significant digits.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", format_f64(z.re), sign, format_f64(z.im.abs()))
}

/// 17 significant digits, lossless for f64.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Parses `a+bi` as written by [`format_complex`].
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim().strip_suffix('i')?;
    // split at the sign that is not part of an exponent and not leading
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let i = split?;
    Some(C64::new(s[..i].parse().ok()?, s[i..].parse().ok()?))
}
