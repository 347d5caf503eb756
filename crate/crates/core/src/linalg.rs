//! Small fixed-size helpers shared by the physics modules.

use nalgebra::{Matrix2, Matrix4, SMatrix};

/// Symplectic form for one mode, `[[0, 1], [-1, 0]]`.
pub(crate) fn omega2() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Two-mode symplectic form `Ω ⊕ Ω`.
pub(crate) fn omega4() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&omega2());
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&omega2());
    m
}

pub(crate) fn symmetrize<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Closed-form 2×2 inverse; `None` when the determinant is not strictly
/// positive relative to the entries.
pub(crate) fn inv2(m: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let det = det2(m);
    let scale = m.abs().max();
    if !(det.is_finite() && det.abs() > f64::EPSILON * scale * scale) {
        return None;
    }
    Some(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// `ln det` of a matrix expected to be positive definite.
pub(crate) fn ln_det_pd(m: &Matrix4<f64>) -> Option<f64> {
    let det = m.determinant();
    (det.is_finite() && det > 0.0).then(|| det.ln())
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + e^x)`.
pub(crate) fn softplus(x: f64) -> f64 {
    log_add_exp(0.0, x)
}

pub(crate) fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}
