//! Closed-form eigenvalues of real symmetric 3x3 matrices.
//!
//! Uses the trigonometric solution of the characteristic polynomial on the
//! shifted, scaled matrix `B = (A - q I) / p`, whose eigenvalues are
//! `2 cos(phi + 2 pi k / 3)`.

use std::f64::consts::PI;

/// Eigenvalues of the symmetric matrix `a`, sorted ascending.
///
/// Only the upper triangle is read.
pub fn symmetric_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let d = [a[0][0] - q, a[1][1] - q, a[2][2] - q];
    let p2 = d[0].powi(2) + d[1].powi(2) + d[2].powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q, q, q];
    }
    let b = [
        [d[0] / p, a[0][1] / p, a[0][2] / p],
        [a[0][1] / p, d[1] / p, a[1][2] / p],
        [a[0][2] / p, a[1][2] / p, d[2] / p],
    ];
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    [smallest, middle, largest]
}
