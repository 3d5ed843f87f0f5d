//! Model Riemannian four-manifolds and a finite-difference curvature kernel.
//!
//! Every space in the catalog is given by one chart with analytic metric
//! components. Curvature is computed from first and second central
//! differences of the metric (one Richardson step), transformed to a
//! Gram-Schmidt orthonormal frame, and split into Ricci, scalar and Weyl
//! parts. The Weyl tensor is then restricted to the self-dual and
//! anti-self-dual bases from [`crate::forms`].
//!
//! Charts and base points:
//!
//! | space | chart | `rho` from base point |
//! |-------|-------|------------------------|
//! | `R4`  | identity | `abs(x)` |
//! | `S4`  | stereographic, `g = (2/(1+abs(x)^2))^2 delta` | `2 atan abs(x)` |
//! | `H4`  | Poincare ball, `g = (2/(1-abs(x)^2))^2 delta` | `2 atanh abs(x)` |
//! | `S3xR` | `(chi, theta, phi, t)`, `g = dchi^2 + sin^2 chi dOmega^2 + dt^2` | `sqrt(chi^2 + t^2)` |
//! | `CP2` | affine chart, Fubini-Study with holomorphic curvature 4 | `atan abs(z)` |
//! | `CH2` | unit ball, Bergman metric with holomorphic curvature -4 | `atanh abs(z)` |
//!
//! For `CP2` and `CH2` the complex coordinates are `z1 = x1 + i x2`,
//! `z2 = x3 + i x4`, so the chart orientation is the complex one and the
//! Kahler form is self-dual.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{invalid, Error, Result};
use crate::forms::{ANTI_SELF_DUAL_BASIS, PAIRS, SELF_DUAL_BASIS};
use crate::quadrature::{adaptive_simpson, QuadConfig};
use crate::radial::{coth, csch2, ln_cosh, ln_sinh, RadialMap};

pub type Point = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];
pub type Tensor3 = [[[f64; 4]; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

const TWO_PI_SQ: f64 = 2.0 * PI * PI;

/// Base step of the metric finite differences (one Richardson halving).
pub const METRIC_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceName {
    R4,
    S4,
    S3xR,
    CP2,
    H4,
    CH2,
}

impl SpaceName {
    pub const ALL: [SpaceName; 6] = [
        SpaceName::R4,
        SpaceName::S4,
        SpaceName::S3xR,
        SpaceName::CP2,
        SpaceName::H4,
        SpaceName::CH2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceName::R4 => "R4",
            SpaceName::S4 => "S4",
            SpaceName::S3xR => "S3xR",
            SpaceName::CP2 => "CP2",
            SpaceName::H4 => "H4",
            SpaceName::CH2 => "CH2",
        }
    }
}

impl fmt::Display for SpaceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpaceName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                kind: "space",
                name: s.to_string(),
            })
    }
}

/// Large-`r` behaviour of `vol(B(r))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeGrowth {
    /// Compact space of the given diameter.
    Compact { diameter: f64 },
    /// `vol(B(r)) = O(r^k)`.
    Polynomial(f64),
    Exponential,
}

/// A model space from the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpace {
    name: SpaceName,
}

pub fn catalog(name: SpaceName) -> ModelSpace {
    ModelSpace { name }
}

impl FromStr for ModelSpace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(catalog(s.parse()?))
    }
}

fn norm4(x: &Point) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn conformal(factor: f64) -> Mat4 {
    let mut g = [[0.0; 4]; 4];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = factor;
    }
    g
}

/// Real metric of the Hermitian form `h_jk = (A delta_jk + s conj(z_j) z_k) / A^2`,
/// `A = 1 - s |z|^2`, with `s = -1` (Fubini-Study) or `s = +1` (Bergman).
fn kahler_metric(x: &Point, s: f64) -> Mat4 {
    let z = [(x[0], x[1]), (x[2], x[3])];
    let r2 = x.iter().map(|v| v * v).sum::<f64>();
    let a = 1.0 - s * r2;
    // h[j][k] = (re, im)
    let mut h = [[(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let (aj, bj) = z[j];
            let (ak, bk) = z[k];
            let zz = (aj * ak + bj * bk, aj * bk - bj * ak);
            let diag = if j == k { a } else { 0.0 };
            h[j][k] = ((diag + s * zz.0) / (a * a), (s * zz.1) / (a * a));
        }
    }
    // real basis: e0 = (1,0), e1 = (i,0), e2 = (0,1), e3 = (0,i)
    let basis: [[(f64, f64); 2]; 4] = [
        [(1.0, 0.0), (0.0, 0.0)],
        [(0.0, 1.0), (0.0, 0.0)],
        [(0.0, 0.0), (1.0, 0.0)],
        [(0.0, 0.0), (0.0, 1.0)],
    ];
    let mut g = [[0.0; 4]; 4];
    for p in 0..4 {
        for q in 0..4 {
            let mut re = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    let u = basis[p][j];
                    let v = basis[q][k];
                    let vc = (v.0, -v.1);
                    let uv = (u.0 * vc.0 - u.1 * vc.1, u.0 * vc.1 + u.1 * vc.0);
                    let (hr, hi) = h[j][k];
                    re += hr * uv.0 - hi * uv.1;
                }
            }
            g[p][q] = re;
        }
    }
    g
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Point {
    loop {
        let v: Point = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = norm4(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}

fn s3xr_quad() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_depth: 30,
        initial_panels: 16,
    }
}

/// Upper limit of the `theta` substitution `chi = r sin theta` on S3xR.
fn s3xr_theta_max(r: f64) -> f64 {
    if r <= PI {
        FRAC_PI_2
    } else {
        (PI / r).asin()
    }
}

impl ModelSpace {
    pub fn name(&self) -> SpaceName {
        self.name
    }

    pub fn in_domain(&self, x: &Point) -> bool {
        if !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match self.name {
            SpaceName::R4 | SpaceName::S4 | SpaceName::CP2 => true,
            SpaceName::H4 | SpaceName::CH2 => norm4(x) < 1.0,
            SpaceName::S3xR => x[0] > 0.0 && x[0] < PI && x[1] > 0.0 && x[1] < PI,
        }
    }

    fn check(&self, x: &Point) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!("{x:?} not in the {} chart", self.name)))
        }
    }

    /// Metric components `g_ij(x)` in the chart.
    pub fn metric(&self, x: &Point) -> Result<Mat4> {
        self.check(x)?;
        let r2 = x.iter().map(|v| v * v).sum::<f64>();
        Ok(match self.name {
            SpaceName::R4 => conformal(1.0),
            SpaceName::S4 => conformal((2.0 / (1.0 + r2)).powi(2)),
            SpaceName::H4 => conformal((2.0 / (1.0 - r2)).powi(2)),
            SpaceName::S3xR => {
                let s = x[0].sin().powi(2);
                let mut g = [[0.0; 4]; 4];
                g[0][0] = 1.0;
                g[1][1] = s;
                g[2][2] = s * x[1].sin().powi(2);
                g[3][3] = 1.0;
                g
            }
            SpaceName::CP2 => kahler_metric(x, -1.0),
            SpaceName::CH2 => kahler_metric(x, 1.0),
        })
    }

    /// Geodesic distance from the base point.
    pub fn rho(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        let r = norm4(x);
        Ok(match self.name {
            SpaceName::R4 => r,
            SpaceName::S4 => 2.0 * r.atan(),
            SpaceName::H4 => 2.0 * r.atanh(),
            SpaceName::S3xR => x[0].hypot(x[3]),
            SpaceName::CP2 => r.atan(),
            SpaceName::CH2 => r.atanh(),
        })
    }

    /// A chart point at distance `rho` from the base point (fixed ray).
    pub fn point_at_distance(&self, rho: f64) -> Result<Point> {
        if !(rho > 0.0) {
            return Err(invalid(format!("distance must be positive, got {rho}")));
        }
        if let Some(d) = self.diameter() {
            if rho >= d {
                return Err(Error::OutsideDomain(format!(
                    "distance {rho} not below the chart limit {d}"
                )));
            }
        }
        let radial = |r: f64| [r, 0.0, 0.0, 0.0];
        Ok(match self.name {
            SpaceName::R4 => radial(rho),
            SpaceName::S4 => radial((0.5 * rho).tan()),
            SpaceName::H4 => radial((0.5 * rho).tanh()),
            SpaceName::CP2 => radial(rho.tan()),
            SpaceName::CH2 => radial(rho.tanh()),
            SpaceName::S3xR => {
                let chi = if rho < FRAC_PI_2 {
                    rho * std::f64::consts::FRAC_1_SQRT_2
                } else {
                    FRAC_PI_2 * (rho / (rho + 1.0))
                };
                let t = (rho * rho - chi * chi).sqrt();
                [chi, FRAC_PI_2, 0.0, t]
            }
        })
    }

    /// Random chart point from the region used for sampled checks.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.name {
            SpaceName::S3xR => [
                rng.random_range(0.3..PI - 0.3),
                rng.random_range(0.3..PI - 0.3),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(-3.0..3.0),
            ],
            _ => {
                let max_r = match self.name {
                    SpaceName::R4 => 2.0,
                    SpaceName::S4 => 2.0,
                    SpaceName::CP2 => 1.5,
                    _ => 0.7,
                };
                let d = random_direction(rng);
                let r = rng.random_range(0.05..max_r);
                d.map(|c| c * r)
            }
        }
    }

    pub fn diameter(&self) -> Option<f64> {
        match self.volume_growth() {
            VolumeGrowth::Compact { diameter } => Some(diameter),
            _ => None,
        }
    }

    pub fn volume_growth(&self) -> VolumeGrowth {
        match self.name {
            SpaceName::R4 => VolumeGrowth::Polynomial(4.0),
            SpaceName::S3xR => VolumeGrowth::Polynomial(1.0),
            SpaceName::S4 => VolumeGrowth::Compact { diameter: PI },
            SpaceName::CP2 => VolumeGrowth::Compact { diameter: FRAC_PI_2 },
            SpaceName::H4 | SpaceName::CH2 => VolumeGrowth::Exponential,
        }
    }

    /// Area of the geodesic sphere of radius `rho`, so that
    /// `vol(B(r)) = int_0^r J`.
    pub fn volume_density(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match self.name {
            SpaceName::S3xR => s3xr_density(rho),
            _ => self.log_volume_density(rho).exp(),
        }
    }

    /// `ln J(rho)`; `-inf` where `J` vanishes.
    pub fn log_volume_density(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let c = TWO_PI_SQ.ln();
        match self.name {
            SpaceName::R4 => c + 3.0 * rho.ln(),
            SpaceName::S4 if rho < PI => c + 3.0 * rho.sin().ln(),
            SpaceName::CP2 if rho < FRAC_PI_2 => c + 3.0 * rho.sin().ln() + rho.cos().ln(),
            SpaceName::S4 | SpaceName::CP2 => f64::NEG_INFINITY,
            SpaceName::H4 => c + 3.0 * ln_sinh(rho),
            SpaceName::CH2 => c + 3.0 * ln_sinh(rho) + ln_cosh(rho),
            SpaceName::S3xR => s3xr_density(rho).ln(),
        }
    }

    /// Laplacian of the distance function as a function of `rho`. For `S3xR`,
    /// where `Delta rho` is not radial, this is its average over the geodesic
    /// sphere, which is what `J'/J` measures.
    pub fn laplacian_rho(&self, rho: f64) -> f64 {
        match self.name {
            SpaceName::R4 => 3.0 / rho,
            SpaceName::S4 => 3.0 / rho.tan(),
            SpaceName::H4 => 3.0 * coth(rho),
            SpaceName::CP2 => 2.0 / rho.tan() + 2.0 / (2.0 * rho).tan(),
            SpaceName::CH2 => chm_laplacian_rho(2, rho),
            SpaceName::S3xR => s3xr_mean_laplacian(rho),
        }
    }

    /// Closed-form `d(Delta rho)/d rho` where available.
    pub fn laplacian_rho_derivative(&self, rho: f64) -> Option<f64> {
        let csc2 = |x: f64| 1.0 / x.sin().powi(2);
        match self.name {
            SpaceName::R4 => Some(-3.0 / (rho * rho)),
            SpaceName::S4 => Some(-3.0 * csc2(rho)),
            SpaceName::H4 => Some(-3.0 * csch2(rho)),
            SpaceName::CP2 => Some(-2.0 * csc2(rho) - 4.0 * csc2(2.0 * rho)),
            SpaceName::CH2 => Some(chm_laplacian_rho_derivative(2, rho)),
            SpaceName::S3xR => None,
        }
    }

    /// `Delta rho` as a radial map with closed-form derivative when known.
    pub fn laplacian_profile(&self) -> RadialMap {
        let s = *self;
        let map = RadialMap::new(move |r| s.laplacian_rho(r));
        if self.laplacian_rho_derivative(1.0).is_some() {
            map.with_first(move |r| s.laplacian_rho_derivative(r).expect("closed form"))
        } else {
            map
        }
    }
}

fn s3xr_density(r: f64) -> f64 {
    let f = |th: f64| 8.0 * PI * r * (r * th.sin()).sin().powi(2);
    adaptive_simpson(f, 0.0, s3xr_theta_max(r), &s3xr_quad()).value
}

fn s3xr_mean_laplacian(r: f64) -> f64 {
    // Delta rho = (1 + 2 chi cot chi) / rho on the sphere chi = r sin theta
    let f = |th: f64| {
        let chi = r * th.sin();
        8.0 * PI * (chi.sin().powi(2) + 2.0 * chi * chi.sin() * chi.cos())
    };
    let flux = adaptive_simpson(f, 0.0, s3xr_theta_max(r), &s3xr_quad()).value;
    flux / s3xr_density(r)
}

/// `Delta rho = 2(m-1) coth rho + 2 coth 2 rho` on `CH^m`.
pub fn chm_laplacian_rho(m: u32, rho: f64) -> f64 {
    2.0 * (m as f64 - 1.0) * coth(rho) + 2.0 * coth(2.0 * rho)
}

/// `d(Delta rho)/d rho` on `CH^m` in closed form.
pub fn chm_laplacian_rho_derivative(m: u32, rho: f64) -> f64 {
    -2.0 * (m as f64 - 1.0) * csch2(rho) - 4.0 * csch2(2.0 * rho)
}

/// `vol(B(r)) = int_0^r J` by adaptive quadrature.
pub fn ball_volume(space: &ModelSpace, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("ball radius must be positive, got {r}")));
    }
    let upper = space.diameter().map_or(r, |d| r.min(d));
    let cfg = QuadConfig::with_tol(1e-12, 1e-12);
    Ok(adaptive_simpson(|s| space.volume_density(s), 0.0, upper, &cfg).value)
}

/// Sides of the two identities for `Delta rho` on `CH^m`.
///
/// The left sides use `Delta rho = (2m-1) coth rho + tanh rho`, the right
/// sides the `1/sinh^2` expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianIdentity {
    pub square_lhs: f64,
    pub square_rhs: f64,
    pub derivative_lhs: f64,
    pub derivative_rhs: f64,
    /// `(2m-1)/sinh^2 rho + 1/cosh^2 rho`, the size of the derivative terms.
    pub derivative_scale: f64,
}

impl LaplacianIdentity {
    pub fn square_residual(&self) -> f64 {
        (self.square_lhs - self.square_rhs).abs() / self.square_rhs.abs().max(1e-300)
    }

    pub fn derivative_residual(&self) -> f64 {
        (self.derivative_lhs - self.derivative_rhs).abs() / self.derivative_scale.max(1e-300)
    }
}

/// Checks `(Delta rho)^2 = 4m^2 + 4m(m-1)/sinh^2 rho + 4/sinh^2 2rho` and
/// `<grad rho, grad Delta rho> = -2(m-1)/sinh^2 rho - 4/sinh^2 2rho`.
pub fn laplacian_rho_identity_check(m: u32, rho: f64) -> Result<LaplacianIdentity> {
    if m < 1 {
        return Err(invalid("complex dimension m must be at least 1"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    let mf = m as f64;
    let lap = (2.0 * mf - 1.0) * coth(rho) + rho.tanh();
    let sech2 = 1.0 / rho.cosh().powi(2);
    Ok(LaplacianIdentity {
        square_lhs: lap * lap,
        square_rhs: 4.0 * mf * mf + 4.0 * mf * (mf - 1.0) * csch2(rho) + 4.0 * csch2(2.0 * rho),
        derivative_lhs: -(2.0 * mf - 1.0) * csch2(rho) + sech2,
        derivative_rhs: chm_laplacian_rho_derivative(m, rho),
        derivative_scale: (2.0 * mf - 1.0) * csch2(rho) + sech2,
    })
}

// ---------------------------------------------------------------------------
// Curvature kernel
// ---------------------------------------------------------------------------

/// Metric and its first and second coordinate derivatives at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    pub g: Mat4,
    /// `dg[a][i][j] = d_a g_ij`
    pub dg: Tensor3,
    /// `ddg[a][b][i][j] = d_a d_b g_ij`
    pub ddg: Tensor4,
}

fn shifted(x: &Point, moves: &[(usize, f64)]) -> Point {
    let mut y = *x;
    for (a, d) in moves {
        y[*a] += d;
    }
    y
}

fn lin(a: &Mat4, ca: f64, b: &Mat4, cb: f64) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| ca * a[i][j] + cb * b[i][j]))
}

/// Central differences of the metric with one Richardson step.
pub fn metric_jet(space: &ModelSpace, x: &Point, h: f64) -> Result<MetricJet> {
    let g = space.metric(x)?;
    let mut dg = [[[0.0; 4]; 4]; 4];
    let mut ddg = [[[[0.0; 4]; 4]; 4]; 4];

    let first = |a: usize, h: f64| -> Result<(Mat4, Mat4)> {
        let p = space.metric(&shifted(x, &[(a, h)]))?;
        let m = space.metric(&shifted(x, &[(a, -h)]))?;
        let d1 = lin(&p, 0.5 / h, &m, -0.5 / h);
        let d2 = std::array::from_fn(|i| {
            std::array::from_fn(|j| (p[i][j] - 2.0 * g[i][j] + m[i][j]) / (h * h))
        });
        Ok((d1, d2))
    };
    let mixed = |a: usize, b: usize, h: f64| -> Result<Mat4> {
        let pp = space.metric(&shifted(x, &[(a, h), (b, h)]))?;
        let pm = space.metric(&shifted(x, &[(a, h), (b, -h)]))?;
        let mp = space.metric(&shifted(x, &[(a, -h), (b, h)]))?;
        let mm = space.metric(&shifted(x, &[(a, -h), (b, -h)]))?;
        let s = 0.25 / (h * h);
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| s * (pp[i][j] - pm[i][j] - mp[i][j] + mm[i][j]))
        }))
    };

    for a in 0..4 {
        let (d1h, d2h) = first(a, h)?;
        let (d1q, d2q) = first(a, 0.5 * h)?;
        dg[a] = lin(&d1q, 4.0 / 3.0, &d1h, -1.0 / 3.0);
        ddg[a][a] = lin(&d2q, 4.0 / 3.0, &d2h, -1.0 / 3.0);
    }
    for a in 0..4 {
        for b in (a + 1)..4 {
            let mh = mixed(a, b, h)?;
            let mq = mixed(a, b, 0.5 * h)?;
            let m = lin(&mq, 4.0 / 3.0, &mh, -1.0 / 3.0);
            ddg[a][b] = m;
            ddg[b][a] = m;
        }
    }
    Ok(MetricJet { g, dg, ddg })
}

/// Inverse of a 4x4 matrix by Gauss-Jordan elimination with partial pivoting.
pub fn invert4(m: &Mat4) -> Result<Mat4> {
    let mut a = *m;
    let mut inv = conformal(1.0);
    let scale = m.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty");
        if a[pivot][col].abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularMetric);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..4 {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    Ok(inv)
}

/// Christoffel symbols of the second kind, `gamma[k][i][j] = Gamma^k_ij`.
pub fn christoffel(g_inv: &Mat4, dg: &Tensor3) -> Tensor3 {
    let mut first = [[[0.0; 4]; 4]; 4];
    for e in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                first[e][i][j] = 0.5 * (dg[i][e][j] + dg[j][e][i] - dg[e][i][j]);
            }
        }
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                gamma[k][i][j] = (0..4).map(|e| g_inv[k][e] * first[e][i][j]).sum();
            }
        }
    }
    gamma
}

/// Fully covariant Riemann tensor in coordinates, with the sign convention
/// `R_abab = K |a ^ b|^2` (positive on spheres).
pub fn riemann_coordinates(jet: &MetricJet, gamma: &Tensor3) -> Tensor4 {
    let (g, ddg) = (&jet.g, &jet.ddg);
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let second = 0.5
                        * (ddg[b][c][a][d] + ddg[a][d][b][c] - ddg[a][c][b][d] - ddg[b][d][a][c]);
                    let mut quad = 0.0;
                    for e in 0..4 {
                        for f in 0..4 {
                            quad += g[e][f]
                                * (gamma[e][b][c] * gamma[f][a][d] - gamma[e][b][d] * gamma[f][a][c]);
                        }
                    }
                    r[a][b][c][d] = second + quad;
                }
            }
        }
    }
    r
}

/// Gram-Schmidt orthonormalisation of the coordinate frame; row `a` holds the
/// coordinate components of frame vector `E_a`. Orientation is preserved.
pub fn orthonormal_frame(g: &Mat4) -> Result<Mat4> {
    let dot = |u: &Point, v: &Point| -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += g[i][j] * u[i] * v[j];
            }
        }
        s
    };
    let mut frame = [[0.0; 4]; 4];
    for a in 0..4 {
        let mut v = [0.0; 4];
        v[a] = 1.0;
        for b in 0..a {
            let p = dot(&v, &frame[b]);
            for i in 0..4 {
                v[i] -= p * frame[b][i];
            }
        }
        let n2 = dot(&v, &v);
        if !(n2 > 0.0) {
            return Err(Error::SingularMetric);
        }
        let n = n2.sqrt();
        frame[a] = v.map(|c| c / n);
    }
    Ok(frame)
}

fn contract_frame(r: &Tensor4, e: &Mat4) -> Tensor4 {
    // transform one index at a time: T'[a..] = sum_i E[a][i] T[i..]
    let step = |t: &Tensor4, slot: usize| -> Tensor4 {
        let mut out = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let idx = [a, b, c, d];
                        let mut s = 0.0;
                        for i in 0..4 {
                            let mut j = idx;
                            j[slot] = i;
                            s += e[idx[slot]][i] * t[j[0]][j[1]][j[2]][j[3]];
                        }
                        out[a][b][c][d] = s;
                    }
                }
            }
        }
        out
    };
    let mut t = *r;
    for slot in 0..4 {
        t = step(&t, slot);
    }
    t
}

/// Which half of the Weyl tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Side::Plus),
            "minus" | "-" => Ok(Side::Minus),
            _ => Err(Error::UnknownName {
                kind: "side",
                name: s.to_string(),
            }),
        }
    }
}

/// Orthonormal-frame curvature at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub riemann: Tensor4,
    pub ricci: Mat4,
    pub scalar: f64,
    pub weyl: Tensor4,
    /// `W` restricted to the self-dual basis, `(W omega)_ij = sum_{k<l} W_ijkl omega_kl`.
    pub weyl_plus: [[f64; 3]; 3],
    pub weyl_minus: [[f64; 3]; 3],
    pub lambda_max_plus: f64,
    pub lambda_max_minus: f64,
    /// Coordinate components of the orthonormal frame (rows).
    pub frame: Mat4,
    /// `max |R - (W + Ricci part - scalar part)|`.
    pub decomposition_residual: f64,
    /// `max` violation of the pair symmetries of `R`.
    pub symmetry_residual: f64,
    /// `max |R_ijkl + R_jkil + R_kijl|`.
    pub bianchi_residual: f64,
    /// `max |sum_a W_abad|`.
    pub weyl_trace_residual: f64,
    /// `max` entry of the block of `W` mixing the two halves.
    pub weyl_mixing_residual: f64,
}

impl CurvatureData {
    pub fn lambda_max(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.lambda_max_plus,
            Side::Minus => self.lambda_max_minus,
        }
    }

    pub fn weyl_operator(&self, side: Side) -> &[[f64; 3]; 3] {
        match side {
            Side::Plus => &self.weyl_plus,
            Side::Minus => &self.weyl_minus,
        }
    }

    /// Sectional curvature of the plane spanned by frame vectors `a`, `b`.
    pub fn sectional(&self, a: usize, b: usize) -> f64 {
        self.riemann[a][b][a][b]
    }

    /// Frobenius norm squared of `W` acting on the six-dimensional space of two-forms.
    pub fn weyl_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for &(i, j) in PAIRS.iter() {
            for &(k, l) in PAIRS.iter() {
                s += self.weyl[i][j][k][l].powi(2);
            }
        }
        s
    }
}

fn restrict(w2: &[[f64; 6]; 6], left: &[[f64; 6]; 3], right: &[[f64; 6]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for p in 0..6 {
                for q in 0..6 {
                    s += left[a][p] * w2[p][q] * right[b][q];
                }
            }
            s
        })
    })
}

/// Curvature of `space` at chart point `x`, in the Gram-Schmidt frame.
pub fn curvature_at(space: &ModelSpace, x: &Point) -> Result<CurvatureData> {
    let jet = metric_jet(space, x, METRIC_STEP)?;
    let g_inv = invert4(&jet.g)?;
    let gamma = christoffel(&g_inv, &jet.dg);
    let coord = riemann_coordinates(&jet, &gamma);
    let frame = orthonormal_frame(&jet.g)?;
    let riemann = contract_frame(&coord, &frame);
    Ok(decompose(riemann, frame))
}

/// Splits a frame Riemann tensor into Ricci, scalar and Weyl parts.
pub fn decompose(riemann: Tensor4, frame: Mat4) -> CurvatureData {
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut ricci = [[0.0; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            ricci[b][d] = (0..4).map(|a| riemann[a][b][a][d]).sum();
        }
    }
    let scalar: f64 = (0..4).map(|a| ricci[a][a]).sum();

    let mut weyl = [[[[0.0; 4]; 4]; 4]; 4];
    let mut decomposition_residual = 0.0_f64;
    let mut symmetry_residual = 0.0_f64;
    let mut bianchi_residual = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let ric_part = 0.5
                        * (ricci[i][k] * delta(j, l) - ricci[i][l] * delta(j, k)
                            + delta(i, k) * ricci[j][l]
                            - delta(i, l) * ricci[j][k]);
                    let scal_part =
                        scalar / 6.0 * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k));
                    let r = riemann[i][j][k][l];
                    let w = r - ric_part + scal_part;
                    weyl[i][j][k][l] = w;
                    decomposition_residual =
                        decomposition_residual.max((r - (w + ric_part - scal_part)).abs());
                    symmetry_residual = symmetry_residual
                        .max((r + riemann[j][i][k][l]).abs())
                        .max((r + riemann[i][j][l][k]).abs())
                        .max((r - riemann[k][l][i][j]).abs());
                    bianchi_residual = bianchi_residual
                        .max((r + riemann[j][k][i][l] + riemann[k][i][j][l]).abs());
                }
            }
        }
    }
    let mut weyl_trace_residual = 0.0_f64;
    for b in 0..4 {
        for d in 0..4 {
            let t: f64 = (0..4).map(|a| weyl[a][b][a][d]).sum();
            weyl_trace_residual = weyl_trace_residual.max(t.abs());
        }
    }

    let mut w2 = [[0.0; 6]; 6];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        for (q, &(k, l)) in PAIRS.iter().enumerate() {
            w2[p][q] = weyl[i][j][k][l];
        }
    }
    let weyl_plus = restrict(&w2, &SELF_DUAL_BASIS, &SELF_DUAL_BASIS);
    let weyl_minus = restrict(&w2, &ANTI_SELF_DUAL_BASIS, &ANTI_SELF_DUAL_BASIS);
    let mixing = restrict(&w2, &SELF_DUAL_BASIS, &ANTI_SELF_DUAL_BASIS);
    let weyl_mixing_residual = mixing.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));

    CurvatureData {
        riemann,
        ricci,
        scalar,
        weyl,
        lambda_max_plus: symmetric_eigenvalues(&weyl_plus)[2],
        lambda_max_minus: symmetric_eigenvalues(&weyl_minus)[2],
        weyl_plus,
        weyl_minus,
        frame,
        decomposition_residual,
        symmetry_residual,
        bianchi_residual,
        weyl_trace_residual,
        weyl_mixing_residual,
    }
}

/// Sorted eigenvalues of `W+` or `W-`.
pub fn weyl_operator_spectrum(data: &CurvatureData, side: Side) -> [f64; 3] {
    symmetric_eigenvalues(data.weyl_operator(side))
}

/// Frobenius norm squared of a 3x3 operator.
pub fn operator_norm_sq(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum()
}
