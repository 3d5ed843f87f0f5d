//! Connections on the trivial so(n) bundle over a flat chart of R^4.
//!
//! Conventions: `F_ij = d_i A_j - d_j A_i + [A_i, A_j]` and
//! `nabla_i F_jk = d_i F_jk + [A_i, F_jk]`. The one-instanton is written in
//! regular gauge with the 't Hooft symbols,
//!
//! ```text
//! A_mu = 2 eta^a_{mu nu} (x - y)_nu / (|x - y|^2 + lambda^2) T_a,
//! F_mu nu = -4 lambda^2 / (lambda^2 + |x - y|^2)^2 eta^a_{mu nu} T_a,
//! ```
//!
//! with `T_a = -eta^a / 2` the su(2) generators inside so(4). Its curvature
//! is self-dual for the chart orientation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::forms::{norm, project_pm, AlgebraTwoForm, TwoForm, PAIRS};
use crate::geometry::Point;
use crate::lie::{su2_generator, thooft_eta, AlgebraMetric, SkewMatrix};
use crate::quadrature::{integrate_graded, QuadConfig};

type Potential = Arc<dyn Fn(&Point) -> [SkewMatrix; 4] + Send + Sync>;
type Curvature = Arc<dyn Fn(&Point) -> AlgebraTwoForm + Send + Sync>;

/// Relative step of the central differences, `h = STEP (1 + |x|)`.
pub const STEP: f64 = 1e-4;

fn norm4(x: &Point) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn step_for(x: &Point) -> f64 {
    STEP * (1.0 + norm4(x))
}

fn shift(x: &Point, i: usize, d: f64) -> Point {
    let mut y = *x;
    y[i] += d;
    y
}

/// A connection `x -> (A_1, .., A_4)` with optional closed-form curvature.
#[derive(Clone)]
pub struct GaugeField {
    label: String,
    dim: usize,
    potential: Potential,
    curvature: Option<Curvature>,
    /// Center about which gauge-invariant densities are radial, if any.
    radial_center: Option<Point>,
}

impl fmt::Debug for GaugeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("closed_curvature", &self.curvature.is_some())
            .field("radial_center", &self.radial_center)
            .finish()
    }
}

impl GaugeField {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        potential: impl Fn(&Point) -> [SkewMatrix; 4] + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            dim,
            potential: Arc::new(potential),
            curvature: None,
            radial_center: None,
        }
    }

    pub fn with_curvature(
        mut self,
        f: impl Fn(&Point) -> AlgebraTwoForm + Send + Sync + 'static,
    ) -> Self {
        self.curvature = Some(Arc::new(f));
        self
    }

    /// Declares `|F+|` and `|F-|` radial about `center`.
    pub fn with_radial_center(mut self, center: Point) -> Self {
        self.radial_center = Some(center);
        self
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, move |_| std::array::from_fn(|_| SkewMatrix::zero(dim)))
            .with_curvature(move |_| AlgebraTwoForm::zero(dim))
            .with_radial_center([0.0; 4])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_closed_curvature(&self) -> bool {
        self.curvature.is_some()
    }

    pub fn radial_center(&self) -> Option<Point> {
        self.radial_center
    }

    /// Components `A_i(x)`, checked finite.
    pub fn potential(&self, x: &Point) -> Result<[SkewMatrix; 4]> {
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::OutsideDomain(format!("{x:?}")));
        }
        let a = (self.potential)(x);
        if a.iter().any(|m| m.entries().iter().any(|v| !v.is_finite())) {
            return Err(Error::OutsideDomain(format!("{}: potential not finite at {x:?}", self.label)));
        }
        Ok(a)
    }

    /// Pulls the field back by the reflection `x4 -> -x4`, which reverses
    /// orientation and swaps the self-dual and anti-self-dual parts.
    pub fn reflected(&self) -> Self {
        let flip = |x: &Point| [x[0], x[1], x[2], -x[3]];
        let pot = self.potential.clone();
        let mut out = Self::new(format!("reflected {}", self.label), self.dim, move |x| {
            let mut a = pot(&flip(x));
            a[3] = -a[3].clone();
            a
        });
        if let Some(curv) = self.curvature.clone() {
            out = out.with_curvature(move |x| {
                let f = curv(&flip(x));
                // pairs (i, 4) change sign
                let c = f.components();
                TwoForm::new([
                    c[0].clone(),
                    c[1].clone(),
                    -c[2].clone(),
                    c[3].clone(),
                    -c[4].clone(),
                    -c[5].clone(),
                ])
            });
        }
        out.radial_center = self.radial_center.map(|c| flip(&c));
        out
    }
}

/// Center and scale of a one-instanton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantonParams {
    center: Point,
    scale: f64,
}

impl InstantonParams {
    pub fn new(center: Point, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("instanton scale must be positive, got {scale}")));
        }
        if !center.iter().all(|v| v.is_finite()) {
            return Err(invalid("instanton center must be finite"));
        }
        Ok(Self { center, scale })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Default for InstantonParams {
    fn default() -> Self {
        Self {
            center: [0.0; 4],
            scale: 1.0,
        }
    }
}

/// `|F(x)| = sqrt(48) lambda^2 / (lambda^2 + |x - y|^2)^2` for alpha = 1/2.
pub fn bpst_norm(params: &InstantonParams, x: &Point) -> f64 {
    let d2: f64 = (0..4).map(|i| (x[i] - params.center[i]).powi(2)).sum();
    let l2 = params.scale * params.scale;
    48f64.sqrt() * l2 / (l2 + d2).powi(2)
}

/// The charge-one instanton in so(4).
pub fn bpst_field(params: InstantonParams) -> GaugeField {
    let eta: [SkewMatrix; 3] = std::array::from_fn(|a| thooft_eta(a + 1));
    let gens: [SkewMatrix; 3] = std::array::from_fn(|a| su2_generator(a + 1));
    let (y, lam) = (params.center, params.scale);
    let (eta2, gens2) = (eta.clone(), gens.clone());
    GaugeField::new(format!("bpst(y={y:?}, lambda={lam})"), 4, move |x| {
        let d: Point = std::array::from_fn(|i| x[i] - y[i]);
        let s = 2.0 / (d.iter().map(|v| v * v).sum::<f64>() + lam * lam);
        std::array::from_fn(|mu| {
            let mut m = SkewMatrix::zero(4);
            for a in 0..3 {
                let c: f64 = (0..4).map(|nu| eta[a].get(mu, nu) * d[nu]).sum();
                if c != 0.0 {
                    m = m + gens[a].clone() * (s * c);
                }
            }
            m
        })
    })
    .with_curvature(move |x| {
        let d2: f64 = (0..4).map(|i| (x[i] - y[i]).powi(2)).sum();
        let c = -4.0 * lam * lam / (lam * lam + d2).powi(2);
        TwoForm::new(std::array::from_fn(|p| {
            let (mu, nu) = PAIRS[p];
            let mut m = SkewMatrix::zero(4);
            for a in 0..3 {
                let e = eta2[a].get(mu, nu);
                if e != 0.0 {
                    m = m + gens2[a].clone() * (c * e);
                }
            }
            m
        }))
    })
    .with_radial_center(y)
}

/// The orientation-reversed instanton (anti-self-dual, charge -1).
pub fn anti_bpst_field(params: InstantonParams) -> GaugeField {
    let y = params.center;
    let mirrored = InstantonParams {
        center: [y[0], y[1], y[2], -y[3]],
        ..params
    };
    bpst_field(mirrored).reflected()
}

fn potential_derivative(a: &GaugeField, x: &Point, i: usize, h: f64) -> Result<[SkewMatrix; 4]> {
    let p = a.potential(&shift(x, i, h))?;
    let m = a.potential(&shift(x, i, -h))?;
    Ok(std::array::from_fn(|j| (p[j].clone() - m[j].clone()) * (0.5 / h)))
}

/// Curvature at `x`, from the closed form when present and otherwise from
/// central differences of the potential.
pub fn curvature(a: &GaugeField, x: &Point) -> Result<AlgebraTwoForm> {
    let pot = a.potential(x)?;
    if let Some(f) = &a.curvature {
        return Ok(f(x));
    }
    let h = step_for(x);
    let d: Vec<[SkewMatrix; 4]> = (0..4)
        .map(|i| potential_derivative(a, x, i, h))
        .collect::<Result<_>>()?;
    Ok(TwoForm::new(std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        d[i][j].clone() - d[j][i].clone() + pot[i].bracket_unchecked(&pot[j])
    })))
}

/// `nabla_i F` for `i = 1..4` by central differences of the curvature.
fn covariant_derivatives(a: &GaugeField, x: &Point) -> Result<[AlgebraTwoForm; 4]> {
    let pot = a.potential(x)?;
    let f0 = curvature(a, x)?;
    let h = step_for(x);
    let mut out: [AlgebraTwoForm; 4] = std::array::from_fn(|_| AlgebraTwoForm::zero(a.dim));
    for i in 0..4 {
        let fp = curvature(a, &shift(x, i, h))?;
        let fm = curvature(a, &shift(x, i, -h))?;
        let ai = &pot[i];
        out[i] = TwoForm::new(std::array::from_fn(|p| {
            let partial = (fp.components()[p].clone() - fm.components()[p].clone()) * (0.5 / h);
            partial + ai.bracket_unchecked(&f0.components()[p])
        }));
    }
    Ok(out)
}

fn component(f: &AlgebraTwoForm, i: usize, j: usize) -> SkewMatrix {
    f.get(i, j)
}

/// `sum_j |sum_i nabla_i F_ij|`, the Yang-Mills equation residual.
pub fn ym_residual(a: &GaugeField, x: &Point, metric: &AlgebraMetric) -> Result<f64> {
    let nf = covariant_derivatives(a, x)?;
    let mut total = 0.0;
    for j in 0..4 {
        let mut s = SkewMatrix::zero(a.dim);
        for (i, nfi) in nf.iter().enumerate() {
            s = s + component(nfi, i, j);
        }
        total += s.norm(metric);
    }
    Ok(total)
}

/// `sum_{i<j<k} |nabla_i F_jk + nabla_j F_ki + nabla_k F_ij|`, zero for every
/// connection.
pub fn bianchi_residual(a: &GaugeField, x: &Point, metric: &AlgebraMetric) -> Result<f64> {
    let nf = covariant_derivatives(a, x)?;
    let mut total = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                let s = component(&nf[i], j, k) + component(&nf[j], k, i) + component(&nf[k], i, j);
                total += s.norm(metric);
            }
        }
    }
    Ok(total)
}

/// `(|F+|, |F-|)` at `x`.
pub fn dual_norms(a: &GaugeField, x: &Point, metric: &AlgebraMetric) -> Result<(f64, f64)> {
    let (p, m) = project_pm(&curvature(a, x)?);
    Ok((norm(&p, metric), norm(&m, metric)))
}

/// `|F|` measured in the round metric of S^4 through the stereographic chart.
pub fn pullback_norm_s4(a: &GaugeField, x: &Point, metric: &AlgebraMetric) -> Result<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(norm(&curvature(a, x)?, metric) * (0.5 * (1.0 + r2)).powi(2))
}

/// `(1/8 pi^2) int (|F+|^2 - |F-|^2)` over R^4, with norms taken at alpha = 1/2
/// where the unit instanton has charge one.
///
/// Needs a field whose densities are radial about a declared center. The
/// integral runs over `r = t/(1-t)`, `t in (0, 1)`; a field with
/// `r^4 |F|^2` not decaying at large `r` is reported as divergent.
pub fn charge(a: &GaugeField) -> Result<f64> {
    charge_with_tol(a, 1e-12)
}

/// [`charge`] with a chosen relative quadrature tolerance.
pub fn charge_with_tol(a: &GaugeField, rel_tol: f64) -> Result<f64> {
    let c = a.radial_center.ok_or_else(|| {
        Error::Undefined(format!("{}: charge needs radially symmetric densities", a.label))
    })?;
    let metric = AlgebraMetric::default();
    let density = |r: f64| -> Result<(f64, f64)> {
        let x = [c[0] + r, c[1], c[2], c[3]];
        let (p, m) = dual_norms(a, &x, &metric)?;
        Ok((p * p, m * m))
    };
    let tail = |r: f64| -> Result<f64> {
        let (p, m) = density(r)?;
        Ok(r.powi(4) * (p + m))
    };
    let (t3, t4) = (tail(1e3)?, tail(1e4)?);
    if t4 > 1e-8 && t4 >= 0.5 * t3 {
        return Err(Error::Divergent(format!(
            "{}: r^4 |F|^2 does not decay ({t3:e} at 1e3, {t4:e} at 1e4)",
            a.label
        )));
    }
    let integrand = |t: f64| {
        let r = t / (1.0 - t);
        match density(r) {
            Ok((p, m)) => 2.0 * PI * PI * r.powi(3) * (p - m) / (1.0 - t).powi(2),
            Err(_) => f64::NAN,
        }
    };
    let q = integrate_graded(integrand, 0.0, 1.0, &QuadConfig::with_tol(0.0, rel_tol));
    if !q.value.is_finite() {
        return Err(Error::Divergent(format!("{}: charge integral not finite", a.label)));
    }
    Ok(q.value / (8.0 * PI * PI))
}

/// Monte-Carlo charge estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Charge by uniform sampling of S^4, mapped to R^4 stereographically.
pub fn charge_monte_carlo<R: Rng + ?Sized>(
    a: &GaugeField,
    samples: usize,
    rng: &mut R,
) -> Result<ChargeEstimate> {
    if samples < 2 {
        return Err(invalid("Monte-Carlo charge needs at least two samples"));
    }
    let metric = AlgebraMetric::default();
    let vol_s4 = 8.0 * PI * PI / 3.0;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let u: [f64; 5] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u = u.map(|v| v / n);
        let x: Point = std::array::from_fn(|i| u[i] / (1.0 - u[4]));
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let (p, m) = dual_norms(a, &x, &metric)?;
        let v = (p * p - m * m) * (0.5 * (1.0 + r2)).powi(4);
        sum += v;
        sum_sq += v * v;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let scale = vol_s4 / (8.0 * PI * PI);
    Ok(ChargeEstimate {
        value: scale * mean,
        std_error: scale * (var / nf).sqrt(),
    })
}

/// Outcome of a Kato-ratio sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KatoSample {
    Ratio(f64),
    /// `|F+|` vanishes or is critical at the point.
    Undefined,
}

/// `|nabla F+|^2 / |nabla |F+||^2` at `x`.
pub fn kato_ratio(a: &GaugeField, x: &Point, metric: &AlgebraMetric) -> Result<KatoSample> {
    let pot = a.potential(x)?;
    let h = step_for(x);
    let plus = |y: &Point| -> Result<AlgebraTwoForm> { Ok(project_pm(&curvature(a, y)?).0) };
    let f0 = plus(x)?;
    let n0 = norm(&f0, metric);
    let mut cov_sq = 0.0;
    let mut grad_sq = 0.0;
    for i in 0..4 {
        let fp = plus(&shift(x, i, h))?;
        let fm = plus(&shift(x, i, -h))?;
        let d = TwoForm::new(std::array::from_fn(|p| {
            (fp.components()[p].clone() - fm.components()[p].clone()) * (0.5 / h)
                + pot[i].bracket_unchecked(&f0.components()[p])
        }));
        let dn = (norm(&fp, metric) - norm(&fm, metric)) * (0.5 / h);
        cov_sq += norm(&d, metric).powi(2);
        grad_sq += dn * dn;
    }
    if n0 == 0.0 || grad_sq <= 1e-12 * cov_sq.max(n0 * n0) {
        return Ok(KatoSample::Undefined);
    }
    Ok(KatoSample::Ratio(cov_sq / grad_sq))
}
