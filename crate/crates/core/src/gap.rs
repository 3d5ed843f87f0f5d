//! Pointwise thresholds for `|F+|` (or `|F-|`), gap verdicts over sample
//! sets, and a finite-difference check of the differential inequality
//!
//! ```text
//! |F+|^p Lap |F+|^p >= (1 - 1/(2p)) |grad |F+|^p|^2 + (p/3) R |F+|^2p
//!                      - 2p lambda_max(W+) |F+|^2p - p a_G |F+|^(2p+1).
//! ```
//!
//! Every threshold has the shape `(c q + R/3 - 2 lambda_max(W)) / a_G` where
//! `c` depends on the theorem: `(1/p)(2 - 1/(2p))` for the L^2p family, `2`
//! for the growth-rate family and a free `b` for the strict variant.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::forms::{norm, project_pm, AlgebraTwoForm, TwoForm, PAIRS};
use crate::gauge::{curvature, GaugeField};
use crate::geometry::{
    christoffel, curvature_at, invert4, metric_jet, orthonormal_frame, CurvatureData, ModelSpace,
    Point, Side, SpaceName, METRIC_STEP,
};
use crate::lie::{gap_constant, AlgebraMetric};
use crate::weights::{bgg_sinh_weight, carron_weight, chm_weight, RadialWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Theorem {
    T1,
    T2,
    T4,
    T5,
    T6,
    T9,
    T11,
    T14,
    C7,
    C10,
    C12,
}

impl Theorem {
    pub const ALL: [Theorem; 11] = [
        Theorem::T1,
        Theorem::T2,
        Theorem::T4,
        Theorem::T5,
        Theorem::T6,
        Theorem::T9,
        Theorem::T11,
        Theorem::T14,
        Theorem::C7,
        Theorem::C10,
        Theorem::C12,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::T1 => "T1",
            Theorem::T2 => "T2",
            Theorem::T4 => "T4",
            Theorem::T5 => "T5",
            Theorem::T6 => "T6",
            Theorem::T9 => "T9",
            Theorem::T11 => "T11",
            Theorem::T14 => "T14",
            Theorem::C7 => "C7",
            Theorem::C10 => "C10",
            Theorem::C12 => "C12",
        }
    }

    /// Theorems whose `q` coefficient is `(1/p)(2 - 1/(2p))`.
    fn uses_lp_coefficient(&self) -> bool {
        matches!(self, Theorem::T1 | Theorem::T11 | Theorem::T14 | Theorem::C12)
    }

    fn needs_p(&self) -> bool {
        self.uses_lp_coefficient() || *self == Theorem::T4
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                kind: "theorem",
                name: s.to_string(),
            })
    }
}

/// `(1/p)(2 - 1/(2p))`.
pub fn lp_coefficient(p: f64) -> f64 {
    (2.0 - 0.5 / p) / p
}

/// Constant part of the hyperbolic threshold, `(1/p)(2 - 1/(2p)) 9/4 - 4`,
/// nonnegative exactly for `3/8 <= p <= 3/4`.
pub fn c12_constant_part(p: f64) -> f64 {
    lp_coefficient(p) * 2.25 - 4.0
}

/// A selected threshold with all of its parameters.
#[derive(Debug, Clone)]
pub struct GapBoundSpec {
    pub theorem: Theorem,
    pub space: ModelSpace,
    pub weight: Option<RadialWeight>,
    pub p: f64,
    pub b: f64,
    pub side: Side,
    pub metric: AlgebraMetric,
    pub n: usize,
}

impl GapBoundSpec {
    /// Defaults for a theorem on a space: the weight the theorem names, `p =
    /// 1/2`, `b = 1`, so(4), alpha = 1/2, and the minus side on `CP2`/`CH2`.
    pub fn for_theorem(theorem: Theorem, space: ModelSpace) -> Result<Self> {
        let weight = match theorem {
            Theorem::T9 | Theorem::C10 => Some(carron_weight()),
            Theorem::T11 | Theorem::C12 => Some(bgg_sinh_weight(1.0)?),
            Theorem::T14 => Some(chm_weight(2)?),
            _ => None,
        };
        let side = match space.name() {
            SpaceName::CP2 | SpaceName::CH2 => Side::Minus,
            _ => Side::Plus,
        };
        let spec = Self {
            theorem,
            space,
            weight,
            p: 0.5,
            b: 1.0,
            side,
            metric: AlgebraMetric::default(),
            n: 4,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(invalid(format!("structure group dimension n = {} below 3", self.n)));
        }
        if self.theorem.needs_p() && !(self.p > 0.25 && self.p.is_finite()) {
            return Err(invalid(format!("{} needs p > 1/4, got {}", self.theorem, self.p)));
        }
        if self.theorem == Theorem::C12 && !(0.375..=0.75).contains(&self.p) {
            return Err(invalid(format!("C12 needs 3/8 <= p <= 3/4, got {}", self.p)));
        }
        if self.theorem == Theorem::T4 {
            let hi = lp_coefficient(self.p);
            if !(self.b > 0.0 && self.b < hi) {
                return Err(invalid(format!("T4 needs 0 < b < {hi}, got {}", self.b)));
            }
        }
        Ok(())
    }

    /// Coefficient of `q` in the threshold.
    pub fn q_coefficient(&self) -> f64 {
        if self.theorem.uses_lp_coefficient() {
            lp_coefficient(self.p)
        } else if self.theorem == Theorem::T4 {
            self.b
        } else {
            2.0
        }
    }

    pub fn gap_constant(&self) -> Result<f64> {
        gap_constant(self.n, &self.metric)
    }

    fn q(&self, rho: f64) -> f64 {
        self.weight.as_ref().map_or(0.0, |w| w.q(rho))
    }
}

/// Threshold at distance `rho` given the curvature there.
pub fn threshold_with_curvature(spec: &GapBoundSpec, rho: f64, curv: &CurvatureData) -> Result<f64> {
    spec.validate()?;
    let a_g = spec.gap_constant()?;
    let q = spec.q(rho);
    Ok((spec.q_coefficient() * q + curv.scalar / 3.0 - 2.0 * curv.lambda_max(spec.side)) / a_g)
}

/// Threshold at a chart point.
pub fn threshold(spec: &GapBoundSpec, x: &Point) -> Result<f64> {
    let curv = curvature_at(&spec.space, x)?;
    threshold_with_curvature(spec, spec.space.rho(x)?, &curv)
}

/// Threshold as a function of `rho` alone. The catalog spaces are
/// homogeneous, so the curvature is taken once at a reference point; this
/// reaches distances where the chart itself has run out of precision.
pub fn threshold_profile(spec: &GapBoundSpec) -> Result<impl Fn(f64) -> f64 + '_> {
    let reference = spec.space.point_at_distance(0.5)?;
    let curv = curvature_at(&spec.space, &reference)?;
    threshold_with_curvature(spec, 0.5, &curv)?;
    let a_g = spec.gap_constant()?;
    let c = spec.q_coefficient();
    let base = curv.scalar / 3.0 - 2.0 * curv.lambda_max(spec.side);
    Ok(move |rho: f64| (c * spec.q(rho) + base) / a_g)
}

/// `(|F+|, |F-|)` of a chart connection measured in the space's metric.
pub fn frame_dual_norms(
    a: &GaugeField,
    space: &ModelSpace,
    x: &Point,
    metric: &AlgebraMetric,
) -> Result<(f64, f64)> {
    let f = curvature(a, x)?;
    let e = orthonormal_frame(&space.metric(x)?)?;
    let hat = frame_components(&f, &e);
    let (p, m) = project_pm(&hat);
    Ok((norm(&p, metric), norm(&m, metric)))
}

fn frame_components(f: &AlgebraTwoForm, e: &[[f64; 4]; 4]) -> AlgebraTwoForm {
    TwoForm::new(std::array::from_fn(|k| {
        let (a, b) = PAIRS[k];
        let mut acc = crate::lie::SkewMatrix::zero(f.dim());
        for i in 0..4 {
            for j in 0..4 {
                let c = e[a][i] * e[b][j];
                if c != 0.0 && i != j {
                    acc = acc + f.get(i, j) * c;
                }
            }
        }
        acc
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Hypothesis met with strict inequality at some sample.
    VanishingBranch,
    /// The field norm equals the threshold at every sample.
    EqualityBranch,
    HypothesisViolated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::VanishingBranch => "vanishing_branch",
            Verdict::EqualityBranch => "equality_branch",
            Verdict::HypothesisViolated => "hypothesis_violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapTolerances {
    /// Equality band: `|margin| < equality_rel (1 + |threshold|)`.
    pub equality_rel: f64,
    /// A sample violates the hypothesis when `margin < -violation_abs`.
    pub violation_abs: f64,
}

impl Default for GapTolerances {
    fn default() -> Self {
        Self {
            equality_rel: 1e-6,
            violation_abs: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSample {
    pub rho: f64,
    pub point: Point,
    pub field_norm: f64,
    pub threshold: f64,
    /// `threshold - field_norm`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    /// Sorted by `rho` (stable).
    pub samples: Vec<GapSample>,
    pub verdict: Verdict,
    /// Sample with the largest margin when the verdict is the vanishing branch.
    pub strictness_witness: Option<GapSample>,
    /// Sample with the most negative margin when the hypothesis fails.
    pub violation_witness: Option<GapSample>,
    pub tolerances: GapTolerances,
}

/// Classifies already computed samples.
pub fn classify(samples: &[GapSample], tol: &GapTolerances) -> (Verdict, Option<GapSample>, Option<GapSample>) {
    let by_margin = |a: &&GapSample, b: &&GapSample| a.margin.total_cmp(&b.margin);
    let lowest = samples.iter().min_by(by_margin).copied();
    let highest = samples.iter().max_by(by_margin).copied();
    let equal = samples
        .iter()
        .all(|s| s.margin.abs() < tol.equality_rel * (1.0 + s.threshold.abs()));
    if equal {
        return (Verdict::EqualityBranch, None, None);
    }
    if samples.iter().any(|s| !(s.margin >= -tol.violation_abs)) {
        return (Verdict::HypothesisViolated, None, lowest);
    }
    match highest {
        Some(h) if h.margin > 0.0 => (Verdict::VanishingBranch, Some(h), None),
        _ => (Verdict::HypothesisViolated, None, lowest),
    }
}

/// Compares `field_norm` against the spec's threshold at every sample.
pub fn evaluate_gap(
    field_norm: &dyn Fn(&Point) -> Result<f64>,
    spec: &GapBoundSpec,
    samples: &[Point],
) -> Result<GapReport> {
    evaluate_gap_with(field_norm, spec, samples, GapTolerances::default())
}

pub fn evaluate_gap_with(
    field_norm: &dyn Fn(&Point) -> Result<f64>,
    spec: &GapBoundSpec,
    samples: &[Point],
    tolerances: GapTolerances,
) -> Result<GapReport> {
    if samples.is_empty() {
        return Err(Error::Empty("gap samples"));
    }
    spec.validate()?;
    let mut rows = Vec::with_capacity(samples.len());
    for x in samples {
        let th = threshold(spec, x)?;
        let f = field_norm(x)?;
        rows.push(GapSample {
            rho: spec.space.rho(x)?,
            point: *x,
            field_norm: f,
            threshold: th,
            margin: th - f,
        });
    }
    rows.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    let (verdict, strictness_witness, violation_witness) = classify(&rows, &tolerances);
    Ok(GapReport {
        samples: rows,
        verdict,
        strictness_witness,
        violation_witness,
        tolerances,
    })
}

/// Field norm on the spec's side, measured in the space's metric.
pub fn side_norm<'a>(
    a: &'a GaugeField,
    spec: &'a GapBoundSpec,
) -> impl Fn(&Point) -> Result<f64> + 'a {
    move |x| {
        let (p, m) = frame_dual_norms(a, &spec.space, x, &spec.metric)?;
        Ok(match spec.side {
            Side::Plus => p,
            Side::Minus => m,
        })
    }
}

/// Both sides of the differential inequality at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma3Sides {
    pub lhs: f64,
    pub rhs: f64,
    /// `1e-3 (1 + |rhs|)` plus the Richardson error estimate.
    pub tol: f64,
}

impl Lemma3Sides {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs - self.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Lemma3Outcome {
    Evaluated(Lemma3Sides),
    /// `|F+|` vanishes at the point.
    Skipped,
}

/// Step of the `|F+|^p` finite differences (halved once for Richardson).
pub const LEMMA3_STEP: f64 = 1e-3;

struct Stencil {
    grad: [f64; 4],
    hess: [[f64; 4]; 4],
}

fn stencil(f: &dyn Fn(&Point) -> Result<f64>, x: &Point, f0: f64, h: f64) -> Result<Stencil> {
    let at = |moves: &[(usize, f64)]| {
        let mut y = *x;
        for &(i, d) in moves {
            y[i] += d;
        }
        f(&y)
    };
    let mut grad = [0.0; 4];
    let mut hess = [[0.0; 4]; 4];
    for i in 0..4 {
        let p = at(&[(i, h)])?;
        let m = at(&[(i, -h)])?;
        grad[i] = (p - m) / (2.0 * h);
        hess[i][i] = (p - 2.0 * f0 + m) / (h * h);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                + at(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(Stencil { grad, hess })
}

/// Evaluates both sides of the inequality for `F+` of `a` on `space` at `x`.
///
/// `f = |F+|^p` is differentiated by central differences in the chart and
/// the Laplace-Beltrami operator is `g^ij (d_i d_j f - Gamma^k_ij d_k f)`.
pub fn lemma3_check(
    a: &GaugeField,
    space: &ModelSpace,
    p: f64,
    x: &Point,
    metric: &AlgebraMetric,
) -> Result<Lemma3Outcome> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p must be positive, got {p}")));
    }
    let plus = |y: &Point| -> Result<f64> { Ok(frame_dual_norms(a, space, y, metric)?.0) };
    let n0 = plus(x)?;
    if n0 == 0.0 {
        return Ok(Lemma3Outcome::Skipped);
    }
    let f = |y: &Point| -> Result<f64> { Ok(plus(y)?.powf(p)) };
    let f0 = n0.powf(p);

    let jet = metric_jet(space, x, METRIC_STEP)?;
    let g_inv = invert4(&jet.g)?;
    let gamma = christoffel(&g_inv, &jet.dg);
    let curv = curvature_at(space, x)?;
    let a_g = gap_constant(a.dim(), metric)?;

    let sides = |s: &Stencil| -> (f64, f64) {
        let mut lap = 0.0;
        let mut grad_sq = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let christ: f64 = (0..4).map(|k| gamma[k][i][j] * s.grad[k]).sum();
                lap += g_inv[i][j] * (s.hess[i][j] - christ);
                grad_sq += g_inv[i][j] * s.grad[i] * s.grad[j];
            }
        }
        let lhs = f0 * lap;
        let rhs = (1.0 - 0.5 / p) * grad_sq + (p / 3.0) * curv.scalar * f0 * f0
            - 2.0 * p * curv.lambda_max_plus * f0 * f0
            - p * a_g * f0 * f0 * n0;
        (lhs, rhs)
    };
    let (lhs_h, rhs_h) = sides(&stencil(&f, x, f0, LEMMA3_STEP)?);
    let (lhs_q, rhs_q) = sides(&stencil(&f, x, f0, 0.5 * LEMMA3_STEP)?);
    let lhs = (4.0 * lhs_q - lhs_h) / 3.0;
    let rhs = (4.0 * rhs_q - rhs_h) / 3.0;
    let discretization = (lhs - lhs_q).abs() + (rhs - rhs_q).abs();
    Ok(Lemma3Outcome::Evaluated(Lemma3Sides {
        lhs,
        rhs,
        tol: 1e-3 * (1.0 + rhs.abs()) + discretization,
    }))
}
