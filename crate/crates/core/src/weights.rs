//! Radial weights for weighted Poincare inequalities `int q phi^2 <= int |grad phi|^2`
//! and a quadrature verifier over radial test functions.
//!
//! Only radial test functions are integrated: for `phi = phi(rho)` the
//! inequality reduces to one-dimensional integrals against the volume
//! density `J` of the geodesic spheres. The verifier reports the ratio
//! `int phi'^2 J / int q phi^2 J` rather than a boolean so that sharpness
//! is visible.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ModelSpace, VolumeGrowth};
use crate::quadrature::{integrate_graded, shells_diverge, QuadConfig};
use crate::radial::{csch2, RadialMap};

/// Pass threshold for [`verify_poincare`].
pub const POINCARE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    /// `q = O(rho^2)` and not bounded.
    QuadraticGrowth,
    Bounded,
    /// `q -> 0`.
    Decaying,
}

/// Weight named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Carron,
    Bgg,
    Ak,
    Chm,
}

impl FromStr for WeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "carron" => Ok(WeightKind::Carron),
            "bgg" => Ok(WeightKind::Bgg),
            "ak" => Ok(WeightKind::Ak),
            "chm" => Ok(WeightKind::Chm),
            _ => Err(Error::UnknownName {
                kind: "weight",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Carron => "carron",
            WeightKind::Bgg => "bgg",
            WeightKind::Ak => "ak",
            WeightKind::Chm => "chm",
        })
    }
}

/// A weight `q(rho)` with its large-`rho` class.
#[derive(Debug, Clone)]
pub struct RadialWeight {
    name: String,
    profile: RadialMap,
    growth: GrowthClass,
    singular_at_origin: bool,
}

/// Log-spaced sample grid on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Growth class of `q` read off from samples on `[1e2, 1e4]`.
///
/// The log-log slope between the ends decides: below `-1/2` the weight
/// decays, within `1/2` of zero it is bounded, and up to `5/2` it grows
/// like `rho^2`. A steeper slope is an error.
pub fn sampled_growth(q: impl Fn(f64) -> f64) -> Result<GrowthClass> {
    sampled_growth_until(q, 1e4)
}

/// [`sampled_growth`] on the window `[hi/100, hi]`.
fn sampled_growth_until(q: impl Fn(f64) -> f64, hi: f64) -> Result<GrowthClass> {
    let grid = log_grid(hi / 100.0, hi, 33);
    let vals: Vec<f64> = grid.iter().map(|&r| q(r)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvariantViolation(format!(
            "weight not finite on [{}, {hi}]",
            hi / 100.0
        )));
    }
    let (a, b) = (vals[0].abs(), vals[vals.len() - 1].abs());
    if b == 0.0 && a == 0.0 {
        return Ok(GrowthClass::Bounded);
    }
    if a == 0.0 {
        return Err(Error::InvariantViolation("weight vanishes then grows".into()));
    }
    if b == 0.0 {
        return Ok(GrowthClass::Decaying);
    }
    let slope = (b / a).ln() / 1e2f64.ln();
    if slope < -0.5 {
        Ok(GrowthClass::Decaying)
    } else if slope <= 0.5 {
        Ok(GrowthClass::Bounded)
    } else if slope <= 2.5 {
        Ok(GrowthClass::QuadraticGrowth)
    } else {
        Err(Error::InvariantViolation(format!(
            "weight grows like rho^{slope:.3}, faster than rho^2"
        )))
    }
}

fn sampled_singular(q: &RadialMap) -> bool {
    let r = 1e-6;
    let v = q.eval(r);
    !v.is_finite() || (v * r * r).abs() > 1e-3
}

impl RadialWeight {
    /// Builds a weight, checking finiteness on a sample grid and that the
    /// declared class matches [`sampled_growth`].
    pub fn new(
        name: impl Into<String>,
        profile: RadialMap,
        growth: GrowthClass,
        singular_at_origin: bool,
    ) -> Result<Self> {
        Self::checked(name.into(), profile, Some(growth), singular_at_origin, 1e4)
    }

    /// Builds a weight with class and origin behaviour taken from samples.
    pub fn sampled(name: impl Into<String>, profile: RadialMap) -> Result<Self> {
        let singular = sampled_singular(&profile);
        Self::checked(name.into(), profile, None, singular, 1e4)
    }

    fn checked(
        name: String,
        profile: RadialMap,
        declared: Option<GrowthClass>,
        singular_at_origin: bool,
        hi: f64,
    ) -> Result<Self> {
        for r in log_grid(1e-3, hi, 71) {
            if !profile.eval(r).is_finite() {
                return Err(Error::InvariantViolation(format!("{name}: q({r}) is not finite")));
            }
        }
        let sampled = sampled_growth_until(|r| profile.eval(r), hi)?;
        if let Some(growth) = declared {
            if sampled != growth {
                return Err(Error::InvariantViolation(format!(
                    "{name}: declared {growth:?} but samples look {sampled:?}"
                )));
            }
        }
        Ok(Self {
            name,
            profile,
            growth: sampled,
            singular_at_origin,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self, rho: f64) -> f64 {
        self.profile.eval(rho)
    }

    pub fn growth_class(&self) -> GrowthClass {
        self.growth
    }

    pub fn singular_at_origin(&self) -> bool {
        self.singular_at_origin
    }
}

/// `q = 1/rho^2`.
pub fn carron_weight() -> RadialWeight {
    RadialWeight::new(
        "carron",
        RadialMap::new(|r| 1.0 / (r * r)),
        GrowthClass::Decaying,
        true,
    )
    .expect("valid weight")
}

/// Sample points for the conditions on `psi`.
fn psi_grid() -> Vec<f64> {
    log_grid(1e-2, 10.0, 64)
}

/// `q = (3/4)(2 psi''/psi + (psi'^2 - 1)/psi^2) + 1/(4 rho^2) + 3/(4 psi^2)`.
///
/// `psi` must satisfy `psi(0) = 0`, `psi'(0) = 1`, `psi''(0) = 0` and be
/// increasing and convex; the conditions are checked on samples.
pub fn bgg_weight(psi: RadialMap) -> Result<RadialWeight> {
    let (p0, d0, dd0) = psi.jet_at_origin();
    if p0.abs() > 1e-12 || (d0 - 1.0).abs() > 1e-6 || dd0.abs() > 1e-4 {
        return Err(invalid(format!(
            "psi needs psi(0)=0, psi'(0)=1, psi''(0)=0; got ({p0:e}, {d0:e}, {dd0:e})"
        )));
    }
    for r in psi_grid() {
        let (d1, d2) = (psi.d1(r), psi.d2(r));
        if !(d1 > 0.0) {
            return Err(invalid(format!("psi not increasing at rho = {r}")));
        }
        if d2 < -1e-6 * d1.max(1.0) {
            return Err(invalid(format!("psi not convex at rho = {r}")));
        }
    }
    let q = RadialMap::new(move |r: f64| {
        let (p, d1, d2) = (psi.eval(r), psi.d1(r), psi.d2(r));
        0.75 * (2.0 * d2 / p + (d1 * d1 - 1.0) / (p * p)) + 0.25 / (r * r) + 0.75 / (p * p)
    });
    // exponentially growing psi overflows long before 1e4; sample growth
    // on the last window where q is still representable
    let hi = log_grid(1e2, 1e4, 41)
        .into_iter()
        .take_while(|&r| q.eval(r).is_finite())
        .last()
        .ok_or_else(|| invalid("psi overflows before rho = 100"))?;
    let singular = sampled_singular(&q);
    RadialWeight::checked("bgg".into(), q, None, singular, hi)
}

/// `psi = sinh(b rho)/b` with closed-form derivatives.
pub fn sinh_profile(b: f64) -> Result<RadialMap> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("b must be positive, got {b}")));
    }
    Ok(RadialMap::new(move |r| (b * r).sinh() / b)
        .with_first(move |r| (b * r).cosh())
        .with_second(move |r| b * (b * r).sinh()))
}

/// [`bgg_weight`] for `psi = sinh(b rho)/b`, written in the closed form
/// `9b^2/4 + 1/(4 rho^2) + 3b^2/(4 sinh^2(b rho))`, which stays finite where
/// `psi` itself overflows.
pub fn bgg_sinh_weight(b: f64) -> Result<RadialWeight> {
    sinh_profile(b)?;
    RadialWeight::new(
        "bgg",
        RadialMap::new(move |r| 2.25 * b * b + 0.25 / (r * r) + 0.75 * b * b * csch2(b * r)),
        GrowthClass::Bounded,
        true,
    )
}

/// `q = 1/(4 rho^2) + (Delta rho)^2/4 + (1/2) d(Delta rho)/d rho`.
///
/// Without a closed-form derivative the profile is checked for matching
/// one-sided difference quotients on a sample grid.
pub fn ak_weight(laplacian_rho: RadialMap) -> Result<RadialWeight> {
    if !laplacian_rho.has_closed_first() {
        for r in log_grid(1e-2, 1e2, 41) {
            let h = 1e-4 * r.max(1.0);
            let f0 = laplacian_rho.eval(r);
            let left = (f0 - laplacian_rho.eval(r - h)) / h;
            let right = (laplacian_rho.eval(r + h) - f0) / h;
            let tol = 1e-2 * (1.0 + left.abs().max(right.abs()));
            if !(left - right).abs().le(&tol) {
                return Err(invalid(format!("Delta rho profile not differentiable at rho = {r}")));
            }
        }
    }
    let q = move |r: f64| {
        let l = laplacian_rho.eval(r);
        0.25 / (r * r) + 0.25 * l * l + 0.5 * laplacian_rho.d1(r)
    };
    RadialWeight::sampled("ak", RadialMap::new(q))
}

/// [`ak_weight`] of a space's `Delta rho` profile. Compact spaces are
/// rejected since the profile ends at the diameter.
pub fn ak_weight_for(space: &ModelSpace) -> Result<RadialWeight> {
    if space.diameter().is_some() {
        return Err(invalid(format!(
            "{} is compact; its distance Laplacian is not defined on (0, inf)",
            space.name()
        )));
    }
    ak_weight(space.laplacian_profile())
}

/// `1/(4 rho^2) - 1/sinh^2(2 rho)`, with a series near the origin where the
/// two terms cancel.
fn hardy_remainder(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        1.0 / 3.0 - 4.0 * r2 / 15.0 + 32.0 * r2 * r2 / 189.0
    } else {
        0.25 / (r * r) - csch2(2.0 * r)
    }
}

/// Non-constant part `1/(4 rho^2) + (m-1)^2/sinh^2 rho - 1/sinh^2(2 rho)` of
/// [`chm_weight`].
pub fn chm_nonconstant(m: u32, rho: f64) -> f64 {
    let k = m as f64 - 1.0;
    k * k * csch2(rho) + hardy_remainder(rho)
}

/// `q = m^2 + 1/(4 rho^2) + (m-1)^2/sinh^2 rho - 1/sinh^2(2 rho)` on `CH^m`.
pub fn chm_weight(m: u32) -> Result<RadialWeight> {
    if m < 1 {
        return Err(invalid("chm weight needs m >= 1"));
    }
    let c = (m * m) as f64;
    RadialWeight::new(
        format!("chm{m}"),
        RadialMap::new(move |r| c + chm_nonconstant(m, r)),
        GrowthClass::Bounded,
        m >= 2,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffFamily {
    /// `2 - rho/r` on `[r, 2r]`.
    LinearCutoff,
    /// `2 - ln rho / ln r` on `[r, r^2]`.
    LogCutoff,
    /// `1 - (rho - r)` on `[r, r + 1]`.
    UnitCutoff,
    Custom,
}

impl FromStr for CutoffFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(CutoffFamily::LinearCutoff),
            "log" => Ok(CutoffFamily::LogCutoff),
            "unit" => Ok(CutoffFamily::UnitCutoff),
            _ => Err(Error::UnknownName {
                kind: "cutoff",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for CutoffFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutoffFamily::LinearCutoff => "linear",
            CutoffFamily::LogCutoff => "log",
            CutoffFamily::UnitCutoff => "unit",
            CutoffFamily::Custom => "custom",
        })
    }
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A compactly supported radial test function with its breakpoints.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    family: CutoffFamily,
    r: Option<f64>,
    value: Scalar,
    derivative: Option<Scalar>,
    /// Breakpoints of the piecewise-smooth profile, increasing; the last one
    /// is the end of the support.
    knots: Vec<f64>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("family", &self.family)
            .field("r", &self.r)
            .field("knots", &self.knots)
            .finish()
    }
}

/// One of the three cutoff families with parameter `r > 1`. The returned
/// functions equal 1 on `[0, r]` and satisfy `0 <= phi <= 1`.
pub fn cutoff(family: CutoffFamily, r: f64) -> Result<TestFunction> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(invalid(format!("cutoff radius must exceed 1, got {r}")));
    }
    let (outer, value, derivative): (f64, Scalar, Scalar) = match family {
        CutoffFamily::LinearCutoff => (
            2.0 * r,
            Arc::new(move |p| 2.0 - p / r),
            Arc::new(move |_| -1.0 / r),
        ),
        CutoffFamily::LogCutoff => {
            let lr = r.ln();
            (
                r * r,
                Arc::new(move |p: f64| 2.0 - p.ln() / lr),
                Arc::new(move |p| -1.0 / (p * lr)),
            )
        }
        CutoffFamily::UnitCutoff => (
            r + 1.0,
            Arc::new(move |p| 1.0 - (p - r)),
            Arc::new(|_| -1.0),
        ),
        CutoffFamily::Custom => return Err(invalid("use TestFunction::custom for custom trials")),
    };
    let inner_value = value.clone();
    let inner_derivative = derivative.clone();
    Ok(TestFunction {
        label: format!("{family}(r={r})"),
        family,
        r: Some(r),
        value: Arc::new(move |p| {
            if p <= r {
                1.0
            } else if p < outer {
                inner_value(p)
            } else {
                0.0
            }
        }),
        derivative: Some(Arc::new(move |p| {
            if p <= r || p >= outer {
                0.0
            } else {
                inner_derivative(p)
            }
        })),
        knots: vec![r, outer],
    })
}

impl TestFunction {
    /// A custom trial. `knots` are the breakpoints of the profile; the last
    /// one ends the support and the profile is taken as zero beyond it.
    pub fn custom(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: Option<Scalar>,
        knots: Vec<f64>,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Empty("test function knots"));
        }
        if knots[0] <= 0.0 || knots.windows(2).any(|w| !(w[0] < w[1])) || !knots[knots.len() - 1].is_finite() {
            return Err(invalid("knots must be positive, finite and increasing"));
        }
        let end = knots[knots.len() - 1];
        let value: Scalar = Arc::new(move |p| if p >= end { 0.0 } else { value(p) });
        let derivative = derivative.map(|d| -> Scalar {
            Arc::new(move |p| if p >= end { 0.0 } else { d(p) })
        });
        Ok(Self {
            label: label.into(),
            family: CutoffFamily::Custom,
            r: None,
            value,
            derivative,
            knots,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> CutoffFamily {
        self.family
    }

    pub fn radius(&self) -> Option<f64> {
        self.r
    }

    pub fn support_end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn value(&self, rho: f64) -> f64 {
        (self.value)(rho)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(rho),
            None => {
                let h = crate::radial::FIRST_STEP * rho.abs().max(1.0);
                (self.value(rho + h) - self.value((rho - h).max(0.0))) / (rho + h - (rho - h).max(0.0))
            }
        }
    }
}

/// `phi = rho^-1 psi(ln rho)` on flat space, with `psi` a trapezoid in
/// `s = ln rho`: zero outside `[-2L, 2L]`, one on `[-L, L]`, linear ramps.
/// Its ratio against the `1/rho^2` weight is `1 + 3/(4 L^2)`.
pub fn hardy_log_trial(l: f64) -> Result<TestFunction> {
    if !(l > 0.0 && l < 150.0) {
        return Err(invalid(format!("ramp length must be in (0, 150), got {l}")));
    }
    let psi = move |s: f64| {
        if s <= -2.0 * l || s >= 2.0 * l {
            0.0
        } else if s < -l {
            (s + 2.0 * l) / l
        } else if s <= l {
            1.0
        } else {
            (2.0 * l - s) / l
        }
    };
    let dpsi = move |s: f64| {
        if s <= -2.0 * l || s >= 2.0 * l {
            0.0
        } else if s < -l {
            1.0 / l
        } else if s <= l {
            0.0
        } else {
            -1.0 / l
        }
    };
    TestFunction::custom(
        format!("hardy_log(L={l})"),
        move |r: f64| psi(r.ln()) / r,
        Some(Arc::new(move |r: f64| (dpsi(r.ln()) - psi(r.ln())) / (r * r))),
        vec![(-2.0 * l).exp(), (-l).exp(), l.exp(), (2.0 * l).exp()],
    )
}

/// `phi = J^{-1/2} u` with `u` the trapezoid `0, 1` on `[a, a+1]`, `1` on
/// `[a+1, b-1]`, `1, 0` on `[b-1, b]`. Against a weight of the form
/// `1/(4 rho^2) + (Delta rho)^2/4 + (Delta rho)'/2` the ratio is
/// `(int u'^2 + int V u^2) / (int u^2/(4 rho^2) + int V u^2)`, which tends to
/// one as `b` grows when `V` has a positive limit.
pub fn ground_state_trial(space: &ModelSpace, a: f64, b: f64) -> Result<TestFunction> {
    if !(a > 0.0 && b > a + 2.0 && b.is_finite()) {
        return Err(invalid(format!("need 0 < a and a + 2 < b, got a = {a}, b = {b}")));
    }
    if space.diameter().is_some_and(|d| b >= d) {
        return Err(invalid("trial support exceeds the diameter"));
    }
    let u = move |r: f64| {
        if r <= a || r >= b {
            0.0
        } else if r < a + 1.0 {
            r - a
        } else if r <= b - 1.0 {
            1.0
        } else {
            b - r
        }
    };
    let du = move |r: f64| {
        if r <= a || r >= b {
            0.0
        } else if r < a + 1.0 {
            1.0
        } else if r <= b - 1.0 {
            0.0
        } else {
            -1.0
        }
    };
    let s = *space;
    let s2 = *space;
    TestFunction::custom(
        format!("ground_state({a},{b})"),
        move |r: f64| (-0.5 * s.log_volume_density(r)).exp() * u(r),
        Some(Arc::new(move |r: f64| {
            (-0.5 * s2.log_volume_density(r)).exp() * (du(r) - 0.5 * s2.laplacian_rho(r) * u(r))
        })),
        vec![a, a + 1.0, b - 1.0, b],
    )
}

/// Quadrature outcome for one test function. The integrals are taken
/// against `J / J_ref` for a common scale `exp(log_scale) = J_ref`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRatio {
    pub label: String,
    pub gradient_integral: f64,
    pub weight_integral: f64,
    pub log_scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareReport {
    pub space: String,
    pub weight: String,
    pub trials: Vec<TrialRatio>,
    pub min_ratio: f64,
    pub passed: bool,
}

fn poincare_quad() -> QuadConfig {
    QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_depth: 30,
        initial_panels: 2,
    }
}

/// Integrates `f` over the support of a piecewise-smooth function on the
/// graded mesh of each piece.
fn integrate_pieces(
    f: &dyn Fn(f64) -> f64,
    knots: &[f64],
    from_origin: bool,
    what: &str,
) -> Result<f64> {
    let cfg = poincare_quad();
    let mut total = 0.0;
    let mut edges = Vec::with_capacity(knots.len() + 1);
    if from_origin {
        edges.push(0.0);
    }
    edges.extend_from_slice(knots);
    for (k, w) in edges.windows(2).enumerate() {
        let q = integrate_graded(f, w[0], w[1], &cfg);
        if k == 0 && from_origin && shells_diverge(&q) {
            return Err(Error::Divergent(format!("{what} diverges at the origin")));
        }
        if !q.value.is_finite() {
            return Err(Error::Divergent(format!("{what} is not finite on [{}, {}]", w[0], w[1])));
        }
        total += q.value;
    }
    Ok(total)
}

/// Minimum over `tests` of `int phi'^2 J / int q phi^2 J`, integrated
/// radially from the base point. The check passes when the minimum is at
/// least `1 - POINCARE_TOL`.
pub fn verify_poincare(
    space: &ModelSpace,
    weight: &RadialWeight,
    tests: &[TestFunction],
) -> Result<PoincareReport> {
    if tests.is_empty() {
        return Err(Error::Empty("test functions"));
    }
    let mut trials = Vec::with_capacity(tests.len());
    for t in tests {
        let end = match space.diameter() {
            Some(d) => t.support_end().min(d),
            None => t.support_end(),
        };
        let mut knots: Vec<f64> = t.knots().iter().copied().filter(|&k| k < end).collect();
        knots.push(end);
        // J is taken relative to its largest value on the knots to avoid overflow
        let log_scale = knots
            .iter()
            .chain(t.knots())
            .map(|&k| space.log_volume_density(k.min(end)))
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if !log_scale.is_finite() {
            return Err(invalid(format!("{}: support carries no volume", t.label())));
        }
        let jr = |r: f64| (space.log_volume_density(r) - log_scale).exp();
        let from_origin = t.value(0.5 * knots[0]) != 0.0;
        let grad = |r: f64| t.derivative(r).powi(2) * jr(r);
        let mass = |r: f64| {
            let v = t.value(r);
            if v == 0.0 {
                0.0
            } else {
                weight.q(r) * v * v * jr(r)
            }
        };
        let num = integrate_pieces(&grad, &knots, from_origin, "gradient integral")?;
        let den = integrate_pieces(&mass, &knots, from_origin, "weight integral")?;
        if !(den > 0.0) {
            return Err(Error::Undefined(format!(
                "{}: weighted integral is {den}, ratio undefined",
                t.label()
            )));
        }
        trials.push(TrialRatio {
            label: t.label().to_string(),
            gradient_integral: num,
            weight_integral: den,
            log_scale,
            ratio: num / den,
        });
    }
    let min_ratio = trials.iter().map(|t| t.ratio).fold(f64::INFINITY, f64::min);
    Ok(PoincareReport {
        space: space.name().to_string(),
        weight: weight.name().to_string(),
        trials,
        min_ratio,
        passed: min_ratio >= 1.0 - POINCARE_TOL,
    })
}

/// `int_{B(r^2) \ B(r)} rho^-k / ln r` for a space with `vol(B(r)) = O(r^k)`.
pub fn annulus_log_bound(space: &ModelSpace, k: f64, r: f64) -> Result<f64> {
    if !(r > std::f64::consts::E && r.is_finite()) {
        return Err(invalid(format!("annulus radius must exceed e, got {r}")));
    }
    match space.volume_growth() {
        VolumeGrowth::Exponential => {
            return Err(invalid(format!("{} has exponential volume growth", space.name())))
        }
        VolumeGrowth::Polynomial(d) if d > k => {
            return Err(invalid(format!(
                "{} has volume growth of order {d}, above k = {k}",
                space.name()
            )))
        }
        _ => {}
    }
    let outer = match space.diameter() {
        Some(d) => (r * r).min(d),
        None => r * r,
    };
    if outer <= r {
        return Ok(0.0);
    }
    let f = |p: f64| p.powf(-k) * space.volume_density(p);
    let q = integrate_graded(f, r, outer, &QuadConfig::with_tol(0.0, 1e-10));
    Ok(q.value / r.ln())
}
