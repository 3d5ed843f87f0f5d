//! Two-forms on an oriented Euclidean R^4 with real or so(n) coefficients.
//!
//! Components are stored for the six pairs `i < j` in the order
//! `12, 13, 14, 23, 24, 34` (1-based). The Hodge star of the standard
//! orientation maps `12 -> 34`, `13 -> -24`, `14 -> 23`.
//!
//! Orthonormal bases of the (anti-)self-dual subspaces, shared with the Weyl
//! operator in [`crate::geometry`]:
//!
//! ```text
//! L+ : (e12 + e34)/sqrt2, (e13 - e24)/sqrt2, (e14 + e23)/sqrt2
//! L- : (e12 - e34)/sqrt2, (e13 + e24)/sqrt2, (e14 - e23)/sqrt2
//! ```

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::lie::{commutator_constant, gap_constant, AlgebraMetric, SkewMatrix};

/// Index pairs `(i, j)`, `i < j`, zero-based, in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Coefficients of the self-dual basis in storage order.
pub const SELF_DUAL_BASIS: [[f64; 6]; 3] = [
    [FRAC_1_SQRT_2, 0.0, 0.0, 0.0, 0.0, FRAC_1_SQRT_2],
    [0.0, FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2, 0.0],
    [0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0],
];

/// Coefficients of the anti-self-dual basis in storage order.
pub const ANTI_SELF_DUAL_BASIS: [[f64; 6]; 3] = [
    [FRAC_1_SQRT_2, 0.0, 0.0, 0.0, 0.0, -FRAC_1_SQRT_2],
    [0.0, FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2, 0.0],
    [0.0, 0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0],
];

/// Storage slot of the pair `(i, j)`, `i < j`.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < 4);
    match (i, j) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// Values a two-form can take coefficients in.
pub trait Coefficient:
    Clone + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Mul<f64, Output = Self>
{
    /// A zero with the same shape as `self`.
    fn zero_like(&self) -> Self;
    /// Pointwise pairing of coefficients (scalar product or so(n) inner product).
    fn pairing(&self, other: &Self, metric: &AlgebraMetric) -> f64;
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn pairing(&self, other: &Self, _metric: &AlgebraMetric) -> f64 {
        self * other
    }
}

impl Coefficient for SkewMatrix {
    fn zero_like(&self) -> Self {
        SkewMatrix::zero(self.dim())
    }
    fn pairing(&self, other: &Self, metric: &AlgebraMetric) -> f64 {
        self.dot_unchecked(other, metric)
    }
}

/// A two-form on oriented R^4.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm<T> {
    components: [T; 6],
}

/// so(n)-valued two-form.
pub type AlgebraTwoForm = TwoForm<SkewMatrix>;
/// Real-valued two-form.
pub type ScalarTwoForm = TwoForm<f64>;

impl<T: Coefficient> TwoForm<T> {
    pub fn new(components: [T; 6]) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[T; 6] {
        &self.components
    }

    /// Full antisymmetric access `F_ij`, zero-based, including `i >= j`.
    pub fn get(&self, i: usize, j: usize) -> T {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.components[pair_index(i, j)].clone(),
            Greater => -self.components[pair_index(j, i)].clone(),
            Equal => self.components[0].zero_like(),
        }
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> TwoForm<U> {
        TwoForm {
            components: std::array::from_fn(|k| f(&self.components[k])),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            components: std::array::from_fn(|k| {
                f(self.components[k].clone(), other.components[k].clone())
            }),
        }
    }

    /// `sum_{i<j} <F_ij, F_ij>` regardless of convention.
    pub fn component_norm_sq(&self, metric: &AlgebraMetric) -> f64 {
        self.components.iter().map(|c| c.pairing(c, metric)).sum()
    }

    /// Form inner product under the metric's convention.
    pub fn dot(&self, other: &Self, metric: &AlgebraMetric) -> f64 {
        metric.form_factor()
            * self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.pairing(b, metric))
                .sum::<f64>()
    }
}

impl<T: Coefficient> Add for TwoForm<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl<T: Coefficient> Sub for TwoForm<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl<T: Coefficient> Mul<f64> for TwoForm<T> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            components: self.components.map(|c| c * s),
        }
    }
}

impl ScalarTwoForm {
    /// `dx^i ^ dx^j`, zero-based, `i != j`.
    pub fn basis(i: usize, j: usize) -> Self {
        let mut c = [0.0; 6];
        if i < j {
            c[pair_index(i, j)] = 1.0;
        } else {
            c[pair_index(j, i)] = -1.0;
        }
        Self::new(c)
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.components
    }
}

impl AlgebraTwoForm {
    pub fn zero(n: usize) -> Self {
        Self::new(std::array::from_fn(|_| SkewMatrix::zero(n)))
    }

    /// Scalar form times a fixed algebra element.
    pub fn from_scalar(form: &ScalarTwoForm, element: &SkewMatrix) -> Self {
        form.map(|c| element.clone() * *c)
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::new(std::array::from_fn(|_| SkewMatrix::random(n, rng)))
    }
}

/// Hodge star on oriented R^4; an involution on two-forms.
pub fn hodge_star<T: Coefficient>(f: &TwoForm<T>) -> TwoForm<T> {
    let c = &f.components;
    TwoForm::new([
        c[5].clone(),
        -c[4].clone(),
        c[3].clone(),
        c[2].clone(),
        -c[1].clone(),
        c[0].clone(),
    ])
}

/// `(F+, F-)` with `F+- = (F +- *F) / 2`.
pub fn project_pm<T: Coefficient>(f: &TwoForm<T>) -> (TwoForm<T>, TwoForm<T>) {
    let star = hodge_star(f);
    let plus = (f.clone() + star.clone()) * 0.5;
    let minus = (f.clone() - star) * 0.5;
    (plus, minus)
}

/// `|F|` under the metric's convention.
pub fn norm<T: Coefficient>(f: &TwoForm<T>, metric: &AlgebraMetric) -> f64 {
    (metric.form_factor() * f.component_norm_sq(metric)).sqrt()
}

/// An so(n)-valued self-dual two-form: `F12 = F34`, `F13 = -F24`, `F14 = F23`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfDualForm(AlgebraTwoForm);

impl SelfDualForm {
    /// Validates self-duality to 1e-12 relative.
    pub fn new(form: AlgebraTwoForm) -> Result<Self> {
        let diff = form.clone() - hodge_star(&form);
        let frob = |f: &AlgebraTwoForm| -> f64 {
            f.components().iter().map(|c| c.frobenius_sq()).sum::<f64>()
        };
        if frob(&diff).sqrt() > 1e-12 * frob(&form).sqrt() {
            return Err(Error::InvariantViolation(
                "two-form is not self-dual".to_string(),
            ));
        }
        Ok(Self(form))
    }

    /// Assembles `F12 = F34 = a`, `F13 = -F24 = b`, `F14 = F23 = c`.
    pub fn from_parts(a: SkewMatrix, b: SkewMatrix, c: SkewMatrix) -> Result<Self> {
        if a.dim() != b.dim() || a.dim() != c.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: if a.dim() != b.dim() { b.dim() } else { c.dim() },
            });
        }
        Ok(Self(TwoForm::new([
            a.clone(),
            b.clone(),
            c.clone(),
            c,
            -b,
            a,
        ])))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_parts(
            SkewMatrix::random(n, rng),
            SkewMatrix::random(n, rng),
            SkewMatrix::random(n, rng),
        )
        .expect("same dimension")
    }

    /// Self-dual part of an arbitrary form.
    pub fn project(form: &AlgebraTwoForm) -> Self {
        Self(project_pm(form).0)
    }

    /// Configuration aligned with the su(2) structure of so(4): every
    /// commutator bound in the trilinear estimate is attained.
    pub fn su2_equality(scale: f64) -> Self {
        use crate::lie::su2_generator as t;
        Self::from_parts(t(3) * scale, t(2) * -scale, t(1) * scale).expect("so(4)")
    }

    pub fn form(&self) -> &AlgebraTwoForm {
        &self.0
    }

    pub fn into_form(self) -> AlgebraTwoForm {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// `sum_{i,j,k} <F_ij, [F_ik, F_jk]>` over all index triples.
pub fn trilinear(f: &SelfDualForm, metric: &AlgebraMetric) -> f64 {
    trilinear_sum(f.form(), metric)
}

pub(crate) fn trilinear_sum(f: &AlgebraTwoForm, metric: &AlgebraMetric) -> f64 {
    let mut total = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let fij = f.get(i, j);
            for k in 0..4 {
                if k == i || k == j {
                    continue;
                }
                let br = f.get(i, k).bracket_unchecked(&f.get(j, k));
                total += fij.dot_unchecked(&br, metric);
            }
        }
    }
    total
}

/// `xyz <= (x^2 + y^2 + z^2)^{3/2} / (3 sqrt 3)` right-hand side.
pub fn amgm_bound(x: f64, y: f64, z: f64) -> f64 {
    (x * x + y * y + z * z).powf(1.5) / (3.0 * 3f64.sqrt())
}

/// Intermediate quantities of the cubic-term estimate, in order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainReport {
    /// `|sum <F, [F, F]>|`
    pub trilinear_abs: f64,
    /// `6c sum_{i<j<k} |F_ij||F_ik||F_jk|`
    pub ordered_triples: f64,
    /// `24c |F12||F13||F14|`
    pub product: f64,
    /// `(24c / 3 sqrt 3)(|F12|^2 + |F13|^2 + |F14|^2)^{3/2}`
    pub amgm: f64,
    /// `a_G |F|^3`
    pub cubic_bound: f64,
}

impl ChainReport {
    pub fn links(&self) -> [f64; 5] {
        [
            self.trilinear_abs,
            self.ordered_triples,
            self.product,
            self.amgm,
            self.cubic_bound,
        ]
    }
}

/// Relative tolerance for the links of the chain.
pub const CHAIN_TOL: f64 = 1e-10;

/// Evaluates every link of the estimate `|sum <F,[F,F]>| <= a_G |F|^3` and
/// checks `a <= b <= c <= d = e`.
///
/// Under the tensor convention the form pairing is doubled, so every link is
/// reported for the doubled sum and the last link uses the tensor `a_G` and
/// tensor norm.
pub fn trilinear_chain_report(f: &SelfDualForm, metric: &AlgebraMetric) -> Result<ChainReport> {
    let n = f.dim();
    let c = commutator_constant(n, metric)?;
    let a_g = gap_constant(n, metric)?;
    let form = f.form();
    let k = metric.form_factor();
    let cn = |i: usize, j: usize| form.get(i, j).norm(metric);

    let trilinear_abs = k * trilinear_sum(form, metric).abs();
    let mut triples = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            for l in (j + 1)..4 {
                triples += cn(i, j) * cn(i, l) * cn(j, l);
            }
        }
    }
    let ordered_triples = k * 6.0 * c * triples;
    let (x, y, z) = (cn(0, 1), cn(0, 2), cn(0, 3));
    let product = k * 24.0 * c * x * y * z;
    let amgm = k * 24.0 * c * amgm_bound(x, y, z);
    let cubic_bound = a_g * norm(form, metric).powi(3);

    let report = ChainReport {
        trilinear_abs,
        ordered_triples,
        product,
        amgm,
        cubic_bound,
    };
    let tol = CHAIN_TOL * cubic_bound.max(f64::MIN_POSITIVE);
    let names = ["trilinear", "ordered triples", "product", "AM-GM"];
    let links = report.links();
    for w in 0..3 {
        if links[w] > links[w + 1] + tol {
            return Err(Error::InvariantViolation(format!(
                "chain link {} <= {} fails: {} > {}",
                names[w],
                names[w + 1],
                links[w],
                links[w + 1]
            )));
        }
    }
    if (amgm - cubic_bound).abs() > tol {
        return Err(Error::InvariantViolation(format!(
            "AM-GM bound {amgm} differs from a_G|F|^3 = {cubic_bound}"
        )));
    }
    Ok(report)
}

/// `|trilinear| / |F|^3`, doubled under the tensor convention so that it is
/// bounded by `a_G` in both conventions. Zero for `F = 0`.
pub fn trilinear_ratio(f: &SelfDualForm, metric: &AlgebraMetric) -> f64 {
    let n = norm(f.form(), metric);
    if n == 0.0 {
        return 0.0;
    }
    metric.form_factor() * trilinear(f, metric).abs() / n.powi(3)
}

/// Largest [`trilinear_ratio`] found by hill climbing from `restarts` random
/// self-dual forms, `steps` Gaussian proposals each.
pub fn search_trilinear_ratio<R: Rng + ?Sized>(
    n: usize,
    metric: &AlgebraMetric,
    restarts: usize,
    steps: usize,
    rng: &mut R,
) -> (f64, SelfDualForm) {
    let mut best = (0.0, SelfDualForm::random(n, rng));
    for _ in 0..restarts.max(1) {
        let mut parts: [SkewMatrix; 3] = std::array::from_fn(|_| SkewMatrix::random(n, rng));
        let build = |p: &[SkewMatrix; 3]| {
            SelfDualForm::from_parts(p[0].clone(), p[1].clone(), p[2].clone()).expect("same n")
        };
        let mut current = trilinear_ratio(&build(&parts), metric);
        let mut sigma = 0.5;
        let mut misses = 0;
        for _ in 0..steps {
            let scale: f64 = parts.iter().map(|m| m.frobenius_sq()).sum::<f64>().sqrt();
            let trial: [SkewMatrix; 3] = std::array::from_fn(|k| {
                (parts[k].clone() + SkewMatrix::random(n, rng) * (sigma * scale)) * (1.0 / scale)
            });
            let r = trilinear_ratio(&build(&trial), metric);
            if r > current {
                current = r;
                parts = trial;
                misses = 0;
            } else {
                misses += 1;
                if misses >= 20 {
                    sigma *= 0.7;
                    misses = 0;
                }
            }
        }
        if current > best.0 {
            best = (current, build(&parts));
        }
    }
    best
}
