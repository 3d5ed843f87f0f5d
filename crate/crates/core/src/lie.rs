//! Skew-symmetric matrices in so(n) with the alpha-scaled trace inner product.
//!
//! The inner product is `<M, N> = alpha * sum_ab M_ab N_ab`. Common choices are
//! `alpha = 1` (Frobenius), `alpha = 1/2` (standard basis orthonormal) and
//! `alpha = n - 2` (Killing form). The default everywhere is `alpha = 1/2`.
//!
//! so(3) generators follow `(L_k)_ij = -eps_kij`, so `[L_1, L_2] = L_3`.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when validating skew symmetry of raw entries.
const SKEW_TOL: f64 = 1e-12;

/// Form-norm convention: `|dx^i ^ dx^j|^2 = 1` (standard) or `= 2` (tensor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Standard,
    Tensor,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Convention::Standard),
            "tensor" => Ok(Convention::Tensor),
            _ => Err(Error::UnknownName {
                kind: "convention",
                name: s.to_string(),
            }),
        }
    }
}

/// Scaling of the so(n) inner product together with the form-norm convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraMetric {
    alpha: f64,
    convention: Convention,
}

impl AlgebraMetric {
    pub fn new(alpha: f64, convention: Convention) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha, convention })
    }

    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, Convention::Standard)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Factor multiplying `sum_{i<j} <F_ij, F_ij>` to obtain `|F|^2`.
    pub fn form_factor(&self) -> f64 {
        match self.convention {
            Convention::Standard => 1.0,
            Convention::Tensor => 2.0,
        }
    }
}

impl Default for AlgebraMetric {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            convention: Convention::Standard,
        }
    }
}

/// A real skew-symmetric `n x n` matrix, stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SkewMatrix {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// Builds from row-major entries, rejecting anything that is not skew.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("so(n) needs n >= 2, got {n}")));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: n * n,
            });
        }
        let scale = entries.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for a in 0..n {
            for b in a..n {
                let s = entries[a * n + b] + entries[b * n + a];
                if s.abs() > SKEW_TOL * scale {
                    return Err(Error::InvariantViolation(format!(
                        "entries ({a},{b}) and ({b},{a}) are not negatives of each other"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds from the strictly upper triangle `(a, b), a < b`, in row order.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                left: upper.len(),
                right: expected,
            });
        }
        let mut m = Self::zero(n);
        let mut it = upper.iter();
        for a in 0..n {
            for b in (a + 1)..n {
                let v = *it.next().expect("length checked above");
                m.entries[a * n + b] = v;
                m.entries[b * n + a] = -v;
            }
        }
        Ok(m)
    }

    /// Matrix with `+v` at `(a, b)` and `-v` at `(b, a)`.
    pub fn elementary(n: usize, a: usize, b: usize, v: f64) -> Self {
        let mut m = Self::zero(n);
        m.entries[a * n + b] += v;
        m.entries[b * n + a] -= v;
        m
    }

    /// Standard-normal entries in the upper triangle.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let upper: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::from_upper(n, &upper).expect("length matches")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.n + b]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    /// `sum_ab M_ab^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self, metric: &AlgebraMetric) -> f64 {
        (metric.alpha * self.frobenius_sq()).sqrt()
    }

    pub(crate) fn dot_unchecked(&self, other: &Self, metric: &AlgebraMetric) -> f64 {
        debug_assert_eq!(self.n, other.n);
        metric.alpha
            * self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub(crate) fn bracket_unchecked(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for a in 0..n {
            for b in (a + 1)..n {
                let mut s = 0.0;
                for c in 0..n {
                    s += self.entries[a * n + c] * other.entries[c * n + b]
                        - other.entries[a * n + c] * self.entries[c * n + b];
                }
                out.entries[a * n + b] = s;
                out.entries[b * n + a] = -s;
            }
        }
        out
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "so(n) dimension mismatch");
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for SkewMatrix {
    type Output = SkewMatrix;
    fn add(self, rhs: SkewMatrix) -> SkewMatrix {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl Sub for SkewMatrix {
    type Output = SkewMatrix;
    fn sub(self, rhs: SkewMatrix) -> SkewMatrix {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl Neg for SkewMatrix {
    type Output = SkewMatrix;
    fn neg(mut self) -> SkewMatrix {
        self.entries.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl Mul<f64> for SkewMatrix {
    type Output = SkewMatrix;
    fn mul(mut self, s: f64) -> SkewMatrix {
        self.entries.iter_mut().for_each(|v| *v *= s);
        self
    }
}

/// `alpha * sum_ab M_ab N_ab`.
pub fn inner(m: &SkewMatrix, n: &SkewMatrix, metric: &AlgebraMetric) -> Result<f64> {
    m.check_dims(n)?;
    Ok(m.dot_unchecked(n, metric))
}

/// Commutator `MN - NM`.
pub fn bracket(m: &SkewMatrix, n: &SkewMatrix) -> Result<SkewMatrix> {
    m.check_dims(n)?;
    Ok(m.bracket_unchecked(n))
}

/// Best constant `c` in `|[M, N]| <= c |M| |N|` on so(n).
pub fn commutator_constant(n: usize, metric: &AlgebraMetric) -> Result<f64> {
    match n {
        0..=2 => Err(invalid(format!("commutator constant needs n >= 3, got {n}"))),
        3 => Ok(1.0 / (2.0 * metric.alpha).sqrt()),
        _ => Ok(1.0 / metric.alpha.sqrt()),
    }
}

/// The structure-group constant `a_G` of the cubic term.
pub fn gap_constant(n: usize, metric: &AlgebraMetric) -> Result<f64> {
    let three_alpha = (3.0 * metric.alpha).sqrt();
    let standard = match n {
        0..=2 => return Err(invalid(format!("gap constant needs n >= 3, got {n}"))),
        3 => 2.0 / three_alpha,
        _ => 2.0 * std::f64::consts::SQRT_2 / three_alpha,
    };
    Ok(match metric.convention {
        Convention::Standard => standard,
        Convention::Tensor => standard / std::f64::consts::SQRT_2,
    })
}

/// so(3) generator `L_k` (k in 1..=3), `(L_k)_ij = -eps_kij`.
pub fn so3_generator(k: usize) -> SkewMatrix {
    let (i, j) = match k {
        1 => (1, 2),
        2 => (2, 0),
        3 => (0, 1),
        _ => panic!("so(3) generator index must be 1, 2 or 3"),
    };
    // (L_k)_ij = -eps_kij = -1 for the cyclic pair (i, j)
    SkewMatrix::elementary(3, i, j, -1.0)
}

/// 't Hooft matrix `eta^a` (a in 1..=3) as a 4x4 skew matrix:
/// `eta^a_{mu nu} = eps_{a mu nu}` on the first three indices and
/// `eta^a_{mu 4} = delta_{a mu}`.
pub fn thooft_eta(a: usize) -> SkewMatrix {
    assert!((1..=3).contains(&a), "'t Hooft index must be 1, 2 or 3");
    let mut m = SkewMatrix::zero(4);
    let (i, j) = match a {
        1 => (1, 2),
        2 => (2, 0),
        _ => (0, 1),
    };
    m = m + SkewMatrix::elementary(4, i, j, 1.0);
    m + SkewMatrix::elementary(4, a - 1, 3, 1.0)
}

/// su(2) generators inside so(4): `T_a = -eta^a / 2`, with
/// `[T_1, T_2] = T_3` (cyclic) and `|T_a|_F = 1`.
pub fn su2_generator(a: usize) -> SkewMatrix {
    thooft_eta(a) * -0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half() -> AlgebraMetric {
        AlgebraMetric::default()
    }

    #[test]
    fn inner_of_generators() {
        let l3 = so3_generator(3);
        assert!((inner(&l3, &l3, &half()).unwrap() - 1.0).abs() < 1e-15);
        let frob = AlgebraMetric::standard(1.0).unwrap();
        assert!((inner(&l3, &l3, &frob).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(inner(&so3_generator(1), &so3_generator(2), &frob).unwrap(), 0.0);
    }

    #[test]
    fn bracket_of_generators_is_cyclic() {
        let b = bracket(&so3_generator(1), &so3_generator(2)).unwrap();
        assert_eq!(b, so3_generator(3));
        let b = bracket(&so3_generator(2), &so3_generator(3)).unwrap();
        assert_eq!(b, so3_generator(1));
        let m = SkewMatrix::random(4, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(bracket(&m, &m).unwrap().is_zero());
    }

    #[test]
    fn su2_generators_close() {
        for (a, b, c) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            let br = bracket(&su2_generator(a), &su2_generator(b)).unwrap();
            let diff = br - su2_generator(c);
            assert!(diff.frobenius_sq() < 1e-28);
        }
        assert!((su2_generator(1).frobenius_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = SkewMatrix::zero(3);
        let b = SkewMatrix::zero(4);
        assert!(matches!(
            inner(&a, &b, &half()),
            Err(Error::DimensionMismatch { left: 3, right: 4 })
        ));
        assert!(bracket(&a, &b).is_err());
    }

    #[test]
    fn non_skew_entries_rejected() {
        assert!(SkewMatrix::from_entries(2, vec![0.0, 1.0, 1.0, 0.0]).is_err());
        assert!(SkewMatrix::from_entries(2, vec![0.0, 1.0, -1.0, 0.0]).is_ok());
    }

    #[test]
    fn constants() {
        let c = |n, a| commutator_constant(n, &AlgebraMetric::standard(a).unwrap()).unwrap();
        assert!((c(3, 0.5) - 1.0).abs() < 1e-15);
        assert!((c(4, 0.5) - 2f64.sqrt()).abs() < 1e-15);
        assert!((c(3, 1.0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(commutator_constant(2, &half()).is_err());

        let ag = gap_constant(4, &half()).unwrap();
        assert!((ag - 4.0 / 3f64.sqrt()).abs() < 1e-14);
        let ag3 = gap_constant(3, &AlgebraMetric::standard(1.0).unwrap()).unwrap();
        assert!((ag3 - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        let tensor = AlgebraMetric::new(0.5, Convention::Tensor).unwrap();
        assert!((gap_constant(4, &tensor).unwrap() - 2.0 / 1.5f64.sqrt()).abs() < 1e-14);
        assert!(gap_constant(1, &half()).is_err());
    }

    #[test]
    fn alpha_must_be_positive() {
        assert!(AlgebraMetric::standard(0.0).is_err());
        assert!(AlgebraMetric::standard(-1.0).is_err());
        assert!(AlgebraMetric::standard(f64::NAN).is_err());
    }
}
