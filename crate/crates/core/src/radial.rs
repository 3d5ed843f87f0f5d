//! Radial profiles `rho -> f(rho)` with optional closed-form derivatives.

use std::fmt;
use std::sync::Arc;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of the radial distance, with first and second derivatives
/// either supplied in closed form or taken by central differences.
#[derive(Clone)]
pub struct RadialMap {
    value: Profile,
    first: Option<Profile>,
    second: Option<Profile>,
}

impl fmt::Debug for RadialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialMap")
            .field("closed_first", &self.first.is_some())
            .field("closed_second", &self.second.is_some())
            .finish()
    }
}

/// Step for first derivatives, relative to `max(1, rho)`.
pub const FIRST_STEP: f64 = 1e-6;
/// Step for second derivatives, relative to `max(1, rho)`.
pub const SECOND_STEP: f64 = 1e-4;

impl RadialMap {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            first: None,
            second: None,
        }
    }

    pub fn with_first(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.first = Some(Arc::new(d));
        self
    }

    pub fn with_second(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(d));
        self
    }

    pub fn has_closed_first(&self) -> bool {
        self.first.is_some()
    }

    pub fn eval(&self, rho: f64) -> f64 {
        (self.value)(rho)
    }

    pub fn d1(&self, rho: f64) -> f64 {
        match &self.first {
            Some(d) => d(rho),
            None => {
                let h = FIRST_STEP * rho.abs().max(1.0);
                (self.eval(rho + h) - self.eval(rho - h)) / (2.0 * h)
            }
        }
    }

    pub fn d2(&self, rho: f64) -> f64 {
        match &self.second {
            Some(d) => d(rho),
            None => {
                let h = SECOND_STEP * rho.abs().max(1.0);
                (self.eval(rho + h) - 2.0 * self.eval(rho) + self.eval(rho - h)) / (h * h)
            }
        }
    }

    /// One-sided `(f(0), f'(0), f''(0))` for maps only defined on `rho >= 0`.
    pub fn jet_at_origin(&self) -> (f64, f64, f64) {
        let f0 = self.eval(0.0);
        let d1 = match &self.first {
            Some(d) => d(0.0),
            None => {
                let h = 1e-5;
                (-3.0 * f0 + 4.0 * self.eval(h) - self.eval(2.0 * h)) / (2.0 * h)
            }
        };
        let d2 = match &self.second {
            Some(d) => d(0.0),
            None => {
                let h = 1e-3;
                (2.0 * f0 - 5.0 * self.eval(h) + 4.0 * self.eval(2.0 * h) - self.eval(3.0 * h))
                    / (h * h)
            }
        };
        (f0, d1, d2)
    }
}

/// `1 / sinh^2(x)` without overflow for large `x`.
pub fn csch2(x: f64) -> f64 {
    let ax = x.abs();
    if ax > 20.0 {
        let e = (-2.0 * ax).exp();
        4.0 * e / (1.0 - e).powi(2)
    } else {
        1.0 / ax.sinh().powi(2)
    }
}

/// `coth(x)` for `x > 0`.
pub fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// `ln sinh(x)` for `x > 0`, stable for large `x`.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `ln cosh(x)`, stable for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax - std::f64::consts::LN_2 + (-2.0 * ax).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_derivatives() {
        let m = RadialMap::new(|r: f64| r.sin());
        for r in [0.3, 1.0, 7.5] {
            assert!((m.d1(r) - r.cos()).abs() < 1e-9);
            assert!((m.d2(r) + r.sin()).abs() < 1e-6);
        }
        let closed = RadialMap::new(|r: f64| r * r).with_first(|r| 2.0 * r);
        assert_eq!(closed.d1(3.0), 6.0);
    }

    #[test]
    fn origin_jet() {
        let m = RadialMap::new(f64::sinh);
        let (f0, d1, d2) = m.jet_at_origin();
        assert_eq!(f0, 0.0);
        assert!((d1 - 1.0).abs() < 1e-8);
        assert!(d2.abs() < 1e-5);
    }

    #[test]
    fn stable_hyperbolics() {
        for x in [0.01_f64, 1.0, 19.0, 21.0, 400.0] {
            let direct = 1.0 / x.sinh().powi(2);
            if direct.is_finite() && direct > 0.0 {
                assert!((csch2(x) - direct).abs() <= 1e-12 * direct);
            }
            if x < 300.0 {
                assert!((ln_sinh(x) - x.sinh().ln()).abs() < 1e-12 * x.max(1.0));
                assert!((ln_cosh(x) - x.cosh().ln()).abs() < 1e-12 * x.max(1.0));
            }
        }
        assert!(csch2(2000.0) == 0.0);
        assert!(ln_sinh(2000.0).is_finite());
    }
}
