//! Adaptive Simpson quadrature with Richardson correction, plus a dyadic
//! splitting driver for integrands with a weak singularity at the left
//! endpoint.

/// Tolerances for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_depth: 40,
            initial_panels: 8,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]`.
///
/// The interval is first cut into `initial_panels` pieces so that features
/// narrower than the whole interval are not skipped by the first estimate.
/// Each panel is accepted when `|S2 - S1| <= 15 tol`, where `tol` is the
/// panel's share of `max(abs_tol, rel_tol |I|)`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        };
    }
    let panels = cfg.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut evals = 0usize;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };

    let mut nodes = Vec::with_capacity(2 * panels + 1);
    for k in 0..=(2 * panels) {
        let x = if k == 2 * panels { b } else { a + width * k as f64 / 2.0 };
        nodes.push((x, eval(x)));
    }
    let mut coarse = 0.0;
    let mut stack: Vec<(Panel, u32)> = Vec::with_capacity(64);
    for p in 0..panels {
        let (x0, f0) = nodes[2 * p];
        let (_, f1) = nodes[2 * p + 1];
        let (x2, f2) = nodes[2 * p + 2];
        let whole = simpson(x0, x2, f0, f1, f2);
        coarse += whole;
        stack.push((
            Panel {
                a: x0,
                b: x2,
                fa: f0,
                fm: f1,
                fb: f2,
                whole,
            },
            0,
        ));
    }
    let global_tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());
    let total_width = (b - a).abs();

    let mut value = 0.0;
    let mut error = 0.0;
    while let Some((p, depth)) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm);
        let frm = eval(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let tol = global_tol * (p.b - p.a).abs() / total_width;
        if delta.abs() <= 15.0 * tol || depth >= cfg.max_depth || !delta.is_finite() {
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
        } else {
            stack.push((
                Panel {
                    a: p.a,
                    b: m,
                    fa: p.fa,
                    fm: flm,
                    fb: p.fm,
                    whole: left,
                },
                depth + 1,
            ));
            stack.push((
                Panel {
                    a: m,
                    b: p.b,
                    fa: p.fm,
                    fm: frm,
                    fb: p.fb,
                    whole: right,
                },
                depth + 1,
            ));
        }
    }
    QuadResult {
        value,
        error_estimate: error,
        evaluations: evals,
    }
}

/// Result of [`integrate_from_origin`], with the dyadic shell contributions
/// closest to the origin kept for divergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginQuad {
    pub value: f64,
    pub error_estimate: f64,
    /// Contributions of the innermost shells `[b 2^-(k+1), b 2^-k]`,
    /// ordered outward-in.
    pub inner_shells: Vec<f64>,
}

/// Number of dyadic shells used by [`integrate_from_origin`].
pub const ORIGIN_SHELLS: usize = 48;

/// Integrates `f` over `[0, b]` without evaluating at `0`.
///
/// `[0, b]` is split into dyadic shells `[b 2^-(k+1), b 2^-k]` for
/// `k < ORIGIN_SHELLS`; the remaining `[0, b 2^-ORIGIN_SHELLS]` is estimated
/// with a single midpoint. Integrable singularities of the form
/// `rho^-s`, `s < 1`, and integrands that vanish at the origin are handled.
pub fn integrate_from_origin<F: Fn(f64) -> f64>(f: F, b: f64, cfg: &QuadConfig) -> OriginQuad {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut shells = Vec::with_capacity(ORIGIN_SHELLS);
    let shell_cfg = QuadConfig {
        initial_panels: 2,
        ..*cfg
    };
    let mut hi = b;
    for _ in 0..ORIGIN_SHELLS {
        let lo = 0.5 * hi;
        let r = adaptive_simpson(&f, lo, hi, &shell_cfg);
        value += r.value;
        error += r.error_estimate;
        shells.push(r.value);
        hi = lo;
    }
    let rest = hi * f(0.5 * hi);
    value += rest;
    error += rest.abs();
    OriginQuad {
        value,
        error_estimate: error,
        inner_shells: shells[ORIGIN_SHELLS - 8..].to_vec(),
    }
}

/// True when the innermost dyadic shells stop shrinking, i.e. the integral
/// near the origin does not converge.
pub fn shells_diverge(q: &OriginQuad) -> bool {
    if !q.value.is_finite() {
        return true;
    }
    let s = &q.inner_shells;
    let last = s[s.len() - 1].abs();
    let prev = s[s.len() - 2].abs();
    // a convergent rho^-s tail with s < 1 shrinks by 2^(s-1) per shell
    last > 0.0 && last >= 0.99 * prev && last > 1e-14 * q.value.abs().max(1e-300)
}

/// Number of graded levels per end used by [`integrate_graded`].
pub const GRADED_LEVELS: usize = 40;

/// Integrates `f` over `[a, b]` on a mesh graded geometrically toward both
/// endpoints.
///
/// The interval is split at `a + w 2^-k` and `b - w 2^-k`, `w = (b - a) / 2`,
/// for `k < GRADED_LEVELS`, and each piece is handled by [`adaptive_simpson`].
/// This resolves integrands concentrated in a thin layer at either end (for
/// example `exp(3 rho)` growth near the outer edge) that a uniform initial
/// mesh would sample only at zeros. The two innermost pieces are estimated
/// by a midpoint, so `f(a)` and `f(b)` are never evaluated. The returned
/// `inner_shells` are the contributions of the pieces nearest `a`, ordered
/// toward `a`, for use with [`shells_diverge`].
pub fn integrate_graded<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> OriginQuad {
    let half = 0.5 * (b - a);
    let mid = a + half;
    // pieces as (lo, hi, touches_a), then the two midpoint remainders
    let mut pieces = Vec::with_capacity(2 * GRADED_LEVELS);
    let mut rests = [(0.0, 0.0); 2];
    for (side, (end, sign)) in [(a, 1.0), (b, -1.0)].into_iter().enumerate() {
        let mut far = mid;
        let mut w = half;
        for _ in 0..GRADED_LEVELS {
            let near = end + sign * 0.5 * w;
            pieces.push((near.min(far), near.max(far), sign > 0.0));
            far = near;
            w *= 0.5;
        }
        rests[side] = (w, end + sign * 0.5 * w);
    }
    // scale of the integral from a few nodes per piece, so that pieces
    // holding a negligible share are not refined to relative precision
    let magnitude: f64 = pieces
        .iter()
        .map(|&(lo, hi, _)| {
            let m = (0..=4)
                .map(|k| f(lo + (hi - lo) * k as f64 / 4.0).abs())
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max);
            m * (hi - lo)
        })
        .sum();
    let piece_cfg = QuadConfig {
        initial_panels: 2,
        abs_tol: cfg.abs_tol.max(cfg.rel_tol * magnitude / pieces.len() as f64),
        ..*cfg
    };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut shells = Vec::with_capacity(GRADED_LEVELS);
    for &(lo, hi, near_a) in &pieces {
        let r = adaptive_simpson(&f, lo, hi, &piece_cfg);
        value += r.value;
        error += r.error_estimate;
        if near_a {
            shells.push(r.value);
        }
    }
    for (w, x) in rests {
        let rest = w * f(x);
        value += rest;
        error += rest.abs();
    }
    OriginQuad {
        value,
        error_estimate: error,
        inner_shells: shells[GRADED_LEVELS - 8..].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, &QuadConfig::default());
        assert!((r.value - 0.0).abs() < 1e-13);
        let r = adaptive_simpson(|x| x.powi(3), 0.0, 1.0, &QuadConfig::default());
        assert!((r.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn smooth_transcendental() {
        let r = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, &QuadConfig::default());
        assert!((r.value - 2.0).abs() < 1e-10);
        let r = adaptive_simpson(|x: f64| (-x).exp(), 0.0, 30.0, &QuadConfig::with_tol(1e-14, 1e-14));
        assert!((r.value - (1.0 - (-30f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let cfg = QuadConfig::default();
        let a = adaptive_simpson(f64::cos, 0.0, 1.0, &cfg).value;
        let b = adaptive_simpson(f64::cos, 1.0, 0.0, &cfg).value;
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn weak_origin_singularity() {
        // int_0^1 x^-1/2 = 2
        let q = integrate_from_origin(|x: f64| x.powf(-0.5), 1.0, &QuadConfig::default());
        assert!((q.value - 2.0).abs() < 1e-6, "{}", q.value);
        assert!(!shells_diverge(&q));
    }

    #[test]
    fn log_divergence_detected() {
        let q = integrate_from_origin(|x: f64| 1.0 / x, 1.0, &QuadConfig::default());
        assert!(shells_diverge(&q));
        let q = integrate_from_origin(|x: f64| x, 1.0, &QuadConfig::default());
        assert!(!shells_diverge(&q));
        assert!((q.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn graded_mesh_finds_edge_layer() {
        // all mass within ~1/3 of the right end of a long interval
        let b = 1.0e4;
        let f = |x: f64| (x - b).powi(2) * (3.0 * (x - b)).exp();
        let q = integrate_graded(f, 100.0, b, &QuadConfig::with_tol(0.0, 1e-11));
        // int_0^inf t^2 e^{-3t} dt = 2/27
        assert!((q.value - 2.0 / 27.0).abs() < 1e-11, "{}", q.value);
    }

    #[test]
    fn graded_mesh_origin_behaviour() {
        let cfg = QuadConfig::with_tol(0.0, 1e-11);
        let q = integrate_graded(|x: f64| x.powf(-0.5), 0.0, 4.0, &cfg);
        assert!((q.value - 4.0).abs() < 1e-5);
        assert!(!shells_diverge(&q));
        assert!(shells_diverge(&integrate_graded(|x: f64| 1.0 / x, 0.0, 1.0, &cfg)));
    }
}
