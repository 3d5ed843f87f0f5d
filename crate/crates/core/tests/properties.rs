use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gapcheck::forms::{amgm_bound, hodge_star, project_pm, ScalarTwoForm};
use gapcheck::gap::{
    classify, evaluate_gap, evaluate_gap_with, side_norm, threshold, GapBoundSpec, GapTolerances,
    Theorem, Verdict,
};
use gapcheck::gauge::{
    bpst_field, bpst_norm, charge_with_tol, dual_norms, GaugeField, InstantonParams,
};
use gapcheck::geometry::{catalog, curvature_at, operator_norm_sq, Point, SpaceName};
use gapcheck::lie::{bracket, commutator_constant, gap_constant, inner, AlgebraMetric, SkewMatrix};
use gapcheck::weights::{
    bgg_sinh_weight, carron_weight, chm_weight, cutoff, verify_poincare, CutoffFamily,
};

fn skew(n: usize) -> impl Strategy<Value = SkewMatrix> {
    prop::collection::vec(-3.0..3.0_f64, n * (n - 1) / 2)
        .prop_map(move |u| SkewMatrix::from_upper(n, &u).unwrap())
}

fn scalar_form() -> impl Strategy<Value = ScalarTwoForm> {
    prop::array::uniform6(-5.0..5.0_f64).prop_map(ScalarTwoForm::new)
}

fn space() -> impl Strategy<Value = SpaceName> {
    prop::sample::select(SpaceName::ALL.to_vec())
}

fn alpha() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, 3.0])
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn half() -> AlgebraMetric {
    AlgebraMetric::standard(0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_is_symmetric_bilinear_positive(
        (m, k, l) in (3usize..=6).prop_flat_map(|n| (skew(n), skew(n), skew(n))),
        s in -4.0..4.0_f64,
        a in alpha(),
    ) {
        let g = AlgebraMetric::standard(a).unwrap();
        let mk = inner(&m, &k, &g).unwrap();
        prop_assert!(close(mk, inner(&k, &m, &g).unwrap(), 1e-12));
        let combo = m.entries().iter().zip(l.entries()).map(|(x, y)| s * x + y).collect();
        let combo = SkewMatrix::from_entries(m.dim(), combo).unwrap();
        let lhs = inner(&combo, &k, &g).unwrap();
        let rhs = s * mk + inner(&l, &k, &g).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
        if !m.is_zero() {
            prop_assert!(inner(&m, &m, &g).unwrap() > 0.0);
        }
    }

    #[test]
    fn commutator_bound_holds(
        (m, k) in (3usize..=6).prop_flat_map(|n| (skew(n), skew(n))),
        a in alpha(),
    ) {
        let g = AlgebraMetric::standard(a).unwrap();
        let c = commutator_constant(m.dim(), &g).unwrap();
        let lhs = bracket(&m, &k).unwrap().norm(&g);
        prop_assert!(lhs <= c * m.norm(&g) * k.norm(&g) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn hodge_star_involution_and_projection(f in scalar_form(), g in scalar_form(), s in -3.0..3.0_f64) {
        let back = hodge_star(&hodge_star(&f));
        for (x, y) in back.components().iter().zip(f.components()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        let sum = ScalarTwoForm::new(std::array::from_fn(|i| s * f.components()[i] + g.components()[i]));
        let lin = hodge_star(&sum);
        let (sf, sg) = (hodge_star(&f), hodge_star(&g));
        for i in 0..6 {
            prop_assert!(close(lin.components()[i], s * sf.components()[i] + sg.components()[i], 1e-12));
        }
        let (plus, _) = project_pm(&f);
        let (pp, pm) = project_pm(&plus);
        for i in 0..6 {
            prop_assert!(close(pp.components()[i], plus.components()[i], 1e-12));
            prop_assert!(pm.components()[i].abs() < 1e-12 * (1.0 + plus.components()[i].abs()));
        }
    }

    #[test]
    fn amgm_step(x in 0.0..10.0_f64, y in 0.0..10.0_f64, z in 0.0..10.0_f64) {
        prop_assert!(x * y * z <= amgm_bound(x, y, z) * (1.0 + 1e-12));
        prop_assert!(close(x * x * x, amgm_bound(x, x, x), 1e-12));
    }

    #[test]
    fn convention_ratio_is_sqrt2(n in 3usize..=8, a in 0.01..10.0_f64) {
        let s = gap_constant(n, &AlgebraMetric::standard(a).unwrap()).unwrap();
        let t = gap_constant(
            n,
            &AlgebraMetric::new(a, gapcheck::lie::Convention::Tensor).unwrap(),
        ).unwrap();
        prop_assert!(close(s / t, std::f64::consts::SQRT_2, 1e-12));
    }

    #[test]
    fn bpst_norm_formula_and_self_duality(
        y in prop::array::uniform4(-3.0..3.0_f64),
        x in prop::array::uniform4(-3.0..3.0_f64),
        lambda in 0.1..3.0_f64,
    ) {
        let params = InstantonParams::new(y, lambda).unwrap();
        let (p, m) = dual_norms(&bpst_field(params), &x, &half()).unwrap();
        let f = p.hypot(m);
        prop_assert!(close(f, bpst_norm(&params, &x), 1e-8));
        prop_assert!(m < 1e-10 * f);
    }

    #[test]
    fn weyl_pythagoras(name in space(), seed in any::<u64>()) {
        let s = catalog(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = curvature_at(&s, &s.sample_point(&mut rng)).unwrap();
        let split = operator_norm_sq(&c.weyl_plus) + operator_norm_sq(&c.weyl_minus);
        prop_assert!(close(c.weyl_norm_sq(), split, 1e-8), "{} vs {}", c.weyl_norm_sq(), split);
        prop_assert!(c.symmetry_residual < 1e-8 && c.bianchi_residual < 1e-8);
    }

    #[test]
    fn t1_at_half_matches_t2(name in space(), seed in any::<u64>(), use_carron in any::<bool>()) {
        let s = catalog(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = s.sample_point(&mut rng);
        let mut t1 = GapBoundSpec::for_theorem(Theorem::T1, s).unwrap();
        let mut t2 = GapBoundSpec::for_theorem(Theorem::T2, s).unwrap();
        t1.p = 0.5;
        if use_carron {
            t1.weight = Some(carron_weight());
            t2.weight = Some(carron_weight());
        }
        let (a, b) = (threshold(&t1, &x).unwrap(), threshold(&t2, &x).unwrap());
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn specializations_without_weight(name in space(), seed in any::<u64>()) {
        let s = catalog(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = s.sample_point(&mut rng);
        let c = curvature_at(&s, &x).unwrap();
        let a_g = gap_constant(4, &half()).unwrap();
        let t2 = GapBoundSpec::for_theorem(Theorem::T2, s).unwrap();
        if c.lambda_max(t2.side).abs() < 1e-9 {
            let want = c.scalar / (3.0 * a_g);
            prop_assert!(close(threshold(&t2, &x).unwrap(), want, 1e-8));
            let mut carron = t2.clone();
            carron.weight = Some(carron_weight());
            let rho = s.rho(&x).unwrap();
            let want = (2.0 / (rho * rho) + c.scalar / 3.0) / a_g;
            prop_assert!(close(threshold(&carron, &x).unwrap(), want, 1e-8));
        }
    }

    #[test]
    fn hyperbolic_threshold_lower_bound(p in 0.375..=0.75_f64, rho in 0.05..5.0_f64) {
        let h4 = catalog(SpaceName::H4);
        let mut spec = GapBoundSpec::for_theorem(Theorem::C12, h4).unwrap();
        spec.p = p;
        spec.weight = Some(bgg_sinh_weight(1.0).unwrap());
        let a_g = gap_constant(4, &half()).unwrap();
        let x = h4.point_at_distance(rho).unwrap();
        let bound = (2.0 - 0.5 / p) / (p * a_g)
            * (0.25 / (rho * rho) + 0.75 / rho.sinh().powi(2));
        let t = threshold(&spec, &x).unwrap();
        prop_assert!(bound > 0.0);
        prop_assert!(t >= bound - 1e-6 * (1.0 + bound), "{t} < {bound}");
    }

    #[test]
    fn verdicts_are_permutation_invariant(
        margins in prop::collection::vec(-1.0..1.0_f64, 1..40),
        thresholds in prop::collection::vec(0.0..5.0_f64, 40),
        seed in any::<u64>(),
    ) {
        let samples: Vec<_> = margins
            .iter()
            .zip(&thresholds)
            .enumerate()
            .map(|(k, (m, t))| gapcheck::gap::GapSample {
                rho: k as f64,
                point: [k as f64, 0.0, 0.0, 0.0],
                field_norm: t - m,
                threshold: *t,
                margin: *m,
            })
            .collect();
        let tol = GapTolerances::default();
        let (v, _, _) = classify(&samples, &tol);
        let mut shuffled = samples.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(classify(&shuffled, &tol).0, v);
    }

    #[test]
    fn cutoffs_are_unit_bounded(r in 1.5..500.0_f64, t in 0.0..1.0_f64, family in prop::sample::select(vec![
        CutoffFamily::LinearCutoff, CutoffFamily::LogCutoff, CutoffFamily::UnitCutoff,
    ])) {
        let phi = cutoff(family, r).unwrap();
        let rho = t * 1.2 * phi.support_end();
        let v = phi.value(rho);
        prop_assert!((0.0..=1.0).contains(&v));
        if rho > phi.support_end() {
            prop_assert_eq!(v, 0.0);
            prop_assert_eq!(phi.derivative(rho), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gap_verdicts_stable_and_permutation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bpst = bpst_field(InstantonParams::default());
        let cases = [
            (SpaceName::S4, Theorem::T5, bpst.clone()),
            (SpaceName::S4, Theorem::T5, GaugeField::zero(4)),
            (SpaceName::R4, Theorem::C10, bpst),
        ];
        for (name, theorem, field) in cases {
            let s = catalog(name);
            let spec = GapBoundSpec::for_theorem(theorem, s).unwrap();
            let mut pts: Vec<Point> = (0..12).map(|_| s.sample_point(&mut rng)).collect();
            let norm = side_norm(&field, &spec);
            let base = evaluate_gap(&norm, &spec, &pts).unwrap();
            let d = GapTolerances::default();
            let doubled = GapTolerances {
                equality_rel: 2.0 * d.equality_rel,
                violation_abs: 2.0 * d.violation_abs,
            };
            prop_assert_eq!(evaluate_gap_with(&norm, &spec, &pts, doubled).unwrap().verdict, base.verdict);
            pts.shuffle(&mut rng);
            prop_assert_eq!(evaluate_gap(&norm, &spec, &pts).unwrap().verdict, base.verdict);
        }
    }

    #[test]
    fn poincare_ratio_at_least_one(
        r in 1.5..300.0_f64,
        family in prop::sample::select(vec![
            CutoffFamily::LinearCutoff, CutoffFamily::LogCutoff, CutoffFamily::UnitCutoff,
        ]),
        case in 0usize..3,
    ) {
        let (name, w) = match case {
            0 => (SpaceName::R4, carron_weight()),
            1 => (SpaceName::H4, bgg_sinh_weight(1.0).unwrap()),
            _ => (SpaceName::CH2, chm_weight(2).unwrap()),
        };
        let rep = verify_poincare(&catalog(name), &w, &[cutoff(family, r).unwrap()]).unwrap();
        prop_assert!(rep.min_ratio >= 1.0 - 1e-6, "{name} {family:?} r={r}: {}", rep.min_ratio);
    }
}

#[test]
fn s4_verdicts_fixed() {
    let s4 = catalog(SpaceName::S4);
    let spec = GapBoundSpec::for_theorem(Theorem::T5, s4).unwrap();
    let pts = [s4.point_at_distance(0.3).unwrap(), s4.point_at_distance(2.0).unwrap()];
    let bpst = bpst_field(InstantonParams::default());
    let rep = evaluate_gap(&side_norm(&bpst, &spec), &spec, &pts).unwrap();
    assert_eq!(rep.verdict, Verdict::EqualityBranch);
}

#[test]
fn charge_error_within_halving_tolerances() {
    let field = bpst_field(InstantonParams::new([0.3, 0.0, -0.2, 0.1], 0.8).unwrap());
    let mut tol = 1e-2;
    while tol > 1e-13 {
        let err = (charge_with_tol(&field, tol).unwrap() - 1.0).abs();
        assert!(err <= tol + 1e-15, "tol {tol}: error {err}");
        tol /= 2.0;
    }
}
