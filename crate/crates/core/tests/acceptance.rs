//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`):
//! `cargo test -p gapcheck --test acceptance` or with `--release` for speed.

use std::f64::consts::{PI, SQRT_2};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gapcheck::forms::{search_trilinear_ratio, trilinear_chain_report, trilinear_ratio, SelfDualForm};
use gapcheck::gap::{
    evaluate_gap, lemma3_check, side_norm, threshold, threshold_profile, GapBoundSpec,
    Lemma3Outcome, Theorem, Verdict,
};
use gapcheck::gauge::{
    bpst_field, bpst_norm, charge, charge_monte_carlo, dual_norms, kato_ratio, pullback_norm_s4,
    ym_residual, GaugeField, InstantonParams, KatoSample,
};
use gapcheck::geometry::{
    catalog, chm_laplacian_rho, chm_laplacian_rho_derivative, curvature_at,
    laplacian_rho_identity_check, weyl_operator_spectrum, Point, Side, SpaceName,
};
use gapcheck::lie::{
    bracket, commutator_constant, gap_constant, so3_generator, AlgebraMetric, Convention,
    SkewMatrix,
};
use gapcheck::radial::RadialMap;
use gapcheck::weights::{
    ak_weight, annulus_log_bound, bgg_sinh_weight, bgg_weight, carron_weight, chm_weight, cutoff,
    hardy_log_trial, log_grid, verify_poincare, CutoffFamily,
};

type Checks = Vec<(bool, String)>;
type Criterion = (&'static str, fn() -> Checks);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn half() -> AlgebraMetric {
    AlgebraMetric::standard(0.5).unwrap()
}

fn shell_point(rng: &mut ChaCha8Rng, center: &Point, lo: f64, hi: f64) -> Point {
    loop {
        let v: Point = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            let r = rng.random_range(lo..hi);
            return std::array::from_fn(|i| center[i] + r * v[i] / n);
        }
    }
}

fn constants() -> Checks {
    let a4 = gap_constant(4, &half()).unwrap();
    let a3 = gap_constant(3, &half()).unwrap();
    let mut out = vec![
        (close(a4, 4.0 / 3f64.sqrt(), 1e-12), format!("a_G(4) = {a4}")),
        (close(4.0 / a4, 3f64.sqrt(), 1e-12), format!("4/a_G = {}", 4.0 / a4)),
        (close(a3, 2.0 / 1.5f64.sqrt(), 1e-12), format!("a_G(3) = {a3}")),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 3..=7 {
        for _ in 0..5 {
            let alpha = rng.random_range(0.05..5.0);
            let s = gap_constant(n, &AlgebraMetric::standard(alpha).unwrap()).unwrap();
            let t = gap_constant(n, &AlgebraMetric::new(alpha, Convention::Tensor).unwrap()).unwrap();
            out.push((close(s / t, SQRT_2, 1e-12), format!("ratio n={n} alpha={alpha}: {}", s / t)));
        }
    }
    out
}

fn commutator() -> Checks {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [3usize, 4, 5] {
        for alpha in [0.5, 1.0, n as f64 - 2.0] {
            let metric = AlgebraMetric::standard(alpha).unwrap();
            let c = commutator_constant(n, &metric).unwrap();
            let mut worst: f64 = 0.0;
            for _ in 0..10_000 {
                let m = SkewMatrix::random(n, &mut rng);
                let k = SkewMatrix::random(n, &mut rng);
                let r = bracket(&m, &k).unwrap().norm(&metric) / (c * m.norm(&metric) * k.norm(&metric));
                worst = worst.max(r);
            }
            out.push((worst <= 1.0 + 1e-12, format!("n={n} alpha={alpha}: max ratio {worst}")));
        }
    }
    let metric = half();
    let (l1, l2) = (so3_generator(1), so3_generator(2));
    let c = commutator_constant(3, &metric).unwrap();
    let r = bracket(&l1, &l2).unwrap().norm(&metric) / (l1.norm(&metric) * l2.norm(&metric));
    out.push((r >= (1.0 - 1e-9) * c, format!("n=3 witness {r} vs c = {c}")));
    out
}

fn trilinear() -> Checks {
    let metric = half();
    let a_g = gap_constant(4, &metric).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut broken = 0;
    for _ in 0..100_000 {
        if trilinear_chain_report(&SelfDualForm::random(4, &mut rng), &metric).is_err() {
            broken += 1;
        }
    }
    let eq = trilinear_ratio(&SelfDualForm::su2_equality(1.0), &metric);
    let (best, _) = search_trilinear_ratio(4, &metric, 4, 1500, &mut rng);
    vec![
        (broken == 0, format!("{broken} of 100000 chains broken")),
        (close(eq, a_g, 1e-10 * a_g), format!("equality ratio {eq} vs {a_g}")),
        (best >= 0.999 * a_g, format!("search best {best}")),
    ]
}

fn curvature() -> Checks {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for name in SpaceName::ALL {
        let space = catalog(name);
        let (r0, lp0, lm0) = match name {
            SpaceName::R4 => (0.0, 0.0, 0.0),
            SpaceName::S4 => (12.0, 0.0, 0.0),
            SpaceName::S3xR => (6.0, 0.0, 0.0),
            SpaceName::CP2 => (24.0, 4.0, 0.0),
            SpaceName::H4 => (-12.0, 0.0, 0.0),
            SpaceName::CH2 => (-24.0, 2.0, 0.0),
        };
        let (mut dev, mut res) = (0.0_f64, 0.0_f64);
        for _ in 0..100 {
            let c = curvature_at(&space, &space.sample_point(&mut rng)).unwrap();
            dev = dev
                .max((c.scalar - r0).abs())
                .max((c.lambda_max_plus - lp0).abs())
                .max((c.lambda_max_minus - lm0).abs());
            res = res.max(c.decomposition_residual);
        }
        out.push((dev < 1e-5, format!("{name}: invariant deviation {dev}")));
        out.push((res < 1e-6, format!("{name}: decomposition residual {res}")));
    }
    let cp2 = catalog(SpaceName::CP2);
    let c = curvature_at(&cp2, &cp2.sample_point(&mut rng)).unwrap();
    let e = weyl_operator_spectrum(&c, Side::Plus);
    let x = e[2];
    out.push((
        close(x, 4.0, 1e-4) && close(e[0], -x / 2.0, 1e-4) && close(e[1], -x / 2.0, 1e-4),
        format!("CP2 W+ spectrum {e:?}"),
    ));
    out
}

fn weights() -> Checks {
    let mut out = Vec::new();
    let grid = log_grid(0.01, 50.0, 200);
    let flat = ak_weight(RadialMap::new(|r| 3.0 / r).with_first(|r| -3.0 / (r * r))).unwrap();
    let ident = bgg_weight(RadialMap::new(|r| r).with_first(|_| 1.0).with_second(|_| 0.0)).unwrap();
    let worst = |f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64| {
        grid.iter().map(|&r| (f(r) - g(r)).abs() / g(r).abs().max(1.0)).fold(0.0, f64::max)
    };
    let inv_sq = |r: f64| 1.0 / (r * r);
    let e = worst(&|r| flat.q(r), &inv_sq);
    out.push((e < 1e-8, format!("ak(flat) vs 1/rho^2: {e}")));
    let e = worst(&|r| ident.q(r), &inv_sq);
    out.push((e < 1e-8, format!("bgg(rho) vs 1/rho^2: {e}")));
    for m in 1..=3u32 {
        let ak = ak_weight(
            RadialMap::new(move |r| chm_laplacian_rho(m, r))
                .with_first(move |r| chm_laplacian_rho_derivative(m, r)),
        )
        .unwrap();
        let chm = chm_weight(m).unwrap();
        let e = worst(&|r| ak.q(r), &|r| chm.q(r));
        out.push((e < 1e-8, format!("ak(CH^{m}) vs chm({m}): {e}")));
        let (mut sq, mut der) = (0.0_f64, 0.0_f64);
        for &r in &grid {
            let id = laplacian_rho_identity_check(m, r).unwrap();
            sq = sq.max(id.square_residual());
            der = der.max(id.derivative_residual());
        }
        out.push((sq < 1e-10, format!("(Delta rho)^2 identity m={m}: {sq}")));
        out.push((der < 1e-10, format!("derivative identity m={m}: {der}")));
        let min = log_grid(1e-6, 1e3, 400)
            .into_iter()
            .map(|r| chm.q(r))
            .fold(f64::INFINITY, f64::min);
        out.push((min > 0.0, format!("chm({m}) minimum {min}")));
    }
    out
}

fn poincare() -> Checks {
    let mut out = Vec::new();
    let cases = [
        (SpaceName::R4, carron_weight()),
        (SpaceName::H4, bgg_sinh_weight(1.0).unwrap()),
        (SpaceName::CH2, chm_weight(2).unwrap()),
    ];
    for (name, weight) in &cases {
        let space = catalog(*name);
        let mut tests = Vec::new();
        for fam in [CutoffFamily::LinearCutoff, CutoffFamily::LogCutoff, CutoffFamily::UnitCutoff] {
            for r in [2.0, 10.0, 100.0] {
                tests.push(cutoff(fam, r).unwrap());
            }
        }
        let rep = verify_poincare(&space, weight, &tests).unwrap();
        out.push((
            rep.min_ratio >= 1.0 - 1e-6,
            format!("{name} {}: min ratio {}", weight.name(), rep.min_ratio),
        ));
    }
    let sharp = verify_poincare(
        &catalog(SpaceName::R4),
        &carron_weight(),
        &[hardy_log_trial(6.0).unwrap()],
    )
    .unwrap();
    out.push((sharp.min_ratio <= 1.05, format!("near-sharp R4 ratio {}", sharp.min_ratio)));
    out
}

fn bpst() -> Checks {
    let metric = half();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut norm_err, mut minus) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let y: Point = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let x: Point = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let lambda = rng.random_range(0.2..2.0);
        let params = InstantonParams::new(y, lambda).unwrap();
        let (p, m) = dual_norms(&bpst_field(params), &x, &metric).unwrap();
        let f = p.hypot(m);
        let d2: f64 = (0..4).map(|i| (x[i] - y[i]).powi(2)).sum();
        let expected = 48f64.sqrt() * lambda * lambda / (lambda * lambda + d2).powi(2);
        norm_err = norm_err.max((f - expected).abs() / expected);
        minus = minus.max(m / f);
        debug_assert!(close(bpst_norm(&params, &x), expected, 1e-12 * expected));
    }
    out.push((norm_err < 1e-8, format!("|F| relative error {norm_err}")));
    out.push((minus < 1e-10, format!("|F-|/|F| {minus}")));

    let unit = bpst_field(InstantonParams::default());
    let mut ym: f64 = 0.0;
    for _ in 0..50 {
        let x = shell_point(&mut rng, &[0.0; 4], 0.1, 3.0);
        ym = ym.max(ym_residual(&unit, &x, &metric).unwrap());
    }
    out.push((ym < 1e-4, format!("YM residual {ym}")));

    for params in [
        InstantonParams::default(),
        InstantonParams::new([0.5, -0.3, 0.2, 0.1], 0.7).unwrap(),
    ] {
        let field = bpst_field(params);
        let k = charge(&field).unwrap();
        out.push((close(k, 1.0, 1e-3), format!("radial charge {k} (scale {})", params.scale())));
        let mc = charge_monte_carlo(&field, 40_000, &mut rng).unwrap();
        out.push((
            close(mc.value, 1.0, 0.05),
            format!("Monte-Carlo charge {} +- {} (scale {})", mc.value, mc.std_error, params.scale()),
        ));
    }
    let mut pull: f64 = 0.0;
    for _ in 0..100 {
        let x: Point = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        pull = pull.max((pullback_norm_s4(&unit, &x, &metric).unwrap() - 3f64.sqrt()).abs());
    }
    out.push((pull < 1e-8, format!("S4 pullback deviation {pull}")));
    out
}

fn kato() -> Checks {
    let metric = half();
    let field = bpst_field(InstantonParams::default());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut min, mut defined) = (f64::INFINITY, 0);
    while defined < 100 {
        let x = shell_point(&mut rng, &[0.0; 4], 0.05, 4.0);
        if let KatoSample::Ratio(r) = kato_ratio(&field, &x, &metric).unwrap() {
            min = min.min(r);
            defined += 1;
        }
    }
    vec![(min >= 1.5 - 1e-3, format!("min Kato ratio {min} over {defined} points"))]
}

fn lemma3() -> Checks {
    let metric = half();
    let field = bpst_field(InstantonParams::default());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut out = Vec::new();

    let s4 = catalog(SpaceName::S4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        if let Lemma3Outcome::Evaluated(s) = lemma3_check(&field, &s4, 0.5, &s4.sample_point(&mut rng), &metric).unwrap() {
            worst = worst.max(s.lhs.abs()).max(s.rhs.abs());
        }
    }
    out.push((worst < 1e-3, format!("S4 max |side| {worst}")));

    let r4 = catalog(SpaceName::R4);
    let (mut fails, mut evaluated) = (0, 0);
    for _ in 0..50 {
        let x = shell_point(&mut rng, &[0.0; 4], 0.2, 2.0);
        if let Lemma3Outcome::Evaluated(s) = lemma3_check(&field, &r4, 0.5, &x, &metric).unwrap() {
            evaluated += 1;
            if s.lhs < s.rhs - 1e-3 * (1.0 + s.rhs.abs()) {
                fails += 1;
            }
        }
    }
    out.push((fails == 0 && evaluated == 50, format!("R4: {fails} of {evaluated} fail")));

    let mut diff: f64 = 0.0;
    for name in SpaceName::ALL {
        let space = catalog(name);
        let mut t1 = GapBoundSpec::for_theorem(Theorem::T1, space).unwrap();
        t1.p = 0.5;
        let t2 = GapBoundSpec::for_theorem(Theorem::T2, space).unwrap();
        for _ in 0..10 {
            let x = space.sample_point(&mut rng);
            diff = diff.max((threshold(&t1, &x).unwrap() - threshold(&t2, &x).unwrap()).abs());
        }
    }
    out.push((diff < 1e-12, format!("T1(p=1/2) vs T2 max difference {diff}")));
    out
}

fn gap() -> Checks {
    let metric = half();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut out = Vec::new();
    let bpst = bpst_field(InstantonParams::default());

    let s4 = catalog(SpaceName::S4);
    let pts: Vec<Point> = (0..50).map(|_| s4.sample_point(&mut rng)).collect();
    let t5 = GapBoundSpec::for_theorem(Theorem::T5, s4).unwrap();
    for (field, want) in [
        (bpst.clone(), Verdict::EqualityBranch),
        (GaugeField::zero(4), Verdict::VanishingBranch),
    ] {
        let rep = evaluate_gap(&side_norm(&field, &t5), &t5, &pts).unwrap();
        out.push((rep.verdict == want, format!("S4 T5 {}: {}", field.label(), rep.verdict)));
    }

    let r4 = catalog(SpaceName::R4);
    let c10 = GapBoundSpec::for_theorem(Theorem::C10, r4).unwrap();
    let mut pts = vec![r4.point_at_distance(1.0).unwrap()];
    pts.extend((0..30).map(|_| shell_point(&mut rng, &[0.0; 4], 0.1, 5.0)));
    let rep = evaluate_gap(&side_norm(&bpst, &c10), &c10, &pts).unwrap();
    out.push((rep.verdict == Verdict::HypothesisViolated, format!("R4 C10 BPST: {}", rep.verdict)));
    let at_one = rep.samples.iter().find(|s| close(s.rho, 1.0, 1e-12));
    let expected = 2.0 / gap_constant(4, &metric).unwrap() - 3f64.sqrt();
    match at_one {
        Some(s) => out.push((
            close(s.margin, expected, 1e-6),
            format!("C10 margin at rho = 1: {} vs {expected}", s.margin),
        )),
        None => out.push((false, "no sample at rho = 1".into())),
    }

    for p in [0.375, 0.75] {
        let v = gapcheck::gap::c12_constant_part(p);
        out.push((v.abs() < 1e-12, format!("C12 constant part at p = {p}: {v}")));
    }

    let t14 = GapBoundSpec::for_theorem(Theorem::T14, catalog(SpaceName::CH2)).unwrap();
    let profile = threshold_profile(&t14).unwrap();
    let min = log_grid(1e-4, 99.9, 400).into_iter().map(&profile).fold(f64::INFINITY, f64::min);
    out.push((min > 0.0, format!("T14 minimum threshold on (0, 100): {min}")));
    out
}

fn annulus() -> Checks {
    let mut out = Vec::new();
    for (name, k) in [(SpaceName::S3xR, 1.0), (SpaceName::R4, 4.0)] {
        let space = catalog(name);
        let vals: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&r| annulus_log_bound(&space, k, r).unwrap())
            .collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
        out.push((lo > 0.0 && hi <= 2.0 * lo, format!("{name} k={k}: ratios {vals:?}")));
        if name == SpaceName::R4 {
            let dev = vals.iter().map(|v| (v - 2.0 * PI * PI).abs()).fold(0.0, f64::max);
            out.push((dev < 1e-6, format!("R4 deviation from 2 pi^2: {dev}")));
        }
    }
    out
}

fn reproducibility() -> Checks {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_gapcheck");
    let mut out = Vec::new();
    for sub in ["forms", "curvature", "gauge", "gap", "lemma3"] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{sub}-{run}.csv"));
            let status = Command::new(bin)
                .args([sub, "--seed", "42", "--samples", "20", "--out"])
                .arg(&path)
                .output()
                .unwrap()
                .status;
            bytes.push((status.code(), std::fs::read(&path).unwrap_or_default()));
        }
        let same = bytes[0] == bytes[1] && !bytes[0].1.is_empty();
        out.push((same, format!("{sub}: {} bytes, exit {:?}", bytes[0].1.len(), bytes[0].0)));
    }
    out
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("constants", constants),
        ("commutator bound", commutator),
        ("trilinear chain", trilinear),
        ("curvature kernel", curvature),
        ("weight identities", weights),
        ("poincare verification", poincare),
        ("bpst instanton", bpst),
        ("refined kato", kato),
        ("differential inequality", lemma3),
        ("gap verdicts", gap),
        ("annulus bound", annulus),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let checks = run();
        let ok = checks.iter().all(|c| c.0);
        println!(
            "{} [{:2}] {name} ({} checks, {:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            checks.len(),
            t0.elapsed().as_secs_f64()
        );
        for (_, detail) in checks.iter().filter(|c| !c.0) {
            println!("       {detail}");
        }
        if !ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
