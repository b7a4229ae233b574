//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and fails if any criterion fails.

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
use std::io::Write;
use std::time::{Duration, Instant};

use beta_targets::beta::{
    count_admissible, count_full, cylinder_of, enumerate_cylinders, find_full_in_interval, lemma_length_window,
    BetaParam, CylinderFilter, EnumOptions, FullSearchParams, Interval,
};
use beta_targets::content::{brute_force_content_2d, content_sandwich, SortedRectangle, DEFAULT_DEPTHS};
use beta_targets::dimension::{closed_form_example, s_n, s_star, ClosedForm, TargetSpec, ThetaRule};
use beta_targets::geometry::{bounding_hyperrectangle, pivoted_orthogonalize, volume, Parallelepiped};
use beta_targets::lab::{cover_exponent_scan, default_epsilon, verify_measure_bound, LabOptions, MuMeasure};
use beta_targets::polygon::ConvexPolygon;
use beta_targets::precision::Precision;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, title: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let pass = out.pass && elapsed < limit;
    let line = format!(
        "{} criterion {id} {title}: {} [{:.3}s, limit {}s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    writeln!(std::io::stdout(), "{line}").unwrap();
    pass
}

fn rotated_spec(rule: ThetaRule) -> TargetSpec {
    TargetSpec::rotated([2.0, 4.0], rule).unwrap()
}

fn constant_angle_reproduction() -> Outcome {
    let mut worst = Vec::new();
    let mut pass = true;
    for (theta, label) in [
        (0.0, "0"),
        (FRAC_PI_6, "pi/6"),
        (FRAC_PI_4, "pi/4"),
        (1.0, "1.0"),
        (FRAC_PI_2, "pi/2"),
    ] {
        let expected = closed_form_example(ClosedForm::ConstantAngle(theta)).unwrap();
        let spec = rotated_spec(ThetaRule::Constant(theta));
        let dev = (1..=50)
            .map(|n| (s_n(&spec, n).unwrap().s_n - expected).abs())
            .fold(0.0, f64::max);
        pass &= dev <= 1e-9;
        worst.push(format!("theta={label} max|s_n-{expected}|={dev:.3e}"));
    }
    Outcome {
        pass,
        detail: worst.join(", "),
    }
}

fn arccos_angle_reproduction() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for a in [0.0, 0.25, 0.5, 0.75, 1.0, 2.0] {
        let expected = closed_form_example(ClosedForm::ArccosAngle(a)).unwrap();
        let got = s_n(&rotated_spec(ThetaRule::ArccosPow2(a)), 200).unwrap().s_n;
        let dev = (got - expected).abs();
        pass &= dev <= 1e-2;
        parts.push(format!("a={a} s_200={got:.5} (dev {dev:.2e})"));
    }
    let flat = rotated_spec(ThetaRule::Constant(0.0));
    let zero = rotated_spec(ThetaRule::ArccosPow2(0.0));
    let same = (1..=200).all(|n| s_n(&flat, n).unwrap().s_n == s_n(&zero, n).unwrap().s_n);
    pass &= same;
    parts.push(format!("a=0 identical to theta=0: {same}"));
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn one_dimensional_sanity() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [2.0, BetaParam::golden_ratio().value(), 2.5] {
        for t in [0.5, 1.0, 3.0] {
            let spec = TargetSpec::axis(vec![beta], vec![t]).unwrap();
            for n in 1..=50 {
                worst = worst.max((s_n(&spec, n).unwrap().s_n - 1.0 / (1.0 + t)).abs());
            }
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("max|s_n-1/(1+t)|={worst:.3e}"),
    }
}

fn full_words(beta: BetaParam, n: usize) -> Vec<beta_targets::beta::Word> {
    enumerate_cylinders(beta, n, CylinderFilter::full(), EnumOptions::default())
        .unwrap()
        .map(|c| c.unwrap().word)
        .collect()
}

fn counting_suite() -> Outcome {
    let betas = [BetaParam::golden_ratio(), BetaParam::new(2.5).unwrap(), BetaParam::new(E).unwrap(), BetaParam::new(3.0).unwrap()];
    let mut count_violations = 0;
    let mut concat_pairs = 0u64;
    let mut concat_violations = 0u64;
    for &beta in &betas {
        for n in 1..=12 {
            count_violations += usize::from(count_admissible(beta, n).is_err());
            count_violations += usize::from(count_full(beta, n).is_err());
        }
        let levels: Vec<Vec<_>> = (1..=11).map(|n| full_words(beta, n)).collect();
        for n in 1..=11 {
            for m in 1..=12 - n {
                for u in &levels[n - 1] {
                    for v in &levels[m - 1] {
                        concat_pairs += 1;
                        let full = cylinder_of(beta, &u.concat(v), Precision::Double).is_some_and(|c| c.is_full());
                        concat_violations += u64::from(!full);
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut find_failures = 0;
    let delta = 1.0;
    for k in 0..1000 {
        let beta = betas[k % betas.len()];
        let (n0, bound) = lemma_length_window(beta, delta, 4096).unwrap();
        let params = FullSearchParams::new(delta, n0).unwrap();
        let len = (bound.ln() - rng.random::<f64>() * 100f64.ln()).exp() * (1.0 - 1e-12);
        let lo = rng.random::<f64>() * (1.0 - len);
        let iv = Interval::new(lo, lo + len).unwrap();
        find_failures += usize::from(find_full_in_interval(beta, iv, params).is_err());
    }
    Outcome {
        pass: count_violations == 0 && concat_violations == 0 && find_failures == 0,
        detail: format!(
            "count violations={count_violations}, concatenation violations={concat_violations}/{concat_pairs}, find failures={find_failures}/1000"
        ),
    }
}

fn random_parallelepiped(rng: &mut ChaCha8Rng, d: usize) -> Parallelepiped {
    loop {
        let origin: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let columns: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
            .collect();
        if let Ok(p) = Parallelepiped::new(origin, columns) {
            return p;
        }
    }
}

fn geometry_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut failures = 0;
    for k in 0..10_000 {
        let d = 2 + k % 4;
        let p = random_parallelepiped(&mut rng, d);
        let ok = pivoted_orthogonalize(&p).is_ok_and(|f| {
            let sorted = f.norms.windows(2).all(|w| w[0] >= w[1]);
            let boxed = bounding_hyperrectangle(&f, p.origin());
            let inside = p.vertices().iter().all(|v| boxed.contains(v, 1e-9));
            f.orthogonality_defect() <= 1e-9 && sorted && f.max_abs_u() <= 2.0 + 1e-9 && inside
        }) && volume(&p).is_ok();
        failures += usize::from(!ok);
    }
    Outcome {
        pass: failures == 0,
        detail: format!("failures={failures}/10000"),
    }
}

fn content_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let depths: Vec<u32> = DEFAULT_DEPTHS.collect();
    let mut failures = Vec::new();
    for k in 0..100 {
        // even k: axis rectangle, tight box with ratio 1; odd k: parallelogram
        // inside its orthogonal box with ratio 2^{-6}
        let (poly, rect, c) = if k % 2 == 0 {
            let w = 10f64.powf(rng.random_range(-2.0..-0.3));
            let h = 10f64.powf(rng.random_range(-2.0..-0.3));
            let x = rng.random_range(0.0..1.0 - w);
            let y = rng.random_range(0.0..1.0 - h);
            (ConvexPolygon::rect(x, y, x + w, y + h), SortedRectangle::new(vec![w, h]).unwrap(), 1.0)
        } else {
            let p = loop {
                let a = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
                let b = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
                if let Ok(p) = Parallelepiped::new(vec![0.5, 0.5], vec![a.to_vec(), b.to_vec()]) {
                    if volume(&p).unwrap() > 1e-4 {
                        break p;
                    }
                }
            };
            let frame = pivoted_orthogonalize(&p).unwrap();
            let sides = bounding_hyperrectangle(&frame, p.origin()).sorted_sides();
            (
                ConvexPolygon::from_parallelepiped(&p).unwrap(),
                SortedRectangle::new(sides).unwrap(),
                2f64.powi(-6),
            )
        };
        for s in [0.5, 1.0, 1.3, 1.7, 2.0] {
            let est = brute_force_content_2d(&poly, s, &depths).unwrap();
            let (lo, hi) = content_sandwich(&rect, c, s).unwrap();
            if est.lower < lo * 0.9 || est.upper > hi * 1.1 {
                failures.push(format!("shape {k} sides {:?} s={s}: [{:.3e}, {:.3e}] vs [{lo:.3e}, {hi:.3e}]", rect.sides(), est.lower, est.upper));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("failures={}/500{}", failures.len(), failures.iter().map(|f| format!("; {f}")).collect::<String>()),
    }
}

fn cover_suite() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (theta, label) in [(0.0, "0"), (FRAC_PI_4, "pi/4")] {
        let spec = rotated_spec(ThetaRule::Constant(theta));
        let mut worst_ratio: f64 = 1.0;
        let mut at_s = Vec::new();
        let mut above = Vec::new();
        for n in 2..=4 {
            let scan = cover_exponent_scan(&spec, n, None, LabOptions::default()).unwrap();
            for row in &scan.rows {
                worst_ratio = worst_ratio.max(row.ratio).max(1.0 / row.ratio);
            }
            let row = scan.argmin_row().unwrap();
            at_s.push(row.scaled);
            above.push(row.scaled_at(scan.s_n + 0.2));
        }
        let spread = at_s.iter().fold(0.0, |a: f64, b| a.max(*b)) / at_s.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        let decreasing = above.windows(2).all(|w| w[1] < w[0]);
        pass &= worst_ratio <= 64.0 && spread <= 256.0 && decreasing;
        parts.push(format!(
            "theta={label} worst count/formula factor={worst_ratio:.2}, argmin spread={spread:.2}, s_n+0.2 products={above:?} decreasing={decreasing}"
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn measure_suite() -> Outcome {
    let spec = rotated_spec(ThetaRule::Constant(FRAC_PI_4));
    let s_est = s_star(&spec, 1, 50, 20, 1e-3).unwrap().s_star;
    let mut maxima = Vec::new();
    for n in [2, 3] {
        let t = s_n(&spec, n).unwrap().s_n - 0.1;
        let eps = default_epsilon(s_est, t);
        let m = MuMeasure::new(&spec, n, vec![Interval::unit(); 2], eps, LabOptions::default()).unwrap();
        let chk = verify_measure_bound(&m, t, 10_000, 0x5eed_0008).unwrap();
        maxima.push(chk.max_ratio);
    }
    let finite = maxima.iter().all(|m| m.is_finite());
    Outcome {
        pass: finite && maxima[1] <= 2.0 * maxima[0],
        detail: format!("max ratio n=2: {:.4}, n=3: {:.4} (growth {:.3})", maxima[0], maxima[1], maxima[1] / maxima[0]),
    }
}

#[test]
fn acceptance_criteria() {
    let results = [
        report(1, "constant-angle example", Duration::from_secs(1), constant_angle_reproduction),
        report(2, "arccos-angle example", Duration::from_secs(1), arccos_angle_reproduction),
        report(3, "one-dimensional intervals", Duration::from_secs(1), one_dimensional_sanity),
        report(4, "cylinder counting", Duration::from_secs(120), counting_suite),
        report(5, "orthogonalization properties", Duration::from_secs(30), geometry_suite),
        report(6, "content oracle sandwich", Duration::from_secs(120), content_suite),
        report(7, "cover counts of E_n", Duration::from_secs(180), cover_suite),
        report(8, "ball masses of mu_n", Duration::from_secs(180), measure_suite),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
