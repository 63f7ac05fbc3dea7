//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line, then asserts.

use std::time::Instant;

use lasserre_bounds::bound::{compute_bound, compute_bound_with, BoundOptions, Pencil};
use lasserre_bounds::certificate::{self, Holds};
use lasserre_bounds::cli::run_bench;
use lasserre_bounds::numeric::parse_rational;
use lasserre_bounds::sampler;
use lasserre_bounds::testfns::{self, GoldenRow};
use lasserre_bounds::{parse_polynomial, Domain, MomentTable, MultiIndex};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

fn verdict(id: &str, title: &str, pass: bool, detail: &str, started: Instant) {
    println!(
        "{} criterion {id}: {title} ({detail}; {:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

fn golden_group(group: &str) -> Vec<GoldenRow> {
    testfns::golden().into_iter().filter(|g| g.group == group && g.tolerance.is_some()).collect()
}

fn reproduce(id: &str, title: &str, group: &str, budget: f64) {
    let t = Instant::now();
    let rows = run_bench(&golden_group(group)).unwrap();
    let failing: Vec<String> = rows
        .iter()
        .filter(|b| b.status != "pass")
        .map(|b| format!("{} r={} got {:.6} want {}", b.function, b.r, b.value.unwrap_or(f64::NAN), b.golden))
        .collect();
    let worst = rows.iter().filter_map(|b| b.delta).map(f64::abs).fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    let pass = failing.is_empty() && secs < budget;
    let mut detail = format!("{} cells, max |delta| {worst:.2e}, budget {budget}s", rows.len());
    if !failing.is_empty() {
        detail.push_str(&format!(", {} outside tolerance: {}", failing.len(), failing.join("; ")));
    }
    verdict(id, title, pass, &detail, t);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_1_bivariate_box_reference_values() {
    reproduce("1", "bivariate box bounds r=1..12 within 1e-3", "box", 5.0);
}

#[test]
fn criterion_2_simplex_and_ball_reference_values() {
    reproduce("2", "simplex and ball bounds r=1..10 within 1e-3", "simplex-ball", 5.0);
}

#[test]
fn criterion_3_ten_dimensional_reference_values() {
    reproduce("3", "n=10 bounds r=1..3 within 1e-2 relative", "highdim", 60.0);
}

#[test]
fn criterion_4_closed_form_linear_case() {
    let t = Instant::now();
    let f = parse_polynomial("x1", 1).unwrap();
    let dom = Domain::cube(1, "0", "1").unwrap();
    // det(A − λB) = 0 with A = [[1/2,1/3],[1/3,1/4]], B = [[1,1/2],[1/2,1/3]] gives 6λ² − 6λ + 1 = 0
    let exact = (3.0 - 3f64.sqrt()) / 6.0;
    let r1 = compute_bound(&f, &dom, 1).unwrap().value;
    let r0 = compute_bound(&f, &dom, 0).unwrap().value;
    let pass = (r1 - exact).abs() < 1e-12 && r0 == 0.5;
    verdict("4", "f=x on [0,1]: r=1 gives (3-sqrt 3)/6, r=0 gives 1/2", pass, &format!("r=1 err {:.1e}, r=0 {r0}", (r1 - exact).abs()), t);
    assert!(pass);
}

fn corpus() -> Vec<(testfns::TestCase, u32)> {
    testfns::list()
        .into_iter()
        .map(|name| {
            let n = if testfns::is_parametric(name) { Some(10) } else { None };
            let tc = testfns::get(name, n).unwrap();
            let r_max = if tc.n > 2 { 3 } else { 10 };
            (tc, r_max)
        })
        .collect()
}

fn uniform_point(dom: &Domain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = dom.dim();
    match dom {
        Domain::Box { .. } => dom.bounds_f64().iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect(),
        Domain::Simplex { .. } => {
            let e: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let s: f64 = e.iter().sum();
            e[..n].iter().map(|v| v / s).collect()
        }
        Domain::Ball { .. } => {
            let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rad = rng.random::<f64>().powf(1.0 / n as f64);
            g.iter().map(|v| v * rad / norm).collect()
        }
    }
}

#[test]
fn criterion_5_property_suite() {
    let t = Instant::now();
    let mut problems = Vec::new();

    // (a) monotone sweeps, (b) never below the minimum
    let mut worst_rise = 0.0f64;
    let mut worst_gap = f64::INFINITY;
    for (tc, r_max) in corpus() {
        let table = MomentTable::new(&tc.domain, 2 * r_max + tc.polynomial.degree());
        let pencil = Pencil::new(&tc.polynomial, &table, r_max).unwrap();
        let values: Vec<f64> = (1..=r_max).map(|r| pencil.solve(r).unwrap().value).collect();
        for w in values.windows(2) {
            let rise = (w[1] - w[0]) / w[0].abs().max(1.0);
            worst_rise = worst_rise.max(rise);
            if rise > 1e-9 {
                problems.push(format!("{} not monotone: {} -> {}", tc.name, w[0], w[1]));
            }
        }
        for v in &values {
            worst_gap = worst_gap.min(v - tc.f_min);
            if *v < tc.f_min - 1e-6 {
                problems.push(format!("{} bound {v} below f_min {}", tc.name, tc.f_min));
            }
        }
    }

    // (c) axis-aligned affine maps of box instances
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_affine = 0.0f64;
    for name in ["booth", "matyas", "three-hump-camel", "motzkin"] {
        let tc = testfns::get(name, None).unwrap();
        let Domain::Box { bounds } = &tc.domain else { unreachable!() };
        for _ in 0..3 {
            let scale: Vec<BigRational> = (0..2)
                .map(|_| {
                    let s = BigRational::new(rng.random_range(1..=40).into(), 8.into());
                    if rng.random::<bool>() { s } else { -s }
                })
                .collect();
            let shift: Vec<BigRational> = (0..2).map(|_| BigRational::new(rng.random_range(-40..=40).into(), 4.into())).collect();
            let g = tc.polynomial.substitute_affine(&scale, &shift).unwrap();
            let mapped: Vec<(BigRational, BigRational)> = bounds
                .iter()
                .zip(scale.iter().zip(&shift))
                .map(|((lo, hi), (s, c))| {
                    let (a, b) = ((lo - c) / s, (hi - c) / s);
                    if a < b { (a, b) } else { (b, a) }
                })
                .collect();
            let dom = Domain::new_box(mapped).unwrap();
            let r = rng.random_range(2..=6);
            let v0 = compute_bound(&tc.polynomial, &tc.domain, r).unwrap().value;
            let v1 = compute_bound(&g, &dom, r).unwrap().value;
            let rel = (v0 - v1).abs() / v0.abs().max(1e-12);
            worst_affine = worst_affine.max(rel);
            if rel > 1e-6 {
                problems.push(format!("{name} r={r} affine image {v1} vs {v0}"));
            }
        }
    }

    // (d) moments against Monte Carlo with 10⁶ points
    let subsets: [&[&[u32]]; 3] = [
        &[&[0], &[1], &[2], &[3], &[6], &[10]],
        &[&[0, 0], &[1, 0], &[1, 1], &[0, 2], &[3, 2], &[4, 6], &[10, 0], &[5, 5]],
        &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 1], &[2, 0, 2], &[2, 2, 2], &[4, 2, 0], &[0, 0, 10], &[3, 3, 4]],
    ];
    let mut worst_z = 0.0f64;
    let mut checked = 0;
    for n in 1..=3 {
        let boxed: Vec<(BigRational, BigRational)> =
            [("-1", "2"), ("0", "1"), ("-1/2", "1/2")][..n].iter().map(|(a, b)| (parse_rational(a).unwrap(), parse_rational(b).unwrap())).collect();
        for (d, dom) in [Domain::new_box(boxed).unwrap(), Domain::simplex(n).unwrap(), Domain::ball(n).unwrap()].iter().enumerate() {
            let vol = dom.volume().to_f64();
            for (k, alpha) in subsets[n - 1].iter().enumerate() {
                // one independent stream per check
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
                rng.set_stream((d * 100 + k) as u64);
                let a = MultiIndex::new(alpha.to_vec());
                let exact = dom.moment(&a).unwrap().to_f64();
                let vals: Vec<f64> = (0..1_000_000).map(|_| vol * a.eval(&uniform_point(dom, &mut rng))).collect();
                let m = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / m;
                let se = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
                // constant integrands have zero spread; floor at the naive summation error bound
                let se = se.max(m * f64::EPSILON * exact.abs().max(1.0));
                let z = (mean - exact).abs() / se;
                worst_z = worst_z.max(z);
                checked += 1;
                if z > 3.0 {
                    problems.push(format!("{} n={n} alpha={alpha:?}: exact {exact} vs MC {mean} ± {se}", dom.kind()));
                }
            }
        }
    }

    let pass = problems.is_empty();
    let detail = format!(
        "max relative rise {worst_rise:.1e}, min bound - f_min {worst_gap:.3e}, max affine deviation {worst_affine:.1e}, {checked} moments max z {worst_z:.2}{}",
        if pass { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    verdict("5", "monotone sweeps, bound >= f_min, affine invariance, moments vs Monte Carlo", pass, &detail, t);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_6_sampling_suite() {
    let t = Instant::now();
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    const N: usize = 10_000;
    const SEED: u64 = 1;
    for (name, r) in [("motzkin", 12), ("three-hump-camel", 8)] {
        let tc = testfns::get(name, None).unwrap();
        let res = compute_bound(&tc.polynomial, &tc.domain, r).unwrap();
        let chain = sampler::build_chain(&res.density, &tc.domain).unwrap();
        let batch = sampler::sample(&chain, &tc.polynomial, N, SEED).unwrap();
        let s = sampler::summarize(&batch.values);
        let z = (s.mean - res.value) / s.std_error;
        notes.push(format!("{name} r={r}: mean {:.5} vs bound {:.5} (z {z:+.2})", s.mean, res.value));
        if z.abs() > 3.0 {
            problems.push(format!("{name} sample mean {} is {z:.2} standard errors from {}", s.mean, res.value));
        }
        for eps in [0.5, 1.0, 2.0] {
            let p = sampler::markov_check(&tc.polynomial, &batch, res.value, tc.f_min, eps).unwrap();
            let cap = 1.0 / (1.0 + eps) + 3.0 * (p * (1.0 - p) / N as f64).sqrt();
            if p > cap {
                problems.push(format!("{name} eps={eps}: exceedance {p} > {cap}"));
            }
        }
        let outside = batch.points.iter().filter(|x| !tc.domain.contains(x, 0.0)).count();
        if outside > 0 {
            problems.push(format!("{name}: {outside} points outside the domain"));
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        sampler::write_csv(&sampler::sample(&chain, &tc.polynomial, 500, 9).unwrap(), &mut a).unwrap();
        sampler::write_csv(&sampler::sample(&chain, &tc.polynomial, 500, 9).unwrap(), &mut b).unwrap();
        if a != b {
            problems.push(format!("{name}: output differs between identical runs"));
        }
    }
    let pass = problems.is_empty();
    let detail = format!("{}{}", notes.join(", "), if pass { String::new() } else { format!("; {}", problems.join("; ")) });
    verdict("6", "sample means, Markov exceedance, membership, determinism", pass, &detail, t);
    assert!(pass, "{detail}");
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for k in 1..intervals {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn criterion_7_certificate_suite() {
    let t = Instant::now();
    let mut problems = Vec::new();

    // (a) φ_{2r} nonnegative on the line and sandwiched above e^{−t} on t ≥ 0
    for r in 0..=10u32 {
        let phi = certificate::phi_coeffs(r).to_f64_terms();
        let fact = (1..=(2 * r + 1) as u64).map(|k| k as f64).product::<f64>();
        for k in 0..=10_000 {
            let t = -50.0 + 100.0 * k as f64 / 10_000.0;
            let v = phi.eval(&[t]);
            // relative slack: the polynomial reaches 1e43 on this grid
            if v < -1e-12 * (1.0 + t.abs().powi(2 * r as i32)) {
                problems.push(format!("phi_{} negative at {t}: {v}", 2 * r));
                break;
            }
        }
        for k in 0..=3000 {
            let t = 30.0 * k as f64 / 3000.0;
            let gap = phi.eval(&[t]) - (-t).exp();
            let cap = t.powi(2 * r as i32 + 1) / fact;
            let slack = 1e-12 * (1.0 + cap);
            if gap < -slack || gap > cap + slack {
                problems.push(format!("phi_{} sandwich fails at {t}: gap {gap}, cap {cap}", 2 * r));
                break;
            }
        }
    }

    // (b) p(n) against quadrature
    let mut worst_p = 0.0f64;
    for n in 1..=10usize {
        let q = simpson(|x| x.powi(n as i32) * (-x * x / 2.0).exp(), 0.0, 40.0, 400_000);
        let rel = (certificate::p_constant(n) - q).abs() / q;
        worst_p = worst_p.max(rel);
        if rel > 1e-8 {
            problems.push(format!("p({n}) = {} vs quadrature {q}", certificate::p_constant(n)));
        }
    }

    // (c) c ≤ C and the order-2r bound below the certificate value
    let mut bivariate: Vec<testfns::TestCase> = testfns::list()
        .into_iter()
        .map(|name| testfns::get(name, Some(2)).unwrap())
        .filter(|tc| tc.n == 2)
        .collect();
    bivariate.sort_by_key(|tc| tc.name);
    let mut checks = 0;
    for tc in &bivariate {
        let a = &tc.minimizers[0];
        let table = MomentTable::new(&tc.domain, 24 + tc.polynomial.degree());
        let pencil = Pencil::new(&tc.polynomial, &table, 12).unwrap();
        for r in 1..=6u32 {
            let rep = certificate::certificate_with_table(&tc.polynomial, &table, a, r, tc.f_min).unwrap();
            let lower = pencil.solve(2 * r).unwrap().value;
            let slack = 3.0 * rep.c_ka_std_error;
            if rep.c_rka > rep.c_ka + slack {
                problems.push(format!("{} r={r}: c_rKa {} > C_Ka {}", tc.name, rep.c_rka, rep.c_ka));
            }
            if lower > rep.f_rka + 1e-7 {
                problems.push(format!("{} r={r}: order-{} bound {lower} > f_rKa {}", tc.name, 2 * r, rep.f_rka));
            }
            checks += 1;
        }
    }

    // (d) the error estimate on f = x over [0, 1] with a = 0
    let f = parse_polynomial("x1", 1).unwrap();
    let dom = Domain::cube(1, "0", "1").unwrap();
    let r_k = certificate::geom_params(&dom).r_k;
    let mut points = Vec::new();
    for r in 1..=12u32 {
        let rep = certificate::certificate(&f, &dom, &[0.0], r, 0.0).unwrap();
        if (r as f64) >= r_k / 2.0 {
            if rep.holds != Holds::True {
                problems.push(format!("toy r={r}: holds={:?} gap {} rhs {}", rep.holds, rep.gap, rep.rhs));
            }
            points.push(((2.0 * r as f64 + 1.0).ln(), rep.gap.ln()));
        }
    }
    let m = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / m, points.iter().map(|p| p.1).sum::<f64>() / m);
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    let pass = problems.is_empty();
    let detail = format!(
        "max p(n) rel err {worst_p:.1e}, {checks} bivariate certificates, r_K/2 = {:.2}, {} orders hold, log-log slope {slope:.3} (reported only){}",
        r_k / 2.0,
        points.len(),
        if pass { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    verdict("7", "truncated-exponential bounds, p(n), normalizer and sandwich checks, toy estimate", pass, &detail, t);
    assert!(pass, "{detail}");
}

#[test]
fn rescaled_sweep_keeps_values() {
    let tc = testfns::get("booth", None).unwrap();
    for r in [3, 8] {
        let a = compute_bound(&tc.polynomial, &tc.domain, r).unwrap();
        let b = compute_bound_with(&tc.polynomial, &tc.domain, r, BoundOptions { rescale: true }).unwrap();
        assert!((a.value - b.value).abs() <= 1e-6 * a.value.abs());
        assert!(b.cond_b_raw < a.cond_b_raw);
    }
}
