//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always printed.
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not change
//! the exit code; any other failure does.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use toric_renyi::analysis::{format_estimate, ratio_estimates, source_label};
use toric_renyi::ed::{ed_boundary_purity, ed_ground_state, ed_sample_collision, Layout};
use toric_renyi::fermion::{solve_chain, string_expectation, StringFactor};
use toric_renyi::lattice::{
    build_partition, build_partition_at, BoundaryGeometry, LatticeSpec, PartitionCase, Star,
    Variant,
};
use toric_renyi::observables::{
    classify_scaling, renyi_boundary, topological_fixed_point, topological_renyi, wilson_loop,
    FixedPoint, RenyiOptions, ScalingLaw,
};
use toric_renyi::pcut::{
    build_generators, flow_expand, renyi_family, series_renyi, series_wilson, wilson_family,
    Channel, Regime, SeriesPolynomial,
};
use toric_renyi::pfaffian::pfaffian;
use toric_renyi::Error;

/// Criteria that fail for reasons analysed in the project notes.
const KNOWN_FAILURES: &[u8] = &[2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (big, d, n) in [(6, 2, 40), (5, 2, 12), (7, 3, 12)] {
        let zero = topological_fixed_point(big, d, n, FixedPoint::Reference).unwrap();
        let up = topological_fixed_point(big, d, n, FixedPoint::Polarized).unwrap();
        worst = worst.max((zero - 2.0).abs()).max(up.abs());
    }
    // λ = 0 through the full exact engine as well
    let spec = LatticeSpec::new(40, Variant::Quasi1d, 0.0).unwrap();
    let s = topological_renyi(&spec, 6, 2, RenyiOptions::default())
        .unwrap()
        .topological;
    worst = worst.max((s - 2.0).abs());
    let t = start.elapsed();
    outcome(
        worst < 1e-12 && within(t, Duration::from_secs(1)),
        format!("max deviation {worst:.1e}, {t:.2?}"),
    )
}

fn sweep(n: usize, big: usize, d: usize, lambda: f64) -> f64 {
    let spec = LatticeSpec::new(n, Variant::Quasi1d, lambda).unwrap();
    topological_renyi(&spec, big, d, RenyiOptions::default())
        .unwrap()
        .topological
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (0..21).map(|i| 0.5 + i as f64 * 0.05).collect();
    let curve = |n, big, d| {
        grid.iter()
            .map(|&l| sweep(n, big, d, l))
            .collect::<Vec<f64>>()
    };
    let values = curve(40, 6, 2);
    let first = values[0];
    let last = values[20];
    let rise = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let h = 0.01;
    let slope =
        |n, big, d| ((sweep(n, big, d, 1.0 + h) - sweep(n, big, d, 1.0 - h)) / (2.0 * h)).abs();
    let (small, large) = (slope(40, 6, 2), slope(80, 12, 4));
    // steepest grid slope, reported for context only
    let steepest = |v: &[f64]| {
        v.windows(2)
            .map(|w| (w[0] - w[1]) / 0.05)
            .fold(0.0, f64::max)
    };
    let (peak_small, peak_large) = (steepest(&values), steepest(&curve(80, 12, 4)));
    let t = start.elapsed();
    let checks = [
        (1.95..=2.0).contains(&first),
        (0.0..=0.05).contains(&last),
        rise <= 1e-6,
        large > small,
        within(t, Duration::from_secs(600)),
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "S2T(0.5)={first:.4} S2T(1.5)={last:.4} max rise {rise:.1e} |slope(1)| {small:.3} -> {large:.3} (peak {peak_small:.2} -> {peak_large:.2}), {t:.1?}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [0.3, 0.5, 0.7] {
        let w0 = wilson_loop(&solve_chain(500, lambda).unwrap(), 100)
            .unwrap()
            .w0;
        worst = worst.max((w0 - (1.0 - lambda * lambda).powf(0.25)).abs());
    }
    let law = |lambda: f64| {
        let chain = solve_chain(500, lambda).unwrap();
        let pts: Vec<(usize, f64)> = (10..=60)
            .map(|d| (d, wilson_loop(&chain, d).unwrap().w0))
            .collect();
        classify_scaling(&pts).unwrap().law
    };
    let (below, above) = (law(0.9), law(1.1));
    let t = start.elapsed();
    outcome(
        worst < 1e-3
            && below == ScalingLaw::Perimeter
            && above == ScalingLaw::Area
            && within(t, Duration::from_secs(120)),
        format!("max |W0 - (1-λ²)^¼| {worst:.1e}, λ=0.9 {below:?}, λ=1.1 {above:?}, {t:.1?}"),
    )
}

fn random_string(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<StringFactor> {
    loop {
        let len = rng.gen_range(1..=6);
        let factors: Vec<StringFactor> = (0..len)
            .map(|_| {
                let l = rng.gen_range(0..n);
                if rng.gen_bool(0.5) {
                    StringFactor::X(l)
                } else {
                    StringFactor::Z(l)
                }
            })
            .collect();
        // odd X-parity strings vanish by symmetry; keep the informative ones
        if factors
            .iter()
            .filter(|f| matches!(f, StringFactor::X(_)))
            .count()
            % 2
            == 0
        {
            return factors;
        }
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut strings = 0;
    for n in [6, 8, 10] {
        for lambda in [0.3, 1.0, 1.7] {
            let chain = solve_chain(n, lambda).unwrap();
            let ed = ed_ground_state(Layout::Chain { n }, lambda).unwrap();
            for _ in 0..300 {
                let f = random_string(&mut rng, n);
                let a = string_expectation(&chain, &f).unwrap().value();
                worst = worst.max((a - ed.expectation(&f)).abs());
                strings += 1;
            }
        }
    }
    let spec = LatticeSpec::new(8, Variant::Quasi1d, 0.0).unwrap();
    let geom = build_partition(PartitionCase::new(2, 3, 1).unwrap(), &spec).unwrap();
    let lambda = 0.6;
    let exact = renyi_boundary(
        &solve_chain(8, lambda).unwrap(),
        &geom,
        RenyiOptions::default(),
    )
    .unwrap();
    let ed = ed_ground_state(Layout::Chain { n: 8 }, lambda).unwrap();
    let purity = ed_boundary_purity(&ed, &geom).unwrap();
    let purity_gap = (purity - 2f64.powf(-exact.entropy)).abs();
    let mc = ed_sample_collision(&ed, &geom, 100_000, 17).unwrap();
    let sigmas = (mc.rate - purity).abs() / mc.stderr;
    let t = start.elapsed();
    outcome(
        worst < 1e-10 && purity_gap < 1e-8 && sigmas <= 3.0 && within(t, Duration::from_secs(300)),
        format!(
            "{strings} strings max gap {worst:.1e}, purity gap {purity_gap:.1e}, MC {sigmas:.2}σ, {t:.1?}"
        ),
    )
}

type Expected = Vec<(Channel, Vec<BigRational>)>;

/// Expected channel coefficients, signed as ln2·ΔS or −ln W per unit channel.
fn expected(order6: bool) -> Vec<(&'static str, Expected)> {
    let take = |v: Vec<BigRational>| if order6 { v } else { v[..2].to_vec() };
    vec![
        (
            "renyi/small/isotropic2d",
            vec![
                (Channel::L, take(vec![r(-1, 4), r(-63, 64), r(-503, 96)])),
                (Channel::K, take(vec![r(0, 1), r(-27, 64), r(-737, 256)])),
            ],
        ),
        (
            "wilson_log/small/isotropic2d",
            vec![
                (Channel::L, take(vec![r(1, 8), r(1, 2), r(7697, 3072)])),
                (Channel::K, take(vec![r(0, 1), r(-3, 32), r(-89, 128)])),
            ],
        ),
        (
            "renyi/large/isotropic2d",
            vec![
                (
                    Channel::L,
                    take(vec![r(1, 32), r(1, 1024), r(115, 2359296)]),
                ),
                (Channel::K, take(vec![r(0, 1), r(0, 1), r(-35, 4718592)])),
            ],
        ),
        (
            "renyi/small/quasi1d",
            vec![
                (Channel::LPrime, take(vec![r(-1, 4), r(-7, 64), r(-5, 96)])),
                (Channel::HPrime, take(vec![r(0, 1), r(5, 64), r(3, 32)])),
            ],
        ),
        (
            "renyi/large/quasi1d",
            vec![
                (Channel::LPrime, take(vec![r(1, 8), r(1, 32), r(47, 3072)])),
                (
                    Channel::HPrime,
                    take(vec![r(1, 8), r(7, 128), r(107, 3072)]),
                ),
            ],
        ),
        (
            "wilson_log/small/quasi1d",
            vec![(Channel::Const, take(vec![r(1, 4), r(1, 8), r(1, 12)]))],
        ),
    ]
}

fn all_series(order: usize) -> Vec<SeriesPolynomial> {
    let mut out = Vec::new();
    for variant in [Variant::Isotropic2d, Variant::Quasi1d] {
        let fam = renyi_family(order).unwrap();
        out.push(series_renyi(Regime::SmallField, variant, &fam, order).unwrap());
        out.push(series_wilson(variant, &wilson_family(variant, order).unwrap(), order).unwrap());
        out.push(series_renyi(Regime::LargeField, variant, &fam, order).unwrap());
    }
    out
}

fn compare(series: &[SeriesPolynomial], order6: bool) -> (bool, Vec<String>) {
    let mut ok = true;
    let mut bad = Vec::new();
    for (label, channels) in expected(order6) {
        let Some(s) = series.iter().find(|s| source_label(s) == label) else {
            ok = false;
            bad.push(format!("{label} missing"));
            continue;
        };
        for (ch, want) in channels {
            let got = s.channels.get(&ch).cloned().unwrap_or_default();
            if got != want {
                ok = false;
                bad.push(format!("{label} {ch}: {got:?}"));
            }
        }
        if let Some(n) = s.channels.get(&Channel::N) {
            if n.iter().any(|c| *c != r(0, 1)) {
                ok = false;
                bad.push(format!("{label} n-channel non-zero"));
            }
        }
    }
    (ok, bad)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let series = all_series(4);
    let (ok, bad) = compare(&series, false);
    let t = start.elapsed();
    outcome(
        ok && within(t, Duration::from_secs(900)),
        if bad.is_empty() {
            format!("6 series exact, n = 0, {t:.1?}")
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_6(series: &[SeriesPolynomial], t: Duration) -> Outcome {
    let (ok, bad) = compare(series, true);
    outcome(
        ok && within(t, Duration::from_secs(4 * 3600)),
        if bad.is_empty() {
            format!("6 series exact to λ^±6, n = 0, {t:.1?}")
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_7(series: &[SeriesPolynomial]) -> Outcome {
    let start = Instant::now();
    let table: &[(&str, Channel, [&str; 2])] = &[
        ("renyi/small/isotropic2d", Channel::L, ["0.504", "0.433"]),
        ("renyi/small/isotropic2d", Channel::K, ["-", "0.383"]),
        (
            "wilson_log/small/isotropic2d",
            Channel::L,
            ["0.500", "0.447"],
        ),
        ("wilson_log/small/isotropic2d", Channel::K, ["-", "0.367"]),
        ("renyi/large/isotropic2d", Channel::L, ["0.177", "0.223"]),
        ("renyi/large/isotropic2d", Channel::K, ["-", "-"]),
        ("renyi/small/quasi1d", Channel::LPrime, ["1.512", "1.449"]),
        ("renyi/small/quasi1d", Channel::HPrime, ["-", "0.913"]),
        (
            "wilson_log/small/quasi1d",
            Channel::Const,
            ["1.414", "1.225"],
        ),
        ("renyi/large/quasi1d", Channel::LPrime, ["0.500", "0.700"]),
        ("renyi/large/quasi1d", Channel::HPrime, ["0.661", "0.798"]),
    ];
    let estimates: Vec<_> = series.iter().flat_map(ratio_estimates).collect();
    let mut bad = Vec::new();
    let mut cells = 0;
    for (label, ch, want) in table {
        for (k, w) in want.iter().enumerate() {
            cells += 1;
            let got = estimates
                .iter()
                .find(|e| e.source == *label && e.channel == *ch && e.k == k + 1)
                .map(|e| format_estimate(e.value));
            if got.as_deref() != Some(*w) {
                bad.push(format!("{label} {ch} k={}: {got:?} vs {w}", k + 1));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && within(t, Duration::from_secs(1)),
        if bad.is_empty() {
            format!("{cells} cells match, {t:.2?}")
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_8() -> Outcome {
    let order = 6;
    let series = series_renyi(
        Regime::SmallField,
        Variant::Quasi1d,
        &renyi_family(order).unwrap(),
        order,
    )
    .unwrap();
    // annulus with corners seven stars apart, on the exact engine's lattice
    let n = 40;
    let geom =
        build_partition_at(PartitionCase::new(1, 21, 7).unwrap(), n, Star::new(0, 0)).unwrap();
    let predicted = |lambda: f64| {
        let x = lambda * lambda;
        series.channel_value(Channel::LPrime, x) * geom.horizontal_length as f64
            + series.channel_value(Channel::HPrime, x) * geom.horizontal_sections as f64
            + series.channel_value(Channel::N, x) * geom.loop_count as f64
            + series.channel_value(Channel::Const, x)
    };
    let lambdas = [0.02, 0.04, 0.08];
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&l| {
            let v = renyi_boundary(&solve_chain(n, l).unwrap(), &geom, RenyiOptions::default())
                .unwrap();
            (l.ln(), (-v.log_sum() - predicted(l)).abs().ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let devs: Vec<String> = pts.iter().map(|p| format!("{:.1e}", p.1.exp())).collect();
    outcome(
        slope >= 7.5,
        format!(
            "fitted exponent {slope:.2}, deviations [{}]",
            devs.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut odd_ok = true;
    for _ in 0..500 {
        let dim = rng.gen_range(2..=20);
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i + 1..dim {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        let det = m.clone().determinant();
        match pfaffian(&m) {
            Ok(pf) => worst = worst.max((pf * pf - det).abs() / det.abs()),
            Err(Error::OddDimension(_)) => odd_ok &= dim % 2 == 1 && det.abs() < 1e-9,
            Err(e) => panic!("{e}"),
        }
    }
    let mut flows = Vec::new();
    for letters in [vec![-2i8, 0, 2], vec![-4, -2, 0, 2, 4]] {
        let f = flow_expand(&letters, 6).unwrap();
        flows.push(f.check_unitarity().is_ok() && f.check_block_diagonal().is_ok());
    }
    let gradings = [Regime::SmallField, Regime::LargeField]
        .iter()
        .all(|&regime| {
            [Variant::Isotropic2d, Variant::Quasi1d].iter().all(|&v| {
                build_generators(regime, v, 4, 1)
                    .unwrap()
                    .check_gradings()
                    .is_ok()
            })
        });
    let mut identities = 0;
    let mut identity_ok = true;
    for big in 3..=10 {
        for d in 2..big {
            let Ok(cases) = PartitionCase::all(big, d) else {
                continue;
            };
            // shapes need a non-empty hole, D ≥ 2d + 1
            let Ok(g) = cases
                .iter()
                .map(|&c| build_partition_at(c, big + 4, Star::new(0, 0)))
                .collect::<Result<Vec<BoundaryGeometry>, _>>()
            else {
                continue;
            };
            let combo = |f: &dyn Fn(&BoundaryGeometry) -> usize| {
                -(f(&g[0]) as i64) + f(&g[1]) as i64 + f(&g[2]) as i64 - f(&g[3]) as i64
            };
            identity_ok &= combo(&|g| g.length) == 0
                && combo(&|g| g.corners) == 0
                && combo(&|g| g.horizontal_length) == 0
                && combo(&|g| g.horizontal_sections) == 0
                && combo(&|g| g.loop_count) == -2;
            identities += 1;
        }
    }
    let flows_ok = flows.iter().all(|&b| b);
    outcome(
        worst < 1e-9 && odd_ok && flows_ok && gradings && identity_ok && identities > 0,
        format!(
            "Pf²/det rel {worst:.1e}, flows unitary+block-diagonal {flows_ok}, gradings {gradings}, {identities} (D,d) identities {identity_ok}"
        ),
    )
}

fn main() {
    // optional criterion numbers on the command line select a subset
    let selected: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |id: u8| selected.is_empty() || selected.contains(&id);
    let mut results: Vec<(u8, Outcome)> = Vec::new();
    let mut report = |id: u8, o: Outcome| {
        let verdict = match (o.pass, KNOWN_FAILURES.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id}: {verdict}: {}", o.detail);
        results.push((id, o));
    };
    let simple: [(u8, fn() -> Outcome); 5] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
    ];
    for (id, f) in simple {
        if wanted(id) {
            report(id, f());
        }
    }
    if wanted(6) || wanted(7) {
        let start = Instant::now();
        let order6 = all_series(6);
        let t6 = start.elapsed();
        if wanted(6) {
            report(6, criterion_6(&order6, t6));
        }
        if wanted(7) {
            report(7, criterion_7(&order6));
        }
    }
    if wanted(8) {
        report(8, criterion_8());
    }
    if wanted(9) {
        report(9, criterion_9());
    }
    let unexpected: Vec<u8> = results
        .iter()
        .filter(|(id, o)| !o.pass && !KNOWN_FAILURES.contains(id))
        .map(|(id, _)| *id)
        .collect();
    let fixed: Vec<u8> = results
        .iter()
        .filter(|(id, o)| o.pass && KNOWN_FAILURES.contains(id))
        .map(|(id, _)| *id)
        .collect();
    if !fixed.is_empty() {
        println!("known failures now passing: {fixed:?}");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
