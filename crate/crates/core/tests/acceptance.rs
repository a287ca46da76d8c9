//! Acceptance criteria, one line per criterion. Runs without the test
//! harness so every line is printed; exits non-zero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{closing_fixtures, euler_closed_orbit, family, irreducible, sweep, GridIet};
use iet_closing::closing::{build_flow_box, close_at_point, TwistFamily};
use iet_closing::edges::{estimate_full_measure, in_a_k, max_disjoint_edges, ClosingCriterion, MeasureConfig};
use iet_closing::induction::{check_property_c, rauzy_orbit, HaltReason};
use iet_closing::io::load_flow;
use iet_closing::rational::{int, parse_rational, pow2_inv, ratio};
use iet_closing::{make_iet, Iet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn property_c() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut steps = 0;
    let mut ties = 0;
    for i in 0..100 {
        let m = 2 + i % 3;
        let lengths: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=1000)).collect();
        let q: i64 = lengths.iter().sum();
        let mut perm: Vec<usize> = (1..=m).collect();
        while {
            perm.shuffle(&mut rng);
            !irreducible(&perm)
        } {}
        let e = make_iet(lengths.iter().map(|&l| ratio(l, q)).collect(), perm.clone()).unwrap();
        let report = match check_property_c(&e, 20) {
            Ok(r) => r,
            Err(err) => return outcome(false, format!("sample {i}: {err}")),
        };
        if !report.all_passed {
            return outcome(false, format!("sample {i}: {lengths:?} {perm:?} disagrees"));
        }
        steps += report.entries.len();
        ties += usize::from(report.halt_reason == HaltReason::TieEncountered);
    }
    outcome(true, format!("100 iets, {steps} Rauzy steps checked, {ties} halted at a tie"))
}

fn a_k_bound() -> Outcome {
    let half = ratio(1, 2);
    let mut checked = 0;
    let mut least_margin = usize::MAX;
    for k in 1..=4u32 {
        let (center, radius) = (pow2_inv(4 * k), pow2_inv(5 * k));
        let shifts = [
            center.clone(),
            &center + &radius * ratio(9, 10),
            &center - &radius * ratio(9, 10),
            &center + &radius * &half,
        ];
        for a in &shifts {
            let rest = int(1) - a;
            let b = a * &half;
            let maps = [
                Iet::rotation(&int(1), a).unwrap(),
                make_iet(vec![&rest * ratio(3, 4), a.clone(), &rest * ratio(1, 4)], vec![2, 1, 3]).unwrap(),
                make_iet(vec![&rest * ratio(5, 6), b.clone(), &rest * ratio(1, 6), b.clone()], vec![3, 1, 4, 2]).unwrap(),
            ];
            for e in &maps {
                if !in_a_k(e, k).unwrap() {
                    return outcome(false, format!("k = {k}: constructed map with shift {a} is not in A_k"));
                }
                let count = max_disjoint_edges(e).count;
                if count <= k as usize {
                    return outcome(false, format!("k = {k}, shift {a}: only {count} disjoint edges"));
                }
                least_margin = least_margin.min(count - k as usize);
                checked += 1;
            }
        }
    }
    outcome(true, format!("{checked} members of A_1..A_4, count exceeds k by at least {least_margin}"))
}

fn euclid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    for _ in 0..50 {
        let q: i64 = rng.gen_range(2..=10_000);
        let p: i64 = rng.gen_range(1..q);
        let e = make_iet(vec![ratio(p, q), ratio(q - p, q)], vec![2, 1]).unwrap();
        let orbit = rauzy_orbit(&e, q as usize + 1).unwrap();
        let (mut a, mut c) = (p, q - p);
        let mut n = 0;
        while a != c {
            if a > c { a -= c } else { c -= a }
            let Some(step) = orbit.steps.get(n) else {
                return outcome(false, format!("{p}/{q}: Rauzy stopped after {n} steps"));
            };
            if step.after.lengths != [ratio(a, q), ratio(c, q)] {
                return outcome(false, format!("{p}/{q}: step {} differs", n + 1));
            }
            n += 1;
        }
        if orbit.steps.len() != n || orbit.halt_reason != HaltReason::TieEncountered {
            return outcome(false, format!("{p}/{q}: {} steps, halt {:?}; Euclid took {n}", orbit.steps.len(), orbit.halt_reason));
        }
        total += n;
    }
    outcome(true, format!("50 fractions, {total} subtraction steps matched"))
}

fn edge_oracle() -> Outcome {
    let start = Instant::now();
    const CAP: usize = 5000;
    let mut instances = Vec::with_capacity(CAP);
    for q in 2..=60i64 {
        instances.extend((1..q).map(|a| (vec![a, q - a], vec![2, 1])));
    }
    'outer: for q in 3..=60i64 {
        for a in 1..q {
            for b in 1..q - a {
                for perm in [[2, 3, 1], [3, 1, 2], [3, 2, 1]] {
                    if instances.len() == CAP {
                        break 'outer;
                    }
                    instances.push((vec![a, b, q - a - b], perm.to_vec()));
                }
            }
        }
    }
    let largest_q = instances.last().map(|(l, _)| l.iter().sum::<i64>()).unwrap();
    for (lengths, perm) in &instances {
        let q: i64 = lengths.iter().sum();
        let grid = GridIet::new(lengths.clone(), perm.clone(), q);
        let (exact, brute) = (max_disjoint_edges(&grid.to_iet()).count, grid.max_disjoint());
        if exact != brute {
            return outcome(false, format!("{lengths:?}/{q} {perm:?}: exact {exact}, brute force {brute}"));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{} instances (m = 2 up to q = 60, m = 3 up to q = {largest_q}) agree, {:.1} s",
        instances.len(),
        elapsed.as_secs_f64()
    );
    outcome(elapsed < Duration::from_secs(60), detail)
}

fn closing_run() -> Outcome {
    let start = Instant::now();
    let flow = load_flow(&fixtures_dir().join("rotation_tenth.json")).unwrap();
    let criterion = ClosingCriterion::new(-3, 0, 1).unwrap();
    let results = match close_at_point(&flow, &int(0), &criterion, 3, 1e-9, 1.0) {
        Ok(r) => r,
        Err(err) => return outcome(false, err.to_string()),
    };
    let elapsed = start.elapsed();
    let mut worst: f64 = 0.0;
    for r in &results {
        let edge = iet_closing::edges::VirtualEdge {
            s: parse_rational(&r.a_bar).unwrap(),
            e1: parse_rational(&r.b_bar).unwrap(),
            t: parse_rational(&r.c_bar).unwrap(),
        };
        let flow_box = build_flow_box(&flow, &edge).unwrap();
        let end = euler_closed_orbit(&flow, &flow_box, r.sigma1, r.periodic_point, 1e-4);
        worst = worst.max((end - r.periodic_point).abs());
    }
    let sigmas: Vec<String> = results.iter().map(|r| format!("{:.6}", r.sigma1)).collect();
    let decreasing = results.windows(2).all(|w| w[1].sigma1 < w[0].sigma1);
    let passed = results.len() == 3 && worst <= 1e-9 && decreasing && elapsed < Duration::from_secs(5);
    outcome(
        passed,
        format!(
            "{} results, worst independent residual {worst:.2e}, sigma1 = [{}] ({}), {:.2} s",
            results.len(),
            sigmas.join(", "),
            if decreasing { "strictly decreasing" } else { "not strictly decreasing" },
            elapsed.as_secs_f64()
        ),
    )
}

fn shipped_families() -> Vec<(String, TwistFamily, f64)> {
    let mut out: Vec<(String, TwistFamily, f64)> = Vec::new();
    for (name, fam) in closing_fixtures() {
        let sigma1 = fam.find_closing_parameter(1e-9).unwrap().sigma1;
        out.push((name.to_string(), fam, sigma1));
    }
    let criterion = ClosingCriterion::new(-3, 0, 1).unwrap();
    let files = [
        ("rotation_tenth.json", 3),
        ("rotation_seven_tenths.json", 1),
        ("rotation_1292_5473.json", 5),
        ("stepped_roof.json", 1),
    ];
    for (file, steps) in files {
        let flow = load_flow(&fixtures_dir().join(file)).unwrap();
        let criterion = ClosingCriterion { singularity_count: flow.singularities, ..criterion.clone() };
        for rate in [1.0, -1.0, 0.5] {
            for r in close_at_point(&flow, &int(0), &criterion, steps, 1e-9, rate).unwrap() {
                let fam = family(
                    &flow,
                    parse_rational(&r.a_bar).unwrap(),
                    parse_rational(&r.b_bar).unwrap(),
                    parse_rational(&r.c_bar).unwrap(),
                    rate,
                );
                out.push((format!("{file} n={} rate {rate}", r.n), fam, r.sigma1));
            }
        }
    }
    out
}

fn bisection_vs_sweep() -> Outcome {
    let families = shipped_families();
    let mut worst: f64 = 0.0;
    for (name, fam, sigma1) in &families {
        let Some(swept) = sweep(fam, 1e-6) else {
            return outcome(false, format!("{name}: sweep finds no sign change"));
        };
        let diff = (sigma1 - swept).abs();
        if diff > 1e-5 {
            return outcome(false, format!("{name}: bisection {sigma1}, sweep {swept}"));
        }
        worst = worst.max(diff);
    }
    outcome(true, format!("{} closing boxes, largest difference {worst:.2e}", families.len()))
}

fn full_measure() -> Outcome {
    let start = Instant::now();
    let criterion = ClosingCriterion::new(-3, 0, 1).unwrap();
    assert_eq!(criterion.threshold, 1);
    let run = |depth| estimate_full_measure(&MeasureConfig::new(3, criterion.clone(), depth, 500, 2024)).unwrap();
    let (shallow, deep) = (run(3), run(8));
    let elapsed = start.elapsed();
    let survived = deep.certified.count + deep.undecided.count;
    let fraction = survived as f64 / deep.config.samples as f64;
    let monotone = deep.refuted.fraction <= shallow.refuted.fraction;
    let passed = monotone && fraction >= 0.9 && elapsed < Duration::from_secs(300);
    let ci = |f: &iet_closing::edges::Fraction| format!("{:.3} [{:.3}, {:.3}]", f.fraction, f.ci_low, f.ci_high);
    outcome(
        passed,
        format!(
            "refuted {} at depth 3, {} at depth 8 ({}); certified {} + undecided {} = {fraction:.3} at depth 8 (need 0.9); {:.1} s",
            ci(&shallow.refuted),
            ci(&deep.refuted),
            if monotone { "non-increasing" } else { "increasing" },
            ci(&deep.certified),
            ci(&deep.undecided),
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures_dir();
    let iet_file = dir.path().join("e.json");
    std::fs::write(&iet_file, r#"{"lengths": ["1/5", "1/3", "7/15"], "permutation": [3, 1, 2]}"#).unwrap();
    let iet_path = iet_file.to_str().unwrap().to_string();
    let flow_path = fx.join("rotation_1292_5473.json").to_str().unwrap().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["eval", "--input", &iet_path, "--x", "1/7", "--n", "5"],
        vec!["induce", "--input", &iet_path, "--b", "2/5"],
        vec!["rauzy", "--input", &iet_path, "--depth", "12", "--check-induced"],
        vec!["edges", "--input", &iet_path],
        vec!["probe", "--input", &iet_path, "--depth", "6"],
        vec!["measure", "--m", "3", "--samples", "40", "--depth", "5", "--seed", "9", "--csv", "{dir}/rows.csv"],
        vec!["close", "--flow", &flow_path, "--point", "1/3", "--shrink-steps", "2", "--trace-csv", "{dir}/trace.csv"],
    ]
    .into_iter()
    .map(|args| args.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let sub = dir.path().join(format!("run{attempt}"));
            std::fs::create_dir_all(&sub).unwrap();
            let args: Vec<String> = args.iter().map(|a| a.replace("{dir}", sub.to_str().unwrap())).collect();
            let out = Command::new(env!("CARGO_BIN_EXE_iet")).args(&args).output().unwrap();
            if out.status.code() != Some(0) {
                return outcome(false, format!("{}: exit {:?}", args[0], out.status.code()));
            }
            let mut files: Vec<Vec<u8>> = Vec::new();
            for name in ["rows.csv", "trace.csv"] {
                if let Ok(bytes) = std::fs::read(sub.join(name)) {
                    files.push(bytes);
                }
            }
            std::fs::remove_dir_all(&sub).unwrap();
            outputs.push((out.stdout, files));
        }
        if outputs[0] != outputs[1] {
            return outcome(false, format!("{} differs between runs", args[0]));
        }
    }
    outcome(true, format!("{} commands byte-identical across two runs, including CSV files", runs.len()))
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("Rauzy vs induction cross-validation", Box::new(property_c)),
        ("A_k edge bound", Box::new(a_k_bound)),
        ("m = 2 Rauzy is Euclid", Box::new(euclid)),
        ("edge oracle equivalence", Box::new(edge_oracle)),
        ("closing run", Box::new(closing_run)),
        ("bisection vs sweep", Box::new(bisection_vs_sweep)),
        ("full-measure trend", Box::new(full_measure)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.2} s]",
            if result.passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

