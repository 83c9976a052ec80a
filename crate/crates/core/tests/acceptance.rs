//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hamdual::constants::{instance_constants, Mode};
use hamdual::decider::{verify_certificate, Verdict};
use hamdual::dual::{brute_dual, eval_dual, LambdaVector, StartMode};
use hamdual::ellipsoid::{run_solver_observed, CutKind, ExactEllipsoid, SolverConfig};
use hamdual::graph::{all_connected_graphs, generate, GeneratorSpec, Graph};
use hamdual::harness::{
    load_manifest, run_corpus, run_instance, write_corpus, Concordance, CorpusRun, Instance, InstanceRun, RunReport,
    RUN_REPORT_SCHEMA,
};
use hamdual::numerics::factorial;

const MODES: [StartMode; 3] = [StartMode::PaperFixed, StartMode::AllStarts, StartMode::Unrestricted];

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn gnp(n: usize, p: &str, seed: u64) -> Graph {
    generate(&GeneratorSpec::Gnp {
        n,
        p: p.parse().unwrap(),
        seed,
    })
    .unwrap()
    .graph
}

fn random_lambda(rng: &mut ChaCha8Rng, n: usize) -> LambdaVector {
    LambdaVector::new(
        (0..n)
            .map(|_| BigRational::new(rng.random_range(-40i64..=40).into(), rng.random_range(1i64..=12).into()))
            .collect(),
    )
}

fn dyadic_lambda(rng: &mut ChaCha8Rng, n: usize) -> LambdaVector {
    LambdaVector::new(
        (0..n)
            .map(|_| {
                let j = rng.random_range(0u32..=6);
                BigRational::new(rng.random_range(-256i64..=256).into(), BigInt::one() << j)
            })
            .collect(),
    )
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(3..=max_n);
    let p = ["1/4", "1/2", "3/4", "1"][rng.random_range(0..4)];
    gnp(n, p, rng.random())
}

fn dot(g: &[i64], a: &[BigRational], b: &[BigRational]) -> BigRational {
    g.iter()
        .zip(a.iter().zip(b))
        .fold(BigRational::zero(), |acc, (&gi, (x, y))| acc + int(gi) * (x - y))
}

fn criterion_1() -> Outcome {
    let mut graphs = Vec::new();
    for n in 3..=6 {
        graphs.extend(all_connected_graphs(n).unwrap());
    }
    let failures: usize = graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let mut bad = 0;
            for _ in 0..50 {
                let lam = dyadic_lambda(&mut rng, g.n());
                for mode in MODES {
                    let fast = eval_dual(g, &lam, mode).unwrap().value;
                    if fast != brute_dual(g, &lam, mode).unwrap() {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum();
    let total = graphs.len() * 50 * MODES.len();
    outcome(
        failures == 0,
        format!("{} graphs, {total} evaluations, {failures} mismatches", graphs.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut super_bad = 0;
    let mut concave_bad = 0;
    let mut walk_bad = 0;
    for _ in 0..1000 {
        let g = random_graph(&mut rng, 8);
        let mode = MODES[rng.random_range(0..3)];
        let lam = random_lambda(&mut rng, g.n());
        let mu = random_lambda(&mut rng, g.n());
        let a = eval_dual(&g, &lam, mode).unwrap();
        let b = eval_dual(&g, &mu, mode).unwrap();
        if b.value > &a.value + dot(&a.supergradient, mu.values(), lam.values()) {
            super_bad += 1;
        }
        // the reported walk attains the reported value
        let attained = BigRational::from_integer(BigInt::from(a.walk.penalty(&g))) + lam.sum()
            - a.walk
                .vertices()
                .iter()
                .fold(BigRational::zero(), |acc, &v| acc + &lam.values()[v]);
        if attained != a.value {
            walk_bad += 1;
        }
        let t = BigRational::new(rng.random_range(0i64..=10).into(), 10.into());
        let one_t = BigRational::one() - &t;
        let mix = LambdaVector::new(
            lam.values()
                .iter()
                .zip(mu.values())
                .map(|(x, y)| &t * x + &one_t * y)
                .collect(),
        );
        let m = eval_dual(&g, &mix, mode).unwrap().value;
        if m < &t * &a.value + &one_t * &b.value {
            concave_bad += 1;
        }
    }
    outcome(
        super_bad + concave_bad + walk_bad == 0,
        format!("1000 triples: {super_bad} supergradient, {concave_bad} concavity, {walk_bad} walk-value violations"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    for _ in 0..1000 {
        let g = random_graph(&mut rng, 8);
        let mode = MODES[rng.random_range(0..3)];
        let a = random_lambda(&mut rng, g.n());
        let b = random_lambda(&mut rng, g.n());
        let d = eval_dual(&g, &a, mode).unwrap().value - eval_dual(&g, &b, mode).unwrap().value;
        let dist2 = a
            .values()
            .iter()
            .zip(b.values())
            .fold(BigRational::zero(), |acc, (x, y)| acc + (x - y) * (x - y));
        let n = g.n() as i64;
        if &d * &d > int(n * (n + 1) * (n + 1)) * dist2 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 pairs, {bad} violations"))
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            let pivot = a[c].clone();
            for (x, y) in a[r].iter_mut().zip(&pivot).skip(c) {
                *x -= &f * y;
            }
        }
    }
    det
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut det_bad = 0;
    let mut det_checked = 0;
    for n in 2..=10usize {
        for _ in 0..3 {
            // random positive definite H = AAᵀ + I, normalised so <Hg, g> = 1
            let a: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-3..=3)).collect())
                .collect();
            let mut h: Vec<Vec<BigRational>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| int((0..n).map(|k| a[i][k] * a[j][k]).sum::<i64>() + i64::from(i == j)))
                        .collect()
                })
                .collect();
            let mut g: Vec<i64> = (0..n).map(|_| rng.random_range(-2..=2)).collect();
            if g.iter().all(|&x| x == 0) {
                g[0] = 1;
            }
            let gr: Vec<BigRational> = g.iter().map(|&x| int(x)).collect();
            let q = (0..n).fold(BigRational::zero(), |acc, i| {
                acc + (0..n).fold(BigRational::zero(), |s, j| s + &h[i][j] * &gr[j]) * &gr[i]
            });
            for row in h.iter_mut() {
                for x in row.iter_mut() {
                    *x = &*x / &q;
                }
            }
            let before = determinant(h.clone());
            let mut e = ExactEllipsoid {
                center: vec![BigRational::zero(); n],
                shape: h,
            };
            if !e.step(&gr).unwrap() {
                det_bad += 1;
                continue;
            }
            let after = determinant(e.shape.clone());
            let nn = int(n as i64);
            let c = &nn * &nn / (&nn * &nn - int(1));
            let mut expected = (&nn - int(1)) / (&nn + int(1));
            for _ in 0..n {
                expected *= &c;
            }
            det_checked += 1;
            if after / before != expected {
                det_bad += 1;
            }
        }
    }

    // cut validity: every point of S the cut must keep is kept, and each
    // step moves the centre strictly into the kept half-space
    let mut cut_bad = 0usize;
    let mut move_bad = 0usize;
    let mut samples = 0usize;
    for run in 0..100u64 {
        let n = 4 + (run % 3) as usize;
        let g = gnp(n, ["1/3", "1/2", "2/3"][(run % 3) as usize], run);
        let cfg = SolverConfig {
            max_iters: Some(30),
            early_exit: false,
            start_mode: MODES[(run % 3) as usize],
            precision_bits: Some(96),
            ..SolverConfig::default()
        };
        let c = instance_constants(&g, Mode::Practical, Some(96)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(400 + run);
        let corners: Vec<Vec<BigRational>> = std::iter::once(vec![BigRational::zero(); n])
            .chain((0..n).map(|v| {
                (0..n)
                    .map(|u| if u == v { c.m.clone() } else { BigRational::zero() })
                    .collect()
            }))
            .collect();
        let mut previous: Option<(Vec<i64>, Vec<BigRational>)> = None;
        run_solver_observed(&g, &cfg, |ev| {
            let lam: Vec<BigRational> = ev.lambda.iter().map(|x| x.to_rational()).collect();
            if let Some((g_prev, lam_prev)) = previous.take() {
                if !dot(&g_prev, &lam, &lam_prev).is_positive() {
                    move_bad += 1;
                }
            }
            let Some(cut) = ev.cut else { return };
            let random = (0..100).map(|_| {
                // a point of S: nonnegative, coordinate sum at most M
                let w: Vec<i64> = (0..n).map(|_| rng.random_range(0..=16)).collect();
                let total = w.iter().sum::<i64>().max(16);
                w.iter().map(|&x| &c.m * int(x) / int(total)).collect::<Vec<_>>()
            });
            let points: Vec<Vec<BigRational>> = corners.iter().cloned().chain(random).collect();
            for mu in points {
                let must_keep = match cut.kind {
                    CutKind::Negativity | CutKind::Budget => true,
                    CutKind::Gradient => {
                        let v = eval_dual(&g, &LambdaVector::new(mu.clone()), cfg.start_mode)
                            .unwrap()
                            .value;
                        v >= ev.dual.unwrap().value
                    }
                };
                samples += 1;
                if must_keep && dot(&cut.g, &mu, &lam).is_negative() {
                    cut_bad += 1;
                }
            }
            previous = Some((cut.g.clone(), lam));
        })
        .unwrap();
    }
    outcome(
        det_bad == 0 && cut_bad == 0 && move_bad == 0,
        format!(
            "determinant ratio {}/{} exact for n=2..10; cut validity: {samples} points of S over 100 runs, \
             {cut_bad} on the wrong side, {move_bad} steps not into the kept half-space",
            det_checked - det_bad,
            det_checked
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut graphs: Vec<Graph> = vec![
        generate(&GeneratorSpec::Petersen).unwrap().graph,
        Graph::empty(10),
        generate(&GeneratorSpec::Cycle { n: 10 }).unwrap().graph,
        generate(&GeneratorSpec::Complete { n: 10 }).unwrap().graph,
        generate(&GeneratorSpec::Path { n: 10 }).unwrap().graph,
    ];
    for seed in 0..30 {
        graphs.push(gnp(3 + (seed as usize % 10), "1/2", seed));
    }
    let mut bad = Vec::new();
    let mut n_checked = 0;
    let mut inconclusive = 0;
    let mut max_n10 = 0;
    for g in &graphs {
        let n = g.n();
        let c = instance_constants(g, Mode::Practical, None).unwrap();
        let ni = n as i64;
        let m = int(4 * ni * ni - 4 * g.edge_count() as i64) / int(ni);
        let fact = BigRational::from_integer(BigInt::from(factorial(n)));
        let ok = c.m == m
            && c.r_squared == &m * &m / int(ni)
            && c.l_squared == int(ni * (ni + 1) * (ni + 1))
            && c.epsilon == BigRational::one() / (int(3) * &fact)
            && c.delta == BigRational::one() / (int(3 * ni) * &fact)
            && c.tau == int(2) / (int(3) * &fact);
        if !ok {
            bad.push(format!("constants n={n} m={}", g.edge_count()));
        }
        // ln(L·R²/(r·ε)) with L = (n+1)√n, R² = M²/n, r = M/(n+√n), ε = 1/(3·n!)
        let nf = n as f64;
        let mf = (4.0 * nf * nf - 4.0 * g.edge_count() as f64) / nf;
        let ln_fact: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
        let ln_arg = (nf + 1.0).ln() + 0.5 * nf.ln() + (mf * mf / nf).ln() + (nf + nf.sqrt()).ln() - mf.ln()
            + 3f64.ln()
            + ln_fact;
        let frac = ln_arg - ln_arg.floor();
        if frac.min(1.0 - frac) < 1e-9 {
            inconclusive += 1;
        } else {
            let expected = 2 * (n as u64 + 1) * (n as u64 + 1) * ln_arg.ceil() as u64;
            n_checked += 1;
            if c.iterations != expected {
                bad.push(format!("N n={n}: {} vs {expected}", c.iterations));
            }
        }
        if n == 10 {
            max_n10 = max_n10.max(c.iterations);
            if c.iterations > 16214 {
                bad.push(format!("N={} > 16214 at n=10", c.iterations));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} instances, N cross-checked on {n_checked} ({inconclusive} too close to call), max N at n=10 is {max_n10} <= 16214{}",
            graphs.len(),
            if bad.is_empty() { String::new() } else { format!("; mismatches: {bad:?}") }
        ),
    )
}

fn hamiltonian_runs() -> Vec<(InstanceRun, Duration)> {
    let mut specs = Vec::new();
    for n in 4..=8 {
        specs.push(GeneratorSpec::Cycle { n });
        specs.push(GeneratorSpec::Complete { n });
    }
    for seed in 0..20u64 {
        specs.push(GeneratorSpec::PlantedHamiltonian {
            n: 4 + (seed as usize % 5),
            p: "3/10".parse().unwrap(),
            seed,
        });
    }
    specs
        .iter()
        .map(|s| {
            let g = generate(s).unwrap().graph;
            let t = Instant::now();
            let run = run_instance(&s.name(), &g, &SolverConfig::default()).unwrap();
            (run, t.elapsed())
        })
        .collect()
}

fn criterion_6(runs: &[(InstanceRun, Duration)]) -> Outcome {
    let mut failed = Vec::new();
    let mut slowest = Duration::ZERO;
    for (run, dt) in runs {
        let r = &run.report;
        slowest = slowest.max(*dt);
        let cert_ok = r.result.certificate.as_ref().is_some_and(|c| {
            let g = graph_for(&r.instance.name);
            verify_certificate(&g, c)
        });
        if r.result.decision != Verdict::Hamiltonian
            || !cert_ok
            || r.concordance != Concordance::Agree
            || *dt > Duration::from_secs(60)
        {
            failed.push(r.instance.name.clone());
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "{} instances, {} certified and agreeing, slowest {:.2?}{}",
            runs.len(),
            runs.len() - failed.len(),
            slowest,
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {failed:?}")
            }
        ),
    )
}

fn graph_for(name: &str) -> Graph {
    let spec = if let Some(n) = name.strip_prefix("cycle") {
        GeneratorSpec::Cycle { n: n.parse().unwrap() }
    } else if let Some(n) = name.strip_prefix("complete") {
        GeneratorSpec::Complete { n: n.parse().unwrap() }
    } else {
        let seed: u64 = name.rsplit("_s").next().unwrap().parse().unwrap();
        GeneratorSpec::PlantedHamiltonian {
            n: 4 + (seed as usize % 5),
            p: "3/10".parse().unwrap(),
            seed,
        }
    };
    let g = generate(&spec).unwrap().graph;
    assert_eq!(spec.name(), name);
    g
}

fn criterion_7() -> Outcome {
    let mut total = 0;
    let mut failed = 0;
    for n in 3..=6 {
        for g in all_connected_graphs(n).unwrap() {
            if (0..n).all(|v| g.degree(v) != 1) {
                continue;
            }
            let v0 = eval_dual(&g, &LambdaVector::zeros(n), StartMode::PaperFixed)
                .unwrap()
                .value;
            if v0 < BigRational::one() {
                continue;
            }
            total += 1;
            let r = run_instance(&format!("leaf{n}_{total}"), &g, &SolverConfig::default()).unwrap();
            if r.report.result.decision != Verdict::NonHamiltonian || r.report.concordance != Concordance::Agree {
                failed += 1;
            }
        }
    }
    outcome(
        total > 0 && failed == 0,
        format!("{total} leaf graphs with dual value >= 1 at the origin, {failed} not rejected"),
    )
}

fn criterion_8(ham: &[(InstanceRun, Duration)], corpus: &CorpusRun, instances: &[Instance]) -> Outcome {
    // early exit stops Hamiltonian runs at the first certificate, so every
    // Hamiltonian instance is also run for a while without it
    let long = SolverConfig {
        early_exit: false,
        max_iters: Some(200),
        ..SolverConfig::default()
    };
    let mut graphs: Vec<(String, Graph)> = ham
        .iter()
        .map(|(r, _)| (r.report.instance.name.clone(), graph_for(&r.report.instance.name)))
        .collect();
    graphs.extend(
        corpus
            .runs
            .iter()
            .zip(instances)
            .filter(|(r, _)| r.report.oracle.is_hamiltonian == Some(true))
            .map(|(_, i)| (i.name.clone(), i.graph.clone())),
    );
    let extra: Vec<InstanceRun> = graphs
        .par_iter()
        .map(|(name, g)| run_instance(name, g, &long).unwrap())
        .collect();
    let mut runs = 0;
    let mut iterates = 0;
    let mut bad = 0;
    let all = ham.iter().map(|(r, _)| r).chain(&corpus.runs).chain(&extra);
    for run in all.filter(|r| r.report.oracle.is_hamiltonian == Some(true)) {
        runs += 1;
        for row in &run.trace {
            if let Some(v) = &row.dual_value {
                iterates += 1;
                if v.is_positive() {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!("{runs} Hamiltonian runs, {iterates} feasible iterates, {bad} with positive dual value"),
    )
}

fn manifest_json() -> String {
    let mut entries = vec![
        r#"{"generator": {"kind": "petersen"}}"#.to_string(),
        r#"{"generator": {"kind": "complete_bipartite", "a": 3, "b": 4}}"#.to_string(),
        r#"{"enumerate": {"n": 6, "filter": "connected_non_hamiltonian"}}"#.to_string(),
    ];
    for i in 0..50u64 {
        let n = 5 + i % 6;
        let p = ["1/3", "1/2", "2/3"][(i % 3) as usize];
        entries.push(format!(
            r#"{{"generator": {{"kind": "gnp", "n": {n}, "p": "{p}", "seed": {i}}}}}"#
        ));
    }
    format!("[\n  {}\n]\n", entries.join(",\n  "))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn criterion_9(corpus: &CorpusRun, out: &Path) -> Outcome {
    let schema: serde_json::Value = serde_json::from_str(RUN_REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut problems = Vec::new();
    let files = read_dir_bytes(out);
    for run in &corpus.runs {
        let r = &run.report;
        let name = &r.instance.name;
        let Some(json) = files.get(&format!("{name}.report.json")) else {
            problems.push(format!("{name}: missing report"));
            continue;
        };
        let value: serde_json::Value = serde_json::from_slice(json).unwrap();
        if !validator.is_valid(&value) {
            problems.push(format!("{name}: schema"));
        }
        let parsed: RunReport = serde_json::from_value(value).unwrap();
        if parsed != *r {
            problems.push(format!("{name}: round trip"));
        }
        let expected = match r.oracle.is_hamiltonian {
            None => Concordance::OracleUnresolved,
            Some(h) if h == (r.result.decision == Verdict::Hamiltonian) => Concordance::Agree,
            Some(_) => Concordance::Disagree,
        };
        if expected != r.concordance {
            problems.push(format!("{name}: concordance"));
        }
        let monotone = run
            .trace
            .windows(2)
            .all(|w| match (&w[0].best_value, &w[1].best_value) {
                (Some(a), Some(b)) => a <= b,
                (Some(_), None) => false,
                _ => true,
            });
        if !monotone {
            problems.push(format!("{name}: best value decreased"));
        }
        let rows = files
            .get(&format!("{name}.trace.csv"))
            .map(|t| t.iter().filter(|&&b| b == b'\n').count() - 1);
        if rows != Some(r.result.iterations_run as usize) {
            problems.push(format!("{name}: trace rows"));
        }
    }
    let s = &corpus.summary;
    let disagree = corpus
        .runs
        .iter()
        .filter(|r| r.report.concordance == Concordance::Disagree)
        .count();
    if s.concordance.disagree != disagree || s.instances != corpus.runs.len() || !files.contains_key("summary.json") {
        problems.push("summary".into());
    }
    let nh = &s.non_hamiltonian_best_dual;
    outcome(
        problems.is_empty() && corpus.runs.len() >= 52 + 50,
        format!(
            "{} instances; agree {} / disagree {} / unresolved {}; non-Hamiltonian: {} of {} reach 1/n!, {} reach tau{}",
            s.instances,
            s.concordance.agree,
            s.concordance.disagree,
            s.concordance.oracle_unresolved,
            nh.at_least_inverse_factorial,
            nh.instances,
            nh.at_least_tau,
            if problems.is_empty() { String::new() } else { format!("; problems: {problems:?}") }
        ),
    )
}

fn criterion_10(manifest: &Path, first: &CorpusRun, first_out: &Path, second_out: &Path) -> Outcome {
    // replay with the configuration read back from a report, on one thread
    let cfg = SolverConfig::from(&first.runs[0].report.config);
    let instances = load_manifest(manifest).unwrap();
    let again = run_corpus(&instances, &cfg, 1).unwrap();
    write_corpus(second_out, &again, true).unwrap();
    let a = read_dir_bytes(first_out);
    let b = read_dir_bytes(second_out);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    outcome(
        a.len() == b.len() && differing.is_empty(),
        format!("{} files compared byte for byte, {} differ", a.len(), differing.len()),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut record = |id: u32, title: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let dt = t.elapsed();
        println!(
            "criterion {id:>2} {}: {title} ({:.1?}) -- {}",
            if o.ok { "PASS" } else { "FAIL" },
            dt,
            o.detail
        );
        results.push((id, title, o, dt));
    };

    record(1, "dual oracle equals brute force", &mut criterion_1);
    record(2, "supergradient and concavity", &mut criterion_2);
    record(3, "Lipschitz bound", &mut criterion_3);
    record(4, "ellipsoid geometry", &mut criterion_4);
    record(5, "instance constants", &mut criterion_5);
    let ham = hamiltonian_runs();
    record(6, "Hamiltonian soundness", &mut || criterion_6(&ham));
    record(7, "leaf-vertex rejection", &mut criterion_7);

    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(&manifest, manifest_json()).unwrap();
    let first_out = dir.path().join("run1");
    let second_out = dir.path().join("run2");
    let instances = load_manifest(&manifest).unwrap();
    let corpus = run_corpus(&instances, &SolverConfig::default(), 0).unwrap();
    write_corpus(&first_out, &corpus, true).unwrap();

    record(8, "weak duality", &mut || criterion_8(&ham, &corpus, &instances));
    record(9, "concordance corpus", &mut || criterion_9(&corpus, &first_out));
    record(10, "determinism", &mut || {
        criterion_10(&manifest, &corpus, &first_out, &second_out)
    });

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.ok).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
