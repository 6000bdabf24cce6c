// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS, FAIL or SKIP line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Arguments that are plain numbers select criteria, e.g. `-- 3 5`.
//! `AMSPLACE_FULL_BUDGET=1` runs criterion 6 with 60 s per run instead of a
//! fixed generation budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use amsplace::decoder::Decoder;
use amsplace::io::{parse_gsrc, parse_instance, GsrcOptions};
use amsplace::model::{bounding_box, Instance as ModelInstance};
use amsplace::refine::{refine_pipeline, Budgets, Stage};
use amsplace::search::{run_cmaes, run_ga, CmaConfig, GaConfig, SearchResult};
use amsplace::syngen::{compose_copies, generate, GenParams};
use amsplace::{check_feasible, evaluate, Chromosome, CostWeights, Instance, Placement, Point, Rect, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::{Fail, Pass, Skip};

type Check = fn() -> Verdict;

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn random_chromosome(rng: &mut ChaCha8Rng, len: usize) -> Chromosome<f64> {
    Chromosome::new((0..len).map(|_| rng.gen::<f64>()).collect()).expect("genes in range")
}

fn gen_instance(n: usize, blockages: usize, symmetry: bool, seed: u64) -> Instance {
    generate(&GenParams {
        n_rects: n,
        n_nets_range: (n / 2, n),
        n_blockages: blockages,
        multi_variant_fraction: 0.5,
        with_symmetry: symmetry,
        allow_negative_distances: true,
        rng_seed: seed,
    })
    .expect("valid generator parameters")
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

// 1. Every random chromosome decodes to a feasible placement.
fn feasibility_fuzz() -> Verdict {
    let mut decodes = 0usize;
    let mut bad = Vec::new();
    for k in 0..50u64 {
        let n = [20, 50, 100][k as usize % 3];
        let inst = gen_instance(n, k as usize % 3, k % 2 == 0, 1000 + k);
        let dec = Decoder::new(&inst).expect("decoder");
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        for _ in 0..1000 {
            let c = random_chromosome(&mut rng, dec.genome_len());
            decodes += 1;
            match dec.decode(&c) {
                Ok(d) => match check_feasible(&inst, &d.placement) {
                    Ok(None) => {}
                    Ok(Some(v)) => bad.push(format!("instance {k}: {v}")),
                    Err(e) => bad.push(format!("instance {k}: {e}")),
                },
                Err(e) => bad.push(format!("instance {k}: {e}")),
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{decodes} decodes, {} infeasible{}",
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn same_search(a: &SearchResult<f64>, b: &SearchResult<f64>) -> bool {
    a.best == b.best && a.decoded == b.decoded && a.history == b.history && a.evaluations == b.evaluations
}

// 2. Bit-identical results for identical inputs.
fn determinism() -> Verdict {
    let mut checks = Vec::new();
    for k in 0..4u64 {
        let inst = gen_instance(30, k as usize % 3, k % 2 == 1, 50 + k);
        let dec = Decoder::new(&inst).expect("decoder");
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        for _ in 0..20 {
            let c = random_chromosome(&mut rng, dec.genome_len());
            checks.push(("decode", dec.decode(&c).ok() == dec.decode(&c).ok()));
        }
        let ga =
            GaConfig { pop_size: 30, max_generations: 8, max_segments: Some(2), rng_seed: k, ..GaConfig::default() };
        let (a, b) = (run_ga(&inst, &ga).expect("ga"), run_ga(&inst, &ga).expect("ga"));
        checks.push(("ga", same_search(&a, &b)));
        let cma = CmaConfig {
            max_iterations: Some(12),
            warmstart_generations: 3,
            warmstart: GaConfig { pop_size: 20, ..GaConfig::default() },
            rng_seed: k,
            ..CmaConfig::default()
        };
        checks.push((
            "cmaes",
            same_search(&run_cmaes(&inst, &cma).expect("cmaes"), &run_cmaes(&inst, &cma).expect("cmaes")),
        ));
        let budgets = Budgets { lp_rounds: 3, ..Budgets::default() };
        let (r1, r2) = (
            refine_pipeline(&a.best, &inst, &budgets).expect("refine"),
            refine_pipeline(&a.best, &inst, &budgets).expect("refine"),
        );
        checks.push(("refine", r1.placement == r2.placement && r1.report == r2.report && r1.stages == r2.stages));
    }

    // Two separate processes.
    let dir = tempfile::tempdir().expect("tempdir");
    let inst_path = dir.path().join("i.json");
    std::fs::write(&inst_path, amsplace::io::write_instance(&gen_instance(25, 1, true, 77))).expect("write");
    let mut docs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("p{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_amsplace"))
            .args(["solve", "--instance"])
            .arg(&inst_path)
            .args(["--algo", "ga", "--generations", "5", "--pop-size", "20", "--seed", "3", "--c-conn", "1", "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        if !status.status.success() {
            return Fail(format!("solve failed: {}", String::from_utf8_lossy(&status.stderr).trim()));
        }
        let mut doc =
            amsplace::io::parse_placement::<f64>(&std::fs::read_to_string(&out).expect("read")).expect("parse");
        if let Some(s) = doc.solver.as_mut() {
            s.wall_time_s = 0.0;
        }
        docs.push(doc);
    }
    checks.push(("process", docs[0] == docs[1]));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(failed.is_empty(), format!("{} comparisons, mismatches: {:?}", checks.len(), failed))
}

/// Minimum W + H over all left/right/below/above assignments, compacted by longest path.
fn oracle(dims: &[(i64, i64)]) -> i64 {
    let n = dims.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut best = i64::MAX;
    for code in 0..4usize.pow(pairs.len() as u32) {
        // Edges (from, to, horizontal): `to` starts after `from` ends.
        let mut edges = Vec::new();
        let mut c = code;
        for &(i, j) in &pairs {
            edges.push(match c % 4 {
                0 => (i, j, true),
                1 => (j, i, true),
                2 => (i, j, false),
                _ => (j, i, false),
            });
            c /= 4;
        }
        let mut x = vec![0i64; n];
        let mut y = vec![0i64; n];
        let mut cyclic = false;
        for round in 0..=n {
            let mut changed = false;
            for &(a, b, horizontal) in &edges {
                let (pos, len) = if horizontal { (&mut x, dims[a].0) } else { (&mut y, dims[a].1) };
                if pos[b] < pos[a] + len {
                    pos[b] = pos[a] + len;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            if round == n {
                cyclic = true;
            }
        }
        if cyclic {
            continue;
        }
        let w = (0..n).map(|i| x[i] + dims[i].0).max().unwrap_or(0);
        let h = (0..n).map(|i| y[i] + dims[i].1).max().unwrap_or(0);
        best = best.min(w + h);
    }
    best
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

// 3. Exhaustive decoding reaches the brute-force optimum.
fn oracle_equivalence() -> Verdict {
    let mut mismatches = Vec::new();
    for k in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + k);
        let n = 1 + (k as usize % 3);
        let dims: Vec<(i64, i64)> = (0..n).map(|_| (rng.gen_range(1..=9), rng.gen_range(1..=9))).collect();
        let inst: Instance = ModelInstance::new(
            dims.iter().enumerate().map(|(i, &(w, h))| Rect::new(format!("r{i}"), vec![Variant::new(w, h)])).collect(),
        )
        .with_weights(CostWeights::new(1.0, 0.0));
        let dec = Decoder::new(&inst).expect("decoder");
        let mut best = f64::INFINITY;
        for perm in permutations(n) {
            for dirs in 0..(1usize << n) {
                let mut genes = vec![0.5; 3 * n];
                for (rank, &i) in perm.iter().enumerate() {
                    genes[i] = (rank as f64 + 0.5) / n as f64;
                    genes[2 * n + i] = if dirs >> i & 1 == 1 { 0.75 } else { 0.25 };
                }
                let d = dec.decode(&Chromosome::new(genes).expect("genes")).expect("decode");
                best = best.min(d.report.total);
            }
        }
        let want = oracle(&dims);
        if best != want as f64 {
            mismatches.push(format!("{dims:?}: decoder {best}, oracle {want}"));
        }
    }
    verdict(mismatches.is_empty(), format!("20 instances, {} mismatches {:?}", mismatches.len(), mismatches))
}

// 4. Histories and refinement stages never get worse.
fn monotonicity() -> Verdict {
    let mut problems = Vec::new();
    for k in 0..3u64 {
        let mut inst = gen_instance(25, k as usize % 3, true, 400 + k);
        inst.weights.c_conn = 2.0;
        let cfg =
            GaConfig { pop_size: 40, max_generations: 10, max_segments: Some(3), rng_seed: k, ..GaConfig::default() };
        let res = run_ga(&inst, &cfg).expect("ga");
        for w in res.history.windows(2) {
            if w[1].segment == w[0].segment && w[1].current > w[0].current {
                problems.push(format!("instance {k}: segment best rose at generation {}", w[1].generation));
            }
            if w[1].best > w[0].best {
                problems.push(format!("instance {k}: running best rose"));
            }
        }
        let refined = refine_pipeline(&res.best, &inst, &Budgets::default()).expect("refine");
        for s in &refined.stages {
            let slack = if s.stage == Stage::Lp { 1e-9 * s.before.abs() } else { 0.0 };
            if s.after > s.before + slack {
                problems.push(format!("instance {k}: stage {} {} -> {}", s.stage.name(), s.before, s.after));
            }
        }
        match check_feasible(&inst, &refined.placement) {
            Ok(None) => {}
            other => problems.push(format!("instance {k}: refined placement {other:?}")),
        }
        if evaluate(&refined.placement, &inst) != refined.report {
            problems.push(format!("instance {k}: refined report is stale"));
        }
    }
    verdict(
        problems.is_empty(),
        if problems.is_empty() { "3 instances x 3 segments, all stages".into() } else { problems.join("; ") },
    )
}

// 5. The aspect penalty multiplies the total by 2.5.
fn aspect_penalty() -> Verdict {
    let mut inst: Instance =
        ModelInstance::new(vec![Rect::new("a", vec![Variant::new(10, 2)])]).with_weights(CostWeights::new(1.0, 0.0));
    let p = Placement { coords: vec![Point::new(0, 0)], variants: vec![0], axes: vec![] };
    let free = evaluate(&p, &inst);
    inst.aspect_lo = 0.5;
    inst.aspect_hi = 1.0;
    let bounded = evaluate(&p, &inst);
    let decoded =
        Decoder::new(&inst).expect("decoder").decode(&Chromosome::new(vec![0.5; 3]).expect("genes")).expect("decode");
    let ok = bounded.penalty_applied
        && !free.penalty_applied
        && bounded.total == 2.5 * free.total
        && decoded.report == bounded;
    verdict(ok, format!("unpenalized {}, bounded {}", free.total, bounded.total))
}

// 6. Priority modulation does not hurt on composed instances.
fn modulation_benefit() -> Verdict {
    let full = std::env::var("AMSPLACE_FULL_BUDGET").is_ok_and(|v| v == "1");
    let (pop, generations) = (30, 12);
    let mut lines = Vec::new();
    let mut ok = true;
    for k in 0..5u64 {
        let base = generate::<f64>(&GenParams {
            n_rects: 25,
            n_nets_range: (10, 20),
            n_blockages: 0,
            multi_variant_fraction: 0.5,
            with_symmetry: false,
            allow_negative_distances: true,
            rng_seed: 600 + k,
        })
        .expect("instance");
        let inst = compose_copies(&base, 4).expect("compose").with_weights(CostWeights::new(1.0, 8.0));
        let mut medians = [0.0; 2];
        for (slot, modulation) in [true, false].into_iter().enumerate() {
            let mut totals: Vec<f64> = (0..10u64)
                .map(|seed| {
                    let cfg = if full {
                        GaConfig {
                            time_limit: Some(Duration::from_secs(60)),
                            modulation,
                            rng_seed: seed,
                            ..GaConfig::default()
                        }
                    } else {
                        GaConfig {
                            pop_size: pop,
                            max_generations: generations,
                            max_segments: Some(1),
                            modulation,
                            rng_seed: seed,
                            ..GaConfig::default()
                        }
                    };
                    run_ga(&inst, &cfg).expect("ga").decoded.report.total
                })
                .collect();
            medians[slot] = median(&mut totals);
        }
        ok &= medians[0] <= medians[1];
        lines.push(format!("{:.1}/{:.1}", medians[0], medians[1]));
    }
    let budget =
        if full { "60 s per run".to_owned() } else { format!("pop {pop} x {generations} generations per run") };
    verdict(ok, format!("median with/without modulation: {} ({budget})", lines.join(", ")))
}

fn area(inst: &Instance, p: &Placement) -> i64 {
    let (w, h) = bounding_box(p, inst);
    w * h
}

// 7. apte area, from an externally converted instance file.
fn mcnc_apte() -> Verdict {
    let Ok(path) = std::env::var("AMSPLACE_APTE") else {
        return Skip("AMSPLACE_APTE not set".into());
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return Fail(format!("{path}: {e}")),
    };
    let mut inst: Instance = match parse_instance(&text) {
        Ok(i) => i,
        Err(e) => return Fail(format!("{path}: {e}")),
    };
    inst.weights = CostWeights::new(1.0, 0.0);
    let cfg = CmaConfig { time_limit: Some(Duration::from_secs(120)), ..CmaConfig::default() };
    let res = run_cmaes(&inst, &cfg).expect("cmaes");
    let refined = refine_pipeline(&res.best, &inst, &Budgets::default()).expect("refine");
    // Coordinates in micrometres; 49.3 mm^2.
    let a = area(&inst, &refined.placement);
    verdict(a as f64 <= 49.3e6, format!("{} rects, area {:.3} mm^2", inst.len(), a as f64 / 1e6))
}

// 8. GSRC n100.
fn gsrc_n100() -> Verdict {
    let Ok(dir) = std::env::var("AMSPLACE_GSRC_DIR") else {
        return Skip("AMSPLACE_GSRC_DIR not set".into());
    };
    let dir = Path::new(&dir);
    let read = |name: &str| std::fs::read_to_string(dir.join(name));
    let (Ok(blocks), Ok(nets)) = (read("n100.blocks"), read("n100.nets")) else {
        return Fail(format!("n100.blocks / n100.nets missing in {}", dir.display()));
    };
    let (mut inst, stats) = match parse_gsrc::<f64>(&blocks, &nets, GsrcOptions::default()) {
        Ok(v) => v,
        Err(e) => return Fail(e.to_string()),
    };
    if inst.len() != 100 || stats.parsed_nets != stats.declared_nets {
        return Fail(format!("{} rects, {} of {} nets", inst.len(), stats.parsed_nets, stats.declared_nets));
    }
    inst.weights = CostWeights::new(1.0, 2.0);
    let cfg = GaConfig { pop_size: 500, time_limit: Some(Duration::from_secs(180)), ..GaConfig::default() };
    let res = run_ga(&inst, &cfg).expect("ga");
    let feasible = matches!(check_feasible(&inst, &res.decoded.placement), Ok(None));
    let a = area(&inst, &res.decoded.placement);
    verdict(
        feasible && a <= 250_000,
        format!("100 rects, {} nets, area {:.4} mm^2", stats.declared_nets, a as f64 / 1e6),
    )
}

// 9. Decode time at n = 200 and growth of candidate evaluations.
fn performance() -> Verdict {
    let mut times = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in [25usize, 50, 100, 200] {
        let mut counts = Vec::new();
        for k in 0..3u64 {
            let inst = gen_instance(n, k as usize % 3, k % 2 == 0, 900 + k);
            let dec = Decoder::new(&inst).expect("decoder");
            let mut rng = ChaCha8Rng::seed_from_u64(k);
            for _ in 0..10 {
                let c = random_chromosome(&mut rng, dec.genome_len());
                let t = Instant::now();
                let d = dec.decode(&c).expect("decode");
                if n == 200 {
                    times.push(t.elapsed().as_secs_f64() * 1e3);
                }
                counts.push(d.stats.candidates as f64);
            }
        }
        xs.push((n as f64).ln());
        ys.push((counts.iter().sum::<f64>() / counts.len() as f64).ln());
    }
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let med = median(&mut times);
    verdict(med <= 50.0 && slope <= 3.3, format!("median decode {med:.1} ms at n=200, candidate exponent {slope:.2}"))
}

fn csv_fields(line: &str) -> Vec<&str> {
    line.split(',').collect()
}

// 10. aRD in the bench report equals a hand computation over its own rows.
fn ard_report() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let set = dir.path().join("set");
    std::fs::create_dir(&set).expect("mkdir");
    let exe = env!("CARGO_BIN_EXE_amsplace");
    for k in 0..10 {
        let out = set.join(format!("g{k:02}.json"));
        let st = Command::new(exe)
            .args(["gen", "--n", "12", "--nets", "4:8", "--negative-distances", "--seed", &k.to_string(), "--out"])
            .arg(&out)
            .output()
            .expect("gen runs");
        if !st.status.success() {
            return Fail(String::from_utf8_lossy(&st.stderr).trim().to_owned());
        }
    }
    let csv = dir.path().join("report.csv");
    let st = Command::new(exe)
        .args(["bench", "--dir"])
        .arg(&set)
        .args([
            "--algo",
            "ga,cmaes",
            "--generations",
            "4",
            "--pop-size",
            "16",
            "--repeats",
            "2",
            "--no-refine",
            "--out",
        ])
        .arg(&csv)
        .output()
        .expect("bench runs");
    if !st.status.success() {
        return Fail(String::from_utf8_lossy(&st.stderr).trim().to_owned());
    }
    let text = std::fs::read_to_string(&csv).expect("report");
    let mut lines = text.lines();
    let header = csv_fields(lines.next().unwrap_or_default());
    let col = |name: &str| header.iter().position(|h| *h == name).expect("column");
    let (ci, ca, cm, cr, cb) =
        (col("instance"), col("algorithm"), col("mean_total"), col("rel_diff_pct"), col("is_best"));
    let rows: Vec<Vec<&str>> = lines.map(csv_fields).collect();

    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for algo in ["cmaes", "ga"] {
        let mut rd_sum = 0.0;
        let mut hits = 0usize;
        let mut count = 0usize;
        for k in 0..10 {
            let name = format!("g{k:02}");
            let cells: Vec<&Vec<&str>> = rows.iter().filter(|r| r[ci] == name).collect();
            let best = cells.iter().map(|r| r[cm].parse::<f64>().expect("mean")).fold(f64::INFINITY, f64::min);
            let Some(mine) = cells.iter().find(|r| r[ca] == algo) else {
                problems.push(format!("{name}/{algo} missing"));
                continue;
            };
            let mean: f64 = mine[cm].parse().expect("mean");
            let rd = (mean - best) / best * 100.0;
            rd_sum += rd;
            hits += usize::from(mean == best);
            count += 1;
        }
        let ard = rd_sum / count as f64;
        let Some(row) = rows.iter().find(|r| r[ci] == "ALL" && r[ca] == algo) else {
            problems.push(format!("summary for {algo} missing"));
            continue;
        };
        let reported: f64 = row[cr].parse().expect("aRD");
        let reported_hits: usize = row[cb].parse().expect("hits");
        if reported != ard || reported_hits != hits {
            problems.push(format!("{algo}: reported {reported} / {reported_hits}, hand {ard} / {hits}"));
        }
        summary.push(format!("{algo} aRD {ard:.4} % best {hits}"));
    }
    verdict(problems.is_empty(), if problems.is_empty() { summary.join(", ") } else { problems.join("; ") })
}

fn main() {
    let criteria: [(u32, &str, Check); 10] = [
        (1, "feasibility fuzz", feasibility_fuzz),
        (2, "determinism", determinism),
        (3, "oracle equivalence", oracle_equivalence),
        (4, "monotonicity", monotonicity),
        (5, "aspect penalty", aspect_penalty),
        (6, "priority modulation", modulation_benefit),
        (7, "MCNC apte", mcnc_apte),
        (8, "GSRC n100", gsrc_n100),
        (9, "performance envelope", performance),
        (10, "aRD reporting", ard_report),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| e.downcast_ref::<String>().cloned());
            Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match v {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {id:>2} {tag} {name}: {detail} [{secs:.1} s]");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
