mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{random_graph, reference_forward, rng, Coin};
use mwis_core::chils::{
    run_chils, ChilsConfig, Deterministic, DEFAULT_CHILS_ITERS, DEFAULT_LS_ITERS, DEFAULT_P,
    DEFAULT_PERTURB_THRESHOLD, DEFAULT_PHASE_TIME,
};
use mwis_core::exact::mask_to_set;
use mwis_core::gnn::{
    extract_features, forward, screen, Architecture, GnnModel, FEATURES, HIDDEN, THRESHOLD,
};
use mwis_core::graph::{DynamicGraph, StaticGraph, VertexId, Weight};
use mwis_core::local_search::{greedy_solution, run_baseline, LsLimit, DEFAULT_MQ};
use mwis_core::profile::{fraction_at, perf_profile, ProfileKind, RunRecord};
use mwis_core::reductions::{
    apply_rule, critical_set_value, restore_solution, ReductionLog, RuleContext, RuleId,
    RuleOutcome,
};
use mwis_core::scheduler::{run_reduce, ModelSet, ReduceConfig, ScreeningMode};
use rand::Rng;

/// Optimal weight and one optimal set, by bitmask.
fn brute(g: &StaticGraph) -> (Weight, Vec<VertexId>) {
    let n = g.n();
    assert!(n <= 24);
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let mut best = (0, 0u32);
    for mask in 0u32..1 << n {
        if (0..n).all(|v| mask >> v & 1 == 0 || adj[v] & mask == 0) {
            let w: Weight = (0..n)
                .filter(|&v| mask >> v & 1 == 1)
                .map(|v| g.weight(v))
                .sum();
            if w > best.0 {
                best = (w, mask);
            }
        }
    }
    (best.0, mask_to_set(best.1 as u64))
}

/// Solves the kernel by brute force, lifts it and compares with `alpha`.
fn check_kernel(
    original: &StaticGraph,
    g: &DynamicGraph,
    log: &ReductionLog,
    alpha: Weight,
) -> Result<(), String> {
    let (k, map) = g.to_static();
    let (kw, ks) = brute(&k);
    if kw + log.offset() != alpha {
        return Err(format!("kernel {kw} + offset {} != {alpha}", log.offset()));
    }
    let mapped: Vec<_> = ks.iter().map(|&v| map[v]).collect();
    let lifted = restore_solution(g, log, &mapped).map_err(|e| e.to_string())?;
    if !original.is_independent(&lifted) || original.set_weight(&lifted) != alpha {
        return Err(format!("lifted set {lifted:?} is not an optimum"));
    }
    Ok(())
}

const PROBS: [f64; 4] = [0.1, 0.2, 0.3, 0.5];

fn stub_models(i: usize, seed: u64) -> ModelSet {
    match i % 4 {
        0 => ModelSet::uniform(Coin { seed, p: 0.5 }),
        1 => ModelSet::uniform(GnnModel::constant(Architecture::Gcn, 2.0)),
        2 => ModelSet::uniform(GnnModel::constant(Architecture::Sage, -2.0)),
        _ => ModelSet::oracles(Default::default(), Default::default()),
    }
}

fn exactness() -> Result<String, String> {
    let mut r = rng(1001);
    let graphs = 10_000;
    for i in 0..graphs {
        let n = r.gen_range(1..=14);
        let g = random_graph(&mut r, n, PROBS[i % 4], 1, 20);
        let alpha = brute(&g).0;
        let models = stub_models(i / 4, i as u64);
        for mode in ScreeningMode::ALL {
            let cfg = ReduceConfig {
                mode,
                ..Default::default()
            };
            let red = run_reduce(DynamicGraph::from_static(&g), &cfg, &models)
                .map_err(|e| format!("graph {i}: {e}"))?;
            check_kernel(&g, &red.graph, &red.log, alpha)
                .map_err(|e| format!("graph {i} mode {mode}: {e}"))?;
        }
    }
    Ok(format!(
        "{graphs} graphs x {} modes",
        ScreeningMode::ALL.len()
    ))
}

fn per_rule() -> Result<String, String> {
    let mut r = rng(1002);
    let mut applied = [0usize; 21];
    let mut total = 0;
    for i in 0..600 {
        let n = r.gen_range(1..=12);
        let g = random_graph(&mut r, n, PROBS[i % 4], 1, 20);
        let alpha = brute(&g).0;
        let dg = DynamicGraph::from_static(&g);
        for rule in RuleId::ALL {
            let anchors = if rule.is_global() { 1 } else { n };
            for v in 0..anchors {
                let mut h = dg.clone();
                let mut log = ReductionLog::new();
                let mut ctx = RuleContext::new(Default::default(), Default::default());
                if let RuleOutcome::Applied { .. } = apply_rule(rule, &mut h, &mut log, &mut ctx, v)
                {
                    h.validate().map_err(|e| format!("{rule} at {v}: {e}"))?;
                    check_kernel(&g, &h, &log, alpha)
                        .map_err(|e| format!("graph {i} {rule} at {v}: {e}"))?;
                    applied[rule.index()] += 1;
                    total += 1;
                }
            }
        }
    }
    if let Some(rule) = RuleId::ALL.into_iter().find(|r| applied[r.index()] == 0) {
        return Err(format!("{rule} never fired"));
    }
    Ok(format!("{total} applications, every rule fired"))
}

fn critical_set() -> Result<String, String> {
    let mut r = rng(1003);
    let graphs = 2000;
    for i in 0..graphs {
        let n = r.gen_range(1..=12);
        let g = random_graph(&mut r, n, PROBS[i % 4], 1, 20);
        let mut best = 0;
        for mask in 0u64..1 << n {
            let set = mask_to_set(mask);
            if !g.is_independent(&set) {
                continue;
            }
            let nb = set.iter().fold(0u64, |m, &v| {
                g.neighbors(v).iter().fold(m, |m, &u| m | 1 << u)
            });
            best = best.max(g.set_weight(&set) - g.set_weight(&mask_to_set(nb)));
        }
        let (value, set) = critical_set_value(&g);
        if value != best || !g.is_independent(&set) {
            return Err(format!("graph {i}: flow {value}, enumeration {best}"));
        }
    }
    Ok(format!("{graphs} graphs"))
}

fn baseline_quality() -> Result<String, String> {
    let mut r = rng(1004);
    let mut hits = 0;
    for i in 0..100u64 {
        let n = r.gen_range(8..=18);
        let g = random_graph(&mut r, n, PROBS[i as usize % 4], 1, 20);
        let start = greedy_solution(&g, i);
        let sol = run_baseline(&g, start, DEFAULT_MQ, &LsLimit::iterations(100_000), i);
        if !sol.is_consistent(&g) {
            return Err(format!("graph {i}: inconsistent solution"));
        }
        if sol.weight() == brute(&g).0 {
            hits += 1;
        }
    }
    if hits >= 90 {
        Ok(format!("{hits}/100 optimal"))
    } else {
        Err(format!("{hits}/100 optimal"))
    }
}

fn chils_determinism() -> Result<String, String> {
    let mut r = rng(1005);
    for i in 0..10u64 {
        let n = r.gen_range(150..300);
        let g = random_graph(&mut r, n, 4.0 / n as f64, 1, 200);
        let mut reference = None;
        for threads in [1, 2, 4, 8] {
            let cfg = ChilsConfig {
                p: 16,
                deterministic: Some(Deterministic {
                    ls_iters: 1000,
                    chils_iters: 10,
                }),
                seed: i,
                threads,
                ..Default::default()
            };
            let res = run_chils(&g, &cfg, None).map_err(|e| e.to_string())?;
            let members = res.solution.vertices();
            match &reference {
                None => reference = Some(members),
                Some(m) if *m != members => {
                    return Err(format!("instance {i}: {threads} threads differ"));
                }
                _ => {}
            }
        }
    }
    Ok("10 instances x 1,2,4,8 threads".into())
}

fn chils_acceptances() -> Result<String, String> {
    let mut r = rng(1006);
    let mut checked = 0;
    for i in 0..5u64 {
        let n = r.gen_range(200..400);
        let g = random_graph(&mut r, n, 5.0 / n as f64, 1, 200);
        let cfg = ChilsConfig {
            p: 8,
            deterministic: Some(Deterministic {
                ls_iters: 500,
                chils_iters: 20,
            }),
            seed: i,
            ..Default::default()
        };
        let res = run_chils(&g, &cfg, None).map_err(|e| e.to_string())?;
        for a in &res.acceptances {
            if !a.independent || a.lifted_weight != a.core_weight + a.offset {
                return Err(format!("instance {i}: bad acceptance {a:?}"));
            }
            checked += 1;
        }
        if res
            .iterations
            .windows(2)
            .any(|w| w[1].best_weight < w[0].best_weight)
        {
            return Err(format!("instance {i}: best weight decreased"));
        }
        let best = res.iterations.last().map(|x| x.best_weight).unwrap_or(0);
        if !res.solution.is_consistent(&g) || res.solution.weight() != best {
            return Err(format!(
                "instance {i}: final solution does not match the best"
            ));
        }
    }
    if checked == 0 {
        return Err("no acceptance recorded".into());
    }
    Ok(format!("{checked} acceptances"))
}

fn gnn_parity() -> Result<String, String> {
    let mut r = rng(1007);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let arch = Architecture::ALL[i % 3];
        let n = r.gen_range(1..40);
        let p = r.gen_range(0.0..0.4);
        let g = random_graph(&mut r, n, p, 1, 50);
        let m = GnnModel::random(arch, FEATURES, HIDDEN, 0.3, &mut r);
        let native = forward(&m, &g, &extract_features(&g)).map_err(|e| e.to_string())?;
        for (a, b) in native.iter().zip(reference_forward(&m, &g)) {
            worst = worst.max((a - b).abs());
        }
        let zero = GnnModel::zeros(arch, FEATURES, HIDDEN);
        let out = forward(&zero, &g, &extract_features(&g)).map_err(|e| e.to_string())?;
        if out.iter().any(|&x| x != 0.5) {
            return Err(format!("zero {arch:?} model gave {out:?}"));
        }
    }
    if worst <= 1e-6 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e}"))
    }
}

fn active_originals(g: &DynamicGraph) -> Vec<VertexId> {
    g.active_vertices()
        .filter(|&v| v < g.original_n())
        .collect()
}

fn screening_semantics() -> Result<String, String> {
    let mut r = rng(1008);
    let mut kernels = 0;
    for i in 0..50 {
        let n = r.gen_range(20..50);
        let g = random_graph(&mut r, n, PROBS[i as usize % 4].min(0.3), 1, 20);
        let run = |mode, models: &ModelSet| {
            let cfg = ReduceConfig {
                mode,
                ..Default::default()
            };
            run_reduce(DynamicGraph::from_static(&g), &cfg, models).map_err(|e| e.to_string())
        };
        let never = run(ScreeningMode::Never, &ModelSet::new())?;
        let base = active_originals(&never.graph);
        kernels += base.len();
        let no_gnn = run(ScreeningMode::NoGnnRed, &ModelSet::new())?;
        if no_gnn.stats.expensive_invocations != 0 {
            return Err(format!("instance {i}: no-gnn ran an expensive rule"));
        }
        for (k, models) in [
            ModelSet::uniform(Coin { seed: i, p: 0.3 }),
            stub_models(1, 0),
        ]
        .iter()
        .enumerate()
        {
            for mode in [
                ScreeningMode::Always,
                ScreeningMode::Initial,
                ScreeningMode::InitialTight,
            ] {
                let red = run(mode, models)?;
                let kernel = active_originals(&red.graph);
                let contained = base.iter().all(|v| kernel.binary_search(v).is_ok());
                if !contained || red.graph.active_count() < never.graph.active_count() {
                    return Err(format!(
                        "instance {i}, models {k}, {mode}: never kernel not contained"
                    ));
                }
            }
        }
    }
    Ok(format!(
        "50 instances, {kernels} never-kernel vertices, no-gnn expensive calls 0"
    ))
}

fn defaults() -> Result<String, String> {
    let cfg = ChilsConfig::default();
    let checks = [
        ("P", cfg.p == 16 && DEFAULT_P == 16),
        (
            "t_G",
            cfg.t_g == Duration::from_secs(10) && DEFAULT_PHASE_TIME == cfg.t_g,
        ),
        ("t_C", cfg.t_c == Duration::from_secs(10)),
        (
            "perturb threshold",
            cfg.perturb_threshold == 500 && DEFAULT_PERTURB_THRESHOLD == 500,
        ),
        (
            "deterministic iterations",
            DEFAULT_LS_ITERS == 1000 && DEFAULT_CHILS_ITERS == 10,
        ),
        ("m_q", (0..16).all(|i| cfg.member_mq(i) == cfg.mq + 4 * i)),
        ("threshold", THRESHOLD == 0.5),
        (
            "default mode",
            ScreeningMode::default() == ScreeningMode::Never,
        ),
    ];
    if let Some((name, _)) = checks.iter().find(|c| !c.1) {
        return Err(format!("{name} differs"));
    }
    let g = random_graph(&mut rng(1009), 10, 0.3, 1, 20);
    for arch in Architecture::ALL {
        let at_half =
            screen(&GnnModel::zeros(arch, FEATURES, HIDDEN), &g).map_err(|e| e.to_string())?;
        let above = screen(&GnnModel::constant(arch, 1e-9), &g).map_err(|e| e.to_string())?;
        if !at_half.is_empty() || above.len() != g.n() {
            return Err(format!("{arch:?}: threshold is not strict"));
        }
    }
    Ok("P=16 t=10s threshold 500 strict 0.5 m_q+4i".into())
}

fn profile_example() -> Result<String, String> {
    let rec = |instance: &str, algorithm: &str, weight| RunRecord {
        instance: instance.into(),
        algorithm: algorithm.into(),
        weight,
        time: 1.0,
    };
    let rs = vec![
        rec("g1", "a", 10),
        rec("g1", "b", 8),
        rec("g2", "a", 8),
        rec("g2", "b", 10),
    ];
    let curves = perf_profile(&rs, ProfileKind::Quality).map_err(|e| e.to_string())?;
    for c in &curves {
        let (one, low) = (
            c.at(ProfileKind::Quality, 1.0),
            c.at(ProfileKind::Quality, 0.8),
        );
        let direct =
            fraction_at(&rs, ProfileKind::Quality, &c.algorithm, 0.8).map_err(|e| e.to_string())?;
        if one != 0.5 || low != 1.0 || direct != 1.0 {
            return Err(format!("{}: {one} at 1, {low} at 0.8", c.algorithm));
        }
    }
    Ok("0.5 at tau=1, 1.0 at tau=0.8".into())
}

type Criterion = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("exactness", exactness),
        ("per-rule soundness", per_rule),
        ("critical set", critical_set),
        ("baseline quality", baseline_quality),
        ("chils determinism", chils_determinism),
        ("chils acceptances", chils_acceptances),
        ("gnn parity", gnn_parity),
        ("screening semantics", screening_semantics),
        ("defaults", defaults),
        ("profile example", profile_example),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
