//! Random task generation and the head-to-head benchmark harness.
//!
//! Tasks are drawn from five templates (single goal, two- and three-stage
//! visit sequences, a conjunction of goals, and avoid-until), with each
//! slot filled by first sampling an abstraction level and then a
//! proposition of that level. Both methods run on identical tasks;
//! results land in CSV files plus a cumulative-histogram table and a
//! win-count summary.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ltl::{LtlFormula, PropId};
use crate::planner::{run_method, Method, MethodRun, PlanError};
use crate::solver::RewardParams;
use crate::world::WorldModel;

/// The five task schemas. Slots are filled with distinct propositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskTemplate {
    Visit,           // F a
    VisitThen,       // F (a & F b)
    VisitThenThen,   // F (a & F (b & F c))
    VisitBoth,       // F a & F b
    AvoidUntil,      // ! a U b
}

pub const TEMPLATES: [TaskTemplate; 5] = [
    TaskTemplate::Visit,
    TaskTemplate::VisitThen,
    TaskTemplate::VisitThenThen,
    TaskTemplate::VisitBoth,
    TaskTemplate::AvoidUntil,
];

impl TaskTemplate {
    pub fn arity(self) -> usize {
        match self {
            TaskTemplate::Visit => 1,
            TaskTemplate::VisitThen | TaskTemplate::VisitBoth | TaskTemplate::AvoidUntil => 2,
            TaskTemplate::VisitThenThen => 3,
        }
    }

    pub fn instantiate(self, slots: &[PropId]) -> LtlFormula {
        let atom = |i: usize| LtlFormula::Atom(slots[i]);
        match self {
            TaskTemplate::Visit => atom(0).finally(),
            TaskTemplate::VisitThen => atom(0).and(atom(1).finally()).finally(),
            TaskTemplate::VisitThenThen => atom(0)
                .and(atom(1).and(atom(2).finally()).finally())
                .finally(),
            TaskTemplate::VisitBoth => atom(0).finally().and(atom(1).finally()),
            TaskTemplate::AvoidUntil => atom(0).not().until(atom(1)),
        }
    }
}

/// Sample `n` tasks. Templates are chosen uniformly; each slot first
/// samples a level uniformly among the allowed ones (at or above
/// `min_level`, restricted to levels that actually carry propositions),
/// then a proposition of that level uniformly. Slots within one formula
/// get distinct propositions. Reproducible from the seed.
pub fn sample_tasks(
    world: &WorldModel,
    n: usize,
    seed: u64,
    min_level: Option<u8>,
) -> Vec<LtlFormula> {
    let reg = world.registry();
    let min = min_level.unwrap_or(0);
    let pools: Vec<(u8, Vec<PropId>)> = (min..=2)
        .map(|l| (l, reg.ids_at_level(l)))
        .filter(|(_, pool)| !pool.is_empty())
        .collect();
    assert!(!pools.is_empty(), "no propositions at or above level {min}");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let template = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
        let mut slots: Vec<PropId> = Vec::with_capacity(template.arity());
        while slots.len() < template.arity() {
            let (_, pool) = &pools[rng.gen_range(0..pools.len())];
            let p = pool[rng.gen_range(0..pool.len())];
            if !slots.contains(&p) {
                slots.push(p);
            }
        }
        out.push(template.instantiate(&slots));
    }
    out
}

/// One method's result on one task.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub task_id: usize,
    pub formula: String,
    pub method: Method,
    pub feasible: bool,
    pub backups: u64,
    pub translate_us: u64,
    pub plan_us: u64,
    pub plan_len: Option<usize>,
    pub error: Option<String>,
    pub seed: u64,
}

impl BenchRecord {
    pub fn total_us(&self) -> u64 {
        self.translate_us + self.plan_us
    }

    fn from_run(task_id: usize, formula: &str, run: MethodRun, seed: u64) -> BenchRecord {
        BenchRecord {
            task_id,
            formula: formula.to_string(),
            method: run.method,
            feasible: run.plan.is_some(),
            backups: run.backups,
            translate_us: run.translate_time.as_micros() as u64,
            plan_us: run.plan_time.as_micros() as u64,
            plan_len: run.plan.as_ref().map(|p| p.actions.len()),
            error: if run.plan.is_some() { None } else { Some(run.reports.join("; ")) },
            seed,
        }
    }

    fn failed(task_id: usize, formula: &str, method: Method, e: &PlanError, seed: u64) -> BenchRecord {
        BenchRecord {
            task_id,
            formula: formula.to_string(),
            method,
            feasible: false,
            backups: 0,
            translate_us: 0,
            plan_us: 0,
            plan_len: None,
            error: Some(e.to_string()),
            seed,
        }
    }
}

/// Run both methods on every task. Pairs come back in task order; task
/// errors are captured in the records rather than aborting the run.
/// `jobs` bounds the worker threads (`None` uses the rayon default).
pub fn run_benchmark(
    world: &WorldModel,
    tasks: &[LtlFormula],
    params: &RewardParams,
    seed: u64,
    jobs: Option<usize>,
) -> Vec<(BenchRecord, BenchRecord)> {
    let start = world
        .default_start
        .unwrap_or(crate::world::Cell { x: 0, y: 0, z: 0 });
    let run_one = |(i, f): (usize, &LtlFormula)| {
        let text = f.render(world.registry());
        let ap = match run_method(world, f, start, params, Method::ApMdp) {
            Ok(r) => BenchRecord::from_run(i, &text, r, seed),
            Err(e) => BenchRecord::failed(i, &text, Method::ApMdp, &e, seed),
        };
        let p = match run_method(world, f, start, params, Method::PMdp) {
            Ok(r) => BenchRecord::from_run(i, &text, r, seed),
            Err(e) => BenchRecord::failed(i, &text, Method::PMdp, &e, seed),
        };
        (ap, p)
    };
    match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .expect("thread pool");
            pool.install(|| tasks.par_iter().enumerate().map(run_one).collect())
        }
        None => tasks.par_iter().enumerate().map(run_one).collect(),
    }
}

/// Win counts over the feasible task pairs (a win is a strictly smaller
/// value; ties favor neither side).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub tasks: usize,
    pub feasible_both: usize,
    pub infeasible: usize,
    pub disagreements: usize,
    pub ap_backup_wins: usize,
    pub p_backup_wins: usize,
    pub backup_ties: usize,
    pub ap_time_wins: usize,
    pub p_time_wins: usize,
}

pub fn summarize(records: &[(BenchRecord, BenchRecord)]) -> Summary {
    let mut s = Summary { tasks: records.len(), ..Default::default() };
    for (ap, p) in records {
        if ap.feasible != p.feasible {
            s.disagreements += 1;
        }
        if !(ap.feasible && p.feasible) {
            s.infeasible += 1;
            continue;
        }
        s.feasible_both += 1;
        if ap.backups < p.backups {
            s.ap_backup_wins += 1;
        } else if p.backups < ap.backups {
            s.p_backup_wins += 1;
        } else {
            s.backup_ties += 1;
        }
        if ap.total_us() < p.total_us() {
            s.ap_time_wins += 1;
        } else if p.total_us() < ap.total_us() {
            s.p_time_wins += 1;
        }
    }
    s
}

fn ratio(a: u64, b: u64) -> Option<f64> {
    if b == 0 {
        None
    } else {
        Some(a as f64 / b as f64)
    }
}

fn fmt_opt(x: Option<impl ToString>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-task CSV: both methods' backups, times, plan lengths, and the
/// AP-to-baseline ratios (blank for tasks either method found infeasible).
pub fn records_csv(records: &[(BenchRecord, BenchRecord)]) -> String {
    let mut out = String::from(
        "task_id,formula,ap_feasible,p_feasible,ap_backups,p_backups,backup_ratio,\
         ap_translate_us,ap_plan_us,ap_total_us,p_translate_us,p_plan_us,p_total_us,\
         time_ratio,ap_plan_len,p_plan_len,seed\n",
    );
    for (ap, p) in records {
        let both = ap.feasible && p.feasible;
        let backup_ratio = if both { ratio(ap.backups, p.backups) } else { None };
        let time_ratio = if both { ratio(ap.total_us(), p.total_us()) } else { None };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            ap.task_id,
            ap.formula,
            ap.feasible,
            p.feasible,
            ap.backups,
            p.backups,
            fmt_opt(backup_ratio.map(|r| format!("{r:.6}"))),
            ap.translate_us,
            ap.plan_us,
            ap.total_us(),
            p.translate_us,
            p.plan_us,
            p.total_us(),
            fmt_opt(time_ratio.map(|r| format!("{r:.6}"))),
            fmt_opt(ap.plan_len),
            fmt_opt(p.plan_len),
            ap.seed,
        ));
    }
    out
}

/// Cumulative-histogram points: for each metric, the sorted values with
/// the running count of tasks at or below each value.
pub fn histogram_csv(records: &[(BenchRecord, BenchRecord)]) -> String {
    let mut out = String::from("metric,x,cumulative\n");
    let both: Vec<&(BenchRecord, BenchRecord)> =
        records.iter().filter(|(a, p)| a.feasible && p.feasible).collect();
    let mut emit = |name: &str, mut values: Vec<f64>| {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, v) in values.iter().enumerate() {
            out.push_str(&format!("{name},{v:.6},{}\n", i + 1));
        }
    };
    emit("ap_backups", both.iter().map(|(a, _)| a.backups as f64).collect());
    emit("p_backups", both.iter().map(|(_, p)| p.backups as f64).collect());
    emit("ap_total_us", both.iter().map(|(a, _)| a.total_us() as f64).collect());
    emit("p_total_us", both.iter().map(|(_, p)| p.total_us() as f64).collect());
    emit(
        "backup_ratio",
        both.iter()
            .filter_map(|(a, p)| ratio(a.backups, p.backups))
            .collect(),
    );
    emit(
        "time_ratio",
        both.iter()
            .filter_map(|(a, p)| ratio(a.total_us(), p.total_us()))
            .collect(),
    );
    out
}

pub fn summary_text(records: &[(BenchRecord, BenchRecord)]) -> String {
    let s = summarize(records);
    let mut out = String::new();
    out.push_str(&format!("tasks {}\n", s.tasks));
    out.push_str(&format!("feasible_both {}\n", s.feasible_both));
    out.push_str(&format!("infeasible {}\n", s.infeasible));
    out.push_str(&format!("feasibility_disagreements {}\n", s.disagreements));
    out.push_str(&format!("ap_backup_wins {}\n", s.ap_backup_wins));
    out.push_str(&format!("p_backup_wins {}\n", s.p_backup_wins));
    out.push_str(&format!("backup_ties {}\n", s.backup_ties));
    out.push_str(&format!("ap_time_wins {}\n", s.ap_time_wins));
    out.push_str(&format!("p_time_wins {}\n", s.p_time_wins));
    if s.feasible_both > 0 {
        out.push_str(&format!(
            "ap_backup_win_rate {:.4}\n",
            s.ap_backup_wins as f64 / s.feasible_both as f64
        ));
    }
    out
}

/// Write records.csv, hist.csv, and summary.txt under `dir`.
pub fn emit_report(
    records: &[(BenchRecord, BenchRecord)],
    dir: &Path,
) -> std::io::Result<Summary> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("records.csv"))?;
    f.write_all(records_csv(records).as_bytes())?;
    let mut f = std::fs::File::create(dir.join("hist.csv"))?;
    f.write_all(histogram_csv(records).as_bytes())?;
    let mut f = std::fs::File::create(dir.join("summary.txt"))?;
    f.write_all(summary_text(records).as_bytes())?;
    Ok(summarize(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;
    use std::path::Path as FsPath;

    fn e1() -> WorldModel {
        let path = FsPath::new(env!("CARGO_MANIFEST_DIR")).join("../../worlds/e1.world");
        WorldModel::load(&path).unwrap()
    }

    #[test]
    fn sampling_is_reproducible_and_parseable() {
        let w = e1();
        let a = sample_tasks(&w, 40, 7, None);
        let b = sample_tasks(&w, 40, 7, None);
        assert_eq!(a, b);
        for f in &a {
            let text = f.render(w.registry());
            assert_eq!(parse(&text, w.registry()).unwrap(), *f);
            crate::automaton::translate(f, w.registry()).expect("within the supported fragment");
        }
        // Templates vary and so do levels.
        let texts: Vec<String> = a.iter().map(|f| f.render(w.registry())).collect();
        assert!(texts.iter().any(|t| t.contains(" U ")));
        assert!(texts.iter().any(|t| t.starts_with("F ")));
    }

    #[test]
    fn level_filter_excludes_landmarks() {
        let w = e1();
        let tasks = sample_tasks(&w, 60, 3, Some(1));
        for f in &tasks {
            for p in f.props() {
                assert!(w.registry().level(p) >= 1, "landmark in {}", f.render(w.registry()));
            }
        }
    }

    #[test]
    fn distinct_slots_get_distinct_props() {
        let w = e1();
        for f in sample_tasks(&w, 200, 11, None) {
            let props = f.props();
            let mut all = Vec::new();
            f.collect_atoms(&mut all);
            assert_eq!(props.len(), all.len(), "repeated prop in {}", f.render(w.registry()));
        }
    }

    #[test]
    fn template_mix_covers_all_five() {
        let w = e1();
        let tasks = sample_tasks(&w, 1000, 5, None);
        let mut counts = [0usize; 5];
        for f in &tasks {
            let text = f.render(w.registry());
            let idx = if text.contains(" U ") {
                4
            } else if text.starts_with("F ") && text.contains(" & F ") && text.matches('F').count() == 3 && !text.starts_with("F (") {
                3
            } else {
                match text.matches('F').count() {
                    1 => 0,
                    2 => {
                        if text.starts_with("F (") { 1 } else { 3 }
                    }
                    3 => {
                        if text.starts_with("F (") { 2 } else { 3 }
                    }
                    _ => panic!("unclassifiable {text}"),
                }
            };
            counts[idx] += 1;
        }
        // Uniform over 5 templates: each expected 200 of 1000.
        for (i, c) in counts.iter().enumerate() {
            assert!(
                (120..=280).contains(c),
                "template {i} count {c} far from uniform: {counts:?}"
            );
        }
    }

    #[test]
    fn benchmark_records_and_report_are_consistent() {
        let w = e1();
        let tasks = sample_tasks(&w, 12, 9, None);
        let records = run_benchmark(&w, &tasks, &RewardParams::default(), 9, Some(2));
        assert_eq!(records.len(), 12);
        for (i, (ap, p)) in records.iter().enumerate() {
            assert_eq!(ap.task_id, i);
            assert_eq!(p.task_id, i);
            assert_eq!(ap.formula, p.formula);
        }
        let csv = records_csv(&records);
        assert_eq!(csv.lines().count(), 13);
        // Win counts recomputed from CSV rows match the summary.
        let s = summarize(&records);
        let mut wins = 0;
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols[2] == "true" && cols[3] == "true" {
                let ab: u64 = cols[4].parse().unwrap();
                let pb: u64 = cols[5].parse().unwrap();
                if ab < pb {
                    wins += 1;
                }
            }
        }
        assert_eq!(wins, s.ap_backup_wins);
        // Histogram: cumulative counts are monotone and end at the
        // feasible-pair count.
        let hist = histogram_csv(&records);
        let mut last: Option<(String, usize)> = None;
        let mut maxima = std::collections::HashMap::new();
        for line in hist.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let metric = cols[0].to_string();
            let cum: usize = cols[2].parse().unwrap();
            if let Some((m, c)) = &last {
                if *m == metric {
                    assert!(cum > *c);
                }
            }
            maxima.insert(metric.clone(), cum);
            last = Some((metric, cum));
        }
        for (metric, max) in maxima {
            if metric.ends_with("_ratio") {
                continue;
            }
            assert_eq!(max, s.feasible_both, "histogram for {metric}");
        }
    }

    #[test]
    fn identical_methods_would_give_unit_ratio() {
        // Ratio arithmetic sanity on a synthetic pair.
        let mk = |backups| BenchRecord {
            task_id: 0,
            formula: "F red_room".into(),
            method: Method::ApMdp,
            feasible: true,
            backups,
            translate_us: 10,
            plan_us: 10,
            plan_len: Some(2),
            error: None,
            seed: 0,
        };
        let records = vec![(mk(50), BenchRecord { method: Method::PMdp, ..mk(100) })];
        let csv = records_csv(&records);
        let row = csv.lines().nth(1).unwrap();
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[6], "0.500000");
        let records = vec![(mk(70), BenchRecord { method: Method::PMdp, ..mk(70) })];
        let csv = records_csv(&records);
        let row = csv.lines().nth(1).unwrap();
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[6], "1.000000");
    }

    #[test]
    fn benchmark_is_deterministic_in_backups() {
        let w = e1();
        let tasks = sample_tasks(&w, 10, 7, None);
        let r1 = run_benchmark(&w, &tasks, &RewardParams::default(), 7, Some(4));
        let r2 = run_benchmark(&w, &tasks, &RewardParams::default(), 7, Some(1));
        for ((a1, p1), (a2, p2)) in r1.iter().zip(&r2) {
            assert_eq!(a1.backups, a2.backups);
            assert_eq!(p1.backups, p2.backups);
            assert_eq!(a1.feasible, a2.feasible);
            assert_eq!(p1.plan_len, p2.plan_len);
        }
    }
}
