//! The reduction loop: one FIFO queue per rule in a fixed order, restart at
//! the first rule after every success, and optional model screening of the
//! expensive rules.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::gnn::{self, GnnError, GnnModel, FEATURES};
use crate::graph::{DynamicGraph, StaticGraph, VertexId};
use crate::reductions::{
    apply_rule, ReducerBudgets, ReductionLog, RuleContext, RuleFlags, RuleId, RuleOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScreeningMode {
    /// Expensive rules disabled.
    NoGnnRed,
    /// Expensive rules on every queued vertex.
    #[default]
    Never,
    /// Queue replaced by the model's suggestions on every non-empty visit.
    Always,
    /// Queue replaced once, then filled by changes as usual.
    Initial,
    /// Queue replaced once and closed afterwards.
    InitialTight,
}

impl ScreeningMode {
    pub const ALL: [ScreeningMode; 5] = [
        ScreeningMode::NoGnnRed,
        ScreeningMode::Never,
        ScreeningMode::Always,
        ScreeningMode::Initial,
        ScreeningMode::InitialTight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScreeningMode::NoGnnRed => "no-gnn",
            ScreeningMode::Never => "never",
            ScreeningMode::Always => "always",
            ScreeningMode::Initial => "initial",
            ScreeningMode::InitialTight => "initial-tight",
        }
    }

    pub fn is_screened(self) -> bool {
        matches!(
            self,
            ScreeningMode::Always | ScreeningMode::Initial | ScreeningMode::InitialTight
        )
    }

    pub fn runs_expensive(self) -> bool {
        self != ScreeningMode::NoGnnRed
    }
}

impl fmt::Display for ScreeningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScreeningMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScreeningMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown screening mode {s:?}"))
    }
}

/// Picks the vertices of a snapshot worth testing with one rule.
pub trait Screener: Send + Sync {
    fn suggest(&self, g: &StaticGraph) -> Vec<VertexId>;
}

impl Screener for GnnModel {
    fn suggest(&self, g: &StaticGraph) -> Vec<VertexId> {
        gnn::screen(self, g).expect("model checked when added to the set")
    }
}

/// Suggests exactly the vertices at which the rule fires on the snapshot.
/// Global rules get every vertex or none.
#[derive(Debug, Clone)]
pub struct RuleOracle {
    pub rule: RuleId,
    pub budgets: ReducerBudgets,
    pub flags: RuleFlags,
}

impl Screener for RuleOracle {
    fn suggest(&self, g: &StaticGraph) -> Vec<VertexId> {
        let fires = |anchor| {
            let mut d = DynamicGraph::from_static(g);
            let mut ctx = RuleContext::new(self.budgets, self.flags);
            apply_rule(
                self.rule,
                &mut d,
                &mut ReductionLog::new(),
                &mut ctx,
                anchor,
            )
            .is_applied()
        };
        if self.rule.is_global() {
            if g.n() > 0 && fires(0) {
                (0..g.n()).collect()
            } else {
                Vec::new()
            }
        } else {
            (0..g.n()).filter(|&v| fires(v)).collect()
        }
    }
}

/// One screener per expensive rule.
#[derive(Clone, Default)]
pub struct ModelSet {
    models: BTreeMap<RuleId, Arc<dyn Screener>>,
}

impl ModelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rule: RuleId, screener: impl Screener + 'static) {
        self.models.insert(rule, Arc::new(screener));
    }

    pub fn insert_model(&mut self, rule: RuleId, model: GnnModel) -> Result<(), GnnError> {
        model.validate()?;
        if model.input_dim != FEATURES {
            return Err(GnnError::Dimension(format!(
                "model for {rule} takes {} features, the extractor yields {FEATURES}",
                model.input_dim
            )));
        }
        self.insert(rule, model);
        Ok(())
    }

    /// The same screener for every expensive rule.
    pub fn uniform<S: Screener + Clone + 'static>(screener: S) -> Self {
        let mut set = ModelSet::new();
        for rule in RuleId::expensive() {
            set.insert(rule, screener.clone());
        }
        set
    }

    /// A [`RuleOracle`] for every expensive rule.
    pub fn oracles(budgets: ReducerBudgets, flags: RuleFlags) -> Self {
        let mut set = ModelSet::new();
        for rule in RuleId::expensive() {
            set.insert(
                rule,
                RuleOracle {
                    rule,
                    budgets,
                    flags,
                },
            );
        }
        set
    }

    /// Loads `<rule-name>.json` for every expensive rule that has one.
    pub fn load_dir(dir: &Path) -> Result<Self, GnnError> {
        let mut set = ModelSet::new();
        for rule in RuleId::expensive() {
            let path = dir.join(format!("{}.json", rule.name()));
            if path.exists() {
                set.insert_model(rule, GnnModel::load(&path)?)?;
            }
        }
        Ok(set)
    }

    pub fn get(&self, rule: RuleId) -> Option<&dyn Screener> {
        self.models.get(&rule).map(|m| m.as_ref())
    }

    pub fn rules(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.models.keys().copied()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReduceConfig {
    pub mode: ScreeningMode,
    pub budgets: ReducerBudgets,
    pub flags: RuleFlags,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("mode {0} needs a model for rule {1}")]
    MissingModel(ScreeningMode, RuleId),
}

/// Per-rule FIFO queues with membership flags.
#[derive(Debug, Clone)]
pub struct QueueSet {
    queues: Vec<VecDeque<VertexId>>,
    member: Vec<Vec<bool>>,
    closed: Vec<bool>,
}

impl QueueSet {
    pub fn new(rules: usize) -> Self {
        QueueSet {
            queues: vec![VecDeque::new(); rules],
            member: vec![Vec::new(); rules],
            closed: vec![false; rules],
        }
    }

    /// Appends `v` unless it is already queued or the queue is closed.
    pub fn push(&mut self, rule: usize, v: VertexId) {
        if self.closed[rule] {
            return;
        }
        let flags = &mut self.member[rule];
        if flags.len() <= v {
            flags.resize(v + 1, false);
        }
        if !flags[v] {
            flags[v] = true;
            self.queues[rule].push_back(v);
        }
    }

    /// Offers every changed vertex to every queue.
    pub fn push_changed(&mut self, changed: &[VertexId]) {
        for rule in 0..self.queues.len() {
            for &v in changed {
                self.push(rule, v);
            }
        }
    }

    pub fn pop(&mut self, rule: usize) -> Option<VertexId> {
        let v = self.queues[rule].pop_front()?;
        self.member[rule][v] = false;
        Some(v)
    }

    pub fn clear(&mut self, rule: usize) {
        while self.pop(rule).is_some() {}
    }

    pub fn close(&mut self, rule: usize) {
        self.closed[rule] = true;
    }

    pub fn len(&self, rule: usize) -> usize {
        self.queues[rule].len()
    }

    pub fn is_empty(&self, rule: usize) -> bool {
        self.queues[rule].is_empty()
    }

    pub fn contents(&self, rule: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.queues[rule].iter().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleStats {
    pub attempts: u64,
    pub applied: u64,
    pub skipped: u64,
    pub time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReduceStats {
    pub mode: ScreeningMode,
    pub vertices_in: usize,
    pub edges_in: usize,
    pub vertices_out: usize,
    pub edges_out: usize,
    pub offset: i64,
    pub time: Duration,
    pub rules: Vec<RuleStats>,
    /// Attempts of expensive rules, global ones included.
    pub expensive_invocations: u64,
    pub screenings: u64,
}

impl ReduceStats {
    pub fn rule(&self, rule: RuleId) -> &RuleStats {
        &self.rules[rule.index()]
    }
}

impl fmt::Display for ReduceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "vertices_in: {}", self.vertices_in)?;
        writeln!(f, "edges_in: {}", self.edges_in)?;
        writeln!(f, "vertices_out: {}", self.vertices_out)?;
        writeln!(f, "edges_out: {}", self.edges_out)?;
        writeln!(f, "offset: {}", self.offset)?;
        writeln!(f, "time_s: {:.6}", self.time.as_secs_f64())?;
        writeln!(f, "expensive_invocations: {}", self.expensive_invocations)?;
        writeln!(f, "screenings: {}", self.screenings)?;
        for (rule, s) in RuleId::ALL.iter().zip(&self.rules) {
            writeln!(
                f,
                "rule: {} attempts={} applied={} skipped={} time_s={:.6}",
                rule,
                s.attempts,
                s.applied,
                s.skipped,
                s.time.as_secs_f64()
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Reduced {
    pub graph: DynamicGraph,
    pub log: ReductionLog,
    pub stats: ReduceStats,
}

struct Engine<'a> {
    cfg: &'a ReduceConfig,
    models: &'a ModelSet,
    g: DynamicGraph,
    log: ReductionLog,
    ctx: RuleContext,
    queues: QueueSet,
    stats: ReduceStats,
    seen: Vec<u32>,
    stamp: u32,
}

impl Engine<'_> {
    fn attempt(&mut self, rule: RuleId, anchor: VertexId) -> bool {
        let start = Instant::now();
        let outcome = apply_rule(rule, &mut self.g, &mut self.log, &mut self.ctx, anchor);
        let s = &mut self.stats.rules[rule.index()];
        s.attempts += 1;
        s.time += start.elapsed();
        if rule.is_expensive() {
            self.stats.expensive_invocations += 1;
        }
        match outcome {
            RuleOutcome::Applied { .. } => {
                s.applied += 1;
                let changed = self.changed_region();
                self.queues.push_changed(&changed);
                self.g.clear_journal();
                true
            }
            RuleOutcome::Skipped(_) => {
                s.skipped += 1;
                false
            }
            RuleOutcome::NotApplicable => false,
        }
    }

    /// Touched vertices and their active neighbors. Expensive rules look
    /// two hops out, so a change next to a vertex can enable them there.
    fn changed_region(&mut self) -> Vec<VertexId> {
        let touched = self.g.take_touched();
        self.stamp += 1;
        self.seen.resize(self.g.slots(), 0);
        let mut out = Vec::new();
        for &v in &touched {
            for &u in std::iter::once(&v).chain(self.g.neighbors(v)) {
                if self.seen[u] != self.stamp {
                    self.seen[u] = self.stamp;
                    out.push(u);
                }
            }
        }
        out
    }

    /// Replaces queue `i` by the model's suggestions.
    fn screen(&mut self, i: usize, rule: RuleId) {
        let model = self.models.get(rule).expect("checked before the loop");
        let (snapshot, map) = self.g.to_static();
        let suggested = model.suggest(&snapshot);
        self.stats.screenings += 1;
        self.queues.clear(i);
        for s in suggested {
            self.queues.push(i, map[s]);
        }
        if self.cfg.mode == ScreeningMode::InitialTight {
            self.queues.close(i);
        }
    }

    fn run(&mut self) {
        let rules = RuleId::ALL;
        let mode = self.cfg.mode;
        let enabled = |r: RuleId| !r.is_expensive() || mode.runs_expensive();
        let initial: Vec<VertexId> = self.g.active_vertices().collect();
        for (i, &rule) in rules.iter().enumerate() {
            if enabled(rule) {
                for &v in &initial {
                    self.queues.push(i, v);
                }
            } else {
                self.queues.close(i);
            }
        }
        self.g.clear_touched();
        self.g.clear_journal();
        let mut screened = vec![false; rules.len()];
        let mut i = 0;
        while i < rules.len() {
            let rule = rules[i];
            if self.queues.is_empty(i) {
                i += 1;
                continue;
            }
            if rule.is_expensive() && mode.is_screened() {
                let again = mode == ScreeningMode::Always || !screened[i];
                if again {
                    self.screen(i, rule);
                    screened[i] = true;
                }
            }
            if rule.is_global() {
                let suggested = self.queues.len(i);
                self.queues.clear(i);
                let gate = self.cfg.budgets.global_fraction * self.g.active_count() as f64;
                let run = !mode.is_screened() || suggested as f64 > gate;
                if run && self.attempt(rule, 0) {
                    i = 0;
                } else {
                    i += 1;
                }
                continue;
            }
            let mut progress = false;
            while let Some(v) = self.queues.pop(i) {
                if self.g.is_active(v) && self.attempt(rule, v) {
                    progress = true;
                    break;
                }
            }
            i = if progress { 0 } else { i + 1 };
        }
    }
}

/// Reduces `g` exhaustively under `cfg`. Screened modes need a model for
/// every expensive rule.
pub fn run_reduce(
    g: DynamicGraph,
    cfg: &ReduceConfig,
    models: &ModelSet,
) -> Result<Reduced, ReduceError> {
    if cfg.mode.is_screened() {
        if let Some(rule) = RuleId::expensive().find(|&r| models.get(r).is_none()) {
            return Err(ReduceError::MissingModel(cfg.mode, rule));
        }
    }
    let start = Instant::now();
    let stats = ReduceStats {
        mode: cfg.mode,
        vertices_in: g.active_count(),
        edges_in: g.active_edge_count(),
        rules: vec![RuleStats::default(); RuleId::ALL.len()],
        ..Default::default()
    };
    let mut engine = Engine {
        cfg,
        models,
        g,
        log: ReductionLog::new(),
        ctx: RuleContext::new(cfg.budgets, cfg.flags),
        queues: QueueSet::new(RuleId::ALL.len()),
        stats,
        seen: Vec::new(),
        stamp: 0,
    };
    engine.run();
    let Engine {
        g, log, mut stats, ..
    } = engine;
    stats.vertices_out = g.active_count();
    stats.edges_out = g.active_edge_count();
    stats.offset = log.offset();
    stats.time = start.elapsed();
    Ok(Reduced {
        graph: g,
        log,
        stats,
    })
}
