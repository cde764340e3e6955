//! Exactness conditions and the certification pipeline.
//!
//! Every rule works on the aggregated sparsity graph `G` and the edge signs
//! `sigma_ij`. The SDP-based rules solve, per edge `(k, l)`,
//!
//! ```text
//! mu* = min { S(y)_kl : y >= 0, S(y) >= 0 }
//! ```
//!
//! and certify when `mu* > mu_tol` for every edge. Rules that pass only lead
//! to `CertifiedExact` when the assumption check also holds.
//!
//! Reports use 1-based vertex numbers, matching the instance file format.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    bipartition, build_graph, connected_components, cycle_basis, cycle_edges, edge_signs, is_forest,
    BipartitionResult, EdgeSigns, Sign, SparsityGraph,
};
use crate::qcqp::QcqpInstance;
use crate::relaxation::{self, solve_relaxation};
use crate::sdp::{
    self, max_min_eigen_combination, maximize_linear_functional_over_dual_cone,
    minimize_linear_functional_over_dual_cone, relaxation_interior_margin, EdgeFunctional,
};
use crate::transform::sign_split_transform;

pub const DEFAULT_MU_TOL: f64 = 1e-6;
pub const DEFAULT_Y_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub solver_tol: f64,
    /// Margin by which `mu*` must clear zero.
    pub mu_tol: f64,
    pub y_cap: f64,
    pub rank_tol: f64,
    /// Entries with magnitude at most this count as zero in the graph.
    pub zero_tol: f64,
    pub delta: f64,
    /// Worker threads for per-edge solves.
    pub parallel: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            solver_tol: sdp::DEFAULT_TOL,
            mu_tol: DEFAULT_MU_TOL,
            y_cap: DEFAULT_Y_CAP,
            rank_tol: relaxation::DEFAULT_RANK_TOL,
            zero_tol: 0.0,
            delta: crate::transform::DEFAULT_DELTA,
            parallel: 1,
        }
    }
}

impl CertifyOptions {
    pub fn validate(&self) -> Result<()> {
        sdp::check_tol(self.solver_tol)?;
        let positive = [
            ("mu_tol", self.mu_tol),
            ("y_cap", self.y_cap),
            ("rank_tol", self.rank_tol),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.zero_tol.is_finite() && self.zero_tol >= 0.0) {
            return Err(Error::InvalidArgument("zero_tol must be nonnegative".into()));
        }
        if self.parallel == 0 {
            return Err(Error::InvalidArgument("parallel must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedExact,
    NotCertified,
    NumericallyExactOnly,
    InexactObserved,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::CertifiedExact => 0,
            Verdict::NotCertified => 2,
            Verdict::NumericallyExactOnly => 3,
            Verdict::InexactObserved => 4,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Bipartite graph, all off-diagonal entries nonnegative.
    NonnegativeBipartite,
    /// All off-diagonal entries nonpositive, any graph.
    NonpositiveOffDiagonal,
    /// Sign-definite edges whose sign products match cycle parity.
    SignCycle,
    /// Forest graph, `S(y)_kl = 0` infeasible on every edge.
    ForestSystems,
    /// Connected bipartite graph, `S(y)_kl <= 0` infeasible on every edge.
    BipartiteConnected,
    /// Same per-edge systems on a disconnected bipartite graph.
    BipartiteDisconnected,
    /// Sign-split instance is bipartite with nonnegative off-diagonals.
    SignSplit,
    /// Observation only: rank of the solved relaxation.
    RelaxationRank,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::NonnegativeBipartite => "nonnegative off-diagonal on a bipartite graph",
            Rule::NonpositiveOffDiagonal => "nonpositive off-diagonal",
            Rule::SignCycle => "sign-definite edges with cycle-parity sign products",
            Rule::ForestSystems => "forest edge systems S(y)_kl = 0",
            Rule::BipartiteConnected => "connected bipartite edge systems S(y)_kl <= 0",
            Rule::BipartiteDisconnected => "disconnected bipartite edge systems S(y)_kl <= 0",
            Rule::SignSplit => "sign-splitting transformation to a nonnegative bipartite instance",
            Rule::RelaxationRank => "numerical rank of the solved relaxation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleStatus {
    Passed,
    Failed,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: Rule,
    pub status: RuleStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    /// `max_{y in simplex} lambda_min(sum_p y_p Q^p)`.
    pub t_star: Option<f64>,
    pub y_bar: Option<Vec<f64>>,
    /// Largest `s` with `X >= sI`, `Q^p . X <= b_p - s`.
    pub interior_margin: Option<f64>,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvidence {
    pub edge: (usize, usize),
    pub sign: i32,
    pub mu_min: Option<f64>,
    pub attained_min: Option<bool>,
    pub mu_max: Option<f64>,
    pub attained_max: Option<bool>,
    /// `y >= 0, S(y) >= 0, S(y)_kl <= 0` proven infeasible.
    pub nonpositive_infeasible: Option<bool>,
    /// `y >= 0, S(y) >= 0, S(y)_kl = 0` proven infeasible.
    pub zero_infeasible: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCheck {
    pub cycle: Vec<usize>,
    pub length: usize,
    pub sign_product: i32,
    pub required: i32,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub edge_count: usize,
    pub components: usize,
    pub connected: bool,
    pub forest: bool,
    pub bipartite: bool,
    pub odd_cycle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSummary {
    pub positive: usize,
    pub negative: usize,
    pub mixed: usize,
    pub first_mixed: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSummary {
    pub primal_value: f64,
    pub dual_value: f64,
    pub numeric_rank: usize,
    pub gap: Option<f64>,
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformEvidence {
    pub delta: f64,
    pub transformed_n: usize,
    pub transformed_bipartite: bool,
    pub parts: Option<(Vec<usize>, Vec<usize>)>,
    pub odd_cycle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub applied_rule: Option<Rule>,
    pub assumption_check: Option<AssumptionCheck>,
    pub graph: GraphSummary,
    pub sign_summary: SignSummary,
    pub per_edge: Vec<EdgeEvidence>,
    pub cycle_checks: Vec<CycleCheck>,
    pub rules: Vec<RuleOutcome>,
    pub relaxation: Option<RelaxationSummary>,
    pub transform: Option<TransformEvidence>,
    pub tolerances: CertifyOptions,
    pub notes: Vec<String>,
}

impl CertificationReport {
    /// Evidence for the 1-based edge `(i, j)`.
    pub fn edge(&self, i: usize, j: usize) -> Option<&EdgeEvidence> {
        let key = (i.min(j), i.max(j));
        self.per_edge.iter().find(|e| e.edge == key)
    }

    pub fn rule(&self, rule: Rule) -> Option<&RuleOutcome> {
        self.rules.iter().find(|r| r.rule == rule)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Outcome of the per-edge system `y >= 0, S(y) >= 0, S(y)_kl <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSystem {
    pub infeasible: bool,
    pub mu: f64,
    pub attained: bool,
    pub y: Vec<f64>,
}

/// Decides infeasibility of `y >= 0, S(y) >= 0, S(y)_kl <= 0` (0-based indices).
///
/// Infeasible exactly when `mu* > mu_tol` and the optimum lies strictly
/// inside the `y_cap` box; otherwise the answer is conservatively `false`.
pub fn check_edge_system_nonpositive(
    inst: &QcqpInstance,
    k: usize,
    l: usize,
    opts: &CertifyOptions,
) -> Result<EdgeSystem> {
    let r = minimize_linear_functional_over_dual_cone(inst, k, l, opts.y_cap, opts.solver_tol)?;
    Ok(EdgeSystem {
        infeasible: r.value > opts.mu_tol && r.attained,
        mu: r.value,
        attained: r.attained,
        y: r.y,
    })
}

fn par_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("edge worker panicked"))
            .collect()
    })
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

type EdgeResults = Vec<std::result::Result<EdgeFunctional, String>>;

struct Context<'a> {
    inst: &'a QcqpInstance,
    opts: CertifyOptions,
    graph: SparsityGraph,
    signs: EdgeSigns,
    bip: BipartitionResult,
    report: CertificationReport,
    mins: Option<EdgeResults>,
    maxs: Option<EdgeResults>,
}

impl<'a> Context<'a> {
    fn new(inst: &'a QcqpInstance, opts: &CertifyOptions) -> Self {
        let graph = build_graph(inst, opts.zero_tol);
        let signs = edge_signs(inst, &graph, opts.zero_tol);
        let bip = bipartition(&graph);
        let components = connected_components(&graph).len();
        let per_edge = signs
            .iter()
            .map(|((i, j), s)| EdgeEvidence {
                edge: (i + 1, j + 1),
                sign: s.value(),
                mu_min: None,
                attained_min: None,
                mu_max: None,
                attained_max: None,
                nonpositive_infeasible: None,
                zero_infeasible: None,
                error: None,
            })
            .collect();
        let report = CertificationReport {
            verdict: Verdict::NotCertified,
            applied_rule: None,
            assumption_check: None,
            graph: GraphSummary {
                n: inst.n(),
                m: inst.m(),
                edge_count: graph.edge_count(),
                components,
                connected: components <= 1,
                forest: is_forest(&graph),
                bipartite: bip.bipartite,
                odd_cycle: one_based(&bip.witness),
            },
            sign_summary: SignSummary {
                positive: signs.count(Sign::Positive),
                negative: signs.count(Sign::Negative),
                mixed: signs.count(Sign::Mixed),
                first_mixed: signs.first_mixed().map(|(i, j)| (i + 1, j + 1)),
            },
            per_edge,
            cycle_checks: Vec::new(),
            rules: Vec::new(),
            relaxation: None,
            transform: None,
            tolerances: *opts,
            notes: Vec::new(),
        };
        Context {
            inst,
            opts: *opts,
            graph,
            signs,
            bip,
            report,
            mins: None,
            maxs: None,
        }
    }

    fn record(&mut self, rule: Rule, status: RuleStatus, detail: impl Into<String>) -> RuleStatus {
        self.report.rules.push(RuleOutcome {
            rule,
            status,
            detail: detail.into(),
        });
        status
    }

    fn assumption(&mut self) -> bool {
        if let Some(a) = &self.report.assumption_check {
            return a.holds;
        }
        let tol = self.opts.solver_tol;
        let thr = self.opts.mu_tol;
        let mut check = AssumptionCheck {
            t_star: None,
            y_bar: None,
            interior_margin: None,
            holds: false,
            detail: String::new(),
        };
        let mut problems = Vec::new();
        match max_min_eigen_combination(self.inst, tol) {
            Ok(e) => {
                if e.t_star <= thr {
                    problems.push(format!(
                        "no positive definite combination of constraint matrices found (t* = {:.3e})",
                        e.t_star
                    ));
                }
                check.t_star = Some(e.t_star);
                check.y_bar = e.y_bar;
            }
            Err(e) => problems.push(format!("eigenvalue combination: {e}")),
        }
        match relaxation_interior_margin(self.inst, tol, thr) {
            Ok(c) => {
                if !c.holds {
                    problems.push(format!(
                        "relaxation has no interior feasible point (margin {:.3e})",
                        c.margin
                    ));
                }
                check.interior_margin = Some(c.margin);
            }
            Err(e) => problems.push(format!("interior point search: {e}")),
        }
        check.holds = problems.is_empty();
        check.detail = if check.holds {
            "positive definite combination and strictly feasible relaxation found".into()
        } else {
            problems.join("; ")
        };
        let holds = check.holds;
        self.report.assumption_check = Some(check);
        holds
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.graph.edges().to_vec()
    }

    fn compute_mins(&mut self) {
        if self.mins.is_some() {
            return;
        }
        let (inst, o) = (self.inst, self.opts);
        let res: EdgeResults = par_map(&self.edge_pairs(), o.parallel, |&(k, l)| {
            minimize_linear_functional_over_dual_cone(inst, k, l, o.y_cap, o.solver_tol)
                .map_err(|e| e.to_string())
        });
        for (ev, r) in self.report.per_edge.iter_mut().zip(&res) {
            match r {
                Ok(f) => {
                    ev.mu_min = Some(f.value);
                    ev.attained_min = Some(f.attained);
                    ev.nonpositive_infeasible = Some(f.value > o.mu_tol && f.attained);
                }
                Err(e) => ev.error = Some(e.clone()),
            }
        }
        self.mins = Some(res);
    }

    fn compute_maxs(&mut self) {
        if self.maxs.is_some() {
            return;
        }
        let (inst, o) = (self.inst, self.opts);
        let res: EdgeResults = par_map(&self.edge_pairs(), o.parallel, |&(k, l)| {
            maximize_linear_functional_over_dual_cone(inst, k, l, o.y_cap, o.solver_tol)
                .map_err(|e| e.to_string())
        });
        for (ev, r) in self.report.per_edge.iter_mut().zip(&res) {
            if let Ok(f) = r {
                ev.mu_max = Some(f.value);
                ev.attained_max = Some(f.attained);
            } else if let Err(e) = r {
                ev.error.get_or_insert_with(|| e.clone());
            }
        }
        self.maxs = Some(res);
    }

    /// Per-edge pass flags; `Err` carries the first failure description.
    fn summarize_edges(&self, passed: impl Fn(&EdgeEvidence) -> bool) -> std::result::Result<(), String> {
        for ev in &self.report.per_edge {
            if let Some(e) = &ev.error {
                return Err(format!("edge ({}, {}): {e}", ev.edge.0, ev.edge.1));
            }
            if !passed(ev) {
                return Err(format!(
                    "edge ({}, {}): mu* = {:.6e}{}",
                    ev.edge.0,
                    ev.edge.1,
                    ev.mu_min.unwrap_or(f64::NAN),
                    if ev.attained_min == Some(false) {
                        " (box active)"
                    } else {
                        ""
                    }
                ));
            }
        }
        Ok(())
    }

    fn sign_pattern_rules(&mut self) -> Option<Rule> {
        let pos = self.signs.count(Sign::Positive);
        let neg = self.signs.count(Sign::Negative);
        let e = self.graph.edge_count();
        let mut fired = None;
        if self.bip.bipartite && pos == e {
            self.record(
                Rule::NonnegativeBipartite,
                RuleStatus::Passed,
                "graph bipartite and every off-diagonal entry nonnegative",
            );
            fired = Some(Rule::NonnegativeBipartite);
        } else {
            let why = if !self.bip.bipartite {
                "graph is not bipartite".to_string()
            } else {
                format!("{} of {} edges are not nonnegative", e - pos, e)
            };
            self.record(Rule::NonnegativeBipartite, RuleStatus::NotApplicable, why);
        }
        if neg == e {
            self.record(
                Rule::NonpositiveOffDiagonal,
                RuleStatus::Passed,
                "every off-diagonal entry nonpositive",
            );
            fired = fired.or(Some(Rule::NonpositiveOffDiagonal));
        } else {
            self.record(
                Rule::NonpositiveOffDiagonal,
                RuleStatus::NotApplicable,
                format!("{} of {} edges are not nonpositive", e - neg, e),
            );
        }
        fired
    }

    fn sign_cycle(&mut self) -> bool {
        let basis = cycle_basis(&self.graph);
        self.report.cycle_checks = basis
            .cycles
            .iter()
            .map(|c| {
                let product: i32 = cycle_edges(c)
                    .iter()
                    .map(|&(i, j)| self.signs.get(i, j).map_or(0, Sign::value))
                    .product();
                let required = if c.len() % 2 == 0 { 1 } else { -1 };
                CycleCheck {
                    cycle: one_based(c),
                    length: c.len(),
                    sign_product: product,
                    required,
                    holds: product == required,
                }
            })
            .collect();
        if let Some((i, j)) = self.signs.first_mixed() {
            self.record(
                Rule::SignCycle,
                RuleStatus::NotApplicable,
                format!("edge ({}, {}) has sign 0", i + 1, j + 1),
            );
            return false;
        }
        if let Some(c) = self.report.cycle_checks.iter().find(|c| !c.holds) {
            let detail = format!(
                "cycle {:?} has sign product {} but needs {}",
                c.cycle, c.sign_product, c.required
            );
            self.record(Rule::SignCycle, RuleStatus::Failed, detail);
            return false;
        }
        let e = self.graph.edge_count();
        let case = if is_forest(&self.graph) {
            "forest with sign-definite edges"
        } else if self.bip.bipartite && self.signs.count(Sign::Positive) == e {
            "bipartite with all signs +1"
        } else if self.signs.count(Sign::Negative) == e {
            "all signs -1"
        } else {
            "every basis cycle has the required sign product"
        };
        self.record(Rule::SignCycle, RuleStatus::Passed, case);
        true
    }

    fn forest(&mut self) -> bool {
        if !self.report.graph.forest {
            self.record(
                Rule::ForestSystems,
                RuleStatus::NotApplicable,
                "graph has a cycle",
            );
            return false;
        }
        self.compute_mins();
        self.compute_maxs();
        let tol = self.opts.mu_tol;
        for ev in &mut self.report.per_edge {
            let lo = ev.mu_min.zip(ev.attained_min).is_some_and(|(v, a)| v > tol && a);
            let hi = ev.mu_max.zip(ev.attained_max).is_some_and(|(v, a)| v < -tol && a);
            ev.zero_infeasible = Some(ev.error.is_none() && (lo || hi));
        }
        let outcome = self.summarize_edges(|ev| ev.zero_infeasible == Some(true));
        match outcome {
            Ok(()) => {
                self.record(
                    Rule::ForestSystems,
                    RuleStatus::Passed,
                    "0 lies outside [mu_min, mu_max] on every edge",
                );
                true
            }
            Err(why) => {
                self.record(Rule::ForestSystems, RuleStatus::Failed, why);
                false
            }
        }
    }

    fn bipartite(&mut self) -> Option<Rule> {
        let rule = if self.report.graph.connected {
            Rule::BipartiteConnected
        } else {
            Rule::BipartiteDisconnected
        };
        if !self.bip.bipartite {
            let detail = format!("odd cycle {:?}", self.report.graph.odd_cycle);
            self.record(rule, RuleStatus::NotApplicable, detail);
            return None;
        }
        self.compute_mins();
        match self.summarize_edges(|ev| ev.nonpositive_infeasible == Some(true)) {
            Ok(()) => {
                self.record(rule, RuleStatus::Passed, "mu* > tolerance on every edge");
                Some(rule)
            }
            Err(why) => {
                self.record(rule, RuleStatus::Failed, why);
                None
            }
        }
    }

    fn sign_split(&mut self) -> bool {
        if self.signs.first_mixed().is_some() {
            self.record(Rule::SignSplit, RuleStatus::NotApplicable, "some edge has sign 0");
            return false;
        }
        if self.bip.bipartite {
            self.record(
                Rule::SignSplit,
                RuleStatus::NotApplicable,
                "graph already bipartite",
            );
            return false;
        }
        let t = match sign_split_transform(self.inst, self.opts.delta, self.opts.zero_tol) {
            Ok(t) => t,
            Err(e) => {
                self.record(Rule::SignSplit, RuleStatus::Failed, e.to_string());
                return false;
            }
        };
        let g = build_graph(&t.transformed, self.opts.zero_tol);
        let b = bipartition(&g);
        self.report.transform = Some(TransformEvidence {
            delta: t.delta,
            transformed_n: t.transformed.n(),
            transformed_bipartite: b.bipartite,
            parts: b
                .bipartite
                .then(|| (one_based(&b.parts.0), one_based(&b.parts.1))),
            odd_cycle: one_based(&b.witness),
        });
        if b.bipartite {
            self.record(
                Rule::SignSplit,
                RuleStatus::Passed,
                "transformed graph is bipartite with nonnegative off-diagonals",
            );
            true
        } else {
            let detail = format!("transformed graph has odd cycle {:?}", one_based(&b.witness));
            self.record(Rule::SignSplit, RuleStatus::Failed, detail);
            false
        }
    }

    fn fallback(&mut self) {
        match solve_relaxation(self.inst, self.opts.solver_tol, self.opts.rank_tol) {
            Ok(r) => {
                let rank = r.numeric_rank;
                self.report.relaxation = Some(RelaxationSummary {
                    primal_value: r.primal_value,
                    dual_value: r.dual_value,
                    numeric_rank: rank,
                    gap: r.gap,
                    x: r.x,
                });
                if rank <= 1 {
                    self.report.verdict = Verdict::NumericallyExactOnly;
                    self.record(
                        Rule::RelaxationRank,
                        RuleStatus::Passed,
                        format!("numerical rank {rank}"),
                    );
                } else {
                    self.report.verdict = Verdict::InexactObserved;
                    self.record(
                        Rule::RelaxationRank,
                        RuleStatus::Failed,
                        format!("numerical rank {rank}"),
                    );
                }
                self.report.applied_rule = Some(Rule::RelaxationRank);
            }
            Err(e) => {
                self.report.verdict = Verdict::NotCertified;
                self.report
                    .notes
                    .push(format!("relaxation could not be solved: {e}"));
            }
        }
    }

    /// Turns a passing rule into a verdict, subject to the assumption check.
    fn conclude(&mut self, rule: Option<Rule>) {
        match rule {
            Some(rule) if self.assumption() => {
                self.report.verdict = Verdict::CertifiedExact;
                self.report.applied_rule = Some(rule);
            }
            Some(rule) => {
                self.report.verdict = Verdict::NotCertified;
                self.report.notes.push(format!(
                    "assumption unverified: rule '{rule}' passed but was not applied"
                ));
            }
            None => self.report.verdict = Verdict::NotCertified,
        }
    }

    fn finish(mut self) -> CertificationReport {
        let unattained = self
            .report
            .per_edge
            .iter()
            .filter(|e| e.attained_min == Some(false))
            .count();
        if unattained > 0 {
            self.report.notes.push(format!(
                "{unattained} edge system(s) hit the y <= {} box; their mu* values are upper bounds only",
                self.opts.y_cap
            ));
        }
        self.report
    }
}

fn invalid_options_report(inst: &QcqpInstance, opts: &CertifyOptions, e: Error) -> CertificationReport {
    let mut ctx = Context::new(inst, opts);
    ctx.report.notes.push(format!("invalid options: {e}"));
    ctx.report
}

/// Applies the direct sign rules, gated by the assumption check.
pub fn certify_sign_pattern_rules(inst: &QcqpInstance, opts: &CertifyOptions) -> CertificationReport {
    if let Err(e) = opts.validate() {
        return invalid_options_report(inst, opts, e);
    }
    let mut ctx = Context::new(inst, opts);
    let fired = ctx.sign_pattern_rules();
    ctx.conclude(fired);
    ctx.finish()
}

/// Structural sign/cycle condition only; no SDP is solved and the
/// assumption is not checked (the pipeline adds that gate).
pub fn certify_sign_cycle(inst: &QcqpInstance, opts: &CertifyOptions) -> CertificationReport {
    let mut ctx = Context::new(inst, opts);
    if ctx.sign_cycle() {
        ctx.report.verdict = Verdict::CertifiedExact;
        ctx.report.applied_rule = Some(Rule::SignCycle);
        ctx.report
            .notes
            .push("structural condition only; assumption not checked".into());
    }
    ctx.finish()
}

pub fn certify_forest(inst: &QcqpInstance, opts: &CertifyOptions) -> CertificationReport {
    if let Err(e) = opts.validate() {
        return invalid_options_report(inst, opts, e);
    }
    let mut ctx = Context::new(inst, opts);
    let ok = ctx.forest();
    ctx.conclude(ok.then_some(Rule::ForestSystems));
    ctx.finish()
}

pub fn certify_bipartite(inst: &QcqpInstance, opts: &CertifyOptions) -> CertificationReport {
    if let Err(e) = opts.validate() {
        return invalid_options_report(inst, opts, e);
    }
    let mut ctx = Context::new(inst, opts);
    let fired = ctx.bipartite();
    ctx.conclude(fired);
    ctx.finish()
}

/// Full pipeline: sign rules, cycle condition, forest systems, bipartite
/// systems, sign-split route, then the relaxation rank as a fallback.
/// Every applicable rule is evaluated; the first that passes is applied.
pub fn certify(inst: &QcqpInstance, opts: &CertifyOptions) -> CertificationReport {
    if let Err(e) = opts.validate() {
        return invalid_options_report(inst, opts, e);
    }
    if inst.m() == 0 {
        let mut ctx = Context::new(inst, opts);
        ctx.report.notes.push(Error::NoConstraints.to_string());
        return ctx.report;
    }
    let mut ctx = Context::new(inst, opts);
    ctx.assumption();
    let mut passed = Vec::new();
    if let Some(r) = ctx.sign_pattern_rules() {
        passed.push(r);
    }
    if ctx.sign_cycle() {
        passed.push(Rule::SignCycle);
    }
    if ctx.forest() {
        passed.push(Rule::ForestSystems);
    }
    if let Some(r) = ctx.bipartite() {
        passed.push(r);
    }
    if ctx.sign_split() {
        passed.push(Rule::SignSplit);
    }
    match passed.first() {
        Some(&rule) => ctx.conclude(Some(rule)),
        None => ctx.fallback(),
    }
    ctx.finish()
}
