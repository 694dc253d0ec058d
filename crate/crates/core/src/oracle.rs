//! Exact solver for small binary placement instances, plus the greedy it
//! is compared against.
//!
//! An instance is a list of indivisible tasks, each with a per-node cost
//! (`None` where the node is outside the task's feasible set) and a compute
//! demand, and a capacity per node. The exact solver enumerates assignments
//! depth-first with a lower-bound prune; the prune only discards branches
//! that cannot beat the incumbent, so the result is the true optimum.

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::cost::raw_objective;
use crate::error::{Error, Result};
use crate::feasibility::feasible_set;
use crate::model::Model;
use crate::scenario::{ClassId, PolicyWeights};

pub const MAX_TASKS: usize = 10;
pub const MAX_NODES: usize = 5;
/// Range of per-node capacity, as a share of total instance demand, in
/// binding mode.
pub const BINDING_SHARE: (f64, f64) = (0.15, 0.6);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryTask {
    pub demand: f64,
    pub cost: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryInstance {
    pub tasks: Vec<BinaryTask>,
    pub capacity: Vec<f64>,
}

impl BinaryInstance {
    pub fn node_count(&self) -> usize {
        self.capacity.len()
    }

    /// Sum of task costs in task order; `None` if any task sits on an
    /// infeasible node.
    pub fn objective(&self, assignment: &[usize]) -> Option<f64> {
        let mut total = 0.0;
        for (task, &i) in self.tasks.iter().zip(assignment) {
            total += task.cost[i]?;
        }
        Some(total)
    }

    pub fn respects_capacity(&self, assignment: &[usize]) -> bool {
        let mut load = vec![0.0; self.node_count()];
        for (task, &i) in self.tasks.iter().zip(assignment) {
            load[i] += task.demand;
        }
        load.iter().zip(&self.capacity).all(|(l, c)| l <= c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleResult {
    Optimal {
        assignment: Vec<usize>,
        objective: f64,
    },
    Infeasible,
}

impl OracleResult {
    pub fn objective(&self) -> Option<f64> {
        match self {
            OracleResult::Optimal { objective, .. } => Some(*objective),
            OracleResult::Infeasible => None,
        }
    }
}

/// Globally optimal assignment under hard feasibility and hard capacity.
pub fn exact_oracle(inst: &BinaryInstance) -> Result<OracleResult> {
    if inst.tasks.len() > MAX_TASKS || inst.node_count() > MAX_NODES {
        return Err(Error::InvalidSpec(format!(
            "oracle instance is {} tasks x {} nodes, limit is {MAX_TASKS} x {MAX_NODES}",
            inst.tasks.len(),
            inst.node_count()
        )));
    }
    let n = inst.tasks.len();
    // Candidates per task, cheapest first, so good incumbents appear early.
    let mut candidates: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for task in &inst.tasks {
        let mut c: Vec<(usize, f64)> = task
            .cost
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
            .collect();
        if c.is_empty() {
            return Ok(OracleResult::Infeasible);
        }
        c.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        candidates.push(c);
    }
    // bound[k] = cheapest possible cost of tasks k..n ignoring capacity.
    let mut bound = vec![0.0; n + 1];
    for k in (0..n).rev() {
        bound[k] = bound[k + 1] + candidates[k][0].1;
    }

    let mut search = Search {
        inst,
        candidates: &candidates,
        bound: &bound,
        load: vec![0.0; inst.node_count()],
        current: Vec::with_capacity(n),
        best: None,
        best_cost: f64::INFINITY,
    };
    search.descend(0, 0.0);

    Ok(match search.best {
        Some(assignment) => {
            let objective = inst
                .objective(&assignment)
                .expect("search only uses feasible nodes");
            OracleResult::Optimal {
                assignment,
                objective,
            }
        }
        None => OracleResult::Infeasible,
    })
}

struct Search<'a> {
    inst: &'a BinaryInstance,
    candidates: &'a [Vec<(usize, f64)>],
    bound: &'a [f64],
    load: Vec<f64>,
    current: Vec<usize>,
    best: Option<Vec<usize>>,
    best_cost: f64,
}

impl Search<'_> {
    fn descend(&mut self, k: usize, partial: f64) {
        if k == self.candidates.len() {
            if partial < self.best_cost {
                self.best_cost = partial;
                self.best = Some(self.current.clone());
            }
            return;
        }
        let slack = 1e-12 * self.best_cost.abs().max(1.0);
        if partial + self.bound[k] > self.best_cost + slack {
            return;
        }
        let demand = self.inst.tasks[k].demand;
        for &(i, c) in &self.candidates[k] {
            if self.load[i] + demand > self.inst.capacity[i] {
                continue;
            }
            self.load[i] += demand;
            self.current.push(i);
            self.descend(k + 1, partial + c);
            self.current.pop();
            self.load[i] -= demand;
        }
    }
}

/// Ranked first-fit: each task, in order, takes its cheapest feasible node
/// that still has room for all of it. `None` if some task finds no room.
pub fn greedy(inst: &BinaryInstance) -> Option<(Vec<usize>, f64)> {
    let mut left = inst.capacity.clone();
    let mut assignment = Vec::with_capacity(inst.tasks.len());
    for task in &inst.tasks {
        let mut ranked: Vec<(usize, f64)> = task
            .cost
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let (i, _) = ranked.into_iter().find(|(i, _)| left[*i] >= task.demand)?;
        left[i] -= task.demand;
        assignment.push(i);
    }
    let objective = inst.objective(&assignment)?;
    Some((assignment, objective))
}

/// Outcome of running greedy and the exact solver on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub greedy: f64,
    pub optimal: f64,
}

impl Comparison {
    pub fn agrees(&self) -> bool {
        self.greedy == self.optimal
    }

    /// `(greedy - optimal) / |optimal|`, zero when both are zero.
    pub fn relative_gap(&self) -> f64 {
        let diff = self.greedy - self.optimal;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.optimal.abs().max(f64::MIN_POSITIVE)
        }
    }
}

/// `None` when either side has no feasible assignment.
pub fn compare(inst: &BinaryInstance) -> Result<Option<Comparison>> {
    let optimal = match exact_oracle(inst)? {
        OracleResult::Optimal { objective, .. } => objective,
        OracleResult::Infeasible => return Ok(None),
    };
    Ok(greedy(inst).map(|(_, greedy)| Comparison { greedy, optimal }))
}

/// One task of a sub-instance drawn from a scenario: a unit of `class`
/// arriving at service node `service`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    pub class: ClassId,
    pub service: usize,
}

/// Builds a binary instance over `nodes` with per-unit raw objective costs.
pub fn extract_instance(
    model: &Model<'_>,
    weights: &PolicyWeights,
    hour: usize,
    tasks: &[TaskSpec],
    nodes: &[usize],
    capacity: Vec<f64>,
) -> BinaryInstance {
    let tasks = tasks
        .iter()
        .map(|t| {
            let feasible = feasible_set(model, t.class, t.service, hour);
            let cost = nodes
                .iter()
                .map(|&i| {
                    feasible.indices().any(|f| f == i).then(|| {
                        raw_objective(model, t.class, t.service, i, hour, 1.0, weights)
                            .raw_objective
                    })
                })
                .collect();
            BinaryTask {
                demand: model.class(t.class).compute_demand,
                cost,
            }
        })
        .collect();
    BinaryInstance { tasks, capacity }
}

/// Capacity regime of sampled sub-instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    /// Every node can hold every task at once.
    NonBinding,
    /// Each node holds a random 15-60% of total task demand.
    Binding,
}

/// Draws a random sub-instance: a random hour among the first `hours`, up to
/// `MAX_NODES` distinct nodes, and up to `max_tasks` unit tasks whose service
/// node is hosted by one of the chosen nodes (so each task can always stay
/// home).
pub fn sample_instance<R: Rng + ?Sized>(
    model: &Model<'_>,
    weights: &PolicyWeights,
    rng: &mut R,
    hours: usize,
    max_tasks: usize,
    mode: CapacityMode,
) -> BinaryInstance {
    let max_tasks = max_tasks.clamp(1, MAX_TASKS);
    let hour = rng.gen_range(0..hours.clamp(1, model.cfg.horizon_hours));
    let node_count = model.node_count().min(MAX_NODES);
    let nodes: Vec<usize> = sample(rng, model.node_count(), node_count).into_vec();
    let services: Vec<usize> = (0..model.cfg.service_nodes.len())
        .filter(|&s| nodes.contains(&model.colocated(s)))
        .collect();
    let classes: Vec<ClassId> = model.cfg.classes.iter().map(|c| c.id).collect();
    let mut tasks: Vec<TaskSpec> = if services.is_empty() {
        Vec::new()
    } else {
        (0..rng.gen_range(1..=max_tasks))
            .map(|_| TaskSpec {
                class: classes[rng.gen_range(0..classes.len())],
                service: services[rng.gen_range(0..services.len())],
            })
            .collect()
    };
    // Same processing order as the production allocator.
    tasks.sort_by(|a, b| {
        a.class.cmp(&b.class).then_with(|| {
            model
                .service(a.service)
                .id
                .cmp(&model.service(b.service).id)
        })
    });
    let total: f64 = tasks
        .iter()
        .map(|t| model.class(t.class).compute_demand)
        .sum();
    let capacity = match mode {
        CapacityMode::NonBinding => vec![total; nodes.len()],
        CapacityMode::Binding => (0..nodes.len())
            .map(|_| total * rng.gen_range(BINDING_SHARE.0..BINDING_SHARE.1))
            .collect(),
    };
    extract_instance(model, weights, hour, &tasks, &nodes, capacity)
}

/// Aggregate of greedy against the exact solver over many sampled instances.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OracleSummary {
    pub instances: usize,
    /// Instances where both sides found a feasible assignment.
    pub compared: usize,
    pub agreements: usize,
    /// Instances with no feasible assignment at all.
    pub infeasible: usize,
    /// Feasible instances where first-fit got stuck.
    pub greedy_failures: usize,
    pub mean_relative_gap: f64,
    pub max_relative_gap: f64,
}

impl OracleSummary {
    pub fn agreement_rate(&self) -> f64 {
        if self.compared == 0 {
            1.0
        } else {
            self.agreements as f64 / self.compared as f64
        }
    }
}

/// Samples `instances` sub-instances with a ChaCha stream seeded by `seed`
/// and compares greedy with the exact solver on each.
pub fn oracle_check(
    model: &Model<'_>,
    weights: &PolicyWeights,
    instances: usize,
    hours: usize,
    max_tasks: usize,
    mode: CapacityMode,
    seed: u64,
) -> Result<OracleSummary> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleSummary {
        instances,
        ..OracleSummary::default()
    };
    let mut gap_sum = 0.0;
    for _ in 0..instances {
        let inst = sample_instance(model, weights, &mut rng, hours, max_tasks, mode);
        let optimal = match exact_oracle(&inst)? {
            OracleResult::Optimal { objective, .. } => objective,
            OracleResult::Infeasible => {
                out.infeasible += 1;
                continue;
            }
        };
        let Some((_, greedy)) = greedy(&inst) else {
            out.greedy_failures += 1;
            continue;
        };
        let c = Comparison { greedy, optimal };
        out.compared += 1;
        if c.agrees() {
            out.agreements += 1;
        }
        let gap = c.relative_gap();
        gap_sum += gap;
        out.max_relative_gap = out.max_relative_gap.max(gap);
    }
    if out.compared > 0 {
        out.mean_relative_gap = gap_sum / out.compared as f64;
    }
    Ok(out)
}
