//! Constraint evaluation under assignments, WCSP costs over S(k), solution
//! checking, exhaustive brute-force solving and recursive QCSP evaluation.
//!
//! Everything here is an oracle: simple, deterministic, exhaustive. The
//! solver enumerates variables in declaration order with values ascending,
//! checking each constraint as soon as its scope is fully bound, and prunes
//! WCSP branches whose partial cost already reaches the incumbent (sound
//! because the bounded sum is monotone). No propagation, no heuristics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::expr::{self, Value};
use crate::model::{
    ConstraintBody, ConstraintDef, ConstraintRef, Cost, Entity, Instance, InstanceType, ParamValue,
    Quantifier, Relation, RelationSemantics,
};

/// A (partial or total) mapping from variable names to values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    bindings: BTreeMap<String, i64>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Assignment {
        Assignment {
            bindings: pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        }
    }

    /// Parses `V0=2,V1=4` (commas or whitespace between bindings).
    pub fn parse(text: &str) -> Result<Assignment, String> {
        let mut bindings = BTreeMap::new();
        for part in text.split(|c: char| c == ',' || c.is_whitespace()) {
            if part.is_empty() {
                continue;
            }
            let Some((name, value)) = part.split_once('=') else {
                return Err(format!("`{part}` is not of the form name=value"));
            };
            let name = name.trim();
            let value: i64 = value
                .trim()
                .parse()
                .map_err(|_| format!("`{value}` is not an integer"))?;
            if bindings.insert(name.to_owned(), value).is_some() {
                return Err(format!("variable `{name}` bound twice"));
            }
        }
        Ok(Assignment { bindings })
    }

    pub fn bind(&mut self, name: &str, value: i64) {
        self.bindings.insert(name.to_owned(), value);
    }

    pub fn unbind(&mut self, name: &str) {
        self.bindings.remove(name);
    }

    pub fn get(&self, name: &str) -> Option<i64> {
        self.bindings.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, value) in &self.bindings {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{name}={value}")?;
            first = false;
        }
        Ok(())
    }
}

/// Result of checking a total assignment against an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionReport {
    Csp {
        satisfied: bool,
        /// Names of violated constraints, in declaration order.
        violated: Vec<String>,
    },
    Wcsp {
        total_cost: Cost,
        /// Strictly below the maximal cost k.
        consistent: bool,
    },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("variable `{0}` is not defined by the instance")]
    UnknownVariable(String),
    #[error("assignment is partial: `{0}` has no value")]
    PartialAssignment(String),
    #[error("value {value} is outside the domain of `{variable}`")]
    OutOfDomain { variable: String, value: i64 },
    #[error("global constraint `{0}` is not supported for evaluation")]
    UnsupportedGlobal(String),
    #[error("malformed parameters for `{global}`: {message}")]
    MalformedParams { global: String, message: String },
    #[error("task gives origin, duration and end with origin+duration != end")]
    InconsistentTask,
    #[error("reference `{0}` does not resolve")]
    UnresolvedReference(String),
    #[error("constraint `{0}` cannot be evaluated in this context")]
    NotEvaluable(String),
    #[error("cost function returned negative value {0}")]
    NegativeFunctionCost(i64),
    #[error("WCSP instance has no maximalCost")]
    MissingMaximalCost,
    #[error("instance type {0} is not supported by this operation")]
    BadInstanceType(&'static str),
    #[error(transparent)]
    Arithmetic(#[from] expr::EvalError),
}

// ---------------------------------------------------------------------------
// Constraint checking

/// Does `assignment` satisfy the constraint? The assignment must bind every
/// scope variable.
pub fn check_constraint(
    instance: &Instance,
    constraint: &ConstraintDef,
    assignment: &Assignment,
) -> Result<bool, EvalError> {
    match &constraint.reference {
        ConstraintRef::Global(name) => match &constraint.body {
            ConstraintBody::Global(params) => eval_global(name, params, assignment),
            _ => Err(EvalError::NotEvaluable(constraint.name.as_str().to_owned())),
        },
        ConstraintRef::Named(target) => match instance.resolve(target.as_str()) {
            Ok(Entity::Relation(relation)) => {
                let tuple = scope_tuple(constraint, assignment)?;
                Ok(match relation.semantics {
                    RelationSemantics::Supports => relation.tuples.contains(&tuple),
                    RelationSemantics::Conflicts => !relation.tuples.contains(&tuple),
                    RelationSemantics::Soft => {
                        return Err(EvalError::NotEvaluable(constraint.name.as_str().to_owned()))
                    }
                })
            }
            Ok(Entity::Predicate(predicate)) => {
                let bindings = bind_effective(
                    constraint,
                    predicate.params.iter().map(|p| p.name.as_str()),
                    assignment,
                )?;
                match expr::evaluate(&predicate.body, &bindings)? {
                    Value::Bool(b) => Ok(b),
                    Value::Int(_) => {
                        Err(EvalError::NotEvaluable(constraint.name.as_str().to_owned()))
                    }
                }
            }
            Ok(Entity::Function(_)) => {
                Err(EvalError::NotEvaluable(constraint.name.as_str().to_owned()))
            }
            _ => Err(EvalError::UnresolvedReference(target.as_str().to_owned())),
        },
    }
}

fn scope_tuple(constraint: &ConstraintDef, assignment: &Assignment) -> Result<Vec<i64>, EvalError> {
    constraint
        .scope
        .iter()
        .map(|var| {
            assignment
                .get(var.as_str())
                .ok_or_else(|| EvalError::UnboundVariable(var.as_str().to_owned()))
        })
        .collect()
}

/// Substitutes effective parameters into formal slots: integers stand for
/// themselves, variable references take their assigned value.
fn bind_effective<'a>(
    constraint: &ConstraintDef,
    formals: impl Iterator<Item = &'a str>,
    assignment: &Assignment,
) -> Result<HashMap<String, i64>, EvalError> {
    let ConstraintBody::Intension(params) = &constraint.body else {
        return Err(EvalError::NotEvaluable(constraint.name.as_str().to_owned()));
    };
    let formals: Vec<&str> = formals.collect();
    if formals.len() != params.len() {
        return Err(EvalError::MalformedParams {
            global: constraint.name.as_str().to_owned(),
            message: format!(
                "{} effective parameter(s) for {} formal(s)",
                params.len(),
                formals.len()
            ),
        });
    }
    let mut bindings = HashMap::with_capacity(formals.len());
    for (formal, param) in formals.iter().zip(params) {
        let value = match param {
            crate::model::EffectiveParam::Int(v) => *v,
            crate::model::EffectiveParam::Var(var) => assignment
                .get(var.as_str())
                .ok_or_else(|| EvalError::UnboundVariable(var.as_str().to_owned()))?,
        };
        bindings.insert((*formal).to_owned(), value);
    }
    Ok(bindings)
}

// ---------------------------------------------------------------------------
// Global constraints

/// Evaluates one of the supported globals (name compared
/// case-insensitively): allDifferent, weightedSum, element, cumulative.
pub fn eval_global(
    name: &str,
    params: &[ParamValue],
    assignment: &Assignment,
) -> Result<bool, EvalError> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "alldifferent" => eval_alldifferent(params, assignment),
        "weightedsum" => eval_weighted_sum(params, assignment),
        "element" => eval_element(params, assignment),
        "cumulative" => eval_cumulative(params, assignment),
        _ => Err(EvalError::UnsupportedGlobal(name.to_owned())),
    }
}

fn malformed(global: &str, message: impl Into<String>) -> EvalError {
    EvalError::MalformedParams {
        global: global.to_owned(),
        message: message.into(),
    }
}

/// The value of a `dvar`-shaped parameter: a variable reference takes its
/// assigned value; an integer constant is bound to itself.
fn dvar_value(param: &ParamValue, assignment: &Assignment) -> Result<i64, EvalError> {
    match param {
        ParamValue::Int(v) => Ok(*v),
        ParamValue::Var(var) => assignment
            .get(var.as_str())
            .ok_or_else(|| EvalError::UnboundVariable(var.as_str().to_owned())),
        other => Err(malformed(
            "parameter",
            format!("expected an integer or variable, found {other:?}"),
        )),
    }
}

/// A single-attribute collection item: a bare value or a one-key dictionary.
fn collection_item_value(
    item: &ParamValue,
    key: &str,
    assignment: &Assignment,
) -> Result<i64, EvalError> {
    match item {
        ParamValue::Dict(dict) => match dict.get(key) {
            Some(value) => dvar_value(value, assignment),
            None => Err(malformed("collection", format!("missing `{key}` entry"))),
        },
        _ => dvar_value(item, assignment),
    }
}

fn eval_alldifferent(params: &[ParamValue], assignment: &Assignment) -> Result<bool, EvalError> {
    let [ParamValue::List(items)] = params else {
        return Err(malformed(
            "allDifferent",
            "expected a single list of variables",
        ));
    };
    let mut seen = HashSet::with_capacity(items.len());
    for item in items {
        let value = collection_item_value(item, "var", assignment)?;
        if !seen.insert(value) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn eval_weighted_sum(params: &[ParamValue], assignment: &Assignment) -> Result<bool, EvalError> {
    let [ParamValue::List(items), ParamValue::Atom(op), bound] = params else {
        return Err(malformed(
            "weightedSum",
            "expected a list of {coef var} dictionaries, an operator atom and an integer",
        ));
    };
    let bound = match bound {
        ParamValue::Int(b) => *b,
        other => {
            return Err(malformed(
                "weightedSum",
                format!("the bound must be an integer constant, found {other:?}"),
            ))
        }
    };
    let mut sum: i64 = 0;
    for item in items {
        let ParamValue::Dict(dict) = item else {
            return Err(malformed("weightedSum", "sum terms must be dictionaries"));
        };
        let coef = match dict.get("coef") {
            Some(ParamValue::Int(c)) => *c,
            Some(other) => {
                return Err(malformed(
                    "weightedSum",
                    format!("`coef` must be an integer constant, found {other:?}"),
                ))
            }
            None => return Err(malformed("weightedSum", "missing `coef` entry")),
        };
        let var = dict
            .get("var")
            .ok_or_else(|| malformed("weightedSum", "missing `var` entry"))?;
        let value = dvar_value(var, assignment)?;
        let term = coef
            .checked_mul(value)
            .ok_or(expr::EvalError::Overflow("mul"))?;
        sum = sum
            .checked_add(term)
            .ok_or(expr::EvalError::Overflow("add"))?;
    }
    Ok(op.apply(sum, bound))
}

/// `element(INDEX, TABLE, VALUE)` with 1-based indexing; an index outside
/// `1..=|TABLE|` makes the constraint false rather than erroring, since the
/// index is a decision variable whose domain may exceed the table.
fn eval_element(params: &[ParamValue], assignment: &Assignment) -> Result<bool, EvalError> {
    let [index, ParamValue::List(table), value] = params else {
        return Err(malformed(
            "element",
            "expected an index, a table list and a value",
        ));
    };
    let index = dvar_value(index, assignment)?;
    let value = dvar_value(value, assignment)?;
    if index < 1 || index as usize > table.len() {
        return Ok(false);
    }
    let cell = collection_item_value(&table[index as usize - 1], "value", assignment)?;
    Ok(cell == value)
}

/// `cumulative(TASKS, LIMIT)`: at most one of origin/duration/end may be
/// missing per task (derived from origin + duration = end); tasks with
/// negative duration or height make the constraint false; the resource usage
/// at every integer time point must not exceed the limit. Task intervals are
/// half-open `[origin, end)`.
fn eval_cumulative(params: &[ParamValue], assignment: &Assignment) -> Result<bool, EvalError> {
    let [ParamValue::List(tasks), limit] = params else {
        return Err(malformed("cumulative", "expected a task list and a limit"));
    };
    let limit = dvar_value(limit, assignment)?;
    let mut placed: Vec<(i64, i64, i64)> = Vec::with_capacity(tasks.len());
    for task in tasks {
        let ParamValue::Dict(dict) = task else {
            return Err(malformed("cumulative", "tasks must be dictionaries"));
        };
        let get = |key: &str| -> Result<Option<i64>, EvalError> {
            match dict.get(key) {
                Some(v) => dvar_value(v, assignment).map(Some),
                None => Ok(None),
            }
        };
        let origin = get("origin")?;
        let duration = get("duration")?;
        let end = get("end")?;
        let height = get("height")?
            .ok_or_else(|| malformed("cumulative", "every task requires a height"))?;
        let (origin, duration, end) = match (origin, duration, end) {
            (Some(o), Some(d), Some(e)) => {
                if o + d != e {
                    return Err(EvalError::InconsistentTask);
                }
                (o, d, e)
            }
            (Some(o), Some(d), None) => (o, d, o + d),
            (Some(o), None, Some(e)) => (o, e - o, e),
            (None, Some(d), Some(e)) => (e - d, d, e),
            _ => {
                return Err(malformed(
                    "cumulative",
                    "at most one of origin, duration and end may be missing",
                ))
            }
        };
        if duration < 0 || height < 0 {
            return Ok(false);
        }
        if duration > 0 {
            placed.push((origin, end, height));
        }
    }
    let Some(start) = placed.iter().map(|(o, _, _)| *o).min() else {
        return Ok(true);
    };
    let end = placed.iter().map(|(_, e, _)| *e).max().unwrap();
    for t in start..end {
        let load: i64 = placed
            .iter()
            .filter(|(o, e, _)| *o <= t && t < *e)
            .map(|(_, _, h)| *h)
            .sum();
        if load > limit {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// WCSP costs

/// The cost a constraint contributes under the assignment: soft relations
/// look the tuple up (or fall back to the default cost); hard constraints
/// cost 0 when satisfied and k otherwise; cost functions evaluate their body,
/// clamped into [0..k].
pub fn cost_constraint(
    instance: &Instance,
    constraint: &ConstraintDef,
    assignment: &Assignment,
) -> Result<Cost, EvalError> {
    let k = instance.maximal_cost.ok_or(EvalError::MissingMaximalCost)?;
    if let ConstraintRef::Named(target) = &constraint.reference {
        match instance.resolve(target.as_str()) {
            Ok(Entity::Relation(relation)) if relation.semantics == RelationSemantics::Soft => {
                let tuple = scope_tuple(constraint, assignment)?;
                return Ok(soft_cost(relation, &tuple).min(k));
            }
            Ok(Entity::Function(function)) => {
                let bindings = bind_effective(
                    constraint,
                    function.params.iter().map(|p| p.name.as_str()),
                    assignment,
                )?;
                let value = match expr::evaluate(&function.body, &bindings)? {
                    Value::Int(v) => v,
                    Value::Bool(_) => {
                        return Err(EvalError::NotEvaluable(constraint.name.as_str().to_owned()))
                    }
                };
                if value < 0 {
                    return Err(EvalError::NegativeFunctionCost(value));
                }
                return Ok(Cost::Finite(value as u64).min(k));
            }
            _ => {}
        }
    }
    // hard constraint: 0 when satisfied, the maximal cost otherwise
    Ok(if check_constraint(instance, constraint, assignment)? {
        Cost::ZERO
    } else {
        k
    })
}

fn soft_cost(relation: &Relation, tuple: &[i64]) -> Cost {
    let costs = relation
        .costs
        .as_ref()
        .expect("soft relation carries costs");
    for (candidate, cost) in relation.tuples.iter().zip(costs) {
        if candidate == tuple {
            return *cost;
        }
    }
    relation
        .default_cost
        .expect("soft relation carries a default cost")
}

// ---------------------------------------------------------------------------
// Solution checking

/// Checks a total assignment. CSP instances report the violated constraints;
/// WCSP instances report the total cost under S(k) and its consistency
/// (strictly below k).
pub fn check_solution(
    instance: &Instance,
    assignment: &Assignment,
) -> Result<SolutionReport, EvalError> {
    for (name, value) in assignment.iter() {
        let Some(domain) = instance.domain_of(name) else {
            return Err(EvalError::UnknownVariable(name.to_owned()));
        };
        if !domain.contains(value) {
            return Err(EvalError::OutOfDomain {
                variable: name.to_owned(),
                value,
            });
        }
    }
    for variable in &instance.variables {
        if assignment.get(variable.name.as_str()).is_none() {
            return Err(EvalError::PartialAssignment(
                variable.name.as_str().to_owned(),
            ));
        }
    }
    match instance.presentation.instance_type {
        InstanceType::Csp => {
            let mut violated = Vec::new();
            for constraint in &instance.constraints {
                if !check_constraint(instance, constraint, assignment)? {
                    violated.push(constraint.name.as_str().to_owned());
                }
            }
            Ok(SolutionReport::Csp {
                satisfied: violated.is_empty(),
                violated,
            })
        }
        InstanceType::Wcsp => {
            let k = instance.maximal_cost.ok_or(EvalError::MissingMaximalCost)?;
            let mut total = instance.initial_cost.min(k);
            for constraint in &instance.constraints {
                let cost = cost_constraint(instance, constraint, assignment)?;
                total = total.oplus(cost, k);
            }
            Ok(SolutionReport::Wcsp {
                total_cost: total,
                consistent: total < k,
            })
        }
        other => Err(EvalError::BadInstanceType(other.as_str())),
    }
}

// ---------------------------------------------------------------------------
// Brute-force solving

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SolveMode {
    First,
    All,
    Count,
    MinCost,
}

/// Node budget for the exhaustive search; one node is one value binding.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(10_000_000)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// First or All: solutions in depth-first order.
    Assignments(Vec<Assignment>),
    Count(u64),
    MinCost {
        cost: Cost,
        assignment: Assignment,
    },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("node budget exhausted after {explored} nodes")]
    BudgetExceeded {
        explored: u64,
        /// Progress at the point of interruption.
        partial: Box<SolveResult>,
    },
    #[error("mode is not compatible with a {0} instance")]
    BadMode(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Exhaustive depth-first search over all total assignments: variables in
/// declaration order, values ascending. Deterministic; `MinCost` prunes
/// branches whose partial cost already reaches the incumbent.
pub fn solve_bruteforce(
    instance: &Instance,
    mode: SolveMode,
    budget: Budget,
) -> Result<SolveResult, SolveError> {
    let ty = instance.presentation.instance_type;
    match (ty, mode) {
        (InstanceType::Csp, SolveMode::First | SolveMode::All | SolveMode::Count) => {}
        (InstanceType::Wcsp, _) => {}
        (other, _) => return Err(SolveError::BadMode(other.as_str())),
    }
    if ty == InstanceType::Csp && mode == SolveMode::MinCost {
        return Err(SolveError::BadMode(ty.as_str()));
    }
    let mut search = Search::prepare(instance, mode, budget)?;
    let complete = search.run()?;
    search.finish(complete)
}

struct Search<'a> {
    instance: &'a Instance,
    mode: SolveMode,
    budget: u64,
    nodes: u64,
    /// For each depth, the constraints whose scope becomes fully bound there.
    schedule: Vec<Vec<&'a ConstraintDef>>,
    order: Vec<&'a str>,
    domains: Vec<&'a [i64]>,
    assignment: Assignment,
    wcsp: Option<Cost>,
    // accumulating results
    solutions: Vec<Assignment>,
    count: u64,
    best: Option<(Cost, Assignment)>,
}

enum Flow {
    /// The subtree was fully explored.
    Exhausted,
    /// First mode found its solution.
    FoundFirst,
    /// The node budget ran out.
    Budget,
}

impl<'a> Search<'a> {
    fn prepare(
        instance: &'a Instance,
        mode: SolveMode,
        budget: Budget,
    ) -> Result<Search<'a>, SolveError> {
        let order: Vec<&str> = instance.variables.iter().map(|v| v.name.as_str()).collect();
        let position: HashMap<&str, usize> = order
            .iter()
            .enumerate()
            .map(|(i, name)| (*name, i))
            .collect();
        let mut domains = Vec::with_capacity(order.len());
        for variable in &instance.variables {
            let domain = instance.domain_of(variable.name.as_str()).ok_or_else(|| {
                EvalError::UnresolvedReference(variable.domain.as_str().to_owned())
            })?;
            domains.push(domain.values.as_slice());
        }
        let mut schedule: Vec<Vec<&ConstraintDef>> = vec![Vec::new(); order.len()];
        for constraint in &instance.constraints {
            let mut last = 0usize;
            for var in &constraint.scope {
                let Some(p) = position.get(var.as_str()) else {
                    return Err(EvalError::UnresolvedReference(var.as_str().to_owned()).into());
                };
                last = last.max(*p);
            }
            if !schedule.is_empty() {
                schedule[last].push(constraint);
            }
        }
        let wcsp = if instance.presentation.instance_type == InstanceType::Wcsp {
            Some(instance.maximal_cost.ok_or(EvalError::MissingMaximalCost)?)
        } else {
            None
        };
        Ok(Search {
            instance,
            mode,
            budget: budget.0,
            nodes: 0,
            schedule,
            order,
            domains,
            assignment: Assignment::new(),
            wcsp,
            solutions: Vec::new(),
            count: 0,
            best: None,
        })
    }

    /// Runs to exhaustion (or first solution); Ok(true) means complete.
    fn run(&mut self) -> Result<bool, EvalError> {
        let initial = match self.wcsp {
            Some(k) => self.instance.initial_cost.min(k),
            None => Cost::ZERO,
        };
        match self.descend(0, initial)? {
            Flow::Exhausted | Flow::FoundFirst => Ok(true),
            Flow::Budget => Ok(false),
        }
    }

    fn finish(mut self, complete: bool) -> Result<SolveResult, SolveError> {
        let result = match self.mode {
            SolveMode::First | SolveMode::All => {
                SolveResult::Assignments(std::mem::take(&mut self.solutions))
            }
            SolveMode::Count => SolveResult::Count(self.count),
            SolveMode::MinCost => match self.best.take() {
                Some((cost, assignment)) => SolveResult::MinCost { cost, assignment },
                // domains are nonempty, so a complete search always reaches
                // a leaf; reaching none means the budget cut it short
                None => {
                    return Err(SolveError::BudgetExceeded {
                        explored: self.nodes,
                        partial: Box::new(SolveResult::Count(self.count)),
                    })
                }
            },
        };
        if complete {
            Ok(result)
        } else {
            Err(SolveError::BudgetExceeded {
                explored: self.nodes,
                partial: Box::new(result),
            })
        }
    }

    fn descend(&mut self, depth: usize, cost_so_far: Cost) -> Result<Flow, EvalError> {
        if depth == self.order.len() {
            return Ok(self.leaf(cost_so_far));
        }
        for &value in self.domains[depth] {
            if self.nodes >= self.budget {
                return Ok(Flow::Budget);
            }
            self.nodes += 1;
            self.assignment.bind(self.order[depth], value);
            let flow = match self.enter(depth, cost_so_far) {
                Ok(Some(cost)) => self.descend(depth + 1, cost),
                Ok(None) => Ok(Flow::Exhausted), // pruned
                Err(e) => Err(e),
            };
            self.assignment.unbind(self.order[depth]);
            match flow? {
                Flow::Exhausted => {}
                stop => return Ok(stop),
            }
        }
        Ok(Flow::Exhausted)
    }

    /// Checks the constraints completed at this depth; `None` prunes the
    /// branch, `Some(cost)` carries the updated partial cost downward.
    fn enter(&mut self, depth: usize, cost_so_far: Cost) -> Result<Option<Cost>, EvalError> {
        match self.wcsp {
            None => {
                for constraint in &self.schedule[depth] {
                    if !check_constraint(self.instance, constraint, &self.assignment)? {
                        return Ok(None);
                    }
                }
                Ok(Some(cost_so_far))
            }
            Some(k) => {
                let mut cost = cost_so_far;
                for constraint in &self.schedule[depth] {
                    let c = cost_constraint(self.instance, constraint, &self.assignment)?;
                    cost = cost.oplus(c, k);
                }
                let prune = match self.mode {
                    // the bounded sum is monotone nondecreasing, so a partial
                    // cost at or above the incumbent cannot improve
                    SolveMode::MinCost => match &self.best {
                        Some((best, _)) => cost >= *best,
                        None => false,
                    },
                    // other modes enumerate consistent assignments (< k)
                    _ => cost >= k,
                };
                Ok(if prune { None } else { Some(cost) })
            }
        }
    }

    fn leaf(&mut self, cost: Cost) -> Flow {
        match self.mode {
            SolveMode::First => {
                self.solutions.push(self.assignment.clone());
                Flow::FoundFirst
            }
            SolveMode::All => {
                self.solutions.push(self.assignment.clone());
                Flow::Exhausted
            }
            SolveMode::Count => {
                self.count += 1;
                Flow::Exhausted
            }
            SolveMode::MinCost => {
                let better = match &self.best {
                    Some((best, _)) => cost < *best,
                    None => true,
                };
                if better {
                    self.best = Some((cost, self.assignment.clone()));
                }
                Flow::Exhausted
            }
        }
    }
}

// ---------------------------------------------------------------------------
// QCSP evaluation

/// Recursive left-to-right evaluation of the quantification prefix. A forall
/// block holds when every restriction-satisfying combination of its scope
/// makes the remainder hold; an exists block when some combination does. At
/// the innermost level every goal constraint must hold.
pub fn eval_qcsp(instance: &Instance, budget: Budget) -> Result<bool, SolveError> {
    if !instance.presentation.instance_type.is_quantified() {
        return Err(SolveError::BadMode(
            instance.presentation.instance_type.as_str(),
        ));
    }
    let Some(blocks) = &instance.quantification else {
        return Err(EvalError::BadInstanceType("missing quantification").into());
    };
    let mut quantified: HashSet<&str> = HashSet::new();
    for block in blocks {
        for var in &block.scope {
            quantified.insert(var.as_str());
        }
    }
    for variable in &instance.variables {
        if !quantified.contains(variable.name.as_str()) {
            // the instance is open; no free variables are allowed
            return Err(EvalError::UnboundVariable(variable.name.as_str().to_owned()).into());
        }
    }
    let mut eval = QcspEval {
        instance,
        blocks,
        budget: budget.0,
        nodes: 0,
        assignment: Assignment::new(),
    };
    eval.block(0)
}

struct QcspEval<'a> {
    instance: &'a Instance,
    blocks: &'a [crate::model::QuantBlock],
    budget: u64,
    nodes: u64,
    assignment: Assignment,
}

impl QcspEval<'_> {
    fn block(&mut self, index: usize) -> Result<bool, SolveError> {
        if index == self.blocks.len() {
            for constraint in &self.instance.constraints {
                if !check_constraint(self.instance, constraint, &self.assignment)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let block = &self.blocks[index];
        let names: Vec<&str> = block.scope.iter().map(|s| s.as_str()).collect();
        let domains: Vec<&[i64]> = block
            .scope
            .iter()
            .map(|var| {
                self.instance
                    .domain_of(var.as_str())
                    .map(|d| d.values.as_slice())
                    .ok_or_else(|| EvalError::UnresolvedReference(var.as_str().to_owned()))
            })
            .collect::<Result<_, _>>()?;
        let result = self.combinations(index, block, &names, &domains, 0);
        for name in &names {
            self.assignment.unbind(name);
        }
        result
    }

    /// Enumerates the block's scope jointly, in scope order with values
    /// ascending; forall short-circuits on a failing admissible combination,
    /// exists on a succeeding one.
    fn combinations(
        &mut self,
        index: usize,
        block: &crate::model::QuantBlock,
        names: &[&str],
        domains: &[&[i64]],
        position: usize,
    ) -> Result<bool, SolveError> {
        if position == names.len() {
            let mut admissible = true;
            for restriction in &block.restrictions {
                if !check_constraint(self.instance, restriction, &self.assignment)? {
                    admissible = false;
                    break;
                }
            }
            if !admissible {
                // a forall block skips inadmissible combinations; an exists
                // block cannot use them
                return Ok(block.quantifier == Quantifier::Forall);
            }
            let inner = self.block(index + 1)?;
            return Ok(inner);
        }
        for &value in domains[position] {
            if self.nodes >= self.budget {
                return Err(SolveError::BudgetExceeded {
                    explored: self.nodes,
                    partial: Box::new(SolveResult::Count(0)),
                });
            }
            self.nodes += 1;
            self.assignment.bind(names[position], value);
            let holds = self.combinations(index, block, names, domains, position + 1)?;
            match block.quantifier {
                Quantifier::Forall if !holds => {
                    return Ok(false);
                }
                Quantifier::Exists if holds => {
                    return Ok(true);
                }
                _ => {}
            }
        }
        // forall exhausted without failure; exists found no witness
        Ok(block.quantifier == Quantifier::Forall)
    }
}
