//! Structural validation beyond load-time syntax checks, plus the
//! competition-strict mode implementing the restrictions imposed on
//! competition instances.
//!
//! Both validators are pure functions over an immutable [`Instance`] and
//! report findings as [`Diagnostic`]s; they never abort. The loader runs
//! [`validate_structure`] as its final step, so a successfully loaded
//! instance always satisfies the structural rules.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::catalog;
use crate::document::{codes, Diagnostic, Severity};
use crate::expr::{self, ExprType};
use crate::model::{
    ConstraintBody, ConstraintDef, ConstraintRef, Cost, Entity, Instance, InstanceType, ParamValue,
    Relation, RelationSemantics,
};

/// The outcome of a validation run. `passed` holds exactly when no
/// diagnostic has error severity.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub strict_mode: bool,
    pub passed: bool,
}

impl ValidationReport {
    fn new(diagnostics: Vec<Diagnostic>, strict_mode: bool) -> ValidationReport {
        let passed = !diagnostics.iter().any(|d| d.is_error());
        ValidationReport {
            diagnostics,
            strict_mode,
            passed,
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    /// Line-oriented human format: one line per diagnostic plus a verdict.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&d.to_string());
            out.push('\n');
        }
        out.push_str(if self.passed { "passed\n" } else { "failed\n" });
        out
    }

    /// Machine format: a single JSON document.
    pub fn to_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Options for [`validate_competition_with`].
#[derive(Copy, Clone, Debug, Default)]
pub struct CompetitionOptions {
    /// Escalate naming-convention and presentation-content findings from
    /// warnings to errors.
    pub escalate_conventions: bool,
    /// Emit an informational hint when adjacent constraints share a
    /// normalized scope and could be merged.
    pub suggest_merges: bool,
}

/// Checks every structural rule an instance must satisfy: reference
/// resolution and kinds, arities and parameter counts, scope coverage,
/// body typing, soft-relation consistency, WCSP cost bounds and the
/// quantification rules.
pub fn validate_structure(instance: &Instance) -> ValidationReport {
    let mut v = Checker::default();
    v.structure(instance);
    ValidationReport::new(v.diagnostics, false)
}

/// Competition-strict validation with default options: every boxed
/// restriction of the competition subset, on top of the structural checks.
pub fn validate_competition(instance: &Instance) -> ValidationReport {
    validate_competition_with(instance, CompetitionOptions::default())
}

pub fn validate_competition_with(
    instance: &Instance,
    options: CompetitionOptions,
) -> ValidationReport {
    let mut v = Checker::default();
    v.structure(instance);
    let structure_passed = !v.diagnostics.iter().any(|d| d.is_error());
    if structure_passed {
        v.competition(instance, options);
    }
    ValidationReport::new(v.diagnostics, true)
}

#[derive(Default)]
struct Checker {
    diagnostics: Vec<Diagnostic>,
}

impl Checker {
    fn error(&mut self, code: &'static str, path: String, message: String) {
        self.diagnostics
            .push(Diagnostic::error(code, path, 0, message));
    }

    fn warning(&mut self, code: &'static str, path: String, message: String) {
        self.diagnostics
            .push(Diagnostic::warning(code, path, 0, message));
    }

    fn finding(&mut self, escalate: bool, code: &'static str, path: String, message: String) {
        let severity = if escalate {
            Severity::Error
        } else {
            Severity::Warning
        };
        self.diagnostics.push(Diagnostic {
            severity,
            code,
            path,
            offset: 0,
            message,
        });
    }

    // -- structural rules ------------------------------------------------

    fn structure(&mut self, instance: &Instance) {
        for domain in &instance.domains {
            if domain.values.is_empty() {
                self.error(
                    codes::EMPTY_DOMAIN_VALUES,
                    format!("instance/domains/domain[{}]", domain.name),
                    "domain has no values".to_owned(),
                );
            }
        }
        for variable in &instance.variables {
            let path = format!("instance/variables/variable[{}]", variable.name);
            match instance.resolve(variable.domain.as_str()) {
                Ok(Entity::Domain(_)) => {}
                Ok(other) => self.error(
                    codes::WRONG_REFERENCE_KIND,
                    path,
                    format!(
                        "`{}` names a {}, not a domain",
                        variable.domain,
                        other.kind()
                    ),
                ),
                Err(_) => self.error(
                    codes::UNRESOLVED_REFERENCE,
                    path,
                    format!("domain `{}` is not defined", variable.domain),
                ),
            }
        }
        for relation in &instance.relations {
            self.relation_structure(instance, relation);
        }
        for predicate in &instance.predicates {
            let path = format!("instance/predicates/predicate[{}]", predicate.name);
            let formals: Vec<_> = predicate.params.iter().map(|p| p.name.clone()).collect();
            match expr::typecheck(&predicate.body, &formals) {
                Ok(ExprType::Bool) => {}
                Ok(ExprType::Int) => self.error(
                    codes::PREDICATE_NOT_BOOLEAN,
                    path,
                    "a predicate expression must be Boolean-typed".to_owned(),
                ),
                Err(e) => self.lift_expr_error(&e, path),
            }
        }
        for function in &instance.functions {
            let path = format!("instance/functions/function[{}]", function.name);
            let formals: Vec<_> = function.params.iter().map(|p| p.name.clone()).collect();
            match expr::typecheck(&function.body, &formals) {
                Ok(ExprType::Int) => {}
                Ok(ExprType::Bool) => self.error(
                    codes::FUNCTION_NOT_INTEGER,
                    path.clone(),
                    "a cost function must return an integer value".to_owned(),
                ),
                Err(e) => self.lift_expr_error(&e, path),
            }
        }
        if !instance.functions.is_empty()
            && instance.presentation.instance_type != InstanceType::Wcsp
        {
            self.error(
                codes::FUNCTION_OUTSIDE_WCSP,
                "instance/functions".to_owned(),
                "cost functions only apply to WCSP instances".to_owned(),
            );
        }
        for constraint in &instance.constraints {
            let path = format!("instance/constraints/constraint[{}]", constraint.name);
            self.constraint_structure(instance, constraint, &path);
        }
        self.wcsp_structure(instance);
        self.quantification_structure(instance);
    }

    fn lift_expr_error(&mut self, e: &expr::ExprError, path: String) {
        let code = match e {
            expr::ExprError::Syntax { .. } => codes::EXPR_SYNTAX,
            expr::ExprError::WrongArity { .. } => codes::WRONG_ARITY,
            expr::ExprError::TypeMismatch { .. } => codes::TYPE_MISMATCH,
            expr::ExprError::UnboundParameter(_) => codes::UNBOUND_PARAMETER,
        };
        self.error(code, path, e.to_string());
    }

    fn relation_structure(&mut self, instance: &Instance, relation: &Relation) {
        let path = format!("instance/relations/relation[{}]", relation.name);
        for (i, tuple) in relation.tuples.iter().enumerate() {
            if tuple.len() != relation.arity {
                self.error(
                    codes::TUPLE_ARITY,
                    path.clone(),
                    format!(
                        "tuple {i} has {} value(s) but the relation arity is {}",
                        tuple.len(),
                        relation.arity
                    ),
                );
                break;
            }
        }
        let soft = relation.semantics == RelationSemantics::Soft;
        if soft != relation.costs.is_some() || soft != relation.default_cost.is_some() {
            self.error(
                codes::SOFT_COSTS_MISMATCH,
                path.clone(),
                "per-tuple costs and defaultCost are present exactly for soft relations".to_owned(),
            );
        } else if let Some(costs) = &relation.costs {
            if costs.len() != relation.tuples.len() {
                self.error(
                    codes::SOFT_COSTS_MISMATCH,
                    path.clone(),
                    format!("{} costs for {} tuples", costs.len(), relation.tuples.len()),
                );
            }
        }
        if soft && instance.presentation.instance_type != InstanceType::Wcsp {
            self.error(
                codes::SOFT_RELATION_OUTSIDE_WCSP,
                path,
                "soft relations only apply to WCSP instances".to_owned(),
            );
        }
    }

    fn constraint_structure(&mut self, instance: &Instance, c: &ConstraintDef, path: &str) {
        if c.scope.is_empty() {
            self.error(
                codes::EMPTY_SCOPE,
                path.to_owned(),
                "constraint arity must be at least 1".to_owned(),
            );
        }
        let mut seen = HashSet::new();
        for var in &c.scope {
            if !seen.insert(var.as_str()) {
                self.error(
                    codes::DUPLICATE_SCOPE_VARIABLE,
                    path.to_owned(),
                    format!("variable `{var}` appears twice in the scope"),
                );
            }
            match instance.resolve(var.as_str()) {
                Ok(Entity::Variable(_)) => {}
                Ok(other) => self.error(
                    codes::WRONG_REFERENCE_KIND,
                    path.to_owned(),
                    format!(
                        "scope entry `{var}` names a {}, not a variable",
                        other.kind()
                    ),
                ),
                Err(_) => self.error(
                    codes::UNRESOLVED_REFERENCE,
                    path.to_owned(),
                    format!("scope variable `{var}` is not defined"),
                ),
            }
        }
        if let Some(declared) = c.declared_arity {
            if declared != c.scope.len() as u64 {
                self.error(
                    codes::ARITY_ATTR_MISMATCH,
                    path.to_owned(),
                    format!(
                        "arity attribute says {declared} but the scope has {} variable(s)",
                        c.scope.len()
                    ),
                );
            }
        }
        match &c.reference {
            ConstraintRef::Global(_) => {
                if !matches!(c.body, ConstraintBody::Global(_)) {
                    self.error(
                        codes::WRONG_REFERENCE_KIND,
                        path.to_owned(),
                        "a global reference requires structured parameters".to_owned(),
                    );
                }
            }
            ConstraintRef::Named(target) => match instance.resolve(target.as_str()) {
                Ok(Entity::Relation(relation)) => {
                    if !matches!(c.body, ConstraintBody::Extension) {
                        self.error(
                            codes::WRONG_REFERENCE_KIND,
                            path.to_owned(),
                            "an extension constraint has an empty body".to_owned(),
                        );
                    }
                    if relation.arity != c.scope.len() {
                        self.error(
                            codes::EXTENSION_ARITY,
                            path.to_owned(),
                            format!(
                                "relation `{}` has arity {} but the constraint scope has {} variable(s)",
                                relation.name,
                                relation.arity,
                                c.scope.len()
                            ),
                        );
                    }
                }
                Ok(Entity::Predicate(p)) => {
                    self.intension_structure(c, p.params.len(), path);
                }
                Ok(Entity::Function(f)) => {
                    self.intension_structure(c, f.params.len(), path);
                }
                Ok(other) => self.error(
                    codes::WRONG_REFERENCE_KIND,
                    path.to_owned(),
                    format!(
                        "`{target}` names a {}; expected a relation, predicate or function",
                        other.kind()
                    ),
                ),
                Err(_) => self.error(
                    codes::UNRESOLVED_REFERENCE,
                    path.to_owned(),
                    format!("reference `{target}` is not defined"),
                ),
            },
        }
    }

    fn intension_structure(&mut self, c: &ConstraintDef, formal_count: usize, path: &str) {
        let ConstraintBody::Intension(params) = &c.body else {
            self.error(
                codes::WRONG_REFERENCE_KIND,
                path.to_owned(),
                "a predicate or function constraint requires effective parameters".to_owned(),
            );
            return;
        };
        if params.len() != formal_count {
            self.error(
                codes::EFFECTIVE_PARAM_COUNT,
                path.to_owned(),
                format!(
                    "{} effective parameter(s) for {} formal parameter(s)",
                    params.len(),
                    formal_count
                ),
            );
        }
        let param_vars: HashSet<&str> = params
            .iter()
            .filter_map(|p| match p {
                crate::model::EffectiveParam::Var(v) => Some(v.as_str()),
                crate::model::EffectiveParam::Int(_) => None,
            })
            .collect();
        for var in &c.scope {
            if !param_vars.contains(var.as_str()) {
                self.error(
                    codes::SCOPE_NOT_COVERED,
                    path.to_owned(),
                    format!("scope variable `{var}` does not occur among the effective parameters"),
                );
            }
        }
        let scope_vars: HashSet<&str> = c.scope.iter().map(|s| s.as_str()).collect();
        for var in &param_vars {
            if !scope_vars.contains(var) {
                self.error(
                    codes::PARAM_NOT_IN_SCOPE,
                    path.to_owned(),
                    format!("effective parameter `{var}` does not occur in the scope"),
                );
            }
        }
    }

    fn wcsp_structure(&mut self, instance: &Instance) {
        let is_wcsp = instance.presentation.instance_type == InstanceType::Wcsp;
        match (is_wcsp, instance.maximal_cost) {
            (true, None) => self.error(
                codes::MISSING_MAXIMAL_COST,
                "instance/constraints".to_owned(),
                "WCSP instances require a maximalCost attribute".to_owned(),
            ),
            (true, Some(Cost::Finite(0))) => self.error(
                codes::BAD_MAXIMAL_COST,
                "instance/constraints".to_owned(),
                "maximalCost must be strictly positive".to_owned(),
            ),
            (false, Some(_)) => self.warning(
                codes::MAXIMAL_COST_OUTSIDE_WCSP,
                "instance/constraints".to_owned(),
                "maximalCost is only meaningful for WCSP instances".to_owned(),
            ),
            _ => {}
        }
        if let (true, Some(k)) = (is_wcsp, instance.maximal_cost) {
            for relation in &instance.relations {
                let path = format!("instance/relations/relation[{}]", relation.name);
                let mut all = Vec::new();
                if let Some(costs) = &relation.costs {
                    all.extend(costs.iter().copied());
                }
                all.extend(relation.default_cost);
                for cost in all {
                    if let (Cost::Finite(c), Cost::Finite(kv)) = (cost, k) {
                        if c > kv {
                            self.error(
                                codes::COST_EXCEEDS_MAXIMAL,
                                path.clone(),
                                format!("cost {c} exceeds maximalCost {kv}"),
                            );
                            break;
                        }
                    }
                }
            }
        }
    }

    fn quantification_structure(&mut self, instance: &Instance) {
        let quantified = instance.presentation.instance_type.is_quantified();
        let path = "instance/quantification".to_owned();
        match (&instance.quantification, quantified) {
            (Some(_), false) => self.error(
                codes::QUANTIFICATION_TYPE_MISMATCH,
                path.clone(),
                format!(
                    "a quantification section is not allowed in a {} instance",
                    instance.presentation.instance_type.as_str()
                ),
            ),
            (None, true) => self.error(
                codes::QUANTIFICATION_TYPE_MISMATCH,
                path.clone(),
                "QCSP instances require a quantification section".to_owned(),
            ),
            _ => {}
        }
        let Some(blocks) = &instance.quantification else {
            return;
        };
        let mut quantified_vars: HashMap<&str, usize> = HashMap::new();
        for (i, block) in blocks.iter().enumerate() {
            let bpath = format!("instance/quantification/block[{i}]");
            for var in &block.scope {
                match instance.resolve(var.as_str()) {
                    Ok(Entity::Variable(_)) => {}
                    _ => self.error(
                        codes::UNRESOLVED_REFERENCE,
                        bpath.clone(),
                        format!("block scope entry `{var}` is not a variable"),
                    ),
                }
                if quantified_vars.insert(var.as_str(), i).is_some() {
                    self.error(
                        codes::DUPLICATE_QUANTIFICATION,
                        bpath.clone(),
                        format!("variable `{var}` is mentioned in more than one block"),
                    );
                }
            }
            if !block.restrictions.is_empty()
                && instance.presentation.instance_type == InstanceType::Qcsp
            {
                self.error(
                    codes::RESTRICTION_IN_PURE_QCSP,
                    bpath.clone(),
                    "block bodies must be empty in a pure QCSP instance".to_owned(),
                );
            }
            for restriction in &block.restrictions {
                let rpath = format!("{bpath}/constraint[{}]", restriction.name);
                self.constraint_structure(instance, restriction, &rpath);
                for var in &restriction.scope {
                    match quantified_vars.get(var.as_str()) {
                        Some(block_index) if *block_index <= i => {}
                        _ => self.error(
                            codes::RESTRICTION_SCOPE_ORDER,
                            rpath.clone(),
                            format!(
                                "restriction refers to `{var}`, which is not quantified in this block or an earlier one"
                            ),
                        ),
                    }
                }
            }
        }
        for variable in &instance.variables {
            if !quantified_vars.contains_key(variable.name.as_str()) {
                self.error(
                    codes::UNQUANTIFIED_VARIABLE,
                    path.clone(),
                    format!(
                        "variable `{}` appears in no quantification block",
                        variable.name
                    ),
                );
            }
        }
    }

    // -- competition restrictions ------------------------------------------

    fn competition(&mut self, instance: &Instance, options: CompetitionOptions) {
        let esc = options.escalate_conventions;
        self.naming(instance, esc);
        self.presentation_restrictions(instance, esc);
        for domain in &instance.domains {
            self.domain_order(domain);
        }
        for relation in &instance.relations {
            self.relation_order(relation);
        }
        self.referenced(instance);
        self.constraint_order(instance, options.suggest_merges);
        for constraint in instance.all_constraints() {
            let path = format!("instance/constraints/constraint[{}]", constraint.name);
            self.tuples_within_domains(instance, constraint, &path);
            self.global_restrictions(instance, constraint, &path);
        }
        for predicate in &instance.predicates {
            let used = expr::referenced_params(&predicate.body);
            for formal in &predicate.params {
                if !used.iter().any(|u| **u == formal.name) {
                    self.error(
                        codes::UNUSED_FORMAL_PARAMETER,
                        format!("instance/predicates/predicate[{}]", predicate.name),
                        format!(
                            "formal parameter `{}` never occurs in the expression",
                            formal.name
                        ),
                    );
                }
            }
        }
        if instance.presentation.instance_type == InstanceType::Wcsp {
            if instance.maximal_cost == Some(Cost::Infinity) {
                self.error(
                    codes::MAXIMAL_COST_INFINITE,
                    "instance/constraints".to_owned(),
                    "competition instances use a finite maximalCost".to_owned(),
                );
            }
            if instance.initial_cost != Cost::ZERO {
                self.error(
                    codes::INITIAL_COST_NOT_ZERO,
                    "instance/constraints".to_owned(),
                    "competition instances leave initialCost unspecified (zero)".to_owned(),
                );
            }
            if !instance.functions.is_empty() {
                self.error(
                    codes::FUNCTIONS_NOT_ALLOWED,
                    "instance/functions".to_owned(),
                    "cost functions are not considered in the competition subset".to_owned(),
                );
            }
        }
    }

    fn naming(&mut self, instance: &Instance, esc: bool) {
        let check = |kind: &str, letter: char, i: usize, name: &str, path: String, s: &mut Self| {
            let expected = format!("{letter}{i}");
            if name != expected {
                s.finding(
                    esc,
                    codes::NAMING_CONVENTION,
                    path,
                    format!("{kind} {i} should be named `{expected}`, found `{name}`"),
                );
            }
        };
        for (i, d) in instance.domains.iter().enumerate() {
            check(
                "domain",
                'D',
                i,
                d.name.as_str(),
                format!("instance/domains/domain[{}]", d.name),
                self,
            );
        }
        for (i, v) in instance.variables.iter().enumerate() {
            check(
                "variable",
                'V',
                i,
                v.name.as_str(),
                format!("instance/variables/variable[{}]", v.name),
                self,
            );
        }
        for (i, r) in instance.relations.iter().enumerate() {
            check(
                "relation",
                'R',
                i,
                r.name.as_str(),
                format!("instance/relations/relation[{}]", r.name),
                self,
            );
        }
        for (i, p) in instance.predicates.iter().enumerate() {
            check(
                "predicate",
                'P',
                i,
                p.name.as_str(),
                format!("instance/predicates/predicate[{}]", p.name),
                self,
            );
            for (j, formal) in p.params.iter().enumerate() {
                check(
                    "formal parameter",
                    'X',
                    j,
                    formal.name.as_str(),
                    format!("instance/predicates/predicate[{}]", p.name),
                    self,
                );
            }
        }
        for (i, c) in instance.constraints.iter().enumerate() {
            check(
                "constraint",
                'C',
                i,
                c.name.as_str(),
                format!("instance/constraints/constraint[{}]", c.name),
                self,
            );
        }
    }

    fn presentation_restrictions(&mut self, instance: &Instance, esc: bool) {
        let p = &instance.presentation;
        let path = "instance/presentation".to_owned();
        let mut extras = Vec::new();
        if p.name.is_some() {
            extras.push("name");
        }
        if p.min_violated_constraints.is_some() {
            extras.push("minViolatedConstraints");
        }
        if p.nb_solutions.is_some() {
            extras.push("nbSolutions");
        }
        if p.solution.is_some() {
            extras.push("solution");
        }
        if !extras.is_empty() {
            self.finding(
                esc,
                codes::PRESENTATION_ATTRIBUTE,
                path.clone(),
                format!(
                    "competition presentations carry only maxConstraintArity, format and type; found {}",
                    extras.join(", ")
                ),
            );
        }
        if !p.description.is_empty() {
            self.finding(
                esc,
                codes::PRESENTATION_CONTENT,
                path,
                "competition presentations have empty content".to_owned(),
            );
        }
    }

    /// Values must be written in ascending order without repetition; the
    /// first offending adjacent pair is reported.
    fn domain_order(&mut self, domain: &crate::model::DomainDef) {
        let path = format!("instance/domains/domain[{}]", domain.name);
        let mut written = Vec::new();
        for piece in &domain.raw_pieces {
            match piece {
                crate::model::DomainPiece::Single(v) => written.push(*v),
                crate::model::DomainPiece::Range(lo, hi) => written.extend(*lo..=*hi),
            }
        }
        for pair in written.windows(2) {
            if pair[1] == pair[0] {
                self.error(
                    codes::DUPLICATE_DOMAIN_VALUE,
                    path,
                    format!("value {} occurs more than once", pair[0]),
                );
                return;
            }
            if pair[1] < pair[0] {
                self.error(
                    codes::DOMAIN_VALUES_NOT_SORTED,
                    path,
                    format!("{} appears after {}", pair[1], pair[0]),
                );
                return;
            }
        }
    }

    /// Tuples must be nonempty, lexicographically ascending and duplicate
    /// free; the first offending adjacent pair is reported.
    fn relation_order(&mut self, relation: &Relation) {
        let path = format!("instance/relations/relation[{}]", relation.name);
        if relation.tuples.is_empty() {
            self.error(
                codes::EMPTY_RELATION,
                path,
                "competition relations contain at least one tuple".to_owned(),
            );
            return;
        }
        for (i, pair) in relation.tuples.windows(2).enumerate() {
            if pair[1] == pair[0] {
                self.error(
                    codes::DUPLICATE_TUPLE,
                    path,
                    format!("tuples {i} and {} are identical", i + 1),
                );
                return;
            }
            if pair[1] < pair[0] {
                self.error(
                    codes::TUPLES_NOT_SORTED,
                    path,
                    format!("tuple {} is lexicographically before tuple {i}", i + 1),
                );
                return;
            }
        }
    }

    fn referenced(&mut self, instance: &Instance) {
        let mut used_domains = HashSet::new();
        for v in &instance.variables {
            used_domains.insert(v.domain.as_str());
        }
        for d in &instance.domains {
            if !used_domains.contains(d.name.as_str()) {
                self.error(
                    codes::UNREFERENCED_DOMAIN,
                    format!("instance/domains/domain[{}]", d.name),
                    "domain is not referenced by any variable".to_owned(),
                );
            }
        }
        let mut used_names = HashSet::new();
        let mut used_vars = HashSet::new();
        for c in instance.all_constraints() {
            if let ConstraintRef::Named(n) = &c.reference {
                used_names.insert(n.as_str());
            }
            for v in &c.scope {
                used_vars.insert(v.as_str());
            }
        }
        for r in &instance.relations {
            if !used_names.contains(r.name.as_str()) {
                self.error(
                    codes::UNREFERENCED_RELATION,
                    format!("instance/relations/relation[{}]", r.name),
                    "relation is not referenced by any constraint".to_owned(),
                );
            }
        }
        for p in &instance.predicates {
            if !used_names.contains(p.name.as_str()) {
                self.error(
                    codes::UNREFERENCED_PREDICATE,
                    format!("instance/predicates/predicate[{}]", p.name),
                    "predicate is not referenced by any constraint".to_owned(),
                );
            }
        }
        for v in &instance.variables {
            if !used_vars.contains(v.name.as_str()) {
                self.error(
                    codes::UNREFERENCED_VARIABLE,
                    format!("instance/variables/variable[{}]", v.name),
                    "variable is involved in no constraint".to_owned(),
                );
            }
        }
    }

    /// Constraints must be sorted by the lexicographic order of their
    /// normalized scope (scope sorted by variable name, compared as
    /// strings). The first out-of-order adjacent pair is reported.
    fn constraint_order(&mut self, instance: &Instance, suggest_merges: bool) {
        let normalized: Vec<Vec<&str>> = instance
            .constraints
            .iter()
            .map(|c| {
                let mut scope: Vec<&str> = c.scope.iter().map(|s| s.as_str()).collect();
                scope.sort_unstable();
                scope
            })
            .collect();
        for (i, pair) in normalized.windows(2).enumerate() {
            if pair[1] < pair[0] {
                let a = &instance.constraints[i];
                let b = &instance.constraints[i + 1];
                self.error(
                    codes::CONSTRAINTS_NOT_SORTED,
                    format!("instance/constraints/constraint[{}]", b.name),
                    format!(
                        "`{}` (normalized scope {}) appears after `{}` (normalized scope {})",
                        b.name,
                        pair[1].join(" "),
                        a.name,
                        pair[0].join(" ")
                    ),
                );
                return;
            }
            if suggest_merges && pair[1] == pair[0] {
                let a = &instance.constraints[i];
                let b = &instance.constraints[i + 1];
                self.warning(
                    codes::SAME_SCOPE_MERGE_HINT,
                    format!("instance/constraints/constraint[{}]", b.name),
                    format!("`{}` and `{}` share a normalized scope and may be merged with a logical and", a.name, b.name),
                );
            }
        }
    }

    /// Every value in a referenced relation's tuples must belong to the
    /// domain of the corresponding scope variable.
    fn tuples_within_domains(&mut self, instance: &Instance, c: &ConstraintDef, path: &str) {
        let ConstraintRef::Named(target) = &c.reference else {
            return;
        };
        let Ok(Entity::Relation(relation)) = instance.resolve(target.as_str()) else {
            return;
        };
        for tuple in &relation.tuples {
            for (value, var) in tuple.iter().zip(&c.scope) {
                let Some(domain) = instance.domain_of(var.as_str()) else {
                    continue;
                };
                if !domain.contains(*value) {
                    self.error(
                        codes::TUPLE_OUT_OF_DOMAIN,
                        path.to_owned(),
                        format!(
                            "relation `{}` holds value {value} outside the domain of `{var}`",
                            relation.name
                        ),
                    );
                    return;
                }
            }
        }
    }

    fn global_restrictions(&mut self, instance: &Instance, c: &ConstraintDef, path: &str) {
        let Some(global) = c.reference.global_name() else {
            return;
        };
        if !catalog::competition_allowed(&global) {
            self.error(
                codes::GLOBAL_NOT_ALLOWED,
                path.to_owned(),
                format!(
                    "only allDifferent, weightedSum, element and cumulative are allowed; found `{global}`"
                ),
            );
            return;
        }
        let ConstraintBody::Global(params) = &c.body else {
            return;
        };
        match global.as_str() {
            "alldifferent" => {
                if let Some(ParamValue::List(items)) = params.first() {
                    if items.iter().any(|item| matches!(item, ParamValue::Int(_))) {
                        self.error(
                            codes::CONSTANT_IN_ALLDIFFERENT,
                            path.to_owned(),
                            "integer constants are not accepted in allDifferent parameters"
                                .to_owned(),
                        );
                    }
                }
            }
            "weightedsum" => self.weighted_sum_restrictions(instance, c, params, path),
            _ => {}
        }
    }

    fn weighted_sum_restrictions(
        &mut self,
        _instance: &Instance,
        c: &ConstraintDef,
        params: &[ParamValue],
        path: &str,
    ) {
        let Some(ParamValue::List(items)) = params.first() else {
            return;
        };
        let scope: HashSet<&str> = c.scope.iter().map(|s| s.as_str()).collect();
        let mut seen_vars = HashSet::new();
        for item in items {
            let ParamValue::Dict(dict) = item else {
                continue;
            };
            if let Some(ParamValue::Int(coef)) = dict.get("coef") {
                if *coef == 0 {
                    self.error(
                        codes::ZERO_COEFFICIENT,
                        path.to_owned(),
                        "weightedSum coefficients must be non null".to_owned(),
                    );
                }
            }
            if let Some(ParamValue::Var(var)) = dict.get("var") {
                if !seen_vars.insert(var.as_str().to_owned()) {
                    self.error(
                        codes::DUPLICATE_SUM_VARIABLE,
                        path.to_owned(),
                        format!("variable `{var}` occurs twice in the sum"),
                    );
                }
                if !scope.contains(var.as_str()) {
                    self.error(
                        codes::SUM_VARIABLE_NOT_IN_SCOPE,
                        path.to_owned(),
                        format!("sum variable `{var}` does not occur in the scope"),
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        DomainDef, DomainPiece, EffectiveParam, Identifier, InstanceParts, PredicateDef,
        VariableDef,
    };

    fn ident(s: &str) -> Identifier {
        Identifier::new(s).unwrap()
    }

    fn tiny_intension(effective: Vec<EffectiveParam>) -> Instance {
        // one predicate with three formals, one constraint over two variables
        let body = crate::expr::parse_functional("and(ne(X0,X1),ne(abs(sub(X0,X1)),X2))").unwrap();
        let parts = InstanceParts {
            domains: vec![DomainDef {
                name: ident("D0"),
                values: vec![1, 2, 3, 4],
                raw_pieces: vec![DomainPiece::Range(1, 4)],
            }],
            variables: vec![
                VariableDef {
                    name: ident("V0"),
                    domain: ident("D0"),
                },
                VariableDef {
                    name: ident("V1"),
                    domain: ident("D0"),
                },
            ],
            predicates: vec![PredicateDef {
                name: ident("P0"),
                params: vec![
                    crate::model::FormalParam {
                        name: ident("X0"),
                        ty: crate::model::ParamType::Int,
                    },
                    crate::model::FormalParam {
                        name: ident("X1"),
                        ty: crate::model::ParamType::Int,
                    },
                    crate::model::FormalParam {
                        name: ident("X2"),
                        ty: crate::model::ParamType::Int,
                    },
                ],
                body,
            }],
            constraints: vec![ConstraintDef {
                name: ident("C0"),
                scope: vec![ident("V0"), ident("V1")],
                declared_arity: None,
                reference: ConstraintRef::Named(ident("P0")),
                body: ConstraintBody::Intension(effective),
            }],
            ..Default::default()
        };
        Instance::new(parts).unwrap()
    }

    #[test]
    fn wrong_effective_parameter_count_is_flagged() {
        let instance = tiny_intension(vec![
            EffectiveParam::Var(ident("V0")),
            EffectiveParam::Var(ident("V1")),
        ]);
        let report = validate_structure(&instance);
        assert!(!report.passed);
        assert!(report.has_code(codes::EFFECTIVE_PARAM_COUNT));
    }

    #[test]
    fn correct_intension_passes() {
        let instance = tiny_intension(vec![
            EffectiveParam::Var(ident("V0")),
            EffectiveParam::Var(ident("V1")),
            EffectiveParam::Int(1),
        ]);
        let report = validate_structure(&instance);
        assert!(report.passed, "{}", report.to_text());
    }

    #[test]
    fn scope_coverage_both_directions() {
        // V1 missing from the parameters
        let instance = tiny_intension(vec![
            EffectiveParam::Var(ident("V0")),
            EffectiveParam::Var(ident("V0")),
            EffectiveParam::Int(1),
        ]);
        let report = validate_structure(&instance);
        assert!(report.has_code(codes::SCOPE_NOT_COVERED));
    }
}
