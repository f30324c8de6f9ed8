//! In-memory representation of an XCSP 2.1 instance.
//!
//! Everything here is plain immutable data: once an [`Instance`] has been
//! built it is never mutated, so it can be shared freely between threads.
//! Transformations produce new instances.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::expr::ExprNode;

/// A case-sensitive identifier: a letter or underscore followed by letters,
/// digits or underscores.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identifier(String);

impl Identifier {
    pub fn new(text: &str) -> Result<Identifier, ModelError> {
        if Identifier::is_valid(text) {
            Ok(Identifier(text.to_owned()))
        } else {
            Err(ModelError::InvalidIdentifier(text.to_owned()))
        }
    }

    pub fn is_valid(text: &str) -> bool {
        let mut chars = text.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl PartialEq<str> for Identifier {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Identifier {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

impl std::borrow::Borrow<str> for Identifier {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
}

/// The kind of problem an instance describes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InstanceType {
    Csp,
    Qcsp,
    QcspPlus,
    Wcsp,
}

impl InstanceType {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceType::Csp => "CSP",
            InstanceType::Qcsp => "QCSP",
            InstanceType::QcspPlus => "QCSP+",
            InstanceType::Wcsp => "WCSP",
        }
    }

    pub fn is_quantified(self) -> bool {
        matches!(self, InstanceType::Qcsp | InstanceType::QcspPlus)
    }
}

/// Value of the `nbSolutions` / `minViolatedConstraints` presentation
/// attributes: an exact number, a one-sided bound, or unknown (`?`).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CountInfo {
    Exact(u64),
    AtLeast(u64),
    AtMost(u64),
    Unknown,
}

impl fmt::Display for CountInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountInfo::Exact(n) => write!(f, "{n}"),
            CountInfo::AtLeast(n) => write!(f, "at least {n}"),
            CountInfo::AtMost(n) => write!(f, "at most {n}"),
            CountInfo::Unknown => f.write_str("?"),
        }
    }
}

/// Metadata from the `<presentation>` element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    /// Instance name; a valid identifier or the special value `?`.
    pub name: Option<String>,
    pub max_constraint_arity: Option<u64>,
    pub min_violated_constraints: Option<CountInfo>,
    pub nb_solutions: Option<CountInfo>,
    pub solution: Option<String>,
    pub instance_type: InstanceType,
    /// Always "XCSP 2.1" for documents this library accepts.
    pub format: String,
    /// Free-text description (element content), stored trimmed.
    pub description: String,
}

impl Default for Presentation {
    fn default() -> Self {
        Presentation {
            name: None,
            max_constraint_arity: None,
            min_violated_constraints: None,
            nb_solutions: None,
            solution: None,
            instance_type: InstanceType::Csp,
            format: "XCSP 2.1".to_owned(),
            description: String::new(),
        }
    }
}

/// One piece of a domain body as written: a single value or a closed
/// interval `min..max`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DomainPiece {
    Single(i64),
    Range(i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainDef {
    pub name: Identifier,
    /// Expanded value set: sorted ascending, deduplicated.
    pub values: Vec<i64>,
    /// The integers and intervals in written order, kept so the original
    /// interval syntax can be reproduced on output.
    pub raw_pieces: Vec<DomainPiece>,
}

impl DomainDef {
    pub fn nb_values(&self) -> usize {
        self.values.len()
    }

    pub fn contains(&self, value: i64) -> bool {
        self.values.binary_search(&value).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDef {
    pub name: Identifier,
    pub domain: Identifier,
}

/// An element of the valuation structure S(k): a nonnegative integer or the
/// distinguished value `infinity`. Infinity compares greater than every
/// finite cost and arithmetic saturates at the structure's maximum.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cost {
    Finite(u64),
    Infinity,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    /// `a ⊕ b = min(k, a + b)`, the bounded sum of S(k).
    pub fn oplus(self, rhs: Cost, k: Cost) -> Cost {
        let sum = match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => {
                a.checked_add(b).map(Cost::Finite).unwrap_or(Cost::Infinity)
            }
            _ => Cost::Infinity,
        };
        sum.min(k)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(n) => write!(f, "{n}"),
            Cost::Infinity => f.write_str("infinity"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RelationSemantics {
    Supports,
    Conflicts,
    Soft,
}

impl RelationSemantics {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationSemantics::Supports => "supports",
            RelationSemantics::Conflicts => "conflicts",
            RelationSemantics::Soft => "soft",
        }
    }
}

/// An extensional relation: a table of tuples that are allowed (supports),
/// forbidden (conflicts), or carry individual costs (soft).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: Identifier,
    pub arity: usize,
    pub semantics: RelationSemantics,
    /// Tuples in written order; every tuple has length `arity`.
    pub tuples: Vec<Vec<i64>>,
    /// Parallel to `tuples`; present exactly when `semantics` is soft.
    pub costs: Option<Vec<Cost>>,
    /// Cost of any tuple not listed; present exactly when soft.
    pub default_cost: Option<Cost>,
}

impl Relation {
    pub fn nb_tuples(&self) -> usize {
        self.tuples.len()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ParamType {
    Int,
}

impl ParamType {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamType::Int => "int",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalParam {
    pub name: Identifier,
    pub ty: ParamType,
}

/// A predicate: a Boolean expression over formal parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: Identifier,
    pub params: Vec<FormalParam>,
    pub body: ExprNode,
}

/// A WCSP cost function: like a predicate but the body is integer-typed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostFunctionDef {
    pub name: Identifier,
    pub return_type: ParamType,
    pub params: Vec<FormalParam>,
    pub body: ExprNode,
}

/// The six relational operator atoms (`<eq/>`, `<ne/>`, ...).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelOp {
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
}

impl RelOp {
    pub fn name(self) -> &'static str {
        match self {
            RelOp::Eq => "eq",
            RelOp::Ne => "ne",
            RelOp::Ge => "ge",
            RelOp::Gt => "gt",
            RelOp::Le => "le",
            RelOp::Lt => "lt",
        }
    }

    pub fn from_name(name: &str) -> Option<RelOp> {
        Some(match name {
            "eq" => RelOp::Eq,
            "ne" => RelOp::Ne,
            "ge" => RelOp::Ge,
            "gt" => RelOp::Gt,
            "le" => RelOp::Le,
            "lt" => RelOp::Lt,
            _ => return None,
        })
    }

    pub fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            RelOp::Eq => lhs == rhs,
            RelOp::Ne => lhs != rhs,
            RelOp::Ge => lhs >= rhs,
            RelOp::Gt => lhs > rhs,
            RelOp::Le => lhs <= rhs,
            RelOp::Lt => lhs < rhs,
        }
    }
}

/// An effective parameter of an intension constraint: an integer constant or
/// a reference to a scope variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectiveParam {
    Int(i64),
    Var(Identifier),
}

/// What a constraint's `reference` attribute points at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintRef {
    /// Name of a relation, predicate or cost function.
    Named(Identifier),
    /// A `global:` reference; the original spelling after the prefix is
    /// kept (global names compare case-insensitively).
    Global(String),
}

impl ConstraintRef {
    /// Lower-cased global name, if this is a global reference.
    pub fn global_name(&self) -> Option<String> {
        match self {
            ConstraintRef::Global(name) => Some(name.to_ascii_lowercase()),
            ConstraintRef::Named(_) => None,
        }
    }
}

/// A structured parameter of a global constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamValue {
    Int(i64),
    Var(Identifier),
    Atom(RelOp),
    Nil,
    Infinity,
    List(Vec<ParamValue>),
    Dict(DictParam),
}

/// One dictionary entry. `key` is `None` only for positional dictionaries
/// whose conventional order could not be resolved yet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DictEntry {
    pub key: Option<Identifier>,
    pub value: ParamValue,
}

/// A dictionary parameter. `positional` records whether it was written in
/// conventional order (`{v1 v2}`) rather than with explicit keys.
#[derive(Clone, Debug, Eq)]
pub struct DictParam {
    pub entries: Vec<DictEntry>,
    pub positional: bool,
}

impl DictParam {
    pub fn keyed(entries: Vec<(Identifier, ParamValue)>) -> DictParam {
        DictParam {
            entries: entries
                .into_iter()
                .map(|(key, value)| DictEntry {
                    key: Some(key),
                    value,
                })
                .collect(),
            positional: false,
        }
    }

    /// Looks up a key, treating an explicit `<nil/>` value as absent.
    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.entries
            .iter()
            .find(|e| e.key.as_ref().map(|k| k.as_str()) == Some(key))
            .map(|e| &e.value)
            .filter(|v| !matches!(v, ParamValue::Nil))
    }

    fn sorted_entries(&self) -> Vec<(&str, &ParamValue)> {
        let mut entries: Vec<(&str, &ParamValue)> = self
            .entries
            .iter()
            .map(|e| (e.key.as_ref().map(|k| k.as_str()).unwrap_or(""), &e.value))
            .collect();
        entries.sort_by_key(|(k, _)| *k);
        entries
    }
}

// The order of keys in a dictionary is not significant, so equality compares
// entries sorted by key. Unkeyed (positional) entries compare in sequence.
impl PartialEq for DictParam {
    fn eq(&self, other: &Self) -> bool {
        if self.positional != other.positional {
            return false;
        }
        if self.entries.iter().any(|e| e.key.is_none())
            || other.entries.iter().any(|e| e.key.is_none())
        {
            return self.entries == other.entries;
        }
        self.sorted_entries() == other.sorted_entries()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        }
    }
}

/// One quantification block of a QCSP/QCSP+ prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantBlock {
    pub quantifier: Quantifier,
    pub scope: Vec<Identifier>,
    /// Restriction constraints gating the block's values (QCSP+ only).
    pub restrictions: Vec<ConstraintDef>,
}

/// How a constraint's body is represented.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintBody {
    /// Extension constraints have an empty body.
    Extension,
    /// Effective parameters of a predicate or cost-function constraint.
    Intension(Vec<EffectiveParam>),
    /// Structured parameters of a global constraint.
    Global(Vec<ParamValue>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintDef {
    pub name: Identifier,
    /// Distinct variable names, in the order the tuples of a referenced
    /// relation are to be read.
    pub scope: Vec<Identifier>,
    /// The `arity` attribute as written, if any; the effective arity is
    /// always `scope.len()`.
    pub declared_arity: Option<u64>,
    pub reference: ConstraintRef,
    pub body: ConstraintBody,
}

impl ConstraintDef {
    pub fn arity(&self) -> usize {
        self.scope.len()
    }
}

/// Where a preserved `<extension>` fragment was attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionHost {
    Instance,
    Presentation,
    Domains,
    Variables,
    Relations,
    Predicates,
    Functions,
    Constraints,
    Quantification,
    /// Inside the named domain/variable/relation/predicate/function/constraint.
    Named(Identifier),
}

/// A solver-specific `<extension>` element, kept verbatim and re-emitted on
/// serialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionFragment {
    pub host: ExtensionHost,
    pub raw: String,
}

/// Reference to an entity found by [`Instance::resolve`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Entity<'a> {
    Domain(&'a DomainDef),
    Variable(&'a VariableDef),
    Relation(&'a Relation),
    Predicate(&'a PredicateDef),
    Function(&'a CostFunctionDef),
    Constraint(&'a ConstraintDef),
}

impl Entity<'_> {
    pub fn kind(&self) -> &'static str {
        match self {
            Entity::Domain(_) => "domain",
            Entity::Variable(_) => "variable",
            Entity::Relation(_) => "relation",
            Entity::Predicate(_) => "predicate",
            Entity::Function(_) => "function",
            Entity::Constraint(_) => "constraint",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum EntityRef {
    Domain(usize),
    Variable(usize),
    Relation(usize),
    Predicate(usize),
    Function(usize),
    Constraint(usize),
    /// (block index, restriction index)
    Restriction(usize, usize),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("no entity is named `{0}`")]
pub struct UnknownName(pub String);

/// All the parts an [`Instance`] is assembled from.
#[derive(Clone, Debug, Default)]
pub struct InstanceParts {
    pub presentation: Presentation,
    pub domains: Vec<DomainDef>,
    pub variables: Vec<VariableDef>,
    pub relations: Vec<Relation>,
    pub predicates: Vec<PredicateDef>,
    pub functions: Vec<CostFunctionDef>,
    pub constraints: Vec<ConstraintDef>,
    pub maximal_cost: Option<Cost>,
    pub initial_cost: Cost,
    pub quantification: Option<Vec<QuantBlock>>,
    pub extensions: Vec<ExtensionFragment>,
}

impl Default for Cost {
    fn default() -> Self {
        Cost::ZERO
    }
}

/// A complete constraint network.
#[derive(Clone, Debug)]
pub struct Instance {
    pub presentation: Presentation,
    pub domains: Vec<DomainDef>,
    pub variables: Vec<VariableDef>,
    pub relations: Vec<Relation>,
    pub predicates: Vec<PredicateDef>,
    pub functions: Vec<CostFunctionDef>,
    pub constraints: Vec<ConstraintDef>,
    /// The k of the valuation structure S(k); present for WCSP instances.
    pub maximal_cost: Option<Cost>,
    /// Constant cost added to every WCSP instantiation; 0 when absent.
    pub initial_cost: Cost,
    /// Quantification prefix; present exactly for QCSP/QCSP+ instances.
    pub quantification: Option<Vec<QuantBlock>>,
    pub extensions: Vec<ExtensionFragment>,
    index: HashMap<String, EntityRef>,
}

impl Instance {
    /// Assembles an instance, enforcing global `name` uniqueness across all
    /// named elements (including quantifier-block restriction constraints).
    pub fn new(parts: InstanceParts) -> Result<Instance, ModelError> {
        let mut index = HashMap::new();
        let mut insert = |name: &Identifier, entry: EntityRef| -> Result<(), ModelError> {
            if index.insert(name.as_str().to_owned(), entry).is_some() {
                return Err(ModelError::DuplicateName(name.as_str().to_owned()));
            }
            Ok(())
        };
        for (i, d) in parts.domains.iter().enumerate() {
            insert(&d.name, EntityRef::Domain(i))?;
        }
        for (i, v) in parts.variables.iter().enumerate() {
            insert(&v.name, EntityRef::Variable(i))?;
        }
        for (i, r) in parts.relations.iter().enumerate() {
            insert(&r.name, EntityRef::Relation(i))?;
        }
        for (i, p) in parts.predicates.iter().enumerate() {
            insert(&p.name, EntityRef::Predicate(i))?;
        }
        for (i, f) in parts.functions.iter().enumerate() {
            insert(&f.name, EntityRef::Function(i))?;
        }
        for (i, c) in parts.constraints.iter().enumerate() {
            insert(&c.name, EntityRef::Constraint(i))?;
        }
        if let Some(blocks) = &parts.quantification {
            for (bi, block) in blocks.iter().enumerate() {
                for (ri, c) in block.restrictions.iter().enumerate() {
                    insert(&c.name, EntityRef::Restriction(bi, ri))?;
                }
            }
        }
        // The presentation name shares the same namespace when it is a real
        // identifier (`?` stands outside it).
        if let Some(name) = &parts.presentation.name {
            if Identifier::is_valid(name) && index.contains_key(name.as_str()) {
                return Err(ModelError::DuplicateName(name.clone()));
            }
        }
        Ok(Instance {
            presentation: parts.presentation,
            domains: parts.domains,
            variables: parts.variables,
            relations: parts.relations,
            predicates: parts.predicates,
            functions: parts.functions,
            constraints: parts.constraints,
            maximal_cost: parts.maximal_cost,
            initial_cost: parts.initial_cost,
            quantification: parts.quantification,
            extensions: parts.extensions,
            index,
        })
    }

    /// Finds the unique entity carrying `name`.
    pub fn resolve(&self, name: &str) -> Result<Entity<'_>, UnknownName> {
        match self.index.get(name) {
            Some(EntityRef::Domain(i)) => Ok(Entity::Domain(&self.domains[*i])),
            Some(EntityRef::Variable(i)) => Ok(Entity::Variable(&self.variables[*i])),
            Some(EntityRef::Relation(i)) => Ok(Entity::Relation(&self.relations[*i])),
            Some(EntityRef::Predicate(i)) => Ok(Entity::Predicate(&self.predicates[*i])),
            Some(EntityRef::Function(i)) => Ok(Entity::Function(&self.functions[*i])),
            Some(EntityRef::Constraint(i)) => Ok(Entity::Constraint(&self.constraints[*i])),
            Some(EntityRef::Restriction(bi, ri)) => Ok(Entity::Constraint(
                &self.quantification.as_ref().unwrap()[*bi].restrictions[*ri],
            )),
            None => Err(UnknownName(name.to_owned())),
        }
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDef> {
        match self.resolve(name) {
            Ok(Entity::Variable(v)) => Some(v),
            _ => None,
        }
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        match self.resolve(name) {
            Ok(Entity::Relation(r)) => Some(r),
            _ => None,
        }
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        match self.resolve(name) {
            Ok(Entity::Predicate(p)) => Some(p),
            _ => None,
        }
    }

    pub fn function(&self, name: &str) -> Option<&CostFunctionDef> {
        match self.resolve(name) {
            Ok(Entity::Function(f)) => Some(f),
            _ => None,
        }
    }

    /// The domain of a variable, when both the variable and its domain
    /// reference resolve.
    pub fn domain_of(&self, variable: &str) -> Option<&DomainDef> {
        let var = self.variable(variable)?;
        match self.resolve(var.domain.as_str()) {
            Ok(Entity::Domain(d)) => Some(d),
            _ => None,
        }
    }

    /// All constraints, including QCSP+ restriction constraints.
    pub fn all_constraints(&self) -> impl Iterator<Item = &ConstraintDef> {
        self.constraints.iter().chain(
            self.quantification
                .iter()
                .flatten()
                .flat_map(|b| b.restrictions.iter()),
        )
    }

    /// Structural equality of the represented network, ignoring notation
    /// details: dictionary entry order, keyed-versus-positional dictionary
    /// origin, explicit-nil dictionary entries, and declared (as opposed to
    /// computed) constraint arities.
    pub fn model_eq(&self, other: &Instance) -> bool {
        self.presentation == other.presentation
            && self.domains.len() == other.domains.len()
            && self
                .domains
                .iter()
                .zip(&other.domains)
                .all(|(a, b)| a.name == b.name && a.values == b.values)
            && self.variables == other.variables
            && self.relations == other.relations
            && self.predicates == other.predicates
            && self.functions == other.functions
            && self.constraints.len() == other.constraints.len()
            && self
                .constraints
                .iter()
                .zip(&other.constraints)
                .all(|(a, b)| constraint_model_eq(a, b))
            && self.maximal_cost == other.maximal_cost
            && self.initial_cost == other.initial_cost
            && quantification_model_eq(&self.quantification, &other.quantification)
            && self.extensions == other.extensions
    }
}

fn constraint_model_eq(a: &ConstraintDef, b: &ConstraintDef) -> bool {
    a.name == b.name
        && a.scope == b.scope
        && a.reference == b.reference
        && match (&a.body, &b.body) {
            (ConstraintBody::Extension, ConstraintBody::Extension) => true,
            (ConstraintBody::Intension(x), ConstraintBody::Intension(y)) => x == y,
            (ConstraintBody::Global(x), ConstraintBody::Global(y)) => {
                x.len() == y.len() && x.iter().zip(y).all(|(p, q)| param_model_eq(p, q))
            }
            _ => false,
        }
}

fn param_model_eq(a: &ParamValue, b: &ParamValue) -> bool {
    match (a, b) {
        (ParamValue::List(x), ParamValue::List(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| param_model_eq(p, q))
        }
        (ParamValue::Dict(x), ParamValue::Dict(y)) => dict_model_eq(x, y),
        _ => a == b,
    }
}

// Explicit nil entries are equivalent to missing keys, key order is free and
// the positional flag is a notation detail.
fn dict_model_eq(a: &DictParam, b: &DictParam) -> bool {
    let normalize = |d: &DictParam| -> Option<Vec<(String, ParamValue)>> {
        let mut entries = Vec::new();
        for e in &d.entries {
            let key = e.key.as_ref()?;
            if !matches!(e.value, ParamValue::Nil) {
                entries.push((key.as_str().to_owned(), e.value.clone()));
            }
        }
        entries.sort_by(|(x, _), (y, _)| x.cmp(y));
        Some(entries)
    };
    match (normalize(a), normalize(b)) {
        (Some(x), Some(y)) => {
            x.len() == y.len()
                && x.iter()
                    .zip(&y)
                    .all(|((ka, va), (kb, vb))| ka == kb && param_model_eq(va, vb))
        }
        // Unbound positional dictionaries compare entry-by-entry.
        _ => {
            a.entries.len() == b.entries.len()
                && a.entries
                    .iter()
                    .zip(&b.entries)
                    .all(|(x, y)| x.key == y.key && param_model_eq(&x.value, &y.value))
        }
    }
}

// Block scope order is not significant.
fn quantification_model_eq(a: &Option<Vec<QuantBlock>>, b: &Option<Vec<QuantBlock>>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => {
            x.len() == y.len()
                && x.iter().zip(y).all(|(p, q)| {
                    let mut sp: Vec<_> = p.scope.clone();
                    let mut sq: Vec<_> = q.scope.clone();
                    sp.sort();
                    sq.sort();
                    p.quantifier == q.quantifier
                        && sp == sq
                        && p.restrictions.len() == q.restrictions.len()
                        && p.restrictions
                            .iter()
                            .zip(&q.restrictions)
                            .all(|(c, d)| constraint_model_eq(c, d))
                })
        }
        _ => false,
    }
}
