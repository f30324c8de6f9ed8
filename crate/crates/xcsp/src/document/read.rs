//! The document reader: XML to [`Instance`], collecting diagnostics.

use std::collections::HashMap;

use roxmltree::{Document, Node};

use crate::catalog::{self, SigParam};
use crate::document::{codes, Diagnostic, LoadError, Loaded};
use crate::expr::{self, ExprNode};
use crate::lexparse::{self, BodyItem, Token, WeightValue};
use crate::model::{
    ConstraintBody, ConstraintDef, ConstraintRef, Cost, CostFunctionDef, CountInfo, DomainDef,
    ExtensionFragment, ExtensionHost, Identifier, Instance, InstanceParts, InstanceType, ParamType,
    ParamValue, Presentation, QuantBlock, Quantifier, Relation, RelationSemantics, VariableDef,
};
use crate::validate;

pub(super) fn load(bytes: &[u8]) -> Result<Loaded, LoadError> {
    let mut loader = Loader::default();
    let text = match std::str::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            loader.error(codes::XML_ERROR, "", 0, format!("input is not UTF-8: {e}"));
            return Err(loader.fail());
        }
    };
    let doc = match Document::parse(text) {
        Ok(d) => d,
        Err(e) => {
            loader.error(codes::XML_ERROR, "", 0, format!("malformed XML: {e}"));
            return Err(loader.fail());
        }
    };
    let parts = loader.read_instance(&doc, text);
    if loader.has_errors() {
        return Err(loader.fail());
    }
    let instance = match Instance::new(parts) {
        Ok(instance) => instance,
        Err(e) => {
            loader.error(codes::DUPLICATE_NAME, "instance", 0, e.to_string());
            return Err(loader.fail());
        }
    };
    // Reference resolution, typing and the rest of the model invariants are
    // the structural validator's checks; a load succeeds only if they hold.
    let report = validate::validate_structure(&instance);
    loader.diagnostics.extend(report.diagnostics);
    if loader.has_errors() {
        Err(loader.fail())
    } else {
        Ok(Loaded {
            instance,
            diagnostics: loader.diagnostics,
        })
    }
}

/// What kind of entity each seen name denotes; used to disambiguate
/// constraint bodies while the document is still being read.
#[derive(Copy, Clone, PartialEq, Eq)]
enum NameKind {
    Relation,
    Predicate,
    Function,
}

#[derive(Default)]
struct Loader {
    diagnostics: Vec<Diagnostic>,
    extensions: Vec<ExtensionFragment>,
    names: HashMap<String, NameKind>,
}

impl Loader {
    fn error(&mut self, code: &'static str, path: &str, offset: usize, message: impl Into<String>) {
        self.diagnostics
            .push(Diagnostic::error(code, path, offset, message));
    }

    fn warning(
        &mut self,
        code: &'static str,
        path: &str,
        offset: usize,
        message: impl Into<String>,
    ) {
        self.diagnostics
            .push(Diagnostic::warning(code, path, offset, message));
    }

    fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.is_error())
    }

    fn fail(self) -> LoadError {
        LoadError {
            diagnostics: self.diagnostics,
        }
    }

    fn lift_parse_error(&mut self, e: &lexparse::ParseError, path: &str) {
        let code = match e.kind {
            lexparse::ErrorKind::Lex(_)
            | lexparse::ErrorKind::UnexpectedToken(_)
            | lexparse::ErrorKind::UnexpectedEnd => codes::LEX_ERROR,
            lexparse::ErrorKind::EmptyDomain => codes::EMPTY_DOMAIN,
            lexparse::ErrorKind::InvertedInterval { .. } => codes::INVERTED_INTERVAL,
            lexparse::ErrorKind::ArityMismatch { .. } => codes::ARITY_MISMATCH,
            lexparse::ErrorKind::MissingFirstCost => codes::MISSING_FIRST_COST,
            lexparse::ErrorKind::NegativeCost(_) => codes::NEGATIVE_COST,
            lexparse::ErrorKind::UnknownType(_) => codes::UNKNOWN_TYPE,
            lexparse::ErrorKind::DuplicateParameter(_) => codes::DUPLICATE_PARAMETER,
            lexparse::ErrorKind::UnbalancedBracket => codes::UNBALANCED_BRACKET,
            lexparse::ErrorKind::UnbalancedBrace => codes::UNBALANCED_BRACE,
            lexparse::ErrorKind::MixedDictStyle => codes::MIXED_DICT_STYLE,
            lexparse::ErrorKind::DanglingKey => codes::DANGLING_KEY,
        };
        self.error(code, path, e.offset, e.to_string());
    }

    fn lift_expr_error(&mut self, e: &expr::ExprError, path: &str, base: usize) {
        let (code, offset) = match e {
            expr::ExprError::Syntax { offset, .. } => (codes::EXPR_SYNTAX, base + offset),
            expr::ExprError::WrongArity { .. } => (codes::WRONG_ARITY, base),
            expr::ExprError::TypeMismatch { .. } => (codes::TYPE_MISMATCH, base),
            expr::ExprError::UnboundParameter(_) => (codes::UNBOUND_PARAMETER, base),
        };
        self.error(code, path, offset, e.to_string());
    }

    // -- attribute helpers ---------------------------------------------------

    fn check_attrs(&mut self, node: Node, path: &str, known: &[&str]) {
        for attr in node.attributes() {
            let name = attr.name();
            if !known.contains(&name) {
                self.warning(
                    codes::UNKNOWN_ATTRIBUTE,
                    path,
                    node.range().start,
                    format!("attribute `{name}` is not recognized here"),
                );
            }
        }
    }

    fn require_attr<'a>(&mut self, node: Node<'a, '_>, path: &str, name: &str) -> Option<&'a str> {
        let value = node.attribute(name);
        if value.is_none() {
            self.error(
                codes::SCHEMA_ERROR,
                path,
                node.range().start,
                format!("missing mandatory attribute `{name}`"),
            );
        }
        value
    }

    fn identifier_attr(&mut self, node: Node, path: &str, name: &str) -> Option<Identifier> {
        let raw = self.require_attr(node, path, name)?;
        match Identifier::new(raw) {
            Ok(id) => Some(id),
            Err(_) => {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    path,
                    node.range().start,
                    format!("`{raw}` is not a valid identifier for attribute `{name}`"),
                );
                None
            }
        }
    }

    fn count_attr(&mut self, node: Node, path: &str, name: &str) -> Option<u64> {
        let raw = node.attribute(name)?;
        match raw.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    path,
                    node.range().start,
                    format!("attribute `{name}` must be a nonnegative integer, got `{raw}`"),
                );
                None
            }
        }
    }

    fn check_declared_count(&mut self, node: Node, path: &str, attr: &str, actual: usize) {
        if let Some(declared) = self.count_attr(node, path, attr) {
            if declared != actual as u64 {
                self.error(
                    codes::COUNT_MISMATCH,
                    path,
                    node.range().start,
                    format!("{attr} declares {declared} but {actual} were found"),
                );
            }
        }
    }

    fn cost_attr(&mut self, node: Node, path: &str, name: &str) -> Option<Cost> {
        let raw = node.attribute(name)?;
        let trimmed = raw.trim();
        if trimmed == "infinity" {
            return Some(Cost::Infinity);
        }
        match trimmed.parse::<i64>() {
            Ok(v) if v >= 0 => Some(Cost::Finite(v as u64)),
            Ok(v) => {
                self.error(
                    codes::NEGATIVE_COST,
                    path,
                    node.range().start,
                    format!("attribute `{name}` must be nonnegative, got {v}"),
                );
                None
            }
            Err(_) => {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    path,
                    node.range().start,
                    format!("attribute `{name}` must be an integer or `infinity`, got `{raw}`"),
                );
                None
            }
        }
    }

    // -- extension capture ---------------------------------------------------

    fn capture_extension(&mut self, node: Node, src: &str, host: ExtensionHost) {
        let range = node.range();
        self.extensions.push(ExtensionFragment {
            host,
            raw: src[range].to_owned(),
        });
    }

    // -- body flattening -----------------------------------------------------

    /// Flattens an element's mixed content into `BodyItem`s, recursing
    /// through tagged structural elements. Solver-specific `<extension>`
    /// children are captured for the given host and skipped.
    fn body_items<'a>(
        &mut self,
        node: Node<'a, '_>,
        src: &'a str,
        path: &str,
        host: &ExtensionHost,
    ) -> Vec<BodyItem<'a>> {
        let mut items = Vec::new();
        for child in node.children() {
            let offset = child.range().start;
            if child.is_text() {
                if let Some(text) = child.text() {
                    items.push(BodyItem::Text { text, offset });
                }
                continue;
            }
            if !child.is_element() {
                continue;
            }
            let name = child.tag_name().name();
            match name {
                "eq" | "ne" | "ge" | "gt" | "le" | "lt" => {
                    let op = crate::model::RelOp::from_name(name).unwrap();
                    items.push(BodyItem::Atom { op, offset });
                }
                "nil" => items.push(BodyItem::Nil { offset }),
                "infinity" => items.push(BodyItem::Infinity { offset }),
                "true" => items.push(BodyItem::True { offset }),
                "false" => items.push(BodyItem::False { offset }),
                "list" => {
                    items.push(BodyItem::ListOpen { offset });
                    items.extend(self.body_items(child, src, path, host));
                    items.push(BodyItem::ListClose {
                        offset: child.range().end,
                    });
                }
                "dict" => {
                    items.push(BodyItem::DictOpen { offset });
                    for entry in child.children().filter(|c| c.is_element()) {
                        if entry.tag_name().name() != "entry" {
                            self.error(
                                codes::LEX_ERROR,
                                path,
                                entry.range().start,
                                format!(
                                    "a <dict> body may only contain <entry> elements, found <{}>",
                                    entry.tag_name().name()
                                ),
                            );
                            continue;
                        }
                        let entry_offset = entry.range().start;
                        match entry.attribute("key") {
                            Some(key) => items.push(BodyItem::Key {
                                name: key,
                                offset: entry_offset,
                            }),
                            None => self.error(
                                codes::SCHEMA_ERROR,
                                path,
                                entry_offset,
                                "missing mandatory attribute `key` on <entry>",
                            ),
                        }
                        items.extend(self.body_items(entry, src, path, host));
                    }
                    items.push(BodyItem::DictClose {
                        offset: child.range().end,
                    });
                }
                "i" => {
                    let text = child.text().unwrap_or("").trim();
                    match text.parse::<i64>() {
                        Ok(value) => items.push(BodyItem::Int { value, offset }),
                        Err(_) => self.error(
                            codes::BAD_ATTRIBUTE,
                            path,
                            offset,
                            format!("<i> must contain an integer, got `{text}`"),
                        ),
                    }
                }
                "var" => match child.attribute("name") {
                    Some(name) => items.push(BodyItem::VarRef { name, offset }),
                    None => self.error(
                        codes::SCHEMA_ERROR,
                        path,
                        offset,
                        "missing mandatory attribute `name` on <var>",
                    ),
                },
                "tuple" => {
                    items.push(BodyItem::TupleOpen { offset });
                    items.extend(self.body_items(child, src, path, host));
                    items.push(BodyItem::TupleClose {
                        offset: child.range().end,
                    });
                }
                "weight" => {
                    let value = match child.attribute("value") {
                        Some("infinity") => Some(WeightValue::Infinity),
                        Some(raw) => match raw.trim().parse::<i64>() {
                            Ok(v) => Some(WeightValue::Int(v)),
                            Err(_) => {
                                self.error(
                                    codes::BAD_ATTRIBUTE,
                                    path,
                                    offset,
                                    format!("<weight> value must be an integer or `infinity`, got `{raw}`"),
                                );
                                None
                            }
                        },
                        None => {
                            self.error(
                                codes::SCHEMA_ERROR,
                                path,
                                offset,
                                "missing mandatory attribute `value` on <weight>",
                            );
                            None
                        }
                    };
                    if let Some(value) = value {
                        items.push(BodyItem::WeightOpen { value, offset });
                        items.extend(self.body_items(child, src, path, host));
                        items.push(BodyItem::WeightClose {
                            offset: child.range().end,
                        });
                    }
                }
                "interval" => {
                    let min = child
                        .attribute("min")
                        .and_then(|v| v.trim().parse::<i64>().ok());
                    let max = child
                        .attribute("max")
                        .and_then(|v| v.trim().parse::<i64>().ok());
                    match (min, max) {
                        (Some(min), Some(max)) => {
                            items.push(BodyItem::Interval { min, max, offset })
                        }
                        _ => self.error(
                            codes::SCHEMA_ERROR,
                            path,
                            offset,
                            "<interval> requires integer `min` and `max` attributes",
                        ),
                    }
                }
                "parameter" => {
                    let name = child.attribute("name");
                    let ty = child.attribute("type");
                    match (name, ty) {
                        (Some(name), Some(ty)) => {
                            items.push(BodyItem::FormalParam { ty, name, offset })
                        }
                        _ => self.error(
                            codes::SCHEMA_ERROR,
                            path,
                            offset,
                            "<parameter> requires `name` and `type` attributes",
                        ),
                    }
                }
                "extension" => self.capture_extension(child, src, host.clone()),
                other => self.error(
                    codes::LEX_ERROR,
                    path,
                    offset,
                    format!("element <{other}> is not recognized in this body"),
                ),
            }
        }
        items
    }

    fn body_tokens(
        &mut self,
        node: Node,
        src: &str,
        path: &str,
        host: &ExtensionHost,
    ) -> Option<Vec<Token>> {
        let items = self.body_items(node, src, path, host);
        match lexparse::lex_body(&items) {
            Ok(tokens) => Some(tokens),
            Err(e) => {
                self.lift_parse_error(&e, path);
                None
            }
        }
    }

    // -- sections ------------------------------------------------------------

    fn read_instance(&mut self, doc: &Document, src: &str) -> InstanceParts {
        let root = doc.root_element();
        let mut parts = InstanceParts::default();
        if root.tag_name().name() != "instance" {
            self.error(
                codes::SCHEMA_ERROR,
                "",
                root.range().start,
                format!(
                    "root element must be <instance>, found <{}>",
                    root.tag_name().name()
                ),
            );
            return parts;
        }
        self.check_attrs(root, "instance", &[]);
        let mut seen = Vec::new();
        for child in root.children().filter(|c| c.is_element()) {
            let name = child.tag_name().name();
            seen.push(name.to_owned());
            match name {
                "presentation" => {
                    parts.presentation = self.read_presentation(child, src);
                }
                "domains" => parts.domains = self.read_domains(child, src),
                "variables" => parts.variables = self.read_variables(child, src),
                "relations" => parts.relations = self.read_relations(child, src),
                "predicates" => parts.predicates = self.read_predicates(child, src),
                "functions" => parts.functions = self.read_functions(child, src),
                "constraints" => {
                    let path = "instance/constraints";
                    self.check_attrs(
                        child,
                        path,
                        &["nbConstraints", "maximalCost", "initialCost"],
                    );
                    parts.maximal_cost = self.cost_attr(child, path, "maximalCost");
                    parts.initial_cost = self
                        .cost_attr(child, path, "initialCost")
                        .unwrap_or(Cost::ZERO);
                    let mut constraints = Vec::new();
                    for c in child.children().filter(|c| c.is_element()) {
                        match c.tag_name().name() {
                            "constraint" => {
                                if let Some(def) = self.read_constraint(c, src, path) {
                                    constraints.push(def);
                                }
                            }
                            "extension" => {
                                self.capture_extension(c, src, ExtensionHost::Constraints)
                            }
                            other => self.unknown_element(c, path, other),
                        }
                    }
                    self.check_declared_count(child, path, "nbConstraints", constraints.len());
                    parts.constraints = constraints;
                }
                "quantification" => {
                    parts.quantification = Some(self.read_quantification(child, src));
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Instance),
                other => self.unknown_element(child, "instance", other),
            }
        }
        for required in ["presentation", "domains", "variables", "constraints"] {
            if !seen.iter().any(|s| s == required) {
                self.error(
                    codes::SCHEMA_ERROR,
                    "instance",
                    root.range().start,
                    format!("missing mandatory element <{required}>"),
                );
            }
        }
        parts.extensions = std::mem::take(&mut self.extensions);
        parts
    }

    fn unknown_element(&mut self, node: Node, path: &str, name: &str) {
        self.warning(
            codes::UNKNOWN_ELEMENT,
            path,
            node.range().start,
            format!("element <{name}> is not recognized here and was ignored"),
        );
    }

    fn read_presentation(&mut self, node: Node, src: &str) -> Presentation {
        let path = "instance/presentation";
        self.check_attrs(
            node,
            path,
            &[
                "name",
                "maxConstraintArity",
                "minViolatedConstraints",
                "nbSolutions",
                "solution",
                "type",
                "format",
                "maxSatisfiableConstraints",
            ],
        );
        if node.attribute("maxSatisfiableConstraints").is_some() {
            self.warning(
                codes::DEPRECATED_ATTRIBUTE,
                path,
                node.range().start,
                "`maxSatisfiableConstraints` is deprecated; use `minViolatedConstraints`",
            );
        }
        let format = match self.require_attr(node, path, "format") {
            Some(f) => {
                if f != "XCSP 2.1" {
                    self.error(
                        codes::BAD_FORMAT,
                        path,
                        node.range().start,
                        format!("format must be `XCSP 2.1`, got `{f}`"),
                    );
                }
                f.to_owned()
            }
            None => String::new(),
        };
        let instance_type = match node.attribute("type") {
            None => InstanceType::Csp,
            Some("CSP") => InstanceType::Csp,
            Some("QCSP") => InstanceType::Qcsp,
            Some("QCSP+") => InstanceType::QcspPlus,
            Some("WCSP") => InstanceType::Wcsp,
            Some(other) => {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    path,
                    node.range().start,
                    format!("unknown instance type `{other}`"),
                );
                InstanceType::Csp
            }
        };
        let name = node.attribute("name").map(|n| {
            if n != "?" && !Identifier::is_valid(n) {
                self.warning(
                    codes::BAD_ATTRIBUTE,
                    path,
                    node.range().start,
                    format!("instance name `{n}` is not a valid identifier or `?`"),
                );
            }
            n.to_owned()
        });
        let max_constraint_arity = self.count_attr(node, path, "maxConstraintArity");
        let min_violated_constraints = node
            .attribute("minViolatedConstraints")
            .and_then(|raw| self.count_info(raw, node, path));
        let nb_solutions = node
            .attribute("nbSolutions")
            .and_then(|raw| self.count_info(raw, node, path));
        let solution = node.attribute("solution").map(|s| s.to_owned());
        let mut description = String::new();
        for child in node.children() {
            if child.is_text() {
                if let Some(t) = child.text() {
                    description.push_str(t);
                }
            } else if child.is_element() {
                match child.tag_name().name() {
                    "extension" => self.capture_extension(child, src, ExtensionHost::Presentation),
                    other => self.unknown_element(child, path, other),
                }
            }
        }
        Presentation {
            name,
            max_constraint_arity,
            min_violated_constraints,
            nb_solutions,
            solution,
            instance_type,
            format,
            description: description.trim().to_owned(),
        }
    }

    fn count_info(&mut self, raw: &str, node: Node, path: &str) -> Option<CountInfo> {
        let trimmed = raw.trim();
        if trimmed == "?" {
            return Some(CountInfo::Unknown);
        }
        let parse_tail = |tail: &str| tail.trim().parse::<u64>().ok();
        let info = if let Some(tail) = trimmed.strip_prefix("at least") {
            parse_tail(tail).map(CountInfo::AtLeast)
        } else if let Some(tail) = trimmed.strip_prefix("at most") {
            parse_tail(tail).map(CountInfo::AtMost)
        } else {
            trimmed.parse::<u64>().ok().map(CountInfo::Exact)
        };
        if info.is_none() {
            self.warning(
                codes::BAD_ATTRIBUTE,
                path,
                node.range().start,
                format!("`{raw}` is not an integer, `at least k`, `at most k` or `?`"),
            );
        }
        info
    }

    fn read_domains(&mut self, node: Node, src: &str) -> Vec<DomainDef> {
        let path = "instance/domains";
        self.check_attrs(node, path, &["nbDomains"]);
        let mut domains = Vec::new();
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "domain" => {
                    let Some(name) = self.identifier_attr(child, path, "name") else {
                        continue;
                    };
                    let dpath = format!("{path}/domain[{name}]");
                    self.check_attrs(child, &dpath, &["name", "nbValues"]);
                    let host = ExtensionHost::Named(name.clone());
                    let Some(tokens) = self.body_tokens(child, src, &dpath, &host) else {
                        continue;
                    };
                    match lexparse::parse_domain_tokens(&tokens) {
                        Ok((raw_pieces, values)) => {
                            self.check_declared_count(child, &dpath, "nbValues", values.len());
                            domains.push(DomainDef {
                                name,
                                values,
                                raw_pieces,
                            });
                        }
                        Err(e) => self.lift_parse_error(&e, &dpath),
                    }
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Domains),
                other => self.unknown_element(child, path, other),
            }
        }
        self.check_declared_count(node, path, "nbDomains", domains.len());
        domains
    }

    fn read_variables(&mut self, node: Node, src: &str) -> Vec<VariableDef> {
        let path = "instance/variables";
        self.check_attrs(node, path, &["nbVariables"]);
        let mut variables = Vec::new();
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "variable" => {
                    let Some(name) = self.identifier_attr(child, path, "name") else {
                        continue;
                    };
                    let vpath = format!("{path}/variable[{name}]");
                    self.check_attrs(child, &vpath, &["name", "domain"]);
                    let Some(domain) = self.identifier_attr(child, &vpath, "domain") else {
                        continue;
                    };
                    for sub in child.children().filter(|c| c.is_element()) {
                        match sub.tag_name().name() {
                            "extension" => {
                                self.capture_extension(sub, src, ExtensionHost::Named(name.clone()))
                            }
                            other => self.unknown_element(sub, &vpath, other),
                        }
                    }
                    variables.push(VariableDef { name, domain });
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Variables),
                other => self.unknown_element(child, path, other),
            }
        }
        self.check_declared_count(node, path, "nbVariables", variables.len());
        variables
    }

    fn read_relations(&mut self, node: Node, src: &str) -> Vec<Relation> {
        let path = "instance/relations";
        self.check_attrs(node, path, &["nbRelations"]);
        let mut relations = Vec::new();
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "relation" => {
                    if let Some(relation) = self.read_relation(child, src, path) {
                        self.names
                            .insert(relation.name.as_str().to_owned(), NameKind::Relation);
                        relations.push(relation);
                    }
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Relations),
                other => self.unknown_element(child, path, other),
            }
        }
        self.check_declared_count(node, path, "nbRelations", relations.len());
        relations
    }

    fn read_relation(&mut self, node: Node, src: &str, parent: &str) -> Option<Relation> {
        let name = self.identifier_attr(node, parent, "name")?;
        let rpath = format!("{parent}/relation[{name}]");
        self.check_attrs(
            node,
            &rpath,
            &["name", "arity", "nbTuples", "semantics", "defaultCost"],
        );
        let arity_raw = self.require_attr(node, &rpath, "arity")?;
        let arity = match arity_raw.trim().parse::<usize>() {
            Ok(a) if a >= 1 => a,
            _ => {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    &rpath,
                    node.range().start,
                    format!("arity must be a positive integer, got `{arity_raw}`"),
                );
                return None;
            }
        };
        let semantics = match self.require_attr(node, &rpath, "semantics")? {
            "supports" => RelationSemantics::Supports,
            "conflicts" => RelationSemantics::Conflicts,
            "soft" => RelationSemantics::Soft,
            other => {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    &rpath,
                    node.range().start,
                    format!("semantics must be supports, conflicts or soft, got `{other}`"),
                );
                return None;
            }
        };
        let default_cost = self.cost_attr(node, &rpath, "defaultCost");
        if semantics == RelationSemantics::Soft && default_cost.is_none() {
            self.error(
                codes::SCHEMA_ERROR,
                &rpath,
                node.range().start,
                "soft relations require a `defaultCost` attribute",
            );
            return None;
        }
        if semantics != RelationSemantics::Soft && node.attribute("defaultCost").is_some() {
            self.error(
                codes::SCHEMA_ERROR,
                &rpath,
                node.range().start,
                "`defaultCost` is only allowed on soft relations",
            );
            return None;
        }
        let host = ExtensionHost::Named(name.clone());
        let tokens = self.body_tokens(node, src, &rpath, &host)?;
        let (tuples, costs) = if semantics == RelationSemantics::Soft {
            match lexparse::parse_weighted_tuples_tokens(&tokens, arity) {
                Ok(weighted) => {
                    let (costs, tuples): (Vec<Cost>, Vec<Vec<i64>>) = weighted.into_iter().unzip();
                    (tuples, Some(costs))
                }
                Err(e) => {
                    self.lift_parse_error(&e, &rpath);
                    return None;
                }
            }
        } else {
            match lexparse::parse_tuples_tokens(&tokens, arity) {
                Ok(tuples) => (tuples, None),
                Err(e) => {
                    self.lift_parse_error(&e, &rpath);
                    return None;
                }
            }
        };
        self.check_declared_count(node, &rpath, "nbTuples", tuples.len());
        Some(Relation {
            name,
            arity,
            semantics,
            tuples,
            costs,
            default_cost: if semantics == RelationSemantics::Soft {
                default_cost
            } else {
                None
            },
        })
    }

    fn read_predicates(&mut self, node: Node, src: &str) -> Vec<crate::model::PredicateDef> {
        let path = "instance/predicates";
        self.check_attrs(node, path, &["nbPredicates"]);
        let mut predicates = Vec::new();
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "predicate" => {
                    let Some(name) = self.identifier_attr(child, path, "name") else {
                        continue;
                    };
                    let ppath = format!("{path}/predicate[{name}]");
                    self.check_attrs(child, &ppath, &["name"]);
                    if let Some((params, body)) =
                        self.read_params_and_expression(child, src, &ppath, &name)
                    {
                        self.names
                            .insert(name.as_str().to_owned(), NameKind::Predicate);
                        predicates.push(crate::model::PredicateDef { name, params, body });
                    }
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Predicates),
                other => self.unknown_element(child, path, other),
            }
        }
        self.check_declared_count(node, path, "nbPredicates", predicates.len());
        predicates
    }

    fn read_functions(&mut self, node: Node, src: &str) -> Vec<CostFunctionDef> {
        let path = "instance/functions";
        self.check_attrs(node, path, &["nbFunctions"]);
        let mut functions = Vec::new();
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "function" => {
                    let Some(name) = self.identifier_attr(child, path, "name") else {
                        continue;
                    };
                    let fpath = format!("{path}/function[{name}]");
                    self.check_attrs(child, &fpath, &["name", "return"]);
                    match child.attribute("return") {
                        Some("int") | None => {}
                        Some(other) => {
                            self.error(
                                codes::UNKNOWN_TYPE,
                                &fpath,
                                child.range().start,
                                format!("return type must be `int`, got `{other}`"),
                            );
                            continue;
                        }
                    }
                    if let Some((params, body)) =
                        self.read_params_and_expression(child, src, &fpath, &name)
                    {
                        self.names
                            .insert(name.as_str().to_owned(), NameKind::Function);
                        functions.push(CostFunctionDef {
                            name,
                            return_type: ParamType::Int,
                            params,
                            body,
                        });
                    }
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Functions),
                other => self.unknown_element(child, path, other),
            }
        }
        self.check_declared_count(node, path, "nbFunctions", functions.len());
        functions
    }

    fn read_params_and_expression(
        &mut self,
        node: Node,
        src: &str,
        path: &str,
        name: &Identifier,
    ) -> Option<(Vec<crate::model::FormalParam>, ExprNode)> {
        let host = ExtensionHost::Named(name.clone());
        let mut params = None;
        let mut body = None;
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "parameters" => {
                    let tokens = self.body_tokens(child, src, path, &host)?;
                    match lexparse::parse_formal_parameters_tokens(&tokens) {
                        Ok(list) => {
                            for p in &list {
                                if expr::is_reserved_word(p.name.as_str()) {
                                    self.error(
                                        codes::RESERVED_PARAMETER_NAME,
                                        path,
                                        child.range().start,
                                        format!(
                                            "`{}` is an operator of the expression language and cannot name a parameter",
                                            p.name
                                        ),
                                    );
                                }
                            }
                            params = Some(list);
                        }
                        Err(e) => self.lift_parse_error(&e, path),
                    }
                }
                "expression" => {
                    body = self.read_expression(child, path);
                }
                "extension" => self.capture_extension(child, src, host.clone()),
                other => self.unknown_element(child, path, other),
            }
        }
        if params.is_none() {
            self.error(
                codes::SCHEMA_ERROR,
                path,
                node.range().start,
                "missing <parameters> element",
            );
        }
        if body.is_none() && !self.has_errors() {
            self.error(
                codes::MISSING_FUNCTIONAL,
                path,
                node.range().start,
                "no <functional> representation found in <expression>",
            );
        }
        Some((params?, body?))
    }

    fn read_expression(&mut self, node: Node, path: &str) -> Option<ExprNode> {
        let mut functional = None;
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "functional" => functional = Some(child),
                other @ ("math" | "postfix" | "infix") => {
                    self.warning(
                        codes::UNSUPPORTED_REPRESENTATION,
                        path,
                        child.range().start,
                        format!("<{other}> expression representations are ignored; only <functional> is interpreted"),
                    );
                }
                other => self.unknown_element(child, path, other),
            }
        }
        let Some(functional) = functional else {
            self.error(
                codes::MISSING_FUNCTIONAL,
                path,
                node.range().start,
                "no <functional> representation found in <expression>",
            );
            return None;
        };
        let mut text = String::new();
        let mut base = functional.range().start;
        for child in functional.children() {
            if child.is_text() {
                if text.is_empty() {
                    base = child.range().start;
                }
                text.push_str(child.text().unwrap_or(""));
            } else if child.is_element() {
                self.error(
                    codes::EXPR_SYNTAX,
                    path,
                    child.range().start,
                    "a <functional> body must be plain text",
                );
                return None;
            }
        }
        match expr::parse_functional(text.trim()) {
            Ok(node) => Some(node),
            Err(e) => {
                self.lift_expr_error(&e, path, base);
                None
            }
        }
    }

    fn read_constraint(&mut self, node: Node, src: &str, parent: &str) -> Option<ConstraintDef> {
        let name = self.identifier_attr(node, parent, "name")?;
        let cpath = format!("{parent}/constraint[{name}]");
        self.check_attrs(node, &cpath, &["name", "arity", "scope", "reference"]);
        let scope_raw = self.require_attr(node, &cpath, "scope")?;
        let mut scope = Vec::new();
        for part in scope_raw.split_whitespace() {
            match Identifier::new(part) {
                Ok(id) => scope.push(id),
                Err(_) => {
                    self.error(
                        codes::BAD_ATTRIBUTE,
                        &cpath,
                        node.range().start,
                        format!("scope entry `{part}` is not a valid identifier"),
                    );
                    return None;
                }
            }
        }
        let declared_arity = self.count_attr(node, &cpath, "arity");
        let reference_raw = self.require_attr(node, &cpath, "reference")?;
        let reference = if let Some(global) = reference_raw.strip_prefix("global:") {
            if global.is_empty() {
                self.error(
                    codes::BAD_ATTRIBUTE,
                    &cpath,
                    node.range().start,
                    "empty global constraint name",
                );
                return None;
            }
            ConstraintRef::Global(global.to_owned())
        } else {
            match Identifier::new(reference_raw) {
                Ok(id) => ConstraintRef::Named(id),
                Err(_) => {
                    self.error(
                        codes::BAD_ATTRIBUTE,
                        &cpath,
                        node.range().start,
                        format!("reference `{reference_raw}` is not a valid identifier"),
                    );
                    return None;
                }
            }
        };
        let host = ExtensionHost::Named(name.clone());
        let mut parameters_node = None;
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "parameters" => parameters_node = Some(child),
                "extension" => self.capture_extension(child, src, host.clone()),
                other => self.unknown_element(child, &cpath, other),
            }
        }
        let body = match &reference {
            ConstraintRef::Global(global) => {
                let lower = global.to_ascii_lowercase();
                let sig = catalog::lookup(global);
                if sig.is_none() {
                    self.warning(
                        codes::UNKNOWN_GLOBAL,
                        &cpath,
                        node.range().start,
                        format!("global constraint `{global}` is not recognized; its semantics are unavailable"),
                    );
                }
                match parameters_node {
                    Some(pnode) => {
                        let tokens = self.body_tokens(pnode, src, &cpath, &host)?;
                        match lexparse::parse_param_values(&tokens) {
                            Ok(mut values) => {
                                self.bind_conventional(
                                    &lower,
                                    &mut values,
                                    &cpath,
                                    pnode.range().start,
                                );
                                ConstraintBody::Global(values)
                            }
                            Err(e) => {
                                self.lift_parse_error(&e, &cpath);
                                return None;
                            }
                        }
                    }
                    None => {
                        if lower == "alldifferent" {
                            self.error(
                                codes::DEPRECATED_IMPLICIT_ALLDIFFERENT,
                                &cpath,
                                node.range().start,
                                "allDifferent without an explicit parameter list is the deprecated implicit form; list the variables in <parameters>",
                            );
                            return None;
                        }
                        self.warning(
                            codes::MISSING_PARAMETERS_DEFAULTED,
                            &cpath,
                            node.range().start,
                            format!("global constraint `{global}` has no <parameters> element"),
                        );
                        ConstraintBody::Global(Vec::new())
                    }
                }
            }
            ConstraintRef::Named(target) => {
                let kind = self.names.get(target.as_str()).copied();
                match (kind, parameters_node) {
                    (Some(NameKind::Relation), None) => ConstraintBody::Extension,
                    (Some(NameKind::Relation), Some(pnode)) => {
                        self.warning(
                            codes::EXTENSION_PARAMETERS_IGNORED,
                            &cpath,
                            pnode.range().start,
                            "extension constraints have an empty body; <parameters> ignored",
                        );
                        ConstraintBody::Extension
                    }
                    (Some(NameKind::Predicate) | Some(NameKind::Function), Some(pnode))
                    | (None, Some(pnode)) => {
                        let tokens = self.body_tokens(pnode, src, &cpath, &host)?;
                        match lexparse::parse_effective_parameters_tokens(&tokens) {
                            Ok(params) => ConstraintBody::Intension(params),
                            Err(e) => {
                                self.lift_parse_error(&e, &cpath);
                                return None;
                            }
                        }
                    }
                    (Some(NameKind::Predicate) | Some(NameKind::Function), None) => {
                        // The scope, in order, stands in for the missing
                        // effective parameters.
                        self.warning(
                            codes::MISSING_PARAMETERS_DEFAULTED,
                            &cpath,
                            node.range().start,
                            "constraint references a predicate or function without <parameters>; effective parameters default to the scope",
                        );
                        ConstraintBody::Intension(
                            scope
                                .iter()
                                .cloned()
                                .map(crate::model::EffectiveParam::Var)
                                .collect(),
                        )
                    }
                    (None, None) => ConstraintBody::Extension,
                }
            }
        };
        Some(ConstraintDef {
            name,
            scope,
            declared_arity,
            reference,
            body,
        })
    }

    /// Binds the keys of positional dictionaries using the conventional key
    /// order of the enclosing global. Any dictionary left without keys after
    /// this pass cannot be interpreted and is an error.
    fn bind_conventional(
        &mut self,
        global_lower: &str,
        params: &mut [ParamValue],
        path: &str,
        offset: usize,
    ) {
        if global_lower == "weightedsum" {
            if let Some(ParamValue::List(items)) = params.first() {
                if items.iter().any(|i| matches!(i, ParamValue::List(_))) {
                    self.error(
                        codes::DEPRECATED_WEIGHTED_SUM_SYNTAX,
                        path,
                        offset,
                        "weightedSum takes a list of {coef var} dictionaries; the old list-of-lists form is deprecated",
                    );
                    return;
                }
            }
        }
        if let Some(sig) = catalog::GLOBALS.iter().find(|g| g.name == global_lower) {
            for (i, param) in params.iter_mut().enumerate() {
                match sig.params.get(i) {
                    Some(SigParam::Collection(keys)) => {
                        self.bind_collection(param, keys, path, offset)
                    }
                    Some(SigParam::CollectionOfCollections(keys)) => {
                        if let ParamValue::List(items) = param {
                            for item in items {
                                self.bind_collection(item, keys, path, offset);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for param in params.iter() {
            self.check_fully_bound(param, path, offset);
        }
    }

    fn bind_collection(
        &mut self,
        param: &mut ParamValue,
        keys: &[&str],
        path: &str,
        offset: usize,
    ) {
        match param {
            ParamValue::List(items) => {
                for item in items {
                    if let ParamValue::Dict(d) = item {
                        self.bind_dict(d, keys, path, offset);
                    }
                }
            }
            // a single-item collection may be written as one dictionary
            ParamValue::Dict(d) => self.bind_dict(d, keys, path, offset),
            _ => {}
        }
    }

    fn bind_dict(
        &mut self,
        dict: &mut crate::model::DictParam,
        keys: &[&str],
        path: &str,
        offset: usize,
    ) {
        if !dict.positional {
            return;
        }
        if dict.entries.len() != keys.len() {
            self.error(
                codes::DICT_ARITY_MISMATCH,
                path,
                offset,
                format!(
                    "a conventional-order dictionary here must hold {} value(s) ({}), found {}",
                    keys.len(),
                    keys.join(", "),
                    dict.entries.len()
                ),
            );
            return;
        }
        for (entry, key) in dict.entries.iter_mut().zip(keys) {
            entry.key = Some(Identifier::new(key).expect("catalog keys are valid identifiers"));
        }
    }

    fn check_fully_bound(&mut self, param: &ParamValue, path: &str, offset: usize) {
        match param {
            ParamValue::Dict(d) => {
                if d.entries.iter().any(|e| e.key.is_none()) {
                    self.error(
                        codes::POSITIONAL_DICT_UNKNOWN_ORDER,
                        path,
                        offset,
                        "a conventional-order dictionary appears where no conventional key order is known",
                    );
                }
                for e in &d.entries {
                    self.check_fully_bound(&e.value, path, offset);
                }
            }
            ParamValue::List(items) => {
                for item in items {
                    self.check_fully_bound(item, path, offset);
                }
            }
            _ => {}
        }
    }

    fn read_quantification(&mut self, node: Node, src: &str) -> Vec<QuantBlock> {
        let path = "instance/quantification";
        self.check_attrs(node, path, &["nbBlocks"]);
        let mut blocks = Vec::new();
        for child in node.children().filter(|c| c.is_element()) {
            match child.tag_name().name() {
                "block" => {
                    let bpath = format!("{path}/block[{}]", blocks.len());
                    self.check_attrs(child, &bpath, &["quantifier", "scope"]);
                    let Some(quant_raw) = self.require_attr(child, &bpath, "quantifier") else {
                        continue;
                    };
                    let quantifier = match quant_raw {
                        "exists" => Quantifier::Exists,
                        "forall" => Quantifier::Forall,
                        "existential" | "universal" => {
                            let normalized = if quant_raw == "existential" {
                                Quantifier::Exists
                            } else {
                                Quantifier::Forall
                            };
                            self.warning(
                                codes::QUANTIFIER_SPELLING,
                                &bpath,
                                child.range().start,
                                format!(
                                    "quantifier `{quant_raw}` normalized to `{}`",
                                    normalized.as_str()
                                ),
                            );
                            normalized
                        }
                        other => {
                            self.error(
                                codes::BAD_ATTRIBUTE,
                                &bpath,
                                child.range().start,
                                format!("quantifier must be `exists` or `forall`, got `{other}`"),
                            );
                            continue;
                        }
                    };
                    let Some(scope_raw) = self.require_attr(child, &bpath, "scope") else {
                        continue;
                    };
                    let mut scope = Vec::new();
                    for part in scope_raw.split_whitespace() {
                        match Identifier::new(part) {
                            Ok(id) => scope.push(id),
                            Err(_) => self.error(
                                codes::BAD_ATTRIBUTE,
                                &bpath,
                                child.range().start,
                                format!("scope entry `{part}` is not a valid identifier"),
                            ),
                        }
                    }
                    if scope.is_empty() {
                        self.error(
                            codes::EMPTY_SCOPE,
                            &bpath,
                            child.range().start,
                            "a quantification block must list at least one variable",
                        );
                        continue;
                    }
                    let mut restrictions = Vec::new();
                    for sub in child.children().filter(|c| c.is_element()) {
                        match sub.tag_name().name() {
                            "constraint" => {
                                if let Some(def) = self.read_constraint(sub, src, &bpath) {
                                    restrictions.push(def);
                                }
                            }
                            "extension" => {
                                self.capture_extension(sub, src, ExtensionHost::Quantification)
                            }
                            other => self.unknown_element(sub, &bpath, other),
                        }
                    }
                    blocks.push(QuantBlock {
                        quantifier,
                        scope,
                        restrictions,
                    });
                }
                "extension" => self.capture_extension(child, src, ExtensionHost::Quantification),
                other => self.unknown_element(child, path, other),
            }
        }
        self.check_declared_count(node, path, "nbBlocks", blocks.len());
        blocks
    }
}
