//! The canonical document writer.
//!
//! One serializer drives both notations; only value rendering differs.
//! Abridged output uses braces, `|`, `:`, `..` and bare constants; tagged
//! output uses the element form of every value. Atoms, `<nil/>`,
//! `<infinity/>` and Boolean constants are elements in both notations.

use crate::catalog::{self, SigParam};
use crate::document::Notation;
use crate::expr::print_functional;
use crate::model::{
    ConstraintBody, ConstraintDef, Cost, DictParam, DomainPiece, EffectiveParam, ExtensionHost,
    Instance, ParamValue, QuantBlock, Relation, RelationSemantics,
};

const INDENT: &str = "  ";
const TUPLES_PER_LINE: usize = 10;
const WRAP_THRESHOLD: usize = 20;

pub(super) fn write(instance: &Instance, notation: Notation) -> String {
    let mut w = Writer {
        out: String::with_capacity(4096),
        depth: 0,
        notation,
        instance,
    };
    w.line("<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    w.line("<instance>");
    w.depth += 1;
    w.presentation();
    w.domains();
    w.variables();
    w.relations();
    w.predicates();
    w.functions();
    w.constraints();
    w.quantification();
    w.emit_extensions(&ExtensionHost::Instance);
    w.depth -= 1;
    w.line("</instance>");
    w.out
}

struct Writer<'a> {
    out: String,
    depth: usize,
    notation: Notation,
    instance: &'a Instance,
}

fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_attr(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
    out
}

impl<'a> Writer<'a> {
    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
    }

    fn line(&mut self, text: &str) {
        self.indent();
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn extensions_for(&self, host: &ExtensionHost) -> Vec<&'a str> {
        self.instance
            .extensions
            .iter()
            .filter(|e| e.host == *host)
            .map(|e| e.raw.as_str())
            .collect()
    }

    fn emit_extensions(&mut self, host: &ExtensionHost) {
        for raw in self.extensions_for(host) {
            self.line(raw);
        }
    }

    /// Writes an element that may have preserved extension fragments: when
    /// it has none and `body` produced nothing, it self-closes.
    fn element_with_extensions(
        &mut self,
        open: String,
        host: ExtensionHost,
        close: &str,
        body: impl FnOnce(&mut Self),
    ) {
        let fragments = self.extensions_for(&host);
        let mut probe = Writer {
            out: String::new(),
            depth: self.depth + 1,
            notation: self.notation,
            instance: self.instance,
        };
        body(&mut probe);
        if probe.out.is_empty() && fragments.is_empty() {
            self.line(&format!("{open}/>"));
        } else {
            self.line(&format!("{open}>"));
            self.out.push_str(&probe.out);
            self.depth += 1;
            self.emit_extensions(&host);
            self.depth -= 1;
            self.line(close);
        }
    }

    // -- sections ------------------------------------------------------------

    fn presentation(&mut self) {
        let p = &self.instance.presentation;
        let mut attrs = String::new();
        if let Some(name) = &p.name {
            attrs.push_str(&format!(" name=\"{}\"", escape_attr(name)));
        }
        if let Some(v) = p.max_constraint_arity {
            attrs.push_str(&format!(" maxConstraintArity=\"{v}\""));
        }
        if let Some(v) = &p.min_violated_constraints {
            attrs.push_str(&format!(" minViolatedConstraints=\"{v}\""));
        }
        if let Some(v) = &p.nb_solutions {
            attrs.push_str(&format!(" nbSolutions=\"{v}\""));
        }
        if let Some(v) = &p.solution {
            attrs.push_str(&format!(" solution=\"{}\"", escape_attr(v)));
        }
        attrs.push_str(&format!(" type=\"{}\"", p.instance_type.as_str()));
        attrs.push_str(&format!(" format=\"{}\"", escape_attr(&p.format)));
        let fragments = self.extensions_for(&ExtensionHost::Presentation);
        if p.description.is_empty() && fragments.is_empty() {
            self.line(&format!("<presentation{attrs}/>"));
        } else if fragments.is_empty() {
            self.line(&format!(
                "<presentation{attrs}>{}</presentation>",
                escape_text(&p.description)
            ));
        } else {
            self.line(&format!("<presentation{attrs}>"));
            self.depth += 1;
            if !p.description.is_empty() {
                let text = escape_text(&p.description);
                self.line(&text);
            }
            self.emit_extensions(&ExtensionHost::Presentation);
            self.depth -= 1;
            self.line("</presentation>");
        }
    }

    fn domains(&mut self) {
        self.line(&format!(
            "<domains nbDomains=\"{}\">",
            self.instance.domains.len()
        ));
        self.depth += 1;
        for domain in &self.instance.domains {
            let body = match self.notation {
                Notation::Abridged => domain
                    .raw_pieces
                    .iter()
                    .map(|p| match p {
                        DomainPiece::Single(v) => v.to_string(),
                        DomainPiece::Range(lo, hi) => format!("{lo}..{hi}"),
                    })
                    .collect::<Vec<_>>()
                    .join(" "),
                Notation::Tagged => domain
                    .raw_pieces
                    .iter()
                    .map(|p| match p {
                        DomainPiece::Single(v) => format!("<i>{v}</i>"),
                        DomainPiece::Range(lo, hi) => {
                            format!("<interval min=\"{lo}\" max=\"{hi}\"/>")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            let host = ExtensionHost::Named(domain.name.clone());
            let fragments = self.extensions_for(&host);
            let open = format!(
                "<domain name=\"{}\" nbValues=\"{}\">",
                domain.name,
                domain.values.len()
            );
            if fragments.is_empty() {
                self.line(&format!("{open}{body}</domain>"));
            } else {
                self.line(&format!("{open}{body}"));
                self.depth += 1;
                self.emit_extensions(&host);
                self.depth -= 1;
                self.line("</domain>");
            }
        }
        self.emit_extensions(&ExtensionHost::Domains);
        self.depth -= 1;
        self.line("</domains>");
    }

    fn variables(&mut self) {
        self.line(&format!(
            "<variables nbVariables=\"{}\">",
            self.instance.variables.len()
        ));
        self.depth += 1;
        for variable in &self.instance.variables {
            let open = format!(
                "<variable name=\"{}\" domain=\"{}\"",
                variable.name, variable.domain
            );
            self.element_with_extensions(
                open,
                ExtensionHost::Named(variable.name.clone()),
                "</variable>",
                |_| {},
            );
        }
        self.emit_extensions(&ExtensionHost::Variables);
        self.depth -= 1;
        self.line("</variables>");
    }

    fn relations(&mut self) {
        if self.instance.relations.is_empty()
            && self.extensions_for(&ExtensionHost::Relations).is_empty()
        {
            return;
        }
        self.line(&format!(
            "<relations nbRelations=\"{}\">",
            self.instance.relations.len()
        ));
        self.depth += 1;
        for relation in &self.instance.relations {
            self.relation(relation);
        }
        self.emit_extensions(&ExtensionHost::Relations);
        self.depth -= 1;
        self.line("</relations>");
    }

    fn relation(&mut self, relation: &Relation) {
        let mut open = format!(
            "<relation name=\"{}\" arity=\"{}\" nbTuples=\"{}\" semantics=\"{}\"",
            relation.name,
            relation.arity,
            relation.tuples.len(),
            relation.semantics.as_str()
        );
        if let Some(default) = relation.default_cost {
            open.push_str(&format!(" defaultCost=\"{default}\""));
        }
        let host = ExtensionHost::Named(relation.name.clone());
        let fragments = self.extensions_for(&host);
        if relation.tuples.is_empty() && fragments.is_empty() {
            self.line(&format!("{open}/>"));
            return;
        }
        let lines = match (self.notation, relation.semantics) {
            (Notation::Abridged, RelationSemantics::Soft) => abridged_soft_lines(relation),
            (Notation::Abridged, _) => abridged_tuple_lines(&relation.tuples),
            (Notation::Tagged, RelationSemantics::Soft) => tagged_soft_lines(relation),
            (Notation::Tagged, _) => tagged_tuple_lines(&relation.tuples),
        };
        if lines.len() == 1 && fragments.is_empty() {
            self.line(&format!("{open}>{}</relation>", lines[0]));
        } else {
            self.line(&format!("{open}>"));
            self.depth += 1;
            for l in &lines {
                self.line(l);
            }
            self.emit_extensions(&host);
            self.depth -= 1;
            self.line("</relation>");
        }
    }

    fn predicates(&mut self) {
        if self.instance.predicates.is_empty()
            && self.extensions_for(&ExtensionHost::Predicates).is_empty()
        {
            return;
        }
        self.line(&format!(
            "<predicates nbPredicates=\"{}\">",
            self.instance.predicates.len()
        ));
        self.depth += 1;
        for p in &self.instance.predicates {
            self.line(&format!("<predicate name=\"{}\">", p.name));
            self.depth += 1;
            self.formal_params(&p.params);
            self.line("<expression>");
            self.depth += 1;
            self.line(&format!(
                "<functional>{}</functional>",
                escape_text(&print_functional(&p.body))
            ));
            self.depth -= 1;
            self.line("</expression>");
            self.emit_extensions(&ExtensionHost::Named(p.name.clone()));
            self.depth -= 1;
            self.line("</predicate>");
        }
        self.emit_extensions(&ExtensionHost::Predicates);
        self.depth -= 1;
        self.line("</predicates>");
    }

    fn functions(&mut self) {
        if self.instance.functions.is_empty()
            && self.extensions_for(&ExtensionHost::Functions).is_empty()
        {
            return;
        }
        self.line(&format!(
            "<functions nbFunctions=\"{}\">",
            self.instance.functions.len()
        ));
        self.depth += 1;
        for f in &self.instance.functions {
            self.line(&format!(
                "<function name=\"{}\" return=\"{}\">",
                f.name,
                f.return_type.as_str()
            ));
            self.depth += 1;
            self.formal_params(&f.params);
            self.line("<expression>");
            self.depth += 1;
            self.line(&format!(
                "<functional>{}</functional>",
                escape_text(&print_functional(&f.body))
            ));
            self.depth -= 1;
            self.line("</expression>");
            self.emit_extensions(&ExtensionHost::Named(f.name.clone()));
            self.depth -= 1;
            self.line("</function>");
        }
        self.emit_extensions(&ExtensionHost::Functions);
        self.depth -= 1;
        self.line("</functions>");
    }

    fn formal_params(&mut self, params: &[crate::model::FormalParam]) {
        match self.notation {
            Notation::Abridged => {
                let body = params
                    .iter()
                    .map(|p| format!("{} {}", p.ty.as_str(), p.name))
                    .collect::<Vec<_>>()
                    .join(" ");
                self.line(&format!("<parameters>{body}</parameters>"));
            }
            Notation::Tagged => {
                if params.is_empty() {
                    self.line("<parameters/>");
                    return;
                }
                let body = params
                    .iter()
                    .map(|p| {
                        format!(
                            "<parameter name=\"{}\" type=\"{}\"/>",
                            p.name,
                            p.ty.as_str()
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                self.line(&format!("<parameters>{body}</parameters>"));
            }
        }
    }

    fn constraints(&mut self) {
        let mut attrs = format!("nbConstraints=\"{}\"", self.instance.constraints.len());
        if self.instance.initial_cost != Cost::ZERO {
            attrs.push_str(&format!(" initialCost=\"{}\"", self.instance.initial_cost));
        }
        if let Some(k) = self.instance.maximal_cost {
            attrs.push_str(&format!(" maximalCost=\"{k}\""));
        }
        self.line(&format!("<constraints {attrs}>"));
        self.depth += 1;
        for c in &self.instance.constraints {
            self.constraint(c);
        }
        self.emit_extensions(&ExtensionHost::Constraints);
        self.depth -= 1;
        self.line("</constraints>");
    }

    fn constraint(&mut self, c: &ConstraintDef) {
        let scope = c
            .scope
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let reference = match &c.reference {
            crate::model::ConstraintRef::Named(n) => n.as_str().to_owned(),
            crate::model::ConstraintRef::Global(g) => format!("global:{g}"),
        };
        let open = format!(
            "<constraint name=\"{}\" arity=\"{}\" scope=\"{}\" reference=\"{}\"",
            c.name,
            c.scope.len(),
            escape_attr(&scope),
            escape_attr(&reference)
        );
        let notation = self.notation;
        let global = c.reference.global_name();
        let body = c.body.clone();
        self.element_with_extensions(
            open,
            ExtensionHost::Named(c.name.clone()),
            "</constraint>",
            move |w| match &body {
                ConstraintBody::Extension => {}
                ConstraintBody::Intension(params) => {
                    let rendered = params
                        .iter()
                        .map(|p| match (notation, p) {
                            (Notation::Abridged, EffectiveParam::Int(v)) => v.to_string(),
                            (Notation::Abridged, EffectiveParam::Var(n)) => n.as_str().to_owned(),
                            (Notation::Tagged, EffectiveParam::Int(v)) => {
                                format!("<i>{v}</i>")
                            }
                            (Notation::Tagged, EffectiveParam::Var(n)) => {
                                format!("<var name=\"{n}\"/>")
                            }
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    w.line(&format!("<parameters>{rendered}</parameters>"));
                }
                ConstraintBody::Global(params) => {
                    let sig = global.as_deref().and_then(catalog::lookup);
                    let rendered = params
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            let slot = sig.and_then(|s| s.params.get(i));
                            render_param(p, notation, slot)
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    w.line(&format!("<parameters>{rendered}</parameters>"));
                }
            },
        );
    }

    fn quantification(&mut self) {
        let Some(blocks) = &self.instance.quantification else {
            return;
        };
        self.line(&format!("<quantification nbBlocks=\"{}\">", blocks.len()));
        self.depth += 1;
        for block in blocks {
            self.block(block);
        }
        self.emit_extensions(&ExtensionHost::Quantification);
        self.depth -= 1;
        self.line("</quantification>");
    }

    fn block(&mut self, block: &QuantBlock) {
        let scope = block
            .scope
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        if block.restrictions.is_empty() {
            self.line(&format!(
                "<block quantifier=\"{}\" scope=\"{}\"/>",
                block.quantifier.as_str(),
                escape_attr(&scope)
            ));
            return;
        }
        self.line(&format!(
            "<block quantifier=\"{}\" scope=\"{}\">",
            block.quantifier.as_str(),
            escape_attr(&scope)
        ));
        self.depth += 1;
        for c in &block.restrictions {
            self.constraint(c);
        }
        self.depth -= 1;
        self.line("</block>");
    }
}

// -- relation bodies ---------------------------------------------------------

fn tuple_text(tuple: &[i64]) -> String {
    tuple
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn abridged_tuple_lines(tuples: &[Vec<i64>]) -> Vec<String> {
    let rendered: Vec<String> = tuples.iter().map(|t| tuple_text(t)).collect();
    if tuples.len() <= WRAP_THRESHOLD {
        vec![rendered.join("|")]
    } else {
        // trailing `|` carries a group across the line break
        chunk_join(&rendered, TUPLES_PER_LINE, "|")
    }
}

fn chunk_join(rendered: &[String], per_line: usize, sep: &str) -> Vec<String> {
    let mut lines = Vec::new();
    for (i, chunk) in rendered.chunks(per_line).enumerate() {
        let mut line = chunk.join(sep);
        if (i + 1) * per_line < rendered.len() {
            line.push_str(sep);
        }
        lines.push(line);
    }
    lines
}

/// Soft tuples compress runs of equal costs: the prefix is written on the
/// first tuple of each run and inherited by the rest.
fn abridged_soft_lines(relation: &Relation) -> Vec<String> {
    let costs = relation.costs.as_ref().expect("soft relation has costs");
    let mut rendered = Vec::with_capacity(relation.tuples.len());
    let mut previous: Option<Cost> = None;
    for (tuple, cost) in relation.tuples.iter().zip(costs) {
        let body = tuple_text(tuple);
        if previous == Some(*cost) {
            rendered.push(body);
        } else {
            rendered.push(format!("{cost}:{body}"));
            previous = Some(*cost);
        }
    }
    if rendered.len() <= WRAP_THRESHOLD {
        vec![rendered.join("|")]
    } else {
        chunk_join(&rendered, TUPLES_PER_LINE, "|")
    }
}

fn tagged_tuple(tuple: &[i64]) -> String {
    let cells = tuple
        .iter()
        .map(|v| format!("<i>{v}</i>"))
        .collect::<Vec<_>>()
        .join(" ");
    format!("<tuple> {cells} </tuple>")
}

fn tagged_tuple_lines(tuples: &[Vec<i64>]) -> Vec<String> {
    if tuples.len() <= WRAP_THRESHOLD {
        let joined = tuples
            .iter()
            .map(|t| tagged_tuple(t))
            .collect::<Vec<_>>()
            .join(" ");
        vec![joined]
    } else {
        tuples.iter().map(|t| tagged_tuple(t)).collect()
    }
}

fn tagged_soft_lines(relation: &Relation) -> Vec<String> {
    let costs = relation.costs.as_ref().expect("soft relation has costs");
    let mut lines = Vec::new();
    let mut i = 0;
    while i < relation.tuples.len() {
        let cost = costs[i];
        let mut j = i;
        while j < relation.tuples.len() && costs[j] == cost {
            j += 1;
        }
        let tuples = relation.tuples[i..j]
            .iter()
            .map(|t| tagged_tuple(t))
            .collect::<Vec<_>>()
            .join(" ");
        lines.push(format!("<weight value=\"{cost}\"> {tuples} </weight>"));
        i = j;
    }
    lines
}

// -- structured parameter values ----------------------------------------------

fn render_param(value: &ParamValue, notation: Notation, slot: Option<&SigParam>) -> String {
    match value {
        ParamValue::Int(v) => match notation {
            Notation::Abridged => v.to_string(),
            Notation::Tagged => format!("<i>{v}</i>"),
        },
        ParamValue::Var(name) => match notation {
            Notation::Abridged => name.as_str().to_owned(),
            Notation::Tagged => format!("<var name=\"{name}\"/>"),
        },
        ParamValue::Atom(op) => format!("<{}/>", op.name()),
        ParamValue::Nil => "<nil/>".to_owned(),
        ParamValue::Infinity => "<infinity/>".to_owned(),
        ParamValue::List(items) => {
            let inner_slot = match slot {
                Some(SigParam::CollectionOfCollections(keys)) => Some(SigParam::Collection(keys)),
                Some(SigParam::Collection(keys)) => Some(SigParam::Collection(keys)),
                _ => None,
            };
            let rendered = items
                .iter()
                .map(|item| render_param(item, notation, inner_slot.as_ref()))
                .collect::<Vec<_>>()
                .join(" ");
            match notation {
                Notation::Abridged => format!("[ {rendered} ]"),
                Notation::Tagged => format!("<list> {rendered} </list>"),
            }
        }
        ParamValue::Dict(dict) => render_dict(dict, notation, slot),
    }
}

fn render_dict(dict: &DictParam, notation: Notation, slot: Option<&SigParam>) -> String {
    let keys = match slot {
        Some(SigParam::Collection(keys)) | Some(SigParam::CollectionOfCollections(keys)) => {
            Some(*keys)
        }
        _ => None,
    };
    match notation {
        Notation::Abridged => {
            // conventional order is preferred whenever the enclosing global
            // defines one and the dictionary fits it exactly
            if let Some(keys) = keys {
                if dict
                    .entries
                    .iter()
                    .all(|e| e.key.as_ref().is_some_and(|k| keys.contains(&k.as_str())))
                {
                    let rendered = keys
                        .iter()
                        .map(|key| match dict.get(key) {
                            Some(value) => render_param(value, notation, None),
                            None => "<nil/>".to_owned(),
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    return format!("{{ {rendered} }}");
                }
            }
            let rendered = dict
                .entries
                .iter()
                .map(|e| {
                    let key = e.key.as_ref().map(|k| k.as_str()).unwrap_or("_");
                    format!("/{key} {}", render_param(&e.value, notation, None))
                })
                .collect::<Vec<_>>()
                .join(" ");
            format!("{{ {rendered} }}")
        }
        Notation::Tagged => {
            // conventional order is an abridged-only shorthand; tagged
            // dictionaries are always keyed, in conventional order when known
            let mut entries: Vec<(&str, &ParamValue)> = Vec::new();
            if let Some(keys) = keys {
                for key in keys {
                    if let Some(value) = dict.get(key) {
                        entries.push((key, value));
                    }
                }
                for e in &dict.entries {
                    if let Some(k) = &e.key {
                        if !keys.contains(&k.as_str()) && !matches!(e.value, ParamValue::Nil) {
                            entries.push((k.as_str(), &e.value));
                        }
                    }
                }
            } else {
                entries = dict
                    .entries
                    .iter()
                    .filter(|e| !matches!(e.value, ParamValue::Nil))
                    .map(|e| (e.key.as_ref().map(|k| k.as_str()).unwrap_or("_"), &e.value))
                    .collect();
            }
            let rendered = entries
                .iter()
                .map(|(key, value)| {
                    format!(
                        "<entry key=\"{key}\">{}</entry>",
                        render_param(value, notation, None)
                    )
                })
                .collect::<Vec<_>>()
                .join(" ");
            format!("<dict> {rendered} </dict>")
        }
    }
}
