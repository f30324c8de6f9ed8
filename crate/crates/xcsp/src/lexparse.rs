//! Micro-parsers for abridged-notation body fragments: domain value lists,
//! tuple sequences, weighted tuples, parameter lists and structured
//! parameter values.
//!
//! Element bodies mix character data with embedded elements such as `<gt/>`
//! or `<nil/>`, and tagged equivalents (`<list>`, `<dict>`, `<tuple>`,
//! `<weight>`, `<i>`, `<var>`, ...) may stand in for any abridged form. The
//! document reader flattens both into a stream of [`BodyItem`]s; [`lex_body`]
//! turns that stream into tokens, and the `parse_*` functions below consume
//! tokens. Plain-text entry points are provided for each parser as well.
//!
//! All functions here are pure; errors carry a byte offset into the input.

use thiserror::Error;

use crate::model::{
    Cost, DictEntry, DictParam, DomainPiece, EffectiveParam, FormalParam, Identifier, ParamType,
    ParamValue, RelOp,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Integer(i64),
    Identifier(String),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    /// `/key` — an explicit dictionary key; no whitespace is permitted
    /// between the slash and the key.
    SlashKey(String),
    Pipe,
    Colon,
    DotDot,
    Atom(RelOp),
    Nil,
    Infinity,
    True,
    False,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Integer(v) => format!("integer {v}"),
            TokenKind::Identifier(s) => format!("identifier `{s}`"),
            TokenKind::LBracket => "`[`".to_owned(),
            TokenKind::RBracket => "`]`".to_owned(),
            TokenKind::LBrace => "`{`".to_owned(),
            TokenKind::RBrace => "`}`".to_owned(),
            TokenKind::SlashKey(k) => format!("key `/{k}`"),
            TokenKind::Pipe => "`|`".to_owned(),
            TokenKind::Colon => "`:`".to_owned(),
            TokenKind::DotDot => "`..`".to_owned(),
            TokenKind::Atom(op) => format!("<{}/>", op.name()),
            TokenKind::Nil => "<nil/>".to_owned(),
            TokenKind::Infinity => "<infinity/>".to_owned(),
            TokenKind::True => "<true/>".to_owned(),
            TokenKind::False => "<false/>".to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub offset: usize,
}

/// The weight carried by a `<weight value="...">` element.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WeightValue {
    Int(i64),
    Infinity,
}

/// One piece of mixed element content, as prepared by the document reader.
/// Structural elements arrive pre-flattened (`ListOpen`/`ListClose`, ...) so
/// tagged and abridged notations meet in a single token stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BodyItem<'a> {
    Text {
        text: &'a str,
        offset: usize,
    },
    Atom {
        op: RelOp,
        offset: usize,
    },
    Nil {
        offset: usize,
    },
    Infinity {
        offset: usize,
    },
    True {
        offset: usize,
    },
    False {
        offset: usize,
    },
    ListOpen {
        offset: usize,
    },
    ListClose {
        offset: usize,
    },
    DictOpen {
        offset: usize,
    },
    DictClose {
        offset: usize,
    },
    /// `<entry key="...">` opening.
    Key {
        name: &'a str,
        offset: usize,
    },
    /// `<i>...</i>` integer constant.
    Int {
        value: i64,
        offset: usize,
    },
    /// `<var name="..."/>` reference.
    VarRef {
        name: &'a str,
        offset: usize,
    },
    TupleOpen {
        offset: usize,
    },
    TupleClose {
        offset: usize,
    },
    WeightOpen {
        value: WeightValue,
        offset: usize,
    },
    WeightClose {
        offset: usize,
    },
    /// `<interval min="..." max="..."/>`.
    Interval {
        min: i64,
        max: i64,
        offset: usize,
    },
    /// `<parameter name="..." type="..."/>`.
    FormalParam {
        ty: &'a str,
        name: &'a str,
        offset: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Lex(String),
    EmptyDomain,
    InvertedInterval { min: i64, max: i64 },
    ArityMismatch { group: usize },
    MissingFirstCost,
    NegativeCost(i64),
    UnknownType(String),
    DuplicateParameter(String),
    UnbalancedBracket,
    UnbalancedBrace,
    MixedDictStyle,
    DanglingKey,
    UnexpectedToken(String),
    UnexpectedEnd,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("{} at offset {offset}", self.describe())]
pub struct ParseError {
    pub kind: ErrorKind,
    pub offset: usize,
}

impl ParseError {
    fn new(kind: ErrorKind, offset: usize) -> ParseError {
        ParseError { kind, offset }
    }

    fn describe(&self) -> String {
        match &self.kind {
            ErrorKind::Lex(msg) => format!("lex error: {msg}"),
            ErrorKind::EmptyDomain => "domain has no values".to_owned(),
            ErrorKind::InvertedInterval { min, max } => {
                format!("interval {min}..{max} has min greater than max")
            }
            ErrorKind::ArityMismatch { group } => {
                format!("tuple group {group} has the wrong number of values")
            }
            ErrorKind::MissingFirstCost => {
                "the first tuple of a soft relation must carry an explicit cost".to_owned()
            }
            ErrorKind::NegativeCost(v) => format!("negative cost {v}"),
            ErrorKind::UnknownType(t) => format!("unknown parameter type `{t}`"),
            ErrorKind::DuplicateParameter(n) => format!("duplicate parameter name `{n}`"),
            ErrorKind::UnbalancedBracket => "unbalanced `[`/`]`".to_owned(),
            ErrorKind::UnbalancedBrace => "unbalanced `{`/`}`".to_owned(),
            ErrorKind::MixedDictStyle => "dictionary mixes keyed and positional entries".to_owned(),
            ErrorKind::DanglingKey => "dictionary key has no value".to_owned(),
            ErrorKind::UnexpectedToken(t) => format!("unexpected {t}"),
            ErrorKind::UnexpectedEnd => "unexpected end of input".to_owned(),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing

/// Tokenizes a plain text run. `base` is added to every reported offset so
/// tokens locate themselves within an enclosing document.
pub fn lex_text(text: &str, base: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let offset = base + pos;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
            }
            b'[' => {
                tokens.push(Token {
                    kind: TokenKind::LBracket,
                    offset,
                });
                pos += 1;
            }
            b']' => {
                tokens.push(Token {
                    kind: TokenKind::RBracket,
                    offset,
                });
                pos += 1;
            }
            b'{' => {
                tokens.push(Token {
                    kind: TokenKind::LBrace,
                    offset,
                });
                pos += 1;
            }
            b'}' => {
                tokens.push(Token {
                    kind: TokenKind::RBrace,
                    offset,
                });
                pos += 1;
            }
            b'|' => {
                tokens.push(Token {
                    kind: TokenKind::Pipe,
                    offset,
                });
                pos += 1;
            }
            b':' => {
                tokens.push(Token {
                    kind: TokenKind::Colon,
                    offset,
                });
                pos += 1;
            }
            b'.' => {
                if bytes.get(pos + 1) == Some(&b'.') {
                    tokens.push(Token {
                        kind: TokenKind::DotDot,
                        offset,
                    });
                    pos += 2;
                } else {
                    return Err(ParseError::new(
                        ErrorKind::Lex("single `.` is not a token".to_owned()),
                        offset,
                    ));
                }
            }
            b'/' => {
                let start = pos + 1;
                let end = scan_identifier(bytes, start);
                if end == start {
                    return Err(ParseError::new(
                        ErrorKind::Lex("`/` must be followed immediately by a key".to_owned()),
                        offset,
                    ));
                }
                tokens.push(Token {
                    kind: TokenKind::SlashKey(text[start..end].to_owned()),
                    offset,
                });
                pos = end;
            }
            b'+' | b'-' => {
                let start = pos;
                pos += 1;
                let digits_start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos == digits_start {
                    return Err(ParseError::new(
                        ErrorKind::Lex(format!("`{}` must start an integer", c as char)),
                        offset,
                    ));
                }
                let value = parse_i64(&text[start..pos], offset)?;
                tokens.push(Token {
                    kind: TokenKind::Integer(value),
                    offset,
                });
            }
            _ if c.is_ascii_digit() => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let value = parse_i64(&text[start..pos], offset)?;
                tokens.push(Token {
                    kind: TokenKind::Integer(value),
                    offset,
                });
            }
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let end = scan_identifier(bytes, pos);
                tokens.push(Token {
                    kind: TokenKind::Identifier(text[pos..end].to_owned()),
                    offset,
                });
                pos = end;
            }
            _ => {
                return Err(ParseError::new(
                    ErrorKind::Lex(format!("unrecognized character `{}`", c as char)),
                    offset,
                ));
            }
        }
    }
    Ok(tokens)
}

fn scan_identifier(bytes: &[u8], start: usize) -> usize {
    let mut end = start;
    if end < bytes.len() && (bytes[end].is_ascii_alphabetic() || bytes[end] == b'_') {
        end += 1;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
    }
    end
}

fn parse_i64(text: &str, offset: usize) -> Result<i64, ParseError> {
    text.parse::<i64>().map_err(|_| {
        ParseError::new(
            ErrorKind::Lex(format!("integer `{text}` out of range")),
            offset,
        )
    })
}

/// Lexes mixed content into one token stream. Embedded atoms become single
/// tokens; tagged structural elements expand into the tokens their abridged
/// forms would produce, so both notations parse identically downstream.
pub fn lex_body(items: &[BodyItem<'_>]) -> Result<Vec<Token>, ParseError> {
    let mut tokens: Vec<Token> = Vec::new();
    // `<tuple>`/`<weight>` boundaries become `|` separators exactly where
    // the abridged form would need them.
    let needs_pipe = |tokens: &[Token]| {
        !matches!(
            tokens.last().map(|t| &t.kind),
            None | Some(TokenKind::Pipe) | Some(TokenKind::Colon)
        )
    };
    for item in items {
        match item {
            BodyItem::Text { text, offset } => {
                tokens.extend(lex_text(text, *offset)?);
            }
            BodyItem::Atom { op, offset } => {
                tokens.push(Token {
                    kind: TokenKind::Atom(*op),
                    offset: *offset,
                });
            }
            BodyItem::Nil { offset } => {
                tokens.push(Token {
                    kind: TokenKind::Nil,
                    offset: *offset,
                });
            }
            BodyItem::Infinity { offset } => {
                tokens.push(Token {
                    kind: TokenKind::Infinity,
                    offset: *offset,
                });
            }
            BodyItem::True { offset } => {
                tokens.push(Token {
                    kind: TokenKind::True,
                    offset: *offset,
                });
            }
            BodyItem::False { offset } => {
                tokens.push(Token {
                    kind: TokenKind::False,
                    offset: *offset,
                });
            }
            BodyItem::ListOpen { offset } => {
                tokens.push(Token {
                    kind: TokenKind::LBracket,
                    offset: *offset,
                });
            }
            BodyItem::ListClose { offset } => {
                tokens.push(Token {
                    kind: TokenKind::RBracket,
                    offset: *offset,
                });
            }
            BodyItem::DictOpen { offset } => {
                tokens.push(Token {
                    kind: TokenKind::LBrace,
                    offset: *offset,
                });
            }
            BodyItem::DictClose { offset } => {
                tokens.push(Token {
                    kind: TokenKind::RBrace,
                    offset: *offset,
                });
            }
            BodyItem::Key { name, offset } => {
                tokens.push(Token {
                    kind: TokenKind::SlashKey((*name).to_owned()),
                    offset: *offset,
                });
            }
            BodyItem::Int { value, offset } => {
                tokens.push(Token {
                    kind: TokenKind::Integer(*value),
                    offset: *offset,
                });
            }
            BodyItem::VarRef { name, offset } => {
                tokens.push(Token {
                    kind: TokenKind::Identifier((*name).to_owned()),
                    offset: *offset,
                });
            }
            BodyItem::TupleOpen { offset } => {
                if needs_pipe(&tokens) {
                    tokens.push(Token {
                        kind: TokenKind::Pipe,
                        offset: *offset,
                    });
                }
            }
            BodyItem::TupleClose { .. } => {}
            BodyItem::WeightOpen { value, offset } => {
                if needs_pipe(&tokens) {
                    tokens.push(Token {
                        kind: TokenKind::Pipe,
                        offset: *offset,
                    });
                }
                match value {
                    WeightValue::Int(v) => {
                        tokens.push(Token {
                            kind: TokenKind::Integer(*v),
                            offset: *offset,
                        });
                    }
                    WeightValue::Infinity => {
                        tokens.push(Token {
                            kind: TokenKind::Infinity,
                            offset: *offset,
                        });
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Colon,
                    offset: *offset,
                });
            }
            BodyItem::WeightClose { .. } => {}
            BodyItem::Interval { min, max, offset } => {
                tokens.push(Token {
                    kind: TokenKind::Integer(*min),
                    offset: *offset,
                });
                tokens.push(Token {
                    kind: TokenKind::DotDot,
                    offset: *offset,
                });
                tokens.push(Token {
                    kind: TokenKind::Integer(*max),
                    offset: *offset,
                });
            }
            BodyItem::FormalParam { ty, name, offset } => {
                tokens.push(Token {
                    kind: TokenKind::Identifier((*ty).to_owned()),
                    offset: *offset,
                });
                tokens.push(Token {
                    kind: TokenKind::Identifier((*name).to_owned()),
                    offset: *offset,
                });
            }
        }
    }
    if let Some(last) = tokens.last() {
        if last.kind == TokenKind::DotDot {
            return Err(ParseError::new(
                ErrorKind::Lex("dangling `..` at end of input".to_owned()),
                last.offset,
            ));
        }
    }
    Ok(tokens)
}

fn lex_only_text(text: &str) -> Result<Vec<Token>, ParseError> {
    lex_body(&[BodyItem::Text { text, offset: 0 }])
}

fn end_offset(tokens: &[Token]) -> usize {
    tokens.last().map(|t| t.offset + 1).unwrap_or(0)
}

fn unexpected(token: &Token) -> ParseError {
    ParseError::new(
        ErrorKind::UnexpectedToken(token.kind.describe()),
        token.offset,
    )
}

// ---------------------------------------------------------------------------
// Domain values

/// Parses a domain body: a sequence of integers and `min..max` intervals.
/// Returns the pieces in written order and the expansion, sorted ascending
/// and deduplicated.
pub fn parse_domain_values(text: &str) -> Result<(Vec<DomainPiece>, Vec<i64>), ParseError> {
    parse_domain_tokens(&lex_only_text(text)?)
}

pub fn parse_domain_tokens(tokens: &[Token]) -> Result<(Vec<DomainPiece>, Vec<i64>), ParseError> {
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let lo = match &tokens[i].kind {
            TokenKind::Integer(v) => *v,
            _ => return Err(unexpected(&tokens[i])),
        };
        if matches!(tokens.get(i + 1).map(|t| &t.kind), Some(TokenKind::DotDot)) {
            let hi_token = tokens
                .get(i + 2)
                .ok_or_else(|| ParseError::new(ErrorKind::UnexpectedEnd, end_offset(tokens)))?;
            let hi = match &hi_token.kind {
                TokenKind::Integer(v) => *v,
                _ => return Err(unexpected(hi_token)),
            };
            if lo > hi {
                return Err(ParseError::new(
                    ErrorKind::InvertedInterval { min: lo, max: hi },
                    tokens[i].offset,
                ));
            }
            pieces.push(DomainPiece::Range(lo, hi));
            i += 3;
        } else {
            pieces.push(DomainPiece::Single(lo));
            i += 1;
        }
    }
    if pieces.is_empty() {
        return Err(ParseError::new(ErrorKind::EmptyDomain, 0));
    }
    let mut values = Vec::new();
    for piece in &pieces {
        match piece {
            DomainPiece::Single(v) => values.push(*v),
            DomainPiece::Range(lo, hi) => values.extend(*lo..=*hi),
        }
    }
    values.sort_unstable();
    values.dedup();
    Ok((pieces, values))
}

// ---------------------------------------------------------------------------
// Tuples

/// Parses `|`-separated groups of whitespace-separated integers; each group
/// must contain exactly `arity` values. Empty input yields no tuples.
pub fn parse_tuples(text: &str, arity: usize) -> Result<Vec<Vec<i64>>, ParseError> {
    parse_tuples_tokens(&lex_only_text(text)?, arity)
}

pub fn parse_tuples_tokens(tokens: &[Token], arity: usize) -> Result<Vec<Vec<i64>>, ParseError> {
    if tokens.is_empty() {
        return Ok(Vec::new());
    }
    let mut tuples = Vec::new();
    for (group_index, group) in split_groups(tokens).into_iter().enumerate() {
        let mut tuple = Vec::with_capacity(arity);
        for token in group {
            match &token.kind {
                TokenKind::Integer(v) => tuple.push(*v),
                _ => return Err(unexpected(token)),
            }
        }
        if tuple.len() != arity {
            let offset = group
                .first()
                .map(|t| t.offset)
                .unwrap_or(end_offset(tokens));
            return Err(ParseError::new(
                ErrorKind::ArityMismatch { group: group_index },
                offset,
            ));
        }
        tuples.push(tuple);
    }
    Ok(tuples)
}

fn split_groups(tokens: &[Token]) -> Vec<&[Token]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for (i, token) in tokens.iter().enumerate() {
        if token.kind == TokenKind::Pipe {
            groups.push(&tokens[start..i]);
            start = i + 1;
        }
    }
    groups.push(&tokens[start..]);
    groups
}

// ---------------------------------------------------------------------------
// Weighted tuples

/// Parses soft-relation content: tuple groups optionally prefixed with
/// `cost:`. A group without a prefix inherits the most recent explicit cost;
/// the first group must carry one. `<infinity/>` in cost position yields an
/// infinite cost.
pub fn parse_weighted_tuples(
    text: &str,
    arity: usize,
) -> Result<Vec<(Cost, Vec<i64>)>, ParseError> {
    parse_weighted_tuples_tokens(&lex_only_text(text)?, arity)
}

pub fn parse_weighted_tuples_tokens(
    tokens: &[Token],
    arity: usize,
) -> Result<Vec<(Cost, Vec<i64>)>, ParseError> {
    if tokens.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut current_cost: Option<Cost> = None;
    for (group_index, group) in split_groups(tokens).into_iter().enumerate() {
        let mut rest = group;
        // cost prefix: Integer `:` or <infinity/> `:`
        if group.len() >= 2 && group[1].kind == TokenKind::Colon {
            let cost = match &group[0].kind {
                TokenKind::Integer(v) if *v < 0 => {
                    return Err(ParseError::new(
                        ErrorKind::NegativeCost(*v),
                        group[0].offset,
                    ));
                }
                TokenKind::Integer(v) => Cost::Finite(*v as u64),
                TokenKind::Infinity => Cost::Infinity,
                _ => return Err(unexpected(&group[0])),
            };
            current_cost = Some(cost);
            rest = &group[2..];
        }
        let cost = current_cost.ok_or_else(|| {
            let offset = group.first().map(|t| t.offset).unwrap_or(0);
            ParseError::new(ErrorKind::MissingFirstCost, offset)
        })?;
        let mut tuple = Vec::with_capacity(arity);
        for token in rest {
            match &token.kind {
                TokenKind::Integer(v) => tuple.push(*v),
                _ => return Err(unexpected(token)),
            }
        }
        if tuple.len() != arity {
            let offset = rest.first().map(|t| t.offset).unwrap_or(end_offset(tokens));
            return Err(ParseError::new(
                ErrorKind::ArityMismatch { group: group_index },
                offset,
            ));
        }
        out.push((cost, tuple));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Formal and effective parameters

/// Parses a formal-parameter list: `type name` pairs separated by
/// whitespace. The only authorized type is `int`; names must be pairwise
/// distinct. An empty list is permitted.
pub fn parse_formal_parameters(text: &str) -> Result<Vec<FormalParam>, ParseError> {
    parse_formal_parameters_tokens(&lex_only_text(text)?)
}

pub fn parse_formal_parameters_tokens(tokens: &[Token]) -> Result<Vec<FormalParam>, ParseError> {
    let mut params: Vec<FormalParam> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let ty = match &tokens[i].kind {
            TokenKind::Identifier(s) if s == "int" => ParamType::Int,
            TokenKind::Identifier(s) => {
                return Err(ParseError::new(
                    ErrorKind::UnknownType(s.clone()),
                    tokens[i].offset,
                ));
            }
            _ => return Err(unexpected(&tokens[i])),
        };
        let name_token = tokens
            .get(i + 1)
            .ok_or_else(|| ParseError::new(ErrorKind::UnexpectedEnd, end_offset(tokens)))?;
        let name = match &name_token.kind {
            TokenKind::Identifier(s) => Identifier::new(s).map_err(|_| {
                ParseError::new(
                    ErrorKind::Lex(format!("invalid identifier `{s}`")),
                    name_token.offset,
                )
            })?,
            _ => return Err(unexpected(name_token)),
        };
        if params.iter().any(|p| p.name == name) {
            return Err(ParseError::new(
                ErrorKind::DuplicateParameter(name.as_str().to_owned()),
                name_token.offset,
            ));
        }
        params.push(FormalParam { name, ty });
        i += 2;
    }
    Ok(params)
}

/// Parses effective parameters of an intension constraint: a whitespace
/// separated sequence of integers and variable references only.
pub fn parse_effective_parameters(text: &str) -> Result<Vec<EffectiveParam>, ParseError> {
    parse_effective_parameters_tokens(&lex_only_text(text)?)
}

pub fn parse_effective_parameters_tokens(
    tokens: &[Token],
) -> Result<Vec<EffectiveParam>, ParseError> {
    tokens
        .iter()
        .map(|token| match &token.kind {
            TokenKind::Integer(v) => Ok(EffectiveParam::Int(*v)),
            TokenKind::Identifier(s) => Identifier::new(s)
                .map(EffectiveParam::Var)
                .map_err(|_| unexpected(token)),
            _ => Err(unexpected(token)),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Structured parameter values

/// Parses a sequence of global-constraint parameters: integers, variable
/// references, operator atoms, `<nil/>`, `<infinity/>`, lists and
/// dictionaries. A `{/k v ...}` dictionary is keyed; `{v1 v2 ...}` is
/// positional and is bound to its conventional key order later.
pub fn parse_param_values(tokens: &[Token]) -> Result<Vec<ParamValue>, ParseError> {
    let mut cursor = Cursor { tokens, pos: 0 };
    let mut values = Vec::new();
    while cursor.pos < tokens.len() {
        values.push(cursor.value()?);
    }
    Ok(values)
}

/// Text-only convenience wrapper around [`parse_param_values`].
pub fn parse_param_values_text(text: &str) -> Result<Vec<ParamValue>, ParseError> {
    parse_param_values(&lex_only_text(text)?)
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn value(&mut self) -> Result<ParamValue, ParseError> {
        let token = self
            .peek()
            .ok_or_else(|| ParseError::new(ErrorKind::UnexpectedEnd, end_offset(self.tokens)))?;
        let offset = token.offset;
        match &token.kind {
            TokenKind::Integer(v) => {
                let v = *v;
                self.pos += 1;
                Ok(ParamValue::Int(v))
            }
            TokenKind::Identifier(s) => {
                let name = Identifier::new(s).map_err(|_| unexpected(token))?;
                self.pos += 1;
                Ok(ParamValue::Var(name))
            }
            TokenKind::Atom(op) => {
                let op = *op;
                self.pos += 1;
                Ok(ParamValue::Atom(op))
            }
            TokenKind::Nil => {
                self.pos += 1;
                Ok(ParamValue::Nil)
            }
            TokenKind::Infinity => {
                self.pos += 1;
                Ok(ParamValue::Infinity)
            }
            TokenKind::LBracket => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    match self.peek() {
                        Some(t) if t.kind == TokenKind::RBracket => {
                            self.pos += 1;
                            return Ok(ParamValue::List(items));
                        }
                        Some(_) => items.push(self.value()?),
                        None => {
                            return Err(ParseError::new(ErrorKind::UnbalancedBracket, offset));
                        }
                    }
                }
            }
            TokenKind::LBrace => {
                self.pos += 1;
                self.dict(offset)
            }
            TokenKind::RBracket => Err(ParseError::new(ErrorKind::UnbalancedBracket, offset)),
            TokenKind::RBrace => Err(ParseError::new(ErrorKind::UnbalancedBrace, offset)),
            _ => Err(unexpected(token)),
        }
    }

    fn dict(&mut self, open_offset: usize) -> Result<ParamValue, ParseError> {
        let mut entries: Vec<DictEntry> = Vec::new();
        let mut keyed = false;
        let mut positional = false;
        loop {
            let token = match self.peek() {
                Some(t) => t,
                None => return Err(ParseError::new(ErrorKind::UnbalancedBrace, open_offset)),
            };
            match &token.kind {
                TokenKind::RBrace => {
                    self.pos += 1;
                    // `{}` reads as an empty keyed dictionary.
                    return Ok(ParamValue::Dict(DictParam {
                        entries,
                        positional,
                    }));
                }
                TokenKind::SlashKey(key) => {
                    if positional {
                        return Err(ParseError::new(ErrorKind::MixedDictStyle, token.offset));
                    }
                    keyed = true;
                    let key_offset = token.offset;
                    let key = Identifier::new(key).map_err(|_| unexpected(token))?;
                    if entries.iter().any(|e| e.key.as_ref() == Some(&key)) {
                        return Err(ParseError::new(
                            ErrorKind::DuplicateParameter(key.as_str().to_owned()),
                            key_offset,
                        ));
                    }
                    self.pos += 1;
                    match self.peek() {
                        None => return Err(ParseError::new(ErrorKind::DanglingKey, key_offset)),
                        Some(t) if matches!(t.kind, TokenKind::RBrace | TokenKind::SlashKey(_)) => {
                            return Err(ParseError::new(ErrorKind::DanglingKey, key_offset));
                        }
                        Some(_) => {}
                    }
                    let value = self.value()?;
                    entries.push(DictEntry {
                        key: Some(key),
                        value,
                    });
                }
                _ => {
                    if keyed {
                        return Err(ParseError::new(ErrorKind::MixedDictStyle, token.offset));
                    }
                    positional = true;
                    let value = self.value()?;
                    entries.push(DictEntry { key: None, value });
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization helpers (canonical abridged forms)

pub fn serialize_tuples(tuples: &[Vec<i64>]) -> String {
    tuples
        .iter()
        .map(|t| {
            t.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("|")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lexes_weighted_sum_body() {
        let tokens = lex_text("[ { 1 V0 } ]", 0).unwrap();
        let kinds: Vec<&TokenKind> = tokens.iter().map(|t| &t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                &TokenKind::LBracket,
                &TokenKind::LBrace,
                &TokenKind::Integer(1),
                &TokenKind::Identifier("V0".to_owned()),
                &TokenKind::RBrace,
                &TokenKind::RBracket,
            ]
        );
    }

    #[test]
    fn lexes_mixed_body_with_atom() {
        let items = [
            BodyItem::Text {
                text: "12",
                offset: 0,
            },
            BodyItem::Atom {
                op: RelOp::Gt,
                offset: 2,
            },
        ];
        let tokens = lex_body(&items).unwrap();
        assert_eq!(tokens[0].kind, TokenKind::Integer(12));
        assert_eq!(tokens[1].kind, TokenKind::Atom(RelOp::Gt));
    }

    #[test]
    fn dangling_interval_operator_is_a_lex_error() {
        let items = [BodyItem::Text {
            text: "1..",
            offset: 0,
        }];
        assert!(matches!(
            lex_body(&items),
            Err(ParseError {
                kind: ErrorKind::Lex(_),
                ..
            })
        ));
    }

    #[test]
    fn slash_requires_adjacent_key() {
        assert!(lex_text("/ key 1", 0).is_err());
        let tokens = lex_text("/key 1", 0).unwrap();
        assert_eq!(tokens[0].kind, TokenKind::SlashKey("key".to_owned()));
    }

    #[test]
    fn domain_values_examples() {
        let (_, values) = parse_domain_values("1 5 10").unwrap();
        assert_eq!(values, vec![1, 5, 10]);
        let (pieces, values) = parse_domain_values("1..3 7 10..14").unwrap();
        assert_eq!(values, vec![1, 2, 3, 7, 10, 11, 12, 13, 14]);
        assert_eq!(
            pieces,
            vec![
                DomainPiece::Range(1, 3),
                DomainPiece::Single(7),
                DomainPiece::Range(10, 14),
            ]
        );
        let (_, values) = parse_domain_values("4..4").unwrap();
        assert_eq!(values, vec![4]);
    }

    #[test]
    fn domain_error_cases() {
        assert!(matches!(
            parse_domain_values("5..3"),
            Err(ParseError {
                kind: ErrorKind::InvertedInterval { min: 5, max: 3 },
                ..
            })
        ));
        assert!(matches!(
            parse_domain_values("   "),
            Err(ParseError {
                kind: ErrorKind::EmptyDomain,
                ..
            })
        ));
        // duplicates collapse in the expansion but stay visible in pieces
        let (pieces, values) = parse_domain_values("1..3 2").unwrap();
        assert_eq!(values, vec![1, 2, 3]);
        assert_eq!(pieces.len(), 2);
    }

    #[test]
    fn tuple_examples() {
        let tuples = parse_tuples("0 1|0 3|1 2|1 3|2 0|2 1|3 1", 2).unwrap();
        assert_eq!(tuples.len(), 7);
        assert_eq!(tuples[0], vec![0, 1]);
        assert_eq!(tuples[6], vec![3, 1]);
        let tuples = parse_tuples("0 0 1|0 2 1|1 0 1|1 2 0|2 1 1|2 2 2", 3).unwrap();
        assert_eq!(tuples.len(), 6);
        assert_eq!(parse_tuples("5 3", 2).unwrap(), vec![vec![5, 3]]);
        assert_eq!(parse_tuples("", 2).unwrap(), Vec::<Vec<i64>>::new());
        assert!(matches!(
            parse_tuples("0 1 2|3", 3),
            Err(ParseError {
                kind: ErrorKind::ArityMismatch { group: 1 },
                ..
            })
        ));
    }

    #[test]
    fn negative_tuple_values_are_accepted() {
        let tuples = parse_tuples("-1 2|3 -4", 2).unwrap();
        assert_eq!(tuples, vec![vec![-1, 2], vec![3, -4]]);
    }

    #[test]
    fn weighted_tuples_implicit_costs() {
        let parsed = parse_weighted_tuples("1:0 1|0 3|10:1 2|1 3|2 0|2 1|1:3 1", 2).unwrap();
        let costs: Vec<Cost> = parsed.iter().map(|(c, _)| *c).collect();
        assert_eq!(
            costs,
            [1, 1, 10, 10, 10, 10, 1]
                .iter()
                .map(|c| Cost::Finite(*c))
                .collect::<Vec<_>>()
        );
        let explicit =
            parse_weighted_tuples("1:0 1|1:0 3|10:1 2|10:1 3|10:2 0|10:2 1|1:3 1", 2).unwrap();
        assert_eq!(parsed, explicit);
    }

    #[test]
    fn weighted_tuples_multiline_and_fig12_forms() {
        let multiline = "1:  0 1|0 3|\n    10: 1 2|1 3|2 0|2 1|\n    1:  3 1";
        // a trailing pipe before a newline continues into the next group
        let parsed = parse_weighted_tuples(multiline, 2).unwrap();
        assert_eq!(parsed.len(), 7);
        let all_five =
            parse_weighted_tuples("5:0 0|0 1|1 0|1 1|1 2|2 1|2 2|2 3|3 2|3 3", 2).unwrap();
        assert_eq!(all_five.len(), 10);
        assert!(all_five.iter().all(|(c, _)| *c == Cost::Finite(5)));
    }

    #[test]
    fn weighted_tuples_error_cases() {
        assert!(matches!(
            parse_weighted_tuples("0 1|1 2", 2),
            Err(ParseError {
                kind: ErrorKind::MissingFirstCost,
                ..
            })
        ));
        assert!(matches!(
            parse_weighted_tuples("-1:0 1", 2),
            Err(ParseError {
                kind: ErrorKind::NegativeCost(-1),
                ..
            })
        ));
    }

    #[test]
    fn infinity_cost_prefix() {
        let items = [
            BodyItem::Infinity { offset: 0 },
            BodyItem::Text {
                text: ":2 0|5:2 1",
                offset: 10,
            },
        ];
        let tokens = lex_body(&items).unwrap();
        let parsed = parse_weighted_tuples_tokens(&tokens, 2).unwrap();
        assert_eq!(parsed[0].0, Cost::Infinity);
        assert_eq!(parsed[1].0, Cost::Finite(5));
    }

    #[test]
    fn formal_parameters_examples() {
        let params = parse_formal_parameters("int X int Y int Z").unwrap();
        let names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["X", "Y", "Z"]);
        assert!(parse_formal_parameters("").unwrap().is_empty());
        assert!(matches!(
            parse_formal_parameters("int X int X"),
            Err(ParseError {
                kind: ErrorKind::DuplicateParameter(_),
                ..
            })
        ));
        assert!(matches!(
            parse_formal_parameters("bool X"),
            Err(ParseError {
                kind: ErrorKind::UnknownType(_),
                ..
            })
        ));
    }

    #[test]
    fn effective_parameters_examples() {
        let params = parse_effective_parameters("V0 V1 1").unwrap();
        assert_eq!(params.len(), 3);
        assert!(matches!(params[2], EffectiveParam::Int(1)));
        let params = parse_effective_parameters("V1 2 V2 V3").unwrap();
        assert_eq!(params.len(), 4);
        assert!(parse_effective_parameters("[1]").is_err());
    }

    #[test]
    fn param_values_weighted_sum_example() {
        let items = [
            BodyItem::Text {
                text: "[ { 1 V0 } { 2 V1 } { -3 V2 } ]",
                offset: 0,
            },
            BodyItem::Atom {
                op: RelOp::Gt,
                offset: 32,
            },
            BodyItem::Text {
                text: " 12",
                offset: 37,
            },
        ];
        let values = parse_param_values(&lex_body(&items).unwrap()).unwrap();
        assert_eq!(values.len(), 3);
        match &values[0] {
            ParamValue::List(items) => {
                assert_eq!(items.len(), 3);
                for item in items {
                    match item {
                        ParamValue::Dict(d) => {
                            assert!(d.positional);
                            assert_eq!(d.entries.len(), 2);
                        }
                        other => panic!("expected dict, got {other:?}"),
                    }
                }
            }
            other => panic!("expected list, got {other:?}"),
        }
        assert_eq!(values[1], ParamValue::Atom(RelOp::Gt));
        assert_eq!(values[2], ParamValue::Int(12));
    }

    #[test]
    fn param_values_dict_styles() {
        let keyed = parse_param_values_text("{/origin X2 /duration 10 /height 1}").unwrap();
        match &keyed[0] {
            ParamValue::Dict(d) => {
                assert!(!d.positional);
                assert_eq!(d.entries.len(), 3);
            }
            other => panic!("expected dict, got {other:?}"),
        }
        let a = parse_param_values_text("{/x 2 /y 5}").unwrap();
        let b = parse_param_values_text("{/y 5 /x 2}").unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            parse_param_values_text("{/x 2 3}"),
            Err(ParseError {
                kind: ErrorKind::MixedDictStyle,
                ..
            })
        ));
        assert!(matches!(
            parse_param_values_text("{/x}"),
            Err(ParseError {
                kind: ErrorKind::DanglingKey,
                ..
            })
        ));
        assert!(matches!(
            parse_param_values_text("{1 2"),
            Err(ParseError {
                kind: ErrorKind::UnbalancedBrace,
                ..
            })
        ));
        assert!(matches!(
            parse_param_values_text("[1 2"),
            Err(ParseError {
                kind: ErrorKind::UnbalancedBracket,
                ..
            })
        ));
    }

    #[test]
    fn positional_dict_with_nil() {
        let values = parse_param_values(
            &lex_body(&[
                BodyItem::Text {
                    text: "{X2 10 ",
                    offset: 0,
                },
                BodyItem::Nil { offset: 7 },
                BodyItem::Text {
                    text: " 1}",
                    offset: 13,
                },
            ])
            .unwrap(),
        )
        .unwrap();
        match &values[0] {
            ParamValue::Dict(d) => {
                assert!(d.positional);
                assert_eq!(d.entries.len(), 4);
                assert_eq!(d.entries[2].value, ParamValue::Nil);
            }
            other => panic!("expected dict, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn tuples_round_trip(tuples in proptest::collection::vec(
            proptest::collection::vec(-1000i64..1000, 3), 0..20)) {
            let text = serialize_tuples(&tuples);
            let parsed = parse_tuples(&text, 3).unwrap();
            prop_assert_eq!(parsed, tuples);
        }

        #[test]
        fn error_offsets_lie_within_input(text in "[ -|:{}\\[\\]/a-zA-Z0-9_.]{0,40}") {
            if let Err(e) = parse_param_values_text(&text) {
                prop_assert!(e.offset <= text.len());
            }
            if let Err(e) = parse_domain_values(&text) {
                prop_assert!(e.offset <= text.len());
            }
        }

        #[test]
        fn implicit_cost_compression_matches_explicit(
            costs in proptest::collection::vec(0u64..20, 1..15)) {
            // build explicit and maximally-compressed forms of the same data
            let tuples: Vec<Vec<i64>> = (0..costs.len()).map(|i| vec![i as i64, 0]).collect();
            let explicit = costs.iter().zip(&tuples)
                .map(|(c, t)| format!("{c}:{} {}", t[0], t[1]))
                .collect::<Vec<_>>().join("|");
            let mut compressed_parts = Vec::new();
            let mut prev: Option<u64> = None;
            for (c, t) in costs.iter().zip(&tuples) {
                if prev == Some(*c) {
                    compressed_parts.push(format!("{} {}", t[0], t[1]));
                } else {
                    compressed_parts.push(format!("{c}:{} {}", t[0], t[1]));
                }
                prev = Some(*c);
            }
            let compressed = compressed_parts.join("|");
            prop_assert_eq!(
                parse_weighted_tuples(&explicit, 2).unwrap(),
                parse_weighted_tuples(&compressed, 2).unwrap()
            );
        }

        #[test]
        fn keyed_dict_parsing_is_order_insensitive(perm in proptest::sample::select(vec![
            ["a", "b", "c"], ["a", "c", "b"], ["b", "a", "c"],
            ["b", "c", "a"], ["c", "a", "b"], ["c", "b", "a"],
        ])) {
            let canonical = parse_param_values_text("{/a 1 /b 2 /c 3}").unwrap();
            let value_of = |k: &str| match k { "a" => 1, "b" => 2, _ => 3 };
            let text = format!(
                "{{/{} {} /{} {} /{} {}}}",
                perm[0], value_of(perm[0]),
                perm[1], value_of(perm[1]),
                perm[2], value_of(perm[2])
            );
            prop_assert_eq!(parse_param_values_text(&text).unwrap(), canonical);
        }
    }
}
