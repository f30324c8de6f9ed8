//! The functional expression language used by predicates and cost functions.
//!
//! Expressions are prefix calls like `and(ne(X,Y),ne(abs(sub(X,Y)),Z))`,
//! built from integer and Boolean operators. This module parses that syntax
//! into a typed AST, typechecks it against a formal-parameter list, evaluates
//! it under integer bindings, and prints it back in canonical form.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Identifier, RelOp};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum IntOp {
    Neg,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    Min,
    Max,
}

impl IntOp {
    pub fn name(self) -> &'static str {
        match self {
            IntOp::Neg => "neg",
            IntOp::Abs => "abs",
            IntOp::Add => "add",
            IntOp::Sub => "sub",
            IntOp::Mul => "mul",
            IntOp::Div => "div",
            IntOp::Mod => "mod",
            IntOp::Pow => "pow",
            IntOp::Min => "min",
            IntOp::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            IntOp::Neg | IntOp::Abs => 1,
            _ => 2,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BoolOp {
    Not,
    And,
    Or,
    Xor,
    Iff,
}

impl BoolOp {
    pub fn name(self) -> &'static str {
        match self {
            BoolOp::Not => "not",
            BoolOp::And => "and",
            BoolOp::Or => "or",
            BoolOp::Xor => "xor",
            BoolOp::Iff => "iff",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            BoolOp::Not => 1,
            _ => 2,
        }
    }
}

/// A node of the expression AST.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprNode {
    IntConst(i64),
    /// Reference to a formal parameter (always integer-typed).
    ParamRef(Identifier),
    BoolConst(bool),
    IntOp(IntOp, Vec<ExprNode>),
    BoolOp(BoolOp, Vec<ExprNode>),
    RelOp(RelOp, Vec<ExprNode>),
    If(Box<ExprNode>, Box<ExprNode>, Box<ExprNode>),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExprType {
    Int,
    Bool,
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExprType::Int => "int",
            ExprType::Bool => "bool",
        })
    }
}

/// Words that cannot be used as parameter names because they belong to the
/// expression grammar itself.
pub const RESERVED_WORDS: &[&str] = &[
    "neg", "abs", "add", "sub", "mul", "div", "mod", "pow", "min", "max", "not", "and", "or",
    "xor", "iff", "eq", "ne", "ge", "gt", "le", "lt", "if", "true", "false",
];

pub fn is_reserved_word(name: &str) -> bool {
    RESERVED_WORDS.contains(&name)
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("operator `{op}` takes {expected} argument(s), found {found}")]
    WrongArity {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("operator `{op}` expects {expected} for argument {child}")]
    TypeMismatch {
        op: &'static str,
        child: usize,
        expected: ExprType,
    },
    #[error("parameter `{0}` is not declared")]
    UnboundParameter(String),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative exponent {0}")]
    NegativeExponent(i64),
    #[error("arithmetic overflow in `{0}`")]
    Overflow(&'static str),
    #[error("no binding for parameter `{0}`")]
    UnboundParameter(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(v) => Some(v),
            Value::Int(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

/// Parses the functional notation into an AST. Identifiers outside the
/// operator set become parameter references; the tree is fully typed on the
/// way up, so arity and operand-type errors are caught here.
pub fn parse_functional(text: &str) -> Result<ExprNode, ExprError> {
    let mut parser = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    parser.skip_ws();
    let node = parser.expression()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("trailing input after expression"));
    }
    Ok(node)
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> Result<(), ExprError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", byte as char)))
        }
    }

    fn expression(&mut self) -> Result<ExprNode, ExprError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'+' || c == b'-' => self.integer(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.word(),
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn integer(&mut self) -> Result<ExprNode, ExprError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(self.error("expected digits"));
        }
        self.text[start..self.pos]
            .parse::<i64>()
            .map(ExprNode::IntConst)
            .map_err(|_| ExprError::Syntax {
                offset: start,
                message: "integer constant out of range".to_owned(),
            })
    }

    fn word(&mut self) -> Result<ExprNode, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let word = &self.text[start..self.pos];
        match word {
            "true" => return Ok(ExprNode::BoolConst(true)),
            "false" => return Ok(ExprNode::BoolConst(false)),
            _ => {}
        }
        let save = self.pos;
        self.skip_ws();
        let is_call = self.peek() == Some(b'(');
        if !is_call {
            self.pos = save;
            if is_reserved_word(word) {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("`{word}` is a reserved operator name"),
                });
            }
            let name = Identifier::new(word).map_err(|_| ExprError::Syntax {
                offset: start,
                message: format!("invalid identifier `{word}`"),
            })?;
            return Ok(ExprNode::ParamRef(name));
        }
        self.eat(b'(')?;
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() != Some(b')') {
            loop {
                args.push(self.expression()?);
                self.skip_ws();
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.skip_ws();
        self.eat(b')')?;
        build_call(word, args, start)
    }
}

fn build_call(word: &str, args: Vec<ExprNode>, offset: usize) -> Result<ExprNode, ExprError> {
    let check_arity = |op: &'static str, expected: usize| -> Result<(), ExprError> {
        if args.len() != expected {
            Err(ExprError::WrongArity {
                op,
                expected,
                found: args.len(),
            })
        } else {
            Ok(())
        }
    };
    let int_op = |op: IntOp| -> Option<IntOp> { Some(op) };
    if let Some(op) = match word {
        "neg" => int_op(IntOp::Neg),
        "abs" => int_op(IntOp::Abs),
        "add" => int_op(IntOp::Add),
        "sub" => int_op(IntOp::Sub),
        "mul" => int_op(IntOp::Mul),
        "div" => int_op(IntOp::Div),
        "mod" => int_op(IntOp::Mod),
        "pow" => int_op(IntOp::Pow),
        "min" => int_op(IntOp::Min),
        "max" => int_op(IntOp::Max),
        _ => None,
    } {
        check_arity(op.name(), op.arity())?;
        for (i, arg) in args.iter().enumerate() {
            require_type(arg, ExprType::Int, op.name(), i)?;
        }
        return Ok(ExprNode::IntOp(op, args));
    }
    if let Some(op) = match word {
        "not" => Some(BoolOp::Not),
        "and" => Some(BoolOp::And),
        "or" => Some(BoolOp::Or),
        "xor" => Some(BoolOp::Xor),
        "iff" => Some(BoolOp::Iff),
        _ => None,
    } {
        check_arity(op.name(), op.arity())?;
        for (i, arg) in args.iter().enumerate() {
            require_type(arg, ExprType::Bool, op.name(), i)?;
        }
        return Ok(ExprNode::BoolOp(op, args));
    }
    if let Some(op) = RelOp::from_name(word) {
        check_arity(op.name(), 2)?;
        for (i, arg) in args.iter().enumerate() {
            require_type(arg, ExprType::Int, op.name(), i)?;
        }
        return Ok(ExprNode::RelOp(op, args));
    }
    if word == "if" {
        check_arity("if", 3)?;
        let mut it = args.into_iter();
        let cond = it.next().unwrap();
        let then = it.next().unwrap();
        let els = it.next().unwrap();
        require_type(&cond, ExprType::Bool, "if", 0)?;
        require_type(&then, ExprType::Int, "if", 1)?;
        require_type(&els, ExprType::Int, "if", 2)?;
        return Ok(ExprNode::If(Box::new(cond), Box::new(then), Box::new(els)));
    }
    Err(ExprError::Syntax {
        offset,
        message: format!("unknown operator `{word}`"),
    })
}

fn require_type(
    node: &ExprNode,
    expected: ExprType,
    op: &'static str,
    child: usize,
) -> Result<(), ExprError> {
    if node_type(node) != expected {
        Err(ExprError::TypeMismatch {
            op,
            child,
            expected,
        })
    } else {
        Ok(())
    }
}

/// The type of a well-formed node. Parameter references are integers (the
/// only parameter type is `int`).
pub fn node_type(node: &ExprNode) -> ExprType {
    match node {
        ExprNode::IntConst(_) | ExprNode::ParamRef(_) | ExprNode::IntOp(..) | ExprNode::If(..) => {
            ExprType::Int
        }
        ExprNode::BoolConst(_) | ExprNode::BoolOp(..) | ExprNode::RelOp(..) => ExprType::Bool,
    }
}

// ---------------------------------------------------------------------------
// Typechecking

/// Checks parameter bindings and arities over the whole tree and returns the
/// root type. Every referenced parameter must be among `formals`.
pub fn typecheck(node: &ExprNode, formals: &[Identifier]) -> Result<ExprType, ExprError> {
    match node {
        ExprNode::IntConst(_) => Ok(ExprType::Int),
        ExprNode::BoolConst(_) => Ok(ExprType::Bool),
        ExprNode::ParamRef(name) => {
            if formals.iter().any(|f| f == name) {
                Ok(ExprType::Int)
            } else {
                Err(ExprError::UnboundParameter(name.as_str().to_owned()))
            }
        }
        ExprNode::IntOp(op, children) => {
            check_children(op.name(), op.arity(), children, ExprType::Int, formals)?;
            Ok(ExprType::Int)
        }
        ExprNode::BoolOp(op, children) => {
            check_children(op.name(), op.arity(), children, ExprType::Bool, formals)?;
            Ok(ExprType::Bool)
        }
        ExprNode::RelOp(op, children) => {
            check_children(op.name(), 2, children, ExprType::Int, formals)?;
            Ok(ExprType::Bool)
        }
        ExprNode::If(cond, then, els) => {
            for (i, (child, expected)) in [
                (cond.as_ref(), ExprType::Bool),
                (then.as_ref(), ExprType::Int),
                (els.as_ref(), ExprType::Int),
            ]
            .into_iter()
            .enumerate()
            {
                let found = typecheck(child, formals)?;
                if found != expected {
                    return Err(ExprError::TypeMismatch {
                        op: "if",
                        child: i,
                        expected,
                    });
                }
            }
            Ok(ExprType::Int)
        }
    }
}

fn check_children(
    op: &'static str,
    arity: usize,
    children: &[ExprNode],
    expected: ExprType,
    formals: &[Identifier],
) -> Result<(), ExprError> {
    if children.len() != arity {
        return Err(ExprError::WrongArity {
            op,
            expected: arity,
            found: children.len(),
        });
    }
    for (i, child) in children.iter().enumerate() {
        let found = typecheck(child, formals)?;
        if found != expected {
            return Err(ExprError::TypeMismatch {
                op,
                child: i,
                expected,
            });
        }
    }
    Ok(())
}

/// Collects every parameter name referenced by the expression.
pub fn referenced_params(node: &ExprNode) -> Vec<&Identifier> {
    let mut out = Vec::new();
    collect_params(node, &mut out);
    out
}

fn collect_params<'a>(node: &'a ExprNode, out: &mut Vec<&'a Identifier>) {
    match node {
        ExprNode::ParamRef(name) => {
            if !out.contains(&name) {
                out.push(name);
            }
        }
        ExprNode::IntOp(_, children)
        | ExprNode::BoolOp(_, children)
        | ExprNode::RelOp(_, children) => {
            for c in children {
                collect_params(c, out);
            }
        }
        ExprNode::If(a, b, c) => {
            collect_params(a, out);
            collect_params(b, out);
            collect_params(c, out);
        }
        ExprNode::IntConst(_) | ExprNode::BoolConst(_) => {}
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Evaluates a typechecked expression under integer bindings. Arithmetic is
/// 64-bit signed; overflow is reported, never wrapped. `if` evaluates only
/// the selected branch; all other operators evaluate every operand.
pub fn evaluate(node: &ExprNode, bindings: &HashMap<String, i64>) -> Result<Value, EvalError> {
    match node {
        ExprNode::IntConst(v) => Ok(Value::Int(*v)),
        ExprNode::BoolConst(v) => Ok(Value::Bool(*v)),
        ExprNode::ParamRef(name) => bindings
            .get(name.as_str())
            .map(|v| Value::Int(*v))
            .ok_or_else(|| EvalError::UnboundParameter(name.as_str().to_owned())),
        ExprNode::IntOp(op, children) => {
            let a = eval_int(&children[0], bindings)?;
            if op.arity() == 1 {
                return int_op_1(*op, a).map(Value::Int);
            }
            let b = eval_int(&children[1], bindings)?;
            int_op_2(*op, a, b).map(Value::Int)
        }
        ExprNode::BoolOp(op, children) => {
            let a = eval_bool(&children[0], bindings)?;
            let value = match op {
                BoolOp::Not => !a,
                BoolOp::And => {
                    let b = eval_bool(&children[1], bindings)?;
                    a && b
                }
                BoolOp::Or => {
                    let b = eval_bool(&children[1], bindings)?;
                    a || b
                }
                BoolOp::Xor => {
                    let b = eval_bool(&children[1], bindings)?;
                    a != b
                }
                BoolOp::Iff => {
                    let b = eval_bool(&children[1], bindings)?;
                    a == b
                }
            };
            Ok(Value::Bool(value))
        }
        ExprNode::RelOp(op, children) => {
            let a = eval_int(&children[0], bindings)?;
            let b = eval_int(&children[1], bindings)?;
            Ok(Value::Bool(op.apply(a, b)))
        }
        ExprNode::If(cond, then, els) => {
            if eval_bool(cond, bindings)? {
                evaluate(then, bindings)
            } else {
                evaluate(els, bindings)
            }
        }
    }
}

fn eval_int(node: &ExprNode, bindings: &HashMap<String, i64>) -> Result<i64, EvalError> {
    match evaluate(node, bindings)? {
        Value::Int(v) => Ok(v),
        Value::Bool(_) => unreachable!("type discipline enforced at parse time"),
    }
}

fn eval_bool(node: &ExprNode, bindings: &HashMap<String, i64>) -> Result<bool, EvalError> {
    match evaluate(node, bindings)? {
        Value::Bool(v) => Ok(v),
        Value::Int(_) => unreachable!("type discipline enforced at parse time"),
    }
}

fn int_op_1(op: IntOp, a: i64) -> Result<i64, EvalError> {
    match op {
        IntOp::Neg => a.checked_neg().ok_or(EvalError::Overflow("neg")),
        IntOp::Abs => a.checked_abs().ok_or(EvalError::Overflow("abs")),
        _ => unreachable!(),
    }
}

// Division and remainder truncate toward zero, with the remainder taking the
// dividend's sign: div(-7,2) = -3, mod(-7,2) = -1.
fn div_mod(a: i64, b: i64) -> Result<(i64, i64), EvalError> {
    if b == 0 {
        return Err(EvalError::DivisionByZero);
    }
    let q = a.checked_div(b).ok_or(EvalError::Overflow("div"))?;
    let r = a.checked_rem(b).ok_or(EvalError::Overflow("mod"))?;
    Ok((q, r))
}

fn int_op_2(op: IntOp, a: i64, b: i64) -> Result<i64, EvalError> {
    match op {
        IntOp::Add => a.checked_add(b).ok_or(EvalError::Overflow("add")),
        IntOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow("sub")),
        IntOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow("mul")),
        IntOp::Div => div_mod(a, b).map(|(q, _)| q),
        IntOp::Mod => div_mod(a, b).map(|(_, r)| r),
        IntOp::Pow => {
            if b < 0 {
                return Err(EvalError::NegativeExponent(b));
            }
            let exp = u32::try_from(b).map_err(|_| EvalError::Overflow("pow"))?;
            a.checked_pow(exp).ok_or(EvalError::Overflow("pow"))
        }
        IntOp::Min => Ok(a.min(b)),
        IntOp::Max => Ok(a.max(b)),
        IntOp::Neg | IntOp::Abs => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Printing

/// Canonical functional rendering: operator calls with no interior
/// whitespace, e.g. `and(ne(X,Y),ne(abs(sub(X,Y)),Z))`.
pub fn print_functional(node: &ExprNode) -> String {
    let mut out = String::new();
    print_into(node, &mut out);
    out
}

fn print_into(node: &ExprNode, out: &mut String) {
    match node {
        ExprNode::IntConst(v) => {
            out.push_str(&v.to_string());
        }
        ExprNode::BoolConst(v) => out.push_str(if *v { "true" } else { "false" }),
        ExprNode::ParamRef(name) => out.push_str(name.as_str()),
        ExprNode::IntOp(op, children) => print_call(op.name(), children, out),
        ExprNode::BoolOp(op, children) => print_call(op.name(), children, out),
        ExprNode::RelOp(op, children) => print_call(op.name(), children, out),
        ExprNode::If(cond, then, els) => {
            out.push_str("if(");
            print_into(cond, out);
            out.push(',');
            print_into(then, out);
            out.push(',');
            print_into(els, out);
            out.push(')');
        }
    }
}

fn print_call(name: &str, children: &[ExprNode], out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        print_into(child, out);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident(s: &str) -> Identifier {
        Identifier::new(s).unwrap()
    }

    fn bind(pairs: &[(&str, i64)]) -> HashMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    const QUEENS: &str = "and(ne(X,Y),ne(abs(sub(X,Y)),Z))";

    #[test]
    fn parses_queens_predicate() {
        let node = parse_functional(QUEENS).unwrap();
        assert_eq!(node_type(&node), ExprType::Bool);
        let params = referenced_params(&node);
        let names: Vec<&str> = params.iter().map(|p| p.as_str()).collect();
        assert_eq!(names, vec!["X", "Y", "Z"]);
    }

    #[test]
    fn parses_if_with_integer_branches() {
        let node = parse_functional("if(eq(X,Y),0,5)").unwrap();
        assert_eq!(node_type(&node), ExprType::Int);
        assert!(matches!(node, ExprNode::If(..)));
    }

    #[test]
    fn arity_and_type_errors() {
        assert!(matches!(
            parse_functional("add(1)"),
            Err(ExprError::WrongArity { op: "add", .. })
        ));
        assert!(matches!(
            parse_functional("add(true,1)"),
            Err(ExprError::TypeMismatch {
                op: "add",
                child: 0,
                ..
            })
        ));
        assert!(matches!(
            parse_functional("add(add,1)"),
            Err(ExprError::Syntax { .. })
        ));
    }

    #[test]
    fn typecheck_reports_unbound_params() {
        let node = parse_functional("ne(X,W)").unwrap();
        let formals = [ident("X"), ident("Y")];
        assert_eq!(
            typecheck(&node, &formals),
            Err(ExprError::UnboundParameter("W".to_owned()))
        );
    }

    #[test]
    fn typecheck_fig12_function_bodies() {
        let f1 = parse_functional("if(gt(mul(add(X,Y),Z),5),0,2)").unwrap();
        let formals = [ident("X"), ident("Y"), ident("Z")];
        assert_eq!(typecheck(&f1, &formals), Ok(ExprType::Int));
        let queens = parse_functional(QUEENS).unwrap();
        assert_eq!(typecheck(&queens, &formals), Ok(ExprType::Bool));
    }

    #[test]
    fn evaluates_queens_predicate() {
        let node = parse_functional(QUEENS).unwrap();
        let v = evaluate(&node, &bind(&[("X", 1), ("Y", 3), ("Z", 2)])).unwrap();
        assert_eq!(v, Value::Bool(false));
        let v = evaluate(&node, &bind(&[("X", 1), ("Y", 3), ("Z", 1)])).unwrap();
        assert_eq!(v, Value::Bool(true));
    }

    #[test]
    fn definitional_operators() {
        let cases = [
            ("neg(3)", -3),
            ("abs(-4)", 4),
            ("min(2,5)", 2),
            ("max(2,5)", 5),
            ("pow(0,0)", 1),
            ("pow(2,10)", 1024),
            ("div(-7,2)", -3),
            ("mod(-7,2)", -1),
        ];
        for (text, expected) in cases {
            let node = parse_functional(text).unwrap();
            assert_eq!(
                evaluate(&node, &HashMap::new()).unwrap(),
                Value::Int(expected),
                "{text}"
            );
        }
    }

    #[test]
    fn if_selects_exactly_one_branch() {
        let node = parse_functional("if(lt(1,2),5,div(1,0))").unwrap();
        assert_eq!(evaluate(&node, &HashMap::new()).unwrap(), Value::Int(5));
        let node = parse_functional("if(gt(1,2),div(1,0),7)").unwrap();
        assert_eq!(evaluate(&node, &HashMap::new()).unwrap(), Value::Int(7));
    }

    #[test]
    fn division_by_zero_and_negative_exponent() {
        let node = parse_functional("div(7,0)").unwrap();
        assert_eq!(
            evaluate(&node, &HashMap::new()),
            Err(EvalError::DivisionByZero)
        );
        let node = parse_functional("mod(7,0)").unwrap();
        assert_eq!(
            evaluate(&node, &HashMap::new()),
            Err(EvalError::DivisionByZero)
        );
        let node = parse_functional("pow(2,-1)").unwrap();
        assert_eq!(
            evaluate(&node, &HashMap::new()),
            Err(EvalError::NegativeExponent(-1))
        );
    }

    #[test]
    fn overflow_is_reported() {
        let node = parse_functional(&format!("add({},1)", i64::MAX)).unwrap();
        assert_eq!(
            evaluate(&node, &HashMap::new()),
            Err(EvalError::Overflow("add"))
        );
    }

    #[test]
    fn boolean_truth_tables() {
        for a in [false, true] {
            for b in [false, true] {
                let bindings = bind(&[("P", a as i64), ("Q", b as i64)]);
                let mk = |op: &str| format!("{op}(eq(P,1),eq(Q,1))");
                let run = |text: &str| {
                    evaluate(&parse_functional(text).unwrap(), &bindings)
                        .unwrap()
                        .as_bool()
                        .unwrap()
                };
                assert_eq!(run(&mk("and")), a && b);
                assert_eq!(run(&mk("or")), a || b);
                assert_eq!(run(&mk("xor")), a != b);
                assert_eq!(run(&mk("iff")), a == b);
            }
        }
    }

    #[test]
    fn printer_is_stable_under_reparse() {
        for text in [
            QUEENS,
            "if(gt(mul(add(X,Y),Z),5),0,2)",
            "or(true,iff(false,eq(neg(A),-3)))",
            "le(pow(X,2),mod(Y,max(Z,1)))",
        ] {
            let node = parse_functional(text).unwrap();
            let printed = print_functional(&node);
            let reparsed = parse_functional(&printed).unwrap();
            assert_eq!(node, reparsed);
            assert_eq!(print_functional(&reparsed), printed);
        }
    }

    proptest::proptest! {
        #[test]
        fn sub_equals_add_of_negation(x in -10_000i64..10_000, y in -10_000i64..10_000) {
            let sub = parse_functional(&format!("sub({x},{y})")).unwrap();
            let add_neg = parse_functional(&format!("add({x},neg({y}))")).unwrap();
            let empty = HashMap::new();
            proptest::prop_assert_eq!(
                evaluate(&sub, &empty).unwrap(),
                evaluate(&add_neg, &empty).unwrap()
            );
        }
    }
}
