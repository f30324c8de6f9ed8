//! Reading, writing and converting XCSP 2.1 documents.
//!
//! The reader accepts fully-tagged, abridged and mixed bodies; the writer
//! produces a canonical document in either notation, so converting is
//! load-then-write. Writes are deterministic: the same instance always
//! serializes to the same bytes.

mod read;
mod write;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::Instance;

/// The two interchangeable representations of a document.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Notation {
    Tagged,
    Abridged,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One finding about a document or instance. Error severity means the load
/// (or validation) fails; warnings are informational.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    /// Element path such as `instance/relations/relation[R0]`.
    pub path: String,
    /// Byte offset into the source document (0 for model-level findings).
    pub offset: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(
        code: &'static str,
        path: impl Into<String>,
        offset: usize,
        message: impl Into<String>,
    ) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            code,
            path: path.into(),
            offset,
            message: message.into(),
        }
    }

    pub fn warning(
        code: &'static str,
        path: impl Into<String>,
        offset: usize,
        message: impl Into<String>,
    ) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            code,
            path: path.into(),
            offset,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{severity} {} at {} (offset {}): {}",
            self.code, self.path, self.offset, self.message
        )
    }
}

/// Diagnostic codes, shared by the loader and the validators.
pub mod codes {
    // document-level
    pub const XML_ERROR: &str = "XmlError";
    pub const SCHEMA_ERROR: &str = "SchemaError";
    pub const BAD_ATTRIBUTE: &str = "BadAttributeValue";
    pub const BAD_FORMAT: &str = "BadFormat";
    pub const COUNT_MISMATCH: &str = "CountMismatch";
    pub const UNKNOWN_ATTRIBUTE: &str = "UnknownAttribute";
    pub const UNKNOWN_ELEMENT: &str = "UnknownElement";
    pub const DEPRECATED_ATTRIBUTE: &str = "DeprecatedAttribute";
    pub const DEPRECATED_IMPLICIT_ALLDIFFERENT: &str = "DeprecatedImplicitAllDifferent";
    pub const DEPRECATED_WEIGHTED_SUM_SYNTAX: &str = "DeprecatedWeightedSumSyntax";
    pub const DUPLICATE_NAME: &str = "DuplicateName";
    pub const UNKNOWN_GLOBAL: &str = "UnknownGlobal";
    pub const QUANTIFIER_SPELLING: &str = "QuantifierSpelling";
    pub const MISSING_PARAMETERS_DEFAULTED: &str = "MissingParametersDefaulted";
    pub const EXTENSION_PARAMETERS_IGNORED: &str = "ExtensionParametersIgnored";
    pub const UNSUPPORTED_REPRESENTATION: &str = "UnsupportedRepresentation";
    pub const MISSING_FUNCTIONAL: &str = "MissingFunctional";
    pub const POSITIONAL_DICT_UNKNOWN_ORDER: &str = "PositionalDictUnknownOrder";
    pub const DICT_ARITY_MISMATCH: &str = "DictArityMismatch";
    pub const RESERVED_PARAMETER_NAME: &str = "ReservedParameterName";

    // body-fragment syntax (lifted from the micro-parsers)
    pub const LEX_ERROR: &str = "LexError";
    pub const EMPTY_DOMAIN: &str = "EmptyDomain";
    pub const INVERTED_INTERVAL: &str = "InvertedInterval";
    pub const ARITY_MISMATCH: &str = "ArityMismatch";
    pub const MISSING_FIRST_COST: &str = "MissingFirstCost";
    pub const NEGATIVE_COST: &str = "NegativeCost";
    pub const UNKNOWN_TYPE: &str = "UnknownType";
    pub const DUPLICATE_PARAMETER: &str = "DuplicateParameter";
    pub const UNBALANCED_BRACKET: &str = "UnbalancedBracket";
    pub const UNBALANCED_BRACE: &str = "UnbalancedBrace";
    pub const MIXED_DICT_STYLE: &str = "MixedDictStyle";
    pub const DANGLING_KEY: &str = "DanglingKey";

    // expression syntax
    pub const EXPR_SYNTAX: &str = "ExprSyntax";
    pub const WRONG_ARITY: &str = "WrongArity";
    pub const TYPE_MISMATCH: &str = "TypeMismatch";
    pub const UNBOUND_PARAMETER: &str = "UnboundParameter";

    // structural validation
    pub const UNRESOLVED_REFERENCE: &str = "UnresolvedReference";
    pub const WRONG_REFERENCE_KIND: &str = "WrongReferenceKind";
    pub const DUPLICATE_SCOPE_VARIABLE: &str = "DuplicateScopeVariable";
    pub const EMPTY_SCOPE: &str = "EmptyScope";
    pub const ARITY_ATTR_MISMATCH: &str = "ArityAttrMismatch";
    pub const EXTENSION_ARITY: &str = "ExtensionArity";
    pub const EFFECTIVE_PARAM_COUNT: &str = "EffectiveParamCount";
    pub const SCOPE_NOT_COVERED: &str = "ScopeNotCovered";
    pub const PARAM_NOT_IN_SCOPE: &str = "ParamNotInScope";
    pub const PREDICATE_NOT_BOOLEAN: &str = "PredicateNotBoolean";
    pub const FUNCTION_NOT_INTEGER: &str = "FunctionNotInteger";
    pub const TUPLE_ARITY: &str = "TupleArity";
    pub const SOFT_COSTS_MISMATCH: &str = "SoftCostsMismatch";
    pub const EMPTY_DOMAIN_VALUES: &str = "EmptyDomainValues";
    pub const MISSING_MAXIMAL_COST: &str = "MissingMaximalCost";
    pub const BAD_MAXIMAL_COST: &str = "BadMaximalCost";
    pub const COST_EXCEEDS_MAXIMAL: &str = "CostExceedsMaximalCost";
    pub const SOFT_RELATION_OUTSIDE_WCSP: &str = "SoftRelationOutsideWcsp";
    pub const FUNCTION_OUTSIDE_WCSP: &str = "FunctionOutsideWcsp";
    pub const MAXIMAL_COST_OUTSIDE_WCSP: &str = "MaximalCostOutsideWcsp";
    pub const QUANTIFICATION_TYPE_MISMATCH: &str = "QuantificationTypeMismatch";
    pub const UNQUANTIFIED_VARIABLE: &str = "UnquantifiedVariable";
    pub const DUPLICATE_QUANTIFICATION: &str = "DuplicateQuantification";
    pub const RESTRICTION_IN_PURE_QCSP: &str = "RestrictionInPureQcsp";
    pub const RESTRICTION_SCOPE_ORDER: &str = "RestrictionScopeOrder";

    // competition restrictions
    pub const NAMING_CONVENTION: &str = "NamingConvention";
    pub const DOMAIN_VALUES_NOT_SORTED: &str = "DomainValuesNotSorted";
    pub const DUPLICATE_DOMAIN_VALUE: &str = "DuplicateDomainValue";
    pub const TUPLES_NOT_SORTED: &str = "TuplesNotSorted";
    pub const DUPLICATE_TUPLE: &str = "DuplicateTuple";
    pub const EMPTY_RELATION: &str = "EmptyRelation";
    pub const UNREFERENCED_DOMAIN: &str = "UnreferencedDomain";
    pub const UNREFERENCED_RELATION: &str = "UnreferencedRelation";
    pub const UNREFERENCED_PREDICATE: &str = "UnreferencedPredicate";
    pub const UNREFERENCED_VARIABLE: &str = "UnreferencedVariable";
    pub const CONSTRAINTS_NOT_SORTED: &str = "ConstraintsNotSorted";
    pub const TUPLE_OUT_OF_DOMAIN: &str = "TupleOutOfDomain";
    pub const GLOBAL_NOT_ALLOWED: &str = "GlobalNotAllowed";
    pub const CONSTANT_IN_ALLDIFFERENT: &str = "ConstantInAllDifferent";
    pub const ZERO_COEFFICIENT: &str = "ZeroCoefficient";
    pub const DUPLICATE_SUM_VARIABLE: &str = "DuplicateSumVariable";
    pub const SUM_VARIABLE_NOT_IN_SCOPE: &str = "SumVariableNotInScope";
    pub const UNUSED_FORMAL_PARAMETER: &str = "UnusedFormalParameter";
    pub const PRESENTATION_ATTRIBUTE: &str = "PresentationAttribute";
    pub const PRESENTATION_CONTENT: &str = "PresentationContent";
    pub const MAXIMAL_COST_INFINITE: &str = "MaximalCostInfinite";
    pub const INITIAL_COST_NOT_ZERO: &str = "InitialCostNotZero";
    pub const FUNCTIONS_NOT_ALLOWED: &str = "FunctionsNotAllowed";
    pub const SAME_SCOPE_MERGE_HINT: &str = "SameScopeMergeHint";
}

/// A successfully loaded instance plus any warnings produced on the way.
#[derive(Debug)]
pub struct Loaded {
    pub instance: Instance,
    pub diagnostics: Vec<Diagnostic>,
}

/// A failed load: at least one diagnostic has error severity.
#[derive(Error, Debug)]
pub struct LoadError {
    pub diagnostics: Vec<Diagnostic>,
}

impl LoadError {
    pub fn first_error(&self) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.is_error())
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first_error() {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("load failed"),
        }
    }
}

/// Parses a document into an [`Instance`]. Bodies may use either notation
/// or a mix of both. All diagnostics are collected; any error-severity
/// diagnostic fails the load.
pub fn load_instance(bytes: &[u8]) -> Result<Loaded, LoadError> {
    read::load(bytes)
}

/// Serializes an instance canonically in the requested notation. Output is a
/// pure function of `(instance, notation)`.
pub fn write_instance(instance: &Instance, notation: Notation) -> Vec<u8> {
    write::write(instance, notation).into_bytes()
}

/// Loads a document and re-serializes it in the target notation.
pub fn convert(bytes: &[u8], target: Notation) -> Result<(Vec<u8>, Vec<Diagnostic>), LoadError> {
    let loaded = load_instance(bytes)?;
    Ok((write_instance(&loaded.instance, target), loaded.diagnostics))
}
