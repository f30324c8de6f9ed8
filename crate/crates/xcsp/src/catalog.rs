//! Recognized global constraints and the conventional key order of their
//! dictionary parameters.
//!
//! Global names compare case-insensitively. The four competition globals
//! (`allDifferent`, `weightedSum`, `element`, `cumulative`) have evaluation
//! semantics; the remaining catalog entries are recognized so their
//! parameters can be bound and round-tripped, but they are not evaluated.

/// Shape of one parameter of a global constraint.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SigParam {
    /// An integer constant or a variable reference.
    Value,
    /// A relational-operator atom.
    Operator,
    /// A collection: a list of dictionaries with the given conventional key
    /// order (or bare values when the collection has a single attribute).
    Collection(&'static [&'static str]),
    /// A list of collections (nested one level), as in `diffn`.
    CollectionOfCollections(&'static [&'static str]),
}

#[derive(Copy, Clone, Debug)]
pub struct GlobalSig {
    /// Lower-case canonical name.
    pub name: &'static str,
    pub params: &'static [SigParam],
    /// Whether the semantics module can evaluate it.
    pub evaluated: bool,
}

pub const GLOBALS: &[GlobalSig] = &[
    GlobalSig {
        name: "alldifferent",
        params: &[SigParam::Collection(&["var"])],
        evaluated: true,
    },
    GlobalSig {
        name: "weightedsum",
        params: &[
            SigParam::Collection(&["coef", "var"]),
            SigParam::Operator,
            SigParam::Value,
        ],
        evaluated: true,
    },
    GlobalSig {
        name: "element",
        params: &[
            SigParam::Value,
            SigParam::Collection(&["value"]),
            SigParam::Value,
        ],
        evaluated: true,
    },
    GlobalSig {
        name: "cumulative",
        params: &[
            SigParam::Collection(&["origin", "duration", "end", "height"]),
            SigParam::Value,
        ],
        evaluated: true,
    },
    GlobalSig {
        name: "among",
        params: &[
            SigParam::Value,
            SigParam::Collection(&["var"]),
            SigParam::Collection(&["val"]),
        ],
        evaluated: false,
    },
    GlobalSig {
        name: "atleast",
        params: &[
            SigParam::Value,
            SigParam::Collection(&["var"]),
            SigParam::Value,
        ],
        evaluated: false,
    },
    GlobalSig {
        name: "atmost",
        params: &[
            SigParam::Value,
            SigParam::Collection(&["var"]),
            SigParam::Value,
        ],
        evaluated: false,
    },
    GlobalSig {
        name: "cycle",
        params: &[SigParam::Value, SigParam::Collection(&["index", "succ"])],
        evaluated: false,
    },
    GlobalSig {
        name: "diffn",
        params: &[SigParam::CollectionOfCollections(&[
            "origin", "size", "end",
        ])],
        evaluated: false,
    },
    GlobalSig {
        name: "disjunctive",
        params: &[SigParam::Collection(&["origin", "duration"])],
        evaluated: false,
    },
    GlobalSig {
        name: "global_cardinality",
        params: &[
            SigParam::Collection(&["var"]),
            SigParam::Collection(&["val", "noccurrence"]),
        ],
        evaluated: false,
    },
    GlobalSig {
        name: "global_cardinality_with_costs",
        params: &[
            SigParam::Collection(&["var"]),
            SigParam::Collection(&["val", "noccurrence"]),
            SigParam::Collection(&["i", "j", "c"]),
            SigParam::Value,
        ],
        evaluated: false,
    },
    GlobalSig {
        name: "minimum_weight_alldifferent",
        params: &[
            SigParam::Collection(&["var"]),
            SigParam::Collection(&["i", "j", "c"]),
            SigParam::Value,
        ],
        evaluated: false,
    },
    GlobalSig {
        name: "not_all_equal",
        params: &[SigParam::Collection(&["var"])],
        evaluated: false,
    },
    GlobalSig {
        name: "nvalue",
        params: &[SigParam::Value, SigParam::Collection(&["var"])],
        evaluated: false,
    },
    GlobalSig {
        name: "nvalues",
        params: &[
            SigParam::Collection(&["var"]),
            SigParam::Operator,
            SigParam::Value,
        ],
        evaluated: false,
    },
];

/// Looks a global up by name, case-insensitively.
pub fn lookup(name: &str) -> Option<&'static GlobalSig> {
    let lower = name.to_ascii_lowercase();
    GLOBALS.iter().find(|g| g.name == lower)
}

/// The four globals the competition subset allows.
pub fn competition_allowed(name: &str) -> bool {
    lookup(name).map(|g| g.evaluated).unwrap_or(false)
}
