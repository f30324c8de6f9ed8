//! The acceptance suite: one test per criterion, each printing a pass/fail
//! line. Expected values come from independent oracles computed inside the
//! tests (full enumeration, permutation search, exhaustive sweeps), never
//! from the code paths under test.

mod common;

use std::collections::HashSet;
use std::time::Instant;

use common::{fixture_bytes, fixture_instance, FIXTURES};
use xcsp::document::{self, codes, Notation};
use xcsp::expr;
use xcsp::lexparse;
use xcsp::model::{ConstraintRef, Cost, Entity};
use xcsp::semantics::{
    check_solution, eval_qcsp, solve_bruteforce, Assignment, Budget, SolutionReport, SolveMode,
    SolveResult,
};
use xcsp::validate;

fn verdict(number: u32, description: &str, passed: bool) {
    println!(
        "criterion {number}: {} - {description}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {number} failed: {description}");
}

#[test]
fn criterion_1_fixture_parsing() {
    let start = Instant::now();
    let mut ok = true;
    for name in FIXTURES {
        match document::load_instance(&fixture_bytes(name)) {
            Ok(loaded) => {
                if loaded.diagnostics.iter().any(|d| d.is_error()) {
                    eprintln!("{name}: unexpected error diagnostics");
                    ok = false;
                }
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                ok = false;
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    verdict(
        1,
        &format!(
            "all {} example instances load with zero errors in {:?} (< 1 s)",
            FIXTURES.len(),
            elapsed
        ),
        ok,
    );
}

#[test]
fn criterion_2_round_trip() {
    let start = Instant::now();
    let mut ok = true;
    for name in FIXTURES {
        let bytes = fixture_bytes(name);
        let original = document::load_instance(&bytes).unwrap().instance;
        for notation in [Notation::Abridged, Notation::Tagged] {
            let written = document::write_instance(&original, notation);
            let rewritten = document::write_instance(&original, notation);
            if written != rewritten {
                eprintln!("{name} ({notation:?}): writes are not byte-deterministic");
                ok = false;
            }
            match document::load_instance(&written) {
                Ok(reloaded) => {
                    if !original.model_eq(&reloaded.instance) {
                        eprintln!("{name} ({notation:?}): reload is not model-equal");
                        ok = false;
                    }
                }
                Err(e) => {
                    eprintln!("{name} ({notation:?}): reload failed: {e}");
                    ok = false;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    verdict(
        2,
        &format!("load-write-load is model-equal for every fixture and both notations, byte-deterministic, in {elapsed:?} (< 1 s)"),
        ok,
    );
}

#[test]
fn criterion_3_interval_and_weighted_tuple_grammar() {
    let (_, values) = lexparse::parse_domain_values("1..3 7 10..14").unwrap();
    let intervals_ok = values == vec![1, 2, 3, 7, 10, 11, 12, 13, 14];

    let implicit =
        lexparse::parse_weighted_tuples("1:0 1|0 3|10:1 2|1 3|2 0|2 1|1:3 1", 2).unwrap();
    let explicit =
        lexparse::parse_weighted_tuples("1:0 1|1:0 3|10:1 2|10:1 3|10:2 0|10:2 1|1:3 1", 2)
            .unwrap();
    let costs: Vec<u64> = implicit
        .iter()
        .map(|(c, _)| match c {
            Cost::Finite(v) => *v,
            Cost::Infinity => u64::MAX,
        })
        .collect();
    let costs_ok = costs == vec![1, 1, 10, 10, 10, 10, 1] && implicit == explicit;

    verdict(
        3,
        "interval expansion yields exactly 9 values; implicit costs expand to [1,1,10,10,10,10,1] and equal the fully explicit form",
        intervals_ok && costs_ok,
    );
}

#[test]
fn criterion_4_extension_intension_cross_check() {
    let extension = fixture_instance("queens-extension.xml");
    let intension = fixture_instance("queens-intension.xml");
    let predicate = &intension.predicates[0];
    let formals: Vec<String> = predicate
        .params
        .iter()
        .map(|p| p.name.as_str().to_owned())
        .collect();

    let mut ok = true;
    // constraint-for-constraint: the falsifying pairs of the predicate, at
    // each constraint's effective distance, must equal the tuple set of the
    // relation the extension encoding references in the same position
    for (ext_c, int_c) in extension.constraints.iter().zip(&intension.constraints) {
        let ConstraintRef::Named(relation_name) = &ext_c.reference else {
            ok = false;
            continue;
        };
        let Ok(Entity::Relation(relation)) = extension.resolve(relation_name.as_str()) else {
            ok = false;
            continue;
        };
        let xcsp::model::ConstraintBody::Intension(params) = &int_c.body else {
            ok = false;
            continue;
        };
        let Some(xcsp::model::EffectiveParam::Int(z)) = params.last() else {
            ok = false;
            continue;
        };
        let mut falsified = HashSet::new();
        for x in 1..=4i64 {
            for y in 1..=4i64 {
                let bindings = [
                    (formals[0].clone(), x),
                    (formals[1].clone(), y),
                    (formals[2].clone(), *z),
                ]
                .into_iter()
                .collect();
                match expr::evaluate(&predicate.body, &bindings).unwrap() {
                    expr::Value::Bool(false) => {
                        falsified.insert(vec![x, y]);
                    }
                    expr::Value::Bool(true) => {}
                    expr::Value::Int(_) => ok = false,
                }
            }
        }
        let relation_set: HashSet<Vec<i64>> = relation.tuples.iter().cloned().collect();
        if falsified != relation_set {
            eprintln!(
                "{}: falsifying pairs disagree with relation {}",
                int_c.name, relation.name
            );
            ok = false;
        }
    }
    // the three relations have the expected sizes
    let sizes: Vec<usize> = extension.relations.iter().map(|r| r.tuples.len()).collect();
    ok &= sizes == vec![10, 8, 6];
    verdict(
        4,
        "falsifying pairs of the queens predicate reproduce the three conflict relations (10, 8 and 6 tuples) exactly",
        ok,
    );
}

/// Counts permutations of 1..=9 satisfying the eight line sums, without
/// touching the solver: the independent oracle for the magic square.
fn magic_square_permutation_count() -> u64 {
    const LINES: [[usize; 3]; 8] = [
        [0, 1, 2],
        [3, 4, 5],
        [6, 7, 8],
        [0, 3, 6],
        [1, 4, 7],
        [2, 5, 8],
        [0, 4, 8],
        [2, 4, 6],
    ];
    fn recurse(values: &mut Vec<i64>, used: &mut [bool; 10], count: &mut u64) {
        if values.len() == 9 {
            if LINES
                .iter()
                .all(|line| line.iter().map(|i| values[*i]).sum::<i64>() == 15)
            {
                *count += 1;
            }
            return;
        }
        for v in 1..=9 {
            if !used[v as usize] {
                used[v as usize] = true;
                values.push(v);
                recurse(values, used, count);
                values.pop();
                used[v as usize] = false;
            }
        }
    }
    let mut count = 0;
    recurse(&mut Vec::new(), &mut [false; 10], &mut count);
    count
}

#[test]
fn criterion_5_oracle_counts() {
    let mut ok = true;

    // 4-queens: both encodings agree at 2 solutions
    for name in ["queens-extension.xml", "queens-intension.xml"] {
        let instance = fixture_instance(name);
        match solve_bruteforce(&instance, SolveMode::Count, Budget::default()) {
            Ok(SolveResult::Count(2)) => {}
            other => {
                eprintln!("{name}: expected count 2, got {other:?}");
                ok = false;
            }
        }
    }

    // 3x3 magic square: permutation enumeration is the oracle
    let start = Instant::now();
    let oracle = magic_square_permutation_count();
    let magic = fixture_instance("magic-square.xml");
    let solved = match solve_bruteforce(&magic, SolveMode::Count, Budget::default()) {
        Ok(SolveResult::Count(n)) => n,
        other => {
            eprintln!("magic square: {other:?}");
            ok = false;
            0
        }
    };
    let magic_elapsed = start.elapsed();
    ok &= oracle == 8 && solved == 8 && magic_elapsed.as_secs_f64() < 30.0;

    // WCSP: the 81-assignment sweep is the oracle for the optimum
    let wcsp = fixture_instance("wcsp-example.xml");
    let mut sweep_best = Cost::Infinity;
    let values = wcsp.domains[0].values.clone();
    let mut swept = 0u32;
    for v0 in &values {
        for v1 in &values {
            for v2 in &values {
                for v3 in &values {
                    let a = Assignment::from_pairs([
                        ("V0", *v0),
                        ("V1", *v1),
                        ("V2", *v2),
                        ("V3", *v3),
                    ]);
                    swept += 1;
                    match check_solution(&wcsp, &a).unwrap() {
                        SolutionReport::Wcsp { total_cost, .. } => {
                            sweep_best = sweep_best.min(total_cost)
                        }
                        _ => ok = false,
                    }
                }
            }
        }
    }
    ok &= swept == 81;
    match solve_bruteforce(&wcsp, SolveMode::MinCost, Budget::default()) {
        Ok(SolveResult::MinCost { cost, .. }) => {
            if cost != sweep_best {
                eprintln!("wcsp optimum {cost} disagrees with sweep {sweep_best}");
                ok = false;
            }
        }
        other => {
            eprintln!("wcsp: {other:?}");
            ok = false;
        }
    }

    // QCSP: recursive evaluation says TRUE, quickly
    let start = Instant::now();
    let qcsp = fixture_instance("qcsp-example.xml");
    ok &= eval_qcsp(&qcsp, Budget::default()) == Ok(true);
    let qcsp_elapsed = start.elapsed();
    ok &= qcsp_elapsed.as_secs_f64() < 1.0;

    verdict(
        5,
        &format!("queens count 2 in both encodings; magic square count 8 by permutation oracle in {magic_elapsed:?} (< 30 s); WCSP optimum equals the 81-assignment sweep; QCSP evaluates TRUE in {qcsp_elapsed:?} (< 1 s)"),
        ok,
    );
}

#[test]
fn criterion_6_valuation_structure_properties() {
    let mut ok = true;
    for k in 1..=10u64 {
        let k_cost = Cost::Finite(k);
        let elements: Vec<Cost> = (0..=k).map(Cost::Finite).collect();
        for &a in &elements {
            // identity and absorption
            ok &= a.oplus(Cost::ZERO, k_cost) == a;
            ok &= a.oplus(k_cost, k_cost) == k_cost;
            for &b in &elements {
                // commutativity
                ok &= a.oplus(b, k_cost) == b.oplus(a, k_cost);
                for &c in &elements {
                    // associativity
                    ok &=
                        a.oplus(b, k_cost).oplus(c, k_cost) == a.oplus(b.oplus(c, k_cost), k_cost);
                    // monotonicity: a <= b implies a + c <= b + c
                    if a <= b {
                        ok &= a.oplus(c, k_cost) <= b.oplus(c, k_cost);
                    }
                }
            }
        }
    }
    verdict(
        6,
        "bounded sum is associative, commutative and monotone with identity 0 and absorber k, exhaustively for every k <= 10",
        ok,
    );
}

#[test]
fn criterion_7_expression_evaluator() {
    let mut ok = true;

    // exhaustive truth tables over the four two-operand connectives plus not
    for a in [false, true] {
        for b in [false, true] {
            let lit = |v: bool| if v { "true" } else { "false" };
            let eval = |text: &str| {
                expr::evaluate(&expr::parse_functional(text).unwrap(), &Default::default())
                    .unwrap()
                    .as_bool()
                    .unwrap()
            };
            ok &= eval(&format!("and({},{})", lit(a), lit(b))) == (a && b);
            ok &= eval(&format!("or({},{})", lit(a), lit(b))) == (a || b);
            ok &= eval(&format!("xor({},{})", lit(a), lit(b))) == (a != b);
            ok &= eval(&format!("iff({},{})", lit(a), lit(b))) == (a == b);
            ok &= eval(&format!("not({})", lit(a))) == !a;
        }
    }

    // div/mod consistency: a == div(a,b)*b + mod(a,b) over |a|,|b| <= 50
    for a in -50i64..=50 {
        for b in -50i64..=50 {
            if b == 0 {
                continue;
            }
            let text = format!("add(mul(div({a},{b}),{b}),mod({a},{b}))");
            let value =
                expr::evaluate(&expr::parse_functional(&text).unwrap(), &Default::default())
                    .unwrap()
                    .as_int()
                    .unwrap();
            if value != a {
                eprintln!("div/mod identity fails for a={a} b={b}: {value}");
                ok = false;
            }
        }
    }

    // the unselected branch is never evaluated
    let probe = expr::parse_functional("if(lt(1,2),5,div(1,0))").unwrap();
    ok &= expr::evaluate(&probe, &Default::default()) == Ok(expr::Value::Int(5));
    let probe = expr::parse_functional("if(gt(1,2),div(1,0),7)").unwrap();
    ok &= expr::evaluate(&probe, &Default::default()) == Ok(expr::Value::Int(7));
    // while a selected division by zero still raises
    let probe = expr::parse_functional("if(gt(1,2),5,div(1,0))").unwrap();
    ok &= expr::evaluate(&probe, &Default::default()) == Err(expr::EvalError::DivisionByZero);

    verdict(
        7,
        "Boolean truth tables exhaustive; div/mod identity holds for all |a|,|b| <= 50, b != 0; `if` short-circuits the unselected branch",
        ok,
    );
}

/// Asserts that strict validation of `doc` produces exactly the one
/// expected error code.
fn assert_single_strict_error(doc: &str, expected: &str) -> bool {
    let instance = match document::load_instance(doc.as_bytes()) {
        Ok(loaded) => loaded.instance,
        Err(e) => {
            eprintln!("mutation for {expected} failed to load: {e}");
            return false;
        }
    };
    let report = validate::validate_competition(&instance);
    let errors: HashSet<&str> = report.errors().map(|d| d.code).collect();
    let ok = errors == HashSet::from([expected]);
    if !ok {
        eprintln!("expected exactly {{{expected}}}, got {errors:?}");
    }
    ok
}

#[test]
fn criterion_8_competition_validator() {
    let mut ok = true;

    // the queens instance passes strict mode as-is
    let queens = fixture_instance("queens-extension.xml");
    let report = validate::validate_competition(&queens);
    if !report.passed {
        eprintln!("queens strict mode:\n{}", report.to_text());
        ok = false;
    }

    let queens_doc = String::from_utf8(fixture_bytes("queens-extension.xml")).unwrap();

    // unsorted tuples
    let mutated = queens_doc.replace(
        "1 1|1 2|2 1|2 2|2 3|3 2|3 3|3 4|4 3|4 4",
        "1 2|1 1|2 1|2 2|2 3|3 2|3 3|3 4|4 3|4 4",
    );
    ok &= assert_single_strict_error(&mutated, codes::TUPLES_NOT_SORTED);

    // duplicate domain value (written form; the expansion still has 4 values)
    let mutated = queens_doc.replace("1..4", "1 1 2 3 4");
    ok &= assert_single_strict_error(&mutated, codes::DUPLICATE_DOMAIN_VALUE);

    // out-of-domain tuple value
    let mutated = queens_doc.replace("1 1|1 4|2 2|3 3|4 1|4 4", "1 1|1 4|2 2|3 3|4 1|4 9");
    ok &= assert_single_strict_error(&mutated, codes::TUPLE_OUT_OF_DOMAIN);

    // a strict-clean base with one global constraint
    let global_base = |reference: &str, parameters: &str| {
        format!(
            r#"<instance>
  <presentation maxConstraintArity="3" format="XCSP 2.1" type="CSP"/>
  <domains nbDomains="1"><domain name="D0" nbValues="3">0..2</domain></domains>
  <variables nbVariables="3">
    <variable name="V0" domain="D0"/>
    <variable name="V1" domain="D0"/>
    <variable name="V2" domain="D0"/>
  </variables>
  <constraints nbConstraints="1">
    <constraint name="C0" arity="3" scope="V0 V1 V2" reference="{reference}">
      <parameters>{parameters}</parameters>
    </constraint>
  </constraints>
</instance>"#
        )
    };

    // the clean base itself passes
    let clean = global_base("global:allDifferent", "[ V0 V1 V2 ]");
    let instance = document::load_instance(clean.as_bytes()).unwrap().instance;
    if !validate::validate_competition(&instance).passed {
        eprintln!("clean global base unexpectedly fails strict mode");
        ok = false;
    }

    // integer constant inside allDifferent
    let mutated = global_base("global:allDifferent", "[ V0 V1 V2 1 ]");
    ok &= assert_single_strict_error(&mutated, codes::CONSTANT_IN_ALLDIFFERENT);

    // a fifth global name beyond the allowed four
    let mutated = global_base("global:among", "V0 [ V1 V2 ] [ 1 2 ]");
    ok &= assert_single_strict_error(&mutated, codes::GLOBAL_NOT_ALLOWED);

    verdict(
        8,
        "queens passes strict mode; each seeded mutation produces exactly its targeted diagnostic code",
        ok,
    );
}

mod random_instances {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Generates a small loadable document with extension, intension and
    /// global constraints over 2..=5 variables whose search space stays at
    /// or below 10^5 total assignments.
    pub fn generate(seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nvars = rng.gen_range(2..=5);
        let ndomains = rng.gen_range(1..=2.min(nvars));
        let mut domains = Vec::new();
        for d in 0..ndomains {
            let size = rng.gen_range(2..=4);
            let low: i64 = rng.gen_range(-3..=3);
            let values: Vec<String> = (low..low + size).map(|v| v.to_string()).collect();
            domains.push((format!("D{d}"), size as usize, values.join(" ")));
        }
        let var_domain: Vec<usize> = (0..nvars).map(|_| rng.gen_range(0..ndomains)).collect();
        let domain_values = |d: usize| -> Vec<i64> {
            domains[d]
                .2
                .split_whitespace()
                .map(|v| v.parse().unwrap())
                .collect()
        };

        let mut relations = String::new();
        let mut nrelations = 0;
        let mut constraints = String::new();
        let mut nconstraints = 0;
        let nconstraints_target = rng.gen_range(1..=4);
        let mut predicates = String::new();
        let mut npredicates = 0;

        for _ in 0..nconstraints_target {
            // pick a scope of distinct variables
            let arity = rng.gen_range(1..=2.min(nvars));
            let mut scope: Vec<usize> = (0..nvars).collect();
            scope.shuffle(&mut rng);
            scope.truncate(arity);
            let scope_names: Vec<String> = scope.iter().map(|v| format!("V{v}")).collect();
            let scope_attr = scope_names.join(" ");
            match rng.gen_range(0..4) {
                0 | 1 => {
                    // extension constraint over a fresh relation
                    let semantics = if rng.gen_bool(0.5) {
                        "supports"
                    } else {
                        "conflicts"
                    };
                    let mut tuples = Vec::new();
                    let ntuples = rng.gen_range(1..=6);
                    for _ in 0..ntuples {
                        let tuple: Vec<String> = scope
                            .iter()
                            .map(|v| {
                                let values = domain_values(var_domain[*v]);
                                values[rng.gen_range(0..values.len())].to_string()
                            })
                            .collect();
                        tuples.push(tuple.join(" "));
                    }
                    let name = format!("R{nrelations}");
                    relations.push_str(&format!(
                        "<relation name=\"{name}\" arity=\"{arity}\" nbTuples=\"{}\" semantics=\"{semantics}\">{}</relation>\n",
                        tuples.len(),
                        tuples.join("|")
                    ));
                    nrelations += 1;
                    constraints.push_str(&format!(
                        "<constraint name=\"C{nconstraints}\" arity=\"{arity}\" scope=\"{scope_attr}\" reference=\"{name}\"/>\n"
                    ));
                    nconstraints += 1;
                }
                2 => {
                    // intension constraint over a fresh predicate
                    let formals: Vec<String> = (0..arity).map(|i| format!("int X{i}")).collect();
                    let body = match (arity, rng.gen_range(0..3)) {
                        (1, 0) => format!("eq(X0,{})", rng.gen_range(-2..=2)),
                        (1, 1) => format!("gt(X0,{})", rng.gen_range(-2..=2)),
                        (1, _) => format!("ne(mod(abs(X0),2),{})", rng.gen_range(0..=1)),
                        (_, 0) => "ne(X0,X1)".to_owned(),
                        (_, 1) => format!("le(add(X0,X1),{})", rng.gen_range(-2..=4)),
                        (_, _) => "lt(X0,X1)".to_owned(),
                    };
                    let name = format!("P{npredicates}");
                    predicates.push_str(&format!(
                        "<predicate name=\"{name}\"><parameters>{}</parameters><expression><functional>{body}</functional></expression></predicate>\n",
                        formals.join(" ")
                    ));
                    npredicates += 1;
                    constraints.push_str(&format!(
                        "<constraint name=\"C{nconstraints}\" arity=\"{arity}\" scope=\"{scope_attr}\" reference=\"{name}\"><parameters>{}</parameters></constraint>\n",
                        scope_names.join(" ")
                    ));
                    nconstraints += 1;
                }
                _ => {
                    // a global constraint
                    if arity >= 2 && rng.gen_bool(0.5) {
                        constraints.push_str(&format!(
                            "<constraint name=\"C{nconstraints}\" arity=\"{arity}\" scope=\"{scope_attr}\" reference=\"global:allDifferent\"><parameters>[ {} ]</parameters></constraint>\n",
                            scope_names.join(" ")
                        ));
                    } else {
                        let terms: Vec<String> = scope_names
                            .iter()
                            .map(|v| {
                                let coef = *[-2, -1, 1, 2].choose(&mut rng).unwrap();
                                format!("{{ {coef} {v} }}")
                            })
                            .collect();
                        let op = ["eq", "ne", "ge", "gt", "le", "lt"]
                            .choose(&mut rng)
                            .unwrap();
                        let bound = rng.gen_range(-4..=6);
                        constraints.push_str(&format!(
                            "<constraint name=\"C{nconstraints}\" arity=\"{arity}\" scope=\"{scope_attr}\" reference=\"global:weightedSum\"><parameters>[ {} ] <{op}/> {bound}</parameters></constraint>\n",
                            terms.join(" ")
                        ));
                    }
                    nconstraints += 1;
                }
            }
        }

        let domains_xml: String = domains
            .iter()
            .map(|(name, size, values)| {
                format!("<domain name=\"{name}\" nbValues=\"{size}\">{values}</domain>\n")
            })
            .collect();
        let variables_xml: String = (0..nvars)
            .map(|v| format!("<variable name=\"V{v}\" domain=\"D{}\"/>\n", var_domain[v]))
            .collect();
        let relations_xml = if nrelations > 0 {
            format!("<relations nbRelations=\"{nrelations}\">\n{relations}</relations>\n")
        } else {
            String::new()
        };
        let predicates_xml = if npredicates > 0 {
            format!("<predicates nbPredicates=\"{npredicates}\">\n{predicates}</predicates>\n")
        } else {
            String::new()
        };
        format!(
            "<instance>\n<presentation format=\"XCSP 2.1\" type=\"CSP\"/>\n<domains nbDomains=\"{}\">\n{domains_xml}</domains>\n<variables nbVariables=\"{nvars}\">\n{variables_xml}</variables>\n{relations_xml}{predicates_xml}<constraints nbConstraints=\"{nconstraints}\">\n{constraints}</constraints>\n</instance>\n",
            domains.len()
        )
    }
}

#[test]
fn criterion_9_cross_oracle_on_random_instances() {
    let mut ok = true;
    for seed in 0..100u64 {
        let doc = random_instances::generate(seed);
        let instance = match document::load_instance(doc.as_bytes()) {
            Ok(loaded) => loaded.instance,
            Err(e) => {
                eprintln!("seed {seed}: generated instance failed to load: {e}\n{doc}");
                ok = false;
                continue;
            }
        };
        let solver_count = match solve_bruteforce(&instance, SolveMode::Count, Budget::default()) {
            Ok(SolveResult::Count(n)) => n,
            other => {
                eprintln!("seed {seed}: solver failed: {other:?}");
                ok = false;
                continue;
            }
        };
        // the oracle filters every total assignment through check_solution
        let names: Vec<&str> = instance.variables.iter().map(|v| v.name.as_str()).collect();
        let domains: Vec<Vec<i64>> = instance
            .variables
            .iter()
            .map(|v| instance.domain_of(v.name.as_str()).unwrap().values.clone())
            .collect();
        let total: usize = domains.iter().map(|d| d.len()).product();
        assert!(total <= 100_000, "seed {seed}: search space too large");
        let mut oracle_count = 0u64;
        // odometer enumeration over the full cartesian product
        let mut indices = vec![0usize; names.len()];
        loop {
            let assignment = Assignment::from_pairs(
                names
                    .iter()
                    .enumerate()
                    .map(|(i, name)| (*name, domains[i][indices[i]])),
            );
            match check_solution(&instance, &assignment) {
                Ok(SolutionReport::Csp {
                    satisfied: true, ..
                }) => oracle_count += 1,
                Ok(_) => {}
                Err(e) => {
                    eprintln!("seed {seed}: oracle evaluation failed: {e}");
                    ok = false;
                    break;
                }
            }
            let mut pos = 0;
            loop {
                if pos == indices.len() {
                    break;
                }
                indices[pos] += 1;
                if indices[pos] < domains[pos].len() {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
            if pos == indices.len() {
                break;
            }
        }
        if solver_count != oracle_count {
            eprintln!("seed {seed}: solver says {solver_count}, oracle says {oracle_count}\n{doc}");
            ok = false;
        }
    }
    verdict(
        9,
        "on 100 generated instances the backtracking count equals the filter-all-assignments count exactly",
        ok,
    );
}
