//! Structural and competition-strict validation over whole documents.

mod common;

use common::{fixture_bytes, fixture_instance, FIXTURES};
use xcsp::document::{self, codes, Severity};
use xcsp::validate::{
    validate_competition, validate_competition_with, validate_structure, CompetitionOptions,
};

#[test]
fn all_fixtures_pass_structural_validation() {
    for name in FIXTURES {
        let instance = fixture_instance(name);
        let report = validate_structure(&instance);
        assert!(report.passed, "{name}:\n{}", report.to_text());
    }
}

#[test]
fn queens_extension_passes_strict_mode() {
    let instance = fixture_instance("queens-extension.xml");
    let report = validate_competition(&instance);
    assert!(report.passed, "{}", report.to_text());
    // the presentation metadata is tolerated as warnings
    assert!(report.has_code(codes::PRESENTATION_ATTRIBUTE));
    assert!(report.has_code(codes::PRESENTATION_CONTENT));
}

#[test]
fn queens_intension_passes_strict_mode() {
    let instance = fixture_instance("queens-intension.xml");
    let report = validate_competition(&instance);
    assert!(report.passed, "{}", report.to_text());
}

#[test]
fn escalation_turns_convention_warnings_into_errors() {
    let instance = fixture_instance("queens-extension.xml");
    let report = validate_competition_with(
        &instance,
        CompetitionOptions {
            escalate_conventions: true,
            suggest_merges: false,
        },
    );
    assert!(!report.passed);
    assert!(report
        .diagnostics
        .iter()
        .any(|d| d.code == codes::PRESENTATION_ATTRIBUTE && d.severity == Severity::Error));
}

#[test]
fn wcsp_example_fails_strict_mode_with_out_of_domain_tuples() {
    // R0 holds tuples with value 3 while every variable ranges over 0..2,
    // and the functions section is not part of the competition subset
    let instance = fixture_instance("wcsp-example.xml");
    let report = validate_competition(&instance);
    assert!(!report.passed);
    assert!(report.has_code(codes::TUPLE_OUT_OF_DOMAIN));
    assert!(report.has_code(codes::FUNCTIONS_NOT_ALLOWED));
    assert!(!report.has_code(codes::INITIAL_COST_NOT_ZERO));
}

#[test]
fn naming_deviations_are_warnings_by_default() {
    // the magic square names its variables X0..X8 and its domain dom0
    let instance = fixture_instance("magic-square.xml");
    let report = validate_competition(&instance);
    let naming: Vec<_> = report
        .diagnostics
        .iter()
        .filter(|d| d.code == codes::NAMING_CONVENTION)
        .collect();
    assert!(!naming.is_empty());
    assert!(naming.iter().all(|d| d.severity == Severity::Warning));
}

#[test]
fn unsorted_tuples_are_reported_with_the_first_pair() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="3">1..3</domain></domains>
      <variables nbVariables="2">
        <variable name="V0" domain="D0"/>
        <variable name="V1" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="2" nbTuples="2" semantics="supports">1 2|1 1</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="2" scope="V0 V1" reference="R0"/>
      </constraints>
    </instance>"#;
    let instance = document::load_instance(doc).unwrap().instance;
    let report = validate_competition(&instance);
    let finding = report
        .diagnostics
        .iter()
        .find(|d| d.code == codes::TUPLES_NOT_SORTED)
        .expect("unsorted tuples reported");
    assert!(finding.message.contains("tuple 1"));
}

#[test]
fn normalized_scope_ordering_uses_string_comparison() {
    // scopes (V0 V1), (V2 V0 normalized to V0 V2), then (V1 V2): sorted.
    // Swapping the last two breaks the order.
    let doc = |third: &str, fourth: &str| {
        format!(
            r#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">1 2</domain></domains>
      <variables nbVariables="3">
        <variable name="V0" domain="D0"/>
        <variable name="V1" domain="D0"/>
        <variable name="V2" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="2" nbTuples="1" semantics="supports">1 1</relation>
      </relations>
      <constraints nbConstraints="3">
        <constraint name="C0" arity="2" scope="V0 V1" reference="R0"/>
        <constraint name="C1" arity="2" scope="{third}" reference="R0"/>
        <constraint name="C2" arity="2" scope="{fourth}" reference="R0"/>
      </constraints>
    </instance>"#
        )
    };
    let sorted = document::load_instance(doc("V2 V0", "V1 V2").as_bytes())
        .unwrap()
        .instance;
    let report = validate_competition(&sorted);
    assert!(
        !report.has_code(codes::CONSTRAINTS_NOT_SORTED),
        "{}",
        report.to_text()
    );
    let unsorted = document::load_instance(doc("V1 V2", "V2 V0").as_bytes())
        .unwrap()
        .instance;
    let report = validate_competition(&unsorted);
    let finding = report
        .diagnostics
        .iter()
        .find(|d| d.code == codes::CONSTRAINTS_NOT_SORTED)
        .expect("ordering violation reported");
    // the first out-of-order adjacent pair is identified by name
    assert!(finding.message.contains("`C2`"));
    assert!(finding.message.contains("`C1`"));
}

#[test]
fn merge_hint_is_opt_in() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">1 2</domain></domains>
      <variables nbVariables="2">
        <variable name="V0" domain="D0"/>
        <variable name="V1" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="2" nbTuples="1" semantics="supports">1 1</relation>
      </relations>
      <constraints nbConstraints="2">
        <constraint name="C0" arity="2" scope="V0 V1" reference="R0"/>
        <constraint name="C1" arity="2" scope="V1 V0" reference="R0"/>
      </constraints>
    </instance>"#;
    let instance = document::load_instance(doc).unwrap().instance;
    let report = validate_competition(&instance);
    assert!(!report.has_code(codes::SAME_SCOPE_MERGE_HINT));
    let report = validate_competition_with(
        &instance,
        CompetitionOptions {
            escalate_conventions: false,
            suggest_merges: true,
        },
    );
    assert!(report.has_code(codes::SAME_SCOPE_MERGE_HINT));
    assert!(report.passed, "the hint must stay informational");
}

#[test]
fn duplicate_quantification_is_flagged() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1" type="QCSP"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="2">
        <variable name="X" domain="D0"/>
        <variable name="Z" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="2" nbTuples="1" semantics="supports">0 0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="2" scope="X Z" reference="R0"/>
      </constraints>
      <quantification nbBlocks="2">
        <block quantifier="exists" scope="X Z"/>
        <block quantifier="forall" scope="Z"/>
      </quantification>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::DUPLICATE_QUANTIFICATION));
}

#[test]
fn restriction_must_respect_the_prefix_order() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1" type="QCSP+"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="2">
        <variable name="X" domain="D0"/>
        <variable name="Z" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="1" nbTuples="1" semantics="supports">0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="2" scope="X Z"
                    reference="global:allDifferent">
          <parameters>[ X Z ]</parameters>
        </constraint>
      </constraints>
      <quantification nbBlocks="2">
        <block quantifier="exists" scope="X">
          <constraint name="early" arity="1" scope="Z" reference="R0"/>
        </block>
        <block quantifier="forall" scope="Z"/>
      </quantification>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::RESTRICTION_SCOPE_ORDER));
}

#[test]
fn restrictions_are_rejected_in_pure_qcsp() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1" type="QCSP"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="1"><variable name="X" domain="D0"/></variables>
      <relations nbRelations="1">
        <relation name="R0" arity="1" nbTuples="1" semantics="supports">0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="1" scope="X" reference="R0"/>
      </constraints>
      <quantification nbBlocks="1">
        <block quantifier="exists" scope="X">
          <constraint name="r1" arity="1" scope="X" reference="R0"/>
        </block>
      </quantification>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::RESTRICTION_IN_PURE_QCSP));
}

#[test]
fn quantification_requires_quantified_type() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="1"><variable name="X" domain="D0"/></variables>
      <relations nbRelations="1">
        <relation name="R0" arity="1" nbTuples="1" semantics="supports">0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="1" scope="X" reference="R0"/>
      </constraints>
      <quantification nbBlocks="1">
        <block quantifier="exists" scope="X"/>
      </quantification>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::QUANTIFICATION_TYPE_MISMATCH));
}

#[test]
fn soft_relation_requires_wcsp_type() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="1"><variable name="V0" domain="D0"/></variables>
      <relations nbRelations="1">
        <relation name="R0" arity="1" nbTuples="1" semantics="soft" defaultCost="0">1:0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="1" scope="V0" reference="R0"/>
      </constraints>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::SOFT_RELATION_OUTSIDE_WCSP));
}

#[test]
fn soft_cost_above_k_is_flagged() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1" type="WCSP"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="1"><variable name="V0" domain="D0"/></variables>
      <relations nbRelations="1">
        <relation name="R0" arity="1" nbTuples="1" semantics="soft" defaultCost="0">9:0</relation>
      </relations>
      <constraints nbConstraints="1" maximalCost="5">
        <constraint name="C0" arity="1" scope="V0" reference="R0"/>
      </constraints>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::COST_EXCEEDS_MAXIMAL));
}

#[test]
fn arity_attribute_must_match_scope() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="2">
        <variable name="V0" domain="D0"/>
        <variable name="V1" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="2" nbTuples="1" semantics="supports">0 0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" arity="3" scope="V0 V1" reference="R0"/>
      </constraints>
    </instance>"#;
    let err = document::load_instance(doc).unwrap_err();
    assert!(err
        .diagnostics
        .iter()
        .any(|d| d.code == codes::ARITY_ATTR_MISMATCH));
}

#[test]
fn arity_attribute_is_optional() {
    let doc = br#"<instance>
      <presentation format="XCSP 2.1"/>
      <domains nbDomains="1"><domain name="D0" nbValues="2">0 1</domain></domains>
      <variables nbVariables="2">
        <variable name="V0" domain="D0"/>
        <variable name="V1" domain="D0"/>
      </variables>
      <relations nbRelations="1">
        <relation name="R0" arity="2" nbTuples="1" semantics="supports">0 0</relation>
      </relations>
      <constraints nbConstraints="1">
        <constraint name="C0" scope="V0 V1" reference="R0"/>
      </constraints>
    </instance>"#;
    let instance = document::load_instance(doc).unwrap().instance;
    assert_eq!(instance.constraints[0].declared_arity, None);
    // the writer always emits the computed arity
    let written = document::write_instance(&instance, document::Notation::Abridged);
    assert!(String::from_utf8(written).unwrap().contains("arity=\"2\""));
}

#[test]
fn reports_serialize_to_text_and_machine_formats() {
    let instance = fixture_instance("wcsp-example.xml");
    let report = validate_competition(&instance);
    let text = report.to_text();
    assert!(text.ends_with("failed\n"));
    assert!(text.contains("TupleOutOfDomain"));
    let machine = report.to_machine();
    let parsed: serde_json::Value = serde_json::from_str(&machine).unwrap();
    assert_eq!(parsed["passed"], serde_json::Value::Bool(false));
    assert!(parsed["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .any(|d| d["code"] == "TupleOutOfDomain"));
}

#[test]
fn competition_passing_implies_structure_passing() {
    for name in FIXTURES {
        let bytes = fixture_bytes(name);
        let instance = document::load_instance(&bytes).unwrap().instance;
        let strict = validate_competition(&instance);
        if strict.passed {
            assert!(validate_structure(&instance).passed, "{name}");
        }
    }
}
