//! Regenerates `corpus/*.json`.
//!
//! ```text
//! cargo run -p qmlkit --example build_corpus [OUT_DIR]
//! ```

use std::path::PathBuf;

use qmlkit::calculus::{check_derivation, explosion, search_proof, CutPolicy};
use qmlkit::{parse, Derivation, Formula, Rule, Sequent};

fn f(text: &str) -> Formula {
    parse(text).unwrap()
}

fn seq(text: &str) -> Sequent {
    Sequent::parse(text).unwrap()
}

fn ax(text: &str) -> Derivation {
    Derivation::leaf(Sequent::new([f(text)], [f(text)]), Rule::Ax)
}

fn node(conclusion: &str, rule: Rule, premises: Vec<Derivation>) -> Derivation {
    Derivation::new(seq(conclusion), rule, premises)
}

fn searched(goal: &str) -> Derivation {
    search_proof(&seq(goal), 8, CutPolicy::Analytic)
        .unwrap_or_else(|| panic!("no proof of {goal} within depth 8"))
}

fn hand_built() -> Vec<(&'static str, Derivation)> {
    // ~~[]p |- []p: MEM, then move ~[]p to the left
    let mem = node(
        "~~[]p |- []p",
        Rule::NegL(f("~[]p")),
        vec![Derivation::leaf(seq("|- []p, ~[]p"), Rule::Mem(f("p")))],
    );
    let conj_pos = node("p & ~p |- p", Rule::AndL1(f("p"), f("~p")), vec![ax("p")]);
    let conj_neg = node("p & ~p |- ~p", Rule::AndL2(f("p"), f("~p")), vec![ax("~p")]);
    let atoms_pos = node("p, ~p |- p", Rule::Wkn, vec![ax("p")]);
    let atoms_neg = node("p, ~p |- ~p", Rule::Wkn, vec![ax("~p")]);
    let box_pos = node("[]p, ~[]p |- []p", Rule::Wkn, vec![ax("[]p")]);
    let box_neg = node("[]p, ~[]p |- ~[]p", Rule::Wkn, vec![ax("~[]p")]);
    let cut = node(
        "p & q |- ~~p",
        Rule::Cut(f("p")),
        vec![
            node("p & q |- p", Rule::AndL1(f("p"), f("q")), vec![ax("p")]),
            node("p |- ~~p", Rule::NegNegR(f("p")), vec![ax("p")]),
        ],
    );
    let box_cut = node(
        "[](p & q) |- []~~p",
        Rule::Cut(f("[]p")),
        vec![
            node(
                "[](p & q) |- []p",
                Rule::K,
                vec![node(
                    "p & q |- p",
                    Rule::AndL1(f("p"), f("q")),
                    vec![ax("p")],
                )],
            ),
            node(
                "[]p |- []~~p",
                Rule::K,
                vec![node("p |- ~~p", Rule::NegNegR(f("p")), vec![ax("p")])],
            ),
        ],
    );
    vec![
        ("mem_double_negation", mem),
        (
            "explosion_conjunction",
            explosion(&conj_pos, &conj_neg, &f("q")).unwrap(),
        ),
        (
            "explosion_atoms",
            explosion(&atoms_pos, &atoms_neg, &f("q")).unwrap(),
        ),
        (
            "explosion_box",
            explosion(&box_pos, &box_neg, &f("r")).unwrap(),
        ),
        ("cut_conjunction_double_negation", cut),
        ("cut_under_box", box_cut),
    ]
}

const SEARCHED: &[(&str, &str)] = &[
    ("identity_atom", "p |- p"),
    ("identity_box", "[]p |- []p"),
    ("weakening", "p, q |- p"),
    ("conjunction_left", "p & q |- p"),
    ("conjunction_right_projection", "p & q |- q"),
    ("conjunction_intro", "p, q |- p & q"),
    ("conjunction_commutes", "p & q |- q & p"),
    ("double_negation_elim", "~~p |- p"),
    ("double_negation_intro", "p |- ~~p"),
    ("contradiction", "p, ~p |-"),
    ("non_contradiction", "|- ~(p & ~p)"),
    ("negation_antitone", "~p |- ~(p & q)"),
    ("box_conjunction_left", "[](p & q) |- []p"),
    ("box_conjunction_intro", "[]p, []q |- [](p & q)"),
    ("box_double_negation", "[]~~p |- []p"),
    ("box_necessitation", "|- []~(p & ~p)"),
    ("disjunction_intro", "p |- p | q"),
    ("diamond_of_box_negation", "[]~p |- ~<>p"),
];

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus"));
    std::fs::create_dir_all(&out).unwrap();
    let mut entries = hand_built();
    entries.extend(SEARCHED.iter().map(|(name, goal)| (*name, searched(goal))));
    for (name, d) in &entries {
        assert!(check_derivation(d).is_ok(), "{name} does not check");
        assert!(
            d.conclusion.right.len() <= 1,
            "{name} has several succedent formulas"
        );
        let rules: Vec<String> = d.rules_used().iter().map(|r| r.to_string()).collect();
        println!(
            "{name:<36} {:<28} {}",
            d.conclusion.to_string(),
            rules.join(" ")
        );
        std::fs::write(out.join(format!("{name}.json")), d.to_json() + "\n").unwrap();
    }
}
