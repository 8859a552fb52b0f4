mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::Plain;
use qmlkit::calculus::{check_rule, Rule, RuleName};
use qmlkit::harness::corpus;
use qmlkit::search::{default_atoms, enumerate_structures};
use qmlkit::{holds, parse, truth_set, Atom, Formula, Relation, SearchBudget, Structure, WorldSet};

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just("p"), Just("q"), Just("r")].prop_map(Formula::atom);
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            inner.clone().prop_map(Formula::not),
            inner.prop_map(Formula::boxed),
        ]
    })
}

fn similarity(n: usize, bits: u64) -> Relation {
    let mut r = Relation::identity(n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits >> k & 1 == 1 {
                r.insert(i, j);
                r.insert(j, i);
            }
            k += 1;
        }
    }
    r
}

/// A valid structure over `p, q, r` with up to `max_n` worlds.
fn structure_strategy(max_n: usize) -> impl Strategy<Value = Structure> {
    (
        1..=max_n,
        any::<u64>(),
        prop::collection::vec(any::<u64>(), 8),
        any::<[u32; 3]>(),
    )
        .prop_map(|(n, rq_bits, rm_rows, picks)| {
            let rq = similarity(n, rq_bits);
            // rm rows constant on rq-components
            let mut rm = Relation::empty(n);
            for comp in rq.components().unwrap() {
                let first = comp.first().unwrap();
                for i in comp.iter() {
                    for l in 0..n {
                        if rm_rows[first] >> l & 1 == 1 {
                            rm.insert(i, l);
                        }
                    }
                }
            }
            let closed = rq.closed_sets().unwrap();
            let valuation: BTreeMap<Atom, WorldSet> = ["p", "q", "r"]
                .iter()
                .zip(picks)
                .map(|(a, k)| (Atom::new(a).unwrap(), closed[k as usize % closed.len()]))
                .collect();
            Structure::new(n, rq, rm, valuation).unwrap()
        })
}

proptest! {
    #[test]
    fn printing_round_trips(f in formula_strategy()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn generated_structures_are_valid(s in structure_strategy(6)) {
        prop_assert!(s.is_valid());
    }

    #[test]
    fn ortho_laws(n in 1usize..=8, rq_bits in any::<u64>(), x in any::<u64>(), y in any::<u64>()) {
        let rq = similarity(n, rq_bits);
        let mask = (1u64 << n) - 1;
        let x = WorldSet::from_bits(n, x & mask).unwrap();
        let y = x.union(&WorldSet::from_bits(n, y & mask).unwrap());
        let ox = rq.ortho(&x).unwrap();
        prop_assert!(x.is_subset(&rq.biortho(&x).unwrap()));
        prop_assert!(rq.ortho(&y).unwrap().is_subset(&ox));
        prop_assert_eq!(rq.ortho(&rq.biortho(&x).unwrap()).unwrap(), ox);
        prop_assert_eq!(
            common::bools(&ox),
            common::ortho(&common::matrix(&rq), &common::bools(&x))
        );
    }

    #[test]
    fn truth_sets_match_reference(s in structure_strategy(6), f in formula_strategy()) {
        let plain = Plain::of(&s);
        let set = truth_set(&s, &f).unwrap();
        prop_assert_eq!(common::bools(&set), plain.truth(&f));
        for i in 0..s.size() {
            prop_assert_eq!(holds(&s, i, &f).unwrap(), set.contains(i));
        }
    }

    #[test]
    fn truth_sets_are_closed(s in structure_strategy(8), f in formula_strategy()) {
        prop_assert!(s.is_closed(&truth_set(&s, &f).unwrap()).unwrap());
    }

    #[test]
    fn negation_is_ortho(s in structure_strategy(6), f in formula_strategy()) {
        let set = truth_set(&s, &f).unwrap();
        let neg = truth_set(&s, &Formula::not(f.clone())).unwrap();
        prop_assert_eq!(neg, s.ortho(&set).unwrap());
        prop_assert_eq!(truth_set(&s, &Formula::not(Formula::not(f))).unwrap(), set);
    }

    #[test]
    fn mem_covers_every_world(s in structure_strategy(8), f in formula_strategy()) {
        let b = Formula::boxed(f);
        let covered = truth_set(&s, &b).unwrap().union(&truth_set(&s, &Formula::not(b)).unwrap());
        prop_assert!(covered.is_full());
    }

    #[test]
    fn perturbed_rule_instances_are_rejected(
        pick in any::<prop::sample::Index>(),
        right in any::<bool>(),
        add in any::<bool>(),
        extra in formula_strategy(),
        drop in any::<prop::sample::Index>(),
    ) {
        let entries = corpus().unwrap();
        let nodes: Vec<_> = entries.iter().flat_map(|e| e.derivation.nodes()).collect();
        let node = nodes[pick.index(nodes.len())];
        let premises = node.premise_sequents();
        let mut c = node.conclusion.clone();
        let side = if right { &mut c.right } else { &mut c.left };
        if add {
            prop_assume!(!side.contains(&extra));
            side.insert(extra);
        } else {
            prop_assume!(!side.is_empty());
            let victim = side.iter().nth(drop.index(side.len())).unwrap().clone();
            side.remove(&victim);
        }
        let accepted = check_rule(&c, &node.rule, &premises).unwrap();
        let expected = match node.rule.name() {
            RuleName::Mem => !right,
            RuleName::Wkn => premises[0].left.is_subset(&c.left) && premises[0].right.is_subset(&c.right),
            _ => false,
        };
        prop_assert_eq!(accepted, expected, "{} by {}", c, node.rule);
    }
}

fn enumerated(max_n: usize, atoms: usize) -> Vec<Structure> {
    enumerate_structures(&SearchBudget::exhaustive(max_n).with_atoms(default_atoms(atoms)))
        .unwrap()
        .collect()
}

#[test]
fn negated_box_unfolds_over_all_small_structures() {
    let f = parse("~[]p").unwrap();
    for s in enumerated(3, 1) {
        let plain = Plain::of(&s);
        let n = s.size();
        for i in 0..n {
            let unfolded = (0..n)
                .all(|j| !plain.rq[i][j] || (0..n).any(|k| plain.rm[j][k] && !plain.val["p"][k]));
            assert_eq!(holds(&s, i, &f).unwrap(), unfolded);
        }
    }
}

#[test]
fn double_negation_over_all_small_structures() {
    let atoms = default_atoms(2);
    let formulas = qmlkit::formula::enumerate_formulas(&atoms, 2);
    for s in enumerated(3, 2) {
        for f in &formulas {
            let set = truth_set(&s, f).unwrap();
            assert_eq!(
                truth_set(&s, &Formula::not(Formula::not(f.clone()))).unwrap(),
                set
            );
            assert_eq!(
                truth_set(&s, &Formula::not(f.clone())).unwrap(),
                s.ortho(&set).unwrap()
            );
        }
    }
}

#[test]
fn sugar_is_plain_syntax() {
    assert_eq!(parse("<>p").unwrap(), parse("~[]~p").unwrap());
    assert_eq!(parse("p | q").unwrap(), parse("~(~p & ~q)").unwrap());
}

#[test]
fn random_streams_repeat() {
    let budget = SearchBudget::random(6, 99, 200).with_atoms(default_atoms(2));
    let a: Vec<_> = enumerate_structures(&budget).unwrap().collect();
    let b: Vec<_> = enumerate_structures(&budget).unwrap().collect();
    assert_eq!(a.len(), 200);
    assert_eq!(a, b);
    assert!(a.iter().all(|s| s.is_valid()));
}

#[test]
fn corpus_rules_are_exact_instances() {
    for e in corpus().unwrap() {
        for node in e.derivation.nodes() {
            let premises = node.premise_sequents();
            assert!(check_rule(&node.conclusion, &node.rule, &premises).unwrap());
            if let Rule::Mem(_) = node.rule {
                assert_eq!(node.conclusion.right.len(), 2);
            }
        }
    }
}
