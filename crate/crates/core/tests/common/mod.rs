//! Shared fixture constructions for the integration tests. The JSON files
//! under `fixtures/` are generated from these (see the ignored
//! `regenerate_fixture_files` test) and golden-checked against them.
#![allow(dead_code)] // each test binary uses its own subset

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use plott_core::{Bipartition, CfKind, ChoiceFunction, Frame, Menu, Problem};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn load_fixture(name: &str) -> Problem {
    plott_core::format::parse_instance(&read_fixture(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn lin(order: &[usize]) -> ChoiceFunction {
    ChoiceFunction::linear(order.to_vec()).unwrap()
}

/// Triangle: firm m (l>e>r) against workers w (r>l) and w0 (e only).
/// Contracts l=0, r=1, e=2; agents m=0, w=1, w0=2.
pub fn fix_a() -> Problem {
    let frame = Frame::new(
        vec!["m".into(), "w".into(), "w0".into()],
        vec!["l".into(), "r".into(), "e".into()],
        vec![
            BTreeSet::from([0, 1]),
            BTreeSet::from([0, 1]),
            BTreeSet::from([0, 2]),
        ],
    )
    .unwrap();
    Problem::new(
        frame,
        vec![lin(&[0, 2, 1]), lin(&[1, 0]), lin(&[2])],
        Some(Bipartition {
            firms: BTreeSet::from([0]),
            workers: BTreeSet::from([1, 2]),
        }),
    )
    .unwrap()
}

/// Three weak-order firms against three workers, seven contracts, four
/// stable systems. Contracts a=0, b=1, c=2, a'=3, b'=4, c'=5, d=6; agents
/// m=0, m'=1, m0=2, w=3, w'=4, w0=5.
pub fn fix_b() -> Problem {
    let frame = Frame::new(
        vec![
            "m".into(),
            "m'".into(),
            "m0".into(),
            "w".into(),
            "w'".into(),
            "w0".into(),
        ],
        vec![
            "a".into(),
            "b".into(),
            "c".into(),
            "a'".into(),
            "b'".into(),
            "c'".into(),
            "d".into(),
        ],
        vec![
            BTreeSet::from([0, 3]),
            BTreeSet::from([0, 3]),
            BTreeSet::from([0, 5]),
            BTreeSet::from([1, 4]),
            BTreeSet::from([1, 4]),
            BTreeSet::from([1, 5]),
            BTreeSet::from([2, 5]),
        ],
    )
    .unwrap();
    Problem::new(
        frame,
        vec![
            ChoiceFunction::weak_order(vec![vec![0], vec![1, 2]]).unwrap(),
            ChoiceFunction::weak_order(vec![vec![3], vec![4, 5]]).unwrap(),
            lin(&[6]),
            lin(&[1, 0]),
            lin(&[4, 3]),
            ChoiceFunction::weak_order(vec![vec![2, 5], vec![6]]).unwrap(),
        ],
        Some(Bipartition {
            firms: BTreeSet::from([0, 1, 2]),
            workers: BTreeSet::from([3, 4, 5]),
        }),
    )
    .unwrap()
}

/// Two quota-2 agents over two shared contracts; splitting both sides is the
/// canonical failure case. Contracts left=0, right=1; agents u=0, v=1.
pub fn fix_c() -> Problem {
    let frame = Frame::new(
        vec!["u".into(), "v".into()],
        vec!["left".into(), "right".into()],
        vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 1])],
    )
    .unwrap();
    let q = ChoiceFunction::quota(vec![0, 1], 2).unwrap();
    Problem::new(frame, vec![q.clone(), q], None).unwrap()
}

/// Bipartite instance with one quota-2 worker and two stable systems.
/// Contracts c1=0, c2=1, c3=2, d=3; agents f1=0, f2=1, w=2, w2=3.
pub fn fix_d() -> Problem {
    let frame = Frame::new(
        vec!["f1".into(), "f2".into(), "w".into(), "w2".into()],
        vec!["c1".into(), "c2".into(), "c3".into(), "d".into()],
        vec![
            BTreeSet::from([0, 2]),
            BTreeSet::from([1, 2]),
            BTreeSet::from([0, 2]),
            BTreeSet::from([0, 3]),
        ],
    )
    .unwrap();
    Problem::new(
        frame,
        vec![
            ChoiceFunction::quota(vec![2, 3, 0], 2).unwrap(),
            lin(&[1]),
            ChoiceFunction::quota(vec![0, 1, 2], 2).unwrap(),
            lin(&[3]),
        ],
        Some(Bipartition {
            firms: BTreeSet::from([0, 1]),
            workers: BTreeSet::from([2, 3]),
        }),
    )
    .unwrap()
}

/// The stable systems of FIX-D, pinned by the brute-force oracle.
pub fn fix_d_stable() -> Vec<Menu> {
    vec![
        Menu::from_indices([0, 1, 3]), // {c1, c2, d}
        Menu::from_indices([1, 2, 3]), // {c2, c3, d}
    ]
}

/// Choice table of the 2-quotable Plott CF on six elements with no serial
/// decomposition, found and verified by exhaustive search; entry i is the
/// choice mask for menu mask i.
const WITNESS_CHOICE: [u64; 64] = [
    0, 1, 2, 3, 4, 5, 6, 3, 8, 9, 10, 3, 12, 5, 6, 3,
    16, 17, 18, 3, 20, 5, 6, 3, 24, 9, 10, 3, 12, 5, 6, 3,
    32, 33, 34, 3, 36, 5, 6, 3, 40, 9, 10, 3, 12, 5, 6, 3,
    48, 17, 18, 3, 36, 5, 6, 3, 40, 9, 10, 3, 12, 5, 6, 3,
];

pub fn nonseq_quota2_cf() -> ChoiceFunction {
    let entries: BTreeMap<Menu, Menu> = WITNESS_CHOICE
        .iter()
        .enumerate()
        .map(|(menu, &choice)| (Menu::from_bits(menu as u64), Menu::from_bits(choice)))
        .collect();
    ChoiceFunction::table(Menu::full(6), entries).unwrap()
}

/// One-agent instance carrying the non-decomposable quota-2 table.
pub fn nonseq_quota2() -> Problem {
    let names: Vec<String> = (0..6).map(|i| format!("x{i}")).collect();
    let frame = Frame::new(
        vec!["f".into()],
        names,
        (0..6).map(|_| BTreeSet::from([0])).collect(),
    )
    .unwrap();
    Problem::new(frame, vec![nonseq_quota2_cf()], None).unwrap()
}

/// Assert two CFs agree on every menu of their (equal) domains.
pub fn assert_same_choice(a: &ChoiceFunction, b: &ChoiceFunction) {
    assert_eq!(a.domain(), b.domain());
    for menu in a.domain().subsets() {
        assert_eq!(a.choose(menu).unwrap(), b.choose(menu).unwrap(), "on {menu}");
    }
}

/// Pull the table entries out of a CF known to be a table.
pub fn table_entries(cf: &ChoiceFunction) -> &BTreeMap<Menu, Menu> {
    match cf.kind() {
        CfKind::Table { entries } => entries,
        other => panic!("expected table, got {other:?}"),
    }
}
