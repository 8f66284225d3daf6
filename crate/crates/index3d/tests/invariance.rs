use index3d::anglestruct::{has_index_structure, EfficiencyOptions};
use index3d::indexengine::compute_index;
use index3d::pachner::{apply_move, canonical_code, is_isomorphic, MoveSpec};
use index3d::qlaurent::TruncatedSeries;
use index3d::tetindex::TetIndexCache;
use index3d::triangulation::{CombTriangulation, GluingData, PeripheralVector};
use proptest::prelude::*;

const M004: &str = include_str!("../../index3d-cli/fixtures/m004.tri");
const M003: &str = include_str!("../../index3d-cli/fixtures/m003.tri");
const FIVE_TWO: &str = include_str!("../../index3d-cli/fixtures/5_2.nz");
const M129: &str = include_str!("../../index3d-cli/fixtures/m129.nz");

fn index_g(g: &GluingData, order: i64) -> TruncatedSeries {
    compute_index(g, None, &PeripheralVector::zero(g.n()), order, &TetIndexCache::new()).unwrap()
}

fn index_t(t: &CombTriangulation, order: i64) -> TruncatedSeries {
    index_g(&GluingData::from_triangulation(t).unwrap(), order)
}

#[test]
fn serialisation_round_trips() {
    for text in [M004, M003] {
        let t = CombTriangulation::parse(text).unwrap();
        assert_eq!(CombTriangulation::parse(&t.serialize()).unwrap(), t);
    }
    for text in [FIVE_TWO, M129] {
        let g = GluingData::parse(text).unwrap();
        assert_eq!(GluingData::parse(&g.serialize()).unwrap(), g);
    }
}

#[test]
fn two_three_moves_everywhere() {
    let t = CombTriangulation::parse(M004).unwrap();
    let want = index_t(&t, 24);
    for tet in 0..2 {
        for face in 0..4 {
            let moved = apply_move(&t, &MoveSpec::TwoThree { tet, face }).unwrap();
            let g = GluingData::from_triangulation(&moved).unwrap();
            assert!(has_index_structure(&g, Some(&moved), &EfficiencyOptions::default()).unwrap().has_index_structure());
            assert_eq!(index_g(&g, 24), want, "2-3 at {tet},{face}");
        }
    }
}

#[test]
fn chained_moves() {
    // 2-3 then a 0-2 on the result
    let t = CombTriangulation::parse(M004).unwrap();
    let want = index_t(&t, 16);
    let a = apply_move(&t, &MoveSpec::TwoThree { tet: 1, face: 2 }).unwrap();
    let b = apply_move(&a, &MoveSpec::ZeroTwo { tet: 2, face: 0, a: 1, b: 2, steps: 1 }).unwrap();
    assert_eq!(b.n_tets(), 5);
    let g = GluingData::from_triangulation(&b).unwrap();
    if has_index_structure(&g, Some(&b), &EfficiencyOptions::default()).unwrap().has_index_structure() {
        assert_eq!(index_g(&g, 16), want);
    }
}

#[test]
fn sister_manifolds_share_equations() {
    let a = GluingData::from_triangulation(&CombTriangulation::parse(M003).unwrap()).unwrap();
    let b = GluingData::from_triangulation(&CombTriangulation::parse(M004).unwrap()).unwrap();
    assert_eq!(index_g(&a, 30), index_g(&b, 30));
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabelling_keeps_the_index(sigma in permutation(3), face in 0u8..4) {
        let t = CombTriangulation::parse(M004).unwrap();
        let moved = apply_move(&t, &MoveSpec::TwoThree { tet: 0, face }).unwrap();
        let relabelled = moved.relabel_tets(&sigma).unwrap();
        prop_assert!(is_isomorphic(&moved, &relabelled));
        prop_assert_eq!(canonical_code(&moved), canonical_code(&relabelled));
        prop_assert_eq!(index_t(&moved, 12), index_t(&relabelled, 12));
    }

    #[test]
    fn permuting_edges_and_tets(sigma in permutation(3), rho in permutation(3)) {
        let g = GluingData::parse(FIVE_TWO).unwrap();
        prop_assert_eq!(index_g(&g.permuted(&sigma, &rho), 20), index_g(&g, 20));
    }
}
