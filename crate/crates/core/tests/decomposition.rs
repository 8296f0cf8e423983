use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semilinear::decomposition::{
    check_frontier, check_partition, check_refinement, clip_to_box, decompose, refine_special, validate_special,
};
use semilinear::generate::random_special;
use semilinear::scalar::{int, point};
use semilinear::{AffineMap, Carrier, Decomposition, Formula};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn half_plane_gives_three_special_cells() {
    let d = refine_special(&decompose(&[Formula::ge(AffineMap::from_ints(&[1], 0))], 1).unwrap()).unwrap();
    assert_eq!(d.cells.len(), 3);
    assert!(d.special);
    assert_eq!(d.star(1).unwrap(), vec![0, 1, 2]);
}

#[test]
fn empty_input_is_one_cell() {
    let d = decompose(&[], 2).unwrap();
    assert_eq!(d.cells.len(), 1);
    assert!(d.union_contains(&point(&[5, -7])));
}

#[test]
fn json_round_trip() {
    let (_, _, fine) = random_special(2, 4, &mut rng(3)).unwrap();
    let text = serde_json::to_string(&fine).unwrap();
    let back: Decomposition = serde_json::from_str(&text).unwrap();
    assert_eq!(back, fine);
}

#[test]
fn clipping_bounds_everything() {
    let (_, _, fine) = random_special(2, 5, &mut rng(11)).unwrap();
    let (bbox, clipped) = clip_to_box(&fine, &[(int(-2), int(2)), (int(-2), int(2))]).unwrap();
    assert!(clipped.is_bounded());
    assert!(validate_special(&clipped).is_ok());
    assert!(bbox.iter().all(|(lo, hi)| lo <= &int(-2) && hi >= &int(2)));
    assert!(matches!(clipped.carrier, Carrier::Set(_)));
    assert!(check_partition(&clipped, 100, &mut rng(1)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plane_refinements_are_special(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (_, coarse, fine) = random_special(2, 6, &mut r).unwrap();
        prop_assert!(fine.special);
        let report = validate_special(&fine);
        prop_assert!(report.is_ok(), "{:?}", report.violations.first());
        prop_assert!(check_partition(&fine, 60, &mut r).is_ok());
        prop_assert!(check_refinement(&coarse, &fine, 60, &mut r).is_ok());
        prop_assert!(check_frontier(&fine, 2, &mut r).is_ok());
    }

    #[test]
    fn space_refinements_are_special(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (_, coarse, fine) = random_special(3, 2, &mut r).unwrap();
        prop_assert!(validate_special(&fine).is_ok());
        prop_assert!(check_refinement(&coarse, &fine, 40, &mut r).is_ok());
    }

    #[test]
    fn stars_contain_their_center(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (_, _, fine) = random_special(2, 4, &mut r).unwrap();
        for i in 0..fine.cells.len() {
            let star = fine.star(i).unwrap();
            prop_assert!(star.contains(&i));
            for &j in &star {
                // Frontier: a cell meeting a closure lies inside it.
                prop_assert!(fine.cells[i].subset_of_closure(&fine.cells[j]));
            }
        }
    }
}
