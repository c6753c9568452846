mod support;

use idlex_core::metrics::{gwet_ac1, krippendorff_alpha, percent_agreement, JudgmentMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_match_pair_enumeration(seed in any::<u64>()) {
        let ratings = random_ratings(&mut ChaCha8Rng::seed_from_u64(seed));
        let m = to_matrix(&ratings);
        prop_assert!(close(percent_agreement(&m).ok(), oracle_percent_agreement(&ratings), 1e-9));
        prop_assert!(close(krippendorff_alpha(&m).ok(), oracle_alpha(&ratings), 1e-9));
        prop_assert!(close(gwet_ac1(&m).ok(), oracle_ac1(&ratings), 1e-9));
    }

    #[test]
    fn metrics_ignore_rater_and_unit_names(seed in any::<u64>()) {
        let ratings = random_ratings(&mut ChaCha8Rng::seed_from_u64(seed));
        let m = to_matrix(&ratings);
        let mut renamed = JudgmentMatrix::new((0..ratings.categories).map(category_name)).unwrap();
        for (u, row) in ratings.cells.iter().enumerate().rev() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(c) = cell {
                    renamed.rate(&format!("unit-{}", 99 - u), &format!("x{j}"), &category_name(*c)).unwrap();
                }
            }
        }
        prop_assert!(close(krippendorff_alpha(&m).ok(), krippendorff_alpha(&renamed).ok(), 1e-12));
        prop_assert!(close(gwet_ac1(&m).ok(), gwet_ac1(&renamed).ok(), 1e-12));
    }

    #[test]
    fn agreement_bounds(seed in any::<u64>()) {
        let ratings = random_ratings(&mut ChaCha8Rng::seed_from_u64(seed));
        let m = to_matrix(&ratings);
        if let Ok(pa) = percent_agreement(&m) {
            prop_assert!((0.0..=1.0).contains(&pa));
        }
        if let Ok(a) = krippendorff_alpha(&m) {
            prop_assert!(a <= 1.0 + 1e-12);
        }
        if let Ok(ac1) = gwet_ac1(&m) {
            prop_assert!(ac1 <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn worked_matrix_hand_values() {
    let m = worked_matrix();
    assert!((percent_agreement(&m).unwrap() - 0.75).abs() < 1e-9);
    assert!((krippendorff_alpha(&m).unwrap() - 16.0 / 30.0).abs() < 1e-9);
    // pi = (5/8, 3/8), Pe = 2 * 15/64 = 15/32, AC1 = (3/4 - 15/32) / (17/32)
    assert!((gwet_ac1(&m).unwrap() - 9.0 / 17.0).abs() < 1e-9);
    assert!((9.0f64 / 17.0 - 0.5294).abs() < 1e-4);
}

#[test]
fn long_csv_matches_built_matrix() {
    let csv = "unit_id,rater_id,category\n\
               u0,r1,a\nu0,r2,a\nu1,r1,a\nu1,r2,a\nu2,r1,b\nu2,r2,b\nu3,r1,a\nu3,r2,b\n";
    let m = JudgmentMatrix::from_long_csv(csv.as_bytes(), None).unwrap();
    assert_eq!(krippendorff_alpha(&m).unwrap(), krippendorff_alpha(&worked_matrix()).unwrap());
}
