mod support;

use proptest::prelude::*;
use proptest::test_runner::Config;
use support::*;

proptest! {
    #![proptest_config(Config::with_cases(CASES))]

    #[test]
    fn canonical_form_is_idempotent_and_unique(case in canonical_case()) {
        check_canonical(case)?;
    }

    #[test]
    fn dimension_formula(case in pair_case()) {
        check_dimension_formula(case)?;
    }

    #[test]
    fn adjacency_is_symmetric(case in same_dim_case()) {
        check_adjacency_symmetry(case)?;
    }

    #[test]
    fn orthocomplement_is_an_involution(x in single_case()) {
        check_perp_involution(x)?;
    }

    #[test]
    fn group_action_composes(case in action_case()) {
        check_action_composition(case)?;
    }
}
