//! Replays published worked solutions step by step against `expand`.

mod common;

#[test]
fn equations_with_unknown_in_denominator() {
    let (env, text) = common::worked("equations_with_unknown_in_denominator");
    common::replay(env, text).unwrap();
}

#[test]
fn equations_with_unknown_on_both_sides() {
    let (env, text) = common::worked("equations_with_unknown_on_both_sides");
    common::replay(env, text).unwrap();
}

#[test]
fn fractions_common_denominator() {
    let (env, text) = common::worked("fractions_common_denominator");
    common::replay(env, text).unwrap();
}

#[test]
fn fractions_subtract_integer() {
    let (env, text) = common::worked("fractions_subtract_integer");
    common::replay(env, text).unwrap();
}

#[test]
fn fractions_product_of_integers() {
    let (env, text) = common::worked("fractions_product_of_integers");
    common::replay(env, text).unwrap();
}

#[test]
fn ternary_short_sum() {
    let (env, text) = common::worked("ternary_short_sum");
    common::replay(env, text).unwrap();
}

#[test]
fn ternary_long_sum() {
    let (env, text) = common::worked("ternary_long_sum");
    common::replay(env, text).unwrap();
}

#[test]
fn sorting_by_swaps() {
    let (env, text) = common::worked("sorting_by_swaps");
    common::replay(env, text).unwrap();
}

#[test]
fn sorting_after_reverse() {
    let (env, text) = common::worked("sorting_after_reverse");
    common::replay(env, text).unwrap();
}
