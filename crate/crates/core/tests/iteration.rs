#[path = "common/oracles.rs"]
mod oracles;

use proptest::prelude::*;
use sumrate::iteration::{half_step_a, half_step_b, iterate, sum_rate_field, IterationConfig};
use sumrate::model::{rho0_field, ExtendedReal, FieldLabel, FunctionSpec, ProductPmfGrid, RateField};
use sumrate::oracles::{rho_star_field, verify_family_membership, ClosedForm};

fn random_field(n: usize, cells: &[Option<f64>]) -> RateField {
    let grid = ProductPmfGrid::new(n).unwrap();
    RateField::from_values(grid, cells.iter().map(|&c| ExtendedReal::from(c)).collect(), FieldLabel::Other).unwrap()
}

fn cells(n: usize) -> impl Strategy<Value = Vec<Option<f64>>> {
    prop::collection::vec(prop::option::weighted(0.8, -2.0..2.0f64), n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // every row of an A-step is the chord hull of the input row
    #[test]
    fn a_step_rows_match_chord_oracle(c in cells(9)) {
        let f = random_field(9, &c);
        let g = half_step_a(&f);
        let xs = f.grid().coords();
        for j in 0..9 {
            let row: Vec<Option<f64>> = f.row(j).into_iter().map(ExtendedReal::finite).collect();
            let want = oracles::chord_oracle_1d(&xs, &row);
            for (i, w) in want.iter().enumerate() {
                match (w, g.get(i, j).finite()) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9, "row {j} node {i}: {a} vs {b}"),
                    (None, None) => {}
                    (a, b) => prop_assert!(false, "support differs at ({i}, {j}): {a:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn b_step_columns_match_chord_oracle(c in cells(9)) {
        let f = random_field(9, &c);
        let g = half_step_b(&f);
        let xs = f.grid().coords();
        for i in 0..9 {
            let col: Vec<Option<f64>> = f.column(i).iter().map(|v| v.finite()).collect();
            let want = oracles::chord_oracle_1d(&xs, &col);
            for (j, w) in want.iter().enumerate() {
                prop_assert_eq!(w.is_some(), g.get(i, j).is_finite());
                if let (Some(a), Some(b)) = (w, g.get(i, j).finite()) {
                    prop_assert!((a - b).abs() <= 1e-9);
                }
            }
        }
    }

    // alternation never lowers a node and stays below any concave majorant
    #[test]
    fn steps_are_monotone_and_bounded(c in cells(7)) {
        let f = random_field(7, &c);
        let bound = 2.0;
        let mut cur = f;
        for t in 0..6 {
            let next = if t % 2 == 0 { half_step_a(&cur) } else { half_step_b(&cur) };
            for (a, b) in cur.values().iter().zip(next.values()) {
                prop_assert!(b >= a || (a.finite().unwrap() - b.finite().unwrap()).abs() <= 1e-12);
                if let Some(v) = b.finite() {
                    prop_assert!(v <= bound + 1e-12);
                }
            }
            cur = next;
        }
    }
}

#[test]
fn and_iterates_approach_the_optimum_from_below() {
    for which in [ClosedForm::AndAtB, ClosedForm::AndBoth] {
        let grid = ProductPmfGrid::new(41).unwrap();
        let star = rho_star_field(grid, which);
        let cfg = IterationConfig::new(41, 30, 1e-9).unwrap().with_history(true);
        let out = iterate(&which.function(), &cfg, Some(&star)).unwrap();
        let gaps: Vec<f64> = out.trace.records.iter().map(|r| r.max_oracle_gap.unwrap()).collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{which}: gap rose {} -> {}", w[0], w[1]);
        }
        for field in &out.history {
            assert!(field.max_gap_below(&star).unwrap() >= -1e-9, "{which}: iterate exceeded the optimum");
        }
        assert!(*gaps.last().unwrap() < 0.03, "{which}: final gap {}", gaps.last().unwrap());
    }
}

#[test]
fn limit_is_a_family_member() {
    let f = FunctionSpec::and_both();
    let out = iterate(&f, &IterationConfig::new(31, 40, 1e-10).unwrap(), None).unwrap();
    let report = verify_family_membership(&out.last, &f, 1e-9).unwrap();
    assert!(report.passed(), "{report:?}");
    assert!(!verify_family_membership(&rho0_field(out.last.grid(), &f), &f, 1e-9).unwrap().passed());
}

#[test]
fn swapping_terminals_mirrors_the_iterates() {
    let f = FunctionSpec::and_both();
    let n = 21;
    let a = iterate(&f, &IterationConfig::new(n, 5, 1e-12).unwrap(), None).unwrap();
    let b = iterate(
        &f.swap_terminals(),
        &IterationConfig::new(n, 5, 1e-12).unwrap().starting_with(sumrate::model::Terminal::B),
        None,
    )
    .unwrap();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a.last.get(i, j).to_f64(), b.last.get(j, i).to_f64());
            assert!((x - y).abs() <= 1e-12 || x == y, "({i}, {j}): {x} vs {y}");
        }
    }
}

#[test]
fn sum_rate_is_conditional_entropy_minus_rate() {
    let f = FunctionSpec::and_at_b();
    let out = iterate(&f, &IterationConfig::new(11, 1, 1e-9).unwrap(), None).unwrap();
    let s = sum_rate_field(&out.last);
    // one message from A: A must send X wherever Y = 1 is possible, so R = h2(p)
    for k in [2, 5, 8] {
        let p = k as f64 / 10.0;
        let want = sumrate::model::binary_entropy(p).unwrap();
        assert!((s.at(p, 0.3) - want).abs() < 1e-12);
    }
}
