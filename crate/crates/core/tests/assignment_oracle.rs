use etrack_core::assignment::{solve_assignment, AssociationResult, CostMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Ranked = (usize, f64, Vec<(usize, usize)>);

/// Every partial injection of rows into columns over admissible entries,
/// ranked by (most pairs, least cost, smallest sorted pair list).
fn brute_force(costs: &CostMatrix) -> Ranked {
    fn walk(
        costs: &CostMatrix,
        row: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        best: &mut Option<Ranked>,
    ) {
        if row == costs.rows() {
            let total: f64 = cur.iter().map(|&(r, c)| costs.get(r, c)).sum();
            let cand = (cur.len(), total, cur.clone());
            let better = match best {
                None => true,
                Some((n, t, list)) => {
                    cand.0 > *n
                        || (cand.0 == *n && (cand.1 < *t || (cand.1 == *t && cand.2 < *list)))
                }
            };
            if better {
                *best = Some(cand);
            }
            return;
        }
        for c in 0..costs.cols() {
            if !used[c] && costs.is_admissible(row, c) {
                used[c] = true;
                cur.push((row, c));
                walk(costs, row + 1, used, cur, best);
                cur.pop();
                used[c] = false;
            }
        }
        walk(costs, row + 1, used, cur, best);
    }
    let mut best = None;
    walk(
        costs,
        0,
        &mut vec![false; costs.cols()],
        &mut Vec::new(),
        &mut best,
    );
    best.unwrap()
}

fn assert_partition(r: &AssociationResult, rows: usize, cols: usize) {
    let mut row_seen = vec![0; rows];
    let mut col_seen = vec![0; cols];
    for &(t, d) in &r.matches {
        row_seen[t] += 1;
        col_seen[d] += 1;
    }
    r.unmatched_tracks.iter().for_each(|t| row_seen[*t] += 1);
    r.unmatched_detections
        .iter()
        .for_each(|d| col_seen[*d] += 1);
    assert!(row_seen.iter().chain(&col_seen).all(|n| *n == 1));
}

fn int_matrix(rows: usize, cols: usize, cells: &[Option<u8>]) -> CostMatrix {
    CostMatrix::new(
        rows,
        cols,
        cells[..rows * cols]
            .iter()
            .map(|c| c.map_or(f64::INFINITY, |v| (v % 101) as f64))
            .collect(),
    )
}

#[test]
fn three_by_three_matches_permutation_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let cells: Vec<f64> = (0..9).map(|_| rng.random_range(0..20) as f64).collect();
        let m = CostMatrix::new(3, 3, cells);
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let best = perms
            .iter()
            .map(|p| (0..3).map(|r| m.get(r, p[r])).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(solve_assignment(&m).total_cost(&m), best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_brute_force_exactly(
        rows in 0usize..=5,
        cols in 0usize..=5,
        cells in proptest::collection::vec(proptest::option::weighted(0.8, 0u8..=100), 25),
    ) {
        let m = int_matrix(rows, cols, &cells);
        let r = solve_assignment(&m);
        assert_partition(&r, rows, cols);
        let (n, total, list) = brute_force(&m);
        prop_assert_eq!(r.matches.len(), n);
        prop_assert_eq!(r.total_cost(&m), total);
        prop_assert_eq!(r.matches, list);
    }

    #[test]
    fn ties_are_lexicographic(
        rows in 1usize..=5,
        cols in 1usize..=5,
        cells in proptest::collection::vec(proptest::option::weighted(0.7, 0u8..=2), 25),
    ) {
        let m = int_matrix(rows, cols, &cells);
        prop_assert_eq!(solve_assignment(&m).matches, brute_force(&m).2);
    }

    #[test]
    fn positive_scaling_keeps_matches(
        rows in 1usize..=6,
        cols in 1usize..=6,
        cells in proptest::collection::vec(proptest::option::weighted(0.8, 0u8..=100), 36),
        scale in prop_oneof![Just(0.5), Just(2.0), Just(8.0), Just(0.125)],
    ) {
        let m = int_matrix(rows, cols, &cells);
        let scaled = CostMatrix::from_fn(rows, cols, |r, c| m.get(r, c) * scale);
        prop_assert_eq!(solve_assignment(&m).matches, solve_assignment(&scaled).matches);
    }

    #[test]
    fn real_valued_costs_are_optimal(
        rows in 1usize..=5,
        cols in 1usize..=5,
        cells in proptest::collection::vec(0.0f64..50.0, 25),
    ) {
        let m = CostMatrix::new(rows, cols, cells[..rows * cols].to_vec());
        let r = solve_assignment(&m);
        let (n, total, _) = brute_force(&m);
        prop_assert_eq!(r.matches.len(), n);
        prop_assert!((r.total_cost(&m) - total).abs() < 1e-9);
    }
}
