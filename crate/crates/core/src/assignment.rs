//! Rectangular minimum-cost assignment with inadmissible pairs.
//!
//! The solver maximizes the number of admissible (finite-cost) pairs first and
//! minimizes their total cost second. Both objectives are carried exactly by
//! running the Hungarian method over the lexicographic value
//! `(inadmissible count, cost)`, so the `+∞` sentinel never takes part in
//! float arithmetic. Among equally good matchings the lexicographically
//! smallest `(row, col)` match list is returned.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, AddAssign, Sub, SubAssign};

/// Dense row-major cost matrix; `f64::INFINITY` marks an inadmissible pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    /// # Panics
    /// If `data.len() != rows * cols`, or an entry is NaN or `-∞`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix shape mismatch");
        assert!(
            data.iter().all(|c| !c.is_nan() && *c != f64::NEG_INFINITY),
            "costs must be finite or +inf"
        );
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn is_admissible(&self, row: usize, col: usize) -> bool {
        self.get(row, col).is_finite()
    }

    /// Shifts every finite entry so the smallest becomes 0.
    pub fn normalized(&self) -> Self {
        let min = self
            .data
            .iter()
            .copied()
            .filter(|c| c.is_finite())
            .fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return self.clone();
        }
        let data = self
            .data
            .iter()
            .map(|c| if c.is_finite() { c - min } else { *c })
            .collect();
        Self { data, ..*self }
    }

    fn max_abs_finite(&self) -> f64 {
        self.data
            .iter()
            .filter(|c| c.is_finite())
            .fold(0.0, |m: f64, c| m.max(c.abs()))
    }
}

/// Partition of rows and columns into matched pairs and leftovers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssociationResult {
    /// `(row, col)` pairs sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

impl AssociationResult {
    pub fn total_cost(&self, costs: &CostMatrix) -> f64 {
        self.matches.iter().map(|&(r, c)| costs.get(r, c)).sum()
    }

    /// Builds the partition for `rows × cols` from a match list.
    pub fn from_matches(rows: usize, cols: usize, mut matches: Vec<(usize, usize)>) -> Self {
        matches.sort_unstable();
        let mut row_used = vec![false; rows];
        let mut col_used = vec![false; cols];
        for &(r, c) in &matches {
            row_used[r] = true;
            col_used[c] = true;
        }
        Self {
            matches,
            unmatched_tracks: (0..rows).filter(|r| !row_used[*r]).collect(),
            unmatched_detections: (0..cols).filter(|c| !col_used[*c]).collect(),
        }
    }
}

/// `(inadmissible count, cost)` ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Lex {
    blocked: i64,
    value: f64,
}

impl Lex {
    const ZERO: Lex = Lex {
        blocked: 0,
        value: 0.0,
    };
    const INF: Lex = Lex {
        blocked: i64::MAX / 4,
        value: 0.0,
    };
}

impl PartialOrd for Lex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.blocked.cmp(&other.blocked) {
            Ordering::Equal => self.value.partial_cmp(&other.value),
            o => Some(o),
        }
    }
}

impl Add for Lex {
    type Output = Lex;
    fn add(self, o: Lex) -> Lex {
        Lex {
            blocked: self.blocked + o.blocked,
            value: self.value + o.value,
        }
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, o: Lex) -> Lex {
        Lex {
            blocked: self.blocked - o.blocked,
            value: self.value - o.value,
        }
    }
}

impl AddAssign for Lex {
    fn add_assign(&mut self, o: Lex) {
        *self = *self + o;
    }
}

impl SubAssign for Lex {
    fn sub_assign(&mut self, o: Lex) {
        *self = *self - o;
    }
}

/// Square padding of a [`CostMatrix`]; padded cells cost zero.
struct Padded<'a> {
    costs: &'a CostMatrix,
    n: usize,
}

impl Padded<'_> {
    fn cell(&self, r: usize, c: usize) -> Lex {
        if r < self.costs.rows && c < self.costs.cols {
            let v = self.costs.get(r, c);
            if v.is_finite() {
                Lex {
                    blocked: 0,
                    value: v,
                }
            } else {
                Lex {
                    blocked: 1,
                    value: 0.0,
                }
            }
        } else {
            Lex::ZERO
        }
    }

    /// Whether assigning `r → c` leaves `r` without a real match.
    fn is_unmatched(&self, r: usize, c: usize) -> bool {
        r >= self.costs.rows || c >= self.costs.cols || !self.costs.is_admissible(r, c)
    }
}

/// Hungarian method with potentials. Returns the column of every row and
/// the final dual potentials `(u, v)`.
fn hungarian(m: &Padded<'_>) -> (Vec<usize>, Vec<Lex>, Vec<Lex>) {
    let n = m.n;
    // 1-based internally; index 0 is the virtual source column.
    let mut u = vec![Lex::ZERO; n + 1];
    let mut v = vec![Lex::ZERO; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![Lex::INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = Lex::INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = m.cell(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        col_of_row[row_of[j] - 1] = j - 1;
    }
    (col_of_row, u, v)
}

/// How far a row's assignment is settled during the tie-break pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pin {
    Free,
    /// Keeps its current column.
    Matched,
    /// May move, but only among columns that leave it unmatched.
    Unmatched,
}

/// Rewrites an optimal assignment into the lexicographically smallest one.
///
/// Every optimal assignment uses only edges with zero reduced cost under the
/// optimal potentials, so it suffices to pick, row by row, the smallest
/// feasible tight column while an alternating path keeps the rest perfect.
struct TieBreak<'a, 'm> {
    m: &'a Padded<'m>,
    tight: Vec<Vec<usize>>,
    col_of_row: &'a mut [usize],
    row_of_col: Vec<usize>,
    pins: Vec<Pin>,
    visited: Vec<bool>,
}

impl TieBreak<'_, '_> {
    /// Finds an alternating path that moves `row` off its column and ends by
    /// claiming `target`.
    fn reroute(&mut self, row: usize, target: usize) -> bool {
        for k in 0..self.tight[row].len() {
            let col = self.tight[row][k];
            if self.visited[col] {
                continue;
            }
            if self.pins[row] == Pin::Unmatched && !self.m.is_unmatched(row, col) {
                continue;
            }
            self.visited[col] = true;
            let found = if col == target {
                true
            } else {
                let holder = self.row_of_col[col];
                self.pins[holder] != Pin::Matched && self.reroute(holder, target)
            };
            if found {
                self.col_of_row[row] = col;
                self.row_of_col[col] = row;
                return true;
            }
        }
        false
    }
}

fn lexicographic_refine(m: &Padded<'_>, col_of_row: &mut [usize], u: &[Lex], v: &[Lex]) {
    let n = m.n;
    let tol = 1e-9 * m.costs.max_abs_finite().max(1.0);
    let mut tight: Vec<Vec<usize>> = Vec::with_capacity(n);
    for r in 0..n {
        let mut cols: Vec<usize> = (0..n)
            .filter(|&c| {
                if col_of_row[r] == c {
                    return true;
                }
                let reduced = m.cell(r, c) - u[r + 1] - v[c + 1];
                reduced.blocked == 0 && reduced.value.abs() <= tol
            })
            .collect();
        cols.sort_by_key(|&c| (m.is_unmatched(r, c), c));
        tight.push(cols);
    }
    let mut row_of_col = vec![0usize; n];
    for (r, &c) in col_of_row.iter().enumerate() {
        row_of_col[c] = r;
    }
    let mut tb = TieBreak {
        m,
        tight,
        col_of_row,
        row_of_col,
        pins: vec![Pin::Free; n],
        visited: vec![false; n],
    };
    for r in 0..m.costs.rows {
        let current = tb.col_of_row[r];
        let current_unmatched = m.is_unmatched(r, current);
        for k in 0..tb.tight[r].len() {
            let c = tb.tight[r][k];
            if c == current || (current_unmatched && m.is_unmatched(r, c)) {
                break;
            }
            let holder = tb.row_of_col[c];
            if tb.pins[holder] == Pin::Matched {
                continue;
            }
            tb.visited.iter_mut().for_each(|x| *x = false);
            tb.visited[c] = true;
            // `r` keeps holding `current` during the search, so the path
            // ends there and `r` then takes `c`.
            tb.pins[r] = Pin::Matched;
            let ok = tb.reroute(holder, current);
            if ok {
                tb.col_of_row[r] = c;
                tb.row_of_col[c] = r;
                break;
            }
            tb.pins[r] = Pin::Free;
        }
        tb.pins[r] = if m.is_unmatched(r, tb.col_of_row[r]) {
            Pin::Unmatched
        } else {
            Pin::Matched
        };
    }
}

/// Minimum-cost matching over admissible entries.
///
/// Maximizes the number of matched admissible pairs, then minimizes their
/// summed cost, then returns the lexicographically smallest match list.
/// Pairs with `+∞` cost are never matched.
pub fn solve_assignment(costs: &CostMatrix) -> AssociationResult {
    let (rows, cols) = (costs.rows, costs.cols);
    if rows == 0 || cols == 0 {
        return AssociationResult::from_matches(rows, cols, Vec::new());
    }
    let padded = Padded {
        costs,
        n: rows.max(cols),
    };
    let (mut col_of_row, u, v) = hungarian(&padded);
    lexicographic_refine(&padded, &mut col_of_row, &u, &v);
    let matches = col_of_row
        .iter()
        .enumerate()
        .filter(|&(r, &c)| !padded.is_unmatched(r, c))
        .map(|(r, &c)| (r, c))
        .collect();
    AssociationResult::from_matches(rows, cols, matches)
}
