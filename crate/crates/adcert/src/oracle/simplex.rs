//! Exact feasibility of strict homogeneous inequality systems.
//!
//! `feasible_strict(rows, n)` decides whether some `v` satisfies
//! `row · v > 0` for every row, returning one such `v`. By homogeneity this
//! is equivalent to `row · v >= 1`, which a phase-I simplex (minimizing the
//! artificial variables of `A(v+ - v-) - s + a = 1`) settles exactly over
//! the rationals. Bland's rule guarantees termination. Problem sizes here
//! are tiny (dimension <= parameter count, one row per kink), so a dense
//! tableau is fine.

use crate::rat::Rat;

pub fn feasible_strict(rows: &[Vec<Rat>], n: usize) -> Option<Vec<Rat>> {
    if rows.is_empty() {
        let mut v = vec![Rat::zero(); n];
        if n > 0 {
            v[0] = Rat::one();
        }
        return Some(v);
    }
    let m = rows.len();
    let cols = 2 * n + 2 * m; // v+, v-, slack, artificial
    let art0 = 2 * n + m;
    // Tableau rows: [A | -A | -I | I | 1].
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        let mut r = vec![Rat::zero(); cols + 1];
        for j in 0..n {
            r[j] = row[j].clone();
            r[n + j] = -&row[j];
        }
        r[2 * n + i] = -Rat::one();
        r[art0 + i] = Rat::one();
        r[cols] = Rat::one();
        t.push(r);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| art0 + i).collect();
    // Objective row for min sum(artificials): reduced costs z_j - c_j.
    let mut obj = vec![Rat::zero(); cols + 1];
    for r in &t {
        for j in 0..=cols {
            obj[j] += &r[j];
        }
    }
    for j in art0..cols {
        obj[j] -= &Rat::one();
    }

    loop {
        if obj[cols].is_zero() {
            break; // all artificials zero: feasible
        }
        // Bland: smallest improving column.
        let enter = match (0..cols).find(|&j| obj[j].is_positive()) {
            Some(j) => j,
            None => return None, // optimal with positive objective: infeasible
        };
        // Ratio test with Bland tie-breaking on the basis index.
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for i in 0..m {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &t[i][cols] / &t[i][enter];
            let better = match &best {
                None => true,
                Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        let leave = leave?; // unbounded cannot happen; treat defensively
        // Pivot.
        let piv = t[leave][enter].clone();
        for v in t[leave].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..m {
            if i == leave || t[i][enter].is_zero() {
                continue;
            }
            let f = t[i][enter].clone();
            for j in 0..=cols {
                let d = &t[leave][j] * &f;
                t[i][j] -= &d;
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for j in 0..=cols {
                let d = &t[leave][j] * &f;
                obj[j] -= &d;
            }
        }
        basis[leave] = enter;
    }

    let mut v = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            v[b] += &t[i][cols];
        } else if b < 2 * n {
            v[b - n] -= &t[i][cols];
        }
    }
    debug_assert!(rows.iter().all(|row| {
        row.iter()
            .zip(&v)
            .map(|(a, b)| a * b)
            .sum::<Rat>()
            .is_positive()
    }));
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn r(vals: &[i64]) -> Vec<Rat> {
        vals.iter().map(|&v| Rat::from_int(v)).collect()
    }

    fn check_feasible(rows: &[Vec<Rat>], n: usize) {
        let v = feasible_strict(rows, n).expect("feasible");
        for row in rows {
            let s: Rat = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!(s.is_positive(), "violated: {row:?} . {v:?}");
        }
    }

    #[test]
    fn simple_cones() {
        check_feasible(&[r(&[1, 0]), r(&[0, 1])], 2);
        check_feasible(&[r(&[1, 1]), r(&[1, -1])], 2);
        check_feasible(&[r(&[-1, 0]), r(&[0, -1]), r(&[1, 1]).iter().map(|x| -x).collect()], 2);
    }

    #[test]
    fn antipodal_rows_are_infeasible() {
        assert!(feasible_strict(&[r(&[1, 0]), r(&[-1, 0])], 2).is_none());
        assert!(feasible_strict(&[r(&[1]), r(&[-1])], 1).is_none());
        // Three vectors positively spanning the plane.
        assert!(feasible_strict(&[r(&[1, 0]), r(&[-1, 1]), r(&[-1, -1])], 2).is_none());
    }

    #[test]
    fn one_dimensional() {
        check_feasible(&[r(&[2])], 1);
        check_feasible(&[r(&[-3])], 1);
        assert!(feasible_strict(&[r(&[0])], 1).is_none());
    }

    #[test]
    fn empty_system_returns_unit() {
        let v = feasible_strict(&[], 3).unwrap();
        assert_eq!(v, vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn thin_cone() {
        // v1 > 100 v2, v2 > 0: feasible but narrow.
        check_feasible(&[r(&[1, -100]), r(&[0, 1])], 2);
    }
}
