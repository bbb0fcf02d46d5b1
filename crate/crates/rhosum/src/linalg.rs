//! Exact linear algebra over the multivariate rational function field.
//!
//! All elimination is fraction-free in spirit: entries are ParamRat values
//! and every operation is exact. Pivot selection prefers entries with few
//! terms, which keeps expression swell manageable on the structured systems
//! the telescoping solvers produce, and ties break toward the lowest row so
//! results are deterministic.

use crate::param::ParamRat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<ParamRat>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![ParamRat::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<ParamRat>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &ParamRat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ParamRat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[ParamRat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[ParamRat]) -> Vec<ParamRat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = ParamRat::zero();
                for j in 0..self.cols {
                    let e = self.at(i, j);
                    if !e.is_zero() && !v[j].is_zero() {
                        acc = acc.add(&e.mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduce to reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut best: Option<(usize, usize)> = None; // (complexity, row)
            for i in r..self.rows {
                let e = self.at(i, c);
                if e.is_zero() {
                    continue;
                }
                let cost = e.num().num_terms() + e.den().num_terms();
                if best.map_or(true, |(bc, _)| cost < bc) {
                    best = Some((cost, i));
                }
            }
            let Some((_, prow)) = best else { continue };
            self.swap_rows(r, prow);
            let inv = self.at(r, c).recip();
            for j in c..self.cols {
                let e = self.at(r, j);
                if !e.is_zero() {
                    self.set(r, j, e.mul(&inv));
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.at(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let e = self.at(r, j).clone();
                    if !e.is_zero() {
                        let cur = self.at(i, j);
                        self.set(i, j, cur.sub(&factor.mul(&e)));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Basis of the right nullspace, one vector per free column, each with
    /// a 1 in its free coordinate.
    pub fn nullspace(&self) -> Vec<Vec<ParamRat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let is_pivot = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = vec![ParamRat::zero(); self.cols];
            v[f] = ParamRat::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = m.at(k, f).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of A x = b with all free coordinates set to zero, or None
    /// if the system is inconsistent.
    pub fn solve(&self, b: &[ParamRat]) -> Option<Vec<ParamRat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.at(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![ParamRat::zero(); self.cols];
        for (k, &p) in pivots.iter().enumerate() {
            x[p] = aug.at(k, self.cols).clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParamRat;

    fn pr(n: i64) -> ParamRat {
        ParamRat::from_int(n)
    }

    #[test]
    fn rref_numeric() {
        let mut m = Matrix::from_rows(vec![vec![pr(1), pr(2)], vec![pr(3), pr(4)]]);
        let pivots = m.rref();
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(*m.at(0, 0), pr(1));
        assert_eq!(*m.at(0, 1), pr(0));
        assert_eq!(*m.at(1, 1), pr(1));
    }

    #[test]
    fn nullspace_annihilates() {
        let n = ParamRat::var("n");
        let m = Matrix::from_rows(vec![vec![
            n.clone(),
            n.mul(&n),
            ParamRat::one(),
        ]]);
        let basis = m.nullspace();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            for e in m.apply(v) {
                assert!(e.is_zero());
            }
        }
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = Matrix::from_rows(vec![vec![pr(2), pr(0)], vec![pr(0), pr(3)]]);
        let x = a.solve(&[pr(4), pr(9)]).unwrap();
        assert_eq!(x, vec![pr(2), pr(3)]);
        let bad = Matrix::from_rows(vec![vec![pr(1), pr(1)], vec![pr(2), pr(2)]]);
        assert!(bad.solve(&[pr(0), pr(1)]).is_none());
        assert!(bad.solve(&[pr(1), pr(2)]).is_some());
    }

    #[test]
    fn underdetermined_solution_checks() {
        // x + y + z = 6 with a parameter coefficient
        let n = ParamRat::var("n");
        let a = Matrix::from_rows(vec![vec![ParamRat::one(), n.clone(), ParamRat::one()]]);
        let x = a.solve(&[pr(6)]).unwrap();
        let ax = a.apply(&x);
        assert_eq!(ax[0], pr(6));
    }
}
