/// Square matrix in compressed sparse row form with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSymmetric {
    /// Sums duplicate entries in insertion order, so that mirrored entries
    /// coming from symmetric element matrices are bitwise equal.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len() / 4);
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len() / 4);
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                values.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum row sum of absolute values.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `max |a_ij - a_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                d = d.max((v - self.get(j, i)).abs());
            }
        }
        d
    }

    /// Splits by a row/column mask into the free-free block and the
    /// product of the free-constrained block with `xc` (given in full
    /// numbering).
    pub fn reduce(&self, free_index: &[Option<usize>], free_count: usize, xc: &[f64]) -> (SparseSymmetric, Vec<f64>) {
        let mut row_ptr = Vec::with_capacity(free_count + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut coupling = vec![0.0; free_count];
        for i in 0..self.dim {
            let Some(fi) = free_index[i] else { continue };
            for (j, v) in self.row(i) {
                match free_index[j] {
                    Some(fj) => {
                        col_idx.push(fj);
                        values.push(v);
                    }
                    None => coupling[fi] += v * xc[j],
                }
            }
            row_ptr.push(col_idx.len());
        }
        (SparseSymmetric { dim: free_count, row_ptr, col_idx, values }, coupling)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_summed() {
        let a =
            SparseSymmetric::from_triplets(3, vec![(0, 0, 1.0), (1, 2, 2.0), (0, 0, 3.0), (2, 1, 2.0), (2, 2, 5.0)]);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 2.0, 7.0]);
        assert_eq!(a.symmetry_defect(), 0.0);
        assert_eq!(a.norm_inf(), 7.0);
    }

    #[test]
    fn reduce_moves_constrained_columns() {
        let a = SparseSymmetric::from_triplets(
            3,
            vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (1, 2, 4.0), (2, 1, 4.0), (2, 2, 6.0)],
        );
        let free = vec![Some(0), None, Some(1)];
        let (r, c) = a.reduce(&free, 2, &[0.0, 2.0, 0.0]);
        assert_eq!(r.dim, 2);
        assert_eq!((r.get(0, 0), r.get(1, 1), r.get(0, 1)), (2.0, 6.0, 0.0));
        assert_eq!(c, vec![2.0, 8.0]);
    }
}
