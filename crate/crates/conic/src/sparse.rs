//! Compressed sparse column storage and triplet assembly.

#[derive(Clone, Debug, Default)]
pub struct Csc {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csc {
    /// Assembles from `(row, col, value)` triplets. Duplicates are summed;
    /// row indices inside each column end up sorted.
    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> Self {
        let mut count = vec![0usize; ncols + 1];
        for &(_, c, _) in trip {
            count[c + 1] += 1;
        }
        for c in 0..ncols {
            count[c + 1] += count[c];
        }
        let mut next = count.clone();
        let mut rows = vec![0usize; trip.len()];
        let mut vals = vec![0.0; trip.len()];
        for &(r, c, v) in trip {
            let p = next[c];
            rows[p] = r;
            vals[p] = v;
            next[c] += 1;
        }
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowidx = Vec::with_capacity(trip.len());
        let mut values = Vec::with_capacity(trip.len());
        colptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for c in 0..ncols {
            order.clear();
            order.extend(count[c]..count[c + 1]);
            order.sort_by_key(|&p| rows[p]);
            let start = rowidx.len();
            for &p in &order {
                if rowidx.len() > start && *rowidx.last().unwrap() == rows[p] {
                    *values.last_mut().unwrap() += vals[p];
                } else {
                    rowidx.push(rows[p]);
                    values.push(vals[p]);
                }
            }
            colptr.push(rowidx.len());
        }
        Self { nrows, ncols, colptr, rowidx, values }
    }

    pub fn nnz(&self) -> usize {
        self.rowidx.len()
    }

    /// `y += A x`
    pub fn gemv(&self, x: &[f64], y: &mut [f64]) {
        for c in 0..self.ncols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for p in self.colptr[c]..self.colptr[c + 1] {
                y[self.rowidx[p]] += self.values[p] * xc;
            }
        }
    }

    /// `y += Aᵀ x`
    pub fn gemv_t(&self, x: &[f64], y: &mut [f64]) {
        for c in 0..self.ncols {
            let mut acc = 0.0;
            for p in self.colptr[c]..self.colptr[c + 1] {
                acc += self.values[p] * x[self.rowidx[p]];
            }
            y[c] += acc;
        }
    }

    pub fn transpose(&self) -> Csc {
        let trip: Vec<(usize, usize, f64)> = (0..self.ncols)
            .flat_map(|c| (self.colptr[c]..self.colptr[c + 1]).map(move |p| (c, p)))
            .map(|(c, p)| (c, self.rowidx[p], self.values[p]))
            .collect();
        Csc::from_triplets(self.ncols, self.nrows, &trip)
    }
}
