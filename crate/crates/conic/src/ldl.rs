//! Sparse LDLᵀ factorization for quasi-definite matrices.
//!
//! The symbolic phase takes the upper-triangle pattern as `(row, col)` pairs,
//! computes an AMD ordering and the elimination tree, and records where each
//! input entry lands in the permuted storage so the numeric phase can be
//! repeated cheaply with new values. The numeric phase is an up-looking
//! factorization with dynamic regularization of pivots whose sign disagrees
//! with the expected inertia.

pub struct Symbolic {
    n: usize,
    perm: Vec<usize>,
    /// Permuted upper-triangle CSC pattern.
    ap: Vec<usize>,
    ai: Vec<usize>,
    /// Input entry `t` lives at `ax[slot[t]]`.
    slot: Vec<usize>,
    etree: Vec<Option<usize>>,
    lp: Vec<usize>,
}

pub struct Factor {
    li: Vec<usize>,
    lx: Vec<f64>,
    dinv: Vec<f64>,
    /// Pivots replaced during the last factorization.
    pub regularized: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Regularization {
    pub eps: f64,
    pub delta: f64,
}

impl Symbolic {
    /// `entries` lists upper-triangle positions `(row ≤ col)`; every diagonal
    /// position must appear. Duplicates are not allowed.
    pub fn new(n: usize, entries: &[(usize, usize)]) -> Self {
        // Column-oriented copy of the original pattern for the ordering.
        let mut cnt = vec![0usize; n + 1];
        for &(r, c) in entries {
            debug_assert!(r <= c);
            cnt[c + 1] += 1;
        }
        for c in 0..n {
            cnt[c + 1] += cnt[c];
        }
        let mut next = cnt.clone();
        let mut rows = vec![0usize; entries.len()];
        for &(r, c) in entries {
            rows[next[c]] = r;
            next[c] += 1;
        }
        for c in 0..n {
            rows[cnt[c]..cnt[c + 1]].sort_unstable();
        }
        let perm = if n == 0 {
            Vec::new()
        } else {
            match amd::order::<usize>(n, &cnt, &rows, &amd::Control::default()) {
                Ok((p, _, _)) => p,
                Err(_) => (0..n).collect(),
            }
        };
        let mut pinv = vec![0usize; n];
        for (k, &i) in perm.iter().enumerate() {
            pinv[i] = k;
        }

        // Permuted upper triangle with slot bookkeeping.
        let mut tagged: Vec<(usize, usize, usize)> = entries
            .iter()
            .enumerate()
            .map(|(t, &(r, c))| {
                let (pr, pc) = (pinv[r], pinv[c]);
                (pr.min(pc), pr.max(pc), t)
            })
            .collect();
        tagged.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut ap = vec![0usize; n + 1];
        let mut ai = Vec::with_capacity(tagged.len());
        let mut slot = vec![0usize; entries.len()];
        for (p, &(r, c, t)) in tagged.iter().enumerate() {
            ap[c + 1] += 1;
            ai.push(r);
            slot[t] = p;
        }
        for c in 0..n {
            ap[c + 1] += ap[c];
        }

        // Elimination tree and column counts of L.
        let mut etree = vec![None; n];
        let mut lnz = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        for j in 0..n {
            mark[j] = j;
            for p in ap[j]..ap[j + 1] {
                let mut i = ai[p];
                while mark[i] != j {
                    if etree[i].is_none() {
                        etree[i] = Some(j);
                    }
                    lnz[i] += 1;
                    mark[i] = j;
                    i = etree[i].unwrap();
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        Self { n, perm, ap, ai, slot, etree, lp }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }

    pub fn storage_len(&self) -> usize {
        self.ai.len()
    }

    pub fn slot(&self, t: usize) -> usize {
        self.slot[t]
    }

    /// Numeric factorization of the values `ax` (in slot order). `sign[i]` is
    /// the expected pivot sign of original index `i`.
    pub fn factor(&self, ax: &[f64], sign: &[f64], reg: Regularization) -> Factor {
        let n = self.n;
        let nnz = self.nnz_l();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut dinv = vec![0.0; n];
        let mut used = vec![false; n];
        let mut yvals = vec![0.0; n];
        let mut yidx = Vec::with_capacity(n);
        let mut elim = Vec::with_capacity(n);
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();
        let mut regularized = 0;

        for k in 0..n {
            yidx.clear();
            d[k] = 0.0;
            for p in self.ap[k]..self.ap[k + 1] {
                let b = self.ai[p];
                if b == k {
                    d[k] = ax[p];
                    continue;
                }
                yvals[b] = ax[p];
                if !used[b] {
                    used[b] = true;
                    elim.clear();
                    elim.push(b);
                    let mut nx = self.etree[b];
                    while let Some(e) = nx {
                        if e >= k || used[e] {
                            break;
                        }
                        used[e] = true;
                        elim.push(e);
                        nx = self.etree[e];
                    }
                    while let Some(e) = elim.pop() {
                        yidx.push(e);
                    }
                }
            }
            for &c in yidx.iter().rev() {
                let end = next_space[c];
                let yc = yvals[c];
                for j in self.lp[c]..end {
                    yvals[li[j]] -= lx[j] * yc;
                }
                li[end] = k;
                lx[end] = yc * dinv[c];
                d[k] -= yc * lx[end];
                next_space[c] += 1;
                yvals[c] = 0.0;
                used[c] = false;
            }
            let s = sign[self.perm[k]];
            if s * d[k] <= reg.eps {
                d[k] = s * reg.delta;
                regularized += 1;
            }
            dinv[k] = 1.0 / d[k];
        }
        Factor { li, lx, dinv, regularized }
    }

    /// Solves in place with the factor of the permuted matrix.
    pub fn solve(&self, f: &Factor, b: &mut [f64], work: &mut Vec<f64>) {
        let n = self.n;
        work.clear();
        work.extend(self.perm.iter().map(|&i| b[i]));
        for i in 0..n {
            let xi = work[i];
            for j in self.lp[i]..self.lp[i + 1] {
                work[f.li[j]] -= f.lx[j] * xi;
            }
        }
        for i in 0..n {
            work[i] *= f.dinv[i];
        }
        for i in (0..n).rev() {
            let mut acc = work[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= f.lx[j] * work[f.li[j]];
            }
            work[i] = acc;
        }
        for (k, &i) in self.perm.iter().enumerate() {
            b[i] = work[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_quasidefinite_system() {
        // [[2, 0, 1], [0, 3, 1], [1, 1, -1]]
        let entries = [(0, 0), (1, 1), (2, 2), (0, 2), (1, 2)];
        let vals = [2.0, 3.0, -1.0, 1.0, 1.0];
        let sym = Symbolic::new(3, &entries);
        let mut ax = vec![0.0; sym.storage_len()];
        for (t, v) in vals.iter().enumerate() {
            ax[sym.slot(t)] = *v;
        }
        let f = sym.factor(&ax, &[1.0, 1.0, -1.0], Regularization { eps: 1e-13, delta: 1e-7 });
        assert_eq!(f.regularized, 0);
        let x_true = [1.0, -2.0, 0.5];
        let mut b = vec![2.0 * 1.0 + 0.5, 3.0 * -2.0 + 0.5, 1.0 - 2.0 - 0.5];
        let mut w = Vec::new();
        sym.solve(&f, &mut b, &mut w);
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-14);
        }
    }
}
