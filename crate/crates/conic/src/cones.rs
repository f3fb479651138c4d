//! Symmetric cone algebra for the interior-point method: Jordan products,
//! Nesterov–Todd scalings and step-length computations over a product of
//! zero, nonnegative and second-order cones.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    /// `s = 0`, dual variable free.
    Zero,
    /// Nonnegative orthant.
    NonNeg,
    /// `s₀ ≥ ‖s₁‖`.
    Soc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: ConeKind,
    pub start: usize,
    pub dim: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.dim
    }

    /// Barrier degree.
    pub fn degree(&self) -> usize {
        match self.kind {
            ConeKind::Zero => 0,
            ConeKind::NonNeg => self.dim,
            ConeKind::Soc => 1,
        }
    }
}

/// Per-block NT scaling state.
#[derive(Clone, Debug)]
enum Scale {
    Zero,
    /// `W = diag(w)`.
    NonNeg(Vec<f64>),
    /// `W = η·[[w₀, w₁ᵀ], [w₁, I + w₁w₁ᵀ/(1+w₀)]]`.
    Soc { eta: f64, w: Vec<f64> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x₀² − ‖x₁‖²`
pub fn soc_det(x: &[f64]) -> f64 {
    let t: f64 = x[1..].iter().map(|v| v * v).sum();
    (x[0] - t.sqrt()) * (x[0] + t.sqrt())
}

/// Smallest eigenvalue of `x` in the block's Jordan algebra.
pub fn min_eig(block: &Block, x: &[f64]) -> f64 {
    let x = &x[block.range()];
    match block.kind {
        ConeKind::Zero => f64::INFINITY,
        ConeKind::NonNeg => x.iter().copied().fold(f64::INFINITY, f64::min),
        ConeKind::Soc => x[0] - x[1..].iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Adds `t·e` to `x` within the block (`e` is the Jordan identity).
pub fn add_identity(block: &Block, x: &mut [f64], t: f64) {
    match block.kind {
        ConeKind::Zero => {}
        ConeKind::NonNeg => x[block.range()].iter_mut().for_each(|v| *v += t),
        ConeKind::Soc => x[block.start] += t,
    }
}

/// Jordan product `u∘v` restricted to one block.
fn jordan_prod(kind: ConeKind, u: &[f64], v: &[f64], out: &mut [f64]) {
    match kind {
        ConeKind::Zero => out.iter_mut().for_each(|o| *o = 0.0),
        ConeKind::NonNeg => {
            for i in 0..u.len() {
                out[i] = u[i] * v[i];
            }
        }
        ConeKind::Soc => {
            out[0] = dot(u, v);
            for i in 1..u.len() {
                out[i] = u[0] * v[i] + v[0] * u[i];
            }
        }
    }
}

/// Solves `λ∘v = d` for `v` within one block.
fn jordan_div(kind: ConeKind, lambda: &[f64], d: &[f64], out: &mut [f64]) {
    match kind {
        ConeKind::Zero => out.iter_mut().for_each(|o| *o = 0.0),
        ConeKind::NonNeg => {
            for i in 0..d.len() {
                out[i] = d[i] / lambda[i];
            }
        }
        ConeKind::Soc => {
            let l0 = lambda[0];
            let l1d1 = dot(&lambda[1..], &d[1..]);
            let v0 = (l0 * d[0] - l1d1) / soc_det(lambda);
            out[0] = v0;
            for i in 1..d.len() {
                out[i] = (d[i] - v0 * lambda[i]) / l0;
            }
        }
    }
}

/// Largest `α` keeping `x + α·d` in the block cone (∞ if unbounded).
fn max_step(kind: ConeKind, x: &[f64], d: &[f64]) -> f64 {
    match kind {
        ConeKind::Zero => f64::INFINITY,
        ConeKind::NonNeg => {
            let mut a = f64::INFINITY;
            for i in 0..x.len() {
                if d[i] < 0.0 {
                    a = a.min(-x[i] / d[i]);
                }
            }
            a
        }
        ConeKind::Soc => {
            // det(x + αd) = qa·α² + 2qb·α + qc
            let qa = soc_det(d);
            let qb = x[0] * d[0] - dot(&x[1..], &d[1..]);
            let qc = soc_det(x);
            let mut a = f64::INFINITY;
            if d[0] < 0.0 {
                a = -x[0] / d[0];
            }
            let root = if qa.abs() <= f64::EPSILON * (qb.abs() + qc.abs()) {
                if qb < 0.0 { -qc / (2.0 * qb) } else { f64::INFINITY }
            } else {
                let disc = qb * qb - qa * qc;
                if disc < 0.0 {
                    f64::INFINITY
                } else {
                    let q = -(qb + qb.signum() * disc.sqrt());
                    let (r1, r2) = (q / qa, if q != 0.0 { qc / q } else { f64::INFINITY });
                    [r1, r2].into_iter().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min)
                }
            };
            a.min(root)
        }
    }
}

/// NT scaling for the whole cone product.
#[derive(Clone, Debug)]
pub struct Scaling {
    blocks: Vec<Block>,
    scales: Vec<Scale>,
}

impl Scaling {
    pub fn new(blocks: &[Block]) -> Self {
        let scales = blocks
            .iter()
            .map(|b| match b.kind {
                ConeKind::Zero => Scale::Zero,
                ConeKind::NonNeg => Scale::NonNeg(vec![1.0; b.dim]),
                ConeKind::Soc => {
                    let mut w = vec![0.0; b.dim];
                    w[0] = 1.0;
                    Scale::Soc { eta: 1.0, w }
                }
            })
            .collect();
        Self { blocks: blocks.to_vec(), scales }
    }

    /// Recomputes `W` from interior `s`, `z` and writes `λ = W z`.
    pub fn update(&mut self, s: &[f64], z: &[f64], lambda: &mut [f64]) {
        for (b, sc) in self.blocks.iter().zip(self.scales.iter_mut()) {
            let r = b.range();
            let (sb, zb) = (&s[r.clone()], &z[r.clone()]);
            match sc {
                Scale::Zero => lambda[r].iter_mut().for_each(|l| *l = 0.0),
                Scale::NonNeg(w) => {
                    for i in 0..b.dim {
                        w[i] = (sb[i] / zb[i]).sqrt();
                        lambda[b.start + i] = (sb[i] * zb[i]).sqrt();
                    }
                }
                Scale::Soc { eta, w } => {
                    let sd = soc_det(sb).max(f64::MIN_POSITIVE).sqrt();
                    let zd = soc_det(zb).max(f64::MIN_POSITIVE).sqrt();
                    let sbar: Vec<f64> = sb.iter().map(|v| v / sd).collect();
                    let zbar: Vec<f64> = zb.iter().map(|v| v / zd).collect();
                    let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
                    w[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
                    for i in 1..b.dim {
                        w[i] = (sbar[i] - zbar[i]) / (2.0 * gamma);
                    }
                    // Renormalise so that det(w) = 1 exactly.
                    let w1: f64 = w[1..].iter().map(|v| v * v).sum();
                    w[0] = (1.0 + w1).sqrt();
                    *eta = (sd / zd).sqrt();
                }
            }
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if let Scale::Soc { .. } = self.scales[k] {
                let r = b.range();
                let mut out = vec![0.0; b.dim];
                self.block_mul(k, &z[r.clone()], &mut out, false);
                lambda[r].copy_from_slice(&out);
            }
        }
    }

    fn block_mul(&self, k: usize, v: &[f64], out: &mut [f64], inverse: bool) {
        match &self.scales[k] {
            Scale::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            Scale::NonNeg(w) => {
                for i in 0..v.len() {
                    out[i] = if inverse { v[i] / w[i] } else { v[i] * w[i] };
                }
            }
            Scale::Soc { eta, w } => {
                let sgn = if inverse { -1.0 } else { 1.0 };
                let f = if inverse { 1.0 / eta } else { *eta };
                let w1v1 = dot(&w[1..], &v[1..]);
                out[0] = f * (w[0] * v[0] + sgn * w1v1);
                let coef = sgn * v[0] + w1v1 / (1.0 + w[0]);
                for i in 1..v.len() {
                    out[i] = f * (v[i] + coef * w[i]);
                }
            }
        }
    }

    /// `out = W v` (or `W⁻¹ v`) over the full cone product.
    pub fn mul(&self, v: &[f64], out: &mut [f64], inverse: bool) {
        for (k, b) in self.blocks.iter().enumerate() {
            let r = b.range();
            self.block_mul(k, &v[r.clone()], &mut out[r], inverse);
        }
    }

    /// Dense `W²` of block `k`, row-major.
    pub fn w_squared(&self, k: usize) -> Vec<f64> {
        let d = self.blocks[k].dim;
        let mut out = vec![0.0; d * d];
        match &self.scales[k] {
            Scale::Zero => {}
            Scale::NonNeg(w) => {
                for i in 0..d {
                    out[i * d + i] = w[i] * w[i];
                }
            }
            Scale::Soc { eta, w } => {
                let e2 = eta * eta;
                let w1sq: f64 = w[1..].iter().map(|v| v * v).sum();
                out[0] = e2 * (w[0] * w[0] + w1sq);
                for i in 1..d {
                    out[i] = e2 * 2.0 * w[0] * w[i];
                    out[i * d] = out[i];
                    for j in 1..d {
                        out[i * d + j] = e2 * (2.0 * w[i] * w[j] + if i == j { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        out
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
}

/// Jordan product over the whole cone product.
pub fn prod(blocks: &[Block], u: &[f64], v: &[f64], out: &mut [f64]) {
    for b in blocks {
        let r = b.range();
        jordan_prod(b.kind, &u[r.clone()], &v[r.clone()], &mut out[r]);
    }
}

/// Solves `λ∘v = d` blockwise.
pub fn div(blocks: &[Block], lambda: &[f64], d: &[f64], out: &mut [f64]) {
    for b in blocks {
        let r = b.range();
        jordan_div(b.kind, &lambda[r.clone()], &d[r.clone()], &mut out[r]);
    }
}

/// Largest step keeping `x + α·d` inside the cone product.
pub fn step_length(blocks: &[Block], x: &[f64], d: &[f64]) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let r = b.range();
            max_step(b.kind, &x[r.clone()], &d[r])
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc_block(dim: usize) -> Block {
        Block { kind: ConeKind::Soc, start: 0, dim }
    }

    #[test]
    fn nt_scaling_maps_z_onto_inverse_scaled_s() {
        let b = [soc_block(4)];
        let s = [3.0, 1.0, -0.5, 2.0];
        let z = [2.0, -0.3, 0.4, 0.1];
        let mut sc = Scaling::new(&b);
        let mut lambda = [0.0; 4];
        sc.update(&s, &z, &mut lambda);
        let mut wz = [0.0; 4];
        let mut wis = [0.0; 4];
        sc.mul(&z, &mut wz, false);
        sc.mul(&s, &mut wis, true);
        for i in 0..4 {
            assert!((wz[i] - wis[i]).abs() < 1e-12, "{wz:?} vs {wis:?}");
            assert!((wz[i] - lambda[i]).abs() < 1e-12);
        }
        // W·W⁻¹ = I and the dense square agrees with two products.
        let v = [0.7, -1.1, 0.2, 0.9];
        let (mut a, mut c) = ([0.0; 4], [0.0; 4]);
        sc.mul(&v, &mut a, false);
        sc.mul(&a, &mut c, true);
        for i in 0..4 {
            assert!((c[i] - v[i]).abs() < 1e-12);
        }
        sc.mul(&a, &mut c, false);
        let w2 = sc.w_squared(0);
        for i in 0..4 {
            let r: f64 = (0..4).map(|j| w2[i * 4 + j] * v[j]).sum();
            assert!((r - c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_division_inverts_product() {
        let b = [soc_block(3)];
        let lambda = [2.0, 0.5, -1.0];
        let v = [0.3, 1.2, -0.7];
        let mut d = [0.0; 3];
        prod(&b, &lambda, &v, &mut d);
        let mut back = [0.0; 3];
        div(&b, &lambda, &d, &mut back);
        for i in 0..3 {
            assert!((back[i] - v[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn soc_step_hits_boundary() {
        let b = [soc_block(3)];
        let x = [2.0, 0.0, 0.0];
        let d = [0.0, 1.0, 0.0];
        let a = step_length(&b, &x, &d);
        assert!((a - 2.0).abs() < 1e-14);
        let d2 = [1.0, 0.5, 0.0];
        assert!(step_length(&b, &x, &d2).is_infinite());
        let d3 = [-1.0, 0.0, 0.0];
        assert!((step_length(&b, &x, &d3) - 2.0).abs() < 1e-14);
    }
}
