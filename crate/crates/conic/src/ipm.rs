//! Primal-dual interior-point method on the homogeneous self-dual embedding
//!
//! ```text
//!   Aᵀz + cτ = 0,   Ax + s − bτ = 0,   cᵀx + bᵀz + κ = 0,
//!   (s, z) ∈ K × K*,   τ, κ ≥ 0,
//! ```
//!
//! with Nesterov–Todd scaling and a Mehrotra predictor-corrector. Each
//! iteration factors the quasi-definite reduced KKT matrix
//! `[[δI, Aᵀ], [A, −W² − δI]]` once and refines solves against the
//! unregularized operator. Everything is sequential and deterministic.

use std::time::{Duration, Instant};

use crate::cones::{self, Block, ConeKind, Scaling};
use crate::ldl::{Factor, Regularization, Symbolic};
use crate::sparse::Csc;
use crate::standard::StandardForm;

#[derive(Clone, Debug)]
pub struct Settings {
    /// Relative primal and dual residual tolerance.
    pub tol_feas: f64,
    /// Duality gap tolerance, absolute or relative.
    pub tol_gap: f64,
    /// Tolerance on normalized infeasibility certificates.
    pub tol_infeas: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
    pub equilibrate: bool,
    pub static_reg: f64,
    pub refine_iters: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_gap: 1e-8,
            tol_infeas: 1e-8,
            max_iter: 100,
            time_limit: None,
            equilibrate: true,
            static_reg: 1e-8,
            refine_iters: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    TimeLimit,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct IpmResult {
    pub outcome: Outcome,
    /// Standard-form primal (unscaled, divided by τ).
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Set when the iterate only meets a relaxed tolerance after stalling.
    pub reduced_accuracy: bool,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ruiz equilibration `Â = E A D`, `ĉ = σ D c`, keeping `E` constant on each
/// second-order block.
struct Equilibration {
    d: Vec<f64>,
    e: Vec<f64>,
    sigma: f64,
}

impl Equilibration {
    fn identity(n: usize, m: usize) -> Self {
        Self { d: vec![1.0; n], e: vec![1.0; m], sigma: 1.0 }
    }

    fn compute(a: &Csc, c: &[f64], blocks: &[Block]) -> Self {
        let (n, m) = (a.ncols, a.nrows);
        let mut eq = Self::identity(n, m);
        let (lo, hi) = (1e-4, 1e4);
        let mut scaled = a.clone();
        for _ in 0..25 {
            let mut cn = vec![0.0f64; n];
            let mut rn = vec![0.0f64; m];
            for j in 0..n {
                for p in scaled.colptr[j]..scaled.colptr[j + 1] {
                    let v = scaled.values[p].abs();
                    cn[j] = cn[j].max(v);
                    rn[scaled.rowidx[p]] = rn[scaled.rowidx[p]].max(v);
                }
            }
            let fix = |v: f64| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 };
            let dd: Vec<f64> = cn.iter().map(|&v| fix(v)).collect();
            let mut ee: Vec<f64> = rn.iter().map(|&v| fix(v)).collect();
            for b in blocks.iter().filter(|b| b.kind == ConeKind::Soc) {
                let mean = ee[b.range()].iter().sum::<f64>() / b.dim as f64;
                ee[b.range()].iter_mut().for_each(|v| *v = mean);
            }
            let mut done = true;
            for j in 0..n {
                let nd = (eq.d[j] * dd[j]).clamp(lo, hi);
                if (nd / eq.d[j] - 1.0).abs() > 1e-3 {
                    done = false;
                }
                eq.d[j] = nd;
            }
            for i in 0..m {
                let ne = (eq.e[i] * ee[i]).clamp(lo, hi);
                if (ne / eq.e[i] - 1.0).abs() > 1e-3 {
                    done = false;
                }
                eq.e[i] = ne;
            }
            for j in 0..n {
                for p in a.colptr[j]..a.colptr[j + 1] {
                    scaled.values[p] = a.values[p] * eq.e[a.rowidx[p]] * eq.d[j];
                }
            }
            if done {
                break;
            }
        }
        let cmax = c.iter().zip(&eq.d).fold(0.0f64, |m, (ci, di)| m.max((ci * di).abs()));
        if cmax > 0.0 {
            eq.sigma = (1.0 / cmax).clamp(lo, hi);
        }
        eq
    }
}

/// Reduced KKT system with its factorization state.
struct Kkt {
    n: usize,
    m: usize,
    sym: Symbolic,
    ax: Vec<f64>,
    /// Slots of the x-block diagonal, in column order.
    x_diag: Vec<usize>,
    /// For each cone block, slots of its upper-triangle `−W²` entries
    /// (row-major over `i ≤ j`).
    w_slots: Vec<Vec<usize>>,
    sign: Vec<f64>,
    factor: Option<Factor>,
    work: Vec<f64>,
    delta: f64,
}

impl Kkt {
    fn new(a: &Csc, blocks: &[Block], delta: f64) -> Self {
        let (n, m) = (a.ncols, a.nrows);
        let mut entries: Vec<(usize, usize)> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut x_diag = Vec::with_capacity(n);
        for j in 0..n {
            x_diag.push(entries.len());
            entries.push((j, j));
            values.push(delta);
        }
        for j in 0..n {
            for p in a.colptr[j]..a.colptr[j + 1] {
                entries.push((j, n + a.rowidx[p]));
                values.push(a.values[p]);
            }
        }
        let mut w_slots = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut slots = Vec::new();
            match b.kind {
                ConeKind::Zero | ConeKind::NonNeg => {
                    for i in b.range() {
                        slots.push(entries.len());
                        entries.push((n + i, n + i));
                        values.push(-1.0);
                    }
                }
                ConeKind::Soc => {
                    for i in 0..b.dim {
                        for j in i..b.dim {
                            slots.push(entries.len());
                            entries.push((n + b.start + i, n + b.start + j));
                            values.push(if i == j { -1.0 } else { 0.0 });
                        }
                    }
                }
            }
            w_slots.push(slots);
        }
        let sym = Symbolic::new(n + m, &entries);
        let mut ax = vec![0.0; sym.storage_len()];
        for (t, v) in values.iter().enumerate() {
            ax[sym.slot(t)] = *v;
        }
        // Remember which storage slots to rewrite.
        let x_diag = x_diag.iter().map(|&t| sym.slot(t)).collect();
        let w_slots = w_slots.into_iter().map(|s| s.into_iter().map(|t| sym.slot(t)).collect()).collect();
        let mut sign = vec![1.0; n + m];
        sign[n..].iter_mut().for_each(|s| *s = -1.0);
        Self { n, m, sym, ax, x_diag, w_slots, sign, factor: None, work: Vec::new(), delta }
    }

    /// Writes `−W² − δI` (zero cones: `−δ`) and refactors. With `scaling`
    /// absent the block is `−I`, used for initialization.
    fn refactor(&mut self, blocks: &[Block], scaling: Option<&Scaling>) {
        for &s in &self.x_diag {
            self.ax[s] = self.delta;
        }
        for (k, b) in blocks.iter().enumerate() {
            let slots = &self.w_slots[k];
            match (b.kind, scaling) {
                (ConeKind::Zero, _) => slots.iter().for_each(|&s| self.ax[s] = -self.delta),
                (_, None) => {
                    let mut t = 0;
                    for i in 0..b.dim {
                        let jrange = if b.kind == ConeKind::Soc { i..b.dim } else { i..i + 1 };
                        for j in jrange {
                            self.ax[slots[t]] = if i == j { -1.0 - self.delta } else { 0.0 };
                            t += 1;
                        }
                    }
                }
                (ConeKind::NonNeg, Some(sc)) => {
                    let w2 = sc.w_squared(k);
                    for i in 0..b.dim {
                        self.ax[slots[i]] = -w2[i * b.dim + i] - self.delta;
                    }
                }
                (ConeKind::Soc, Some(sc)) => {
                    let w2 = sc.w_squared(k);
                    let mut t = 0;
                    for i in 0..b.dim {
                        for j in i..b.dim {
                            let d = if i == j { self.delta } else { 0.0 };
                            self.ax[slots[t]] = -w2[i * b.dim + j] - d;
                            t += 1;
                        }
                    }
                }
            }
        }
        let reg = Regularization { eps: 1e-13, delta: 1e-7 };
        self.factor = Some(self.sym.factor(&self.ax, &self.sign, reg));
    }

    fn raw_solve(&mut self, v: &mut [f64]) {
        let f = self.factor.as_ref().expect("factorized");
        self.sym.solve(f, v, &mut self.work);
    }

    /// `out = [Aᵀz; Ax − W²z]` with the exact (unregularized) operator.
    fn apply(a: &Csc, at: &Csc, w2: &dyn Fn(&[f64], &mut [f64]), v: &[f64], out: &mut [f64]) {
        let n = a.ncols;
        let (x, z) = v.split_at(n);
        let (ox, oz) = out.split_at_mut(n);
        ox.iter_mut().for_each(|o| *o = 0.0);
        at.gemv(z, ox);
        w2(z, oz);
        oz.iter_mut().for_each(|o| *o = -*o);
        a.gemv(x, oz);
    }

    /// Solves the reduced system with iterative refinement.
    fn solve(
        &mut self,
        a: &Csc,
        at: &Csc,
        w2: &dyn Fn(&[f64], &mut [f64]),
        rhs: &[f64],
        refine: usize,
    ) -> Vec<f64> {
        let dim = self.n + self.m;
        let mut sol = rhs.to_vec();
        self.raw_solve(&mut sol);
        let bnorm = norm_inf(rhs).max(1.0);
        let mut kx = vec![0.0; dim];
        let mut res = vec![0.0; dim];
        Self::apply(a, at, w2, &sol, &mut kx);
        for i in 0..dim {
            res[i] = rhs[i] - kx[i];
        }
        let mut rnorm = norm_inf(&res);
        for _ in 0..refine {
            if rnorm <= 1e-14 * bnorm {
                break;
            }
            let mut corr = res.clone();
            self.raw_solve(&mut corr);
            let trial: Vec<f64> = sol.iter().zip(&corr).map(|(s, c)| s + c).collect();
            Self::apply(a, at, w2, &trial, &mut kx);
            let tres: Vec<f64> = (0..dim).map(|i| rhs[i] - kx[i]).collect();
            let tnorm = norm_inf(&tres);
            if tnorm >= rnorm * 0.9 {
                if tnorm < rnorm {
                    sol = trial;
                }
                break;
            }
            sol = trial;
            res = tres;
            rnorm = tnorm;
        }
        sol
    }
}

struct Problem {
    a: Csc,
    at: Csc,
    b: Vec<f64>,
    c: Vec<f64>,
    eq: Equilibration,
}

struct Iterate {
    x: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    x: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
    tau: f64,
    kappa: f64,
}

pub fn solve(sf: &StandardForm, settings: &Settings) -> IpmResult {
    let start = Instant::now();
    let (n, m) = (sf.n(), sf.m());
    let blocks = &sf.blocks;
    let eq = if settings.equilibrate {
        Equilibration::compute(&sf.a, &sf.c, blocks)
    } else {
        Equilibration::identity(n, m)
    };
    let mut a = sf.a.clone();
    for j in 0..n {
        for p in a.colptr[j]..a.colptr[j + 1] {
            a.values[p] *= eq.e[a.rowidx[p]] * eq.d[j];
        }
    }
    let at = a.transpose();
    let b: Vec<f64> = sf.b.iter().zip(&eq.e).map(|(v, e)| v * e).collect();
    let c: Vec<f64> = sf.c.iter().zip(&eq.d).map(|(v, d)| v * d * eq.sigma).collect();
    let pr = Problem { a, at, b, c, eq };

    let nu: usize = blocks.iter().map(|b| b.degree()).sum();
    let mut kkt = Kkt::new(&pr.a, blocks, settings.static_reg);
    let mut scaling = Scaling::new(blocks);

    // Initial point from two regularized least-squares solves.
    kkt.refactor(blocks, None);
    let identity_w2 = |v: &[f64], out: &mut [f64]| {
        for bl in blocks.iter() {
            for i in bl.range() {
                out[i] = if bl.kind == ConeKind::Zero { 0.0 } else { v[i] };
            }
        }
    };
    let mut rhs = vec![0.0; n + m];
    rhs[n..].copy_from_slice(&pr.b);
    let sol = kkt.solve(&pr.a, &pr.at, &identity_w2, &rhs, settings.refine_iters);
    let x0 = sol[..n].to_vec();
    let mut s0: Vec<f64> = sol[n..].iter().map(|v| -v).collect();
    rhs[..n].iter_mut().zip(&pr.c).for_each(|(r, c)| *r = -c);
    rhs[n..].iter_mut().for_each(|r| *r = 0.0);
    let sol = kkt.solve(&pr.a, &pr.at, &identity_w2, &rhs, settings.refine_iters);
    let mut z0 = sol[n..].to_vec();
    shift_into_cone(blocks, &mut s0);
    shift_into_cone(blocks, &mut z0);
    let mut it = Iterate { x: x0, s: s0, z: z0, tau: 1.0, kappa: 1.0 };

    let mut lambda = vec![0.0; m];
    let mut result = IpmResult {
        outcome: Outcome::IterationLimit,
        x: vec![0.0; n],
        z: vec![0.0; m],
        iterations: 0,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        reduced_accuracy: false,
    };
    let mut stalls = 0;

    for iter in 0..=settings.max_iter {
        result.iterations = iter;
        // Residuals of the embedding.
        let mut rx = vec![0.0; n];
        pr.at.gemv(&it.z, &mut rx);
        let rx_noc = rx.clone();
        rx.iter_mut().zip(&pr.c).for_each(|(r, c)| *r += c * it.tau);
        let mut rz = it.s.clone();
        pr.a.gemv(&it.x, &mut rz);
        let az_plus_s = rz.clone();
        rz.iter_mut().zip(&pr.b).for_each(|(r, b)| *r -= b * it.tau);
        let cx = dot(&pr.c, &it.x);
        let bz = dot(&pr.b, &it.z);
        let rtau = cx + bz + it.kappa;

        let status = check_termination(&pr, sf, &it, &rx_noc, &az_plus_s, cx, bz, settings, 1.0, &mut result);
        if let Some(outcome) = status {
            result.outcome = outcome;
            return result;
        }
        if iter == settings.max_iter {
            break;
        }
        if let Some(limit) = settings.time_limit {
            if start.elapsed() > limit {
                result.outcome = Outcome::TimeLimit;
                return result;
            }
        }

        scaling.update(&it.s, &it.z, &mut lambda);
        kkt.refactor(blocks, Some(&scaling));
        let w2 = |v: &[f64], out: &mut [f64]| {
            let mut tmp = vec![0.0; v.len()];
            scaling.mul(v, &mut tmp, false);
            scaling.mul(&tmp, out, false);
        };

        // Constant solve K [x1; z1] = [−c; b].
        let mut rhs1 = vec![0.0; n + m];
        rhs1[..n].iter_mut().zip(&pr.c).for_each(|(r, c)| *r = -c);
        rhs1[n..].copy_from_slice(&pr.b);
        let sol1 = kkt.solve(&pr.a, &pr.at, &w2, &rhs1, settings.refine_iters);
        let (x1, z1) = sol1.split_at(n);
        let denom_base = dot(&pr.c, x1) + dot(&pr.b, z1);

        let step = |kkt: &mut Kkt, dx: &[f64], dz: &[f64], dtau: f64, ds: &[f64], dkappa: f64| -> Direction {
            let mut xi = vec![0.0; m];
            cones::div(blocks, &lambda, ds, &mut xi);
            let mut wxi = vec![0.0; m];
            scaling.mul(&xi, &mut wxi, false);
            let mut rhs = vec![0.0; n + m];
            rhs[..n].iter_mut().zip(dx).for_each(|(r, d)| *r = -d);
            for i in 0..m {
                rhs[n + i] = -dz[i] + wxi[i];
            }
            let sol2 = kkt.solve(&pr.a, &pr.at, &w2, &rhs, settings.refine_iters);
            let (x2, z2) = sol2.split_at(n);
            let num = -dtau + dkappa / it.tau - dot(&pr.c, x2) - dot(&pr.b, z2);
            let den = denom_base - it.kappa / it.tau;
            let dt = num / den;
            let ddx: Vec<f64> = (0..n).map(|i| x2[i] + dt * x1[i]).collect();
            let ddz: Vec<f64> = (0..m).map(|i| z2[i] + dt * z1[i]).collect();
            let mut wdz = vec![0.0; m];
            scaling.mul(&ddz, &mut wdz, false);
            let inner: Vec<f64> = (0..m).map(|i| xi[i] + wdz[i]).collect();
            let mut dds = vec![0.0; m];
            scaling.mul(&inner, &mut dds, false);
            dds.iter_mut().for_each(|v| *v = -*v);
            let dk = -(dkappa + it.kappa * dt) / it.tau;
            Direction { x: ddx, s: dds, z: ddz, tau: dt, kappa: dk }
        };

        // Predictor.
        let mut ds_aff = vec![0.0; m];
        cones::prod(blocks, &lambda, &lambda, &mut ds_aff);
        let dk_aff = it.tau * it.kappa;
        let aff = step(&mut kkt, &rx, &rz, rtau, &ds_aff, dk_aff);
        let alpha_aff = max_step(blocks, &it, &aff).min(1.0);

        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (nu as f64 + 1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        // Corrector.
        let mut ws = vec![0.0; m];
        let mut wz = vec![0.0; m];
        scaling.mul(&aff.s, &mut ws, true);
        scaling.mul(&aff.z, &mut wz, false);
        let mut cross = vec![0.0; m];
        cones::prod(blocks, &ws, &wz, &mut cross);
        let mut ds = ds_aff.clone();
        for i in 0..m {
            ds[i] += cross[i];
        }
        for bl in blocks.iter() {
            cones::add_identity(bl, &mut ds, -sigma * mu);
        }
        let dk = dk_aff + aff.tau * aff.kappa - sigma * mu;
        let f = 1.0 - sigma;
        let rx_c: Vec<f64> = rx.iter().map(|v| v * f).collect();
        let rz_c: Vec<f64> = rz.iter().map(|v| v * f).collect();
        let dir = step(&mut kkt, &rx_c, &rz_c, rtau * f, &ds, dk);
        let alpha = (0.99 * max_step(blocks, &it, &dir)).min(1.0);

        if !alpha.is_finite() || dir.x.iter().chain(&dir.z).any(|v| !v.is_finite()) {
            result.outcome = salvage(&pr, sf, &it, settings, &mut result);
            return result;
        }
        if alpha < 1e-8 {
            stalls += 1;
            if stalls >= 3 {
                result.outcome = salvage(&pr, sf, &it, settings, &mut result);
                return result;
            }
        } else {
            stalls = 0;
        }

        for i in 0..n {
            it.x[i] += alpha * dir.x[i];
        }
        for i in 0..m {
            it.s[i] += alpha * dir.s[i];
            it.z[i] += alpha * dir.z[i];
        }
        it.tau += alpha * dir.tau;
        it.kappa += alpha * dir.kappa;
        for bl in blocks.iter().filter(|b| b.kind == ConeKind::Zero) {
            it.s[bl.range()].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    result.outcome = Outcome::IterationLimit;
    result
}

/// Shifts every non-zero cone block of `v` into the interior with a common offset.
fn shift_into_cone(blocks: &[Block], v: &mut [f64]) {
    let mut alpha = f64::NEG_INFINITY;
    for b in blocks.iter().filter(|b| b.kind != ConeKind::Zero) {
        alpha = alpha.max(-cones::min_eig(b, v));
    }
    if !alpha.is_finite() {
        alpha = 0.0;
    }
    let scale = norm_inf(v).max(1.0);
    let shift = if alpha >= -1e-8 * scale { 1.0 + alpha } else { 0.0 };
    for b in blocks {
        if b.kind == ConeKind::Zero {
            v[b.range()].iter_mut().for_each(|x| *x = 0.0);
        } else if shift > 0.0 {
            cones::add_identity(b, v, shift);
        }
    }
}

fn max_step(blocks: &[Block], it: &Iterate, d: &Direction) -> f64 {
    let mut a = cones::step_length(blocks, &it.s, &d.s).min(cones::step_length(blocks, &it.z, &d.z));
    if d.tau < 0.0 {
        a = a.min(-it.tau / d.tau);
    }
    if d.kappa < 0.0 {
        a = a.min(-it.kappa / d.kappa);
    }
    a
}

/// Evaluates optimality and infeasibility in the original scaling.
/// `relax` multiplies the feasibility and gap tolerances.
#[allow(clippy::too_many_arguments)]
fn check_termination(
    pr: &Problem,
    sf: &StandardForm,
    it: &Iterate,
    atz: &[f64],
    ax_plus_s: &[f64],
    cx: f64,
    bz: f64,
    settings: &Settings,
    relax: f64,
    result: &mut IpmResult,
) -> Option<Outcome> {
    let eq = &pr.eq;
    let (n, m) = (sf.n(), sf.m());
    let tau = it.tau;
    // Unscaled rays (not divided by τ) for certificates.
    let atz_u: Vec<f64> = (0..n).map(|j| atz[j] / (eq.d[j] * eq.sigma)).collect();
    let axs_u: Vec<f64> = (0..m).map(|i| ax_plus_s[i] / eq.e[i]).collect();
    let cx_u = cx / eq.sigma;
    let bz_u = bz / eq.sigma;

    let x: Vec<f64> = (0..n).map(|j| it.x[j] * eq.d[j] / tau).collect();
    let z: Vec<f64> = (0..m).map(|i| it.z[i] * eq.e[i] / (eq.sigma * tau)).collect();
    let s: Vec<f64> = (0..m).map(|i| it.s[i] / (eq.e[i] * tau)).collect();

    let pobj = cx_u / tau;
    let dobj = -bz_u / tau;
    let pres_abs = (0..m).map(|i| (axs_u[i] / tau - sf.b[i]).abs()).fold(0.0, f64::max);
    let mut ax = vec![0.0; m];
    sf.a.gemv(&x, &mut ax);
    let pscale = norm_inf(&sf.b).max(norm_inf(&ax)).max(norm_inf(&s)).max(1.0);
    let dres_abs = (0..n).map(|j| (atz_u[j] / tau + sf.c[j]).abs()).fold(0.0, f64::max);
    let dscale = norm_inf(&sf.c).max(norm_inf(&atz_u) / tau).max(1.0);
    let pres = pres_abs / pscale;
    let dres = dres_abs / dscale;
    let gap = (pobj - dobj).abs();
    let rel_gap = gap / pobj.abs().min(dobj.abs()).max(1.0);

    result.x = x;
    result.z = z;
    result.primal_objective = pobj + sf.offset;
    result.dual_objective = dobj + sf.offset;
    result.primal_residual = pres;
    result.dual_residual = dres;

    let tol = settings.tol_feas * relax;
    let tol_gap = settings.tol_gap * relax;
    if pres <= tol && dres <= tol && (gap <= tol_gap || rel_gap <= tol_gap) {
        return Some(Outcome::Optimal);
    }
    let tinf = settings.tol_infeas;
    if bz_u < 0.0 {
        let zn = norm_inf(&(0..m).map(|i| it.z[i] * eq.e[i] / eq.sigma).collect::<Vec<_>>()).max(1e-300);
        if norm_inf(&atz_u) <= tinf * (-bz_u) && -bz_u / zn > tinf {
            return Some(Outcome::PrimalInfeasible);
        }
    }
    if cx_u < 0.0 {
        let xn = norm_inf(&(0..n).map(|j| it.x[j] * eq.d[j]).collect::<Vec<_>>()).max(1e-300);
        if norm_inf(&axs_u) <= tinf * (-cx_u) && -cx_u / xn > tinf {
            return Some(Outcome::DualInfeasible);
        }
    }
    None
}

/// After a stall, accept the iterate if it meets a relaxed tolerance.
fn salvage(pr: &Problem, sf: &StandardForm, it: &Iterate, settings: &Settings, result: &mut IpmResult) -> Outcome {
    let mut atz = vec![0.0; sf.n()];
    pr.at.gemv(&it.z, &mut atz);
    let mut axs = it.s.clone();
    pr.a.gemv(&it.x, &mut axs);
    let cx = dot(&pr.c, &it.x);
    let bz = dot(&pr.b, &it.z);
    match check_termination(pr, sf, it, &atz, &axs, cx, bz, settings, 100.0, result) {
        Some(o) => {
            result.reduced_accuracy = o == Outcome::Optimal;
            o
        }
        None => Outcome::NumericalFailure,
    }
}
