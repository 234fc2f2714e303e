//! Numerical estimates of the best constant
//! `c* = sup lhs(u) / rhs(u)` over admissible `u` supported in a box.
//!
//! Both sides are realized matrix-free on the box points other than the
//! origin, where `u` is fixed to 0. The right side has the shape
//! `sum_{pairs a<b} c_ab |u_a - u_b|^p + sum_a D_a |u_a|^p`: the `D_a` collect
//! the pairs whose other end is the origin or lies outside the box.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{HardyParams, Regime};
use crate::error::{HardyError, Result};
use crate::functionals::{
    fractional_energy, local_energy, pow_abs, weighted_lhs, EnergyVariant, FractionalEvaluator,
    LatticeFunction,
};
use crate::lattice::{norm_inf, Domain};
use crate::sum::{pairwise_sum_by, pairwise_sum_seq_by};
use crate::verify::{mix_seed, random_test_function, GeneratorProfile};

/// How far an estimate can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certification {
    /// A converged local maximum of the ratio.
    Estimate,
    /// Nonsmooth, nonconvex objective (`p < 1`): only a lower bound on `c*`.
    LowerBoundOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub params: HardyParams,
    #[serde(rename = "N")]
    pub n: u64,
    pub margin: u64,
    pub estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certification: Certification,
    pub witness: LatticeFunction,
    /// `(iteration, best ratio so far)`.
    pub history: Vec<(usize, f64)>,
}

impl OptimizeResult {
    /// Writes the witness as `point,value` rows.
    pub fn write_witness_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "point,value")?;
        let dom = self.witness.domain();
        for (i, v) in self.witness.values().iter().enumerate() {
            writeln!(out, "\"{}\",{}", dom.point_at(i), v)?;
        }
        Ok(())
    }
}

/// Settings shared by both optimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeOptions {
    /// Box radius `N`.
    pub n: u64,
    /// Fractional truncation margin; defaults to `N`.
    pub margin: Option<u64>,
    /// Relative change of the ratio at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Runs of the general method; defaults to 8 for `p < 1` and 4 otherwise.
    pub restarts: Option<usize>,
    pub seed: u64,
    /// Starting point, restricted to the box of radius `N`.
    pub warm_start: Option<LatticeFunction>,
}

impl OptimizeOptions {
    pub fn new(n: u64) -> Self {
        OptimizeOptions {
            n,
            margin: None,
            tol: 1e-10,
            max_iter: 500,
            restarts: None,
            seed: 0,
            warm_start: None,
        }
    }
}

/// Relative residual at which inner conjugate-gradient solves stop.
const CG_TOL: f64 = 1e-13;

enum Pairs {
    /// Compressed rows: neighbours and coefficients of each variable.
    Sparse {
        start: Vec<usize>,
        nbr: Vec<u32>,
        coef: Vec<f64>,
    },
    /// Every pair of variables, coefficient `2 kernel(|a - b|_inf)`.
    Dense { coords: Vec<i64>, kernel: Vec<f64> },
}

/// The two sides of one regime on one box, as functions of the variables.
struct Problem {
    params: HardyParams,
    domain: Domain,
    margin: u64,
    p: f64,
    /// Domain index of each variable.
    vars: Vec<usize>,
    lhs_weight: Vec<f64>,
    pairs: Pairs,
    diag: Vec<f64>,
}

impl Problem {
    fn new(params: &HardyParams, n: u64, margin: u64) -> Result<Self> {
        params.validate()?;
        if params.regime.is_annuli() {
            return Err(HardyError::InvalidArgument(format!(
                "{} has no single energy to optimize against",
                params.regime
            )));
        }
        let domain = Domain::new(params.lattice, params.d, n)?;
        let origin = domain.origin_index();
        let vars: Vec<usize> = (0..domain.len()).filter(|&i| i != origin).collect();
        if vars.is_empty() {
            return Err(HardyError::Degenerate("box has no points besides the origin".into()));
        }
        let mut var_of = vec![u32::MAX; domain.len()];
        for (v, &i) in vars.iter().enumerate() {
            var_of[i] = v as u32;
        }
        let t = params.lhs_exponent()?;
        let norms = domain.sup_norms();
        let lhs_weight = vars.iter().map(|&i| (norms[i] as f64).powf(-t)).collect();
        let variant = params.energy_variant().expect("non-annuli regime has an energy");
        let d = domain.dim;
        let (pairs, diag, margin) = if variant.is_local() {
            let (pairs, diag) = local_pairs(&domain, &var_of, vars.len(), variant)?;
            (pairs, diag, 0)
        } else {
            let s = params.s.expect("fractional regime has s");
            let ev = FractionalEvaluator::new(domain, s, params.p, variant, margin)?;
            let kernel = ev.kernel().to_vec();
            let mut coords = vec![0i64; vars.len() * d];
            let mut x = vec![0i64; d];
            let mut diag = Vec::with_capacity(vars.len());
            for (v, &i) in vars.iter().enumerate() {
                domain.coords_into(i, &mut x);
                coords[v * d..(v + 1) * d].copy_from_slice(&x);
                // ordered pairs (j, m) and (m, j) with the other end outside
                // the box or at the origin
                let mut dv = 2.0 * ev.outside_mass()[i];
                if !ev.excludes_origin() {
                    dv += 2.0 * kernel[norm_inf(&x) as usize];
                }
                diag.push(dv);
            }
            (Pairs::Dense { coords, kernel }, diag, margin)
        };
        Ok(Problem {
            params: *params,
            domain,
            margin,
            p: params.p,
            vars,
            lhs_weight,
            pairs,
            diag,
        })
    }

    fn len(&self) -> usize {
        self.vars.len()
    }

    /// Calls `f(b, c_ab)` for every pair partner `b` of variable `a`.
    #[inline]
    fn for_each_pair(&self, a: usize, mut f: impl FnMut(usize, f64)) {
        match &self.pairs {
            Pairs::Sparse { start, nbr, coef } => {
                for e in start[a]..start[a + 1] {
                    f(nbr[e] as usize, coef[e]);
                }
            }
            Pairs::Dense { coords, kernel } => {
                let d = self.domain.dim;
                let ca = &coords[a * d..(a + 1) * d];
                for b in 0..self.len() {
                    if b == a {
                        continue;
                    }
                    let cb = &coords[b * d..(b + 1) * d];
                    let mut r = 0i64;
                    for q in 0..d {
                        r = r.max((ca[q] - cb[q]).abs());
                    }
                    f(b, 2.0 * kernel[r as usize]);
                }
            }
        }
    }

    fn lhs(&self, x: &[f64], p: f64) -> f64 {
        pairwise_sum_by(self.len(), |a| self.lhs_weight[a] * pow_abs(x[a], p))
    }

    fn rhs(&self, x: &[f64], p: f64) -> f64 {
        pairwise_sum_by(self.len(), |a| {
            let mut acc = 0.0;
            self.for_each_pair(a, |b, c| acc += c * pow_abs(x[a] - x[b], p));
            0.5 * acc + self.diag[a] * pow_abs(x[a], p)
        })
    }

    /// Half the gradient of the quadratic (`p = 2`) right side.
    fn rhs_matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|a| {
                let mut acc = self.diag[a] * x[a];
                self.for_each_pair(a, |b, c| acc += c * (x[a] - x[b]));
                acc
            })
            .collect()
    }

    fn rhs_diagonal(&self) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|a| {
                let mut acc = self.diag[a];
                self.for_each_pair(a, |_, c| acc += c);
                acc
            })
            .collect()
    }

    fn rhs_grad(&self, x: &[f64], p: f64) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|a| {
                let mut acc = p * self.diag[a] * signed_pow(x[a], p - 1.0);
                self.for_each_pair(a, |b, c| acc += p * c * signed_pow(x[a] - x[b], p - 1.0));
                acc
            })
            .collect()
    }

    fn lhs_grad(&self, x: &[f64], p: f64) -> Vec<f64> {
        x.iter()
            .zip(&self.lhs_weight)
            .map(|(&v, &w)| p * w * signed_pow(v, p - 1.0))
            .collect()
    }

    fn ratio(&self, x: &[f64]) -> f64 {
        ratio_of(self.lhs(x, self.p), self.rhs(x, self.p))
    }

    fn witness(&self, x: &[f64]) -> LatticeFunction {
        let mut values = vec![0.0; self.domain.len()];
        for (v, &i) in self.vars.iter().enumerate() {
            values[i] = x[v];
        }
        LatticeFunction::from_values(self.domain, values).expect("iterates are finite")
    }

    fn restrict(&self, u: &LatticeFunction) -> Result<Vec<f64>> {
        if u.domain().dim != self.domain.dim {
            return Err(HardyError::InvalidArgument("warm start has the wrong dimension".into()));
        }
        let mut x = vec![0i64; self.domain.dim];
        Ok(self
            .vars
            .iter()
            .map(|&i| {
                self.domain.coords_into(i, &mut x);
                u.get(&x)
            })
            .collect())
    }

    /// Ratio of the witness recomputed through the functionals module.
    fn independent_ratio(&self, u: &LatticeFunction) -> Result<f64> {
        let p = self.p;
        let lhs = weighted_lhs(u, p, self.params.lhs_exponent()?)?;
        let variant = self.params.energy_variant().expect("non-annuli regime");
        let rhs = if variant.is_local() {
            local_energy(u, p, variant)?
        } else {
            fractional_energy(u, self.params.s.expect("fractional"), p, variant, self.margin)?
                .value
        };
        Ok(ratio_of(lhs, rhs))
    }

    /// Solves `B z = y` for the quadratic right side with Jacobi-preconditioned
    /// conjugate gradients, from the initial guess `z`.
    fn solve(&self, y: &[f64], mut z: Vec<f64>, jacobi: &[f64]) -> Vec<f64> {
        let n = self.len();
        let bz = self.rhs_matvec(&z);
        let mut r: Vec<f64> = y.iter().zip(&bz).map(|(a, b)| a - b).collect();
        let y_norm = dot(y, y).sqrt();
        if y_norm == 0.0 {
            return vec![0.0; n];
        }
        let mut s: Vec<f64> = r.iter().zip(jacobi).map(|(a, m)| a / m).collect();
        let mut dir = s.clone();
        let mut rs = dot(&r, &s);
        for _ in 0..(4 * n + 100) {
            if dot(&r, &r).sqrt() <= CG_TOL * y_norm {
                break;
            }
            let bd = self.rhs_matvec(&dir);
            let step = rs / dot(&dir, &bd);
            if !step.is_finite() {
                break;
            }
            for i in 0..n {
                z[i] += step * dir[i];
                r[i] -= step * bd[i];
            }
            for i in 0..n {
                s[i] = r[i] / jacobi[i];
            }
            let rs_new = dot(&r, &s);
            let beta = rs_new / rs;
            rs = rs_new;
            for i in 0..n {
                dir[i] = s[i] + beta * dir[i];
            }
        }
        z
    }
}

fn local_pairs(
    domain: &Domain,
    var_of: &[u32],
    n_vars: usize,
    variant: EnergyVariant,
) -> Result<(Pairs, Vec<f64>)> {
    let outer = domain.enlarged(1)?;
    let d = domain.dim;
    let (eps, max_weight) = match variant {
        EnergyVariant::LocalWeighted { eps, max_weight } => (eps, max_weight),
        _ => (0.0, false),
    };
    let weighted = matches!(variant, EnergyVariant::LocalWeighted { .. });
    let exclude_origin = variant.excludes_origin();
    let var_at = |x: &[i64]| domain.index_of(x).map(|i| var_of[i]).filter(|&v| v != u32::MAX);
    let mut diag = vec![0.0; n_vars];
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    let mut j = vec![0i64; d];
    // the same ordered pairs, with the same weights, as `local_energy`
    for i in 0..outer.len() {
        outer.coords_into(i, &mut j);
        let j_origin = j.iter().all(|&c| c == 0);
        if j_origin && (exclude_origin || (weighted && !max_weight)) {
            continue;
        }
        let nj = norm_inf(&j);
        let vj = var_at(&j);
        let mut k = j.clone();
        for q in 0..d {
            for step in [-1i64, 1] {
                k[q] = j[q] + step;
                if outer.in_lattice(&k) && !(exclude_origin && k.iter().all(|&c| c == 0)) {
                    let w = if weighted {
                        let r = if max_weight { nj.max(norm_inf(&k)) } else { nj };
                        (r as f64).powf(-eps)
                    } else {
                        1.0
                    };
                    match (vj, var_at(&k)) {
                        (Some(a), Some(b)) => edges.push((a.min(b), a.max(b), w)),
                        (Some(a), None) | (None, Some(a)) => diag[a as usize] += w,
                        (None, None) => {}
                    }
                }
            }
            k[q] = j[q];
        }
    }
    edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(edges.len() / 2);
    for (a, b, w) in edges {
        match merged.last_mut() {
            Some(last) if last.0 == a && last.1 == b => last.2 += w,
            _ => merged.push((a, b, w)),
        }
    }
    let mut degree = vec![0usize; n_vars + 1];
    for &(a, b, _) in &merged {
        degree[a as usize + 1] += 1;
        degree[b as usize + 1] += 1;
    }
    for v in 0..n_vars {
        degree[v + 1] += degree[v];
    }
    let start = degree;
    let mut fill = start.clone();
    let mut nbr = vec![0u32; start[n_vars]];
    let mut coef = vec![0.0; start[n_vars]];
    for &(a, b, w) in &merged {
        for (x, y) in [(a, b), (b, a)] {
            let e = fill[x as usize];
            nbr[e] = y;
            coef[e] = w;
            fill[x as usize] += 1;
        }
    }
    Ok((Pairs::Sparse { start, nbr, coef }, diag))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    pairwise_sum_seq_by(a.len(), |i| a[i] * b[i])
}

fn signed_pow(z: f64, e: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z.signum() * pow_abs(z, e)
    }
}

fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(m > 0.0 && m.is_finite()) {
        return false;
    }
    for v in x.iter_mut() {
        *v /= m;
    }
    true
}

fn finish(
    prob: &Problem,
    x: &[f64],
    iterations: usize,
    converged: bool,
    history: Vec<(usize, f64)>,
    n: u64,
) -> Result<OptimizeResult> {
    let witness = prob.witness(x);
    let estimate = prob.independent_ratio(&witness)?;
    Ok(OptimizeResult {
        params: prob.params,
        n,
        margin: prob.margin,
        estimate,
        iterations,
        converged,
        certification: if prob.p < 1.0 {
            Certification::LowerBoundOnly
        } else {
            Certification::Estimate
        },
        witness,
        history,
    })
}

fn initial_point(prob: &Problem, opts: &OptimizeOptions) -> Result<Vec<f64>> {
    let mut x = match &opts.warm_start {
        Some(u) => prob.restrict(u)?,
        None => vec![1.0; prob.len()],
    };
    if !normalize(&mut x) {
        return Err(HardyError::Degenerate("starting point vanishes on the box".into()));
    }
    Ok(x)
}

/// Power iteration `x <- B^-1 A x` for the pencil of the two quadratic forms
/// (`p = 2`). The recorded history is the best ratio so far, so it never
/// decreases, and the witness is the best iterate.
pub fn best_constant_p2(params: &HardyParams, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    if params.p != 2.0 {
        return Err(HardyError::invalid(params.regime, "power iteration needs p = 2"));
    }
    let prob = Problem::new(params, opts.n, opts.margin.unwrap_or(opts.n))?;
    let jacobi = prob.rhs_diagonal();
    if jacobi.iter().any(|&m| !(m > 0.0)) {
        return Err(HardyError::Degenerate(
            "right side vanishes on some admissible direction".into(),
        ));
    }
    let mut x = initial_point(&prob, opts)?;
    let mut rho = prob.ratio(&x);
    let mut best = (rho, x.clone());
    let mut history = vec![(0, rho)];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let y: Vec<f64> = x.iter().zip(&prob.lhs_weight).map(|(v, w)| v * w).collect();
        let guess: Vec<f64> = x.iter().map(|v| v / rho.max(f64::MIN_POSITIVE)).collect();
        let mut z = prob.solve(&y, guess, &jacobi);
        if !normalize(&mut z) {
            return Err(HardyError::Numeric {
                context: format!("power iteration step {it}"),
            });
        }
        x = z;
        let next = prob.ratio(&x);
        if next > best.0 {
            best = (next, x.clone());
        }
        history.push((it, best.0));
        let done = (next - rho).abs() <= opts.tol * next.abs();
        rho = next;
        if done {
            converged = true;
            break;
        }
    }
    finish(&prob, &best.1, iterations, converged, history, opts.n)
}

/// Gradient of `ln lhs - ln rhs`; central differences with step
/// `1e-6 |x|_inf` when `p <= 1`.
fn log_ratio_grad(prob: &Problem, x: &[f64]) -> Vec<f64> {
    let p = prob.p;
    if p > 1.0 {
        let (a, b) = (prob.lhs(x, p), prob.rhs(x, p));
        let (ga, gb) = (prob.lhs_grad(x, p), prob.rhs_grad(x, p));
        return ga.iter().zip(&gb).map(|(ga, gb)| ga / a - gb / b).collect();
    }
    let h = 1e-6 * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut y = x.to_vec();
            y[i] = x[i] + h;
            let up = log_ratio(prob, &y);
            y[i] = x[i] - h;
            let down = log_ratio(prob, &y);
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn log_ratio(prob: &Problem, x: &[f64]) -> f64 {
    let (a, b) = (prob.lhs(x, prob.p), prob.rhs(x, prob.p));
    if a > 0.0 && b > 0.0 {
        a.ln() - b.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn ascend(
    prob: &Problem,
    mut x: Vec<f64>,
    jacobi: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, bool, Vec<(usize, f64)>) {
    let mut f = log_ratio(prob, &x);
    let mut history = vec![(0, f.exp())];
    let mut alpha = 1.0;
    for it in 1..=max_iter {
        let g = log_ratio_grad(prob, &x);
        // precondition with the quadratic form; at p = 2 the step along this
        // direction reproduces power iteration
        let mut dir = prob.solve(&g, g.iter().zip(jacobi).map(|(a, m)| a / m).collect(), jacobi);
        let mut slope = dot(&g, &dir);
        if !(slope > 0.0) {
            dir = g.clone();
            slope = dot(&g, &g);
        }
        let scale = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(slope > 0.0) || scale == 0.0 {
            return (x, it, true, history);
        }
        for v in dir.iter_mut() {
            *v /= scale;
        }
        slope /= scale;
        let trial = |a: f64| -> (f64, Vec<f64>) {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(u, d)| u + a * d).collect();
            (log_ratio(prob, &y), y)
        };
        let mut accepted: Option<(f64, Vec<f64>)> = None;
        let mut a = alpha;
        for _ in 0..60 {
            let (fy, y) = trial(a);
            if fy > f + 1e-4 * a * slope {
                accepted = Some((fy, y));
                break;
            }
            a *= 0.5;
        }
        let Some((mut fy, mut y)) = accepted else {
            return (x, it, true, history);
        };
        // expand while the step keeps improving
        for _ in 0..20 {
            let (fz, z) = trial(2.0 * a);
            if fz > fy {
                a *= 2.0;
                fy = fz;
                y = z;
            } else {
                break;
            }
        }
        alpha = a;
        normalize(&mut y);
        let gain = fy - f;
        x = y;
        f = fy;
        history.push((it, f.exp()));
        if gain <= tol {
            return (x, it, true, history);
        }
    }
    (x, max_iter, false, history)
}

/// Maximizes the ratio for any `p > 0` by preconditioned ascent on
/// `ln lhs - ln rhs`, from the warm start (or a constant start) and
/// `restarts - 1` random starts. The best run wins, ties going to the
/// earlier run. For `p < 1` the result is only a lower bound.
pub fn best_constant_general(
    params: &HardyParams,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    let prob = Problem::new(params, opts.n, opts.margin.unwrap_or(opts.n))?;
    let jacobi = prob.rhs_diagonal();
    if jacobi.iter().any(|&m| !(m > 0.0)) {
        return Err(HardyError::Degenerate(
            "right side vanishes on some admissible direction".into(),
        ));
    }
    let first = initial_point(&prob, opts)?;
    let runs = opts
        .restarts
        .unwrap_or(if params.p < 1.0 { 8 } else { 4 })
        .max(1);
    let starts: Vec<Vec<f64>> = (0..runs)
        .map(|r| {
            if r == 0 {
                return first.clone();
            }
            let u = random_test_function(
                prob.domain,
                GeneratorProfile::IidUniform,
                mix_seed(opts.seed.wrapping_add(r as u64)),
                true,
            );
            let mut x = prob.restrict(&u).expect("same box");
            if !normalize(&mut x) {
                x = first.clone();
            }
            x
        })
        .collect();
    let outcomes: Vec<_> = starts
        .into_par_iter()
        .map(|x0| ascend(&prob, x0, &jacobi, opts.tol, opts.max_iter))
        .collect();
    let mut best = 0;
    let mut best_ratio = f64::NEG_INFINITY;
    for (r, out) in outcomes.iter().enumerate() {
        let ratio = prob.ratio(&out.0);
        if ratio > best_ratio {
            best_ratio = ratio;
            best = r;
        }
    }
    let (x, iterations, converged, history) = outcomes.into_iter().nth(best).expect("one run");
    finish(&prob, &x, iterations, converged, history, opts.n)
}

/// Brute-force maximization of the ratio over `u` on a tiny box by repeated
/// grid zooming: `points` grid values per variable, window shrunk by `zoom`
/// around the best point each round until it is narrower than `width_tol`.
/// Ratios are evaluated through the functionals module.
pub fn grid_search_best_constant(
    params: &HardyParams,
    n: u64,
    points: usize,
    zoom: f64,
    width_tol: f64,
) -> Result<(f64, LatticeFunction)> {
    let prob = Problem::new(params, n, n)?;
    let dim = prob.len();
    if dim > 5 || points < 3 || !(zoom > 1.0) {
        return Err(HardyError::InvalidArgument(
            "grid search is limited to 5 variables, 3+ points and zoom > 1".into(),
        ));
    }
    let mut centre = vec![0.0; dim];
    let mut width = 2.0;
    let mut best = (f64::NEG_INFINITY, centre.clone());
    let total = points.pow(dim as u32);
    while width > width_tol {
        let round: Vec<(f64, Vec<f64>)> = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let x: Vec<f64> = (0..dim)
                    .map(|k| {
                        let g = idx % points;
                        idx /= points;
                        centre[k] - width / 2.0 + width * g as f64 / (points - 1) as f64
                    })
                    .collect();
                let u = prob.witness(&x);
                let r = if x.iter().all(|&v| v == 0.0) {
                    f64::NEG_INFINITY
                } else {
                    prob.independent_ratio(&u).unwrap_or(f64::NEG_INFINITY)
                };
                (r, x)
            })
            .collect();
        for (r, x) in round {
            if r > best.0 {
                best = (r, x);
            }
        }
        centre = best.1.clone();
        width /= zoom;
    }
    Ok((best.0, prob.witness(&best.1)))
}

/// Regimes the optimizer accepts.
pub fn supports(regime: Regime) -> bool {
    !regime.is_annuli()
}
