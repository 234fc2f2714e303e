//! Exact evaluation of the weighted sums and energies for compactly supported
//! functions. Since `u` vanishes outside its support box, every sum below is
//! finite; the only error is floating-point rounding.

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::lattice::{annulus_level, norm_inf, Annulus, Domain, LatticeKind, LatticePoint};
use crate::sum::{pairwise_sum_by, pairwise_sum_seq_by};

/// `|z|^p`, with `0 ↦ 0` for every `p > 0`.
#[inline]
pub fn pow_abs(z: f64, p: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        z * z
    } else if p == 1.0 {
        z.abs()
    } else {
        (p * z.abs().ln()).exp()
    }
}

/// A real function on a lattice, supported in the domain's box and stored
/// densely in the box's lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl LatticeFunction {
    pub fn zeros(domain: Domain) -> Self {
        LatticeFunction {
            values: vec![0.0; domain.len()],
            domain,
        }
    }

    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(HardyError::InvalidArgument(format!(
                "expected {} values, got {}",
                domain.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HardyError::Numeric {
                context: format!("value at {}", domain.point_at(i)),
            });
        }
        Ok(LatticeFunction { domain, values })
    }

    pub fn from_fn(domain: Domain, f: impl Fn(&[i64]) -> f64) -> Result<Self> {
        let mut c = vec![0; domain.dim];
        let values = (0..domain.len())
            .map(|i| {
                domain.coords_into(i, &mut c);
                f(&c)
            })
            .collect();
        Self::from_values(domain, values)
    }

    /// Indicator of a set of points, all of which must lie in the box.
    pub fn indicator(domain: Domain, points: &[LatticePoint]) -> Result<Self> {
        let mut u = Self::zeros(domain);
        for p in points {
            let i = domain.index_of(p.coords()).ok_or_else(|| {
                HardyError::InvalidArgument(format!("{p} lies outside the support box"))
            })?;
            u.values[i] = 1.0;
        }
        Ok(u)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at any lattice point; zero outside the box.
    pub fn get(&self, coords: &[i64]) -> f64 {
        match self.domain.index_of(coords) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    pub fn set(&mut self, coords: &[i64], value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(HardyError::Numeric {
                context: format!("assigning {value}"),
            });
        }
        let i = self.domain.index_of(coords).ok_or_else(|| {
            HardyError::InvalidArgument("point lies outside the support box".into())
        })?;
        self.values[i] = value;
        Ok(())
    }

    pub fn origin_value(&self) -> f64 {
        self.values[self.domain.origin_index()]
    }

    pub fn set_origin_zero(&mut self) {
        let o = self.domain.origin_index();
        self.values[o] = 0.0;
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        LatticeFunction {
            domain: self.domain,
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }

    /// `x ↦ u(x_{perm[0]}, .., x_{perm[d-1]})`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let d = self.domain.dim;
        assert_eq!(perm.len(), d);
        let mut src = vec![0; d];
        let mut c = vec![0; d];
        let values = (0..self.domain.len())
            .map(|i| {
                self.domain.coords_into(i, &mut c);
                for q in 0..d {
                    src[q] = c[perm[q]];
                }
                self.get(&src)
            })
            .collect();
        LatticeFunction {
            domain: self.domain,
            values,
        }
    }

    /// The same function re-stored on a larger box of the same lattice.
    pub fn embedded(&self, target: Domain) -> Result<Self> {
        if target.kind != self.domain.kind
            || target.dim != self.domain.dim
            || target.radius < self.domain.radius
        {
            return Err(HardyError::InvalidArgument(
                "target box must contain the source box".into(),
            ));
        }
        Self::from_fn(target, |c| self.get(c))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Index ranges and weights of the right-hand-side energies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EnergyVariant {
    /// Both `j` and `k` range over the lattice without the origin.
    LocalExcludeOrigin,
    /// Both `j` and `k` range over the whole lattice.
    LocalIncludeOrigin,
    /// `j != 0`, `k` anywhere, each term divided by `|j|_inf^eps`. With
    /// `max_weight` the divisor is `max(|j|_inf, |k|_inf)^eps` and `j = 0` is
    /// allowed.
    LocalWeighted {
        eps: f64,
        #[serde(default)]
        max_weight: bool,
    },
    /// Both `j` and `m` range over the lattice without the origin.
    FracExcludeOrigin,
    FracFull,
    /// Full ranges with the kernel exponent raised by `eps`.
    FracWeighted { eps: f64 },
}

impl EnergyVariant {
    pub fn is_local(&self) -> bool {
        matches!(
            self,
            EnergyVariant::LocalExcludeOrigin
                | EnergyVariant::LocalIncludeOrigin
                | EnergyVariant::LocalWeighted { .. }
        )
    }

    pub fn is_fractional(&self) -> bool {
        !self.is_local()
    }

    pub fn excludes_origin(&self) -> bool {
        matches!(
            self,
            EnergyVariant::LocalExcludeOrigin | EnergyVariant::FracExcludeOrigin
        )
    }

    fn check_eps(&self) -> Result<()> {
        let eps = match *self {
            EnergyVariant::LocalWeighted { eps, .. } | EnergyVariant::FracWeighted { eps } => eps,
            _ => return Ok(()),
        };
        if eps.is_finite() && eps >= 0.0 {
            Ok(())
        } else {
            Err(HardyError::InvalidArgument(format!(
                "weight exponent must be finite and nonnegative, got {eps}"
            )))
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(HardyError::InvalidArgument(format!("p must be positive, got {p}")))
    }
}

fn finite_or_locate(
    total: f64,
    len: usize,
    term: impl Fn(usize) -> f64,
    dom: &Domain,
) -> Result<f64> {
    if total.is_finite() {
        return Ok(total);
    }
    let bad = (0..len).find(|&i| !term(i).is_finite()).unwrap_or(0);
    Err(HardyError::Numeric {
        context: format!("term at {}", dom.point_at(bad)),
    })
}

/// Powers `r^-t` for `r = 0..=max` (entry 0 unused).
fn inverse_powers(max: u64, t: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(max as usize + 1);
    w.push(0.0);
    for r in 1..=max {
        w.push((r as f64).powf(-t));
    }
    w
}

/// `sum_{j != 0} |u(j)|^p |j|_inf^-t`.
pub fn weighted_lhs(u: &LatticeFunction, p: f64, t: f64) -> Result<f64> {
    weighted_lhs_in_range(u, p, t, 1, u64::MAX)
}

/// Weighted sum restricted to `lo <= |j|_inf < hi` (and `j != 0`).
pub fn weighted_lhs_in_range(
    u: &LatticeFunction,
    p: f64,
    t: f64,
    lo: u64,
    hi: u64,
) -> Result<f64> {
    check_p(p)?;
    if !t.is_finite() {
        return Err(HardyError::InvalidArgument(format!("weight exponent {t}")));
    }
    let dom = *u.domain();
    let norms = dom.sup_norms();
    let weights = inverse_powers(dom.radius, t);
    let lo = lo.max(1);
    let term = |i: usize| {
        let r = norms[i];
        if r < lo || r >= hi {
            0.0
        } else {
            pow_abs(u.values[i], p) * weights[r as usize]
        }
    };
    let total = pairwise_sum_by(dom.len(), term);
    finite_or_locate(total, dom.len(), term, &dom)
}

/// Ordered-pair nearest-neighbour energy `sum_j sum_{k~j} w |u(j) - u(k)|^p`
/// over the index ranges of a local `variant`.
pub fn local_energy(u: &LatticeFunction, p: f64, variant: EnergyVariant) -> Result<f64> {
    check_p(p)?;
    variant.check_eps()?;
    if !variant.is_local() {
        return Err(HardyError::InvalidArgument(format!(
            "{variant:?} is not a local energy variant"
        )));
    }
    let dom = *u.domain();
    let d = dom.dim;
    // Only pairs with at least one endpoint in the box contribute; every such
    // pair has its first endpoint in the box grown by one.
    let outer = dom.enlarged(1)?;
    let (eps, max_weight) = match variant {
        EnergyVariant::LocalWeighted { eps, max_weight } => (eps, max_weight),
        _ => (0.0, false),
    };
    let exclude_origin = variant.excludes_origin();
    let weighted = matches!(variant, EnergyVariant::LocalWeighted { .. });
    let row = |i: usize| -> f64 {
        let mut j = vec![0i64; d];
        outer.coords_into(i, &mut j);
        let j_origin = j.iter().all(|&c| c == 0);
        if j_origin && (exclude_origin || (weighted && !max_weight)) {
            return 0.0;
        }
        let uj = u.get(&j);
        let nj = norm_inf(&j);
        let mut k = j.clone();
        let mut acc = 0.0;
        for q in 0..d {
            for step in [-1i64, 1] {
                k[q] = j[q] + step;
                if outer.in_lattice(&k) && !(exclude_origin && k.iter().all(|&c| c == 0)) {
                    let uk = u.get(&k);
                    if uj != uk {
                        let mut term = pow_abs(uj - uk, p);
                        if weighted {
                            let r = if max_weight { nj.max(norm_inf(&k)) } else { nj };
                            term *= (r as f64).powf(-eps);
                        }
                        acc += term;
                    }
                }
            }
            k[q] = j[q];
        }
        acc
    };
    let total = pairwise_sum_by(outer.len(), row);
    finite_or_locate(total, outer.len(), row, &outer)
}

/// A fractional energy over a finite truncation box, tagged with the margin
/// that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedEnergy {
    pub value: f64,
    pub margin: u64,
}

/// Precomputed kernel data for repeated fractional-energy evaluations on one
/// support box.
///
/// The truncation box is the support box grown by `margin`. Pairs with both
/// points outside the support vanish, and pairs with exactly one point
/// outside only need `sum_{m outside} K(j - m)`, which is computed once per
/// support point from exact lattice-point counts.
#[derive(Clone, Debug)]
pub struct FractionalEvaluator {
    domain: Domain,
    margin: u64,
    p: f64,
    exclude_origin: bool,
    kernel: Vec<f64>,
    coords: Vec<i64>,
    outside_mass: Vec<f64>,
}

impl FractionalEvaluator {
    pub fn new(
        domain: Domain,
        s: f64,
        p: f64,
        variant: EnergyVariant,
        margin: u64,
    ) -> Result<Self> {
        check_p(p)?;
        variant.check_eps()?;
        if !(s.is_finite() && s > 0.0) {
            return Err(HardyError::InvalidArgument(format!("s must be positive, got {s}")));
        }
        let extra = match variant {
            EnergyVariant::FracWeighted { eps } => eps,
            EnergyVariant::FracExcludeOrigin | EnergyVariant::FracFull => 0.0,
            _ => {
                return Err(HardyError::InvalidArgument(format!(
                    "{variant:?} is not a fractional energy variant"
                )))
            }
        };
        let exponent = s * p + domain.dim as f64 + extra;
        let outer = domain.enlarged(margin)?;
        let max_dist = outer.side() as u64 - 1;
        let kernel = inverse_powers(max_dist, exponent);

        let d = domain.dim;
        let n = domain.len();
        let mut coords = vec![0i64; n * d];
        for i in 0..n {
            domain.coords_into(i, &mut coords[i * d..(i + 1) * d]);
        }

        let (s_lo, s_hi) = (domain.low(), domain.radius as i64);
        let (e_lo, e_hi) = (outer.low(), outer.radius as i64);
        let outside_mass = (0..n)
            .map(|i| {
                if margin == 0 {
                    return 0.0;
                }
                let c = &coords[i * d..(i + 1) * d];
                let cube = |r: i64, lo: i64, hi: i64| -> u128 {
                    c.iter()
                        .map(|&x| ((x + r).min(hi) - (x - r).max(lo) + 1) as u128)
                        .product()
                };
                // points of the truncation box at sup-distance exactly r, minus
                // those inside the support box
                pairwise_sum_seq_by(max_dist as usize, |k| {
                    let r = k as i64 + 1;
                    let shell_e = cube(r, e_lo, e_hi) - cube(r - 1, e_lo, e_hi);
                    let shell_s = cube(r, s_lo, s_hi) - cube(r - 1, s_lo, s_hi);
                    (shell_e - shell_s) as f64 * kernel[r as usize]
                })
            })
            .collect();

        Ok(FractionalEvaluator {
            domain,
            margin,
            p,
            exclude_origin: variant.excludes_origin(),
            kernel,
            coords,
            outside_mass,
        })
    }

    pub fn margin(&self) -> u64 {
        self.margin
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `kernel[r] = r^-(sp+d)` (plus `eps` for the weighted variant).
    pub(crate) fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// `sum_{m outside the support box} kernel(|j - m|_inf)` per support point.
    pub(crate) fn outside_mass(&self) -> &[f64] {
        &self.outside_mass
    }

    pub(crate) fn excludes_origin(&self) -> bool {
        self.exclude_origin
    }

    pub fn evaluate(&self, u: &LatticeFunction) -> Result<TruncatedEnergy> {
        if u.domain() != &self.domain {
            return Err(HardyError::InvalidArgument(
                "function lives on a different support box".into(),
            ));
        }
        let d = self.domain.dim;
        let n = self.domain.len();
        let vals = u.values();
        let origin = self.domain.origin_index();
        let p = self.p;
        let row = |j: usize| -> f64 {
            if self.exclude_origin && j == origin {
                return 0.0;
            }
            let uj = vals[j];
            let cj = &self.coords[j * d..(j + 1) * d];
            let inner = pairwise_sum_seq_by(n, |m| {
                let um = vals[m];
                if um == uj || (self.exclude_origin && m == origin) {
                    return 0.0;
                }
                let cm = &self.coords[m * d..(m + 1) * d];
                let mut dist = 0i64;
                for q in 0..d {
                    dist = dist.max((cj[q] - cm[q]).abs());
                }
                pow_abs(uj - um, p) * self.kernel[dist as usize]
            });
            inner + 2.0 * pow_abs(uj, p) * self.outside_mass[j]
        };
        let total = pairwise_sum_by(n, row);
        let value = finite_or_locate(total, n, row, &self.domain)?;
        Ok(TruncatedEnergy {
            value,
            margin: self.margin,
        })
    }
}

/// `sum_j sum_{m != j} |u(j) - u(m)|^p |j - m|_inf^-(sp+d)` over the support
/// box grown by `margin`. Every kernel term is nonnegative, so this is a lower
/// bound for the infinite sum, nondecreasing in `margin`.
pub fn fractional_energy(
    u: &LatticeFunction,
    s: f64,
    p: f64,
    variant: EnergyVariant,
    margin: u64,
) -> Result<TruncatedEnergy> {
    FractionalEvaluator::new(*u.domain(), s, p, variant, margin)?.evaluate(u)
}

/// Support-box indices grouped by annulus level (`levels[n]` holds `A_n ∩ box`).
pub(crate) fn indices_by_level(dom: &Domain) -> Vec<Vec<usize>> {
    let top = annulus_level(dom.radius) as usize;
    let mut levels = vec![Vec::new(); top + 1];
    for (i, r) in dom.sup_norms().into_iter().enumerate() {
        levels[annulus_level(r) as usize].push(i);
    }
    levels
}

/// `sum_{n>=1} sum_{j in A_n} sum_{m in A_{n+K}} |u(j) - u(m)|^p 2^-((n+K)(d+sp))`.
pub fn annuli_energy(u: &LatticeFunction, s: f64, p: f64, k: u32) -> Result<f64> {
    check_p(p)?;
    if k == 0 {
        return Err(HardyError::InvalidArgument("annulus gap K must be at least 1".into()));
    }
    let dom = *u.domain();
    if dom.kind != LatticeKind::Nonnegative {
        return Err(HardyError::InvalidArgument(
            "annuli are defined on the nonnegative lattice".into(),
        ));
    }
    let d = dom.dim;
    let sp = s * p;
    let vals = u.values();
    let levels = indices_by_level(&dom);
    let top = levels.len() - 1;
    let terms: Vec<f64> = (1..=top)
        .map(|n| {
            let far = n + k as usize;
            let inner = &levels[n];
            let outer: &[usize] = if far <= top { &levels[far] } else { &[] };
            let weight_exp = -((far as f64) * (d as f64 + sp));
            let w = weight_exp.exp2();
            let cross = pairwise_sum_seq_by(inner.len(), |a| {
                let uj = vals[inner[a]];
                pairwise_sum_seq_by(outer.len(), |b| pow_abs(uj - vals[outer[b]], p))
            });
            let inner_mass = pairwise_sum_seq_by(inner.len(), |a| pow_abs(vals[inner[a]], p));
            let outer_mass = pairwise_sum_seq_by(outer.len(), |b| pow_abs(vals[outer[b]], p));
            // Points of A_{n+K} beyond the box see u = 0.
            let far_missing_w = if outer.is_empty() {
                (1.0 - (-(d as f64)).exp2()) * (-(far as f64) * sp).exp2()
            } else {
                (Annulus::new(far as u32, d).count_f64() - outer.len() as f64) * w
            };
            let near_missing_w = (Annulus::new(n as u32, d).count_f64() - inner.len() as f64) * w;
            w * cross + far_missing_w * inner_mass + near_missing_w * outer_mass
        })
        .collect();
    let total = crate::sum::pairwise_sum(&terms);
    if total.is_finite() {
        Ok(total)
    } else {
        Err(HardyError::Numeric {
            context: "annuli energy".into(),
        })
    }
}
