//! The indicator `u_n`, the tent `v_n` and its complement `1 - v_n`, with the
//! closed-form bounds on their weighted sums and energies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{HardyError, Result};
use crate::functionals::{pow_abs, LatticeFunction};
use crate::lattice::{norm_inf, Domain, LatticeKind};
use crate::sum::pairwise_sum_seq_by;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyKind {
    /// `u_n = 1` on `|x|_inf <= n`, else 0.
    IndicatorUn,
    /// `v_n = (1 - |x|_inf / n)_+`.
    TentVn,
    /// `1 - v_n`.
    #[serde(rename = "COMPLEMENT_1_MINUS_VN")]
    ComplementOneMinusVn,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::IndicatorUn => "INDICATOR_UN",
            FamilyKind::TentVn => "TENT_VN",
            FamilyKind::ComplementOneMinusVn => "COMPLEMENT_1_MINUS_VN",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = HardyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "un" | "indicator" | "indicator_un" => Ok(FamilyKind::IndicatorUn),
            "vn" | "tent" | "tent_vn" => Ok(FamilyKind::TentVn),
            "complement" | "one_minus_vn" | "1_minus_vn" | "complement_1_minus_vn" => {
                Ok(FamilyKind::ComplementOneMinusVn)
            }
            _ => Err(HardyError::InvalidArgument(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub n: u64,
    pub d: usize,
}

impl TestFamily {
    pub fn new(kind: FamilyKind, n: u64, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(HardyError::InvalidArgument(format!(
                "test family needs n, d >= 1, got n = {n}, d = {d}"
            )));
        }
        Ok(TestFamily { kind, n, d })
    }

    /// Value as a function of `|x|_inf`.
    pub fn radial_value(&self, r: u64) -> f64 {
        let tent = (1.0 - r as f64 / self.n as f64).max(0.0);
        match self.kind {
            FamilyKind::IndicatorUn => (r <= self.n) as u8 as f64,
            FamilyKind::TentVn => tent,
            FamilyKind::ComplementOneMinusVn => 1.0 - tent,
        }
    }

    pub fn value(&self, x: &[i64]) -> f64 {
        self.radial_value(norm_inf(x))
    }
}

/// Tabulates a family on a box of `Z_+^d`. `u_n` and `v_n` need radius at
/// least `n + 1`; the complement is cut off at the box radius.
pub fn materialize(family: &TestFamily, dom: Domain) -> Result<LatticeFunction> {
    if dom.kind != LatticeKind::Nonnegative || dom.dim != family.d {
        return Err(HardyError::InvalidArgument(format!(
            "{} lives on Z_+^{}, got a {} box of dimension {}",
            family.kind, family.d, dom.kind, dom.dim
        )));
    }
    if family.kind != FamilyKind::ComplementOneMinusVn && dom.radius < family.n + 1 {
        return Err(HardyError::InvalidArgument(format!(
            "{} with n = {} needs radius >= {}, got {}",
            family.kind,
            family.n,
            family.n + 1,
            dom.radius
        )));
    }
    LatticeFunction::from_fn(dom, |x| family.value(x))
}

/// `#S_j = (j+1)^d - j^d`, the number of points of `Z_+^d` with `|x|_inf = j`.
pub fn sphere_size(j: u64, d: usize) -> f64 {
    let j = j as f64;
    (j + 1.0).powi(d as i32) - j.powi(d as i32)
}

/// Lower bound on `sum_{j != 0} |u_n(j)|^p / |j|_inf^t`.
pub fn un_lhs_bound(d: usize, t: f64, n: u64) -> f64 {
    let (df, nf) = (d as f64, n as f64);
    let e = df - t;
    if e >= 1.0 {
        df / e * nf.powf(e)
    } else if e != 0.0 {
        df / e.abs() * ((nf + 1.0).powf(e) - 1.0).abs()
    } else {
        df * (nf + 1.0).ln()
    }
}

/// Upper bound on the ordered-pair energy of `u_n` over all of `Z_+^d`.
pub fn un_rhs_bound(d: usize, _p: f64, n: u64) -> f64 {
    let (df, nf) = (d as f64, n as f64);
    let lead = 2.0 * df * nf.powi(d as i32 - 1);
    if d >= 2 {
        lead + 2f64.powi(d as i32 + 1) * df * nf.powi(d as i32 - 2)
    } else {
        lead
    }
}

/// Lower bound on `sum_{j != 0} |v_n(j)|^p / |j|_inf^t` for `0 < t < d`.
pub fn vn_lhs_bound(d: usize, t: f64, p: f64, n: u64) -> Result<f64> {
    let df = d as f64;
    if !(t > 0.0 && t < df && p > 0.0) {
        return Err(HardyError::OutOfRange(format!(
            "tent bound needs 0 < t < d and p > 0, got t = {t}, d = {d}, p = {p}"
        )));
    }
    let e = df - t;
    let m = e.min(1.0);
    let nf = n as f64;
    Ok(df * nf.powf(e) * (beta_function(p + 1.0, e)? - 1.0 / m / nf.powf(m)))
}

/// A lower bound that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LowerBound {
    Finite(f64),
    Infinite,
}

impl LowerBound {
    pub fn as_f64(self) -> f64 {
        match self {
            LowerBound::Finite(v) => v,
            LowerBound::Infinite => f64::INFINITY,
        }
    }
}

/// Lower bound on `sum_{j != 0} |1 - v_n(j)|^p / |j|_inf^t` for `t >= d`.
pub fn one_minus_vn_lhs_bound(d: usize, t: f64, p: f64, n: u64) -> Result<LowerBound> {
    let df = d as f64;
    if !(t >= df && p > 0.0) {
        return Err(HardyError::OutOfRange(format!(
            "complement bound needs t >= d and p > 0, got t = {t}, d = {d}, p = {p}"
        )));
    }
    if t == df {
        Ok(LowerBound::Infinite)
    } else {
        Ok(LowerBound::Finite((n as f64).powf(df - t)))
    }
}

/// Upper bound on the ordered-pair energy of `v_n` over all of `Z_+^d`.
pub fn vn_energy_bound(d: usize, p: f64, n: u64) -> f64 {
    let (df, nf) = (d as f64, n as f64);
    let lead = 2.0 * nf.powf(df - p);
    if d >= 2 {
        lead + 2f64.powi(d as i32 + 1) * nf.powf(df - 1.0 - p)
    } else {
        lead
    }
}

/// Euler Beta function through log-gamma.
pub fn beta_function(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(HardyError::OutOfRange(format!(
            "Beta needs positive arguments, got ({a}, {b})"
        )));
    }
    Ok((ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
}

/// Exact `sum_{j != 0} |f(j)|^p / |j|_inf^t` over `|j|_inf <= radius` for a
/// radial family, by shell summation.
pub fn radial_lhs(family: &TestFamily, t: f64, p: f64, radius: u64) -> f64 {
    pairwise_sum_seq_by(radius as usize, |i| {
        let j = i as u64 + 1;
        sphere_size(j, family.d) * pow_abs(family.radial_value(j), p) * (j as f64).powf(-t)
    })
}

/// Lower bound on `sum_{|j|_inf > radius} |j|_inf^-t` over `Z_+^d`, valid for
/// `t > d`. Each shell size is a polynomial in `j` and each power sum is
/// bounded below by its integral.
pub fn shell_tail_lower(d: usize, t: f64, radius: u64) -> f64 {
    let a = radius as f64 + 1.0;
    let mut binom = 1.0;
    let mut total = 0.0;
    for i in 0..d {
        // (j+1)^d - j^d = sum_{i<d} C(d,i) j^i
        let s = t - i as f64;
        total += binom * a.powf(1.0 - s) / (s - 1.0);
        binom = binom * (d - i) as f64 / (i + 1) as f64;
    }
    total
}

/// Exact ordered-pair energy of `u_n`: `2d(n+1)^(d-1)`.
pub fn un_energy_exact(d: usize, n: u64) -> f64 {
    2.0 * d as f64 * (n as f64 + 1.0).powi(d as i32 - 1)
}

/// Exact ordered-pair energy of `v_n`: `2d n^-p sum_{i=1}^n i^(d-1)`.
pub fn vn_energy_exact(d: usize, p: f64, n: u64) -> f64 {
    let s = pairwise_sum_seq_by(n as usize, |i| ((i + 1) as f64).powi(d as i32 - 1));
    2.0 * d as f64 * s * (n as f64).powf(-p)
}

/// Least-squares fit of `log value` against `log n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals in log space.
    pub residual: f64,
}

pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(HardyError::Degenerate(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) || samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(HardyError::Degenerate(
            "scales must be positive and strictly increasing".into(),
        ));
    }
    if samples.iter().any(|s| !(s.1 > 0.0 && s.1.is_finite())) {
        return Err(HardyError::Degenerate("values must be positive and finite".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
    })
}
