//! Explicit constants: the annulus gap `K`, the lemma constant `C(d,p,s,K)`,
//! the path-counting constant `C_L(k,s,p)`, the small-box recursion constant,
//! and the per-regime assemblies built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::functionals::EnergyVariant;
use crate::lattice::LatticeKind;

/// Tolerance for the equalities `sp = d`, `d = p` and `sp = max(p, 1)`.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Largest annulus gap `K` accepted before the gap `|sp - d|` is considered
/// pathologically small.
pub const MAX_K: u32 = 64;

/// Values of the small-box recursion beyond this are reported as `+inf`.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// One inequality together with its parameter constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    /// Local, `0 < p <= 1 < d`, weight `|j|^-1`, right side scaled by `1/d`.
    #[serde(rename = "T11_1")]
    LocalSmallP,
    /// Local, `1 <= p < d`, weight `|j|^-p`, right side scaled by `d^(p-2)`.
    #[serde(rename = "T11_2")]
    LocalMediumP,
    /// Local, `d < p`, weight `|j|^-p`, `u(0) = 0`.
    #[serde(rename = "T11_3")]
    LocalLargeP,
    /// Local, `d = p`, weight `|j|^-(p+eps)` against the `|j|^-eps`-weighted energy.
    #[serde(rename = "T11_4")]
    LocalCritical,
    /// Local on the half-line, `0 < p < 1`, weight `|j|^-(1+eps)`.
    #[serde(rename = "T11_5")]
    LocalHalfLine,
    /// Fractional, `sp < d`.
    #[serde(rename = "T12_1")]
    FracSubcritical,
    /// Fractional, `sp = d`, weight `|j|^-(sp+eps)`.
    #[serde(rename = "T12_2")]
    FracCritical,
    /// Fractional, `sp > d`, `u(0) = 0`.
    #[serde(rename = "T12_3")]
    FracSupercritical,
    /// Weighted sum against the dyadic annuli energy, `sp < d`.
    #[serde(rename = "LEM21_SMALL")]
    AnnuliSubcritical,
    /// Tail sum against the annuli energy plus the small-box sum, `sp > d`.
    #[serde(rename = "LEM21_LARGE")]
    AnnuliSupercritical,
}

impl Regime {
    pub const ALL: [Regime; 10] = [
        Regime::LocalSmallP,
        Regime::LocalMediumP,
        Regime::LocalLargeP,
        Regime::LocalCritical,
        Regime::LocalHalfLine,
        Regime::FracSubcritical,
        Regime::FracCritical,
        Regime::FracSupercritical,
        Regime::AnnuliSubcritical,
        Regime::AnnuliSupercritical,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Regime::LocalSmallP => "T11_1",
            Regime::LocalMediumP => "T11_2",
            Regime::LocalLargeP => "T11_3",
            Regime::LocalCritical => "T11_4",
            Regime::LocalHalfLine => "T11_5",
            Regime::FracSubcritical => "T12_1",
            Regime::FracCritical => "T12_2",
            Regime::FracSupercritical => "T12_3",
            Regime::AnnuliSubcritical => "LEM21_SMALL",
            Regime::AnnuliSupercritical => "LEM21_LARGE",
        }
    }

    pub fn is_local(self) -> bool {
        matches!(
            self,
            Regime::LocalSmallP
                | Regime::LocalMediumP
                | Regime::LocalLargeP
                | Regime::LocalCritical
                | Regime::LocalHalfLine
        )
    }

    pub fn is_fractional(self) -> bool {
        matches!(
            self,
            Regime::FracSubcritical | Regime::FracCritical | Regime::FracSupercritical
        )
    }

    pub fn is_annuli(self) -> bool {
        matches!(self, Regime::AnnuliSubcritical | Regime::AnnuliSupercritical)
    }

    /// Whether admissible functions must vanish at the origin.
    pub fn requires_zero_origin(self) -> bool {
        matches!(
            self,
            Regime::LocalLargeP
                | Regime::LocalCritical
                | Regime::LocalHalfLine
                | Regime::FracCritical
                | Regime::FracSupercritical
        )
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Regime {
    type Err = HardyError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Regime::ALL
            .into_iter()
            .find(|r| r.tag() == norm)
            .ok_or_else(|| HardyError::InvalidArgument(format!("unknown regime {s:?}")))
    }
}

fn default_lattice() -> LatticeKind {
    LatticeKind::Nonnegative
}

/// Regime plus the numeric parameters it needs. Unused fields are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub regime: Regime,
    #[serde(default = "default_lattice")]
    pub lattice: LatticeKind,
    pub d: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default)]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Annulus gap; `None` selects the smallest admissible value.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

impl HardyParams {
    pub fn new(regime: Regime, d: usize, p: f64) -> Self {
        HardyParams {
            regime,
            lattice: LatticeKind::Nonnegative,
            d,
            p,
            s: None,
            eps: 0.0,
            delta: None,
            k: None,
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn on(mut self, lattice: LatticeKind) -> Self {
        self.lattice = lattice;
        self
    }

    fn fail(&self, reason: impl Into<String>) -> HardyError {
        HardyError::invalid(self.regime, reason)
    }

    fn fractional_s(&self) -> Result<f64> {
        match self.s {
            Some(s) if s.is_finite() && s > 0.0 => Ok(s),
            Some(s) => Err(self.fail(format!("s must be positive, got {s}"))),
            None => Err(self.fail("s is required")),
        }
    }

    /// The smoothness parameter the constant is built with: given for the
    /// fractional and annuli regimes, derived for the local ones.
    pub fn s_used(&self) -> Result<f64> {
        let p = self.p;
        match self.regime {
            Regime::LocalSmallP | Regime::LocalMediumP => Ok((1.0 / p).max(1.0)),
            Regime::LocalLargeP | Regime::LocalHalfLine => Ok(1.0),
            Regime::LocalCritical => Ok(1.0 + self.eps / p),
            Regime::FracCritical => Ok(self.fractional_s()? + self.eps / p),
            _ => self.fractional_s(),
        }
    }

    /// Checks the regime's parameter constraints.
    pub fn validate(&self) -> Result<()> {
        let (d, p, eps) = (self.d as f64, self.p, self.eps);
        if self.d == 0 {
            return Err(self.fail("d must be at least 1"));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(self.fail(format!("p must be positive, got {p}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(self.fail(format!("eps must be nonnegative, got {eps}")));
        }
        if let Some(k) = self.k {
            if k == 0 || k > MAX_K {
                return Err(self.fail(format!("K must lie in 1..={MAX_K}, got {k}")));
            }
        }
        let need_eps = || {
            if eps > 0.0 {
                Ok(())
            } else {
                Err(self.fail("requires eps > 0"))
            }
        };
        let check_delta = |gap: f64| -> Result<()> {
            if let Some(delta) = self.delta {
                if !(delta > 0.0 && delta <= gap + EXPONENT_TOL) {
                    return Err(self.fail(format!("requires 0 < delta <= {gap}, got {delta}")));
                }
            }
            Ok(())
        };
        match self.regime {
            Regime::LocalSmallP => {
                if !(p <= 1.0 && d > 1.0) {
                    return Err(self.fail("requires 0 < p <= 1 < d"));
                }
            }
            Regime::LocalMediumP => {
                if !(p >= 1.0 && p < d) {
                    return Err(self.fail("requires 1 <= p < d"));
                }
                check_delta(d - p)?;
            }
            Regime::LocalLargeP => {
                if !(d < p) {
                    return Err(self.fail("requires d < p"));
                }
            }
            Regime::LocalCritical => {
                if (d - p).abs() > EXPONENT_TOL {
                    return Err(self.fail("requires d = p"));
                }
                need_eps()?;
            }
            Regime::LocalHalfLine => {
                if !(self.d == 1 && p < 1.0) {
                    return Err(self.fail("requires d = 1 and 0 < p < 1"));
                }
                need_eps()?;
            }
            Regime::FracSubcritical | Regime::AnnuliSubcritical => {
                let sp = self.fractional_s()? * p;
                if !(sp < d - EXPONENT_TOL) {
                    return Err(self.fail("requires sp < d"));
                }
                check_delta(d - sp)?;
            }
            Regime::FracCritical => {
                let sp = self.fractional_s()? * p;
                if (sp - d).abs() > EXPONENT_TOL {
                    return Err(self.fail("requires sp = d"));
                }
                need_eps()?;
            }
            Regime::FracSupercritical | Regime::AnnuliSupercritical => {
                let sp = self.fractional_s()? * p;
                if !(sp > d + EXPONENT_TOL) {
                    return Err(self.fail("requires sp > d"));
                }
            }
        }
        if self.regime.is_annuli() && self.lattice != LatticeKind::Nonnegative {
            return Err(self.fail("annuli are only defined on the nonnegative lattice"));
        }
        Ok(())
    }

    /// Exponent `t` of the weight `|j|_inf^-t` on the left side.
    pub fn lhs_exponent(&self) -> Result<f64> {
        let p = self.p;
        Ok(match self.regime {
            Regime::LocalSmallP => 1.0,
            Regime::LocalMediumP | Regime::LocalLargeP => p,
            Regime::LocalCritical => p + self.eps,
            Regime::LocalHalfLine => 1.0 + self.eps,
            Regime::FracCritical => self.fractional_s()? * p + self.eps,
            _ => self.fractional_s()? * p,
        })
    }

    /// The energy on the right side; `None` for the annuli regimes.
    pub fn energy_variant(&self) -> Option<EnergyVariant> {
        Some(match self.regime {
            Regime::LocalSmallP | Regime::LocalMediumP => EnergyVariant::LocalExcludeOrigin,
            Regime::LocalLargeP | Regime::LocalHalfLine => EnergyVariant::LocalIncludeOrigin,
            Regime::LocalCritical => EnergyVariant::LocalWeighted {
                eps: self.eps,
                max_weight: false,
            },
            Regime::FracSubcritical => EnergyVariant::FracExcludeOrigin,
            Regime::FracCritical => EnergyVariant::FracWeighted { eps: self.eps },
            Regime::FracSupercritical => EnergyVariant::FracFull,
            Regime::AnnuliSubcritical | Regime::AnnuliSupercritical => return None,
        })
    }
}

fn k_exponent(s: f64, p: f64, gap: f64, k: u32) -> f64 {
    s * p + 1.0 + (p - 1.0).max(0.0) - k as f64 * gap
}

/// Whether `2^(sp+1) (2^(p-1) ∨ 1) 2^(-K gap) <= 1`.
pub fn satisfies_k_condition(s: f64, p: f64, gap: f64, k: u32) -> bool {
    let base = s * p + 1.0 + (p - 1.0).max(0.0);
    k_exponent(s, p, gap, k) <= EXPONENT_TOL * base.max(1.0)
}

/// Smallest `K >= 1` with `2^(sp+1) (2^(p-1) ∨ 1) 2^(-K gap) <= 1`.
pub fn minimal_k_for_gap(s: f64, p: f64, gap: f64) -> Result<u32> {
    if !(gap.is_finite() && gap > EXPONENT_TOL) {
        return Err(HardyError::InvalidArgument(format!(
            "annulus gap needs a positive exponent gap, got {gap}"
        )));
    }
    let base = s * p + 1.0 + (p - 1.0).max(0.0);
    let guess = (base / gap).ceil();
    if !(guess <= MAX_K as f64 + 1.0) {
        return Err(HardyError::OutOfRange(format!(
            "annulus gap K = {guess} exceeds {MAX_K}"
        )));
    }
    let mut k = (guess as u32).max(1);
    while k > 1 && satisfies_k_condition(s, p, gap, k - 1) {
        k -= 1;
    }
    while !satisfies_k_condition(s, p, gap, k) {
        k += 1;
    }
    if k > MAX_K {
        return Err(HardyError::OutOfRange(format!("annulus gap K = {k} exceeds {MAX_K}")));
    }
    Ok(k)
}

/// Smallest admissible annulus gap for `sp != d`.
pub fn minimal_k(s: f64, p: f64, d: usize) -> Result<u32> {
    let gap = (s * p - d as f64).abs();
    if gap <= EXPONENT_TOL {
        return Err(HardyError::invalid(
            "annulus gap",
            format!("sp = d = {d} has no admissible K"),
        ));
    }
    minimal_k_for_gap(s, p, gap)
}

fn two_pow_p_minus_one(p: f64) -> f64 {
    (p - 1.0).exp2().max(1.0)
}

/// `C(d,p,s,K) = 2^(sp+1+K(d∧sp)) (2^(p-1) ∨ 1) / (1 - 2^-d)`.
pub fn lemma_constant(d: usize, p: f64, s: f64, k: u32) -> f64 {
    let sp = s * p;
    let df = d as f64;
    (sp + 1.0 + k as f64 * df.min(sp)).exp2() * two_pow_p_minus_one(p) / (1.0 - (-df).exp2())
}

/// `2^(sp+2+Ksp) (2^(p-1) ∨ 1)`, the dimension-free majorant of
/// `C(d,p,s,K)` when `sp < d`.
pub fn dimension_free_constant(p: f64, s: f64, k: u32) -> f64 {
    let sp = s * p;
    (sp + 2.0 + k as f64 * sp).exp2() * two_pow_p_minus_one(p)
}

/// Path-counting constant `C_L(k,s,p)`.
pub fn path_constant(k: u32, s: f64, p: f64) -> f64 {
    let q = p.max(1.0);
    let sp = s * p;
    let kf = k as f64;
    let lead = kf * (q - sp - 1.0);
    let half = if (sp - q).abs() <= EXPONENT_TOL {
        lead.exp2() * (kf + 1.0)
    } else if sp < q {
        (lead + q - sp).exp2() / (1.0 - (sp - q).exp2())
    } else {
        (lead - kf * q + kf * sp).exp2() / (1.0 - (q - sp).exp2())
    };
    2.0 * half
}

/// Small-box constant `c(p,d,N)`: `Nd` steps of
/// `c <- (1 + (2^(p-1) ∨ 1)) c ∨ (2^(p-1) ∨ 1)` from `c = 1/2`.
/// Returns `+inf` once the value passes [`OVERFLOW_GUARD`].
pub fn trivial_lemma_constant(p: f64, d: usize, n: u64) -> f64 {
    let a = two_pow_p_minus_one(p);
    let steps = n as u128 * d as u128;
    let mut c = 0.5;
    let mut r: u128 = 1;
    while r < steps {
        c = ((1.0 + a) * c).max(a);
        if c > OVERFLOW_GUARD {
            return f64::INFINITY;
        }
        r += 1;
    }
    c
}

/// One factor of an assembled constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub factor: String,
    pub value: f64,
    pub source: String,
    /// Index of the additive term this factor multiplies into.
    pub term: usize,
}

/// An assembled constant: the sum over terms of the product of their factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub regime: Regime,
    pub value: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub s_used: f64,
    pub assembly: Vec<Factor>,
}

impl ConstantReport {
    /// Recomputes the value from the trace.
    pub fn recompute(&self) -> f64 {
        let terms = self.assembly.iter().map(|f| f.term).max().map_or(0, |t| t + 1);
        (0..terms)
            .map(|t| {
                self.assembly
                    .iter()
                    .filter(|f| f.term == t)
                    .map(|f| f.value)
                    .product::<f64>()
            })
            .sum()
    }
}

struct Assembly {
    factors: Vec<Factor>,
    term: usize,
}

impl Assembly {
    fn new() -> Self {
        Assembly {
            factors: Vec::new(),
            term: 0,
        }
    }

    fn push(&mut self, factor: impl Into<String>, value: f64, source: impl Into<String>) {
        self.factors.push(Factor {
            factor: factor.into(),
            value,
            source: source.into(),
            term: self.term,
        });
    }

    fn next_term(&mut self) {
        self.term += 1;
    }

    fn scale_all(&mut self, factor: &str, value: f64, source: &str) {
        for t in 0..=self.term {
            self.factors.push(Factor {
                factor: factor.into(),
                value,
                source: source.into(),
                term: t,
            });
        }
    }
}

const SRC_LEMMA: &str = "dyadic annuli lemma constant";
const SRC_FREE: &str = "dimension-free majorant of the lemma constant (sp < d)";
const SRC_PATH: &str = "axis-ordered path counting";
const SRC_SMALL: &str = "small-box recursion over l1 layers";

fn gap_k(params: &HardyParams, s: f64, gap: f64) -> Result<u32> {
    match params.k {
        Some(k) if satisfies_k_condition(s, params.p, gap, k) => Ok(k),
        Some(k) => Err(params.fail(format!("K = {k} violates the annulus gap condition"))),
        None => minimal_k_for_gap(s, params.p, gap),
    }
}

/// Local regime with `sp > d` (`d < p`, or `d = p` with `s = 1 + eps/p`):
/// annuli term through path counting plus twice the small-box term.
fn local_supercritical(asm: &mut Assembly, d: usize, p: f64, s: f64, k: u32, eps: f64) {
    let df = d as f64;
    asm.push("C(d,p,s,K)", lemma_constant(d, p, s, k), SRC_LEMMA);
    asm.push("C_L(K,s,p)", path_constant(k, s, p), SRC_PATH);
    asm.push("d^(p-2)", df.powf(p - 2.0), SRC_PATH);
    asm.next_term();
    asm.push("2", 2.0, "small-box term coefficient");
    let n = 1u64 << k.min(63);
    asm.push("c(p,d,2^K)", trivial_lemma_constant(p, d, n), SRC_SMALL);
    if eps > 0.0 {
        asm.push("(2^K)^eps", (k as f64 * eps).exp2(), "max-weight bound on the small box");
        asm.push(
            "2",
            2.0,
            "origin pairs of the max-weighted box energy folded into the |j|^-eps energy",
        );
    }
}

/// Assembles the constant of a regime exactly as its proof composes it.
pub fn theorem_constant(params: &HardyParams) -> Result<ConstantReport> {
    params.validate()?;
    let (d, p) = (params.d, params.p);
    let df = d as f64;
    let mut asm = Assembly::new();
    let s_used = params.s_used()?;
    let sp = s_used * p;
    let k = match params.regime {
        Regime::LocalSmallP | Regime::LocalMediumP => {
            // s = 1/p ∨ 1 so that sp = p ∨ 1; for p <= 1 the gap is fixed to 1
            let delta = if params.regime == Regime::LocalSmallP {
                1.0
            } else {
                params.delta.unwrap_or(df - p)
            };
            let k = gap_k(params, s_used, delta)?;
            asm.push("2", 2.0, "C(d,p,s,K) <= 2 C(1,p,s,K)");
            asm.push("C(1,p,s,K)", dimension_free_constant(p, s_used, k), SRC_FREE);
            asm.push("C_L(K,s,p)", path_constant(k, s_used, p), SRC_PATH);
            asm.push("d^((p∨1)-2)", df.powf(p.max(1.0) - 2.0), SRC_PATH);
            k
        }
        Regime::LocalLargeP => {
            let k = gap_k(params, s_used, sp - df)?;
            local_supercritical(&mut asm, d, p, s_used, k, 0.0);
            k
        }
        Regime::LocalCritical => {
            let k = gap_k(params, s_used, sp - df)?;
            local_supercritical(&mut asm, d, p, s_used, k, params.eps);
            k
        }
        Regime::LocalHalfLine => {
            // the d < p constant at exponent 1 + eps, applied to |u|^(p/(1+eps))
            let q = 1.0 + params.eps;
            let k = match params.k {
                Some(k) if satisfies_k_condition(1.0, q, q - 1.0, k) => k,
                Some(k) => {
                    return Err(params.fail(format!("K = {k} violates the annulus gap condition")))
                }
                None => minimal_k_for_gap(1.0, q, q - 1.0)?,
            };
            local_supercritical(&mut asm, 1, q, 1.0, k, 0.0);
            k
        }
        Regime::FracSubcritical => {
            let delta = params.delta.unwrap_or(df - sp);
            let k = gap_k(params, s_used, delta)?;
            asm.push("C(1,p,s,K)", dimension_free_constant(p, s_used, k), SRC_FREE);
            k
        }
        Regime::FracCritical | Regime::FracSupercritical => {
            let k = gap_k(params, s_used, sp - df)?;
            asm.push("C(d,p,s,K)", lemma_constant(d, p, s_used, k), SRC_LEMMA);
            k
        }
        Regime::AnnuliSubcritical | Regime::AnnuliSupercritical => {
            let k = gap_k(params, s_used, (sp - df).abs())?;
            asm.push("C(d,p,s,K)", lemma_constant(d, p, s_used, k), SRC_LEMMA);
            k
        }
    };
    if params.lattice == LatticeKind::Full {
        match params.regime {
            Regime::LocalSmallP | Regime::LocalMediumP | Regime::FracSubcritical => asm.scale_all(
                "2^(sp)+1",
                sp.exp2() + 1.0,
                "shifted-orthant cover of Z^d, sp < d",
            ),
            _ => asm.scale_all("2^d", df.exp2(), "orthant cover of Z^d"),
        }
    }
    let report = ConstantReport {
        regime: params.regime,
        value: 0.0,
        k,
        s_used,
        assembly: asm.factors,
    };
    let value = report.recompute();
    if !(value.is_finite() && value > 0.0) {
        return Err(HardyError::OutOfRange(format!(
            "assembled constant for {} overflows double precision",
            params.regime
        )));
    }
    Ok(ConstantReport { value, ..report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn minimal_k_examples() {
        assert_eq!(minimal_k(1.0, 2.0, 3).unwrap(), 4);
        assert_eq!(minimal_k(0.25, 2.0, 1).unwrap(), 5);
        assert_eq!(minimal_k(2.0, 0.5, 2).unwrap(), 2);
        assert!(minimal_k(1.0, 2.0, 2).is_err());
        assert!(matches!(
            minimal_k_for_gap(1.0, 2.0, 1e-3),
            Err(HardyError::OutOfRange(_))
        ));
    }

    #[test]
    fn lemma_constant_examples() {
        assert!(close(lemma_constant(3, 2.0, 1.0, 4), 32768.0 / 7.0, 1e-15));
        assert!(close(lemma_constant(1, 2.0, 0.25, 5), 64.0, 1e-15));
        assert!(close(lemma_constant(1, 1.0, 1.0, 1), 16.0, 1e-15));
    }

    #[test]
    fn path_constant_examples() {
        assert!(close(path_constant(4, 1.0, 2.0), 0.625, 1e-15));
        let expected = 2.0 * 2.0 * 1.5f64.exp2() / (1.0 - (-1.5f64).exp2());
        assert!(close(path_constant(2, 0.25, 2.0), expected, 1e-14));
        assert!((path_constant(2, 0.25, 2.0) - 17.50137).abs() < 1e-4);
        assert!(close(path_constant(1, 3.0, 1.0), 4.0 / 3.0, 1e-15));
    }

    #[test]
    fn trivial_lemma_examples() {
        assert_eq!(trivial_lemma_constant(2.0, 1, 2), 2.0);
        assert_eq!(trivial_lemma_constant(1.0, 1, 3), 2.0);
        assert_eq!(trivial_lemma_constant(2.0, 2, 1), 2.0);
        assert_eq!(trivial_lemma_constant(2.0, 1, 1), 0.5);
        assert_eq!(trivial_lemma_constant(2.0, 4, 1 << 20), f64::INFINITY);
    }

    #[test]
    fn frac_subcritical_example() {
        let params = HardyParams::new(Regime::FracSubcritical, 1, 2.0)
            .with_s(0.25)
            .with_delta(0.5);
        let r = theorem_constant(&params).unwrap();
        assert_eq!(r.k, 5);
        assert!(close(r.value, 64.0, 1e-15));
    }

    #[test]
    fn local_medium_trace_by_hand() {
        // d = 3, p = 2, delta = 1: s = 1, sp = 2, K = 4.
        // C(1,2,1,4) = 2^(2+2+8) * 2 = 8192; the proof doubles it.
        // C_L(4,1,2) = 2 * 2^(4*(2-2-1)) * 5 = 0.625; d^(p-2) = 1.
        let params = HardyParams::new(Regime::LocalMediumP, 3, 2.0).with_delta(1.0);
        let r = theorem_constant(&params).unwrap();
        assert_eq!(r.k, 4);
        assert_eq!(r.s_used, 1.0);
        let values: Vec<f64> = r.assembly.iter().map(|f| f.value).collect();
        assert_eq!(values, vec![2.0, 8192.0, 0.625, 1.0]);
        assert!(close(r.value, 10240.0, 1e-15));
        assert!(r.value >= lemma_constant(3, 2.0, 1.0, 4) * 0.625);
    }

    #[test]
    fn local_large_trace_by_hand() {
        // d = 1, p = 2: s = 1, sp = 2, K = 4.
        // C(1,2,1,4) = 2^(2+1+4) * 2 / (1/2) = 512, C_L = 0.625, d^(p-2) = 1,
        // c(2,1,16) = 2 * 3^14.
        let params = HardyParams::new(Regime::LocalLargeP, 1, 2.0);
        let r = theorem_constant(&params).unwrap();
        assert_eq!(r.k, 4);
        let expected = 512.0 * 0.625 + 2.0 * 2.0 * 3f64.powi(14);
        assert!(close(r.value, expected, 1e-14));
        assert!(close(r.recompute(), r.value, 1e-15));
    }

    #[test]
    fn full_lattice_factors() {
        let base = HardyParams::new(Regime::FracSubcritical, 1, 2.0).with_s(0.25);
        let zplus = theorem_constant(&base).unwrap().value;
        let z = theorem_constant(&base.on(LatticeKind::Full)).unwrap().value;
        assert!(close(z, zplus * (0.5f64.exp2() + 1.0), 1e-15));

        let base = HardyParams::new(Regime::FracSupercritical, 2, 2.0).with_s(2.0);
        let zplus = theorem_constant(&base).unwrap().value;
        let z = theorem_constant(&base.on(LatticeKind::Full)).unwrap().value;
        assert!(close(z, 4.0 * zplus, 1e-15));
    }

    #[test]
    fn validation_names_the_condition() {
        let bad = HardyParams::new(Regime::LocalSmallP, 1, 0.5);
        let err = theorem_constant(&bad).unwrap_err();
        assert!(err.to_string().contains("0 < p <= 1 < d"), "{err}");
        assert!(HardyParams::new(Regime::LocalCritical, 2, 2.0).validate().is_err());
        assert!(HardyParams::new(Regime::LocalCritical, 2, 2.0).with_eps(0.5).validate().is_ok());
        assert!(HardyParams::new(Regime::FracCritical, 2, 2.0).with_s(1.0).validate().is_err());
        assert!(HardyParams::new(Regime::AnnuliSubcritical, 2, 2.0)
            .with_s(0.5)
            .on(LatticeKind::Full)
            .validate()
            .is_err());
        assert!(HardyParams::new(Regime::LocalMediumP, 3, 2.0)
            .with_delta(1.5)
            .validate()
            .is_err());
    }

    #[test]
    fn explicit_k_is_checked() {
        let ok = HardyParams::new(Regime::FracSupercritical, 1, 2.0).with_s(1.0).with_k(5);
        assert_eq!(theorem_constant(&ok).unwrap().k, 5);
        let bad = ok.with_k(2);
        assert!(theorem_constant(&bad).is_err());
    }

    #[test]
    fn every_regime_has_a_positive_finite_constant() {
        let cases = [
            HardyParams::new(Regime::LocalSmallP, 2, 0.5),
            HardyParams::new(Regime::LocalMediumP, 3, 1.0),
            HardyParams::new(Regime::LocalLargeP, 2, 3.0),
            HardyParams::new(Regime::LocalCritical, 2, 2.0).with_eps(1.0),
            HardyParams::new(Regime::LocalHalfLine, 1, 0.5).with_eps(0.5),
            HardyParams::new(Regime::FracSubcritical, 2, 1.0).with_s(0.5),
            HardyParams::new(Regime::FracCritical, 2, 2.0).with_s(1.0).with_eps(0.5),
            HardyParams::new(Regime::FracSupercritical, 1, 1.0).with_s(2.0),
            HardyParams::new(Regime::AnnuliSubcritical, 3, 2.0).with_s(0.75),
            HardyParams::new(Regime::AnnuliSupercritical, 1, 2.0).with_s(1.0),
        ];
        for params in cases {
            for lattice in [LatticeKind::Nonnegative, LatticeKind::Full] {
                let params = params.on(lattice);
                if params.validate().is_err() {
                    continue;
                }
                let r = theorem_constant(&params).unwrap();
                assert!(r.value.is_finite() && r.value > 0.0, "{params:?}");
                assert!(close(r.recompute(), r.value, 1e-15));
            }
        }
    }

    #[test]
    fn regime_tags_parse() {
        for r in Regime::ALL {
            assert_eq!(r.tag().parse::<Regime>().unwrap(), r);
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(json, format!("\"{}\"", r.tag()));
        }
        assert_eq!("t12-1".parse::<Regime>().unwrap(), Regime::FracSubcritical);
    }

    #[test]
    fn report_serializes_with_trace() {
        let params = HardyParams::new(Regime::FracSubcritical, 1, 2.0).with_s(0.25);
        let r = theorem_constant(&params).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["K"], 5);
        assert_eq!(v["value"], 64.0);
        assert_eq!(v["assembly"][0]["factor"], "C(1,p,s,K)");
        let back: ConstantReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
