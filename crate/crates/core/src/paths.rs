//! Axis-ordered lattice paths between dyadic annuli and the brute-force
//! census of how often each directed edge is used by them.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result, DEFAULT_POINT_BUDGET};
use crate::lattice::{annulus_level, annulus_points, Annulus, LatticePoint};

/// A sequence of lattice points `x_0, ..., x_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePath {
    points: Vec<LatticePoint>,
}

impl LatticePath {
    pub fn new(points: Vec<LatticePoint>) -> Self {
        LatticePath { points }
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> Option<&LatticePoint> {
        self.points.first()
    }

    pub fn end(&self) -> Option<&LatticePoint> {
        self.points.last()
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// Axis order `beta, beta+1, ..., d-1, 0, ..., beta-1` (0-based).
pub fn axis_order(d: usize, beta: usize) -> Vec<usize> {
    (0..d).map(|i| (beta + i) % d).collect()
}

fn walk(j: &[i64], m: &[i64], order: &[usize]) -> Vec<LatticePoint> {
    let mut x = j.to_vec();
    let mut out = vec![LatticePoint::new(x.clone())];
    for &q in order {
        let step = (m[q] - x[q]).signum();
        while x[q] != m[q] {
            x[q] += step;
            out.push(LatticePoint::new(x.clone()));
        }
    }
    out
}

fn check_dims(j: &LatticePoint, m: &LatticePoint) -> Result<()> {
    if j.dim() != m.dim() || j.dim() == 0 {
        return Err(HardyError::InvalidArgument(format!(
            "path endpoints {j} and {m} must share a positive dimension"
        )));
    }
    Ok(())
}

/// The path that first moves along axis 1 to `m_1`, then along axis 2, and so on.
pub fn build_path(j: &LatticePoint, m: &LatticePoint) -> Result<LatticePath> {
    check_dims(j, m)?;
    Ok(LatticePath::new(walk(
        j.coords(),
        m.coords(),
        &axis_order(j.dim(), 0),
    )))
}

/// `sigma^-beta` applied pointwise to the path from `sigma^beta j` to
/// `sigma^beta m`, where `sigma` rotates coordinates one place to the left.
/// Equivalently the path whose axis order starts at axis `beta + 1`.
pub fn build_shifted_path(j: &LatticePoint, m: &LatticePoint, beta: usize) -> Result<LatticePath> {
    check_dims(j, m)?;
    let d = j.dim();
    if beta >= d {
        return Err(HardyError::OutOfRange(format!(
            "shift index {beta} must be below d = {d}"
        )));
    }
    let inner = build_path(&j.shift(beta), &m.shift(beta))?;
    Ok(LatticePath::new(
        inner.points.iter().map(|x| x.unshift(beta)).collect(),
    ))
}

/// Checks the defining properties of an axis-ordered path from `j` to `m`:
/// unit steps, no axis traversed in both directions, steps grouped by axis in
/// the given order, and length equal to `|j - m|_1`.
pub fn validate_path(
    path: &LatticePath,
    j: &LatticePoint,
    m: &LatticePoint,
    order: &[usize],
) -> std::result::Result<(), String> {
    let pts = path.points();
    if pts.first() != Some(j) || pts.last() != Some(m) {
        return Err(format!("path does not run from {j} to {m}"));
    }
    let d = j.dim();
    let mut rank = vec![usize::MAX; d];
    for (r, &q) in order.iter().enumerate() {
        if q >= d || rank[q] != usize::MAX {
            return Err(format!("{order:?} is not an axis order for d = {d}"));
        }
        rank[q] = r;
    }
    let mut dir = vec![0i64; d];
    let mut last_rank = 0;
    for (t, w) in pts.windows(2).enumerate() {
        if !w[0].is_neighbor(&w[1]) {
            return Err(format!("step {t} from {} to {} is not a unit step", w[0], w[1]));
        }
        let (q, step) = w[0]
            .coords()
            .iter()
            .zip(w[1].coords())
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(q, (a, b))| (q, b - a))
            .expect("neighbors differ in one coordinate");
        if dir[q] == -step {
            return Err(format!("axis {} is traversed in both directions", q + 1));
        }
        dir[q] = step;
        if rank[q] < last_rank {
            return Err(format!("step {t} along axis {} breaks the axis order", q + 1));
        }
        last_rank = rank[q];
    }
    let l1 = j.sub(m).norm_l1() as usize;
    if path.len() != l1 {
        return Err(format!("length {} differs from |j - m|_1 = {l1}", path.len()));
    }
    Ok(())
}

/// Which shifted paths a census follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftSelection {
    Single(usize),
    All,
}

impl fmt::Display for ShiftSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftSelection::Single(b) => write!(f, "{b}"),
            ShiftSelection::All => f.write_str("ALL"),
        }
    }
}

impl std::str::FromStr for ShiftSelection {
    type Err = HardyError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(ShiftSelection::All);
        }
        s.parse()
            .map(ShiftSelection::Single)
            .map_err(|_| HardyError::InvalidArgument(format!("shift must be an index or ALL, got {s:?}")))
    }
}

/// `2^((d+1)n) 2^(k(d-pos+1))` pairs can use an edge along the axis at
/// 1-based position `pos` of the axis order.
pub fn axis_edge_bound(n: u32, k: u32, d: usize, pos: usize) -> u128 {
    1u128 << ((d as u32 + 1) * n + k * (d - pos + 1) as u32)
}

/// `2^((d+1)n) 2^(kd)`, the bound for any single axis order.
pub fn edge_bound(n: u32, k: u32, d: usize) -> u128 {
    axis_edge_bound(n, k, d, 1)
}

/// Usage maxima of one shifted family of paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftCensus {
    pub beta: usize,
    pub max_count: u64,
    pub bound: u128,
    /// Maximum count and bound per axis (0-based), in axis index order.
    pub axis_max: Vec<u64>,
    pub axis_bound: Vec<u128>,
    #[serde(skip)]
    counts: Vec<u64>,
}

/// Exact directed-edge usage counts for all pairs in `A_n x A_{n+k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: u32,
    pub k: u32,
    pub d: usize,
    pub shift: String,
    pub pairs: u128,
    pub shifts: Vec<ShiftCensus>,
    /// Maximum over edges of the count summed over the selected shifts.
    pub max_count: u64,
    /// `2^((d+1)n) 2^(kd)` for one shift, twice that for all shifts.
    pub bound: u128,
    /// Path vertices (with multiplicity) outside the annuli `A_n, ..., A_{n+k}`.
    /// Nonzero for `d >= 2`: a path may pass close to the origin, for
    /// instance from `(1,0)` to `(0,2)` through `(0,0)`.
    pub stray_vertices: u64,
    #[serde(skip)]
    side: usize,
}

impl CensusReport {
    /// Whether every count respects its per-axis, per-shift and combined bound.
    pub fn within_bounds(&self) -> bool {
        (self.max_count as u128) <= self.bound
            && self.shifts.iter().all(|s| {
                (s.max_count as u128) <= s.bound
                    && s.axis_max.iter().zip(&s.axis_bound).all(|(&c, &b)| c as u128 <= b)
            })
    }

    /// Whether every path stayed inside the annuli `A_n, ..., A_{n+k}`.
    pub fn vertex_containment_holds(&self) -> bool {
        self.stray_vertices == 0
    }

    fn combined(&self, slot: usize) -> u64 {
        self.shifts.iter().map(|s| s.counts[slot]).sum()
    }

    /// Writes every used edge as `from,to,axis,count,bound`, where count is
    /// summed over the selected shifts and axes are 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "from,to,axis,count,bound")?;
        let d = self.d;
        let mut x = vec![0i64; d];
        for slot in 0..self.shifts.first().map_or(0, |s| s.counts.len()) {
            let count = self.combined(slot);
            if count == 0 {
                continue;
            }
            let (mut idx, dir) = (slot / 2, slot % 2);
            let q = idx % d;
            idx /= d;
            for c in x.iter_mut().rev() {
                *c = (idx % self.side) as i64;
                idx /= self.side;
            }
            let from = LatticePoint::new(x.clone());
            let mut y = x.clone();
            y[q] += if dir == 1 { 1 } else { -1 };
            let to = LatticePoint::new(y);
            writeln!(
                out,
                "\"{from}\",\"{to}\",{},{count},{}",
                q + 1,
                self.bound
            )?;
        }
        Ok(())
    }
}

/// Counts, for every directed edge, the pairs `(j, m)` in `A_n x A_{n+k}`
/// whose shifted path traverses it.
pub fn edge_usage_census(n: u32, k: u32, d: usize, shift: ShiftSelection) -> Result<CensusReport> {
    edge_usage_census_with_budget(n, k, d, shift, DEFAULT_POINT_BUDGET)
}

pub fn edge_usage_census_with_budget(
    n: u32,
    k: u32,
    d: usize,
    shift: ShiftSelection,
    budget: u64,
) -> Result<CensusReport> {
    if n == 0 || k == 0 || d == 0 {
        return Err(HardyError::InvalidArgument(format!(
            "census needs n, k, d >= 1, got n = {n}, k = {k}, d = {d}"
        )));
    }
    let betas: Vec<usize> = match shift {
        ShiftSelection::Single(b) if b < d => vec![b],
        ShiftSelection::Single(b) => {
            return Err(HardyError::OutOfRange(format!(
                "shift index {b} must be below d = {d}"
            )))
        }
        ShiftSelection::All => (0..d).collect(),
    };
    let pairs = Annulus::new(n, d).count() * Annulus::new(n + k, d).count();
    let top = (n + k) as u64 * d as u64;
    if pairs > budget as u128 || top >= 40 {
        return Err(HardyError::Capacity {
            requested: pairs.max(1u128 << top.min(127)),
            budget,
        });
    }
    let side = 1usize << (n + k);
    let cells = side.pow(d as u32);
    let mut stride = vec![1usize; d];
    for q in (0..d.saturating_sub(1)).rev() {
        stride[q] = stride[q + 1] * side;
    }
    let level: Vec<u8> = (0..cells)
        .map(|mut idx| {
            let mut r = 0u64;
            for _ in 0..d {
                r = r.max((idx % side) as u64);
                idx /= side;
            }
            annulus_level(r) as u8
        })
        .collect();
    let inner = annulus_points(n, d)?;
    let outer = annulus_points(n + k, d)?;
    let index = |x: &[i64]| x.iter().zip(&stride).map(|(&c, &s)| c as usize * s).sum::<usize>();

    let mut shifts = Vec::with_capacity(betas.len());
    let mut stray_total = 0u64;
    for &beta in &betas {
        let order = axis_order(d, beta);
        let slots = cells * d * 2;
        let (counts, stray) = inner
            .par_iter()
            .fold(
                || (vec![0u64; slots], 0u64),
                |(mut counts, mut stray), j| {
                    for m in &outer {
                        let mut idx = index(j.coords());
                        let mut x = j.coords().to_vec();
                        for &q in &order {
                            let target = m.coords()[q];
                            let up = target > x[q];
                            while x[q] != target {
                                counts[(idx * d + q) * 2 + up as usize] += 1;
                                if up {
                                    x[q] += 1;
                                    idx += stride[q];
                                } else {
                                    x[q] -= 1;
                                    idx -= stride[q];
                                }
                                let lv = level[idx] as u32;
                                if lv < n || lv > n + k {
                                    stray += 1;
                                }
                            }
                        }
                    }
                    (counts, stray)
                },
            )
            .reduce(
                || (vec![0u64; slots], 0u64),
                |(mut a, sa), (b, sb)| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += y;
                    }
                    (a, sa + sb)
                },
            );
        stray_total += stray;
        let mut axis_max = vec![0u64; d];
        for (slot, &c) in counts.iter().enumerate() {
            let q = (slot / 2) % d;
            axis_max[q] = axis_max[q].max(c);
        }
        let axis_bound = (0..d)
            .map(|q| {
                let pos = order.iter().position(|&a| a == q).expect("axis in order") + 1;
                axis_edge_bound(n, k, d, pos)
            })
            .collect();
        shifts.push(ShiftCensus {
            beta,
            max_count: axis_max.iter().copied().max().unwrap_or(0),
            bound: edge_bound(n, k, d),
            axis_max,
            axis_bound,
            counts,
        });
    }
    let mut report = CensusReport {
        n,
        k,
        d,
        shift: shift.to_string(),
        pairs,
        shifts,
        max_count: 0,
        bound: edge_bound(n, k, d) * if shift == ShiftSelection::All { 2 } else { 1 },
        stray_vertices: stray_total,
        side,
    };
    let slots = cells * d * 2;
    report.max_count = (0..slots).map(|s| report.combined(s)).max().unwrap_or(0);
    Ok(report)
}
