//! Lattice points, support boxes, dyadic annuli and sphere shells.
//!
//! All enumerations are lexicographic with the first coordinate most
//! significant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result, DEFAULT_POINT_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice points need at least one coordinate");
        LatticePoint(coords)
    }

    pub fn origin(d: usize) -> Self {
        LatticePoint::new(vec![0; d])
    }

    /// Unit vector along axis `q` (zero-based).
    pub fn unit(d: usize, q: usize) -> Self {
        let mut c = vec![0; d];
        c[q] = 1;
        LatticePoint::new(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm_inf(&self) -> u64 {
        norm_inf(&self.0)
    }

    pub fn norm_l1(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    /// Euclidean norm.
    pub fn norm_l2(&self) -> f64 {
        self.norm_p(2.0)
    }

    pub fn norm_p(&self, p: f64) -> f64 {
        self.0
            .iter()
            .map(|&c| (c.unsigned_abs() as f64).powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Neighbours in the sense of Euclidean distance exactly one.
    pub fn is_neighbor(&self, other: &LatticePoint) -> bool {
        self.sub(other).norm_l1() == 1
    }

    /// Cyclic shift `(x1, .., xd) -> (x2, .., xd, x1)` applied `times` times.
    pub fn shift(&self, times: usize) -> LatticePoint {
        let mut c = self.0.clone();
        let d = c.len();
        c.rotate_left(times % d);
        LatticePoint(c)
    }

    /// Inverse of [`LatticePoint::shift`].
    pub fn unshift(&self, times: usize) -> LatticePoint {
        let mut c = self.0.clone();
        let d = c.len();
        c.rotate_right(times % d);
        LatticePoint(c)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint::new(v)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn norm_inf(c: &[i64]) -> u64 {
    c.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
}

/// Which lattice a function lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    /// The nonnegative orthant `Z_+^d`.
    Nonnegative,
    /// The full lattice `Z^d`.
    Full,
}

impl LatticeKind {
    pub fn contains(self, coords: &[i64]) -> bool {
        match self {
            LatticeKind::Nonnegative => coords.iter().all(|&c| c >= 0),
            LatticeKind::Full => true,
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Nonnegative => "nonnegative",
            LatticeKind::Full => "full",
        })
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = HardyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nonnegative" | "z+" | "zplus" | "half" => Ok(LatticeKind::Nonnegative),
            "full" | "z" => Ok(LatticeKind::Full),
            _ => Err(HardyError::InvalidArgument(format!("unknown lattice {s:?}"))),
        }
    }
}

/// A lattice together with the support box `[0,N]^d` or `[-N,N]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    pub kind: LatticeKind,
    pub dim: usize,
    pub radius: u64,
}

impl Domain {
    pub fn new(kind: LatticeKind, dim: usize, radius: u64) -> Result<Self> {
        Self::with_budget(kind, dim, radius, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(kind: LatticeKind, dim: usize, radius: u64, budget: u64) -> Result<Self> {
        if dim == 0 {
            return Err(HardyError::InvalidArgument("dimension must be at least 1".into()));
        }
        if radius > (1 << 31) {
            return Err(HardyError::OutOfRange(format!("radius {radius} exceeds 2^31")));
        }
        let dom = Domain { kind, dim, radius };
        let requested = dom.point_count_u128();
        if requested > budget as u128 {
            return Err(HardyError::Capacity { requested, budget });
        }
        Ok(dom)
    }

    pub fn nonnegative(dim: usize, radius: u64) -> Result<Self> {
        Self::new(LatticeKind::Nonnegative, dim, radius)
    }

    pub fn full(dim: usize, radius: u64) -> Result<Self> {
        Self::new(LatticeKind::Full, dim, radius)
    }

    /// The same lattice with the box radius grown by `margin`.
    pub fn enlarged(&self, margin: u64) -> Result<Self> {
        Self::new(self.kind, self.dim, self.radius + margin)
    }

    /// Smallest coordinate in the box.
    pub fn low(&self) -> i64 {
        match self.kind {
            LatticeKind::Nonnegative => 0,
            LatticeKind::Full => -(self.radius as i64),
        }
    }

    pub fn side(&self) -> usize {
        match self.kind {
            LatticeKind::Nonnegative => self.radius as usize + 1,
            LatticeKind::Full => 2 * self.radius as usize + 1,
        }
    }

    fn point_count_u128(&self) -> u128 {
        let side = match self.kind {
            LatticeKind::Nonnegative => self.radius as u128 + 1,
            LatticeKind::Full => 2 * self.radius as u128 + 1,
        };
        let mut n: u128 = 1;
        for _ in 0..self.dim {
            n = n.saturating_mul(side);
        }
        n
    }

    /// Number of points in the box.
    pub fn len(&self) -> usize {
        self.point_count_u128() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn in_box(&self, coords: &[i64]) -> bool {
        let lo = self.low();
        let hi = self.radius as i64;
        coords.iter().all(|&c| c >= lo && c <= hi)
    }

    pub fn in_lattice(&self, coords: &[i64]) -> bool {
        self.kind.contains(coords)
    }

    /// Lexicographic index of a point, or `None` outside the box.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        debug_assert_eq!(coords.len(), self.dim);
        let lo = self.low();
        let hi = self.radius as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in coords {
            if c < lo || c > hi {
                return None;
            }
            idx = idx * side + (c - lo) as usize;
        }
        Some(idx)
    }

    /// Writes the coordinates of the point with index `idx` into `out`.
    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        let side = self.side();
        let lo = self.low();
        for q in (0..self.dim).rev() {
            out[q] = (idx % side) as i64 + lo;
            idx /= side;
        }
    }

    pub fn point_at(&self, idx: usize) -> LatticePoint {
        let mut c = vec![0; self.dim];
        self.coords_into(idx, &mut c);
        LatticePoint::new(c)
    }

    pub fn origin_index(&self) -> usize {
        self.index_of(&vec![0; self.dim]).expect("origin lies in every box")
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    /// Sup-norm of every point, indexed like the box.
    pub fn sup_norms(&self) -> Vec<u64> {
        let mut c = vec![0; self.dim];
        (0..self.len())
            .map(|i| {
                self.coords_into(i, &mut c);
                norm_inf(&c)
            })
            .collect()
    }
}

/// Dyadic annulus level of a point with the given sup-norm: 0 for the origin,
/// otherwise the `n` with `2^(n-1) <= norm <= 2^n - 1`.
pub fn annulus_level(norm_inf: u64) -> u32 {
    64 - norm_inf.leading_zeros()
}

/// The dyadic annulus `A_n` in `Z_+^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Annulus {
    pub level: u32,
    pub dim: usize,
}

impl Annulus {
    pub fn new(level: u32, dim: usize) -> Self {
        Annulus { level, dim }
    }

    /// Closed-form cardinality, `1` for the origin and `2^(nd)(1 - 2^-d)` otherwise.
    pub fn count(&self) -> u128 {
        if self.level == 0 {
            return 1;
        }
        let outer = 1u128 << (self.level as usize * self.dim);
        let inner = 1u128 << ((self.level as usize - 1) * self.dim);
        outer - inner
    }

    /// Cardinality as a float; exact for all levels that fit the exponent range.
    pub fn count_f64(&self) -> f64 {
        if self.level == 0 {
            return 1.0;
        }
        let nd = (self.level as usize * self.dim) as i32;
        2f64.powi(nd) * (1.0 - 2f64.powi(-(self.dim as i32)))
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim
            && LatticeKind::Nonnegative.contains(p.coords())
            && annulus_level(p.norm_inf()) == self.level
    }

    pub fn points(&self) -> Result<Vec<LatticePoint>> {
        annulus_points_with_budget(self.level, self.dim, DEFAULT_POINT_BUDGET)
    }
}

/// Points of `A_n` in lexicographic order.
pub fn annulus_points(n: u32, d: usize) -> Result<Vec<LatticePoint>> {
    annulus_points_with_budget(n, d, DEFAULT_POINT_BUDGET)
}

pub fn annulus_points_with_budget(n: u32, d: usize, budget: u64) -> Result<Vec<LatticePoint>> {
    if d == 0 {
        return Err(HardyError::InvalidArgument("dimension must be at least 1".into()));
    }
    if n == 0 {
        return Ok(vec![LatticePoint::origin(d)]);
    }
    let side_bits = n as usize;
    if side_bits * d > 126 {
        return Err(HardyError::Capacity {
            requested: u128::MAX,
            budget,
        });
    }
    let requested = 1u128 << (side_bits * d);
    if requested > budget as u128 {
        return Err(HardyError::Capacity { requested, budget });
    }
    let radius = (1u64 << n) - 1;
    let lower = 1u64 << (n - 1);
    let dom = Domain::with_budget(LatticeKind::Nonnegative, d, radius, budget)?;
    let mut c = vec![0; d];
    let mut out = Vec::with_capacity(Annulus::new(n, d).count() as usize);
    for i in 0..dom.len() {
        dom.coords_into(i, &mut c);
        if norm_inf(&c) >= lower {
            out.push(LatticePoint::new(c.clone()));
        }
    }
    Ok(out)
}

/// The sphere `S_k = {x in Z_+^d : |x|_inf = k}` split into the face set `W_k`
/// (exactly one coordinate equals `k`) and the remaining corner points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shell {
    pub level: u64,
    pub dim: usize,
}

impl Shell {
    pub fn new(level: u64, dim: usize) -> Self {
        Shell { level, dim }
    }

    /// `#W_k = d k^(d-1)`.
    pub fn face_count(&self) -> u128 {
        let k = self.level as u128;
        self.dim as u128 * k.pow(self.dim as u32 - 1)
    }

    /// `#(S_k \ W_k) = (k+1)^d - k^d - d k^(d-1)`.
    pub fn corner_count(&self) -> u128 {
        let k = self.level as u128;
        let d = self.dim as u32;
        (k + 1).pow(d) - k.pow(d) - self.face_count()
    }

    pub fn sphere_count(&self) -> u128 {
        let k = self.level as u128;
        let d = self.dim as u32;
        (k + 1).pow(d) - k.pow(d)
    }
}

/// Splits `S_k` into `(W_k, S_k \ W_k)`, both in lexicographic order.
pub fn sphere_decomposition(k: u64, d: usize) -> Result<(Vec<LatticePoint>, Vec<LatticePoint>)> {
    sphere_decomposition_with_budget(k, d, DEFAULT_POINT_BUDGET)
}

pub fn sphere_decomposition_with_budget(
    k: u64,
    d: usize,
    budget: u64,
) -> Result<(Vec<LatticePoint>, Vec<LatticePoint>)> {
    let dom = Domain::with_budget(LatticeKind::Nonnegative, d, k, budget)?;
    let kk = k as i64;
    let mut faces = Vec::new();
    let mut corners = Vec::new();
    let mut c = vec![0; d];
    for i in 0..dom.len() {
        dom.coords_into(i, &mut c);
        let hits = c.iter().filter(|&&x| x == kk).count();
        match hits {
            0 => {}
            1 => faces.push(LatticePoint::new(c.clone())),
            _ => corners.push(LatticePoint::new(c.clone())),
        }
    }
    Ok((faces, corners))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborVariant {
    AllLattice,
    ExcludeOrigin,
}

/// Lattice neighbours of `x` (not restricted to the support box), sorted.
pub fn neighbors(x: &LatticePoint, dom: &Domain, variant: NeighborVariant) -> Vec<LatticePoint> {
    let mut out = Vec::with_capacity(2 * x.dim());
    let mut c = x.coords().to_vec();
    for q in 0..x.dim() {
        for step in [-1i64, 1] {
            c[q] += step;
            let keep = dom.in_lattice(&c)
                && !(variant == NeighborVariant::ExcludeOrigin && c.iter().all(|&v| v == 0));
            if keep {
                out.push(LatticePoint::new(c.clone()));
            }
            c[q] -= step;
        }
    }
    out.sort();
    out
}
