//! Integer lattice windows on `Z` and on the half-plane `x1 >= x2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MsaError, Result};

/// A lattice segment `[a, b] ∩ Z` with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    a: i64,
    b: i64,
}

impl Segment {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a > b {
            return Err(MsaError::InvalidSegment { a, b });
        }
        Ok(Self { a, b })
    }

    /// `[u - radius, u + radius]`.
    pub fn centered(u: i64, radius: i64) -> Result<Self> {
        if radius < 0 {
            return Err(MsaError::InvalidParameter(format!("negative radius {radius}")));
        }
        Self::new(u - radius, u + radius)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn len(&self) -> usize {
        (self.b - self.a + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_segment(&self, other: &Segment) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    pub fn intersects(&self, other: &Segment) -> bool {
        self.a <= other.b && other.a <= self.b
    }

    /// Lattice distance between the two point sets (0 when they overlap).
    pub fn gap(&self, other: &Segment) -> i64 {
        (other.a - self.b).max(self.a - other.b).max(0)
    }

    /// Smallest segment containing both.
    pub fn hull(&self, other: &Segment) -> Segment {
        Segment { a: self.a.min(other.a), b: self.b.max(other.b) }
    }

    /// `(center, radius)` when the segment has odd size.
    pub fn center_radius(&self) -> Option<(i64, i64)> {
        let w = self.b - self.a;
        (w % 2 == 0).then(|| (self.a + w / 2, w / 2))
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.a..=self.b
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// A site of `Z^2`; `x1` is the horizontal coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site2 {
    pub x1: i64,
    pub x2: i64,
}

impl Site2 {
    pub const fn new(x1: i64, x2: i64) -> Self {
        Self { x1, x2 }
    }

    pub fn in_half_plane(&self) -> bool {
        self.x1 >= self.x2
    }

    pub fn is_on_diagonal(&self) -> bool {
        self.x1 == self.x2
    }

    pub fn max_dist(&self, other: &Site2) -> i64 {
        (self.x1 - other.x1).abs().max((self.x2 - other.x2).abs())
    }

    pub fn euclid_dist(&self, other: &Site2) -> f64 {
        let d1 = (self.x1 - other.x1) as f64;
        let d2 = (self.x2 - other.x2) as f64;
        d1.hypot(d2)
    }

    /// The four lattice neighbours in the order left, right, down, up.
    pub fn neighbors(&self) -> [Site2; 4] {
        [
            Site2::new(self.x1 - 1, self.x2),
            Site2::new(self.x1 + 1, self.x2),
            Site2::new(self.x1, self.x2 - 1),
            Site2::new(self.x1, self.x2 + 1),
        ]
    }
}

impl fmt::Display for Site2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// `hseg × vseg`, optionally intersected with the half-plane `x1 >= x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubSquare {
    hseg: Segment,
    vseg: Segment,
    clip: bool,
}

impl SubSquare {
    pub fn new(hseg: Segment, vseg: Segment, clip: bool) -> Result<Self> {
        // Some x2 <= x1 exists iff the lowest row reaches the rightmost column.
        if clip && vseg.a > hseg.b {
            return Err(MsaError::EmptyWindow(format!("{hseg} x {vseg} clipped to x1 >= x2")));
        }
        Ok(Self { hseg, vseg, clip })
    }

    /// The clipped sub-square of radius `radius` around `center`.
    pub fn centered(center: Site2, radius: i64) -> Result<Self> {
        Self::new(
            Segment::centered(center.x1, radius)?,
            Segment::centered(center.x2, radius)?,
            true,
        )
    }

    pub fn hseg(&self) -> Segment {
        self.hseg
    }

    pub fn vseg(&self) -> Segment {
        self.vseg
    }

    pub fn clip(&self) -> bool {
        self.clip
    }

    /// True when clipping removes no site of the rectangle.
    pub fn is_rectangle(&self) -> bool {
        !self.clip || self.vseg.b <= self.hseg.a
    }

    /// Range of `x2` over the sites in column `x1`.
    pub fn column(&self, x1: i64) -> Option<Segment> {
        if !self.hseg.contains(x1) {
            return None;
        }
        let top = if self.clip { self.vseg.b.min(x1) } else { self.vseg.b };
        Segment::new(self.vseg.a, top).ok()
    }

    /// Range of `x1` over the sites in row `x2`.
    pub fn row(&self, x2: i64) -> Option<Segment> {
        if !self.vseg.contains(x2) {
            return None;
        }
        let left = if self.clip { self.hseg.a.max(x2) } else { self.hseg.a };
        Segment::new(left, self.hseg.b).ok()
    }

    pub fn contains(&self, s: Site2) -> bool {
        self.hseg.contains(s.x1) && self.vseg.contains(s.x2) && (!self.clip || s.x1 >= s.x2)
    }

    /// Sites in lexicographic `(x1, x2)` order.
    pub fn sites(&self) -> Vec<Site2> {
        let mut out = Vec::with_capacity(self.len());
        for x1 in self.hseg.iter() {
            if let Some(col) = self.column(x1) {
                out.extend(col.iter().map(|x2| Site2::new(x1, x2)));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.hseg
            .iter()
            .filter_map(|x1| self.column(x1))
            .map(|c| c.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Projections attained by the site set.
    pub fn projections(&self) -> (Segment, Segment) {
        (project(self, Axis::Horizontal), project(self, Axis::Vertical))
    }

    /// Smallest segment containing both projections; the potential values a
    /// two-particle operator on this window depends on.
    pub fn potential_hull(&self) -> Segment {
        let (i, j) = self.projections();
        i.hull(&j)
    }
}

impl fmt::Display for SubSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {}{}", self.hseg, self.vseg, if self.clip { " (clipped)" } else { "" })
    }
}

/// `{ z : 0 <= z1 - z2 <= d }`, where the interaction lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalStrip {
    pub d: u32,
}

impl DiagonalStrip {
    pub fn contains(&self, z: Site2) -> bool {
        let diff = z.x1 - z.x2;
        0 <= diff && diff <= i64::from(self.d)
    }
}

/// Coordinate projection attained by the sites of `sq`.
pub fn project(sq: &SubSquare, axis: Axis) -> Segment {
    let (h, v) = (sq.hseg, sq.vseg);
    match (axis, sq.clip) {
        (Axis::Horizontal, false) => h,
        (Axis::Vertical, false) => v,
        (Axis::Horizontal, true) => Segment { a: h.a.max(v.a), b: h.b },
        (Axis::Vertical, true) => Segment { a: v.a, b: v.b.min(h.b) },
    }
}

/// Max-norm set distance `min over pairs of max(|dx1|, |dx2|)`.
pub fn dist_inf(a: &SubSquare, b: &SubSquare) -> i64 {
    let (ia, ja) = a.projections();
    let (ib, jb) = b.projections();
    let lower = ia.gap(&ib).max(ja.gap(&jb));
    if a.is_rectangle() && b.is_rectangle() {
        return lower;
    }
    let mut best = i64::MAX;
    for s in ia.iter() {
        let Some(ca) = a.column(s) else { continue };
        for t in ib.iter() {
            let Some(cb) = b.column(t) else { continue };
            let d = (s - t).abs().max(ca.gap(&cb));
            if d < best {
                best = d;
                if best == lower {
                    return best;
                }
            }
        }
    }
    best
}

/// Strictly more than `8 L` apart in the max norm.
pub fn is_l_distant(a: &SubSquare, b: &SubSquare, l: i64) -> bool {
    dist_inf(a, b) > 8 * l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalKind {
    Diagonal,
    OffDiagonal,
}

pub fn classify_diagonal(sq: &SubSquare, strip: &DiagonalStrip) -> DiagonalKind {
    // x1 - x2 takes every integer value between its extremes over a rectangle.
    let mut lo = sq.hseg.a - sq.vseg.b;
    let hi = sq.hseg.b - sq.vseg.a;
    if sq.clip {
        lo = lo.max(0);
    }
    if lo.max(0) <= hi.min(i64::from(strip.d)) {
        DiagonalKind::Diagonal
    } else {
        DiagonalKind::OffDiagonal
    }
}

/// Inner vertex boundary: sites with at least one lattice neighbour outside.
pub fn boundary_sites(sq: &SubSquare) -> Vec<Site2> {
    sq.sites()
        .into_iter()
        .filter(|s| s.neighbors().iter().any(|n| !sq.contains(*n)))
        .collect()
}

/// How the four coordinate projections of a pair of windows separate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionCase {
    /// `(I1 ∪ J1) ∩ (I2 ∪ J2) = ∅`: the two potential samples are independent.
    AllDisjoint,
    /// One projection is disjoint from the other three.
    OneProjectionFree,
    None,
}

/// Classifies the projections `I1, J1` of `a` against `I2, J2` of `b`.
///
/// `AllDisjoint` takes precedence when both patterns hold.
pub fn projection_disjointness_case(a: &SubSquare, b: &SubSquare) -> ProjectionCase {
    let (i1, j1) = a.projections();
    let (i2, j2) = b.projections();
    let segs = [i1, j1, i2, j2];
    let cross_free = !i1.intersects(&i2)
        && !i1.intersects(&j2)
        && !j1.intersects(&i2)
        && !j1.intersects(&j2);
    if cross_free {
        return ProjectionCase::AllDisjoint;
    }
    let free = (0..4).any(|k| (0..4).filter(|&o| o != k).all(|o| !segs[k].intersects(&segs[o])));
    if free {
        ProjectionCase::OneProjectionFree
    } else {
        ProjectionCase::None
    }
}
