//! Babai- and Voronoi-cell geometry: boundary profiles `u(x1)`, `l(x1)`,
//! interval thresholds/lengths/heights, the vertical offset family, and
//! rectangle-vs-Voronoi-cell intersection areas.
//!
//! All coordinates are absolute (same units as lattice coordinates). The
//! geometry is always expressed for the cell of the lattice point at the
//! origin; every other cell is a lattice translate of it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dot, sub, Lattice2D, LatticePoint, Point, GEOM_TOL};

/// An axis-aligned rectangle `[x1_lo, x1_hi) x [x2_lo, x2_hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
}

impl Rect {
    pub fn new(x1_lo: f64, x1_hi: f64, x2_lo: f64, x2_hi: f64) -> Self {
        Self {
            x1_lo,
            x1_hi,
            x2_lo,
            x2_hi,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1_hi - self.x1_lo
    }

    pub fn height(&self) -> f64 {
        self.x2_hi - self.x2_lo
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        [
            (self.x1_lo + self.x1_hi) / 2.0,
            (self.x2_lo + self.x2_hi) / 2.0,
        ]
    }

    pub fn contains(&self, x: Point) -> bool {
        x[0] >= self.x1_lo && x[0] < self.x1_hi && x[1] >= self.x2_lo && x[1] < self.x2_hi
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            [self.x1_lo, self.x2_lo],
            [self.x1_hi, self.x2_lo],
            [self.x1_hi, self.x2_hi],
            [self.x1_lo, self.x2_hi],
        ]
    }
}

/// A line `x2 = c + m * x1`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Line {
    pub c: f64,
    pub m: f64,
}

impl Line {
    pub fn at(&self, x1: f64) -> f64 {
        self.c + self.m * x1
    }

    /// Solves `x2 = c + m x1` for `x1`; caller guarantees `m != 0`.
    pub fn x1_at(&self, x2: f64) -> f64 {
        (x2 - self.c) / self.m
    }

    /// The same line expressed for the lattice column shifted by `k` basis
    /// steps horizontally: `B_k(x) = B_0(x - k alpha)`.
    fn shifted(&self, k: i64, alpha: f64) -> Line {
        Line {
            c: self.c - self.m * k as f64 * alpha,
            m: self.m,
        }
    }
}

/// The four slanted perpendicular bisectors bounding the origin's Voronoi
/// cell, for the column containing the origin:
/// `[upper-right B2, upper-left B3, lower-left B-2, lower-right B-3]`.
pub(crate) fn slant_bisectors(lat: &Lattice2D) -> [Line; 4] {
    let a = lat.alpha();
    let s = lat.skew();
    let rho = lat.rho();
    let h = lat.v22() / a; // rho sin(theta)
    let b2 = Line {
        c: a * rho * rho / (2.0 * h),
        m: -s / h,
    };
    let b3 = Line {
        c: a * (1.0 - 2.0 * s + rho * rho) / (2.0 * h),
        m: (1.0 - s) / h,
    };
    let bm2 = Line { c: -b2.c, m: b2.m };
    let bm3 = Line { c: -b3.c, m: b3.m };
    [b2, b3, bm2, bm3]
}

/// Height at which the slanted boundaries meet the vertical cell walls:
/// `alpha (rho^2 - rho cos theta) / (2 rho sin theta)`. The error-free band of
/// the zero-offset cell is `|x2| < tau`.
pub(crate) fn slant_exit_height(lat: &Lattice2D) -> f64 {
    let h = lat.v22() / lat.alpha();
    lat.alpha() * (lat.rho() * lat.rho() - lat.skew()) / (2.0 * h)
}

/// Offset of the rectangular partition relative to the lattice.
///
/// The partition (not the lattice) is translated by `x0`, restricted to the
/// fundamental rectangle `[-v11/2, v11/2) x [-v22/2, v22/2)`. Vertical offsets
/// with `d1` in `(0, alpha rho cos theta]` form the analyzed family; for those
/// the corner cut widths `d1..d4` are available.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetSpec {
    x0: Point,
    d: Option<[f64; 4]>,
    l0: f64,
}

impl OffsetSpec {
    /// The untranslated partition. Corresponds to `d1 = alpha rho cos(theta) / 2`.
    pub fn zero(lat: &Lattice2D) -> Self {
        if lat.is_rectangular() {
            let a = lat.alpha();
            return Self {
                x0: [0.0, 0.0],
                d: Some([0.0, a / 2.0, 0.0, a / 2.0]),
                l0: 0.0,
            };
        }
        Self::from_d1(lat, lat.alpha() * lat.skew() / 2.0).expect("zero offset is always valid")
    }

    /// Builds the vertical offset with top-left corner cut `d1` and derives
    /// `d2, d3, d4` and the flat-band length `L0 = L - max(d1,d4) - max(d2,d3)`.
    ///
    /// `d1` is in absolute units with valid range `(0, alpha rho cos theta]`.
    /// For rectangular lattices only `d1 = 0` (the zero offset) is accepted.
    pub fn from_d1(lat: &Lattice2D, d1: f64) -> Result<Self> {
        let a = lat.alpha();
        let s = lat.skew();
        let max = a * s;
        if lat.is_rectangular() {
            return if d1 == 0.0 {
                Ok(Self::zero(lat))
            } else {
                Err(Error::D1OutOfRange { d1, max })
            };
        }
        if !d1.is_finite() || d1 <= 0.0 || d1 > max + 1e-12 {
            return Err(Error::D1OutOfRange { d1, max });
        }
        let d1 = d1.min(max);
        let h = lat.v22() / a; // rho sin(theta)
        let d2 = d1 * (1.0 - s) / s;
        let d3 = (max - d1).max(0.0);
        let d4 = d3 * (1.0 - s) / s;
        let x02 = (d1 - max / 2.0) * (1.0 - s) / h;
        let l0 = a - d1.max(d4) - d2.max(d3);
        Ok(Self {
            x0: [0.0, x02],
            d: Some([d1, d2, d3, d4]),
            l0,
        })
    }

    /// Builds an offset from an explicit translation vector in the fundamental
    /// rectangle. Vertical offsets inside the `d1` family get their `d`
    /// parameters derived; anything else is kept as a raw translation.
    pub fn from_vector(lat: &Lattice2D, x0: Point) -> Result<Self> {
        let (hw, hh) = (lat.v11() / 2.0, lat.v22() / 2.0);
        if !x0[0].is_finite()
            || !x0[1].is_finite()
            || x0[0] < -hw
            || x0[0] >= hw
            || x0[1] < -hh
            || x0[1] >= hh
        {
            return Err(Error::OffsetOutsideCell(x0[0], x0[1]));
        }
        let a = lat.alpha();
        let s = lat.skew();
        if x0[0].abs() <= 1e-12 * a {
            if lat.is_rectangular() {
                if x0[1].abs() <= 1e-12 * a {
                    return Ok(Self::zero(lat));
                }
            } else {
                let h = lat.v22() / a;
                let d1 = a * s / 2.0 + x0[1] * h / (1.0 - s);
                if d1 > 0.0 && d1 <= a * s + 1e-12 {
                    return Self::from_d1(lat, d1.min(a * s));
                }
            }
        }
        // Outside the d1 family: derive the flat-band length from the profile.
        let mut spec = Self {
            x0,
            d: None,
            l0: 0.0,
        };
        let profile = boundary_profile(lat, &spec);
        spec.l0 = flat_length(&profile);
        Ok(spec)
    }

    /// Translation vector of the partition.
    pub fn x0(&self) -> Point {
        self.x0
    }

    /// Corner cut widths `[d1, d2, d3, d4]` when the offset is in the vertical
    /// `d1` family.
    pub fn d(&self) -> Option<[f64; 4]> {
        self.d
    }

    pub fn d1(&self) -> Option<f64> {
        self.d.map(|d| d[0])
    }

    /// Flat-band length `L0` of the offset cell.
    pub fn l0(&self) -> f64 {
        self.l0
    }
}

/// One linear piece of a boundary profile over `[x1_lo, x1_hi)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProfileSegment {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub value_at_lo: f64,
    pub slope: f64,
}

impl ProfileSegment {
    pub fn value_at(&self, x1: f64) -> f64 {
        self.value_at_lo + self.slope * (x1 - self.x1_lo)
    }
}

/// Piecewise-linear upper and lower decision boundaries `u(x1)` and `l(x1)`
/// inside one (possibly offset) Babai cell. Where no slanted Voronoi boundary
/// crosses a column the segments carry the cell wall with slope 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
    pub upper: Vec<ProfileSegment>,
    pub lower: Vec<ProfileSegment>,
}

impl BoundaryProfile {
    fn segment_at(segments: &[ProfileSegment], x1: f64) -> &ProfileSegment {
        segments
            .iter()
            .find(|s| x1 < s.x1_hi)
            .unwrap_or_else(|| segments.last().expect("profile has segments"))
    }

    pub fn upper_at(&self, x1: f64) -> f64 {
        Self::segment_at(&self.upper, x1).value_at(x1)
    }

    pub fn lower_at(&self, x1: f64) -> f64 {
        Self::segment_at(&self.lower, x1).value_at(x1)
    }

    pub fn upper_slope_at(&self, x1: f64) -> f64 {
        Self::segment_at(&self.upper, x1).slope
    }

    pub fn lower_slope_at(&self, x1: f64) -> f64 {
        Self::segment_at(&self.lower, x1).slope
    }

    /// `|u'(x1)| + |l'(x1)|`.
    pub fn slope_sum_at(&self, x1: f64) -> f64 {
        self.upper_slope_at(x1).abs() + self.lower_slope_at(x1).abs()
    }

    /// Interior breakpoints of either boundary, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .upper
            .iter()
            .chain(self.lower.iter())
            .map(|s| s.x1_lo)
            .filter(|&x| x > self.x1_lo)
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        pts
    }
}

fn flat_length(profile: &BoundaryProfile) -> f64 {
    let mut pieces = vec![profile.x1_lo];
    pieces.extend(profile.breakpoints());
    pieces.push(profile.x1_hi);
    let mut total = 0.0;
    for w in pieces.windows(2) {
        let mid = (w[0] + w[1]) / 2.0;
        if profile.slope_sum_at(mid) == 0.0 {
            total += w[1] - w[0];
        }
    }
    total
}

/// Piecewise min (or max, for `upper = false`) envelope of `lines` over
/// `[a, b)`, appended to `out` as profile segments.
fn envelope(lines: &[Line], a: f64, b: f64, upper_is_min: bool, out: &mut Vec<ProfileSegment>) {
    let mut cuts = vec![a, b];
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let dm = lines[i].m - lines[j].m;
            if dm.abs() < 1e-15 {
                continue;
            }
            let x = (lines[j].c - lines[i].c) / dm;
            if x > a && x < b {
                cuts.push(x);
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-14);

    let mut last_choice: Option<usize> = None;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-14 {
            continue;
        }
        let mid = (lo + hi) / 2.0;
        let choice = (0..lines.len())
            .min_by(|&i, &j| {
                let (vi, vj) = (lines[i].at(mid), lines[j].at(mid));
                let ord = vi.partial_cmp(&vj).unwrap();
                if upper_is_min {
                    ord
                } else {
                    ord.reverse()
                }
            })
            .unwrap();
        if last_choice == Some(choice) {
            let seg = out.last_mut().unwrap();
            seg.x1_hi = hi;
        } else {
            out.push(ProfileSegment {
                x1_lo: lo,
                x1_hi: hi,
                value_at_lo: lines[choice].at(lo),
                slope: lines[choice].m,
            });
            last_choice = Some(choice);
        }
    }
}

/// Computes the decision-boundary profile of the offset cell around the
/// origin. For offsets with a horizontal component the profile is extended
/// periodically across vertical cell walls, so segments may be discontinuous
/// at wall positions.
pub fn boundary_profile(lat: &Lattice2D, offset: &OffsetSpec) -> BoundaryProfile {
    let a = lat.alpha();
    let x0 = offset.x0();
    let (x1_lo, x1_hi) = (x0[0] - a / 2.0, x0[0] + a / 2.0);
    let (x2_lo, x2_hi) = (x0[1] - lat.v22() / 2.0, x0[1] + lat.v22() / 2.0);
    let [b2, b3, bm2, bm3] = slant_bisectors(lat);

    // Split the x1 extent at vertical cell walls (only present when x01 != 0).
    let mut spans = vec![x1_lo];
    for k in [-1i64, 0, 1] {
        let wall = a * (k as f64 + 0.5);
        if wall > x1_lo + 1e-14 && wall < x1_hi - 1e-14 {
            spans.push(wall);
        }
    }
    spans.push(x1_hi);
    spans.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for w in spans.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let k = ((lo + hi) / 2.0 / a).round() as i64;
        let top = Line { c: x2_hi, m: 0.0 };
        let bottom = Line { c: x2_lo, m: 0.0 };
        envelope(
            &[b2.shifted(k, a), b3.shifted(k, a), top],
            lo,
            hi,
            true,
            &mut upper,
        );
        envelope(
            &[bm2.shifted(k, a), bm3.shifted(k, a), bottom],
            lo,
            hi,
            false,
            &mut lower,
        );
    }
    BoundaryProfile {
        x1_lo,
        x1_hi,
        x2_lo,
        x2_hi,
        upper,
        lower,
    }
}

/// A maximal run of the cell's x1 extent on which both boundary slopes are
/// constant.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GeomInterval {
    pub x1_lo: f64,
    pub x1_hi: f64,
    /// Signed slope of the upper boundary on the run (0 = cell wall).
    pub up_slope: f64,
    /// Signed slope of the lower boundary on the run.
    pub lo_slope: f64,
}

impl GeomInterval {
    pub fn length(&self) -> f64 {
        self.x1_hi - self.x1_lo
    }

    /// `|u'| + |l'|` on the run.
    pub fn slope_sum(&self) -> f64 {
        self.up_slope.abs() + self.lo_slope.abs()
    }

    /// Total vertical excursion of the slanted boundaries over the run (the
    /// interval height `H_j`).
    pub fn excursion(&self) -> f64 {
        self.length() * self.slope_sum()
    }
}

/// The five-interval layout of a cell in the vertical `d1` family, in index
/// order `-2, -1, 0, 1, 2` from left to right. Zero-length intervals are kept
/// so the closed forms at the parameter-region boundary stay representable.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StandardGeometry {
    /// `t_{-2} <= t_{-1} <= t_1 <= t_2` (absolute x1 coordinates).
    pub thresholds: [f64; 4],
    /// `L_{-2}, L_{-1}, L_0, L_1, L_2`; sums to the cell width.
    pub lengths: [f64; 5],
    /// `H_{-2}, H_{-1}, H_1, H_2`.
    pub heights: [f64; 4],
    /// The five column intervals with their boundary slopes.
    pub intervals: [GeomInterval; 5],
    /// `tau_{-1}, tau_1`: x2 thresholds of the three horizontal strips.
    pub strip_thresholds: [f64; 2],
    /// Heights of the strips `J_{-1}, J_0, J_1`; sums to the cell height.
    pub strip_heights: [f64; 3],
}

impl StandardGeometry {
    pub fn interval_index_of(&self, which: usize) -> i8 {
        which as i8 - 2
    }
}

/// Thresholds, interval lengths, boundary heights and strip structure of one
/// (possibly offset) Babai cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellGeometry {
    /// Cell width `L` (= v11).
    pub width: f64,
    /// Cell height `H` (= v22).
    pub height: f64,
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
    /// Constant-slope runs derived from the boundary profile (no zero-length
    /// entries).
    pub runs: Vec<GeomInterval>,
    /// Five-interval closed-form layout; present exactly for offsets in the
    /// vertical `d1` family (including the zero offset).
    pub standard: Option<StandardGeometry>,
}

impl CellGeometry {
    pub fn cell(&self) -> Rect {
        Rect::new(self.x1_lo, self.x1_hi, self.x2_lo, self.x2_hi)
    }

    /// Flat-band length: the closed-form `L0` for the `d1` family, otherwise
    /// the total length of zero-slope runs.
    pub fn l0(&self) -> f64 {
        match &self.standard {
            Some(std) => std.lengths[2],
            None => self
                .runs
                .iter()
                .filter(|r| r.slope_sum() == 0.0)
                .map(GeomInterval::length)
                .sum(),
        }
    }

    /// Fraction of the cell width on which no slanted boundary crosses a
    /// column; this is the probability of the error-free column symbol.
    pub fn flat_fraction(&self) -> f64 {
        self.runs
            .iter()
            .filter(|r| r.slope_sum() == 0.0)
            .map(GeomInterval::length)
            .sum::<f64>()
            / self.width
    }
}

/// Computes the cell geometry for a lattice and partition offset. Closed
/// forms are used inside the vertical `d1` family; otherwise thresholds are
/// recovered from the boundary profile.
pub fn cell_geometry(lat: &Lattice2D, offset: &OffsetSpec) -> CellGeometry {
    let profile = boundary_profile(lat, offset);
    let runs = runs_from_profile(&profile);
    let standard = offset.d().map(|d| standard_geometry(lat, offset, d));
    CellGeometry {
        width: lat.v11(),
        height: lat.v22(),
        x1_lo: profile.x1_lo,
        x1_hi: profile.x1_hi,
        x2_lo: profile.x2_lo,
        x2_hi: profile.x2_hi,
        runs,
        standard,
    }
}

fn runs_from_profile(profile: &BoundaryProfile) -> Vec<GeomInterval> {
    let mut pieces = vec![profile.x1_lo];
    pieces.extend(profile.breakpoints());
    pieces.push(profile.x1_hi);
    let mut runs: Vec<GeomInterval> = Vec::new();
    for w in pieces.windows(2) {
        if w[1] - w[0] < 1e-13 {
            continue;
        }
        let mid = (w[0] + w[1]) / 2.0;
        let up = profile.upper_slope_at(mid);
        let lo = profile.lower_slope_at(mid);
        match runs.last_mut() {
            Some(prev) if prev.up_slope == up && prev.lo_slope == lo => prev.x1_hi = w[1],
            _ => runs.push(GeomInterval {
                x1_lo: w[0],
                x1_hi: w[1],
                up_slope: up,
                lo_slope: lo,
            }),
        }
    }
    runs
}

fn standard_geometry(lat: &Lattice2D, offset: &OffsetSpec, d: [f64; 4]) -> StandardGeometry {
    let a = lat.alpha();
    let s = lat.skew();
    let h = lat.v22() / a; // rho sin(theta)
    let [d1, d2, d3, d4] = d;
    let x1_lo = offset.x0()[0] - a / 2.0;
    let x1_hi = offset.x0()[0] + a / 2.0;

    let mut t = [
        x1_lo + d1.min(d4),
        x1_lo + d1.max(d4),
        x1_hi - d2.max(d3),
        x1_hi - d2.min(d3),
    ];
    // Collapse float dust so coincident thresholds are exactly equal.
    if t[1] - t[0] < 1e-13 * a {
        let mid = 0.5 * (t[0] + t[1]);
        (t[0], t[1]) = (mid, mid);
    }
    if t[3] - t[2] < 1e-13 * a {
        let mid = 0.5 * (t[2] + t[3]);
        (t[2], t[3]) = (mid, mid);
    }
    let lengths = [
        t[0] - x1_lo,
        t[1] - t[0],
        t[2] - t[1],
        t[3] - t[2],
        x1_hi - t[3],
    ];

    let m_up_left = (1.0 - s) / h; // B3
    let m_lo_left = -s / h; // B-2
    let m_up_right = -s / h; // B2
    let m_lo_right = (1.0 - s) / h; // B-3

    let left_single = if d1 >= d4 {
        (m_up_left, 0.0)
    } else {
        (0.0, m_lo_left)
    };
    let right_single = if d2 >= d3 {
        (m_up_right, 0.0)
    } else {
        (0.0, m_lo_right)
    };

    let intervals = [
        GeomInterval {
            x1_lo,
            x1_hi: t[0],
            up_slope: m_up_left,
            lo_slope: m_lo_left,
        },
        GeomInterval {
            x1_lo: t[0],
            x1_hi: t[1],
            up_slope: left_single.0,
            lo_slope: left_single.1,
        },
        GeomInterval {
            x1_lo: t[1],
            x1_hi: t[2],
            up_slope: 0.0,
            lo_slope: 0.0,
        },
        GeomInterval {
            x1_lo: t[2],
            x1_hi: t[3],
            up_slope: right_single.0,
            lo_slope: right_single.1,
        },
        GeomInterval {
            x1_lo: t[3],
            x1_hi,
            up_slope: m_up_right,
            lo_slope: m_lo_right,
        },
    ];
    let heights = [
        intervals[0].excursion(),
        intervals[1].excursion(),
        intervals[3].excursion(),
        intervals[4].excursion(),
    ];

    let tau = slant_exit_height(lat);
    let h1 = d1 * (1.0 - s) / h;
    let hm1 = d3 * (1.0 - s) / h;
    StandardGeometry {
        thresholds: t,
        lengths,
        heights,
        intervals,
        strip_thresholds: [-tau, tau],
        strip_heights: [hm1, lat.v22() - h1 - hm1, h1],
    }
}

/// Area of `rect` intersected with the Voronoi cell of `y`, computed by
/// clipping the rectangle against the six half-planes of the cell. Vertices
/// closer than 1e-12 are merged.
pub fn rect_voronoi_area(lat: &Lattice2D, rect: &Rect, y: &LatticePoint) -> f64 {
    let mut poly: Vec<Point> = rect.corners().to_vec();
    let mut scratch: Vec<Point> = Vec::with_capacity(8);
    for r in lat.relevant_vectors() {
        let bound = dot(r, r) / 2.0 + dot(r, y.y);
        clip_halfplane(&poly, r, bound, &mut scratch);
        std::mem::swap(&mut poly, &mut scratch);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    polygon_area(&poly)
}

/// Keeps the part of `poly` with `normal . z <= bound`.
fn clip_halfplane(poly: &[Point], normal: Point, bound: f64, out: &mut Vec<Point>) {
    out.clear();
    let n = poly.len();
    for i in 0..n {
        let prev = poly[(i + n - 1) % n];
        let cur = poly[i];
        let d_prev = dot(normal, prev) - bound;
        let d_cur = dot(normal, cur) - bound;
        if d_prev <= 0.0 {
            out.push(prev);
        }
        if (d_prev < 0.0 && d_cur > 0.0) || (d_prev > 0.0 && d_cur < 0.0) {
            let t = d_prev / (d_prev - d_cur);
            let edge = sub(cur, prev);
            out.push([prev[0] + t * edge[0], prev[1] + t * edge[1]]);
        }
    }
}

fn polygon_area(poly: &[Point]) -> f64 {
    // Merge near-duplicate vertices before the shoelace sum.
    let mut verts: Vec<Point> = Vec::with_capacity(poly.len());
    for &p in poly {
        if let Some(&last) = verts.last() {
            let d = sub(p, last);
            if dot(d, d) < GEOM_TOL * GEOM_TOL {
                continue;
            }
        }
        verts.push(p);
    }
    while verts.len() > 1 {
        let d = sub(verts[0], *verts.last().unwrap());
        if dot(d, d) < GEOM_TOL * GEOM_TOL {
            verts.pop();
        } else {
            break;
        }
    }
    if verts.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..verts.len() {
        let p = verts[i];
        let q = verts[(i + 1) % verts.len()];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    twice.abs() / 2.0
}
