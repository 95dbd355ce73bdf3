//! Exact 2D lattice machinery: reduced-basis validation, Babai (nearest-plane)
//! decoding, exact closest-vector decoding, and Voronoi membership.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane, `[x1, x2]`.
pub type Point = [f64; 2];

/// Absolute tolerance on squared distances (and areas) for geometric
/// comparisons. Candidates within this tolerance of each other are treated as
/// tied and resolved by the lexicographic rule on coefficient vectors.
pub const GEOM_TOL: f64 = 1e-12;

/// Slack admitted when validating lattice parameters against the closed
/// constraint region; values this close to a bound are clamped onto it.
const PARAM_TOL: f64 = 1e-9;

fn round_half_up(z: f64) -> f64 {
    (z + 0.5).floor()
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// A 2D lattice with upper-triangular generator matrix
///
/// ```text
///     alpha * | 1   rho cos(theta) |
///             | 0   rho sin(theta) |
/// ```
///
/// whose columns are the basis vectors. The parameterization is kept in the
/// reduced region `rho >= 1`, `0 <= rho cos(theta) <= 1/2` (closed interval;
/// the endpoints are the rectangular and hexagonal-like boundary cases), which
/// guarantees that the six relevant vectors listed by [`Self::relevant_vectors`]
/// determine the Voronoi cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice2D {
    rho: f64,
    theta: f64,
    alpha: f64,
    /// rho*cos(theta), clamped into [0, 1/2].
    skew: f64,
    /// rho*sin(theta).
    rho_sin: f64,
}

impl Lattice2D {
    /// Builds and validates a lattice. Rejects parameters outside the reduced
    /// region, identifying the violated constraint.
    pub fn new(rho: f64, theta: f64, alpha: f64) -> Result<Self> {
        if !rho.is_finite() || !theta.is_finite() || !alpha.is_finite() {
            return Err(Error::NonFiniteParameter);
        }
        if alpha <= 0.0 {
            return Err(Error::BadScale(alpha));
        }
        if rho < 1.0 - PARAM_TOL {
            return Err(Error::RhoTooSmall(rho));
        }
        if theta <= 0.0 || theta >= std::f64::consts::PI {
            return Err(Error::ThetaOutOfRange(theta));
        }
        let rho = rho.max(1.0);
        let mut skew = rho * theta.cos();
        if !(-PARAM_TOL..=0.5 + PARAM_TOL).contains(&skew) {
            return Err(Error::SkewOutOfRange(skew));
        }
        // Snap onto the closed endpoints so the rectangular and hexagonal
        // boundary cases are exact.
        if skew.abs() <= PARAM_TOL {
            skew = 0.0;
        } else if (skew - 0.5).abs() <= PARAM_TOL {
            skew = 0.5;
        }
        Ok(Self {
            rho,
            theta,
            alpha,
            skew,
            rho_sin: rho * theta.sin(),
        })
    }

    /// Hexagonal lattice: `(rho, theta) = (1, pi/3)`, the `rho cos(theta) = 1/2`
    /// boundary case.
    pub fn hexagonal(alpha: f64) -> Self {
        Self::new(1.0, std::f64::consts::FRAC_PI_3, alpha).expect("hexagonal parameters are valid")
    }

    /// Square lattice `alpha * Z^2`: `(rho, theta) = (1, pi/2)`.
    pub fn square(alpha: f64) -> Self {
        Self::new(1.0, std::f64::consts::FRAC_PI_2, alpha).expect("square parameters are valid")
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `rho cos(theta)`, the skew of the basis (dimensionless, in [0, 1/2]).
    pub fn skew(&self) -> f64 {
        self.skew
    }

    /// Generator matrix entry v11 = alpha.
    pub fn v11(&self) -> f64 {
        self.alpha
    }

    /// Generator matrix entry v12 = alpha rho cos(theta).
    pub fn v12(&self) -> f64 {
        self.alpha * self.skew
    }

    /// Generator matrix entry v22 = alpha rho sin(theta).
    pub fn v22(&self) -> f64 {
        self.alpha * self.rho_sin
    }

    /// Width of the Babai cell (= v11).
    pub fn cell_width(&self) -> f64 {
        self.v11()
    }

    /// Height of the Babai cell (= v22).
    pub fn cell_height(&self) -> f64 {
        self.v22()
    }

    /// True when the Babai and Voronoi partitions coincide (rho cos theta = 0).
    pub fn is_rectangular(&self) -> bool {
        self.skew == 0.0
    }

    /// The lattice point with coefficient vector `u`.
    pub fn point(&self, u: [i64; 2]) -> LatticePoint {
        let y = [
            self.v11() * u[0] as f64 + self.v12() * u[1] as f64,
            self.v22() * u[1] as f64,
        ];
        LatticePoint { u, y }
    }

    /// The six vectors whose perpendicular bisectors carry the faces of the
    /// Voronoi cell: `±(1,0)`, `±(ρcosθ, ρsinθ)`, `±(ρcosθ−1, ρsinθ)`, scaled
    /// by alpha. Duplicate-norm vectors at the region boundary are still all
    /// returned.
    pub fn relevant_vectors(&self) -> [Point; 6] {
        let a = self.alpha;
        let s = self.skew;
        let h = self.rho_sin;
        [
            [a, 0.0],
            [-a, 0.0],
            [a * s, a * h],
            [-a * s, -a * h],
            [a * (s - 1.0), a * h],
            [a * (1.0 - s), -a * h],
        ]
    }

    /// Coefficient vectors of the relevant vectors, in the same order.
    pub fn relevant_coefficients(&self) -> [[i64; 2]; 6] {
        [[1, 0], [-1, 0], [0, 1], [0, -1], [-1, 1], [1, -1]]
    }

    /// Nearest-plane (Babai) decoding of `x` against the partition translated
    /// by `offset`: successive nearest-integer rounding of the coordinates of
    /// `x - offset`, back-substituting through the upper-triangular basis.
    /// Ties at half-integers round toward +inf, which makes the Babai cells
    /// exactly half-open rectangles.
    pub fn babai_decode(&self, x: Point, offset: Point) -> LatticePoint {
        let u2 = round_half_up((x[1] - offset[1]) / self.v22());
        let u1 = round_half_up((x[0] - offset[0] - self.v12() * u2) / self.v11());
        self.point([u1 as i64, u2 as i64])
    }

    /// Exact closest lattice point to `x` (Euclidean), searching the candidate
    /// window of +/-2 basis steps around the Babai point. Ties within
    /// [`GEOM_TOL`] on squared distance break toward the lexicographically
    /// smallest coefficient vector.
    pub fn nearest_point(&self, x: Point) -> LatticePoint {
        let anchor = self.babai_decode(x, [0.0, 0.0]);
        let mut best: Option<(f64, LatticePoint)> = None;
        for i in -2..=2i64 {
            for j in -2..=2i64 {
                let cand = self.point([anchor.u[0] + i, anchor.u[1] + j]);
                let d = sub(x, cand.y);
                let d2 = dot(d, d);
                match &best {
                    Some((bd2, _)) if d2 + GEOM_TOL >= *bd2 => {}
                    _ => best = Some((d2, cand)),
                }
            }
        }
        best.expect("candidate window is nonempty").1
    }

    /// Closed-cell Voronoi membership: true iff `x` is at least as close to
    /// `y` as to every relevant neighbor of `y`, within [`GEOM_TOL`].
    pub fn voronoi_contains(&self, x: Point, y: &LatticePoint) -> bool {
        let d = sub(x, y.y);
        self.relevant_vectors()
            .iter()
            .all(|r| 2.0 * dot(d, *r) <= dot(*r, *r) + GEOM_TOL)
    }
}

/// A lattice point together with its coefficient vector: `y = V u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    /// Integer coefficients.
    pub u: [i64; 2],
    /// Plane coordinates, exactly `V u`.
    pub y: Point,
}

impl LatticePoint {
    pub fn translate(&self, lat: &Lattice2D, du: [i64; 2]) -> LatticePoint {
        lat.point([self.u[0] + du[0], self.u[1] + du[1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_PI_5: f64 = 2.0 * std::f64::consts::PI / 5.0;

    /// Independent oracle: exhaustive argmin over |u1|,|u2| <= window with the
    /// same tie rule as the decoder.
    pub(crate) fn brute_force_nearest(lat: &Lattice2D, x: Point, window: i64) -> LatticePoint {
        let mut best: Option<(f64, LatticePoint)> = None;
        for u1 in -window..=window {
            for u2 in -window..=window {
                let cand = lat.point([u1, u2]);
                let d = sub(x, cand.y);
                let d2 = dot(d, d);
                match &best {
                    Some((bd2, _)) if d2 + GEOM_TOL >= *bd2 => {}
                    _ => best = Some((d2, cand)),
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn accepts_boundary_parameters() {
        let hex = Lattice2D::new(1.0, std::f64::consts::FRAC_PI_3, 1.0).unwrap();
        assert!((hex.skew() - 0.5).abs() < 1e-12);
        let square = Lattice2D::new(1.0, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert_eq!(square.skew(), 0.0);
        assert!(square.is_rectangular());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            Lattice2D::new(0.5, std::f64::consts::FRAC_PI_3, 1.0),
            Err(Error::RhoTooSmall(_))
        ));
        assert!(matches!(
            Lattice2D::new(1.0, 0.9, 1.0),
            Err(Error::SkewOutOfRange(_))
        ));
        assert!(matches!(
            Lattice2D::new(1.0, std::f64::consts::FRAC_PI_3, 0.0),
            Err(Error::BadScale(_))
        ));
        assert!(matches!(
            Lattice2D::new(1.0, -1.47, 1.0),
            Err(Error::ThetaOutOfRange(_))
        ));
        assert!(matches!(
            Lattice2D::new(f64::NAN, 1.0, 1.0),
            Err(Error::NonFiniteParameter)
        ));
    }

    #[test]
    fn relevant_vectors_match_closed_forms() {
        let hex = Lattice2D::hexagonal(1.0);
        let rv = hex.relevant_vectors();
        let expect = [
            [1.0, 0.0],
            [-1.0, 0.0],
            [0.5, 0.8660254037844386],
            [-0.5, -0.8660254037844386],
            [-0.5, 0.8660254037844386],
            [0.5, -0.8660254037844386],
        ];
        for (got, want) in rv.iter().zip(expect.iter()) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }

        let sq = Lattice2D::square(1.0);
        let rv = sq.relevant_vectors();
        assert_eq!(rv[2], [0.0, 1.0]);
        assert_eq!(rv[4], [-1.0, 1.0]);

        let lat = Lattice2D::new(1.0, TWO_PI_5, 1.0).unwrap();
        let rv = lat.relevant_vectors();
        assert!((rv[2][0] - 0.309017).abs() < 1e-6);
        assert!((rv[2][1] - 0.951057).abs() < 1e-6);
        assert!((rv[4][0] + 0.690983).abs() < 1e-6);
        assert!((rv[4][1] - 0.951057).abs() < 1e-6);
    }

    #[test]
    fn babai_decode_examples() {
        let hex = Lattice2D::hexagonal(1.0);
        // A lattice point decodes to itself.
        let y = hex.point([3, -2]);
        assert_eq!(hex.babai_decode(y.y, [0.0, 0.0]).u, [3, -2]);
        // u2 = [0.5774] = 1, u1 = [0.6 - 0.5] = 0.
        let p = hex.babai_decode([0.6, 0.5], [0.0, 0.0]);
        assert_eq!(p.u, [0, 1]);
        assert!((p.y[0] - 0.5).abs() < 1e-12 && (p.y[1] - 0.8660254037844386).abs() < 1e-12);
        // Babai point differs from the exact CVP answer here.
        let p = hex.babai_decode([0.45, 0.42], [0.0, 0.0]);
        assert_eq!(p.u, [0, 0]);
    }

    #[test]
    fn nearest_point_examples() {
        let hex = Lattice2D::hexagonal(1.0);
        assert_eq!(hex.nearest_point([0.0, 0.0]).u, [0, 0]);
        let p = hex.nearest_point([0.45, 0.42]);
        assert_eq!(p.u, [0, 1]);
        assert!((p.y[0] - 0.5).abs() < 1e-12 && (p.y[1] - 0.8660254037844386).abs() < 1e-12);
        assert_eq!(p.u, brute_force_nearest(&hex, [0.45, 0.42], 4).u);

        // Orthogonal basis: the partitions coincide.
        let sq = Lattice2D::square(1.0);
        for &x in &[[0.2, -0.7], [0.49, 0.49], [-1.3, 2.2]] {
            assert_eq!(sq.nearest_point(x).u, sq.babai_decode(x, [0.0, 0.0]).u);
        }
    }

    #[test]
    fn voronoi_contains_examples() {
        let hex = Lattice2D::hexagonal(1.0);
        let origin = hex.point([0, 0]);
        assert!(hex.voronoi_contains([0.0, 0.0], &origin));
        // Hexagon vertex at (0, 1/sqrt(3)); closed-cell convention keeps it in.
        assert!(hex.voronoi_contains([0.0, 0.577], &origin));
        assert!(hex.voronoi_contains([0.0, 1.0 / 3f64.sqrt()], &origin));
        assert!(!hex.voronoi_contains([0.45, 0.42], &origin));
    }

    #[test]
    fn oracle_equivalence_sampled() {
        let lattices = [
            Lattice2D::hexagonal(1.0),
            Lattice2D::square(1.0),
            Lattice2D::new(1.0, TWO_PI_5, 1.0).unwrap(),
            Lattice2D::new(1.2, 1.4, 1.0).unwrap(),
        ];
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for lat in &lattices {
            for _ in 0..2000 {
                let x = [6.0 * next() - 3.0, 6.0 * next() - 3.0];
                assert_eq!(
                    lat.nearest_point(x).u,
                    brute_force_nearest(lat, x, 6).u,
                    "x={x:?}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn babai_residual_in_fundamental_rectangle(
            x1 in -4.0..4.0f64,
            x2 in -4.0..4.0f64,
            o1 in -0.49..0.49f64,
            o2 in -0.4..0.4f64,
        ) {
            let lat = Lattice2D::new(1.0, TWO_PI_5, 1.0).unwrap();
            let offset = [o1, o2 * lat.v22()];
            let y = lat.babai_decode([x1, x2], offset);
            let r1 = x1 - y.y[0] - offset[0];
            let r2 = x2 - y.y[1] - offset[1];
            prop_assert!(r1 >= -lat.v11() / 2.0 - 1e-12 && r1 < lat.v11() / 2.0 + 1e-12);
            prop_assert!(r2 >= -lat.v22() / 2.0 - 1e-12 && r2 < lat.v22() / 2.0 + 1e-12);
        }

        #[test]
        fn nearest_point_lands_in_own_voronoi_cell(x1 in -3.0..3.0f64, x2 in -3.0..3.0f64) {
            for lat in [Lattice2D::hexagonal(1.0), Lattice2D::new(1.1, 1.3, 1.0).unwrap()] {
                let y = lat.nearest_point([x1, x2]);
                prop_assert!(lat.voronoi_contains([x1, x2], &y));
            }
        }

        #[test]
        fn decoders_are_equivariant(
            x1 in -1.0..1.0f64,
            x2 in -1.0..1.0f64,
            k1 in -3..3i64,
            k2 in -3..3i64,
        ) {
            let lat = Lattice2D::new(1.0, TWO_PI_5, 1.0).unwrap();
            let shift = lat.point([k1, k2]).y;
            let xs = [x1 + shift[0], x2 + shift[1]];

            let n0 = lat.nearest_point([x1, x2]);
            let ns = lat.nearest_point(xs);
            prop_assert_eq!(ns.u, [n0.u[0] + k1, n0.u[1] + k2]);

            let b0 = lat.babai_decode([x1, x2], [0.0, 0.0]);
            let bs = lat.babai_decode(xs, [0.0, 0.0]);
            prop_assert_eq!(bs.u, [b0.u[0] + k1, b0.u[1] + k2]);
        }

        #[test]
        fn decoders_are_scale_covariant(x1 in -2.0..2.0f64, x2 in -2.0..2.0f64) {
            let unit = Lattice2D::new(1.0, TWO_PI_5, 1.0).unwrap();
            let scaled = Lattice2D::new(1.0, TWO_PI_5, 0.0625).unwrap();
            let xs = [0.0625 * x1, 0.0625 * x2];
            prop_assert_eq!(scaled.nearest_point(xs).u, unit.nearest_point([x1, x2]).u);
            prop_assert_eq!(
                scaled.babai_decode(xs, [0.0, 0.0]).u,
                unit.babai_decode([x1, x2], [0.0, 0.0]).u
            );
        }
    }
}
