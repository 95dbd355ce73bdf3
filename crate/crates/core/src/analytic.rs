//! Closed-form evaluators: entropies, the Stage-I rate limit, single-round
//! rate/error analysis for both communication orders, optimal bin allocation,
//! and the infinite-round rate and round-count formulas.
//!
//! Every rate in this crate is measured in bits; logarithms are base 2
//! throughout. Degenerate subintervals contribute zero terms through the
//! `0 log 0 = 0` convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_profile, cell_geometry, slant_bisectors, slant_exit_height, BoundaryProfile,
    CellGeometry, OffsetSpec,
};
use crate::lattice::Lattice2D;
use crate::protocols::Order;

/// `-p log2 p`, with `0 log 0 = 0`.
fn h_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a (sub)probability vector.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    weights.iter().copied().map(h_term).sum()
}

/// A validated probability distribution over symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates nonnegativity and normalization to 1 within 1e-12.
    /// Weights within 1e-15 below zero are clamped to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let mut w = weights;
        for v in &mut w {
            if !v.is_finite() || *v < -1e-15 {
                return Err(Error::InvalidDistribution(format!("negative weight {v}")));
            }
            *v = v.max(0.0);
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Ok(Self(w))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.0)
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Shannon entropy (bits) of a distribution.
pub fn entropy(p: &Distribution) -> f64 {
    p.entropy()
}

/// Small-cell approximation to the Stage-I rate: `h1 + h2 - 2 log2(alpha)`,
/// valid as `alpha -> 0` for a unit-determinant basis. `h1`, `h2` are the
/// differential entropies (bits) of the two source coordinates.
pub fn stage1_rate_limit(alpha: f64, h1_bits: f64, h2_bits: f64) -> f64 {
    h1_bits + h2_bits - 2.0 * alpha.log2()
}

/// Error-density function for the uniform source: `(|u'(x1)| + |l'(x1)|) / (4H)`.
/// Piecewise constant; zero on the flat band.
pub fn gamma_fn(geom: &CellGeometry, profile: &BoundaryProfile, x1: f64) -> f64 {
    profile.slope_sum_at(x1) / (4.0 * geom.height)
}

fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, fa, m, fm, flm);
    let right = simpson(m, fm, b, fb, frm);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b - a <= 0.0 {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    simpson_step(
        f,
        a,
        fa,
        b,
        fb,
        m,
        fm,
        simpson(a, fa, b, fb, fm),
        1e-12_f64.max(tol),
        40,
    )
}

/// Integrates `f` over `[a, b]` forcing subdivision at the given interior
/// breakpoints (the integrands here are piecewise smooth with known kinks).
fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cuts: &[f64],
    tol: f64,
) -> f64 {
    let mut pts = vec![a];
    pts.extend(cuts.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let pieces = pts.len() - 1;
    pts.windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / pieces as f64))
        .sum()
}

/// Three-way vertical split distribution of one column: probabilities that
/// `X2` falls below `l(x1)`, between the boundaries, or above `u(x1)`.
pub fn column_split(profile: &BoundaryProfile, x1: f64) -> [f64; 3] {
    let h = profile.x2_hi - profile.x2_lo;
    let u = profile.upper_at(x1);
    let l = profile.lower_at(x1);
    [
        ((l - profile.x2_lo) / h).max(0.0),
        ((u - l) / h).max(0.0),
        ((profile.x2_hi - u) / h).max(0.0),
    ]
}

/// `E[H(Q(X1))]` in bits for the uniform source: the expected entropy of the
/// three-way split that node-2's horizontal cuts produce, in the fine-bin
/// limit. Evaluated by adaptive Simpson with forced subdivision at the
/// geometry breakpoints (absolute tolerance 1e-9).
pub fn expected_split_entropy_12(geom: &CellGeometry, profile: &BoundaryProfile) -> f64 {
    let f = |x1: f64| entropy_bits(&column_split(profile, x1));
    let cuts = profile.breakpoints();
    integrate_with_breakpoints(&f, profile.x1_lo, profile.x1_hi, &cuts, 1e-9) / geom.width
}

/// `E[H(P(X2))]` in bits for the uniform source: the 21-order mirror of
/// [`expected_split_entropy_12`], the expected entropy of node-1's vertical
/// three-way split. Requires an offset in the vertical `d1` family.
pub fn expected_split_entropy_21(lat: &Lattice2D, offset: &OffsetSpec) -> Result<f64> {
    offset.d().ok_or(Error::OffsetNotVertical)?;
    if lat.is_rectangular() {
        return Ok(0.0);
    }
    let a = lat.alpha();
    let (lo1, hi1) = (-a / 2.0, a / 2.0);
    let height = lat.v22();
    let tau = slant_exit_height(lat);
    let top = offset.x0()[1] + height / 2.0;
    let bottom = offset.x0()[1] - height / 2.0;
    let [b2, b3, bm2, bm3] = slant_bisectors(lat);

    let split = |left: f64, right: f64| {
        let left = left.clamp(lo1, hi1);
        let right = right.clamp(left, hi1);
        entropy_bits(&[(left - lo1) / a, (right - left) / a, (hi1 - right) / a])
    };
    let mut total = 0.0;
    if top > tau {
        let f = |x2: f64| split(b3.x1_at(x2), b2.x1_at(x2));
        total += adaptive_simpson(&f, tau, top, 1e-9);
    }
    if -tau > bottom {
        let f = |x2: f64| split(bm2.x1_at(x2), bm3.x1_at(x2));
        total += adaptive_simpson(&f, bottom, -tau, 1e-9);
    }
    Ok(total / height)
}

/// Relative threshold under which a subinterval is float dust rather than a
/// real part of the layout.
pub(crate) const DUST: f64 = 1e-12;

/// Column subintervals that carry a slanted boundary, as
/// `(index, length, excursion)` with index in `{-2, -1, 1, 2}`.
fn slanted_columns(geom: &CellGeometry) -> Result<Vec<(i8, f64, f64)>> {
    let std = geom.standard.as_ref().ok_or(Error::OffsetNotVertical)?;
    Ok(std
        .intervals
        .iter()
        .enumerate()
        .filter(|(_, iv)| iv.length() > DUST * geom.width && iv.excursion() > DUST * geom.height)
        .map(|(k, iv)| (k as i8 - 2, iv.length(), iv.excursion()))
        .collect())
}

/// Horizontal strips that carry a slanted boundary, as
/// `(index, height, x-sweep)` with index in `{-1, 1}`.
fn slanted_strips(
    lat: &Lattice2D,
    geom: &CellGeometry,
    offset: &OffsetSpec,
) -> Result<Vec<(i8, f64, f64)>> {
    let d = offset.d().ok_or(Error::OffsetNotVertical)?;
    let std = geom.standard.as_ref().ok_or(Error::OffsetNotVertical)?;
    let _ = lat;
    let mut out = Vec::new();
    if std.strip_heights[0] > DUST * geom.height {
        out.push((-1i8, std.strip_heights[0], d[2] + d[3]));
    }
    if std.strip_heights[2] > DUST * geom.height {
        out.push((1i8, std.strip_heights[2], d[0] + d[1]));
    }
    Ok(out)
}

/// Result of the fine-quantization optimal bin allocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BinAllocation {
    /// `(subinterval index, real-valued optimum, integer count >= 1)`.
    pub bins: Vec<(i8, f64, u64)>,
    /// Stage-II rate modeled with the real-valued optimum (the target).
    pub rate_real: f64,
    /// Stage-II rate modeled with the integer counts and the limiting split
    /// entropy.
    pub rate_integer: f64,
}

impl BinAllocation {
    pub fn to_bins(&self) -> Vec<(i8, u64)> {
        self.bins.iter().map(|&(j, _, n)| (j, n)).collect()
    }
}

/// Jensen-optimal bin allocation for the 12 order: real-valued counts
/// `N_j ∝ H_j` scaled so the modeled Stage-II rate equals `total_rate_ii`
/// bits, plus integer-rounded counts (each at least 1).
pub fn allocate_bins(
    geom: &CellGeometry,
    profile: &BoundaryProfile,
    total_rate_ii: f64,
) -> Result<BinAllocation> {
    let slanted = slanted_columns(geom)?;
    if slanted.is_empty() {
        return Err(Error::RectangularDegenerate);
    }
    let (l, h) = (geom.width, geom.height);
    let active: f64 = slanted.iter().map(|(_, len, _)| len / l).sum();
    let mut probs: Vec<f64> = slanted.iter().map(|(_, len, _)| len / l).collect();
    probs.push(1.0 - active);
    let hw = entropy_bits(&probs);
    let e_q = expected_split_entropy_12(geom, profile);
    let sum_log: f64 = slanted
        .iter()
        .map(|(_, len, exc)| (len / l) * (exc / h).log2())
        .sum();
    let log2_k = (total_rate_ii - hw - e_q - sum_log) / active;
    let bins: Vec<(i8, f64, u64)> = slanted
        .iter()
        .map(|&(j, _, exc)| {
            let real = log2_k.exp2() * exc / h;
            (j, real, real.round().max(1.0) as u64)
        })
        .collect();
    if bins.iter().any(|&(_, real, _)| real < 1.0 - 1e-9) {
        return Err(Error::RateTooSmall {
            rate: total_rate_ii,
        });
    }
    let rate_integer = hw
        + slanted
            .iter()
            .zip(&bins)
            .map(|(&(_, len, _), &(_, _, n))| (len / l) * (n as f64).log2())
            .sum::<f64>()
        + e_q;
    Ok(BinAllocation {
        bins,
        rate_real: total_rate_ii,
        rate_integer,
    })
}

/// Optimal bin allocation for the 21 order: counts for the two slanted
/// strips, `N_j ∝ (d-sweep of the strip)`, scaled to the target rate.
pub fn allocate_strip_bins(
    lat: &Lattice2D,
    geom: &CellGeometry,
    offset: &OffsetSpec,
    total_rate_ii: f64,
) -> Result<BinAllocation> {
    let strips = slanted_strips(lat, geom, offset)?;
    if strips.is_empty() {
        return Err(Error::RectangularDegenerate);
    }
    let (l, h) = (geom.width, geom.height);
    let active: f64 = strips.iter().map(|(_, sh, _)| sh / h).sum();
    let mut probs: Vec<f64> = strips.iter().map(|(_, sh, _)| sh / h).collect();
    probs.push(1.0 - active);
    let hw = entropy_bits(&probs);
    let e_p = expected_split_entropy_21(lat, offset)?;
    let sum_log: f64 = strips
        .iter()
        .map(|(_, sh, sweep)| (sh / h) * (sweep / l).log2())
        .sum();
    let log2_k = (total_rate_ii - hw - e_p - sum_log) / active;
    let bins: Vec<(i8, f64, u64)> = strips
        .iter()
        .map(|&(j, _, sweep)| {
            let real = log2_k.exp2() * sweep / l;
            (j, real, real.round().max(1.0) as u64)
        })
        .collect();
    if bins.iter().any(|&(_, real, _)| real < 1.0 - 1e-9) {
        return Err(Error::RateTooSmall {
            rate: total_rate_ii,
        });
    }
    let rate_integer = hw
        + strips
            .iter()
            .zip(&bins)
            .map(|(&(_, sh, _), &(_, _, n))| (sh / h) * (n as f64).log2())
            .sum::<f64>()
        + e_p;
    Ok(BinAllocation {
        bins,
        rate_real: total_rate_ii,
        rate_integer,
    })
}

fn lookup(bins: &[(i8, u64)], j: i8) -> Result<u64> {
    bins.iter()
        .find(|&&(k, _)| k == j)
        .map(|&(_, n)| n)
        .filter(|&n| n >= 1)
        .ok_or(Error::MissingBins { index: j })
}

/// Exact error probability of the single-round 12-order scheme with the given
/// bin counts and midpoint cuts: `sum_j H_j L_j / (4 L H N_j)`.
pub fn single_round_error_probability_12(geom: &CellGeometry, bins: &[(i8, u64)]) -> Result<f64> {
    let mut pe = 0.0;
    for (j, len, exc) in slanted_columns(geom)? {
        let n = lookup(bins, j)?;
        pe += exc * len / (4.0 * geom.width * geom.height * n as f64);
    }
    Ok(pe)
}

/// Exact error probability of the single-round 21-order scheme:
/// `sum_j (x-sweep_j) H_j / (4 L H N_j)`.
pub fn single_round_error_probability_21(
    lat: &Lattice2D,
    geom: &CellGeometry,
    offset: &OffsetSpec,
    bins: &[(i8, u64)],
) -> Result<f64> {
    let mut pe = 0.0;
    for (j, sh, sweep) in slanted_strips(lat, geom, offset)? {
        let n = lookup(bins, j)?;
        pe += sweep * sh / (4.0 * geom.width * geom.height * n as f64);
    }
    Ok(pe)
}

/// Modeled Stage-II sum rate of the discrete 12-order scheme:
/// `H(W1) + sum_j Lbar_j log2 N_j + H(Z2 | Z1, W1)` with the split entropy
/// evaluated at the actual bin midpoints.
pub fn single_round_rate_12(
    geom: &CellGeometry,
    profile: &BoundaryProfile,
    bins: &[(i8, u64)],
) -> Result<f64> {
    let slanted = slanted_columns(geom)?;
    let std = geom.standard.as_ref().ok_or(Error::OffsetNotVertical)?;
    let l = geom.width;
    let active: f64 = slanted.iter().map(|(_, len, _)| len / l).sum();
    let mut probs: Vec<f64> = slanted.iter().map(|(_, len, _)| len / l).collect();
    probs.push(1.0 - active);
    let mut rate = entropy_bits(&probs);
    for (j, len, _) in &slanted {
        let n = lookup(bins, *j)?;
        let frac = len / l;
        rate += frac * (n as f64).log2();
        let iv = std.intervals[(*j + 2) as usize];
        let delta = iv.length() / n as f64;
        for i in 0..n {
            let xc = iv.x1_lo + (i as f64 + 0.5) * delta;
            rate += (frac / n as f64) * entropy_bits(&column_split(profile, xc));
        }
    }
    Ok(rate)
}

/// Modeled Stage-II sum rate of the discrete 21-order scheme (mirror of
/// [`single_round_rate_12`]).
pub fn single_round_rate_21(
    lat: &Lattice2D,
    geom: &CellGeometry,
    offset: &OffsetSpec,
    bins: &[(i8, u64)],
) -> Result<f64> {
    let strips = slanted_strips(lat, geom, offset)?;
    let std = geom.standard.as_ref().ok_or(Error::OffsetNotVertical)?;
    let (l, h) = (geom.width, geom.height);
    let (lo1, hi1) = (geom.x1_lo, geom.x1_hi);
    let active: f64 = strips.iter().map(|(_, sh, _)| sh / h).sum();
    let mut probs: Vec<f64> = strips.iter().map(|(_, sh, _)| sh / h).collect();
    probs.push(1.0 - active);
    let mut rate = entropy_bits(&probs);
    let [b2, b3, bm2, bm3] = slant_bisectors(lat);
    for (j, sh, _) in &strips {
        let n = lookup(bins, *j)?;
        let frac = sh / h;
        rate += frac * (n as f64).log2();
        let strip_lo = if *j == 1 {
            std.strip_thresholds[1]
        } else {
            geom.x2_lo
        };
        let delta = sh / n as f64;
        for i in 0..n {
            let yc = strip_lo + (i as f64 + 0.5) * delta;
            let (left, right) = if *j == 1 {
                (b3.x1_at(yc), b2.x1_at(yc))
            } else {
                (bm2.x1_at(yc), bm3.x1_at(yc))
            };
            let left = left.clamp(lo1, hi1);
            let right = right.clamp(left, hi1);
            let split = [(left - lo1) / l, (right - left) / l, (hi1 - right) / l];
            rate += (frac / n as f64) * entropy_bits(&split);
        }
    }
    Ok(rate)
}

/// Limiting rate/error constant of a single-round scheme: `P_e` decays as
/// `constant * 2^(-R_sum / (1 - p0))` where `p0` is the probability of the
/// error-free first symbol (`P_{W1}(0)` for the 12 order, `P_{W2}(0)` for 21).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateErrorConstant {
    pub order: Order,
    /// Probability of the error-free symbol (flat-band fraction).
    pub p0: f64,
    /// Limiting value of `P_e * 2^(R_sum / (1 - p0))`.
    pub constant: f64,
}

impl RateErrorConstant {
    /// Asymptotic error probability at sum rate `r_sum_bits`.
    pub fn error_probability(&self, r_sum_bits: f64) -> f64 {
        self.constant * (-r_sum_bits / (1.0 - self.p0)).exp2()
    }
}

/// Evaluates the limiting constant `P_e 2^{R_sum/(1-p0)}` for the requested
/// order, at any offset in the vertical family (12) or the `d1` family (21).
/// Rectangular lattices are flagged as degenerate (`P_e` is identically 0).
pub fn pe_rate_constant(
    lat: &Lattice2D,
    offset: &OffsetSpec,
    order: Order,
) -> Result<RateErrorConstant> {
    match order {
        Order::Order12 => pe_rate_constant_12(lat, offset),
        Order::Order21 => pe_rate_constant_21(lat, offset),
        Order::Infinite => Err(Error::WrongOrder("infinite")),
    }
}

fn pe_rate_constant_12(lat: &Lattice2D, offset: &OffsetSpec) -> Result<RateErrorConstant> {
    if offset.x0()[0].abs() > 1e-12 * lat.alpha() {
        return Err(Error::OffsetNotVertical);
    }
    let geom = cell_geometry(lat, offset);
    let profile = boundary_profile(lat, offset);
    let (l, h) = (geom.width, geom.height);
    let slanted: Vec<(f64, f64)> = geom
        .runs
        .iter()
        .filter(|r| r.slope_sum() > 0.0)
        .map(|r| (r.length() / l, r.excursion() / h))
        .collect();
    let active: f64 = slanted.iter().map(|(len, _)| len).sum();
    if active < 1e-12 {
        return Err(Error::RectangularDegenerate);
    }
    let p0 = 1.0 - active;
    let e_q = expected_split_entropy_12(&geom, &profile);
    let exponent = (h_term(p0)
        + slanted
            .iter()
            .map(|&(len, exc)| len * (exc / len).log2())
            .sum::<f64>()
        + e_q)
        / active;
    Ok(RateErrorConstant {
        order: Order::Order12,
        p0,
        constant: active / 4.0 * exponent.exp2(),
    })
}

fn pe_rate_constant_21(lat: &Lattice2D, offset: &OffsetSpec) -> Result<RateErrorConstant> {
    let geom = cell_geometry(lat, offset);
    let strips = slanted_strips(lat, &geom, offset)?;
    let (l, h) = (geom.width, geom.height);
    let active: f64 = strips.iter().map(|(_, sh, _)| sh / h).sum();
    if active < 1e-12 {
        return Err(Error::RectangularDegenerate);
    }
    let p0 = 1.0 - active;
    let e_p = expected_split_entropy_21(lat, offset)?;
    let exponent = (h_term(p0)
        + strips
            .iter()
            .map(|&(_, sh, sweep)| (sh / h) * ((sweep / l) / (sh / h)).log2())
            .sum::<f64>()
        + e_p)
        / active;
    Ok(RateErrorConstant {
        order: Order::Order21,
        p0,
        constant: active / 4.0 * exponent.exp2(),
    })
}

/// The infinite-round quantities of one configuration: expected Stage-II sum
/// rate, expected number of rounds, and the two round-1 symbol distributions.
/// Distributions are indexed `(-1, 0, +1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfiniteRoundQuantities {
    /// Expected Stage-II sum rate in bits.
    pub rate_bits: f64,
    /// Expected number of communication rounds.
    pub rounds: f64,
    /// Strip distribution of node-2's first message.
    pub q: Distribution,
    /// Node-1's column distribution conditioned on the top strip.
    pub p_pos: Distribution,
    /// Node-1's column distribution conditioned on the bottom strip.
    pub p_neg: Distribution,
}

/// Evaluates the infinite-round bit-exchange rate and round count for the
/// vertical offset with corner cut `d1` (use `d1 = alpha rho cos theta / 2`
/// for the zero offset; `d1 = 0` for rectangular lattices):
///
/// `R = H(Q) + Q_1 H(P_1) + Q_{-1} H(P_{-1}) + 4 (Q_1 (1 - P_{1,0}) + Q_{-1} (1 - P_{-1,0}))`
///
/// which at the zero offset reduces to `H(Q) + (1-Q_0) H(P) + 4 (1-P_0)(1-Q_0)`.
pub fn infinite_round_quantities(lat: &Lattice2D, d1: f64) -> Result<InfiniteRoundQuantities> {
    let offset = OffsetSpec::from_d1(lat, d1)?;
    let one = Distribution::new(vec![0.0, 1.0, 0.0]).expect("degenerate distribution is valid");
    if lat.is_rectangular() {
        return Ok(InfiniteRoundQuantities {
            rate_bits: 0.0,
            rounds: 1.0,
            q: one.clone(),
            p_pos: one.clone(),
            p_neg: one,
        });
    }
    let d = offset.d().expect("d1-family offset");
    let geom = cell_geometry(lat, &offset);
    let std = geom
        .standard
        .as_ref()
        .expect("d1-family offset has standard geometry");
    let h = geom.height;
    let l = geom.width;
    let q = Distribution::new(std.strip_heights.iter().map(|v| v / h).collect())?;
    let p_pos = Distribution::new(vec![d[0] / l, (l - d[0] - d[1]) / l, d[1] / l])?;
    let p_neg = Distribution::new(vec![d[3] / l, (l - d[3] - d[2]) / l, d[2] / l])?;
    let enter = q[2] * (1.0 - p_pos[1]) + q[0] * (1.0 - p_neg[1]);
    let rate_bits = q.entropy() + q[2] * p_pos.entropy() + q[0] * p_neg.entropy() + 4.0 * enter;
    Ok(InfiniteRoundQuantities {
        rate_bits,
        rounds: 1.0 + 2.0 * enter,
        q,
        p_pos,
        p_neg,
    })
}
