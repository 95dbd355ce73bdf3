//! Independent-oracle cross-checks: quadrature vs Monte Carlo for the split
//! entropies, the mirrored 21-order constant vs simulation, transcript bit
//! accounting vs the closed forms, and boundary-profile consistency with the
//! exact decoder.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cvp2p::analytic::entropy_bits;
use cvp2p::*;

const TWO_PI_5: f64 = 2.0 * std::f64::consts::PI / 5.0;

fn pent() -> Lattice2D {
    Lattice2D::new(1.0, TWO_PI_5, 1.0).unwrap()
}

/// Quadrature vs Monte Carlo for E[H(Q(X1))]: average the split entropy over
/// 10^6 uniform draws of X1 and require agreement within 3 standard errors.
#[test]
fn split_entropy_12_matches_monte_carlo_oracle() {
    let cases = [
        (Lattice2D::hexagonal(1.0), None),
        (pent(), None),
        (pent(), Some(0.21352549156242118)), // d1 = s(1-s)
    ];
    for (lat, d1) in cases {
        let offset = match d1 {
            Some(d1) => OffsetSpec::from_d1(&lat, d1).unwrap(),
            None => OffsetSpec::zero(&lat),
        };
        let geom = cell_geometry(&lat, &offset);
        let profile = boundary_profile(&lat, &offset);
        let quad = expected_split_entropy_12(&geom, &profile);

        let mut rng = ChaCha8Rng::seed_from_u64(0x0eac1e);
        let n = 1_000_000u64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let h = geom.height;
        for _ in 0..n {
            let x1 = geom.x1_lo + geom.width * rng.random::<f64>();
            let u = profile.upper_at(x1);
            let l = profile.lower_at(x1);
            let split = [(l - geom.x2_lo) / h, (u - l) / h, (geom.x2_hi - u) / h];
            let v = entropy_bits(&split);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let se = (((sum_sq / n as f64) - mean * mean).max(0.0) / n as f64).sqrt();
        assert!(
            (quad - mean).abs() <= 3.0 * se.max(1e-9),
            "quadrature {quad} vs MC {mean} +- {se} (d1 = {d1:?})"
        );
    }
}

/// Same cross-check for the 21-order split entropy E[H(P(X2))].
#[test]
fn split_entropy_21_matches_monte_carlo_oracle() {
    let lat = pent();
    for d1 in [lat.skew() / 2.0, 0.25] {
        let offset = OffsetSpec::from_d1(&lat, d1).unwrap();
        let quad = expected_split_entropy_21(&lat, &offset).unwrap();

        // Recompute P(x2) geometrically from the exact decoder: scan each
        // sampled height for the decision changes along x1.
        let geom = cell_geometry(&lat, &offset);
        let std = geom.standard.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x0eac21);
        let n = 400_000u64;
        let cols = 512;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let x2 = geom.x2_lo + geom.height * rng.random::<f64>();
            let split = if x2 >= std.strip_thresholds[0] && x2 < std.strip_thresholds[1] {
                [0.0, 1.0, 0.0]
            } else {
                // Count columns decoding to the left neighbor, the center,
                // and the right neighbor, identified by coefficient vector.
                let left_id = if x2 >= std.strip_thresholds[1] {
                    [-1, 1]
                } else {
                    [0, -1]
                };
                let (mut left, mut mid) = (0u32, 0u32);
                for k in 0..cols {
                    let x1 = geom.x1_lo + geom.width * (k as f64 + 0.5) / cols as f64;
                    let u = lat.nearest_point([x1, x2]).u;
                    if u == [0, 0] {
                        mid += 1;
                    } else if u == left_id {
                        left += 1;
                    }
                }
                [
                    left as f64 / cols as f64,
                    mid as f64 / cols as f64,
                    (cols - left - mid) as f64 / cols as f64,
                ]
            };
            let v = entropy_bits(&split);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let se = (((sum_sq / n as f64) - mean * mean).max(0.0) / n as f64).sqrt();
        // The column scan quantizes the split to 1/512; allow that bias on
        // top of the Monte Carlo band.
        assert!(
            (quad - mean).abs() <= 3.0 * se + 0.01,
            "quadrature {quad} vs decoder-scan MC {mean} +- {se} (d1 = {d1})"
        );
    }
}

/// The mirrored 21-order limiting constant agrees with protocol simulation.
#[test]
fn order_21_constant_matches_simulation() {
    let lat = pent();
    let offset = OffsetSpec::zero(&lat);
    let geom = cell_geometry(&lat, &offset);
    let constant = pe_rate_constant(&lat, &offset, Order::Order21).unwrap();
    for (rate, samples) in [(2.6, 3_000_000u64), (3.2, 5_000_000)] {
        let alloc = allocate_strip_bins(&lat, &geom, &offset, rate).unwrap();
        let cfg = ProtocolConfig::with_bins(Order::Order21, offset, alloc.to_bins());
        let stats = single_round_stats(&lat, &cfg, samples, 0x21c0).unwrap();
        let norm = stats.pe.mean * (stats.rate_modeled / (1.0 - constant.p0)).exp2();
        let norm_exact = stats.pe_exact * (stats.rate_modeled / (1.0 - constant.p0)).exp2();
        // The exact finite-bin formula normalizes onto the constant, and the
        // empirical estimate agrees with both.
        assert!(
            (norm_exact - constant.constant).abs() < 0.05 * constant.constant,
            "exact normalization {norm_exact} vs constant {}",
            constant.constant
        );
        assert!(
            (norm - constant.constant).abs() < 0.12 * constant.constant,
            "empirical normalization {norm} vs constant {} at rate {rate}",
            constant.constant
        );
    }
}

/// Transcript bit totals of the infinite-round protocol average to the
/// closed-form rate within 3 standard errors, including offset cells.
#[test]
fn infinite_round_bits_match_closed_form() {
    let cases = [
        (Lattice2D::hexagonal(1.0), 0.25),
        (pent(), 0.1545084971874737),
        (pent(), 0.1),
        (pent(), 0.28),
        (
            Lattice2D::new(1.3, (0.4f64 / 1.3).acos(), 1.0).unwrap(),
            0.2,
        ),
    ];
    for (lat, d1) in cases {
        let stats = estimate_infinite_round(&lat, d1, 150_000, 0xb17).unwrap();
        let want = infinite_round_quantities(&lat, d1).unwrap();
        let dev_r = (stats.rate.mean - want.rate_bits).abs() / stats.rate.std_error;
        let dev_n = (stats.rounds.mean - want.rounds).abs() / stats.rounds.std_error;
        assert!(
            dev_r <= 3.0,
            "rate {} vs {} ({dev_r} se), d1 = {d1}",
            stats.rate.mean,
            want.rate_bits
        );
        assert!(
            dev_n <= 3.0,
            "rounds {} vs {} ({dev_n} se), d1 = {d1}",
            stats.rounds.mean,
            want.rounds
        );
        assert_eq!(stats.errors, 0);
    }
}

/// The boundary profile reproduces the exact decoder's decision change across
/// both boundaries, on 10^4 random columns, at zero and nonzero offsets.
#[test]
fn boundary_profile_matches_decoder() {
    let eps = 1e-7;
    let cases = [
        (Lattice2D::hexagonal(1.0), None),
        (pent(), None),
        (pent(), Some(0.23)),
        (
            Lattice2D::new(1.4, (0.35f64 / 1.4).acos(), 1.0).unwrap(),
            Some(0.12),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0d);
    for (lat, d1) in cases {
        let offset = match d1 {
            Some(d1) => OffsetSpec::from_d1(&lat, d1).unwrap(),
            None => OffsetSpec::zero(&lat),
        };
        let profile = boundary_profile(&lat, &offset);
        let mut checked = 0u32;
        while checked < 10_000 {
            let x1 = profile.x1_lo + lat.v11() * rng.random::<f64>();
            let (u, l) = (profile.upper_at(x1), profile.lower_at(x1));
            if profile.upper_slope_at(x1) != 0.0
                && u + eps < profile.x2_hi
                && u - eps > profile.x2_lo
            {
                assert_eq!(
                    lat.nearest_point([x1, u - eps]).u,
                    [0, 0],
                    "below u at {x1}"
                );
                assert_ne!(
                    lat.nearest_point([x1, u + eps]).u,
                    [0, 0],
                    "above u at {x1}"
                );
                checked += 1;
            }
            if profile.lower_slope_at(x1) != 0.0
                && l - eps > profile.x2_lo
                && l + eps < profile.x2_hi
            {
                assert_eq!(
                    lat.nearest_point([x1, l + eps]).u,
                    [0, 0],
                    "above l at {x1}"
                );
                assert_ne!(
                    lat.nearest_point([x1, l - eps]).u,
                    [0, 0],
                    "below l at {x1}"
                );
                checked += 1;
            }
        }
    }
}

/// Area partition: over 10^3 random rectangles inside the cell, the candidate
/// cell areas sum to the rectangle area within 1e-9.
#[test]
fn rect_areas_partition_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa12ea);
    for lat in [Lattice2D::hexagonal(1.0), pent()] {
        for _ in 0..1000 {
            let cx = lat.v11() * (rng.random::<f64>() - 0.5);
            let cy = lat.v22() * (rng.random::<f64>() - 0.5);
            let w = lat.v11() * (0.01 + 0.4 * rng.random::<f64>());
            let h = lat.v22() * (0.01 + 0.4 * rng.random::<f64>());
            let rect = Rect::new(cx - w / 2.0, cx + w / 2.0, cy - h / 2.0, cy + h / 2.0);
            let mut total = 0.0;
            for i in -2..=2i64 {
                for j in -2..=2i64 {
                    total += rect_voronoi_area(&lat, &rect, &lat.point([i, j]));
                }
            }
            assert!(
                (total - rect.area()).abs() < 1e-9,
                "defect {}",
                total - rect.area()
            );
        }
    }
}

/// Both nodes decode identically on 10^6 runs (single-round and infinite).
#[test]
fn nodes_always_agree() {
    let lat = pent();
    let zero = OffsetSpec::zero(&lat);
    let configs = [
        ProtocolConfig::single_round_12(zero, 2, 3),
        ProtocolConfig::single_round_21(zero, 3),
        ProtocolConfig::infinite(zero),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xa9ee);
    for cfg in configs {
        let protocol = Protocol::new(&lat, cfg).unwrap();
        for _ in 0..334_000 {
            let x = [
                lat.v11() * (rng.random::<f64>() - 0.5),
                lat.v22() * (rng.random::<f64>() - 0.5),
            ];
            let t = protocol.run(x).unwrap();
            assert_eq!(t.node1_decode.u, t.node2_decode.u);
            assert_eq!(t.node1_decode.y, t.node2_decode.y);
        }
    }
}

/// Stage-I experiment on the uniform square: the raw Babai entropy
/// approaches 2 log2(1/alpha) from above (partially covered boundary cells
/// add a positive o(1) excess that shrinks with alpha).
#[test]
fn stage1_uniform_square_scaled() {
    let coarse = Lattice2D::new(1.0, TWO_PI_5, 2f64.powi(-4)).unwrap();
    let est4 = stage1_entropy_experiment(&coarse, StageOneSource::UniformSquare, 400_000, 3);
    assert!(
        est4.raw_entropy >= 8.0 - 0.02 && est4.raw_entropy < 8.35,
        "raw H(U) = {}",
        est4.raw_entropy
    );
    let fine = Lattice2D::new(1.0, TWO_PI_5, 2f64.powi(-6)).unwrap();
    let est6 = stage1_entropy_experiment(&fine, StageOneSource::UniformSquare, 400_000, 3);
    assert!(est6.raw_entropy >= 12.0 - 0.02 && est6.raw_entropy < 12.35);
    // The adjusted estimates converge toward h1 + h2 = 0 as alpha shrinks.
    assert!(est6.estimate.mean < est4.estimate.mean);
    assert!(est6.estimate.mean.abs() < 0.12);
}

/// Every empirical sweep row with n >= 10^5 agrees with its analytic column
/// within 4 standard errors (reproduced through the per-point substream).
#[test]
fn sweep_rows_agree_with_analytics() {
    let mut base = RunConfig::new(1.0, 0.0, 1.0, Order::Infinite);
    base.samples = 100_000;
    base.seed = 0x5eed;
    let spec = SweepSpec {
        parameter: SweepParameter::Theta,
        min: std::f64::consts::FRAC_PI_3,
        max: 0.46 * std::f64::consts::PI,
        steps: 4,
        workers: 2,
        base,
    };
    let rows = sweep(&spec).unwrap();
    let grid: Vec<f64> = (0..4)
        .map(|i| spec.min + (spec.max - spec.min) * i as f64 / 3.0)
        .collect();
    for (i, row) in rows.iter().enumerate() {
        let lat = Lattice2D::new(1.0, grid[i], 1.0).unwrap();
        let d1 = lat.skew() / 2.0;
        let stats =
            estimate_infinite_round(&lat, d1, 100_000, point_seed(0x5eed, i as u64)).unwrap();
        // The row is exactly the standalone estimator under the point seed.
        assert_eq!(row.rbar_empirical.unwrap(), stats.rate.mean);
        assert_eq!(row.nbar_empirical.unwrap(), stats.rounds.mean);

        let want = infinite_round_quantities(&lat, d1).unwrap();
        let dev_r = (stats.rate.mean - want.rate_bits).abs() / stats.rate.std_error;
        let dev_n = (stats.rounds.mean - want.rounds).abs() / stats.rounds.std_error;
        assert!(dev_r <= 4.0, "row {i}: rate off by {dev_r} se");
        assert!(dev_n <= 4.0, "row {i}: rounds off by {dev_n} se");
    }
}

/// Zero error and sound bit accounting across randomized lattices and
/// offsets spanning the valid parameter region.
#[test]
fn randomized_lattices_zero_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2a11);
    for _ in 0..50 {
        let rho = 1.0 + 0.5 * rng.random::<f64>();
        let skew = 0.02 + 0.46 * rng.random::<f64>();
        let theta = (skew / rho).acos();
        let lat = Lattice2D::new(rho, theta, 1.0).unwrap();
        let s = lat.skew();
        let d1 = s * (0.05 + 0.9 * rng.random::<f64>());
        let offset = OffsetSpec::from_d1(&lat, d1).unwrap();
        let protocol = Protocol::new(&lat, ProtocolConfig::infinite(offset)).unwrap();
        let want = infinite_round_quantities(&lat, d1).unwrap();
        let mut bits = 0.0;
        let n = 2000;
        for _ in 0..n {
            let x = [
                offset.x0()[0] + lat.v11() * (rng.random::<f64>() - 0.5),
                offset.x0()[1] + lat.v22() * (rng.random::<f64>() - 0.5),
            ];
            let t = protocol.run(x).unwrap();
            assert_eq!(
                t.decode().u,
                lat.nearest_point(x).u,
                "rho={rho} skew={skew} d1={d1} x={x:?}"
            );
            bits += t.total_bits();
        }
        // Loose sanity on the average rate (the tight check runs elsewhere).
        let mean = bits / n as f64;
        assert!(
            (mean - want.rate_bits).abs() < 0.35,
            "rho={rho} skew={skew} d1={d1}: mean bits {mean} vs {}",
            want.rate_bits
        );
    }
}
