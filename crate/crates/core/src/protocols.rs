//! Executable two-node protocols: the Stage-I Babai exchange, the
//! single-round Stage-II schemes in both communication orders, and the
//! infinite-round bit-exchange scheme, with exact ideal-codelength accounting
//! (`-log2 P(symbol | history)` per message, 1 bit per exchanged bit).
//!
//! Both nodes decode from the shared transcript with deterministic tie
//! breaking, so their final lattice points always agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_profile, cell_geometry, rect_voronoi_area, slant_bisectors, BoundaryProfile,
    CellGeometry, OffsetSpec, Rect, StandardGeometry,
};
use crate::lattice::{Lattice2D, LatticePoint, Point, GEOM_TOL};

/// Which node leads Stage-II: node-1's column bins first (`Order12`), node-2's
/// strip bins first (`Order21`), or the zero-error bit exchange (`Infinite`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "12")]
    Order12,
    #[serde(rename = "21")]
    Order21,
    #[serde(rename = "inf")]
    Infinite,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Order::Order12 => "12",
            Order::Order21 => "21",
            Order::Infinite => "inf",
        })
    }
}

impl std::str::FromStr for Order {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "12" => Ok(Order::Order12),
            "21" => Ok(Order::Order21),
            "inf" | "infinite" => Ok(Order::Infinite),
            other => Err(format!("unknown order {other:?} (expected 12, 21 or inf)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    One,
    Two,
}

/// One protocol message: sender, integer symbol, and its ideal codelength.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Message {
    pub sender: Node,
    pub symbol: i64,
    pub bits: f64,
}

/// A Stage-II protocol execution: ordered messages, rounds used, and the
/// final decode at each node (always equal by construction).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub rounds: u32,
    pub node1_decode: LatticePoint,
    pub node2_decode: LatticePoint,
}

impl Transcript {
    pub fn total_bits(&self) -> f64 {
        self.messages.iter().map(|m| m.bits).sum()
    }

    pub fn decode(&self) -> &LatticePoint {
        debug_assert_eq!(self.node1_decode.u, self.node2_decode.u);
        &self.node1_decode
    }
}

/// Configuration of one Stage-II scheme.
///
/// `bins` maps subinterval indices to bin counts: column indices
/// `{-2, -1, 1, 2}` for the 12 order, strip indices `{-1, 1}` for the 21
/// order. The infinite order uses no bins; `max_rounds` caps its total round
/// count (a guard against inputs lying exactly on a cell boundary).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub order: Order,
    pub bins: Vec<(i8, u64)>,
    pub offset: OffsetSpec,
    pub max_rounds: u32,
}

impl ProtocolConfig {
    /// 12-order with symmetric bin counts `n1` on the single-slant and `n2`
    /// on the double-slant subintervals.
    pub fn single_round_12(offset: OffsetSpec, n1: u64, n2: u64) -> Self {
        Self {
            order: Order::Order12,
            bins: vec![(-2, n2), (-1, n1), (1, n1), (2, n2)],
            offset,
            max_rounds: 64,
        }
    }

    /// 21-order with `n` bins on each slanted strip.
    pub fn single_round_21(offset: OffsetSpec, n: u64) -> Self {
        Self {
            order: Order::Order21,
            bins: vec![(-1, n), (1, n)],
            offset,
            max_rounds: 64,
        }
    }

    pub fn with_bins(order: Order, offset: OffsetSpec, bins: Vec<(i8, u64)>) -> Self {
        Self {
            order,
            bins,
            offset,
            max_rounds: 64,
        }
    }

    /// The zero-error bit-exchange scheme.
    pub fn infinite(offset: OffsetSpec) -> Self {
        Self {
            order: Order::Infinite,
            bins: Vec::new(),
            offset,
            max_rounds: 64,
        }
    }

    pub fn with_max_rounds(mut self, max_rounds: u32) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn bin_count(&self, index: i8) -> Option<u64> {
        self.bins
            .iter()
            .find(|&&(j, _)| j == index)
            .map(|&(_, n)| n)
    }
}

/// A prepared protocol session: geometry and distributions are derived once,
/// then [`Protocol::run`] executes per input. Runs are pure given `(x, config)`
/// and safe to invoke from any number of workers on shared references.
pub struct Protocol {
    lat: Lattice2D,
    cfg: ProtocolConfig,
    geom: CellGeometry,
    profile: BoundaryProfile,
    std_geom: StandardGeometry,
    d: [f64; 4],
    /// Probability of the error-free column symbol (12 order).
    flat_prob: f64,
    /// Strip probabilities (Q_{-1}, Q_0, Q_1).
    q: [f64; 3],
    /// Round-1 column distributions: row 0 for W2 = -1, row 1 for W2 = +1.
    p_rows: [[f64; 3]; 2],
}

impl Protocol {
    pub fn new(lat: &Lattice2D, cfg: ProtocolConfig) -> Result<Self> {
        if cfg.max_rounds < 1 {
            return Err(Error::MaxRoundsExceeded(0));
        }
        let geom = cell_geometry(lat, &cfg.offset);
        let profile = boundary_profile(lat, &cfg.offset);
        let std_geom = *geom.standard.as_ref().ok_or(Error::OffsetNotVertical)?;
        let d = cfg.offset.d().ok_or(Error::OffsetNotVertical)?;

        let dust_w = crate::analytic::DUST * geom.width;
        let dust_h = crate::analytic::DUST * geom.height;
        match cfg.order {
            Order::Order12 => {
                for (k, iv) in std_geom.intervals.iter().enumerate() {
                    if iv.length() > dust_w && iv.excursion() > dust_h {
                        let j = k as i8 - 2;
                        if cfg.bin_count(j).unwrap_or(0) < 1 {
                            return Err(Error::MissingBins { index: j });
                        }
                    }
                }
            }
            Order::Order21 => {
                for (j, height) in [
                    (-1i8, std_geom.strip_heights[0]),
                    (1, std_geom.strip_heights[2]),
                ] {
                    if height > dust_h && cfg.bin_count(j).unwrap_or(0) < 1 {
                        return Err(Error::MissingBins { index: j });
                    }
                }
            }
            Order::Infinite => {}
        }

        let l = geom.width;
        let slanted_len: f64 = std_geom
            .intervals
            .iter()
            .filter(|iv| iv.excursion() > 0.0)
            .map(|iv| iv.length())
            .sum();
        let h = geom.height;
        let q = [
            std_geom.strip_heights[0] / h,
            std_geom.strip_heights[1] / h,
            std_geom.strip_heights[2] / h,
        ];
        let p_rows = [
            [d[3] / l, (l - d[3] - d[2]) / l, d[2] / l],
            [d[0] / l, (l - d[0] - d[1]) / l, d[1] / l],
        ];
        Ok(Self {
            lat: *lat,
            cfg,
            flat_prob: 1.0 - slanted_len / l,
            geom,
            profile,
            std_geom,
            d,
            q,
            p_rows,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geom
    }

    /// Executes the configured Stage-II protocol on `x`.
    pub fn run(&self, x: Point) -> Result<Transcript> {
        let anchor = self.lat.babai_decode(x, self.cfg.offset.x0());
        let local = [x[0] - anchor.y[0], x[1] - anchor.y[1]];
        match self.cfg.order {
            Order::Order12 => Ok(self.run_12(anchor, local)),
            Order::Order21 => Ok(self.run_21(anchor, local)),
            Order::Infinite => self.run_infinite(anchor, local),
        }
    }

    fn finish(
        &self,
        anchor: LatticePoint,
        local_u: [i64; 2],
        messages: Vec<Message>,
        rounds: u32,
    ) -> Transcript {
        let decode = self
            .lat
            .point([anchor.u[0] + local_u[0], anchor.u[1] + local_u[1]]);
        Transcript {
            messages,
            rounds,
            node1_decode: decode,
            node2_decode: decode,
        }
    }

    /// Optimum decision rule: the candidate cell with the largest intersection
    /// area, ties toward the lexicographically smallest coefficient vector.
    fn decode_rect(&self, rect: &Rect) -> [i64; 2] {
        let tol = GEOM_TOL * rect.area().max(f64::MIN_POSITIVE);
        let mut best: Option<(f64, [i64; 2])> = None;
        for i in -1..=1i64 {
            for j in -1..=1i64 {
                let area = rect_voronoi_area(&self.lat, rect, &self.lat.point([i, j]));
                match &best {
                    Some((ba, _)) if area <= *ba + tol => {}
                    _ => best = Some((area, [i, j])),
                }
            }
        }
        best.expect("candidate set is nonempty").1
    }

    fn column_interval(&self, x1: f64) -> usize {
        let dust = crate::analytic::DUST * self.geom.width;
        let ivs = &self.std_geom.intervals;
        for (k, iv) in ivs.iter().enumerate() {
            if iv.length() > dust && x1 < iv.x1_hi {
                return k;
            }
        }
        ivs.iter()
            .rposition(|iv| iv.length() > dust)
            .expect("cell has positive width")
    }

    fn run_12(&self, anchor: LatticePoint, local: Point) -> Transcript {
        let mut messages = Vec::with_capacity(3);
        let k = self.column_interval(local[0]);
        let iv = self.std_geom.intervals[k];
        let j = k as i8 - 2;
        if iv.excursion() <= crate::analytic::DUST * self.geom.height {
            // Error-free column: no refinement needed.
            messages.push(Message {
                sender: Node::One,
                symbol: 0,
                bits: -self.flat_prob.log2(),
            });
            return self.finish(anchor, [0, 0], messages, 1);
        }
        let len = iv.length();
        messages.push(Message {
            sender: Node::One,
            symbol: j as i64,
            bits: -(len / self.geom.width).log2(),
        });
        let n = self.cfg.bin_count(j).expect("validated in Protocol::new");
        let delta = len / n as f64;
        let bin = (((local[0] - iv.x1_lo) / delta) as u64).min(n - 1);
        messages.push(Message {
            sender: Node::One,
            symbol: bin as i64,
            bits: (n as f64).log2(),
        });

        let xc = iv.x1_lo + (bin as f64 + 0.5) * delta;
        let cut_up = self.profile.upper_at(xc);
        let cut_lo = self.profile.lower_at(xc);
        let (z2, x2_lo, x2_hi) = if local[1] >= cut_up {
            (1i64, cut_up, self.geom.x2_hi)
        } else if local[1] < cut_lo {
            (-1, self.geom.x2_lo, cut_lo)
        } else {
            (0, cut_lo, cut_up)
        };
        messages.push(Message {
            sender: Node::Two,
            symbol: z2,
            bits: -((x2_hi - x2_lo) / self.geom.height).log2(),
        });

        let rect = Rect::new(
            iv.x1_lo + bin as f64 * delta,
            iv.x1_lo + (bin + 1) as f64 * delta,
            x2_lo,
            x2_hi,
        );
        let u = self.decode_rect(&rect);
        self.finish(anchor, u, messages, 1)
    }

    fn strip_index(&self, x2: f64) -> usize {
        let dust = crate::analytic::DUST * self.geom.height;
        let [tau_lo, tau_hi] = self.std_geom.strip_thresholds;
        let bounds = [
            (self.geom.x2_lo, tau_lo, self.std_geom.strip_heights[0]),
            (tau_lo, tau_hi, self.std_geom.strip_heights[1]),
            (tau_hi, self.geom.x2_hi, self.std_geom.strip_heights[2]),
        ];
        for (k, (_, hi, height)) in bounds.iter().enumerate() {
            if *height > dust && x2 < *hi {
                return k;
            }
        }
        if self.std_geom.strip_heights[2] > dust {
            2
        } else {
            1
        }
    }

    fn strip_bounds(&self, k: usize) -> (f64, f64) {
        let [tau_lo, tau_hi] = self.std_geom.strip_thresholds;
        match k {
            0 => (self.geom.x2_lo, tau_lo),
            1 => (tau_lo, tau_hi),
            _ => (tau_hi, self.geom.x2_hi),
        }
    }

    fn run_21(&self, anchor: LatticePoint, local: Point) -> Transcript {
        let mut messages = Vec::with_capacity(3);
        let k = self.strip_index(local[1]);
        let j = k as i8 - 1;
        messages.push(Message {
            sender: Node::Two,
            symbol: j as i64,
            bits: -self.q[k].log2(),
        });
        if j == 0 {
            return self.finish(anchor, [0, 0], messages, 1);
        }
        let (strip_lo, strip_hi) = self.strip_bounds(k);
        let n = self.cfg.bin_count(j).expect("validated in Protocol::new");
        let delta = (strip_hi - strip_lo) / n as f64;
        let bin = (((local[1] - strip_lo) / delta) as u64).min(n - 1);
        messages.push(Message {
            sender: Node::Two,
            symbol: bin as i64,
            bits: (n as f64).log2(),
        });

        let yc = strip_lo + (bin as f64 + 0.5) * delta;
        let [b2, b3, bm2, bm3] = slant_bisectors(&self.lat);
        let (raw_left, raw_right) = if j == 1 {
            (b3.x1_at(yc), b2.x1_at(yc))
        } else {
            (bm2.x1_at(yc), bm3.x1_at(yc))
        };
        let left = raw_left.clamp(self.geom.x1_lo, self.geom.x1_hi);
        let right = raw_right.clamp(left, self.geom.x1_hi);
        let (z1, x1_lo, x1_hi) = if local[0] < left {
            (-1i64, self.geom.x1_lo, left)
        } else if local[0] >= right {
            (1, right, self.geom.x1_hi)
        } else {
            (0, left, right)
        };
        messages.push(Message {
            sender: Node::One,
            symbol: z1,
            bits: -((x1_hi - x1_lo) / self.geom.width).log2(),
        });

        let rect = Rect::new(
            x1_lo,
            x1_hi,
            strip_lo + bin as f64 * delta,
            strip_lo + (bin + 1) as f64 * delta,
        );
        let u = self.decode_rect(&rect);
        self.finish(anchor, u, messages, 1)
    }

    fn run_infinite(&self, anchor: LatticePoint, local: Point) -> Result<Transcript> {
        let mut messages = Vec::with_capacity(4);
        let k = self.strip_index(local[1]);
        let j = k as i8 - 1;
        messages.push(Message {
            sender: Node::Two,
            symbol: j as i64,
            bits: -self.q[k].log2(),
        });
        if j == 0 {
            return Ok(self.finish(anchor, [0, 0], messages, 1));
        }

        let [d1, d2, d3, d4] = self.d;
        let (lo1, hi1) = (self.geom.x1_lo, self.geom.x1_hi);
        let (cut_left, cut_right) = if j == 1 {
            (lo1 + d1, hi1 - d2)
        } else {
            (lo1 + d4, hi1 - d3)
        };
        let w1 = if local[0] < cut_left {
            -1i64
        } else if local[0] >= cut_right {
            1
        } else {
            0
        };
        let row = self.p_rows[if j == 1 { 1 } else { 0 }];
        messages.push(Message {
            sender: Node::One,
            symbol: w1,
            bits: -row[(w1 + 1) as usize].log2(),
        });
        if w1 == 0 {
            return Ok(self.finish(anchor, [0, 0], messages, 1));
        }

        let (strip_lo, strip_hi) = self.strip_bounds(k);
        let rect = if w1 < 0 {
            Rect::new(lo1, cut_left, strip_lo, strip_hi)
        } else {
            Rect::new(cut_right, hi1, strip_lo, strip_hi)
        };
        // The Voronoi boundary is a diagonal of the error rectangle; its slope
        // sign picks which binary expansion node-1 communicates.
        let slope_positive = (j == 1 && w1 == -1) || (j == -1 && w1 == 1);
        let mut a = (local[0] - rect.x1_lo) / rect.width();
        if slope_positive {
            a = 1.0 - a;
        }
        let mut b = (local[1] - rect.x2_lo) / rect.height();

        let mut acc_a = 0.0f64;
        let mut acc_b = 0.0f64;
        let mut scale = 0.5f64;
        let mut exchange_rounds = 0u32;
        loop {
            if exchange_rounds + 1 >= self.cfg.max_rounds {
                return Err(Error::MaxRoundsExceeded(self.cfg.max_rounds));
            }
            exchange_rounds += 1;
            let bit_a = a >= 0.5;
            a = 2.0 * a - if bit_a { 1.0 } else { 0.0 };
            let bit_b = b >= 0.5;
            b = 2.0 * b - if bit_b { 1.0 } else { 0.0 };
            messages.push(Message {
                sender: Node::One,
                symbol: bit_a as i64,
                bits: 1.0,
            });
            messages.push(Message {
                sender: Node::Two,
                symbol: bit_b as i64,
                bits: 1.0,
            });
            if bit_a {
                acc_a += scale;
            }
            if bit_b {
                acc_b += scale;
            }
            scale /= 2.0;
            if bit_a == bit_b {
                break;
            }
        }

        // Decode the final dyadic rectangle at its center; its interior lies
        // strictly on one side of the diagonal.
        let center_a = acc_a + scale;
        let center_b = acc_b + scale;
        let frac1 = if slope_positive {
            1.0 - center_a
        } else {
            center_a
        };
        let center = [
            rect.x1_lo + frac1 * rect.width(),
            rect.x2_lo + center_b * rect.height(),
        ];
        let u = self.lat.nearest_point(center).u;
        Ok(self.finish(anchor, u, messages, 1 + exchange_rounds))
    }
}

/// Stage-I: node-2 sends `u2`, node-1 answers `u1`, localizing `x` to its
/// Babai cell. Codelengths are 0 bits, the exact value when the source is
/// confined to a single cell; multi-cell sources get their empirical Stage-I
/// rate from the harness.
pub fn run_stage1(lat: &Lattice2D, x: Point, offset: &OffsetSpec) -> (LatticePoint, [Message; 2]) {
    let p = lat.babai_decode(x, offset.x0());
    (
        p,
        [
            Message {
                sender: Node::Two,
                symbol: p.u[1],
                bits: 0.0,
            },
            Message {
                sender: Node::One,
                symbol: p.u[0],
                bits: 0.0,
            },
        ],
    )
}

/// Runs one single-round Stage-II execution (both orders).
pub fn run_single_round(lat: &Lattice2D, x: Point, cfg: ProtocolConfig) -> Result<Transcript> {
    if cfg.order == Order::Infinite {
        return Err(Error::WrongOrder("infinite"));
    }
    Protocol::new(lat, cfg)?.run(x)
}

/// Runs one infinite-round bit-exchange execution.
pub fn run_infinite_round(lat: &Lattice2D, x: Point, cfg: ProtocolConfig) -> Result<Transcript> {
    if cfg.order != Order::Infinite {
        return Err(Error::WrongOrder("single-round"));
    }
    Protocol::new(lat, cfg)?.run(x)
}

/// The seven rectangles of the round-1 partition of the (offset) cell:
/// `[mid strip, top-left, top-mid, top-right, bottom-left, bottom-mid,
/// bottom-right]`. The four corner rectangles are the error rectangles.
pub fn round1_partition(lat: &Lattice2D, offset: &OffsetSpec) -> Result<[Rect; 7]> {
    let geom = cell_geometry(lat, offset);
    let std = geom.standard.as_ref().ok_or(Error::OffsetNotVertical)?;
    let d = offset.d().ok_or(Error::OffsetNotVertical)?;
    let (lo1, hi1) = (geom.x1_lo, geom.x1_hi);
    let [tau_lo, tau_hi] = std.strip_thresholds;
    let (bottom, top) = (geom.x2_lo, geom.x2_hi);
    Ok([
        Rect::new(lo1, hi1, tau_lo, tau_hi),
        Rect::new(lo1, lo1 + d[0], tau_hi, top),
        Rect::new(lo1 + d[0], hi1 - d[1], tau_hi, top),
        Rect::new(hi1 - d[1], hi1, tau_hi, top),
        Rect::new(lo1, lo1 + d[3], bottom, tau_lo),
        Rect::new(lo1 + d[3], hi1 - d[2], bottom, tau_lo),
        Rect::new(hi1 - d[2], hi1, bottom, tau_lo),
    ])
}
