//! Python bindings for the two-party nearest-lattice-point library.
//!
//! Exposes the lattice decoders, cell geometry, closed-form rate/error
//! evaluators, protocol executions and the Monte Carlo estimators as a
//! `cvp2p_py` extension module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use std::str::FromStr;

use cvp2p::{
    allocate_bins, allocate_strip_bins, boundary_profile, cell_geometry, estimate_infinite_round,
    expected_split_entropy_12, expected_split_entropy_21, infinite_round_quantities,
    pe_rate_constant, rect_voronoi_area, single_round_stats, stage1_entropy_experiment, Lattice2D,
    OffsetSpec, Order, Protocol, ProtocolConfig, Rect, StageOneSource, Transcript,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_order(order: &str) -> PyResult<Order> {
    Order::from_str(order).map_err(err)
}

/// A validated 2D lattice in the reduced `(rho, theta, alpha)`
/// parameterization, with its decoders and protocol entry points.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Lattice {
    inner: Lattice2D,
}

impl Lattice {
    fn offset(&self, d1: Option<f64>) -> PyResult<OffsetSpec> {
        match d1 {
            Some(d1) => OffsetSpec::from_d1(&self.inner, d1).map_err(err),
            None => Ok(OffsetSpec::zero(&self.inner)),
        }
    }

    fn config(
        &self,
        order: Order,
        rate: Option<f64>,
        bins: Option<Vec<(i8, u64)>>,
        d1: Option<f64>,
        max_rounds: u32,
    ) -> PyResult<ProtocolConfig> {
        let offset = self.offset(d1)?;
        let bins = match (order, bins, rate) {
            (Order::Infinite, _, _) => Vec::new(),
            (_, Some(bins), _) => bins,
            (_, None, Some(rate)) => {
                if self.inner.is_rectangular() {
                    Vec::new()
                } else {
                    let geom = cell_geometry(&self.inner, &offset);
                    match order {
                        Order::Order12 => {
                            let profile = boundary_profile(&self.inner, &offset);
                            allocate_bins(&geom, &profile, rate).map_err(err)?.to_bins()
                        }
                        Order::Order21 => allocate_strip_bins(&self.inner, &geom, &offset, rate)
                            .map_err(err)?
                            .to_bins(),
                        Order::Infinite => unreachable!(),
                    }
                }
            }
            (_, None, None) if self.inner.is_rectangular() => Vec::new(),
            (_, None, None) => {
                return Err(PyValueError::new_err(
                    "single-round protocols need bins or a rate",
                ))
            }
        };
        Ok(ProtocolConfig::with_bins(order, offset, bins).with_max_rounds(max_rounds))
    }
}

fn transcript_dict<'py>(py: Python<'py>, t: &Transcript) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let msgs = PyList::empty(py);
    for m in &t.messages {
        let sender = match m.sender {
            cvp2p::Node::One => 1,
            cvp2p::Node::Two => 2,
        };
        msgs.append((sender, m.symbol, m.bits))?;
    }
    d.set_item("messages", msgs)?;
    d.set_item("rounds", t.rounds)?;
    d.set_item("total_bits", t.total_bits())?;
    d.set_item("decode_u", (t.decode().u[0], t.decode().u[1]))?;
    d.set_item("decode_y", (t.decode().y[0], t.decode().y[1]))?;
    Ok(d)
}

#[pymethods]
impl Lattice {
    /// Build a lattice with generator `alpha * [[1, rho cos t], [0, rho sin t]]`.
    #[new]
    #[pyo3(signature = (rho, theta, alpha = 1.0))]
    fn new(rho: f64, theta: f64, alpha: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Lattice2D::new(rho, theta, alpha).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (alpha = 1.0))]
    fn hexagonal(alpha: f64) -> Self {
        Self {
            inner: Lattice2D::hexagonal(alpha),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (alpha = 1.0))]
    fn square(alpha: f64) -> Self {
        Self {
            inner: Lattice2D::square(alpha),
        }
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    /// rho * cos(theta).
    #[getter]
    fn skew(&self) -> f64 {
        self.inner.skew()
    }

    #[getter]
    fn cell_width(&self) -> f64 {
        self.inner.cell_width()
    }

    #[getter]
    fn cell_height(&self) -> f64 {
        self.inner.cell_height()
    }

    fn is_rectangular(&self) -> bool {
        self.inner.is_rectangular()
    }

    /// The six vectors whose bisectors bound the Voronoi cell.
    fn relevant_vectors(&self) -> Vec<(f64, f64)> {
        self.inner
            .relevant_vectors()
            .iter()
            .map(|v| (v[0], v[1]))
            .collect()
    }

    /// Babai (nearest-plane) decoding of `(x1, x2)` against the partition
    /// translated by `offset`. Returns `((u1, u2), (y1, y2))`.
    #[pyo3(signature = (x1, x2, offset = (0.0, 0.0)))]
    fn babai(&self, x1: f64, x2: f64, offset: (f64, f64)) -> ((i64, i64), (f64, f64)) {
        let p = self.inner.babai_decode([x1, x2], [offset.0, offset.1]);
        ((p.u[0], p.u[1]), (p.y[0], p.y[1]))
    }

    /// Exact closest lattice point. Returns `((u1, u2), (y1, y2))`.
    fn nearest(&self, x1: f64, x2: f64) -> ((i64, i64), (f64, f64)) {
        let p = self.inner.nearest_point([x1, x2]);
        ((p.u[0], p.u[1]), (p.y[0], p.y[1]))
    }

    /// Closed-cell membership of `(x1, x2)` in the Voronoi cell of `u`.
    fn voronoi_contains(&self, x1: f64, x2: f64, u: (i64, i64)) -> bool {
        self.inner
            .voronoi_contains([x1, x2], &self.inner.point([u.0, u.1]))
    }

    /// Area of the axis-aligned rectangle `(x1_lo, x1_hi, x2_lo, x2_hi)`
    /// intersected with the Voronoi cell of `u`.
    fn rect_voronoi_area(&self, rect: (f64, f64, f64, f64), u: (i64, i64)) -> f64 {
        let rect = Rect::new(rect.0, rect.1, rect.2, rect.3);
        rect_voronoi_area(&self.inner, &rect, &self.inner.point([u.0, u.1]))
    }

    /// Thresholds, interval lengths/heights and strip structure of the
    /// (optionally offset) cell.
    #[pyo3(signature = (d1 = None))]
    fn cell_geometry<'py>(&self, py: Python<'py>, d1: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let offset = self.offset(d1)?;
        let geom = cell_geometry(&self.inner, &offset);
        let std = geom
            .standard
            .as_ref()
            .expect("d-family offsets have the standard layout");
        let d = PyDict::new(py);
        d.set_item("width", geom.width)?;
        d.set_item("height", geom.height)?;
        d.set_item("l0", geom.l0())?;
        d.set_item("thresholds", std.thresholds.to_vec())?;
        d.set_item("lengths", std.lengths.to_vec())?;
        d.set_item("heights", std.heights.to_vec())?;
        d.set_item("strip_thresholds", std.strip_thresholds.to_vec())?;
        d.set_item("strip_heights", std.strip_heights.to_vec())?;
        d.set_item("offset_x0", (offset.x0()[0], offset.x0()[1]))?;
        d.set_item("d", offset.d().map(|v| v.to_vec()))?;
        Ok(d)
    }

    /// Lower and upper decision-boundary values `(l(x1), u(x1))`.
    #[pyo3(signature = (x1, d1 = None))]
    fn boundary(&self, x1: f64, d1: Option<f64>) -> PyResult<(f64, f64)> {
        let profile = boundary_profile(&self.inner, &self.offset(d1)?);
        Ok((profile.lower_at(x1), profile.upper_at(x1)))
    }

    /// `E[H(Q(X1))]` (order "12") or `E[H(P(X2))]` (order "21"), in bits.
    #[pyo3(signature = (order = "12", d1 = None))]
    fn expected_split_entropy(&self, order: &str, d1: Option<f64>) -> PyResult<f64> {
        let offset = self.offset(d1)?;
        match parse_order(order)? {
            Order::Order12 => {
                let geom = cell_geometry(&self.inner, &offset);
                let profile = boundary_profile(&self.inner, &offset);
                Ok(expected_split_entropy_12(&geom, &profile))
            }
            Order::Order21 => expected_split_entropy_21(&self.inner, &offset).map_err(err),
            Order::Infinite => Err(PyValueError::new_err("use order '12' or '21'")),
        }
    }

    /// Limiting `(p0, constant)` of `P_e ~ constant * 2^(-R/(1-p0))`.
    #[pyo3(signature = (order, d1 = None))]
    fn pe_rate_constant(&self, order: &str, d1: Option<f64>) -> PyResult<(f64, f64)> {
        let c =
            pe_rate_constant(&self.inner, &self.offset(d1)?, parse_order(order)?).map_err(err)?;
        Ok((c.p0, c.constant))
    }

    /// Jensen-optimal bin counts for a Stage-II rate target:
    /// `[(subinterval index, real optimum, integer count)]`.
    #[pyo3(signature = (rate, order = "12", d1 = None))]
    fn allocate_bins(
        &self,
        rate: f64,
        order: &str,
        d1: Option<f64>,
    ) -> PyResult<Vec<(i8, f64, u64)>> {
        let offset = self.offset(d1)?;
        let geom = cell_geometry(&self.inner, &offset);
        let alloc = match parse_order(order)? {
            Order::Order12 => {
                let profile = boundary_profile(&self.inner, &offset);
                allocate_bins(&geom, &profile, rate).map_err(err)?
            }
            Order::Order21 => {
                allocate_strip_bins(&self.inner, &geom, &offset, rate).map_err(err)?
            }
            Order::Infinite => {
                return Err(PyValueError::new_err("the infinite order uses no bins"))
            }
        };
        Ok(alloc.bins)
    }

    /// Closed-form quantities of the zero-error bit exchange:
    /// `{rate_bits, rounds, q, p_pos, p_neg}`.
    #[pyo3(signature = (d1 = None))]
    fn infinite_round_quantities<'py>(
        &self,
        py: Python<'py>,
        d1: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let d1 = match d1 {
            Some(d1) => d1,
            None => self.inner.alpha() * self.inner.skew() / 2.0,
        };
        let q = infinite_round_quantities(&self.inner, d1).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("rate_bits", q.rate_bits)?;
        d.set_item("rounds", q.rounds)?;
        d.set_item("q", q.q.weights().to_vec())?;
        d.set_item("p_pos", q.p_pos.weights().to_vec())?;
        d.set_item("p_neg", q.p_neg.weights().to_vec())?;
        Ok(d)
    }

    /// Run one Stage-II protocol execution on `(x1, x2)`; returns the
    /// transcript as a dict.
    #[pyo3(signature = (x1, x2, order = "inf", rate = None, bins = None, d1 = None, max_rounds = 64))]
    #[allow(clippy::too_many_arguments)]
    fn run_protocol<'py>(
        &self,
        py: Python<'py>,
        x1: f64,
        x2: f64,
        order: &str,
        rate: Option<f64>,
        bins: Option<Vec<(i8, u64)>>,
        d1: Option<f64>,
        max_rounds: u32,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = self.config(parse_order(order)?, rate, bins, d1, max_rounds)?;
        let protocol = Protocol::new(&self.inner, cfg).map_err(err)?;
        let t = protocol.run([x1, x2]).map_err(err)?;
        transcript_dict(py, &t)
    }

    /// Monte Carlo estimate of the single-round error probability:
    /// `{pe, pe_stderr, pe_exact, rate_ideal, rate_plugin, rate_modeled}`.
    #[pyo3(signature = (order, samples, seed, rate = None, bins = None, d1 = None))]
    #[allow(clippy::too_many_arguments)]
    fn estimate_error_prob<'py>(
        &self,
        py: Python<'py>,
        order: &str,
        samples: u64,
        seed: u64,
        rate: Option<f64>,
        bins: Option<Vec<(i8, u64)>>,
        d1: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = self.config(parse_order(order)?, rate, bins, d1, 64)?;
        let stats = single_round_stats(&self.inner, &cfg, samples, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("pe", stats.pe.mean)?;
        d.set_item("pe_stderr", stats.pe.std_error)?;
        d.set_item("pe_exact", stats.pe_exact)?;
        d.set_item("rate_ideal", stats.rate_ideal.mean)?;
        d.set_item("rate_plugin", stats.rate_plugin)?;
        d.set_item("rate_modeled", stats.rate_modeled)?;
        Ok(d)
    }

    /// Monte Carlo estimate of the infinite-round rate and rounds; aborts on
    /// any decode mismatch: `{rate, rate_stderr, rounds, rounds_stderr,
    /// rate_plugin, errors}`.
    #[pyo3(signature = (samples, seed, d1 = None))]
    fn estimate_infinite_round<'py>(
        &self,
        py: Python<'py>,
        samples: u64,
        seed: u64,
        d1: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let d1 = match d1 {
            Some(d1) => d1,
            None => self.inner.alpha() * self.inner.skew() / 2.0,
        };
        let stats = estimate_infinite_round(&self.inner, d1, samples, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("rate", stats.rate.mean)?;
        d.set_item("rate_stderr", stats.rate.std_error)?;
        d.set_item("rounds", stats.rounds.mean)?;
        d.set_item("rounds_stderr", stats.rounds.std_error)?;
        d.set_item("rate_plugin", stats.rate_plugin)?;
        d.set_item("errors", stats.errors)?;
        Ok(d)
    }

    /// Stage-I entropy experiment: plug-in (Miller-Madow) entropy of the
    /// Babai coefficients, reported as `H(U) + 2 log2 alpha`.
    #[pyo3(signature = (source, samples, seed))]
    fn stage1_entropy_experiment<'py>(
        &self,
        py: Python<'py>,
        source: &str,
        samples: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let source = StageOneSource::from_str(source).map_err(err)?;
        let est = stage1_entropy_experiment(&self.inner, source, samples, seed);
        let d = PyDict::new(py);
        d.set_item("estimate", est.estimate.mean)?;
        d.set_item("std_error", est.estimate.std_error)?;
        d.set_item("raw_entropy", est.raw_entropy)?;
        d.set_item("distinct_cells", est.distinct_cells)?;
        d.set_item("undersampled", est.undersampled)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice(rho={}, theta={}, alpha={})",
            self.inner.rho(),
            self.inner.theta(),
            self.inner.alpha()
        )
    }
}

/// Shannon entropy (bits) of a weight vector; weights must be nonnegative
/// (normalization is not required).
#[pyfunction]
fn entropy_bits(weights: Vec<f64>) -> f64 {
    cvp2p::analytic::entropy_bits(&weights)
}

/// Small-cell Stage-I rate limit `h1 + h2 - 2 log2(alpha)` in bits.
#[pyfunction]
fn stage1_rate_limit(alpha: f64, h1_bits: f64, h2_bits: f64) -> f64 {
    cvp2p::stage1_rate_limit(alpha, h1_bits, h2_bits)
}

#[pymodule]
fn cvp2p_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Lattice>()?;
    m.add_function(wrap_pyfunction!(entropy_bits, m)?)?;
    m.add_function(wrap_pyfunction!(stage1_rate_limit, m)?)?;
    Ok(())
}
