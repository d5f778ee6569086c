//! Physical-layer model: power decay, SINR, reception tests and the three
//! characteristic ranges (transmission, interference, carrier sensing).
//!
//! All power arithmetic is carried out in linear units; dBm appears only at
//! the configuration and reporting boundary. Threshold comparisons are
//! inclusive (`>=`). With zero white noise an empty interferer set yields an
//! infinite SINR, which compares greater than any finite threshold.

use crate::error::{Error, Result};
use crate::geom::Point;

/// Transmit or received power in linear units (the propagation constant is
/// folded into the transmit power, so only ratios matter).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Power(f64);

impl Power {
    pub fn from_linear(value: f64) -> Self {
        Power(value)
    }

    pub fn from_dbm(dbm: f64) -> Self {
        Power(10f64.powf(dbm / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn dbm(self) -> f64 {
        10.0 * self.0.log10()
    }

    pub fn scale(self, factor: f64) -> Self {
        Power(self.0 * factor)
    }
}

/// Parameters of the physical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Path-loss exponent, at least 2.
    pub alpha: f64,
    /// SINR threshold for decoding, greater than 1.
    pub beta: f64,
    /// Receive power threshold (linear).
    pub h_r: f64,
    /// Carrier-sense threshold (linear); defaults to `h_r / beta`.
    pub h_s: f64,
    /// White-noise power (linear); may be zero.
    pub n0: f64,
    /// Channel rate in packets per slot; capacities are reported in units
    /// of this rate.
    pub w: f64,
}

impl PhysicalParams {
    pub fn new(alpha: f64, beta: f64, h_r: f64, n0: f64) -> Result<Self> {
        if !(alpha >= 2.0) {
            return Err(Error::InvalidParams(format!("alpha must be >= 2, got {alpha}")));
        }
        if !(beta > 1.0) {
            return Err(Error::InvalidParams(format!("beta must be > 1, got {beta}")));
        }
        if !(h_r > 0.0) {
            return Err(Error::InvalidParams(format!("h_r must be positive, got {h_r}")));
        }
        if !(n0 >= 0.0) {
            return Err(Error::InvalidParams(format!("n0 must be non-negative, got {n0}")));
        }
        Ok(PhysicalParams {
            alpha,
            beta,
            h_r,
            h_s: h_r / beta,
            n0,
            w: 1.0,
        })
    }

    pub fn with_sense_threshold(mut self, h_s: f64) -> Result<Self> {
        if !(h_s > 0.0) {
            return Err(Error::InvalidParams(format!("h_s must be positive, got {h_s}")));
        }
        self.h_s = h_s;
        Ok(self)
    }

    /// The guard constant `beta^(1/alpha) - 1`; positive whenever `beta > 1`.
    pub fn delta(&self) -> f64 {
        self.beta.powf(1.0 / self.alpha) - 1.0
    }
}

impl Default for PhysicalParams {
    /// Two-ray ground loss (`alpha = 4`), `beta = 10`, `H_r = -81` dBm,
    /// `H_s = H_r / 10`, no white noise, unit channel rate.
    fn default() -> Self {
        PhysicalParams::new(4.0, 10.0, Power::from_dbm(-81.0).linear(), 0.0).expect("valid defaults")
    }
}

/// A directed link with its transmitter/receiver positions and length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeom {
    pub tx: Point,
    pub rx: Point,
    pub len: f64,
}

impl LinkGeom {
    pub fn new(tx: Point, rx: Point) -> Result<Self> {
        let len = tx.dist(rx);
        if len <= 0.0 {
            return Err(Error::CoincidentNodes);
        }
        Ok(LinkGeom { tx, rx, len })
    }
}

/// Received power at distance `d` from a transmitter at power `p_t`:
/// `p_t / d^alpha`.
pub fn received_power(p_t: Power, d: f64, params: &PhysicalParams) -> Result<Power> {
    if d <= 0.0 {
        return Err(Error::CoincidentNodes);
    }
    Ok(Power(p_t.0 / d.powf(params.alpha)))
}

/// SINR of a link at its receiver against a set of interfering transmitters
/// using the common transmit power `p_t`. Returns `f64::INFINITY` when the
/// interference sum and white noise are both zero.
pub fn sinr(link: &LinkGeom, interferers: &[Point], p_t: Power, params: &PhysicalParams) -> Result<f64> {
    let signal = received_power(p_t, link.len, params)?.linear();
    let mut noise = params.n0;
    for pos in interferers {
        noise += received_power(p_t, pos.dist(link.rx), params)?.linear();
    }
    if noise == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(signal / noise)
    }
}

/// Reception succeeds iff the received power meets `H_r` and the SINR meets
/// `beta` (both inclusive).
pub fn reception_ok(p_r: Power, sinr_val: f64, params: &PhysicalParams) -> bool {
    p_r.0 >= params.h_r && sinr_val >= params.beta
}

/// Maximum transmitter-receiver distance for successful reception absent
/// interference: `min((p_t/(n0*beta))^(1/alpha), (p_t/h_r)^(1/alpha))`.
/// With `n0 = 0` the first branch is infinite and the second governs.
pub fn transmission_range(p_t: Power, params: &PhysicalParams) -> f64 {
    let noise_branch = (p_t.0 / (params.n0 * params.beta)).powf(1.0 / params.alpha);
    let threshold_branch = (p_t.0 / params.h_r).powf(1.0 / params.alpha);
    noise_branch.min(threshold_branch)
}

/// Smallest transmit power whose transmission range is `r`.
pub fn power_for_range(r: f64, params: &PhysicalParams) -> Result<Power> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("range must be positive, got {r}")));
    }
    let floor = params.h_r.max(params.n0 * params.beta);
    Ok(Power(r.powf(params.alpha) * floor))
}

/// Minimum distance an interfering transmitter must keep from the receiver
/// of a link of length `d`: `beta^(1/alpha) * d`. Independent of power.
pub fn interference_range(d: f64, params: &PhysicalParams) -> f64 {
    params.beta.powf(1.0 / params.alpha) * d
}

/// Maximum distance at which another transmitter is sensed:
/// `(p_t / h_s)^(1/alpha)`.
pub fn carrier_sense_range(p_t: Power, params: &PhysicalParams) -> f64 {
    (p_t.0 / params.h_s).powf(1.0 / params.alpha)
}

/// Total noise sensed at `tx_pos`: the accumulated received power from the
/// currently active transmitters plus white noise. This is the left side of
/// the carrier sensing condition.
pub fn sensed_noise(
    tx_pos: Point,
    active_transmitters: &[Point],
    p_t: Power,
    params: &PhysicalParams,
) -> Result<Power> {
    let mut total = params.n0;
    for pos in active_transmitters {
        total += received_power(p_t, pos.dist(tx_pos), params)?.linear();
    }
    Ok(Power(total))
}
