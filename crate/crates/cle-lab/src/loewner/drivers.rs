//! Driving processes for chordal and radial Loewner evolutions.
//!
//! Chordal drivers follow `SLE_κ(ρ_L; ρ_R)` with one force point on each
//! side of the seed; radial drivers follow the weight `κ−6` angle equation
//! whose renewal structure underlies the loop construction. Both are
//! integrated by Euler–Maruyama on a uniform grid and are bit-reproducible
//! from their seed.

use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use super::LoewnerError;

/// Hard ceiling on `κ·dt` before the Euler scheme is rejected.
pub const KAPPA_DT_LIMIT: f64 = 0.1;

/// Default reflection distance from the angle singularities.
pub const DEFAULT_EPS_THETA: f64 = 1e-4;

/// A chordal `SLE_κ(ρ_L; ρ_R)` driving path on a uniform time grid.
///
/// The force points start infinitesimally to the left and right of the seed
/// and satisfy `V_L ≤ W ≤ V_R` at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordalDriver {
    /// Strictly increasing time grid starting at 0.
    pub times: Vec<f64>,
    /// Driving value per grid point.
    pub w: Vec<f64>,
    /// Left force-point track.
    pub v_left: Vec<f64>,
    /// Right force-point track.
    pub v_right: Vec<f64>,
    /// Diffusivity in (0, 8).
    pub kappa: f64,
    /// Left force-point weight.
    pub rho_left: f64,
    /// Right force-point weight.
    pub rho_right: f64,
    /// Seed the path was drawn from.
    pub seed: u64,
}

/// One renewal event of a radial driver: the unwrapped angle crossed a
/// multiple of 2π different from the last one it touched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalEvent {
    /// Interpolated crossing time.
    pub time: f64,
    /// Index of the first grid point at or after the crossing.
    pub grid_index: usize,
    /// +1 if the angle increased by 2π since the previous renewal, −1 if it
    /// decreased.
    pub sign: i8,
    /// Time of the last touch of the departed level before this crossing:
    /// the loop-opening time when `sign = +1`. Negative infinity when the
    /// departed touch predates the recorded window.
    #[serde(with = "maybe_unobserved")]
    pub prev_touch: f64,
}

/// Serde adapter encoding an unobserved (non-finite) time as `null` and
/// decoding `null` back to negative infinity, since JSON has no literal
/// for non-finite floats.
mod maybe_unobserved {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// A radial weight-`κ−6` driving pair on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDriver {
    /// Strictly increasing time grid starting at 0.
    pub times: Vec<f64>,
    /// Driving point on the unit circle per grid point.
    pub w: Vec<C>,
    /// Dual boundary point on the unit circle per grid point.
    pub o: Vec<C>,
    /// Continuous (unwrapped) version of `arg W − arg O`.
    pub theta: Vec<f64>,
    /// Renewal events in time order.
    pub renewals: Vec<RenewalEvent>,
    /// Diffusivity in (4, 8).
    pub kappa: f64,
    /// Seed the path was drawn from.
    pub seed: u64,
}

/// Initial condition for the radial angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta0 {
    /// Start the angle at a fixed value in (0, 2π).
    Fixed(f64),
    /// Start at 0 with level 0 counted as touched at time 0: the driving
    /// and dual points begin together, as for an exploration rooted at a
    /// boundary point with an adjacent force point.
    BoundaryRoot,
    /// Run an unrecorded burn-in from the symmetric angle π so the recorded
    /// path starts near the stationary angle law.
    StationaryBurnIn,
}

/// Tuning knobs for [`sample_radial_kr_with`].
#[derive(Debug, Clone, Copy)]
pub struct RadialOptions {
    /// Distance floor for evaluating the singular drift near the angle
    /// levels; `None` disables the regularizer and close approaches become
    /// errors.
    pub eps_theta: Option<f64>,
    /// Burn-in duration used by [`Theta0::StationaryBurnIn`].
    pub burn_in: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions { eps_theta: Some(DEFAULT_EPS_THETA), burn_in: 4.0 }
    }
}

/// Draws a chordal `SLE_κ(ρ_L; ρ_R)` driver on `[0, T]` with step `dt`.
///
/// The scheme is Euler–Maruyama for the driver with the standard
/// force-point dynamics `dV = 2 dt / (V − W)`; after each step the force
/// points are pushed to keep `V_L ≤ W ≤ V_R` (the absorbed state). Force
/// points start at `W_0^∓`.
pub fn sample_chordal_driver(
    kappa: f64,
    rho_left: f64,
    rho_right: f64,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<ChordalDriver, LoewnerError> {
    if !(0.0..8.0).contains(&kappa) || kappa == 0.0 {
        return Err(LoewnerError::BadParameter(format!("kappa {kappa} outside (0, 8)")));
    }
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(LoewnerError::BadParameter("need a positive dt and horizon".into()));
    }
    if kappa * dt > KAPPA_DT_LIMIT {
        return Err(LoewnerError::StepTooLarge { kappa_dt: kappa * dt, limit: KAPPA_DT_LIMIT });
    }
    if rho_left <= -2.0 || rho_right <= -2.0 {
        return Err(LoewnerError::BadParameter("force weights must exceed -2".into()));
    }
    let n = (t_end / dt).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_kdt = (kappa * dt).sqrt();
    // Distance floor for the singular 1/gap drifts: at √dt the largest
    // drift increment stays on the order of the step noise, while the
    // fraction of steps affected (and thus the moment bias) stays small.
    let floor = dt.sqrt();

    let mut times = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    let mut vl = Vec::with_capacity(n + 1);
    let mut vr = Vec::with_capacity(n + 1);
    let (mut wt, mut vlt, mut vrt) = (0.0f64, 0.0f64, 0.0f64);
    times.push(0.0);
    w.push(wt);
    vl.push(vlt);
    vr.push(vrt);
    for k in 1..=n {
        let gauss = sample_standard_normal(&mut rng);
        let gap_l = (wt - vlt).max(floor);
        let gap_r = (vrt - wt).max(floor);
        let drift = rho_left / gap_l - rho_right / gap_r;
        wt += sqrt_kdt * gauss + drift * dt;
        vlt -= 2.0 * dt / gap_l;
        vrt += 2.0 * dt / gap_r;
        // Absorption: a force point overtaken by the driver rides along it.
        vlt = vlt.min(wt);
        vrt = vrt.max(wt);
        times.push(k as f64 * dt);
        w.push(wt);
        vl.push(vlt);
        vr.push(vrt);
    }
    Ok(ChordalDriver { times, w, v_left: vl, v_right: vr, kappa, rho_left, rho_right, seed })
}

/// Draws a radial weight-`κ−6` driver on `[0, T]` with step `dt` and
/// default options.
pub fn sample_radial_kr(
    kappa: f64,
    t_end: f64,
    dt: f64,
    theta0: Theta0,
    seed: u64,
) -> Result<RadialDriver, LoewnerError> {
    sample_radial_kr_with(kappa, t_end, dt, theta0, seed, RadialOptions::default())
}

/// Draws a radial weight-`κ−6` driver with explicit options.
///
/// The unwrapped angle `θ = arg W − arg O` follows
/// `dθ = √κ dB + ((κ−4)/2)·cot(θ/2) dt`. The multiples of 2π are
/// two-sided repelling singularities which the path crosses freely: a
/// crossing of the most recently touched level just updates the touch
/// time, while a crossing of any other level is a renewal (the touched
/// level changes by ±1 there, so between renewals the path roams the
/// double band around its last touched level). The driver angle receives
/// the same noise plus the weight-`(κ−6)` force drift.
pub fn sample_radial_kr_with(
    kappa: f64,
    t_end: f64,
    dt: f64,
    theta0: Theta0,
    seed: u64,
    opts: RadialOptions,
) -> Result<RadialDriver, LoewnerError> {
    if !(4.0..8.0).contains(&kappa) || kappa == 4.0 {
        return Err(LoewnerError::BadParameter(format!("kappa {kappa} outside (4, 8)")));
    }
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(LoewnerError::BadParameter("need a positive dt and horizon".into()));
    }
    if kappa * dt > KAPPA_DT_LIMIT {
        return Err(LoewnerError::StepTooLarge { kappa_dt: kappa * dt, limit: KAPPA_DT_LIMIT });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut state = match theta0 {
        Theta0::Fixed(v) => {
            if !(0.0..TAU).contains(&v) || v == 0.0 {
                return Err(LoewnerError::BadParameter(format!("theta0 {v} outside (0, 2pi)")));
            }
            AngleState::new(v, opts.eps_theta)
        }
        Theta0::BoundaryRoot => {
            // Start at the singularity itself, with level 0 already counted
            // as touched at time 0: the first upward renewal then has a
            // well-defined loop-opening time.
            let mut s = AngleState::new(0.0, opts.eps_theta);
            s.last_level = Some(0);
            s.last_touch_time = 0.0;
            s
        }
        Theta0::StationaryBurnIn => {
            let mut s = AngleState::new(PI, opts.eps_theta);
            let burn_steps = (opts.burn_in / dt).ceil() as usize;
            for k in 0..burn_steps {
                let t = k as f64 * dt;
                s.step(kappa, dt, t, &mut rng)
                    .map_err(|theta| LoewnerError::AngleSingularity { theta, time: t })?;
            }
            AngleState::new(s.theta.rem_euclid(TAU), opts.eps_theta)
        }
    };
    let th0 = state.theta;

    let n = (t_end / dt).ceil() as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    let mut o = Vec::with_capacity(n + 1);
    let mut theta = Vec::with_capacity(n + 1);
    let mut renewals = Vec::new();

    let mut phi = 0.0f64; // arg W, continuous
    times.push(0.0);
    theta.push(th0);
    w.push(C::from_polar(1.0, phi));
    o.push(C::from_polar(1.0, phi - th0));
    for k in 1..=n {
        let t_prev = (k - 1) as f64 * dt;
        let out = state
            .step(kappa, dt, t_prev, &mut rng)
            .map_err(|theta| LoewnerError::AngleSingularity { theta, time: t_prev })?;
        if let Some((time, sign, prev_touch)) = out.renewal {
            renewals.push(RenewalEvent { time, grid_index: k, sign, prev_touch });
        }
        phi += out.dphi;
        times.push(k as f64 * dt);
        theta.push(state.theta);
        w.push(C::from_polar(1.0, phi));
        o.push(C::from_polar(1.0, phi - state.theta));
    }
    Ok(RadialDriver { times, w, o, theta, renewals, kappa, seed })
}

/// Result of one angle step.
struct StepOut {
    /// Driver-angle increment over the step.
    dphi: f64,
    /// Renewal fired during the step: `(time, sign, prev_touch)`.
    renewal: Option<(f64, i8, f64)>,
}

/// Integrator state for the unwrapped angle with band bookkeeping.
struct AngleState {
    theta: f64,
    eps: Option<f64>,
    /// Last multiple of 2π the path touched, as an integer multiple.
    last_level: Option<i64>,
    /// Time of the most recent touch of `last_level`.
    last_touch_time: f64,
}

impl AngleState {
    fn new(theta: f64, eps: Option<f64>) -> Self {
        AngleState { theta, eps, last_level: None, last_touch_time: f64::NEG_INFINITY }
    }

    /// One Euler–Maruyama step starting at time `t`. Returns `Err(theta)`
    /// when the regularizer is disabled and the angle is too close to a
    /// singularity to evaluate the drift.
    fn step(
        &mut self,
        kappa: f64,
        dt: f64,
        t: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<StepOut, f64> {
        let th = self.theta;
        let nearest = TAU * (th / TAU).round();
        let d = th - nearest;
        let guard = self.eps.unwrap_or(DEFAULT_EPS_THETA).max(1e-12);
        if self.eps.is_none() && d != 0.0 && d.abs() < guard {
            return Err(th);
        }
        // Evaluate the singular drift at a distance from the nearest level
        // floored at max(eps, step noise scale): the clamped drift increment
        // then stays on the order of one noise increment, and only the
        // O(√dt)-layer dynamics are distorted.
        let floor = guard.max((kappa * dt).sqrt());
        let cot = if d == 0.0 {
            0.0 // symmetric point of the two-sided singularity
        } else {
            let half = (nearest + d.signum() * d.abs().max(floor)) / 2.0;
            half.cos() / half.sin()
        };
        let noise = (kappa * dt).sqrt() * sample_standard_normal(rng);
        let proposal = th + noise + 0.5 * (kappa - 4.0) * cot * dt;
        let dphi = noise + 0.5 * (kappa - 6.0) * cot * dt;

        // The path crosses 2π-levels freely. Record crossings in path
        // order; a crossing of the last touched level updates the touch
        // time, any other level is a renewal. Clamped drift plus κ·dt ≤ 0.1
        // keeps increments far below 2π, so at most one level is crossed
        // per step in practice, but the scan is order-robust regardless.
        let mut renewal = None;
        let (lo, hi) = (th.min(proposal), th.max(proposal));
        let mut levels: Vec<i64> =
            ((lo / TAU).floor() as i64 + 1..=(hi / TAU).floor() as i64).collect();
        if proposal < th {
            levels.reverse();
        }
        for level in levels {
            let edge = TAU * level as f64;
            if edge == th {
                continue; // departing from an exact level is not a crossing
            }
            let frac = ((edge - th) / (proposal - th)).clamp(0.0, 1.0);
            let t_cross = t + frac * dt;
            if self.last_level == Some(level) {
                self.last_touch_time = t_cross;
            } else {
                let sign = if proposal > th { 1i8 } else { -1i8 };
                renewal = Some((t_cross, sign, self.last_touch_time));
                self.last_level = Some(level);
                self.last_touch_time = t_cross;
            }
        }
        self.theta = proposal;
        Ok(StepOut { dphi, renewal })
    }
}

/// Standard normal sample via Box–Muller on the given stream.
pub(crate) fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Scans a continuous piecewise-linear angle path for renewal crossings.
///
/// Returns `(interpolated time, sign)` per event, applying the same rule
/// as the sampler: a crossing of a 2π-multiple counts only when the level
/// differs from the last level touched.
pub fn scan_renewals(times: &[f64], theta: &[f64]) -> Vec<(f64, i8)> {
    let mut events = Vec::new();
    let mut last_level: Option<i64> = None;
    for k in 1..theta.len().min(times.len()) {
        let (a, b) = (theta[k - 1], theta[k]);
        if a == b {
            continue;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let mut crossings: Vec<i64> = ((lo / TAU).ceil() as i64..)
            .take_while(|&m| (m as f64) * TAU < hi)
            .filter(|&m| (m as f64) * TAU > lo)
            .collect();
        if b < a {
            crossings.reverse(); // traversal order
        }
        for level in crossings {
            let level_val = level as f64 * TAU;
            let frac = (level_val - a) / (b - a);
            let time = times[k - 1] + frac * (times[k] - times[k - 1]);
            if last_level != Some(level) {
                events.push((time, if b > a { 1 } else { -1 }));
            }
            last_level = Some(level);
        }
    }
    events
}

const DRIVER_MAGIC: &[u8; 4] = b"LDRV";

/// JSON header of a serialized driver file.
#[derive(Debug, Serialize, Deserialize)]
struct DriverHeader {
    schema_version: u32,
    kind: String,
    kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_right: Option<f64>,
    seed: u64,
    dt: f64,
    points: usize,
    columns: Vec<String>,
    #[serde(default)]
    renewals: Vec<RenewalEvent>,
}

fn write_columns<W: Write>(out: &mut W, cols: &[&[f64]]) -> std::io::Result<()> {
    for col in cols {
        for &v in *col {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_column<R: Read>(input: &mut R, n: usize) -> std::io::Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    input.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn write_header<W: Write>(out: &mut W, header: &DriverHeader) -> Result<(), LoewnerError> {
    let json = serde_json::to_vec(header)?;
    out.write_all(DRIVER_MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    Ok(())
}

fn read_header<R: Read>(input: &mut R) -> Result<DriverHeader, LoewnerError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != DRIVER_MAGIC {
        return Err(LoewnerError::BadParameter("not a driver file".into()));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut json)?;
    Ok(serde_json::from_slice(&json)?)
}

impl ChordalDriver {
    /// Grid spacing (the grid is uniform).
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    /// Writes the driver as a JSON header plus little-endian f64 columns.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<(), LoewnerError> {
        let header = DriverHeader {
            schema_version: 1,
            kind: "chordal".into(),
            kappa: self.kappa,
            rho_left: Some(self.rho_left),
            rho_right: Some(self.rho_right),
            seed: self.seed,
            dt: self.dt(),
            points: self.times.len(),
            columns: vec!["times".into(), "w".into(), "v_left".into(), "v_right".into()],
            renewals: Vec::new(),
        };
        write_header(out, &header)?;
        write_columns(out, &[&self.times, &self.w, &self.v_left, &self.v_right])?;
        Ok(())
    }

    /// Reads a driver written by [`ChordalDriver::write_to`].
    pub fn read_from<R: Read>(input: &mut R) -> Result<Self, LoewnerError> {
        let header = read_header(input)?;
        if header.kind != "chordal" {
            return Err(LoewnerError::BadParameter(format!(
                "expected a chordal driver, found {}",
                header.kind
            )));
        }
        let n = header.points;
        let times = read_column(input, n)?;
        let w = read_column(input, n)?;
        let v_left = read_column(input, n)?;
        let v_right = read_column(input, n)?;
        Ok(ChordalDriver {
            times,
            w,
            v_left,
            v_right,
            kappa: header.kappa,
            rho_left: header.rho_left.unwrap_or(0.0),
            rho_right: header.rho_right.unwrap_or(0.0),
            seed: header.seed,
        })
    }
}

impl RadialDriver {
    /// Grid spacing (the grid is uniform).
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    /// Renewal events with `sign = +1` (loop-closure crossings).
    pub fn closure_events(&self) -> impl Iterator<Item = &RenewalEvent> {
        self.renewals.iter().filter(|r| r.sign == 1)
    }

    /// Writes the driver as a JSON header plus little-endian f64 columns.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<(), LoewnerError> {
        let header = DriverHeader {
            schema_version: 1,
            kind: "radial".into(),
            kappa: self.kappa,
            rho_left: None,
            rho_right: None,
            seed: self.seed,
            dt: self.dt(),
            points: self.times.len(),
            columns: vec![
                "times".into(),
                "w_re".into(),
                "w_im".into(),
                "o_re".into(),
                "o_im".into(),
                "theta".into(),
            ],
            renewals: self.renewals.clone(),
        };
        write_header(out, &header)?;
        let w_re: Vec<f64> = self.w.iter().map(|c| c.re).collect();
        let w_im: Vec<f64> = self.w.iter().map(|c| c.im).collect();
        let o_re: Vec<f64> = self.o.iter().map(|c| c.re).collect();
        let o_im: Vec<f64> = self.o.iter().map(|c| c.im).collect();
        write_columns(out, &[&self.times, &w_re, &w_im, &o_re, &o_im, &self.theta])?;
        Ok(())
    }

    /// Reads a driver written by [`RadialDriver::write_to`].
    pub fn read_from<R: Read>(input: &mut R) -> Result<Self, LoewnerError> {
        let header = read_header(input)?;
        if header.kind != "radial" {
            return Err(LoewnerError::BadParameter(format!(
                "expected a radial driver, found {}",
                header.kind
            )));
        }
        let n = header.points;
        let times = read_column(input, n)?;
        let w_re = read_column(input, n)?;
        let w_im = read_column(input, n)?;
        let o_re = read_column(input, n)?;
        let o_im = read_column(input, n)?;
        let theta = read_column(input, n)?;
        let w = w_re.iter().zip(&w_im).map(|(&re, &im)| C::new(re, im)).collect();
        let o = o_re.iter().zip(&o_im).map(|(&re, &im)| C::new(re, im)).collect();
        Ok(RadialDriver {
            times,
            w,
            o,
            theta,
            renewals: header.renewals,
            kappa: header.kappa,
            seed: header.seed,
        })
    }
}
