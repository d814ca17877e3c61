//! System parameters, placement and derived link geometry.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_traits::Float;

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    Float::powf(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * Float::log10(w) + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    Float::powf(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * Float::log10(x)
}

/// Distance-based path loss exponents and reference loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub reference_db: f64,
    pub reference_distance_m: f64,
    pub bs_rdars: f64,
    pub bs_target: f64,
    pub bs_user: f64,
    pub rdars_target: f64,
    pub rdars_user: f64,
}

impl Default for PathLoss {
    fn default() -> Self {
        Self {
            reference_db: -30.0,
            reference_distance_m: 1.0,
            bs_rdars: 2.4,
            bs_target: 2.3,
            bs_user: 3.0,
            rdars_target: 2.0,
            rdars_user: 2.6,
        }
    }
}

/// Initial penalty weights and their decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub rho1_init: f64,
    pub rho2_init: f64,
    pub c1: f64,
    pub c2: f64,
    pub rho_floor: f64,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self { rho1_init: 1e3, rho2_init: 1e5, c1: 0.8, c2: 0.8, rho_floor: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopping {
    pub rel_tol: f64,
    pub residual_tol: f64,
    pub max_iters: usize,
}

impl Default for Stopping {
    fn default() -> Self {
        Self { rel_tol: 1e-4, residual_tol: 1e-6, max_iters: 200 }
    }
}

/// Node positions (m) and the user disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub bs: Point,
    pub rdars: Point,
    pub target: Point,
    pub user_center: Point,
    pub user_radius: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Self {
            bs: [15.0, 0.0, 5.0],
            rdars: [0.0, 0.0, 5.0],
            target: [0.0, 10.0, 0.0],
            user_center: [50.0, 50.0, 0.0],
            user_radius: 5.0,
        }
    }
}

/// Angles that are configured rather than derived from positions (rad).
#[derive(Debug, Clone, PartialEq)]
pub struct FixedAngles {
    /// Azimuth AoD at the BS towards the RDARS.
    pub bs_rdars_departure: f64,
    /// Azimuth AoA at the RDARS from the BS.
    pub bs_rdars_arrival: f64,
    /// Elevation AoA at the RDARS from the BS.
    pub bs_rdars_arrival_elevation: f64,
    /// Azimuth AoD at the RDARS towards the target.
    pub rdars_target_departure: f64,
}

impl Default for FixedAngles {
    fn default() -> Self {
        Self {
            bs_rdars_departure: FRAC_PI_2,
            bs_rdars_arrival: FRAC_PI_4,
            bs_rdars_arrival_elevation: 0.0,
            rdars_target_departure: FRAC_PI_4,
        }
    }
}

/// Full scalar parameter set of one simulated system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub antennas: usize,
    pub elements: usize,
    pub upa_rows: usize,
    pub upa_cols: usize,
    /// Number of RDARS elements in connected mode.
    pub connected: usize,
    pub users: usize,
    pub power_dbm: f64,
    /// Per-user noise power (dBm), one entry per user.
    pub user_noise_dbm: Vec<f64>,
    pub radar_noise_dbm: f64,
    /// Per-user SINR threshold (dB); `-inf` disables the constraint.
    pub sinr_threshold_db: Vec<f64>,
    /// Mean-square radar cross-section (linear).
    pub rcs_mean_square: f64,
    pub rician_factor: f64,
    /// Element spacing over wavelength.
    pub spacing_ratio: f64,
    pub pathloss: PathLoss,
    pub penalty: PenaltyParams,
    pub stopping: Stopping,
    pub placement: Placement,
    pub angles: FixedAngles,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::paper()
    }
}

impl SystemConfig {
    /// The full-size evaluation setting (16 antennas, 120 elements, 3 connected).
    pub fn paper() -> Self {
        let users = 2;
        Self {
            antennas: 16,
            elements: 120,
            upa_rows: 12,
            upa_cols: 10,
            connected: 3,
            users,
            power_dbm: 20.0,
            user_noise_dbm: vec![-80.0; users],
            radar_noise_dbm: -80.0,
            sinr_threshold_db: vec![10.0; users],
            rcs_mean_square: 1.0,
            rician_factor: 0.5,
            spacing_ratio: 0.5,
            pathloss: PathLoss::default(),
            penalty: PenaltyParams::default(),
            stopping: Stopping::default(),
            placement: Placement::default(),
            angles: FixedAngles::default(),
            seed: 0,
        }
    }

    /// Reduced setting used for quick experiments (8 antennas, 6×4 elements, 2 connected).
    pub fn desk() -> Self {
        Self { antennas: 8, elements: 24, upa_rows: 6, upa_cols: 4, connected: 2, ..Self::paper() }
    }

    /// Changes the element count, re-deriving a near-square UPA grid.
    pub fn with_elements(mut self, elements: usize) -> Self {
        let (rows, cols) = near_square_dims(elements);
        self.elements = elements;
        self.upa_rows = rows;
        self.upa_cols = cols;
        self
    }

    /// Changes the user count, broadcasting the first per-user entries.
    pub fn with_users(mut self, users: usize) -> Self {
        let noise = self.user_noise_dbm.first().copied().unwrap_or(-80.0);
        let gamma = self.sinr_threshold_db.first().copied().unwrap_or(10.0);
        self.users = users;
        self.user_noise_dbm = vec![noise; users];
        self.sinr_threshold_db = vec![gamma; users];
        self
    }

    pub fn with_sinr_threshold_db(mut self, db: f64) -> Self {
        self.sinr_threshold_db = vec![db; self.users];
        self
    }

    pub fn power_watts(&self) -> f64 {
        dbm_to_watts(self.power_dbm)
    }

    pub fn radar_noise_watts(&self) -> f64 {
        dbm_to_watts(self.radar_noise_dbm)
    }

    pub fn user_noise_watts(&self) -> Vec<f64> {
        self.user_noise_dbm.iter().map(|&d| dbm_to_watts(d)).collect()
    }

    /// Linear SINR thresholds; a disabled constraint maps to 0.
    pub fn sinr_thresholds(&self) -> Vec<f64> {
        self.sinr_threshold_db.iter().map(|&d| db_to_linear(d)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(key: &'static str, reason: impl ToString) -> Error {
            Error::InvalidConfig { key, reason: reason.to_string() }
        }
        if self.antennas < 1 {
            return Err(bad("antennas", "M must be ≥ 1"));
        }
        if self.elements < 1 {
            return Err(bad("elements", "N must be ≥ 1"));
        }
        if self.upa_rows * self.upa_cols != self.elements {
            return Err(bad(
                "upa_rows",
                format!("{}×{} grid does not hold {} elements", self.upa_rows, self.upa_cols, self.elements),
            ));
        }
        if self.connected < 1 {
            return Err(bad("connected", "a must be ≥ 1"));
        }
        if self.connected > self.elements {
            return Err(bad("connected", format!("a = {} exceeds N = {}", self.connected, self.elements)));
        }
        if self.users < 1 {
            return Err(bad("users", "K must be ≥ 1"));
        }
        if self.user_noise_dbm.len() != self.users {
            return Err(bad("user_noise_dbm", format!("expected {} entries", self.users)));
        }
        if self.sinr_threshold_db.len() != self.users {
            return Err(bad("sinr_threshold_db", format!("expected {} entries", self.users)));
        }
        if !self.power_dbm.is_finite() {
            return Err(bad("power_dbm", "must be finite"));
        }
        if !self.radar_noise_dbm.is_finite() {
            return Err(bad("radar_noise_dbm", "must be finite"));
        }
        if self.user_noise_dbm.iter().any(|x| !x.is_finite()) {
            return Err(bad("user_noise_dbm", "must be finite"));
        }
        if self.sinr_threshold_db.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(bad("sinr_threshold_db", "must be finite or -inf"));
        }
        if !(self.rcs_mean_square > 0.0 && self.rcs_mean_square.is_finite()) {
            return Err(bad("rcs_mean_square", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rician_factor) {
            return Err(bad("rician_factor", "kappa must lie in [0, 1]"));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return Err(bad("spacing_ratio", "must be positive"));
        }
        let pl = &self.pathloss;
        if !(pl.reference_distance_m > 0.0) {
            return Err(bad("pathloss.reference_distance_m", "must be positive"));
        }
        for (key, v) in [
            ("pathloss.reference_db", pl.reference_db),
            ("pathloss.bs_rdars", pl.bs_rdars),
            ("pathloss.bs_target", pl.bs_target),
            ("pathloss.bs_user", pl.bs_user),
            ("pathloss.rdars_target", pl.rdars_target),
            ("pathloss.rdars_user", pl.rdars_user),
        ] {
            if !v.is_finite() {
                return Err(bad(key, "must be finite"));
            }
        }
        let p = &self.penalty;
        if !(p.rho1_init > 0.0) {
            return Err(bad("penalty.rho1_init", "must be positive"));
        }
        if !(p.rho2_init > 0.0) {
            return Err(bad("penalty.rho2_init", "must be positive"));
        }
        if !(p.c1 > 0.0 && p.c1 < 1.0) {
            return Err(bad("penalty.c1", "must lie in (0, 1)"));
        }
        if !(p.c2 > 0.0 && p.c2 < 1.0) {
            return Err(bad("penalty.c2", "must lie in (0, 1)"));
        }
        if !(p.rho_floor > 0.0) {
            return Err(bad("penalty.rho_floor", "must be positive"));
        }
        let s = &self.stopping;
        if !(s.rel_tol > 0.0) {
            return Err(bad("stopping.rel_tol", "must be positive"));
        }
        if !(s.residual_tol > 0.0) {
            return Err(bad("stopping.residual_tol", "must be positive"));
        }
        if s.max_iters < 1 {
            return Err(bad("stopping.max_iters", "must be ≥ 1"));
        }
        let pl = &self.placement;
        for (key, pt) in [
            ("placement.bs", pl.bs),
            ("placement.rdars", pl.rdars),
            ("placement.target", pl.target),
            ("placement.user_center", pl.user_center),
        ] {
            if pt.iter().any(|x| !x.is_finite()) {
                return Err(bad(key, "coordinates must be finite"));
            }
        }
        if !(pl.user_radius >= 0.0 && pl.user_radius.is_finite()) {
            return Err(bad("placement.user_radius", "must be non-negative"));
        }
        let a = &self.angles;
        for (key, v) in [
            ("angles.bs_rdars_departure", a.bs_rdars_departure),
            ("angles.bs_rdars_arrival", a.bs_rdars_arrival),
            ("angles.bs_rdars_arrival_elevation", a.bs_rdars_arrival_elevation),
            ("angles.rdars_target_departure", a.rdars_target_departure),
        ] {
            if !v.is_finite() {
                return Err(bad(key, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Splits `n` into `rows × cols` with `rows ≥ cols` and the factors as close as possible.
pub fn near_square_dims(n: usize) -> (usize, usize) {
    let mut cols = Float::sqrt(n as f64) as usize;
    while cols > 1 && !n.is_multiple_of(cols) {
        cols -= 1;
    }
    let cols = cols.max(1);
    (n / cols, cols)
}

/// Placement plus every distance and angle the channel model needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub placement: Placement,
    /// Horizontal BS–RDARS distance.
    pub d_br: f64,
    /// Horizontal RDARS–target distance.
    pub d_rt: f64,
    /// BS height.
    pub d_h: f64,
    pub theta_br_departure: f64,
    pub theta_br_arrival: f64,
    pub psi_br_arrival: f64,
    pub theta_rt_departure: f64,
    pub psi_rt_departure: f64,
    pub theta_bt_departure: f64,
    /// Link lengths used for path loss.
    pub dist_bs_rdars: f64,
    pub dist_bs_target: f64,
    pub dist_rdars_target: f64,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn distance(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    Float::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}

fn horizontal_distance(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    Float::hypot(d[0], d[1])
}

/// Azimuth of `to` as seen from the BS array: measured from +y towards -x.
pub fn bs_azimuth(bs: Point, to: Point) -> f64 {
    let d = sub(to, bs);
    Float::atan2(-d[0], d[1])
}

/// Azimuth/elevation of `to` seen from the RDARS: azimuth from +x towards +y,
/// elevation positive below the surface height.
pub fn rdars_angles(rdars: Point, to: Point) -> (f64, f64) {
    let d = sub(to, rdars);
    (Float::atan2(d[1], d[0]), Float::atan2(-d[2], Float::hypot(d[0], d[1])))
}

pub fn derive_geometry(config: &SystemConfig, placement: &Placement) -> Result<Geometry> {
    for pt in [placement.bs, placement.rdars, placement.target, placement.user_center] {
        if pt.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite position"));
        }
    }
    let dist_bs_rdars = distance(placement.bs, placement.rdars);
    if dist_bs_rdars == 0.0 {
        return Err(Error::DegenerateGeometry("BS and RDARS coincide"));
    }
    let dist_bs_target = distance(placement.bs, placement.target);
    let dist_rdars_target = distance(placement.rdars, placement.target);
    if dist_bs_target == 0.0 || dist_rdars_target == 0.0 {
        return Err(Error::DegenerateGeometry("target coincides with a transmitter"));
    }
    let d_br = horizontal_distance(placement.bs, placement.rdars);
    let d_rt = horizontal_distance(placement.rdars, placement.target);
    let d_h = placement.bs[2];
    let angles = &config.angles;
    Ok(Geometry {
        placement: placement.clone(),
        d_br,
        d_rt,
        d_h,
        theta_br_departure: angles.bs_rdars_departure,
        theta_br_arrival: angles.bs_rdars_arrival,
        psi_br_arrival: angles.bs_rdars_arrival_elevation,
        theta_rt_departure: angles.rdars_target_departure,
        psi_rt_departure: Float::atan2(d_h, d_rt),
        theta_bt_departure: Float::atan2(d_br, d_rt),
        dist_bs_rdars,
        dist_bs_target,
        dist_rdars_target,
    })
}
