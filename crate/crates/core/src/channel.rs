//! Array responses, path loss, Rician channel synthesis and composite channels.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, RMat, RVec, C64, ZERO};
use crate::scenario::{bs_azimuth, distance, rdars_angles, Geometry, Point, SystemConfig};

/// Array shape and element spacing (in wavelengths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayLayout {
    pub antennas: usize,
    pub upa_rows: usize,
    pub upa_cols: usize,
    pub spacing_ratio: f64,
}

impl ArrayLayout {
    pub fn from_config(config: &SystemConfig) -> Self {
        Self {
            antennas: config.antennas,
            upa_rows: config.upa_rows,
            upa_cols: config.upa_cols,
            spacing_ratio: config.spacing_ratio,
        }
    }

    pub fn elements(&self) -> usize {
        self.upa_rows * self.upa_cols
    }

    pub fn ula(&self, theta: f64) -> Result<CVec> {
        steering_vector(ArrayKind::Ula { elements: self.antennas }, theta, 0.0, self.spacing_ratio)
    }

    pub fn upa(&self, theta: f64, psi: f64) -> Result<CVec> {
        steering_vector(
            ArrayKind::Upa { rows: self.upa_rows, cols: self.upa_cols },
            theta,
            psi,
            self.spacing_ratio,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Ula { elements: usize },
    /// Element `n1·cols + n2` sits at grid position `(n1, n2)`.
    Upa { rows: usize, cols: usize },
}

pub fn steering_vector(kind: ArrayKind, theta: f64, psi: f64, spacing_ratio: f64) -> Result<CVec> {
    if !theta.is_finite() || !psi.is_finite() {
        return Err(Error::NonFiniteAngle);
    }
    let k = -2.0 * PI * spacing_ratio;
    let phase = |x: f64| {
        let (s, c) = Float::sin_cos(k * x);
        C64::new(c, s)
    };
    Ok(match kind {
        ArrayKind::Ula { elements } => {
            let u = Float::sin(theta);
            CVec::from_fn(elements, |m, _| phase(m as f64 * u))
        }
        ArrayKind::Upa { rows, cols } => {
            let u = Float::sin(theta) * Float::cos(psi);
            let v = Float::sin(psi);
            CVec::from_fn(rows * cols, |n, _| phase((n / cols) as f64 * u + (n % cols) as f64 * v))
        }
    })
}

/// Linear power gain `10^((P0 - 10 α log10(d/d0))/10)`.
pub fn path_loss_gain(d_m: f64, exponent: f64, reference_db: f64, reference_distance_m: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_m));
    }
    let db = reference_db - 10.0 * exponent * Float::log10(d_m / reference_distance_m);
    Ok(Float::powf(10.0, db / 10.0))
}

/// Linear path-loss gains per link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub bs_rdars: f64,
    pub bs_target: f64,
    pub rdars_target: f64,
    pub bs_user: Vec<f64>,
    pub rdars_user: Vec<f64>,
}

/// One realization of every propagation channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub layout: ArrayLayout,
    /// BS → RDARS, N×M.
    pub h_br: CMat,
    /// BS → user k, length M.
    pub h_bu: Vec<CVec>,
    /// RDARS → user k, length N.
    pub h_ru: Vec<CVec>,
    /// BS → target, length M.
    pub h_bt: CVec,
    /// RDARS → target, length N.
    pub h_rt: CVec,
    pub gains: LinkGains,
    pub user_positions: Vec<Point>,
}

impl ChannelSet {
    pub fn antennas(&self) -> usize {
        self.h_bt.len()
    }

    pub fn elements(&self) -> usize {
        self.h_rt.len()
    }

    pub fn users(&self) -> usize {
        self.h_bu.len()
    }

    /// Copy with the BS → RDARS link removed, which disables every reflected path.
    pub fn without_reflection(&self) -> Self {
        let mut out = self.clone();
        out.h_br.fill(ZERO);
        out
    }
}

/// Stream identifiers that keep each link's random draws independent of evaluation order.
pub mod stream {
    pub const USER_POSITIONS: u64 = 1;
    pub const BS_RDARS: u64 = 2;
    pub const INITIAL_PHASES: u64 = 3;
    pub const BS_USER: u64 = 0x100;
    pub const RDARS_USER: u64 = 0x200;
}

pub fn link_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Draws a circularly symmetric CN(0, 1) sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn rician(los: CMat, gain: f64, kappa: f64, rng: &mut ChaCha8Rng) -> CMat {
    let (r, c) = los.shape();
    let los_w = Float::sqrt(kappa);
    let nlos_w = Float::sqrt(1.0 - kappa);
    let amp = Float::sqrt(gain);
    // Column-major draw order.
    let mut out = los.scale(los_w);
    for j in 0..c {
        for i in 0..r {
            out[(i, j)] += complex_normal(rng) * nlos_w;
        }
    }
    out.scale(amp)
}

fn as_column(v: CVec) -> CMat {
    let n = v.len();
    CMat::from_column_slice(n, 1, v.as_slice())
}

pub fn sample_user_positions(placement_center: Point, radius: f64, users: usize, seed: u64) -> Vec<Point> {
    let mut rng = link_rng(seed, stream::USER_POSITIONS);
    (0..users)
        .map(|_| {
            let u: f64 = rng.gen();
            let t: f64 = rng.gen();
            let r = radius * Float::sqrt(u);
            let (s, c) = Float::sin_cos(2.0 * PI * t);
            [placement_center[0] + r * c, placement_center[1] + r * s, placement_center[2]]
        })
        .collect()
}

pub fn synthesize_channels(config: &SystemConfig, geometry: &Geometry, seed: u64) -> Result<ChannelSet> {
    config.validate()?;
    let layout = ArrayLayout::from_config(config);
    let pl = &config.pathloss;
    let gain = |d: f64, alpha: f64| path_loss_gain(d, alpha, pl.reference_db, pl.reference_distance_m);
    let kappa = config.rician_factor;
    let placement = &geometry.placement;

    let g_br = gain(geometry.dist_bs_rdars, pl.bs_rdars)?;
    let g_bt = gain(geometry.dist_bs_target, pl.bs_target)?;
    let g_rt = gain(geometry.dist_rdars_target, pl.rdars_target)?;

    let a_rx = layout.upa(geometry.theta_br_arrival, geometry.psi_br_arrival)?;
    let a_tx = layout.ula(geometry.theta_br_departure)?;
    let los_br = &a_rx * a_tx.transpose();
    let h_br = rician(los_br, g_br, kappa, &mut link_rng(seed, stream::BS_RDARS));

    let h_bt = layout.ula(geometry.theta_bt_departure)?.scale(Float::sqrt(g_bt));
    let h_rt = layout
        .upa(geometry.theta_rt_departure, geometry.psi_rt_departure)?
        .scale(Float::sqrt(g_rt));

    let user_positions =
        sample_user_positions(placement.user_center, placement.user_radius, config.users, seed);
    let mut h_bu = Vec::with_capacity(config.users);
    let mut h_ru = Vec::with_capacity(config.users);
    let mut bs_user = Vec::with_capacity(config.users);
    let mut rdars_user = Vec::with_capacity(config.users);
    for (k, &pos) in user_positions.iter().enumerate() {
        let g_bu = gain(distance(placement.bs, pos), pl.bs_user)?;
        let g_ru = gain(distance(placement.rdars, pos), pl.rdars_user)?;
        let los_bu = layout.ula(bs_azimuth(placement.bs, pos))?;
        let (theta, psi) = rdars_angles(placement.rdars, pos);
        let los_ru = layout.upa(theta, psi)?;
        let bu = rician(as_column(los_bu), g_bu, kappa, &mut link_rng(seed, stream::BS_USER + k as u64));
        let ru = rician(as_column(los_ru), g_ru, kappa, &mut link_rng(seed, stream::RDARS_USER + k as u64));
        h_bu.push(bu.column(0).into_owned());
        h_ru.push(ru.column(0).into_owned());
        bs_user.push(g_bu);
        rdars_user.push(g_ru);
    }

    Ok(ChannelSet {
        layout,
        h_br,
        h_bu,
        h_ru,
        h_bt,
        h_rt,
        gains: LinkGains { bs_rdars: g_br, bs_target: g_bt, rdars_target: g_rt, bs_user, rdars_user },
        user_positions,
    })
}

/// Reflection phases plus the two selection matrices of the surface.
///
/// `connected[n]` is the diagonal of `A`; column `j` of `A_a` is the unit vector
/// `e_{columns[j]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RdarsState {
    pub phi: CVec,
    pub connected: Vec<bool>,
    pub columns: Vec<usize>,
}

impl RdarsState {
    /// First `count` elements connected, `A_a` selecting them in order.
    pub fn leading(phi: CVec, count: usize) -> Self {
        let n = phi.len();
        let connected = (0..n).map(|i| i < count).collect();
        Self { phi, connected, columns: (0..count).collect() }
    }

    pub fn elements(&self) -> usize {
        self.phi.len()
    }

    pub fn connected_count(&self) -> usize {
        self.columns.len()
    }

    /// Diagonal of `A` as reals.
    pub fn selection_diag(&self) -> RVec {
        RVec::from_iterator(self.connected.len(), self.connected.iter().map(|&c| if c { 1.0 } else { 0.0 }))
    }

    /// `A_a` as an N×a 0/1 matrix.
    pub fn column_matrix(&self) -> RMat {
        let mut m = DMatrix::zeros(self.elements(), self.columns.len());
        for (j, &row) in self.columns.iter().enumerate() {
            m[(row, j)] = 1.0;
        }
        m
    }

    /// Stacked one-hot columns `vec(A_a)`.
    pub fn column_vector(&self) -> RVec {
        let n = self.elements();
        let mut v = RVec::zeros(n * self.columns.len());
        for (j, &row) in self.columns.iter().enumerate() {
            v[j * n + row] = 1.0;
        }
        v
    }

    /// Diagonal of `(I − A)Φ`.
    pub fn reflection(&self) -> CVec {
        CVec::from_fn(self.elements(), |i, _| if self.connected[i] { ZERO } else { self.phi[i] })
    }

    /// `A = A_a A_aᵀ`, which also requires distinct rows.
    pub fn is_consistent(&self) -> bool {
        let mut hit = alloc::vec![false; self.elements()];
        for &r in &self.columns {
            if r >= hit.len() || hit[r] {
                return false;
            }
            hit[r] = true;
        }
        hit == self.connected
    }

    pub fn check_shapes(&self) -> Result<()> {
        let n = self.elements();
        if self.connected.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "selection diagonal has {} entries for {} elements",
                self.connected.len(),
                n
            )));
        }
        if let Some(&r) = self.columns.iter().find(|&&r| r >= n) {
            return Err(Error::DimensionMismatch(format!("A_a selects row {r} of {n}")));
        }
        let count = self.connected.iter().filter(|&&c| c).count();
        if count != self.columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} connected elements but A_a has {} columns",
                count,
                self.columns.len()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        if let Some(i) = self.phi.iter().position(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidState(format!("|phi_{i}| != 1")));
        }
        if !self.is_consistent() {
            return Err(Error::InvalidState("A != A_a A_aᵀ".into()));
        }
        Ok(())
    }
}

/// Channels seen through a given surface configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Composites {
    /// Composite BS+connected-elements → user k channels, length M + a.
    pub h1: Vec<CVec>,
    /// Round-trip echo channel `h4 vᵀ`, M×(M+a).
    pub h2: CMat,
    /// `(I − A) H_br`, N×M.
    pub h3: CMat,
    /// Effective BS → target channel including the reflected path.
    pub h4: CVec,
    /// `[h4; A_aᵀ h_rt]`.
    pub v: CVec,
}

/// `A_aᵀ x`.
pub fn select_rows(x: &CVec, columns: &[usize]) -> CVec {
    CVec::from_iterator(columns.len(), columns.iter().map(|&r| x[r]))
}

pub fn stack(top: &CVec, bottom: &CVec) -> CVec {
    CVec::from_iterator(top.len() + bottom.len(), top.iter().chain(bottom.iter()).copied())
}

pub fn assemble_composites(channels: &ChannelSet, state: &RdarsState) -> Result<Composites> {
    state.check_shapes()?;
    if state.elements() != channels.elements() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} elements, channels {}",
            state.elements(),
            channels.elements()
        )));
    }
    let refl = state.reflection();
    let h_br_t = channels.h_br.transpose();
    let h1 = channels
        .h_bu
        .iter()
        .zip(&channels.h_ru)
        .map(|(bu, ru)| {
            let top = bu + &h_br_t * ru.component_mul(&refl);
            stack(&top, &select_rows(ru, &state.columns))
        })
        .collect();
    let h4 = &channels.h_bt + &h_br_t * channels.h_rt.component_mul(&refl);
    let v = stack(&h4, &select_rows(&channels.h_rt, &state.columns));
    let h2 = &h4 * v.transpose();
    let mut h3 = channels.h_br.clone();
    for (i, &c) in state.connected.iter().enumerate() {
        if c {
            h3.row_mut(i).fill(ZERO);
        }
    }
    Ok(Composites { h1, h2, h3, h4, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::derive_geometry;
    use alloc::vec;

    fn desk_channels(kappa: f64, seed: u64) -> (SystemConfig, ChannelSet) {
        let mut cfg = SystemConfig::desk();
        cfg.rician_factor = kappa;
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let ch = synthesize_channels(&cfg, &g, seed).unwrap();
        (cfg, ch)
    }

    #[test]
    fn ula_examples() {
        let v = steering_vector(ArrayKind::Ula { elements: 4 }, 0.0, 0.0, 0.5).unwrap();
        assert!(v.iter().all(|z| (*z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let v = steering_vector(ArrayKind::Ula { elements: 2 }, PI / 2.0, 0.0, 0.5).unwrap();
        assert!((v[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let v = steering_vector(ArrayKind::Upa { rows: 3, cols: 5 }, 0.0, 0.0, 0.5).unwrap();
        assert!(v.iter().all(|z| (*z - C64::new(1.0, 0.0)).norm() < 1e-15));
        assert!(matches!(
            steering_vector(ArrayKind::Ula { elements: 2 }, f64::NAN, 0.0, 0.5),
            Err(Error::NonFiniteAngle)
        ));
    }

    #[test]
    fn upa_index_layout() {
        let (t, p) = (0.3, 0.2);
        let v = steering_vector(ArrayKind::Upa { rows: 3, cols: 2 }, t, p, 0.5).unwrap();
        let expect = |n1: f64, n2: f64| {
            let x = -PI * (n1 * t.sin() * p.cos() + n2 * p.sin());
            C64::new(x.cos(), x.sin())
        };
        assert!((v[5] - expect(2.0, 1.0)).norm() < 1e-14);
        assert!((v[2] - expect(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn path_loss_examples() {
        assert!((path_loss_gain(1.0, 2.4, -30.0, 1.0).unwrap() - 1e-3).abs() < 1e-18);
        let g = path_loss_gain(10.0, 2.0, -30.0, 1.0).unwrap();
        assert!((10.0 * g.log10() + 50.0).abs() < 1e-12);
        let g = path_loss_gain(15.0, 2.4, -30.0, 1.0).unwrap();
        assert!((10.0 * g.log10() - (-30.0 - 24.0 * 15f64.log10())).abs() < 1e-12);
        assert!((10.0 * g.log10() + 58.226).abs() < 1e-3);
        assert!(path_loss_gain(0.0, 2.0, -30.0, 1.0).is_err());
    }

    #[test]
    fn pure_los_when_kappa_one() {
        let (cfg, ch) = desk_channels(1.0, 7);
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let layout = ArrayLayout::from_config(&cfg);
        let los = layout.upa(g.theta_br_arrival, g.psi_br_arrival).unwrap()
            * layout.ula(g.theta_br_departure).unwrap().transpose();
        let diff = (&ch.h_br - los.scale(ch.gains.bs_rdars.sqrt())).norm();
        assert!(diff < 1e-15 * ch.h_br.norm().max(1e-30) + 1e-30);
    }

    #[test]
    fn deterministic_by_seed() {
        let (_, a) = desk_channels(0.5, 11);
        let (_, b) = desk_channels(0.5, 11);
        let (_, c) = desk_channels(0.5, 12);
        assert_eq!(a, b);
        assert_ne!(a.h_br, c.h_br);
    }

    #[test]
    fn rayleigh_variance() {
        let mut cfg = SystemConfig::desk().with_elements(100);
        cfg.antennas = 100;
        cfg.rician_factor = 0.0;
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let ch = synthesize_channels(&cfg, &g, 3).unwrap();
        let scaled = ch.h_br.unscale(ch.gains.bs_rdars.sqrt());
        let n = scaled.len() as f64;
        let mean: C64 = scaled.iter().sum::<C64>() / n;
        let var = scaled.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn users_inside_disk() {
        let (cfg, ch) = desk_channels(0.5, 5);
        for p in &ch.user_positions {
            let d = ((p[0] - 50.0).powi(2) + (p[1] - 50.0).powi(2)).sqrt();
            assert!(d <= cfg.placement.user_radius);
        }
    }

    #[test]
    fn all_connected_removes_reflection() {
        let (_, ch) = desk_channels(0.5, 1);
        let n = ch.elements();
        let state = RdarsState::leading(CVec::from_element(n, C64::new(0.0, 1.0)), n);
        let comp = assemble_composites(&ch, &state).unwrap();
        assert_eq!(comp.h4, ch.h_bt);
    }

    #[test]
    fn passive_reduction() {
        let (_, ch) = desk_channels(0.5, 1);
        let n = ch.elements();
        let phi = CVec::from_fn(n, |i, _| C64::from_polar(1.0, i as f64));
        let state = RdarsState { phi: phi.clone(), connected: vec![false; n], columns: vec![] };
        let comp = assemble_composites(&ch, &state).unwrap();
        let k = 1;
        let expect = &ch.h_bu[k] + (ch.h_ru[k].transpose() * CMat::from_diagonal(&phi) * &ch.h_br).transpose();
        assert_eq!(comp.h1[k].len(), ch.antennas());
        assert!((&comp.h1[k] - expect).norm() < 1e-12 * comp.h1[k].norm());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let (_, ch) = desk_channels(0.5, 1);
        let n = ch.elements();
        let state = RdarsState { phi: CVec::from_element(n, C64::new(1.0, 0.0)), connected: vec![false; n], columns: vec![0] };
        assert!(matches!(assemble_composites(&ch, &state), Err(Error::DimensionMismatch(_))));
    }
}
