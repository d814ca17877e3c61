//! TOML configuration files layered over a preset.
//!
//! Every key is optional; missing keys keep the preset value. Per-user keys accept
//! either one number for all users or a list with one entry per user.

use std::path::Path;

use rdars_core::scenario::{FixedAngles, PathLoss, PenaltyParams, Placement, Stopping};
use rdars_core::SystemConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Paper,
    Desk,
}

impl Preset {
    pub fn config(self) -> SystemConfig {
        match self {
            Preset::Paper => SystemConfig::paper(),
            Preset::Desk => SystemConfig::desk(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerUser {
    All(f64),
    Each(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upa_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upa_cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_noise_dbm: Option<PerUser>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radar_noise_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinr_threshold_db: Option<PerUser>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rcs_mean_square: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rician_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pathloss: Option<PathLossFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltyFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopping: Option<StoppingFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<AnglesFile>,
}

macro_rules! section {
    ($name:ident, $target:ty { $($field:ident: $ty:ty),* $(,)? }) => {
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            fn apply(&self, target: &mut $target) {
                $(
                    if let Some(v) = self.$field.clone() {
                        target.$field = v;
                    }
                )*
            }

            fn from_target(target: &$target) -> Self {
                Self { $($field: Some(target.$field.clone()),)* }
            }
        }
    };
}

section!(PathLossFile, PathLoss {
    reference_db: f64,
    reference_distance_m: f64,
    bs_rdars: f64,
    bs_target: f64,
    bs_user: f64,
    rdars_target: f64,
    rdars_user: f64,
});

section!(PenaltyFile, PenaltyParams { rho1_init: f64, rho2_init: f64, c1: f64, c2: f64, rho_floor: f64 });

section!(StoppingFile, Stopping { rel_tol: f64, residual_tol: f64, max_iters: usize });

section!(PlacementFile, Placement {
    bs: [f64; 3],
    rdars: [f64; 3],
    target: [f64; 3],
    user_center: [f64; 3],
    user_radius: f64,
});

section!(AnglesFile, FixedAngles {
    bs_rdars_departure: f64,
    bs_rdars_arrival: f64,
    bs_rdars_arrival_elevation: f64,
    rdars_target_departure: f64,
});

fn per_user(key: &str, value: &PerUser, users: usize) -> Result<Vec<f64>> {
    match value {
        PerUser::All(v) => Ok(vec![*v; users]),
        PerUser::Each(v) if v.len() == users => Ok(v.clone()),
        PerUser::Each(v) => Err(SimError::config(key, format!("{} entries for {users} users", v.len()))),
    }
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| SimError::Parse { path: origin.to_path_buf(), reason: e.to_string() })
    }

    /// Applies the keys present onto `base` and validates the result.
    pub fn apply(&self, base: &SystemConfig) -> Result<SystemConfig> {
        let mut c = base.clone();
        if let Some(n) = self.elements {
            c = c.with_elements(n);
        }
        if let Some(k) = self.users {
            c = c.with_users(k);
        }
        if let Some(v) = self.antennas {
            c.antennas = v;
        }
        if let Some(v) = self.upa_rows {
            c.upa_rows = v;
        }
        if let Some(v) = self.upa_cols {
            c.upa_cols = v;
        }
        if let Some(v) = self.connected {
            c.connected = v;
        }
        if let Some(v) = self.power_dbm {
            c.power_dbm = v;
        }
        if let Some(v) = &self.user_noise_dbm {
            c.user_noise_dbm = per_user("user_noise_dbm", v, c.users)?;
        }
        if let Some(v) = self.radar_noise_dbm {
            c.radar_noise_dbm = v;
        }
        if let Some(v) = &self.sinr_threshold_db {
            c.sinr_threshold_db = per_user("sinr_threshold_db", v, c.users)?;
        }
        if let Some(v) = self.rcs_mean_square {
            c.rcs_mean_square = v;
        }
        if let Some(v) = self.rician_factor {
            c.rician_factor = v;
        }
        if let Some(v) = self.spacing_ratio {
            c.spacing_ratio = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(s) = &self.pathloss {
            s.apply(&mut c.pathloss);
        }
        if let Some(s) = &self.penalty {
            s.apply(&mut c.penalty);
        }
        if let Some(s) = &self.stopping {
            s.apply(&mut c.stopping);
        }
        if let Some(s) = &self.placement {
            s.apply(&mut c.placement);
        }
        if let Some(s) = &self.angles {
            s.apply(&mut c.angles);
        }
        c.validate()?;
        Ok(c)
    }

    /// Every key spelled out.
    pub fn from_config(c: &SystemConfig) -> Self {
        Self {
            antennas: Some(c.antennas),
            elements: Some(c.elements),
            upa_rows: Some(c.upa_rows),
            upa_cols: Some(c.upa_cols),
            connected: Some(c.connected),
            users: Some(c.users),
            power_dbm: Some(c.power_dbm),
            user_noise_dbm: Some(PerUser::Each(c.user_noise_dbm.clone())),
            radar_noise_dbm: Some(c.radar_noise_dbm),
            sinr_threshold_db: Some(PerUser::Each(c.sinr_threshold_db.clone())),
            rcs_mean_square: Some(c.rcs_mean_square),
            rician_factor: Some(c.rician_factor),
            spacing_ratio: Some(c.spacing_ratio),
            seed: Some(c.seed),
            pathloss: Some(PathLossFile::from_target(&c.pathloss)),
            penalty: Some(PenaltyFile::from_target(&c.penalty)),
            stopping: Some(StoppingFile::from_target(&c.stopping)),
            placement: Some(PlacementFile::from_target(&c.placement)),
            angles: Some(AnglesFile::from_target(&c.angles)),
        }
    }
}

/// Parses `text` over `base`.
pub fn parse_config(text: &str, origin: &Path, base: &SystemConfig) -> Result<SystemConfig> {
    ConfigFile::parse(text, origin)?.apply(base)
}

/// Loads a configuration file over `base`.
pub fn load_config_over(path: &Path, base: &SystemConfig) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_config(&text, path, base)
}

/// Loads a configuration file; missing keys take the full-size defaults.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    load_config_over(path, &SystemConfig::paper())
}

pub fn to_toml(config: &SystemConfig) -> String {
    toml::to_string(&ConfigFile::from_config(config)).expect("configuration serializes")
}
