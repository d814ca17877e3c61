//! Evaluation schemes as constrained variants of the joint optimizer.

use core::fmt;
use core::str::FromStr;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::optimizer::{run_joint_optimization, BlockFlags, JointSolution};
use crate::scenario::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    RdarsIsac,
    RdarsIsacRandomPhase,
    RdarsIsacFixedA,
    RdarsSensingOpt,
    RdarsSensingRandom,
    DasIsac,
    DasSensing,
    PassiveRisIsac,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::RdarsIsac,
        Scheme::RdarsIsacRandomPhase,
        Scheme::RdarsIsacFixedA,
        Scheme::RdarsSensingOpt,
        Scheme::RdarsSensingRandom,
        Scheme::DasIsac,
        Scheme::DasSensing,
        Scheme::PassiveRisIsac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RdarsIsac => "rdars-isac",
            Scheme::RdarsIsacRandomPhase => "rdars-isac-random-phase",
            Scheme::RdarsIsacFixedA => "rdars-isac-fixed-a",
            Scheme::RdarsSensingOpt => "rdars-sensing-opt",
            Scheme::RdarsSensingRandom => "rdars-sensing-random",
            Scheme::DasIsac => "das-isac",
            Scheme::DasSensing => "das-sensing",
            Scheme::PassiveRisIsac => "passive-ris-isac",
        }
    }

    pub fn spec(self) -> SchemeSpec {
        SchemeSpec::new(self)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| Error::InvalidConfig {
            key: "schemes",
            reason: alloc::format!("unknown scheme `{s}`"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub optimize_phase: bool,
    pub optimize_selection: bool,
    pub enforce_sinr: bool,
    /// Reflected BS → RDARS path present.
    pub reflection_enabled: bool,
    /// Connected (transmitting) elements present.
    pub connected_enabled: bool,
}

impl SchemeSpec {
    pub fn new(scheme: Scheme) -> Self {
        use Scheme::*;
        let (phase, selection, sinr, reflection, connected) = match scheme {
            RdarsIsac => (true, true, true, true, true),
            RdarsIsacRandomPhase => (false, true, true, true, true),
            RdarsIsacFixedA => (true, false, true, true, true),
            RdarsSensingOpt => (true, true, false, true, true),
            RdarsSensingRandom => (false, true, false, true, true),
            DasIsac => (false, false, true, false, true),
            DasSensing => (false, false, false, false, true),
            PassiveRisIsac => (true, false, true, true, false),
        };
        Self {
            scheme,
            optimize_phase: phase,
            optimize_selection: selection,
            enforce_sinr: sinr,
            reflection_enabled: reflection,
            connected_enabled: connected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimize_phase && !self.reflection_enabled {
            return Err(Error::ContradictoryScheme("phase optimization without a reflected path"));
        }
        if self.optimize_selection && !self.connected_enabled {
            return Err(Error::ContradictoryScheme("selection optimization without connected elements"));
        }
        if !self.reflection_enabled && !self.connected_enabled {
            return Err(Error::ContradictoryScheme("neither reflection nor connected elements"));
        }
        Ok(())
    }

    pub fn flags(&self) -> BlockFlags {
        BlockFlags {
            optimize_phase: self.optimize_phase,
            optimize_selection: self.optimize_selection,
            enforce_sinr: self.enforce_sinr,
        }
    }
}

/// Optimizer inputs for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSetup {
    pub spec: SchemeSpec,
    pub config: SystemConfig,
    pub flags: BlockFlags,
}

impl SchemeSetup {
    /// Channels as seen by this scheme; the reflected path is removed when disabled.
    pub fn prepare_channels(&self, channels: &ChannelSet) -> ChannelSet {
        if self.spec.reflection_enabled {
            channels.clone()
        } else {
            channels.without_reflection()
        }
    }

    pub fn run(&self, channels: &ChannelSet) -> Result<JointSolution> {
        run_joint_optimization(&self.config, &self.prepare_channels(channels), self.flags)
    }
}

/// Maps a scheme onto the optimizer configuration. Passive operation connects no element;
/// every other scheme starts from the first `a` elements connected.
pub fn apply_scheme(spec: &SchemeSpec, config: &SystemConfig) -> Result<SchemeSetup> {
    spec.validate()?;
    let mut config = config.clone();
    if !spec.connected_enabled {
        config.connected = 0;
    }
    Ok(SchemeSetup { spec: *spec, config, flags: spec.flags() })
}
