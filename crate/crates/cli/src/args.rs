use std::path::PathBuf;

use clap::{Args, ValueEnum};
use wcauth_core::protocol::{Capability, Partition};
use wcauth_core::{CampaignConfig, Epsilon, FamilySpec, Strategy, Variant};

use crate::{read_json, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Plain,
    Salted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Passive,
    BlindGuess,
    InterceptCertain,
    Engineered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CapabilityArg {
    Concrete,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Idealized,
    Searched,
}

fn parse_binary(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected BITS:TAG_BITS")?;
    let bits = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let tag_bits = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((bits, tag_bits))
}

/// Family, protocol and adversary flags shared by `simulate` and `demo`.
#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// Affine family (a·m + b) mod p.
    #[arg(long, conflicts_with_all = ["binary", "family"])]
    affine: Option<u64>,
    /// GF(2^BITS) family keeping the low TAG_BITS of a·m ⊕ b, as BITS:TAG_BITS.
    #[arg(long, value_parser = parse_binary, conflicts_with = "family")]
    binary: Option<(u32, u32)>,
    /// JSON family spec file.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Claimed ε for --affine or --binary, at least the family's own.
    #[arg(long)]
    epsilon: Option<Epsilon>,
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    variant: VariantArg,
    /// Salt length; defaults to the tag length.
    #[arg(long)]
    salt_bits: Option<u32>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Passive)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = CapabilityArg::Oracle)]
    capability: CapabilityArg,
    #[arg(long, value_enum, default_value_t = PartitionArg::Idealized)]
    partition: PartitionArg,
    /// Fraction of keys Eve cannot eliminate.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Probability of tag corruption in unattacked rounds.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Deny Eve control over Alice's message.
    #[arg(long)]
    no_message_influence: bool,
}

impl ScenarioArgs {
    fn family_spec(&self) -> Result<FamilySpec, Failure> {
        if let Some(path) = &self.family {
            return read_json(path);
        }
        match (self.affine, self.binary) {
            (Some(p), _) => Ok(FamilySpec::Affine {
                p,
                epsilon: self.epsilon,
            }),
            (None, Some((bits, tag_bits))) => Ok(FamilySpec::Binary {
                bits,
                tag_bits,
                epsilon: self.epsilon,
            }),
            (None, None) => Err(Failure::Usage(
                "choose a family with --affine, --binary or --family".into(),
            )),
        }
    }

    pub fn campaign(&self, trials: u64, master_seed: u64) -> Result<CampaignConfig, Failure> {
        let capability = match self.capability {
            CapabilityArg::Concrete => Capability::Concrete,
            CapabilityArg::Oracle => Capability::Oracle,
        };
        let strategy = match self.strategy {
            StrategyArg::Passive => Strategy::Passive,
            StrategyArg::BlindGuess => Strategy::BlindGuess,
            StrategyArg::InterceptCertain => Strategy::InterceptCertain { capability },
            StrategyArg::Engineered => Strategy::Engineered {
                partition: match self.partition {
                    PartitionArg::Idealized => Partition::Idealized,
                    PartitionArg::Searched => Partition::Searched,
                },
                capability,
            },
        };
        let variant = match self.variant {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Salted => Variant::Salted {
                salt_bits: self.salt_bits,
            },
        };
        Ok(CampaignConfig {
            family: self.family_spec()?,
            variant,
            strategy,
            r: self.r,
            trials,
            master_seed,
            noise: self.noise,
            message_influence: !self.no_message_influence,
        })
    }
}
