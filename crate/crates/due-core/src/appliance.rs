//! Appliance parameter table: nominal power, usage probabilities and mean
//! duration per appliance, with the shipped defaults loaded from a
//! checked-in data file so they can be updated without touching code.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Category;

/// Canonical appliance names used across the defaults file, household
/// profiles and the recognizer.
pub mod names {
    pub const COFFEE_MAKER: &str = "coffee maker";
    pub const MICROWAVE: &str = "microwave";
    pub const KETTLE: &str = "kettle";
    pub const OVEN: &str = "oven";
    pub const STOVE: &str = "stove";
    pub const TV: &str = "TV";
    pub const TV_BOX: &str = "TV box";
    pub const DVD_PLAYER: &str = "DVD player";
    pub const PC: &str = "PC";
    pub const LAPTOP: &str = "laptop";
    pub const TABLET: &str = "tablet";
    pub const STEREO: &str = "stereo";
    pub const GAMING_CONSOLE: &str = "gaming console";
    pub const FRIDGE_FREEZER: &str = "fridge (with a freezer)";
    pub const FRIDGE: &str = "fridge (without a freezer)";
    pub const FREEZER: &str = "freezer alone";
    pub const HAIRDRYER: &str = "hairdryer";
    pub const BOILER: &str = "boiler";
    pub const HEAT_PUMP: &str = "heat-pump";
    pub const WASHING_MACHINE: &str = "washing machine";
    pub const TUMBLE_DRYER: &str = "tumble dryer";
    pub const DISHWASHER: &str = "dishwasher";
    pub const VACUUM: &str = "vacuum";
    pub const PRINTER: &str = "printer";
    pub const LIGHTING: &str = "lighting";
    pub const MODEM: &str = "modem";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplianceSpec {
    pub name: String,
    pub category: Category,
    /// Nominal power in watts.
    pub nominal_power: f64,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub beta3: Option<f64>,
    /// Mean usage duration in minutes.
    pub tau_min: Option<f64>,
    /// How many instances the household owns.
    pub count: u32,
}

impl ApplianceSpec {
    fn validate(&self) -> Result<()> {
        if self.nominal_power <= 0.0 {
            return Err(Error::Profile(format!(
                "appliance '{}': nominal power must be > 0",
                self.name
            )));
        }
        // The modem row carries its table value verbatim and is never used
        // as a probability, so it is exempt from the [0,1] check.
        if self.name != names::MODEM {
            for (label, beta) in [("beta1", self.beta1), ("beta2", self.beta2), ("beta3", self.beta3)]
            {
                if let Some(b) = beta {
                    if !(0.0..=1.0).contains(&b) {
                        return Err(Error::Profile(format!(
                            "appliance '{}': {label} = {b} outside [0,1]",
                            self.name
                        )));
                    }
                }
            }
        }
        if let Some(t) = self.tau_min {
            if t < 0.0 {
                return Err(Error::Profile(format!(
                    "appliance '{}': negative duration",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

const DEFAULTS_TSV: &str = include_str!("../data/appliance_defaults.tsv");

/// Parse an appliance defaults file (tab-separated, header row, columns
/// name / category / nominal power / beta1..3 / tau). Counts default to 0;
/// household profiles set ownership.
pub fn parse_defaults(text: &str) -> Result<Vec<ApplianceSpec>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate().skip(1) {
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(Error::Parse {
                line: i + 1,
                reason: "expected at least name, category, nominal power".into(),
            });
        }
        let opt = |idx: usize| -> Result<Option<f64>> {
            match cols.get(idx).map(|s| s.trim()) {
                None | Some("") => Ok(None),
                Some(s) => s.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                    line: i + 1,
                    reason: format!("bad number '{s}'"),
                }),
            }
        };
        let spec = ApplianceSpec {
            name: cols[0].trim().to_string(),
            category: cols[1].trim().parse()?,
            nominal_power: cols[2].trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                reason: format!("bad nominal power '{}'", cols[2]),
            })?,
            beta1: opt(3)?,
            beta2: opt(4)?,
            beta3: opt(5)?,
            tau_min: opt(6)?,
            count: 0,
        };
        spec.validate()?;
        out.push(spec);
    }
    Ok(out)
}

/// The shipped defaults table.
pub fn default_appliances() -> Vec<ApplianceSpec> {
    parse_defaults(DEFAULTS_TSV).expect("bundled appliance defaults must parse")
}

pub fn default_appliance(name: &str) -> Option<ApplianceSpec> {
    default_appliances().into_iter().find(|a| a.name == name)
}
