//! Household profiles: inhabitants, habits, appliance inventory and
//! location, loadable from a flat key-value text file.

use serde::{Deserialize, Serialize};

use crate::appliance::{default_appliance, default_appliances, ApplianceSpec};
use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::types::PersonProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UsageLevel {
    Occasional,
    Normal,
    High,
}

impl std::str::FromStr for UsageLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occasional" => Ok(UsageLevel::Occasional),
            "normal" => Ok(UsageLevel::Normal),
            "high" => Ok(UsageLevel::High),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

/// Weekly quotas are `None` when the household reported no constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Habits {
    pub washing_machine_per_week: Option<u32>,
    pub tumble_dryer_per_week: Option<u32>,
    pub dishwasher_per_week: Option<u32>,
    pub computer_usage: UsageLevel,
    pub tv_usage: UsageLevel,
    pub stereo_usage: UsageLevel,
    pub console_usage: UsageLevel,
    pub lunches_at_home: u32,
    pub dinners_at_home: u32,
}

impl Default for Habits {
    fn default() -> Self {
        Habits {
            washing_machine_per_week: None,
            tumble_dryer_per_week: None,
            dishwasher_per_week: None,
            computer_usage: UsageLevel::Normal,
            tv_usage: UsageLevel::Normal,
            stereo_usage: UsageLevel::Normal,
            console_usage: UsageLevel::Normal,
            lunches_at_home: 7,
            dinners_at_home: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdProfile {
    pub persons: Vec<PersonProfile>,
    pub children_under_10: u32,
    pub habits: Habits,
    pub inventory: Vec<ApplianceSpec>,
    pub electrical_heating: bool,
    pub latitude: f64,
    pub longitude: f64,
}

impl HouseholdProfile {
    pub fn validate(&self) -> Result<()> {
        if self.persons.is_empty() {
            return Err(Error::Profile("household has no persons".into()));
        }
        if self.electrical_heating {
            return Err(Error::Profile(
                "electrical space/water heating is not supported".into(),
            ));
        }
        if self.habits.lunches_at_home > 7 || self.habits.dinners_at_home > 7 {
            return Err(Error::Profile("meals at home must be 0-7 per week".into()));
        }
        for a in &self.inventory {
            if a.nominal_power <= 0.0 {
                return Err(Error::Profile(format!(
                    "appliance '{}' has non-positive power",
                    a.name
                )));
            }
        }
        Ok(())
    }

    pub fn owned(&self, name: &str) -> Option<&ApplianceSpec> {
        self.inventory.iter().find(|a| a.name == name && a.count > 0)
    }

    pub fn owns(&self, name: &str) -> bool {
        self.owned(name).is_some()
    }

    pub fn teenagers(&self) -> impl Iterator<Item = (usize, &PersonProfile)> {
        self.persons.iter().enumerate().filter(|(_, p)| p.is_teenager())
    }

    pub fn adults(&self) -> impl Iterator<Item = (usize, &PersonProfile)> {
        self.persons.iter().enumerate().filter(|(_, p)| !p.is_teenager())
    }
}

/// Load a household profile from its key-value text form.
///
/// Keys: `person.<n>.employment`, `person.<n>.age_group`, `children_under_10`,
/// `habit.*`, `appliance.<name>` (count, optionally with overrides
/// `appliance.<name>.power`), `electrical_heating`, `location.latitude`,
/// `location.longitude`.
pub fn parse_household(text: &str) -> Result<HouseholdProfile> {
    let kv = KvFile::parse(text)?;

    let mut persons = Vec::new();
    for n in 1.. {
        let emp_key = format!("person.{n}.employment");
        let age_key = format!("person.{n}.age_group");
        match (kv.get(&emp_key), kv.get(&age_key)) {
            (None, None) => break,
            (Some(e), Some(g)) => persons.push(PersonProfile::new(e.parse()?, g.parse()?)),
            _ => {
                return Err(Error::Profile(format!(
                    "person {n} needs both employment and age_group"
                )))
            }
        }
    }
    if persons.is_empty() {
        return Err(Error::Profile("profile lists no persons".into()));
    }

    let mut habits = Habits::default();
    if let Some(v) = kv.get_parsed("habit.washing_machine_per_week")? {
        habits.washing_machine_per_week = Some(v);
    }
    if let Some(v) = kv.get_parsed("habit.tumble_dryer_per_week")? {
        habits.tumble_dryer_per_week = Some(v);
    }
    if let Some(v) = kv.get_parsed("habit.dishwasher_per_week")? {
        habits.dishwasher_per_week = Some(v);
    }
    if let Some(v) = kv.get_parsed::<UsageLevel>("habit.computer_usage")? {
        habits.computer_usage = v;
    }
    if let Some(v) = kv.get_parsed::<UsageLevel>("habit.tv_usage")? {
        habits.tv_usage = v;
    }
    if let Some(v) = kv.get_parsed::<UsageLevel>("habit.stereo_usage")? {
        habits.stereo_usage = v;
    }
    if let Some(v) = kv.get_parsed::<UsageLevel>("habit.console_usage")? {
        habits.console_usage = v;
    }
    if let Some(v) = kv.get_parsed("habit.lunches_at_home")? {
        habits.lunches_at_home = v;
    }
    if let Some(v) = kv.get_parsed("habit.dinners_at_home")? {
        habits.dinners_at_home = v;
    }

    let mut inventory = Vec::new();
    for key in kv.keys_with_prefix("appliance.") {
        let rest = &key["appliance.".len()..];
        if rest.contains('.') {
            continue; // per-appliance override, handled below
        }
        let count: u32 = kv.get_parsed(key)?.unwrap_or(0);
        let mut spec = default_appliance(rest).ok_or_else(|| {
            Error::Profile(format!("unknown appliance '{rest}'"))
        })?;
        spec.count = count;
        if let Some(p) = kv.get_parsed::<f64>(&format!("appliance.{rest}.power"))? {
            spec.nominal_power = p;
        }
        inventory.push(spec);
    }
    // Anything not listed is owned with count 0 so lookups stay total.
    for spec in default_appliances() {
        if !inventory.iter().any(|a| a.name == spec.name) {
            inventory.push(spec);
        }
    }
    inventory.sort_by(|a, b| a.name.cmp(&b.name));

    let electrical_heating = match kv.get("electrical_heating") {
        None => false,
        Some(v) => match v.to_ascii_lowercase().as_str() {
            "yes" | "true" => true,
            "no" | "false" => false,
            _ => return Err(Error::Profile(format!("bad electrical_heating '{v}'"))),
        },
    };

    let profile = HouseholdProfile {
        persons,
        children_under_10: kv.get_parsed("children_under_10")?.unwrap_or(0),
        habits,
        inventory,
        electrical_heating,
        latitude: kv.get_parsed("location.latitude")?.unwrap_or(47.0),
        longitude: kv.get_parsed("location.longitude")?.unwrap_or(8.0),
    };
    profile.validate()?;
    Ok(profile)
}
