//! Closed enumerations shared by every module: appliance categories, activity
//! states, person strata and day types.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The eight appliance categories a house load is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Cooking,
    Entertainment,
    Fridge,
    Heating,
    Housekeeping,
    Ict,
    Light,
    Standby,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Cooking,
        Category::Entertainment,
        Category::Fridge,
        Category::Heating,
        Category::Housekeeping,
        Category::Ict,
        Category::Light,
        Category::Standby,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Cooking => "Cooking",
            Category::Entertainment => "Entertainment",
            Category::Fridge => "Fridge",
            Category::Heating => "Heating",
            Category::Housekeeping => "Housekeeping",
            Category::Ict => "ICT",
            Category::Light => "Light",
            Category::Standby => "Standby",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// The 14 activity states a diary may report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActivityState {
    Cleaning,
    UsingComputer,
    Cooking,
    WashingDishes,
    Eating,
    Homework,
    PlayingGame,
    Laundry,
    Music,
    Outdoor,
    Sleeping,
    WatchingTv,
    Showering,
    Working,
}

pub const ACTIVITY_COUNT: usize = 14;

impl ActivityState {
    pub const ALL: [ActivityState; ACTIVITY_COUNT] = [
        ActivityState::Cleaning,
        ActivityState::UsingComputer,
        ActivityState::Cooking,
        ActivityState::WashingDishes,
        ActivityState::Eating,
        ActivityState::Homework,
        ActivityState::PlayingGame,
        ActivityState::Laundry,
        ActivityState::Music,
        ActivityState::Outdoor,
        ActivityState::Sleeping,
        ActivityState::WatchingTv,
        ActivityState::Showering,
        ActivityState::Working,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).unwrap()
    }

    pub fn from_index(i: usize) -> ActivityState {
        Self::ALL[i]
    }

    pub fn label(self) -> &'static str {
        match self {
            ActivityState::Cleaning => "Cleaning",
            ActivityState::UsingComputer => "UsingComputer",
            ActivityState::Cooking => "Cooking",
            ActivityState::WashingDishes => "WashingDishes",
            ActivityState::Eating => "Eating",
            ActivityState::Homework => "Homework",
            ActivityState::PlayingGame => "PlayingGame",
            ActivityState::Laundry => "Laundry",
            ActivityState::Music => "Music",
            ActivityState::Outdoor => "Outdoor",
            ActivityState::Sleeping => "Sleeping",
            ActivityState::WatchingTv => "WatchingTV",
            ActivityState::Showering => "Showering",
            ActivityState::Working => "Working",
        }
    }

    /// Activities during which lighting stays off.
    pub fn is_no_light(self) -> bool {
        matches!(
            self,
            ActivityState::Sleeping | ActivityState::Outdoor | ActivityState::Working
        )
    }
}

impl fmt::Display for ActivityState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ActivityState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        ActivityState::ALL
            .iter()
            .copied()
            .find(|a| a.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Employment {
    FullTime,
    PartTime,
    Student,
    Retired,
    Unemployed,
}

impl Employment {
    pub const ALL: [Employment; 5] = [
        Employment::FullTime,
        Employment::PartTime,
        Employment::Student,
        Employment::Retired,
        Employment::Unemployed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Employment::FullTime => "full-time",
            Employment::PartTime => "part-time",
            Employment::Student => "student",
            Employment::Retired => "retired",
            Employment::Unemployed => "unemployed",
        }
    }
}

impl fmt::Display for Employment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Employment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Employment::ALL
            .iter()
            .copied()
            .find(|e| e.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeGroup {
    Teenager,
    AdultActive,
    SeniorActive,
    SeniorInactive,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 4] = [
        AgeGroup::Teenager,
        AgeGroup::AdultActive,
        AgeGroup::SeniorActive,
        AgeGroup::SeniorInactive,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AgeGroup::Teenager => "teenager",
            AgeGroup::AdultActive => "adult-active",
            AgeGroup::SeniorActive => "senior-active",
            AgeGroup::SeniorInactive => "senior-inactive",
        }
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AgeGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        AgeGroup::ALL
            .iter()
            .copied()
            .find(|g| g.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DayType {
    Weekday,
    Saturday,
    Sunday,
}

impl DayType {
    pub const ALL: [DayType; 3] = [DayType::Weekday, DayType::Saturday, DayType::Sunday];

    pub fn label(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Saturday => "saturday",
            DayType::Sunday => "sunday",
        }
    }
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DayType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        DayType::ALL
            .iter()
            .copied()
            .find(|d| d.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

pub fn day_type_of(date: NaiveDate) -> DayType {
    match date.weekday() {
        Weekday::Sat => DayType::Saturday,
        Weekday::Sun => DayType::Sunday,
        _ => DayType::Weekday,
    }
}

/// One inhabitant over the age of 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PersonProfile {
    pub employment: Employment,
    pub age_group: AgeGroup,
}

impl PersonProfile {
    pub fn new(employment: Employment, age_group: AgeGroup) -> Self {
        PersonProfile {
            employment,
            age_group,
        }
    }

    pub fn is_teenager(&self) -> bool {
        self.age_group == AgeGroup::Teenager
    }
}
