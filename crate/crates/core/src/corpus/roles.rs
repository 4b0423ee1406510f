use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Domain-specific role of a named entity: a subtype of person, organization
/// or location defined by the entity's act or association in context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RoleLabel {
    #[serde(rename = "PER_Victim")]
    PerVictim,
    #[serde(rename = "PER_Accused")]
    PerAccused,
    #[serde(rename = "PER_Others")]
    PerOthers,
    #[serde(rename = "ORG_Victim")]
    OrgVictim,
    #[serde(rename = "ORG_Accused")]
    OrgAccused,
    #[serde(rename = "ORG_Others")]
    OrgOthers,
    #[serde(rename = "LOC_Event")]
    LocEvent,
    #[serde(rename = "LOC_Accused")]
    LocAccused,
    #[serde(rename = "LOC_Victim")]
    LocVictim,
    #[serde(rename = "LOC_Others")]
    LocOthers,
}

/// All ten role labels, in canonical order.
pub const ALL_ROLES: [RoleLabel; 10] = [
    RoleLabel::PerVictim,
    RoleLabel::PerAccused,
    RoleLabel::PerOthers,
    RoleLabel::OrgVictim,
    RoleLabel::OrgAccused,
    RoleLabel::OrgOthers,
    RoleLabel::LocEvent,
    RoleLabel::LocAccused,
    RoleLabel::LocVictim,
    RoleLabel::LocOthers,
];

/// The six roles kept for evaluation. The catch-all `*_Others` roles and the
/// rare `LOC_Victim` are excluded from queries and reports but remain in the
/// corpus as context.
pub const IN_STUDY_ROLES: [RoleLabel; 6] = [
    RoleLabel::PerVictim,
    RoleLabel::PerAccused,
    RoleLabel::OrgVictim,
    RoleLabel::OrgAccused,
    RoleLabel::LocEvent,
    RoleLabel::LocAccused,
];

impl RoleLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoleLabel::PerVictim => "PER_Victim",
            RoleLabel::PerAccused => "PER_Accused",
            RoleLabel::PerOthers => "PER_Others",
            RoleLabel::OrgVictim => "ORG_Victim",
            RoleLabel::OrgAccused => "ORG_Accused",
            RoleLabel::OrgOthers => "ORG_Others",
            RoleLabel::LocEvent => "LOC_Event",
            RoleLabel::LocAccused => "LOC_Accused",
            RoleLabel::LocVictim => "LOC_Victim",
            RoleLabel::LocOthers => "LOC_Others",
        }
    }

    /// Whether this role is part of the evaluated subset.
    pub fn in_study(&self) -> bool {
        IN_STUDY_ROLES.contains(self)
    }

    /// Synthetic token standing in for a mention of this role in a
    /// role-substituted token stream, e.g. `<ORG_Accused>`.
    pub fn token(&self) -> String {
        format!("<{}>", self.as_str())
    }

    /// All ten role tokens (for vocabulary extension).
    pub fn all_tokens() -> Vec<String> {
        ALL_ROLES.iter().map(|r| r.token()).collect()
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoleLabel {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_ROLES
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownRole(s.to_string()))
    }
}
