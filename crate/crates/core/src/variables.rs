//! The thirteen World Happiness variables: twelve predictors and the Life
//! Ladder target, with the header spellings used by the published panel.

/// A canonical variable, its short key for the command line, and the header
/// spellings recognised in the published panel files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: &'static str,
    pub short: &'static str,
    pub headers: &'static [&'static str],
}

pub const TARGET: &str = "Life Ladder";

pub const GDP: &str = "Log GDP per Capita";
pub const GINI: &str = "Gini of Household Income";
pub const GENEROSITY: &str = "Generosity";
pub const POSITIVE_AFFECT: &str = "Positive Affect";
pub const NEGATIVE_AFFECT: &str = "Negative Affect";
pub const CORRUPTION: &str = "Perceptions of Corruption";
pub const CONFIDENCE: &str = "Confidence in National Government";
pub const HEALTHY_LIFE: &str = "Healthy Life Expectancy";
pub const DEMOCRATIC_QUALITY: &str = "Democratic Quality";
pub const DELIVERY_QUALITY: &str = "Delivery Quality";
pub const FREEDOM: &str = "Freedom to Make Life Choices";
pub const SOCIAL_SUPPORT: &str = "Social Support";

/// All variables in table order; the target comes last.
pub const VARIABLES: [VariableSpec; 13] = [
    VariableSpec {
        name: GDP,
        short: "GDP",
        headers: &["Log GDP per capita"],
    },
    VariableSpec {
        name: GINI,
        short: "Gini",
        headers: &["gini of household income reported in Gallup, by wp5-year"],
    },
    VariableSpec {
        name: GENEROSITY,
        short: "Generosity",
        headers: &[],
    },
    VariableSpec {
        name: POSITIVE_AFFECT,
        short: "PositiveAffect",
        headers: &["Positive affect"],
    },
    VariableSpec {
        name: NEGATIVE_AFFECT,
        short: "NegativeAffect",
        headers: &["Negative affect"],
    },
    VariableSpec {
        name: CORRUPTION,
        short: "Corruption",
        headers: &["Perceptions of corruption"],
    },
    VariableSpec {
        name: CONFIDENCE,
        short: "Confidence",
        headers: &["Confidence in national government"],
    },
    VariableSpec {
        name: HEALTHY_LIFE,
        short: "HLE",
        headers: &["Healthy life expectancy at birth"],
    },
    VariableSpec {
        name: DEMOCRATIC_QUALITY,
        short: "DemocraticQuality",
        headers: &[],
    },
    VariableSpec {
        name: DELIVERY_QUALITY,
        short: "DeliveryQuality",
        headers: &[],
    },
    VariableSpec {
        name: FREEDOM,
        short: "Freedom",
        headers: &["Freedom to make life choices"],
    },
    VariableSpec {
        name: SOCIAL_SUPPORT,
        short: "SocialSupport",
        headers: &["Social support"],
    },
    VariableSpec {
        name: TARGET,
        short: "LifeLadder",
        headers: &[],
    },
];

pub fn names() -> Vec<String> {
    VARIABLES.iter().map(|v| v.name.to_string()).collect()
}

pub fn predictor_names() -> Vec<String> {
    VARIABLES
        .iter()
        .filter(|v| v.name != TARGET)
        .map(|v| v.name.to_string())
        .collect()
}

pub fn spec(name: &str) -> Option<&'static VariableSpec> {
    VARIABLES.iter().find(|v| v.name == name)
}

/// Resolves a user-typed variable reference: a canonical name or short key,
/// case-insensitively.
pub fn resolve(input: &str) -> Option<&'static str> {
    let needle = input.trim();
    VARIABLES
        .iter()
        .find(|v| v.name.eq_ignore_ascii_case(needle) || v.short.eq_ignore_ascii_case(needle))
        .map(|v| v.name)
}
