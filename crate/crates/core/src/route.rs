use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which solver answers a query.
///
/// In metric definitions `Llm` is class A and `Agent` is class B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "LLM")]
    Llm,
    #[serde(rename = "Agent")]
    Agent,
}

impl Route {
    pub const ALL: [Route; 2] = [Route::Llm, Route::Agent];

    pub fn as_str(self) -> &'static str {
        match self {
            Route::Llm => "LLM",
            Route::Agent => "Agent",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown route '{0}' (expected LLM or Agent)")]
pub struct ParseRouteError(pub String);

impl FromStr for Route {
    type Err = ParseRouteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "llm" => Ok(Route::Llm),
            "agent" => Ok(Route::Agent),
            _ => Err(ParseRouteError(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_as_display_labels() {
        assert_eq!(serde_json::to_string(&Route::Llm).unwrap(), "\"LLM\"");
        assert_eq!(serde_json::to_string(&Route::Agent).unwrap(), "\"Agent\"");
        let r: Route = serde_json::from_str("\"Agent\"").unwrap();
        assert_eq!(r, Route::Agent);
    }

    #[test]
    fn parses_case_insensitively() {
        assert_eq!("llm".parse::<Route>().unwrap(), Route::Llm);
        assert_eq!(" AGENT ".parse::<Route>().unwrap(), Route::Agent);
        assert!("both".parse::<Route>().is_err());
    }
}
