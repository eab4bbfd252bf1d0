//! Optimal power flow in rectangular voltage coordinates.
//!
//! [`OpfProblem::assemble`] turns a physical network and an [`OpfScenario`]
//! into a polynomial program: active and reactive bus balances, grid-forming
//! voltage equalities, voltage bands, branch current and rating limits, and
//! one of four objectives. [`solve_opf`] runs the [`nlp`](crate::nlp) solver
//! and unpacks the optimum into an [`OpfSolution`].
//!
//! [`OpfScenario`]: crate::scenario::OpfScenario

mod layout;
mod problem;
mod run;
mod solution;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use layout::{StateLayout, Variable};
pub use problem::{ConverterFlow, EqualityRow, InequalityRow, OpfProblem, Regularization};
pub use run::{solve_opf, OpfRun};
pub use solution::{
    extract_solution, BranchKind, BranchResult, BusResult, ConverterResult, GeneratorResult,
    GridResult, OpfSolution,
};

/// The optimization goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Minimize total generation, i.e. losses.
    H1,
    /// Minimize the squared deviation of bus voltages from nominal.
    H2,
    /// Minimize operating cost.
    H3,
    /// Maximize generation.
    H4,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::H1,
        ObjectiveKind::H2,
        ObjectiveKind::H3,
        ObjectiveKind::H4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ObjectiveKind::H1 => "h1",
            ObjectiveKind::H2 => "h2",
            ObjectiveKind::H3 => "h3",
            ObjectiveKind::H4 => "h4",
        }
    }

    /// Unit of [`OpfProblem::objective_value`].
    pub fn unit(self) -> &'static str {
        match self {
            ObjectiveKind::H1 | ObjectiveKind::H4 => "kW",
            ObjectiveKind::H2 => "pu^2",
            ObjectiveKind::H3 => "currency/h",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Scenario(format!("unknown objective {s:?} (expected h1..h4)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_names_round_trip() {
        for kind in ObjectiveKind::ALL {
            assert_eq!(kind.to_string().parse::<ObjectiveKind>().unwrap(), kind);
        }
        assert_eq!("H3".parse::<ObjectiveKind>().unwrap(), ObjectiveKind::H3);
        assert!("h9".parse::<ObjectiveKind>().is_err());
    }
}
