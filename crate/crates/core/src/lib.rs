//! Optimal power flow and techno-economic assessment for hybrid AC/DC
//! microgrids.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`grid_model`] parses and validates a network and normalizes it to
//!    per-unit quantities.
//! 2. [`scenario`] turns a base network into an operating or economic
//!    scenario.
//! 3. [`opf`] assembles the polynomial optimal power flow for one of four
//!    objectives, solves it with the self-contained [`nlp`] solver and
//!    unpacks the result into engineering units.
//! 4. [`kpi`] computes the eight technical and economic indicators.
//! 5. [`io`] owns the JSON file formats, report rendering, comparison
//!    against field measurements and the command-line front end.
//!
//! ```no_run
//! use acdc_opf::io::{fixture_path, read_network};
//! use acdc_opf::opf::{solve_opf, ObjectiveKind};
//! use acdc_opf::scenario::OpfScenario;
//!
//! let network = read_network(fixture_path("ceder.json")).unwrap();
//! let run = solve_opf(&network, &OpfScenario::new(ObjectiveKind::H1), &Default::default()).unwrap();
//! println!("generation: {:.5} kW", run.solution.total_generation_kw);
//! ```

pub mod error;
pub mod grid_model;
pub mod io;
pub mod kpi;
pub mod nlp;
pub mod opf;
pub mod scenario;

pub use error::{Error, Result};
