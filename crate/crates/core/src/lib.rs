//! Choice functions on finite ground sets, stable contract systems, and the
//! disaggregation transform that replaces a multi-contract agent by a chain
//! of single-contract clones while preserving the stable systems.
//!
//! The crate is organized around four layers:
//!
//! - [`menu`] / [`cf`] / [`audit`] / [`decompose`]: menus as bitsets, the
//!   choice-function representations and composition operators, exhaustive
//!   axiom audits, and the serial-decomposition search;
//! - [`problem`] / [`stability`]: frames, problems, stability reports, the
//!   brute-force stable-set oracle, and the worker-return solver;
//! - [`split`]: the clone construction, projection and lift between the
//!   original and the modified problem, and the equivalence verifier;
//! - [`format`]: the JSON instance format and canonical serialization.
//!
//! ```
//! use std::collections::{BTreeMap, BTreeSet};
//! use plott_core::{
//!     enumerate_stable, quota_as_stages, verify_equivalence, Bipartition, ChoiceFunction,
//!     Frame, Limits, Problem,
//! };
//!
//! // one firm taking up to two of {e0, e1}, one worker wanting both
//! let frame = Frame::new(
//!     vec!["f".into(), "w".into()],
//!     vec!["e0".into(), "e1".into()],
//!     vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 1])],
//! )?;
//! let problem = Problem::new(
//!     frame,
//!     vec![
//!         ChoiceFunction::quota(vec![0, 1], 2)?,
//!         ChoiceFunction::quota(vec![1, 0], 2)?,
//!     ],
//!     Some(Bipartition {
//!         firms: BTreeSet::from([0]),
//!         workers: BTreeSet::from([1]),
//!     }),
//! )?;
//!
//! let limits = Limits::default();
//! let family = enumerate_stable(&problem, &limits)?;
//! assert_eq!(family.len(), 1); // both contracts settle
//!
//! // replace the quota-2 worker by two linear clones; the stable systems
//! // of the two problems correspond one to one
//! let stages = quota_as_stages(problem.cf(1)).unwrap();
//! let report = verify_equivalence(&problem, &BTreeMap::from([(1, stages)]), &limits)?;
//! assert!(report.bijection_ok);
//! # Ok::<(), plott_core::Error>(())
//! ```

pub mod audit;
pub mod cf;
pub mod decompose;
pub mod error;
pub mod format;
pub mod gen;
pub mod limits;
pub mod menu;
pub mod problem;
pub mod split;
pub mod stability;

pub use audit::{audit_axioms, is_quotable_with, AxiomReport, MenuPair, Witnesses};
pub use cf::{CfKind, ChoiceFunction};
pub use decompose::{find_sequential_decomposition, quota_as_stages};
pub use error::{Error, Result};
pub use limits::Limits;
pub use menu::{GroundSet, Menu};
pub use problem::{Bipartition, ContractSystem, Frame, Problem};
pub use split::{
    lift_system, project_system, split_agent_once, split_workers, two_sided_split_unchecked,
    verify_equivalence, verify_projection, EquivalenceReport, SplitResult, TwoSidedSplit,
};
pub use stability::{
    blair_compare_systems, blair_leq_all_firms, enumerate_stable, interested_set, is_stable,
    lattice_join_bipartite, reinstate_step, resume_worker_return, solve_by_worker_return,
    SolveOutcome, StabilityReport, StepOutcome, TraceStep,
};
