//! Required-coordination analysis for two-agent planning domains.
//!
//! The pipeline runs from a domain description to its joint state graph
//! ([`domain`]), optimal plans ([`plan`]), the RC graph ([`rc`]), a
//! conflict-separating abstraction ([`abstraction`]) and the language it
//! induces ([`language`]), with [`sim`] executing plan pairs as ground truth.

pub mod abstraction;
pub mod domain;
pub mod error;
pub mod export;
pub mod language;
pub mod pipeline;
pub mod plan;
pub mod product;
pub mod rc;
pub mod sim;

pub use abstraction::{Abstraction, BlockId, ColorOrder, Coloring, ConflictGraph, PerfectionReport, Scope, Violation};
pub use domain::{Agent, DomainSpec, Edge, Instance, JointAction, LabelId, StateGraph, StateId};
pub use error::{Error, Result};
pub use language::{Language, Sentence, Word, WordId};
pub use plan::{DistanceTable, Plan, PlanDag, DEFAULT_PLAN_CAP};
pub use rc::{ConflictRule, RcGraph, RcOptions, ThetaEntry};
