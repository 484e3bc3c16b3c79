//! Stabilizers of point sets of F_q^2 under SL2(F_q), together with the
//! incidence geometry of F_q^3 they embed into.

pub mod error;
pub mod families;
pub mod gf;
pub mod harness;
pub mod incidence3d;
pub mod plane;
pub mod rng;
pub mod stabilizer;

pub use error::{Error, Result};
pub use families::{gen_family, parse_set, FamilySpec};
pub use gf::{Elem, FieldCtx};
pub use harness::{run_campaign, Campaign, CampaignConfig, CampaignOutput, OutputFormat, Summary};
pub use incidence3d::{Line3, Plane3, Point3};
pub use plane::{Mat2, MatrixSet, Point2, PointSet, ProjLine, Sl2};
pub use rng::SplitMix64;
pub use stabilizer::{
    bound_report, stabilizer_brute, stabilizer_fast, BoundConstants, BoundReport,
};
