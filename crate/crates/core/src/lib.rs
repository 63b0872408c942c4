//! Twist maps of the annulus, foliations by graphs, and their invariants.
//!
//! The crate builds lifted twist dynamics on the annulus, tabulates
//! generating functions of foliations by graphs, estimates rotation numbers
//! and semi-conjugacies on leaves, accumulates Green bundles, and constructs
//! (or refuses to construct) straightening changes of coordinates. A gallery
//! of closed-form families exercises every code path, including ones built
//! to fail the straightening gates.

// Validation code writes `!(hi > lo)` instead of `hi <= lo` on purpose: the
// negated form also routes NaN inputs into the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod foliation;
pub mod gallery;
pub mod geom;
pub mod green;
pub mod maps;
pub mod quad;
pub mod rotation;
pub mod solve;
pub mod straighten;
pub mod table;

pub use error::{Error, Result};
pub use foliation::{
    area_between, bilipschitz_fit, build_generating_function, c1_report, holder_fit, leaf_mean,
    mixed_partials_check, C1Report, FoliationPartials, FoliationSpec, GeneratingGrid, GridParams,
    HolderFit, LipschitzFit, MixedMethod, MixedPartialsReport,
};
pub use gallery::{
    integrable_family, plateau_family, strange_foliation, strange_twist_map, Conjugator,
    EpsProfile, GalleryFamily, HalfStraightening, PlateauFamily, PlateauParams, RhoFn, StrangeMap,
    StrangeParams,
};
pub use geom::{AnnulusPoint, Jacobian2, LiftPoint};
pub use green::{
    dynamical_criterion, green_limits, green_slope, sandwich_check, DynamicalEvidence, GreenData,
    GreenViolation, SandwichReport, SandwichSample,
};
pub use maps::{
    exactness_flux, inverse_defect, iterated_twist_bounds, iterated_twist_margin,
    lift_periodicity_defect, map_eval_lift, map_jacobian, sample_graph, shear_map,
    symplectic_defect, twist_bounds, twist_margin, TwistMapSpec,
};
pub use rotation::{
    measure_cdf, projected_circle_map, rational_leaf_density, rho_profile, rotation_number,
    semiconjugacy_residual, CircleMapLift, ConjugacyData, LeafDensity, RhoProfile,
    RotationEstimate,
};
pub use straighten::{
    area_distortion, arnold_liouville_residual, build_straightening, bump, mollify,
    smooth_increasing_1d, MollifiedFamily, Rect, StraighteningMap,
};
pub use table::{foliation_from_csv, map_from_csv, tabulate_foliation, tabulate_map};
