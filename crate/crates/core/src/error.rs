//! Error type shared by every operation in this crate.

/// Failure modes surfaced by map evaluation, grid construction, fits and
/// straightening. Variants carry enough context to report the offending
/// location or magnitude.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("orbit diverged after {steps} steps: |{coord}| = {value:.3e} exceeds {bound:.3e}")]
    Divergence {
        coord: &'static str,
        value: f64,
        bound: f64,
        steps: u64,
    },

    #[error("curve image is not a graph: angle order breaks at sample {index}")]
    NonGraph { index: usize },

    #[error("curve is not invariant under the map: max deviation {max_dev:.3e} > {tol:.3e}")]
    NotInvariant { max_dev: f64, tol: f64 },

    #[error("leaf mean {mean:.6} does not match label {c:.6} (|diff| = {dev:.3e})")]
    LeafLabel { c: f64, mean: f64, dev: f64 },

    #[error("grid too small: need at least {need} {what}, got {got}")]
    GridTooSmall {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error(
        "not straightenable: du_dc jumps by {jump:.3e} near c = {c:.6} and the jump \
         survives refinement"
    )]
    NotStraightenableJump { c: f64, jump: f64 },

    #[error(
        "not straightenable: theta + du_dc has cell slope {min_slope:.3e} at c = {c:.6}, \
         so the angle chart is not injective there"
    )]
    NotStraightenableSlope { c: f64, min_slope: f64 },

    #[error("insufficient data for {what}: {got} usable samples, need {need}")]
    InsufficientData {
        what: &'static str,
        got: usize,
        need: usize,
    },

    #[error("degenerate foliation: all sampled leaf differences below {floor:.1e}")]
    DegenerateFoliation { floor: f64 },

    #[error("matrix nearly singular: |det| = {det:.3e}")]
    NearSingular { det: f64 },

    #[error("differential maps the vertical to a vertical: first component {component:.3e}")]
    VerticalImage { component: f64 },

    #[error("orbit torsion entry not positive: s_q({theta:.4}) = {value:.3e}")]
    TorsionSign { theta: f64, value: f64 },

    #[error(
        "leaf is not {p}/{q}-periodic: rotation number {rho:.8} (bracket {bracket:.1e}), \
         max return gap {return_gap:.3e}"
    )]
    NotPeriodic {
        rho: f64,
        bracket: f64,
        p: i64,
        q: u32,
        return_gap: f64,
    },

    #[error(
        "rotation numbers decrease from {rho_lo:.8} at c = {c_lo:.6} to {rho_hi:.8} at \
         c = {c_hi:.6}, beyond the bracket error: twist violation"
    )]
    TwistViolation {
        c_lo: f64,
        c_hi: f64,
        rho_lo: f64,
        rho_hi: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
