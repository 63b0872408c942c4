//! Command-line front end: builds a family from flags or a JSON config,
//! runs one verification, writes summary.json plus CSV artifacts, and maps
//! the outcome to an exit code (0 pass, 1 usage error, 2 verification
//! failure or refusal).

mod build;
mod config;
mod ops;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use config::CommonArgs;
use report::{write_summary, CliError, OpOutput};

#[derive(Parser)]
#[command(
    name = "annulus",
    version,
    about = "Twist maps of the annulus, foliations by graphs, and their invariants"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rotation number of the projected dynamics on one leaf
    RotationNumber {
        /// Leaf label
        #[arg(long, default_value_t = 0.3)]
        c: f64,
        /// Orbit length
        #[arg(long, default_value_t = 100_000)]
        n_iter: u64,
    },
    /// Rotation numbers across the leaf window, with Lipschitz bounds
    RhoProfile {
        /// Number of leaf labels sampled inside the window
        #[arg(long, default_value_t = 33)]
        nodes: usize,
        /// Orbit length per leaf
        #[arg(long, default_value_t = 20_000)]
        n_iter: u64,
    },
    /// Orbit-measure CDF conjugating one leaf to a rigid rotation
    Conjugacy {
        /// Leaf label; the default avoids short periodic leaves of the
        /// stock families, where an orbit CDF cannot resolve below 1/period
        #[arg(long, default_value_t = 0.31234568)]
        c: f64,
        /// Orbit length behind the empirical CDF
        #[arg(long, default_value_t = 100_000)]
        orbit: usize,
        /// Angle cells at which the conjugacy is tabulated
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Residual bound; defaults to 5/orbit
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Invariant density of a periodic leaf from the torsion of the return map
    RationalDensity {
        /// Leaf label
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        /// Period of the leaf dynamics
        #[arg(long, default_value_t = 1)]
        q: u32,
        /// Angle resolution of the density table
        #[arg(long, default_value_t = 256)]
        n_theta: usize,
    },
    /// Tabulate the normalized generating function of the foliation
    GeneratingFunction {
        #[arg(long, default_value_t = 256)]
        n_theta: usize,
        #[arg(long, default_value_t = 65)]
        n_c: usize,
    },
    /// Grid-refinement test for jumps of the label derivative
    C1Report {
        #[arg(long, default_value_t = 128)]
        n_theta: usize,
        #[arg(long, default_value_t = 129)]
        n_c: usize,
    },
    /// Holder exponent of the leaf family in the label
    HolderFit {
        /// Random label pairs in the fit
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        /// Smallest acceptable exponent
        #[arg(long, default_value_t = 0.45)]
        min_exponent: f64,
        /// Smallest acceptable fit quality
        #[arg(long, default_value_t = 0.9)]
        min_r_squared: f64,
    },
    /// Two-sided Lipschitz bounds of the leaf family in the label
    Bilipschitz {
        #[arg(long, default_value_t = 64)]
        n_theta: usize,
        #[arg(long, default_value_t = 64)]
        n_c: usize,
    },
    /// Symmetry of the mixed partials of the generating function
    MixedPartials {
        #[arg(long, default_value_t = 128)]
        n_theta: usize,
        #[arg(long, default_value_t = 128)]
        n_c: usize,
        #[arg(long, default_value_t = 1e-5)]
        threshold: f64,
    },
    /// Finite-time Green slopes at a point, with interleaving report
    Green {
        /// Leaf label of the base point
        #[arg(long, default_value_t = 0.3)]
        c: f64,
        /// Angle of the base point
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Iterations accumulated in each direction
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        /// Convergence tolerance for the slope limits
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Leaf Dini slopes against the Green slopes along one leaf
    Sandwich {
        /// Leaf label
        #[arg(long, default_value_t = 0.3)]
        c: f64,
        /// Angle samples along the leaf
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Iterations per Green-slope accumulation
        #[arg(long, default_value_t = 60)]
        n_max: usize,
        /// Slack allowed before a sample counts as a violation
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Build the straightening map and measure its area distortion
    Straighten {
        #[arg(long, default_value_t = 256)]
        n_theta: usize,
        #[arg(long, default_value_t = 65)]
        n_c: usize,
        /// Random rectangles pushed through the map
        #[arg(long, default_value_t = 20)]
        rects: usize,
        /// Boundary points per rectangle
        #[arg(long, default_value_t = 1024)]
        refinement: usize,
        /// Acceptable relative area distortion
        #[arg(long, default_value_t = 1e-3)]
        max_distortion: f64,
    },
    /// Conjugate the map by the straightening and compare with its shear
    ArnoldLiouville {
        #[arg(long, default_value_t = 512)]
        n_theta: usize,
        #[arg(long, default_value_t = 129)]
        n_c: usize,
        /// Leaf labels in the measured rotation profile
        #[arg(long, default_value_t = 17)]
        profile_nodes: usize,
        /// Orbit length per profile node
        #[arg(long, default_value_t = 100_000)]
        n_iter: u64,
        /// Test points per leaf
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Residual bound
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
    },
    /// Mollify the generating function and track the C1 defect
    Mollify {
        #[arg(long, default_value_t = 128)]
        n_theta: usize,
        #[arg(long, default_value_t = 257)]
        n_c: usize,
        /// Mollification radii, largest first
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.025])]
        epsilons: Vec<f64>,
    },
    /// Full verification suite for the glued twist map and its foliation
    StrangeDemo {
        /// Leaves in the invariance check
        #[arg(long, default_value_t = 20)]
        leaves: usize,
        /// Leaves in the flux check
        #[arg(long, default_value_t = 5)]
        flux_leaves: usize,
        /// Labels in the rotation-profile comparison
        #[arg(long, default_value_t = 9)]
        profile_nodes: usize,
        /// Orbit length per profile node
        #[arg(long, default_value_t = 20_000)]
        n_iter: u64,
    },
    /// Full verification suite for the plateau family and its approximants
    PlateauDemo {
        /// Half-width of the angle interval where the profile slope is -1
        #[arg(long, default_value_t = 0.1)]
        plateau_halfwidth: f64,
        /// Width of the quintic blend on each side of the plateau
        #[arg(long, default_value_t = 0.15)]
        ramp_width: f64,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::RotationNumber { .. } => "rotation-number",
            Cmd::RhoProfile { .. } => "rho-profile",
            Cmd::Conjugacy { .. } => "conjugacy",
            Cmd::RationalDensity { .. } => "rational-density",
            Cmd::GeneratingFunction { .. } => "generating-function",
            Cmd::C1Report { .. } => "c1-report",
            Cmd::HolderFit { .. } => "holder-fit",
            Cmd::Bilipschitz { .. } => "bilipschitz",
            Cmd::MixedPartials { .. } => "mixed-partials",
            Cmd::Green { .. } => "green",
            Cmd::Sandwich { .. } => "sandwich",
            Cmd::Straighten { .. } => "straighten",
            Cmd::ArnoldLiouville { .. } => "arnold-liouville",
            Cmd::Mollify { .. } => "mollify",
            Cmd::StrangeDemo { .. } => "strange-demo",
            Cmd::PlateauDemo { .. } => "plateau-demo",
        }
    }
}

fn run(cli: &Cli) -> Result<OpOutput, CliError> {
    let s = config::resolve(&cli.common)?;
    let out = cli.common.out.as_path();
    match &cli.cmd {
        Cmd::RotationNumber { c, n_iter } => ops::rotation_number_op(out, &s, *c, *n_iter),
        Cmd::RhoProfile { nodes, n_iter } => ops::rho_profile_op(out, &s, *nodes, *n_iter),
        Cmd::Conjugacy {
            c,
            orbit,
            nodes,
            threshold,
        } => ops::conjugacy_op(out, &s, *c, *orbit, *nodes, *threshold),
        Cmd::RationalDensity { c, q, n_theta } => {
            ops::rational_density_op(out, &s, *c, *q, *n_theta)
        }
        Cmd::GeneratingFunction { n_theta, n_c } => {
            ops::generating_function_op(out, &s, *n_theta, *n_c)
        }
        Cmd::C1Report { n_theta, n_c } => ops::c1_report_op(out, &s, *n_theta, *n_c),
        Cmd::HolderFit {
            pairs,
            min_exponent,
            min_r_squared,
        } => ops::holder_fit_op(out, &s, *pairs, *min_exponent, *min_r_squared),
        Cmd::Bilipschitz { n_theta, n_c } => ops::bilipschitz_op(out, &s, *n_theta, *n_c),
        Cmd::MixedPartials {
            n_theta,
            n_c,
            threshold,
        } => ops::mixed_partials_op(out, &s, *n_theta, *n_c, *threshold),
        Cmd::Green {
            c,
            theta,
            n_max,
            tol,
        } => ops::green_op(out, &s, *c, *theta, *n_max, *tol),
        Cmd::Sandwich {
            c,
            samples,
            n_max,
            tol,
        } => ops::sandwich_op(out, &s, *c, *samples, *n_max, *tol),
        Cmd::Straighten {
            n_theta,
            n_c,
            rects,
            refinement,
            max_distortion,
        } => ops::straighten_op(
            out,
            &s,
            *n_theta,
            *n_c,
            *rects,
            *refinement,
            *max_distortion,
        ),
        Cmd::ArnoldLiouville {
            n_theta,
            n_c,
            profile_nodes,
            n_iter,
            samples,
            threshold,
        } => ops::arnold_liouville_op(
            out,
            &s,
            *n_theta,
            *n_c,
            *profile_nodes,
            *n_iter,
            *samples,
            *threshold,
        ),
        Cmd::Mollify {
            n_theta,
            n_c,
            epsilons,
        } => ops::mollify_op(out, &s, *n_theta, *n_c, epsilons),
        Cmd::StrangeDemo {
            leaves,
            flux_leaves,
            profile_nodes,
            n_iter,
        } => ops::strange_demo_op(out, &s, *leaves, *flux_leaves, *profile_nodes, *n_iter),
        Cmd::PlateauDemo {
            plateau_halfwidth,
            ramp_width,
        } => ops::plateau_demo_op(out, &s, *plateau_halfwidth, *ramp_width),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let operation = cli.cmd.name();
    match run(&cli) {
        Ok(output) => {
            if let Err(e) = write_summary(&cli.common.out, operation, &output) {
                eprintln!("annulus: cannot write summary: {e:?}");
                return ExitCode::from(1);
            }
            if output.pass {
                println!("{operation}: pass");
                ExitCode::SUCCESS
            } else {
                eprintln!("{operation}: verification failed (see summary.json)");
                ExitCode::from(2)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("annulus: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Verify(msg)) => {
            // The computation refused a precondition; record the refusal as a
            // failed verification so the artifact trail stays complete.
            let output = OpOutput {
                claim: "computation-refused-precondition",
                inputs: json!({}),
                results: json!({ "error": msg }),
                pass: false,
            };
            if let Err(e) = write_summary(&cli.common.out, operation, &output) {
                eprintln!("annulus: cannot write summary: {e:?}");
                return ExitCode::from(1);
            }
            eprintln!("{operation}: {msg}");
            ExitCode::from(2)
        }
    }
}
