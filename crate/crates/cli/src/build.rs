//! Turns resolved settings into a concrete (map, foliation) pair.

use std::fs::File;

use annulus_core::{
    foliation_from_csv, integrable_family, map_from_csv, strange_twist_map, Conjugator, EpsProfile,
    FoliationSpec, RhoFn, StrangeParams, TwistMapSpec,
};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::report::CliError;

/// A ready-to-use family: the foliation is always present, the map only when
/// the settings define one (a foliation table alone has no dynamics).
pub struct Family {
    pub map: Option<TwistMapSpec>,
    pub fol: FoliationSpec,
    /// Exact per-leaf rotation number when the family has one in closed form.
    pub rho_exact: Option<RhoFn>,
    pub window: (f64, f64),
    /// Echo of what was built, for the summary's `inputs` block.
    pub descriptor: Value,
}

impl Family {
    pub fn require_map(&self) -> Result<&TwistMapSpec, CliError> {
        self.map.as_ref().ok_or_else(|| {
            CliError::Usage("this operation needs a map; pass --map-table as well".into())
        })
    }
}

pub fn eps_by_name(name: &str, scale: f64) -> Result<EpsProfile, CliError> {
    match name {
        "zero" => Ok(EpsProfile::zero()),
        "abs_gauss" => Ok(EpsProfile::abs_gauss(scale)),
        "abs_linear" => Ok(EpsProfile::abs_linear(scale)),
        "smooth_gauss" => Ok(EpsProfile::smooth_gauss(scale)),
        other => Err(CliError::Usage(format!(
            "unknown amplitude profile '{other}' (expected zero | abs_gauss | abs_linear | smooth_gauss)"
        ))),
    }
}

pub fn build_family(s: &Settings) -> Result<Family, CliError> {
    match s.kind.as_str() {
        "integrable" => {
            let window = s.window.unwrap_or((-1.0, 1.0));
            let conjugator = match s.conjugate.as_str() {
                "none" => None,
                "angle_warp" => {
                    let eps = EpsProfile::smooth_gauss(s.eps_scale);
                    Some(Conjugator::angle_warp(eps)?)
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown conjugator '{other}' (expected none | angle_warp)"
                    )));
                }
            };
            let fam = integrable_family(RhoFn::identity(), conjugator, window)?;
            let descriptor = json!({
                "map": "integrable",
                "conjugate": s.conjugate,
                "eps_scale": if s.conjugate == "angle_warp" { Some(s.eps_scale) } else { None },
                "window": [window.0, window.1],
            });
            Ok(Family {
                map: Some(fam.map),
                fol: fam.foliation,
                rho_exact: Some(fam.rho),
                window,
                descriptor,
            })
        }
        "strange" => {
            let eps = eps_by_name(&s.eps_profile, s.eps_scale)?;
            let params = StrangeParams::with_measured_constants(eps, s.c_max)?;
            let rho = params.rho.clone();
            let strange = strange_twist_map(&params)?;
            let window = s.window.unwrap_or((-s.c_max, s.c_max));
            let descriptor = json!({
                "map": "strange",
                "eps_profile": s.eps_profile,
                "eps_scale": s.eps_scale,
                "c_max": s.c_max,
                "window": [window.0, window.1],
            });
            Ok(Family {
                map: Some(strange.map),
                fol: strange.foliation,
                rho_exact: Some(rho),
                window,
                descriptor,
            })
        }
        "user_table" => {
            let fol_path = s.foliation_table.as_ref().ok_or_else(|| {
                CliError::Usage("--map user_table needs --foliation-table".into())
            })?;
            let fol = foliation_from_csv(File::open(fol_path).map_err(|e| {
                CliError::Usage(format!("cannot open {}: {e}", fol_path.display()))
            })?)?;
            let map = match &s.map_table {
                Some(path) => Some(map_from_csv(File::open(path).map_err(|e| {
                    CliError::Usage(format!("cannot open {}: {e}", path.display()))
                })?)?),
                None => None,
            };
            let window = s.window.unwrap_or(fol.window);
            let descriptor = json!({
                "map": "user_table",
                "has_map_table": map.is_some(),
                "window": [window.0, window.1],
            });
            Ok(Family {
                map,
                fol,
                rho_exact: None,
                window,
                descriptor,
            })
        }
        "plateau" => Err(CliError::Usage(
            "the plateau family has its own aggregate runner; use the plateau-demo subcommand"
                .into(),
        )),
        other => Err(CliError::Usage(format!(
            "unknown map kind '{other}' (expected integrable | strange | user_table)"
        ))),
    }
}
