//! Tabulated foliations and maps: CSV-backed bilinear interpolants so that
//! user-measured data can flow through the same verification pipeline as
//! the closed-form families.
//!
//! Foliation tables hold leaf heights on a (theta, c) grid; map tables hold
//! lifted images on an (x, r) grid, extended by the lift equivariance
//! F(x+1, r) = F(x, r) + (1, 0). Inverses of tabulated maps are solved by a
//! damped Newton iteration on the interpolant.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::foliation::FoliationSpec;
use crate::geom::{frac, Jacobian2, LiftPoint};
use crate::maps::TwistMapSpec;

/// Sorted unique values with inverse lookup into the original rows.
fn axis_of(mut vals: Vec<f64>) -> Vec<f64> {
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite axis values"));
    vals.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    vals
}

fn axis_index(axis: &[f64], v: f64) -> Option<usize> {
    let i = axis.partition_point(|&a| a < v - 1e-12);
    (i < axis.len() && (axis[i] - v).abs() < 1e-12).then_some(i)
}

/// Cell index and local coordinate for a sorted axis, clamped to the range.
fn locate(axis: &[f64], v: f64) -> (usize, f64) {
    let n = axis.len();
    if v <= axis[0] {
        return (0, 0.0);
    }
    if v >= axis[n - 1] {
        return (n - 2, 1.0);
    }
    let j = axis.partition_point(|&a| a <= v) - 1;
    let j = j.min(n - 2);
    (j, (v - axis[j]) / (axis[j + 1] - axis[j]))
}

struct Table2 {
    /// Angle or x nodes covering one period [0, 1), last node < 1.
    thetas: Vec<f64>,
    /// Fiber nodes.
    cs: Vec<f64>,
    /// Row-major values, theta-major.
    vals: Vec<Vec<f64>>, // one grid per field
}

impl Table2 {
    /// Periodic-in-theta bilinear interpolation of field k. `shift` is
    /// added per period wrap (1 for lifted angle images, 0 for scalars).
    fn eval(&self, k: usize, theta: f64, c: f64, shift: f64) -> f64 {
        let t = frac(theta);
        let whole = theta - t;
        let n = self.thetas.len();
        let (i, s) = if t >= self.thetas[n - 1] {
            // wrap cell between the last node and the first node + 1
            let span = 1.0 + self.thetas[0] - self.thetas[n - 1];
            (n - 1, (t - self.thetas[n - 1]) / span)
        } else {
            locate(&self.thetas, t)
        };
        let i1 = (i + 1) % n;
        let wrap = if i1 == 0 { shift } else { 0.0 };
        let (j, u) = locate(&self.cs, c);
        let m = self.cs.len();
        let f = &self.vals[k];
        let v00 = f[i * m + j];
        let v01 = f[i * m + j + 1];
        let v10 = f[i1 * m + j] + wrap;
        let v11 = f[i1 * m + j + 1] + wrap;
        (1.0 - s) * ((1.0 - u) * v00 + u * v01) + s * ((1.0 - u) * v10 + u * v11) + whole * shift
    }
}

/// Sorted row keys, sorted column keys, and values\[row\]\[col\].
type ParsedTable = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

fn parse_table<R: Read>(reader: R, headers: &[&str]) -> Result<ParsedTable> {
    let mut rdr = csv::Reader::from_reader(reader);
    {
        let got = rdr.headers()?;
        if got.len() != headers.len()
            || !headers.iter().zip(got.iter()).all(|(w, g)| g.trim() == *w)
        {
            return Err(Error::InvalidArgument(format!(
                "expected CSV header {:?}, got {:?}",
                headers.join(","),
                got
            )));
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::InvalidArgument(format!("bad CSV number: {e}")))?;
        if !row.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite CSV value".into()));
        }
        rows.push(row);
    }
    let thetas = axis_of(rows.iter().map(|r| r[0]).collect());
    let cs = axis_of(rows.iter().map(|r| r[1]).collect());
    if thetas.len() < 4 || cs.len() < 2 {
        return Err(Error::GridTooSmall {
            what: "table axis nodes",
            need: 4,
            got: thetas.len().min(cs.len()),
        });
    }
    if thetas[0] < -1e-12 || *thetas.last().unwrap() >= 1.0 {
        return Err(Error::InvalidArgument(
            "angle nodes must cover one period inside [0, 1)".into(),
        ));
    }
    let fields = headers.len() - 2;
    let mut vals = vec![vec![f64::NAN; thetas.len() * cs.len()]; fields];
    let m = cs.len();
    for row in &rows {
        let (Some(i), Some(j)) = (axis_index(&thetas, row[0]), axis_index(&cs, row[1])) else {
            return Err(Error::InvalidArgument("row off the grid axes".into()));
        };
        for k in 0..fields {
            vals[k][i * m + j] = row[2 + k];
        }
    }
    if vals.iter().any(|f| f.iter().any(|v| v.is_nan())) {
        return Err(Error::InvalidArgument(
            "incomplete table: missing grid nodes".into(),
        ));
    }
    Ok((thetas, cs, vals))
}

/// Reads a foliation from CSV rows `theta,c,eta` on a full grid. Leaves
/// interpolate bilinearly, periodically in the angle; the label window is
/// the c-range of the table. Leaf heights must be increasing in c at every
/// angle node (graphs of a foliation are ordered).
pub fn foliation_from_csv<R: Read>(reader: R) -> Result<FoliationSpec> {
    let (thetas, cs, vals) = parse_table(reader, &["theta", "c", "eta"])?;
    let m = cs.len();
    for (i, _) in thetas.iter().enumerate() {
        for j in 0..m - 1 {
            let (lo, hi) = (vals[0][i * m + j], vals[0][i * m + j + 1]);
            if !(hi > lo) {
                return Err(Error::InvalidArgument(format!(
                    "leaves unordered at theta = {}, c = {}: {} !< {}",
                    thetas[i], cs[j], lo, hi
                )));
            }
        }
    }
    let window = (cs[0], cs[m - 1]);
    let table = Arc::new(Table2 { thetas, cs, vals });
    Ok(FoliationSpec::new(
        Arc::new(move |t: f64, c: f64| table.eval(0, t, c, 0.0)),
        window,
    ))
}

/// Writes a foliation as CSV rows `theta,c,eta` on a uniform angle grid
/// (n_theta nodes in [0,1)) times the given labels.
pub fn tabulate_foliation<W: Write>(
    fol: &FoliationSpec,
    n_theta: usize,
    cs: &[f64],
    mut w: W,
) -> Result<()> {
    if n_theta < 4 || cs.len() < 2 {
        return Err(Error::GridTooSmall {
            what: "table axis nodes",
            need: 4,
            got: n_theta.min(cs.len()),
        });
    }
    writeln!(w, "theta,c,eta")?;
    for i in 0..n_theta {
        let t = i as f64 / n_theta as f64;
        for &c in cs {
            writeln!(w, "{},{},{}", t, c, fol.leaf(t, c))?;
        }
    }
    Ok(())
}

/// Reads a lifted map from CSV rows `x,r,fx,fr` on a full grid over one
/// angle period. The interpolant extends by the lift equivariance; the
/// inverse is solved by damped Newton on the interpolant and reports NaN
/// (caught by the orbit divergence guard) outside the table's reach.
pub fn map_from_csv<R: Read>(reader: R) -> Result<TwistMapSpec> {
    let (thetas, cs, vals) = parse_table(reader, &["x", "r", "fx", "fr"])?;
    let table = Arc::new(Table2 { thetas, cs, vals });
    let t_fwd = Arc::clone(&table);
    let forward = move |p: LiftPoint| -> LiftPoint {
        LiftPoint::new(t_fwd.eval(0, p.x, p.r, 1.0), t_fwd.eval(1, p.x, p.r, 0.0))
    };
    let t_inv = Arc::clone(&table);
    let fwd_for_inv = forward.clone();
    let inverse = move |target: LiftPoint| -> LiftPoint {
        // seed with the target shifted back by the mean angle displacement
        let m = t_inv.cs.len();
        let mean_dx: f64 = t_inv
            .thetas
            .iter()
            .enumerate()
            .flat_map(|(i, &t)| (0..m).map(move |j| (i, j, t)))
            .map(|(i, j, t)| t_inv.vals[0][i * m + j] - t)
            .sum::<f64>()
            / (t_inv.thetas.len() * m) as f64;
        let mut q = LiftPoint::new(target.x - mean_dx, target.r);
        let bad = LiftPoint::new(f64::NAN, f64::NAN);
        for _ in 0..60 {
            let fq = fwd_for_inv(q);
            let (ex, er) = (fq.x - target.x, fq.r - target.r);
            let err = ex.abs().max(er.abs());
            if err < 1e-12 {
                return q;
            }
            // finite-difference Jacobian of the interpolant
            let h = 1e-6;
            let fx1 = fwd_for_inv(LiftPoint::new(q.x + h, q.r));
            let fx0 = fwd_for_inv(LiftPoint::new(q.x - h, q.r));
            let fr1 = fwd_for_inv(LiftPoint::new(q.x, q.r + h));
            let fr0 = fwd_for_inv(LiftPoint::new(q.x, q.r - h));
            let j = Jacobian2::new(
                (fx1.x - fx0.x) / (2.0 * h),
                (fr1.x - fr0.x) / (2.0 * h),
                (fx1.r - fx0.r) / (2.0 * h),
                (fr1.r - fr0.r) / (2.0 * h),
            );
            let Ok((dx, dr)) = j.solve((ex, er)) else {
                return bad;
            };
            // damped update: halve until the residual actually drops
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let cand = LiftPoint::new(q.x - step * dx, q.r - step * dr);
                let fc = fwd_for_inv(cand);
                if (fc.x - target.x).abs().max((fc.r - target.r).abs()) < err {
                    q = cand;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return bad;
            }
        }
        let fq = fwd_for_inv(q);
        if (fq.x - target.x).abs().max((fq.r - target.r).abs()) < 1e-9 {
            q
        } else {
            bad
        }
    };
    Ok(TwistMapSpec::new(Arc::new(forward), Arc::new(inverse)))
}

/// Writes a map as CSV rows `x,r,fx,fr` over a uniform angle period grid
/// and the given fiber nodes.
pub fn tabulate_map<W: Write>(map: &TwistMapSpec, n_x: usize, rs: &[f64], mut w: W) -> Result<()> {
    if n_x < 4 || rs.len() < 2 {
        return Err(Error::GridTooSmall {
            what: "table axis nodes",
            need: 4,
            got: n_x.min(rs.len()),
        });
    }
    writeln!(w, "x,r,fx,fr")?;
    for i in 0..n_x {
        let x = i as f64 / n_x as f64;
        for &r in rs {
            let q = map.step(LiftPoint::new(x, r))?;
            writeln!(w, "{},{},{},{}", x, r, q.x, q.r)?;
        }
    }
    Ok(())
}
