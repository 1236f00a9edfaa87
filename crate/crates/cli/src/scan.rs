//! Grid scans over state families, one maximization per grid point.

use std::io::Write;

use rayon::prelude::*;
use tomobell_core::bell::{maximize_bell, MaximizeConfig, MaximizeResult};
use tomobell_core::portrait::{
    CanonicalPartition, CatClosedForm, PartitionScheme, PortraitSource, TruncatedPortrait,
};
use tomobell_core::states::{gaussian_purity_family, CatState, GaussianState, QuadratureConvention};
use tomobell_core::{Complex, Error};

use crate::args::Preset;
use crate::commands::ARGMAX_COLUMNS;
use crate::CliError;

pub struct ScanPlan {
    pub preset: Preset,
    pub grid1: Vec<f64>,
    pub grid2: Vec<f64>,
    pub partition: PartitionScheme,
    pub convention: QuadratureConvention,
}

pub struct Row {
    pub param1: f64,
    pub param2: f64,
    pub result: Result<MaximizeResult, Error>,
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: String| CliError::Usage(format!("grid '{s}': {why}"));
    let num = |t: &str| -> Result<f64, CliError> {
        let v: f64 = t.trim().parse().map_err(|_| bad(format!("'{t}' is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("'{t}' is not finite")))
        }
    };
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("a range needs start:stop:step".into()));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) {
            return Err(bad("step must be positive".into()));
        }
        if stop < start {
            Vec::new()
        } else {
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..n).map(|i| round12(start + i as f64 * step)).collect()
        }
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("grid is empty".into()));
    }
    Ok(grid)
}

/// Removes float noise such as `0.30000000000000004` from range points.
fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn source(plan: &ScanPlan, p1: f64, p2: f64, cfg: &MaximizeConfig) -> Result<Box<dyn PortraitSource>, Error> {
    let cat = |partition| -> Result<Box<dyn PortraitSource>, Error> {
        let state = CatState::new(Complex::new(p1, 0.0), Complex::new(p2, 0.0))?;
        Ok(Box::new(CatClosedForm { state, partition }))
    };
    match plan.preset {
        Preset::CatZeroNonzero => cat(CanonicalPartition::ZeroNonzero),
        Preset::CatEvenOdd => cat(CanonicalPartition::EvenOdd),
        Preset::GaussianFamily => {
            let spec = gaussian_purity_family(p1, p2)?.with_quadrature_convention(plan.convention);
            Ok(Box::new(TruncatedPortrait::new(
                GaussianState::new(spec)?,
                plan.partition.clone(),
                cfg.n_max,
                cfg.tail_eps,
            )))
        }
    }
}

/// Runs the grid in row-major order (`grid1` outer). Points run concurrently
/// on `cfg.jobs` threads; rows come back in grid order.
pub fn run(plan: &ScanPlan, cfg: &MaximizeConfig) -> Result<Vec<Row>, CliError> {
    let points: Vec<(f64, f64)> =
        plan.grid1.iter().flat_map(|&a| plan.grid2.iter().map(move |&b| (a, b))).collect();
    // the points share the pool with the starts inside each maximization
    let inner = MaximizeConfig { jobs: None, ..cfg.clone() };
    let one = |&(p1, p2): &(f64, f64)| {
        let result = source(plan, p1, p2, &inner).and_then(|src| maximize_bell(src.as_ref(), &inner));
        if let Err(e) = &result {
            log::warn!("grid point ({p1}, {p2}): {e}");
        }
        Row { param1: p1, param2: p2, result }
    };
    Ok(match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| points.par_iter().map(one).collect()),
        None => points.par_iter().map(one).collect(),
    })
}

pub fn write_csv(out: &mut dyn Write, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["param1", "param2", "f"];
    header.extend(ARGMAX_COLUMNS);
    header.extend(["evaluations", "error"]);
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.param1.to_string(), row.param2.to_string()];
        match &row.result {
            Ok(r) => {
                rec.push(r.f.to_string());
                rec.extend(r.argmax.to_reals().iter().map(f64::to_string));
                rec.push(r.evaluations.to_string());
                rec.push(String::new());
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 10));
                rec.push(format!("{}: {e}", e.code()));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
