use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tomobell_core::bell::{
    bell_matrix, bell_number, chsh_check, maximize_bell, BellMatrix, BellSettings, MaximizeResult,
    Verdict,
};
use tomobell_core::portrait::{state_portraits, PortraitVector};
use tomobell_core::states::{PhotonPair, State, TomogramSource};

use crate::args::{BoxEnforce, Command, Format, OutputArgs};
use crate::complex::format_complex;
use crate::{scan, CliError};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Tomogram { state, n1, n2, alpha, output } => {
            let state = State::from_json_file(&state.path)?;
            let w = state.tomogram(PhotonPair::new(n1, n2), alpha.pair())?;
            emit(&output, |out, format| match format {
                Format::Plain => writeln!(out, "{}", fixed12(w)),
                Format::Csv => writeln!(out, "n1,n2,w\n{n1},{n2},{w}"),
            })
        }
        Command::Portrait { state, partition, alpha, truncation, output } => {
            let state = State::from_json_file(&state.path)?;
            let src = state_portraits(state, partition.scheme, truncation.nmax, truncation.tail_eps);
            let p = src.portrait(alpha.pair())?;
            emit(&output, |out, format| write_portrait(out, format, &p))
        }
        Command::Bell {
            state,
            partition,
            alpha,
            beta1,
            beta2,
            truncation,
            box_half_width,
            box_enforce,
            output,
        } => {
            let settings = alpha.settings(beta1, beta2);
            if !settings.is_finite() {
                return Err(CliError::Usage("settings must be finite".into()));
            }
            if box_enforce == BoxEnforce::Strict && settings.max_component() > box_half_width {
                return Err(CliError::Usage(format!(
                    "settings leave the box: largest |Re| or |Im| is {} > {box_half_width}",
                    settings.max_component()
                )));
            }
            let state = State::from_json_file(&state.path)?;
            let src = state_portraits(state, partition.scheme, truncation.nmax, truncation.tail_eps);
            let m = bell_matrix(src.as_ref(), &settings)?;
            let b = bell_number(&m);
            let verdict = chsh_check(b)?;
            emit(&output, |out, format| write_bell(out, format, &m, b, verdict))
        }
        Command::Maximize { state, partition, truncation, maximizer, output } => {
            let cfg = maximizer.config(&truncation);
            cfg.validate()?;
            let state = State::from_json_file(&state.path)?;
            let src = state_portraits(state, partition.scheme, cfg.n_max, cfg.tail_eps);
            let r = maximize_bell(src.as_ref(), &cfg)?;
            let verdict = chsh_check(r.f)?;
            emit(&output, |out, format| write_maximize(out, format, &r, verdict))
        }
        Command::Scan {
            preset,
            grid1,
            grid2,
            partition,
            convention,
            truncation,
            maximizer,
            out,
        } => {
            let cfg = maximizer.config(&truncation);
            cfg.validate()?;
            let plan = scan::ScanPlan {
                preset,
                grid1: scan::parse_grid(&grid1)?,
                grid2: scan::parse_grid(&grid2)?,
                partition: partition.scheme,
                convention: convention.into(),
            };
            let rows = scan::run(&plan, &cfg)?;
            let mut sink = open(out.as_deref())?;
            scan::write_csv(&mut sink, &rows)?;
            sink.flush()?;
            Ok(())
        }
    }
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(
    output: &OutputArgs,
    write: impl FnOnce(&mut dyn Write, Format) -> io::Result<()>,
) -> Result<(), CliError> {
    let mut sink = open(output.out.as_deref())?;
    write(&mut sink, output.format)?;
    sink.flush()?;
    Ok(())
}

/// Twelve digits after the point; small values switch to scientific form so
/// they keep twelve significant digits.
fn fixed12(v: f64) -> String {
    if v == 0.0 || v.abs() >= 1e-3 {
        format!("{v:.12}")
    } else {
        format!("{v:.11e}")
    }
}

const CELLS: [&str; 4] = ["++", "+-", "-+", "--"];

fn write_portrait(out: &mut dyn Write, format: Format, p: &PortraitVector) -> io::Result<()> {
    match format {
        Format::Plain => {
            for (name, w) in CELLS.iter().zip(p.w) {
                writeln!(out, "w{name} = {}", fixed12(w))?;
            }
            writeln!(out, "tail_deficit = {:e}", p.tail_deficit)
        }
        Format::Csv => {
            writeln!(out, "w_pp,w_pm,w_mp,w_mm,tail_deficit")?;
            writeln!(out, "{},{},{},{},{}", p.w[0], p.w[1], p.w[2], p.w[3], p.tail_deficit)
        }
    }
}

fn verdict_text(v: Verdict) -> String {
    match v {
        Verdict::SeparableConsistent => "SEPARABLE-CONSISTENT".into(),
        Verdict::EntangledWitnessed { margin } => format!("ENTANGLED-WITNESSED (margin {margin:.6})"),
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::SeparableConsistent => "SEPARABLE-CONSISTENT",
        Verdict::EntangledWitnessed { .. } => "ENTANGLED-WITNESSED",
    }
}

fn write_bell(
    out: &mut dyn Write,
    format: Format,
    m: &BellMatrix,
    b: f64,
    verdict: Verdict,
) -> io::Result<()> {
    match format {
        Format::Plain => {
            writeln!(out, "Bell matrix (columns: (a1,a2) (a1,b2) (b1,a2) (b1,b2)):")?;
            for (name, row) in CELLS.iter().zip(m.m) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
                writeln!(out, "  {name}  {}", cells.join("  "))?;
            }
            let deficit = m.deficits.iter().cloned().fold(0.0, f64::max);
            writeln!(out, "max tail deficit = {deficit:e}")?;
            writeln!(out, "B = {b:.6}")?;
            writeln!(out, "{}", verdict_text(verdict))
        }
        Format::Csv => {
            let mut header = vec!["B".to_string(), "verdict".to_string()];
            let mut values = vec![b.to_string(), verdict_name(verdict).to_string()];
            for i in 0..4 {
                for j in 0..4 {
                    header.push(format!("m{}{}", i + 1, j + 1));
                    values.push(m.m[i][j].to_string());
                }
            }
            writeln!(out, "{}\n{}", header.join(","), values.join(","))
        }
    }
}

pub const ARGMAX_COLUMNS: [&str; 8] = [
    "argmax_alpha1_re",
    "argmax_alpha1_im",
    "argmax_alpha2_re",
    "argmax_alpha2_im",
    "argmax_beta1_re",
    "argmax_beta1_im",
    "argmax_beta2_re",
    "argmax_beta2_im",
];

fn write_maximize(
    out: &mut dyn Write,
    format: Format,
    r: &MaximizeResult,
    verdict: Verdict,
) -> io::Result<()> {
    let s: &BellSettings = &r.argmax;
    match format {
        Format::Plain => {
            writeln!(out, "f = {:.9}", r.f)?;
            writeln!(
                out,
                "argmax: alpha1 = {}, alpha2 = {}, beta1 = {}, beta2 = {}",
                format_complex(s.alpha1),
                format_complex(s.alpha2),
                format_complex(s.beta1),
                format_complex(s.beta2)
            )?;
            let ok = r.per_start_best.iter().flatten().count();
            writeln!(
                out,
                "starts: {ok} of {} evaluated, best from start {}",
                r.per_start_best.len(),
                r.best_start
            )?;
            writeln!(out, "evaluations = {}", r.evaluations)?;
            writeln!(out, "{}", verdict_text(verdict))
        }
        Format::Csv => {
            writeln!(out, "f,{},evaluations", ARGMAX_COLUMNS.join(","))?;
            let x: Vec<String> = s.to_reals().iter().map(f64::to_string).collect();
            writeln!(out, "{},{},{}", r.f, x.join(","), r.evaluations)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed12_formats() {
        assert_eq!(fixed12(1.0), "1.000000000000");
        assert_eq!(fixed12(0.0), "0.000000000000");
        assert_eq!(fixed12(1.5e-5), "1.50000000000e-5");
    }
}
