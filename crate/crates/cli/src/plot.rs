//! gnuplot script emission. Scripts read the CSVs through paths relative to
//! the script directory, so an output tree can be moved as a whole.

use std::path::{Path, PathBuf};

use arpsim::{fit_parabola, RidgePoint};

use crate::args::{read_input, PlotArgs};
use crate::commands::{CONTOUR_HEADER, FAMILY_HEADER, RIDGE_HEADER, TRAJECTORY_HEADER};
use crate::error::CliError;
use crate::output::{ensure_dir, num, write_text};

const PREAMBLE: &str = "set datafile separator \",\"\nset datafile missing \"\"\n";

/// Input file as seen from `out`.
fn relative(input: &Path, out: &Path, flag: &str) -> Result<String, CliError> {
    let input = input
        .canonicalize()
        .map_err(|e| CliError::usage(format!("{flag} {}: {e}", input.display())))?;
    let out = out
        .canonicalize()
        .map_err(|e| CliError::io(format!("--out {}: {e}", out.display())))?;
    let rel: PathBuf = pathdiff::diff_paths(&input, &out).unwrap_or(input);
    Ok(rel.to_string_lossy().replace('\\', "/"))
}

/// Reads a CSV and checks its header.
fn load(path: &Path, flag: &str, header: &[&str]) -> Result<csv::Reader<std::io::Cursor<String>>, CliError> {
    let text = read_input(path, flag)?;
    let mut reader = csv::Reader::from_reader(std::io::Cursor::new(text));
    let found = reader
        .headers()
        .map_err(|e| CliError::usage(format!("{flag}: {e}")))?
        .clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(CliError::usage(format!("{flag}: expected header {}", header.join(","))));
    }
    Ok(reader)
}

fn quote(path: &str) -> String {
    format!("\"{}\"", path.replace('"', "\\\""))
}

pub fn population_script(csv: &str) -> String {
    let f = quote(csv);
    format!(
        "# Level populations against time.\n{PREAMBLE}\
         set terminal pngcairo size 900,600\n\
         set output \"population.png\"\n\
         set xlabel \"t (ms)\"\n\
         set ylabel \"population\"\n\
         set yrange [0:1]\n\
         set key center right\n\
         plot {f} using \"t_ms\":\"rho11\" with lines lw 2 title \"excited, rho11\", \\\n     \
         {f} using \"t_ms\":\"rho22\" with lines lw 2 title \"ground, rho22\"\n"
    )
}

pub fn bloch_script(csv: &str) -> String {
    let f = quote(csv);
    format!(
        "# Bloch-vector trajectory inside the unit sphere.\n{PREAMBLE}\
         set terminal pngcairo size 800,800\n\
         set output \"bloch.png\"\n\
         set view equal xyz\n\
         set xyplane 0\n\
         set xrange [-1:1]\nset yrange [-1:1]\nset zrange [-1:1]\n\
         set xlabel \"mx\"\nset ylabel \"my\"\nset zlabel \"mz\"\n\
         set parametric\n\
         set urange [0:2*pi]\nset vrange [-pi/2:pi/2]\n\
         set isosamples 24,12\n\
         splot cos(u)*cos(v), sin(u)*cos(v), sin(v) with lines lc rgb \"#cccccc\" notitle, \\\n      \
         {f} using \"mx\":\"my\":\"mz\" with lines lw 2 title \"Bloch vector\"\n"
    )
}

pub fn contour_script(csv: &str, ridge: Option<(&str, f64)>) -> String {
    let f = quote(csv);
    let mut s = format!(
        "# Maximum transfer over the (omega1, R) grid.\n{PREAMBLE}\
         set terminal pngcairo size 900,700\n\
         set output \"contour.png\"\n\
         set xlabel \"omega1 (rad/ms)\"\n\
         set ylabel \"R (rad/ms^2)\"\n\
         set cblabel \"maximum transfer\"\n\
         set cbrange [0:1]\n\
         set autoscale fix\n\
         set key top left\n"
    );
    match ridge {
        Some((ridge_csv, k)) => {
            let r = quote(ridge_csv);
            s.push_str(&format!(
                "k = {}\n\
                 plot {f} using \"omega1\":\"rate\":\"p_max\" with image notitle, \\\n     \
                 k*x**2 with lines lw 2 lc rgb \"green\" title sprintf(\"R = %.3f omega1^2\", k), \\\n     \
                 {r} using \"omega1_star\":\"rate\" with points pt 7 lc rgb \"black\" title \"ridge\"\n",
                num(k)
            ));
        }
        None => s.push_str(&format!("plot {f} using \"omega1\":\"rate\":\"p_max\" with image notitle\n")),
    }
    s
}

pub fn family_script(csv: &str, tau_cs: &[String]) -> String {
    let f = quote(csv);
    let mut s = format!(
        "# Maximum transfer against omega1, one curve per tau_c; dashed lines are the model.\n{PREAMBLE}\
         set terminal pngcairo size 900,600\n\
         set output \"family.png\"\n\
         set xlabel \"omega1 (rad/ms)\"\n\
         set ylabel \"maximum transfer\"\n\
         set yrange [0:1]\n\
         set key bottom right\n\
         plot "
    );
    let curves: Vec<String> = tau_cs
        .iter()
        .enumerate()
        .map(|(i, tc)| {
            let sel = format!("(column(\"tau_c\") == {tc} ? column(\"{{}}\") : NaN)");
            let color = i + 1;
            format!(
                "{f} using \"omega1\":{} with lines lw 2 lc {color} title \"tau_c = {tc} ms\", \\\n     \
                 {f} using \"omega1\":{} with lines dt 2 lc {color} notitle",
                sel.replace("{}", "p_sim"),
                sel.replace("{}", "p_model"),
            )
        })
        .collect();
    s.push_str(&curves.join(", \\\n     "));
    s.push('\n');
    s
}

fn ridge_k(path: &Path) -> Result<f64, CliError> {
    let mut reader = load(path, "--ridge", &RIDGE_HEADER)?;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::usage(format!("--ridge: {e}")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("--ridge: bad number '{s}'")))
        };
        points.push(RidgePoint {
            rate: parse(&record[0])?,
            omega1_star: parse(&record[1])?,
        });
    }
    Ok(fit_parabola(&points)?.k)
}

fn tau_c_values(path: &Path) -> Result<Vec<String>, CliError> {
    let mut reader = load(path, "--family", &FAMILY_HEADER)?;
    let mut seen: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::usage(format!("--family: {e}")))?;
        let tc = record[0].trim().to_string();
        tc.parse::<f64>()
            .map_err(|_| CliError::usage(format!("--family: bad tau_c '{tc}'")))?;
        if !seen.contains(&tc) {
            seen.push(tc);
        }
    }
    Ok(seen)
}

pub fn plot(a: &PlotArgs) -> Result<(), CliError> {
    if a.trajectory.is_none() && a.contour.is_none() && a.family.is_none() {
        return Err(CliError::usage("nothing to plot: give --trajectory, --contour or --family"));
    }
    if a.ridge.is_some() && a.contour.is_none() {
        return Err(CliError::usage("--ridge needs --contour"));
    }
    let out = &a.common.out;
    ensure_dir(out)?;
    let mut written = Vec::new();

    if let Some(path) = &a.trajectory {
        load(path, "--trajectory", &TRAJECTORY_HEADER)?;
        let rel = relative(path, out, "--trajectory")?;
        write_text(out, "population.gp", &population_script(&rel))?;
        write_text(out, "bloch.gp", &bloch_script(&rel))?;
        written.extend(["population.gp", "bloch.gp"]);
    }
    if let Some(path) = &a.contour {
        load(path, "--contour", &CONTOUR_HEADER)?;
        let rel = relative(path, out, "--contour")?;
        let ridge = match &a.ridge {
            Some(r) => Some((relative(r, out, "--ridge")?, ridge_k(r)?)),
            None => None,
        };
        let script = contour_script(&rel, ridge.as_ref().map(|(p, k)| (p.as_str(), *k)));
        write_text(out, "contour.gp", &script)?;
        written.push("contour.gp");
    }
    if let Some(path) = &a.family {
        let tau_cs = tau_c_values(path)?;
        let rel = relative(path, out, "--family")?;
        write_text(out, "family.gp", &family_script(&rel, &tau_cs))?;
        written.push("family.gp");
    }
    println!("wrote {}", written.join(", "));
    Ok(())
}
