//! gnuplot scripts for the CSVs written by the other subcommands.

use std::fmt::Write;
use std::path::Path;

use crate::CliError;

struct Csv<'a> {
    command: &'a str,
    columns: Vec<&'a str>,
}

impl<'a> Csv<'a> {
    fn parse(text: &'a str) -> Result<Self, CliError> {
        let mut command = None;
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# command: ") {
                command = Some(rest.trim());
            } else if !line.starts_with('#') {
                let command =
                    command.ok_or_else(|| CliError::MissingInput("CSV has no `# command:` line".into()))?;
                return Ok(Self {
                    command,
                    columns: line.split(',').collect(),
                });
            }
        }
        Err(CliError::MissingInput("CSV has no header row".into()))
    }

    /// 1-based gnuplot column of `name`.
    fn col(&self, name: &str) -> Result<usize, CliError> {
        self.columns
            .iter()
            .position(|c| *c == name)
            .map(|i| i + 1)
            .ok_or_else(|| CliError::MissingInput(format!("column `{name}` not found")))
    }
}

fn curve(csv: &Csv, file: &str, x: &str, y: &str) -> Result<String, CliError> {
    Ok(format!(
        "\"{file}\" using {}:{} with lines title \"{y}\"",
        csv.col(x)?,
        csv.col(y)?
    ))
}

/// Script drawing the named columns of `text`, which was read from `path`.
pub fn script(text: &str, path: &Path) -> Result<String, CliError> {
    let csv = Csv::parse(text)?;
    let file = path.display().to_string();
    let mut s = String::new();
    writeln!(s, "# generated by tubeint {}", env!("CARGO_PKG_VERSION")).unwrap();
    s.push_str("set datafile separator \",\"\nset datafile commentschars \"#\"\nset key autotitle columnhead\n");
    match csv.command {
        "simulate-y" => {
            s.push_str("set xlabel \"tau\"\nset ylabel \"y\"\n");
            writeln!(
                s,
                "plot {} lc rgb \"red\", \\\n     {} lc rgb \"dark-green\"",
                curve(&csv, &file, "tau", "y_numeric")?,
                curve(&csv, &file, "tau", "y_series_o3")?
            )
            .unwrap();
        }
        "invariant-drift" => {
            s.push_str("set xlabel \"t\"\nset ylabel \"drift (%)\"\n");
            writeln!(s, "plot {}", curve(&csv, &file, "t", "drift_pct")?).unwrap();
        }
        "ermakov" => {
            s.push_str("set multiplot layout 2,2\nset xlabel \"t\"\n");
            for y in ["f", "z", "w", "I"] {
                writeln!(s, "set ylabel \"{y}\"\nplot {}", curve(&csv, &file, "t", y)?).unwrap();
            }
            s.push_str("unset multiplot\n");
        }
        "fourier" => {
            s.push_str("set xlabel \"tau\"\nset ylabel \"sin 2tau amplitude\"\n");
            writeln!(
                s,
                "plot \"{file}\" using {}:{} with points pt 7 title \"s2_secular\"",
                csv.col("tau_center")?,
                csv.col("s2_secular")?
            )
            .unwrap();
        }
        "tube" => {
            s.push_str("set xlabel \"z\"\nset ylabel \"p\"\nset zlabel \"t\"\n");
            writeln!(
                s,
                "splot \"{file}\" using {}:{}:{} with lines title \"filaments\"",
                csv.col("z")?,
                csv.col("p")?,
                csv.col("t")?
            )
            .unwrap();
        }
        other => return Err(CliError::MissingInput(format!("no plot layout for `{other}` output"))),
    }
    s.push_str("pause -1\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_overlay() {
        let text = "# command: simulate-y\ntau,y_numeric,y_series_o1,y_series_o2,y_series_o3\n0.0,1.0,1.0,1.0,1.0\n";
        let s = script(text, Path::new("run.csv")).unwrap();
        assert!(s.contains("\"run.csv\" using 1:2 with lines title \"y_numeric\""));
        assert!(s.contains("using 1:5 with lines title \"y_series_o3\""));
    }

    #[test]
    fn ermakov_has_four_panels() {
        let text = "# command: ermakov\nt,f,z,p,w,I,drift_pct\n";
        let s = script(text, Path::new("e.csv")).unwrap();
        assert_eq!(s.matches("\nplot ").count(), 4);
        assert!(s.contains("layout 2,2"));
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(script("a,b\n1,2\n", Path::new("x.csv")).is_err());
        assert!(script("# command: simulate-y\nt,x\n", Path::new("x.csv")).is_err());
    }
}
