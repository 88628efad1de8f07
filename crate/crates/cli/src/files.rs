//! Reading and writing the files named on the command line.

use std::path::Path;

use obsent_core::io::{CoarseGrainingFile, Measurement, StateFile};
use obsent_core::series::TimeSeries;
use obsent_core::{DensityMatrix, Tolerances};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Parses JSON, or TOML when the extension is `.toml`; unknown keys are
/// rejected by the target types.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text).map_err(|e| CliError::schema(path, e))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::schema(path, e))
    }
}

pub fn load_state(path: &Path, tol: &Tolerances) -> CliResult<DensityMatrix> {
    Ok(read_config::<StateFile>(path)?.build(tol)?)
}

pub fn load_measurement(path: &Path, tol: &Tolerances) -> CliResult<Measurement> {
    Ok(read_config::<CoarseGrainingFile>(path)?.build(tol)?)
}

/// Pretty JSON on stdout and, if requested, in a file.
pub fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    print_stdout(&text)?;
    if let Some(path) = out {
        write_text(path, &(text + "\n"))?;
    }
    Ok(())
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
pub fn print_stdout(text: &str) -> CliResult<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Runtime(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

pub fn write_series(ts: &TimeSeries, csv: &Path, svg: Option<&Path>, title: &str) -> CliResult<()> {
    write_text(csv, &ts.to_csv())?;
    if let Some(svg) = svg {
        write_text(svg, &ts.to_svg(title))?;
    }
    Ok(())
}
