//! Artifact writing: JSON with 17 significant digits, CSV files and the
//! run-metadata sidecar.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};
use symavg_core::Result;

/// Pretty printer that writes every float as `{:.16e}`.
struct SigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serializer emits utf-8"))
}

/// Files produced by one subcommand.
pub struct Artifacts {
    dir: PathBuf,
    command: &'static str,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &'static str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            command,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json_string(value)?;
        self.write(name, &text)
    }

    /// Writes `<command>.json` and the `<command>.meta.json` sidecar.
    pub fn finish(mut self, result: &Value, config: Value, seed: u64) -> Result<()> {
        let main = format!("{}.json", self.command);
        self.write_json(&main, result)?;
        let meta = json!({
            "tool": "symavg",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.command,
            "seed": seed,
            "config": config,
            "tolerances": tolerances(),
            "outputs": self.written,
        });
        let text = to_json_string(&meta)?;
        std::fs::write(self.dir.join(format!("{}.meta.json", self.command)), text)?;
        Ok(())
    }
}

pub fn tolerances() -> Value {
    use symavg_core::{averaging, fourier, representation as rep, separation};
    json!({
        "homomorphism": rep::HOMOMORPHISM_TOL,
        "integer": rep::INTEGER_TOL,
        "root_snap": rep::SNAP_TOL,
        "weight_sum": averaging::SUM_TOL,
        "weight_drop": averaging::WEIGHT_TOL,
        "support": fourier::SUPPORT_TOL,
        "rank": separation::RANK_TOL,
    })
}
