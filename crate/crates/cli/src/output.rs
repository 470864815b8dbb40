//! Output directory handling.
//!
//! Every file is written to a temporary name and renamed into place, so a
//! failed run never leaves a truncated file behind. Floats are written in
//! scientific notation with 17 significant digits. Each run writes a
//! manifest named after a hash of its inputs; data files name the manifest
//! in their first line. Wall-clock time and thread count go to `runs.jsonl`
//! only, so that manifests and data files are identical across reruns.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON with 17-digit floats; non-finite floats become `null`.
struct Formatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(format!("{value:.16e}").as_bytes())
        } else {
            w.write_all(b"null")
        }
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

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Formatter(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.partial",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let res = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    schema: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config: &'a serde_json::Value,
    files: &'a [FileEntry],
}

/// Collects the files of one run and finishes with its manifest.
pub struct Run {
    dir: PathBuf,
    subcommand: String,
    seed: Option<u64>,
    config: serde_json::Value,
    manifest: String,
    files: Vec<FileEntry>,
}

impl Run {
    pub fn start<C: Serialize>(dir: &Path, subcommand: &str, seed: Option<u64>, config: &C) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let config = serde_json::to_value(config).map_err(|e| CliError::Io(e.to_string()))?;
        let key = to_json(&(subcommand, env!("CARGO_PKG_VERSION"), seed, &config))?;
        let manifest = format!("manifest-{subcommand}-{}.json", &sha256_hex(&key)[..12]);
        Ok(Run { dir: dir.to_path_buf(), subcommand: subcommand.into(), seed, config, manifest, files: Vec::new() })
    }

    pub fn manifest_name(&self) -> &str {
        &self.manifest
    }

    fn put(&mut self, name: &str, schema: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(FileEntry { name: name.into(), schema: schema.into(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// CSV preceded by a `#` line naming the manifest and the schema.
    pub fn csv(&mut self, name: &str, schema: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut buf = format!("# manifest={} schema={schema}\n", self.manifest).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let err = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(header).map_err(err)?;
            for r in rows {
                w.write_record(r).map_err(err)?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        self.put(name, schema, &buf)
    }

    /// JSON object `{manifest, schema, data}`.
    pub fn json<T: Serialize>(&mut self, name: &str, schema: &str, data: &T) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            manifest: &'a str,
            schema: &'a str,
            data: &'a T,
        }
        let bytes = to_json(&Wrapped { manifest: &self.manifest, schema, data })?;
        self.put(name, schema, &bytes)
    }

    /// Writes the manifest and appends a line to `runs.jsonl`.
    pub fn finish(self, threads: usize, started: std::time::SystemTime) -> Result<PathBuf, CliError> {
        let m = Manifest {
            subcommand: &self.subcommand,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            config: &self.config,
            files: &self.files,
        };
        let path = self.dir.join(&self.manifest);
        write_atomic(&path, &to_json(&m)?)?;
        let wall = started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(f64::NAN);
        let unix = started.duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let line = serde_json::json!({
            "manifest": self.manifest,
            "subcommand": self.subcommand,
            "started_unix": unix,
            "wall_clock_seconds": wall,
            "threads": threads,
        });
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join("runs.jsonl"))
            .map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_full_precision() {
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        let j = String::from_utf8(to_json(&[x, f64::NAN]).unwrap()).unwrap();
        let v: Vec<Option<f64>> = serde_json::from_str(&j).unwrap();
        assert_eq!(v, vec![Some(x), None]);
    }

    #[test]
    fn files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::start(dir.path(), "test", Some(3), &serde_json::json!({"a": 1})).unwrap();
        run.csv("x.csv", "ghmf-x/1", &["a", "b"], &[]).unwrap();
        let name = run.manifest_name().to_string();
        run.finish(1, std::time::SystemTime::now()).unwrap();
        let text = fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, format!("# manifest={name} schema=ghmf-x/1\na,b\n"));
        assert!(dir.path().join(&name).exists());
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert!(names.iter().all(|n| !n.to_string_lossy().ends_with(".partial")));
    }
}
