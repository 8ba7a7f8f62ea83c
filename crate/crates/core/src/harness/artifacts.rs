//! Files written under a run's output directory.
//!
//! | file | content |
//! |------|---------|
//! | `samples.jsonl` | one JSON object per sample: index, split, z, k_eff, iterations |
//! | `snapshots_{seen,unseen}.bin` | HFM fluxes as matrix columns |
//! | `singular_values.csv` | POD spectrum and cumulative capture |
//! | `pod_basis.{bin,json}`, `svd_ae_basis.{bin,json}` | retained bases |
//! | `model_{ae,svd_ae}.bin`, `loss_{ae,svd_ae}.csv` | trained networks and loss histories |
//! | `latent_ranges_<method>.csv` | min/max of each reduced variable over the training data |
//! | `errors_<method>.csv` | per-sample signed errors (histogram data) |
//! | `rom_<method>.jsonl` | per-sample ROM iteration diagnostics |
//! | `showcase_<split>_{history,flux}.csv` | convergence histories and flux profiles |
//! | `report.json` | averaged errors per method and split |
//! | `failure.json` | stage and message, only when a run fails |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::core_model::Case;
use crate::error::{Error, Result};
use crate::hfm::CriticalitySolution;
use crate::numerics::{io, DenseMatrix, SvdResult};
use crate::rom_nonlinear::{LatentMap, ReductionKind, ReductionMap};

use super::recipe::{BuiltMethod, ErrorReport, RomRecord};
use super::sampling::{SampleSet, Split};

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Pretty JSON with a trailing newline.
pub fn write_report(path: impl AsRef<Path>, report: &ErrorReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<ErrorReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SampleLine<'a> {
    index: usize,
    split: Split,
    z: &'a [f64],
    k_eff: f64,
    outer_iters: usize,
    converged: bool,
}

pub struct ArtifactWriter {
    dir: PathBuf,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_samples(&self, set: &SampleSet) -> Result<()> {
        write_jsonl(
            &self.path("samples.jsonl"),
            set.samples.iter().map(|s| SampleLine {
                index: s.index,
                split: s.split,
                z: &s.config.z,
                k_eff: s.solution.k_eff,
                outer_iters: s.solution.outer_iters,
                converged: s.solution.converged,
            }),
        )?;
        for split in [Split::Seen, Split::Unseen] {
            if set.count(split) > 0 {
                io::save_matrix(
                    self.path(&format!("snapshots_{}.bin", split.label())),
                    &set.snapshot_matrix(split)?,
                )?;
            }
        }
        Ok(())
    }

    pub fn write_singular_values(&self, svd: &SvdResult) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path("singular_values.csv"))?;
        w.write_record(["mode", "sigma", "cumulative_capture"])?;
        for (k, s) in svd.singular_values.iter().enumerate() {
            w.write_record([(k + 1).to_string(), fmt(*s), fmt(svd.capture_fraction(k + 1))])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Basis, model and loss history of one method, plus its latent ranges
    /// over the training snapshots.
    pub fn write_method(&self, method: &BuiltMethod, snapshots: &DenseMatrix) -> Result<()> {
        let label = method.kind.label();
        match &method.map {
            ReductionMap::Pod(basis) => basis.save(&self.dir, "pod_basis")?,
            ReductionMap::Ae(ae) => {
                ae.save(self.path("model_ae.bin"))?;
                ae.save_loss_history(self.path("loss_ae.csv"))?;
            }
            ReductionMap::SvdAe { basis, ae } => {
                basis.save(&self.dir, "svd_ae_basis")?;
                ae.save(self.path("model_svd_ae.bin"))?;
                ae.save_loss_history(self.path("loss_svd_ae.csv"))?;
            }
        }
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); method.map.latent_dim()];
        for j in 0..snapshots.cols() {
            for (r, v) in ranges.iter_mut().zip(method.map.encode(&snapshots.column(j))?) {
                *r = (r.0.min(v), r.1.max(v));
            }
        }
        let mut w = csv::Writer::from_path(self.path(&format!("latent_ranges_{label}.csv")))?;
        w.write_record(["variable", "min", "max"])?;
        for (k, (lo, hi)) in ranges.iter().enumerate() {
            w.write_record([(k + 1).to_string(), fmt(*lo), fmt(*hi)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_records(&self, kind: ReductionKind, records: &[RomRecord]) -> Result<()> {
        let label = kind.label();
        let mut w = csv::Writer::from_path(self.path(&format!("errors_{label}.csv")))?;
        w.write_record([
            "index",
            "split",
            "e_compression",
            "e_flux",
            "e_keff",
            "k_hfm",
            "k_rom",
            "outer_iters",
            "converged",
        ])?;
        for r in records {
            w.write_record([
                r.index.to_string(),
                r.split.label().to_string(),
                fmt(r.e_compression),
                opt(r.e_flux),
                opt(r.e_keff),
                fmt(r.k_hfm),
                opt(r.k_rom),
                r.outer_iters.to_string(),
                r.converged.to_string(),
            ])?;
        }
        w.flush()?;
        write_jsonl(&self.path(&format!("rom_{label}.jsonl")), records)
    }

    pub fn write_showcase(
        &self,
        case: &Case,
        split: Split,
        hfm: &CriticalitySolution,
        roms: &[(ReductionKind, CriticalitySolution)],
    ) -> Result<()> {
        let label = split.label();
        let mut w = csv::Writer::from_path(self.path(&format!("showcase_{label}_history.csv")))?;
        w.write_record(["model", "outer", "k_eff"])?;
        let all = std::iter::once(("hfm", hfm)).chain(roms.iter().map(|(k, s)| (k.label(), s)));
        for (name, sol) in all {
            for (i, k) in sol.history.iter().enumerate() {
                w.write_record([name.to_string(), (i + 1).to_string(), fmt(*k)])?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(self.path(&format!("showcase_{label}_flux.csv")))?;
        let mut header = vec!["cell".to_string(), "x".into(), "y".into(), "hfm".into()];
        header.extend(roms.iter().map(|(k, _)| k.label().to_string()));
        w.write_record(&header)?;
        for c in 0..hfm.flux.len() {
            let (x, y) = case.geometry.cell_center(c);
            let mut row = vec![c.to_string(), fmt(x), fmt(y), fmt(hfm.flux[c])];
            row.extend(roms.iter().map(|(_, s)| fmt(s.flux[c])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_report(&self, report: &ErrorReport) -> Result<()> {
        write_report(self.path("report.json"), report)
    }

    pub fn write_failure(&self, stage: &str, error: &Error) -> Result<()> {
        let body = serde_json::json!({ "stage": stage, "error": error.to_string() });
        std::fs::write(self.path("failure.json"), serde_json::to_string_pretty(&body)? + "\n")?;
        Ok(())
    }
}
