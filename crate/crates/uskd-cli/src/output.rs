//! CSV traces and the run manifest.
//!
//! All numeric columns are printed with 12 significant digits in scientific
//! notation with a dot separator, independent of locale, so repeated runs with
//! the same spec and seed produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use sha2::{Digest, Sha256};

use uskd_core::experiments::TraceResult;
use uskd_core::protocol::{
    Basis, OutboundClick, Relation, ReturnClick, RoundRecord, SessionStats,
};

use crate::CliError;

/// 12 significant digits, locale-independent.
pub fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

pub struct OutputWriter {
    dir: PathBuf,
    spec_digest: String,
    seed: u64,
    started: String,
    files: Vec<String>,
}

impl OutputWriter {
    pub fn new(dir: &Path, spec_digest: String, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_owned(),
            spec_digest,
            seed,
            started: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            files: Vec::new(),
        })
    }

    pub fn digest_of(text: &str) -> String {
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn write_text(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_owned());
        Ok(())
    }

    pub fn write_trace(&mut self, name: &str, trace: &TraceResult) -> Result<(), CliError> {
        let mut out = String::from("axis_value,mean_IA,mean_IB,std_IA,std_IB\n");
        for i in 0..trace.axis.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt12(trace.axis[i]),
                fmt12(trace.mean_ia[i]),
                fmt12(trace.mean_ib[i]),
                fmt12(trace.std_ia[i]),
                fmt12(trace.std_ib[i]),
            ));
        }
        self.write_text(name, &out)
    }

    pub fn write_rounds(&mut self, name: &str, records: &[RoundRecord]) -> Result<(), CliError> {
        let mut out = String::from(
            "round,bob_basis,alice_basis,outbound_click,return_click,relation,key_bit,\
             zeta1,zeta2,zeta_alpha,zeta_beta,eve_guess\n",
        );
        let basis = |b: Basis| match b {
            Basis::Zero => "0",
            Basis::Pi => "pi",
        };
        for (i, r) in records.iter().enumerate() {
            let outbound = match r.outbound_click {
                OutboundClick::D1 => "D1",
                OutboundClick::D2 => "D2",
                OutboundClick::Inconclusive => "none",
            };
            let ret = match r.return_click {
                ReturnClick::D3 => "D3",
                ReturnClick::D4 => "D4",
                ReturnClick::Inconclusive => "none",
            };
            let relation = match r.relation {
                Relation::Identity => "identity",
                Relation::Inversion => "inversion",
                Relation::Inconclusive => "none",
            };
            let key_bit = match r.key_bit {
                Some(b) => b.to_string(),
                None => "none".into(),
            };
            let eve = match r.eve_guess {
                Some(b) => basis(b),
                None => "none",
            };
            out.push_str(&format!(
                "{i},{},{},{outbound},{ret},{relation},{key_bit},{},{},{},{},{eve}\n",
                basis(r.bob_basis),
                basis(r.alice_basis),
                fmt12(r.noise.zeta1),
                fmt12(r.noise.zeta2),
                fmt12(r.noise.zeta_alpha),
                fmt12(r.noise.zeta_beta),
            ));
        }
        self.write_text(name, &out)
    }

    pub fn write_stats(&mut self, name: &str, stats: &SessionStats) -> Result<(), CliError> {
        let mut out = format!(
            "key_rate={}\nerror_rate={}\ndiscard_rate={}\n",
            fmt12(stats.key_rate),
            fmt12(stats.error_rate),
            fmt12(stats.discard_rate),
        );
        if let Some(rate) = stats.eve_guess_rate {
            out.push_str(&format!("eve_guess_rate={}\n", fmt12(rate)));
        }
        self.write_text(name, &out)
    }

    /// Write the manifest and consume the writer.
    pub fn finish(self) -> Result<(), CliError> {
        let finished = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        let manifest = format!(
            "spec_digest={}\nseed={}\ntool_version={}\nstarted={}\nfinished={}\noutput_files={}\n",
            self.spec_digest,
            self.seed,
            env!("CARGO_PKG_VERSION"),
            self.started,
            finished,
            self.files.join(","),
        );
        let path = self.dir.join("manifest.txt");
        fs::write(&path, manifest)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}
