//! Layout of a fit directory.
//!
//! ```text
//! manifest.json        config echo, seed, versions, parameter layout
//! chains.json          per-chain sampler records
//! diagnostics.json     convergence summary
//! draws/<block>.csv    iteration,chain,parameter,value
//! ```

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{PtmError, Result};
use crate::mcmc::init::AscentReport;
use crate::mcmc::ChainOutput;
use crate::model::ParamLayout;

pub const MANIFEST: &str = "manifest.json";
pub const CHAINS: &str = "chains.json";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const DRAWS_DIR: &str = "draws";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub chains: usize,
    pub config: RunConfig,
    pub layout: ParamLayout,
    pub init: [AscentReport; 2],
    /// Draw files relative to the fit directory, one per block.
    pub draw_files: Vec<String>,
}

impl Manifest {
    pub fn new(config: RunConfig, layout: ParamLayout, init: [AscentReport; 2]) -> Self {
        let draw_files = layout
            .blocks
            .iter()
            .map(|b| draw_file_name(&b.name))
            .collect();
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.mcmc.seed,
            chains: config.mcmc.chains,
            config,
            layout,
            init,
            draw_files,
        }
    }
}

fn draw_file_name(block: &str) -> String {
    let clean: String = block
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{DRAWS_DIR}/{clean}.csv")
}

fn missing(path: &Path, e: impl std::fmt::Display) -> PtmError {
    PtmError::data(
        None,
        format!("missing or unreadable fit artifact {}: {e}", path.display()),
    )
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| missing(path, e))?;
    serde_json::from_str(&text).map_err(|e| missing(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Sampler iteration of retained draw `k`, counted after warmup.
fn iteration_of(k: usize, thin: usize) -> usize {
    (k + 1) * thin
}

/// Write every artifact except diagnostics.
pub fn write_fit(dir: &Path, manifest: &Manifest, chains: &[ChainOutput]) -> Result<()> {
    std::fs::create_dir_all(dir.join(DRAWS_DIR))?;
    let thin = manifest.config.mcmc.thin;
    for (block, file) in manifest.layout.blocks.iter().zip(&manifest.draw_files) {
        let mut w = csv::Writer::from_path(dir.join(file))?;
        w.write_record(["iteration", "chain", "parameter", "value"])?;
        for c in chains {
            for k in 0..c.n_draws() {
                let it = iteration_of(k, thin).to_string();
                let ch = c.chain.to_string();
                for p in block.start..block.start + block.len {
                    w.write_record([
                        it.as_str(),
                        ch.as_str(),
                        c.names[p].as_str(),
                        &c.draws[p][k].to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    let records: Vec<ChainOutput> = chains
        .iter()
        .map(|c| ChainOutput {
            draws: Vec::new(),
            ..c.clone()
        })
        .collect();
    write_json(&dir.join(CHAINS), &records)?;
    write_json(&dir.join(MANIFEST), manifest)
}

/// A fit read back from disk.
pub struct FitDir {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub chains: Vec<ChainOutput>,
}

impl FitDir {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
        let mut chains: Vec<ChainOutput> = read_json(&dir.join(CHAINS))?;
        let layout = &manifest.layout;
        let n_keep = manifest.config.mcmc.n_retained();
        let thin = manifest.config.mcmc.thin;
        let index: HashMap<&str, usize> = layout
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let slot: HashMap<usize, usize> = chains
            .iter()
            .enumerate()
            .map(|(s, c)| (c.chain, s))
            .collect();
        for c in &mut chains {
            c.names = layout.names.clone();
            c.draws = vec![vec![f64::NAN; n_keep]; layout.len()];
        }
        for file in &manifest.draw_files {
            let path = dir.join(file);
            let mut rdr = csv::Reader::from_path(&path).map_err(|e| missing(&path, e))?;
            for rec in rdr.records() {
                let rec = rec.map_err(|e| missing(&path, e))?;
                let line = rec.position().map(|p| p.line());
                let bad =
                    |what: &str| PtmError::data(line, format!("{}: bad {what}", path.display()));
                let it: usize = rec
                    .get(0)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("iteration"))?;
                let ch: usize = rec
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("chain"))?;
                let p = rec
                    .get(2)
                    .and_then(|s| index.get(s))
                    .copied()
                    .ok_or_else(|| bad("parameter"))?;
                let v: f64 = rec
                    .get(3)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("value"))?;
                let s = slot.get(&ch).copied().ok_or_else(|| bad("chain"))?;
                if it == 0 || it % thin != 0 || it / thin > n_keep {
                    return Err(bad("iteration"));
                }
                chains[s].draws[p][it / thin - 1] = v;
            }
        }
        for c in &chains {
            if let Some(p) = c.draws.iter().position(|d| d.iter().any(|v| v.is_nan())) {
                return Err(PtmError::data(
                    None,
                    format!(
                        "incomplete draws for '{}' in chain {} of {}",
                        layout.names[p],
                        c.chain,
                        dir.display()
                    ),
                ));
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            chains,
        })
    }
}
