//! Sample archives: per-chain CSV records, optional snapshots and a manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::runner::run_chains;
use crate::clusters::one_arm_event;
use crate::error::{invalid, CritError, Result};
use crate::estimators::diagonal_pair;
use crate::field::{field_from_spins, magnetization, sobolev_norm_sq, RenormScheme, SobolevCoeffs};
use crate::lattice::{build_lattice, LatticeSpec};
use crate::sampler::{color_from_spins, BondConfig, ColoredBonds, Sample, SpinConfig};

pub const ARCHIVE_VERSION: &str = "crit-archive/1";
pub const MANIFEST: &str = "manifest.json";

/// Scalars recorded for every retained sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub chain: usize,
    pub sample: usize,
    pub n_side: usize,
    pub spin_sum: i64,
    pub magnetization: f64,
    /// Mean spin over the central site(s).
    pub center_spin: f64,
    /// Fraction of central sites connected to the ghost.
    pub center_ghost: f64,
    /// Fraction of central sites whose cluster reaches the domain boundary.
    pub center_one_arm: f64,
    pub pair_separation: usize,
    pub pair_product: i8,
    pub pair_connected: u8,
    pub sobolev: Option<f64>,
}

/// Computes [`SampleRecord`]s for one grid.
#[derive(Debug, Clone)]
pub struct Recorder {
    scheme: RenormScheme,
    center: Vec<usize>,
    pair: (usize, usize),
    separation: usize,
    sobolev: Option<(f64, usize)>,
}

impl Recorder {
    pub fn new(spec: &LatticeSpec, scheme: RenormScheme, sobolev: Option<(f64, usize)>) -> Result<Self> {
        let separation = spec.n_side() / 4;
        Ok(Recorder {
            scheme,
            center: spec.center_sites(),
            pair: diagonal_pair(spec.n_side(), separation)?,
            separation,
            sobolev,
        })
    }

    pub fn record(&self, spec: &LatticeSpec, chain: usize, s: &Sample<'_>) -> Result<SampleRecord> {
        let labels = s.colored.labels();
        let k = self.center.len() as f64;
        let frac = |f: &dyn Fn(usize) -> bool| self.center.iter().filter(|&&v| f(v)).count() as f64 / k;
        let (u, v) = self.pair;
        let sobolev = match self.sobolev {
            Some((alpha, j_max)) => {
                let field = field_from_spins(spec, s.spins, &self.scheme)?;
                Some(sobolev_norm_sq(&SobolevCoeffs::compute(&field, j_max)?, alpha)?.value)
            }
            None => None,
        };
        Ok(SampleRecord {
            chain,
            sample: s.index,
            n_side: spec.n_side(),
            spin_sum: s.spins.spin_sum(),
            magnetization: magnetization(spec, s.spins, &self.scheme)?,
            center_spin: self.center.iter().map(|&c| s.spins.get(c) as f64).sum::<f64>() / k,
            center_ghost: frac(&|c| spec.has_ghost() && labels.connected(c, spec.ghost())),
            center_one_arm: frac(&|c| one_arm_event(spec, labels, spec.site(c))),
            pair_separation: self.separation,
            pair_product: s.spins.get(u) * s.spins.get(v),
            pair_connected: labels.connected(u, v) as u8,
            sobolev,
        })
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

const RECORD_HEADER: [&str; 12] = [
    "chain",
    "sample",
    "n_side",
    "spin_sum",
    "magnetization",
    "center_spin",
    "center_ghost",
    "center_one_arm",
    "pair_separation",
    "pair_product",
    "pair_connected",
    "sobolev",
];

pub fn write_records<W: Write>(records: &[SampleRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.chain.to_string(),
            r.sample.to_string(),
            r.n_side.to_string(),
            r.spin_sum.to_string(),
            fmt_f64(r.magnetization),
            fmt_f64(r.center_spin),
            fmt_f64(r.center_ghost),
            fmt_f64(r.center_one_arm),
            r.pair_separation.to_string(),
            r.pair_product.to_string(),
            r.pair_connected.to_string(),
            r.sobolev.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<SampleRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|rec| rec.map_err(CritError::from)).collect()
}

/// One retained configuration: spins as `+`/`-`, bonds as `0`/`1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub chain: usize,
    pub sample: usize,
    pub n_side: usize,
    pub spins: String,
    pub bonds: String,
}

impl Snapshot {
    pub fn capture(spec: &LatticeSpec, chain: usize, s: &Sample<'_>) -> Self {
        Snapshot {
            chain,
            sample: s.index,
            n_side: spec.n_side(),
            spins: s.spins.spins().iter().map(|&x| if x > 0 { '+' } else { '-' }).collect(),
            bonds: s.colored.bond().open().iter().map(|&o| if o { '1' } else { '0' }).collect(),
        }
    }

    /// Rebuilds the spins and the coupled coloured bonds.
    pub fn restore(&self, spec: &LatticeSpec) -> Result<(SpinConfig, ColoredBonds)> {
        if self.n_side != spec.n_side() {
            return invalid("snapshot grid does not match the lattice");
        }
        let spins: Vec<i8> = self
            .spins
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => invalid(format!("bad spin character {c:?}")),
            })
            .collect::<Result<_>>()?;
        let spins = SpinConfig::from_spins(spec, spins)?;
        let open: Vec<bool> = self.bonds.chars().map(|c| c == '1').collect();
        if open.len() != spec.edge_count() {
            return invalid("snapshot bond count does not match the lattice");
        }
        for (e, &o) in open.iter().enumerate() {
            let (a, b) = spec.edge_endpoints(e);
            if o && spins.vertex(a) != spins.vertex(b) {
                return invalid("snapshot has an open bond between unequal spins");
            }
        }
        let p = crate::sampler::critical_constants().1;
        let colored = color_from_spins(spec, BondConfig::from_open(open, p), &spins);
        Ok((spins, colored))
    }
}

pub fn read_snapshots(path: &Path) -> Result<Vec<Snapshot>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|rec| rec.map_err(CritError::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    /// `samples` or `snapshots`.
    pub kind: String,
    pub n_side: usize,
    pub chain: usize,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub archive_version: String,
    pub experiment: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    /// Seconds since the epoch; not part of any data digest.
    pub created_unix: u64,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST))?)?)
    }

    /// Records of every sample file, grouped by side in manifest order
    /// (chain-major within a side).
    pub fn records(&self, dir: &Path) -> Result<Vec<(usize, Vec<SampleRecord>)>> {
        let mut out: Vec<(usize, Vec<SampleRecord>)> = Vec::new();
        for f in self.files.iter().filter(|f| f.kind == "samples") {
            let recs = read_records(&dir.join(&f.name))?;
            match out.iter_mut().find(|(n, _)| *n == f.n_side) {
                Some((_, v)) => v.extend(recs),
                None => out.push((f.n_side, recs)),
            }
        }
        Ok(out)
    }

    pub fn snapshots(&self, dir: &Path) -> Result<Vec<(usize, Vec<Snapshot>)>> {
        let mut out: Vec<(usize, Vec<Snapshot>)> = Vec::new();
        for f in self.files.iter().filter(|f| f.kind == "snapshots") {
            let snaps = read_snapshots(&dir.join(&f.name))?;
            match out.iter_mut().find(|(n, _)| *n == f.n_side) {
                Some((_, v)) => v.extend(snaps),
                None => out.push((f.n_side, snaps)),
            }
        }
        Ok(out)
    }
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(format!("{:x}", Sha256::digest(std::fs::read(path)?)))
}

/// Runs every side of `cfg` and writes the archive into `dir`.
pub fn write_archive(cfg: &RunConfig, dir: &Path, pool: &rayon::ThreadPool) -> Result<Manifest> {
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (si, &n) in cfg.sides.iter().enumerate() {
        let spec = build_lattice(n, cfg.boundary)?;
        let sobolev = cfg.sobolev_alpha.map(|a| (a, cfg.sobolev_j_max.unwrap_or_else(|| crate::field::default_j_max(n))));
        let recorder = Recorder::new(&spec, cfg.renorm, sobolev)?;
        let jobs: Vec<_> = (0..cfg.chains)
            .map(|c| (cfg.sampler.to_config(cfg.seed(), cfg.stream(si, c)), cfg.chain_samples(c)))
            .collect();
        // chain ids are filled in from the job order afterwards
        let chains = run_chains(pool, &spec, &jobs, |s| {
            Ok((recorder.record(&spec, 0, s)?, cfg.snapshots.then(|| Snapshot::capture(&spec, 0, s))))
        })?;
        for (c, rows) in chains.into_iter().enumerate() {
            let (mut recs, mut snaps): (Vec<SampleRecord>, Vec<Snapshot>) = (Vec::new(), Vec::new());
            for (mut r, s) in rows {
                r.chain = c;
                recs.push(r);
                if let Some(mut s) = s {
                    s.chain = c;
                    snaps.push(s);
                }
            }
            let name = format!("samples_n{n}_chain{c}.csv");
            let path = dir.join(&name);
            write_records(&recs, BufWriter::new(File::create(&path)?))?;
            files.push(FileEntry { name, kind: "samples".into(), n_side: n, chain: c, rows: recs.len(), sha256: sha256_file(&path)? });
            if cfg.snapshots {
                let name = format!("snapshots_n{n}_chain{c}.csv");
                let path = dir.join(&name);
                let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
                for s in &snaps {
                    w.serialize(s)?;
                }
                w.flush()?;
                drop(w);
                files.push(FileEntry {
                    name,
                    kind: "snapshots".into(),
                    n_side: n,
                    chain: c,
                    rows: snaps.len(),
                    sha256: sha256_file(&path)?,
                });
            }
        }
    }
    let manifest = Manifest {
        archive_version: ARCHIVE_VERSION.into(),
        experiment: cfg.experiment.clone(),
        version: version_string(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        files,
    };
    std::fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Default archive directory for a config without an explicit one.
pub fn default_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("crit-out").join(&cfg.experiment))
}
