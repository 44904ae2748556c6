use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use ssmds_core::codec::{plan_repair, repair_with_plan, Encoder, ErasureSolver, HelperTap};
use ssmds_core::codes::{build_from_config, CodeConfig, ConstructedCode, Family};
use ssmds_core::gf::Fe;
use ssmds_core::verify::{self, VerifyError, VerifyReport};
use thiserror::Error;

use crate::bundle::Bundle;
use crate::shard::{shard_path, Shard, ShardError, ShardHeader};
use crate::symbols::SymbolMap;

pub const SEED_ENV: &str = "SSMDS_SEED";

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// A verified property failed; maps to exit code 1.
    PropertyFailure,
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("missing shards {missing:?}: {detail}")]
    MissingShards { missing: Vec<usize>, detail: String },
    #[error("shard for node {0} is present; nothing to repair")]
    NothingToRepair(usize),
    #[error("node {node} is out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("shards disagree on {0}")]
    Inconsistent(&'static str),
}

/// Reads `--config` as inline JSON when it starts with `{`, otherwise as a
/// file path. `SSMDS_SEED` overrides the seed.
pub fn load_config(arg: &str) -> Result<CodeConfig> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading config {arg}"))?
    };
    let mut cfg: CodeConfig = serde_json::from_str(&text).context("parsing config")?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        cfg.seed = Some(seed.trim().parse().with_context(|| format!("{SEED_ENV}={seed} is not an integer"))?);
    }
    Ok(cfg)
}

#[derive(Debug, Serialize)]
pub struct BuildSummary {
    pub spec: serde_json::Value,
    pub k: usize,
    pub sub_packetization: usize,
    pub reports: Vec<VerifyReport>,
}

pub fn build(config: &str, out: &Path) -> Result<(Status, BuildSummary)> {
    let cfg = load_config(config)?;
    let code = build_from_config(&cfg)?;
    let reports = vec![verify::check_assignment(&code), verify::check_repair(&code)];
    Bundle::save(out, &code, &reports)?;
    let status = if verify::all_passed(&reports) { Status::Pass } else { Status::PropertyFailure };
    let summary = BuildSummary {
        spec: serde_json::from_str(&code.spec().canonical_json())?,
        k: code.k(),
        sub_packetization: code.sub_packetization(),
        reports,
    };
    Ok((status, summary))
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeSummary {
    pub input_bytes: u64,
    pub stripes: usize,
    pub symbols_per_shard: usize,
}

pub fn encode(bundle: &Path, input: &Path, out: &Path) -> Result<EncodeSummary> {
    let b = Bundle::load(bundle)?;
    let code = &b.code;
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let map = SymbolMap::new(code.field().order());
    let mut symbols = map.encode(&bytes);
    let (k, big_n) = (code.k(), code.sub_packetization());
    let stripe = k * big_n;
    symbols.resize(symbols.len().div_ceil(stripe) * stripe, Fe::ZERO);
    let stripes = symbols.len() / stripe;

    let encoder = Encoder::new(code)?;
    let mut payloads: Vec<Vec<Fe>> = vec![Vec::with_capacity(stripes * big_n); code.n()];
    for chunk in symbols.chunks_exact(stripe) {
        let data: Vec<Vec<Fe>> = chunk.chunks_exact(big_n).map(<[Fe]>::to_vec).collect();
        let word = encoder.encode(&data)?;
        for (p, col) in payloads.iter_mut().zip(word.columns) {
            p.extend(col);
        }
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (i, payload) in payloads.into_iter().enumerate() {
        let header = ShardHeader::for_node(code.spec(), b.spec_hash, i, payload.len() as u64);
        Shard { header, payload, input_len: bytes.len() as u64 }.write(&shard_path(out, i))?;
    }
    Ok(EncodeSummary { input_bytes: bytes.len() as u64, stripes, symbols_per_shard: stripes * big_n })
}

/// Present shards, read and checked against the bundle.
fn read_present(dir: &Path, b: &Bundle) -> Result<Vec<Option<Shard>>> {
    (0..b.code.n())
        .map(|i| {
            if shard_path(dir, i).exists() {
                Shard::read_checked(dir, i, &b.spec_hash).map(Some).map_err(anyhow::Error::from)
            } else {
                Ok(None)
            }
        })
        .collect()
}

fn common_shape(shards: &[&Shard]) -> Result<(u64, u64)> {
    let first = shards.first().ok_or(CommandError::Inconsistent("shard set"))?;
    let len = first.input_len;
    let syms = first.header.payload_symbols;
    if shards.iter().any(|s| s.input_len != len) {
        return Err(ShardError::LengthMismatch.into());
    }
    if shards.iter().any(|s| s.header.payload_symbols != syms) {
        return Err(CommandError::Inconsistent("payload size").into());
    }
    Ok((len, syms))
}

pub fn decode(bundle: &Path, shards: &Path, out: &Path, chosen: Option<&[usize]>) -> Result<u64> {
    let b = Bundle::load(bundle)?;
    let code = &b.code;
    let (n, k, big_n) = (code.n(), code.k(), code.sub_packetization());
    let present = read_present(shards, &b)?;
    let available: Vec<usize> = (0..n).filter(|&i| present[i].is_some()).collect();
    let mut use_nodes: Vec<usize> = match chosen {
        Some(list) => {
            for &i in list {
                if i >= n {
                    return Err(CommandError::NodeOutOfRange { node: i, n }.into());
                }
            }
            let missing: Vec<usize> = list.iter().copied().filter(|&i| present[i].is_none()).collect();
            if !missing.is_empty() {
                return Err(
                    CommandError::MissingShards { missing, detail: "requested shards are absent".into() }.into()
                );
            }
            list.to_vec()
        }
        None => available.iter().copied().take(k).collect(),
    };
    use_nodes.sort_unstable();
    use_nodes.dedup();
    if use_nodes.len() != k {
        let missing = (0..n).filter(|&i| present[i].is_none()).collect();
        return Err(CommandError::MissingShards {
            missing,
            detail: format!("decoding needs {k} distinct shards, have {}", use_nodes.len()),
        }
        .into());
    }
    let used: Vec<&Shard> = use_nodes.iter().map(|&i| present[i].as_ref().expect("present")).collect();
    let (input_len, payload_symbols) = common_shape(&used)?;
    let stripes = payload_symbols as usize / big_n;

    let erased: Vec<usize> = (0..n).filter(|i| !use_nodes.contains(i)).collect();
    let systematic = erased.iter().all(|&e| e >= k);
    let solver = if systematic { None } else { Some(ErasureSolver::new(code, &erased)?) };
    let mut symbols = Vec::with_capacity(stripes * k * big_n);
    for s in 0..stripes {
        let span = s * big_n..(s + 1) * big_n;
        match &solver {
            None => {
                for shard in &used[..k] {
                    symbols.extend_from_slice(&shard.payload[span.clone()]);
                }
            }
            Some(solver) => {
                let known: Vec<&[Fe]> = used.iter().map(|sh| &sh.payload[span.clone()]).collect();
                let recovered = solver.solve(&known)?;
                for i in 0..k {
                    match use_nodes.iter().position(|&u| u == i) {
                        Some(p) => symbols.extend_from_slice(known[p]),
                        None => {
                            let p = erased.iter().position(|&e| e == i).expect("erased");
                            symbols.extend_from_slice(&recovered[p]);
                        }
                    }
                }
            }
        }
    }
    let bytes = SymbolMap::new(code.field().order()).decode(&symbols, input_len)?;
    fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    Ok(input_len)
}

/// Renames the shard of `node` to `*.killed`.
pub fn kill(shards: &Path, node: usize) -> Result<PathBuf> {
    let path = shard_path(shards, node);
    if !path.exists() {
        bail!(CommandError::MissingShards {
            missing: vec![node],
            detail: format!("{} does not exist", path.display())
        });
    }
    let dead = path.with_extension("shard.killed");
    fs::rename(&path, &dead).with_context(|| format!("renaming {}", path.display()))?;
    Ok(dead)
}

#[derive(Debug, Clone, Serialize)]
pub struct HelperTraffic {
    pub node: usize,
    pub beta: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepairReport {
    pub node: usize,
    pub stripes: usize,
    pub gamma: usize,
    pub gamma_star: usize,
    /// `(n - 1) N`, what a naive repair would download per stripe.
    pub raw_per_stripe: usize,
    pub ratio: String,
    pub downloaded_per_stripe: usize,
    pub downloaded_total: usize,
    pub helpers: Vec<HelperTraffic>,
}

impl RepairReport {
    pub fn summary_line(&self) -> String {
        format!(
            "repaired node {}: downloaded {} of {} raw symbols per stripe (ratio {} of optimal {})",
            self.node, self.downloaded_per_stripe, self.raw_per_stripe, self.ratio, self.gamma_star
        )
    }
}

pub fn repair(bundle: &Path, shards: &Path, node: usize) -> Result<RepairReport> {
    let b = Bundle::load(bundle)?;
    let code: &ConstructedCode = &b.code;
    let (n, big_n) = (code.n(), code.sub_packetization());
    if node >= n {
        return Err(CommandError::NodeOutOfRange { node, n }.into());
    }
    let present = read_present(shards, &b)?;
    if present[node].is_some() {
        return Err(CommandError::NothingToRepair(node).into());
    }
    let missing: Vec<usize> = (0..n).filter(|&i| present[i].is_none()).collect();
    if missing.len() > 1 {
        return Err(CommandError::MissingShards {
            missing,
            detail: "single-node repair needs every other shard".into(),
        }
        .into());
    }
    let helpers: Vec<&Shard> = present.iter().flatten().collect();
    let (input_len, payload_symbols) = common_shape(&helpers)?;
    let stripes = payload_symbols as usize / big_n;

    let plan = plan_repair(code, node)?;
    let betas = plan.betas();
    let per_stripe: usize = betas.iter().map(|(_, beta)| beta).sum();
    let f = code.field();
    let mut payload = Vec::with_capacity(payload_symbols as usize);
    let mut downloaded_total = 0;
    for s in 0..stripes {
        let span = s * big_n..(s + 1) * big_n;
        let taps: Vec<HelperTap> = plan
            .repairs
            .iter()
            .map(|(j, proj)| {
                let column = &present[*j].as_ref().expect("helper present").payload[span.clone()];
                HelperTap::capture(f, *j, proj, column)
            })
            .collect();
        payload.extend(repair_with_plan(code, &plan, &taps)?);
        let read: usize = taps.iter().map(HelperTap::symbols_read).sum();
        if read != per_stripe {
            bail!("stripe {s}: repair read {read} symbols, plan declares {per_stripe}");
        }
        downloaded_total += read;
    }
    let header = ShardHeader::for_node(code.spec(), b.spec_hash, node, payload_symbols);
    Shard { header, payload, input_len }.write(&shard_path(shards, node))?;

    let bw = ssmds_core::codec::bandwidth_formula(code.spec(), node);
    if bw.gamma != plan.gamma {
        bail!("repair plan downloads {} symbols per stripe, closed form gives {}", plan.gamma, bw.gamma);
    }
    Ok(RepairReport {
        node,
        stripes,
        gamma: plan.gamma,
        gamma_star: plan.gamma_star,
        raw_per_stripe: (n - 1) * big_n,
        ratio: bw.ratio.to_string(),
        downloaded_per_stripe: per_stripe,
        downloaded_total,
        helpers: betas.into_iter().map(|(node, beta)| HelperTraffic { node, beta }).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Serialize)]
pub struct Skipped {
    pub property: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub level: Level,
    pub passed: bool,
    pub reports: Vec<VerifyReport>,
    pub skipped: Vec<Skipped>,
}

/// `quick`: assignment, repair and bandwidth. `full` adds the MDS oracle;
/// `extended` further adds the reconstruction oracle, the commuting
/// generator check and the diagonal-block check.
pub fn verify_bundle(bundle: &Path, level: Level, extended: bool) -> Result<VerifyOutput> {
    let b = Bundle::load(bundle)?;
    let code = &b.code;
    let mut reports = vec![verify::check_assignment(code), verify::check_repair(code), verify::audit_bandwidth(code)];
    let mut skipped = Vec::new();
    let mut attempt = |name: &str, r: Result<VerifyReport, VerifyError>, reports: &mut Vec<VerifyReport>| match r {
        Ok(rep) => reports.push(rep),
        Err(e) => skipped.push(Skipped { property: name.into(), reason: e.to_string() }),
    };
    if level == Level::Full {
        attempt("mds", verify::check_mds_auto(code), &mut reports);
        if extended {
            attempt("reconstruction", verify::check_reconstruction(code, 0x5eed), &mut reports);
            let family = code.spec().family;
            if matches!(family, Family::LongC4p | Family::C4) {
                skipped.push(Skipped {
                    property: "lemma1".into(),
                    reason: format!("{family} blocks are not powers of one generator"),
                });
            } else {
                reports.push(verify::check_lemma1(code));
            }
            if matches!(family, Family::Yb1 | Family::C1 | Family::C5 | Family::Custom) {
                reports.push(verify::check_optimal_update(code));
            } else {
                skipped.push(Skipped {
                    property: "optimal_update".into(),
                    reason: format!("{family} does not use diagonal blocks"),
                });
            }
        }
    }
    let passed = verify::all_passed(&reports);
    Ok(VerifyOutput { level, passed, reports, skipped })
}
