//! Plain-text checkpoints of an actor-critic pair.
//!
//! ```text
//! haps-ppo-checkpoint 1
//! config_hash <hex>
//! r_max <f64>
//! actor <activation> <w0,w1,...>
//! <one parameter per line>
//! critic <activation> <w0,w1,...>
//! <one parameter per line>
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle is bit exact.

use super::mlp::{Activation, Mlp};
use super::policy::{action_bounds, ActorCritic};
use crate::error::{Result, SimError};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

pub const MAGIC: &str = "haps-ppo-checkpoint";
pub const VERSION: u32 = 1;

/// SHA-256 (hex) of the TOML rendering of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let text = toml::to_string(value).map_err(|e| SimError::Checkpoint(format!("hashing config: {e}")))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Tanh => "tanh",
        Activation::Softplus => "softplus",
    }
}

fn write_net(out: &mut String, name: &str, net: &Mlp) {
    let sizes: Vec<String> = net.sizes().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{name} {} {}", activation_name(net.activation()), sizes.join(","));
    for p in &net.params {
        let _ = writeln!(out, "{p:?}");
    }
}

pub fn to_string(model: &ActorCritic, hash: &str) -> String {
    let r_max = model.bounds.get(1).map(|b| b.hi).unwrap_or(0.0);
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "config_hash {hash}");
    let _ = writeln!(out, "r_max {r_max:?}");
    write_net(&mut out, "actor", &model.actor);
    write_net(&mut out, "critic", &model.critic);
    out
}

pub fn save(model: &ActorCritic, hash: &str, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(model, hash))?;
    Ok(())
}

fn corrupt(msg: impl Into<String>) -> SimError {
    SimError::Checkpoint(msg.into())
}

fn header<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines.next().ok_or_else(|| corrupt(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| corrupt(format!("expected `{key}`, found `{line}`")))
}

fn read_net<'a>(lines: &mut impl Iterator<Item = &'a str>, name: &str) -> Result<Mlp> {
    let spec = header(lines, name)?;
    let (act, sizes) = spec
        .split_once(' ')
        .ok_or_else(|| corrupt(format!("malformed {name} header")))?;
    let activation = match act {
        "tanh" => Activation::Tanh,
        "softplus" => Activation::Softplus,
        other => return Err(corrupt(format!("unknown activation `{other}`"))),
    };
    let sizes = sizes
        .split(',')
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| corrupt(format!("{name} sizes: {e}")))?;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(corrupt(format!("{name} sizes must list at least two positive widths")));
    }
    let mut net = Mlp::zeros(&sizes, activation);
    for (i, p) in net.params.iter_mut().enumerate() {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(format!("{name}: expected parameter {i}, found end of file")))?;
        *p = line
            .trim()
            .parse()
            .map_err(|e| corrupt(format!("{name} parameter {i}: {e}")))?;
    }
    Ok(net)
}

/// Parses a checkpoint, rejecting unknown versions and any config hash
/// other than `expected_hash` (when given).
pub fn from_str(text: &str, expected_hash: Option<&str>) -> Result<ActorCritic> {
    let mut lines = text.lines();
    let version = header(&mut lines, MAGIC)?;
    if version != VERSION.to_string() {
        return Err(corrupt(format!("unsupported version {version} (expected {VERSION})")));
    }
    let hash = header(&mut lines, "config_hash")?;
    if let Some(expected) = expected_hash {
        if hash != expected {
            return Err(corrupt(format!("config hash {hash} does not match {expected}")));
        }
    }
    let r_max: f64 = header(&mut lines, "r_max")?
        .parse()
        .map_err(|e| corrupt(format!("r_max: {e}")))?;
    let actor = read_net(&mut lines, "actor")?;
    let critic = read_net(&mut lines, "critic")?;
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(corrupt("trailing data after critic parameters"));
    }
    let out = actor.output_dim();
    if out % 4 != 0 || critic.output_dim() != 1 || critic.input_dim() != actor.input_dim() {
        return Err(corrupt("actor and critic shapes are inconsistent"));
    }
    Ok(ActorCritic {
        actor,
        critic,
        bounds: action_bounds(out / 4, r_max),
    })
}

pub fn load(path: &Path, expected_hash: Option<&str>) -> Result<ActorCritic> {
    from_str(&std::fs::read_to_string(path)?, expected_hash)
}
