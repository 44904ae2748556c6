//! Sharding, repair and verification commands behind the `ssmds` binary.

pub mod bundle;
pub mod commands;
pub mod shard;
pub mod symbols;
