pub mod benchmark;
pub mod distribution;
pub mod optimize;
pub mod solve;

// Seed salts so each command draws from its own deterministic stream family.
pub(crate) const SALT_OPTIMIZE_COST: u64 = 0x4f50_5431;
pub(crate) const SALT_OPTIMIZE_SEARCH: u64 = 0x4f50_5432;
pub(crate) const SALT_GENES: u64 = 0x4745_4e45;
pub(crate) const SALT_CAMPAIGN: u64 = 0x4341_4d50;
pub(crate) const SALT_UNIFORM_ARM: u64 = 0x554e_4946;
