//! Measurement files shipped with the crate (`crates/core/data/`).

use crate::theory::Measurement;

pub const SINGLE_A_JSON: &str = include_str!("../data/single_a.json");
pub const SINGLE_B_JSON: &str = include_str!("../data/single_b.json");
pub const PREPARATION_P_JSON: &str = include_str!("../data/preparation_p.json");
pub const PREPARATION_P_PRIME_JSON: &str = include_str!("../data/preparation_p_prime.json");
pub const BELL_JSON: &str = include_str!("../data/bell.json");

fn load(json: &str) -> Measurement {
    serde_json::from_str(json).expect("bundled measurement is valid")
}

/// One-particle measurement with outcome sets `{0,1}` and `{2,3}`.
pub fn single_a() -> Measurement {
    load(SINGLE_A_JSON)
}

/// One-particle measurement with outcome sets `{1,2}` and `{3,0}`.
pub fn single_b() -> Measurement {
    load(SINGLE_B_JSON)
}

/// Default cloning-challenge preparation `{0,1} | {2,3}`.
pub fn preparation_p() -> Measurement {
    load(PREPARATION_P_JSON)
}

/// Default cloning-challenge preparation `{0,3} | {1,2}`.
pub fn preparation_p_prime() -> Measurement {
    load(PREPARATION_P_PRIME_JSON)
}

/// The two-particle, four-outcome pair measurement as a data file.
pub fn bell() -> Measurement {
    load(BELL_JSON)
}

/// Every bundled measurement with its file name.
pub fn all() -> Vec<(&'static str, Measurement)> {
    vec![
        ("single_a.json", single_a()),
        ("single_b.json", single_b()),
        ("preparation_p.json", preparation_p()),
        ("preparation_p_prime.json", preparation_p_prime()),
        ("bell.json", bell()),
    ]
}
