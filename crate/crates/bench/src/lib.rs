//! Fixtures shared by the criterion benches.

use tracelab_core::{ChannelSpec, LengthLaw};

/// The channels every bench runs on, with a short label.
pub fn channels() -> Vec<(&'static str, ChannelSpec)> {
    vec![
        ("del0.3", ChannelSpec::deletion(0.3).unwrap()),
        ("gid", ChannelSpec::geo_ins_del(0.5, 0.25).unwrap()),
        ("gib", ChannelSpec::geo_ins_before(0.5, 0.3).unwrap()),
        (
            "dup",
            ChannelSpec::duplication(LengthLaw::Table {
                probs: vec![1.0 / 3.0; 3],
            })
            .unwrap(),
        ),
    ]
}

/// Alternating word of length `n`, starting with `+`.
pub fn alternating(n: usize) -> Vec<i8> {
    (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()
}
