pub mod ajd;
pub mod fig5;
pub mod fig6;
pub mod fig7;
pub mod generate;
pub mod mean;
pub mod props;

/// Shared metadata comments for generated artifacts: how randomness is
/// derived, so a reader can reproduce the file from the recorded flags.
pub fn rng_metadata(seed: u64) -> Vec<String> {
    vec![
        "rng: ChaCha12, one stream per (role, member), Box-Muller normals".into(),
        format!("seed: {seed}"),
    ]
}
