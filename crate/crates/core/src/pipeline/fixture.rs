//! Synthetic dataset with the shape of the real inputs and a known levels
//! relationship between the index and the controls.
//!
//! A latent food-security factor satisfies
//! `F_t = theta'z_t + gamma TOTAL_t + u_t` with `z` the I(1) controls and
//! `u` a mean-reverting AR(1), so every default model is cointegrated and
//! its error-correction coefficient is close to `rho_u - 1`. A negative
//! `rho_u` keeps the bounds test informative with eight regressors on 32
//! observations.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};

use super::config::{PipelineConfig, DEFAULT_CONTROLS};
use crate::error::{Error, Result};
use crate::index::{write_disaster_events, DisasterEvent, DisasterType, DEFAULT_INDICATORS};
use crate::sim::{ar1, replication_rng};
use crate::stats::{mean, sample_sd};
use crate::timeseries::{Frame, Series};

pub const FIXTURE_START: i32 = 1990;
pub const FIXTURE_LEN: usize = 33;
pub const FIXTURE_SEED: u64 = 2024;
/// AR(1) coefficient of the equilibrium error.
pub const FIXTURE_RHO: f64 = -0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub indicators: Frame,
    pub macro_data: Frame,
    pub events: Vec<DisasterEvent>,
}

/// `(level, step sd, drift)` random walk.
fn walk<R: Rng>(rng: &mut R, level: f64, sd: f64, drift: f64) -> Vec<f64> {
    let mut v = level;
    (0..FIXTURE_LEN)
        .map(|_| {
            v += drift + sd * rng.sample::<f64, _>(StandardNormal);
            v
        })
        .collect()
}

fn zscore(x: &[f64]) -> Vec<f64> {
    let (m, s) = (mean(x), sample_sd(x));
    x.iter().map(|v| (v - m) / s).collect()
}

/// Per-type yearly event probability and expected damage share of GDP.
const EVENT_PROFILE: [(DisasterType, f64, f64); 4] = [
    (DisasterType::Quake, 0.35, -7.0),
    (DisasterType::Storm, 0.8, -6.5),
    (DisasterType::Flood, 0.8, -6.0),
    (DisasterType::Other, 0.4, -8.0),
];

pub fn generate_fixture(seed: u64) -> Result<Fixture> {
    let mut rng = replication_rng(seed, 0);
    let n = FIXTURE_LEN;

    let gdp = walk(&mut rng, 5200.0, 150.0, 270.0);
    let controls: [Vec<f64>; 7] = [
        gdp.clone(),
        walk(&mut rng, 45.0, 2.0, 0.2),
        walk(&mut rng, 14.0, 0.4, 0.05),
        ar1(&mut rng, n, 0.5).iter().map(|v| -2.0 + 1.5 * v).collect(),
        walk(&mut rng, 24.0, 1.0, 0.0),
        walk(&mut rng, 11.0, 0.3, -0.12),
        walk(&mut rng, 42.0, 0.08, -0.06),
    ];
    let pop: Vec<f64> = (0..n)
        .map(|t| 55.0e6 * 1.012f64.powi(t as i32) * (1.0 + 0.002 * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let gdp_usd: Vec<f64> = gdp.iter().zip(&pop).map(|(g, p)| g * p).collect();

    let mut events = Vec::new();
    let mut total_damage = vec![0.0; n];
    for t in 0..n {
        for (kind, prob, log_share) in EVENT_PROFILE {
            let count = (0..3).filter(|_| rng.random::<f64>() < prob / 2.0).count();
            for _ in 0..count {
                let share = LogNormal::new(log_share, 1.0).expect("valid").sample(&mut rng);
                let damage_usd = (share * gdp_usd[t]).round();
                let affected = (pop[t] * share * 5.0).round();
                let deaths = (affected * 1e-4 * rng.random::<f64>()).round();
                total_damage[t] += damage_usd / gdp_usd[t];
                events.push(DisasterEvent {
                    year: FIXTURE_START + t as i32,
                    kind,
                    affected,
                    deaths,
                    damage_usd,
                });
            }
        }
    }

    // Equilibrium on standardised controls so no single scale dominates.
    let theta = [0.9, 0.4, -0.3, 0.15, 0.35, -0.5, 0.45];
    let gamma = -0.2;
    let z: Vec<Vec<f64>> = controls.iter().map(|c| zscore(c)).collect();
    let total_z = zscore(&total_damage);
    let u = ar1(&mut rng, n, FIXTURE_RHO);
    let latent: Vec<f64> = (0..n)
        .map(|t| {
            let lr: f64 = theta.iter().zip(&z).map(|(th, zj)| th * zj[t]).sum();
            lr + gamma * total_z[t] + 0.25 * u[t]
        })
        .collect();
    let latent = zscore(&latent);

    // (level, scale, sign) per indicator; negative signs fall as security rises.
    let shape: [(f64, f64, f64); 8] = [
        (72.0, 9.0, 1.0),
        (18.0, 2.5, -1.0),
        (2600.0, 350.0, 1.0),
        (38.0, 4.0, -1.0),
        (85.0, 11.0, 1.0),
        (88.0, 9.0, 1.0),
        (58.0, 4.0, -1.0),
        (1.1, 0.4, -1.0),
    ];
    let noise = Normal::new(0.0, 0.05).expect("valid");
    let indicator_cols = DEFAULT_INDICATORS
        .iter()
        .zip(shape)
        .map(|(name, (level, scale, sign))| {
            let v = latent
                .iter()
                .map(|f| level + scale * (sign * f + noise.sample(&mut rng)))
                .collect();
            Series::new(*name, FIXTURE_START, v)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut macro_cols = DEFAULT_CONTROLS
        .iter()
        .zip(controls)
        .map(|(name, v)| Series::new(*name, FIXTURE_START, v))
        .collect::<Result<Vec<_>>>()?;
    macro_cols.push(Series::new(
        "POP",
        FIXTURE_START,
        pop.iter().map(|p| p.round()).collect(),
    )?);
    macro_cols.push(Series::new("GDP_USD", FIXTURE_START, gdp_usd)?);

    Ok(Fixture {
        indicators: Frame::new(indicator_cols)?,
        macro_data: Frame::new(macro_cols)?,
        events,
    })
}

pub const FIXTURE_INDICATORS: &str = "indicators.csv";
pub const FIXTURE_MACRO: &str = "macro.csv";
pub const FIXTURE_EVENTS: &str = "events.csv";
pub const FIXTURE_CONFIG: &str = "config.toml";

/// Configuration matching the files written by [`Fixture::write`], with
/// paths relative to the fixture directory.
pub fn fixture_config(seed: u64) -> PipelineConfig {
    let text = format!(
        "[data]\nindicators = \"{FIXTURE_INDICATORS}\"\nmacro = \"{FIXTURE_MACRO}\"\nevents = \"{FIXTURE_EVENTS}\"\n"
    );
    let mut c = PipelineConfig::from_toml_str(&text, Path::new("")).expect("static config parses");
    // Short annual samples: cap the augmentation and regressor lags.
    c.unit_root.options.max_lag = Some(3);
    c.lags.q_max = 1;
    c.output.seed = seed;
    c
}

impl Fixture {
    /// Writes the three CSVs and `config.toml` into `dir`.
    pub fn write(&self, dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::OutputDirNotWritable {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        })?;
        let files = [
            (FIXTURE_INDICATORS, self.indicators.to_csv_string("year")),
            (FIXTURE_MACRO, self.macro_data.to_csv_string("year")),
            (FIXTURE_EVENTS, write_disaster_events(&self.events)),
            (FIXTURE_CONFIG, fixture_config(seed).to_toml_string()),
        ];
        files
            .into_iter()
            .map(|(name, body)| {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(path)
            })
            .collect()
    }
}
