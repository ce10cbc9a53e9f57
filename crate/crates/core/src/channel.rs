//! Seeded downlink channel: log-distance path loss, i.i.d. per-RB Rayleigh
//! block fading held for one frame, and Shannon-capacity rates.

use crate::model::{RateMatrix, SUBFRAME_SECONDS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const UE_HEIGHT_M: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Resource blocks per subframe.
    pub rbs: usize,
    pub rb_bandwidth_hz: f64,
    pub carrier_hz: f64,
    /// Total transmit power, spread evenly over `power_split_rbs` RBs.
    pub tx_power_dbm: f64,
    pub power_split_rbs: usize,
    pub tower_height_m: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub subscribers: usize,
    pub path_loss_exponent: f64,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            rbs: 15,
            rb_bandwidth_hz: 180e3,
            carrier_hz: 6e9,
            tx_power_dbm: 42.0,
            power_split_rbs: 15,
            tower_height_m: 25.0,
            cell_radius_m: 250.0,
            min_distance_m: 10.0,
            subscribers: 24,
            path_loss_exponent: 3.7,
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("rb_bandwidth_hz", self.rb_bandwidth_hz),
            ("carrier_hz", self.carrier_hz),
            ("tower_height_m", self.tower_height_m),
            ("cell_radius_m", self.cell_radius_m),
            ("min_distance_m", self.min_distance_m),
            ("path_loss_exponent", self.path_loss_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("channel.{name} must be positive, got {v}"));
            }
        }
        if self.rbs == 0 || self.subscribers == 0 || self.power_split_rbs == 0 {
            return Err("channel.rbs, channel.subscribers and channel.power_split_rbs must be at least 1".into());
        }
        if self.min_distance_m >= self.cell_radius_m {
            return Err("channel.min_distance_m must be below channel.cell_radius_m".into());
        }
        Ok(())
    }

    /// Free-space loss at 1 m, the intercept of the log-distance model.
    pub fn reference_loss_db(&self) -> f64 {
        20.0 * (4.0 * std::f64::consts::PI * self.carrier_hz / SPEED_OF_LIGHT).log10()
    }

    pub fn path_loss_db(&self, ground_distance_m: f64) -> f64 {
        let dh = self.tower_height_m - UE_HEIGHT_M;
        let d3 = (ground_distance_m * ground_distance_m + dh * dh).sqrt();
        self.reference_loss_db() + 10.0 * self.path_loss_exponent * d3.log10()
    }

    pub fn noise_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * self.rb_bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn per_rb_power_dbm(&self) -> f64 {
        self.tx_power_dbm - 10.0 * (self.power_split_rbs as f64).log10()
    }

    /// Mean SNR (linear) before fading at the given ground distance.
    pub fn mean_snr(&self, ground_distance_m: f64) -> f64 {
        let db = self.per_rb_power_dbm() - self.path_loss_db(ground_distance_m) - self.noise_dbm();
        10f64.powf(db / 10.0)
    }
}

/// Drops `subscribers` users at distances uniform in `(min_distance, radius]`.
pub fn place_subscribers(cfg: &ChannelConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.subscribers)
        .map(|_| {
            // (0, 1] so the lower end is excluded
            let u = 1.0 - rng.random::<f64>();
            cfg.min_distance_m + u * (cfg.cell_radius_m - cfg.min_distance_m)
        })
        .collect()
}

/// Rate matrix for one frame. A pure function of the configuration seed, the
/// distances, and the frame index.
pub fn draw_rates(cfg: &ChannelConfig, distances: &[f64], frame_index: u64) -> RateMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // stream 0 is reserved for placement
    rng.set_stream(frame_index + 1);
    let mut rates = Vec::with_capacity(distances.len() * cfg.rbs);
    for &d in distances {
        let snr = cfg.mean_snr(d);
        for _ in 0..cfg.rbs {
            let fade: f64 = rng.sample(Exp1);
            let bits = cfg.rb_bandwidth_hz * (1.0 + snr * fade).log2() * SUBFRAME_SECONDS;
            rates.push(bits.max(0.0));
        }
    }
    RateMatrix::new(distances.len(), cfg.rbs, rates).expect("dimensions agree by construction")
}

/// Source of per-frame rate matrices for the simulator.
pub trait RateSource {
    fn subscribers(&self) -> usize;
    fn rbs(&self) -> usize;
    fn frame_rates(&self, frame_index: u64) -> RateMatrix;
}

/// The stochastic channel with subscribers already placed.
#[derive(Debug, Clone)]
pub struct FadingChannel {
    cfg: ChannelConfig,
    distances: Vec<f64>,
}

impl FadingChannel {
    pub fn new(cfg: ChannelConfig) -> Self {
        let distances = place_subscribers(&cfg);
        FadingChannel { cfg, distances }
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }
}

impl RateSource for FadingChannel {
    fn subscribers(&self) -> usize {
        self.cfg.subscribers
    }

    fn rbs(&self) -> usize {
        self.cfg.rbs
    }

    fn frame_rates(&self, frame_index: u64) -> RateMatrix {
        draw_rates(&self.cfg, &self.distances, frame_index)
    }
}

/// Same rates every frame; used by tests and examples.
#[derive(Debug, Clone)]
pub struct StaticRates(pub RateMatrix);

impl RateSource for StaticRates {
    fn subscribers(&self) -> usize {
        self.0.subscribers()
    }

    fn rbs(&self) -> usize {
        self.0.rbs()
    }

    fn frame_rates(&self, _frame_index: u64) -> RateMatrix {
        self.0.clone()
    }
}
