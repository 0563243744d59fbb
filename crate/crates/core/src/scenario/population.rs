//! Synthetic residents and their social network.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::{NormalParam, PopulationConfig, ScenarioConfig};
use crate::kernel::AgentId;
use crate::num::clamp_unit;
use crate::rng::{RngStreams, Stream};
use crate::society::{watts_strogatz, CitizenState, MotiveProfile, SocialNetwork, SocietyError, SocioProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Resident `i` has agent id `i`.
    pub citizens: Vec<CitizenState>,
    /// Satisfaction baselines (experiential, social, values) per resident.
    pub baselines: Vec<[f64; 3]>,
    pub network: SocialNetwork,
}

fn normal<R: Rng>(p: &NormalParam, shift: f64, rng: &mut R) -> f64 {
    let mean = p.mean + shift;
    let x = Normal::new(mean, p.sd).map(|d| d.sample(rng)).unwrap_or(mean);
    clamp_unit(x)
}

fn sample_socio<R: Rng>(p: &PopulationConfig, rng: &mut R) -> SocioProfile {
    let pick = |w: &[f64], rng: &mut R| WeightedIndex::new(w).map(|d| d.sample(rng)).unwrap_or(0);
    SocioProfile {
        income_decile: pick(&p.income_decile_weights, rng) as u8 + 1,
        age_band: pick(&p.age_band_weights, rng) as u8,
        education_level: pick(&p.education_weights, rng) as u8,
    }
}

/// Draws residents from the configured marginals and wires them into a
/// small-world network. Socio-economic fields and motives come from the
/// population stream, the network from its own stream.
pub fn synthesize_population(config: &ScenarioConfig, rngs: &RngStreams) -> Result<Population, SocietyError> {
    let p = &config.population;
    let mut rng = rngs.stream(Stream::Population);
    let mut citizens = Vec::with_capacity(p.size);
    let mut baselines = Vec::with_capacity(p.size);
    for i in 0..p.size {
        let socio = sample_socio(p, &mut rng);
        let importance = p.importance_mean.map(|m| m * (1.0 + p.importance_jitter * rng.random_range(-1.0..=1.0)));
        let education_shift = p.education_values_shift * (socio.education_level as f64 - 1.0);
        let base = [
            normal(&p.experiential, 0.0, &mut rng),
            normal(&p.social, 0.0, &mut rng),
            normal(&p.values, education_shift, &mut rng),
        ];
        let profile = MotiveProfile::new(importance, base).or_else(|_| MotiveProfile::new(p.importance_mean, base))?;
        citizens.push(CitizenState::new(AgentId(i as u32), profile, socio));
        baselines.push(base);
    }
    let mut net_rng = rngs.stream(Stream::Network);
    let network = watts_strogatz(p.size, config.network.mean_degree, config.network.rewiring, &mut net_rng)?;
    Ok(Population { citizens, baselines, network })
}
