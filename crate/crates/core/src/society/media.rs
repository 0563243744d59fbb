//! News items and the media outlets that emit them.
//!
//! A news item's influence is `sign(valence) · impact · reach · decay^age`.
//! Items age once per tick and expire when the unsigned magnitude drops
//! below the expiry threshold.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::AgentId;
use crate::lifecycle::ProposalId;
use crate::rng::{RngStreams, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NewsId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valence {
    Supportive,
    Critical,
    Neutral,
}

impl Valence {
    pub fn sign(self) -> f64 {
        match self {
            Valence::Supportive => 1.0,
            Valence::Critical => -1.0,
            Valence::Neutral => 0.0,
        }
    }

    pub fn from_sign(x: f64) -> Valence {
        if x > 0.0 {
            Valence::Supportive
        } else if x < 0.0 {
            Valence::Critical
        } else {
            Valence::Neutral
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct News {
    pub id: NewsId,
    pub proposal: ProposalId,
    pub valence: Valence,
    pub impact: f64,
    pub reach: f64,
    pub age: u32,
    pub source: AgentId,
    pub co_produced_with: Option<AgentId>,
}

impl News {
    pub fn magnitude(&self, decay: f64) -> f64 {
        self.impact * self.reach * decay.powi(self.age as i32)
    }

    pub fn influence(&self, decay: f64) -> f64 {
        self.valence.sign() * self.magnitude(decay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MediaParams {
    /// Number of media outlets.
    pub outlets: usize,
    /// p_news: chance an outlet emits one item per tick.
    pub news_probability: f64,
    /// λ: per-tick decay of influence.
    pub decay: f64,
    /// ε_news: expiry threshold on influence magnitude.
    pub expiry_epsilon: f64,
    /// Share of independent items that carry no valence.
    pub neutral_probability: f64,
    pub impact_range: [f64; 2],
    pub reach_range: [f64; 2],
}

impl Default for MediaParams {
    fn default() -> Self {
        Self {
            outlets: 2,
            news_probability: 0.3,
            decay: 0.9,
            expiry_epsilon: 0.01,
            neutral_probability: 0.2,
            impact_range: [0.2, 1.0],
            reach_range: [0.2, 1.0],
        }
    }
}

/// A pending request from an activist to co-produce an item with its valence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoproductionRequest {
    pub activist: AgentId,
    pub valence: Valence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediaOutlet {
    pub id: AgentId,
    pub requests: VecDeque<CoproductionRequest>,
}

impl MediaOutlet {
    pub fn new(id: AgentId) -> Self {
        Self { id, requests: VecDeque::new() }
    }

    pub fn request(&mut self, activist: AgentId, valence: Valence) {
        self.requests.push_back(CoproductionRequest { activist, valence });
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewsPool {
    items: Vec<News>,
    next_id: u32,
}

impl NewsPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn items(&self) -> &[News] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Adds an item, assigning the next id.
    pub fn push(&mut self, mut news: News) -> NewsId {
        news.id = NewsId(self.next_id);
        self.next_id += 1;
        let id = news.id;
        self.items.push(news);
        id
    }

    /// Ages every item by one tick and drops expired ones; returns how many expired.
    pub fn age_and_expire(&mut self, decay: f64, epsilon: f64) -> usize {
        for n in &mut self.items {
            n.age += 1;
        }
        let before = self.items.len();
        self.items.retain(|n| n.magnitude(decay) >= epsilon);
        before - self.items.len()
    }

    /// Drops every item about a proposal other than `focal`.
    pub fn retain_proposal(&mut self, focal: Option<ProposalId>) {
        self.items.retain(|n| Some(n.proposal) == focal);
    }

    /// M = Σ signed influence / Σ influence magnitude over items about
    /// `proposal`; 0 for an empty pool.
    pub fn sentiment(&self, proposal: ProposalId, decay: f64) -> f64 {
        let (mut signed, mut total) = (0.0, 0.0);
        for n in self.items.iter().filter(|n| n.proposal == proposal) {
            signed += n.influence(decay);
            total += n.magnitude(decay);
        }
        if total > 0.0 {
            (signed / total).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediaTick {
    pub created: Vec<NewsId>,
    pub expired: usize,
    pub sentiment: f64,
}

/// One media phase: age the pool, let each outlet (in id order) emit at most
/// one item about the focal proposal, and compute the media sentiment.
///
/// An outlet with a queued co-production request uses the activist's valence;
/// otherwise the valence leans with the current support share.
pub fn media_tick(
    pool: &mut NewsPool,
    outlets: &mut [MediaOutlet],
    focal: Option<ProposalId>,
    support_share: f64,
    params: &MediaParams,
    rngs: &RngStreams,
    tick: u64,
) -> MediaTick {
    let expired = pool.age_and_expire(params.decay, params.expiry_epsilon);
    let mut created = Vec::new();
    if let Some(proposal) = focal {
        outlets.sort_by_key(|o| o.id);
        for outlet in outlets.iter_mut() {
            let mut rng = rngs.keyed(Stream::Media, tick, outlet.id.0 as u64);
            if !rng.random_bool(params.news_probability) {
                continue;
            }
            let (valence, co_produced_with) = match outlet.requests.pop_front() {
                Some(req) => (req.valence, Some(req.activist)),
                None => {
                    let u: f64 = rng.random();
                    let v = if u < params.neutral_probability {
                        Valence::Neutral
                    } else if u < params.neutral_probability + (1.0 - params.neutral_probability) * support_share {
                        Valence::Supportive
                    } else {
                        Valence::Critical
                    };
                    (v, None)
                }
            };
            let impact = sample_range(&mut rng, params.impact_range);
            let reach = sample_range(&mut rng, params.reach_range);
            created.push(pool.push(News {
                id: NewsId(0),
                proposal,
                valence,
                impact,
                reach,
                age: 0,
                source: outlet.id,
                co_produced_with,
            }));
        }
    }
    let sentiment = focal.map_or(0.0, |p| pool.sentiment(p, params.decay));
    MediaTick { created, expired, sentiment }
}

fn sample_range<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Sum of influences of the items a citizen happens to see: each item about
/// `proposal` is seen with probability equal to its reach.
pub fn news_exposure<R: Rng>(pool: &NewsPool, proposal: ProposalId, decay: f64, rng: &mut R) -> f64 {
    pool.items()
        .iter()
        .filter(|n| n.proposal == proposal)
        .filter(|n| rng.random_bool(n.reach.clamp(0.0, 1.0)))
        .map(|n| n.influence(decay))
        .sum()
}
