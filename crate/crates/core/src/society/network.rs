//! Watts–Strogatz small-world network over residents.

use std::collections::BTreeSet;

use rand::Rng;

use super::SocietyError;

/// Undirected graph over node indices `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    adjacency: Vec<Vec<u32>>,
}

impl SocialNetwork {
    fn from_sets(sets: Vec<BTreeSet<u32>>) -> Self {
        Self { adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect() }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbours(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, ns) in self.adjacency.iter().enumerate() {
            for &j in ns {
                if (i as u32) < j {
                    out.push((i as u32, j));
                }
            }
        }
        out
    }
}

fn check(n: usize, degree: usize) -> Result<(), SocietyError> {
    if !degree.is_multiple_of(2) || (degree > 0 && degree >= n) {
        return Err(SocietyError::InfeasibleNetwork { n, degree });
    }
    Ok(())
}

fn lattice_sets(n: usize, degree: usize) -> Vec<BTreeSet<u32>> {
    let mut sets = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in 1..=degree / 2 {
            let k = (i + j) % n;
            sets[i].insert(k as u32);
            sets[k].insert(i as u32);
        }
    }
    sets
}

/// Ring lattice: each node linked to its `degree / 2` nearest neighbours on
/// each side, giving `n · degree / 2` edges.
pub fn ring_lattice(n: usize, degree: usize) -> Result<SocialNetwork, SocietyError> {
    check(n, degree)?;
    Ok(SocialNetwork::from_sets(lattice_sets(n, degree)))
}

/// Ring lattice whose clockwise edges are each rewired with probability
/// `rewiring` to a uniformly chosen node that is neither the source nor
/// already adjacent. The edge count is preserved.
pub fn watts_strogatz<R: Rng>(
    n: usize,
    degree: usize,
    rewiring: f64,
    rng: &mut R,
) -> Result<SocialNetwork, SocietyError> {
    check(n, degree)?;
    if !(0.0..=1.0).contains(&rewiring) {
        return Err(SocietyError::InvalidRewiring(rewiring));
    }
    let mut sets = lattice_sets(n, degree);
    for j in 1..=degree / 2 {
        for i in 0..n {
            if !rng.random_bool(rewiring) {
                continue;
            }
            let old = ((i + j) % n) as u32;
            if !sets[i].contains(&old) || sets[i].len() + 1 >= n {
                continue;
            }
            let target = loop {
                let t = rng.random_range(0..n as u32);
                if t as usize != i && !sets[i].contains(&t) {
                    break t;
                }
            };
            sets[i].remove(&old);
            sets[old as usize].remove(&(i as u32));
            sets[i].insert(target);
            sets[target as usize].insert(i as u32);
        }
    }
    Ok(SocialNetwork::from_sets(sets))
}
