//! Shared fixtures for the criterion benches.
use rcbound::{Channel, DiscreteLaw, InputDistribution};

pub fn bsc() -> (Channel, InputDistribution) {
    (Channel::bsc(0.1).unwrap(), InputDistribution::uniform(2))
}

pub fn bec() -> (Channel, InputDistribution) {
    (Channel::bec(0.5).unwrap(), InputDistribution::uniform(2))
}

pub fn typewriter() -> (Channel, InputDistribution) {
    (Channel::typewriter(3).unwrap(), InputDistribution::new(vec![0.5, 0.3, 0.2]).unwrap())
}

/// Three-atom law with a positive-probability upper tail.
pub fn three_atom_law() -> DiscreteLaw {
    DiscreteLaw::new(vec![-1.0, 0.5, 2.0], vec![0.5, 0.3, 0.2]).unwrap()
}
