use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uuid::Uuid;

use crate::Iri;

/// Environment variable holding a `u64` seed for reproducible UUIDs.
pub const UUID_SEED_ENV: &str = "ONTOQUERY_UUID_SEED";

/// `namespace` followed by a random v4 UUID.
pub fn make_uuid_iri(namespace: &Iri) -> Iri {
    debug_assert!(namespace.as_str().ends_with(['#', '/']));
    Iri::new_unchecked(format!("{}{}", namespace.as_str(), Uuid::new_v4()))
}

/// Source of UUID-based IRIs, either OS-random or seeded.
#[derive(Debug, Clone)]
pub enum UuidMinter {
    Random,
    Seeded(Box<ChaCha8Rng>),
}

impl UuidMinter {
    pub fn seeded(seed: u64) -> Self {
        UuidMinter::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    /// Seeded when [`UUID_SEED_ENV`] holds an integer, random otherwise.
    pub fn from_env() -> Self {
        match std::env::var(UUID_SEED_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            Some(seed) => Self::seeded(seed),
            None => UuidMinter::Random,
        }
    }

    pub fn next_uuid(&mut self) -> Uuid {
        match self {
            UuidMinter::Random => Uuid::new_v4(),
            UuidMinter::Seeded(rng) => {
                let mut bytes = [0u8; 16];
                rng.fill_bytes(&mut bytes);
                uuid::Builder::from_random_bytes(bytes).into_uuid()
            }
        }
    }

    pub fn mint(&mut self, namespace: &Iri) -> Iri {
        Iri::new_unchecked(format!("{}{}", namespace.as_str(), self.next_uuid()))
    }
}

impl Default for UuidMinter {
    fn default() -> Self {
        UuidMinter::from_env()
    }
}
