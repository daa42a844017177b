use serde::{Deserialize, Serialize};

use super::pareto::{crowding_distance, dominates};
use super::{bit_string, parse_bits, Bits, MooError};

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub bits: Bits,
    pub objectives: Vec<f64>,
}

/// Bounded set of mutually non-dominated solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    pub capacity: usize,
    members: Vec<ArchiveEntry>,
}

/// `pareto.json` row; infinite crowding is written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRecord {
    pub bits: String,
    pub objectives: Vec<f64>,
    pub crowding: Option<f64>,
}

impl ParetoArchive {
    pub fn new(capacity: usize) -> Self {
        ParetoArchive {
            capacity,
            members: Vec::new(),
        }
    }

    pub fn members(&self) -> &[ArchiveEntry] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds a candidate unless it is dominated or already present. Returns
    /// whether it was accepted (it may still be truncated away later).
    pub fn insert(&mut self, bits: &[bool], objectives: &[f64]) -> bool {
        if self
            .members
            .iter()
            .any(|m| m.bits == bits || dominates(&m.objectives, objectives))
        {
            return false;
        }
        self.members.retain(|m| !dominates(objectives, &m.objectives));
        self.members.push(ArchiveEntry {
            bits: bits.to_vec(),
            objectives: objectives.to_vec(),
        });
        self.truncate();
        true
    }

    pub fn crowding(&self) -> Vec<f64> {
        let objs: Vec<Vec<f64>> = self.members.iter().map(|m| m.objectives.clone()).collect();
        crowding_distance(&objs)
    }

    /// Drops the most crowded member until within capacity.
    pub fn truncate(&mut self) {
        while self.members.len() > self.capacity {
            let d = self.crowding();
            let mut worst = 0;
            for i in 1..d.len() {
                if d[i] < d[worst] {
                    worst = i;
                }
            }
            self.members.remove(worst);
        }
    }

    /// Members sorted by bit string, for order-independent output.
    pub fn sorted(&self) -> ParetoArchive {
        let mut members = self.members.clone();
        members.sort_by(|a, b| a.bits.cmp(&b.bits));
        ParetoArchive {
            capacity: self.capacity,
            members,
        }
    }

    pub fn records(&self) -> Vec<ParetoRecord> {
        self.members
            .iter()
            .zip(self.crowding())
            .map(|(m, c)| ParetoRecord {
                bits: bit_string(&m.bits),
                objectives: m.objectives.clone(),
                crowding: c.is_finite().then_some(c),
            })
            .collect()
    }

    pub fn from_records(records: &[ParetoRecord]) -> Result<Self, MooError> {
        let members = records
            .iter()
            .map(|r| {
                parse_bits(&r.bits)
                    .map(|bits| ArchiveEntry {
                        bits,
                        objectives: r.objectives.clone(),
                    })
                    .ok_or_else(|| MooError::Config(format!("bad bit string {:?}", r.bits)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ParetoArchive {
            capacity: members.len().max(1),
            members,
        })
    }

    /// True when no member dominates another.
    pub fn is_mutually_non_dominated(&self) -> bool {
        self.members.iter().all(|a| {
            self.members
                .iter()
                .all(|b| !dominates(&a.objectives, &b.objectives))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(i: usize) -> Bits {
        (0..12).map(|k| (i >> k) & 1 == 1).collect()
    }

    #[test]
    fn dominated_candidates_rejected() {
        let mut a = ParetoArchive::new(10);
        assert!(a.insert(&bits(1), &[1.0, 1.0]));
        assert!(!a.insert(&bits(2), &[2.0, 2.0]));
        assert!(a.insert(&bits(3), &[0.5, 0.5]));
        assert_eq!(a.len(), 1);
        assert!(!a.insert(&bits(3), &[0.1, 0.1]), "duplicate genome");
    }

    #[test]
    fn truncation_keeps_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut a = ParetoArchive::new(100);
        for i in 0..150 {
            let x: f64 = rng.random();
            a.insert(&bits(i), &[x, 1.0 - x]);
        }
        assert_eq!(a.len(), 100);
        assert!(a.is_mutually_non_dominated());
    }

    #[test]
    fn records_round_trip() {
        let mut a = ParetoArchive::new(5);
        a.insert(&bits(5), &[0.1, 0.9]);
        a.insert(&bits(6), &[0.9, 0.1]);
        let r = a.records();
        assert_eq!(r[0].crowding, None);
        let json = serde_json::to_string(&r).unwrap();
        let back: Vec<ParetoRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(ParetoArchive::from_records(&back).unwrap().members(), a.members());
    }
}
