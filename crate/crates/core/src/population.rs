//! Real group-population tables and their median group / median individual.

use std::io::Read;
use std::path::Path;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

const BUNDLED_COUNTRIES: &str = include_str!("../data/countries_2016.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub name: String,
    pub population: u64,
}

/// Named group populations in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PopulationTable {
    entries: Vec<Entry>,
    total: u128,
}

impl PopulationTable {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyTable);
        }
        let total = entries.iter().map(|e| e.population as u128).sum();
        if total == 0 {
            return Err(Error::Precondition("table holds no individuals".into()));
        }
        Ok(PopulationTable { entries, total })
    }

    /// Unnamed table from bare counts, for tests and examples.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        PopulationTable::new(
            counts
                .iter()
                .enumerate()
                .map(|(i, &population)| Entry {
                    name: format!("group {}", i + 1),
                    population,
                })
                .collect(),
        )
    }

    /// Reads `name,population` CSV. Lines starting with `#` are skipped.
    pub fn load_table<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
        if headers.len() != 2 || &headers[0] != "name" || &headers[1] != "population" {
            return Err(Error::Parse {
                line: headers.position().map_or(1, |p| p.line()),
                message: format!(
                    "expected header `name,population`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let population = record[1].parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("population `{}` is not a nonnegative integer", &record[1]),
            })?;
            entries.push(Entry {
                name: record[0].to_string(),
                population,
            });
        }
        PopulationTable::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        PopulationTable::load_table(std::fs::File::open(path)?)
    }

    /// The frozen 2016 country snapshot shipped with the crate.
    pub fn bundled() -> Self {
        PopulationTable::load_table(BUNDLED_COUNTRIES.as_bytes()).expect("bundled table parses")
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    /// 1-based rank of `name` by descending population.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        let own = self.entries.iter().find(|e| e.name == name)?.population;
        Some(1 + self.entries.iter().filter(|e| e.population > own).count())
    }

    fn sorted(&self) -> Vec<u64> {
        let mut p: Vec<u64> = self.entries.iter().map(|e| e.population).collect();
        p.sort_unstable();
        p
    }

    /// Median group and group of the median individual. Even counts take
    /// the lower median.
    pub fn empirical_medians(&self) -> Medians {
        let p = self.sorted();
        let m_group = p[(p.len() - 1) / 2];
        let mut running = 0u128;
        let m_individual = p
            .iter()
            .find(|&&x| {
                running += x as u128;
                2 * running >= self.total
            })
            .copied()
            .expect("cumulative sum reaches the total");
        Medians { m_group, m_individual }
    }

    /// Share of individuals in groups with `low < population ≤ high`.
    pub fn fraction_between(&self, low: f64, high: f64) -> Result<Ratio<u128>> {
        if !(low < high) {
            return Err(Error::InvalidParameter(format!("need low < high, got ({low}, {high}]")));
        }
        let inside: u128 = self
            .entries
            .iter()
            .map(|e| e.population)
            .filter(|&x| low < x as f64 && x as f64 <= high)
            .map(u128::from)
            .sum();
        Ok(Ratio::new(inside, self.total))
    }

    /// Individual-weighted probabilities of living in a group at most `M_G`,
    /// between `M_G` and `M_I`, or above `M_I`.
    pub fn neutrality_report(&self) -> NeutralityReport {
        let m = self.empirical_medians();
        let mut bins = [0u128; 3];
        for e in &self.entries {
            let b = if e.population <= m.m_group {
                0
            } else if e.population <= m.m_individual {
                1
            } else {
                2
            };
            bins[b] += e.population as u128;
        }
        let exact = bins.map(|b| Ratio::new(b, self.total));
        NeutralityReport {
            medians: m,
            bins: exact.map(ratio_to_f64),
            exact: exact.map(|r| format!("{}/{}", r.numer(), r.denom())),
        }
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn ratio_to_f64(r: Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Medians {
    pub m_group: u64,
    pub m_individual: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeutralityReport {
    pub medians: Medians,
    /// `P(N ≤ M_G)`, `P(M_G < N ≤ M_I)`, `P(N > M_I)`.
    pub bins: [f64; 3],
    /// The same bins as reduced fractions.
    pub exact: [String; 3],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_snapshot() {
        let t = PopulationTable::bundled();
        assert_eq!(t.entries().len(), 233);
        assert_eq!(t.rank_of("Slovakia"), Some(117));
        let m = t.empirical_medians();
        assert_eq!(m.m_group, 5_429_000);
        assert_eq!(m.m_individual, 186_988_000);
        let share = ratio_to_f64(t.fraction_between(5.4e6, 1.92e8).unwrap());
        assert!((share - 0.48300).abs() < 1e-4);
        assert!(t.neutrality_report().bins[1] >= 0.4);
    }

    #[test]
    fn hand_enumerated_table() {
        let t = PopulationTable::from_counts(&[1, 1, 98]).unwrap();
        let m = t.empirical_medians();
        assert_eq!((m.m_group, m.m_individual), (1, 98));
        assert_eq!(t.fraction_between(1.0, 98.0).unwrap(), Ratio::new(98, 100));
        let r = t.neutrality_report();
        assert_eq!(r.exact, ["1/50".to_string(), "49/50".into(), "0/1".into()]);
    }

    #[test]
    fn equal_groups_collapse() {
        let t = PopulationTable::from_counts(&[7; 6]).unwrap();
        let m = t.empirical_medians();
        assert_eq!(m.m_group, m.m_individual);
        assert_eq!(t.neutrality_report().bins[1], 0.0);
        assert_eq!(t.fraction_between(0.0, f64::INFINITY).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn even_count_takes_lower_median() {
        let t = PopulationTable::from_counts(&[4, 1, 3, 2]).unwrap();
        assert_eq!(t.empirical_medians().m_group, 2);
    }

    #[test]
    fn loading() {
        let t = PopulationTable::load_table("name,population\nSolo,12\n".as_bytes()).unwrap();
        assert_eq!(t.entries()[0], Entry { name: "Solo".into(), population: 12 });
        let err = PopulationTable::load_table("# c\nname,population\nA,1\nB,lots\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        assert_eq!(PopulationTable::load_table("name,population\n".as_bytes()), Err(Error::EmptyTable));
        assert!(matches!(
            PopulationTable::load_table("country,pop\nA,1\n".as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(PopulationTable::from_counts(&[0, 0]).is_err());
    }
}
