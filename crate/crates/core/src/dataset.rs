//! Typological counts per noun-phrase order.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::ResponseVector;
use crate::order::WordOrder;

/// Adjusted frequency and genera count for each order, as tabulated by Dryer.
const DRYER_TABLE: [(&str, f64, u64); 24] = [
    ("nAND", 43.50, 84),
    ("DNAn", 36.62, 57),
    ("DnAN", 28.34, 38),
    ("DNnA", 21.18, 31),
    ("NnAD", 15.33, 28),
    ("nADN", 14.78, 19),
    ("nDAN", 9.00, 11),
    ("nNAD", 9.00, 9),
    ("DnNA", 8.77, 10),
    ("DAnN", 6.11, 8),
    ("nDNA", 4.67, 5),
    ("NAnD", 4.00, 5),
    ("AnND", 3.00, 3),
    ("NnDA", 3.00, 3),
    ("NDAn", 3.00, 3),
    ("AnDN", 2.49, 3),
    ("DANn", 2.00, 2),
    ("nNDA", 1.00, 1),
    ("NADn", 0.00, 0),
    ("NDnA", 0.00, 0),
    ("ADnN", 0.00, 0),
    ("ADNn", 0.00, 0),
    ("ANDn", 0.00, 0),
    ("ANnD", 0.00, 0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependentVariable {
    /// Areally adjusted frequency, rounded to the nearest integer before fitting.
    AdjustedFrequency,
    GeneraCount,
}

impl DependentVariable {
    pub fn short_name(self) -> &'static str {
        match self {
            DependentVariable::AdjustedFrequency => "adjusted",
            DependentVariable::GeneraCount => "genera",
        }
    }
}

impl fmt::Display for DependentVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DependentVariable::AdjustedFrequency => "adjusted frequency",
            DependentVariable::GeneraCount => "genera count",
        })
    }
}

impl FromStr for DependentVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "adjusted" | "adjusted_frequency" => Ok(DependentVariable::AdjustedFrequency),
            "genera" | "genera_count" => Ok(DependentVariable::GeneraCount),
            other => Err(format!("unknown dependent variable {other:?} (use adjusted or genera)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCounts {
    pub adjusted_frequency: f64,
    pub genera_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypologyDataset {
    rows: BTreeMap<WordOrder, OrderCounts>,
    source: String,
}

/// Rounds to the nearest integer, ties away from zero.
pub fn round_adjusted(x: f64) -> Result<u64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeValue(x));
    }
    Ok(x.round() as u64)
}

impl TypologyDataset {
    pub fn new(
        rows: impl IntoIterator<Item = (WordOrder, OrderCounts)>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let source = source.into();
        let mut map = BTreeMap::new();
        for (order, counts) in rows {
            if !(counts.adjusted_frequency >= 0.0) {
                return Err(Error::NegativeCount {
                    source_name: source,
                    order,
                    column: "adjusted_frequency".into(),
                    value: counts.adjusted_frequency,
                });
            }
            if map.insert(order, counts).is_some() {
                return Err(Error::DuplicateOrder {
                    source_name: source,
                    order,
                });
            }
        }
        let missing: Vec<WordOrder> = WordOrder::all()
            .into_iter()
            .filter(|o| !map.contains_key(o))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingOrders {
                source_name: source,
                missing,
            });
        }
        Ok(TypologyDataset { rows: map, source })
    }

    pub fn get(&self, order: &WordOrder) -> Option<&OrderCounts> {
        self.rows.get(order)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Count used for fitting: rounded adjusted frequency or genera count.
    pub fn count(&self, order: &WordOrder, dv: DependentVariable) -> Option<u64> {
        self.rows.get(order).map(|c| match dv {
            DependentVariable::AdjustedFrequency => {
                round_adjusted(c.adjusted_frequency).expect("validated nonnegative")
            }
            DependentVariable::GeneraCount => c.genera_count,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.source.is_empty() {
            writeln!(out, "# source: {}", self.source).unwrap();
        }
        out.push_str("order,adjusted_frequency,genera_count\n");
        for order in WordOrder::all() {
            let c = self.rows[&order];
            writeln!(
                out,
                "{order},{},{}",
                format_frequency(c.adjusted_frequency),
                c.genera_count
            )
            .unwrap();
        }
        out
    }

    /// Parses the dataset CSV. A `# source:` comment overrides `source`.
    pub fn from_csv(text: &str, source: &str) -> Result<Self> {
        let declared = text
            .lines()
            .map(str::trim)
            .take_while(|l| l.starts_with('#') || l.is_empty())
            .find_map(|l| l.strip_prefix('#').map(str::trim)?.strip_prefix("source:").map(str::trim));
        let source = declared.unwrap_or(source);
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["order", "adjusted_frequency", "genera_count"] {
            return Err(Error::Format {
                source_name: source.into(),
                line: 1,
                message: "header must be `order,adjusted_frequency,genera_count`".into(),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let format_err = |message: String| Error::Format {
                source_name: source.into(),
                line,
                message,
            };
            if record.len() != 3 {
                return Err(format_err(format!("expected 3 fields, found {}", record.len())));
            }
            let order: WordOrder = record[0].parse().map_err(|e: Error| format_err(e.to_string()))?;
            let adjusted: f64 = record[1]
                .parse()
                .map_err(|_| format_err(format!("bad adjusted_frequency {:?}", &record[1])))?;
            let genera: i64 = record[2]
                .parse()
                .map_err(|_| format_err(format!("bad genera_count {:?}", &record[2])))?;
            if genera < 0 {
                return Err(Error::NegativeCount {
                    source_name: source.into(),
                    order,
                    column: "genera_count".into(),
                    value: genera as f64,
                });
            }
            rows.push((
                order,
                OrderCounts {
                    adjusted_frequency: adjusted,
                    genera_count: genera as u64,
                },
            ));
        }
        TypologyDataset::new(rows, source)
    }
}

/// Two decimals when that is exact, otherwise the shortest round-tripping form.
fn format_frequency(x: f64) -> String {
    let fixed = format!("{x:.2}");
    if fixed.parse::<f64>() == Ok(x) {
        fixed
    } else {
        format!("{x}")
    }
}

/// The built-in table of adjusted frequencies and genera counts.
pub fn builtin_dryer_table() -> TypologyDataset {
    let rows = DRYER_TABLE.iter().map(|&(o, adjusted_frequency, genera_count)| {
        (
            o.parse().expect("literal order"),
            OrderCounts {
                adjusted_frequency,
                genera_count,
            },
        )
    });
    TypologyDataset::new(rows, "Dryer (in prep), adjusted frequencies and genera counts")
        .expect("built-in table is complete")
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<TypologyDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TypologyDataset::from_csv(&text, &path.display().to_string())
}

/// Counts aligned to `orders`, which must list every order exactly once.
pub fn response_vector(
    ds: &TypologyDataset,
    dv: DependentVariable,
    orders: &[WordOrder],
) -> Result<ResponseVector> {
    let mut seen = std::collections::HashSet::new();
    for o in orders {
        if !seen.insert(*o) {
            return Err(Error::DuplicateOrder {
                source_name: "order sequence".into(),
                order: *o,
            });
        }
    }
    let missing: Vec<WordOrder> = WordOrder::all()
        .into_iter()
        .filter(|o| !seen.contains(o))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingOrders {
            source_name: "order sequence".into(),
            missing,
        });
    }
    Ok(ResponseVector::new(
        orders
            .iter()
            .map(|o| ds.count(o, dv).expect("complete dataset"))
            .collect(),
    ))
}
