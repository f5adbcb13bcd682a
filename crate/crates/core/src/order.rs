//! Noun-phrase orders of demonstrative, numeral, adjective and noun.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One of the four noun-phrase elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// Demonstrative, written `D`.
    Dem,
    /// Numeral, written `N`.
    Num,
    /// Adjective, written `A`.
    Adj,
    /// Noun, written `n`.
    Noun,
}

impl Element {
    pub const ALL: [Element; 4] = [Element::Dem, Element::Num, Element::Adj, Element::Noun];

    pub fn symbol(self) -> char {
        match self {
            Element::Dem => 'D',
            Element::Num => 'N',
            Element::Adj => 'A',
            Element::Noun => 'n',
        }
    }

    pub fn from_symbol(c: char) -> Option<Element> {
        match c {
            'D' => Some(Element::Dem),
            'N' => Some(Element::Num),
            'A' => Some(Element::Adj),
            'n' => Some(Element::Noun),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// A permutation of `DNAn`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordOrder([Element; 4]);

impl WordOrder {
    /// All 24 orders, in descending order of adjusted frequency in the
    /// built-in typological table. This is the canonical observation order
    /// used throughout the crate.
    pub fn all() -> [WordOrder; 24] {
        CANONICAL.map(|s| s.parse().expect("canonical order"))
    }

    pub fn elements(&self) -> [Element; 4] {
        self.0
    }

    /// Zero-based position of `e` in the order.
    pub fn position(&self, e: Element) -> usize {
        self.positions()[e.index()]
    }

    fn positions(&self) -> [usize; 4] {
        let mut pos = [0; 4];
        for (i, e) in self.0.iter().enumerate() {
            pos[e.index()] = i;
        }
        pos
    }

    pub fn precedes(&self, a: Element, b: Element) -> bool {
        self.position(a) < self.position(b)
    }

    pub fn adjacent(&self, a: Element, b: Element) -> bool {
        self.position(a).abs_diff(self.position(b)) == 1
    }

    /// Distance of a modifier from the noun, in positions.
    pub fn distance_to_noun(&self, e: Element) -> usize {
        self.position(e).abs_diff(self.position(Element::Noun))
    }

    pub fn is_prenominal(&self, e: Element) -> bool {
        self.precedes(e, Element::Noun)
    }

    /// Modifiers preceding the noun, left to right.
    pub fn prenominal(&self) -> Vec<Element> {
        let noun = self.position(Element::Noun);
        self.0[..noun].to_vec()
    }

    /// Modifiers following the noun, left to right.
    pub fn postnominal(&self) -> Vec<Element> {
        let noun = self.position(Element::Noun);
        self.0[noun + 1..].to_vec()
    }

    pub fn reversed(&self) -> WordOrder {
        let mut e = self.0;
        e.reverse();
        WordOrder(e)
    }
}

const CANONICAL: [&str; 24] = [
    "nAND", "DNAn", "DnAN", "DNnA", "NnAD", "nADN", "nDAN", "nNAD", "DnNA", "DAnN", "nDNA", "NAnD",
    "AnND", "NnDA", "NDAn", "AnDN", "DANn", "nNDA", "NADn", "NDnA", "ADnN", "ADNn", "ANDn", "ANnD",
];

/// Parses a four-symbol order over `{D, N, A, n}`.
pub fn parse_word_order(text: &str) -> Result<WordOrder> {
    let err = |position: usize, reason: String| Error::ParseOrder {
        text: text.to_string(),
        position,
        reason,
    };
    let chars: Vec<char> = text.chars().collect();
    let mut seen = [false; 4];
    let mut elems = [Element::Dem; 4];
    for (i, &c) in chars.iter().enumerate() {
        if i >= 4 {
            return Err(err(i, format!("expected 4 symbols, found {}", chars.len())));
        }
        let e = Element::from_symbol(c).ok_or_else(|| err(i, format!("unknown symbol {c:?}")))?;
        if seen[e.index()] {
            return Err(err(i, format!("duplicate symbol {c}")));
        }
        seen[e.index()] = true;
        elems[i] = e;
    }
    if chars.len() < 4 {
        return Err(err(
            chars.len(),
            format!("expected 4 symbols, found {}", chars.len()),
        ));
    }
    Ok(WordOrder(elems))
}

impl FromStr for WordOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_word_order(s)
    }
}

impl fmt::Display for WordOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.0 {
            write!(f, "{}", e.symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for WordOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordOrder({self})")
    }
}

impl Serialize for WordOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WordOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn parses_table_rows() {
        assert_eq!(parse_word_order("nAND").unwrap().to_string(), "nAND");
        assert_eq!(parse_word_order("DNAn").unwrap().to_string(), "DNAn");
    }

    #[test]
    fn rejects_duplicate_symbol() {
        match parse_word_order("DDAn") {
            Err(Error::ParseOrder {
                position, reason, ..
            }) => {
                assert_eq!(position, 1);
                assert!(reason.contains("duplicate symbol D"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_length_and_symbols() {
        assert!(parse_word_order("DNA").is_err());
        assert!(parse_word_order("DNAnn").is_err());
        assert!(parse_word_order("").is_err());
        assert!(parse_word_order("DNAx").is_err());
        assert!(parse_word_order("dnan").is_err());
    }

    #[test]
    fn canonical_sequence_is_all_permutations() {
        let all = WordOrder::all();
        let set: HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 24);
        assert_eq!(all[0].to_string(), "nAND");
    }

    #[test]
    fn positional_helpers() {
        let o: WordOrder = "DnAN".parse().unwrap();
        assert_eq!(o.position(Element::Noun), 1);
        assert!(o.adjacent(Element::Noun, Element::Adj));
        assert_eq!(o.prenominal(), vec![Element::Dem]);
        assert_eq!(o.postnominal(), vec![Element::Adj, Element::Num]);
        assert_eq!(o.distance_to_noun(Element::Num), 2);
        assert_eq!(o.reversed().to_string(), "NAnD");
    }
}
