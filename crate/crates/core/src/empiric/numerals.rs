//! English numerals in running text: digit strings (with `1,000,000`-style
//! grouping) and number words (`twenty-one`, `three hundred`, `a million`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::Nat;

/// Largest recognized value.
pub const MAX_NUMERAL: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyTable {
    pub counts: BTreeMap<Nat, u64>,
    /// Word and number tokens seen, recognized or not.
    pub tokens: u64,
    pub source: String,
}

impl FrequencyTable {
    pub fn total_mentions(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Text that `extract_numbers` maps back to the same counts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (x, &c) in &self.counts {
            for _ in 0..c {
                out.push_str(&x.to_string());
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Word {
    Unit(u64),
    Teen(u64),
    Tens(u64),
    Hundred,
    Scale(u64),
    A,
    And,
}

fn classify(w: &str) -> Option<Word> {
    const UNITS: [&str; 10] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    ];
    const TEENS: [&str; 10] = [
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
    ];
    const TENS: [&str; 8] = [
        "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    ];
    if let Some(i) = UNITS.iter().position(|u| *u == w) {
        return Some(Word::Unit(i as u64));
    }
    if let Some(i) = TEENS.iter().position(|u| *u == w) {
        return Some(Word::Teen(10 + i as u64));
    }
    if let Some(i) = TENS.iter().position(|u| *u == w) {
        return Some(Word::Tens(20 + 10 * i as u64));
    }
    Some(match w {
        "hundred" => Word::Hundred,
        "thousand" => Word::Scale(1_000),
        "million" => Word::Scale(1_000_000),
        "billion" => Word::Scale(1_000_000_000),
        "trillion" => Word::Scale(MAX_NUMERAL),
        "a" | "an" => Word::A,
        "and" => Word::And,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    /// A digit string; `None` when malformed or too large.
    Digits(Option<u64>),
    /// Punctuation other than the hyphen inside a compound.
    Break,
}

fn parse_grouped(s: &str) -> Option<u64> {
    let groups: Vec<&str> = s.split(',').collect();
    let well_grouped = groups.len() == 1
        || (!groups[0].is_empty()
            && groups[0].len() <= 3
            && groups[1..].iter().all(|g| g.len() == 3));
    if !well_grouped {
        return None;
    }
    let v: u64 = groups.concat().parse().ok()?;
    (v <= MAX_NUMERAL).then_some(v)
}

fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || (chars[i] == ',' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())))
            {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let decimal =
                chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
            if decimal {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Token::Digits(None));
            } else if let Some(v) = parse_grouped(&digits) {
                out.push(Token::Digits(Some(v)));
            } else {
                // badly grouped: read as a comma-separated list
                for (k, part) in digits.split(',').enumerate() {
                    if k > 0 {
                        out.push(Token::Break);
                    }
                    out.push(Token::Digits(parse_grouped(part)));
                }
            }
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect::<String>().to_lowercase();
            out.push(Token::Word(w));
            // a hyphen joining two words keeps the compound together
            if chars.get(i) == Some(&'-') && chars.get(i + 1).is_some_and(|d| d.is_alphabetic()) {
                i += 1;
            }
        } else {
            if !c.is_whitespace() {
                out.push(Token::Break);
            }
            i += 1;
        }
    }
    out
}

/// Accumulates one spoken numeral, rejecting word orders that do not form a
/// single number ("one two", "thousand thousand").
#[derive(Default)]
struct Phrase {
    total: u64,
    current: u64,
    last: Option<Word>,
    min_scale: Option<u64>,
}

impl Phrase {
    fn accepts(&self, w: Word) -> bool {
        use Word::*;
        match (self.last, w) {
            (None, Unit(_) | Teen(_) | Tens(_) | Hundred | Scale(_) | A) => true,
            (None, And) | (Some(A), A | And) => false,
            (Some(A), Hundred | Scale(_)) => true,
            (Some(A), _) => false,
            (Some(Unit(_) | Teen(_)), Hundred) => true,
            (Some(Tens(_)), Unit(u)) => u > 0,
            (Some(Hundred), Unit(_) | Teen(_) | Tens(_) | And) => {
                self.current < 1_000 && self.current.is_multiple_of(100)
            }
            (Some(Scale(_)), Unit(_) | Teen(_) | Tens(_) | And) => true,
            (Some(And), Unit(_) | Teen(_) | Tens(_)) => true,
            (Some(Hundred), Scale(s)) | (Some(Unit(_) | Teen(_) | Tens(_)), Scale(s)) => {
                self.min_scale.is_none_or(|m| s < m)
            }
            _ => false,
        }
    }

    fn push(&mut self, w: Word) {
        match w {
            Word::Unit(v) | Word::Teen(v) | Word::Tens(v) => self.current += v,
            Word::Hundred => self.current = self.current.max(1) * 100,
            Word::Scale(s) => {
                self.total += self.current.max(1) * s;
                self.current = 0;
                self.min_scale = Some(s);
            }
            Word::A | Word::And => {}
        }
        self.last = Some(w);
    }

    /// The value, if the phrase holds a complete numeral.
    fn value(&self) -> Option<u64> {
        match self.last {
            None | Some(Word::A) | Some(Word::And) => None,
            _ => {
                let v = self.total + self.current;
                (v <= MAX_NUMERAL).then_some(v)
            }
        }
    }
}

/// Counts every numeral mention in `text` (case-insensitive).
pub fn extract_numbers(text: &str) -> FrequencyTable {
    extract_with_source(text, "")
}

pub fn extract_with_source(text: &str, source: &str) -> FrequencyTable {
    let tokens = tokenize(text);
    let mut counts: BTreeMap<Nat, u64> = BTreeMap::new();
    let mut bump = |v: u64| *counts.entry(Nat::from(v)).or_default() += 1;
    let word_tokens = tokens.iter().filter(|t| !matches!(t, Token::Break)).count() as u64;

    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i] {
            Token::Digits(Some(v)) => {
                // "3 million"
                let scale = match tokens.get(i + 1) {
                    Some(Token::Word(w)) => match classify(w) {
                        Some(Word::Scale(s)) => Some(s),
                        Some(Word::Hundred) => Some(100),
                        _ => None,
                    },
                    _ => None,
                };
                match scale
                    .and_then(|s| v.checked_mul(s))
                    .filter(|&x| x <= MAX_NUMERAL)
                {
                    Some(x) => {
                        bump(x);
                        i += 2;
                    }
                    None => {
                        bump(*v);
                        i += 1;
                    }
                }
            }
            Token::Word(_) => {
                let mut phrase = Phrase::default();
                let mut best: Option<(u64, usize)> = None;
                let mut j = i;
                while let Some(Token::Word(w)) = tokens.get(j) {
                    match classify(w) {
                        Some(word) if phrase.accepts(word) => {
                            phrase.push(word);
                            j += 1;
                            if let Some(v) = phrase.value() {
                                best = Some((v, j));
                            }
                        }
                        _ => break,
                    }
                }
                match best {
                    Some((v, end)) => {
                        bump(v);
                        i = end;
                    }
                    None => i += 1,
                }
            }
            _ => i += 1,
        }
    }
    FrequencyTable {
        counts,
        tokens: word_tokens,
        source: source.to_string(),
    }
}
