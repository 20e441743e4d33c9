//! Normalized keyboard geometry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::Point;

/// Axis-aligned key extent in unit-square coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyBox {
    #[serde(rename = "cx")]
    pub center_x: f64,
    #[serde(rename = "cy")]
    pub center_y: f64,
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "h")]
    pub height: f64,
}

impl KeyBox {
    pub fn center(&self) -> Point {
        Point::new(self.center_x, self.center_y)
    }
}

#[derive(Serialize, Deserialize)]
struct LayoutFile {
    alphabet: String,
    keys: BTreeMap<String, KeyBox>,
}

/// Keyboard geometry: one [`KeyBox`] per alphabet character.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyboardLayout {
    alphabet: Vec<char>,
    keys: BTreeMap<char, KeyBox>,
}

const QWERTY_ROWS: [(&str, u32, u32); 3] = [
    // (keys, x-offset in hundredths, center ordinate in sixths)
    ("qwertyuiop", 0, 1),
    ("asdfghjkl", 5, 3),
    ("zxcvbnm", 15, 5),
];

/// Identifier recorded in corpus metadata for [`reference_qwerty`].
pub const REFERENCE_LAYOUT_ID: &str = "qwerty";

/// Three-row lowercase QWERTY with 0.1-wide keys and 1/3-high rows.
pub fn reference_qwerty() -> KeyboardLayout {
    let mut keys = BTreeMap::new();
    for (row, offset, sixths) in QWERTY_ROWS {
        for (i, c) in row.chars().enumerate() {
            let hundredths = offset + 10 * i as u32 + 5;
            keys.insert(
                c,
                KeyBox {
                    center_x: f64::from(hundredths) / 100.0,
                    center_y: f64::from(sixths) / 6.0,
                    width: 0.1,
                    height: 1.0 / 3.0,
                },
            );
        }
    }
    KeyboardLayout {
        alphabet: ('a'..='z').collect(),
        keys,
    }
}

impl KeyboardLayout {
    pub fn new(alphabet: Vec<char>, keys: BTreeMap<char, KeyBox>) -> Result<Self> {
        let layout = KeyboardLayout { alphabet, keys };
        layout.validate()?;
        Ok(layout)
    }

    fn validate(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return Err(Error::invalid("layout alphabet is empty"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &c in &self.alphabet {
            if !seen.insert(c) {
                return Err(Error::invalid(format!("duplicate alphabet character {c:?}")));
            }
            if !self.keys.contains_key(&c) {
                return Err(Error::invalid(format!("no key for character {c:?}")));
            }
        }
        if self.keys.len() != self.alphabet.len() {
            return Err(Error::invalid("keys present for characters outside the alphabet"));
        }
        let boxes: Vec<(char, &KeyBox)> = self.keys.iter().map(|(c, k)| (*c, k)).collect();
        for (i, (c, k)) in boxes.iter().enumerate() {
            let inside = |v: f64| v.is_finite() && v > 0.0 && v < 1.0;
            if !inside(k.center_x) || !inside(k.center_y) {
                return Err(Error::invalid(format!("key {c:?} center outside the unit square")));
            }
            let extent = |v: f64| v.is_finite() && v > 0.0 && v <= 1.0;
            if !extent(k.width) || !extent(k.height) {
                return Err(Error::invalid(format!("key {c:?} has extent outside (0, 1]")));
            }
            for (d, other) in &boxes[i + 1..] {
                if other.center_x == k.center_x && other.center_y == k.center_y {
                    return Err(Error::invalid(format!("keys {c:?} and {d:?} share a center")));
                }
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn key(&self, c: char) -> Result<&KeyBox> {
        self.keys.get(&c).ok_or(Error::UnknownCharacter(c))
    }

    pub fn key_center(&self, c: char) -> Result<Point> {
        self.key(c).map(KeyBox::center)
    }

    pub fn contains(&self, c: char) -> bool {
        self.keys.contains_key(&c)
    }

    /// Mean key width, used as the length scale for style perturbations.
    pub fn mean_key_width(&self) -> f64 {
        self.keys.values().map(|k| k.width).sum::<f64>() / self.keys.len() as f64
    }

    /// Checks that `word` is non-empty and typeable on this layout.
    pub fn check_word(&self, word: &str) -> Result<()> {
        if word.is_empty() {
            return Err(Error::invalid_word(word, "empty word"));
        }
        match word.chars().find(|c| !self.contains(*c)) {
            Some(c) => Err(Error::invalid_word(word, format!("character {c:?} not on layout"))),
            None => Ok(()),
        }
    }

    /// Key centers the trace must visit, one per run of repeated letters.
    pub fn word_to_via_points(&self, word: &str) -> Result<Vec<Point>> {
        self.check_word(word)?;
        let mut via = Vec::with_capacity(word.len());
        let mut prev = None;
        for c in word.chars() {
            if prev != Some(c) {
                via.push(self.key_center(c)?);
            }
            prev = Some(c);
        }
        Ok(via)
    }

    /// Stable identifier: [`REFERENCE_LAYOUT_ID`] for the reference layout,
    /// otherwise a fingerprint of the serialized geometry.
    pub fn identifier(&self) -> String {
        if *self == reference_qwerty() {
            REFERENCE_LAYOUT_ID.to_string()
        } else {
            let json = self.to_json().unwrap_or_default();
            format!("custom-{:016x}", crate::seed::fnv1a(json.as_bytes()))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = LayoutFile {
            alphabet: self.alphabet.iter().collect(),
            keys: self.keys.iter().map(|(c, k)| (c.to_string(), *k)).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(text)?;
        let mut keys = BTreeMap::new();
        for (name, key) in file.keys {
            let mut chars = name.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => {
                    keys.insert(c, key);
                }
                _ => return Err(Error::invalid(format!("key name {name:?} is not one character"))),
            }
        }
        KeyboardLayout::new(file.alphabet.chars().collect(), keys)
    }
}
