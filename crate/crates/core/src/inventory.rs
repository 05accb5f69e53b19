//! Character inventories shared across the toolkit.
//!
//! Single authoritative store of the Pashto-unique character set, the
//! default stratification class catalogue, and the punctuation/kashida
//! code points, so no module keeps a private copy. The built-in defaults
//! can be extended through a TOML override file; every merged inventory is
//! validated and carries a SHA-256 checksum so two evaluations are known
//! to be comparable only when their checksums match.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Kashida / tatweel, the cosmetic Arabic letter extension.
pub const KASHIDA: char = '\u{0640}';

/// The Unicode block tested by the script audit.
pub const ARABIC_BLOCK: RangeInclusive<u32> = 0x0600..=0x06FF;

/// The twelve code points used by Pashto but absent from Arabic and
/// Persian/Dari: eight consonants plus four vowel/kaf variants.
///
/// Each entry was resolved against the Unicode character database:
/// U+067C TEH WITH RING, U+0689 DAL WITH RING, U+06BC NOON WITH RING,
/// U+0693 REH WITH RING, U+069A SEEN WITH DOT BELOW AND DOT ABOVE,
/// U+0696 REH WITH DOT BELOW AND DOT ABOVE, U+0681 HAH WITH HAMZA ABOVE,
/// U+0685 HAH WITH THREE DOTS ABOVE, U+06CD YEH WITH TAIL, U+06D0 E,
/// U+06C0 HEH WITH YEH ABOVE, U+06AB KAF WITH RING.
pub const PASHTO_UNIQUE: [char; 12] = [
    '\u{067C}', // ټ
    '\u{0689}', // ډ
    '\u{06BC}', // ڼ
    '\u{0693}', // ړ
    '\u{069A}', // ښ
    '\u{0696}', // ږ
    '\u{0681}', // ځ
    '\u{0685}', // څ
    '\u{06CD}', // ۍ
    '\u{06D0}', // ې
    '\u{06C0}', // ۀ
    '\u{06AB}', // ګ
];

/// Arabic punctuation stripped by normalization: comma, full stop,
/// question mark.
pub const ARABIC_PUNCTUATION: [char; 3] = ['\u{060C}', '\u{06D4}', '\u{061F}'];

/// ASCII punctuation stripped by default (configurable).
pub const LATIN_PUNCTUATION: [char; 10] = ['.', ',', '?', '!', ';', ':', '"', '\'', '(', ')'];

/// One stratification class: a named set of characters whose presence in a
/// normalized reference selects an utterance into the stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharClass {
    pub name: String,
    pub chars: BTreeSet<char>,
    /// Display flag: the class consists of characters absent from Arabic,
    /// Dari, and Urdu. Has no effect on stratification.
    pub pashto_unique: bool,
}

impl CharClass {
    pub fn new(name: &str, chars: &[char], pashto_unique: bool) -> Self {
        Self {
            name: name.to_string(),
            chars: chars.iter().copied().collect(),
            pashto_unique,
        }
    }

    /// Space-separated member characters, in code point order.
    pub fn chars_display(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.chars.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(*c);
        }
        out
    }
}

/// The complete character inventory used by normalization, script
/// classification, and stratification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterInventory {
    pub pashto_unique: BTreeSet<char>,
    pub strata_classes: Vec<CharClass>,
    pub stripped_punctuation: BTreeSet<char>,
    pub kashida: char,
    /// Inclusive code point range of the tested Arabic block.
    pub arabic_block: (u32, u32),
}

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("invalid inventory override: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("inventory violates `pashto_unique within Arabic block`: U+{0:04X} is outside U+0600..=U+06FF")]
    UniqueOutsideBlock(u32),
    #[error("inventory violates `stripped_punctuation disjoint from pashto_unique`: U+{0:04X} is in both")]
    PunctuationOverlapsUnique(u32),
    #[error("inventory violates `flagged class members within pashto_unique`: class {class} contains U+{cp:04X}")]
    FlaggedClassOutsideUnique { class: String, cp: u32 },
    #[error("inventory class {0} has an empty character set")]
    EmptyClass(String),
    #[error("cannot read inventory override: {0}")]
    Io(#[from] std::io::Error),
}

impl CharacterInventory {
    /// The built-in default inventory: the twelve-character unique set,
    /// the twelve-row stratification catalogue, and the default
    /// punctuation strip set.
    pub fn default_inventory() -> Self {
        let strata_classes = vec![
            CharClass::new("Voiced lateral fric.", &['\u{0696}'], true),
            CharClass::new("Lateral fricative", &['\u{069A}'], true),
            CharClass::new("Retroflex stops", &['\u{067C}', '\u{0689}'], true),
            CharClass::new("Pashto vowel markers", &['\u{0626}', '\u{06CD}'], false),
            CharClass::new("Affricates", &['\u{0681}', '\u{0685}'], true),
            CharClass::new("Retroflex flap", &['\u{0693}'], true),
            CharClass::new("Common liquids", &['\u{0631}', '\u{0644}'], false),
            CharClass::new("Dental stops", &['\u{062A}', '\u{062F}', '\u{0637}'], false),
            CharClass::new("Common nasals", &['\u{0645}', '\u{0646}'], false),
            CharClass::new("Velars", &['\u{06A9}', '\u{06AB}'], false),
            CharClass::new(
                "Common fricatives",
                &['\u{0632}', '\u{0633}', '\u{0634}', '\u{0635}'],
                false,
            ),
            CharClass::new("Uvulars", &['\u{062E}', '\u{063A}', '\u{0642}'], false),
        ];
        let mut stripped_punctuation: BTreeSet<char> = ARABIC_PUNCTUATION.iter().copied().collect();
        stripped_punctuation.extend(LATIN_PUNCTUATION.iter().copied());
        Self {
            pashto_unique: PASHTO_UNIQUE.iter().copied().collect(),
            strata_classes,
            stripped_punctuation,
            kashida: KASHIDA,
            arabic_block: (*ARABIC_BLOCK.start(), *ARABIC_BLOCK.end()),
        }
    }

    /// True when the code point lies in the tested Arabic block.
    pub fn in_arabic_block(&self, c: char) -> bool {
        let cp = c as u32;
        cp >= self.arabic_block.0 && cp <= self.arabic_block.1
    }

    /// Checks every inventory invariant, naming the violated rule.
    pub fn validate(&self) -> Result<(), InventoryError> {
        for &c in &self.pashto_unique {
            let cp = c as u32;
            if cp < self.arabic_block.0 || cp > self.arabic_block.1 {
                return Err(InventoryError::UniqueOutsideBlock(cp));
            }
        }
        if let Some(&c) = self
            .stripped_punctuation
            .intersection(&self.pashto_unique)
            .next()
        {
            return Err(InventoryError::PunctuationOverlapsUnique(c as u32));
        }
        for class in &self.strata_classes {
            if class.chars.is_empty() {
                return Err(InventoryError::EmptyClass(class.name.clone()));
            }
            if class.pashto_unique {
                for &c in &class.chars {
                    if !self.pashto_unique.contains(&c) {
                        return Err(InventoryError::FlaggedClassOutsideUnique {
                            class: class.name.clone(),
                            cp: c as u32,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over a canonical rendering of the inventory. Printed in every
    /// report; evaluations are comparable only when checksums match.
    pub fn checksum(&self) -> String {
        let mut canon = String::new();
        canon.push_str("pashto_unique:");
        for &c in &self.pashto_unique {
            let _ = write!(canon, " {:04X}", c as u32);
        }
        canon.push_str("\npunctuation:");
        for &c in &self.stripped_punctuation {
            let _ = write!(canon, " {:04X}", c as u32);
        }
        let _ = write!(canon, "\nkashida: {:04X}", self.kashida as u32);
        let _ = write!(
            canon,
            "\nblock: {:04X}-{:04X}",
            self.arabic_block.0, self.arabic_block.1
        );
        for class in &self.strata_classes {
            let _ = write!(canon, "\nclass {} unique={}:", class.name, class.pashto_unique);
            for &c in &class.chars {
                let _ = write!(canon, " {:04X}", c as u32);
            }
        }
        let digest = Sha256::digest(canon.as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }

    /// Applies an override parsed from TOML and revalidates.
    pub fn merge(&mut self, over: &InventoryOverride) -> Result<(), InventoryError> {
        for s in &over.add_pashto_unique {
            self.pashto_unique.extend(s.chars());
        }
        for s in &over.add_stripped_punctuation {
            self.stripped_punctuation.extend(s.chars());
        }
        for spec in &over.class {
            let class = CharClass {
                name: spec.name.clone(),
                chars: spec.chars.iter().flat_map(|s| s.chars()).collect(),
                pashto_unique: spec.pashto_unique,
            };
            match self.strata_classes.iter_mut().find(|c| c.name == class.name) {
                Some(existing) => *existing = class,
                None => self.strata_classes.push(class),
            }
        }
        self.validate()
    }
}

impl Default for CharacterInventory {
    fn default() -> Self {
        Self::default_inventory()
    }
}

/// Inventory override as it appears in a TOML config file. Character lists
/// are strings; every char of every string is added.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InventoryOverride {
    #[serde(default)]
    pub add_pashto_unique: Vec<String>,
    #[serde(default)]
    pub add_stripped_punctuation: Vec<String>,
    #[serde(default)]
    pub class: Vec<ClassOverride>,
}

/// One class entry in an override file. Replaces a default class with the
/// same name, otherwise appends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassOverride {
    pub name: String,
    pub chars: Vec<String>,
    #[serde(default)]
    pub pashto_unique: bool,
}

/// Returns the built-in inventory merged with an optional TOML override,
/// validated.
pub fn load_inventory(override_toml: Option<&str>) -> Result<CharacterInventory, InventoryError> {
    let mut inv = CharacterInventory::default_inventory();
    if let Some(text) = override_toml {
        let over: InventoryOverride = toml::from_str(text)?;
        inv.merge(&over)?;
    } else {
        inv.validate()?;
    }
    Ok(inv)
}
