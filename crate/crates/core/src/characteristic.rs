//! The six scored LIDC morphology characteristics and the seven question
//! categories built on top of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Characteristic {
    Sphericity,
    Margin,
    Texture,
    Lobulation,
    Spiculation,
    Calcification,
}

impl Characteristic {
    pub const ALL: [Characteristic; 6] = [
        Characteristic::Sphericity,
        Characteristic::Margin,
        Characteristic::Texture,
        Characteristic::Lobulation,
        Characteristic::Spiculation,
        Characteristic::Calcification,
    ];

    /// The characteristics that carry the headline agreement numbers.
    pub const HEADLINE: [Characteristic; 3] = [
        Characteristic::Sphericity,
        Characteristic::Margin,
        Characteristic::Texture,
    ];

    pub const SECONDARY: [Characteristic; 3] = [
        Characteristic::Spiculation,
        Characteristic::Lobulation,
        Characteristic::Calcification,
    ];

    /// Lower-case name, identical to the LIDC XML element name.
    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Sphericity => "sphericity",
            Characteristic::Margin => "margin",
            Characteristic::Texture => "texture",
            Characteristic::Lobulation => "lobulation",
            Characteristic::Spiculation => "spiculation",
            Characteristic::Calcification => "calcification",
        }
    }

    /// Highest legal score; the lowest is always 1.
    pub fn max_score(self) -> u8 {
        match self {
            Characteristic::Calcification => 6,
            _ => 5,
        }
    }

    /// Difference between the largest and smallest legal score.
    pub fn d_max(self) -> u8 {
        self.max_score() - 1
    }

    pub fn contains(self, score: i64) -> bool {
        (1..=i64::from(self.max_score())).contains(&score)
    }

    pub fn scores(self) -> impl Iterator<Item = u8> {
        1..=self.max_score()
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Characteristic::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown characteristic `{s}`")))
    }
}

/// Question category: one overall finding plus one per characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Overall,
    Sphericity,
    Margin,
    Texture,
    Spiculation,
    Lobulation,
    Calcification,
}

impl Category {
    /// Question order used when emitting the seven items of a nodule.
    pub const ALL: [Category; 7] = [
        Category::Overall,
        Category::Sphericity,
        Category::Margin,
        Category::Texture,
        Category::Spiculation,
        Category::Lobulation,
        Category::Calcification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Overall => "overall",
            Category::Sphericity => "sphericity",
            Category::Margin => "margin",
            Category::Texture => "texture",
            Category::Spiculation => "spiculation",
            Category::Lobulation => "lobulation",
            Category::Calcification => "calcification",
        }
    }

    /// The question prompt, byte-exact.
    pub fn question(self) -> &'static str {
        match self {
            Category::Overall => "Describe this image.",
            Category::Sphericity => "What is the morphological shape of this nodule?",
            Category::Margin => "What is the clarity of the nodule's margin?",
            Category::Texture => "What is the internal structure of this nodule?",
            Category::Spiculation => "Does this nodule exhibit spiculation?",
            Category::Lobulation => "Does this nodule exhibit lobulation?",
            Category::Calcification => "What is the type of calcification present in this nodule?",
        }
    }

    pub fn characteristic(self) -> Option<Characteristic> {
        match self {
            Category::Overall => None,
            Category::Sphericity => Some(Characteristic::Sphericity),
            Category::Margin => Some(Characteristic::Margin),
            Category::Texture => Some(Characteristic::Texture),
            Category::Spiculation => Some(Characteristic::Spiculation),
            Category::Lobulation => Some(Characteristic::Lobulation),
            Category::Calcification => Some(Characteristic::Calcification),
        }
    }
}

impl From<Characteristic> for Category {
    fn from(c: Characteristic) -> Self {
        match c {
            Characteristic::Sphericity => Category::Sphericity,
            Characteristic::Margin => Category::Margin,
            Characteristic::Texture => Category::Texture,
            Characteristic::Lobulation => Category::Lobulation,
            Characteristic::Spiculation => Category::Spiculation,
            Characteristic::Calcification => Category::Calcification,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown question category `{s}`")))
    }
}

/// One representative score per characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacteristicProfile {
    pub sphericity: u8,
    pub margin: u8,
    pub texture: u8,
    pub lobulation: u8,
    pub spiculation: u8,
    pub calcification: u8,
}

impl CharacteristicProfile {
    /// Builds a profile from a score lookup, validating every range.
    pub fn try_from_fn(mut score: impl FnMut(Characteristic) -> i64) -> Result<Self> {
        let mut profile = CharacteristicProfile {
            sphericity: 1,
            margin: 1,
            texture: 1,
            lobulation: 1,
            spiculation: 1,
            calcification: 1,
        };
        for c in Characteristic::ALL {
            let value = score(c);
            if !c.contains(value) {
                return Err(Error::OutOfRange {
                    nodule: "profile".into(),
                    field: c.name().into(),
                    value,
                });
            }
            *profile.slot(c) = value as u8;
        }
        Ok(profile)
    }

    /// The lowest score of every characteristic.
    pub fn minimum() -> Self {
        CharacteristicProfile {
            sphericity: 1,
            margin: 1,
            texture: 1,
            lobulation: 1,
            spiculation: 1,
            calcification: 1,
        }
    }

    pub fn get(&self, c: Characteristic) -> u8 {
        match c {
            Characteristic::Sphericity => self.sphericity,
            Characteristic::Margin => self.margin,
            Characteristic::Texture => self.texture,
            Characteristic::Lobulation => self.lobulation,
            Characteristic::Spiculation => self.spiculation,
            Characteristic::Calcification => self.calcification,
        }
    }

    /// Sets one score; panics when it is outside the characteristic's range.
    pub fn with(mut self, c: Characteristic, score: u8) -> Self {
        assert!(c.contains(i64::from(score)), "{c} score {score} out of range");
        *self.slot(c) = score;
        self
    }

    fn slot(&mut self, c: Characteristic) -> &mut u8 {
        match c {
            Characteristic::Sphericity => &mut self.sphericity,
            Characteristic::Margin => &mut self.margin,
            Characteristic::Texture => &mut self.texture,
            Characteristic::Lobulation => &mut self.lobulation,
            Characteristic::Spiculation => &mut self.spiculation,
            Characteristic::Calcification => &mut self.calcification,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert!(Characteristic::Calcification.contains(6));
        assert!(!Characteristic::Sphericity.contains(6));
        assert!(!Characteristic::Margin.contains(0));
        assert_eq!(Characteristic::Texture.d_max(), 4);
        assert_eq!(Characteristic::Calcification.d_max(), 5);
    }

    #[test]
    fn profile_rejects_out_of_range() {
        let err = CharacteristicProfile::try_from_fn(|c| if c == Characteristic::Sphericity { 7 } else { 1 })
            .unwrap_err();
        assert!(err.to_string().contains("sphericity out of range"), "{err}");
    }

    #[test]
    fn category_round_trips_names() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
    }
}
