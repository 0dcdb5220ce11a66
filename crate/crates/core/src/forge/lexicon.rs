use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::characteristic::Characteristic;
use crate::error::{Error, Result};
use crate::metrics::tokenize;

const DEFAULT_LEXICON: &str = include_str!("../../data/default.lexicon");

/// Score-to-phrase tables for every characteristic, plus the sentence
/// templates used to compose the overall finding.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseLexicon {
    version: String,
    /// `phrases[c][score - 1]`
    phrases: BTreeMap<Characteristic, Vec<String>>,
    core_template: String,
    clause_templates: BTreeMap<Characteristic, String>,
    absent: BTreeMap<Characteristic, u8>,
    /// Every phrase in token form, longest first.
    matchers: Vec<(Vec<String>, Characteristic, u8)>,
}

/// One phrase occurrence found in a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhraseMatch {
    pub characteristic: Characteristic,
    pub score: u8,
    pub start: usize,
    pub len: usize,
}

impl Default for PhraseLexicon {
    fn default() -> Self {
        PhraseLexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

fn placeholder(c: Characteristic) -> String {
    format!("{{{}}}", c.name())
}

impl PhraseLexicon {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PhraseLexicon::parse(&text)
    }

    /// Parses the `key = value` lexicon format and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut phrases: BTreeMap<Characteristic, Vec<Option<String>>> = Characteristic::ALL
            .iter()
            .map(|&c| (c, vec![None; c.max_score() as usize]))
            .collect();
        let mut core_template = None;
        let mut clause_templates = BTreeMap::new();
        let mut absent = BTreeMap::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Lexicon {
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("empty value for `{key}`")));
            }

            if key == "version" {
                version = Some(value.to_string());
                continue;
            }
            let (head, tail) = key
                .split_once('.')
                .ok_or_else(|| err(format!("unknown key `{key}`")))?;
            match head {
                "template" if tail == "core" => core_template = Some(value.to_string()),
                "template" => {
                    let c = tail.parse::<Characteristic>().map_err(|e| err(e.to_string()))?;
                    clause_templates.insert(c, value.to_string());
                }
                "absent" => {
                    let c = tail.parse::<Characteristic>().map_err(|e| err(e.to_string()))?;
                    let score: u8 = value
                        .parse()
                        .ok()
                        .filter(|s| c.contains(i64::from(*s)))
                        .ok_or_else(|| err(format!("absent level `{value}` out of range for {c}")))?;
                    absent.insert(c, score);
                }
                _ => {
                    let c = head.parse::<Characteristic>().map_err(|e| err(e.to_string()))?;
                    let score: i64 = tail
                        .parse()
                        .map_err(|_| err(format!("score `{tail}` is not an integer")))?;
                    if !c.contains(score) {
                        return Err(err(format!("{c} out of range ({score})")));
                    }
                    let slot = &mut phrases.get_mut(&c).expect("all present")[score as usize - 1];
                    if slot.is_some() {
                        return Err(err(format!("{c}.{score} bound twice")));
                    }
                    *slot = Some(value.to_string());
                }
            }
        }

        let missing = |what: &str| Error::Lexicon {
            line: 0,
            message: format!("missing {what}"),
        };
        let version = version.ok_or_else(|| missing("version"))?;
        let core_template = core_template.ok_or_else(|| missing("template.core"))?;
        let mut complete = BTreeMap::new();
        for (c, slots) in phrases {
            let mut table = Vec::with_capacity(slots.len());
            for (k, slot) in slots.into_iter().enumerate() {
                table.push(slot.ok_or_else(|| missing(&format!("{c}.{}", k + 1)))?);
            }
            complete.insert(c, table);
        }
        PhraseLexicon::build(version, complete, core_template, clause_templates, absent)
    }

    fn build(
        version: String,
        phrases: BTreeMap<Characteristic, Vec<String>>,
        core_template: String,
        clause_templates: BTreeMap<Characteristic, String>,
        absent: BTreeMap<Characteristic, u8>,
    ) -> Result<Self> {
        let invalid = |message: String| Error::Lexicon { line: 0, message };

        let mut matchers = Vec::new();
        for (&c, table) in &phrases {
            let tokenized: Vec<Vec<String>> =
                table.iter().map(|p| tokenize(p).into_tokens()).collect();
            for (i, a) in tokenized.iter().enumerate() {
                if a.is_empty() {
                    return Err(invalid(format!("{c}.{} has no tokens", i + 1)));
                }
                for (j, b) in tokenized.iter().enumerate() {
                    if i != j && contains_run(b, a) {
                        return Err(invalid(format!(
                            "{c}.{} \"{}\" is contained in {c}.{} \"{}\"",
                            i + 1,
                            table[i],
                            j + 1,
                            table[j]
                        )));
                    }
                }
                if let Some((_, other, s)) = matchers.iter().find(|(t, _, _)| t == a) {
                    return Err(invalid(format!(
                        "{c}.{} \"{}\" duplicates {other}.{s}",
                        i + 1,
                        table[i]
                    )));
                }
                matchers.push((a.clone(), c, i as u8 + 1));
            }
        }
        // longest first; ties resolved by characteristic then score
        matchers.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then((a.1, a.2).cmp(&(b.1, b.2))));

        for c in Characteristic::ALL {
            let in_core = core_template.contains(&placeholder(c));
            let clause = clause_templates.get(&c);
            match (in_core, clause) {
                (true, Some(_)) => {
                    return Err(invalid(format!("{c} is placed in both template.core and template.{c}")))
                }
                (false, None) => return Err(invalid(format!("{c} has no template"))),
                (false, Some(t)) if !t.contains(&placeholder(c)) => {
                    return Err(invalid(format!("template.{c} lacks {}", placeholder(c))))
                }
                _ => {}
            }
        }
        for c in Characteristic::HEADLINE {
            if !core_template.contains(&placeholder(c)) {
                return Err(invalid(format!("template.core must contain {}", placeholder(c))));
            }
        }
        for (c, t) in &clause_templates {
            for other in Characteristic::ALL {
                if other != *c && t.contains(&placeholder(other)) {
                    return Err(invalid(format!("template.{c} may only mention {}", placeholder(*c))));
                }
            }
        }

        let lexicon = PhraseLexicon {
            version,
            phrases,
            core_template,
            clause_templates,
            absent,
            matchers,
        };
        // template literals must not themselves read as a phrase
        let templates = std::iter::once(&lexicon.core_template).chain(lexicon.clause_templates.values());
        for t in templates {
            let mut literal = t.clone();
            for c in Characteristic::ALL {
                literal = literal.replace(&placeholder(c), " \u{1f} ");
            }
            for segment in literal.split('\u{1f}') {
                if let Some(m) = lexicon.find_phrases(tokenize(segment).tokens()).first() {
                    return Err(invalid(format!(
                        "template text \"{}\" contains the {} phrase \"{}\"",
                        segment.trim(),
                        m.characteristic,
                        lexicon.phrase(m.characteristic, m.score)
                    )));
                }
            }
        }
        Ok(lexicon)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Phrase for a score; panics when out of range (see [`Self::phrase_for`]).
    pub fn phrase(&self, c: Characteristic, score: u8) -> &str {
        &self.phrases[&c][score as usize - 1]
    }

    /// Valid phrase lookup.
    pub fn phrase_for(&self, c: Characteristic, score: i64) -> Result<&str> {
        if !c.contains(score) {
            return Err(Error::OutOfRange {
                nodule: "phrase lookup".into(),
                field: c.name().into(),
                value: score,
            });
        }
        Ok(self.phrase(c, score as u8))
    }

    /// Inverse lookup on the tokenized form of `phrase`.
    pub fn score_for(&self, c: Characteristic, phrase: &str) -> Option<u8> {
        let tokens = tokenize(phrase).into_tokens();
        self.matchers
            .iter()
            .find(|(t, k, _)| *k == c && *t == tokens)
            .map(|(_, _, s)| *s)
    }

    pub fn core_template(&self) -> &str {
        &self.core_template
    }

    /// The clause for `c`, when it is not part of the core sentence.
    pub fn clause_template(&self, c: Characteristic) -> Option<&str> {
        self.clause_templates.get(&c).map(String::as_str)
    }

    /// Score at which the clause for `c` is left out.
    pub fn absent_level(&self, c: Characteristic) -> Option<u8> {
        self.absent.get(&c).copied()
    }

    /// Left-to-right, longest-match-first scan for lexicon phrases.
    pub fn find_phrases(&self, tokens: &[String]) -> Vec<PhraseMatch> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = self
                .matchers
                .iter()
                .find(|(t, _, _)| tokens[i..].starts_with(t));
            match hit {
                Some((t, c, s)) => {
                    out.push(PhraseMatch {
                        characteristic: *c,
                        score: *s,
                        start: i,
                        len: t.len(),
                    });
                    i += t.len();
                }
                None => i += 1,
            }
        }
        out
    }

    /// Canonical text form; parses back to an equal lexicon.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version = {}", self.version);
        for (c, table) in &self.phrases {
            for (k, p) in table.iter().enumerate() {
                let _ = writeln!(out, "{c}.{} = {p}", k + 1);
            }
        }
        let _ = writeln!(out, "template.core = {}", self.core_template);
        for (c, t) in &self.clause_templates {
            let _ = writeln!(out, "template.{c} = {t}");
        }
        for (c, s) in &self.absent {
            let _ = writeln!(out, "absent.{c} = {s}");
        }
        out
    }

    /// SHA-256 of [`Self::to_text`], hex encoded.
    pub fn checksum(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_text().as_bytes()))
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    needle.len() <= haystack.len() && haystack.windows(needle.len()).any(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lexicon_loads() {
        let lex = PhraseLexicon::default();
        assert_eq!(lex.version(), "lidc-default-1");
        assert_eq!(lex.phrase(Characteristic::Sphericity, 4), "nearly round");
        assert_eq!(lex.phrase(Characteristic::Margin, 4), "mostly well-defined");
        assert_eq!(lex.phrase(Characteristic::Texture, 5), "solid");
        assert_eq!(lex.phrase(Characteristic::Sphericity, 3), "oval");
        assert_eq!(lex.absent_level(Characteristic::Calcification), Some(6));
    }

    #[test]
    fn phrase_for_rejects_out_of_range() {
        let lex = PhraseLexicon::default();
        assert!(lex.phrase_for(Characteristic::Sphericity, 6).is_err());
        assert!(lex.phrase_for(Characteristic::Calcification, 0).is_err());
        assert_eq!(lex.phrase_for(Characteristic::Calcification, 6).unwrap(), "no calcification");
    }

    #[test]
    fn inverse_lookup_covers_every_cell() {
        let lex = PhraseLexicon::default();
        let mut cells = 0;
        for c in Characteristic::ALL {
            for s in c.scores() {
                assert_eq!(lex.score_for(c, lex.phrase(c, s)), Some(s));
                cells += 1;
            }
        }
        assert_eq!(cells, 31);
        assert_eq!(lex.score_for(Characteristic::Margin, "mostly well - defined"), Some(4));
    }

    #[test]
    fn text_form_round_trips() {
        let lex = PhraseLexicon::default();
        let again = PhraseLexicon::parse(&lex.to_text()).unwrap();
        assert_eq!(lex, again);
        assert_eq!(lex.checksum(), again.checksum());
    }

    #[test]
    fn substring_phrases_rejected() {
        let text = DEFAULT_LEXICON.replace("sphericity.5 = spherical", "sphericity.5 = round");
        let err = PhraseLexicon::parse(&text).unwrap_err();
        assert!(err.to_string().contains("contained in"), "{err}");
    }

    #[test]
    fn missing_and_duplicate_cells_rejected() {
        let text = DEFAULT_LEXICON.replace("margin.3 = moderately defined\n", "");
        assert!(PhraseLexicon::parse(&text).unwrap_err().to_string().contains("missing margin.3"));
        let text = format!("{DEFAULT_LEXICON}\nmargin.3 = vague\n");
        assert!(PhraseLexicon::parse(&text).unwrap_err().to_string().contains("bound twice"));
        let text = DEFAULT_LEXICON.replace("texture.5 = solid", "texture.7 = solid");
        assert!(PhraseLexicon::parse(&text).is_err());
    }

    #[test]
    fn template_must_place_headline_characteristics() {
        let text = DEFAULT_LEXICON.replace(", with {margin} margins", "");
        assert!(PhraseLexicon::parse(&text).is_err());
    }

    #[test]
    fn template_literal_may_not_contain_phrase() {
        let text = DEFAULT_LEXICON.replace("There is {spiculation}.", "Oval: {spiculation}.");
        let err = PhraseLexicon::parse(&text).unwrap_err();
        assert!(err.to_string().contains("template text"), "{err}");
    }

    #[test]
    fn longest_match_wins_across_characteristics() {
        let lex = PhraseLexicon::default();
        let hits = lex.find_phrases(tokenize("It contains solid calcification. Solid internally").tokens());
        let found: Vec<_> = hits.iter().map(|m| (m.characteristic, m.score)).collect();
        assert_eq!(
            found,
            vec![(Characteristic::Calcification, 3), (Characteristic::Texture, 5)]
        );
    }
}
