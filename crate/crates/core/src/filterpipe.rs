//! Annotation-driven curation: keyword acceptance and behavior tagging.
//!
//! Matching is purely lexical. Tokens are lowercased alphanumeric runs reduced
//! by [`stem`]; a keyword matches when its own stem equals a token stem.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{to_canonical_json, FormatError, MotionSequence};
use crate::trajectory::BehaviorClass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("keyword list is empty")]
    NoKeywords,
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl FilterError {
    pub fn code(&self) -> &'static str {
        match self {
            FilterError::NoKeywords => "no_keywords",
            FilterError::Format(e) => e.code(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Walking,
    Running,
    Standing,
    Falling,
    Other,
}

impl Tag {
    pub const ALL: [Tag; 5] = [Tag::Walking, Tag::Running, Tag::Standing, Tag::Falling, Tag::Other];

    /// Order used to pick a single primary tag from a multi-tag set.
    const PRIMARY_ORDER: [Tag; 5] = [Tag::Falling, Tag::Running, Tag::Walking, Tag::Standing, Tag::Other];

    pub fn label(&self) -> &'static str {
        match self {
            Tag::Walking => "walking",
            Tag::Running => "running",
            Tag::Standing => "standing",
            Tag::Falling => "falling",
            Tag::Other => "other",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Acceptance keywords plus per-tag stem lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagConfig {
    pub keywords: Vec<String>,
    pub tags: BTreeMap<Tag, Vec<String>>,
}

impl Default for TagConfig {
    fn default() -> Self {
        let words = |w: &[&str]| w.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        TagConfig {
            keywords: words(&["walk", "run", "jog", "cross", "step", "stroll", "stride", "stand", "wait", "fall", "stumble"]),
            tags: BTreeMap::from([
                (Tag::Walking, words(&["walk", "stroll", "stride", "step", "cross", "wander", "march"])),
                (Tag::Running, words(&["run", "jog", "sprint", "dash"])),
                (Tag::Standing, words(&["stand", "wait", "idle", "stay"])),
                (Tag::Falling, words(&["fall", "stumble", "trip"])),
            ]),
        }
    }
}

impl TagConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        if self.keywords.is_empty() {
            return Err(FilterError::NoKeywords);
        }
        if self.tags.contains_key(&Tag::Other) {
            return Err(FormatError::invalid("reserved_tag", "`other` is assigned automatically and cannot list stems").into());
        }
        Ok(())
    }
}

pub fn read_tag_config(bytes: &[u8]) -> Result<TagConfig, FilterError> {
    let cfg: TagConfig = crate::io::from_json(bytes)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_tag_config(cfg: &TagConfig) -> Result<Vec<u8>, FilterError> {
    cfg.validate()?;
    Ok(to_canonical_json(cfg))
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn undouble(word: &mut String) {
    let b = word.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        word.pop();
    }
}

/// Light suffix stripper: `-ing`, `-ed`, plural `-s` (not `-ss`), then a trailing `e`.
///
/// Doubled final consonants left by `-ing`/`-ed` are undoubled except `ll`, `ss`, `zz`.
pub fn stem(word: &str) -> String {
    let mut s = word.to_lowercase();
    if s.len() > 4 && s.ends_with("ing") {
        s.truncate(s.len() - 3);
        undouble(&mut s);
    } else if s.len() > 3 && s.ends_with("ed") {
        s.truncate(s.len() - 2);
        undouble(&mut s);
    } else if s.len() > 3 && s.ends_with('s') && !s.ends_with("ss") {
        s.pop();
    }
    if s.len() > 3 && s.ends_with('e') {
        s.pop();
    }
    s
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Keywords (as given) whose stem occurs among the annotation's token stems.
pub fn matching_keywords(annotation: &str, keywords: &[String]) -> Vec<String> {
    let stems: BTreeSet<String> = tokenize(annotation).iter().map(|t| stem(t)).collect();
    keywords.iter().filter(|k| stems.contains(&stem(k))).cloned().collect()
}

/// Anything carrying an id and a free-text annotation.
pub trait Annotated {
    fn id(&self) -> &str;
    fn annotation(&self) -> &str;
}

impl Annotated for MotionSequence {
    fn id(&self) -> &str {
        &self.id
    }

    fn annotation(&self) -> &str {
        &self.annotation
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedItem {
    pub id: String,
    pub annotation: String,
}

impl Annotated for AnnotatedItem {
    fn id(&self) -> &str {
        &self.id
    }

    fn annotation(&self) -> &str {
        &self.annotation
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub id: String,
    pub accepted: bool,
    pub matched: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterOutcome<T> {
    pub accepted: Vec<T>,
    pub report: Vec<FilterDecision>,
}

/// Keeps items whose annotation matches at least one keyword, preserving input order.
pub fn keyword_filter<T: Annotated + Clone>(corpus: &[T], keywords: &[String]) -> Result<FilterOutcome<T>, FilterError> {
    if keywords.is_empty() {
        return Err(FilterError::NoKeywords);
    }
    let mut accepted = Vec::new();
    let mut report = Vec::with_capacity(corpus.len());
    for item in corpus {
        let matched = matching_keywords(item.annotation(), keywords);
        let ok = !matched.is_empty();
        if ok {
            accepted.push(item.clone());
        }
        report.push(FilterDecision { id: item.id().to_string(), accepted: ok, matched });
    }
    Ok(FilterOutcome { accepted, report })
}

/// One JSON object per line, in corpus order.
pub fn write_filter_report(report: &[FilterDecision]) -> Vec<u8> {
    let mut out = Vec::new();
    for d in report {
        serde_json::to_writer(&mut out, d).expect("in-memory serialization of plain data cannot fail");
        out.push(b'\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    pub tags: BTreeSet<Tag>,
    pub matched: Vec<String>,
}

impl TagSet {
    pub fn primary(&self) -> Tag {
        Tag::PRIMARY_ORDER.into_iter().find(|t| self.tags.contains(t)).unwrap_or(Tag::Other)
    }
}

pub fn tag_behavior(annotation: &str, cfg: &TagConfig) -> TagSet {
    let stems: BTreeSet<String> = tokenize(annotation).iter().map(|t| stem(t)).collect();
    let mut tags = BTreeSet::new();
    let mut matched = Vec::new();
    for (tag, words) in &cfg.tags {
        for w in words {
            if stems.contains(&stem(w)) {
                tags.insert(*tag);
                matched.push(w.clone());
            }
        }
    }
    if tags.is_empty() {
        tags.insert(Tag::Other);
    }
    TagSet { tags, matched }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCounts {
    pub motions: usize,
    /// Multi-label counts: a motion adds one to every tag it carries.
    pub tags: BTreeMap<Tag, usize>,
    /// Single-label counts by [`TagSet::primary`]; sums to `motions`.
    pub primary: BTreeMap<Tag, usize>,
}

impl Default for TagCounts {
    fn default() -> Self {
        let zeros: BTreeMap<Tag, usize> = Tag::ALL.into_iter().map(|t| (t, 0)).collect();
        TagCounts { motions: 0, tags: zeros.clone(), primary: zeros }
    }
}

pub const UNCLASSIFIED: &str = "unclassified";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagDistribution {
    pub total: usize,
    pub by_class: BTreeMap<String, TagCounts>,
}

/// Tag counts per behavior class. The three classes are always present;
/// motions without a class are collected under [`UNCLASSIFIED`].
pub fn tag_distribution(items: &[(TagSet, Option<BehaviorClass>)]) -> TagDistribution {
    let mut by_class: BTreeMap<String, TagCounts> =
        BehaviorClass::ALL.iter().map(|c| (c.label().to_string(), TagCounts::default())).collect();
    for (set, class) in items {
        let key = class.map_or(UNCLASSIFIED, |c| c.label());
        let counts = by_class.entry(key.to_string()).or_default();
        counts.motions += 1;
        for t in &set.tags {
            *counts.tags.get_mut(t).expect("all tags pre-seeded") += 1;
        }
        *counts.primary.get_mut(&set.primary()).expect("all tags pre-seeded") += 1;
    }
    TagDistribution { total: items.len(), by_class }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, text: &str) -> AnnotatedItem {
        AnnotatedItem { id: id.into(), annotation: text.into() }
    }

    fn kw(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn stems() {
        for (w, s) in [
            ("walks", "walk"),
            ("walking", "walk"),
            ("walked", "walk"),
            ("running", "run"),
            ("jogging", "jog"),
            ("falling", "fall"),
            ("falls", "fall"),
            ("stumbles", "stumbl"),
            ("stumble", "stumbl"),
            ("crosses", "cross"),
            ("cross", "cross"),
            ("crossing", "cross"),
            ("strolling", "stroll"),
            ("stepped", "step"),
            ("is", "is"),
            ("across", "across"),
        ] {
            assert_eq!(stem(w), s, "{w}");
        }
    }

    #[test]
    fn accept_and_reject() {
        let corpus = vec![item("a", "a person walks forward"), item("b", "a person plays violin")];
        let out = keyword_filter(&corpus, &kw(&["walk"])).unwrap();
        assert_eq!(out.accepted, vec![corpus[0].clone()]);
        assert_eq!(out.report[0].matched, kw(&["walk"]));
        assert!(!out.report[1].accepted);
        assert!(out.report[1].matched.is_empty());
        assert_eq!(keyword_filter::<AnnotatedItem>(&[], &kw(&["walk"])).unwrap().accepted.len(), 0);
        assert_eq!(keyword_filter(&corpus, &[]).unwrap_err().code(), "no_keywords");
    }

    #[test]
    fn tags_from_default_lists() {
        let cfg = TagConfig::default();
        let set = |t: &[Tag]| t.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(tag_behavior("the person runs across", &cfg).tags, set(&[Tag::Running]));
        assert_eq!(tag_behavior("someone stands still then waves", &cfg).tags, set(&[Tag::Standing]));
        assert_eq!(
            tag_behavior("jogging then stumbles and falls", &cfg).tags,
            set(&[Tag::Running, Tag::Falling])
        );
        assert_eq!(tag_behavior("a person plays violin", &cfg).tags, set(&[Tag::Other]));
    }

    #[test]
    fn empty_distribution_is_zero() {
        let d = tag_distribution(&[]);
        assert_eq!(d.total, 0);
        assert_eq!(d.by_class.len(), 3);
        assert!(d.by_class.values().all(|c| c.motions == 0 && c.tags.values().all(|v| *v == 0)));
    }

    #[test]
    fn hand_counted_fixture() {
        let cfg = TagConfig::default();
        let fixture: [(&str, Option<BehaviorClass>); 10] = [
            ("a man walks across the street", Some(BehaviorClass::Crossing)),
            ("a woman runs forward quickly", Some(BehaviorClass::Crossing)),
            ("someone jogging then stumbles and falls", Some(BehaviorClass::Crossing)),
            ("person stands and waits at the curb", Some(BehaviorClass::NotCrossing)),
            ("a person waves both arms", Some(BehaviorClass::NotCrossing)),
            ("the person steps forward then stops", Some(BehaviorClass::Attempting)),
            ("walking slowly then standing", Some(BehaviorClass::Attempting)),
            ("a child trips over", Some(BehaviorClass::Attempting)),
            ("strolling casually", Some(BehaviorClass::Crossing)),
            ("juggling balls", None),
        ];
        let items: Vec<_> = fixture.iter().map(|(t, c)| (tag_behavior(t, &cfg), *c)).collect();
        let d = tag_distribution(&items);
        assert_eq!(d.total, 10);
        let crossing = &d.by_class["crossing"];
        assert_eq!(crossing.motions, 4);
        assert_eq!(crossing.tags[&Tag::Walking], 2);
        assert_eq!(crossing.tags[&Tag::Running], 2);
        assert_eq!(crossing.tags[&Tag::Falling], 1);
        assert_eq!(crossing.primary[&Tag::Walking], 2);
        assert_eq!(crossing.primary[&Tag::Running], 1);
        assert_eq!(crossing.primary[&Tag::Falling], 1);
        let not = &d.by_class["not_crossing"];
        assert_eq!((not.motions, not.tags[&Tag::Standing], not.tags[&Tag::Other]), (2, 1, 1));
        let attempt = &d.by_class["attempting"];
        assert_eq!(attempt.motions, 3);
        assert_eq!(attempt.tags[&Tag::Walking], 2);
        assert_eq!(attempt.tags[&Tag::Standing], 1);
        assert_eq!(attempt.tags[&Tag::Falling], 1);
        assert_eq!(d.by_class[UNCLASSIFIED].tags[&Tag::Other], 1);
        let primary_total: usize = d.by_class.values().flat_map(|c| c.primary.values()).sum();
        assert_eq!(primary_total, 10);

        let mut reversed = items.clone();
        reversed.reverse();
        assert_eq!(tag_distribution(&reversed), d);
    }

    #[test]
    fn config_round_trip_and_report() {
        let cfg = TagConfig::default();
        let bytes = write_tag_config(&cfg).unwrap();
        assert_eq!(read_tag_config(&bytes).unwrap(), cfg);
        let report = keyword_filter(&[item("x", "Walking!")], &cfg.keywords).unwrap().report;
        assert_eq!(
            String::from_utf8(write_filter_report(&report)).unwrap(),
            "{\"id\":\"x\",\"accepted\":true,\"matched\":[\"walk\"]}\n"
        );
    }
}
