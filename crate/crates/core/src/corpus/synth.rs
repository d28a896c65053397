//! Template-based synthetic corpus.
//!
//! Sentences are assembled from phrase templates with hand-built
//! dependency trees, so gold event locations are known by construction.
//! The annotation layer is deliberately imperfect: place names are
//! sometimes mislabeled by the entity tagger and locative attachments are
//! sometimes given to the wrong head, the way an automatic pipeline would.
//! Gold labels are never affected by that noise.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AnnotatedSentence, Corpus, CorpusError, EventAnnotation, Token};
use crate::features::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    /// One event verb with its location.
    Simple,
    /// Subordinate event, main event and a reporting clause, each with its own places.
    TwoEvent,
    /// Reporting verb (never located) governing a located event.
    SaidClause,
    /// Two clauses, each verb with its own place.
    Coordination,
    /// Events without a location, often next to a place used as origin or actor.
    NoLocation,
    /// Fronted locative separated from its verb by a long adjunct.
    Fronted,
}

impl Template {
    pub const ALL: [Template; 6] = [
        Template::Simple,
        Template::TwoEvent,
        Template::SaidClause,
        Template::Coordination,
        Template::NoLocation,
        Template::Fronted,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Template::Simple => "simple",
            Template::TwoEvent => "two-event",
            Template::SaidClause => "said-clause",
            Template::Coordination => "coordination",
            Template::NoLocation => "no-location",
            Template::Fronted => "fronted",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Template::ALL
            .iter()
            .find(|t| t.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown template {s:?}"))
    }
}

/// A verb that can carry a location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventVerb {
    pub past: String,
    pub gerund: String,
    /// Object noun phrase for oblique frames ("an offensive").
    pub object: Option<String>,
    /// Preposition introducing the place for oblique frames ("on").
    pub prep: Option<String>,
}

impl EventVerb {
    /// Parses `past/gerund/object/prep`; empty object and prep mean the place is the direct object.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let parts: Vec<&str> = spec.split('/').collect();
        if parts.len() != 4 || parts[0].is_empty() || parts[1].is_empty() {
            return Err(format!("bad verb entry {spec:?}"));
        }
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        Ok(EventVerb {
            past: parts[0].into(),
            gerund: parts[1].into(),
            object: opt(parts[2]),
            prep: opt(parts[3]),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    /// Place names; spaces separate tokens, an optional `|LABEL` suffix sets the entity label.
    pub places: Vec<String>,
    pub event_verbs: Vec<EventVerb>,
    pub reporting_verbs: Vec<String>,
    /// Subject phrases as `word/POS[/NER]` tokens; the last token is the head.
    pub actors: Vec<String>,
}

const PLACES: &[&str] = &[
    "Aleppo", "Homs", "Hama", "Idlib", "Raqqa", "Tadif", "Al-Bab", "Bza'a", "Jarablus", "Kobane",
    "Manbij", "Palmyra", "Daraa", "Latakia", "Afrin", "Azaz", "Qamishli", "Douma", "Tartus",
    "Mosul", "Kirkuk", "Tikrit", "Ramadi", "Fallujah", "Sirte", "Benghazi", "Misrata", "Aden",
    "Taiz", "Hodeidah", "Gao", "Kidal", "Mogadishu", "Kismayo", "Donetsk", "Luhansk", "Mariupol",
    "Kharkiv", "Kandahar", "Kunduz", "Deir ez-Zor", "Tal Abyad", "Khan Shaykhun", "Abu Kamal",
    "East Ghouta|LOC", "Wadi Barada|LOC", "Tal Rifaat", "Ras al-Ain", "Sinjar Mountains|LOC",
    "Al Qaim", "Tell Tamer", "Jisr al Shughur", "Maarat al Numan", "Khan al Asal",
    "Bab al Hawa", "Sheikh Maqsoud district|LOC", "Tell al Zaatar", "Wadi al Deif|LOC",
];

const EVENT_VERBS: &[&str] = &[
    "launched/launching/an offensive/on",
    "carried out/carrying out/air strikes/on",
    "established/establishing/a foothold/in",
    "clashed/clashing/with militants/in",
    "deployed/deploying/troops/to",
    "staged/staging/a protest/in",
    "opened/opening/fire/in",
    "shelled/shelling//",
    "captured/capturing//",
    "attacked/attacking//",
    "bombed/bombing//",
    "seized/seizing//",
    "stormed/storming//",
    "besieged/besieging//",
    "entered/entering//",
    "raided/raiding//",
];

const REPORTING_VERBS: &[&str] = &[
    "said", "announced", "reported", "claimed", "warned", "stated", "confirmed", "denied",
];

const ACTORS: &[&str] = &[
    "the/DET Turkish/ADJ/NORP Army/PROPN/ORG",
    "allied/ADJ Syrian/ADJ/NORP rebels/NOUN",
    "government/NOUN forces/NOUN",
    "Kurdish/ADJ/NORP fighters/NOUN",
    "the/DET coalition/NOUN",
    "Islamic/PROPN/ORG State/PROPN/ORG militants/NOUN",
    "opposition/NOUN groups/NOUN",
    "Russian/ADJ/NORP jets/NOUN",
    "Hezbollah/PROPN/ORG fighters/NOUN",
    "the/DET rebels/NOUN",
    "Iraqi/ADJ/NORP troops/NOUN",
    "protesters/NOUN",
    "Ankara/PROPN/GPE",
    "Damascus/PROPN/GPE",
    "Moscow/PROPN/GPE",
    "Washington/PROPN/GPE",
];

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            places: PLACES.iter().map(|s| s.to_string()).collect(),
            event_verbs: EVENT_VERBS
                .iter()
                .map(|s| EventVerb::parse(s).expect("built-in verb entry"))
                .collect(),
            reporting_verbs: REPORTING_VERBS.iter().map(|s| s.to_string()).collect(),
            actors: ACTORS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_sentences: usize,
    pub lexicon: Lexicon,
    /// Relative template weights.
    pub templates: BTreeMap<Template, f64>,
    /// Probability that a place name gets a non-place entity label.
    pub ner_error_rate: f64,
    /// Probability that a locative phrase attaches to the wrong head.
    pub attachment_error_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let templates = [
            (Template::Simple, 0.14),
            (Template::TwoEvent, 0.14),
            (Template::SaidClause, 0.16),
            (Template::Coordination, 0.12),
            (Template::NoLocation, 0.30),
            (Template::Fronted, 0.14),
        ]
        .into_iter()
        .collect();
        SynthConfig {
            n_sentences: 1000,
            lexicon: Lexicon::default(),
            templates,
            ner_error_rate: 0.12,
            attachment_error_rate: 0.15,
        }
    }
}

impl SynthConfig {
    pub fn with_sentences(n: usize) -> Self {
        SynthConfig {
            n_sentences: n,
            ..Default::default()
        }
    }

    /// Restricts generation to a single template.
    pub fn only(mut self, template: Template) -> Self {
        self.templates = [(template, 1.0)].into_iter().collect();
        self
    }
}

/// Generates `config.n_sentences` sentences. Same config and seed give identical output.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<Corpus, CorpusError> {
    let lex = &config.lexicon;
    if lex.places.is_empty() || lex.event_verbs.is_empty() || lex.reporting_verbs.is_empty() {
        return Err(CorpusError::Generator("empty lexicon".into()));
    }
    if lex.actors.is_empty() {
        return Err(CorpusError::Generator("empty actor list".into()));
    }
    let weights: Vec<(Template, f64)> = config
        .templates
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(&t, &w)| (t, w))
        .collect();
    if weights.is_empty() {
        return Err(CorpusError::Generator("no template has positive weight".into()));
    }
    let places: Vec<PlaceName> = lex.places.iter().map(|p| PlaceName::parse(p)).collect();
    let actors: Vec<Vec<Word>> = lex
        .actors
        .iter()
        .map(|a| parse_phrase(a))
        .collect::<Result<_, _>>()
        .map_err(CorpusError::Generator)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut sentences = Vec::with_capacity(config.n_sentences);
    for i in 0..config.n_sentences {
        let mut pick = rng.random::<f64>() * total;
        let mut template = weights[weights.len() - 1].0;
        for &(t, w) in &weights {
            if pick < w {
                template = t;
                break;
            }
            pick -= w;
        }
        let mut g = Gen {
            rng: &mut rng,
            config,
            places: &places,
            actors: &actors,
            b: Builder::default(),
            used_places: HashSet::new(),
        };
        let mut sentence = g.sentence(template);
        sentence.id = Some(format!("synth-{seed}-{i}"));
        sentence.source = Some(format!("synthetic:{template}"));
        let violations = sentence.validate();
        if !violations.is_empty() {
            return Err(CorpusError::Invalid {
                sentence: i,
                line: None,
                violations,
            });
        }
        sentences.push(sentence);
    }
    Ok(Corpus::new(sentences, format!("synthetic(seed={seed})")))
}

#[derive(Debug, Clone)]
struct PlaceName {
    words: Vec<String>,
    label: String,
}

impl PlaceName {
    fn parse(spec: &str) -> Self {
        let (name, label) = match spec.split_once('|') {
            Some((n, l)) => (n, l.to_string()),
            None => (spec, "GPE".to_string()),
        };
        PlaceName {
            words: name.split_whitespace().map(str::to_string).collect(),
            label,
        }
    }
}

#[derive(Debug, Clone)]
struct Word {
    text: String,
    pos: String,
    ner: String,
}

fn parse_phrase(spec: &str) -> Result<Vec<Word>, String> {
    let words: Vec<Word> = spec
        .split_whitespace()
        .map(|w| {
            let mut parts = w.split('/');
            let text = parts.next().unwrap_or_default().to_string();
            let pos = parts.next().unwrap_or("NOUN").to_string();
            let ner = parts.next().unwrap_or("O").to_string();
            Word { text, pos, ner }
        })
        .collect();
    if words.is_empty() || words.iter().any(|w| w.text.is_empty()) {
        return Err(format!("bad phrase {spec:?}"));
    }
    Ok(words)
}

const DETERMINERS: &[&str] = &["a", "an", "the", "its", "their", "several"];
const ADJECTIVES: &[&str] = &["heavy", "main", "old", "military", "northern", "southern", "neighbouring", "long"];

/// Tags a plain noun phrase: determiners, known adjectives, nouns; head is last.
fn plain_phrase(text: &str) -> Vec<Word> {
    text.split_whitespace()
        .map(|w| {
            let pos = if DETERMINERS.contains(&w) {
                "DET"
            } else if ADJECTIVES.contains(&w) {
                "ADJ"
            } else if w == "with" {
                "ADP"
            } else {
                "NOUN"
            };
            Word {
                text: w.to_string(),
                pos: pos.to_string(),
                ner: "O".to_string(),
            }
        })
        .collect()
}

#[derive(Default)]
struct Builder {
    tokens: Vec<Token>,
}

impl Builder {
    fn push(&mut self, text: &str, pos: &str, ner: &str) -> usize {
        let index = self.tokens.len();
        self.tokens.push(Token {
            index,
            text: text.to_string(),
            pos: pos.to_string(),
            dep: String::new(),
            head: usize::MAX,
            ner: ner.to_string(),
        });
        index
    }

    fn attach(&mut self, child: usize, head: usize, dep: &str) {
        self.tokens[child].head = head;
        self.tokens[child].dep = dep.to_string();
    }

    fn root(&mut self, idx: usize) {
        self.attach(idx, idx, "ROOT");
    }

    /// Pushes a phrase whose tokens all attach to the last one; returns the head.
    fn phrase(&mut self, words: &[Word]) -> usize {
        let idx: Vec<usize> = words
            .iter()
            .map(|w| self.push(&w.text, &w.pos, &w.ner))
            .collect();
        let head = *idx.last().expect("non-empty phrase");
        for (w, &i) in words.iter().zip(&idx).take(idx.len() - 1) {
            let dep = match w.pos.as_str() {
                "DET" => "det",
                "ADJ" => "amod",
                "ADP" => "prep",
                _ => "compound",
            };
            self.attach(i, head, dep);
        }
        head
    }

    fn punct(&mut self, text: &str) -> usize {
        self.push(text, "PUNCT", "O")
    }
}

/// A locative phrase in the token stream: where it hangs and which tokens are gold.
struct Locative {
    /// Token that attaches to the governing verb (preposition or place head).
    attach: usize,
    dep: &'static str,
    gold: Vec<usize>,
}

struct Gen<'a, 'r> {
    rng: &'r mut ChaCha8Rng,
    config: &'a SynthConfig,
    places: &'a [PlaceName],
    actors: &'a [Vec<Word>],
    b: Builder,
    used_places: HashSet<usize>,
}

impl Gen<'_, '_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn choose<'c, T>(&mut self, items: &'c [T]) -> &'c T {
        items.choose(self.rng).expect("non-empty choice")
    }

    fn pick(&mut self, items: &[&str]) -> String {
        items.choose(self.rng).expect("non-empty choice").to_string()
    }

    fn fresh_place(&mut self) -> PlaceName {
        loop {
            let i = self.rng.random_range(0..self.places.len());
            if self.used_places.len() >= self.places.len() || self.used_places.insert(i) {
                return self.places[i].clone();
            }
        }
    }

    /// Pushes one place name; returns (head, tokens).
    fn place(&mut self) -> (usize, Vec<usize>) {
        let place = self.fresh_place();
        let label = if self.chance(self.config.ner_error_rate) {
            self.pick(&["PERSON", "ORG", "O"])
        } else {
            place.label.clone()
        };
        let idx: Vec<usize> = place
            .words
            .iter()
            .map(|w| self.b.push(w, "PROPN", &label))
            .collect();
        let head = *idx.last().unwrap();
        for &i in &idx[..idx.len() - 1] {
            self.b.attach(i, head, "compound");
        }
        (head, idx)
    }

    /// One or more coordinated places ("A", "A and B", "A , B and C").
    fn place_list(&mut self, count: usize) -> (usize, Vec<usize>) {
        let (first, mut gold) = self.place();
        for k in 1..count {
            let sep = if k + 1 == count {
                self.b.push("and", "CCONJ", "O")
            } else {
                self.b.punct(",")
            };
            self.b.attach(sep, first, if k + 1 == count { "cc" } else { "punct" });
            let (h, toks) = self.place();
            self.b.attach(h, first, "conj");
            gold.extend(toks);
        }
        (first, gold)
    }

    fn place_count(&mut self, multi_rate: f64) -> usize {
        if self.chance(multi_rate) {
            if self.chance(0.8) {
                2
            } else {
                3
            }
        } else {
            1
        }
    }

    fn actor(&mut self) -> usize {
        let actors = self.actors;
        let words = self.choose(actors).clone();
        self.b.phrase(&words)
    }

    /// Verb followed by its place, in finite or gerund form. Returns (verb, locative).
    fn located_predicate(&mut self, gerund: bool, places: usize, scenic: bool) -> (usize, Locative) {
        let cfg = self.config;
        let verb = self.choose(&cfg.lexicon.event_verbs).clone();
        let text = if gerund { &verb.gerund } else { &verb.past };
        let v = self.push_verb(text);
        match (&verb.object, &verb.prep) {
            (Some(obj), Some(prep)) => {
                let o = self.b.phrase(&plain_phrase(obj));
                self.b.attach(o, v, "dobj");
                let p = self.b.push(prep, "ADP", "O");
                let (h, gold) = self.scenic_places(places, scenic);
                self.b.attach(h, p, "pobj");
                (
                    v,
                    Locative {
                        attach: p,
                        dep: "prep",
                        gold,
                    },
                )
            }
            _ => {
                let (h, gold) = self.scenic_places(places, scenic);
                (
                    v,
                    Locative {
                        attach: h,
                        dep: "dobj",
                        gold,
                    },
                )
            }
        }
    }

    /// Multi-word verbs ("carried out") become verb + particle.
    fn push_verb(&mut self, text: &str) -> usize {
        let mut words = text.split_whitespace();
        let v = self.b.push(words.next().unwrap_or(text), "VERB", "O");
        for w in words {
            let p = self.b.push(w, "ADP", "O");
            self.b.attach(p, v, "prt");
        }
        v
    }

    /// Places, optionally wrapped as "the northern Aleppo towns of X and Y".
    fn scenic_places(&mut self, count: usize, scenic: bool) -> (usize, Vec<usize>) {
        if !scenic {
            return self.place_list(count);
        }
        if self.chance(0.5) {
            let det = self.b.push("the", "DET", "O");
            let adj_text = self.pick(&["northern", "southern", "rural"]);
            let adj = self.b.push(&adj_text, "ADJ", "O");
            let (region, _) = self.place();
            let noun = self.b.push(if count > 1 { "towns" } else { "town" }, "NOUN", "O");
            self.b.attach(det, noun, "det");
            self.b.attach(adj, noun, "amod");
            self.b.attach(region, noun, "compound");
            let of = self.b.push("of", "ADP", "O");
            self.b.attach(of, noun, "prep");
            let (h, gold) = self.place_list(count);
            self.b.attach(h, of, "pobj");
            (noun, gold)
        } else {
            let det = self.b.push("its", "DET", "O");
            let adj = self.b.push("neighbouring", "ADJ", "O");
            let noun = self.b.push(if count > 1 { "towns" } else { "town" }, "NOUN", "O");
            self.b.attach(det, noun, "poss");
            self.b.attach(adj, noun, "amod");
            let of = self.b.push("of", "ADP", "O");
            self.b.attach(of, noun, "prep");
            let (h, gold) = self.place_list(count);
            self.b.attach(h, of, "pobj");
            (noun, gold)
        }
    }

    /// Event verb with a non-place object ("captured the airport").
    fn unlocated_predicate(&mut self) -> usize {
        let cfg = self.config;
        let verb = self.choose(&cfg.lexicon.event_verbs).clone();
        let v = self.push_verb(&verb.past);
        let obj = match &verb.object {
            Some(o) => o.clone(),
            None => self.pick(&[
                "the airport",
                "the main square",
                "the old city",
                "several villages",
                "the military base",
                "a convoy",
            ]),
        };
        let o = self.b.phrase(&plain_phrase(&obj));
        self.b.attach(o, v, "dobj");
        v
    }

    fn attach_locative(&mut self, loc: &Locative, intended: usize, alternatives: &[usize]) {
        let head = if !alternatives.is_empty() && self.chance(self.config.attachment_error_rate) {
            *self.choose(alternatives)
        } else {
            intended
        };
        self.b.attach(loc.attach, head, loc.dep);
    }

    fn time(&mut self, verb: usize) {
        match self.rng.random_range(0..5) {
            0 => {
                let t = self.b.push("today", "NOUN", "DATE");
                self.b.attach(t, verb, "npadvmod");
            }
            1 => {
                let on = self.b.push("on", "ADP", "O");
                let day = self.pick(&["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]);
                let d = self.b.push(&day, "PROPN", "DATE");
                self.b.attach(on, verb, "prep");
                self.b.attach(d, on, "pobj");
            }
            2 => {
                let l = self.b.push("last", "ADJ", "DATE");
                let w = self.b.push("week", "NOUN", "DATE");
                self.b.attach(l, w, "amod");
                self.b.attach(w, verb, "npadvmod");
            }
            3 => {
                let o = self.b.push("overnight", "ADV", "O");
                self.b.attach(o, verb, "advmod");
            }
            _ => {}
        }
    }

    /// Reporting subject, sometimes carrying a place that is not an event location.
    fn speaker(&mut self) -> usize {
        match self.rng.random_range(0..5) {
            0 => {
                let a = self.b.push("a", "DET", "O");
                let s = self.b.push("spokesperson", "NOUN", "O");
                let f = self.b.push("for", "ADP", "O");
                let (p, _) = self.place();
                self.b.attach(a, s, "det");
                self.b.attach(f, s, "prep");
                self.b.attach(p, f, "pobj");
                s
            }
            1 => {
                let s = self.b.push("officials", "NOUN", "O");
                let i = self.b.push("in", "ADP", "O");
                let (p, _) = self.place();
                self.b.attach(i, s, "prep");
                self.b.attach(p, i, "pobj");
                s
            }
            2 => {
                let text = self.pick(&["a military source", "state media", "the observatory", "activists"]);
                let words = plain_phrase(&text);
                self.b.phrase(&words)
            }
            _ => self.actor(),
        }
    }

    fn reporting_verb(&mut self) -> usize {
        let cfg = self.config;
        let v = self.choose(&cfg.lexicon.reporting_verbs).clone();
        self.b.push(&v, "VERB", "O")
    }

    fn finish(&mut self, root: usize, events: Vec<EventAnnotation>) -> AnnotatedSentence {
        let dot = self.b.punct(".");
        self.b.attach(dot, root, "punct");
        self.b.root(root);
        let mut events = events;
        events.sort_by_key(|e| e.verb_index);
        AnnotatedSentence {
            id: None,
            source: None,
            tokens: std::mem::take(&mut self.b.tokens),
            events,
        }
    }

    fn sentence(&mut self, template: Template) -> AnnotatedSentence {
        match template {
            Template::Simple => self.simple(),
            Template::TwoEvent => self.two_event(),
            Template::SaidClause => self.said_clause(),
            Template::Coordination => self.coordination(),
            Template::NoLocation => self.no_location(),
            Template::Fronted => self.fronted(),
        }
    }

    // ACTOR V [obj prep] PLACE TIME .
    fn simple(&mut self) -> AnnotatedSentence {
        let subj = self.actor();
        let count = self.place_count(0.12);
        let (v, loc) = self.located_predicate(false, count, false);
        self.b.attach(subj, v, "nsubj");
        self.attach_locative(&loc, v, &[]);
        self.time(v);
        self.finish(v, vec![EventAnnotation::new(v, loc.gold.clone())])
    }

    // After V1-ing [obj] in PLACES , ACTOR V2 [obj] on PLACE , SPEAKER said TIME .
    fn two_event(&mut self) -> AnnotatedSentence {
        let after = self.b.push("After", "ADP", "O");
        let count = self.place_count(0.3);
        let (v1, loc1) = self.located_predicate(true, count, true);
        let c1 = self.b.punct(",");
        let subj = self.actor();
        let scenic = self.chance(0.5);
        let (v2, loc2) = self.located_predicate(false, 1, scenic);
        let c2 = self.b.punct(",");
        let speaker = self.speaker();
        let said = self.reporting_verb();

        self.b.attach(v1, after, "pcomp");
        self.b.attach(after, v2, "prep");
        self.b.attach(c1, v2, "punct");
        self.b.attach(subj, v2, "nsubj");
        self.b.attach(v2, said, "ccomp");
        self.b.attach(c2, said, "punct");
        self.b.attach(speaker, said, "nsubj");
        self.attach_locative(&loc1, v1, &[v2]);
        self.attach_locative(&loc2, v2, &[said]);
        self.time(said);
        self.finish(
            said,
            vec![
                EventAnnotation::new(v1, loc1.gold.clone()),
                EventAnnotation::new(v2, loc2.gold.clone()),
                EventAnnotation::new(said, []),
            ],
        )
    }

    // SPEAKER said that ACTOR V PLACE .   |   ACTOR V PLACE , SPEAKER said .
    fn said_clause(&mut self) -> AnnotatedSentence {
        if self.chance(0.5) {
            let speaker = self.speaker();
            let said = self.reporting_verb();
            let that = self.b.push("that", "SCONJ", "O");
            let subj = self.actor();
            let (v, loc) = self.located_predicate(false, 1, false);
            self.b.attach(speaker, said, "nsubj");
            self.b.attach(that, v, "mark");
            self.b.attach(subj, v, "nsubj");
            self.b.attach(v, said, "ccomp");
            self.attach_locative(&loc, v, &[said]);
            self.time(v);
            self.finish(
                said,
                vec![EventAnnotation::new(said, []), EventAnnotation::new(v, loc.gold.clone())],
            )
        } else {
            let subj = self.actor();
            let (v, loc) = self.located_predicate(false, 1, false);
            self.time(v);
            let c = self.b.punct(",");
            let speaker = self.speaker();
            let said = self.reporting_verb();
            self.b.attach(subj, v, "nsubj");
            self.b.attach(v, said, "ccomp");
            self.b.attach(c, said, "punct");
            self.b.attach(speaker, said, "nsubj");
            self.attach_locative(&loc, v, &[said]);
            self.finish(
                said,
                vec![EventAnnotation::new(v, loc.gold.clone()), EventAnnotation::new(said, [])],
            )
        }
    }

    // ACTOR1 V1 PLACE1 , while ACTOR2 V2 PLACE2 TIME .
    fn coordination(&mut self) -> AnnotatedSentence {
        let s1 = self.actor();
        let (v1, loc1) = self.located_predicate(false, 1, false);
        let c = self.b.punct(",");
        let conj = self.pick(&["while", "as", "after"]);
        let m = self.b.push(&conj, "SCONJ", "O");
        let s2 = self.actor();
        let (v2, loc2) = self.located_predicate(false, 1, false);
        self.b.attach(s1, v1, "nsubj");
        self.b.attach(c, v1, "punct");
        self.b.attach(m, v2, "mark");
        self.b.attach(s2, v2, "nsubj");
        self.b.attach(v2, v1, "advcl");
        self.attach_locative(&loc1, v1, &[]);
        self.attach_locative(&loc2, v2, &[v1]);
        self.time(v2);
        self.finish(
            v1,
            vec![
                EventAnnotation::new(v1, loc1.gold.clone()),
                EventAnnotation::new(v2, loc2.gold.clone()),
            ],
        )
    }

    fn no_location(&mut self) -> AnnotatedSentence {
        match self.rng.random_range(0..4) {
            // Delegates from PLACE met with officials TIME .
            0 => {
                let who = self.pick(&["Delegates", "Refugees", "Envoys"]);
                let d = self.b.push(&who, "NOUN", "O");
                let from = self.b.push("from", "ADP", "O");
                let (p, _) = self.place();
                let verb = self.pick(&["met", "spoke", "negotiated"]);
                let v = self.b.push(&verb, "VERB", "O");
                let with = self.b.push("with", "ADP", "O");
                let o = self.b.push("officials", "NOUN", "O");
                self.b.attach(from, d, "prep");
                self.b.attach(p, from, "pobj");
                self.b.attach(d, v, "nsubj");
                self.b.attach(with, v, "prep");
                self.b.attach(o, with, "pobj");
                self.time(v);
                self.finish(v, vec![EventAnnotation::new(v, [])])
            }
            // SPEAKER REPORTED the reports TIME .
            1 => {
                let s = self.speaker();
                let v = self.reporting_verb();
                let o = self.b.phrase(&plain_phrase("the reports"));
                self.b.attach(s, v, "nsubj");
                self.b.attach(o, v, "dobj");
                self.time(v);
                self.finish(v, vec![EventAnnotation::new(v, [])])
            }
            // ACTOR V the airport TIME , SPEAKER said .
            2 => {
                let subj = self.actor();
                let v = self.unlocated_predicate();
                self.time(v);
                let c = self.b.punct(",");
                let speaker = self.speaker();
                let said = self.reporting_verb();
                self.b.attach(subj, v, "nsubj");
                self.b.attach(v, said, "ccomp");
                self.b.attach(c, said, "punct");
                self.b.attach(speaker, said, "nsubj");
                self.finish(
                    said,
                    vec![EventAnnotation::new(v, []), EventAnnotation::new(said, [])],
                )
            }
            // SPEAKER said that the talks would continue .
            _ => {
                let s = self.speaker();
                let said = self.reporting_verb();
                let that = self.b.push("that", "SCONJ", "O");
                let t = self.b.phrase(&plain_phrase("the talks"));
                let would = self.b.push("would", "AUX", "O");
                let verb = self.pick(&["continue", "resume", "fail"]);
                let v = self.b.push(&verb, "VERB", "O");
                self.b.attach(s, said, "nsubj");
                self.b.attach(that, v, "mark");
                self.b.attach(t, v, "nsubj");
                self.b.attach(would, v, "aux");
                self.b.attach(v, said, "ccomp");
                self.finish(
                    said,
                    vec![EventAnnotation::new(said, []), EventAnnotation::new(v, [])],
                )
            }
        }
    }

    // In PLACE1 , after LONG ADJUNCT , ACTOR V the airport .
    // In PLACE1 , after LONG ADJUNCT , SPEAKER said that ACTOR V PLACE2 .
    fn fronted(&mut self) -> AnnotatedSentence {
        let in_ = self.b.push("In", "ADP", "O");
        let (p1, gold1) = self.place();
        self.b.attach(p1, in_, "pobj");
        let c1 = self.b.punct(",");
        let after = self.b.push("after", "ADP", "O");
        let adjunct = self.pick(&[
                "several weeks of heavy fighting on the outskirts",
                "days of air strikes and shelling by government forces",
                "a long siege of the old city by the army",
                "months of negotiations between the warring sides",
                "a series of heavy clashes near the main road",
            ]);
        let words: Vec<&str> = adjunct.split_whitespace().collect();
        let head_noun = {
            let mut idx = Vec::new();
            for w in &words {
                let pos = if DETERMINERS.contains(w) {
                    "DET"
                } else if ADJECTIVES.contains(w) {
                    "ADJ"
                } else if ["of", "on", "by", "between", "near"].contains(w) {
                    "ADP"
                } else if *w == "and" {
                    "CCONJ"
                } else {
                    "NOUN"
                };
                idx.push(self.b.push(w, pos, "O"));
            }
            // Flat analysis: first noun heads the adjunct, everything else hangs off it.
            let head = idx
                .iter()
                .copied()
                .find(|&i| self.b.tokens[i].pos == "NOUN")
                .unwrap_or(idx[0]);
            for &i in &idx {
                if i != head {
                    self.b.attach(i, head, "dep");
                }
            }
            head
        };
        self.b.attach(head_noun, after, "pobj");
        let c2 = self.b.punct(",");
        let fronted = Locative {
            attach: in_,
            dep: "prep",
            gold: gold1,
        };
        if self.chance(0.5) {
            let subj = self.actor();
            let v = self.unlocated_predicate();
            self.b.attach(subj, v, "nsubj");
            self.b.attach(after, v, "prep");
            self.b.attach(c1, v, "punct");
            self.b.attach(c2, v, "punct");
            self.attach_locative(&fronted, v, &[]);
            self.finish(v, vec![EventAnnotation::new(v, fronted.gold.clone())])
        } else {
            let speaker = self.speaker();
            let said = self.reporting_verb();
            let that = self.b.push("that", "SCONJ", "O");
            let subj = self.actor();
            let (v, loc) = self.located_predicate(false, 1, false);
            self.b.attach(speaker, said, "nsubj");
            self.b.attach(after, said, "prep");
            self.b.attach(c1, said, "punct");
            self.b.attach(c2, said, "punct");
            self.b.attach(that, v, "mark");
            self.b.attach(subj, v, "nsubj");
            self.b.attach(v, said, "ccomp");
            self.attach_locative(&fronted, said, &[v]);
            self.attach_locative(&loc, v, &[said]);
            self.finish(
                said,
                vec![EventAnnotation::new(said, []), EventAnnotation::new(v, loc.gold.clone())],
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WordClass {
    Place,
    EventVerb,
    Reporting,
    Other,
}

/// Embedding table for the vocabulary of a synthetic corpus.
///
/// Words of the same class (place names, event verbs, reporting verbs)
/// share a centroid plus word-specific noise; everything else is random.
/// `place_coverage` is the fraction of place-name tokens that receive a
/// vector at all; the rest are left out-of-vocabulary.
pub fn synthetic_embeddings(
    corpus: &Corpus,
    lexicon: &Lexicon,
    dim: usize,
    seed: u64,
    place_coverage: f64,
) -> EmbeddingTable {
    let mut classes: BTreeMap<String, WordClass> = BTreeMap::new();
    for s in &corpus.sentences {
        for t in &s.tokens {
            classes.entry(t.text.clone()).or_insert(WordClass::Other);
        }
    }
    let mut set = |w: &str, c: WordClass| {
        if let Some(slot) = classes.get_mut(w) {
            *slot = c;
        }
    };
    for p in &lexicon.places {
        for w in PlaceName::parse(p).words {
            set(&w, WordClass::Place);
        }
    }
    for v in &lexicon.event_verbs {
        for form in [&v.past, &v.gerund] {
            if let Some(w) = form.split_whitespace().next() {
                set(w, WordClass::EventVerb);
            }
        }
    }
    for v in &lexicon.reporting_verbs {
        set(v, WordClass::Reporting);
    }

    let centroid = |c: WordClass| -> Vec<f32> {
        let mut rng = word_rng(seed, &format!("<class:{c:?}>"));
        let normal = Normal::new(0.0f64, 1.0 / (dim as f64).sqrt()).expect("valid normal");
        (0..dim).map(|_| normal.sample(&mut rng) as f32).collect()
    };
    let centroids: BTreeMap<u8, Vec<f32>> = [
        (0, centroid(WordClass::Place)),
        (1, centroid(WordClass::EventVerb)),
        (2, centroid(WordClass::Reporting)),
    ]
    .into_iter()
    .collect();

    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (word, class) in classes {
        let mut rng = word_rng(seed, &word);
        if class == WordClass::Place && rng.random::<f64>() >= place_coverage {
            continue;
        }
        let (base, spread) = match class {
            WordClass::Place => (Some(&centroids[&0]), 0.5),
            WordClass::EventVerb => (Some(&centroids[&1]), 0.5),
            WordClass::Reporting => (Some(&centroids[&2]), 0.5),
            WordClass::Other => (None, 1.0),
        };
        let normal = Normal::new(0.0f64, spread / (dim as f64).sqrt()).expect("valid normal");
        let v: Vec<f32> = (0..dim)
            .map(|k| base.map_or(0.0, |b| b[k]) + normal.sample(&mut rng) as f32)
            .collect();
        if seen.insert(word.clone()) {
            entries.push((word, v));
        }
    }
    EmbeddingTable::from_entries(dim, entries).expect("consistent synthetic dimensions")
}

fn word_rng(seed: u64, word: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(word.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}
