//! Transform and predicate functions usable inside `{var.fn1.fn2}` slots.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use super::GrammarError;

pub type TransformFn = Arc<dyn Fn(&str, &mut dyn RngCore) -> Option<String> + Send + Sync>;
pub type PredicateFn = Arc<dyn Fn(&str) -> bool + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Transform,
    Predicate,
}

/// A transform rewrites the value (returning `None` on failure); a predicate
/// only tests it.
#[derive(Clone)]
pub enum Function {
    Transform(TransformFn),
    Predicate(PredicateFn),
}

impl Function {
    pub fn kind(&self) -> FunctionKind {
        match self {
            Function::Transform(_) => FunctionKind::Transform,
            Function::Predicate(_) => FunctionKind::Predicate,
        }
    }
}

impl fmt::Debug for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind())
    }
}

type Casing = fn(&str) -> String;

#[derive(Debug, Clone, Default)]
pub struct FunctionRegistry {
    functions: HashMap<String, Function>,
}

pub const PREDICATE_PREFIX: &str = "is_";

impl FunctionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Casing, article, plural, gerund and noun-check functions, plus a
    /// `pronoun` transform driven by `pronouns` (identity for unmapped words).
    pub fn with_builtins(nouns: NounList, pronouns: HashMap<String, String>) -> Self {
        let mut reg = Self::new();
        let builtins: [(&str, Casing); 6] = [
            ("title", title_case),
            ("lower", |s| s.to_lowercase()),
            ("upper", |s| s.to_uppercase()),
            ("a_an", with_article),
            ("plural", pluralize),
            ("ing", gerund),
        ];
        for (name, f) in builtins {
            reg.register_transform(name, move |s, _| Some(f(s)))
                .expect("builtin names are unique");
        }
        let nouns = Arc::new(nouns);
        reg.register_predicate("is_noun", move |s| nouns.contains(s))
            .expect("builtin names are unique");
        reg.register_transform("pronoun", move |s, _| {
            Some(pronouns.get(&s.to_lowercase()).cloned().unwrap_or_else(|| s.to_string()))
        })
        .expect("builtin names are unique");
        reg
    }

    pub fn register(&mut self, name: &str, function: Function) -> Result<(), GrammarError> {
        if self.functions.contains_key(name) {
            return Err(GrammarError::DuplicateFunction(name.to_string()));
        }
        let is_predicate_name = name.starts_with(PREDICATE_PREFIX);
        if is_predicate_name != (function.kind() == FunctionKind::Predicate) {
            return Err(GrammarError::FunctionNaming(name.to_string()));
        }
        self.functions.insert(name.to_string(), function);
        Ok(())
    }

    pub fn register_transform(
        &mut self,
        name: &str,
        f: impl Fn(&str, &mut dyn RngCore) -> Option<String> + Send + Sync + 'static,
    ) -> Result<(), GrammarError> {
        self.register(name, Function::Transform(Arc::new(f)))
    }

    pub fn register_predicate(
        &mut self,
        name: &str,
        f: impl Fn(&str) -> bool + Send + Sync + 'static,
    ) -> Result<(), GrammarError> {
        self.register(name, Function::Predicate(Arc::new(f)))
    }

    pub fn get(&self, name: &str) -> Option<&Function> {
        self.functions.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }
}

/// Word list backing `is_noun`.
#[derive(Debug, Clone, Default)]
pub struct NounList(HashSet<String>);

impl NounList {
    /// One word per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        NounList(
            text.lines()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase())
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.trim().to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for NounList {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        NounList(iter.into_iter().map(|w| w.to_lowercase()).collect())
    }
}

const MINOR_WORDS: &[&str] = &[
    "a", "an", "the", "and", "but", "or", "nor", "for", "so", "yet", "as", "at", "by", "in",
    "of", "on", "to", "up", "via", "with", "from",
];

fn capitalize(word: &str) -> String {
    let mut cs = word.chars();
    match cs.next() {
        Some(first) => first.to_uppercase().collect::<String>() + cs.as_str(),
        None => String::new(),
    }
}

/// Headline casing; articles, short conjunctions and prepositions stay lower
/// case unless they open or close the phrase.
pub fn title_case(s: &str) -> String {
    let words: Vec<&str> = s.split(' ').collect();
    let last = words.len().saturating_sub(1);
    words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let lower = w.to_lowercase();
            if i != 0 && i != last && MINOR_WORDS.contains(&lower.as_str()) {
                lower
            } else {
                capitalize(w)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn with_article(s: &str) -> String {
    let starts_with_vowel = s
        .chars()
        .find(|c| c.is_alphabetic())
        .is_some_and(|c| "aeiouAEIOU".contains(c));
    if starts_with_vowel {
        format!("an {s}")
    } else {
        format!("a {s}")
    }
}

fn is_vowel(c: char) -> bool {
    "aeiou".contains(c.to_ascii_lowercase())
}

/// Naive English plural of the last word.
pub fn pluralize(s: &str) -> String {
    let (head, word) = match s.rfind(' ') {
        Some(i) => (&s[..=i], &s[i + 1..]),
        None => ("", s),
    };
    let lower = word.to_lowercase();
    let plural = if ["s", "x", "z", "ch", "sh"].iter().any(|e| lower.ends_with(e)) {
        format!("{word}es")
    } else if lower.ends_with('y')
        && lower.len() > 1
        && !is_vowel(lower.chars().rev().nth(1).unwrap_or('a'))
    {
        format!("{}ies", &word[..word.len() - 1])
    } else {
        format!("{word}s")
    };
    format!("{head}{plural}")
}

/// Gerund of the first word: `run` → `running`, `bake` → `baking`.
pub fn gerund(s: &str) -> String {
    let (word, rest) = match s.find(' ') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let lower = word.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let g = if lower.ends_with("ie") {
        format!("{}ying", &word[..word.len() - 2])
    } else if lower.ends_with('e') && !["ee", "ye", "oe"].iter().any(|e| lower.ends_with(e)) && chars.len() > 2 {
        format!("{}ing", &word[..word.len() - 1])
    } else if chars.len() == 3
        && !is_vowel(chars[0])
        && is_vowel(chars[1])
        && !is_vowel(chars[2])
        && !"wxy".contains(chars[2])
    {
        format!("{word}{}ing", chars[2])
    } else {
        format!("{word}ing")
    };
    format!("{g}{rest}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn title_casing() {
        assert_eq!(title_case("pet a cat"), "Pet a Cat");
        assert_eq!(title_case("the art of war"), "The Art of War");
        assert_eq!(title_case("what to look at"), "What to Look At");
    }

    #[test]
    fn articles() {
        assert_eq!(with_article("cat"), "a cat");
        assert_eq!(with_article("owl"), "an owl");
        assert_eq!(with_article("Umbrella"), "an Umbrella");
    }

    #[test]
    fn plurals() {
        assert_eq!(pluralize("cat"), "cats");
        assert_eq!(pluralize("box"), "boxes");
        assert_eq!(pluralize("city"), "cities");
        assert_eq!(pluralize("day"), "days");
        assert_eq!(pluralize("church"), "churches");
        assert_eq!(pluralize("coffee cup"), "coffee cups");
    }

    #[test]
    fn gerunds() {
        assert_eq!(gerund("run"), "running");
        assert_eq!(gerund("bake a cake"), "baking a cake");
        assert_eq!(gerund("tie"), "tying");
        assert_eq!(gerund("see"), "seeing");
        assert_eq!(gerund("cook"), "cooking");
        assert_eq!(gerund("pet a cat"), "petting a cat");
    }

    #[test]
    fn naming_rules() {
        let mut reg = FunctionRegistry::new();
        assert!(matches!(
            reg.register_predicate("short", |_| true),
            Err(GrammarError::FunctionNaming(_))
        ));
        assert!(matches!(
            reg.register_transform("is_big", |s, _| Some(s.into())),
            Err(GrammarError::FunctionNaming(_))
        ));
    }

    #[test]
    fn pronoun_table() {
        let mut table = HashMap::new();
        table.insert("i".to_string(), "you".to_string());
        let reg = FunctionRegistry::with_builtins(NounList::default(), table);
        let Some(Function::Transform(f)) = reg.get("pronoun") else { panic!() };
        let mut rng = crate::rng::rng_from_seed(0);
        assert_eq!(f("I", &mut rng).unwrap(), "you");
        assert_eq!(f("cat", &mut rng).unwrap(), "cat");
    }
}
