//! Entity-name resolution against a dictionary.

use serde::{Deserialize, Serialize};

use crate::dictionary::{EntityDictionary, EntityId};
use crate::error::{Error, Result};
use crate::ingest::{DBPEDIA_ONTOLOGY, DBPEDIA_RESOURCE};

const MAX_SUGGESTIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveOptions {
    /// Retry unmatched names ignoring ASCII case.
    pub case_insensitive: bool,
    /// Prefixes tried in order when the bare name is not found, so that
    /// `Rome` can resolve to `http://dbpedia.org/resource/Rome`.
    pub fallback_prefixes: Vec<String>,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        Self {
            case_insensitive: false,
            fallback_prefixes: vec![DBPEDIA_RESOURCE.to_owned(), DBPEDIA_ONTOLOGY.to_owned()],
        }
    }
}

impl ResolveOptions {
    pub fn exact() -> Self {
        Self {
            case_insensitive: false,
            fallback_prefixes: Vec::new(),
        }
    }

    fn candidates<'a>(&'a self, name: &'a str) -> impl Iterator<Item = String> + 'a {
        std::iter::once(name.to_owned()).chain(self.fallback_prefixes.iter().map(move |p| format!("{p}{name}")))
    }
}

pub fn resolve(dict: &EntityDictionary, name: &str, opts: &ResolveOptions) -> Option<EntityId> {
    if let Some(id) = opts.candidates(name).find_map(|c| dict.get(&c)) {
        return Some(id);
    }
    if opts.case_insensitive {
        let wanted: Vec<String> = opts.candidates(name).map(|c| c.to_ascii_lowercase()).collect();
        return dict
            .names()
            .position(|n| wanted.iter().any(|w| n.eq_ignore_ascii_case(w)))
            .map(|i| EntityId(i as u32));
    }
    None
}

/// Up to five dictionary names that start with `name` (or a prefixed form of
/// it), compared case-insensitively.
pub fn suggestions(dict: &EntityDictionary, name: &str, opts: &ResolveOptions) -> Vec<String> {
    let wanted: Vec<String> = opts.candidates(name).map(|c| c.to_ascii_lowercase()).collect();
    dict.names()
        .filter(|n| {
            let lower = n.to_ascii_lowercase();
            wanted.iter().any(|w| lower.starts_with(w.as_str()))
        })
        .take(MAX_SUGGESTIONS)
        .map(str::to_owned)
        .collect()
}

/// Resolves every name or fails with the full miss list.
pub fn resolve_all<S: AsRef<str>>(dict: &EntityDictionary, names: &[S], opts: &ResolveOptions) -> Result<Vec<EntityId>> {
    let (found, missing) = resolve_partial(dict, names, opts);
    if missing.is_empty() {
        return Ok(found.into_iter().map(Option::unwrap).collect());
    }
    let mut hints = Vec::new();
    for m in &missing {
        for s in suggestions(dict, m, opts) {
            if !hints.contains(&s) && hints.len() < MAX_SUGGESTIONS * 2 {
                hints.push(s);
            }
        }
    }
    Err(Error::Unresolved {
        missing,
        suggestions: hints,
    })
}

/// Resolves what it can; returns per-name results plus the distinct misses.
pub fn resolve_partial<S: AsRef<str>>(
    dict: &EntityDictionary,
    names: &[S],
    opts: &ResolveOptions,
) -> (Vec<Option<EntityId>>, Vec<String>) {
    let mut missing: Vec<String> = Vec::new();
    let found = names
        .iter()
        .map(|n| {
            let r = resolve(dict, n.as_ref(), opts);
            if r.is_none() && !missing.iter().any(|m| m == n.as_ref()) {
                missing.push(n.as_ref().to_owned());
            }
            r
        })
        .collect();
    (found, missing)
}
