use serde::{Deserialize, Serialize};

use super::ntriples::RawTriple;
use crate::error::{Error, Result};

pub const DBPEDIA_RESOURCE: &str = "http://dbpedia.org/resource/";
pub const DBPEDIA_ONTOLOGY: &str = "http://dbpedia.org/ontology/";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// IRI prefixes that subjects and named objects must start with.
    pub allowed_namespaces: Vec<String>,
    pub namespace_filter: bool,
    pub drop_literal_objects: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            allowed_namespaces: vec![DBPEDIA_RESOURCE.to_owned(), DBPEDIA_ONTOLOGY.to_owned()],
            namespace_filter: true,
            drop_literal_objects: true,
        }
    }
}

impl FilterConfig {
    pub fn with_namespaces<I, S>(namespaces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            allowed_namespaces: namespaces.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    /// No namespace restriction; literals are still dropped.
    pub fn permissive() -> Self {
        Self {
            allowed_namespaces: Vec::new(),
            namespace_filter: false,
            drop_literal_objects: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.namespace_filter && self.allowed_namespaces.is_empty() {
            return Err(Error::validation(
                "namespace filtering is enabled but no namespaces are allowed",
            ));
        }
        if self.allowed_namespaces.iter().any(String::is_empty) {
            return Err(Error::validation("empty namespace prefix"));
        }
        Ok(())
    }

    fn in_namespace(&self, name: &str) -> bool {
        !self.namespace_filter || self.allowed_namespaces.iter().any(|ns| name.starts_with(ns.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    LiteralObject,
    ExternalNamespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Drop(DropReason),
}

impl FilterDecision {
    pub fn is_keep(self) -> bool {
        self == FilterDecision::Keep
    }
}

/// Literal objects are checked before namespaces, so a date-valued triple
/// about an in-namespace subject is reported as a literal drop.
pub fn apply_filters(triple: &RawTriple, cfg: &FilterConfig) -> FilterDecision {
    if triple.object.is_literal() && cfg.drop_literal_objects {
        return FilterDecision::Drop(DropReason::LiteralObject);
    }
    if !cfg.in_namespace(&triple.subject) {
        return FilterDecision::Drop(DropReason::ExternalNamespace);
    }
    if let Some(obj) = triple.object.as_named() {
        if !cfg.in_namespace(obj) {
            return FilterDecision::Drop(DropReason::ExternalNamespace);
        }
    }
    FilterDecision::Keep
}
