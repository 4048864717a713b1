//! Ontology construction, querying, schema derivation and intermodal route
//! ranking.

pub mod docprep;
pub mod freightnet;
pub mod kstore;
pub mod mcda;
pub mod naming;
pub mod ontogen;
pub mod query;
pub mod reasoning;
pub mod samples;
pub mod schemagen;
