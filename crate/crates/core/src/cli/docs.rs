//! TOML documents read and written by the command-line front end.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::affine::AffinePerm;
use crate::code::CodeSpec;
use crate::decoder::DecoderConfig;
use crate::search::{CommutationTable, FixedAssignment, SearchConfig};
use crate::simulator::StopRule;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum DocError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid document: {0}")]
    Invalid(String),
}

/// First 16 hex digits of SHA-256.
pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn check_schema(v: u32) -> Result<(), DocError> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(DocError::Schema(v))
    }
}

fn perms(list: &[[u64; 2]], p: u64, which: &str) -> Result<Vec<AffinePerm>, DocError> {
    list.iter()
        .enumerate()
        .map(|(i, &[a, b])| {
            AffinePerm::new(a, b, p).map_err(|e| DocError::Invalid(format!("{which}[{i}] = [{a}, {b}]: {e}")))
        })
        .collect()
}

fn pairs(list: &[AffinePerm]) -> Vec<[u64; 2]> {
    list.iter().map(|f| [f.a(), f.b()]).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
}

/// Serialised [`CodeSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpecDocument {
    pub schema_version: u32,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<usize>>,
    pub f: Vec<[u64; 2]>,
    pub g: Vec<[u64; 2]>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl CodeSpecDocument {
    pub fn from_spec(spec: &CodeSpec, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            p: spec.p(),
            j: spec.j(),
            l: spec.l(),
            s: (!spec.is_standard_active()).then(|| spec.active().to_vec()),
            f: pairs(spec.f()),
            g: pairs(spec.g()),
            provenance,
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocError> {
        let doc: Self = toml::from_str(text)?;
        check_schema(doc.schema_version)?;
        Ok(doc)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("document always serialises")
    }

    pub fn to_spec(&self) -> Result<CodeSpec, DocError> {
        CodeSpec::new(
            self.p,
            self.j,
            self.l,
            self.s.clone(),
            perms(&self.f, self.p, "f")?,
            perms(&self.g, self.p, "g")?,
        )
        .map_err(|e| DocError::Invalid(e.to_string()))
    }
}

/// Digest of a spec's canonical document without provenance.
pub fn spec_digest(spec: &CodeSpec) -> String {
    digest(&CodeSpecDocument::from_spec(spec, Provenance::default()).emit())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Exactly the pairs forced by the active set commute.
    Gamma,
    /// Every pair except `noncommute` commutes.
    AllBut,
    /// `commute` and `noncommute` as listed.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub kind: TableKind,
    #[serde(default)]
    pub commute: Vec<[usize; 2]>,
    pub noncommute: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedDocument {
    pub f: Vec<[u64; 2]>,
    pub g: Vec<[u64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfigDocument {
    pub schema_version: u32,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<usize>>,
    pub girth_target: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_backtracks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_init: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_max: Option<usize>,
    pub table: TableDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<FixedDocument>,
}

impl SearchConfigDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        let doc: Self = toml::from_str(text)?;
        check_schema(doc.schema_version)?;
        Ok(doc)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("document always serialises")
    }

    pub fn to_config(&self) -> Result<SearchConfig, DocError> {
        let half = self.l / 2;
        let tuples = |v: &[[usize; 2]]| v.iter().map(|&[i, j]| (i, j)).collect::<Vec<_>>();
        let non = tuples(&self.table.noncommute);
        let active = self.s.clone().unwrap_or_else(|| (0..self.j).collect());
        let invalid = |e: crate::search::SearchError| DocError::Invalid(e.to_string());
        let table = match self.table.kind {
            TableKind::Gamma => CommutationTable::from_active(&active, half, &non).map_err(invalid)?,
            TableKind::AllBut => CommutationTable::all_but(half, &non).map_err(invalid)?,
            TableKind::Explicit => CommutationTable::new(
                half,
                tuples(&self.table.commute).into_iter().collect(),
                non.into_iter().collect(),
            )
            .map_err(invalid)?,
        };
        let mut cfg = SearchConfig::new(self.p, self.j, self.l, self.girth_target, table, self.seed);
        cfg.active = self.s.clone();
        if let Some(v) = self.max_backtracks {
            cfg.max_backtracks = v;
        }
        if let Some(v) = self.trials_init {
            cfg.trials_init = v;
        }
        if let Some(v) = self.trials_min {
            cfg.trials_min = v;
        }
        if let Some(v) = self.trials_max {
            cfg.trials_max = v;
        }
        if let Some(fx) = &self.fixed {
            cfg.fixed = Some(FixedAssignment {
                f: perms(&fx.f, self.p, "fixed.f")?,
                g: perms(&fx.g, self.p, "fixed.g")?,
            });
        }
        Ok(cfg)
    }
}

/// Monte Carlo campaign: one FER point per entry of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDocument {
    pub schema_version: u32,
    pub p: Vec<f64>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub decoder: DecoderConfig,
}

impl SimulationDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        let doc: Self = toml::from_str(text)?;
        check_schema(doc.schema_version)?;
        if doc.p.iter().any(|&p| !(0.0..0.75).contains(&p)) {
            return Err(DocError::Invalid("every p must lie in [0, 0.75)".into()));
        }
        Ok(doc)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("document always serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::SearchConfig;

    #[test]
    fn spec_document_round_trip() {
        let spec = CodeSpec::reference();
        let prov = Provenance {
            seed: Some(0),
            tool_version: TOOL_VERSION.into(),
            config_digest: None,
        };
        let doc = CodeSpecDocument::from_spec(&spec, prov);
        let text = doc.emit();
        let back = CodeSpecDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_spec().unwrap(), spec);
        assert_eq!(back.emit(), text);
        assert!(text.contains("P = 768"));
        assert_eq!(spec_digest(&spec).len(), 16);
    }

    #[test]
    fn spec_document_rejections() {
        let text = CodeSpecDocument::from_spec(&CodeSpec::reference(), Provenance::default()).emit();
        let bumped = text.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(CodeSpecDocument::parse(&bumped), Err(DocError::Schema(2))));
        let err = CodeSpecDocument::parse("schema_version = 1\nP = 7\n").unwrap_err();
        assert!(matches!(err, DocError::Parse(_)));
        let bad_unit = text.replacen("[763, 435]", "[762, 435]", 1);
        let doc = CodeSpecDocument::parse(&bad_unit).unwrap();
        assert!(matches!(doc.to_spec(), Err(DocError::Invalid(_))));
        assert!(CodeSpecDocument::parse(&format!("{text}\nextra = 1\n")).is_err());
    }

    #[test]
    fn search_document_tables() {
        let text = r#"
schema_version = 1
P = 60
J = 2
L = 8
girth_target = 6
seed = 11

[table]
kind = "gamma"
noncommute = [[0, 2]]
"#;
        let cfg = SearchConfigDocument::parse(text).unwrap().to_config().unwrap();
        let table = CommutationTable::from_active(&[0, 1], 4, &[(0, 2)]).unwrap();
        assert_eq!(cfg, SearchConfig::new(60, 2, 8, 6, table, 11));

        let all_but = text.replace("\"gamma\"", "\"all_but\"");
        let cfg = SearchConfigDocument::parse(&all_but).unwrap().to_config().unwrap();
        assert_eq!(cfg.table, CommutationTable::all_but(4, &[(0, 2)]).unwrap());

        let missing = text.replace("noncommute = [[0, 2]]", "");
        assert!(SearchConfigDocument::parse(&missing).is_err());
    }

    #[test]
    fn simulation_document_defaults() {
        let doc = SimulationDocument::parse("schema_version = 1\np = [0.08, 0.07]\nseed = 3\n").unwrap();
        assert_eq!(doc.stop, StopRule::default());
        assert_eq!(doc.decoder, DecoderConfig::default());
        assert_eq!(SimulationDocument::parse(&doc.emit()).unwrap(), doc);
        assert!(SimulationDocument::parse("schema_version = 1\np = [0.9]\nseed = 3\n").is_err());
    }
}
