//! JSON wire forms for structures, pointed structures, spans and limit
//! prefixes. Tables are emitted sorted, so output bytes depend only on the
//! value.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use fraisse_core::ages::{AgeDescriptor, Param};
use fraisse_core::amalgamation::Span;
use fraisse_core::limits::{LimitPrefix, StageCase, StageRecord};
use fraisse_core::structure::validate;
use fraisse_core::{Elem, FinStructure, Pointed, PotentialEmbedding, Signature};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigJson {
    pub relations: Vec<(String, usize)>,
    pub functions: Vec<(String, usize)>,
    pub indexed_unary: Option<(String, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub sig: SigJson,
    pub domain: Vec<Elem>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<Elem>>>,
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<Vec<Elem>>>,
}

impl From<&Signature> for SigJson {
    fn from(s: &Signature) -> Self {
        SigJson {
            relations: s.relations().to_vec(),
            functions: s.functions().to_vec(),
            indexed_unary: s.indexed_unary().map(|(n, k)| (n.to_string(), k)),
        }
    }
}

impl From<&FinStructure> for StructureJson {
    fn from(m: &FinStructure) -> Self {
        let sig = m.sig();
        let relations = sig
            .relation_symbols()
            .iter()
            .zip(m.rel_tables())
            .map(|((name, _), t)| (name.clone(), t.iter().cloned().collect()))
            .collect();
        let functions = sig
            .functions()
            .iter()
            .zip(m.fun_tables())
            .map(|((name, _), t)| {
                let rows = t
                    .iter()
                    .map(|(args, v)| {
                        let mut row = args.clone();
                        row.push(*v);
                        row
                    })
                    .collect();
                (name.clone(), rows)
            })
            .collect();
        StructureJson {
            sig: SigJson::from(sig.as_ref()),
            domain: m.domain().to_vec(),
            relations,
            functions,
        }
    }
}

impl StructureJson {
    pub fn to_structure(&self) -> Result<FinStructure, CliError> {
        let sig = Signature::new(
            self.sig.relations.clone(),
            self.sig.functions.clone(),
            self.sig.indexed_unary.clone(),
        )
        .map_err(|e| CliError::Input(format!("signature: {e}")))?;
        let sig = Arc::new(sig);
        let domain: BTreeSet<Elem> = self.domain.iter().copied().collect();
        if domain.len() != self.domain.len() {
            return Err(CliError::Input("domain lists an element twice".into()));
        }
        for name in self.relations.keys() {
            if sig.rel_index(name).is_none() {
                return Err(CliError::Input(format!("unknown relation `{name}`")));
            }
        }
        for name in self.functions.keys() {
            if sig.fun_index(name).is_none() {
                return Err(CliError::Input(format!("unknown function `{name}`")));
            }
        }
        let rels = sig
            .relation_symbols()
            .iter()
            .map(|(name, _)| {
                self.relations
                    .get(name)
                    .map(|rows| rows.iter().cloned().collect())
                    .unwrap_or_default()
            })
            .collect();
        let mut funs = Vec::new();
        for (name, arity) in sig.functions() {
            let mut table = BTreeMap::new();
            for row in self.functions.get(name).into_iter().flatten() {
                if row.len() != arity + 1 {
                    return Err(CliError::Input(format!("row {row:?} of `{name}` has the wrong length")));
                }
                let (args, value) = row.split_at(*arity);
                if table.insert(args.to_vec(), value[0]).is_some() {
                    return Err(CliError::Input(format!("`{name}` has two values at {args:?}")));
                }
            }
            funs.push(table);
        }
        let m = FinStructure::from_parts(sig, domain.into_iter().collect(), rels, funs);
        let violations = validate(&m);
        if let Some(v) = violations.first() {
            return Err(CliError::Input(format!("structure: {v}")));
        }
        Ok(m)
    }
}

/// A structure with an optional generating tuple; without one the whole
/// domain in ascending order is used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointedJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuple: Option<Vec<Elem>>,
    #[serde(flatten)]
    pub structure: StructureJson,
}

impl From<&Pointed> for PointedJson {
    fn from(p: &Pointed) -> Self {
        PointedJson {
            tuple: Some(p.tuple().to_vec()),
            structure: StructureJson::from(p.structure()),
        }
    }
}

impl PointedJson {
    pub fn to_pointed(&self) -> Result<Pointed, CliError> {
        let m = self.structure.to_structure()?;
        match &self.tuple {
            None => Ok(Pointed::whole(m)),
            Some(t) => Pointed::new(t.clone(), m).map_err(|e| CliError::Input(format!("pointed: {e}"))),
        }
    }
}

/// One leg of a span: its codomain and the image of the base tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegJson {
    pub codomain: PointedJson,
    pub image: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanJson {
    pub base: PointedJson,
    pub f0: LegJson,
    pub f1: LegJson,
}

fn leg(base: &Pointed, l: &LegJson) -> Result<PotentialEmbedding, CliError> {
    PotentialEmbedding::new(base.clone(), l.codomain.to_pointed()?, l.image.clone())
        .map_err(|e| CliError::Input(format!("span leg: {e}")))
}

impl SpanJson {
    pub fn to_span(&self) -> Result<Span, CliError> {
        let base = self.base.to_pointed()?;
        Span::new(leg(&base, &self.f0)?, leg(&base, &self.f1)?).map_err(|e| CliError::Input(format!("span: {e}")))
    }
}

impl From<&Span> for SpanJson {
    fn from(s: &Span) -> Self {
        let leg = |f: &PotentialEmbedding| LegJson {
            codomain: PointedJson::from(f.codom()),
            image: f.image.clone(),
        };
        SpanJson {
            base: PointedJson::from(s.base()),
            f0: leg(&s.f0),
            f1: leg(&s.f1),
        }
    }
}

// ------------------------------------------------------------ descriptors

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorJson {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    /// Members of an explicit age.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<PointedJson>>,
}

impl From<&AgeDescriptor> for DescriptorJson {
    fn from(d: &AgeDescriptor) -> Self {
        let params = d
            .params
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    Param::Int(i) => Value::from(*i),
                    Param::List(l) => Value::from(l.clone()),
                    Param::Str(s) => Value::from(s.clone()),
                };
                (k.clone(), v)
            })
            .collect();
        DescriptorJson {
            kind: d.kind.clone(),
            params,
            members: None,
        }
    }
}

impl DescriptorJson {
    pub fn to_descriptor(&self) -> Result<AgeDescriptor, CliError> {
        let mut params = BTreeMap::new();
        for (k, v) in &self.params {
            let p = match v {
                Value::Number(n) => Param::Int(
                    n.as_i64()
                        .ok_or_else(|| CliError::Input(format!("parameter `{k}` is not an integer")))?,
                ),
                Value::String(s) => Param::Str(s.clone()),
                Value::Array(xs) => Param::List(
                    xs.iter()
                        .map(|x| x.as_i64())
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| CliError::Input(format!("parameter `{k}` is not an integer list")))?,
                ),
                _ => return Err(CliError::Input(format!("parameter `{k}` has an unsupported type"))),
            };
            params.insert(k.clone(), p);
        }
        Ok(AgeDescriptor {
            kind: self.kind.clone(),
            params,
        })
    }
}

// ---------------------------------------------------------- limit prefix

/// `stage=3 case=amalgamated d=[0,1] witness=0 extension=2 size=3 added=[5,6]`
pub fn stage_line(r: &StageRecord) -> String {
    let list = |xs: &[Elem]| {
        let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(","))
    };
    format!(
        "stage={} case={} d={} witness={} extension={} size={} added={}",
        r.stage,
        r.case.name(),
        list(&r.d),
        r.witness,
        r.extension,
        r.extension_size,
        list(&r.added)
    )
}

pub fn parse_stage_line(line: &str) -> Result<StageRecord, CliError> {
    let bad = || CliError::Input(format!("malformed stage line `{line}`"));
    let fields: BTreeMap<&str, &str> = line
        .split(' ')
        .map(|kv| kv.split_once('=').ok_or_else(bad))
        .collect::<Result<_, _>>()?;
    if fields.len() != 7 {
        return Err(bad());
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(bad);
    let num = |k: &str| get(k)?.parse::<u64>().map_err(|_| bad());
    let list = |k: &str| -> Result<Vec<Elem>, CliError> {
        let s = get(k)?.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(bad)?;
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|x| x.parse().map_err(|_| bad())).collect()
    };
    Ok(StageRecord {
        stage: num("stage")? as usize,
        case: StageCase::from_name(get("case")?).ok_or_else(bad)?,
        d: list("d")?,
        witness: num("witness")?,
        extension: num("extension")?,
        extension_size: num("size")? as usize,
        added: list("added")?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPrefixJson {
    #[serde(flatten)]
    pub structure: StructureJson,
    pub markers: Vec<Vec<Elem>>,
    pub stage_log: Vec<String>,
    pub age: DescriptorJson,
}

impl From<&LimitPrefix> for LimitPrefixJson {
    fn from(p: &LimitPrefix) -> Self {
        LimitPrefixJson {
            structure: StructureJson::from(&p.structure),
            markers: p.markers.clone(),
            stage_log: p.stage_log.iter().map(stage_line).collect(),
            age: DescriptorJson::from(&p.age_ref),
        }
    }
}

impl LimitPrefixJson {
    pub fn to_prefix(&self) -> Result<LimitPrefix, CliError> {
        let structure = self.structure.to_structure()?;
        for m in &self.markers {
            if !m.iter().all(|x| structure.contains(*x)) {
                return Err(CliError::Input(format!("marker {m:?} leaves the domain")));
            }
        }
        Ok(LimitPrefix {
            structure,
            markers: self.markers.clone(),
            stage_log: self.stage_log.iter().map(|l| parse_stage_line(l)).collect::<Result<_, _>>()?,
            age_ref: self.age.to_descriptor()?,
        })
    }
}

/// Compact JSON with a trailing newline.
pub fn emit<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("wire types serialize");
    s.push('\n');
    s
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}
