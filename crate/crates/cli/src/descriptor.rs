//! Age descriptors to concrete ages.

use std::sync::Arc;

use fraisse_core::ages::{canonical_age_ordered, Age, TupleOrder};
use fraisse_core::gadgets::{generator, graphs_age, kf_age, kr_age, w_mn_age, z_age};
use fraisse_core::Pointed;
use serde_json::Value;

use crate::wire::DescriptorJson;
use crate::CliError;

fn int_param(d: &DescriptorJson, key: &str) -> Result<u64, CliError> {
    d.params
        .get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| CliError::Input(format!("age `{}` needs a non-negative integer `{key}`", d.kind)))
}

/// Build the age a descriptor names.
pub fn resolve(d: &DescriptorJson) -> Result<Age, CliError> {
    let kind = d.kind.strip_prefix("gadget:").unwrap_or(&d.kind);
    let age = match kind {
        "graphs" => graphs_age(),
        "kf" => kf_age(),
        "kr" => kr_age(),
        "z" | "z_chain" => z_age(),
        "w_mn" => w_mn_age(int_param(d, "m")?, int_param(d, "n")?).map_err(|e| CliError::Input(format!("{e}")))?,
        "canonical" => {
            let name = d
                .params
                .get("generator")
                .and_then(Value::as_str)
                .ok_or_else(|| CliError::Input("canonical age needs a `generator`".into()))?;
            let gen = generator(name).ok_or_else(|| CliError::Input(format!("unknown generator `{name}`")))?;
            let order = match d.params.get("order").and_then(Value::as_str) {
                None | Some("ascending") => TupleOrder::Ascending,
                Some("descending") => TupleOrder::Descending,
                Some(o) => return Err(CliError::Input(format!("unknown tuple order `{o}`"))),
            };
            canonical_age_ordered(Arc::from(gen), order)
        }
        "explicit" => {
            let members = d
                .members
                .as_ref()
                .filter(|m| !m.is_empty())
                .ok_or_else(|| CliError::Input("explicit age needs a non-empty `members` list".into()))?;
            let members: Vec<Pointed> = members.iter().map(|m| m.to_pointed()).collect::<Result<_, _>>()?;
            let sig = members[0].sig().clone();
            if members.iter().any(|m| m.sig() != &sig) {
                return Err(CliError::Input("explicit members disagree on the signature".into()));
            }
            Age::explicit(sig, members)
        }
        other => return Err(CliError::Input(format!("unknown age kind `{other}`"))),
    };
    Ok(age)
}

/// `--age` value: a short name (`graphs`, `kf`, `kr`, `z`, `w_mn:M,N`) or
/// a path to a descriptor JSON file.
pub fn from_flag(age: &str) -> Result<DescriptorJson, CliError> {
    if age.ends_with(".json") {
        let text = std::fs::read_to_string(age).map_err(|e| CliError::Input(format!("{age}: {e}")))?;
        return crate::wire::parse(&text, age);
    }
    let (name, args) = age.split_once(':').unwrap_or((age, ""));
    let mut d = DescriptorJson {
        kind: format!("gadget:{name}"),
        params: Default::default(),
        members: None,
    };
    if name == "w_mn" {
        let bad = || CliError::Input(format!("expected w_mn:M,N, got `{age}`"));
        let (m, n) = args.split_once(',').ok_or_else(bad)?;
        let m: u64 = m.trim().parse().map_err(|_| bad())?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        d.params.insert("m".into(), Value::from(m));
        d.params.insert("n".into(), Value::from(n));
    } else if !args.is_empty() {
        return Err(CliError::Input(format!("age `{name}` takes no parameters")));
    }
    Ok(d)
}
