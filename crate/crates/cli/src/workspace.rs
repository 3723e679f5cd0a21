//! Named objects persisted as one JSON file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map, Value};

use locperv::convolution::TensorIndex;
use locperv::deformation::Certificate;
use locperv::serial::{
    config_from_json, config_to_json, gauss_from_json, gauss_to_json, parse, perv_from_json,
    perv_to_json, tensor_index_from_json, tensor_index_to_json, to_pretty,
};
use locperv::{Configuration, QPerv, SignWord};

const FORMAT: &str = "locperv-workspace/1";

#[derive(Clone, Debug)]
pub struct Entry {
    pub perv: QPerv,
    pub provenance: Value,
    pub index: Option<Vec<TensorIndex>>,
    /// For perturbed objects: the motion and the configuration it started from.
    pub certificate: Option<(Certificate, Configuration)>,
}

impl Entry {
    pub fn new(perv: QPerv, provenance: Value) -> Self {
        Self {
            perv,
            provenance,
            index: None,
            certificate: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub entries: BTreeMap<String, Entry>,
}

pub fn certificate_to_json(cert: &Certificate, source: &Configuration) -> Value {
    let sides: Map<String, Value> = cert
        .sides
        .iter()
        .map(|(&(i, j), w)| (format!("{i}->{j}"), Value::String(w.to_string())))
        .collect();
    json!({
        "displacement": cert.displacement.iter().map(gauss_to_json).collect::<Vec<_>>(),
        "sides": sides,
        "source": config_to_json(source),
    })
}

pub fn certificate_from_json(v: &Value) -> Result<(Certificate, Configuration)> {
    let displacement = v
        .get("displacement")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("certificate needs a \"displacement\" array"))?
        .iter()
        .map(gauss_from_json)
        .collect::<locperv::Result<Vec<_>>>()?;
    let mut sides = BTreeMap::new();
    if let Some(m) = v.get("sides").and_then(Value::as_object) {
        for (k, w) in m {
            let (i, j) = k
                .split_once("->")
                .ok_or_else(|| anyhow!("bad side key {k:?}"))?;
            let w: SignWord = w
                .as_str()
                .ok_or_else(|| anyhow!("side words are strings"))?
                .parse()?;
            sides.insert((i.parse()?, j.parse()?), w);
        }
    }
    let source = config_from_json(
        v.get("source")
            .ok_or_else(|| anyhow!("certificate needs \"source\""))?,
    )?;
    Ok((
        Certificate {
            displacement,
            sides,
        },
        source,
    ))
}

fn entry_to_json(e: &Entry) -> Value {
    let mut m = Map::new();
    m.insert("perv".into(), perv_to_json(&e.perv));
    m.insert("provenance".into(), e.provenance.clone());
    if let Some(index) = &e.index {
        m.insert("tensor_index".into(), tensor_index_to_json(index));
    }
    if let Some((cert, source)) = &e.certificate {
        m.insert("certificate".into(), certificate_to_json(cert, source));
    }
    Value::Object(m)
}

fn entry_from_json(v: &Value) -> Result<Entry> {
    let perv = perv_from_json(
        v.get("perv")
            .ok_or_else(|| anyhow!("entry needs \"perv\""))?,
    )?;
    let provenance = v.get("provenance").cloned().unwrap_or(Value::Null);
    let index = v
        .get("tensor_index")
        .map(tensor_index_from_json)
        .transpose()?;
    let certificate = v
        .get("certificate")
        .map(certificate_from_json)
        .transpose()?;
    Ok(Entry {
        perv,
        provenance,
        index,
        certificate,
    })
}

impl Workspace {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::default());
        }
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let v = parse(text)?;
        if v.get("format").and_then(Value::as_str) != Some(FORMAT) {
            bail!("not a workspace file (expected format {FORMAT:?})");
        }
        let objects = v
            .get("objects")
            .and_then(Value::as_object)
            .ok_or_else(|| anyhow!("workspace needs \"objects\""))?;
        let entries = objects
            .iter()
            .map(|(k, e)| {
                entry_from_json(e)
                    .with_context(|| format!("object {k:?}"))
                    .map(|e| (k.clone(), e))
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    pub fn to_text(&self) -> String {
        let objects: Map<String, Value> = self
            .entries
            .iter()
            .map(|(k, e)| (k.clone(), entry_to_json(e)))
            .collect();
        to_pretty(&json!({ "format": FORMAT, "objects": objects }))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn get(&self, name: &str) -> Result<&Entry> {
        self.entries
            .get(name)
            .ok_or_else(|| anyhow!("no object named {name:?}"))
    }

    pub fn insert(&mut self, name: &str, entry: Entry, force: bool) -> Result<()> {
        if !force && self.entries.contains_key(name) {
            bail!("object {name:?} already exists (use --force to replace it)");
        }
        self.entries.insert(name.to_string(), entry);
        Ok(())
    }
}
