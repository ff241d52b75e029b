//! JSON document formats for measures, families, mixtures and IFS specs,
//! plus deterministic serialization (12 significant digits, sorted keys)
//! and run manifests with input digests.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dimension::{IfsMap, IfsSpec};
use crate::error::{Error, Result};
use crate::family::CellFamily;
use crate::measure::{Atom, AtomSpace, DiscreteMeasure, MixtureSpec};

/// One atom: an id and optional coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub id: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coords: Option<Vec<f64>>,
}

/// A measure document: the atom space and a weight per atom id.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
    pub weights: BTreeMap<u32, f64>,
}

/// A family document: cells as lists of atom ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub cells: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
}

/// One mixture component: its coefficient and its weights over the shared
/// atom list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub coefficient: f64,
    pub weights: BTreeMap<u32, f64>,
}

/// A mixture document: a shared atom space and coefficient-weighted
/// components.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureJson {
    pub atoms: Vec<AtomJson>,
    pub components: Vec<ComponentJson>,
}

/// An IFS document: contractions, selection probabilities, depth.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsJson {
    pub maps: Vec<IfsMap>,
    pub probs: Vec<f64>,
    pub depth: u32,
}

fn space_from_atoms(atoms: Vec<AtomJson>) -> Result<Arc<AtomSpace>> {
    AtomSpace::new(
        atoms
            .into_iter()
            .map(|a| match a.coords {
                Some(c) => Atom::with_coords(a.id, c),
                None => Atom::new(a.id),
            })
            .collect(),
    )
}

fn atoms_to_json(space: &AtomSpace) -> Vec<AtomJson> {
    space
        .atoms()
        .iter()
        .map(|a| AtomJson { id: a.id, coords: a.coords.clone() })
        .collect()
}

impl MeasureJson {
    pub fn into_measure(self) -> Result<DiscreteMeasure> {
        let space = space_from_atoms(self.atoms)?;
        DiscreteMeasure::new(space, self.weights)
    }

    pub fn from_measure(mu: &DiscreteMeasure) -> Self {
        MeasureJson {
            atoms: atoms_to_json(mu.space()),
            weights: mu
                .space()
                .atoms()
                .iter()
                .map(|a| (a.id, mu.weight(a.id)))
                .collect(),
        }
    }
}

impl FamilyJson {
    pub fn into_family(self) -> Result<CellFamily> {
        CellFamily::new(
            self.cells.into_iter().map(|c| c.into_iter().collect()).collect(),
            self.label,
        )
    }

    pub fn from_family(q: &CellFamily) -> Self {
        FamilyJson {
            cells: q
                .cells()
                .iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
            label: q.label().map(str::to_owned),
        }
    }
}

impl MixtureJson {
    pub fn into_mixture(self) -> Result<MixtureSpec> {
        let space = space_from_atoms(self.atoms)?;
        let components = self
            .components
            .into_iter()
            .map(|c| {
                DiscreteMeasure::new(Arc::clone(&space), c.weights)
                    .map(|mu| (c.coefficient, mu))
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureSpec::new(components)
    }
}

impl IfsJson {
    pub fn into_spec(self) -> Result<IfsSpec> {
        IfsSpec::new(self.maps, self.probs, self.depth)
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::Input(format!("malformed JSON in {}: {e}", path.display())))
}

pub fn load_measure(path: impl AsRef<Path>) -> Result<DiscreteMeasure> {
    read_json::<MeasureJson>(path)?.into_measure()
}

pub fn load_family(path: impl AsRef<Path>) -> Result<CellFamily> {
    read_json::<FamilyJson>(path)?.into_family()
}

pub fn load_mixture(path: impl AsRef<Path>) -> Result<MixtureSpec> {
    read_json::<MixtureJson>(path)?.into_mixture()
}

pub fn load_ifs(path: impl AsRef<Path>) -> Result<IfsSpec> {
    read_json::<IfsJson>(path)?.into_spec()
}

/// Rounds to 12 significant digits, the crate's canonical output
/// precision: far above every verification tolerance, low enough to wash
/// out nondeterministic last-bit noise.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0; // normalizes −0.0
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific notation round-trips")
}

/// Recursively rounds every float in a JSON value to 12 significant
/// digits. Integers pass through untouched.
pub fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("checked is_f64");
                serde_json::Number::from_f64(round_sig(x))
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// Serializes with sorted keys and rounded floats: the byte-stable output
/// format all commands print.
pub fn to_stable_string(value: &impl Serialize) -> Result<String> {
    let v = round_floats(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)?)
}

pub fn write_json_file(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut s = to_stable_string(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn save_measure(path: impl AsRef<Path>, mu: &DiscreteMeasure) -> Result<()> {
    write_json_file(path, &MeasureJson::from_measure(mu))
}

/// The digest of one input file.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// A record of one CLI run: what was executed, on which inputs (by
/// content hash), with which seed, and how long it took. Two runs with
/// identical manifests (timings aside) print byte-identical JSON.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    pub tool_version: String,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, args: Vec<String>) -> Self {
        RunManifest {
            command: command.into(),
            args,
            inputs: Vec::new(),
            seed: None,
            rng: None,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn record_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.rng = Some("chacha8".to_owned());
    }

    pub fn record_timing(&mut self, label: impl Into<String>, elapsed: Duration) {
        self.timings_ms
            .insert(label.into(), elapsed.as_secs_f64() * 1e3);
    }
}
