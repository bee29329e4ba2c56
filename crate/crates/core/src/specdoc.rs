//! JSON cipher-spec documents and built-in presets.
//!
//! ```json
//! {"group": {"moduli": [3]}, "t": 9, "rounds": 2, "key_length": 20,
//!  "initial_perm": [...], "final_swap": true, "key_schedule": [[...], [...]],
//!  "round_fn": {"type": "sbox", "expansion": [...], "i": 2, "j": 3,
//!               "boxes": [[...], [...], [...]]}}
//! ```
//!
//! Wire maps are 1-based gather tables. A `"table"` round function lists one
//! image array per round instead. `{"preset": "edes"}` names a built-in spec.
//! Errors carry a JSON pointer to the offending value.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::edes::edes_spec;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::permnet::{CipherParams, CipherSpec, RoundFunction, RoundTable, WireMap};
use crate::sbox::{SBox, SBoxRoundSpec};

/// Names accepted by [`preset`].
pub const PRESETS: &[&str] = &["edes"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RoundFnDoc {
    #[serde(rename = "sbox")]
    SBox {
        expansion: Vec<usize>,
        i: usize,
        j: usize,
        boxes: Vec<Vec<u32>>,
    },
    #[serde(rename = "table")]
    Table { tables: Vec<Vec<u32>> },
}

/// Serialisable form of a [`CipherSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub group: GroupSpec,
    pub t: usize,
    pub rounds: usize,
    pub key_length: usize,
    pub initial_perm: Vec<usize>,
    pub final_swap: bool,
    pub key_schedule: Vec<Vec<usize>>,
    pub round_fn: RoundFnDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preset: Option<String>,
}

impl SpecDocument {
    pub fn from_spec(spec: &CipherSpec) -> Self {
        let round_fn = match spec.round_fn() {
            RoundFunction::SBox(s) => RoundFnDoc::SBox {
                expansion: s.expansion().one_based(),
                i: s.i(),
                j: s.j(),
                boxes: s.boxes().iter().map(|b| b.table().to_vec()).collect(),
            },
            RoundFunction::Tables(ts) => RoundFnDoc::Table {
                tables: ts.iter().map(|t| t.image().to_vec()).collect(),
            },
        };
        SpecDocument {
            group: spec.group().clone(),
            t: spec.t(),
            rounds: spec.rounds(),
            key_length: spec.key_length(),
            initial_perm: spec.initial_perm().one_based(),
            final_swap: spec.final_swap(),
            key_schedule: spec.key_schedule().iter().map(WireMap::one_based).collect(),
            round_fn,
            preset: None,
        }
    }

    pub fn to_spec(&self) -> Result<CipherSpec> {
        let g = &self.group;
        let wire = |path: String, in_len: usize, table: &[usize]| {
            WireMap::from_one_based(in_len, table).map_err(|e| Error::spec(path, e.to_string()))
        };
        let block = 2 * self.t;
        let initial_perm = wire("/initial_perm".into(), block, &self.initial_perm)?;
        let round_fn = match &self.round_fn {
            RoundFnDoc::SBox {
                expansion,
                i,
                j,
                boxes,
            } => {
                let expansion = wire("/round_fn/expansion".into(), self.t, expansion)?;
                let boxes = boxes
                    .iter()
                    .enumerate()
                    .map(|(p, b)| {
                        SBox::new(g.clone(), *i, *j, b.clone())
                            .map_err(|e| Error::spec(format!("/round_fn/boxes/{p}"), e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                RoundFunction::SBox(SBoxRoundSpec::new(boxes, expansion)?)
            }
            RoundFnDoc::Table { tables } => RoundFunction::Tables(
                tables
                    .iter()
                    .enumerate()
                    .map(|(r, img)| {
                        RoundTable::new(g.clone(), self.t, img.clone()).map_err(|e| {
                            Error::spec(format!("/round_fn/tables/{r}"), e.to_string())
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let sub_len = round_fn.subkey_len(self.t);
        let key_schedule = self
            .key_schedule
            .iter()
            .enumerate()
            .map(|(r, m)| {
                let w = wire(format!("/key_schedule/{r}"), self.key_length, m)?;
                if w.out_len() != sub_len {
                    return Err(Error::spec(
                        format!("/key_schedule/{r}"),
                        format!("selects {} nits, subkeys have {sub_len}", w.out_len()),
                    ));
                }
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        CipherSpec::new(CipherParams {
            group: g.clone(),
            t: self.t,
            rounds: self.rounds,
            initial_perm,
            key_length: self.key_length,
            key_schedule,
            round_fn,
            final_swap: self.final_swap,
        })
    }
}

pub fn preset(name: &str) -> Result<CipherSpec> {
    match name {
        "edes" => Ok(edes_spec()),
        other => Err(Error::spec(
            "/preset",
            format!("unknown preset '{other}', known: {}", PRESETS.join(", ")),
        )),
    }
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str) -> Result<T> {
    let path = format!("/{name}");
    let v = obj
        .get(name)
        .ok_or_else(|| Error::spec(&path, "missing field"))?;
    T::deserialize(v).map_err(|e| Error::spec(path, e.to_string()))
}

fn round_fn_doc(v: &Value) -> Result<RoundFnDoc> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::spec("/round_fn", "expected an object"))?;
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::spec("/round_fn/type", "expected \"sbox\" or \"table\""))?;
    let sub = |name: &str| -> Result<&Value> {
        obj.get(name)
            .ok_or_else(|| Error::spec(format!("/round_fn/{name}"), "missing field"))
    };
    let de = |name: &str| -> Result<Value> { sub(name).cloned() };
    match kind {
        "sbox" => Ok(RoundFnDoc::SBox {
            expansion: typed("/round_fn/expansion", de("expansion")?)?,
            i: typed("/round_fn/i", de("i")?)?,
            j: typed("/round_fn/j", de("j")?)?,
            boxes: typed("/round_fn/boxes", de("boxes")?)?,
        }),
        "table" => Ok(RoundFnDoc::Table {
            tables: typed("/round_fn/tables", de("tables")?)?,
        }),
        other => Err(Error::spec(
            "/round_fn/type",
            format!("unknown round function type '{other}'"),
        )),
    }
}

fn typed<T: DeserializeOwned>(path: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::spec(path, e.to_string()))
}

/// Parses and validates a spec document.
pub fn parse_spec(text: &str) -> Result<CipherSpec> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::spec("", format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::spec("", "expected a JSON object"))?;
    if let Some(name) = obj.get("preset") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::spec("/preset", "expected a string"))?;
        return preset(name);
    }
    let doc = SpecDocument {
        group: field(obj, "group")?,
        t: field(obj, "t")?,
        rounds: field(obj, "rounds")?,
        key_length: field(obj, "key_length")?,
        initial_perm: field(obj, "initial_perm")?,
        final_swap: field(obj, "final_swap")?,
        key_schedule: field(obj, "key_schedule")?,
        round_fn: round_fn_doc(
            obj.get("round_fn")
                .ok_or_else(|| Error::spec("/round_fn", "missing field"))?,
        )?,
        preset: None,
    };
    doc.to_spec()
}

/// Reads a spec document from disk; see [`parse_spec`].
pub fn load_spec(path: &Path) -> Result<CipherSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

pub fn spec_to_json(spec: &CipherSpec) -> String {
    serde_json::to_string_pretty(&SpecDocument::from_spec(spec)).expect("plain data")
}

// Wiring of the 8-nit, 10-nit-key two-round cipher used by `small_des`,
// following the usual simplified-DES layout.
const SMALL_IP: [usize; 8] = [2, 6, 3, 1, 4, 8, 5, 7];
const SMALL_EP: [usize; 8] = [4, 1, 2, 3, 2, 3, 4, 1];
const SMALL_P10: [usize; 10] = [3, 5, 2, 7, 4, 10, 1, 9, 8, 6];
const SMALL_P8: [usize; 8] = [6, 3, 7, 4, 8, 5, 10, 9];

/// 1-based gather table of `outer . inner`.
fn compose_gather(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    outer.iter().map(|&p| inner[p - 1]).collect()
}

/// Rotates both 5-nit halves of a 10-nit word left by `shift`.
fn rotate_halves(shift: usize) -> Vec<usize> {
    (0..10)
        .map(|p| {
            let base = p / 5 * 5;
            base + (p % 5 + shift) % 5 + 1
        })
        .collect()
}

/// A two-round cipher on 8-nit blocks over `Z_n` with 10-nit keys and two
/// seeded random S-boxes (`i = j = 2`, each row a permutation).
pub fn small_des(n: u32, seed: u64) -> Result<CipherSpec> {
    let g = GroupSpec::cyclic(n)?;
    let boxes = (0..2)
        .map(|b| SBox::generate(g.clone(), 2, 2, seed.wrapping_mul(2).wrapping_add(b), true))
        .collect::<Result<Vec<_>>>()?;
    let after_p10 = |shift: usize| compose_gather(&rotate_halves(shift), &SMALL_P10);
    let cp1 = compose_gather(&SMALL_P8, &after_p10(1));
    let cp2 = compose_gather(&SMALL_P8, &after_p10(3));
    CipherSpec::new(CipherParams {
        group: g,
        t: 4,
        rounds: 2,
        initial_perm: WireMap::from_one_based(8, &SMALL_IP)?,
        key_length: 10,
        key_schedule: vec![
            WireMap::from_one_based(10, &cp1)?,
            WireMap::from_one_based(10, &cp2)?,
        ],
        round_fn: RoundFunction::SBox(SBoxRoundSpec::new(
            boxes,
            WireMap::from_one_based(4, &SMALL_EP)?,
        )?),
        final_swap: true,
    })
}
