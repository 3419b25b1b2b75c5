//! JSON documents for instances and strategies.
//!
//! Elements are referred to by name everywhere. Per-element maps are
//! `BTreeMap`s so that saving is deterministic; elements missing from a
//! weight map get weight zero.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{ElementSet, GroundSet, MixedStrategy, Objective, ProblemInstance};
use crate::lpscheme::FractionalPoint;
use crate::systems::IndependenceSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub elements: Vec<String>,
    pub system: SystemDoc,
    pub objectives: Vec<ObjectiveDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemDoc {
    Uniform {
        rank: usize,
    },
    Partition {
        blocks: Vec<BlockDoc>,
    },
    Explicit {
        sets: Vec<Vec<String>>,
    },
    Knapsack {
        sizes: BTreeMap<String, u64>,
        capacity: u64,
    },
    Intersection {
        matroids: Vec<SystemDoc>,
    },
    /// Arcs are the elements; `arcs[i].id` names an element.
    StPath {
        nodes: Vec<String>,
        source: String,
        sink: String,
        arcs: Vec<ArcDoc>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub elements: Vec<String>,
    pub capacity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveDoc {
    /// On s–t path systems the weights are arc lengths.
    Linear { weights: BTreeMap<String, f64> },
    /// Values indexed by subset bit mask in element order.
    SubmodularTable { values: Vec<f64> },
    /// `covers[e]` lists the item indices covered by element `e`.
    Coverage {
        covers: BTreeMap<String, Vec<usize>>,
        item_weights: Vec<f64>,
    },
    CardinalityRatio {
        values: BTreeMap<String, f64>,
        k: usize,
        denominator: f64,
    },
}

fn dense<T: Copy + Default>(ground: &GroundSet, map: &BTreeMap<String, T>) -> Result<Vec<T>> {
    let mut out = vec![T::default(); ground.len()];
    for (name, &v) in map {
        out[ground.index_of(name)?] = v;
    }
    Ok(out)
}

fn sparse<T: Copy>(ground: &GroundSet, values: &[T]) -> BTreeMap<String, T> {
    ground.names().iter().cloned().zip(values.iter().copied()).collect()
}

fn build_system(doc: &SystemDoc, ground: &GroundSet) -> Result<IndependenceSystem> {
    let n = ground.len();
    match doc {
        SystemDoc::Uniform { rank } => IndependenceSystem::uniform(n, *rank),
        SystemDoc::Partition { blocks } => {
            let mut block_of = vec![usize::MAX; n];
            for (b, block) in blocks.iter().enumerate() {
                for name in &block.elements {
                    let e = ground.index_of(name)?;
                    if block_of[e] != usize::MAX {
                        return Err(Error::InvalidInstance(format!("element `{name}` lies in two blocks")));
                    }
                    block_of[e] = b;
                }
            }
            if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
                return Err(Error::InvalidInstance(format!(
                    "element `{}` lies in no block",
                    ground.name(e)
                )));
            }
            IndependenceSystem::partition(block_of, blocks.iter().map(|b| b.capacity).collect())
        }
        SystemDoc::Explicit { sets } => {
            let sets = sets.iter().map(|s| ground.set_of(s)).collect::<Result<Vec<_>>>()?;
            IndependenceSystem::explicit(n, sets)
        }
        SystemDoc::Knapsack { sizes, capacity } => {
            for e in 0..n {
                if !sizes.contains_key(ground.name(e)) {
                    return Err(Error::InvalidInstance(format!(
                        "element `{}` has no size",
                        ground.name(e)
                    )));
                }
            }
            IndependenceSystem::knapsack(dense(ground, sizes)?, *capacity)
        }
        SystemDoc::Intersection { matroids } => IndependenceSystem::intersection(
            matroids
                .iter()
                .map(|m| build_system(m, ground))
                .collect::<Result<Vec<_>>>()?,
        ),
        SystemDoc::StPath {
            nodes,
            source,
            sink,
            arcs,
        } => {
            let node = |name: &str| {
                nodes
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| Error::InvalidInstance(format!("unknown node `{name}`")))
            };
            if arcs.len() != n {
                return Err(Error::InvalidInstance(format!("{} arcs but {n} elements", arcs.len())));
            }
            let mut list = vec![(0, 0); n];
            let mut seen = vec![false; n];
            for arc in arcs {
                let e = ground.index_of(&arc.id)?;
                if std::mem::replace(&mut seen[e], true) {
                    return Err(Error::InvalidInstance(format!("arc `{}` listed twice", arc.id)));
                }
                list[e] = (node(&arc.from)?, node(&arc.to)?);
            }
            IndependenceSystem::st_path(nodes.len(), list, node(source)?, node(sink)?)
        }
    }
}

fn system_doc(system: &IndependenceSystem, ground: &GroundSet) -> SystemDoc {
    match system {
        IndependenceSystem::Uniform(u) => SystemDoc::Uniform { rank: u.rank_bound() },
        IndependenceSystem::Partition(p) => {
            let mut blocks: Vec<BlockDoc> = p
                .capacities()
                .iter()
                .map(|&capacity| BlockDoc {
                    elements: Vec::new(),
                    capacity,
                })
                .collect();
            for (e, &b) in p.block_of().iter().enumerate() {
                blocks[b].elements.push(ground.name(e).to_string());
            }
            SystemDoc::Partition { blocks }
        }
        IndependenceSystem::Explicit(x) => SystemDoc::Explicit {
            sets: x.sets().iter().map(|s| ground.names_of(s)).collect(),
        },
        IndependenceSystem::Knapsack(k) => SystemDoc::Knapsack {
            sizes: sparse(ground, k.sizes()),
            capacity: k.capacity(),
        },
        IndependenceSystem::Intersection(ms) => SystemDoc::Intersection {
            matroids: ms.iter().map(|m| system_doc(m, ground)).collect(),
        },
        IndependenceSystem::StPath(g) => {
            let name = |v: usize| format!("v{v}");
            SystemDoc::StPath {
                nodes: (0..g.node_count()).map(name).collect(),
                source: name(g.source()),
                sink: name(g.sink()),
                arcs: g
                    .arcs()
                    .iter()
                    .enumerate()
                    .map(|(a, &(u, v))| ArcDoc {
                        id: ground.name(a).to_string(),
                        from: name(u),
                        to: name(v),
                    })
                    .collect(),
            }
        }
    }
}

fn build_objective(doc: &ObjectiveDoc, ground: &GroundSet) -> Result<Objective> {
    match doc {
        ObjectiveDoc::Linear { weights } => Objective::linear(dense(ground, weights)?),
        ObjectiveDoc::SubmodularTable { values } => {
            if values.len() != 1usize.checked_shl(ground.len() as u32).unwrap_or(0) {
                return Err(Error::InvalidInstance(format!(
                    "value table has {} entries for {} elements",
                    values.len(),
                    ground.len()
                )));
            }
            Objective::submodular_table(values.clone())
        }
        ObjectiveDoc::Coverage { covers, item_weights } => {
            let mut dense_covers = vec![Vec::new(); ground.len()];
            for (name, items) in covers {
                dense_covers[ground.index_of(name)?] = items.clone();
            }
            Objective::coverage(dense_covers, item_weights.clone())
        }
        ObjectiveDoc::CardinalityRatio { values, k, denominator } => {
            Objective::cardinality_ratio(dense(ground, values)?, *k, *denominator)
        }
    }
}

fn objective_doc(f: &Objective, ground: &GroundSet) -> ObjectiveDoc {
    match f {
        Objective::Linear(l) => ObjectiveDoc::Linear {
            weights: sparse(ground, l.weights()),
        },
        Objective::SubmodularTable(t) => ObjectiveDoc::SubmodularTable {
            values: t.values().to_vec(),
        },
        Objective::Coverage(c) => ObjectiveDoc::Coverage {
            covers: ground.names().iter().cloned().zip(c.covers().iter().cloned()).collect(),
            item_weights: c.item_weights().to_vec(),
        },
        Objective::CardinalityRatio(c) => ObjectiveDoc::CardinalityRatio {
            values: sparse(ground, c.values()),
            k: c.k(),
            denominator: c.denominator(),
        },
    }
}

impl InstanceDocument {
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let ground = GroundSet::new(self.elements.iter().cloned())?;
        let system = build_system(&self.system, &ground)?;
        let objectives = self
            .objectives
            .iter()
            .map(|o| build_objective(o, &ground))
            .collect::<Result<Vec<_>>>()?;
        ProblemInstance::new(ground, objectives, system)
    }

    pub fn from_instance(inst: &ProblemInstance) -> Self {
        let ground = inst.ground();
        InstanceDocument {
            elements: ground.names().to_vec(),
            system: system_doc(inst.system(), ground),
            objectives: inst.objectives().iter().map(|f| objective_doc(f, ground)).collect(),
        }
    }
}

pub fn instance_from_str(text: &str) -> Result<ProblemInstance> {
    serde_json::from_str::<InstanceDocument>(text)?.to_instance()
}

pub fn instance_to_string(inst: &ProblemInstance) -> Result<String> {
    Ok(serde_json::to_string_pretty(&InstanceDocument::from_instance(inst))?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    instance_from_str(&fs::read_to_string(path)?)
}

pub fn save_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance_to_string(inst)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyDoc {
    pub support: Vec<SupportEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportEntry {
    pub set: Vec<String>,
    pub probability: f64,
}

impl StrategyDoc {
    pub fn from_strategy(p: &MixedStrategy, ground: &GroundSet) -> Self {
        StrategyDoc {
            support: p
                .support()
                .iter()
                .map(|(s, q)| SupportEntry {
                    set: ground.names_of(s),
                    probability: *q,
                })
                .collect(),
        }
    }

    pub fn to_strategy(&self, ground: &GroundSet) -> Result<MixedStrategy> {
        let support = self
            .support
            .iter()
            .map(|e| Ok((ground.set_of(&e.set)?, e.probability)))
            .collect::<Result<Vec<(ElementSet, f64)>>>()?;
        MixedStrategy::new(support)
    }
}

/// `{"x": {"element": value, ...}}`; missing elements are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub x: BTreeMap<String, f64>,
}

impl PointDoc {
    pub fn to_point(&self, ground: &GroundSet) -> Result<FractionalPoint> {
        FractionalPoint::new(dense(ground, &self.x)?)
    }

    pub fn from_point(x: &FractionalPoint, ground: &GroundSet) -> Self {
        PointDoc {
            x: sparse(ground, x.as_slice()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INTRO: &str = r#"{
        "elements": ["a", "b"],
        "system": {"kind": "uniform", "rank": 1},
        "objectives": [
            {"kind": "linear", "weights": {"a": 1.0}},
            {"kind": "linear", "weights": {"b": 1.0}}
        ]
    }"#;

    #[test]
    fn intro_loads() {
        let inst = instance_from_str(INTRO).unwrap();
        assert_eq!(inst.ground_size(), 2);
        assert_eq!(inst.objectives()[0].linear_weights().unwrap(), &[1.0, 0.0]);
        let once = instance_to_string(&inst).unwrap();
        let twice = instance_to_string(&instance_from_str(&once).unwrap()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rejects_unknown_names() {
        let bad = INTRO.replace("\"b\": 1.0", "\"c\": 1.0");
        assert!(matches!(instance_from_str(&bad), Err(Error::UnknownElement(_))));
        let bad = INTRO.replace("uniform", "bogus");
        assert!(matches!(instance_from_str(&bad), Err(Error::Json(_))));
    }

    #[test]
    fn path_round_trip() {
        let text = r#"{
            "elements": ["top", "bottom"],
            "system": {"kind": "st_path", "nodes": ["s", "t"], "source": "s", "sink": "t",
                       "arcs": [{"id": "bottom", "from": "s", "to": "t"},
                                {"id": "top", "from": "s", "to": "t"}]},
            "objectives": [{"kind": "linear", "weights": {"top": 1.0, "bottom": 3.0}}]
        }"#;
        let inst = instance_from_str(text).unwrap();
        let once = instance_to_string(&inst).unwrap();
        assert!(once.contains("\"v0\""));
        assert_eq!(instance_to_string(&instance_from_str(&once).unwrap()).unwrap(), once);
    }

    #[test]
    fn strategy_round_trip() {
        let ground = GroundSet::new(["a", "b"]).unwrap();
        let p = MixedStrategy::new(vec![(ElementSet::singleton(0), 0.25), (ElementSet::singleton(1), 0.75)]).unwrap();
        let doc = StrategyDoc::from_strategy(&p, &ground);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(
            text,
            r#"{"support":[{"set":["a"],"probability":0.25},{"set":["b"],"probability":0.75}]}"#
        );
        let back: StrategyDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_strategy(&ground).unwrap(), p);
    }
}
