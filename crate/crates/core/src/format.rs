//! The sequence file: a JSON encoding of a [`RoundSequence`].
//!
//! ```json
//! {"k": 2, "model": "forest", "n": 4,
//!  "repeat": {"from": 1, "times": 3, "to": 1},
//!  "rounds": [{"parents": [-1, 0, -1, 2]}], "seed": 7}
//! ```
//!
//! Tree and forest rounds are parent arrays (`-1` marks a root), digraph
//! rounds are edge lists. `k` is omitted for trees. A repeat block without
//! `times` repeats forever. Output is canonical: keys sorted, no floats.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dissemination::{Repeat, RoundSequence};
use crate::error::{Error, Result};
use crate::families::{parent_array, Model, ModelSpec};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoundRecord {
    Parents { parents: Vec<i64> },
    Edges { edges: Vec<[usize; 2]> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub n: usize,
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub rounds: Vec<RoundRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<RepeatRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepeatRecord {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<usize>,
}

impl SequenceFile {
    pub fn from_sequence(seq: &RoundSequence, seed: Option<u64>) -> Self {
        let spec = seq.spec();
        let rounds = seq.rounds().iter().map(|g| round_record(spec.model, g)).collect();
        SequenceFile {
            n: spec.n,
            model: spec.model,
            k: (spec.model != Model::Trees).then_some(spec.k),
            rounds,
            repeat: seq.repeat().map(|r| RepeatRecord { from: r.from, to: r.to, times: r.times }),
            seed,
        }
    }

    /// Validates every round against the family and builds the sequence.
    pub fn to_sequence(&self) -> Result<RoundSequence> {
        let k = match (self.model, self.k) {
            (Model::Trees, None | Some(1)) => 1,
            (Model::Trees, Some(k)) => return Err(Error::Format(format!("tree sequences have k = 1, got {k}"))),
            (_, Some(k)) => k,
            (model, None) => return Err(Error::Format(format!("{model} sequences need `k`"))),
        };
        let spec = ModelSpec::new(self.model, self.n, k)?;
        let rounds = self
            .rounds
            .iter()
            .enumerate()
            .map(|(i, r)| decode_round(self.n, r).map_err(|e| Error::Format(format!("round {}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        let seq = RoundSequence::new(spec, rounds)?;
        match self.repeat {
            Some(r) => seq.with_repeat(Repeat { from: r.from, to: r.to, times: r.times }),
            None => Ok(seq),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Sorted-key JSON, one trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("sequence files always serialize");
        let mut text = serde_json::to_string_pretty(&value).expect("json values always serialize");
        text.push('\n');
        text
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_canonical_json())?)
    }
}

fn round_record(model: Model, g: &Graph) -> RoundRecord {
    match (model, parent_array(g)) {
        (Model::Trees | Model::KForests, Some(parents)) => RoundRecord::Parents {
            parents: parents.iter().map(|p| p.map_or(-1, |p| p as i64)).collect(),
        },
        _ => RoundRecord::Edges { edges: g.edges().map(|(x, y)| [x, y]).collect() },
    }
}

fn decode_round(n: usize, record: &RoundRecord) -> Result<Graph> {
    match record {
        RoundRecord::Parents { parents } => {
            if parents.len() != n {
                return Err(Error::Format(format!("parent array has {} entries, expected {n}", parents.len())));
            }
            let parents = parents
                .iter()
                .map(|&p| match p {
                    -1 => Ok(None),
                    p if p >= 0 && (p as usize) < n => Ok(Some(p as usize)),
                    p => Err(Error::Format(format!("parent {p} out of range"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let g = Graph::from_parents(&parents)?;
            if parent_array(&g).is_none() {
                return Err(Error::Format("parent array contains a cycle".into()));
            }
            Ok(g)
        }
        RoundRecord::Edges { edges } => Graph::new(n, edges.iter().map(|&[x, y]| (x, y))),
    }
}

/// Parses a sequence file and builds the validated sequence.
pub fn load_sequence(text: &str) -> Result<RoundSequence> {
    SequenceFile::parse(text)?.to_sequence()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys() {
        let spec = ModelSpec::forests(4, 2).unwrap();
        let g = Graph::from_parents(&[None, Some(0), None, Some(2)]).unwrap();
        let seq = RoundSequence::new(spec, vec![g])
            .unwrap()
            .with_repeat(Repeat { from: 1, to: 1, times: Some(3) })
            .unwrap();
        let text = SequenceFile::from_sequence(&seq, Some(7)).to_canonical_json();
        let compact: String = text.split_whitespace().collect();
        assert_eq!(
            compact,
            r#"{"k":2,"model":"forest","n":4,"repeat":{"from":1,"times":3,"to":1},"rounds":[{"parents":[-1,0,-1,2]}],"seed":7}"#
        );
        assert_eq!(load_sequence(&text).unwrap(), seq);
    }

    #[test]
    fn digraph_rounds_are_edge_lists() {
        let spec = ModelSpec::rooted(3, 2).unwrap();
        let g = Graph::new(3, [(0, 1), (1, 0), (0, 2)]).unwrap();
        let seq = RoundSequence::new(spec, vec![g]).unwrap();
        let file = SequenceFile::from_sequence(&seq, None);
        assert!(matches!(file.rounds[0], RoundRecord::Edges { .. }));
        assert_eq!(file.to_sequence().unwrap(), seq);
    }

    #[test]
    fn tree_files_omit_k() {
        let text = r#"{"model":"tree","n":3,"rounds":[{"parents":[-1,0,1]}]}"#;
        let seq = load_sequence(text).unwrap();
        assert_eq!(seq.spec().k, 1);
        assert!(!SequenceFile::from_sequence(&seq, None).to_canonical_json().contains("\"k\""));
    }

    #[test]
    fn rejects_bad_files() {
        let cases = [
            r#"{"model":"tree","n":3,"rounds":[{"parents":[-1,0]}]}"#,
            r#"{"model":"tree","n":3,"rounds":[{"parents":[1,2,0]}]}"#,
            r#"{"model":"tree","n":3,"rounds":[{"parents":[-1,-1,0]}]}"#,
            r#"{"model":"tree","n":3,"rounds":[{"parents":[-1,5,0]}]}"#,
            r#"{"model":"forest","n":3,"rounds":[]}"#,
            r#"{"model":"tree","n":3,"k":2,"rounds":[]}"#,
            r#"{"model":"tree","n":3,"rounds":[],"colour":1}"#,
            r#"{"model":"tree","n":3,"rounds":[{"parents":[-1,0,1]}],"repeat":{"from":1,"to":2}}"#,
        ];
        for text in cases {
            assert!(load_sequence(text).is_err(), "{text}");
        }
    }
}
