//! Versioned text model files.
//!
//! Layout, one record per line, tokens separated by single spaces:
//!
//! ```text
//! abcboost-model 1
//! algorithm <mart|abc-mart|logitboost|abc-logitboost|classic-logitboost>
//! num_classes <K>
//! num_features <D>
//! class_labels <original label of class 0> ... <of class K-1>
//! max_leaves <J>
//! shrinkage <real>
//! iterations_requested <M>
//! min_leaf <int>
//! z_max <real>
//! loss_stop <real>
//! iterations <count>
//! iteration <m> base <b|-> trees <T>
//! tree <node count>
//! split <feature> <threshold> <left> <right>
//! leaf <value>
//! ...
//! checksum sha256 <64 hex digits>
//! ```
//!
//! Every real is the 16 lowercase hex digits of its IEEE-754 bit pattern, so
//! a round trip is exact. Nodes are listed in id order with the root first;
//! a sample goes to `left` iff `x[feature] <= threshold`. Non-abc iterations
//! list one tree per class in class order; abc iterations list the `K - 1`
//! trees of the classes other than `base`, ascending. The checksum covers
//! every byte before the checksum line.

use std::fmt::Write as _;
use std::path::Path;

use abcboost_core::{Algorithm, BoostedModel, IterationRecord, Node, RegressionTree, TrainConfig};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{read_text, write_atomic};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "abcboost-model";
const CHECKSUM_PREFIX: &str = "checksum sha256 ";

/// A model together with the original label of each class id.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: BoostedModel,
    pub class_labels: Vec<i64>,
}

impl ModelFile {
    /// Class ids are their own labels.
    pub fn identity(model: BoostedModel) -> Self {
        let class_labels = (0..model.num_classes() as i64).collect();
        Self {
            model,
            class_labels,
        }
    }
}

pub fn encode_real(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

pub fn decode_real(token: &str) -> Option<f64> {
    if token.len() != 16 {
        return None;
    }
    u64::from_str_radix(token, 16).ok().map(f64::from_bits)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Serializes a model to the text format.
pub fn model_to_string(model: &BoostedModel) -> String {
    file_to_string(&ModelFile::identity(model.clone()))
}

pub fn file_to_string(file: &ModelFile) -> String {
    let model = &file.model;
    let c = model.config();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "algorithm {}", c.algorithm);
    let _ = writeln!(out, "num_classes {}", model.num_classes());
    let _ = writeln!(out, "num_features {}", model.num_features());
    let labels: Vec<String> = file.class_labels.iter().map(|l| l.to_string()).collect();
    let _ = writeln!(out, "class_labels {}", labels.join(" "));
    let _ = writeln!(out, "max_leaves {}", c.max_leaves);
    let _ = writeln!(out, "shrinkage {}", encode_real(c.shrinkage));
    let _ = writeln!(out, "iterations_requested {}", c.iterations);
    let _ = writeln!(out, "min_leaf {}", c.min_leaf);
    let _ = writeln!(out, "z_max {}", encode_real(c.z_max));
    let _ = writeln!(out, "loss_stop {}", encode_real(c.loss_stop));
    let _ = writeln!(out, "iterations {}", model.iterations().len());
    for (m, record) in model.iterations().iter().enumerate() {
        let base = record.base().map_or("-".to_string(), |b| b.to_string());
        let _ = writeln!(
            out,
            "iteration {} base {base} trees {}",
            m + 1,
            record.trees().len()
        );
        for tree in record.trees() {
            let _ = writeln!(out, "tree {}", tree.nodes().len());
            for node in tree.nodes() {
                match *node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        let _ = writeln!(
                            out,
                            "split {feature} {} {left} {right}",
                            encode_real(threshold)
                        );
                    }
                    Node::Leaf { value } => {
                        let _ = writeln!(out, "leaf {}", encode_real(value));
                    }
                }
            }
        }
    }
    let digest = sha256_hex(out.as_bytes());
    let _ = writeln!(out, "{CHECKSUM_PREFIX}{digest}");
    out
}

pub fn save_model(model: &BoostedModel, path: &Path) -> Result<()> {
    write_atomic(path, model_to_string(model).as_bytes())
}

pub fn save_model_file(file: &ModelFile, path: &Path) -> Result<()> {
    write_atomic(path, file_to_string(file).as_bytes())
}

pub fn load_model(path: &Path) -> Result<BoostedModel> {
    load_model_file(path).map(|f| f.model)
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    file_from_str(&read_text(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.line,
            message: message.into(),
        }
    }

    /// Next line split into tokens; the first must equal `key`.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (i, text) = self
            .inner
            .next()
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {key:?}")))?;
        self.line = i + 1;
        let tokens: Vec<&str> = text.split(' ').collect();
        if tokens[0] != key {
            return Err(self.err(format!("expected {key:?}, found {:?}", tokens[0])));
        }
        Ok(tokens[1..].to_vec())
    }

    fn value(&mut self, key: &str) -> Result<&'a str> {
        let tokens = self.expect(key)?;
        match tokens.as_slice() {
            [v] => Ok(v),
            _ => Err(self.err(format!("{key} takes exactly one value"))),
        }
    }

    fn int(&mut self, key: &str) -> Result<usize> {
        let v = self.value(key)?;
        v.parse()
            .map_err(|_| self.err(format!("bad integer {v:?}")))
    }

    fn real_token(&self, token: &str) -> Result<f64> {
        decode_real(token).ok_or_else(|| self.err(format!("bad real {token:?}")))
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let v = self.value(key)?;
        self.real_token(v)
    }

    fn int_token(&self, token: &str) -> Result<usize> {
        token
            .parse()
            .map_err(|_| self.err(format!("bad integer {token:?}")))
    }
}

pub fn model_from_str(text: &str) -> Result<BoostedModel> {
    file_from_str(text).map(|f| f.model)
}

/// Parses and verifies a model file's contents.
///
/// The version is checked first, then the checksum, then the structure.
pub fn file_from_str(text: &str) -> Result<ModelFile> {
    let first = text.lines().next().unwrap_or("");
    match first.split_once(' ') {
        Some((MAGIC, version)) => {
            if version != FORMAT_VERSION.to_string() {
                return Err(Error::UnsupportedVersion {
                    found: version.to_string(),
                    supported: FORMAT_VERSION,
                });
            }
        }
        _ => {
            return Err(Error::ModelFormat {
                line: 1,
                message: format!("not a model file (expected {MAGIC:?} header)"),
            })
        }
    }

    let checksum_at = text
        .rfind(CHECKSUM_PREFIX)
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .ok_or_else(|| Error::Checksum("checksum line missing (truncated file?)".into()))?;
    let (body, trailer) = text.split_at(checksum_at);
    let stored = trailer[CHECKSUM_PREFIX.len()..].trim_end_matches('\n');
    let actual = sha256_hex(body.as_bytes());
    if stored != actual {
        return Err(Error::Checksum(format!(
            "stored {stored}, computed {actual}"
        )));
    }

    let mut lines = Lines {
        inner: body.lines().enumerate(),
        line: 0,
    };
    lines.expect(MAGIC)?;
    let algorithm_name = lines.value("algorithm")?;
    let algorithm: Algorithm = algorithm_name
        .parse()
        .map_err(|_| lines.err(format!("unknown algorithm {algorithm_name:?}")))?;
    let num_classes = lines.int("num_classes")?;
    let num_features = lines.int("num_features")?;
    let class_labels = lines
        .expect("class_labels")?
        .iter()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| lines.err(format!("bad label {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if class_labels.len() != num_classes {
        return Err(lines.err("class_labels must list K labels"));
    }
    let config = TrainConfig {
        algorithm,
        max_leaves: lines.int("max_leaves")?,
        shrinkage: lines.real("shrinkage")?,
        iterations: lines.int("iterations_requested")?,
        min_leaf: lines.int("min_leaf")?,
        z_max: lines.real("z_max")?,
        loss_stop: lines.real("loss_stop")?,
    };
    config.validate()?;
    let count = lines.int("iterations")?;
    if count > config.iterations {
        return Err(lines.err("more iterations than requested"));
    }
    let mut records = Vec::with_capacity(count);
    for m in 1..=count {
        let tokens = lines.expect("iteration")?;
        let [index, "base", base, "trees", trees] = tokens.as_slice() else {
            return Err(lines.err("expected `iteration <m> base <b> trees <T>`"));
        };
        if lines.int_token(index)? != m {
            return Err(lines.err(format!("expected iteration {m}")));
        }
        let base = match *base {
            "-" => None,
            b => Some(lines.int_token(b)?),
        };
        let tree_count = lines.int_token(trees)?;
        if tree_count > num_classes {
            return Err(lines.err("more trees than classes"));
        }
        let mut trees = Vec::with_capacity(tree_count);
        for _ in 0..tree_count {
            let node_count = lines.int("tree")?;
            if node_count == 0 || node_count > 2 * config.max_leaves {
                return Err(lines.err("node count out of range"));
            }
            let mut nodes = Vec::with_capacity(node_count);
            for _ in 0..node_count {
                let (i, text) = lines
                    .inner
                    .next()
                    .ok_or_else(|| lines.err("unexpected end of file in tree"))?;
                lines.line = i + 1;
                let tokens: Vec<&str> = text.split(' ').collect();
                let node = match tokens.as_slice() {
                    ["split", feature, threshold, left, right] => Node::Split {
                        feature: lines.int_token(feature)? as u32,
                        threshold: lines.real_token(threshold)?,
                        left: lines.int_token(left)? as u32,
                        right: lines.int_token(right)? as u32,
                    },
                    ["leaf", value] => Node::Leaf {
                        value: lines.real_token(value)?,
                    },
                    _ => return Err(lines.err("expected a split or leaf node")),
                };
                nodes.push(node);
            }
            let tree = RegressionTree::from_nodes(nodes, num_features)
                .map_err(|e| lines.err(e.to_string()))?;
            if tree.leaf_count() > config.max_leaves {
                return Err(lines.err("tree has more leaves than max_leaves"));
            }
            trees.push(tree);
        }
        records.push(IterationRecord::new(base, trees));
    }
    if let Some((i, extra)) = lines.inner.next() {
        return Err(Error::ModelFormat {
            line: i + 1,
            message: format!("unexpected trailing line {extra:?}"),
        });
    }
    let model = BoostedModel::from_parts(config, num_classes, num_features, records)?;
    Ok(ModelFile {
        model,
        class_labels,
    })
}
