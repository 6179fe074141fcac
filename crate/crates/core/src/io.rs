//! On-disk formats.
//!
//! * Tree files are JSON:
//!   `{"alpha": a, "nodes": [{"id": i, "parent": p | null}, ...], "links": [{"child": z, "f": f, "g": g}, ...]}`.
//! * Sample files are CSV with one column per leaf, headed by its id in
//!   ascending order. Full samples append one column per hidden node headed
//!   `h<id>`. Values are `0` or `1`.
//! * Trace files are CSV `n,alpha_hat,f_<z>,g_<z>,...[,err]`, links in
//!   ascending child order.
//! * Comparison files are CSV `seed,n,unsup_err,sup_err`, with a JSON
//!   summary of the per-checkpoint medians.
//!
//! Reals are written in Rust's shortest round-trip notation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{ComparisonTable, MedianPoint};
use crate::learner::LearningTrace;
use crate::tree_model::{
    validate, CausalTree, FullAssignment, LeafSample, LinkParams, NodeId, TreeStructure,
    ValidationReport,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    alpha: f64,
    nodes: Vec<NodeEntry>,
    links: Vec<LinkEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: usize,
    parent: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkEntry {
    child: usize,
    f: f64,
    g: f64,
}

pub fn tree_to_json(tree: &CausalTree) -> String {
    let s = tree.structure();
    let file = TreeFile {
        alpha: tree.alpha(),
        nodes: s
            .nodes()
            .map(|n| NodeEntry {
                id: n.0,
                parent: s.parent(n).map(|p| p.0),
            })
            .collect(),
        links: tree
            .links()
            .map(|(z, l)| LinkEntry {
                child: z.0,
                f: l.f,
                g: l.g,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("tree serializes");
    out.push('\n');
    out
}

/// Parses and validates a tree; warnings are returned alongside.
pub fn tree_from_json(text: &str, origin: &Path) -> Result<(CausalTree, ValidationReport)> {
    let format_err = |message: String| Error::Format {
        path: origin.to_path_buf(),
        message,
    };
    let file: TreeFile = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;

    let n = file.nodes.len();
    let mut parents: Vec<Option<Option<usize>>> = vec![None; n];
    for entry in &file.nodes {
        let slot = parents
            .get_mut(entry.id)
            .ok_or_else(|| format_err(format!("node id {} is not in 0..{n}", entry.id)))?;
        if slot.is_some() {
            return Err(format_err(format!("node id {} appears twice", entry.id)));
        }
        *slot = Some(entry.parent);
    }
    let parents: Vec<Option<usize>> = parents.into_iter().map(|p| p.expect("ids are dense")).collect();
    let structure = TreeStructure::from_parents(&parents)?;

    let mut links = BTreeMap::new();
    for entry in &file.links {
        let link = LinkParams::new(entry.f, entry.g);
        if links.insert(NodeId(entry.child), link).is_some() {
            return Err(format_err(format!("node {} has two links", entry.child)));
        }
    }
    let tree = CausalTree::new(structure, file.alpha, links)?;
    let report = validate(&tree);
    if !report.is_valid() {
        return Err(Error::Invalid(
            report.violations.iter().map(|d| d.to_string()).collect(),
        ));
    }
    Ok((tree, report))
}

pub fn read_tree(path: &Path) -> Result<(CausalTree, ValidationReport)> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    tree_from_json(&text, path)
}

pub fn write_tree(path: &Path, tree: &CausalTree) -> Result<()> {
    std::fs::write(path, tree_to_json(tree))?;
    Ok(())
}

fn bit(v: bool) -> &'static str {
    if v {
        "1"
    } else {
        "0"
    }
}

fn sample_header(structure: &TreeStructure, full: bool) -> Vec<String> {
    let mut header: Vec<String> = structure.leaves().iter().map(|l| l.to_string()).collect();
    if full {
        header.extend(structure.hidden().map(|h| format!("h{h}")));
    }
    header
}

pub fn write_samples<W: Write>(
    out: W,
    structure: &TreeStructure,
    samples: &[LeafSample],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sample_header(structure, false)).map_err(csv_io)?;
    for sample in samples {
        w.write_record(sample.values().iter().map(|&v| bit(v)))
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_full_samples<W: Write>(
    out: W,
    structure: &TreeStructure,
    fulls: &[FullAssignment],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sample_header(structure, true)).map_err(csv_io)?;
    let order: Vec<NodeId> = structure
        .leaves()
        .iter()
        .copied()
        .chain(structure.hidden())
        .collect();
    for full in fulls {
        w.write_record(order.iter().map(|&n| bit(full.get(n))))
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Column layout of a sample file: which node each column holds.
struct SampleColumns {
    nodes: Vec<NodeId>,
}

fn parse_header(
    header: &csv::StringRecord,
    structure: &TreeStructure,
    path: &Path,
) -> Result<SampleColumns> {
    let err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut nodes = Vec::with_capacity(header.len());
    for field in header {
        let field = field.trim();
        let (hidden, digits) = match field.strip_prefix('h') {
            Some(rest) => (true, rest),
            None => (false, field),
        };
        let id: usize = digits
            .parse()
            .map_err(|_| err(format!("bad column name {field:?}")))?;
        let node = NodeId(id);
        if !structure.contains(node) {
            return Err(err(format!("column {field:?} names an unknown node")));
        }
        if hidden == structure.is_leaf(node) {
            let kind = if hidden { "leaf" } else { "hidden node" };
            return Err(err(format!("column {field:?} refers to a {kind}")));
        }
        if nodes.contains(&node) {
            return Err(err(format!("column {field:?} appears twice")));
        }
        nodes.push(node);
    }
    Ok(SampleColumns { nodes })
}

fn parse_rows(
    input: impl Read,
    structure: &TreeStructure,
    path: &Path,
    mut on_row: impl FnMut(&SampleColumns, Vec<Option<bool>>),
    require_hidden: bool,
) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| row_error(path, &e))?.clone();
    let columns = parse_header(&header, structure, path)?;
    let leaf_cols = columns.nodes.iter().filter(|n| structure.is_leaf(**n)).count();
    if leaf_cols != structure.leaves().len() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!(
                "file has {leaf_cols} leaf columns but the tree has {} leaves",
                structure.leaves().len()
            ),
        });
    }
    let hidden_cols = columns.nodes.len() - leaf_cols;
    if require_hidden && hidden_cols != structure.hidden().count() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "full sample file must have a column for every hidden node".into(),
        });
    }

    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(row_error(path, &e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        let mut values = vec![None; structure.node_count()];
        for (node, field) in columns.nodes.iter().zip(record.iter()) {
            values[node.0] = Some(match field {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Row {
                        path: path.to_path_buf(),
                        line,
                        message: format!("expected 0 or 1, found {other:?}"),
                    })
                }
            });
        }
        on_row(&columns, values);
    }
    Ok(())
}

fn row_error(path: &Path, e: &csv::Error) -> Error {
    Error::Row {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Reads leaf samples; hidden columns, if present, are ignored.
pub fn read_samples_from(
    input: impl Read,
    structure: &TreeStructure,
    path: &Path,
) -> Result<Vec<LeafSample>> {
    let mut out = Vec::new();
    parse_rows(
        input,
        structure,
        path,
        |_, values| {
            out.push(LeafSample::new(
                structure
                    .leaves()
                    .iter()
                    .map(|l| values[l.0].expect("every leaf column is present"))
                    .collect(),
            ))
        },
        false,
    )?;
    Ok(out)
}

pub fn read_samples(path: &Path, structure: &TreeStructure) -> Result<Vec<LeafSample>> {
    read_samples_from(File::open(path)?, structure, path)
}

pub fn read_full_samples(path: &Path, structure: &TreeStructure) -> Result<Vec<FullAssignment>> {
    let mut out = Vec::new();
    parse_rows(
        File::open(path)?,
        structure,
        path,
        |_, values| {
            out.push(FullAssignment::new(
                values.into_iter().map(|v| v.expect("checked")).collect(),
            ))
        },
        true,
    )?;
    Ok(out)
}

pub fn trace_header(structure: &TreeStructure, with_err: bool) -> Vec<String> {
    let mut header = vec!["n".to_string(), "alpha_hat".to_string()];
    for (_, z) in structure.edges() {
        header.push(format!("f_{z}"));
        header.push(format!("g_{z}"));
    }
    if with_err {
        header.push("err".into());
    }
    header
}

/// Writes one row per checkpoint; `errors`, when given, must have one entry
/// per checkpoint.
pub fn write_trace<W: Write>(
    out: W,
    trace: &LearningTrace,
    errors: Option<&[f64]>,
) -> Result<()> {
    let Some(first) = trace.checkpoints.first() else {
        return Err(Error::InvalidArgument("trace has no checkpoints".into()));
    };
    if let Some(errs) = errors {
        if errs.len() != trace.checkpoints.len() {
            return Err(Error::InvalidArgument(
                "error column length differs from checkpoint count".into(),
            ));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(first.estimates.structure(), errors.is_some()))
        .map_err(csv_io)?;
    for (k, cp) in trace.checkpoints.iter().enumerate() {
        let mut row = vec![cp.n.to_string()];
        row.extend(cp.estimates.parameter_values().iter().map(f64::to_string));
        if let Some(errs) = errors {
            row.push(errs[k].to_string());
        }
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub n: Vec<u64>,
    pub values: Vec<Vec<f64>>,
}

pub fn read_trace(path: &Path) -> Result<TraceTable> {
    let mut reader = csv::Reader::from_reader(File::open(path)?);
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| row_error(path, &e))?
        .iter()
        .map(str::to_string)
        .collect();
    if columns.first().map(String::as_str) != Some("n") {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "first trace column must be n".into(),
        });
    }
    let mut table = TraceTable {
        columns,
        n: Vec::new(),
        values: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| row_error(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |field: &str| Error::Row {
            path: path.to_path_buf(),
            line,
            message: format!("cannot parse {field:?}"),
        };
        let n = record[0].parse().map_err(|_| bad(&record[0]))?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|_| bad(f)))
            .collect::<Result<Vec<_>>>()?;
        table.n.push(n);
        table.values.push(values);
    }
    Ok(table)
}

pub fn write_comparison<W: Write>(out: W, table: &ComparisonTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "n", "unsup_err", "sup_err"])
        .map_err(csv_io)?;
    for r in &table.rows {
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            r.unsup_err.to_string(),
            r.sup_err.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ComparisonSummary {
    pub seeds: Vec<u64>,
    pub medians: Vec<MedianEntry>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct MedianEntry {
    pub n: u64,
    pub unsup_median: f64,
    pub sup_median: f64,
}

impl From<&MedianPoint> for MedianEntry {
    fn from(m: &MedianPoint) -> Self {
        Self {
            n: m.n,
            unsup_median: m.unsup_median,
            sup_median: m.sup_median,
        }
    }
}

pub fn comparison_summary_json(table: &ComparisonTable) -> String {
    let summary = ComparisonSummary {
        seeds: table.seeds.clone(),
        medians: table.medians.iter().map(MedianEntry::from).collect(),
    };
    let mut out = serde_json::to_string_pretty(&summary).expect("summary serializes");
    out.push('\n');
    out
}

/// Opens `path` for writing through a buffer.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
