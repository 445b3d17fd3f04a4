//! Tab-separated file formats.
//!
//! Every input file starts with a header row. Blank lines and lines starting
//! with `#` are ignored. Formats:
//!
//! * expression: `gene_id<TAB>sample...`, one row per gene (log scale)
//! * labels: `sample_id<TAB>class`
//! * probe map: `probe_id<TAB>gene_id`
//! * terms: `term_id<TAB>name<TAB>namespace`
//! * edges: `child_id<TAB>parent_id<TAB>relation`
//! * annotations: `gene_id<TAB>term_id<TAB>evidence` (evidence optional)
//! * annotation matrix: `gene_id<TAB>term...`, one 0/1 row per gene

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::annotation::AnnotationMatrix;
use crate::dag::{Annotation, DirectAnnotations, Edge, OntologyDag, TermRecord};
use crate::data::SampleData;
use crate::error::{Error, Result};
use crate::scenario::ScenarioReport;

/// Data lines of a TSV file (header excluded) with their 1-based line numbers.
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn parse_error(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(path, &text)
}

pub fn parse_table(path: &Path, text: &str) -> Result<Table> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let header = match lines.next() {
        Some((_, l)) => l.split('\t').map(str::to_string).collect(),
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "empty file".into(),
            })
        }
    };
    let rows = lines
        .map(|(n, l)| (n, l.split('\t').map(|s| s.trim().to_string()).collect()))
        .collect();
    Ok(Table {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

fn require_fields(t: &Table, min: usize) -> Result<()> {
    for (line, row) in &t.rows {
        if row.len() < min {
            return Err(t.parse_error(*line, format!("expected at least {min} fields, found {}", row.len())));
        }
    }
    Ok(())
}

/// Gene-major numeric matrix: (row ids, column ids, rows).
pub fn read_matrix(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
    let t = read_table(path)?;
    let columns: Vec<String> = t.header.iter().skip(1).cloned().collect();
    let mut ids = Vec::with_capacity(t.rows.len());
    let mut rows = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        if row.len() != columns.len() + 1 {
            return Err(t.parse_error(
                *line,
                format!("expected {} fields, found {}", columns.len() + 1, row.len()),
            ));
        }
        let values = row[1..]
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| t.parse_error(*line, format!("invalid number {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        ids.push(row[0].clone());
        rows.push(values);
    }
    Ok((ids, columns, rows))
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let t = read_table(path)?;
    require_fields(&t, 2)?;
    Ok(t.rows.into_iter().map(|(_, r)| (r[0].clone(), r[1].clone())).collect())
}

/// Loads expression and label files. The reference class (label 0) is
/// `reference` when given, else the lexicographically smaller class name.
pub fn read_sample_data(expression: &Path, labels: &Path, reference: Option<&str>) -> Result<SampleData> {
    let (genes, samples, rows) = read_matrix(expression)?;
    let label_rows = read_pairs(labels)?;
    let by_sample: HashMap<&str, &str> = label_rows.iter().map(|(s, c)| (s.as_str(), c.as_str())).collect();
    let mut classes: Vec<&str> = label_rows.iter().map(|(_, c)| c.as_str()).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() != 2 {
        return Err(Error::invalid(format!(
            "{}: expected exactly two classes, found {classes:?}",
            labels.display()
        )));
    }
    let class0 = match reference {
        Some(r) if classes.contains(&r) => r,
        Some(r) => return Err(Error::config(format!("reference class {r:?} not in {classes:?}"))),
        None => classes[0],
    };
    let class1 = if classes[0] == class0 { classes[1] } else { classes[0] };
    let labels_vec = samples
        .iter()
        .map(|s| match by_sample.get(s.as_str()) {
            Some(&c) => Ok(u8::from(c == class1)),
            None => Err(Error::invalid(format!("sample {s} has no class label"))),
        })
        .collect::<Result<Vec<u8>>>()?;
    SampleData::new(genes, samples, rows, labels_vec, [class0.to_string(), class1.to_string()])
}

pub fn read_probe_map(path: &Path) -> Result<HashMap<String, String>> {
    Ok(read_pairs(path)?.into_iter().collect())
}

pub fn read_dag(terms: &Path, edges: &Path) -> Result<OntologyDag> {
    let t = read_table(terms)?;
    require_fields(&t, 1)?;
    let records = t
        .rows
        .iter()
        .map(|(_, r)| TermRecord {
            id: r[0].clone(),
            name: r.get(1).cloned().unwrap_or_default(),
            namespace: r.get(2).cloned().unwrap_or_default(),
        })
        .collect();
    let e = read_table(edges)?;
    require_fields(&e, 2)?;
    let edge_list = e
        .rows
        .iter()
        .map(|(_, r)| Edge {
            child: r[0].clone(),
            parent: r[1].clone(),
            relation: r.get(2).cloned().unwrap_or_else(|| "is_a".into()),
        })
        .collect();
    OntologyDag::build(records, edge_list)
}

pub fn read_annotations(path: &Path, dag: &OntologyDag) -> Result<DirectAnnotations> {
    let t = read_table(path)?;
    require_fields(&t, 2)?;
    let pairs = t
        .rows
        .iter()
        .map(|(_, r)| Annotation {
            gene_id: r[0].clone(),
            term_id: r[1].clone(),
            evidence: r.get(2).cloned().unwrap_or_default(),
        })
        .collect();
    DirectAnnotations::new(pairs, dag)
}

/// Reads a gene x term 0/1 matrix and reorders its rows to `gene_universe`.
/// Genes missing from the file get all-zero rows; extra genes are dropped.
pub fn read_annotation_matrix(path: &Path, gene_universe: &[String]) -> Result<AnnotationMatrix> {
    let (genes, terms, rows) = read_matrix(path)?;
    let row_of: HashMap<&str, usize> = genes.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let columns = (0..terms.len())
        .map(|m| {
            gene_universe
                .iter()
                .map(|g| row_of.get(g.as_str()).map_or(0.0, |&i| rows[i][m]))
                .collect()
        })
        .collect();
    AnnotationMatrix::from_columns(gene_universe.to_vec(), terms, columns, true)
}

/// p-values: `0.0e+00` for zero, two-significant-digit scientific notation
/// below 1e-4, shortest round-trip decimal otherwise.
pub fn format_p(p: f64) -> String {
    if p == 0.0 {
        "0.0e+00".to_string()
    } else if p < 1e-4 {
        let s = format!("{p:.1e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let exp: i32 = exp.parse().expect("integer exponent");
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        format!("{p}")
    }
}

/// Statistics use the shortest representation that round-trips exactly.
pub fn format_value(x: f64) -> String {
    format!("{x}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn matrix_tsv(corner: &str, columns: &[String], ids: &[String], rows: impl Fn(usize) -> Vec<f64>) -> String {
    let mut out = String::new();
    out.push_str(corner);
    for c in columns {
        out.push('\t');
        out.push_str(c);
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for v in rows(i) {
            out.push('\t');
            out.push_str(&format_value(v));
        }
        out.push('\n');
    }
    out
}

pub fn expression_tsv(data: &SampleData) -> String {
    matrix_tsv("gene_id", data.sample_ids(), data.gene_ids(), |g| data.gene_row(g).to_vec())
}

pub fn annotation_matrix_tsv(a: &AnnotationMatrix) -> String {
    matrix_tsv("gene_id", a.term_ids(), a.gene_ids(), |g| {
        (0..a.n_terms()).map(|m| a.get(g, m)).collect()
    })
}

/// `term_id n_annotated psi_hat stat adj_p rank`, in report order.
pub fn report_tsv(report: &ScenarioReport) -> String {
    let mut out = String::from("term_id\tn_annotated\tpsi_hat\tstat\tadj_p\trank\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.term_id,
            r.n_annotated,
            format_value(r.psi_hat),
            format_value(r.stat),
            format_p(r.adj_p),
            r.rank
        ));
    }
    out
}

/// `rank adj_p`, ascending in adjusted p (sorted adjusted p-value plot data).
pub fn sorted_p_tsv(report: &ScenarioReport) -> String {
    let mut out = String::from("rank\tadj_p\n");
    for (rank, p) in report.sorted_p() {
        out.push_str(&format!("{rank}\t{}\n", format_p(p)));
    }
    out
}
