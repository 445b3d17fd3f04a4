//! Ontology DAG, true-path propagation of gene annotations, and assembly of
//! binary gene-annotation matrices.
//!
//! Edges point from child to parent. Both `is_a` and `part_of` relations are
//! traversed when closing annotations under the true path rule.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::annotation::AnnotationMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermRecord {
    pub id: String,
    pub name: String,
    pub namespace: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub child: String,
    pub parent: String,
    pub relation: String,
}

#[derive(Debug, Clone)]
pub struct OntologyDag {
    terms: Vec<TermRecord>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl OntologyDag {
    /// Indexes terms and edges. Endpoints must exist and edges must be unique;
    /// acyclicity is checked separately by [`OntologyDag::validate`].
    pub fn build(terms: Vec<TermRecord>, edges: Vec<Edge>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.id.clone()));
            }
        }
        let mut parents = vec![Vec::new(); terms.len()];
        let mut children = vec![Vec::new(); terms.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            let c = *index.get(&e.child).ok_or_else(|| Error::UnknownTerm(e.child.clone()))?;
            let p = *index.get(&e.parent).ok_or_else(|| Error::UnknownTerm(e.parent.clone()))?;
            if !seen.insert((c, p)) {
                return Err(Error::invalid(format!("duplicate edge {} -> {}", e.child, e.parent)));
            }
            parents[c].push(p);
            children[p].push(c);
        }
        Ok(Self {
            terms,
            edges,
            index,
            parents,
            children,
        })
    }

    /// [`OntologyDag::build`] followed by [`OntologyDag::validate`].
    pub fn new(terms: Vec<TermRecord>, edges: Vec<Edge>) -> Result<Self> {
        let dag = Self::build(terms, edges)?;
        dag.validate()?;
        Ok(dag)
    }

    pub fn terms(&self) -> &[TermRecord] {
        &self.terms
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn term(&self, id: &str) -> Option<&TermRecord> {
        self.index.get(id).map(|&i| &self.terms[i])
    }

    fn idx(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownTerm(id.to_string()))
    }

    /// Returns a topological order (parents before children) or one witnessing
    /// cycle, listed along child-to-parent edges and closed on its first vertex.
    pub fn validate(&self) -> Result<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.terms.len();
        let mut mark = vec![Mark::New; n];
        let mut post = Vec::with_capacity(n);
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // iterative DFS over parent edges; stack holds (vertex, next edge)
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Active;
            while let Some(top) = stack.last_mut() {
                let v = top.0;
                if let Some(&p) = self.parents[v].get(top.1) {
                    top.1 += 1;
                    match mark[p] {
                        Mark::New => {
                            mark[p] = Mark::Active;
                            stack.push((p, 0));
                        }
                        Mark::Active => {
                            let start = stack.iter().position(|&(u, _)| u == p).expect("active on stack");
                            let mut cycle: Vec<String> =
                                stack[start..].iter().map(|&(u, _)| self.terms[u].id.clone()).collect();
                            cycle.push(self.terms[p].id.clone());
                            return Err(Error::CycleDetected(cycle));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[v] = Mark::Done;
                    post.push(v);
                    stack.pop();
                }
            }
        }
        // parents finish before their children
        Ok(post.into_iter().map(|i| self.terms[i].id.clone()).collect())
    }

    fn reach(&self, start: usize, step: &[Vec<usize>]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = step[start].clone();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(step[v].iter().copied());
            }
        }
        seen
    }

    fn ids(&self, set: impl IntoIterator<Item = usize>) -> BTreeSet<String> {
        set.into_iter().map(|i| self.terms[i].id.clone()).collect()
    }

    pub fn parents(&self, term: &str) -> Result<BTreeSet<String>> {
        Ok(self.ids(self.parents[self.idx(term)?].iter().copied()))
    }

    pub fn children(&self, term: &str) -> Result<BTreeSet<String>> {
        Ok(self.ids(self.children[self.idx(term)?].iter().copied()))
    }

    /// All terms reachable along child-to-parent edges, excluding `term`.
    pub fn ancestors(&self, term: &str) -> Result<BTreeSet<String>> {
        let i = self.idx(term)?;
        Ok(self.ids(self.reach(i, &self.parents)))
    }

    /// All terms reachable along parent-to-child edges, excluding `term`.
    pub fn offspring(&self, term: &str) -> Result<BTreeSet<String>> {
        let i = self.idx(term)?;
        Ok(self.ids(self.reach(i, &self.children)))
    }

    /// Column indices of each column's parent terms within `a`; parents
    /// absent from `a` are skipped.
    pub fn parent_columns(&self, a: &AnnotationMatrix) -> Result<Vec<Vec<usize>>> {
        let col: HashMap<&str, usize> = a.term_ids().iter().enumerate().map(|(m, t)| (t.as_str(), m)).collect();
        a.term_ids()
            .iter()
            .map(|t| {
                let i = self.idx(t)?;
                let mut ps: Vec<usize> = self.parents[i]
                    .iter()
                    .filter_map(|&p| col.get(self.terms[p].id.as_str()).copied())
                    .collect();
                ps.sort_unstable();
                Ok(ps)
            })
            .collect()
    }
}

/// Evidence tag attached to pairs added by true-path propagation.
pub const PROPAGATED_EVIDENCE: &str = "TPR";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Annotation {
    pub gene_id: String,
    pub term_id: String,
    pub evidence: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectAnnotations {
    pub pairs: Vec<Annotation>,
}

impl DirectAnnotations {
    pub fn new(pairs: Vec<Annotation>, dag: &OntologyDag) -> Result<Self> {
        if let Some(a) = pairs.iter().find(|a| dag.term(&a.term_id).is_none()) {
            return Err(Error::UnknownTerm(a.term_id.clone()));
        }
        Ok(Self { pairs })
    }

    pub fn contains(&self, gene: &str, term: &str) -> bool {
        self.pairs.iter().any(|a| a.gene_id == gene && a.term_id == term)
    }

    /// Genes annotated with `term`.
    pub fn genes_for(&self, term: &str) -> BTreeSet<&str> {
        self.pairs
            .iter()
            .filter(|a| a.term_id == term)
            .map(|a| a.gene_id.as_str())
            .collect()
    }
}

fn merge_evidence<'a>(codes: impl IntoIterator<Item = &'a str>) -> String {
    let set: BTreeSet<&str> = codes.into_iter().flat_map(|c| c.split(',')).filter(|c| !c.is_empty()).collect();
    set.into_iter().collect::<Vec<_>>().join(",")
}

/// Closes annotations under the true path rule: every (gene, term) pair
/// implies (gene, ancestor) for every ancestor of the term. Output is
/// deduplicated on (gene, term) and sorted; evidence codes of duplicate input
/// pairs are merged and added pairs carry [`PROPAGATED_EVIDENCE`].
pub fn propagate_true_path(dag: &OntologyDag, direct: &DirectAnnotations) -> Result<DirectAnnotations> {
    let mut evidence: BTreeMap<(&str, &str), Vec<&str>> = BTreeMap::new();
    for a in &direct.pairs {
        evidence
            .entry((a.gene_id.as_str(), a.term_id.as_str()))
            .or_default()
            .push(a.evidence.as_str());
    }
    let mut ancestor_cache: HashMap<&str, BTreeSet<String>> = HashMap::new();
    let mut added: BTreeSet<(&str, String)> = BTreeSet::new();
    for a in &direct.pairs {
        if !ancestor_cache.contains_key(a.term_id.as_str()) {
            ancestor_cache.insert(a.term_id.as_str(), dag.ancestors(&a.term_id)?);
        }
        for anc in &ancestor_cache[a.term_id.as_str()] {
            if !evidence.contains_key(&(a.gene_id.as_str(), anc.as_str())) {
                added.insert((a.gene_id.as_str(), anc.clone()));
            }
        }
    }
    let mut pairs: Vec<Annotation> = evidence
        .into_iter()
        .map(|((g, t), codes)| Annotation {
            gene_id: g.to_string(),
            term_id: t.to_string(),
            evidence: merge_evidence(codes),
        })
        .chain(added.into_iter().map(|(g, t)| Annotation {
            gene_id: g.to_string(),
            term_id: t,
            evidence: PROPAGATED_EVIDENCE.to_string(),
        }))
        .collect();
    pairs.sort_by(|x, y| (&x.gene_id, &x.term_id).cmp(&(&y.gene_id, &y.term_id)));
    Ok(DirectAnnotations { pairs })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyReport {
    /// (term_id, A_1(m)) for retained columns, in column order.
    pub retained: Vec<(String, usize)>,
    /// (term_id, annotated count) for terms below the threshold.
    pub dropped: Vec<(String, usize)>,
    /// Distinct annotated genes outside the gene universe.
    pub ignored_genes: usize,
}

/// Binary gene-annotation matrix over `gene_universe`, after true-path
/// closure, keeping terms that annotate at least `min_genes` genes and (when
/// given) belong to `namespace`. Columns are sorted by term id.
pub fn assemble_matrix(
    dag: &OntologyDag,
    direct: &DirectAnnotations,
    gene_universe: &[String],
    min_genes: usize,
    namespace: Option<&str>,
) -> Result<(AnnotationMatrix, AssemblyReport)> {
    if gene_universe.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let closed = propagate_true_path(dag, direct)?;
    let row: HashMap<&str, usize> = gene_universe.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let mut by_term: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    let mut outside: HashSet<&str> = HashSet::new();
    for a in &closed.pairs {
        if let Some(ns) = namespace {
            if dag.term(&a.term_id).map(|t| t.namespace.as_str()) != Some(ns) {
                continue;
            }
        }
        match row.get(a.gene_id.as_str()) {
            Some(&g) => {
                by_term.entry(a.term_id.as_str()).or_default().insert(g);
            }
            None => {
                outside.insert(a.gene_id.as_str());
            }
        }
    }
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    let mut term_ids = Vec::new();
    let mut sets = Vec::new();
    for (term, genes) in by_term {
        if genes.len() >= min_genes {
            retained.push((term.to_string(), genes.len()));
            term_ids.push(term.to_string());
            sets.push(genes.into_iter().collect::<Vec<_>>());
        } else {
            dropped.push((term.to_string(), genes.len()));
        }
    }
    let matrix = AnnotationMatrix::from_index_sets(gene_universe.to_vec(), term_ids, &sets)?;
    Ok((
        matrix,
        AssemblyReport {
            retained,
            dropped,
            ignored_genes: outside.len(),
        },
    ))
}
