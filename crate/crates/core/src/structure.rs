//! The multi-hypergraph of a system: one edge per equation (its support),
//! variable multiplicities, the parameters `(r1, r2, L, m)` and irreducibility.

use serde::Serialize;

use crate::eqsys::{FpSystem, ZSystem};

/// Anything with a coefficient matrix whose support defines a hypergraph.
pub trait Supports {
    fn variable_count(&self) -> usize;
    fn edge_supports(&self) -> Vec<Vec<usize>>;
}

impl Supports for ZSystem {
    fn variable_count(&self) -> usize {
        ZSystem::variable_count(self)
    }

    fn edge_supports(&self) -> Vec<Vec<usize>> {
        self.equations().iter().map(|e| e.support()).collect()
    }
}

impl Supports for FpSystem {
    fn variable_count(&self) -> usize {
        FpSystem::variable_count(self)
    }

    fn edge_supports(&self) -> Vec<Vec<usize>> {
        self.rows()
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &a)| a != 0)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Merges the two classes, keeping the smaller index as representative.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// `H_T = (J, H)` together with degrees and connected components. All indices
/// are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemHypergraph {
    pub r: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<Vec<usize>>,
    pub multiplicities: Vec<usize>,
    /// Partition of `vertices`; each class sorted, classes ordered by their
    /// minimum vertex.
    pub components: Vec<Vec<usize>>,
}

impl SystemHypergraph {
    /// True when the system had no equations.
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Variables in `[r]` that occur in no edge.
    pub fn missing_vertices(&self) -> Vec<usize> {
        (0..self.r)
            .filter(|&i| self.multiplicities[i] == 0)
            .collect()
    }
}

pub fn build_hypergraph<S: Supports + ?Sized>(s: &S) -> SystemHypergraph {
    let r = s.variable_count();
    let edges = s.edge_supports();
    let mut multiplicities = vec![0usize; r];
    let mut uf = UnionFind::new(r);
    for e in &edges {
        for &i in e {
            multiplicities[i] += 1;
        }
        for w in e.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let vertices: Vec<usize> = (0..r).filter(|&i| multiplicities[i] > 0).collect();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; r];
    for &v in &vertices {
        let root = uf.find(v);
        if label[root] == usize::MAX {
            label[root] = components.len();
            components.push(Vec::new());
        }
        components[label[root]].push(v);
    }
    SystemHypergraph {
        r,
        vertices,
        edges,
        multiplicities,
        components,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemParameters {
    pub r1: usize,
    pub r2: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub m_max: usize,
}

pub fn parameters(h: &SystemHypergraph) -> SystemParameters {
    let r1 = h.multiplicities.iter().filter(|&&m| m == 1).count();
    let r2 = h.multiplicities.iter().filter(|&&m| m >= 2).count();
    let m_max = h.multiplicities.iter().copied().max().unwrap_or(0);
    SystemParameters {
        r1,
        r2,
        l: h.edges.len(),
        m_max,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    pub components: Vec<Vec<usize>>,
    pub missing: Vec<usize>,
}

/// Irreducible iff every variable occurs (`J = [r]`) and `H` is connected.
pub fn is_irreducible(h: &SystemHypergraph) -> Irreducibility {
    let missing = h.missing_vertices();
    let irreducible = h.r > 0 && missing.is_empty() && h.components.len() == 1;
    Irreducibility {
        irreducible,
        components: h.components.clone(),
        missing,
    }
}

/// The JSON structure report, 1-based like the `.lineq` input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub edges: Vec<Vec<usize>>,
    pub multiplicities: Vec<usize>,
    pub r1: usize,
    pub r2: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub m_max: usize,
    pub irreducible: bool,
    pub components: Vec<Vec<usize>>,
    pub missing: Vec<usize>,
    pub empty: bool,
}

impl StructureReport {
    pub fn new(h: &SystemHypergraph) -> Self {
        let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
        let params = parameters(h);
        let irr = is_irreducible(h);
        Self {
            j: one_based(&h.vertices),
            edges: h.edges.iter().map(|e| one_based(e)).collect(),
            multiplicities: h.multiplicities.clone(),
            r1: params.r1,
            r2: params.r2,
            l: params.l,
            m_max: params.m_max,
            irreducible: irr.irreducible,
            components: irr.components.iter().map(|c| one_based(c)).collect(),
            missing: one_based(&irr.missing),
            empty: h.is_empty(),
        }
    }
}
