//! Vertex-labeled undirected graphs and exact canonical forms by colour
//! refinement plus individualization search with automorphism pruning.

use std::collections::BTreeSet;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// variable absent from every outcome
    Var,
    /// variable occurring literally in an outcome template
    Named(u32),
    /// attribute vertex, by interchangeability class
    Attr(u32),
    Acc,
    Out,
    /// a model of the accumulated knowledge
    Code,
    /// marks that some outcome is unsatisfiable
    Empty,
    Not,
    And,
    Or,
    Exactly(u32),
    /// root of an outcome template of a parameterless experiment
    Template,
    /// a parameterless experiment
    Experiment,
    /// `k` copies of the same child under one operator
    Mult(u32),
}

impl Label {
    fn code(self) -> u64 {
        let (tag, payload) = match self {
            Label::Var => (0, 0),
            Label::Named(v) => (1, v),
            Label::Attr(c) => (2, c),
            Label::Acc => (3, 0),
            Label::Out => (4, 0),
            Label::Code => (5, 0),
            Label::Empty => (6, 0),
            Label::Not => (7, 0),
            Label::And => (8, 0),
            Label::Or => (9, 0),
            Label::Exactly(k) => (10, k),
            Label::Template => (11, 0),
            Label::Experiment => (12, 0),
            Label::Mult(k) => (13, k),
        };
        (tag << 32) | payload as u64
    }

    pub fn name(self) -> String {
        match self {
            Label::Var => "var".into(),
            Label::Named(v) => format!("x{v}"),
            Label::Attr(c) => format!("F{c}"),
            Label::Acc => "acc".into(),
            Label::Out => "out".into(),
            Label::Code => "code".into(),
            Label::Empty => "empty".into(),
            Label::Not => "not".into(),
            Label::And => "and".into(),
            Label::Or => "or".into(),
            Label::Exactly(k) => format!("exactly{k}"),
            Label::Template => "template".into(),
            Label::Experiment => "experiment".into(),
            Label::Mult(k) => format!("x{k}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<Label>,
    adj: Vec<Vec<u32>>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: Label) -> u32 {
        self.labels.push(label);
        self.adj.push(Vec::new());
        (self.labels.len() - 1) as u32
    }

    /// Adds `{u, v}`; parallel edges and loops are ignored.
    pub fn add_edge(&mut self, u: u32, v: u32) {
        if u == v || self.adj[u as usize].contains(&v) {
            return;
        }
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: u32) -> Label {
        self.labels[v as usize]
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].contains(&v)
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// The same graph with vertex `v` renamed to `perm[v]`.
    pub fn permuted(&self, perm: &[u32]) -> LabeledGraph {
        let n = self.len();
        let mut labels = vec![Label::Var; n];
        let mut adj = vec![Vec::new(); n];
        for v in 0..n {
            labels[perm[v] as usize] = self.labels[v];
            adj[perm[v] as usize] = self.adj[v].iter().map(|&u| perm[u as usize]).collect();
        }
        LabeledGraph { labels, adj }
    }

    pub fn is_automorphism(&self, perm: &[u32]) -> bool {
        (0..self.len()).all(|v| {
            self.labels[v] == self.labels[perm[v] as usize]
                && self.adj[v].iter().all(|&u| self.has_edge(perm[v], perm[u as usize]))
        })
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n");
        for (v, l) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "  v{v} [label=\"{}\"];", l.name());
        }
        for (v, ns) in self.adj.iter().enumerate() {
            for &u in ns {
                if (v as u32) < u {
                    let _ = writeln!(s, "  v{v} -- v{u};");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Byte encoding of a canonical form; equal keys iff isomorphic graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Box<[u8]>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

fn push_varint(out: &mut Vec<u8>, mut x: u64) {
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

#[derive(Debug, Clone)]
pub struct Canonical {
    pub key: CanonicalKey,
    /// `labeling[v]` is the canonical position of vertex `v`
    pub labeling: Vec<u32>,
    /// automorphisms found during the search (not necessarily generating)
    pub automorphisms: Vec<Vec<u32>>,
}

const MAX_STORED_AUTOMORPHISMS: usize = 128;

struct Leaf {
    perm: Vec<u32>,
    cert: Vec<u64>,
    path: Vec<u32>,
}

struct Search<'g> {
    g: &'g LabeledGraph,
    first: Option<Leaf>,
    best: Option<Leaf>,
    autos: Vec<Vec<u32>>,
    path: Vec<u32>,
    scratch: Refiner,
}

/// Colour refinement with colours as ranks of `(colour, sorted neighbour
/// colours)`; the result depends only on the isomorphism type.
#[derive(Default)]
struct Refiner {
    nb: Vec<u32>,
    offs: Vec<usize>,
    order: Vec<u32>,
}

impl Refiner {
    fn refine(&mut self, g: &LabeledGraph, colors: &mut [u32]) -> usize {
        let n = colors.len();
        let mut cells = count_cells(colors);
        loop {
            self.nb.clear();
            self.offs.clear();
            for v in 0..n {
                self.offs.push(self.nb.len());
                let start = self.nb.len();
                self.nb.extend(g.adj[v].iter().map(|&u| colors[u as usize]));
                self.nb[start..].sort_unstable();
            }
            self.offs.push(self.nb.len());
            self.order.clear();
            self.order.extend(0..n as u32);
            let (nb, offs) = (&self.nb, &self.offs);
            let seg = |v: u32| &nb[offs[v as usize]..offs[v as usize + 1]];
            self.order.sort_unstable_by(|&a, &b| {
                colors[a as usize]
                    .cmp(&colors[b as usize])
                    .then_with(|| seg(a).cmp(seg(b)))
            });
            let mut new = vec![0u32; n];
            let mut rank = 0u32;
            for i in 0..n {
                if i > 0 {
                    let (a, b) = (self.order[i - 1], self.order[i]);
                    if colors[a as usize] != colors[b as usize] || seg(a) != seg(b) {
                        rank = i as u32;
                    }
                }
                new[self.order[i] as usize] = rank;
            }
            colors.copy_from_slice(&new);
            let c = count_cells(colors);
            if c == cells {
                return c;
            }
            cells = c;
        }
    }
}

fn count_cells(colors: &[u32]) -> usize {
    colors.iter().collect::<BTreeSet<_>>().len()
}

/// Colours are ranks, so a cell of colour `c` with `s` members covers
/// ranks `c..c+s`; equal-size ties go to the smallest colour.
fn target_cell(colors: &[u32]) -> Option<Vec<u32>> {
    let n = colors.len();
    let mut size = vec![0u32; n];
    for &c in colors {
        size[c as usize] += 1;
    }
    let mut best: Option<u32> = None;
    for c in 0..n {
        if size[c] > 1 && best.is_none_or(|b| size[c] < size[b as usize]) {
            best = Some(c as u32);
        }
    }
    let c = best?;
    Some((0..n as u32).filter(|&v| colors[v as usize] == c).collect())
}

fn individualize(colors: &[u32], v: u32) -> Vec<u32> {
    // members of v's cell other than v move one rank up
    let c = colors[v as usize];
    colors
        .iter()
        .enumerate()
        .map(|(u, &x)| if x == c && u as u32 != v { c + 1 } else { x })
        .collect()
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

impl Search<'_> {
    fn certificate(&self, colors: &[u32]) -> Vec<u64> {
        let mut cert = Vec::with_capacity(self.g.num_edges());
        for (v, ns) in self.g.adj.iter().enumerate() {
            for &u in ns {
                let (a, b) = (colors[v], colors[u as usize]);
                if a < b {
                    cert.push(((a as u64) << 32) | b as u64);
                }
            }
        }
        cert.sort_unstable();
        cert
    }

    fn record_automorphism(&mut self, from: &[u32], to: &[u32]) {
        if self.autos.len() >= MAX_STORED_AUTOMORPHISMS {
            return;
        }
        let n = from.len();
        let mut inv = vec![0u32; n];
        for v in 0..n {
            inv[from[v] as usize] = v as u32;
        }
        let gamma: Vec<u32> = (0..n).map(|v| inv[to[v] as usize]).collect();
        if gamma.iter().enumerate().any(|(i, &x)| i as u32 != x) {
            debug_assert!(self.g.is_automorphism(&gamma));
            self.autos.push(gamma);
        }
    }

    /// Returns `Some(level)` to abandon the search up to the node at `level`.
    fn run(&mut self, colors: Vec<u32>) -> Option<usize> {
        let level = self.path.len();
        let Some(cell) = target_cell(&colors) else {
            return self.leaf(colors);
        };
        let n = colors.len();
        let mut tried: Vec<u32> = Vec::new();
        for &v in &cell {
            if !tried.is_empty() && self.in_tried_orbit(v, &tried, n) {
                continue;
            }
            let mut next = individualize(&colors, v);
            self.scratch.refine(self.g, &mut next);
            self.path.push(v);
            let r = self.run(next);
            self.path.pop();
            tried.push(v);
            if let Some(t) = r {
                if t < level {
                    return Some(t);
                }
            }
        }
        None
    }

    fn in_tried_orbit(&self, v: u32, tried: &[u32], n: usize) -> bool {
        let mut parent: Vec<u32> = (0..n as u32).collect();
        let mut any = false;
        for g in &self.autos {
            if self.path.iter().all(|&p| g[p as usize] == p) {
                any = true;
                for x in 0..n {
                    let (a, b) = (find(&mut parent, x as u32), find(&mut parent, g[x]));
                    if a != b {
                        parent[a as usize] = b;
                    }
                }
            }
        }
        if !any {
            return false;
        }
        let rv = find(&mut parent, v);
        tried.iter().any(|&t| find(&mut parent, t) == rv)
    }

    fn leaf(&mut self, colors: Vec<u32>) -> Option<usize> {
        let cert = self.certificate(&colors);
        let Some(first) = &self.first else {
            let leaf = Leaf {
                perm: colors.clone(),
                cert: cert.clone(),
                path: self.path.clone(),
            };
            self.first = Some(leaf);
            self.best = Some(Leaf {
                perm: colors,
                cert,
                path: self.path.clone(),
            });
            return None;
        };
        if cert == first.cert {
            let (fp, fpath) = (first.perm.clone(), first.path.clone());
            self.record_automorphism(&fp, &colors);
            return Some(common_prefix(&fpath, &self.path));
        }
        let best = self.best.as_ref().expect("set with first");
        match cert.cmp(&best.cert) {
            std::cmp::Ordering::Equal => {
                let (bp, bpath) = (best.perm.clone(), best.path.clone());
                self.record_automorphism(&bp, &colors);
                Some(common_prefix(&bpath, &self.path))
            }
            std::cmp::Ordering::Less => {
                self.best = Some(Leaf {
                    perm: colors,
                    cert,
                    path: self.path.clone(),
                });
                None
            }
            std::cmp::Ordering::Greater => None,
        }
    }
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Exact canonical form of `g`.
pub fn canonical_form(g: &LabeledGraph) -> Canonical {
    let n = g.len();
    let mut sorted_labels: Vec<u64> = g.labels.iter().map(|l| l.code()).collect();
    sorted_labels.sort_unstable();
    let mut colors: Vec<u32> = g
        .labels
        .iter()
        .map(|l| sorted_labels.partition_point(|&x| x < l.code()) as u32)
        .collect();
    let mut search = Search {
        g,
        first: None,
        best: None,
        autos: Vec::new(),
        path: Vec::new(),
        scratch: Refiner::default(),
    };
    search.scratch.refine(g, &mut colors);
    search.run(colors);
    let best = search.best.expect("search reaches a leaf");

    let mut bytes = Vec::with_capacity(16 + 4 * best.cert.len());
    push_varint(&mut bytes, n as u64);
    let mut prev = None;
    for &l in &sorted_labels {
        if prev != Some(l) {
            push_varint(&mut bytes, l);
            push_varint(&mut bytes, sorted_labels.iter().filter(|&&x| x == l).count() as u64);
            prev = Some(l);
        }
    }
    push_varint(&mut bytes, best.cert.len() as u64);
    let mut last = 0u64;
    for &e in &best.cert {
        push_varint(&mut bytes, e - last);
        last = e;
    }
    Canonical {
        key: CanonicalKey(bytes.into_boxed_slice()),
        labeling: best.perm,
        automorphisms: search.autos,
    }
}

pub fn canonical_key(g: &LabeledGraph) -> CanonicalKey {
    canonical_form(g).key
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32, label: Label) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for _ in 0..n {
            g.add_vertex(label);
        }
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    #[test]
    fn path_vs_triangle() {
        let tri = cycle(3, Label::Var);
        let mut p3 = LabeledGraph::new();
        for _ in 0..3 {
            p3.add_vertex(Label::Var);
        }
        p3.add_edge(0, 1);
        p3.add_edge(1, 2);
        assert_ne!(canonical_key(&tri), canonical_key(&p3));
    }

    #[test]
    fn relabeling_invariance() {
        let mut g = cycle(6, Label::Code);
        let extra = g.add_vertex(Label::Out);
        g.add_edge(extra, 0);
        g.add_edge(extra, 3);
        let k = canonical_key(&g);
        let perm = [3, 5, 0, 6, 1, 4, 2];
        assert_eq!(canonical_key(&g.permuted(&perm)), k);
    }

    #[test]
    fn labels_matter() {
        let a = cycle(4, Label::Var);
        let mut b = cycle(4, Label::Var);
        b.labels[0] = Label::Acc;
        assert_ne!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn regular_graphs_distinguished() {
        // two 3-regular graphs on 6 vertices: K_{3,3} and the prism
        let mut k33 = LabeledGraph::new();
        for _ in 0..6 {
            k33.add_vertex(Label::Var);
        }
        for i in 0..3 {
            for j in 3..6 {
                k33.add_edge(i, j);
            }
        }
        let mut prism = LabeledGraph::new();
        for _ in 0..6 {
            prism.add_vertex(Label::Var);
        }
        for (a, b) in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)] {
            prism.add_edge(a, b);
        }
        assert_ne!(canonical_key(&k33), canonical_key(&prism));
        let c = canonical_form(&k33);
        for a in &c.automorphisms {
            assert!(k33.is_automorphism(a));
        }
    }
}
