//! Local statistics of Rauzy graphs: rooted-ball censuses and cycle
//! components.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::rauzy::{Multigraph, RauzyDigraph};

/// Canonical form of a rooted arc-labelled multi-digraph. Two rooted graphs
/// have equal codes iff they are isomorphic by a root-preserving bijection
/// that preserves arc multiplicities and labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallCode(Vec<u32>);

const DIRECTED: u32 = 0;
const UNDIRECTED: u32 = 1;

impl BallCode {
    pub fn vertex_count(&self) -> usize {
        self.0[1] as usize
    }

    pub fn is_undirected(&self) -> bool {
        self.0[0] == UNDIRECTED
    }
}

impl fmt::Display for BallCode {
    /// `d<m>` or `u<m>`, then `;`-separated arcs `a>b` (or edges `a-b`),
    /// with `/x` for label `x`. Vertex 0 is the root.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let undirected = self.is_undirected();
        write!(f, "{}{}", if undirected { 'u' } else { 'd' }, self.0[1])?;
        for t in self.0[2..].chunks(3) {
            let (a, b, lab) = (t[0], t[1], t[2]);
            if undirected && a > b {
                continue;
            }
            write!(f, ";{a}{}{b}", if undirected { '-' } else { '>' })?;
            if lab > 0 {
                write!(f, "/{}", char::from((lab - 1) as u8))?;
            }
        }
        Ok(())
    }
}

impl Serialize for BallCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct Local {
    m: usize,
    out: Vec<Vec<(u32, u32)>>,
    inn: Vec<Vec<(u32, u32)>>,
    arcs: Vec<(u32, u32, u32)>,
}

impl Local {
    fn new(m: usize, arcs: Vec<(u32, u32, u32)>) -> Self {
        let mut out = vec![Vec::new(); m];
        let mut inn = vec![Vec::new(); m];
        for &(a, b, l) in &arcs {
            out[a as usize].push((b, l));
            inn[b as usize].push((a, l));
        }
        Local { m, out, inn, arcs }
    }

    /// Colour refinement; colours stay ranks of canonical signatures, so an
    /// earlier colour class never moves after a later one.
    fn refine(&self, mut col: Vec<u32>) -> Vec<u32> {
        let mut classes = count_classes(&col);
        let mut sig: Vec<Vec<u32>> = vec![Vec::new(); self.m];
        let mut order: Vec<usize> = (0..self.m).collect();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        loop {
            for v in 0..self.m {
                let s = &mut sig[v];
                s.clear();
                s.push(col[v]);
                for list in [&self.out[v], &self.inn[v]] {
                    pairs.clear();
                    pairs.extend(list.iter().map(|&(w, l)| (col[w as usize], l)));
                    pairs.sort_unstable();
                    s.push(pairs.len() as u32);
                    for &(c, l) in &pairs {
                        s.extend([c, l]);
                    }
                }
            }
            order.sort_unstable_by(|&x, &y| sig[x].cmp(&sig[y]));
            let mut rank = 0u32;
            for i in 0..self.m {
                if i > 0 && sig[order[i]] != sig[order[i - 1]] {
                    rank += 1;
                }
                col[order[i]] = rank;
            }
            let now = rank as usize + 1;
            if now == classes {
                return col;
            }
            classes = now;
        }
    }

    fn encode(&self, kind: u32, perm: &[u32]) -> Vec<u32> {
        let mut triples: Vec<(u32, u32, u32)> = self
            .arcs
            .iter()
            .map(|&(a, b, l)| (perm[a as usize], perm[b as usize], l))
            .collect();
        triples.sort_unstable();
        let mut code = Vec::with_capacity(2 + 3 * triples.len());
        code.push(kind);
        code.push(self.m as u32);
        for (a, b, l) in triples {
            code.extend([a, b, l]);
        }
        code
    }
}

struct Leaf {
    code: Vec<u32>,
    col: Vec<u32>,
    path: Vec<usize>,
}

/// Individualisation-refinement search for the least leaf code. A leaf whose
/// code equals the first or the best leaf certifies an automorphism; the
/// search then returns to the node where the two paths split, and siblings in
/// one orbit of the automorphisms fixing the current path are visited once.
struct Search<'a> {
    g: &'a Local,
    kind: u32,
    first: Option<Leaf>,
    best: Option<Leaf>,
    path: Vec<usize>,
    autos: Vec<Vec<u32>>,
}

fn divergence(a: &[usize], b: &[usize]) -> usize {
    a.iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .unwrap_or(a.len().min(b.len()))
}

fn automorphism(from: &[u32], to: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; to.len()];
    for (x, &c) in to.iter().enumerate() {
        inv[c as usize] = x as u32;
    }
    from.iter().map(|&c| inv[c as usize]).collect()
}

impl Search<'_> {
    /// `Some(d)`: unwind to the node at depth `d`.
    fn visit(&mut self, col: Vec<u32>) -> Option<usize> {
        let col = self.g.refine(col);
        let classes = count_classes(&col);
        let depth = self.path.len();
        if classes == self.g.m {
            let code = self.g.encode(self.kind, &col);
            for leaf in [&self.first, &self.best].into_iter().flatten() {
                if leaf.code == code {
                    let d = divergence(&self.path, &leaf.path);
                    self.autos.push(automorphism(&leaf.col, &col));
                    return Some(d);
                }
            }
            let leaf = || Leaf {
                code: code.clone(),
                col: col.clone(),
                path: self.path.clone(),
            };
            if self.first.is_none() {
                self.first = Some(leaf());
            }
            if self.best.as_ref().is_none_or(|b| code < b.code) {
                self.best = Some(leaf());
            }
            return None;
        }
        let mut sizes = vec![0usize; classes];
        for &c in &col {
            sizes[c as usize] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).expect("non-discrete partition") as u32;
        let cell: Vec<usize> = (0..self.g.m).filter(|&v| col[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for v in cell {
            if self.same_orbit(v, &explored) {
                continue;
            }
            let next: Vec<u32> = col
                .iter()
                .enumerate()
                .map(|(x, &c)| if x == v { 2 * c } else { 2 * c + 1 })
                .collect();
            self.path.push(v);
            let jump = self.visit(next);
            self.path.pop();
            explored.push(v);
            if let Some(d) = jump {
                if d < depth {
                    return Some(d);
                }
            }
        }
        None
    }

    fn same_orbit(&self, v: usize, explored: &[usize]) -> bool {
        if explored.is_empty() {
            return false;
        }
        let m = self.g.m;
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for a in &self.autos {
            if self.path.iter().all(|&x| a[x] as usize == x) {
                for (x, &y) in a.iter().enumerate() {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, y as usize));
                    if rx != ry {
                        parent[rx] = ry;
                    }
                }
            }
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == rv)
    }
}

fn count_classes(col: &[u32]) -> usize {
    let mut seen: Vec<u32> = col.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Canonical code of a rooted multi-digraph on `0..m` given as
/// `(tail, head, label)` triples, label 0 meaning unlabelled. `init` are
/// root-relative invariants (distances), with the root alone at 0.
fn canonical(kind: u32, m: usize, arcs: Vec<(u32, u32, u32)>, init: Vec<u32>) -> BallCode {
    let g = Local::new(m, arcs);
    let mut search = Search {
        g: &g,
        kind,
        first: None,
        best: None,
        path: Vec::new(),
        autos: Vec::new(),
    };
    search.visit(init);
    BallCode(search.best.expect("search visits at least one leaf").code)
}

fn undirected_distances(m: usize, root: usize, arcs: &[(u32, u32, u32)]) -> Vec<u32> {
    let mut adj = vec![Vec::new(); m];
    for &(a, b, _) in arcs {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut dist = vec![u32::MAX; m];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    // Unreachable vertices share one class after every reachable one.
    dist
}

/// Canonical code of an arbitrary small rooted digraph; `labels` are raw
/// symbol bytes when present.
pub fn canonical_code(m: usize, root: usize, arcs: &[(u32, u32, Option<u8>)]) -> BallCode {
    let arcs: Vec<_> = arcs
        .iter()
        .map(|&(a, b, l)| (a, b, l.map_or(0, |x| x as u32 + 1)))
        .collect();
    let init = undirected_distances(m, root, &arcs);
    canonical(DIRECTED, m, arcs, init)
}

/// Canonical code of a rooted undirected multigraph; `(v, v)` is a loop.
pub fn canonical_code_undirected(m: usize, root: usize, edges: &[(u32, u32)]) -> BallCode {
    let mut arcs = Vec::with_capacity(2 * edges.len());
    for &(a, b) in edges {
        arcs.push((a, b, 0));
        if a != b {
            arcs.push((b, a, 0));
        }
    }
    let init = undirected_distances(m, root, &arcs);
    canonical(UNDIRECTED, m, arcs, init)
}

/// Induced ball of undirected radius `r`.
#[derive(Debug, Clone)]
pub struct RootedBall {
    /// Original vertex indices in BFS order; the root comes first.
    pub vertices: Vec<u32>,
    /// Local `(tail, head, label)` arcs.
    pub arcs: Vec<(u32, u32, Option<u8>)>,
    pub code: BallCode,
}

struct DigraphView {
    out: Vec<Vec<(u32, u8)>>,
    nbrs: Vec<Vec<u32>>,
}

impl DigraphView {
    fn new(g: &RauzyDigraph) -> Self {
        let out = g.out_lists();
        let mut nbrs = vec![Vec::new(); g.vertex_count()];
        for a in g.arcs() {
            nbrs[a.tail as usize].push(a.head);
            nbrs[a.head as usize].push(a.tail);
        }
        DigraphView { out, nbrs }
    }
}

fn bfs(root: u32, r: usize, nbrs: impl Fn(u32) -> Vec<u32>) -> (Vec<u32>, Vec<u32>, HashMap<u32, u32>) {
    let mut verts = vec![root];
    let mut dist = vec![0u32];
    let mut local = HashMap::from([(root, 0u32)]);
    let mut head = 0;
    while head < verts.len() {
        let (v, d) = (verts[head], dist[head]);
        head += 1;
        if d as usize == r {
            continue;
        }
        for w in nbrs(v) {
            if let std::collections::hash_map::Entry::Vacant(e) = local.entry(w) {
                e.insert(verts.len() as u32);
                verts.push(w);
                dist.push(d + 1);
            }
        }
    }
    (verts, dist, local)
}

/// Ball vertices, local `(tail, head, label)` arcs and distances.
type LocalDigraph = (Vec<u32>, Vec<(u32, u32, u32)>, Vec<u32>);

fn digraph_ball(view: &DigraphView, root: u32, r: usize, labelled: bool) -> LocalDigraph {
    let (verts, dist, local) = bfs(root, r, |v| view.nbrs[v as usize].clone());
    let mut arcs = Vec::new();
    for (i, &v) in verts.iter().enumerate() {
        for &(w, lab) in &view.out[v as usize] {
            if let Some(&j) = local.get(&w) {
                arcs.push((i as u32, j, if labelled { lab as u32 + 1 } else { 0 }));
            }
        }
    }
    (verts, arcs, dist)
}

/// The ball of radius `r >= 1` around `root`, labels kept when the digraph is
/// labelled.
pub fn ball(g: &RauzyDigraph, root: usize, r: usize) -> RootedBall {
    let view = DigraphView::new(g);
    let (verts, arcs, dist) = digraph_ball(&view, root as u32, r, g.labelled());
    let code = canonical(DIRECTED, verts.len(), arcs.clone(), dist);
    RootedBall {
        vertices: verts,
        arcs: arcs
            .into_iter()
            .map(|(a, b, l)| (a, b, (l > 0).then(|| (l - 1) as u8)))
            .collect(),
        code,
    }
}

/// Code of the directed path `x_{-r} → … → x_r` rooted at `x_0`.
pub fn directed_path_code(r: usize) -> BallCode {
    let m = 2 * r + 1;
    let arcs: Vec<_> = (0..2 * r).map(|i| (i as u32, i as u32 + 1, None)).collect();
    canonical_code(m, r, &arcs)
}

/// Code of the undirected path with `2r` edges rooted at its centre.
pub fn undirected_path_code(r: usize) -> BallCode {
    let edges: Vec<_> = (0..2 * r).map(|i| (i as u32, i as u32 + 1)).collect();
    canonical_code_undirected(2 * r + 1, r, &edges)
}

/// Exact histogram of rooted-ball types over all roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCensus {
    pub r: usize,
    pub labelled: bool,
    pub undirected: bool,
    pub counts: BTreeMap<BallCode, usize>,
    pub roots: usize,
    /// Roots whose unlabelled ball is the centred `2r`-path.
    pub path_roots: usize,
    pub path_fraction: f64,
    pub cycle_vertex_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusSummary {
    pub r: usize,
    pub labelled: bool,
    pub undirected: bool,
    pub roots: usize,
    pub distinct_balls: usize,
    pub path_roots: usize,
    pub path_fraction: f64,
    pub cycle_vertex_count: usize,
}

impl BallCensus {
    pub fn summary(&self) -> CensusSummary {
        CensusSummary {
            r: self.r,
            labelled: self.labelled,
            undirected: self.undirected,
            roots: self.roots,
            distinct_balls: self.counts.len(),
            path_roots: self.path_roots,
            path_fraction: self.path_fraction,
            cycle_vertex_count: self.cycle_vertex_count,
        }
    }

    /// CSV with columns `ball_code,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "ball_code,count")?;
        for (code, c) in &self.counts {
            writeln!(out, "{code},{c}")?;
        }
        Ok(())
    }
}

fn fraction(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Ball census of a digraph. Labels enter the codes only when `labelled` is
/// requested and the digraph carries labels; the path test never uses them.
pub fn census(g: &RauzyDigraph, r: usize, labelled: bool) -> BallCensus {
    assert!(r >= 1, "ball radius must be at least 1");
    let labelled = labelled && g.labelled();
    let view = DigraphView::new(g);
    let path = directed_path_code(r);
    let per_root: Vec<(BallCode, bool)> = (0..g.vertex_count() as u32)
        .into_par_iter()
        .map(|root| {
            let (verts, arcs, dist) = digraph_ball(&view, root, r, labelled);
            let m = verts.len();
            let is_path = if labelled {
                let plain = arcs.iter().map(|&(a, b, _)| (a, b, 0)).collect();
                m == 2 * r + 1 && canonical(DIRECTED, m, plain, dist.clone()) == path
            } else {
                false
            };
            let code = canonical(DIRECTED, m, arcs, dist);
            let is_path = is_path || (!labelled && code == path);
            (code, is_path)
        })
        .collect();
    let cycles = cycle_components(g);
    tally(r, labelled, false, per_root, cycles.vertex_count())
}

fn tally(
    r: usize,
    labelled: bool,
    undirected: bool,
    per_root: Vec<(BallCode, bool)>,
    cycle_vertex_count: usize,
) -> BallCensus {
    let roots = per_root.len();
    let mut counts = BTreeMap::new();
    let mut path_roots = 0;
    for (code, p) in per_root {
        path_roots += usize::from(p);
        *counts.entry(code).or_insert(0) += 1;
    }
    BallCensus {
        r,
        labelled,
        undirected,
        counts,
        roots,
        path_roots,
        path_fraction: fraction(path_roots, roots),
        cycle_vertex_count,
    }
}

/// Ball census of the underlying multigraph; distances and codes are
/// undirected, multiplicities and loops are kept.
pub fn undirected_census(g: &Multigraph, r: usize) -> BallCensus {
    assert!(r >= 1, "ball radius must be at least 1");
    let path = undirected_path_code(r);
    let per_root: Vec<(BallCode, bool)> = (0..g.vertex_count() as u32)
        .into_par_iter()
        .map(|root| {
            let (verts, dist, local) = bfs(root, r, |v| g.neighbours(v as usize).map(|w| w as u32).collect());
            let mut arcs = Vec::new();
            for (i, &v) in verts.iter().enumerate() {
                for &(w, mult) in g.row(v as usize) {
                    if let Some(&j) = local.get(&w) {
                        for _ in 0..mult {
                            arcs.push((i as u32, j, 0));
                        }
                    }
                }
            }
            let code = canonical(UNDIRECTED, verts.len(), arcs, dist);
            let is_path = code == path;
            (code, is_path)
        })
        .collect();
    tally(r, false, true, per_root, 0)
}

/// Fraction of roots whose undirected `r`-ball is the centred `2r`-path.
pub fn line_fraction_undirected(g: &Multigraph, r: usize) -> f64 {
    undirected_census(g, r).path_fraction
}

/// `c_r(n)`: number of weakly connected components that are directed
/// `r`-cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct CycleCensus {
    pub counts: BTreeMap<usize, usize>,
}

impl CycleCensus {
    pub fn count(&self, len: usize) -> usize {
        self.counts.get(&len).copied().unwrap_or(0)
    }

    pub fn vertex_count(&self) -> usize {
        self.counts.iter().map(|(len, c)| len * c).sum()
    }

    /// Lengths `r <= n` with `c_r(n) > k^r`.
    pub fn bound_violations(&self, k: usize, n: usize) -> Vec<usize> {
        self.counts
            .iter()
            .filter(|(&len, &c)| len <= n && exceeds_power(c, k, len))
            .map(|(&len, _)| len)
            .collect()
    }
}

fn exceeds_power(c: usize, k: usize, len: usize) -> bool {
    u32::try_from(len)
        .ok()
        .and_then(|e| (k as u128).checked_pow(e))
        .is_some_and(|b| c as u128 > b)
}

pub fn cycle_components(g: &RauzyDigraph) -> CycleCensus {
    let p = g.vertex_count();
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in g.arcs() {
        let (x, y) = (find(&mut parent, a.tail as usize), find(&mut parent, a.head as usize));
        if x != y {
            parent[x.max(y)] = x.min(y);
        }
    }
    let (ind, outd) = (g.in_degrees(), g.out_degrees());
    let mut size = vec![0usize; p];
    let mut simple = vec![true; p];
    for v in 0..p {
        let c = find(&mut parent, v);
        size[c] += 1;
        simple[c] &= ind[v] == 1 && outd[v] == 1;
    }
    let mut counts = BTreeMap::new();
    for v in 0..p {
        if parent[v] == v && simple[v] {
            *counts.entry(size[v]).or_insert(0) += 1;
        }
    }
    CycleCensus { counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{factors, factors_of_words, sft_slice, LanguageSlice};
    use crate::rauzy::{build_digraph, underlying_graph};
    use crate::wordgen::Alphabet;

    fn graph(ln: &LanguageSlice, ln1: &LanguageSlice) -> RauzyDigraph {
        build_digraph(ln, ln1, true).unwrap()
    }

    #[test]
    fn path_interior_and_two_cycle() {
        let w = b"0101010101";
        let g = graph(&factors(w, 3).unwrap(), &factors(w, 4).unwrap());
        let b = ball(&g, 0, 1);
        assert_eq!(b.vertices.len(), 2);
        assert_ne!(b.code, directed_path_code(1));
        let c = census(&g, 1, false);
        assert_eq!(c.path_fraction, 0.0);
        assert_eq!(c.cycle_vertex_count, 2);
    }

    #[test]
    fn long_path_centre_matches_reference() {
        let arcs: Vec<_> = (0..4u32).map(|i| (i, i + 1, None)).collect();
        assert_eq!(canonical_code(5, 2, &arcs), directed_path_code(2));
        let flipped: Vec<_> = (0..4u32).map(|i| (4 - i, 3 - i, None)).collect();
        assert_eq!(canonical_code(5, 2, &flipped), directed_path_code(2));
        let reversed: Vec<_> = (0..4u32).map(|i| (i + 1, i, None)).collect();
        assert_eq!(canonical_code(5, 2, &reversed), directed_path_code(2));
        assert_ne!(canonical_code(5, 1, &arcs), directed_path_code(2));
    }

    #[test]
    fn symbol_swap_gives_equal_codes() {
        let a = Alphabet::digits(2).unwrap();
        let g = graph(&sft_slice(&a, &[], 5).unwrap(), &sft_slice(&a, &[], 6).unwrap());
        let zeros = g.vertices().position(b"00000").unwrap();
        let ones = g.vertices().position(b"11111").unwrap();
        let unlabelled = build_digraph(g.vertices(), g.arc_words(), false).unwrap();
        assert_eq!(ball(&unlabelled, zeros, 2).code, ball(&unlabelled, ones, 2).code);
        assert_ne!(ball(&g, zeros, 2).code, ball(&g, ones, 2).code);
    }

    #[test]
    fn full_shift_has_no_path_roots() {
        let a = Alphabet::digits(2).unwrap();
        let g = graph(&sft_slice(&a, &[], 10).unwrap(), &sft_slice(&a, &[], 11).unwrap());
        let c = census(&g, 1, false);
        assert_eq!(c.path_fraction, 0.0);
        assert_eq!(c.counts.values().sum::<usize>(), 1024);
        assert_eq!(line_fraction_undirected(&underlying_graph(&g), 1), 0.0);
    }

    #[test]
    fn cycle_components_of_union() {
        let w1 = b"0101010101";
        let w2 = b"0000000000";
        let a = Alphabet::digits(2).unwrap();
        let l3 = factors_of_words(&[w1, w2], 3, a.clone()).unwrap();
        let l4 = factors_of_words(&[w1, w2], 4, a).unwrap();
        let cc = cycle_components(&graph(&l3, &l4));
        assert_eq!((cc.count(1), cc.count(2)), (1, 1));
        assert!(cc.bound_violations(2, 3).is_empty());
    }

    #[test]
    fn code_display() {
        let code = directed_path_code(1);
        assert_eq!(code.to_string().split(';').count(), 3);
        assert!(code.to_string().starts_with("d3"));
        assert!(undirected_path_code(1).to_string().starts_with("u3"));
    }
}
