//! Rauzy digraphs `R(n)` and their underlying multigraphs.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::language::{extensions, LanguageSlice};
use crate::show_word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub tail: u32,
    pub head: u32,
    /// Last letter of the head word.
    pub label: u8,
}

/// Vertices are `L_n` in lexicographic order; arc `i` is the `i`-th word of
/// `L_{n+1}`.
#[derive(Debug, Clone)]
pub struct RauzyDigraph {
    vertices: LanguageSlice,
    arc_words: LanguageSlice,
    arcs: Vec<Arc>,
    labelled: bool,
}

/// Builds `R(n)` from a factorial-consistent pair.
pub fn build_digraph(ln: &LanguageSlice, ln1: &LanguageSlice, labelled: bool) -> Result<RauzyDigraph> {
    let ext = extensions(ln, ln1)?;
    let arcs = ext
        .arcs
        .iter()
        .zip(ln1.iter())
        .map(|(&(tail, head), w)| Arc {
            tail,
            head,
            label: w[w.len() - 1],
        })
        .collect();
    Ok(RauzyDigraph {
        vertices: ln.clone(),
        arc_words: ln1.clone(),
        arcs,
        labelled,
    })
}

impl RauzyDigraph {
    pub fn n(&self) -> usize {
        self.vertices.n()
    }

    pub fn vertices(&self) -> &LanguageSlice {
        &self.vertices
    }

    pub fn arc_words(&self) -> &LanguageSlice {
        &self.arc_words
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn labelled(&self) -> bool {
        self.labelled
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.vertex_count()];
        for a in &self.arcs {
            d[a.tail as usize] += 1;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.vertex_count()];
        for a in &self.arcs {
            d[a.head as usize] += 1;
        }
        d
    }

    /// Outgoing `(head, label)` lists, in arc order.
    pub fn out_lists(&self) -> Vec<Vec<(u32, u8)>> {
        let mut out = vec![Vec::new(); self.vertex_count()];
        for a in &self.arcs {
            out[a.tail as usize].push((a.head, a.label));
        }
        out
    }

    pub fn in_lists(&self) -> Vec<Vec<(u32, u8)>> {
        let mut inn = vec![Vec::new(); self.vertex_count()];
        for a in &self.arcs {
            inn[a.head as usize].push((a.tail, a.label));
        }
        inn
    }

    /// Header `n=<n> vertices=<p(n)> arcs=<p(n+1)>`, then one
    /// `tail_word head_word label` line per arc. Unlabelled graphs print `-`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "n={} vertices={} arcs={}",
            self.n(),
            self.vertex_count(),
            self.arcs.len()
        )?;
        for a in &self.arcs {
            let label = if self.labelled {
                show_word(&[a.label])
            } else {
                "-".to_string()
            };
            writeln!(
                out,
                "{} {} {label}",
                show_word(self.vertices.get(a.tail as usize)),
                show_word(self.vertices.get(a.head as usize)),
            )?;
        }
        Ok(())
    }
}

/// Undirected multigraph. Loops sit on the diagonal with weight 1 each; a pair
/// of opposite arcs is a double edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    /// Sorted `(neighbour, multiplicity)` rows, diagonal included.
    rows: Vec<Vec<(u32, u32)>>,
    edges: usize,
}

pub fn underlying_graph(g: &RauzyDigraph) -> Multigraph {
    let mut rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); g.vertex_count()];
    for a in &g.arcs {
        rows[a.tail as usize].push((a.head, 1));
        if a.tail != a.head {
            rows[a.head as usize].push((a.tail, 1));
        }
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup_by(|b, a| {
            let same = a.0 == b.0;
            if same {
                a.1 += b.1;
            }
            same
        });
    }
    Multigraph {
        rows,
        edges: g.arcs.len(),
    }
}

impl Multigraph {
    /// Builds from an explicit edge list; `(v, v)` is a loop.
    pub fn from_edges(vertices: usize, edges: &[(u32, u32)]) -> Self {
        let mut rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); vertices];
        for &(a, b) in edges {
            rows[a as usize].push((b, 1));
            if a != b {
                rows[b as usize].push((a, 1));
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup_by(|b, a| {
                let same = a.0 == b.0;
                if same {
                    a.1 += b.1;
                }
                same
            });
        }
        Multigraph {
            rows,
            edges: edges.len(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.rows.len()
    }

    /// With multiplicity, each loop counted once.
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Adjacency row of `v`: `A_vw` for every `w` with `A_vw > 0`.
    pub fn row(&self, v: usize) -> &[(u32, u32)] {
        &self.rows[v]
    }

    pub fn multiplicity(&self, v: usize, w: usize) -> u32 {
        self.rows[v]
            .binary_search_by_key(&(w as u32), |e| e.0)
            .map_or(0, |i| self.rows[v][i].1)
    }

    pub fn loop_count(&self, v: usize) -> u32 {
        self.multiplicity(v, v)
    }

    pub fn total_loops(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.loop_count(v) as usize).sum()
    }

    /// Unordered pairs `{v, w}`, `v != w`, with multiplicity at least 2.
    pub fn double_edges(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(v, row)| row.iter().filter(move |e| e.0 as usize > v && e.1 >= 2))
            .count()
    }

    /// Row sum of the adjacency matrix.
    pub fn degree(&self, v: usize) -> u32 {
        self.rows[v].iter().map(|e| e.1).sum()
    }

    /// Distinct neighbours other than `v` itself.
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[v].iter().map(|e| e.0 as usize).filter(move |&w| w != v)
    }

    /// `Σ_v (deg v - loops v) / 2 + loops`, which equals the edge count when
    /// loops are counted once.
    pub fn degree_sum_loops_once(&self) -> usize {
        let total: usize = (0..self.vertex_count()).map(|v| self.degree(v) as usize).sum();
        let loops = self.total_loops();
        (total - loops) / 2 + loops
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineGraphCheck {
    pub n: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

/// `R(n+1)` must be a spanning subgraph of the line digraph of `R(n)`.
pub fn line_graph_check(rn: &RauzyDigraph, rn1: &RauzyDigraph) -> LineGraphCheck {
    let fail = |w: String| LineGraphCheck {
        n: rn.n(),
        passed: false,
        witness: Some(w),
    };
    let (mine, theirs) = (rn.arc_words(), rn1.vertices());
    if mine.n() != theirs.n() {
        return fail(format!("levels {} and {} are not consecutive", rn.n(), rn1.n()));
    }
    if let Some(w) = mine.iter().find(|w| !theirs.contains(w)) {
        return fail(format!(
            "arc {} of R({}) is not a vertex of R({})",
            show_word(w),
            rn.n(),
            rn1.n()
        ));
    }
    if let Some(w) = theirs.iter().find(|w| !mine.contains(w)) {
        return fail(format!(
            "vertex {} of R({}) is not an arc of R({})",
            show_word(w),
            rn1.n(),
            rn.n()
        ));
    }
    // Vertex sets coincide, so vertex i of R(n+1) is arc i of R(n).
    for (a, w) in rn1.arcs().iter().zip(rn1.arc_words().iter()) {
        let first = rn.arcs()[a.tail as usize];
        let second = rn.arcs()[a.head as usize];
        if first.head != second.tail {
            return fail(format!("arc {} joins non-consecutive arcs", show_word(w)));
        }
    }
    LineGraphCheck {
        n: rn.n(),
        passed: true,
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{factors, sft_slice};
    use crate::wordgen::Alphabet;

    fn shift(n: usize) -> LanguageSlice {
        sft_slice(&Alphabet::digits(2).unwrap(), &[], n).unwrap()
    }

    #[test]
    fn de_bruijn_b21() {
        let g = build_digraph(&shift(1), &shift(2), true).unwrap();
        let arcs: Vec<_> = g.arcs().iter().map(|a| (a.tail, a.head, a.label)).collect();
        assert_eq!(arcs, [(0, 0, b'0'), (0, 1, b'1'), (1, 0, b'0'), (1, 1, b'1')]);
        let m = underlying_graph(&g);
        assert_eq!((m.loop_count(0), m.loop_count(1), m.multiplicity(0, 1)), (1, 1, 2));
        assert_eq!(m.double_edges(), 1);
        assert_eq!(m.degree_sum_loops_once(), 4);
    }

    #[test]
    fn periodic_two_cycle() {
        let w = b"0101010101";
        let g = build_digraph(&factors(w, 2).unwrap(), &factors(w, 3).unwrap(), true).unwrap();
        let arcs: Vec<_> = g.arcs().iter().map(|a| (a.tail, a.head)).collect();
        assert_eq!(arcs, [(0, 1), (1, 0)]);
        let m = underlying_graph(&g);
        assert_eq!(m.multiplicity(0, 1), 2);
        assert_eq!(m.total_loops(), 0);
    }

    #[test]
    fn labels_are_last_letter_of_head() {
        let g = build_digraph(&shift(3), &shift(4), true).unwrap();
        for a in g.arcs() {
            let head = g.vertices().get(a.head as usize);
            assert_eq!(a.label, head[head.len() - 1]);
        }
    }

    #[test]
    fn line_graph_of_de_bruijn() {
        let r1 = build_digraph(&shift(1), &shift(2), true).unwrap();
        let r2 = build_digraph(&shift(2), &shift(3), true).unwrap();
        assert!(line_graph_check(&r1, &r2).passed);
    }

    #[test]
    fn corrupted_level_has_witness() {
        let a = Alphabet::digits(2).unwrap();
        let r2 = build_digraph(&shift(2), &shift(3), true).unwrap();
        let l3 = LanguageSlice::from_words(3, a.clone(), shift(3).iter().filter(|w| *w != b"010")).unwrap();
        let l4 =
            LanguageSlice::from_words(4, a, shift(4).iter().filter(|w| !w.windows(3).any(|x| x == b"010"))).unwrap();
        let r3 = build_digraph(&l3, &l4, true).unwrap();
        let v = line_graph_check(&r2, &r3);
        assert!(!v.passed);
        assert!(v.witness.unwrap().contains("010"));
    }

    #[test]
    fn edge_list_export() {
        let g = build_digraph(&shift(1), &shift(2), true).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n=1 vertices=2 arcs=4\n0 0 0\n0 1 1\n1 0 0\n1 1 1\n");
    }
}
