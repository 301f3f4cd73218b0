//! Planar diagrams of braid closures.
//!
//! Strands run upward, closure arcs pass to the right of the braid. The
//! region to the left of strand 1 is the unbounded one. At a crossing on
//! generator gap g the four regions are, counterclockwise starting left
//! of the incoming under-strand: left (j1), below (j2), right (j3),
//! above (j4).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidWord {
    pub strands: usize,
    /// (generator index in 1..strands, sign +1 or -1)
    pub letters: Vec<(usize, i32)>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<(usize, i32)>) -> Result<Self> {
        if strands == 0 {
            return Err(Error::Invalid("strand count must be positive".into()));
        }
        for &(g, s) in &letters {
            if g == 0 || g >= strands {
                return Err(Error::Invalid(format!(
                    "generator s{g} out of range for {strands} strands"
                )));
            }
            if s != 1 && s != -1 {
                return Err(Error::Invalid(format!("letter sign {s} is not +1 or -1")));
            }
        }
        Ok(Self { strands, letters })
    }

    /// Parses `"s1 s2' s1 s2'"`. A trailing `'` or `^-1` marks an inverse.
    /// The strand count defaults to one more than the largest generator.
    pub fn parse(text: &str, strands: Option<usize>) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let (body, sign) = if let Some(b) = tok.strip_suffix('\'') {
                (b, -1)
            } else if let Some(b) = tok.strip_suffix("^-1") {
                (b, -1)
            } else {
                (tok, 1)
            };
            let idx = body
                .strip_prefix('s')
                .or_else(|| body.strip_prefix('S'))
                .ok_or_else(|| Error::Parse(format!("bad braid letter '{tok}'")))?;
            let g: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad generator index in '{tok}'")))?;
            letters.push((g, sign));
        }
        let max_g = letters.iter().map(|l| l.0).max().unwrap_or(0);
        Self::new(strands.unwrap_or(max_g + 1), letters)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BraidWord =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("braid json: {e}")))?;
        Self::new(raw.strands, raw.letters)
    }

    pub fn to_text(&self) -> String {
        self.letters
            .iter()
            .map(|&(g, s)| if s > 0 { format!("s{g}") } else { format!("s{g}'") })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Component id of the strand entering at each bottom position
    /// (0-based positions). Component 0 contains position 0; the rest are
    /// numbered by their lowest bottom position.
    pub fn strand_components(&self) -> (Vec<usize>, usize) {
        let s = self.strands;
        let mut cur: Vec<usize> = (0..s).collect();
        for &(g, _) in &self.letters {
            cur.swap(g - 1, g);
        }
        // top position of the strand starting at x
        let mut top = vec![0; s];
        for (pos, &x) in cur.iter().enumerate() {
            top[x] = pos;
        }
        let mut comp = vec![usize::MAX; s];
        let mut n = 0;
        for start in 0..s {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut x = start;
            while comp[x] == usize::MAX {
                comp[x] = n;
                x = top[x];
            }
            n += 1;
        }
        (comp, n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub sign: i32,
    /// generator index (1-based) of the letter that produced the crossing
    pub gap: usize,
    pub over_component: usize,
    pub under_component: usize,
    /// (j1, j2, j3, j4)
    pub regions: [usize; 4],
}

impl Crossing {
    pub fn is_self(&self) -> bool {
        self.over_component == self.under_component
    }
}

/// Arc of the diagram between two consecutive crossings along one braid
/// position (possibly through the closure).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub position: usize,
    pub from: usize,
    pub to: usize,
    pub component: usize,
    pub left_region: usize,
    pub right_region: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkDiagram {
    pub braid: BraidWord,
    pub crossings: Vec<Crossing>,
    pub region_count: usize,
    pub component_count: usize,
    pub edges: Vec<Edge>,
    pub strand_component: Vec<usize>,
    pub writhe_per_component: Vec<i32>,
    pub linking_matrix: Vec<Vec<i32>>,
    pub unbounded_region: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub strand_component: Vec<usize>,
    pub count: usize,
    pub writhes: Vec<i32>,
    pub linking: Vec<Vec<i32>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

// Ports counterclockwise: NE, NW, SW, SE. Corner q sits between port q
// and port q+1: above, left, below, right.
const NE: usize = 0;
const NW: usize = 1;
const SW: usize = 2;
const SE: usize = 3;
const C_ABOVE: usize = 0;
const C_LEFT: usize = 1;
const C_BELOW: usize = 2;
const C_RIGHT: usize = 3;

fn corner(v: usize, q: usize) -> usize {
    4 * v + (q % 4)
}

pub fn from_braid(b: &BraidWord) -> Result<LinkDiagram> {
    if b.letters.is_empty() {
        return Err(Error::EmptyWord);
    }
    let s = b.strands;
    for g in 1..s {
        if !b.letters.iter().any(|l| l.0 == g) {
            return Err(Error::Disconnected(format!(
                "generator s{g} never occurs, strands {} and {} split",
                g,
                g + 1
            )));
        }
    }
    let c = b.letters.len();

    // crossings touching each position, in braid order
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); s + 1];
    for (t, &(g, _)) in b.letters.iter().enumerate() {
        touching[g].push(t);
        touching[g + 1].push(t);
    }

    let (strand_comp, ncomp) = b.strand_components();

    // position -> starting strand, before each crossing
    let mut cc: Vec<usize> = (0..s).collect();
    let mut after: Vec<Vec<usize>> = Vec::with_capacity(c);
    let mut strands_at: Vec<(usize, usize)> = Vec::with_capacity(c);
    for &(g, _) in &b.letters {
        strands_at.push((cc[g - 1], cc[g]));
        cc.swap(g - 1, g);
        after.push(cc.clone());
    }

    let mut uf = UnionFind((0..4 * c).collect());
    let mut raw_edges = Vec::new();
    for pos in 1..=s {
        let list = &touching[pos];
        for idx in 0..list.len() {
            let v = list[idx];
            let u = list[(idx + 1) % list.len()];
            let p = if b.letters[v].0 == pos { NW } else { NE };
            let q = if b.letters[u].0 == pos { SW } else { SE };
            uf.union(corner(v, p), corner(u, q + 3));
            uf.union(corner(v, p + 3), corner(u, q));
            raw_edges.push((pos, v, u, p));
        }
    }

    let first_gap1 = b.letters.iter().position(|l| l.0 == 1).expect("gap 1 used");
    let mut ids: Vec<Option<usize>> = vec![None; 4 * c];
    let mut next = 0;
    let unbounded_root = uf.find(corner(first_gap1, C_LEFT));
    ids[unbounded_root] = Some(0);
    next += 1;
    let mut region_of = |uf: &mut UnionFind, ids: &mut Vec<Option<usize>>, k: usize| -> usize {
        let r = uf.find(k);
        *ids[r].get_or_insert_with(|| {
            next += 1;
            next - 1
        })
    };

    let mut crossings = Vec::with_capacity(c);
    for (t, &(g, sign)) in b.letters.iter().enumerate() {
        let mut regions = [0; 4];
        for (slot, q) in [C_LEFT, C_BELOW, C_RIGHT, C_ABOVE].into_iter().enumerate() {
            regions[slot] = region_of(&mut uf, &mut ids, corner(t, q));
        }
        let (left, right) = strands_at[t];
        let (lc, rc) = (strand_comp[left], strand_comp[right]);
        let (over, under) = if sign > 0 { (lc, rc) } else { (rc, lc) };
        crossings.push(Crossing {
            sign,
            gap: g,
            over_component: over,
            under_component: under,
            regions,
        });
    }

    let mut edges = Vec::with_capacity(raw_edges.len());
    for (pos, v, u, p) in raw_edges {
        let left_region = region_of(&mut uf, &mut ids, corner(v, p));
        let right_region = region_of(&mut uf, &mut ids, corner(v, p + 3));
        edges.push(Edge {
            position: pos,
            from: v,
            to: u,
            component: strand_comp[after[v][pos - 1]],
            left_region,
            right_region,
        });
    }

    let region_count = next;
    let comps = component_data(&crossings, strand_comp.clone(), ncomp);
    Ok(LinkDiagram {
        braid: b.clone(),
        crossings,
        region_count,
        component_count: ncomp,
        edges,
        strand_component: comps.strand_component,
        writhe_per_component: comps.writhes,
        linking_matrix: comps.linking,
        unbounded_region: 0,
    })
}

fn component_data(crossings: &[Crossing], strand_component: Vec<usize>, n: usize) -> Components {
    let mut writhes = vec![0; n];
    let mut twice = vec![vec![0; n]; n];
    for x in crossings {
        let (a, b) = (x.over_component, x.under_component);
        if a == b {
            writhes[a] += x.sign;
        } else {
            twice[a][b] += x.sign;
            twice[b][a] += x.sign;
        }
    }
    let mut linking = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            linking[i][j] = if i == j { writhes[i] } else { twice[i][j] / 2 };
        }
    }
    Components {
        strand_component,
        count: n,
        writhes,
        linking,
    }
}

/// Strand-to-component map, writhes and linking matrix.
pub fn components(d: &LinkDiagram) -> Components {
    component_data(&d.crossings, d.strand_component.clone(), d.component_count)
}

/// Lists every violated diagram invariant; empty when the diagram is valid.
pub fn validate(d: &LinkDiagram) -> Vec<String> {
    let mut out = Vec::new();
    if d.region_count != d.crossings.len() + 2 {
        out.push("euler mismatch".to_string());
    }
    if d
        .crossings
        .iter()
        .any(|x| x.regions.iter().any(|&r| r >= d.region_count))
        || d.unbounded_region >= d.region_count
    {
        out.push("region id out of range".to_string());
    }
    if d.crossings.len() == d.braid.letters.len() {
        for (x, l) in d.crossings.iter().zip(&d.braid.letters) {
            if x.sign != l.1 || x.gap != l.0 {
                out.push("crossing sign does not match braid letter".to_string());
                break;
            }
        }
    } else {
        out.push("crossing count does not match braid length".to_string());
    }
    let n = d.component_count;
    if d.crossings
        .iter()
        .any(|x| x.over_component >= n || x.under_component >= n)
    {
        out.push("component id out of range".to_string());
        return out;
    }
    let recomputed = component_data(&d.crossings, d.strand_component.clone(), n);
    if recomputed.writhes != d.writhe_per_component {
        out.push("writhe mismatch".to_string());
    }
    if recomputed.linking != d.linking_matrix {
        out.push("linking matrix mismatch".to_string());
    }
    let mut incidence = vec![0usize; d.region_count.max(1)];
    for x in &d.crossings {
        for &r in &x.regions {
            if r < incidence.len() {
                incidence[r] += 1;
            }
        }
    }
    if d.region_count > 0 && incidence.iter().any(|&k| k == 0) {
        out.push("region without incident crossing".to_string());
    }
    out
}

/// Standard braid words used across the crate.
pub mod braids {
    use super::BraidWord;

    pub fn figure_eight() -> BraidWord {
        BraidWord::new(3, vec![(1, 1), (2, -1), (1, 1), (2, -1)]).unwrap()
    }
    pub fn hopf() -> BraidWord {
        BraidWord::new(2, vec![(1, 1), (1, 1)]).unwrap()
    }
    pub fn trefoil() -> BraidWord {
        BraidWord::new(2, vec![(1, 1), (1, 1), (1, 1)]).unwrap()
    }
    pub fn borromean() -> BraidWord {
        BraidWord::new(3, [(1, 1), (2, -1)].repeat(3)).unwrap()
    }
    pub fn whitehead() -> BraidWord {
        BraidWord::new(3, vec![(1, 1), (2, -1), (1, 1), (2, -1), (2, -1)]).unwrap()
    }
    pub fn by_name(name: &str) -> Option<BraidWord> {
        match name {
            "fig8" | "figure-eight" | "4_1" => Some(figure_eight()),
            "hopf" => Some(hopf()),
            "trefoil" | "3_1" => Some(trefoil()),
            "borromean" => Some(borromean()),
            "whitehead" => Some(whitehead()),
            _ => None,
        }
    }
}
