//! Problem description graph and its color-preserving automorphisms.

use std::time::{Duration, Instant};

use crate::task::{ActionId, FondTask};

/// Direction (outgoing?), label and neighbour cell of one edge.
type EdgeKey = (bool, EdgeLabel, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexColor {
    Fact { partition: u32, goal: bool },
    Action { partition: u32 },
    Effect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeLabel {
    /// fact -> action
    Pre,
    /// action -> effect node
    EffectOf,
    /// effect node -> fact
    Add,
    /// effect node -> fact
    Del,
}

/// Vertices `0..facts` are facts, the next `actions` are actions, the rest
/// effect nodes.
#[derive(Clone, Debug)]
pub struct Pdg {
    pub facts: usize,
    pub actions: usize,
    pub colors: Vec<VertexColor>,
    out: Vec<Vec<(EdgeLabel, usize)>>,
    inc: Vec<Vec<(EdgeLabel, usize)>>,
}

impl Pdg {
    pub fn new(task: &FondTask) -> Self {
        let nf = task.num_facts();
        let na = task.actions().len();
        let mut colors: Vec<VertexColor> = task
            .facts()
            .iter()
            .map(|f| VertexColor::Fact {
                partition: f.partition,
                goal: task.goal().contains(f.id),
            })
            .collect();
        colors.extend(
            task.actions()
                .iter()
                .map(|a| VertexColor::Action { partition: a.partition }),
        );
        let mut edges = Vec::new();
        for (i, a) in task.actions().iter().enumerate() {
            let av = nf + i;
            for f in a.pre.iter() {
                edges.push((f, EdgeLabel::Pre, av));
            }
            for e in &a.effects {
                let ev = colors.len();
                colors.push(VertexColor::Effect);
                edges.push((av, EdgeLabel::EffectOf, ev));
                edges.extend(e.add.iter().map(|f| (ev, EdgeLabel::Add, f)));
                edges.extend(e.del.iter().map(|f| (ev, EdgeLabel::Del, f)));
            }
        }
        let n = colors.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (u, l, v) in edges {
            out[u].push((l, v));
            inc[v].push((l, u));
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
        }
        Pdg {
            facts: nf,
            actions: na,
            colors,
            out,
            inc,
        }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn is_automorphism(&self, map: &[usize]) -> bool {
        (0..self.len()).all(|u| {
            self.colors[u] == self.colors[map[u]] && {
                let mut img: Vec<(EdgeLabel, usize)> = self.out[u].iter().map(|&(l, v)| (l, map[v])).collect();
                img.sort_unstable();
                img == self.out[map[u]]
            }
        })
    }

    fn unit_partition(&self) -> Partition {
        let mut by_color: Vec<(VertexColor, usize)> = self.colors.iter().copied().zip(0..).collect();
        by_color.sort_unstable();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let mut last = None;
        for (c, v) in by_color {
            if last != Some(c) {
                cells.push(Vec::new());
                last = Some(c);
            }
            cells.last_mut().unwrap().push(v);
        }
        Partition::new(cells, self.len())
    }

    /// Splits cells by neighbour counts until the partition is equitable.
    /// The resulting cell order depends only on the structure, never on
    /// vertex ids, so automorphisms commute with refinement.
    fn refine(&self, p: &mut Partition) {
        loop {
            let mut cells = Vec::with_capacity(p.cells.len());
            for cell in &p.cells {
                if cell.len() == 1 {
                    cells.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(Vec<EdgeKey>, usize)> = cell
                    .iter()
                    .map(|&v| {
                        let mut sig: Vec<EdgeKey> = self.out[v]
                            .iter()
                            .map(|&(l, w)| (true, l, p.cell_of[w]))
                            .chain(self.inc[v].iter().map(|&(l, w)| (false, l, p.cell_of[w])))
                            .collect();
                        sig.sort_unstable();
                        (sig, v)
                    })
                    .collect();
                keyed.sort();
                let mut i = 0;
                while i < keyed.len() {
                    let j = (i..keyed.len())
                        .find(|&j| keyed[j].0 != keyed[i].0)
                        .unwrap_or(keyed.len());
                    cells.push(keyed[i..j].iter().map(|(_, v)| *v).collect());
                    i = j;
                }
            }
            let changed = cells.len() != p.cells.len();
            *p = Partition::new(cells, self.len());
            if !changed {
                return;
            }
        }
    }

    fn individualize(&self, p: &Partition, cell: usize, v: usize) -> Partition {
        let mut cells = p.cells.clone();
        let rest: Vec<usize> = cells[cell].iter().copied().filter(|&w| w != v).collect();
        cells[cell] = vec![v];
        cells.insert(cell + 1, rest);
        let mut q = Partition::new(cells, self.len());
        self.refine(&mut q);
        q
    }
}

#[derive(Clone, Debug)]
struct Partition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl Partition {
    fn new(cells: Vec<Vec<usize>>, n: usize) -> Self {
        let mut cell_of = vec![0; n];
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                cell_of[v] = i;
            }
        }
        Partition { cells, cell_of }
    }

    fn target(&self) -> Option<usize> {
        self.cells.iter().position(|c| c.len() > 1)
    }

    fn shape(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    fn leaf(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c[0]).collect()
    }
}

struct TimedOut;

struct Searcher<'a> {
    pdg: &'a Pdg,
    deadline: Option<Instant>,
    /// Leaf of the first path, as a vertex sequence.
    first: Vec<usize>,
    /// Cell shapes along the first path, by depth.
    shapes: Vec<Vec<usize>>,
}

impl Searcher<'_> {
    fn check_time(&self) -> Result<(), TimedOut> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(TimedOut),
            _ => Ok(()),
        }
    }

    /// Depth-first search below `p` for a leaf that yields an automorphism
    /// when aligned with the first leaf.
    fn find(&self, p: &Partition, depth: usize) -> Result<Option<Vec<usize>>, TimedOut> {
        self.check_time()?;
        if self.shapes.get(depth) != Some(&p.shape()) {
            return Ok(None);
        }
        let Some(t) = p.target() else {
            let leaf = p.leaf();
            let mut map = vec![0; leaf.len()];
            for (&a, &b) in self.first.iter().zip(&leaf) {
                map[a] = b;
            }
            return Ok(self.pdg.is_automorphism(&map).then_some(map));
        };
        for &w in &p.cells[t] {
            let q = self.pdg.individualize(p, t, w);
            if let Some(m) = self.find(&q, depth + 1)? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }
}

/// Orbit ids of `0..n` under the group generated by `gens`.
fn orbits(n: usize, gens: &[Vec<usize>]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for g in gens {
        for (v, &w) in g.iter().enumerate() {
            let (a, b) = (root(&mut parent, v), root(&mut parent, w));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|v| root(&mut parent, v)).collect()
}

/// Generators of the automorphism group of `pdg`, as vertex maps, or `None`
/// when `budget` runs out.
///
/// Walks the first path of the individualization tree; at each level,
/// from the deepest up, every vertex of the target cell not yet in the
/// orbit of the path vertex (under the generators found so far, all of
/// which fix the shallower path vertices) is tried as an alternative.
/// Together the generators generate the whole group.
pub fn automorphism_generators(pdg: &Pdg, budget: Option<Duration>) -> Option<Vec<Vec<usize>>> {
    let deadline = budget.map(|b| Instant::now() + b);
    let mut p = pdg.unit_partition();
    pdg.refine(&mut p);
    let mut path = vec![p.clone()];
    let mut choices = Vec::new();
    while let Some(t) = p.target() {
        let v = p.cells[t][0];
        choices.push((t, v));
        p = pdg.individualize(&p, t, v);
        path.push(p.clone());
    }
    let searcher = Searcher {
        pdg,
        deadline,
        first: p.leaf(),
        shapes: path.iter().map(Partition::shape).collect(),
    };
    let mut gens: Vec<Vec<usize>> = Vec::new();
    for depth in (0..choices.len()).rev() {
        let (t, v) = choices[depth];
        let node = &path[depth];
        let mut orbit = orbits(pdg.len(), &gens);
        for &w in &node.cells[t] {
            if orbit[w] == orbit[v] {
                continue;
            }
            let q = pdg.individualize(node, t, w);
            match searcher.find(&q, depth + 1) {
                Err(TimedOut) => return None,
                Ok(Some(map)) => {
                    gens.push(map);
                    orbit = orbits(pdg.len(), &gens);
                }
                Ok(None) => {}
            }
        }
    }
    Some(gens)
}

/// Maps a vertex map back to fact and action images; `None` if it moves
/// no fact or action.
pub(crate) fn split_map(pdg: &Pdg, map: &[usize]) -> Option<(Vec<usize>, Vec<ActionId>)> {
    let facts: Vec<usize> = map[..pdg.facts].to_vec();
    let actions: Vec<ActionId> = map[pdg.facts..pdg.facts + pdg.actions]
        .iter()
        .map(|&v| ActionId((v - pdg.facts) as u32))
        .collect();
    let moved =
        facts.iter().enumerate().any(|(i, &f)| i != f) || actions.iter().enumerate().any(|(i, a)| i != a.index());
    moved.then_some((facts, actions))
}
