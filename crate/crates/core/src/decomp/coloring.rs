use std::collections::VecDeque;

use super::nice::{NiceKind, NiceTreeDecomposition};
use super::DecompError;
use crate::graph::Graph;

/// Vertex colors in `1..=w+1`, indexed by vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
}

impl Coloring {
    pub fn from_colors(colors: Vec<u32>) -> Coloring {
        Coloring { colors }
    }

    pub fn color(&self, v: u32) -> u32 {
        self.colors[v as usize - 1]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn max_color(&self) -> u32 {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    /// No two vertices sharing a bag share a color, and colors lie in `1..=w+1`.
    pub fn is_good(&self, t: &NiceTreeDecomposition) -> bool {
        let limit = t.width() as u32 + 1;
        if self.colors.iter().any(|&c| c == 0 || c > limit) {
            return false;
        }
        t.nodes().iter().all(|n| {
            let mut seen: Vec<u32> = n.label.iter().map(|&v| self.color(v)).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }
}

/// Colors vertices in order of the depth of their forget node: each gets the
/// smallest color unused in that node's label, whose vertices are all
/// forgotten closer to the root.
pub fn good_coloring(g: &Graph, t: &NiceTreeDecomposition) -> Result<Coloring, DecompError> {
    let mut colors = vec![0u32; g.n_vertices()];
    let mut queue = VecDeque::from([t.root()]);
    while let Some(p) = queue.pop_front() {
        let node = t.node(p);
        if let NiceKind::Forget(v) = node.kind {
            let used: Vec<u32> = node.label.iter().map(|&u| colors[u as usize - 1]).collect();
            colors[v as usize - 1] = (1..).find(|c| !used.contains(c)).unwrap();
        }
        queue.extend(node.children.iter().copied());
    }
    if let Some(i) = colors.iter().position(|&c| c == 0) {
        return Err(DecompError::NeverForgotten(i as u32 + 1));
    }
    Ok(Coloring { colors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{make_nice, min_fill_decomposition, TreeDecomposition};
    use crate::graph::{clique, cycle};

    fn nice(g: &Graph) -> NiceTreeDecomposition {
        make_nice(g, &min_fill_decomposition(g).unwrap()).unwrap()
    }

    #[test]
    fn single_vertex() {
        let g = clique(1).unwrap();
        assert_eq!(good_coloring(&g, &nice(&g)).unwrap().colors(), &[1]);
    }

    #[test]
    fn one_bag_pair() {
        let g = clique(2).unwrap();
        let t = make_nice(&g, &TreeDecomposition::from_bags(&[&[1, 2]], &[])).unwrap();
        let c = good_coloring(&g, &t).unwrap();
        let mut cs = c.colors().to_vec();
        cs.sort_unstable();
        assert_eq!(cs, [1, 2]);
        assert!(c.is_good(&t));
    }

    #[test]
    fn triangle_and_cycle() {
        for g in [clique(3).unwrap(), cycle(5).unwrap(), clique(4).unwrap()] {
            let t = nice(&g);
            let c = good_coloring(&g, &t).unwrap();
            assert!(c.is_good(&t));
            for (_, e) in g.edges() {
                assert_ne!(c.color(e.u), c.color(e.v));
            }
        }
        let g = clique(3).unwrap();
        let mut cs = good_coloring(&g, &nice(&g)).unwrap().colors().to_vec();
        cs.sort_unstable();
        assert_eq!(cs, [1, 2, 3]);
    }

    #[test]
    fn bad_coloring_detected() {
        let g = clique(2).unwrap();
        let t = nice(&g);
        assert!(!Coloring::from_colors(vec![1, 1]).is_good(&t));
        assert!(!Coloring::from_colors(vec![1, 3]).is_good(&t));
    }
}
