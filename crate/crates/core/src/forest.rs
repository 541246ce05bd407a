//! Rooted forests labeled in arrival order: vertex `i`'s children all have
//! indices below `i`. These encode how connected components merge during an
//! online run, and drive the level analysis of the randomized bipartite
//! algorithm.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("vertex {child}: parent {parent} does not come after it")]
    ParentNotLater { child: usize, parent: usize },
    #[error("parent index {parent} out of range for {n} vertices")]
    BadParent { parent: usize, n: usize },
}

/// A rooted forest with children indices strictly below parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedForest {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl RootedForest {
    /// Builds a forest from parent links (None marks a root).
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self, ForestError> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (v, &p) in parents.iter().enumerate() {
            if let Some(p) = p {
                if p >= n {
                    return Err(ForestError::BadParent { parent: p, n });
                }
                if p <= v {
                    return Err(ForestError::ParentNotLater {
                        child: v,
                        parent: p,
                    });
                }
                children[p].push(v);
            }
        }
        Ok(Self {
            parent: parents.to_vec(),
            children,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.parent[v].is_none()).collect()
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.len()).filter(|&v| self.is_leaf(v)).count()
    }

    /// Leaves in the subtree of each vertex (1 for leaves).
    pub fn subtree_leaf_counts(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.len()];
        for v in 0..self.len() {
            if self.is_leaf(v) {
                s[v] = 1;
            } else {
                s[v] = self.children[v].iter().map(|&c| s[c]).sum();
            }
        }
        s
    }

    /// All vertices of the subtree rooted at `v`, ascending.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend_from_slice(&self.children[u]);
        }
        out.sort_unstable();
        out
    }

    /// True iff every internal vertex has exactly two children.
    pub fn is_binary(&self) -> bool {
        (0..self.len()).all(|v| {
            let c = self.children[v].len();
            c == 0 || c == 2
        })
    }
}

/// A tree shape given as nested child lists, independent of labeling.
#[derive(Debug, Clone)]
pub enum Shape {
    Leaf,
    Node(Vec<Shape>),
}

impl Shape {
    pub fn leaf_count(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Node(cs) => cs.iter().map(|c| c.leaf_count()).sum(),
        }
    }
}

fn build_postorder(shape: &Shape, parents: &mut Vec<Option<usize>>) -> usize {
    match shape {
        Shape::Leaf => {
            parents.push(None);
            parents.len() - 1
        }
        Shape::Node(cs) => {
            let ids: Vec<usize> = cs.iter().map(|c| build_postorder(c, parents)).collect();
            parents.push(None);
            let me = parents.len() - 1;
            for id in ids {
                parents[id] = Some(me);
            }
            me
        }
    }
}

/// Labels a forest of shapes in post-order (children before parents).
pub fn forest_from_shapes(shapes: &[Shape]) -> RootedForest {
    let mut parents = Vec::new();
    for s in shapes {
        build_postorder(s, &mut parents);
    }
    RootedForest::from_parents(&parents).expect("post-order labeling is valid")
}

/// Every binary tree shape with exactly `m` leaves. Left/right order is kept,
/// so shapes related by swapping children appear twice; exhaustive checks
/// only get slower, never weaker.
pub fn binary_tree_shapes(m: usize) -> Vec<Shape> {
    if m == 1 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for ml in 1..m {
        for l in binary_tree_shapes(ml) {
            for r in binary_tree_shapes(m - ml) {
                out.push(Shape::Node(vec![l.clone(), r.clone()]));
            }
        }
    }
    out
}

/// Every rooted tree shape with at most `max_leaves` leaves in which every
/// internal vertex has at least two children.
pub fn tree_shapes_up_to(max_leaves: usize) -> Vec<Shape> {
    let mut by_leaves: Vec<Vec<Shape>> = vec![Vec::new(); max_leaves + 1];
    if max_leaves >= 1 {
        by_leaves[1].push(Shape::Leaf);
    }
    for m in 2..=max_leaves {
        let mut shapes = Vec::new();
        // compositions of m into at least two parts
        fn compose(
            m: usize,
            parts: &mut Vec<usize>,
            by_leaves: &Vec<Vec<Shape>>,
            shapes: &mut Vec<Shape>,
        ) {
            if m == 0 {
                if parts.len() >= 2 {
                    // cartesian product of child shapes
                    let mut acc: Vec<Vec<Shape>> = vec![Vec::new()];
                    for &p in parts.iter() {
                        let mut next = Vec::new();
                        for pre in &acc {
                            for s in &by_leaves[p] {
                                let mut v = pre.clone();
                                v.push(s.clone());
                                next.push(v);
                            }
                        }
                        acc = next;
                    }
                    for cs in acc {
                        shapes.push(Shape::Node(cs));
                    }
                }
                return;
            }
            for first in 1..=m {
                parts.push(first);
                compose(m - first, parts, by_leaves, shapes);
                parts.pop();
            }
        }
        let mut parts = Vec::new();
        compose(m, &mut parts, &by_leaves, &mut shapes);
        by_leaves[m] = shapes;
    }
    by_leaves.into_iter().flatten().collect()
}

/// Every rooted forest (ordered sequence of trees) with at most `max_leaves`
/// total leaves, internal vertices having at least two children.
pub fn forest_shapes_up_to(max_leaves: usize) -> Vec<Vec<Shape>> {
    let trees = tree_shapes_up_to(max_leaves);
    let mut out: Vec<Vec<Shape>> = Vec::new();
    fn extend(
        budget: usize,
        trees: &[Shape],
        cur: &mut Vec<Shape>,
        out: &mut Vec<Vec<Shape>>,
    ) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for t in trees {
            let lc = t.leaf_count();
            if lc <= budget {
                cur.push(t.clone());
                extend(budget - lc, trees, cur, out);
                cur.pop();
            }
        }
    }
    let mut cur = Vec::new();
    extend(max_leaves, &trees, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parents_must_come_later() {
        assert!(RootedForest::from_parents(&[Some(1), None]).is_ok());
        assert_eq!(
            RootedForest::from_parents(&[None, Some(0)]),
            Err(ForestError::ParentNotLater {
                child: 1,
                parent: 0
            })
        );
    }

    #[test]
    fn subtree_leaf_counts_sum_children() {
        // cherry: two leaves + root
        let f = RootedForest::from_parents(&[Some(2), Some(2), None]).unwrap();
        assert_eq!(f.subtree_leaf_counts(), vec![1, 1, 2]);
        assert_eq!(f.leaf_count(), 2);
        assert!(f.is_binary());
    }

    #[test]
    fn binary_tree_counts_are_catalan() {
        // ordered binary trees with m leaves: Catalan(m-1)
        assert_eq!(binary_tree_shapes(1).len(), 1);
        assert_eq!(binary_tree_shapes(2).len(), 1);
        assert_eq!(binary_tree_shapes(3).len(), 2);
        assert_eq!(binary_tree_shapes(4).len(), 5);
        assert_eq!(binary_tree_shapes(5).len(), 14);
    }

    #[test]
    fn shapes_label_children_first() {
        for shapes in forest_shapes_up_to(4) {
            let f = forest_from_shapes(&shapes);
            for v in 0..f.len() {
                for &c in f.children(v) {
                    assert!(c < v);
                }
            }
        }
    }
}
