use crate::corpus::AnnotatedSentence;

/// Parent pointers and depths of a validated dependency tree.
#[derive(Debug, Clone)]
pub struct DependencyTree {
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl DependencyTree {
    /// Builds the tree, or `None` if heads do not form a single-rooted tree.
    pub fn new(s: &AnnotatedSentence) -> Option<Self> {
        let n = s.len();
        let parent: Vec<usize> = s.tokens.iter().map(|t| t.head).collect();
        if parent.iter().any(|&h| h >= n) || parent.iter().enumerate().filter(|(i, &h)| *i == h).count() != 1 {
            return None;
        }
        let mut depth = vec![usize::MAX; n];
        for start in 0..n {
            let mut chain = Vec::new();
            let mut cur = start;
            while depth[cur] == usize::MAX && parent[cur] != cur {
                chain.push(cur);
                cur = parent[cur];
                if chain.len() > n {
                    return None;
                }
            }
            let mut d = if parent[cur] == cur && depth[cur] == usize::MAX {
                0
            } else {
                depth[cur]
            };
            depth[cur] = d;
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
        }
        Some(DependencyTree { parent, depth })
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    /// Number of edges on the path between `i` and `j`, via their lowest common ancestor.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let (mut a, mut b) = (i, j);
        let mut steps = 0;
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
            steps += 1;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
            steps += 1;
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
            steps += 2;
        }
        steps
    }

    /// Distances from `from` to every token.
    pub fn distances_from(&self, from: usize) -> Vec<usize> {
        (0..self.parent.len()).map(|j| self.distance(from, j)).collect()
    }
}

/// Undirected path length between two tokens of a validated sentence.
///
/// # Panics
/// If the sentence's heads do not form a tree; such sentences are rejected at load time.
pub fn dep_tree_distance(s: &AnnotatedSentence, i: usize, j: usize) -> usize {
    DependencyTree::new(s)
        .expect("dependency heads must form a tree")
        .distance(i, j)
}
