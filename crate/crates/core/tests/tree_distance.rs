mod common;

use std::collections::VecDeque;

use eventloc::features::{dep_tree_distance, DependencyTree};

fn bfs(heads: &[usize], from: usize) -> Vec<usize> {
    let n = heads.len();
    let mut adj = vec![Vec::new(); n];
    for (i, &h) in heads.iter().enumerate() {
        if h != i {
            adj[i].push(h);
            adj[h].push(i);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[test]
fn matches_breadth_first_search_on_random_trees() {
    for seed in 0..200u64 {
        let n = 1 + (seed as usize * 7) % 40;
        let s = common::random_sentence(n, seed);
        let heads: Vec<usize> = s.tokens.iter().map(|t| t.head).collect();
        let tree = DependencyTree::new(&s).expect("random heads form a tree");
        for i in 0..n {
            let oracle = bfs(&heads, i);
            assert_eq!(tree.distances_from(i), oracle, "seed {seed} from {i}");
        }
        assert_eq!(dep_tree_distance(&s, 0, n - 1), bfs(&heads, 0)[n - 1]);
    }
}

#[test]
fn running_example_distances() {
    let c = common::load_fixture("running_example.jsonl");
    let s = &c.sentences[0];
    // launched - on - town - of - Bza'a
    assert_eq!(dep_tree_distance(s, 21, 29), 4);
    // launched - After - establishing - in - towns - of - Tadif - Al-Bab
    assert_eq!(dep_tree_distance(s, 21, 12), 7);
    assert_eq!(dep_tree_distance(s, 35, 35), 0);
}
