//! Index-based weighted undirected graph view and a disjoint-set forest.

use std::collections::HashMap;

/// Nodes are numbered in ascending id order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    pub ids: Vec<String>,
    pub index: HashMap<String, usize>,
    /// Neighbor lists sorted by neighbor index.
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        ids.sort();
        ids.dedup();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let adj = vec![Vec::new(); ids.len()];
        WeightedGraph { ids, index, adj }
    }

    /// Adds weight to an undirected edge; self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        if a == b {
            return;
        }
        for (from, to) in [(a, b), (b, a)] {
            match self.adj[from].binary_search_by_key(&to, |&(n, _)| n) {
                Ok(pos) => self.adj[from][pos].1 += w,
                Err(pos) => self.adj[from].insert(pos, (to, w)),
            }
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&(j, _)| j > i).map(|&(_, w)| w))
            .sum()
    }

    /// Subgraph induced by `members`, renumbered in id order.
    pub fn induced(&self, members: &[usize]) -> WeightedGraph {
        let mut sub = WeightedGraph::new(members.iter().map(|&i| self.ids[i].clone()));
        for &i in members {
            let si = sub.index[&self.ids[i]];
            for &(j, w) in &self.adj[i] {
                if let Some(&sj) = sub.index.get(&self.ids[j]) {
                    if si < sj {
                        sub.add_edge(si, sj, w);
                    }
                }
            }
        }
        sub
    }

    /// Connected components by breadth-first traversal, each sorted, listed
    /// in order of their smallest node.
    pub fn components_bfs(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Connected components by union-find, same ordering as `components_bfs`.
    pub fn components_dsu(&self) -> Vec<Vec<usize>> {
        let mut dsu = DisjointSet::new(self.len());
        for (i, ns) in self.adj.iter().enumerate() {
            for &(j, _) in ns {
                dsu.union(i, j);
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..self.len() {
            groups.entry(dsu.find(i)).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }
}

/// Largest component; ties go to the component with the smallest node.
pub fn largest(components: &[Vec<usize>]) -> Option<&Vec<usize>> {
    components
        .iter()
        .min_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])))
}

/// Union by size with path compression.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}
