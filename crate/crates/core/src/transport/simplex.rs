//! Primal network simplex for the bipartite transportation problem.
//!
//! Sources `0..n` carry supplies, sinks `n..n+m` carry demands, and an extra
//! root node closes an initial star of artificial arcs (big-M cost). Only the
//! admissible source→sink arcs are added to the graph. The spanning tree is kept
//! strongly feasible (leaving arc = last blocking arc met when walking the pivot
//! cycle from its apex along the entering arc's orientation), which rules out
//! cycling under degeneracy. Entering arcs are chosen by most negative reduced
//! cost, ties broken by lowest arc index.

#[derive(Debug, Clone)]
struct Arc {
    from: usize,
    to: usize,
    cost: f64,
    flow: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    /// Row-major `n × m` masses on source/sink pairs.
    pub masses: Vec<f64>,
    /// Node potentials of the sources, sign-flipped to the maximisation convention.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// Total flow left on artificial arcs; positive means the polytope is empty.
    pub artificial_flow: f64,
}

struct Tree {
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
}

const NONE: usize = usize::MAX;

fn rebuild_tree(arcs: &[Arc], in_tree: &[bool], nodes: usize, root: usize, tree: &mut Tree) {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (a, arc) in arcs.iter().enumerate() {
        if in_tree[a] {
            adj[arc.from].push(a);
            adj[arc.to].push(a);
        }
    }
    tree.parent.iter_mut().for_each(|p| *p = NONE);
    tree.parent[root] = root;
    tree.parent_arc[root] = NONE;
    tree.depth[root] = 0;
    tree.potential[root] = 0.0;
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        for &a in &adj[u] {
            let arc = &arcs[a];
            let v = if arc.from == u { arc.to } else { arc.from };
            if tree.parent[v] != NONE {
                continue;
            }
            tree.parent[v] = u;
            tree.parent_arc[v] = a;
            tree.depth[v] = tree.depth[u] + 1;
            // zero reduced cost on tree arcs: cost + π(from) − π(to) = 0
            tree.potential[v] = if arc.from == u {
                tree.potential[u] + arc.cost
            } else {
                tree.potential[u] - arc.cost
            };
            stack.push(v);
        }
    }
    debug_assert!(tree.parent.iter().all(|&p| p != NONE), "basis is not a spanning tree");
}

/// Maximise `Σ gain(i, j) π_ij` over couplings of `supply` and `demand`
/// supported on the pairs where `gain` is `Some`.
pub(crate) fn solve_transportation(
    supply: &[f64],
    demand: &[f64],
    gain: impl Fn(usize, usize) -> Option<f64>,
) -> LpSolution {
    let n = supply.len();
    let m = demand.len();
    let nodes = n + m + 1;
    let root = n + m;

    // Rescale the demand so both sides carry exactly the same total.
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    let ratio = if total_demand > 0.0 { total_supply / total_demand } else { 1.0 };

    let mut arcs: Vec<Arc> = Vec::with_capacity(n * m + nodes);
    let mut pair_arc = vec![NONE; n * m];
    let mut max_abs = 0.0_f64;
    for i in 0..n {
        for j in 0..m {
            if let Some(g) = gain(i, j) {
                pair_arc[i * m + j] = arcs.len();
                max_abs = max_abs.max(g.abs());
                arcs.push(Arc { from: i, to: n + j, cost: -g, flow: 0.0 });
            }
        }
    }
    let real_arcs = arcs.len();
    let art_cost = (max_abs + 1.0) * nodes as f64;
    for u in 0..n + m {
        let s = if u < n { supply[u] } else { -demand[u - n] * ratio };
        if s >= 0.0 {
            arcs.push(Arc { from: u, to: root, cost: art_cost, flow: s });
        } else {
            arcs.push(Arc { from: root, to: u, cost: art_cost, flow: -s });
        }
    }
    let mut in_tree = vec![false; arcs.len()];
    in_tree[real_arcs..].iter_mut().for_each(|b| *b = true);

    let mut tree = Tree {
        parent: vec![NONE; nodes],
        parent_arc: vec![NONE; nodes],
        depth: vec![0; nodes],
        potential: vec![0.0; nodes],
    };
    rebuild_tree(&arcs, &in_tree, nodes, root, &mut tree);

    let eps = 1e-12 * (1.0 + max_abs);
    let tie = 1e-14;
    let max_pivots = 50 * arcs.len() + 1000;
    let mut pivots = 0;
    let mut down: Vec<(usize, bool)> = Vec::new();
    let mut up: Vec<(usize, bool)> = Vec::new();

    loop {
        // pricing
        let mut entering = NONE;
        let mut best = -eps;
        for (a, arc) in arcs.iter().enumerate().take(real_arcs) {
            if in_tree[a] {
                continue;
            }
            let rc = arc.cost + tree.potential[arc.from] - tree.potential[arc.to];
            if rc < best {
                best = rc;
                entering = a;
            }
        }
        if entering == NONE || pivots >= max_pivots {
            break;
        }
        pivots += 1;

        let (first, second) = (arcs[entering].from, arcs[entering].to);
        // climb both endpoints to the apex of the pivot cycle
        down.clear();
        up.clear();
        let (mut a, mut b) = (first, second);
        while a != b {
            if tree.depth[a] >= tree.depth[b] {
                let arc = tree.parent_arc[a];
                // traversal runs parent(a) → a on this side
                down.push((arc, arcs[arc].from == tree.parent[a]));
                a = tree.parent[a];
            } else {
                let arc = tree.parent_arc[b];
                // traversal runs b → parent(b) on this side
                up.push((arc, arcs[arc].from == b));
                b = tree.parent[b];
            }
        }
        down.reverse();

        let mut theta = f64::INFINITY;
        for &(arc, forward) in down.iter().chain(up.iter()) {
            if !forward {
                theta = theta.min(arcs[arc].flow);
            }
        }
        if !theta.is_finite() {
            // no blocking arc: unbounded, impossible for a bipartite graph
            break;
        }
        // last blocking arc in cycle order apex → first → second → apex
        let mut leaving = NONE;
        for &(arc, forward) in down.iter().chain(up.iter()) {
            if !forward && arcs[arc].flow - theta <= tie {
                leaving = arc;
            }
        }

        for &(arc, forward) in down.iter().chain(up.iter()) {
            let f = &mut arcs[arc].flow;
            if forward {
                *f += theta;
            } else {
                *f -= theta;
                if *f < tie {
                    *f = 0.0;
                }
            }
        }
        arcs[entering].flow = theta;
        arcs[leaving].flow = 0.0;
        in_tree[leaving] = false;
        in_tree[entering] = true;
        rebuild_tree(&arcs, &in_tree, nodes, root, &mut tree);
    }

    let mut masses = vec![0.0; n * m];
    for (k, &a) in pair_arc.iter().enumerate() {
        if a != NONE {
            masses[k] = arcs[a].flow;
        }
    }
    let artificial_flow = arcs[real_arcs..].iter().map(|a| a.flow).sum();
    LpSolution {
        masses,
        phi: (0..n).map(|i| -tree.potential[i]).collect(),
        psi: (0..m).map(|j| -tree.potential[n + j]).collect(),
        artificial_flow,
    }
}
