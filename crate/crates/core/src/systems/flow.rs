//! Edmonds–Karp maximum flow on small digraphs with real capacities.

use std::collections::VecDeque;

const EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: f64,
    rev: usize,
}

/// Residual network. Arc `i` added by the caller maps to a forward edge.
#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<Edge>>,
    handles: Vec<(usize, usize)>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            handles: Vec::new(),
        }
    }

    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: f64) {
        let fwd = self.adj[from].len();
        let bwd = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge { to, cap, rev: bwd });
        self.adj[to].push(Edge {
            to: from,
            cap: 0.0,
            rev: fwd,
        });
        self.handles.push((from, fwd));
    }

    /// Pushes a maximum flow from `s` to `t` and returns its value.
    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        if s == t {
            return 0.0;
        }
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (i, e) in self.adj[u].iter().enumerate() {
                    if e.cap > EPS && !seen[e.to] {
                        seen[e.to] = true;
                        parent[e.to] = Some((u, i));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while let Some((u, i)) = parent[v] {
                bottleneck = bottleneck.min(self.adj[u][i].cap);
                v = u;
            }
            let mut v = t;
            while let Some((u, i)) = parent[v] {
                self.adj[u][i].cap -= bottleneck;
                let (to, rev) = (self.adj[u][i].to, self.adj[u][i].rev);
                self.adj[to][rev].cap += bottleneck;
                v = u;
            }
            total += bottleneck;
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub(crate) fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for e in &self.adj[u] {
                if e.cap > EPS && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }

    /// Flow currently routed through caller arc `arc`.
    pub(crate) fn arc_flow(&self, arc: usize) -> f64 {
        let (u, i) = self.handles[arc];
        let e = &self.adj[u][i];
        self.adj[e.to][e.rev].cap
    }
}
