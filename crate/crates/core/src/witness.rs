//! Path-dependency witnesses: two (path, time) points where the agent's
//! beliefs agree to within `ε` while the objective beliefs differ by at
//! least `δ`. A witness shows that the objective belief is not a
//! time-homogeneous function of the agent's belief.

use serde::{Deserialize, Serialize};

use crate::discrete::PathRecord;
use crate::redundancy::BeliefSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub path_1: usize,
    pub time_1: usize,
    pub path_2: usize,
    pub time_2: usize,
    /// `|π - π'|`, at most `ε`.
    pub agent_gap: f64,
    /// `|p - p'|`, at least `δ`.
    pub objective_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSet {
    pub epsilon: f64,
    pub delta: f64,
    pub agent: BeliefSeries,
    pub objective: BeliefSeries,
    pub witnesses: Vec<Witness>,
}

impl WitnessSet {
    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }
}

#[derive(Clone, Copy)]
struct Point {
    agent: f64,
    objective: f64,
    path: usize,
    time: usize,
}

/// Min/max segment tree over the objective values in agent-sorted order.
struct MinMaxTree {
    size: usize,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxTree {
    fn new(values: impl ExactSizeIterator<Item = f64>) -> Self {
        let size = values.len().next_power_of_two().max(1);
        let mut min = vec![f64::INFINITY; 2 * size];
        let mut max = vec![f64::NEG_INFINITY; 2 * size];
        for (i, v) in values.enumerate() {
            min[size + i] = v;
            max[size + i] = v;
        }
        for i in (1..size).rev() {
            min[i] = min[2 * i].min(min[2 * i + 1]);
            max[i] = max[2 * i].max(max[2 * i + 1]);
        }
        MinMaxTree { size, min, max }
    }

    /// Pushes every leaf index in `[lo, hi)` whose value `v` has
    /// `|v - centre| >= delta`.
    fn collect_far(&self, lo: usize, hi: usize, centre: f64, delta: f64, out: &mut Vec<usize>) {
        self.walk(1, 0, self.size, lo, hi, centre, delta, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(&self, node: usize, nlo: usize, nhi: usize, lo: usize, hi: usize, centre: f64, delta: f64, out: &mut Vec<usize>) {
        if hi <= nlo || nhi <= lo {
            return;
        }
        if !(self.max[node] - centre >= delta || centre - self.min[node] >= delta) {
            return;
        }
        if nhi - nlo == 1 {
            out.push(nlo);
            return;
        }
        let mid = (nlo + nhi) / 2;
        self.walk(2 * node, nlo, mid, lo, hi, centre, delta, out);
        self.walk(2 * node + 1, mid, nhi, lo, hi, centre, delta, out);
    }
}

/// All witness pairs among the (path, time) points of `paths`, comparing the
/// `agent` series against the `objective` series (normally `Agent` and
/// `Objective`).
///
/// Each unordered pair is reported once. Output order is deterministic.
pub fn path_dependency_witness(
    paths: &[PathRecord],
    agent: BeliefSeries,
    objective: BeliefSeries,
    epsilon: f64,
    delta: f64,
) -> WitnessSet {
    let mut points: Vec<Point> = paths
        .iter()
        .flat_map(|rec| {
            let a = agent.values(rec);
            let o = objective.values(rec);
            (0..a.len()).map(move |t| Point {
                agent: a[t],
                objective: o[t],
                path: rec.path_index,
                time: t,
            })
        })
        .collect();
    points.sort_by(|x, y| {
        x.agent
            .total_cmp(&y.agent)
            .then(x.path.cmp(&y.path))
            .then(x.time.cmp(&y.time))
    });
    let tree = MinMaxTree::new(points.iter().map(|p| p.objective));

    let mut witnesses = Vec::new();
    let mut hi = 0;
    let mut hits = Vec::new();
    for (i, pi) in points.iter().enumerate() {
        hi = hi.max(i + 1);
        while hi < points.len() && points[hi].agent - pi.agent <= epsilon {
            hi += 1;
        }
        hits.clear();
        tree.collect_far(i + 1, hi, pi.objective, delta, &mut hits);
        for &j in &hits {
            let pj = &points[j];
            witnesses.push(Witness {
                path_1: pi.path,
                time_1: pi.time,
                path_2: pj.path,
                time_2: pj.time,
                agent_gap: pj.agent - pi.agent,
                objective_gap: (pj.objective - pi.objective).abs(),
            });
        }
    }
    WitnessSet {
        epsilon,
        delta,
        agent,
        objective,
        witnesses,
    }
}
