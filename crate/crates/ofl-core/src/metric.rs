//! Distance oracles and the facility universe.
//!
//! A [`MetricSpace`] is either a set of Euclidean points or a connected
//! weighted undirected graph queried through shortest-path distances.
//! A [`FacilityUniverse`] designates some points as facilities and carries
//! their opening costs, normalized so the cheapest facility costs 1 and
//! every cost is a power of 2.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

/// Index of a point in a [`MetricSpace`] (a coordinate row or a graph vertex).
pub type PointId = usize;
/// Index of a facility in a [`FacilityUniverse`].
pub type FacilityId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Euclidean,
    Graph,
}

#[derive(Debug)]
enum SpaceInner {
    Euclidean {
        points: Vec<Vec<f64>>,
        dim: usize,
    },
    Graph {
        adj: Vec<Vec<(PointId, f64)>>,
        edges: Vec<(PointId, PointId, f64)>,
        // Shortest-path rows are computed lazily, one per queried source.
        sssp: RwLock<HashMap<PointId, Arc<Vec<f64>>>>,
    },
}

/// A finite metric space over an indexed point universe.
#[derive(Debug)]
pub struct MetricSpace {
    inner: SpaceInner,
}

impl MetricSpace {
    /// Builds a Euclidean space from coordinate rows. All rows must share the
    /// same dimension and every coordinate must be finite.
    pub fn euclidean(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("point set must be nonempty".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Validation(
                "points must have at least one coordinate".into(),
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Validation(format!(
                    "point {} has dimension {}, expected {}",
                    i,
                    p.len(),
                    dim
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(format!(
                    "point {} has a non-finite coordinate",
                    i
                )));
            }
        }
        Ok(MetricSpace {
            inner: SpaceInner::Euclidean { points, dim },
        })
    }

    /// Builds a graph space from undirected weighted edges. Vertices are
    /// `0..=max_id`. Rejects negative or non-finite weights, duplicate edges
    /// with conflicting weights, and disconnected graphs.
    pub fn graph(edges: Vec<(PointId, PointId, f64)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Validation("edge list must be nonempty".into()));
        }
        let mut n = 0;
        let mut seen: HashMap<(PointId, PointId), f64> = HashMap::new();
        let mut kept: Vec<(PointId, PointId, f64)> = Vec::with_capacity(edges.len());
        for &(u, v, w) in &edges {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) has invalid weight {}",
                    u, v, w
                )));
            }
            n = n.max(u + 1).max(v + 1);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            match seen.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::Validation(format!(
                        "duplicate edge ({}, {}) with conflicting weights {} and {}",
                        key.0, key.1, prev, w
                    )));
                }
                Some(_) => continue,
                None => {
                    seen.insert(key, w);
                    kept.push((key.0, key.1, w));
                }
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &kept {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let space = MetricSpace {
            inner: SpaceInner::Graph {
                adj,
                edges: kept,
                sssp: RwLock::new(HashMap::new()),
            },
        };
        // Connected graphs only: a single unreachable vertex would make some
        // distances undefined.
        let row = space.sssp_row(0);
        if let Some(v) = row.iter().position(|d| !d.is_finite()) {
            return Err(Error::Validation(format!(
                "graph is not connected: vertex {} is unreachable from vertex 0",
                v
            )));
        }
        Ok(space)
    }

    pub fn kind(&self) -> SpaceKind {
        match self.inner {
            SpaceInner::Euclidean { .. } => SpaceKind::Euclidean,
            SpaceInner::Graph { .. } => SpaceKind::Graph,
        }
    }

    pub fn num_points(&self) -> usize {
        match &self.inner {
            SpaceInner::Euclidean { points, .. } => points.len(),
            SpaceInner::Graph { adj, .. } => adj.len(),
        }
    }

    /// Dimension of a Euclidean space, `None` for graphs.
    pub fn dim(&self) -> Option<usize> {
        match &self.inner {
            SpaceInner::Euclidean { dim, .. } => Some(*dim),
            SpaceInner::Graph { .. } => None,
        }
    }

    /// Coordinates of a Euclidean point, `None` for graphs.
    pub fn coords(&self, p: PointId) -> Option<&[f64]> {
        match &self.inner {
            SpaceInner::Euclidean { points, .. } => points.get(p).map(|v| v.as_slice()),
            SpaceInner::Graph { .. } => None,
        }
    }

    /// The deduplicated undirected edge list of a graph space, `None` for
    /// Euclidean spaces.
    pub fn edges(&self) -> Option<&[(PointId, PointId, f64)]> {
        match &self.inner {
            SpaceInner::Graph { edges, .. } => Some(edges.as_slice()),
            SpaceInner::Euclidean { .. } => None,
        }
    }

    /// Metric distance between two points. Panics if either index is out of
    /// range; use [`MetricSpace::try_distance`] for checked access.
    pub fn distance(&self, a: PointId, b: PointId) -> f64 {
        match &self.inner {
            SpaceInner::Euclidean { points, .. } => euclidean_distance(&points[a], &points[b]),
            SpaceInner::Graph { adj, .. } => {
                assert!(a < adj.len() && b < adj.len(), "vertex index out of range");
                if a == b {
                    return 0.0;
                }
                // Reuse whichever endpoint already has a cached row.
                if let Some(row) = self.cached_row(b) {
                    return row[a];
                }
                self.sssp_row(a)[b]
            }
        }
    }

    /// Checked variant of [`MetricSpace::distance`].
    pub fn try_distance(&self, a: PointId, b: PointId) -> Result<f64> {
        let n = self.num_points();
        for &idx in &[a, b] {
            if idx >= n {
                return Err(Error::IndexOutOfRange {
                    kind: "point",
                    index: idx,
                    len: n,
                });
            }
        }
        Ok(self.distance(a, b))
    }

    /// Minimum distance from `x` to a set of points; `f64::INFINITY` when the
    /// set is empty. The infinity sentinel is what makes the online
    /// algorithms' "no facility open yet" case degenerate correctly.
    pub fn distance_to_set<I>(&self, x: PointId, set: I) -> f64
    where
        I: IntoIterator<Item = PointId>,
    {
        match &self.inner {
            SpaceInner::Euclidean { .. } => set
                .into_iter()
                .map(|p| self.distance(x, p))
                .fold(f64::INFINITY, f64::min),
            SpaceInner::Graph { .. } => {
                let row = self.sssp_row(x);
                set.into_iter()
                    .map(|p| row[p])
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn cached_row(&self, source: PointId) -> Option<Arc<Vec<f64>>> {
        match &self.inner {
            SpaceInner::Graph { sssp, .. } => sssp.read().unwrap().get(&source).cloned(),
            SpaceInner::Euclidean { .. } => None,
        }
    }

    fn sssp_row(&self, source: PointId) -> Arc<Vec<f64>> {
        match &self.inner {
            SpaceInner::Graph { adj, sssp, .. } => {
                if let Some(row) = sssp.read().unwrap().get(&source) {
                    return Arc::clone(row);
                }
                let row = Arc::new(dijkstra(adj, source));
                let mut cache = sssp.write().unwrap();
                Arc::clone(cache.entry(source).or_insert(row))
            }
            SpaceInner::Euclidean { .. } => panic!("sssp_row: not a graph space"),
        }
    }

    /// Distances from `x` to every point, as a dense row. For graphs this is
    /// the memoized shortest-path row; for Euclidean spaces it is computed
    /// fresh each call.
    pub fn distance_row(&self, x: PointId) -> Arc<Vec<f64>> {
        match &self.inner {
            SpaceInner::Euclidean { points, .. } => {
                let px = &points[x];
                Arc::new(points.iter().map(|p| euclidean_distance(px, p)).collect())
            }
            SpaceInner::Graph { .. } => self.sssp_row(x),
        }
    }
}

/// Distances from point `x` to every facility site, indexed by facility id.
/// One shortest-path row suffices for graphs; Euclidean spaces evaluate the
/// sites directly.
pub(crate) fn facility_distances(
    space: &MetricSpace,
    universe: &FacilityUniverse,
    x: PointId,
) -> Vec<f64> {
    match &space.inner {
        SpaceInner::Euclidean { points, .. } => {
            let px = &points[x];
            universe
                .sites()
                .iter()
                .map(|&s| euclidean_distance(px, &points[s]))
                .collect()
        }
        SpaceInner::Graph { .. } => {
            let row = space.sssp_row(x);
            universe.sites().iter().map(|&s| row[s]).collect()
        }
    }
}

fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: PointId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the closest vertex.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(PointId, f64)>], source: PointId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        vertex: source,
    });
    while let Some(HeapEntry { dist: d, vertex: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry {
                    dist: nd,
                    vertex: v,
                });
            }
        }
    }
    dist
}

/// Normalizes raw opening costs: divide by the minimum cost, then round each
/// value down to a power of 2. Returns the normalized costs together with the
/// number of cost classes `L`, so every cost lies in `{2^(k-1) | k in 1..=L}`.
pub fn normalize_costs(raw: &[f64]) -> Result<(Vec<f64>, u32)> {
    if raw.is_empty() {
        return Err(Error::Validation("cost list must be nonempty".into()));
    }
    for (i, &c) in raw.iter().enumerate() {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Validation(format!(
                "cost {} of facility {} must be a positive real",
                c, i
            )));
        }
    }
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut norm = Vec::with_capacity(raw.len());
    let mut max_exp: i32 = 0;
    for &c in raw {
        // The nudge keeps ratios that are mathematically an exact power of 2
        // from landing one class too low after floating-point division.
        let exp = ((c / min).log2() + 1e-9).floor() as i32;
        max_exp = max_exp.max(exp);
        norm.push((exp as f64).exp2());
    }
    Ok((norm, (1 + max_exp) as u32))
}

/// A set of facilities with normalized opening costs and cost-class structure.
///
/// Class `k` holds facilities of normalized cost exactly `2^(k-1)`; the class
/// prefixes (everything of class at most `k`) are nested, growing from the
/// unit-cost facilities up to the whole universe.
#[derive(Debug, Clone)]
pub struct FacilityUniverse {
    sites: Vec<PointId>,
    raw_cost: Vec<f64>,
    norm_cost: Vec<f64>,
    class_of: Vec<u32>,
    num_classes: u32,
}

impl FacilityUniverse {
    pub fn new(sites: Vec<PointId>, raw_costs: Vec<f64>, space: &MetricSpace) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Validation("facility set must be nonempty".into()));
        }
        if sites.len() != raw_costs.len() {
            return Err(Error::Validation(format!(
                "{} facility sites but {} costs",
                sites.len(),
                raw_costs.len()
            )));
        }
        let n = space.num_points();
        for &s in &sites {
            if s >= n {
                return Err(Error::IndexOutOfRange {
                    kind: "facility site",
                    index: s,
                    len: n,
                });
            }
        }
        let (norm_cost, num_classes) = normalize_costs(&raw_costs)?;
        let class_of = norm_cost.iter().map(|c| 1 + c.log2() as u32).collect();
        Ok(FacilityUniverse {
            sites,
            raw_cost: raw_costs,
            norm_cost,
            class_of,
            num_classes,
        })
    }

    /// All facilities open at unit cost.
    pub fn with_uniform_costs(sites: Vec<PointId>, space: &MetricSpace) -> Result<Self> {
        let n = sites.len();
        Self::new(sites, vec![1.0; n], space)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// The point this facility occupies.
    pub fn site(&self, f: FacilityId) -> PointId {
        self.sites[f]
    }

    pub fn sites(&self) -> &[PointId] {
        &self.sites
    }

    /// Normalized opening cost (a power of 2, at least 1). This is the cost
    /// all algorithms account in.
    pub fn cost(&self, f: FacilityId) -> f64 {
        self.norm_cost[f]
    }

    pub fn raw_cost(&self, f: FacilityId) -> f64 {
        self.raw_cost[f]
    }

    /// Cost class `k` with `cost(f) = 2^(k-1)`; 1-based.
    pub fn class_of(&self, f: FacilityId) -> u32 {
        self.class_of[f]
    }

    /// Number of cost classes `L`.
    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    /// Whether facility `f` lies in the class-`k` prefix
    /// (normalized cost at most `2^(k-1)`).
    pub fn in_class_prefix(&self, f: FacilityId, k: u32) -> bool {
        self.class_of[f] <= k
    }

    pub fn ids(&self) -> std::ops::Range<FacilityId> {
        0..self.sites.len()
    }

    /// Replaces raw costs and renormalizes, keeping sites unchanged.
    pub fn with_costs(&self, raw_costs: Vec<f64>) -> Result<Self> {
        if raw_costs.len() != self.sites.len() {
            return Err(Error::Validation(format!(
                "{} facilities but {} replacement costs",
                self.sites.len(),
                raw_costs.len()
            )));
        }
        let (norm_cost, num_classes) = normalize_costs(&raw_costs)?;
        let class_of = norm_cost.iter().map(|c| 1 + c.log2() as u32).collect();
        Ok(FacilityUniverse {
            sites: self.sites.clone(),
            raw_cost: raw_costs,
            norm_cost,
            class_of,
            num_classes,
        })
    }
}
