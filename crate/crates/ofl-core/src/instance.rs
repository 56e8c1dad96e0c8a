//! Online instances, prediction streams, dataset ingestion and error measures.
//!
//! File formats (all header-less):
//! - points: one CSV row per demand, coordinates (Euclidean) or a single
//!   vertex id (graph), in arrival order;
//! - facilities: `coord_1,...,coord_d[,cost]` (Euclidean) or
//!   `vertex_id[,cost]` (graph), cost defaulting to 1.0;
//! - edges: whitespace-separated `u v weight`, undirected;
//! - predictions: one facility index per line, aligned with the demands.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{FacilityId, FacilityUniverse, MetricSpace, PointId};
use crate::offline::OfflineSolution;

/// An ordered demand sequence over a metric space with a facility universe.
/// Immutable once constructed; cheap to clone (the space and universe are
/// shared).
#[derive(Debug, Clone)]
pub struct OnlineInstance {
    space: Arc<MetricSpace>,
    universe: Arc<FacilityUniverse>,
    demands: Vec<PointId>,
}

impl OnlineInstance {
    pub fn new(
        space: Arc<MetricSpace>,
        universe: Arc<FacilityUniverse>,
        demands: Vec<PointId>,
    ) -> Result<Self> {
        let n = space.num_points();
        for &d in &demands {
            if d >= n {
                return Err(Error::IndexOutOfRange {
                    kind: "demand point",
                    index: d,
                    len: n,
                });
            }
        }
        Ok(OnlineInstance {
            space,
            universe,
            demands,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn universe(&self) -> &FacilityUniverse {
        &self.universe
    }

    pub fn demands(&self) -> &[PointId] {
        &self.demands
    }

    /// Number of demands.
    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    /// A new instance over the same space and universe with a different
    /// demand sequence.
    pub fn with_demands(&self, demands: Vec<PointId>) -> Result<Self> {
        OnlineInstance::new(Arc::clone(&self.space), Arc::clone(&self.universe), demands)
    }

    /// Same demands, different facility costs.
    pub fn with_universe(&self, universe: FacilityUniverse) -> Self {
        OnlineInstance {
            space: Arc::clone(&self.space),
            universe: Arc::new(universe),
            demands: self.demands.clone(),
        }
    }
}

/// A per-demand predicted facility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionStream {
    pred: Vec<FacilityId>,
}

impl PredictionStream {
    pub fn new(pred: Vec<FacilityId>, universe: &FacilityUniverse) -> Result<Self> {
        let m = universe.len();
        for &f in &pred {
            if f >= m {
                return Err(Error::IndexOutOfRange {
                    kind: "predicted facility",
                    index: f,
                    len: m,
                });
            }
        }
        Ok(PredictionStream { pred })
    }

    pub fn len(&self) -> usize {
        self.pred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pred.is_empty()
    }

    pub fn get(&self, i: usize) -> FacilityId {
        self.pred[i]
    }

    pub fn as_slice(&self) -> &[FacilityId] {
        &self.pred
    }

    /// Checks alignment with an instance's demand sequence.
    pub fn validate_for(&self, inst: &OnlineInstance) -> Result<()> {
        if self.pred.len() != inst.len() {
            return Err(Error::Validation(format!(
                "{} predictions for {} demands",
                self.pred.len(),
                inst.len()
            )));
        }
        Ok(())
    }
}

/// Prediction errors against an offline solution: per-demand distances
/// `d(pred(x_i), opt(x_i))` and their aggregates.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    per_demand: Vec<f64>,
    sorted_desc: Vec<f64>,
}

impl ErrorReport {
    pub fn per_demand_error(&self) -> &[f64] {
        &self.per_demand
    }

    /// Maximum prediction error.
    pub fn eta_inf(&self) -> f64 {
        self.sorted_desc.first().copied().unwrap_or(0.0)
    }

    /// Total prediction error.
    pub fn eta_1(&self) -> f64 {
        self.per_demand.iter().sum()
    }

    /// The `t`-th largest prediction error (1-based); the maximum error after
    /// discarding the `t - 1` worst outliers. Zero when `t` exceeds the
    /// demand count.
    pub fn eta_t_inf(&self, t: usize) -> f64 {
        assert!(t >= 1, "t is 1-based");
        self.sorted_desc.get(t - 1).copied().unwrap_or(0.0)
    }

    /// Total prediction error after discarding the `t - 1` worst outliers.
    pub fn eta_t_1(&self, t: usize) -> f64 {
        assert!(t >= 1, "t is 1-based");
        self.sorted_desc.iter().skip(t - 1).sum()
    }
}

/// Per-demand errors `d(pred(x_i), opt(x_i))` where `opt(x_i)` is the demand's
/// nearest open facility in the offline solution.
pub fn compute_errors(
    inst: &OnlineInstance,
    preds: &PredictionStream,
    offline: &OfflineSolution,
) -> Result<ErrorReport> {
    preds.validate_for(inst)?;
    if offline.opt_of().len() != inst.len() {
        return Err(Error::Validation(format!(
            "offline solution covers {} demands, instance has {}",
            offline.opt_of().len(),
            inst.len()
        )));
    }
    let uni = inst.universe();
    let space = inst.space();
    let per_demand: Vec<f64> = (0..inst.len())
        .map(|i| space.distance(uni.site(preds.get(i)), uni.site(offline.opt_of()[i])))
        .collect();
    let mut sorted_desc = per_demand.clone();
    sorted_desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(ErrorReport {
        per_demand,
        sorted_desc,
    })
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content.lines().map(|l| l.to_string()).collect())
}

fn parse_f64(path: &Path, line_no: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line_no, format!("expected a real number, got {:?}", field)))
}

fn parse_usize(path: &Path, line_no: usize, field: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| {
            Error::parse(
                path,
                line_no,
                format!("expected a nonnegative integer, got {:?}", field),
            )
        })
}

/// Loads a Euclidean instance. Demand order equals the row order of the
/// points file; facility costs default to 1.0 when the cost column is absent.
pub fn load_euclidean(points_file: &Path, facilities_file: &Path) -> Result<OnlineInstance> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (i, line) in read_lines(points_file)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| parse_f64(points_file, i + 1, f))
            .collect::<Result<_>>()?;
        if let Some(first) = points.first() {
            if row.len() != first.len() {
                return Err(Error::parse(
                    points_file,
                    i + 1,
                    format!("row has {} coordinates, expected {}", row.len(), first.len()),
                ));
            }
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no demand points",
            points_file.display()
        )));
    }
    let dim = points[0].len();
    let n_demands = points.len();

    let mut sites = Vec::new();
    let mut costs = Vec::new();
    for (i, line) in read_lines(facilities_file)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let (coord_fields, cost) = if fields.len() == dim {
            (&fields[..], 1.0)
        } else if fields.len() == dim + 1 {
            (
                &fields[..dim],
                parse_f64(facilities_file, i + 1, fields[dim])?,
            )
        } else {
            return Err(Error::parse(
                facilities_file,
                i + 1,
                format!(
                    "row has {} fields, expected {} coordinates with an optional cost",
                    fields.len(),
                    dim
                ),
            ));
        };
        let coords: Vec<f64> = coord_fields
            .iter()
            .map(|f| parse_f64(facilities_file, i + 1, f))
            .collect::<Result<_>>()?;
        points.push(coords);
        sites.push(n_demands + costs.len());
        costs.push(cost);
    }
    if sites.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no facilities",
            facilities_file.display()
        )));
    }

    let space = Arc::new(MetricSpace::euclidean(points)?);
    let universe = Arc::new(FacilityUniverse::new(sites, costs, &space)?);
    OnlineInstance::new(space, universe, (0..n_demands).collect())
}

/// Loads a graph instance: weighted undirected edges, demand vertices in
/// arrival order, facility vertices with optional costs. The graph must be
/// connected.
pub fn load_graph(
    edges_file: &Path,
    demands_file: &Path,
    facilities_file: &Path,
) -> Result<OnlineInstance> {
    let mut edges = Vec::new();
    for (i, line) in read_lines(edges_file)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                edges_file,
                i + 1,
                format!("expected `u v weight`, got {} fields", fields.len()),
            ));
        }
        let u = parse_usize(edges_file, i + 1, fields[0])?;
        let v = parse_usize(edges_file, i + 1, fields[1])?;
        let w = parse_f64(edges_file, i + 1, fields[2])?;
        edges.push((u, v, w));
    }
    let space = Arc::new(MetricSpace::graph(edges)?);
    let n_vertices = space.num_points();

    let mut demands = Vec::new();
    for (i, line) in read_lines(demands_file)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_usize(demands_file, i + 1, line)?;
        if v >= n_vertices {
            return Err(Error::parse(
                demands_file,
                i + 1,
                format!("vertex {} out of range ({} vertices)", v, n_vertices),
            ));
        }
        demands.push(v);
    }
    if demands.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no demand vertices",
            demands_file.display()
        )));
    }

    let mut sites = Vec::new();
    let mut costs = Vec::new();
    for (i, line) in read_lines(facilities_file)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let (v, cost) = match fields.len() {
            1 => (parse_usize(facilities_file, i + 1, fields[0])?, 1.0),
            2 => (
                parse_usize(facilities_file, i + 1, fields[0])?,
                parse_f64(facilities_file, i + 1, fields[1])?,
            ),
            k => {
                return Err(Error::parse(
                    facilities_file,
                    i + 1,
                    format!("expected `vertex_id[,cost]`, got {} fields", k),
                ))
            }
        };
        if v >= n_vertices {
            return Err(Error::parse(
                facilities_file,
                i + 1,
                format!("vertex {} out of range ({} vertices)", v, n_vertices),
            ));
        }
        sites.push(v);
        costs.push(cost);
    }
    if sites.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no facilities",
            facilities_file.display()
        )));
    }

    let universe = Arc::new(FacilityUniverse::new(sites, costs, &space)?);
    OnlineInstance::new(space, universe, demands)
}

/// Loads a prediction stream (one facility index per line).
pub fn load_predictions(path: &Path, universe: &FacilityUniverse) -> Result<PredictionStream> {
    let mut pred = Vec::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f = parse_usize(path, i + 1, line)?;
        if f >= universe.len() {
            return Err(Error::parse(
                path,
                i + 1,
                format!("facility {} out of range ({} facilities)", f, universe.len()),
            ));
        }
        pred.push(f);
    }
    Ok(PredictionStream { pred })
}

// ---------------------------------------------------------------------------
// Serialization (mirrors the ingestion formats)
// ---------------------------------------------------------------------------

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(content.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn coords_row(space: &MetricSpace, p: PointId) -> String {
    space
        .coords(p)
        .expect("euclidean space")
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the demand points of a Euclidean instance in the points format.
pub fn write_euclidean_points(path: &Path, inst: &OnlineInstance) -> Result<()> {
    let mut out = String::new();
    for &d in inst.demands() {
        out.push_str(&coords_row(inst.space(), d));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes the facilities of a Euclidean instance (`coords...,raw_cost`).
pub fn write_euclidean_facilities(path: &Path, inst: &OnlineInstance) -> Result<()> {
    let uni = inst.universe();
    let mut out = String::new();
    for f in uni.ids() {
        out.push_str(&coords_row(inst.space(), uni.site(f)));
        out.push(',');
        out.push_str(&uni.raw_cost(f).to_string());
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes the edge list of a graph instance (`u v weight`).
pub fn write_graph_edges(path: &Path, inst: &OnlineInstance) -> Result<()> {
    let edges = inst
        .space()
        .edges()
        .ok_or_else(|| Error::Validation("not a graph instance".into()))?;
    let mut out = String::new();
    for &(u, v, w) in edges {
        out.push_str(&format!("{} {} {}\n", u, v, w));
    }
    write_file(path, &out)
}

/// Writes the demand vertices of a graph instance, one per line.
pub fn write_graph_demands(path: &Path, inst: &OnlineInstance) -> Result<()> {
    let mut out = String::new();
    for &d in inst.demands() {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes the facilities of a graph instance (`vertex_id,raw_cost`).
pub fn write_graph_facilities(path: &Path, inst: &OnlineInstance) -> Result<()> {
    let uni = inst.universe();
    let mut out = String::new();
    for f in uni.ids() {
        out.push_str(&format!("{},{}\n", uni.site(f), uni.raw_cost(f)));
    }
    write_file(path, &out)
}

/// Writes a prediction stream, one facility index per line.
pub fn write_predictions(path: &Path, preds: &PredictionStream) -> Result<()> {
    let mut out = String::new();
    for &f in preds.as_slice() {
        out.push_str(&f.to_string());
        out.push('\n');
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::SpaceKind;
    use crate::offline;
    use proptest::prelude::*;
    use std::io::Write;

    fn tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_euclidean_roundtrip_shape() {
        let pts = tmp("0,0\n1,0\n0.5,2\n");
        let fac = tmp("0,0,3\n1,1\n");
        let inst = load_euclidean(pts.path(), fac.path()).unwrap();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst.universe().len(), 2);
        // second facility row omitted the cost column
        assert_eq!(inst.universe().raw_cost(1), 1.0);
        assert_eq!(inst.universe().num_classes(), 2); // costs 3,1 -> norm 2,1
    }

    #[test]
    fn load_euclidean_rejects_empty_points() {
        let pts = tmp("");
        let fac = tmp("0,0,1\n");
        assert!(matches!(
            load_euclidean(pts.path(), fac.path()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn load_euclidean_reports_line_numbers() {
        let pts = tmp("0,0\n1,oops\n");
        let fac = tmp("0,0,1\n");
        match load_euclidean(pts.path(), fac.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn load_euclidean_rejects_dimension_mismatch() {
        let pts = tmp("0,0\n1,2,3\n");
        let fac = tmp("0,0,1\n");
        assert!(load_euclidean(pts.path(), fac.path()).is_err());
    }

    #[test]
    fn load_graph_triangle() {
        let edges = tmp("0 1 1.0\n1 2 1.0\n0 2 1.5\n");
        let demands = tmp("0\n2\n");
        let fac = tmp("1,2.0\n");
        let inst = load_graph(edges.path(), demands.path(), fac.path()).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.universe().len(), 1);
        assert_eq!(inst.space().kind(), SpaceKind::Graph);
        assert_eq!(inst.space().distance(0, 2), 1.5);
    }

    #[test]
    fn load_graph_rejects_disconnected() {
        let edges = tmp("0 1 1.0\n2 3 1.0\n");
        let demands = tmp("0\n");
        let fac = tmp("1\n");
        assert!(load_graph(edges.path(), demands.path(), fac.path()).is_err());
    }

    #[test]
    fn load_graph_rejects_conflicting_duplicate() {
        let edges = tmp("0 1 1.0\n0 1 2.0\n");
        let demands = tmp("0\n");
        let fac = tmp("1\n");
        assert!(load_graph(edges.path(), demands.path(), fac.path()).is_err());
    }

    #[test]
    fn errors_aggregate_as_specified() {
        // Demands at 0, 3, 10 on a line; facilities at the same spots.
        let space = Arc::new(
            MetricSpace::euclidean(vec![
                vec![0.0],
                vec![3.0],
                vec![10.0],
                vec![0.0],
                vec![3.0],
                vec![10.0],
            ])
            .unwrap(),
        );
        let uni = Arc::new(FacilityUniverse::with_uniform_costs(vec![3, 4, 5], &space).unwrap());
        let inst = OnlineInstance::new(space, uni, vec![0, 1, 2]).unwrap();
        let offline = offline::brute_force(&inst).unwrap();
        // Perfect predictions: zero error.
        let perfect = PredictionStream::new(offline.opt_of().to_vec(), inst.universe()).unwrap();
        let report = compute_errors(&inst, &perfect, &offline).unwrap();
        assert_eq!(report.eta_inf(), 0.0);
        assert_eq!(report.eta_1(), 0.0);
    }

    #[test]
    fn eta_t_inf_is_the_sorted_tail() {
        let report = ErrorReport {
            per_demand: vec![3.0, 1.0, 2.0],
            sorted_desc: vec![3.0, 2.0, 1.0],
        };
        assert_eq!(report.eta_inf(), 3.0);
        assert_eq!(report.eta_1(), 6.0);
        assert_eq!(report.eta_t_inf(1), 3.0);
        assert_eq!(report.eta_t_inf(2), 2.0);
        assert_eq!(report.eta_t_inf(3), 1.0);
        assert_eq!(report.eta_t_inf(4), 0.0);
        assert_eq!(report.eta_t_1(2), 3.0);
    }

    #[test]
    fn single_demand_error_aggregates_trivially() {
        let report = ErrorReport {
            per_demand: vec![0.5],
            sorted_desc: vec![0.5],
        };
        assert_eq!(report.eta_inf(), 0.5);
        assert_eq!(report.eta_1(), 0.5);
    }

    #[test]
    fn serialization_roundtrips_coordinates() {
        let space = Arc::new(
            MetricSpace::euclidean(vec![
                vec![0.125, -3.75],
                vec![1.0 / 3.0, 2.0f64.sqrt()],
                vec![5.5, 0.0],
            ])
            .unwrap(),
        );
        let uni = Arc::new(FacilityUniverse::new(vec![2], vec![2.5], &space).unwrap());
        let inst = OnlineInstance::new(space, uni, vec![0, 1]).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let pts = dir.path().join("points.csv");
        let fac = dir.path().join("facilities.csv");
        write_euclidean_points(&pts, &inst).unwrap();
        write_euclidean_facilities(&fac, &inst).unwrap();
        let reloaded = load_euclidean(&pts, &fac).unwrap();

        for (i, &d) in inst.demands().iter().enumerate() {
            assert_eq!(
                inst.space().coords(d).unwrap(),
                reloaded.space().coords(reloaded.demands()[i]).unwrap()
            );
        }
        assert_eq!(inst.universe().raw_cost(0), reloaded.universe().raw_cost(0));
    }

    proptest! {
        #[test]
        fn eta_t_inf_matches_full_sort_oracle(
            errors in proptest::collection::vec(0.0f64..100.0, 1..50)
        ) {
            let mut sorted_desc = errors.clone();
            sorted_desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let report = ErrorReport { per_demand: errors.clone(), sorted_desc };
            // Oracle: t-th largest by re-sorting from scratch.
            let mut oracle = errors;
            oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for t in 1..=oracle.len() {
                prop_assert_eq!(report.eta_t_inf(t), oracle[t - 1]);
            }
            // Nonincreasing in t, eta_1 >= eta_inf.
            for t in 1..oracle.len() {
                prop_assert!(report.eta_t_inf(t + 1) <= report.eta_t_inf(t));
            }
            prop_assert!(report.eta_1() >= report.eta_inf() - 1e-12);
        }
    }
}
