//! Ward adjacency graph, districting plans, and the contiguity and
//! aggregate queries every other module builds on.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// One atomic geographic unit. Wards are never split between districts.
#[derive(Debug, Clone, PartialEq)]
pub struct Ward {
    /// External identifier as it appears in input files.
    pub name: String,
    pub population: u64,
    pub black_population: u64,
    pub hispanic_population: u64,
    /// Dense county index into [`Geography::county_names`].
    pub county: usize,
    /// Dense town index into [`Geography::town_names`].
    pub town: usize,
    pub area: f64,
    /// Length of this ward's edge on the outer boundary of the state.
    pub outer_boundary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub ward: usize,
    pub shared_length: f64,
}

/// Immutable ward graph together with the number of districts to draw.
#[derive(Debug, Clone)]
pub struct Geography {
    wards: Vec<Ward>,
    neighbors: Vec<Vec<Neighbor>>,
    num_edges: usize,
    num_districts: usize,
    county_names: Vec<String>,
    town_names: Vec<String>,
    total_population: u64,
}

/// Everything read from a ward file pair: the graph and, when the wards
/// file carries a `ref_district` column, the reference plan it encodes.
#[derive(Debug, Clone)]
pub struct LoadedGeography {
    pub geography: Geography,
    pub reference_plan: Option<Plan>,
}

impl Geography {
    /// Builds and validates a geography from wards and undirected edges
    /// `(a, b, shared_length)`, each listed once.
    pub fn new(
        wards: Vec<Ward>,
        edges: &[(usize, usize, f64)],
        num_districts: usize,
        county_names: Vec<String>,
        town_names: Vec<String>,
    ) -> Result<Self> {
        if wards.is_empty() {
            return Err(Error::Validation("geography has no wards".into()));
        }
        if num_districts == 0 {
            return Err(Error::Validation("number of districts must be positive".into()));
        }
        if num_districts > wards.len() {
            return Err(Error::Validation(format!(
                "{} districts requested but only {} wards",
                num_districts,
                wards.len()
            )));
        }
        for (i, w) in wards.iter().enumerate() {
            if w.black_population > w.population || w.hispanic_population > w.population {
                return Err(Error::Validation(format!(
                    "ward {}: minority population exceeds total population",
                    w.name
                )));
            }
            if !(w.area > 0.0) || !w.area.is_finite() {
                return Err(Error::Validation(format!("ward {}: area must be positive", w.name)));
            }
            if !(w.outer_boundary >= 0.0) || !w.outer_boundary.is_finite() {
                return Err(Error::Validation(format!(
                    "ward {}: outer boundary must be nonnegative",
                    w.name
                )));
            }
            if w.county >= county_names.len() || w.town >= town_names.len() {
                return Err(Error::Validation(format!("ward {i}: county/town index out of range")));
            }
        }

        let n = wards.len();
        let mut neighbors: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
        let mut seen: HashMap<(usize, usize), f64> = HashMap::new();
        for &(a, b, len) in edges {
            if a >= n || b >= n {
                return Err(Error::Validation(format!(
                    "adjacency references unknown ward index {}",
                    a.max(b)
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("ward {} is adjacent to itself", wards[a].name)));
            }
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::Validation(format!(
                    "edge {}-{}: shared length must be positive",
                    wards[a].name, wards[b].name
                )));
            }
            let key = (a.min(b), a.max(b));
            if let Some(prev) = seen.insert(key, len) {
                let kind = if prev == len { "duplicate" } else { "asymmetric" };
                return Err(Error::Validation(format!(
                    "{kind} adjacency between {} and {}",
                    wards[a].name, wards[b].name
                )));
            }
            neighbors[a].push(Neighbor { ward: b, shared_length: len });
            neighbors[b].push(Neighbor { ward: a, shared_length: len });
        }
        for list in &mut neighbors {
            list.sort_by_key(|nb| nb.ward);
        }

        let total_population = wards.iter().map(|w| w.population).sum();
        let g = Geography {
            wards,
            neighbors,
            num_edges: seen.len(),
            num_districts,
            county_names,
            town_names,
            total_population,
        };
        if !g.is_connected_subset(&(0..n).collect::<Vec<_>>()) {
            return Err(Error::Validation("ward graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn num_wards(&self) -> usize {
        self.wards.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_districts(&self) -> usize {
        self.num_districts
    }

    pub fn wards(&self) -> &[Ward] {
        &self.wards
    }

    pub fn ward(&self, w: usize) -> &Ward {
        &self.wards[w]
    }

    pub fn neighbors(&self, w: usize) -> &[Neighbor] {
        &self.neighbors[w]
    }

    pub fn num_counties(&self) -> usize {
        self.county_names.len()
    }

    pub fn num_towns(&self) -> usize {
        self.town_names.len()
    }

    pub fn county_names(&self) -> &[String] {
        &self.county_names
    }

    pub fn town_names(&self) -> &[String] {
        &self.town_names
    }

    pub fn total_population(&self) -> u64 {
        self.total_population
    }

    pub fn ideal_population(&self) -> f64 {
        self.total_population as f64 / self.num_districts as f64
    }

    /// Same graph with a different district count.
    pub fn with_districts(&self, num_districts: usize) -> Result<Self> {
        if num_districts == 0 || num_districts > self.num_wards() {
            return Err(Error::Validation(format!(
                "cannot draw {num_districts} districts over {} wards",
                self.num_wards()
            )));
        }
        let mut g = self.clone();
        g.num_districts = num_districts;
        Ok(g)
    }

    /// Map from external ward name to dense index.
    pub fn ward_index(&self) -> HashMap<&str, usize> {
        self.wards.iter().enumerate().map(|(i, w)| (w.name.as_str(), i)).collect()
    }

    /// Undirected edges `(a, b, length)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.num_edges);
        for (a, list) in self.neighbors.iter().enumerate() {
            for nb in list {
                if a < nb.ward {
                    out.push((a, nb.ward, nb.shared_length));
                }
            }
        }
        out
    }

    /// True iff `members` is nonempty and induces a connected subgraph.
    pub fn is_connected_subset(&self, members: &[usize]) -> bool {
        let Some(&start) = members.first() else {
            return false;
        };
        let mut inside = vec![false; self.num_wards()];
        for &w in members {
            inside[w] = true;
        }
        let mut seen = vec![false; self.num_wards()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some(w) = queue.pop_front() {
            for nb in &self.neighbors[w] {
                if inside[nb.ward] && !seen[nb.ward] {
                    seen[nb.ward] = true;
                    reached += 1;
                    queue.push_back(nb.ward);
                }
            }
        }
        reached == members.len()
    }

    /// Writes the wards and adjacency CSV pair. When `plan` is given it is
    /// recorded in the `ref_district` column.
    pub fn write_csv(&self, wards_path: &Path, adjacency_path: &Path, plan: Option<&Plan>) -> Result<()> {
        let mut out = String::new();
        out.push_str("ward_id,county,town,population,black_pop,hisp_pop,area,outer_boundary");
        if plan.is_some() {
            out.push_str(",ref_district");
        }
        out.push('\n');
        for (i, w) in self.wards.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}",
                w.name,
                self.county_names[w.county],
                self.town_names[w.town],
                w.population,
                w.black_population,
                w.hispanic_population,
                w.area,
                w.outer_boundary
            ));
            if let Some(p) = plan {
                out.push_str(&format!(",{}", p.district_of(i)));
            }
            out.push('\n');
        }
        write_file(wards_path, &out)?;

        let mut adj = String::from("ward_a,ward_b,shared_length\n");
        for (a, b, len) in self.edges() {
            adj.push_str(&format!("{},{},{}\n", self.wards[a].name, self.wards[b].name, len));
        }
        write_file(adjacency_path, &adj)
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Assignment of every ward to one of `k` districts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    assignment: Vec<usize>,
}

impl Plan {
    /// Validates labels, nonemptiness and contiguity of every district.
    pub fn new(g: &Geography, assignment: Vec<usize>) -> Result<Self> {
        let plan = Plan { assignment };
        plan.validate(g)?;
        Ok(plan)
    }

    /// Wraps an assignment without checking it. Callers must guarantee the
    /// plan invariants.
    pub fn from_assignment_unchecked(assignment: Vec<usize>) -> Self {
        Plan { assignment }
    }

    pub fn validate(&self, g: &Geography) -> Result<()> {
        let k = g.num_districts();
        if self.assignment.len() != g.num_wards() {
            return Err(Error::Validation(format!(
                "plan covers {} wards, geography has {}",
                self.assignment.len(),
                g.num_wards()
            )));
        }
        if let Some(&bad) = self.assignment.iter().find(|&&d| d >= k) {
            return Err(Error::Validation(format!("district label {bad} out of range 0..{k}")));
        }
        for (d, members) in self.members(k).iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Validation(format!("district {d} is empty")));
            }
            if !g.is_connected_subset(members) {
                return Err(Error::Validation(format!("district {d} is not contiguous")));
            }
        }
        Ok(())
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn district_of(&self, w: usize) -> usize {
        self.assignment[w]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Reassigns one ward. No validity check.
    pub fn set(&mut self, w: usize, d: usize) {
        self.assignment[w] = d;
    }

    /// Ward lists per district, each sorted by ward index.
    pub fn members(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); k];
        for (w, &d) in self.assignment.iter().enumerate() {
            if d < k {
                out[d].push(w);
            }
        }
        out
    }

    /// Relabels districts in order of first appearance by ward index, so
    /// plans that differ only by a permutation of labels compare equal.
    pub fn canonical(&self) -> Plan {
        let mut map: HashMap<usize, usize> = HashMap::new();
        let assignment = self
            .assignment
            .iter()
            .map(|&d| {
                let next = map.len();
                *map.entry(d).or_insert(next)
            })
            .collect();
        Plan { assignment }
    }
}

pub fn is_contiguous(g: &Geography, p: &Plan, d: usize) -> Result<bool> {
    if d >= g.num_districts() {
        return Err(Error::InvalidArgument(format!(
            "district {d} out of range 0..{}",
            g.num_districts()
        )));
    }
    let members: Vec<usize> = (0..p.len()).filter(|&w| p.district_of(w) == d).collect();
    Ok(g.is_connected_subset(&members))
}

/// Every `(ward, district)` pair where the ward borders a district other
/// than its own, ordered by ward then district.
pub fn conflicted_wards(g: &Geography, p: &Plan) -> Vec<(usize, usize)> {
    let mut out = BTreeSet::new();
    for w in 0..g.num_wards() {
        let own = p.district_of(w);
        for nb in g.neighbors(w) {
            let other = p.district_of(nb.ward);
            if other != own {
                out.insert((w, other));
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DistrictAggregate {
    pub population: u64,
    pub black_population: u64,
    pub hispanic_population: u64,
    pub area: f64,
    pub perimeter: f64,
}

impl DistrictAggregate {
    pub fn black_fraction(&self) -> f64 {
        fraction(self.black_population, self.population)
    }

    pub fn hispanic_fraction(&self) -> f64 {
        fraction(self.hispanic_population, self.population)
    }
}

fn fraction(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

/// Full recomputation of per-district sums. A district's perimeter is the
/// shared length of every edge leaving it plus its wards' outer boundary.
pub fn district_aggregates(g: &Geography, p: &Plan) -> Vec<DistrictAggregate> {
    let mut out = vec![DistrictAggregate::default(); g.num_districts()];
    for (w, ward) in g.wards().iter().enumerate() {
        let agg = &mut out[p.district_of(w)];
        agg.population += ward.population;
        agg.black_population += ward.black_population;
        agg.hispanic_population += ward.hispanic_population;
        agg.area += ward.area;
        agg.perimeter += ward.outer_boundary;
        for nb in g.neighbors(w) {
            if p.district_of(nb.ward) != p.district_of(w) {
                agg.perimeter += nb.shared_length;
            }
        }
    }
    out
}

/// Updates `aggs` in place for moving ward `w` to district `to`, given the
/// assignment *before* the move. Only the donor and receiver change.
pub fn apply_move_to_aggregates(
    g: &Geography,
    assignment: &[usize],
    aggs: &mut [DistrictAggregate],
    w: usize,
    to: usize,
) {
    let from = assignment[w];
    if from == to {
        return;
    }
    let ward = g.ward(w);
    {
        let a = &mut aggs[from];
        a.population -= ward.population;
        a.black_population -= ward.black_population;
        a.hispanic_population -= ward.hispanic_population;
        a.area -= ward.area;
    }
    {
        let b = &mut aggs[to];
        b.population += ward.population;
        b.black_population += ward.black_population;
        b.hispanic_population += ward.hispanic_population;
        b.area += ward.area;
    }
    let mut d_from = -ward.outer_boundary;
    let mut d_to = ward.outer_boundary;
    for nb in g.neighbors(w) {
        let du = assignment[nb.ward];
        let len = nb.shared_length;
        // Edges to third districts leave their perimeter unchanged.
        if du == from {
            d_from += len;
            d_to += len;
        } else if du == to {
            d_from -= len;
            d_to -= len;
        } else {
            d_from -= len;
            d_to += len;
        }
    }
    aggs[from].perimeter += d_from;
    aggs[to].perimeter += d_to;
}

#[derive(Debug, Deserialize)]
struct WardRow {
    ward_id: String,
    county: String,
    town: String,
    population: u64,
    black_pop: u64,
    hisp_pop: u64,
    area: f64,
    outer_boundary: f64,
    #[serde(default)]
    ref_district: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AdjacencyRow {
    ward_a: String,
    ward_b: String,
    shared_length: f64,
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::parse(path.display().to_string(), line, e.to_string())
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&i) = index.get(name) {
        return i;
    }
    names.push(name.to_string());
    index.insert(name.to_string(), names.len() - 1);
    names.len() - 1
}

/// Reads and validates the wards and adjacency CSV files.
///
/// Ward indices follow row order in the wards file. If the optional
/// `ref_district` column is present, every ward must carry a label; the
/// distinct labels (sorted numerically when all are integers) map onto
/// `0..k`.
pub fn load_geography(wards_path: &Path, adjacency_path: &Path, num_districts: usize) -> Result<LoadedGeography> {
    let mut reader = open_csv(wards_path)?;
    let has_ref = reader
        .headers()
        .map_err(|e| csv_error(wards_path, e))?
        .iter()
        .any(|h| h == "ref_district");

    let mut wards = Vec::new();
    let mut ref_labels = Vec::new();
    let mut county_names = Vec::new();
    let mut county_index = HashMap::new();
    let mut town_names = Vec::new();
    let mut town_index = HashMap::new();
    let mut names = HashMap::new();
    for row in reader.deserialize::<WardRow>() {
        let row = row.map_err(|e| csv_error(wards_path, e))?;
        if names.insert(row.ward_id.clone(), wards.len()).is_some() {
            return Err(Error::Validation(format!("duplicate ward id {}", row.ward_id)));
        }
        if has_ref {
            match row.ref_district.as_deref().map(str::trim) {
                Some(label) if !label.is_empty() => ref_labels.push(label.to_string()),
                _ => {
                    return Err(Error::Validation(format!(
                        "ward {} has no reference district",
                        row.ward_id
                    )))
                }
            }
        }
        let county = intern(&mut county_names, &mut county_index, &row.county);
        let town = intern(&mut town_names, &mut town_index, &row.town);
        wards.push(Ward {
            name: row.ward_id,
            population: row.population,
            black_population: row.black_pop,
            hispanic_population: row.hisp_pop,
            county,
            town,
            area: row.area,
            outer_boundary: row.outer_boundary,
        });
    }

    let mut edges = Vec::new();
    let mut reader = open_csv(adjacency_path)?;
    for row in reader.deserialize::<AdjacencyRow>() {
        let row = row.map_err(|e| csv_error(adjacency_path, e))?;
        let lookup = |name: &str| {
            names
                .get(name)
                .copied()
                .ok_or_else(|| Error::Validation(format!("adjacency references unknown ward id {name}")))
        };
        edges.push((lookup(&row.ward_a)?, lookup(&row.ward_b)?, row.shared_length));
    }

    let geography = Geography::new(wards, &edges, num_districts, county_names, town_names)?;
    let reference_plan = if has_ref {
        Some(plan_from_labels(&geography, &ref_labels)?)
    } else {
        None
    };
    Ok(LoadedGeography {
        geography,
        reference_plan,
    })
}

/// Number of distinct `ref_district` labels in a wards file, or `None`
/// when the column is absent.
pub fn count_reference_districts(wards_path: &Path) -> Result<Option<usize>> {
    let mut reader = open_csv(wards_path)?;
    let headers = reader.headers().map_err(|e| csv_error(wards_path, e))?.clone();
    let Some(col) = headers.iter().position(|h| h == "ref_district") else {
        return Ok(None);
    };
    let mut labels = BTreeSet::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(wards_path, e))?;
        if let Some(l) = rec.get(col).map(str::trim).filter(|l| !l.is_empty()) {
            labels.insert(l.to_string());
        }
    }
    Ok(Some(labels.len()))
}

/// Maps arbitrary district labels (one per ward, in ward order) onto
/// `0..k` and validates the resulting plan.
pub fn plan_from_labels(g: &Geography, labels: &[String]) -> Result<Plan> {
    let mut distinct: Vec<&String> = labels.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let numeric: Option<Vec<i64>> = distinct.iter().map(|s| s.parse::<i64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(i64, &String)> = nums.into_iter().zip(distinct).collect();
        pairs.sort();
        distinct = pairs.into_iter().map(|(_, s)| s).collect();
    }
    if distinct.len() != g.num_districts() {
        return Err(Error::Validation(format!(
            "reference plan has {} districts, expected {}",
            distinct.len(),
            g.num_districts()
        )));
    }
    let index: HashMap<&String, usize> = distinct.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    let assignment = labels.iter().map(|l| index[l]).collect();
    Plan::new(g, assignment)
}

#[derive(Debug, Deserialize)]
struct PlanRow {
    ward_id: String,
    district: String,
}

/// Reads a `ward_id,district` CSV into a plan over `g`.
pub fn load_plan(g: &Geography, path: &Path) -> Result<Plan> {
    let index = g.ward_index();
    let mut labels: Vec<Option<String>> = vec![None; g.num_wards()];
    let mut reader = open_csv(path)?;
    for row in reader.deserialize::<PlanRow>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let w = *index
            .get(row.ward_id.as_str())
            .ok_or_else(|| Error::Validation(format!("plan references unknown ward id {}", row.ward_id)))?;
        labels[w] = Some(row.district);
    }
    let labels: Vec<String> = labels
        .into_iter()
        .enumerate()
        .map(|(w, l)| l.ok_or_else(|| Error::Validation(format!("ward {} has no district", g.ward(w).name))))
        .collect::<Result<_>>()?;
    plan_from_labels(g, &labels)
}


#[cfg(test)]
mod tests {
    use super::testing::{grid, plan};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_path_graph() {
        let dir = tempfile::tempdir().unwrap();
        let wards = write(
            dir.path(),
            "w.csv",
            "ward_id,county,town,population,black_pop,hisp_pop,area,outer_boundary\n\
             a,c1,t1,10,0,0,1,3\nb,c1,t1,10,0,0,1,2\nc,c2,t2,10,0,0,1,2\nd,c2,t2,10,0,0,1,3\n",
        );
        let adj = write(dir.path(), "a.csv", "ward_a,ward_b,shared_length\na,b,1\nb,c,1\nc,d,1\n");
        let loaded = load_geography(&wards, &adj, 2).unwrap();
        assert_eq!(loaded.geography.num_wards(), 4);
        assert_eq!(loaded.geography.num_edges(), 3);
        assert_eq!(loaded.geography.num_counties(), 2);
        assert!(loaded.reference_plan.is_none());
    }

    #[test]
    fn unknown_ward_in_adjacency_is_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let wards = write(
            dir.path(),
            "w.csv",
            "ward_id,county,town,population,black_pop,hisp_pop,area,outer_boundary\n0,c,t,1,0,0,1,1\n1,c,t,1,0,0,1,1\n",
        );
        let adj = write(dir.path(), "a.csv", "ward_a,ward_b,shared_length\n0,1,1\n0,99,1\n");
        let err = load_geography(&wards, &adj, 1).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("99")), "{err}");
    }

    #[test]
    fn malformed_row_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let wards = write(
            dir.path(),
            "w.csv",
            "ward_id,county,town,population,black_pop,hisp_pop,area,outer_boundary\n0,c,t,lots,0,0,1,1\n",
        );
        let adj = write(dir.path(), "a.csv", "ward_a,ward_b,shared_length\n");
        assert!(matches!(load_geography(&wards, &adj, 1), Err(Error::Parse { .. })));
    }

    #[test]
    fn disconnected_and_asymmetric_graphs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let wards = write(
            dir.path(),
            "w.csv",
            "ward_id,county,town,population,black_pop,hisp_pop,area,outer_boundary\n\
             0,c,t,1,0,0,1,1\n1,c,t,1,0,0,1,1\n2,c,t,1,0,0,1,1\n",
        );
        let adj = write(dir.path(), "a.csv", "ward_a,ward_b,shared_length\n0,1,1\n");
        let err = load_geography(&wards, &adj, 1).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("connected")));

        let adj = write(dir.path(), "b.csv", "ward_a,ward_b,shared_length\n0,1,1\n1,2,1\n1,0,2\n");
        let err = load_geography(&wards, &adj, 1).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("asymmetric")));
    }

    #[test]
    fn reference_plan_column() {
        let dir = tempfile::tempdir().unwrap();
        let body = "ward_id,county,town,population,black_pop,hisp_pop,area,outer_boundary,ref_district\n\
                    a,c,t,1,0,0,1,3,10\nb,c,t,1,0,0,1,2,10\nc,c,t,1,0,0,1,2,9\n";
        let wards = write(dir.path(), "w.csv", body);
        let adj = write(dir.path(), "a.csv", "ward_a,ward_b,shared_length\na,b,1\nb,c,1\n");
        let loaded = load_geography(&wards, &adj, 2).unwrap();
        assert_eq!(loaded.reference_plan.unwrap().assignment(), &[1, 1, 0]);

        let missing = body.replace("c,c,t,1,0,0,1,2,9", "c,c,t,1,0,0,1,2,");
        let wards = write(dir.path(), "w2.csv", &missing);
        assert!(matches!(load_geography(&wards, &adj, 2), Err(Error::Validation(_))));
    }

    #[test]
    fn grid_4x4_edge_count() {
        // 4 rows of 3 horizontal edges plus 4 columns of 3 vertical edges.
        assert_eq!(grid(4, 4, 1, 1).num_edges(), 24);
    }

    #[test]
    fn contiguity_examples() {
        let g = grid(2, 2, 2, 1);
        assert!(is_contiguous(&g, &plan(&[0, 0, 1, 1]), 0).unwrap());
        assert!(is_contiguous(&g, &plan(&[0, 0, 1, 1]), 2).is_err());

        let path = grid(3, 1, 2, 1);
        assert!(!is_contiguous(&path, &plan(&[0, 1, 0]), 0).unwrap());

        let g = grid(4, 4, 2, 1);
        let mut a = vec![1; 16];
        for w in [0, 1, 2, 3, 7] {
            a[w] = 0;
        }
        assert!(is_contiguous(&g, &plan(&a), 0).unwrap());
        assert!(is_contiguous(&g, &plan(&a), 1).unwrap());
    }

    #[test]
    fn conflicted_examples() {
        let g = grid(2, 2, 1, 1);
        assert!(conflicted_wards(&g, &plan(&[0, 0, 0, 0])).is_empty());

        let g = grid(2, 2, 2, 1);
        assert_eq!(
            conflicted_wards(&g, &plan(&[0, 0, 1, 1])),
            vec![(0, 1), (1, 1), (2, 0), (3, 0)]
        );

        let path = grid(3, 1, 2, 1);
        assert_eq!(conflicted_wards(&path, &plan(&[0, 1, 1])), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn aggregate_examples() {
        let g = grid(2, 2, 2, 10);
        let aggs = district_aggregates(&g, &plan(&[0, 0, 1, 1]));
        for a in &aggs {
            assert_eq!(a.population, 20);
            assert_eq!(a.area, 2.0);
            assert_eq!(a.perimeter, 6.0);
        }

        let g = grid(3, 3, 9, 1);
        let p = plan(&(0..9).collect::<Vec<_>>());
        let aggs = district_aggregates(&g, &p);
        // center cell: no outer boundary, four unit edges
        assert_eq!(aggs[4].perimeter, 4.0);
        // corner: two outer sides plus two edges
        assert_eq!(aggs[0].perimeter, 4.0);

        let g = grid(3, 3, 1, 5);
        let whole = district_aggregates(&g, &plan(&[0; 9]));
        assert_eq!(whole[0].population, 45);
        assert_eq!(whole[0].perimeter, 12.0);
    }

    #[test]
    fn canonical_labeling() {
        let p = plan(&[2, 2, 0, 1]);
        assert_eq!(p.canonical().assignment(), &[0, 0, 1, 2]);
        assert_eq!(p.canonical().canonical(), p.canonical());
    }

    #[test]
    fn perimeter_identity_and_incremental_updates() {
        let g = grid(6, 6, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a: Vec<usize> = (0..36).map(|w| (w % 6) / 2 + usize::from(w >= 18)).collect();
        for d in a.iter_mut() {
            *d = (*d).min(3);
        }
        let mut p = plan(&a);
        let mut aggs = district_aggregates(&g, &p);
        let outer_total: f64 = g.wards().iter().map(|w| w.outer_boundary).sum();
        for _ in 0..1000 {
            let w = rng.random_range(0..36);
            let to = rng.random_range(0..4);
            apply_move_to_aggregates(&g, p.assignment(), &mut aggs, w, to);
            p.set(w, to);
            let fresh = district_aggregates(&g, &p);
            assert_eq!(aggs, fresh);
            let cut: f64 = g
                .edges()
                .iter()
                .filter(|(x, y, _)| p.district_of(*x) != p.district_of(*y))
                .map(|e| e.2)
                .sum();
            let sum: f64 = fresh.iter().map(|a| a.perimeter).sum();
            assert_eq!(sum, 2.0 * cut + outer_total);
        }
    }
}
