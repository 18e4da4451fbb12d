//! Planning case: network, units, storage, demand profiles and economics.
//!
//! Cases are read from a TOML document. Hourly profiles can be written inline
//! or kept in a CSV file (`day,hour,<profile columns...>`) referenced from the
//! `representative_days` section.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::uncertainty::UncertaintySpec;

/// Days per year; representative-day weights must add up to this.
pub const DAYS_PER_YEAR: f64 = 365.0;
const WEIGHT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CaseError> {
    Err(CaseError::Validation(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: usize,
    #[serde(default, rename = "reference", skip_serializing_if = "std::ops::Not::not")]
    pub is_reference: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    Conventional,
    Wind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: usize,
    pub technology: Technology,
    /// MW
    pub nominal_capacity: f64,
    /// €/MWh
    pub operating_cost: f64,
    /// Profile column with hourly capacity factors; wind units only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

impl Generator {
    pub fn is_wind(&self) -> bool {
        self.technology == Technology::Wind
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageStatus {
    Existing,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageUnit {
    pub id: String,
    pub bus: usize,
    pub status: StorageStatus,
    /// MWh
    pub max_energy: f64,
    /// MWh
    pub initial_energy: f64,
    /// MW
    pub charge_cap: f64,
    /// MW
    pub discharge_cap: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    #[serde(default)]
    pub max_buildable: u32,
    /// 10³ € per unit
    #[serde(default)]
    pub unit_capital_cost: f64,
}

impl StorageUnit {
    pub fn is_candidate(&self) -> bool {
        self.status == StorageStatus::Candidate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demand {
    pub id: String,
    pub bus: usize,
    /// MW
    pub nominal_level: f64,
    /// €/MWh
    pub shed_cost: f64,
    /// Profile column with hourly level factors; defaults to `id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

impl Demand {
    pub fn profile_name(&self) -> &str {
        self.profile.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corridor {
    pub from_bus: usize,
    pub to_bus: usize,
    /// p.u.
    pub reactance: f64,
    /// MW per circuit
    pub capacity: f64,
    #[serde(default)]
    pub existing_count: u32,
    pub max_total_count: u32,
    /// 10³ € per circuit
    pub circuit_capital_cost: f64,
}

impl Corridor {
    pub fn candidate_count(&self) -> u32 {
        self.max_total_count - self.existing_count
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.from_bus, self.to_bus)
    }
}

/// One weighted day; vectors are aligned with the case's demands and wind units.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentativeDay {
    /// days per year
    pub weight: f64,
    /// `[demand][hour]` fraction of the nominal level
    pub demand_factor: Vec<Vec<f64>>,
    /// `[wind unit][hour]` capacity factor
    pub wind_cf: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicParams {
    pub amortization_rate: f64,
    /// 10³ €
    pub investment_budget: f64,
    /// Objective units (M€)
    #[serde(default = "default_tolerance")]
    pub outer_tolerance: f64,
    #[serde(default = "default_tolerance")]
    pub inner_tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkParams {
    /// MVA base for reactances.
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    /// Bound on |bus angle| in radians.
    #[serde(default = "default_angle_limit")]
    pub angle_limit: f64,
}

fn default_base_mva() -> f64 {
    100.0
}

fn default_angle_limit() -> f64 {
    std::f64::consts::PI
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams { base_mva: default_base_mva(), angle_limit: default_angle_limit() }
    }
}

/// Full static description of a planning problem. Immutable once loaded.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanningCase {
    pub name: String,
    pub network: NetworkParams,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub storage_units: Vec<StorageUnit>,
    pub demands: Vec<Demand>,
    pub corridors: Vec<Corridor>,
    pub representative_days: Vec<RepresentativeDay>,
    pub economics: EconomicParams,
    pub uncertainty: UncertaintySpec,
}

impl PlanningCase {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    /// Zero-based index of a 1-based bus id.
    pub fn bus_index(&self, bus: usize) -> usize {
        bus - 1
    }

    pub fn reference_bus(&self) -> usize {
        self.buses.iter().find(|b| b.is_reference).map(|b| b.id).unwrap_or(1)
    }

    pub fn hours_per_day(&self) -> usize {
        self.representative_days.first().map_or(0, |d| d.demand_factor.first().map_or_else(
            || d.wind_cf.first().map_or(0, |w| w.len()),
            |f| f.len(),
        ))
    }

    /// Indices into `generators` of conventional units, in case order.
    pub fn conventional_units(&self) -> Vec<usize> {
        self.generators.iter().enumerate().filter(|(_, g)| !g.is_wind()).map(|(i, _)| i).collect()
    }

    /// Indices into `generators` of wind units, in case order.
    pub fn wind_units(&self) -> Vec<usize> {
        self.generators.iter().enumerate().filter(|(_, g)| g.is_wind()).map(|(i, _)| i).collect()
    }

    pub fn corridor_index(&self, from: usize, to: usize) -> Option<usize> {
        let (a, b) = if from <= to { (from, to) } else { (to, from) };
        self.corridors.iter().position(|c| c.from_bus == a && c.to_bus == b)
    }

    pub fn candidate_storage_at(&self, bus: usize) -> Option<usize> {
        self.storage_units.iter().position(|s| s.is_candidate() && s.bus == bus)
    }

    pub fn max_shed_cost(&self) -> f64 {
        self.demands.iter().map(|d| d.shed_cost).fold(0.0, f64::max)
    }

    pub fn total_weight(&self) -> f64 {
        self.representative_days.iter().map(|d| d.weight).sum()
    }

    /// Copy keeping only the given days and hours; weights are rescaled to a full year.
    pub fn reduced(&self, days: &[usize], hours: &[usize]) -> Result<PlanningCase, CaseError> {
        if days.is_empty() || hours.is_empty() {
            return invalid("reduction needs at least one day and one hour");
        }
        let h = self.hours_per_day();
        if let Some(&d) = days.iter().find(|&&d| d >= self.representative_days.len()) {
            return invalid(format!("day index {d} out of range"));
        }
        if let Some(&t) = hours.iter().find(|&&t| t >= h) {
            return invalid(format!("hour index {t} out of range"));
        }
        let kept: f64 = days.iter().map(|&d| self.representative_days[d].weight).sum();
        let pick = |rows: &Vec<Vec<f64>>| rows.iter().map(|r| hours.iter().map(|&t| r[t]).collect()).collect();
        let mut out = self.clone();
        out.representative_days = days
            .iter()
            .map(|&d| {
                let src = &self.representative_days[d];
                RepresentativeDay {
                    weight: src.weight * DAYS_PER_YEAR / kept,
                    demand_factor: pick(&src.demand_factor),
                    wind_cf: pick(&src.wind_cf),
                }
            })
            .collect();
        fix_weight_sum(&mut out.representative_days);
        out.validate()?;
        Ok(out)
    }

    pub fn with_budgets(&self, gamma_demand: usize, gamma_conventional: usize, gamma_wind: usize) -> Result<PlanningCase, CaseError> {
        let mut out = self.clone();
        out.uncertainty.gamma_demand = gamma_demand;
        out.uncertainty.gamma_conventional = gamma_conventional;
        out.uncertainty.gamma_wind = gamma_wind;
        out.validate()?;
        Ok(out)
    }

    /// Checks every structural invariant of the case.
    pub fn validate(&self) -> Result<(), CaseError> {
        for (i, b) in self.buses.iter().enumerate() {
            if b.id != i + 1 {
                return invalid(format!("bus ids must be dense 1..N in order; found {} at position {}", b.id, i + 1));
            }
        }
        let refs = self.buses.iter().filter(|b| b.is_reference).count();
        if refs != 1 {
            return invalid(format!("exactly one reference bus required, found {refs}"));
        }
        let n = self.buses.len();
        let bus_ok = |bus: usize| bus >= 1 && bus <= n;
        let mut ids = HashSet::new();
        for g in &self.generators {
            if !ids.insert(g.id.as_str()) {
                return invalid(format!("duplicate id `{}`", g.id));
            }
            if !bus_ok(g.bus) {
                return invalid(format!("generator `{}` references unknown bus {}", g.id, g.bus));
            }
            if !(g.nominal_capacity >= 0.0) || !(g.operating_cost >= 0.0) {
                return invalid(format!("generator `{}` has negative capacity or cost", g.id));
            }
            match (g.technology, &g.profile) {
                (Technology::Wind, None) => return invalid(format!("wind unit `{}` has no profile", g.id)),
                (Technology::Conventional, Some(_)) => {
                    return invalid(format!("conventional unit `{}` must not have a profile", g.id))
                }
                _ => {}
            }
        }
        for s in &self.storage_units {
            if !ids.insert(s.id.as_str()) {
                return invalid(format!("duplicate id `{}`", s.id));
            }
            if !bus_ok(s.bus) {
                return invalid(format!("storage `{}` references unknown bus {}", s.id, s.bus));
            }
            if !(s.max_energy >= 0.0) || !(s.initial_energy >= 0.0) || s.initial_energy > s.max_energy {
                return invalid(format!("storage `{}` needs 0 <= initial_energy <= max_energy", s.id));
            }
            if !(s.charge_cap >= 0.0) || !(s.discharge_cap >= 0.0) {
                return invalid(format!("storage `{}` has negative power capacity", s.id));
            }
            for eff in [s.charge_eff, s.discharge_eff] {
                if !(eff > 0.0 && eff <= 1.0) {
                    return invalid(format!("storage `{}` efficiency {eff} outside (0, 1]", s.id));
                }
            }
            if s.is_candidate() {
                if s.max_buildable < 1 {
                    return invalid(format!("candidate storage `{}` needs max_buildable >= 1", s.id));
                }
                if !(s.unit_capital_cost >= 0.0) {
                    return invalid(format!("candidate storage `{}` has negative capital cost", s.id));
                }
            }
        }
        let max_gen_cost = self.generators.iter().map(|g| g.operating_cost).fold(0.0, f64::max);
        for d in &self.demands {
            if !ids.insert(d.id.as_str()) {
                return invalid(format!("duplicate id `{}`", d.id));
            }
            if !bus_ok(d.bus) {
                return invalid(format!("demand `{}` references unknown bus {}", d.id, d.bus));
            }
            if !(d.nominal_level >= 0.0) || !(d.shed_cost >= 0.0) {
                return invalid(format!("demand `{}` has negative level or shedding cost", d.id));
            }
            if d.shed_cost <= max_gen_cost {
                log::warn!("demand `{}`: shedding cost {} does not exceed the highest operating cost {}", d.id, d.shed_cost, max_gen_cost);
            }
        }
        let mut seen = HashSet::new();
        for c in &self.corridors {
            if c.from_bus >= c.to_bus {
                return invalid(format!("corridor {} must have from_bus < to_bus", c.label()));
            }
            if !bus_ok(c.from_bus) || !bus_ok(c.to_bus) {
                return invalid(format!("corridor {} references unknown bus", c.label()));
            }
            if !seen.insert((c.from_bus, c.to_bus)) {
                return invalid(format!("duplicate corridor {}", c.label()));
            }
            if c.existing_count > c.max_total_count {
                return invalid(format!("corridor {}: existing_count exceeds max_total_count", c.label()));
            }
            if !(c.reactance > 0.0) || !(c.capacity >= 0.0) || !(c.circuit_capital_cost >= 0.0) {
                return invalid(format!("corridor {} needs reactance > 0 and non-negative capacity/cost", c.label()));
            }
        }
        if self.representative_days.is_empty() {
            return invalid("at least one representative day is required");
        }
        let hours = self.hours_per_day();
        if hours == 0 {
            return invalid("representative days must contain at least one hour");
        }
        let nwind = self.wind_units().len();
        for (k, day) in self.representative_days.iter().enumerate() {
            if !(day.weight > 0.0) {
                return invalid(format!("representative day {k} has non-positive weight"));
            }
            if day.demand_factor.len() != self.demands.len() || day.wind_cf.len() != nwind {
                return invalid(format!("representative day {k} has mismatched profile count"));
            }
            for row in day.demand_factor.iter().chain(&day.wind_cf) {
                if row.len() != hours {
                    return invalid(format!("representative day {k} has a profile with {} hours, expected {hours}", row.len()));
                }
                if row.iter().any(|v| !(*v >= 0.0)) {
                    return invalid(format!("representative day {k} has a negative factor"));
                }
            }
            if day.wind_cf.iter().flatten().any(|&v| v > 1.0) {
                return invalid(format!("representative day {k} has a wind capacity factor above 1"));
            }
        }
        let total = self.total_weight();
        if (total - DAYS_PER_YEAR).abs() > WEIGHT_TOLERANCE {
            return invalid(format!("representative-day weights sum to {total}, expected {DAYS_PER_YEAR}"));
        }
        let e = &self.economics;
        if !(e.amortization_rate > 0.0 && e.amortization_rate <= 1.0) {
            return invalid("amortization_rate must be in (0, 1]");
        }
        if !(e.investment_budget >= 0.0) {
            return invalid("investment_budget must be non-negative");
        }
        if !(e.outer_tolerance > 0.0) || !(e.inner_tolerance > 0.0) {
            return invalid("tolerances must be positive");
        }
        if !(self.network.base_mva > 0.0) || !(self.network.angle_limit > 0.0) {
            return invalid("base_mva and angle_limit must be positive");
        }
        self.uncertainty.validate_for(self)?;
        Ok(())
    }
}

/// Absorbs the rounding residue of rescaled weights into the last day.
pub(crate) fn fix_weight_sum(days: &mut [RepresentativeDay]) {
    let total: f64 = days.iter().map(|d| d.weight).sum();
    if let Some(last) = days.last_mut() {
        last.weight += DAYS_PER_YEAR - total;
    }
}

// ---------------------------------------------------------------------------
// Case file schema

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default)]
    name: String,
    #[serde(default)]
    network: NetworkParams,
    buses: Vec<Bus>,
    #[serde(default)]
    generators: Vec<Generator>,
    #[serde(default)]
    corridors: Vec<Corridor>,
    #[serde(default)]
    storage: Vec<StorageUnit>,
    #[serde(default)]
    demands: Vec<Demand>,
    representative_days: DaysSection,
    economics: EconomicParams,
    #[serde(default)]
    uncertainty: UncertaintySpec,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DaysSection {
    /// Path to an hourly CSV, relative to the case file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    /// Weights for the CSV days, in order of first appearance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    days: Vec<InlineDay>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineDay {
    weight: f64,
    #[serde(default)]
    demand_factor: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    wind_cf: BTreeMap<String, Vec<f64>>,
}

/// Hourly table read from CSV: one entry per day, `[column][hour]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HourlyTable {
    pub columns: Vec<String>,
    pub day_labels: Vec<String>,
    pub days: Vec<Vec<Vec<f64>>>,
}

impl HourlyTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Parses the `day,hour,<columns...>` format. Rows of one day may appear in any
/// hour order but every day must carry the same number of hours.
pub fn parse_hourly_csv(text: &str) -> Result<HourlyTable, CaseError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CaseError::Parse(format!("hourly csv: {e}")))?.clone();
    if headers.len() < 2 || &headers[0] != "day" || &headers[1] != "hour" {
        return Err(CaseError::Parse("hourly csv must start with columns `day,hour`".into()));
    }
    let columns: Vec<String> = headers.iter().skip(2).map(str::to_owned).collect();
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, Vec<(f64, Vec<f64>)>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CaseError::Parse(format!("hourly csv: {e}")))?;
        let num = |i: usize| -> Result<f64, CaseError> {
            rec.get(i)
                .ok_or_else(|| CaseError::Parse(format!("hourly csv row {}: missing field", line + 2)))?
                .parse::<f64>()
                .map_err(|e| CaseError::Parse(format!("hourly csv row {}: {e}", line + 2)))
        };
        let day = rec[0].to_string();
        let hour = num(1)?;
        let vals = (2..headers.len()).map(num).collect::<Result<Vec<_>, _>>()?;
        if !rows.contains_key(&day) {
            order.push(day.clone());
        }
        rows.entry(day).or_default().push((hour, vals));
    }
    if order.is_empty() {
        return Err(CaseError::Parse("hourly csv has no data rows".into()));
    }
    let mut days = Vec::with_capacity(order.len());
    let mut hours = None;
    for label in &order {
        let mut r = rows.remove(label).unwrap_or_default();
        r.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(h) = hours {
            if r.len() != h {
                return Err(CaseError::Parse(format!("hourly csv: day {label} has {} hours, expected {h}", r.len())));
            }
        }
        hours = Some(r.len());
        let mut day = vec![Vec::with_capacity(r.len()); columns.len()];
        for (_, vals) in r {
            for (c, v) in vals.into_iter().enumerate() {
                day[c].push(v);
            }
        }
        days.push(day);
    }
    Ok(HourlyTable { columns, day_labels: order, days })
}

pub fn write_hourly_csv(table: &HourlyTable) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["day".to_string(), "hour".to_string()];
    header.extend(table.columns.iter().cloned());
    wtr.write_record(&header).expect("in-memory write");
    for (label, day) in table.day_labels.iter().zip(&table.days) {
        let hours = day.first().map_or(0, Vec::len);
        for t in 0..hours {
            let mut rec = vec![label.clone(), (t + 1).to_string()];
            rec.extend(day.iter().map(|col| col[t].to_string()));
            wtr.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Parses and validates a case document. `resolve` loads files referenced by the
/// document (the hourly CSV).
pub fn load_case_with(
    document: &str,
    resolve: &dyn Fn(&str) -> Result<String, CaseError>,
) -> Result<PlanningCase, CaseError> {
    let file: CaseFile = toml::from_str(document).map_err(|e| CaseError::Parse(e.to_string()))?;
    let mut generators = file.generators;
    for g in &mut generators {
        if g.is_wind() && g.profile.is_none() {
            g.profile = Some(g.id.clone());
        }
    }
    let mut case = PlanningCase {
        name: file.name,
        network: file.network,
        buses: file.buses,
        generators,
        storage_units: file.storage,
        demands: file.demands,
        corridors: file.corridors,
        representative_days: Vec::new(),
        economics: file.economics,
        uncertainty: file.uncertainty,
    };
    case.representative_days = match (&file.representative_days.csv, file.representative_days.days.is_empty()) {
        (Some(path), true) => {
            let table = parse_hourly_csv(&resolve(path)?)?;
            let weights = file
                .representative_days
                .weights
                .clone()
                .ok_or_else(|| CaseError::Parse("representative_days.csv requires `weights`".into()))?;
            if weights.len() != table.days.len() {
                return invalid(format!("{} weights given for {} csv days", weights.len(), table.days.len()));
            }
            days_from_table(&case, &table, &weights)?
        }
        (None, false) => {
            if file.representative_days.weights.is_some() {
                return Err(CaseError::Parse("`weights` only applies to csv days".into()));
            }
            file.representative_days
                .days
                .iter()
                .map(|d| inline_day(&case, d))
                .collect::<Result<_, _>>()?
        }
        (Some(_), false) => return Err(CaseError::Parse("give representative days inline or as csv, not both".into())),
        (None, true) => return invalid("at least one representative day is required"),
    };
    case.validate()?;
    Ok(case)
}

/// Loads a case document; relative CSV paths resolve against `base_dir`.
pub fn load_case(document: &str, base_dir: Option<&Path>) -> Result<PlanningCase, CaseError> {
    let base = base_dir.map(Path::to_path_buf);
    load_case_with(document, &move |rel| {
        let p = match &base {
            Some(b) => b.join(rel),
            None => Path::new(rel).to_path_buf(),
        };
        std::fs::read_to_string(&p).map_err(|source| CaseError::Io { path: p.display().to_string(), source })
    })
}

pub fn load_case_file(path: &Path) -> Result<PlanningCase, CaseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CaseError::Io { path: path.display().to_string(), source })?;
    load_case(&text, path.parent())
}

fn wind_profile_names(case: &PlanningCase) -> Vec<String> {
    case.wind_units()
        .into_iter()
        .map(|g| case.generators[g].profile.clone().unwrap_or_else(|| case.generators[g].id.clone()))
        .collect()
}

/// Builds representative days from a table whose columns carry the case's profile names.
pub fn days_from_table(case: &PlanningCase, table: &HourlyTable, weights: &[f64]) -> Result<Vec<RepresentativeDay>, CaseError> {
    let demand_cols = case
        .demands
        .iter()
        .map(|d| {
            table.column(d.profile_name()).ok_or_else(|| {
                CaseError::Validation(format!("hourly data has no column `{}` for demand `{}`", d.profile_name(), d.id))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let wind_cols = wind_profile_names(case)
        .iter()
        .map(|p| table.column(p).ok_or_else(|| CaseError::Validation(format!("hourly data has no column `{p}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(table
        .days
        .iter()
        .zip(weights)
        .map(|(day, &weight)| RepresentativeDay {
            weight,
            demand_factor: demand_cols.iter().map(|&c| day[c].clone()).collect(),
            wind_cf: wind_cols.iter().map(|&c| day[c].clone()).collect(),
        })
        .collect())
}

fn inline_day(case: &PlanningCase, d: &InlineDay) -> Result<RepresentativeDay, CaseError> {
    let known: HashSet<&str> = case
        .demands
        .iter()
        .map(|x| x.profile_name())
        .chain(case.generators.iter().filter_map(|g| g.profile.as_deref()))
        .collect();
    if let Some(k) = d.demand_factor.keys().chain(d.wind_cf.keys()).find(|k| !known.contains(k.as_str())) {
        return invalid(format!("representative day references unknown profile `{k}`"));
    }
    let demand_factor = case
        .demands
        .iter()
        .map(|dem| {
            d.demand_factor
                .get(dem.profile_name())
                .cloned()
                .ok_or_else(|| CaseError::Validation(format!("representative day lacks profile `{}`", dem.profile_name())))
        })
        .collect::<Result<_, _>>()?;
    let wind_cf = wind_profile_names(case)
        .iter()
        .map(|p| d.wind_cf.get(p).cloned().ok_or_else(|| CaseError::Validation(format!("representative day lacks profile `{p}`"))))
        .collect::<Result<_, _>>()?;
    Ok(RepresentativeDay { weight: d.weight, demand_factor, wind_cf })
}

/// Serializes a case with inline representative days.
pub fn case_to_toml(case: &PlanningCase) -> String {
    let wind_names = wind_profile_names(case);
    let days = case
        .representative_days
        .iter()
        .map(|d| InlineDay {
            weight: d.weight,
            demand_factor: case.demands.iter().map(|x| x.profile_name().to_owned()).zip(d.demand_factor.iter().cloned()).collect(),
            wind_cf: wind_names.iter().cloned().zip(d.wind_cf.iter().cloned()).collect(),
        })
        .collect();
    let file = CaseFile {
        name: case.name.clone(),
        network: case.network.clone(),
        buses: case.buses.clone(),
        generators: case.generators.clone(),
        corridors: case.corridors.clone(),
        storage: case.storage_units.clone(),
        demands: case.demands.clone(),
        representative_days: DaysSection { days, ..Default::default() },
        economics: case.economics.clone(),
        uncertainty: case.uncertainty.clone(),
    };
    toml::to_string(&file).expect("case serializes")
}
