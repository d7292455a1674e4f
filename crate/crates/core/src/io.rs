//! CSV, manifest and config-file formats.
//!
//! Every writer emits floats with Rust's shortest round-trip formatting, so
//! identical results always produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::abm::{AbmConfig, AbmTimeSeries};
use crate::equilibria::EquilibriumReport;
use crate::error::{Error, Result};
use crate::params::{GameParams, ParamName};
use crate::replicator::{BasinCensus, Trajectory};
use crate::sweep::{SweepCell, SweepResult};

pub const TRAJECTORY_HEADER: [&str; 7] =
    ["t", "x_alld", "x_bmedia", "x_gmedia", "x_allc", "y", "eta"];

pub const ABM_HEADER: [&str; 8] = [
    "generation",
    "n_alld",
    "n_bmedia",
    "n_gmedia",
    "n_allc",
    "n_unsafe",
    "n_safe",
    "eta",
];

pub const CENSUS_HEADER: [&str; 8] = ["state_id", "x1", "x2", "x3", "x4", "y", "outcome", "eta_avg"];

pub const SWEEP_HEADER: [&str; 8] = [
    "x_param",
    "x_value",
    "y_param",
    "y_value",
    "eta_mean",
    "eta_std",
    "n_replicates",
    "valid",
];

pub const EQUILIBRIA_HEADER: [&str; 12] = [
    "user_strategy",
    "creator_strategy",
    "eig_re_1",
    "eig_re_2",
    "eig_re_3",
    "eig_re_4",
    "eig_im_1",
    "eig_im_2",
    "eig_im_3",
    "eig_im_4",
    "classification",
    "closed_form_check",
];

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory_csv(path: &Path, t: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for ((time, s), eta) in t.times.iter().zip(&t.states).zip(&t.eta_series) {
        w.write_record([
            time.to_string(),
            s.x[0].to_string(),
            s.x[1].to_string(),
            s.x[2].to_string(),
            s.x[3].to_string(),
            s.y.to_string(),
            eta.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_abm_csv(path: &Path, ts: &AbmTimeSeries) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(ABM_HEADER)?;
    for r in &ts.records {
        let mut row = vec![r.generation.to_string()];
        row.extend(r.user_counts.iter().map(|c| c.to_string()));
        row.extend(r.creator_counts.iter().map(|c| c.to_string()));
        row.push(r.eta.to_string());
        w.write_record(row)?;
    }
    finish(w, path)
}

pub fn write_census_csv(path: &Path, c: &BasinCensus) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(CENSUS_HEADER)?;
    for e in &c.entries {
        let (outcome, eta) = match e.outcome {
            Some((kind, eta)) => (kind.as_str().to_string(), eta.to_string()),
            None => ("Failed".to_string(), "NaN".to_string()),
        };
        let mut row = vec![e.state_id.to_string()];
        row.extend(e.start.x.iter().map(|v| v.to_string()));
        row.push(e.start.y.to_string());
        row.push(outcome);
        row.push(eta);
        w.write_record(row)?;
    }
    finish(w, path)
}

/// Totals of a census as a small JSON object.
pub fn census_summary_json(c: &BasinCensus) -> String {
    format!(
        "{{\n  \"total_states\": {},\n  \"failed\": {},\n  \"grid_step\": {},\n  \"defection_fraction\": {},\n  \"mean_eta\": {}\n}}\n",
        c.total_states, c.failed, c.grid_step, c.defection_fraction, c.mean_eta
    )
}

pub fn write_sweep_csv(path: &Path, r: &SweepResult) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(SWEEP_HEADER)?;
    for c in &r.cells {
        w.write_record([
            r.x_param.as_str().to_string(),
            c.x_value.to_string(),
            r.y_param.as_str().to_string(),
            c.y_value.to_string(),
            c.eta_mean.to_string(),
            c.eta_std.to_string(),
            c.n_replicates.to_string(),
            c.valid.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_equilibria_csv(path: &Path, reports: &[EquilibriumReport]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(EQUILIBRIA_HEADER)?;
    for r in reports {
        let mut row = vec![r.user.name().to_string(), r.creator.name().to_string()];
        row.extend(r.eigenvalues.iter().map(|l| l.re.to_string()));
        row.extend(r.eigenvalues.iter().map(|l| l.im.to_string()));
        row.push(r.classification.as_str().to_string());
        row.push(r.closed_form_check.map_or("NA".to_string(), |b| b.to_string()));
        w.write_record(row)?;
    }
    finish(w, path)
}

/// Fixed-width table of the corner reports.
pub fn format_equilibria_table(reports: &[EquilibriumReport]) -> String {
    let mut out = format!(
        "{:<8} {:<8} {:>38}  {:<14} {}\n",
        "user", "creator", "eigenvalue real parts", "class", "closed-form"
    );
    for r in reports {
        let re: Vec<String> = r.eigenvalues.iter().map(|l| format!("{:+.4}", l.re)).collect();
        let check = match r.closed_form_check {
            Some(true) => "agrees",
            Some(false) => "DISAGREES",
            None => "-",
        };
        out.push_str(&format!(
            "{:<8} {:<8} {:>38}  {:<14} {}\n",
            r.user.name(),
            r.creator.name(),
            re.join(" "),
            r.classification.as_str(),
            check
        ));
    }
    out
}

/// A row of a sweep CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub x_param: String,
    pub y_param: String,
    pub cell: SweepCell,
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().from_reader(file))
}

fn parse_num<T: std::str::FromStr>(field: &str, what: &str, line: usize) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Malformed(format!("line {line}: bad {what} `{field}`")))
}

fn check_header(found: &csv::StringRecord, want: &[&str], path: &Path) -> Result<()> {
    if found.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(Error::Malformed(format!(
            "{}: header {:?}, expected {:?}",
            path.display(),
            found.iter().collect::<Vec<_>>(),
            want
        )));
    }
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = open_reader(path)?;
    check_header(r.headers()?, &SWEEP_HEADER, path)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != SWEEP_HEADER.len() {
            return Err(Error::Malformed(format!(
                "line {line}: {} fields, expected {}",
                rec.len(),
                SWEEP_HEADER.len()
            )));
        }
        let valid: bool = parse_num(&rec[7], "valid flag", line)?;
        rows.push(SweepRow {
            x_param: rec[0].to_string(),
            y_param: rec[2].to_string(),
            cell: SweepCell {
                x_value: parse_num(&rec[1], "x_value", line)?,
                y_value: parse_num(&rec[3], "y_value", line)?,
                eta_mean: parse_num(&rec[4], "eta_mean", line)?,
                eta_std: parse_num(&rec[5], "eta_std", line)?,
                n_replicates: parse_num(&rec[6], "n_replicates", line)?,
                valid,
            },
        });
    }
    Ok(rows)
}

/// Strategy frequencies over time, read from either time-series schema.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySeries {
    /// `t` or `generation`.
    pub time_label: &'static str,
    pub times: Vec<f64>,
    /// `[AllD, BMedia, GMedia, AllC]` per row.
    pub users: Vec<[f64; 4]>,
    /// `[Unsafe, Safe]` per row.
    pub creators: Vec<[f64; 2]>,
    pub eta: Vec<f64>,
}

/// Reads a trajectory CSV or an agent-based time-series CSV, converting
/// counts to frequencies.
pub fn read_time_series_csv(path: &Path) -> Result<FrequencySeries> {
    let mut r = open_reader(path)?;
    let header = r.headers()?.clone();
    let is_abm = header.iter().map(str::trim).eq(ABM_HEADER.iter().copied());
    if !is_abm {
        check_header(&header, &TRAJECTORY_HEADER, path)?;
    }
    let width = header.len();
    let mut out = FrequencySeries {
        time_label: if is_abm { "generation" } else { "t" },
        times: Vec::new(),
        users: Vec::new(),
        creators: Vec::new(),
        eta: Vec::new(),
    };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != width {
            return Err(Error::Malformed(format!(
                "line {line}: {} fields, expected {width}",
                rec.len()
            )));
        }
        let v: Vec<f64> = rec
            .iter()
            .map(|f| parse_num(f, "value", line))
            .collect::<Result<_>>()?;
        out.times.push(v[0]);
        if is_abm {
            let n_u = v[1] + v[2] + v[3] + v[4];
            let n_c = v[5] + v[6];
            if n_u <= 0.0 || n_c <= 0.0 {
                return Err(Error::Malformed(format!("line {line}: empty population")));
            }
            out.users.push([v[1] / n_u, v[2] / n_u, v[3] / n_u, v[4] / n_u]);
            out.creators.push([v[5] / n_c, v[6] / n_c]);
            out.eta.push(v[7]);
        } else {
            out.users.push([v[1], v[2], v[3], v[4]]);
            out.creators.push([1.0 - v[5], v[5]]);
            out.eta.push(v[6]);
        }
    }
    if out.times.is_empty() {
        return Err(Error::Malformed(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

/// Flat `key = value` file. Blank lines and `#` comments are ignored; `:` is
/// accepted in place of `=`.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            return Err(Error::Malformed(format!(
                "line {}: expected `key = value`, got `{raw}`",
                i + 1
            )));
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text)
}

/// Overrides fields of `base` with the parameter keys of a config map.
/// Unknown keys are rejected.
pub fn params_from_map(base: GameParams, map: &BTreeMap<String, String>) -> Result<GameParams> {
    let mut p = base;
    for (k, v) in map {
        let name: ParamName = k.parse()?;
        let value: f64 = v
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("`{k}` = `{v}` is not a number")))?;
        p.set(name, value);
    }
    Ok(p)
}

/// Everything needed to reproduce a command's outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub command_line: String,
    /// Fully resolved configuration, in insertion order.
    pub config: Vec<(String, String)>,
    pub artifacts: Vec<PathBuf>,
    pub version: String,
    pub duration: Duration,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, command_line: impl Into<String>) -> Self {
        RunManifest {
            command: command.into(),
            command_line: command_line.into(),
            config: Vec::new(),
            artifacts: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration: Duration::ZERO,
        }
    }

    /// Adds `key`, or replaces its value if already present.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let (key, value) = (key.into(), value.to_string());
        match self.config.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.config.push((key, value)),
        }
        self
    }

    pub fn params(&mut self, p: &GameParams) -> &mut Self {
        for (name, v) in p.entries() {
            self.set(name.as_str(), v);
        }
        self
    }

    pub fn integrator(&mut self, c: &crate::replicator::IntegratorConfig) -> &mut Self {
        self.set("step_size", c.step_size)
            .set("horizon", c.horizon)
            .set("record_stride", c.record_stride)
            .set("simplex_tolerance", c.simplex_tolerance)
            .set("convergence_epsilon", c.convergence_epsilon)
            .set("defection_tolerance", c.defection_tolerance)
            .set("form", c.form.as_str())
    }

    pub fn abm(&mut self, c: &AbmConfig) -> &mut Self {
        self.set("n_users", c.n_users)
            .set("n_creators", c.n_creators)
            .set("beta_u", c.beta_u)
            .set("beta_c", c.beta_c)
            .set("mu_u", c.mu_u)
            .set("mu_c", c.mu_c)
            .set("generations", c.generations)
            .set("burn_in_fraction", c.burn_in_fraction)
            .set("seed", c.seed)
            .set("replicates", c.replicates)
            .set("paired_updates", c.paired_updates)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command = {}\n", self.command));
        s.push_str(&format!("command_line = {}\n", self.command_line));
        s.push_str(&format!("version = {}\n", self.version));
        for (k, v) in &self.config {
            s.push_str(&format!("{k} = {v}\n"));
        }
        let files: Vec<String> = self
            .artifacts
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        s.push_str(&format!("artifacts = {}\n", files.join(",")));
        s.push_str(&format!("duration_seconds = {:.3}\n", self.duration.as_secs_f64()));
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::GenerationRecord;
    use crate::payoff::PopulationState;

    #[test]
    fn key_values() {
        let m = parse_key_values("# defaults\nq = 0.9\nc_i: 0.1  # cheap\n\n").unwrap();
        assert_eq!(m["q"], "0.9");
        assert_eq!(m["c_i"], "0.1");
        assert!(parse_key_values("q 0.9").is_err());

        let p = params_from_map(GameParams::default(), &m).unwrap();
        assert_eq!(p.q, 0.9);
        let mut bad = m.clone();
        bad.insert("beta".into(), "1".into());
        assert!(params_from_map(GameParams::default(), &bad).is_err());
        bad.remove("beta");
        bad.insert("q".into(), "high".into());
        assert!(params_from_map(GameParams::default(), &bad).is_err());
    }

    #[test]
    fn time_series_round_trip_both_schemas() {
        let dir = tempfile::tempdir().unwrap();
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![PopulationState::uniform(0.5), PopulationState::uniform(0.25)],
            eta_series: vec![0.5, 0.4],
            max_projection_correction: 0.0,
        };
        let path = dir.path().join("t.csv");
        write_trajectory_csv(&path, &traj).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,x_alld,x_bmedia,x_gmedia,x_allc,y,eta\n"));
        let s = read_time_series_csv(&path).unwrap();
        assert_eq!(s.creators[1], [0.75, 0.25]);
        assert_eq!(s.eta, vec![0.5, 0.4]);

        let ts = AbmTimeSeries {
            records: vec![GenerationRecord {
                generation: 0,
                user_counts: [1, 1, 1, 1],
                creator_counts: [1, 3],
                eta: 0.6,
            }],
        };
        let path = dir.path().join("a.csv");
        write_abm_csv(&path, &ts).unwrap();
        let s = read_time_series_csv(&path).unwrap();
        assert_eq!(s.time_label, "generation");
        assert_eq!(s.users[0], [0.25; 4]);
        assert_eq!(s.creators[0], [0.25, 0.75]);
    }

    #[test]
    fn malformed_time_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "t,x_alld,x_bmedia,x_gmedia,x_allc,y,eta\n0,1,0,0\n").unwrap();
        assert!(read_time_series_csv(&path).is_err());
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_time_series_csv(&path), Err(Error::Malformed(_))));
        fs::write(&path, "t,x_alld,x_bmedia,x_gmedia,x_allc,y,eta\n").unwrap();
        assert!(read_time_series_csv(&path).is_err());
        assert!(matches!(
            read_time_series_csv(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn manifest_text() {
        let mut m = RunManifest::new("equilibria", "media-egt equilibria --q 0.9");
        m.params(&GameParams::default()).set("seed", 0u64).set("seed", 7u64);
        m.artifacts.push("out/equilibria.csv".into());
        let kv = parse_key_values(&m.to_text()).unwrap();
        assert_eq!(kv["q"], "0.9");
        assert_eq!(kv["command"], "equilibria");
        assert_eq!(kv["seed"], "7");
        assert_eq!(m.to_text().matches("seed").count(), 1);
        assert_eq!(kv["artifacts"], "out/equilibria.csv");
    }
}
