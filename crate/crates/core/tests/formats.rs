use std::fs;

use media_egt::abm::{run_abm, AbmConfig};
use media_egt::io::{self, read_sweep_csv, read_time_series_csv};
use media_egt::render::{heatmap_svg, timeseries_svg, ColorScale};
use media_egt::replicator::{basin_census, integrate, IntegratorConfig};
use media_egt::{CreatorStrategy, GameParams, PopulationState, UserStrategy};

#[test]
fn extreme_cells_get_extreme_colours() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    fs::write(
        &csv,
        "x_param,x_value,y_param,y_value,eta_mean,eta_std,n_replicates,valid\n\
         c_i,0,c_c,0,1,0,1,true\n\
         c_i,0,c_c,1,0,0,1,true\n\
         c_i,1,c_c,0,0,0,1,true\n\
         c_i,1,c_c,1,1,0,1,true\n",
    )
    .unwrap();
    let svg = heatmap_svg(&read_sweep_csv(&csv).unwrap(), ColorScale::Grayscale).unwrap();
    let cells: Vec<&str> = svg.lines().filter(|l| l.contains(r#"class="cell""#)).collect();
    assert_eq!(cells.len(), 4);
    assert_eq!(cells.iter().filter(|l| l.contains(r##"fill="#ffffff""##)).count(), 2);
    assert_eq!(cells.iter().filter(|l| l.contains(r##"fill="#000000""##)).count(), 2);
}

#[test]
fn empty_and_ragged_sweeps_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    fs::write(&csv, "x_param,x_value,y_param,y_value,eta_mean,eta_std,n_replicates,valid\n").unwrap();
    assert!(heatmap_svg(&read_sweep_csv(&csv).unwrap(), ColorScale::Viridis).is_err());
    fs::write(&csv, "").unwrap();
    assert!(read_sweep_csv(&csv).is_err());
    fs::write(
        &csv,
        "x_param,x_value,y_param,y_value,eta_mean,eta_std,n_replicates,valid\nc_i,0,c_c,0,1,0,1\n",
    )
    .unwrap();
    assert!(read_sweep_csv(&csv).is_err());
}

#[test]
fn corner_trajectory_renders_flat_lines() {
    let dir = tempfile::tempdir().unwrap();
    let s0 = PopulationState::corner(UserStrategy::AllC, CreatorStrategy::Safe);
    let cfg = IntegratorConfig {
        horizon: 10.0,
        record_stride: 10,
        ..IntegratorConfig::default()
    };
    let t = integrate(&s0, &GameParams::default(), &cfg).unwrap();
    let csv = dir.path().join("t.csv");
    io::write_trajectory_csv(&csv, &t).unwrap();
    let svg = timeseries_svg(&read_time_series_csv(&csv).unwrap()).unwrap();
    for line in svg.lines().filter(|l| l.contains("<polyline")) {
        let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = points.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]), "{line}");
    }
}

#[test]
fn rendering_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = AbmConfig {
        generations: 30,
        ..AbmConfig::default()
    };
    let ts = run_abm(&GameParams::default(), &cfg, None).unwrap();
    let csv = dir.path().join("a.csv");
    io::write_abm_csv(&csv, &ts).unwrap();
    let a = timeseries_svg(&read_time_series_csv(&csv).unwrap()).unwrap();
    let b = timeseries_svg(&read_time_series_csv(&csv).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("<?xml"));
    assert!(a.contains(r#"version="1.1""#));
}

#[test]
fn census_files_cover_every_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = IntegratorConfig {
        step_size: 0.1,
        horizon: 200.0,
        ..IntegratorConfig::default()
    };
    let census = basin_census(&GameParams::default(), 0.5, &cfg).unwrap();
    let csv = dir.path().join("c.csv");
    io::write_census_csv(&csv, &census).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("state_id,x1,x2,x3,x4,y,outcome,eta_avg\n"));
    assert_eq!(text.lines().count(), 31);
    let summary = io::census_summary_json(&census);
    assert!(summary.contains("\"total_states\": 30"));
}
