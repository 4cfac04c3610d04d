use smppi::benchmarks::{
    chattering_index, run_campaign, run_comparison, run_episode, write_campaign_csv, write_trace_csv, BenchmarkError,
    EpisodeMetrics, ExperimentConfig, Scenario, TaskKind,
};
use smppi::controllers::ControllerKind;

const PENDULUM: &str = r#"
seeds = [0, 1]

[scenario]
task = "pendulum"
controller = "smppi"
episode_length = 3.0
initial_state = [3.141592653589793, 0.0]

[solver]
samples = 64
horizon = 20
dt = 0.05
temperature = 1.0
noise_covariance = [1.0]
action_min = [-3.0]
action_max = [3.0]

[smppi]
samples = 64
horizon = 20
dt = 0.05
temperature = 0.3
noise_covariance = [25.0]
action_min = [-3.0]
action_max = [3.0]
derivative_min = [-15.0]
derivative_max = [15.0]
action_cost_weight = [1.0]
"#;

const VEHICLE: &str = r#"
[scenario]
task = "vehicle"
controller = "mppi"
episode_length = 3.0
reference_speed_kmh = 40.0

[solver]
samples = 64
horizon = 20
dt = 0.05
temperature = 1.0
noise_covariance = [0.01, 0.09]
action_min = [-0.5, -1.0]
action_max = [0.5, 1.0]
"#;

fn pendulum() -> Scenario {
    ExperimentConfig::from_toml_str(PENDULUM).unwrap().scenario().unwrap()
}

#[test]
fn upright_start_stays_balanced() {
    let trace = run_episode(&pendulum(), 0).unwrap();
    assert_eq!(trace.steps.len(), 60);
    for s in &trace.steps {
        let e = smppi::types::wrap_angle(s.state[0] - std::f64::consts::PI);
        assert!(e.abs() < 0.1, "t = {}: angle error {e}", s.t);
    }
    assert!(trace.success());
}

#[test]
fn same_seed_same_trace() {
    let sc = pendulum();
    assert_eq!(run_episode(&sc, 3).unwrap(), run_episode(&sc, 3).unwrap());
    assert_ne!(run_episode(&sc, 3).unwrap(), run_episode(&sc, 4).unwrap());
}

#[test]
fn uniform_time_grid() {
    let trace = run_episode(&pendulum(), 1).unwrap();
    for (i, s) in trace.steps.iter().enumerate() {
        assert_eq!(s.t, i as f64 * 0.05);
    }
}

#[test]
fn zero_length_is_rejected() {
    let text = PENDULUM.replace("episode_length = 3.0", "episode_length = 0.0");
    assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(BenchmarkError::Config(_))));
    let sc = Scenario { episode_length: 0.0, ..pendulum() };
    assert!(run_episode(&sc, 0).is_err());
}

#[test]
fn unknown_keys_and_mismatches_are_errors() {
    let text = PENDULUM.replace("[scenario]", "[scenario]\nspeed = 3");
    assert!(ExperimentConfig::from_toml_str(&text).is_err());
    let text = PENDULUM.replace("controller = \"smppi\"", "controller = \"mppi-xx\"");
    assert!(ExperimentConfig::from_toml_str(&text).is_err());
    let text = PENDULUM.replace("initial_state = [3.141592653589793, 0.0]", "initial_state = [0.0]");
    assert!(ExperimentConfig::from_toml_str(&text).is_err());
    // Controller smppi without an [smppi] section.
    let text = VEHICLE.replace("controller = \"mppi\"", "controller = \"smppi\"");
    assert!(ExperimentConfig::from_toml_str(&text).is_err());
}

#[test]
fn missing_checkpoint_is_reported_on_resolution() {
    let text = format!("{PENDULUM}\n[model]\nkind = \"checkpoint\"\npath = \"/nonexistent/model.json\"\n");
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    assert!(cfg.scenario().is_err());
}

#[test]
fn collect_requires_plant_section() {
    let text = format!(
        "{PENDULUM}\n[collect]\nsteps = 10\nepisode_steps = 5\nseed = 1\nou_rate = 1.0\nou_sigma = [1.0]\ninitial_min = [-1.0, -1.0]\ninitial_max = [1.0, 1.0]\n"
    );
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    assert!(matches!(cfg.collect(), Err(BenchmarkError::Config(_))));
    let with_plant = format!("{text}\n[plant]\nkind = \"pendulum\"\n");
    let data = ExperimentConfig::from_toml_str(&with_plant).unwrap().collect().unwrap();
    assert_eq!(data.len(), 10);
}

#[test]
fn single_seed_campaign_summary_is_that_episode() {
    let sc = pendulum();
    let c = run_campaign(&sc, &[5], 1).unwrap();
    let m = EpisodeMetrics::from_trace(&run_episode(&sc, 5).unwrap());
    let s = c.summary();
    assert_eq!(c.metrics, vec![m.clone()]);
    assert_eq!(s.chattering.median, m.chattering);
    assert_eq!(s.total_cost.median, m.total_cost);
    assert_eq!(s.chattering.iqr, 0.0);
    assert_eq!(s.success_rate, if m.success { 1.0 } else { 0.0 });
}

#[test]
fn constant_actions_have_zero_chattering() {
    let actions = vec![vec![1.5]; 30];
    assert_eq!(chattering_index(&actions).1, 0.0);
}

#[test]
fn controllers_share_plant_and_noise() {
    let sc = ExperimentConfig::from_toml_str(VEHICLE).unwrap().scenario().unwrap();
    let runs = run_comparison(&sc, &[ControllerKind::Mppi, ControllerKind::MppiSg], &[2], 1).unwrap();
    let (a, b) = (&runs[0].traces[0], &runs[1].traces[0]);
    assert_eq!(a.steps[0].state, b.steps[0].state);
    assert_eq!(a.task, TaskKind::Vehicle);
    assert!(a.steps.iter().all(|s| s.lateral.is_some() && s.friction.is_some_and(|m| [1.0, 0.95, 0.9, 0.85, 0.8, 0.75].contains(&m))));
    assert!(a.steps.last().unwrap().progress.unwrap() > 25.0);
    assert!(run_comparison(&sc, &[], &[0], 1).is_err());
}

#[test]
fn exports_have_expected_shape() {
    let sc = ExperimentConfig::from_toml_str(VEHICLE).unwrap().scenario().unwrap();
    let c = run_campaign(&sc, &[0, 1], 1).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&c.traces[0], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x0,x1,x2,x3,x4,x5,a0,a1,cost,min_cost,ess,degenerate,lateral,progress,friction"
    );
    assert_eq!(lines.count(), c.traces[0].steps.len());
    let mut buf = Vec::new();
    write_campaign_csv(&[c], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    // Header, two episodes, median and iqr rows.
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(3).unwrap().starts_with("mppi,median,"));
}
