use platelab_cli::error::CliError;
use platelab_cli::scenario::{Experiment, Overrides, Scenario};

fn parse(text: &str) -> Result<Scenario, CliError> {
    Scenario::from_str_with(text, &Overrides::default())
}

fn parse_with(text: &str, set: &[&str]) -> Result<Scenario, CliError> {
    Scenario::from_str_with(text, &Overrides { set: set.iter().map(|s| s.to_string()).collect(), ..Default::default() })
}

const Y2: &str = "[experiment.doubling]\nfield = \"y^2\"\nexpected = 64.0\n";

#[test]
fn defaults_fill_grid_and_output() {
    let s = parse(Y2).unwrap();
    assert_eq!(s.grid.x, [-1.0, 1.0]);
    assert_eq!(s.grid.h, 1.0 / 64.0);
    assert_eq!(s.out.to_str(), Some("platelab-out"));
    assert!(matches!(s.experiment().unwrap(), Experiment::Doubling(p) if p.c_art == platelab_core::doubling::DEFAULT_C_ART));
}

#[test]
fn partial_grid_table_keeps_other_defaults() {
    let s = parse(&format!("[grid]\nh = 0.125\n{Y2}")).unwrap();
    assert_eq!((s.grid.h, s.grid.y), (0.125, [0.0, 1.0]));
}

#[test]
fn zero_or_two_blocks_are_rejected() {
    let e = parse("seed = 1\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let e = parse(&format!("{Y2}[experiment.conformal]\n")).unwrap_err();
    assert!(e.to_string().contains("doubling") && e.to_string().contains("conformal"), "{e}");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn unknown_key_reports_its_path() {
    let e = parse("[experiment.doubling]\nfield = \"y^2\"\nradius = 1.0\n").unwrap_err();
    assert!(e.to_string().contains("experiment.doubling"), "{e}");
    let e = parse("[experiment.doubling]\nfield = \"y^2\"\nr0 = \"wide\"\n").unwrap_err();
    assert!(e.to_string().contains("experiment.doubling.r0"), "{e}");
    let e = parse("seed = 3\n[grid]\nh = [1]\n[experiment.identities]\n").unwrap_err();
    assert!(e.to_string().contains("grid.h"), "{e}");
}

#[test]
fn random_families_require_a_seed() {
    let e = parse("[experiment.carleman]\n").unwrap_err();
    assert!(e.to_string().contains("seed"), "{e}");
    let s = Scenario::from_str_with("[experiment.carleman]\n", &Overrides { seed: Some(7), ..Default::default() }).unwrap();
    assert_eq!(s.seed, Some(7));
}

#[test]
fn set_overrides_scalars_and_creates_tables() {
    let s = parse_with(Y2, &["experiment.doubling.r0=0.5", "grid.h=0.25", "out=elsewhere"]).unwrap();
    let Experiment::Doubling(p) = s.experiment().unwrap() else { panic!() };
    assert_eq!((p.r0, s.grid.h, s.out.to_str()), (0.5, 0.25, Some("elsewhere")));
    let s = parse_with("", &["experiment.doubling.field=y^3"]).unwrap();
    let Experiment::Doubling(p) = s.experiment().unwrap() else { panic!() };
    assert_eq!(p.field, "y^3");
    assert_eq!(parse_with(Y2, &["noequals"]).unwrap_err().exit_code(), 2);
    assert_eq!(parse_with(Y2, &["experiment.doubling.field.deep=1"]).unwrap_err().exit_code(), 2);
}

#[test]
fn material_expressions_are_checked_at_load() {
    let text = "[material]\nlambda = \"1 + \"\nmu = \"1\"\nthickness = 0.1\nalpha0 = 0.5\ngamma0 = 0.5\nlambda0 = 1\n[experiment.material-check]\n";
    let s = parse(text).unwrap();
    let e = s.lame(&s.grid.spec().unwrap()).unwrap_err();
    assert!(e.to_string().contains("material.lambda"), "{e}");
}
