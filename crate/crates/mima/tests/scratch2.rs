use mima::config::RunConfig;

#[test]
#[ignore]
fn debug_picard_command() {
    let d = tempfile::tempdir().unwrap();
    let text = format!(
        r#"
[grid]
l = 1.0
nx = 16
ny = 16
nz = 8

[model]
u0 = 1.0

[time]
dt = 2e-3
t_end = 0.02

[initial]
kind = "random_bandlimited"
amplitude = 0.3
cutoff = 3
seed = 7

[picard]
max_iters = 10
tol = 1e-10

[output]
directory = "{}"
"#,
        d.path().display()
    );
    let cfg = RunConfig::parse(&text).unwrap();
    let out = mima::commands::picard(&cfg).unwrap();
    println!(
        "converged {} iters {} residuals {:?} dist {:.3e}",
        out.report.converged, out.report.iterations, out.report.residuals, out.distance_to_nonlinear
    );
}
