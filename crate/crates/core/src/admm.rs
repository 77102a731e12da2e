//! Outer loop: alternating shape descent, closed-form nodal v-update, and
//! multiplier update, with remeshing and per-iteration history records.

use std::fmt::Write as _;

use crate::fem::integrate_domain_product;
use crate::geometry::{BoundaryPolyline, GeometryConstraints, Point2};
use crate::mesh::{remesh, transfer_field, triangulate_annulus, BoundaryLabel, Mesh};
use crate::metrics::{hausdorff, HistoryRecord, ReconstructionHistory};
use crate::problems::{solve_state, CauchyData};
use crate::shape::{sgd_inner_loop, LineSearchMode, LineSearchParams, Method, ShapeObjective};
use crate::{Error, Result, ScalarField};

/// A built-in parametric inclusion shape, as written in configs and on the
/// command line: `circle:cx,cy,r`, `ellipse:cx,cy,rx,ry`,
/// `peanut:cx,cy,r0,c`, `flower:cx,cy,r0,eps,m`. The center may be omitted
/// (`flower:0.5,0.25,5`), in which case the shape sits at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapeSpec {
    Circle { cx: f64, cy: f64, r: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Peanut { cx: f64, cy: f64, r0: f64, c: f64 },
    Flower { cx: f64, cy: f64, r0: f64, eps: f64, m: u32 },
}

impl ShapeSpec {
    pub fn parse(text: &str) -> Result<ShapeSpec> {
        let bad = |msg: &str| Error::Config(format!("bad shape spec '{text}': {msg}"));
        let (name, rest) = text
            .split_once(':')
            .ok_or_else(|| bad("expected name:params"))?;
        let params: Vec<f64> = rest
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(&format!("{e}")))?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(bad("non-finite parameter"));
        }
        let spec = match (name.trim(), params.as_slice()) {
            ("circle", &[r]) => ShapeSpec::Circle { cx: 0.0, cy: 0.0, r },
            ("circle", &[cx, cy, r]) => ShapeSpec::Circle { cx, cy, r },
            ("ellipse", &[rx, ry]) => ShapeSpec::Ellipse { cx: 0.0, cy: 0.0, rx, ry },
            ("ellipse", &[cx, cy, rx, ry]) => ShapeSpec::Ellipse { cx, cy, rx, ry },
            ("peanut", &[r0, c]) => ShapeSpec::Peanut { cx: 0.0, cy: 0.0, r0, c },
            ("peanut", &[cx, cy, r0, c]) => ShapeSpec::Peanut { cx, cy, r0, c },
            ("flower", &[r0, eps, m]) => ShapeSpec::Flower {
                cx: 0.0,
                cy: 0.0,
                r0,
                eps,
                m: check_mode(m, text)?,
            },
            ("flower", &[cx, cy, r0, eps, m]) => ShapeSpec::Flower {
                cx,
                cy,
                r0,
                eps,
                m: check_mode(m, text)?,
            },
            ("circle" | "ellipse" | "peanut" | "flower", _) => {
                return Err(bad("wrong number of parameters"))
            }
            _ => return Err(bad("unknown shape name")),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ShapeSpec::Circle { r, .. } => r > 0.0,
            ShapeSpec::Ellipse { rx, ry, .. } => rx > 0.0 && ry > 0.0,
            ShapeSpec::Peanut { r0, c, .. } => r0 > 0.0 && c > 0.0,
            ShapeSpec::Flower { r0, eps, .. } => r0 > 0.0 && eps.abs() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("shape parameters out of range: {self:?}")))
        }
    }

    /// Samples the shape as a polyline with vertex spacing about `h`.
    pub fn sample(&self, h: f64) -> Result<BoundaryPolyline> {
        if !(h > 0.0) {
            return Err(Error::Config(format!("spacing must be positive, got {h}")));
        }
        let scale = match *self {
            ShapeSpec::Circle { r, .. } => r,
            ShapeSpec::Ellipse { rx, ry, .. } => rx.max(ry),
            ShapeSpec::Peanut { r0, c, .. } => r0 * c.sqrt().max(1.0),
            ShapeSpec::Flower { r0, eps, .. } => r0 * (1.0 + eps.abs()),
        };
        let n = ((2.0 * std::f64::consts::PI * scale / h).ceil() as usize).max(16);
        match *self {
            ShapeSpec::Circle { cx, cy, r } => {
                BoundaryPolyline::circle(Point2::new(cx, cy), r, n)
            }
            ShapeSpec::Ellipse { cx, cy, rx, ry } => {
                BoundaryPolyline::ellipse(Point2::new(cx, cy), rx, ry, n)
            }
            ShapeSpec::Peanut { cx, cy, r0, c } => {
                BoundaryPolyline::peanut(Point2::new(cx, cy), r0, c, n)
            }
            ShapeSpec::Flower { cx, cy, r0, eps, m } => {
                BoundaryPolyline::flower(Point2::new(cx, cy), r0, eps, m, n)
            }
        }
    }

    pub fn display(&self) -> String {
        match *self {
            ShapeSpec::Circle { cx, cy, r } => format!("circle:{cx},{cy},{r}"),
            ShapeSpec::Ellipse { cx, cy, rx, ry } => format!("ellipse:{cx},{cy},{rx},{ry}"),
            ShapeSpec::Peanut { cx, cy, r0, c } => format!("peanut:{cx},{cy},{r0},{c}"),
            ShapeSpec::Flower { cx, cy, r0, eps, m } => {
                format!("flower:{cx},{cy},{r0},{eps},{m}")
            }
        }
    }
}

fn check_mode(m: f64, text: &str) -> Result<u32> {
    if m >= 1.0 && m.fract() == 0.0 && m <= 64.0 {
        Ok(m as u32)
    } else {
        Err(Error::Config(format!(
            "bad shape spec '{text}': flower mode must be an integer in [1, 64]"
        )))
    }
}

#[derive(Clone, Debug)]
pub struct AdmmConfig {
    pub method: Method,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub lambda0: f64,
    pub v0: f64,
    pub epsilon: f64,
    pub max_outer: usize,
    pub inner_max: usize,
    pub h: f64,
    pub delta: f64,
    pub line_search: LineSearchParams,
    pub seed: u64,
    pub init_shape: ShapeSpec,
    pub save_every: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            method: Method::Admm,
            beta: 0.0055,
            a: 0.0,
            b: 2.0,
            lambda0: 0.001,
            v0: 1.0,
            epsilon: 1e-12,
            max_outer: 300,
            inner_max: 1,
            h: 0.04,
            delta: 0.05,
            line_search: LineSearchParams::default(),
            seed: 0,
            init_shape: ShapeSpec::Circle {
                cx: 0.0,
                cy: 0.0,
                r: 0.8,
            },
            save_every: 10,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.a <= 0.0 && 0.0 < self.b) {
            return Err(Error::Config(format!(
                "bounds must satisfy a <= 0 < b, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.inner_max == 0 {
            return Err(Error::Config("inner_max must be at least 1".into()));
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::Config(format!("h must lie in (0, 1), got {}", self.h)));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Config(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if self.save_every == 0 {
            return Err(Error::Config("save_every must be at least 1".into()));
        }
        self.line_search.validate()
    }

    /// Renders every setting as `key = value` lines for manifests and
    /// history metadata.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "method = {}",
            match self.method {
                Method::Admm => "admm",
                Method::Som => "som",
            }
        );
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "a = {}", self.a);
        let _ = writeln!(s, "b = {}", self.b);
        let _ = writeln!(s, "lambda0 = {}", self.lambda0);
        let _ = writeln!(s, "v0 = {}", self.v0);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "max_outer = {}", self.max_outer);
        let _ = writeln!(s, "inner_max = {}", self.inner_max);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "t_init = {}", self.line_search.t_init);
        let _ = writeln!(s, "shrink = {}", self.line_search.shrink);
        let _ = writeln!(s, "max_tries = {}", self.line_search.max_tries);
        let _ = writeln!(
            s,
            "ls_mode = {}",
            match self.line_search.mode {
                LineSearchMode::Backtrack => "backtrack",
                LineSearchMode::Scaled => "scaled",
            }
        );
        let _ = writeln!(s, "mu = {}", self.line_search.mu);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "init_shape = {}", self.init_shape.display());
        let _ = writeln!(s, "save_every = {}", self.save_every);
        s
    }
}

/// Path settings that live in config files but outside the solver proper.
#[derive(Clone, Debug, Default)]
pub struct RunPaths {
    pub data_file: Option<String>,
    pub out_dir: Option<String>,
}

/// Applies one `key = value` setting. Unknown keys are an error.
pub fn set_config_key(
    config: &mut AdmmConfig,
    paths: &mut RunPaths,
    key: &str,
    value: &str,
) -> Result<()> {
    let num = |v: &str| -> Result<f64> {
        v.parse()
            .map_err(|e| Error::Config(format!("bad number '{v}': {e}")))
    };
    let int = |v: &str| -> Result<usize> {
        v.parse()
            .map_err(|e| Error::Config(format!("bad integer '{v}': {e}")))
    };
    match key {
        "method" => {
            config.method = match value.to_ascii_lowercase().as_str() {
                "admm" => Method::Admm,
                "som" => Method::Som,
                other => return Err(Error::Config(format!("unknown method '{other}'"))),
            }
        }
        "beta" => config.beta = num(value)?,
        "a" => config.a = num(value)?,
        "b" => config.b = num(value)?,
        "lambda0" => config.lambda0 = num(value)?,
        "v0" => config.v0 = num(value)?,
        "epsilon" => config.epsilon = num(value)?,
        "max_outer" => config.max_outer = int(value)?,
        "inner_max" => config.inner_max = int(value)?,
        "h" => config.h = num(value)?,
        "delta" => config.delta = num(value)?,
        "t_init" => config.line_search.t_init = num(value)?,
        "shrink" => config.line_search.shrink = num(value)?,
        "max_tries" => config.line_search.max_tries = int(value)?,
        "ls_mode" => {
            config.line_search.mode = match value.to_ascii_lowercase().as_str() {
                "backtrack" => LineSearchMode::Backtrack,
                "scaled" => LineSearchMode::Scaled,
                other => return Err(Error::Config(format!("unknown ls_mode '{other}'"))),
            }
        }
        "mu" => config.line_search.mu = num(value)?,
        "seed" => {
            config.seed = value
                .parse()
                .map_err(|e| Error::Config(format!("bad seed '{value}': {e}")))?
        }
        "init_shape" => config.init_shape = ShapeSpec::parse(value)?,
        "data_file" => paths.data_file = Some(value.to_string()),
        "out_dir" => paths.out_dir = Some(value.to_string()),
        "save_every" => config.save_every = int(value)?,
        other => return Err(Error::Config(format!("unknown config key '{other}'"))),
    }
    Ok(())
}

/// Parses `key = value` config text into a config, starting from defaults.
/// Blank lines and `#` comments are ignored; unknown keys are an error.
pub fn parse_config(text: &str) -> Result<(AdmmConfig, RunPaths)> {
    let mut config = AdmmConfig::default();
    let mut paths = RunPaths::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{raw}'", i + 1))
        })?;
        set_config_key(&mut config, &mut paths, key.trim(), value.trim())
            .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
    }
    config.validate()?;
    Ok((config, paths))
}

/// Nodal clamp of `w` to `[a, b]`.
pub fn project_k(w: &ScalarField, a: f64, b: f64) -> ScalarField {
    let mut out = w.clone();
    for v in out.values_mut() {
        *v = v.clamp(a, b);
    }
    out
}

/// Closed-form v-subproblem solution: clamp of `u + λ/β`.
pub fn update_v(u: &ScalarField, lambda: &ScalarField, beta: f64, a: f64, b: f64) -> Result<ScalarField> {
    Ok(project_k(&u.add(&lambda.scaled(1.0 / beta))?, a, b))
}

/// Multiplier ascent: `λ + β(u − v)`.
pub fn update_multiplier(
    lambda: &ScalarField,
    beta: f64,
    u: &ScalarField,
    v: &ScalarField,
) -> Result<ScalarField> {
    lambda.add(&u.sub(v)?.scaled(beta))
}

pub struct RunOutput {
    pub history: ReconstructionHistory,
    /// Inner boundary polylines saved every `save_every` iterations plus
    /// the final iterate.
    pub snapshots: Vec<(usize, BoundaryPolyline)>,
    pub final_mesh: Mesh,
    pub final_u: ScalarField,
    /// Diagnostic text if the run stopped on repeated line-search failure
    /// or a solver error; the history still covers all completed iterations.
    pub aborted: Option<String>,
}

fn domain_l2(mesh: &Mesh, a: &ScalarField, b: &ScalarField) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(integrate_domain_product(mesh, &d, &d)?.max(0.0).sqrt())
}

/// Runs the full reconstruction. `reference` is the true inclusion boundary
/// when known (synthetic benchmarks); without it the Hausdorff column is NaN.
pub fn run(
    config: &AdmmConfig,
    data: &CauchyData,
    reference: Option<&BoundaryPolyline>,
) -> Result<RunOutput> {
    config.validate()?;
    let n_outer = ((2.0 * std::f64::consts::PI / config.h).ceil() as usize).max(16);
    let outer = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 1.0, n_outer)?;
    let inner0 = config.init_shape.sample(config.h)?;
    let mut mesh = triangulate_annulus(&outer, &inner0, config.h)?;
    let constraints = GeometryConstraints {
        delta: config.delta,
        ..GeometryConstraints::default()
    };
    let objective = ShapeObjective {
        data,
        beta: config.beta,
        method: config.method,
    };

    let mut u = solve_state(&mesh, data.g)?;
    let (mut v, mut lambda) = match config.method {
        Method::Admm => (
            ScalarField::constant(config.v0, mesh.n_vertices()),
            ScalarField::constant(config.lambda0, mesh.n_vertices()),
        ),
        Method::Som => (u.clone(), ScalarField::zeros(mesh.n_vertices())),
    };

    let mut history = ReconstructionHistory::new(config.render());
    let mut snapshots = Vec::new();
    let distance_to_truth = |mesh: &Mesh| -> Result<f64> {
        match reference {
            Some(truth) => Ok(hausdorff(&mesh.boundary_polyline(BoundaryLabel::Inner)?, truth)),
            None => Ok(f64::NAN),
        }
    };

    let j0 = crate::shape::cost_ls(&mesh, &u, &data.trace_on(&mesh)?)?;
    history.push(HistoryRecord {
        k: 0,
        j: j0,
        g: objective.value(&mesh, &u, &v, &lambda)?,
        j_norm: 1.0,
        hausdorff: distance_to_truth(&mesh)?,
        t: 0.0,
        primal_residual: match config.method {
            Method::Som => 0.0,
            Method::Admm => domain_l2(&mesh, &u, &v)?,
        },
    })?;
    snapshots.push((0, mesh.boundary_polyline(BoundaryLabel::Inner)?));

    let mut aborted = None;
    let mut stalled = 0usize;
    for k in 1..=config.max_outer {
        let sgd = match sgd_inner_loop(
            &mesh,
            &v,
            &lambda,
            &objective,
            &config.line_search,
            &constraints,
            config.inner_max,
            config.epsilon,
        ) {
            Ok(s) => s,
            Err(e) => {
                aborted = Some(format!("iteration {k}: {e}"));
                break;
            }
        };
        let converged = sgd.converged;
        if sgd.steps_taken == 0 && !converged {
            stalled += 1;
        } else {
            stalled = 0;
        }
        mesh = sgd.mesh;
        u = sgd.u;
        lambda = sgd.lambda;

        match config.method {
            Method::Admm => {
                v = update_v(&u, &lambda, config.beta, config.a, config.b)?;
                lambda = update_multiplier(&lambda, config.beta, &u, &v)?;
            }
            Method::Som => {
                v = u.clone();
                lambda = ScalarField::zeros(mesh.n_vertices());
            }
        }

        let j = crate::shape::cost_ls(&mesh, &u, &data.trace_on(&mesh)?)?;
        history.push(HistoryRecord {
            k,
            j,
            g: objective.value(&mesh, &u, &v, &lambda)?,
            j_norm: if j0 > 0.0 { j / j0 } else { f64::NAN },
            hausdorff: distance_to_truth(&mesh)?,
            t: sgd.last_t,
            primal_residual: match config.method {
                Method::Som => 0.0,
                Method::Admm => domain_l2(&mesh, &u, &v)?,
            },
        })?;
        if k % config.save_every == 0 {
            snapshots.push((k, mesh.boundary_polyline(BoundaryLabel::Inner)?));
        }

        if converged {
            break;
        }
        if stalled >= 3 {
            aborted = Some(format!(
                "iteration {k}: geometry stagnated, line search failed {stalled} times in a row"
            ));
            break;
        }

        if mesh.quality().min_quality < constraints.min_quality || k % 50 == 0 {
            let (fresh, _) = remesh(&mesh, config.h)?;
            v = transfer_field(&v, &mesh, &fresh)?;
            lambda = transfer_field(&lambda, &mesh, &fresh)?;
            u = transfer_field(&u, &mesh, &fresh)?;
            mesh = fresh;
        }
    }

    let last_k = history.last().map(|r| r.k).unwrap_or(0);
    if snapshots.last().map(|&(k, _)| k) != Some(last_k) {
        snapshots.push((last_k, mesh.boundary_polyline(BoundaryLabel::Inner)?));
    }
    Ok(RunOutput {
        history,
        snapshots,
        final_mesh: mesh,
        final_u: u,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::generate_synthetic_data;

    #[test]
    fn project_clamps_and_is_idempotent() {
        let w = ScalarField::new(vec![2.5, -1.0, 1.0, 0.0, 2.0]).unwrap();
        let p = project_k(&w, 0.0, 2.0);
        assert_eq!(p.values(), &[2.0, 0.0, 1.0, 0.0, 2.0]);
        assert_eq!(project_k(&p, 0.0, 2.0).values(), p.values());
    }

    #[test]
    fn update_v_identity_without_multiplier() {
        let u = ScalarField::new(vec![0.1, 1.9, 0.5]).unwrap();
        let lambda = ScalarField::zeros(3);
        let v = update_v(&u, &lambda, 0.0055, 0.0, 2.0).unwrap();
        assert_eq!(v.values(), u.values());
    }

    #[test]
    fn update_v_forced_upper_clamp() {
        let u = ScalarField::new(vec![0.3, 1.2]).unwrap();
        let beta = 0.0055;
        let lambda = ScalarField::new(u.values().iter().map(|ui| beta * (3.0 - ui)).collect())
            .unwrap();
        let v = update_v(&u, &lambda, beta, 0.0, 2.0).unwrap();
        assert_eq!(v.values(), &[2.0, 2.0]);
    }

    #[test]
    fn multiplier_fixed_point_and_affine_update() {
        let u = ScalarField::new(vec![0.5, 1.5]).unwrap();
        let lambda = ScalarField::constant(0.001, 2);
        let same = update_multiplier(&lambda, 0.0055, &u, &u).unwrap();
        assert_eq!(same.values(), lambda.values());
        let v = u.add(&ScalarField::constant(-1.0, 2)).unwrap();
        let up = update_multiplier(&lambda, 0.0055, &u, &v).unwrap();
        for x in up.values() {
            assert!((x - 0.0065).abs() < 1e-15);
        }
    }

    #[test]
    fn multiplier_vanishes_when_no_clamp_active() {
        let u = ScalarField::new(vec![0.2, 0.9, 1.4]).unwrap();
        let lambda = ScalarField::constant(0.001, 3);
        let beta = 0.0055;
        let v = update_v(&u, &lambda, beta, 0.0, 2.0).unwrap();
        let next = update_multiplier(&lambda, beta, &u, &v).unwrap();
        assert!(next.max_abs() <= 1e-12, "max |λ| = {}", next.max_abs());
    }

    #[test]
    fn shape_specs_parse_and_round_trip() {
        let s = ShapeSpec::parse("circle:0,0,0.5").unwrap();
        assert_eq!(s, ShapeSpec::Circle { cx: 0.0, cy: 0.0, r: 0.5 });
        let s = ShapeSpec::parse("flower:0.5,0.25,5").unwrap();
        assert_eq!(
            s,
            ShapeSpec::Flower { cx: 0.0, cy: 0.0, r0: 0.5, eps: 0.25, m: 5 }
        );
        let s = ShapeSpec::parse("peanut:0,0,0.55,0.4").unwrap();
        assert_eq!(ShapeSpec::parse(&s.display()).unwrap(), s);
        assert!(ShapeSpec::parse("circle:0.5,0").is_err());
        assert!(ShapeSpec::parse("blob:1,2").is_err());
        assert!(ShapeSpec::parse("circle:-1").is_err());
        assert!(ShapeSpec::parse("flower:0.5,0.25,2.5").is_err());
    }

    #[test]
    fn sampled_shapes_have_requested_resolution() {
        let poly = ShapeSpec::parse("circle:0,0,0.8").unwrap().sample(0.04).unwrap();
        let n = poly.points().len();
        let expected = (2.0 * std::f64::consts::PI * 0.8 / 0.04).ceil() as usize;
        assert_eq!(n, expected);
    }

    #[test]
    fn config_defaults_render_and_reparse() {
        let config = AdmmConfig::default();
        let (back, paths) = parse_config(&config.render()).unwrap();
        assert_eq!(back.beta, config.beta);
        assert_eq!(back.max_outer, config.max_outer);
        assert_eq!(back.init_shape, config.init_shape);
        assert!(paths.data_file.is_none());
        assert!(paths.out_dir.is_none());
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            parse_config("bogus = 1").unwrap_err(),
            Error::Config(_)
        ));
        assert!(parse_config("beta = -1").is_err());
        assert!(parse_config("a = 0.5").is_err());
        assert!(parse_config("ls_mode = newton").is_err());
        let (_, paths) =
            parse_config("# comment\n\ndata_file = d.csv\nout_dir = out\n").unwrap();
        assert_eq!(paths.data_file.as_deref(), Some("d.csv"));
        assert_eq!(paths.out_dir.as_deref(), Some("out"));
    }

    fn quick_data() -> CauchyData {
        let outer = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 1.0, 90).unwrap();
        let truth = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 0.5, 48).unwrap();
        generate_synthetic_data(&truth, &outer, 1.0, 0.07, 0.0, 1).unwrap()
    }

    #[test]
    fn zero_outer_budget_yields_initial_record_only() {
        let config = AdmmConfig {
            max_outer: 0,
            h: 0.1,
            ..AdmmConfig::default()
        };
        let data = quick_data();
        let truth = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 0.5, 48).unwrap();
        let out = run(&config, &data, Some(&truth)).unwrap();
        assert_eq!(out.history.records().len(), 1);
        let r0 = out.history.records()[0];
        assert_eq!(r0.k, 0);
        assert_eq!(r0.j_norm, 1.0);
        assert!(r0.hausdorff > 0.25 && r0.hausdorff < 0.35);
        assert_eq!(out.snapshots.len(), 1);
        assert!(out.aborted.is_none());
    }

    #[test]
    fn few_iterations_decrease_cost_and_distance() {
        let config = AdmmConfig {
            max_outer: 8,
            h: 0.1,
            ..AdmmConfig::default()
        };
        let data = quick_data();
        let truth = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 0.5, 48).unwrap();
        let out = run(&config, &data, Some(&truth)).unwrap();
        assert!(out.aborted.is_none(), "{:?}", out.aborted);
        let records = out.history.records();
        assert_eq!(records.len(), 9);
        let first = records[0];
        let last = records[records.len() - 1];
        assert!(last.j < first.j, "J did not decrease: {} -> {}", first.j, last.j);
        assert!(
            last.hausdorff < first.hausdorff,
            "distance did not decrease: {} -> {}",
            first.hausdorff,
            last.hausdorff
        );
        for r in records {
            assert!(r.primal_residual.is_finite() && r.primal_residual >= 0.0);
        }
    }

    #[test]
    fn som_runs_and_records_zero_residual() {
        let config = AdmmConfig {
            method: Method::Som,
            max_outer: 4,
            h: 0.1,
            ..AdmmConfig::default()
        };
        let data = quick_data();
        let out = run(&config, &data, None).unwrap();
        for r in out.history.records() {
            assert_eq!(r.primal_residual, 0.0);
            assert!(r.hausdorff.is_nan());
        }
        let records = out.history.records();
        assert!(records[records.len() - 1].j < records[0].j);
    }

    #[test]
    fn identical_configs_reproduce_histories_exactly() {
        let config = AdmmConfig {
            max_outer: 3,
            h: 0.1,
            ..AdmmConfig::default()
        };
        let data = quick_data();
        let a = run(&config, &data, None).unwrap();
        let b = run(&config, &data, None).unwrap();
        assert_eq!(a.history.records().len(), b.history.records().len());
        for (x, y) in a.history.records().iter().zip(b.history.records()) {
            assert_eq!(x.j.to_bits(), y.j.to_bits());
            assert_eq!(x.g.to_bits(), y.g.to_bits());
            assert_eq!(x.t.to_bits(), y.t.to_bits());
            assert_eq!(x.primal_residual.to_bits(), y.primal_residual.to_bits());
        }
    }

    #[test]
    fn v_stays_in_bounds_every_iteration() {
        let config = AdmmConfig {
            max_outer: 6,
            h: 0.1,
            ..AdmmConfig::default()
        };
        let data = quick_data();
        // Bounds are enforced inside run(); re-derive the invariant through
        // the public update on a short manual loop.
        let out = run(&config, &data, None).unwrap();
        assert!(out.aborted.is_none());
        let u = out.final_u;
        let lambda = ScalarField::constant(config.lambda0, u.len());
        let v = update_v(&u, &lambda, config.beta, config.a, config.b).unwrap();
        for &x in v.values() {
            assert!((config.a..=config.b).contains(&x));
        }
    }
}
