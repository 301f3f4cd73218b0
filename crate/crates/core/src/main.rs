use clap::{Args, Parser, Subcommand, ValueEnum};
use knotvol::asymptotics::{self, Evaluator};
use knotvol::diagram::{self, braids, BraidWord};
use knotvol::jones::{self, RootOfUnity, TvLink};
use knotvol::numfmt;
use knotvol::potential::{self, BorromeanReduced, DiagramPotential, Fig8Reduced, Potential};
use knotvol::saddle::{self, Branches, ContinuationOptions, SaddlePoint, SolveOptions, Strategy};
use knotvol::specfun;
use knotvol::volume;
use knotvol::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

const SCHEMA: &str = "knotvol/1";
const CONFIG_ENV: &str = "KNOTVOL_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "knotvol", version, about = "Potential functions, saddle points and volumes of braid closures")]
struct Cli {
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON config file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value and gradients of the potential at a point
    Potential {
        #[command(flatten)]
        target: Target,
        /// colors, comma separated
        #[arg(long, required = true)]
        a: String,
        /// `auto` (a seeded generic point) or comma separated re:im pairs
        #[arg(long, default_value = "auto")]
        w: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        p: i32,
    },
    /// Saddle point at the given colors
    Solve(SolveArgs),
    /// Saddle point plus optimistic limit and tetrahedral volume
    Volume(SolveArgs),
    /// Colored Jones polynomial at t = exp(2 pi i p / N)
    Jones {
        #[command(flatten)]
        target: BraidTarget,
        #[arg(long, required = true)]
        colors: String,
        #[arg(long = "n", required = true)]
        n: u64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        p: i64,
        /// closed form instead of the state sum (fig8, borromean)
        #[arg(long)]
        habiro: bool,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Growth-rate sweep of |J| or of the Turaev-Viro invariant
    Sweep {
        /// fig8 or borromean
        #[arg(long, required = true)]
        link: String,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        p: i64,
        /// comma separated N values, or start:stop:step
        #[arg(long = "n-list")]
        n_list: Option<String>,
        /// Turaev-Viro sweep over these odd r
        #[arg(long = "tv")]
        tv: Option<String>,
    },
    /// Closed-form cone-manifold volumes
    Oracle {
        #[command(subcommand)]
        which: OracleCmd,
    },
    /// Quick invariant checks
    Selftest,
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    Fig8 {
        #[arg(long, required = true)]
        theta: f64,
    },
    Borromean {
        /// three cone angles
        #[arg(long, required = true, allow_hyphen_values = true)]
        angles: String,
    },
}

#[derive(Args, Debug, Clone)]
struct BraidTarget {
    /// braid word such as "s1 s2' s1 s2'"
    #[arg(long, conflicts_with = "link")]
    braid: Option<String>,
    #[arg(long)]
    strands: Option<usize>,
    /// fig8, hopf, trefoil, borromean, whitehead
    #[arg(long)]
    link: Option<String>,
}

impl BraidTarget {
    fn braid(&self) -> Result<BraidWord> {
        match (&self.braid, &self.link) {
            (Some(b), _) => BraidWord::parse(b, self.strands),
            (None, Some(l)) => braids::by_name(l).ok_or_else(|| Error::Parse(format!("unknown link '{l}'"))),
            (None, None) => Err(Error::Invalid("either --braid or --link is required".into())),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Target {
    #[command(flatten)]
    braid: BraidTarget,
    /// single-variable potential: fig8 or borromean
    #[arg(long, conflicts_with_all = ["braid", "link"])]
    reduced: Option<String>,
}

impl Target {
    fn potential(&self, p: i32) -> Result<Box<dyn Potential>> {
        if let Some(r) = &self.reduced {
            if p != 1 {
                return Err(Error::Invalid("reduced potentials take p = 1 only".into()));
            }
            return match r.as_str() {
                "fig8" => Ok(Box::new(Fig8Reduced)),
                "borromean" => Ok(Box::new(BorromeanReduced)),
                _ => Err(Error::Parse(format!("unknown reduced potential '{r}'"))),
            };
        }
        let d = diagram::from_braid(&self.braid.braid()?)?;
        Ok(Box::new(DiagramPotential { diagram: d, p }))
    }
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, required = true)]
    a: String,
    /// continue from the geometric saddle at these colors
    #[arg(long = "continue-from")]
    continue_from: Option<String>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// uniform, seeded:SEED[:COUNT] or file:PATH
    #[arg(long)]
    init: Option<String>,
    /// auto or comma separated integers
    #[arg(long)]
    branches: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    /// report every converged candidate
    #[arg(long)]
    all: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    newton_tol: f64,
    quad_tol: f64,
    max_iter: usize,
    seed: u64,
    starts: usize,
    branches: Option<Vec<i64>>,
    cap: usize,
    format: Format,
    jobs: Option<usize>,
    output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            quad_tol: 1e-12,
            max_iter: 100,
            seed: 42,
            starts: 64,
            branches: None,
            cap: jones::DEFAULT_CAP,
            format: Format::Json,
            jobs: None,
            output: None,
        }
    }
}

impl RunConfig {
    fn load(cli: &Cli) -> Result<Self> {
        let path = cli
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::Parse(format!("reading {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config: {e}")))?
            }
            None => RunConfig::default(),
        };
        if let Some(f) = cli.format {
            cfg.format = f;
        }
        if cli.jobs.is_some() {
            cfg.jobs = cli.jobs;
        }
        if cli.out.is_some() {
            cfg.output = cli.out.clone();
        }
        match &cli.command {
            Command::Solve(s) | Command::Volume(s) => {
                if let Some(t) = s.tol {
                    cfg.newton_tol = t;
                }
                if let Some(m) = s.max_iter {
                    cfg.max_iter = m;
                }
                if let Some(x) = s.seed {
                    cfg.seed = x;
                }
                if let Some(x) = s.starts {
                    cfg.starts = x;
                }
                if let Some(b) = &s.branches {
                    cfg.branches = if b == "auto" { None } else { Some(parse_list(b)?) };
                }
            }
            Command::Jones { cap: Some(c), .. } => cfg.cap = *c,
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) || !(self.quad_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if self.cap < 1_000_000 {
            return Err(Error::Invalid("state-space cap must be at least 1e6".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Invalid("--jobs must be positive".into()));
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.newton_tol,
            max_iter: self.max_iter,
            branches: match &self.branches {
                Some(k) => Branches::Fixed(k.clone()),
                None => Branches::Auto,
            },
            ..SolveOptions::default()
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| Error::Parse(format!("bad list entry '{x}'"))))
        .collect()
}

/// A single value is repeated on every component.
fn parse_colors(s: &str, components: usize) -> Result<Vec<C64>> {
    let mut a = parse_list::<f64>(s)?;
    if a.len() == 1 {
        a = vec![a[0]; components];
    }
    if a.len() != components {
        return Err(Error::Invalid(format!("{components} colors expected, got {}", a.len())));
    }
    potential::colors(&a)
}

fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(|x| {
            let (re, im) = x.trim().split_once(':').unwrap_or((x.trim(), "0"));
            match (re.parse::<f64>(), im.parse::<f64>()) {
                (Ok(r), Ok(i)) => Ok(C64::new(r, i)),
                _ => Err(Error::Parse(format!("bad complex entry '{x}', expected re:im"))),
            }
        })
        .collect()
}

fn parse_n_list(s: &str) -> Result<Vec<u64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<u64> = parse_list(&parts.join(","))?;
        if v[2] == 0 || v[0] > v[1] {
            return Err(Error::Parse(format!("bad range '{s}'")));
        }
        return Ok((v[0]..=v[1]).step_by(v[2] as usize).collect());
    }
    parse_list(s)
}

fn starts(pot: &dyn Potential, args: &SolveArgs, cfg: &RunConfig) -> Result<Vec<Vec<C64>>> {
    match &args.init {
        Some(s) => saddle::initial_guess(pot, &s.parse::<Strategy>()?),
        None => {
            let mut v = saddle::initial_guess(pot, &Strategy::Uniform)?;
            v.extend(saddle::initial_guess(
                pot,
                &Strategy::Seeded {
                    seed: cfg.seed,
                    count: cfg.starts,
                },
            )?);
            Ok(v)
        }
    }
}

fn pick(pot: &dyn Potential, a: &[C64], args: &SolveArgs, cfg: &RunConfig) -> Result<(SaddlePoint, Option<Value>)> {
    let ms = saddle::multistart(pot, a, &starts(pot, args, cfg)?, &cfg.solve_options());
    let all = args.all.then(|| {
        json!(ms
            .candidates
            .iter()
            .zip(&ms.scores)
            .filter(|(c, _)| c.converged)
            .map(|(c, s)| json!({"saddle": c, "volume_score": s}))
            .collect::<Vec<_>>())
    });
    match ms.best {
        Some(b) => Ok((ms.candidates[b].clone(), all)),
        None => {
            let best = ms
                .candidates
                .iter()
                .min_by(|x, y| x.residual.total_cmp(&y.residual))
                .map(|c| c.residual);
            Err(Error::NoConvergence(format!(
                "no start converged (best residual {})",
                best.map(numfmt::float).unwrap_or_else(|| "n/a".into())
            )))
        }
    }
}

fn run_solve(args: &SolveArgs, cfg: &RunConfig, with_volume: bool) -> Result<Value> {
    let pot = args.target.potential(1)?;
    let pot = pot.as_ref();
    let a = parse_colors(&args.a, pot.color_count())?;
    let (sp, all, path_len) = match &args.continue_from {
        Some(from) => {
            let a0 = parse_colors(from, pot.color_count())?;
            let (seed, _) = pick(pot, &a0, args, cfg)?;
            let opts = ContinuationOptions {
                solve: cfg.solve_options(),
                ..ContinuationOptions::default()
            };
            let path = saddle::continue_in_colors(pot, &a0, &a, args.steps, &seed, &opts)?;
            let n = path.points.len();
            (path.points.into_iter().last().unwrap(), None, Some(n))
        }
        None => {
            let (sp, all) = pick(pot, &a, args, cfg)?;
            (sp, all, None)
        }
    };
    let mut out = json!({
        "potential": pot.name(),
        "saddle": sp,
        "completeness_residual": saddle::completeness_residual(pot, &sp)?,
    });
    if let Some(n) = path_len {
        out["continuation_points"] = json!(n);
    }
    if with_volume {
        out["volume"] = serde_json::to_value(volume::report(pot, &sp)?).unwrap();
    }
    if let Some(all) = all {
        out["candidates"] = all;
    }
    Ok(out)
}

fn run_jones(
    target: &BraidTarget,
    colors: &str,
    n: u64,
    p: i64,
    habiro: bool,
    cfg: &RunConfig,
) -> Result<Value> {
    let colors: Vec<usize> = parse_list(colors)?;
    let root = RootOfUnity::new(n, p)?;
    let q = root.qparam();
    let (value, log_abs) = if habiro {
        let name = target
            .link
            .as_deref()
            .ok_or_else(|| Error::Invalid("--habiro needs --link fig8 or borromean".into()))?;
        let s = match (name, colors.as_slice()) {
            ("fig8" | "figure-eight" | "4_1", [c]) => jones::jones_fig8_habiro_scaled(*c, &q)?,
            ("borromean", [l, m, k]) => jones::jones_borromean_habiro_scaled(*l, *m, *k, &q)?,
            _ => return Err(Error::Invalid(format!("no closed form for '{name}' with these colors"))),
        };
        (s.to_c64(), s.log_abs())
    } else {
        let v = jones::jones_braid(&target.braid()?, &colors, &q, cfg.cap)?;
        (v, v.norm().ln())
    };
    Ok(json!({
        "N": n, "p": p, "colors": colors,
        "re": value.re, "im": value.im, "abs": value.norm(), "log_abs": log_abs,
        "method": if habiro { "closed_form" } else { "state_sum" },
    }))
}

fn run_sweep(link: &str, a: &str, p: i64, n_list: Option<&str>, tv: Option<&str>) -> Result<Value> {
    let (ev, target) = match link {
        "fig8" | "figure-eight" | "4_1" => (Evaluator::Fig8, TvLink::Fig8),
        "borromean" => (Evaluator::Borromean, TvLink::Borromean),
        _ => return Err(Error::Parse(format!("unknown link '{link}'"))),
    };
    let (sweep, reference) = if let Some(rs) = tv {
        let sweep = asymptotics::tv_growth(target, &parse_n_list(rs)?)?;
        let reference = match target {
            TvLink::Fig8 => volume::fig8_cone_volume(0.0)?,
            TvLink::Borromean => volume::borromean_cone_volume(0.0, 0.0, 0.0)?,
        };
        (sweep, reference)
    } else {
        let ns = parse_n_list(n_list.ok_or_else(|| Error::Invalid("--n-list or --tv is required".into()))?)?;
        let mut colors = parse_list::<f64>(a)?;
        let k = ev.pattern().components;
        if colors.len() == 1 && k > 1 {
            colors = vec![colors[0]; k];
        }
        let sweep = asymptotics::growth_rate(&ev, &colors, p, &ns)?;
        let angles: Vec<f64> = colors
            .iter()
            .map(|&x| 2.0 * PI - 2.0 * PI * p.unsigned_abs() as f64 * x)
            .collect();
        let reference = match target {
            TvLink::Fig8 => volume::fig8_cone_volume(angles[0].rem_euclid(2.0 * PI))?,
            TvLink::Borromean => volume::borromean_cone_volume(
                angles[0].rem_euclid(2.0 * PI),
                angles[1].rem_euclid(2.0 * PI),
                angles[2].rem_euclid(2.0 * PI),
            )?,
        };
        (sweep, reference)
    };
    let gap = sweep.extrapolated.map(|e| e - reference);
    Ok(json!({
        "sweep": sweep,
        "target": reference,
        "gap": gap,
    }))
}

fn run_oracle(which: &OracleCmd, cfg: &RunConfig) -> Result<Value> {
    match which {
        OracleCmd::Fig8 { theta } => Ok(json!({
            "link": "fig8", "theta": theta,
            "volume": volume::fig8_cone_volume_tol(*theta, cfg.quad_tol)?,
        })),
        OracleCmd::Borromean { angles } => {
            let v: Vec<f64> = parse_list(angles)?;
            if v.len() != 3 {
                return Err(Error::Invalid("three cone angles expected".into()));
            }
            Ok(json!({
                "link": "borromean", "angles": v,
                "volume": volume::borromean_cone_volume(v[0], v[1], v[2])?,
            }))
        }
    }
}

fn run_potential(target: &Target, a: &str, w: &str, p: i32, seed: u64) -> Result<Value> {
    let pot = target.potential(p)?;
    let a = parse_colors(a, pot.color_count())?;
    let w = if w == "auto" {
        saddle::initial_guess(pot.as_ref(), &Strategy::Seeded { seed, count: 1 })?.remove(0)
    } else {
        parse_complex_list(w)?
    };
    if w.len() != pot.var_count() {
        return Err(Error::Invalid(format!("expected {} values of w, got {}", pot.var_count(), w.len())));
    }
    let ev = pot.evaluate(&a, &w)?;
    Ok(json!({
        "potential": pot.name(),
        "a": a, "w": w, "p": p,
        "value": ev.value,
        "im_value": ev.value.im,
        "grad_w": ev.grad_w,
        "grad_a": ev.grad_a,
        "phi_tilde": volume::phi_tilde(pot.as_ref(), &a, &w)?,
    }))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: f64,
}

fn selftest() -> Result<Value> {
    let mut checks = Vec::new();
    let mut check = |name, detail: f64, tol: f64| checks.push(Check { name, pass: detail.abs() < tol, detail });

    check("dilog(1) = pi^2/6", specfun::dilog(C64::new(1.0, 0.0)).re - specfun::PI2_6, 1e-13);
    check(
        "D(e^{i pi/3})",
        specfun::bloch_wigner(C64::from_polar(1.0, PI / 3.0))? - 1.0149416064096536,
        1e-12,
    );

    let d = diagram::from_braid(&braids::figure_eight())?;
    check("diagram validates", diagram::validate(&d).len() as f64, 0.5);
    let a = [C64::new(0.93, 0.0)];
    let w: Vec<C64> = (0..d.region_count)
        .map(|k| C64::from_polar(1.0 + 0.05 * k as f64, -0.3 - 0.21 * k as f64))
        .collect();
    let ev = potential::evaluate(&d, &a, &w, 1)?;
    check("homogeneity", ev.grad_w.iter().sum::<C64>().norm(), 1e-10);
    let w2: Vec<C64> = w.iter().map(|z| z * z).collect();
    let e2 = potential::eval(&d, &a, &w, 2)?;
    let e1 = potential::eval(&d, &[a[0] * 2.0], &w2, 1)?;
    check("p-scaling", (e2 - e1 / 2.0).norm(), 1e-10);

    let sp = saddle::solve(&Fig8Reduced, &[C64::new(1.0, 0.0)], &[C64::from_polar(1.0, -PI / 2.0)], &SolveOptions::default())?;
    check("fig8 saddle", (sp.w[0] - Fig8Reduced::x0(1.0)).norm(), 1e-10);
    check(
        "fig8 optimistic limit",
        volume::optimistic_limit(&Fig8Reduced, &sp)? - volume::fig8_cone_volume(0.0)?,
        1e-9,
    );
    let pot = DiagramPotential::new(d);
    let gs = saddle::geometric_saddle(&pot, &[C64::new(1.0, 0.0)], &SolveOptions::default())?;
    let rep = volume::report(&pot, &gs)?;
    check("fig8 tetrahedra", rep.agreement.unwrap_or(f64::INFINITY), 1e-9);
    check(
        "fig8 completeness",
        saddle::completeness_residual(&pot, &gs)?.into_iter().fold(0.0, f64::max),
        1e-8,
    );

    let q = RootOfUnity::new(7, 1)?.qparam();
    let j1 = jones::jones_braid(&braids::figure_eight(), &[5], &q, jones::DEFAULT_CAP)?;
    let j2 = jones::jones_fig8_habiro(5, &q)?;
    check("state sum vs closed form", (j1 - j2).norm() / j2.norm(), 1e-10);
    let tv = jones::tv_sum(TvLink::Fig8, 21)?;
    check("tv imaginary residue", tv.imag_residue, 1e-10);

    let failures = checks.iter().filter(|c| !c.pass).count();
    Ok(json!({
        "checks": checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
        "failures": failures,
    }))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Potential { .. } => "potential",
        Command::Solve(_) => "solve",
        Command::Volume(_) => "volume",
        Command::Jones { .. } => "jones",
        Command::Sweep { .. } => "sweep",
        Command::Oracle { .. } => "oracle",
        Command::Selftest => "selftest",
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<Value>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, rows);
            }
        }
        other => rows.push(vec![Value::String(prefix.into()), other.clone()]),
    }
}

fn to_csv(command: &str, result: &Value) -> String {
    if command == "sweep" {
        let rows: Vec<Vec<Value>> = result["sweep"]["entries"]
            .as_array()
            .map(|es| {
                es.iter()
                    .map(|e| {
                        let colors = e["colors"]
                            .as_array()
                            .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                            .unwrap_or_default();
                        vec![e["n"].clone(), Value::String(colors), e["value"].clone()]
                    })
                    .collect()
            })
            .unwrap_or_default();
        return numfmt::to_csv(&["N", "colors", "value"], &rows);
    }
    let mut rows = Vec::new();
    flatten("", result, &mut rows);
    let rows: Vec<Vec<Value>> = rows
        .into_iter()
        .map(|r| match &r[1] {
            Value::Array(xs) => vec![
                r[0].clone(),
                Value::String(xs.iter().map(|x| numfmt::to_json_compact(x)).collect::<Vec<_>>().join(" ")),
            ],
            _ => r,
        })
        .collect();
    numfmt::to_csv(&["key", "value"], &rows)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Invalid(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Value> {
    match &cli.command {
        Command::Potential { target, a, w, p } => run_potential(target, a, w, *p, cfg.seed),
        Command::Solve(s) => run_solve(s, cfg, false),
        Command::Volume(s) => run_solve(s, cfg, true),
        Command::Jones {
            target,
            colors,
            n,
            p,
            habiro,
            ..
        } => run_jones(target, colors, *n, *p, *habiro, cfg),
        Command::Sweep { link, a, p, n_list, tv } => run_sweep(link, a, *p, n_list.as_deref(), tv.as_deref()),
        Command::Oracle { which } => run_oracle(which, cfg),
        Command::Selftest => selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = command_name(&cli.command);
    let cfg = match RunConfig::load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("knotvol: {e}");
            let body = json!({"schema": SCHEMA, "command": command, "error": {"kind": e.kind(), "message": e.to_string()}});
            println!("{}", numfmt::to_json(&body));
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(j) = cfg.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let outcome = run(&cli, &cfg);
    let (body, code) = match outcome {
        Ok(result) => {
            let failed = command == "selftest" && result["failures"].as_u64().unwrap_or(0) > 0;
            if cfg.format == Format::Csv {
                let text = format!(
                    "# {SCHEMA} {command} config {}\n{}",
                    numfmt::to_json_compact(&cfg),
                    to_csv(command, &result)
                );
                if let Err(e) = emit(&cfg, &text) {
                    eprintln!("knotvol: {e}");
                    return ExitCode::from(2);
                }
                return ExitCode::from(if failed { 1 } else { 0 });
            }
            (
                json!({"schema": SCHEMA, "command": command, "config": cfg, "result": result}),
                if failed { 1 } else { 0 },
            )
        }
        Err(e) => {
            eprintln!("knotvol: {e}");
            let mut err = json!({"kind": e.kind(), "message": e.to_string()});
            if let Error::ContinuationStuck { s, path } = &e {
                err["s"] = json!(s);
                err["partial_path"] = serde_json::to_value(path.as_ref()).unwrap_or(Value::Null);
            }
            (
                json!({"schema": SCHEMA, "command": command, "config": cfg, "error": err}),
                e.exit_code() as u8,
            )
        }
    };
    let mut text = numfmt::to_json(&body);
    text.push('\n');
    if let Err(e) = emit(&cfg, &text) {
        eprintln!("knotvol: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
