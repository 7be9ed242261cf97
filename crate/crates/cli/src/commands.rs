use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sawkit::fixtures;
use sawkit::ingest::{
    parse_csv_sweep, parse_touchstone, write_csv, write_touchstone, NetworkSweep, PortPair,
    Representation,
};
use sawkit::numerics::{db_convert, DbMode};
use sawkit::qdyn::{
    fit_rabi, odar_spectrum, sideband_spectrum, simulate_rabi_trace, RabiConvention,
};
use sawkit::specanalysis::{cavity_report, default_trace, reflection_comb, CavityGeometry, CavityOptions, Coupling};
use sawkit::spinphonon::{
    beam_profile, coupling_rate, rabi_chain, rabi_from_phonons, resonance_axial_field,
    synthetic_strain_tensors, transverse_field, ChainInputs, GaussianBeam, PhononBudget, SivParams,
    StrainTensor, REFERENCE_MODE_HZ,
};
use sawkit::timedomain::{
    detect_echoes, fit_echo_decay, impulse_response, synthesize_echo_network, time_gate, KnownLoss,
    LossModel, Window,
};

use crate::config::Config;
use crate::error::CliError;
use crate::output::Output;
use crate::si::parse_si_list;
use crate::svg::line_plot;
use crate::{
    BudgetArgs, CavityArgs, Cli, Command, ConventionArg, ConvertArgs, CouplingArg, CouplingArgs, EchoLossArgs,
    GateArgs, OdarArgs, RabiArgs, ReprArg, SidebandArgs, SimulateCommand, SivArgs, StrainArgs,
    SynthCombArgs, SynthCommand, SynthEchoArgs, TraceArg, WindowArg,
};

type Result<T> = std::result::Result<T, CliError>;

struct Ctx {
    cfg: Config,
    out: Output,
    seed: u64,
}

impl Ctx {
    fn opt(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.cfg.number(key),
        }
    }

    fn req(&self, flag: Option<f64>, key: &str) -> Result<f64> {
        self.opt(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("--{key} is required (flag or config key)")))
    }

    fn or(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn count(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.cfg.number(key)? {
            None => Ok(default),
            Some(v) if v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64 => Ok(v as usize),
            Some(v) => Err(CliError::Usage(format!("config key '{key}' must be a count, got {v}"))),
        }
    }

    fn list(&self, flag: Option<&str>, key: &str) -> Result<Option<Vec<f64>>> {
        match flag {
            Some(s) => parse_si_list(s)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("--{key}: {e}"))),
            None => self.cfg.list(key),
        }
    }

    fn input(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        flag.or_else(|| self.cfg.get("input").map(PathBuf::from))
            .ok_or_else(|| CliError::Usage("--input is required (flag or config key)".into()))
    }

    fn plot(&self, name: &str, title: &str, xl: &str, yl: &str, x: &[f64], y: &[f64]) -> Result<()> {
        if self.out.plot {
            self.out.write(name, &line_plot(title, xl, yl, x, y))?;
        }
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ctx = Ctx {
        cfg,
        out: Output {
            dir: cli.out_dir.clone(),
            plot: cli.plot,
        },
        seed: cli.seed,
    };
    match cli.command {
        Command::Cavity(a) => cavity(&ctx, a),
        Command::EchoLoss(a) => echo_loss(&ctx, a),
        Command::Gate(a) => gate(&ctx, a),
        Command::Budget(a) => budget(&ctx, a),
        Command::Coupling(a) => coupling(&ctx, a),
        Command::Simulate(SimulateCommand::Rabi(a)) => sim_rabi(&ctx, a),
        Command::Simulate(SimulateCommand::Odar(a)) => sim_odar(&ctx, a),
        Command::Simulate(SimulateCommand::Sidebands(a)) => sim_sidebands(&ctx, a),
        Command::Synth(SynthCommand::Echo(a)) => synth_echo(&ctx, a),
        Command::Synth(SynthCommand::Comb(a)) => synth_comb(&ctx, a),
        Command::Convert(a) => convert(&ctx, a),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Reads a sweep, choosing the parser from the file extension.
pub fn load_sweep(path: &Path) -> Result<NetworkSweep> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed = match extension(path).as_str() {
        "s1p" | "s2p" | "snp" => parse_touchstone(&bytes),
        "csv" => parse_csv_sweep(&bytes, None),
        other => {
            return Err(CliError::Usage(format!(
                "{}: unsupported extension '{other}' (expected .s1p, .s2p or .csv)",
                path.display()
            )))
        }
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Serialises a sweep in the format implied by `name`.
fn render_sweep(sweep: &NetworkSweep, name: &str, repr: ReprArg) -> Result<String> {
    match extension(Path::new(name)).as_str() {
        "s1p" | "s2p" => Ok(write_touchstone(sweep)),
        "csv" => {
            let pairs: Vec<PortPair> = sweep.pairs().collect();
            let r = match repr {
                ReprArg::Ri => Representation::RealImag,
                ReprArg::Db => Representation::DbPhase,
            };
            write_csv(sweep, &pairs, r).map_err(CliError::usage)
        }
        other => Err(CliError::Usage(format!(
            "output '{name}': unsupported extension '{other}' (expected .s1p, .s2p or .csv)"
        ))),
    }
}

fn pair(t: TraceArg) -> PortPair {
    match t {
        TraceArg::S11 => PortPair::S11,
        TraceArg::S21 => PortPair::S21,
        TraceArg::S12 => PortPair::S12,
        TraceArg::S22 => PortPair::S22,
    }
}

fn cavity(ctx: &Ctx, a: CavityArgs) -> Result<()> {
    let sweep = load_sweep(&ctx.input(a.input)?)?;
    let n_mirror = match a.n_mirror {
        Some(n) => n,
        None => ctx.count(None, "n-mirror", usize::MAX).and_then(|n| {
            u32::try_from(n)
                .map_err(|_| CliError::Usage("--n-mirror is required (flag or config key)".into()))
        })?,
    };
    let geom = CavityGeometry {
        d: ctx.req(a.d, "d")?,
        lambda0: ctx.req(a.lambda0, "lambda0")?,
        n_mirror,
        v_g: ctx.req(a.vg, "vg")?,
        v_p: None,
    };
    geom.validate().map_err(CliError::usage)?;
    let options = CavityOptions {
        trace: a.trace.map(pair),
        min_prominence: ctx.opt(a.min_prominence, "min-prominence")?,
        min_spacing: ctx.opt(a.min_spacing, "min-spacing")?,
        alpha_db_per_mm: ctx.opt(a.alpha_db_mm, "alpha-db-mm")?,
        coupling: match a.coupling {
            CouplingArg::Under => Coupling::Under,
            CouplingArg::Over => Coupling::Over,
        },
    };
    let report = cavity_report(&sweep, &geom, &options).map_err(CliError::analysis)?;
    ctx.out.write("cavity_modes.csv", &report.to_csv())?;
    let summary = report.summary();
    ctx.out.write("cavity_summary.txt", &summary)?;
    print!("{summary}");

    let shown = options.trace.unwrap_or_else(|| default_trace(&sweep));
    if let Some(mag) = sweep.magnitude(shown) {
        let ghz: Vec<f64> = sweep.freqs().iter().map(|f| f / 1e9).collect();
        ctx.plot("cavity_trace.svg", &format!("|{shown}|"), "frequency (GHz)", "magnitude", &ghz, &mag)?;
    }
    Ok(())
}

fn echo_loss(ctx: &Ctx, a: EchoLossArgs) -> Result<()> {
    let sweep = load_sweep(&ctx.input(a.input)?)?;
    let length = ctx.req(a.length, "length")?;
    let v_g = ctx.req(a.vg, "vg")?;
    if !(length > 0.0 && v_g > 0.0) {
        return Err(CliError::Usage("--length and --vg must be positive".into()));
    }
    let known = match (ctx.opt(a.known_r, "known-r")?, ctx.opt(a.known_alpha, "known-alpha")?) {
        (Some(r), None) => KnownLoss::Reflection(r),
        (None, Some(db)) => KnownLoss::Alpha(db_convert(db, DbMode::DbPerMmToPerMPower)),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --known-r or --known-alpha (dB/mm)".into(),
            ))
        }
    };
    let n_max = ctx.count(a.n_max, "n-max", 10)?;
    let window = match a.window {
        WindowArg::Hann => Window::hann(),
        WindowArg::Tukey => Window::default(),
        WindowArg::None => Window::None,
    };
    let ir = impulse_response(&sweep, window).map_err(CliError::analysis)?;
    let rt = 2.0 * length / v_g;
    let train = detect_echoes(&ir, rt, n_max).map_err(CliError::analysis)?;
    ctx.out.write("echo_train.csv", &train.to_csv())?;
    let fit = fit_echo_decay(&train, length, known).map_err(CliError::analysis)?;
    let mut text = fit.model.summary();
    let _ = writeln!(text, "round_trip_s={rt:.10e}");
    let _ = writeln!(text, "intercept={:.10e}", fit.intercept);
    let _ = writeln!(text, "slope={:.10e}", fit.slope);
    let _ = writeln!(text, "echoes_used={}", fit.echoes_used);
    ctx.out.write("loss_model.txt", &text)?;
    print!("{text}");

    let keep = ir.tau.iter().take_while(|t| **t <= (n_max as f64 + 1.5) * rt).count();
    let ns: Vec<f64> = ir.tau[..keep].iter().map(|t| t * 1e9).collect();
    let mag = ir.magnitude();
    ctx.plot("impulse_response.svg", "|h(tau)|", "delay (ns)", "|h|", &ns, &mag[..keep])
}

fn gate(ctx: &Ctx, a: GateArgs) -> Result<()> {
    let sweep = load_sweep(&ctx.input(a.input)?)?;
    let start = ctx.req(a.start, "start")?;
    let stop = ctx.req(a.stop, "stop")?;
    let gated = time_gate(&sweep, (start, stop)).map_err(CliError::analysis)?;
    let text = render_sweep(&gated, &a.output, ReprArg::Ri)?;
    let path = ctx.out.write(&a.output, &text)?;
    println!("wrote {}", path.display());
    if let Some(p) = gated.pairs().next() {
        let ghz: Vec<f64> = gated.freqs().iter().map(|f| f / 1e9).collect();
        let db = gated.magnitude_db(p).unwrap_or_default();
        ctx.plot("gated.svg", &format!("gated {p}"), "frequency (GHz)", "dB", &ghz, &db)?;
    }
    Ok(())
}

fn siv_params(ctx: &Ctx, s: &SivArgs) -> Result<SivParams> {
    let d = SivParams::default();
    let p = SivParams {
        gamma_s: ctx.or(s.gamma_s, "gamma-s", d.gamma_s)?,
        lambda_so: ctx.or(s.lambda_so, "lambda-so", d.lambda_so)?,
        d_s: ctx.or(s.d_s, "d-s", d.d_s)?,
        f_s: ctx.or(s.f_s, "f-s", d.f_s)?,
        theta: match ctx.opt(s.theta_deg, "theta-deg")? {
            Some(deg) => deg.to_radians(),
            None => d.theta,
        },
    };
    p.validate().map_err(CliError::usage)?;
    Ok(p)
}

/// The strain tensor from flags or config, or `None` when nothing was given.
fn strain(ctx: &Ctx, s: &StrainArgs) -> Result<Option<StrainTensor>> {
    let named = s.tensor.clone().or_else(|| ctx.cfg.get("tensor").map(str::to_string));
    let comps = [
        ctx.opt(s.eps_xx, "eps-xx")?,
        ctx.opt(s.eps_yy, "eps-yy")?,
        ctx.opt(s.eps_zz, "eps-zz")?,
        ctx.opt(s.eps_xy, "eps-xy")?,
        ctx.opt(s.eps_yz, "eps-yz")?,
        ctx.opt(s.eps_zx, "eps-zx")?,
    ];
    let any_component = comps.iter().any(Option::is_some);
    let eps = match named.as_deref() {
        Some(name) => {
            if any_component {
                return Err(CliError::Usage("--tensor cannot be combined with --eps-* components".into()));
            }
            let [(_, low), (_, high)] = synthetic_strain_tensors();
            match name {
                "low" => low,
                "high" => high,
                other => {
                    return Err(CliError::Usage(format!("unknown tensor '{other}' (expected low or high)")))
                }
            }
        }
        None if any_component => {
            let c = comps.map(|v| v.unwrap_or(0.0));
            StrainTensor {
                eps_xx: c[0],
                eps_yy: c[1],
                eps_zz: c[2],
                eps_xy: c[3],
                eps_yz: c[4],
                eps_zx: c[5],
            }
        }
        None => return Ok(None),
    };
    eps.validate().map_err(CliError::usage)?;
    Ok(Some(eps))
}

fn budget(ctx: &Ctx, a: BudgetArgs) -> Result<()> {
    let p_rf = match (a.power_w, ctx.opt(a.power_dbm, "power-dbm")?) {
        (Some(w), _) => w,
        (None, dbm) => {
            let dbm = dbm.unwrap_or(0.0);
            if dbm.is_nan() || dbm == f64::INFINITY {
                return Err(CliError::Usage(format!("invalid power {dbm} dBm")));
            }
            1e-3 * 10f64.powf(dbm / 10.0)
        }
    };
    let loss = ctx.list(a.loss.as_deref(), "loss")?.unwrap_or_else(|| vec![-10.0, -10.0]);
    let f0 = ctx.or(a.f0, "f0", 3.8e9)?;
    let t0 = ctx.or(a.t0, "t0", 20e-9)?;
    let beam = GaussianBeam::new(
        ctx.or(a.w0, "w0", 6.8e-6)?,
        ctx.or(a.lambda_acoustic, "lambda-acoustic", 1.1e-6)?,
    )
    .map_err(CliError::usage)?;
    let location = (ctx.or(a.r, "r", 0.0)?, ctx.or(a.z, "z", 0.0)?);
    let budget = PhononBudget::new(p_rf, &loss, f0, t0).map_err(CliError::usage)?;
    let beam_factor = beam_profile(&beam, location.0, location.1).map_err(CliError::usage)?;

    let mut text = String::new();
    let _ = writeln!(text, "p_rf_w={p_rf:.10e}");
    let chain: Vec<String> = loss.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(text, "loss_chain_db={}", chain.join(","));
    let _ = writeln!(text, "f0_hz={f0:.10e}");
    let _ = writeln!(text, "t0_s={t0:.10e}");
    let _ = writeln!(text, "p0_w={:.10e}", budget.p0);
    let _ = writeln!(text, "p_acoustic_w={:.10e}", budget.p_acoustic);
    let _ = writeln!(text, "n={:.10e}", budget.n);
    let _ = writeln!(text, "beam_factor={beam_factor:.10e}");

    let g_list = ctx.list(a.g.as_deref(), "g")?;
    match (g_list, strain(ctx, &a.strain)?) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --g or a strain tensor, not both".into()))
        }
        (None, Some(eps)) => {
            let chain = rabi_chain(&ChainInputs {
                p_rf_dbm: 10.0 * (p_rf / 1e-3).log10(),
                loss_chain_db: loss.clone(),
                f0,
                t0,
                params: siv_params(ctx, &a.siv)?,
                eps,
                beam,
                location,
                b_x: None,
            })
            .map_err(CliError::analysis)?;
            let _ = writeln!(text, "b_x_t={:.10e}", chain.b_x);
            let _ = writeln!(text, "g_focus_hz={:.10e}", chain.g_focus);
            let _ = writeln!(text, "g_hz={:.10e}", chain.g);
            let _ = writeln!(text, "rabi_hz={:.10e}", chain.rabi);
        }
        (g, None) => {
            let g = g.unwrap_or_else(|| vec![30e3, 70e3]);
            if g.is_empty() {
                return Err(CliError::Usage("--g must list at least one rate".into()));
            }
            let mut gs = Vec::new();
            let mut rabis = Vec::new();
            for g in &g {
                let r = rabi_from_phonons(budget.n, g * beam_factor).map_err(CliError::usage)?;
                gs.push(format!("{g:.10e}"));
                rabis.push(format!("{r:.10e}"));
            }
            let _ = writeln!(text, "g_focus_hz={}", gs.join(","));
            let _ = writeln!(text, "rabi_hz={}", rabis.join(","));
        }
    }
    ctx.out.write("budget.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn coupling(ctx: &Ctx, a: CouplingArgs) -> Result<()> {
    let params = siv_params(ctx, &a.siv)?;
    let f_mode = ctx.or(a.f_mode, "f-mode", REFERENCE_MODE_HZ)?;
    let eps = strain(ctx, &a.strain)?.ok_or_else(|| {
        CliError::Usage("no strain given: pass --eps-* components or --tensor low|high".into())
    })?;
    let omega = 2.0 * PI * f_mode;
    let b_z = resonance_axial_field(omega, &params).map_err(CliError::usage)?;
    let b_x = match ctx.opt(a.b_x, "b-x")? {
        Some(b) => b,
        None => transverse_field(omega, &params).map_err(CliError::usage)?,
    };
    let g = coupling_rate(&params, b_x, &eps).map_err(CliError::analysis)?;
    let text = format!("f_mode_hz={f_mode:.10e}\nb_z_t={b_z:.10e}\nb_x_t={b_x:.10e}\ng_hz={g:.10e}\n");
    ctx.out.write("coupling.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn grid(center: f64, span: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(span > 0.0) {
        return Err(CliError::Usage("need span > 0 and at least 2 points".into()));
    }
    let step = span / (points - 1) as f64;
    Ok((0..points).map(|k| center - 0.5 * span + k as f64 * step).collect())
}

fn two_column(header: &str, x: &[f64], y: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (a, b) in x.iter().zip(y) {
        let _ = writeln!(s, "{a:.16e},{b:.16e}");
    }
    s
}

fn convention(c: ConventionArg) -> RabiConvention {
    match c {
        ConventionArg::Cyclic => RabiConvention::Cyclic,
        ConventionArg::Angular => RabiConvention::Angular,
    }
}

fn sim_rabi(ctx: &Ctx, a: RabiArgs) -> Result<()> {
    let rabi = convention(a.convention).to_cyclic(ctx.or(a.rabi_mhz, "rabi-mhz", 33.4)? * 1e6);
    let tau = ctx.or(a.tau, "tau", f64::INFINITY)?;
    let t_max = ctx.or(a.t_max, "t-max", 200e-9)?;
    let points = ctx.count(a.points, "points", 401)?;
    let noise = ctx.or(a.noise, "noise", 0.0)?;
    if points < 2 || !(t_max > 0.0) {
        return Err(CliError::Usage("need --t-max > 0 and at least 2 points".into()));
    }
    let t: Vec<f64> = (0..points).map(|k| k as f64 * t_max / (points - 1) as f64).collect();
    let trace = simulate_rabi_trace(rabi, tau, &t, noise, ctx.seed).map_err(CliError::usage)?;
    ctx.out.write("rabi.csv", &two_column("t_s,population", &trace.x, &trace.y))?;
    let ns: Vec<f64> = trace.x.iter().map(|t| t * 1e9).collect();
    ctx.plot("rabi.svg", "Rabi oscillation", "time (ns)", "population", &ns, &trace.y)?;
    if a.fit {
        let fit = fit_rabi(&trace).map_err(CliError::analysis)?;
        let s = fit.summary();
        ctx.out.write("rabi_fit.txt", &s)?;
        print!("{s}");
    } else {
        println!("rabi_hz={rabi:.10e}\npi_time_s={:.10e}", 0.5 / rabi);
    }
    Ok(())
}

fn sim_odar(ctx: &Ctx, a: OdarArgs) -> Result<()> {
    let rabi = convention(a.convention).to_cyclic(ctx.or(a.rabi_mhz, "rabi-mhz", 25.0)? * 1e6);
    let f_spin = ctx.or(a.f_spin_ghz, "f-spin-ghz", 3.83)? * 1e9;
    let pulse = ctx.or(a.pulse, "pulse", 20e-9)?;
    let span = ctx.or(a.span, "span", 200e6)?;
    let points = ctx.count(a.points, "points", 801)?;
    let f = grid(f_spin, span, points)?;
    let spec = odar_spectrum(rabi, f_spin, pulse, &f).map_err(CliError::usage)?;
    ctx.out.write("odar.csv", &two_column("freq_hz,population", &spec.x, &spec.y))?;
    let ghz: Vec<f64> = spec.x.iter().map(|f| f / 1e9).collect();
    ctx.plot("odar.svg", "ODAR spectrum", "drive frequency (GHz)", "population", &ghz, &spec.y)?;
    let peak = spec.y.iter().copied().fold(0.0, f64::max);
    println!("peak_population={peak:.10e}");
    Ok(())
}

fn sim_sidebands(ctx: &Ctx, a: SidebandArgs) -> Result<()> {
    let carrier = ctx.or(a.carrier, "carrier", 0.0)?;
    let mod_freq = ctx.or(a.mod_freq, "mod-freq", 3.83e9)?;
    let beta = ctx.or(a.beta, "beta", 1.0)?;
    let linewidth = ctx.or(a.linewidth, "linewidth", 200e6)?;
    let orders = ctx.count(a.orders.map(|o| o as usize), "orders", 3)? as u32;
    let span = ctx.or(a.span, "span", 2.0 * (orders as f64 + 1.0) * mod_freq)?;
    let points = ctx.count(a.points, "points", 2001)?;
    let f = grid(carrier, span, points)?;
    let spec = sideband_spectrum(carrier, mod_freq, beta, linewidth, orders, &f)
        .map_err(CliError::usage)?;
    ctx.out.write("sidebands.csv", &two_column("freq_hz,intensity", &spec.x, &spec.y))?;
    let ghz: Vec<f64> = spec.x.iter().map(|f| f / 1e9).collect();
    ctx.plot("sidebands.svg", "Modulated line", "detuning (GHz)", "intensity", &ghz, &spec.y)?;
    let peak = spec.y.iter().copied().fold(0.0, f64::max);
    println!("peak_intensity={peak:.10e}");
    Ok(())
}

fn synth_echo(ctx: &Ctx, a: SynthEchoArgs) -> Result<()> {
    let base = fixtures::cavity_echo_network();
    let v_g = ctx.or(a.vg, "vg", base.v_g)?;
    let model = LossModel {
        t: ctx.or(a.t, "t", base.model.t)?,
        r: ctx.or(a.r, "r", base.model.r)?,
        alpha: db_convert(
            ctx.or(a.alpha_db_mm, "alpha-db-mm", base.model.alpha_db_per_mm())?,
            DbMode::DbPerMmToPerMPower,
        ),
        length: ctx.or(a.length, "length", v_g / (2.0 * fixtures::FSR_HZ))?,
    };
    model.validate().map_err(CliError::usage)?;
    let band = (
        ctx.or(a.f_start, "f-start", base.band.0)?,
        ctx.or(a.f_stop, "f-stop", base.band.1)?,
    );
    let mut syn = fixtures::echo_network(model);
    syn.v_g = v_g;
    syn.band = band;
    syn.idt = Some(fixtures::broadband_idt(band));
    syn.n_points = ctx.count(a.n_points, "n-points", base.n_points)?;
    syn.crosstalk = Complex64::new(ctx.or(a.crosstalk, "crosstalk", base.crosstalk.re)?, 0.0);
    syn.noise_sigma = ctx.or(a.noise, "noise", 0.0)?;
    syn.seed = ctx.seed;
    let sweep = synthesize_echo_network(&syn).map_err(CliError::usage)?;
    let path = ctx.out.write(&a.output, &render_sweep(&sweep, &a.output, ReprArg::Ri)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn synth_comb(ctx: &Ctx, a: SynthCombArgs) -> Result<()> {
    let fc = ctx.or(a.f_center, "f-center", fixtures::MODE_HZ)?;
    let fsr = ctx.or(a.fsr, "fsr", fixtures::FSR_HZ)?;
    let q = ctx.or(a.q, "q", fixtures::Q_LOADED)?;
    let s11_min = ctx.or(a.s11_min, "s11-min", fixtures::S11_MIN)?;
    let each = ctx.count(a.modes_each_side.map(|m| m as usize), "modes-each-side", 3)? as i64;
    let step = ctx.or(a.step, "step", 100e3)?;
    if !(fc > 0.0 && fsr > 0.0 && q > 0.0 && step > 0.0 && (0.0..1.0).contains(&s11_min)) {
        return Err(CliError::Usage(
            "need positive --f-center, --fsr, --q, --step and 0 <= --s11-min < 1".into(),
        ));
    }
    let half = (each as f64 + 1.0) * fsr;
    let points = (2.0 * half / step).round() as usize + 1;
    if points > 10_000_000 || fc - half <= 0.0 {
        return Err(CliError::Usage("comb band is too wide for the step or reaches 0 Hz".into()));
    }
    let freqs: Vec<f64> = (0..points).map(|k| fc - half + k as f64 * step).collect();
    let modes: Vec<(f64, f64)> = (-each..=each)
        .map(|k| {
            let f0 = fc + k as f64 * fsr;
            (f0, f0 / q)
        })
        .collect();
    let s11 = reflection_comb(&freqs, &modes, s11_min);
    let sweep = NetworkSweep::single(freqs, PortPair::S11, s11).map_err(CliError::usage)?;
    let path = ctx.out.write(&a.output, &render_sweep(&sweep, &a.output, ReprArg::Ri)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn convert(ctx: &Ctx, a: ConvertArgs) -> Result<()> {
    let sweep = load_sweep(&a.input)?;
    let path = ctx.out.write(&a.output, &render_sweep(&sweep, &a.output, a.repr)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
