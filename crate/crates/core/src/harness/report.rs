use std::path::Path;

use super::{
    heatmap_svg, line_plot_svg, save_trace, HarnessError, RunConfig, Series, StageInput, StageReport, StageTiming,
};
use crate::model::{init_state, simulate, static_voltages, VoltageTrace};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

pub fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes the config snapshot a run was made with.
pub fn write_config(dir: &Path, cfg: &RunConfig) -> Result<(), HarnessError> {
    write_file(&dir.join("config.json"), &cfg.to_json())
}

/// Writes a stage's results, timings, traces and plots under `dir`.
///
/// `results.json` is deterministic; wall-clock times go to `timing.json`.
pub fn write_stage(dir: &Path, input: &StageInput, report: &StageReport, timing: &StageTiming) -> Result<(), HarnessError> {
    write_file(&dir.join("results.json"), &to_json(report))?;
    write_file(&dir.join("timing.json"), &to_json(timing))?;
    write_file(&dir.join("sensitivity.csv"), &report.sensitivity.to_csv())?;
    write_file(&dir.join("ocv.csv"), &report.composition.macro_chars.to_csv())?;

    let sens = &report.sensitivity;
    let rows: Vec<&str> = sens.params.iter().map(|p| p.name()).collect();
    let cols: Vec<String> = (1..=sens.s.first().map_or(0, |r| r.len())).map(|j| format!("z{j}")).collect();
    write_file(
        &dir.join("plots/sensitivity.svg"),
        &heatmap_svg("Total-effect indices", &rows, &cols, &sens.s),
    )?;

    // Quasi-static fit.
    let traces = dir.join("traces");
    std::fs::create_dir_all(&traces).map_err(io_err(&traces))?;
    save_trace(&input.quasi_static, &traces.join("quasi_static_measured.csv"))?;
    let id = &report.composition.static_id;
    let qs_fit = static_voltages(
        id.stoich_neg_t0,
        id.stoich_pos_t0,
        &input.quasi_static_profile.samples,
        input.quasi_static_profile.dt,
        &report.composition.params,
    )?;
    let qs_fit = VoltageTrace {
        time: input.quasi_static.time.clone(),
        current: input.quasi_static.current.clone(),
        voltage: qs_fit,
    };
    save_trace(&qs_fit, &traces.join("quasi_static_fitted.csv"))?;
    write_file(
        &dir.join("plots/quasi_static_fit.svg"),
        &line_plot_svg(
            "Quasi-static test",
            "time (s)",
            "voltage (V)",
            &[
                Series { label: "measured", x: &input.quasi_static.time, y: &input.quasi_static.voltage },
                Series { label: "fitted", x: &qs_fit.time, y: &qs_fit.voltage },
            ],
        ),
    )?;

    // Pulse fits with the identified parameters.
    let mut params = report.composition.params.clone();
    params.transport = report.identification.apply(&params.transport);
    let init = init_state(&params, report.pulse_start.neg, report.pulse_start.pos)?;
    for (k, (prof, meas)) in input.pulse_profiles.iter().zip(&input.pulses).enumerate() {
        let fit = simulate(prof, &params, &init)?;
        let name = format!("pulse_{}", k + 1);
        save_trace(meas, &traces.join(format!("{name}_measured.csv")))?;
        save_trace(&fit, &traces.join(format!("{name}_fitted.csv")))?;
        write_file(
            &dir.join(format!("plots/{name}_fit.svg")),
            &line_plot_svg(
                &format!("Pulse {} ({})", k + 1, prof.label),
                "time (s)",
                "voltage (V)",
                &[
                    Series { label: "measured", x: &meas.time, y: &meas.voltage },
                    Series { label: "identified", x: &fit.time, y: &fit.voltage },
                ],
            ),
        )?;
    }

    // Convergence of each step, log10 of the scaled objective.
    let curves: Vec<(String, Vec<f64>, Vec<f64>)> = report
        .identification
        .steps
        .iter()
        .map(|s| {
            let x = (1..=s.history.len()).map(|i| i as f64).collect();
            let y = s.history.iter().map(|v| v.max(1e-300).log10()).collect();
            let names: Vec<&str> = s.step.params.iter().map(|p| p.name()).collect();
            (format!("{} {}", s.index, names.join("+")), x, y)
        })
        .collect();
    let series: Vec<Series> = curves
        .iter()
        .map(|(l, x, y)| Series { label: l, x, y })
        .collect();
    write_file(
        &dir.join("plots/convergence.svg"),
        &line_plot_svg("Stepwise identification", "iteration", "log10 objective (mV²)", &series),
    )?;
    Ok(())
}
