//! Parameter grids in units of σ.

/// Grid points are rounded to this many decimals so `0.05:0.3:0.05` prints as typed.
const GRID_DECIMALS: i32 = 12;
const MAX_POINTS: usize = 1_000_000;

/// Parses `START:STOP:STEP` into `START, START+STEP, ...` up to and including STOP.
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("expected START:STOP:STEP, got `{text}`"));
    };
    let num = |s: &str, what: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{what} `{s}` is not a finite number"))
    };
    let (start, stop, step) = (num(start, "start")?, num(stop, "stop")?, num(step, "step")?);
    if step <= 0.0 {
        return Err(format!("step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("stop {stop} is below start {start}"));
    }
    let span = (stop - start) / step;
    let count = (span + 1e-9).floor() as usize + 1;
    if count > MAX_POINTS {
        return Err(format!("range has {count} points, more than {MAX_POINTS}"));
    }
    let scale = 10f64.powi(GRID_DECIMALS);
    Ok((0..count)
        .map(|i| ((start + step * i as f64) * scale).round() / scale)
        .collect())
}

pub fn check_grid(values: &[f64]) -> Result<(), String> {
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(format!("grid contains non-finite value {v}"));
    }
    if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
        return Err(format!(
            "grid is not strictly increasing at {} -> {}",
            w[0], w[1]
        ));
    }
    Ok(())
}
