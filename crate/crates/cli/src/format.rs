use sublorentz::{FrameCovector, GroupPoint};

/// Parse `a,b,c` into three finite floats.
pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.parse::<f64>().map_err(|e| format!("`{part}`: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("`{part}` is not finite"));
        }
    }
    Ok(out)
}

/// Render `v` with `digits` significant digits.
pub fn sig(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let text = format!("{v:.decimals$}");
    // values like 9.9999999996 can round up a magnitude
    if text.trim_start_matches('-').split('.').next().map_or(0, str::len) > digits && decimals > 0 {
        return format!("{:.*}", decimals - 1, v);
    }
    text
}

pub fn point(q: GroupPoint, digits: usize) -> String {
    format!("{},{},{}", sig(q.x, digits), sig(q.y, digits), sig(q.z, digits))
}

pub fn covector(h: FrameCovector, digits: usize) -> String {
    format!("{},{},{}", sig(h.hx, digits), sig(h.hy, digits), sig(h.hz, digits))
}
