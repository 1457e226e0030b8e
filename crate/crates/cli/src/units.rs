/// Parses a length with an optional unit suffix (m, mm, um/µm, nm) into
/// metres. A bare number is taken as metres.
pub fn parse_length(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let units: [(&str, f64); 6] = [
        ("mm", 1e-3),
        ("um", 1e-6),
        ("µm", 1e-6),
        ("μm", 1e-6),
        ("nm", 1e-9),
        ("m", 1.0),
    ];
    let (number, factor) = units
        .iter()
        .find_map(|(suffix, f)| t.strip_suffix(suffix).map(|n| (n, *f)))
        .unwrap_or((t, 1.0));
    let v: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a length (examples: 2.0mm, 775nm, 61um, 0)"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v * factor)
}
